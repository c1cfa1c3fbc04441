use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use h2mmp::geometry::{generate_geometry, GeometryFamily, GeometrySpec, Kernel};
use h2mmp::h2::build_h2_from_kernel;
use h2mmp::io::{load_h2, save_h2};
use h2mmp::metrics::{scaling_probe, ScalingParams};
use h2mmp::Complex64;
use h2mmp_cli::{run, write_file, CliError, Format, Mode, RunConfig, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "h2mmp", version, about = "H² matrix-matrix product benchmarks")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run a product sweep (the default when no subcommand is given).
    Run(RunArgs),
    /// Compress the kernel matrix and write it as h2json/1.
    Save {
        #[command(flatten)]
        operand: OperandArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print statistics of an h2json/1 file.
    Info { path: PathBuf },
    /// Flop and memory counters of A·A over a list of random-cloud sizes.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 30)]
        leafsize: usize,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 1e-4)]
        eps_h2: f64,
        #[arg(long, default_value_t = 1e-4)]
        eps_trunc: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Random,
    Bus,
    Slab,
    Cube,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Laplace,
    Helmholtz,
}

#[derive(Args, Clone)]
struct OperandArgs {
    #[arg(long, value_enum, default_value = "random")]
    geometry: GeometryArg,
    /// Point count of the random cloud.
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Conductors per bus layer.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Bus surface samples per unit length.
    #[arg(long, default_value_t = 2)]
    density: usize,
    /// Slab lattice width.
    #[arg(long, default_value_t = 24)]
    width: usize,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    #[arg(long, default_value_t = 0.1)]
    spacing: f64,
    /// Cubes per edge of the cube array.
    #[arg(long, default_value_t = 2)]
    edge: usize,
    /// Lattice points per cube edge.
    #[arg(long, default_value_t = 6)]
    per_edge: usize,
    #[arg(long, value_enum, default_value = "laplace")]
    kernel: KernelArg,
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    wavenumber: f64,
    /// Self-interaction value; defaults to twice the largest first-row entry.
    #[arg(long)]
    diag: Option<f64>,
    #[arg(long, default_value_t = 30)]
    leafsize: usize,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps_h2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl OperandArgs {
    fn geometry(&self) -> GeometrySpec {
        let family = match self.geometry {
            GeometryArg::Random => GeometryFamily::RandomCloud { n: self.n },
            GeometryArg::Bus => GeometryFamily::Bus {
                conductors: self.m,
                density: self.density,
            },
            GeometryArg::Slab => GeometryFamily::Slab {
                width: self.width,
                layers: self.layers,
                spacing: self.spacing,
            },
            GeometryArg::Cube => GeometryFamily::CubeArray {
                edge: self.edge,
                per_edge: self.per_edge,
            },
        };
        GeometrySpec {
            family,
            seed: self.seed,
        }
    }

    fn kernel(&self, kind: KernelArg) -> Kernel {
        let k = match kind {
            KernelArg::Laplace => Kernel::laplace(),
            KernelArg::Helmholtz => Kernel::helmholtz(self.wavenumber),
        };
        match self.diag {
            Some(d) => k.with_diagonal(d),
            None => k,
        }
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    operand: OperandArgs,
    /// Kernel of the right operand B; omitted means B = A.
    #[arg(long, value_enum)]
    kernel_b: Option<KernelArg>,
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-4,1e-6")]
    eps_trunc: Vec<f64>,
    #[arg(long, value_enum, default_value = "both")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout when omitted. The directory part is replaced
    /// by $H2MMP_OUT_DIR when that is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the random probe vector; defaults to --seed.
    #[arg(long)]
    vector_seed: Option<u64>,
}

impl RunArgs {
    fn config(&self, invocation: String) -> RunConfig {
        let op = &self.operand;
        RunConfig {
            geometry: op.geometry(),
            kernel: op.kernel(op.kernel),
            kernel_b: self.kernel_b.map(|k| op.kernel(k)),
            leafsize: op.leafsize,
            eta: op.eta,
            eps_h2: op.eps_h2,
            eps_trunc: self.eps_trunc.clone(),
            mode: self.mode,
            format: self.format,
            output: self.out.clone(),
            vector_seed: self.vector_seed.unwrap_or(op.seed),
            invocation: Some(invocation),
        }
    }
}

fn main() -> ExitCode {
    let invocation = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli, invocation) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli, invocation: String) -> Result<(), CliError> {
    match cli.command {
        None => run_sweep(&cli.run, invocation),
        Some(Command::Run(args)) => run_sweep(&args, invocation),
        Some(Command::Save { operand, out }) => {
            let points = generate_geometry(&operand.geometry())?;
            let kernel = operand.kernel(operand.kernel);
            let (l, e, eps) = (operand.leafsize, operand.eta, operand.eps_h2);
            let path = match std::env::var_os(OUT_DIR_ENV) {
                Some(dir) => PathBuf::from(dir).join(out.file_name().unwrap_or(out.as_os_str())),
                None => out,
            };
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(e.to_string()))?;
            }
            match kernel.scalar_kind() {
                h2mmp::ScalarKind::Real => {
                    save_h2(&build_h2_from_kernel::<f64>(&points, &kernel, l, e, eps)?, &path)?
                }
                h2mmp::ScalarKind::Complex => save_h2(
                    &build_h2_from_kernel::<Complex64>(&points, &kernel, l, e, eps)?,
                    &path,
                )?,
            }
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Some(Command::Info { path }) => {
            let h = load_h2(&path)?;
            let s = h.structure();
            println!("scalar: {:?}", h.scalar_kind());
            println!("N: {}", s.tree().size());
            println!("depth: {}", s.tree().depth());
            println!("C_sp: {}", s.csp());
            println!("blocks: {}", s.blocks().len());
            println!("max_rank: {}", h.max_rank());
            println!("memory_scalars: {}", h.memory_footprint());
            Ok(())
        }
        Some(Command::Scaling {
            sizes,
            leafsize,
            eta,
            eps_h2,
            eps_trunc,
            seed,
        }) => {
            let specs: Vec<_> = sizes
                .iter()
                .map(|&n| GeometrySpec {
                    family: GeometryFamily::RandomCloud { n },
                    seed,
                })
                .collect();
            let params = ScalingParams {
                kernel: Kernel::laplace(),
                leafsize,
                eta,
                eps_h2,
                eps_trunc,
            };
            let probe = scaling_probe(&specs, &params)?;
            let mut text = String::from("# h2mmp-scaling/1\nN,flops,memory_scalars,C_sp,depth,flops_per_csp2,memory_per_csp,wall_ms\n");
            for r in &probe.records {
                text += &format!(
                    "{},{},{},{},{},{:e},{:e},{:.3}\n",
                    r.n,
                    r.flops,
                    r.memory_scalars,
                    r.csp,
                    r.depth,
                    r.flops_per_csp2(),
                    r.memory_per_csp(),
                    r.wall_time_mmp_ms
                );
            }
            print!("{text}");
            println!("# flops/C_sp^2 ratios: {:?}", probe.flops_ratios);
            println!("# memory/C_sp ratios: {:?}", probe.memory_ratios);
            if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
                write_file(&PathBuf::from(dir).join("scaling.csv"), &text)?;
            }
            Ok(())
        }
    }
}

fn run_sweep(args: &RunArgs, invocation: String) -> Result<(), CliError> {
    let config = args.config(invocation);
    let text = run(&config)?;
    if config.resolved_output().is_none() {
        print!("{text}");
    }
    Ok(())
}
