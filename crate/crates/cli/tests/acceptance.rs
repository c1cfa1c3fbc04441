//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use h2mmp::geometry::{generate_geometry, GeometryFamily, GeometrySpec, Kernel, KernelMatrix};
use h2mmp::h2::build_h2_from_source;
use h2mmp::htree::{build_block_tree, build_cluster_tree};
use h2mmp::metrics::{random_vector, relative_error, scaling_probe, ScalingParams};
use h2mmp::{formatted_mmp, mmp, BlockKind, Complex64, H2Matrix, MmpReport, Scalar};
use h2mmp_cli::{strip_wall_time, OUT_DIR_ENV};

const LEAFSIZE: usize = 30;
const ETA: f64 = 1.0;
const SWEEP: [f64; 3] = [1e-2, 1e-4, 1e-6];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Everything criteria 5 and 6 re-check, collected while 1–4 run.
#[derive(Default)]
struct Ledger {
    structural: Vec<String>,
    structural_fail: Vec<String>,
    mvp: Vec<(String, f64)>,
}

impl Ledger {
    fn product<T: Scalar>(&mut self, name: &str, a: &H2Matrix<T>, c: &H2Matrix<T>, r: &MmpReport) {
        let mut problems = Vec::new();
        let n = a.size();
        let (nest, ortho) = c.basis_defects();
        if n <= 1024 && nest > 1e-13 {
            problems.push(format!("nestedness {nest:e}"));
        }
        if ortho > 1e-12 {
            problems.push(format!("orthonormality {ortho:e}"));
        }
        if !r.pending_empty {
            problems.push("pending couplings left".into());
        }
        if !Arc::ptr_eq(c.structure_arc(), a.structure_arc()) {
            problems.push("structure replaced".into());
        }
        for (b, blk) in c.structure().blocks().iter().enumerate() {
            let shape = c.block_data(b).shape();
            let want = match blk.kind {
                BlockKind::Admissible => (c.row_basis().rank(blk.row), c.col_basis().rank(blk.col)),
                BlockKind::InadmissibleLeaf => {
                    (c.tree().cluster(blk.row).size(), c.tree().cluster(blk.col).size())
                }
                BlockKind::Subdivided => (0, 0),
            };
            if shape != want {
                problems.push(format!("block {b} changed shape"));
                break;
            }
        }
        if let Err(e) = r.check_bounds() {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            self.structural.push(name.to_string());
        } else {
            self.structural_fail.push(format!("{name}: {}", problems.join(", ")));
        }
    }

    fn mvp<T: Scalar>(&mut self, name: &str, h: &H2Matrix<T>) {
        if h.size() > 1024 {
            return;
        }
        let x = random_vector::<T>(h.size(), 99);
        let dense = h.to_dense() * &x;
        let err = (h.mvp(&x).unwrap() - &dense).norm() / dense.norm();
        self.mvp.push((name.to_string(), err));
    }
}

fn operand<T: Scalar>(spec: GeometrySpec, kernel: Kernel, leafsize: usize, eps_h2: f64) -> H2Matrix<T> {
    let points = generate_geometry(&spec).unwrap();
    let tree = build_cluster_tree(&points, leafsize).unwrap();
    let st = Arc::new(build_block_tree(&tree, ETA).unwrap());
    let source = KernelMatrix::new(points, kernel).unwrap();
    build_h2_from_source(&source, st, eps_h2).unwrap()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" > ")
}

fn oracle_equivalence(ledger: &mut Ledger) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [256, 512, 1024] {
        let spec = GeometrySpec {
            family: GeometryFamily::RandomCloud { n },
            seed: 0,
        };
        let a = operand::<f64>(spec, Kernel::laplace(), LEAFSIZE, 1e-6);
        let (c, report) = mmp(&a, &a, 1e-6).unwrap();
        let d = a.to_dense();
        let dd = &d * &d;
        let err = (c.to_dense() - &dd).norm() / dd.norm();
        pass &= err <= 1e-4;
        parts.push(format!("N={n} {err:.2e}"));
        ledger.product(&format!("random {n}"), &a, &c, &report);
        ledger.mvp(&format!("A random {n}"), &a);
        ledger.mvp(&format!("C random {n}"), &c);
    }
    Outcome::new(pass, format!("{} (bound 1e-4)", parts.join(", ")))
}

/// Errors along the sweep plus the formatted baseline for one family.
fn sweep<T: Scalar>(
    name: &str,
    spec: GeometrySpec,
    kernel: Kernel,
    leafsize: usize,
    ledger: &mut Ledger,
) -> (Vec<f64>, f64) {
    let a = operand::<T>(spec, kernel, leafsize, 1e-4);
    let errs = SWEEP
        .iter()
        .map(|&eps| {
            let (c, report) = mmp(&a, &a, eps).unwrap();
            ledger.product(&format!("{name} eps {eps:e}"), &a, &c, &report);
            relative_error(&a, &a, &c, 0).unwrap().value
        })
        .collect();
    let (f, report) = formatted_mmp(&a, &a).unwrap();
    ledger.product(&format!("{name} formatted"), &a, &f, &report);
    ledger.mvp(&format!("A {name}"), &a);
    (errs, relative_error(&a, &a, &f, 0).unwrap().value)
}

fn cube_spec() -> GeometrySpec {
    GeometrySpec {
        family: GeometryFamily::CubeArray { edge: 2, per_edge: 6 },
        seed: 0,
    }
}

fn helmholtz() -> Kernel {
    Kernel::helmholtz(2.0 * std::f64::consts::PI)
}

fn error_trend(ledger: &mut Ledger, cube: &mut Option<(Vec<f64>, f64)>) -> Outcome {
    let families: Vec<(&str, Box<dyn FnOnce(&mut Ledger) -> (Vec<f64>, f64)>)> = vec![
        (
            "bus",
            Box::new(|l| {
                let spec = GeometrySpec {
                    family: GeometryFamily::Bus {
                        conductors: 4,
                        density: 2,
                    },
                    seed: 0,
                };
                sweep::<f64>("bus", spec, Kernel::laplace(), LEAFSIZE, l)
            }),
        ),
        (
            "slab",
            Box::new(|l| {
                let spec = GeometrySpec {
                    family: GeometryFamily::Slab {
                        width: 24,
                        layers: 2,
                        spacing: 0.1,
                    },
                    seed: 0,
                };
                sweep::<Complex64>("slab", spec, helmholtz(), LEAFSIZE, l)
            }),
        ),
        ("cube_array", Box::new(|l| sweep::<Complex64>("cube_array", cube_spec(), helmholtz(), 20, l))),
        (
            "random_cloud",
            Box::new(|l| {
                let spec = GeometrySpec {
                    family: GeometryFamily::RandomCloud { n: 1024 },
                    seed: 0,
                };
                sweep::<f64>("random_cloud", spec, Kernel::laplace(), LEAFSIZE, l)
            }),
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, run) in families {
        let (errs, formatted) = run(ledger);
        let ok = errs[0] > 1.1 * errs[1] && errs[1] > 1.1 * errs[2] && errs[2] <= 1e-3;
        pass &= ok;
        parts.push(format!("{name} {}{}", fmt_list(&errs), if ok { "" } else { " FAILED" }));
        if name == "cube_array" {
            *cube = Some((errs, formatted));
        }
    }
    Outcome::new(pass, parts.join("; "))
}

fn baseline_dominance(cube: &Option<(Vec<f64>, f64)>) -> Outcome {
    match cube {
        Some((errs, formatted)) => Outcome::new(
            *formatted >= errs[0],
            format!(
                "cube array N=1728 helmholtz: formatted {formatted:.2e} vs proposed(1e-2) {:.2e}",
                errs[0]
            ),
        ),
        None => Outcome::new(false, "cube instance did not run"),
    }
}

fn linear_scaling() -> Outcome {
    let specs: Vec<_> = [1024, 2048, 4096]
        .iter()
        .map(|&n| GeometrySpec {
            family: GeometryFamily::RandomCloud { n },
            seed: 0,
        })
        .collect();
    let params = ScalingParams {
        kernel: Kernel::laplace(),
        leafsize: LEAFSIZE,
        eta: ETA,
        eps_h2: 1e-4,
        eps_trunc: 1e-4,
    };
    let probe = scaling_probe(&specs, &params).unwrap();
    let pass = probe.flops_ratios.iter().all(|&r| r <= 2.6)
        && probe.memory_ratios.iter().all(|&r| r <= 2.4)
        && probe.flops_ratios.len() == 2;
    let csp: Vec<_> = probe.records.iter().map(|r| r.csp.to_string()).collect();
    Outcome::new(
        pass,
        format!(
            "N=1024/2048/4096, C_sp {}: flops/C_sp² ratios {:.2?} (≤ 2.6), memory/C_sp ratios {:.2?} (≤ 2.4)",
            csp.join("/"),
            probe.flops_ratios,
            probe.memory_ratios
        ),
    )
}

fn structural(ledger: &Ledger) -> Outcome {
    if ledger.structural_fail.is_empty() {
        Outcome::new(
            !ledger.structural.is_empty(),
            format!("{} products checked", ledger.structural.len()),
        )
    } else {
        Outcome::new(false, ledger.structural_fail.join("; "))
    }
}

fn exact_mvp(ledger: &mut Ledger) -> Outcome {
    let spec = GeometrySpec {
        family: GeometryFamily::RandomCloud { n: 512 },
        seed: 1,
    };
    let a = operand::<Complex64>(spec, helmholtz(), LEAFSIZE, 1e-4);
    ledger.mvp("A helmholtz 512", &a);
    let worst = ledger.mvp.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    Outcome::new(
        worst <= 1e-11 && !ledger.mvp.is_empty(),
        format!("{} operators, worst {worst:.2e} (bound 1e-11)", ledger.mvp.len()),
    )
}

fn determinism() -> Outcome {
    let args = [
        "--geometry", "random", "--n", "512", "--kernel", "laplace", "--leafsize", "30", "--eta", "1.0",
        "--eps-h2", "1e-4", "--eps-trunc", "1e-2,1e-4,1e-6", "--mode", "both", "--format", "csv",
    ];
    let run = || {
        let o = Command::new(env!("CARGO_BIN_EXE_h2mmp"))
            .args(args)
            .env_remove(OUT_DIR_ENV)
            .output()
            .expect("binary runs");
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let (a, b) = (run(), run());
    let same = strip_wall_time(&a) == strip_wall_time(&b);
    let rows = a.lines().filter(|l| !l.starts_with('#')).count() - 1;
    Outcome::new(same && rows == 6, format!("two runs, {rows} rows, identical without wall_ms: {same}"))
}

fn main() -> ExitCode {
    let mut ledger = Ledger::default();
    let mut cube = None;
    let mut all = true;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} criterion {id} ({name}): {} [{secs:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        all &= o.pass;
    };
    report(1, "oracle equivalence", &mut || oracle_equivalence(&mut ledger));
    report(2, "error controllability", &mut || error_trend(&mut ledger, &mut cube));
    report(3, "baseline dominance", &mut || baseline_dominance(&cube));
    report(4, "linear-scaling counters", &mut linear_scaling);
    report(5, "structural invariants", &mut || structural(&ledger));
    report(6, "exact mvp", &mut || exact_mvp(&mut ledger));
    report(7, "determinism", &mut determinism);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
