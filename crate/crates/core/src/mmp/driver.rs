use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use super::split::{split_into, PendingCouplings};
use super::{basis_products, Case, MmpWorkspace, Target};
use crate::error::{Error, Result};
use crate::h2::H2Matrix;
use crate::htree::{BlockKind, BlockTree};
use crate::linalg::{block_diag, normalized_sum, Category, FlopCounter, GramGroup, Op};
use crate::scalar::Scalar;

/// One block product `A(i,j)·B(j,k)` on a single level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub level: usize,
    /// Block ids of `A(i,j)` and `B(j,k)` in the shared block tree.
    pub a_block: usize,
    pub b_block: usize,
    pub case: Case,
    pub target: Target,
}

impl Triple {
    /// All products of the recursive expansion of `A·B`, per level and
    /// ordered by `(i, k, j)`.
    pub fn enumerate(structure: &BlockTree) -> Vec<Vec<Triple>> {
        let mut out = vec![Vec::new(); structure.tree().depth() + 1];
        let mut stack = vec![(0usize, 0usize, 0usize)];
        let tree = structure.tree();
        while let Some((i, j, k)) = stack.pop() {
            let a_block = structure.find(i, j).expect("operand block must exist");
            let b_block = structure.find(j, k).expect("operand block must exist");
            let (ka, kb) = (structure.block(a_block).kind, structure.block(b_block).kind);
            use BlockKind::*;
            let case = match (ka, kb) {
                (Subdivided, Subdivided) => {
                    let (ci, cj, ck) = (
                        tree.children(i).unwrap(),
                        tree.children(j).unwrap(),
                        tree.children(k).unwrap(),
                    );
                    for &x in &ci {
                        for &y in &cj {
                            for &z in &ck {
                                stack.push((x, y, z));
                            }
                        }
                    }
                    continue;
                }
                (InadmissibleLeaf, InadmissibleLeaf) => Case::FullFull,
                (InadmissibleLeaf | Subdivided, Admissible) => Case::FullLowRank,
                (Admissible, InadmissibleLeaf | Subdivided) => Case::LowRankFull,
                (Admissible, Admissible) => Case::LowRankLowRank,
                _ => unreachable!("dense and subdivided blocks never share a level"),
            };
            let level = tree.cluster(i).level;
            out[level].push(Triple {
                i,
                j,
                k,
                level,
                a_block,
                b_block,
                case,
                target: Target::of(structure, i, k),
            });
        }
        for lvl in &mut out {
            lvl.sort_by_key(|t| (t.i, t.k, t.j));
        }
        out
    }
}

pub(crate) struct SweepOutput<T: Scalar> {
    pub row_local: Vec<DMatrix<T>>,
    pub row_degenerate: Vec<bool>,
    pub col_local: Vec<DMatrix<T>>,
    pub col_degenerate: Vec<bool>,
    pub data: Vec<DMatrix<T>>,
    pub case_counts: Vec<[usize; 4]>,
    pub case_max: [usize; 4],
    pub gram_term_max: [usize; 2],
    pub flops: FlopCounter,
    pub pending_empty: bool,
    pub workspace: MmpWorkspace<T>,
}

/// State of the bottom-up sweep. Cluster and block ids index the shared
/// trees of `A`, `B` and `C`.
pub(crate) struct Sweep<'a, T: Scalar> {
    a: &'a H2Matrix<T>,
    b: &'a H2Matrix<T>,
    st: &'a BlockTree,
    eps: Option<f64>,
    flops: FlopCounter,
    triples: Vec<Vec<Triple>>,
    bj: Vec<DMatrix<T>>,
    crow: Vec<DMatrix<T>>,
    ccol: Vec<DMatrix<T>>,
    crow_deg: Vec<bool>,
    ccol_deg: Vec<bool>,
    pa: Vec<DMatrix<T>>,
    pb: Vec<DMatrix<T>>,
    ya: Vec<Option<DMatrix<T>>>,
    yb: Vec<Option<DMatrix<T>>>,
    data: Vec<DMatrix<T>>,
    nl: PendingCouplings<T>,
    /// Couplings of pairs inside coarser admissible blocks, keyed by the
    /// cluster pair of the level just processed.
    pend: BTreeMap<(usize, usize), DMatrix<T>>,
    row_terms: Vec<[usize; 3]>,
    col_terms: Vec<[usize; 3]>,
    case_counts: Vec<[usize; 4]>,
    case_max: [usize; 4],
    pending_empty: bool,
}

impl<'a, T: Scalar> Sweep<'a, T> {
    pub fn new(a: &'a H2Matrix<T>, b: &'a H2Matrix<T>, eps: Option<f64>) -> Self {
        let st = a.structure();
        let tree = st.tree();
        let (nc, nb) = (tree.len(), st.blocks().len());
        let mut flops = FlopCounter::new();
        let bj = basis_products(a, b, &mut flops);
        let data = st
            .blocks()
            .iter()
            .map(|blk| match blk.kind {
                BlockKind::InadmissibleLeaf => {
                    DMatrix::zeros(tree.cluster(blk.row).size(), tree.cluster(blk.col).size())
                }
                _ => DMatrix::zeros(0, 0),
            })
            .collect();
        let empty = || vec![DMatrix::zeros(0, 0); nc];
        Self {
            a,
            b,
            st,
            eps,
            flops,
            triples: Triple::enumerate(st),
            bj,
            crow: empty(),
            ccol: empty(),
            crow_deg: vec![false; nc],
            ccol_deg: vec![false; nc],
            pa: empty(),
            pb: empty(),
            ya: vec![None; nb],
            yb: vec![None; nb],
            data,
            nl: PendingCouplings::new(nb),
            pend: BTreeMap::new(),
            row_terms: vec![[0; 3]; nc],
            col_terms: vec![[0; 3]; nc],
            case_counts: vec![[0; 4]; tree.depth() + 1],
            case_max: [0; 4],
            pending_empty: false,
        }
    }

    pub fn run(&mut self) -> Result<()> {
        let depth = self.st.tree().depth();
        for level in (0..=depth).rev() {
            self.level(level)?;
        }
        self.pending_empty = self.pend.is_empty();
        let (st, crow, ccol) = (self.st, &self.crow, &self.ccol);
        let row = crate::h2::ClusterBasis::from_parts_unchecked(crow.clone(), self.crow_deg.clone());
        let col = crate::h2::ClusterBasis::from_parts_unchecked(ccol.clone(), self.ccol_deg.clone());
        split_into(st, &row, &col, &mut self.data, &mut self.nl, &mut self.flops)?;
        self.pending_empty &= self.nl.is_empty();
        Ok(())
    }

    pub fn finish(self) -> Result<SweepOutput<T>> {
        let max2 = |terms: &[[usize; 3]]| terms.iter().map(|t| t[1]).max().unwrap_or(0);
        Ok(SweepOutput {
            gram_term_max: [max2(&self.row_terms), max2(&self.col_terms)],
            row_local: self.crow,
            row_degenerate: self.crow_deg,
            col_local: self.ccol,
            col_degenerate: self.ccol_deg,
            data: self.data,
            case_counts: self.case_counts,
            case_max: self.case_max,
            flops: self.flops,
            pending_empty: self.pending_empty,
            workspace: MmpWorkspace {
                basis_products: self.bj,
                row_projections: self.pa,
                col_projections: self.pb,
                collected_a: self.ya,
                collected_b: self.yb,
                row_gram_terms: self.row_terms,
                col_gram_terms: self.col_terms,
            },
        })
    }

    fn level(&mut self, l: usize) -> Result<()> {
        let tree = self.st.tree();
        let leaf = l == tree.depth();
        let triples = std::mem::take(&mut self.triples[l]);
        self.count_cases(l, &triples);

        let merged = self.merge_pending(l);

        // operand blocks in expanded coordinates
        let mut xa: HashMap<usize, DMatrix<T>> = HashMap::new();
        let mut xb: HashMap<usize, DMatrix<T>> = HashMap::new();
        for bid in self.st.level(l) {
            match self.st.block(bid).kind {
                BlockKind::InadmissibleLeaf => {
                    xa.insert(bid, self.a.block_data(bid).clone());
                    xb.insert(bid, self.b.block_data(bid).clone());
                }
                BlockKind::Subdivided => {
                    xa.insert(bid, self.assemble_a(bid));
                    xb.insert(bid, self.assemble_b(bid));
                }
                BlockKind::Admissible => {}
            }
        }

        // dense products of dense pairs that land in low-rank targets
        let mut ff: Vec<Option<DMatrix<T>>> = vec![None; triples.len()];
        if leaf && self.eps.is_some() {
            for (n, t) in triples.iter().enumerate() {
                if t.case == Case::FullFull && !matches!(t.target, Target::Full(_)) {
                    ff[n] = Some(self.flops.mul(
                        Category::Coupling,
                        self.a.block_data(t.a_block),
                        self.b.block_data(t.b_block),
                    ));
                }
            }
        }
        let mut by_row: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut by_col: HashMap<usize, Vec<usize>> = HashMap::new();
        for (n, f) in ff.iter().enumerate() {
            if f.is_some() {
                by_row.entry(triples[n].i).or_default().push(n);
                by_col.entry(triples[n].k).or_default().push(n);
            }
        }

        for i in tree.level(l) {
            let own: Vec<&DMatrix<T>> = if leaf {
                by_row.get(&i).into_iter().flatten().map(|&n| ff[n].as_ref().unwrap()).collect()
            } else {
                merged.range((i, 0)..(i + 1, 0)).map(|(_, m)| m).collect()
            };
            self.row_basis(i, leaf, &own, &xa);
        }
        for k in tree.level(l) {
            let own: Vec<&DMatrix<T>> = if leaf {
                by_col.get(&k).into_iter().flatten().map(|&n| ff[n].as_ref().unwrap()).collect()
            } else {
                merged.iter().filter(|((_, kk), _)| *kk == k).map(|(_, m)| m).collect()
            };
            self.col_basis(k, leaf, &own, &xb);
        }

        // collected operand blocks and empty couplings of this level
        for bid in self.st.level(l) {
            let blk = self.st.block(bid);
            let (i, j) = (blk.row, blk.col);
            match blk.kind {
                BlockKind::Admissible => {
                    self.data[bid] = DMatrix::zeros(self.crow[i].ncols(), self.ccol[j].ncols());
                }
                _ => {
                    // block (i, j) of A and block (i, j) of B, i.e. B's (j', k') = (i, j)
                    let left = self.flops.prod(Category::Collect, &self.crow[i], Op::H, &xa[&bid], Op::N);
                    self.ya[bid] = Some(self.flops.mul(Category::Collect, &left, self.b.row_basis().local(j)));
                    let left = self.flops.prod(
                        Category::Collect,
                        self.a.col_basis().local(i),
                        Op::T,
                        &xb[&bid],
                        Op::N,
                    );
                    self.yb[bid] = Some(self.flops.prod(Category::Collect, &left, Op::N, &self.ccol[j], Op::C));
                }
            }
        }

        for (n, t) in triples.iter().enumerate() {
            self.product(t, ff[n].as_ref())?;
        }
        for ((i, k), m) in &merged {
            let left = self.flops.prod(Category::Coupling, &self.crow[*i], Op::H, m, Op::N);
            let s = self.flops.prod(Category::Coupling, &left, Op::N, &self.ccol[*k], Op::C);
            self.deliver(Target::of(self.st, *i, *k), *i, *k, s)?;
        }
        self.triples[l] = triples;
        Ok(())
    }

    fn count_cases(&mut self, l: usize, triples: &[Triple]) {
        let mut per_cluster: HashMap<(usize, Case), usize> = HashMap::new();
        for t in triples {
            self.case_counts[l][t.case.index()] += 1;
            *per_cluster.entry((t.i, t.case)).or_default() += 1;
        }
        for ((_, case), n) in per_cluster {
            let slot = &mut self.case_max[case.index()];
            *slot = (*slot).max(n);
        }
    }

    /// Moves couplings of the finer level into their parent pairs, laid out
    /// as `[[S_{i1,k1}, S_{i1,k2}], [S_{i2,k1}, S_{i2,k2}]]`.
    fn merge_pending(&mut self, l: usize) -> BTreeMap<(usize, usize), DMatrix<T>> {
        let tree = self.st.tree();
        let mut merged = BTreeMap::new();
        if l == tree.depth() {
            return merged;
        }
        for ((ic, kc), s) in std::mem::take(&mut self.pend) {
            let (pi, pk) = (
                tree.cluster(ic).parent.unwrap(),
                tree.cluster(kc).parent.unwrap(),
            );
            let ([i1, i2], [k1, k2]) = (tree.children(pi).unwrap(), tree.children(pk).unwrap());
            let (ri, ck) = (self.crow[i1].ncols(), self.ccol[k1].ncols());
            let m = merged.entry((pi, pk)).or_insert_with(|| {
                DMatrix::zeros(ri + self.crow[i2].ncols(), ck + self.ccol[k2].ncols())
            });
            let r0 = if ic == i1 { 0 } else { ri };
            let c0 = if kc == k1 { 0 } else { ck };
            self.flops.add(Category::Merge, s.len() as u64);
            let mut view = m.view_mut((r0, c0), s.shape());
            view += &s;
        }
        merged
    }

    /// `diag(V^C_{i1}, V^C_{i2})ᴴ A(i,j) diag(V^B_{j1}, V^B_{j2})` from the
    /// children of a subdivided block.
    fn assemble_a(&mut self, bid: usize) -> DMatrix<T> {
        let tree = self.st.tree();
        let blk = self.st.block(bid);
        let (ri, cj) = (tree.children(blk.row).unwrap(), tree.children(blk.col).unwrap());
        let rows = ri.map(|c| self.crow[c].ncols());
        let cols = cj.map(|c| self.b.row_basis().rank(c));
        let mut x = DMatrix::zeros(rows[0] + rows[1], cols[0] + cols[1]);
        for (q, &kid) in blk.children.unwrap().iter().enumerate() {
            let (ia, jc) = (ri[q / 2], cj[q % 2]);
            let m = match self.st.block(kid).kind {
                BlockKind::Admissible => self.flops.mul3(
                    Category::Collect,
                    &self.pa[ia],
                    self.a.block_data(kid),
                    &self.bj[jc],
                ),
                _ => self.ya[kid].clone().expect("child collected before parent"),
            };
            let (r0, c0) = (if q / 2 == 0 { 0 } else { rows[0] }, if q % 2 == 0 { 0 } else { cols[0] });
            x.view_mut((r0, c0), m.shape()).copy_from(&m);
        }
        x
    }

    /// `diag(W^A_{j1}, W^A_{j2})ᵀ B(j,k) conj(diag(W^C_{k1}, W^C_{k2}))`.
    fn assemble_b(&mut self, bid: usize) -> DMatrix<T> {
        let tree = self.st.tree();
        let blk = self.st.block(bid);
        let (rj, ck) = (tree.children(blk.row).unwrap(), tree.children(blk.col).unwrap());
        let rows = rj.map(|c| self.a.col_basis().rank(c));
        let cols = ck.map(|c| self.ccol[c].ncols());
        let mut x = DMatrix::zeros(rows[0] + rows[1], cols[0] + cols[1]);
        for (q, &kid) in blk.children.unwrap().iter().enumerate() {
            let (ja, kc) = (rj[q / 2], ck[q % 2]);
            let m = match self.st.block(kid).kind {
                BlockKind::Admissible => self.flops.mul3(
                    Category::Collect,
                    &self.bj[ja],
                    self.b.block_data(kid),
                    &self.pb[kc],
                ),
                _ => self.yb[kid].clone().expect("child collected before parent"),
            };
            let (r0, c0) = (if q / 2 == 0 { 0 } else { rows[0] }, if q % 2 == 0 { 0 } else { cols[0] });
            x.view_mut((r0, c0), m.shape()).copy_from(&m);
        }
        x
    }

    /// New row basis (leaf) or stacked transfer of `C` at cluster `i`, and
    /// the projection `P^A_i`.
    fn row_basis(&mut self, i: usize, leaf: bool, own: &[&DMatrix<T>], xa: &HashMap<usize, DMatrix<T>>) {
        let tree = self.st.tree();
        let va = self.a.row_basis();
        let (n, d) = if leaf {
            (tree.cluster(i).size(), va.local(i).clone())
        } else {
            let [c1, c2] = tree.children(i).unwrap();
            let diag = block_diag(&self.pa[c1], &self.pa[c2]);
            (
                self.crow[c1].ncols() + self.crow[c2].ncols(),
                self.flops.mul(Category::Projection, &diag, va.local(i)),
            )
        };
        let (q, degenerate) = match self.eps {
            None => (va.local(i).clone(), false),
            Some(eps) => {
                let mut groups = [GramGroup::new(n), GramGroup::new(n), GramGroup::new(n)];
                for m in own {
                    groups[0].add_factor(m, &mut self.flops);
                }
                for &bid in self.st.row_blocks(i) {
                    if let Some(x) = xa.get(&bid) {
                        let j = self.st.block(bid).col;
                        let f = self.flops.mul(Category::Gram, x, self.b.row_basis().local(j));
                        groups[1].add_factor(&f, &mut self.flops);
                    }
                }
                // a flagged input basis is a placeholder for a zero far field
                if !va.is_degenerate(i) {
                    groups[2].add_factor(&d, &mut self.flops);
                }
                self.row_terms[i] = [groups[0].terms(), groups[1].terms(), groups[2].terms()];
                match normalized_sum(&groups) {
                    None => (DMatrix::zeros(n, 0), false),
                    Some(g) => {
                        let t = self.flops.truncate(&g, eps);
                        (t.basis, t.degenerate)
                    }
                }
            }
        };
        self.pa[i] = self.flops.prod(Category::Projection, &q, Op::H, &d, Op::N);
        self.crow[i] = q;
        self.crow_deg[i] = degenerate;
    }

    /// Column counterpart of [`Self::row_basis`]; sets `P^B_k`.
    fn col_basis(&mut self, k: usize, leaf: bool, own: &[&DMatrix<T>], xb: &HashMap<usize, DMatrix<T>>) {
        let tree = self.st.tree();
        let wb = self.b.col_basis();
        let (n, d) = if leaf {
            (tree.cluster(k).size(), wb.local(k).clone())
        } else {
            let [c1, c2] = tree.children(k).unwrap();
            let diag = block_diag(&self.pb[c1].transpose(), &self.pb[c2].transpose());
            (
                self.ccol[c1].ncols() + self.ccol[c2].ncols(),
                self.flops.mul(Category::Projection, &diag, wb.local(k)),
            )
        };
        let (q, degenerate) = match self.eps {
            None => (wb.local(k).clone(), false),
            Some(eps) => {
                let mut groups = [GramGroup::new(n), GramGroup::new(n), GramGroup::new(n)];
                for m in own {
                    groups[0].add_factor(&m.transpose(), &mut self.flops);
                }
                for &bid in self.st.col_blocks(k) {
                    if let Some(x) = xb.get(&bid) {
                        let j = self.st.block(bid).row;
                        let f = self.flops.prod(
                            Category::Gram,
                            x,
                            Op::T,
                            self.a.col_basis().local(j),
                            Op::N,
                        );
                        groups[1].add_factor(&f, &mut self.flops);
                    }
                }
                if !wb.is_degenerate(k) {
                    groups[2].add_factor(&d, &mut self.flops);
                }
                self.col_terms[k] = [groups[0].terms(), groups[1].terms(), groups[2].terms()];
                match normalized_sum(&groups) {
                    None => (DMatrix::zeros(n, 0), false),
                    Some(g) => {
                        let t = self.flops.truncate(&g, eps);
                        (t.basis, t.degenerate)
                    }
                }
            }
        };
        self.pb[k] = self
            .flops
            .prod(Category::Projection, &q, Op::H, &d, Op::N)
            .transpose();
        self.ccol[k] = q;
        self.ccol_deg[k] = degenerate;
    }

    fn dense_operand(&mut self, m: &H2Matrix<T>, bid: usize) -> DMatrix<T> {
        let blk = self.st.block(bid);
        match blk.kind {
            BlockKind::InadmissibleLeaf => m.block_data(bid).clone(),
            _ => {
                let vs = self.flops.mul(Category::Dense, m.row_basis().local(blk.row), m.block_data(bid));
                self.flops.prod(Category::Dense, &vs, Op::N, m.col_basis().local(blk.col), Op::T)
            }
        }
    }

    fn product(&mut self, t: &Triple, ff: Option<&DMatrix<T>>) -> Result<()> {
        let (a, b) = (self.a, self.b);
        if let Target::Full(c) = t.target {
            let da = self.dense_operand(a, t.a_block);
            let db = self.dense_operand(b, t.b_block);
            self.data[c] += self.flops.mul(Category::Dense, &da, &db);
            return Ok(());
        }
        let cat = Category::Coupling;
        let s = match t.case {
            Case::FullFull => {
                let prod;
                let m = match ff {
                    Some(m) => m,
                    None => {
                        prod = self.flops.mul(cat, a.block_data(t.a_block), b.block_data(t.b_block));
                        &prod
                    }
                };
                let left = self.flops.prod(cat, &self.crow[t.i], Op::H, m, Op::N);
                self.flops.prod(cat, &left, Op::N, &self.ccol[t.k], Op::C)
            }
            Case::FullLowRank => {
                let ya = self.ya[t.a_block].as_ref().expect("collected block missing");
                self.flops.mul3(cat, ya, b.block_data(t.b_block), &self.pb[t.k])
            }
            Case::LowRankFull => {
                let yb = self.yb[t.b_block].as_ref().expect("collected block missing");
                self.flops.mul3(cat, &self.pa[t.i], a.block_data(t.a_block), yb)
            }
            Case::LowRankLowRank => {
                let left = self.flops.mul3(cat, &self.pa[t.i], a.block_data(t.a_block), &self.bj[t.j]);
                self.flops.mul3(cat, &left, b.block_data(t.b_block), &self.pb[t.k])
            }
        };
        self.deliver(t.target, t.i, t.k, s)
    }

    fn deliver(&mut self, target: Target, i: usize, k: usize, s: DMatrix<T>) -> Result<()> {
        match target {
            Target::Admissible(c) => {
                if self.data[c].shape() != s.shape() {
                    return Err(Error::Invariant(format!(
                        "coupling of block {c} is {:?}, contribution is {:?}",
                        self.data[c].shape(),
                        s.shape()
                    )));
                }
                self.data[c] += s;
            }
            Target::Subdivided(c) => self.nl.add(c, &s),
            Target::Inside => match self.pend.get_mut(&(i, k)) {
                Some(acc) => *acc += s,
                None => {
                    self.pend.insert((i, k), s);
                }
            },
            Target::Full(c) => {
                return Err(Error::Invariant(format!(
                    "low-rank contribution aimed at dense block {c}"
                )))
            }
        }
        Ok(())
    }
}
