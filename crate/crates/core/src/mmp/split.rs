use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::h2::{ClusterBasis, H2Matrix};
use crate::htree::{BlockKind, BlockTree};
use crate::linalg::{Category, FlopCounter, Op};
use crate::scalar::Scalar;

/// Couplings accumulated on subdivided blocks of `C`, in the bases of the
/// block's own level, waiting to be pushed down.
#[derive(Debug, Clone, PartialEq)]
pub struct PendingCouplings<T: Scalar> {
    slots: Vec<Option<DMatrix<T>>>,
}

impl<T: Scalar> PendingCouplings<T> {
    pub fn new(blocks: usize) -> Self {
        Self {
            slots: vec![None; blocks],
        }
    }

    pub fn add(&mut self, block: usize, s: &DMatrix<T>) {
        match &mut self.slots[block] {
            Some(acc) => *acc += s,
            slot => *slot = Some(s.clone()),
        }
    }

    pub fn get(&self, block: usize) -> Option<&DMatrix<T>> {
        self.slots[block].as_ref()
    }

    pub fn take(&mut self, block: usize) -> Option<DMatrix<T>> {
        self.slots[block].take()
    }

    pub fn len(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(|s| s.is_none())
    }
}

/// Top-down distribution of pending couplings: a child block `(i_a, k_c)`
/// receives `T_{i_a} S T_{k_c}ᵀ`; dense children are materialized with the
/// leaf bases. The store is empty afterwards.
pub fn backward_split<T: Scalar>(
    c: &mut H2Matrix<T>,
    pending: &mut PendingCouplings<T>,
) -> Result<()> {
    let mut flops = FlopCounter::new();
    let (structure, row, col, data) = c.parts_mut();
    split_into(structure, row, col, data, pending, &mut flops)
}

pub(crate) fn split_into<T: Scalar>(
    structure: &BlockTree,
    row: &ClusterBasis<T>,
    col: &ClusterBasis<T>,
    data: &mut [DMatrix<T>],
    pending: &mut PendingCouplings<T>,
    flops: &mut FlopCounter,
) -> Result<()> {
    let tree = structure.tree();
    for level in 0..structure.num_levels() {
        for c in structure.level(level) {
            let Some(s) = pending.take(c) else { continue };
            let blk = structure.block(c);
            let kids = match (blk.kind, blk.children) {
                (BlockKind::Subdivided, Some(kids)) => kids,
                _ => {
                    return Err(Error::Invariant(format!(
                        "pending coupling on block {c}, which is not subdivided"
                    )))
                }
            };
            let (ri, ck) = (tree.children(blk.row).unwrap(), tree.children(blk.col).unwrap());
            for (q, &kid) in kids.iter().enumerate() {
                let (ia, kc) = (ri[q / 2], ck[q % 2]);
                let ti = row.transfer(tree, blk.row, ia);
                let tk = col.transfer(tree, blk.col, kc);
                let ts = flops.mul(Category::Split, &ti, &s);
                let x = flops.prod(Category::Split, &ts, Op::N, &tk, Op::T);
                match structure.block(kid).kind {
                    BlockKind::Admissible => data[kid] += x,
                    BlockKind::Subdivided => pending.add(kid, &x),
                    BlockKind::InadmissibleLeaf => {
                        let vx = flops.mul(Category::Split, row.local(ia), &x);
                        data[kid] += flops.prod(Category::Split, &vx, Op::N, col.local(kc), Op::T);
                    }
                }
            }
        }
    }
    if pending.is_empty() {
        Ok(())
    } else {
        Err(Error::Invariant(format!(
            "{} pending couplings left after split",
            pending.len()
        )))
    }
}
