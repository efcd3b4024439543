//! MDS verification by rank of per-coordinate parity submatrices.
//!
//! The parity-check matrix restricted to a block set `E` is block diagonal
//! over coordinates, so it has full column rank iff every
//! `U_{E,k} = [sigma_e^j * H_{j, a_{e,k}}]` (`r*ell x |E|*ell`) does.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scalars::combinations;
use super::EmsrCode;
use crate::error::{Error, Result};
use crate::gf::{FieldElement, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MdsMode {
    /// Every `r`-subset of blocks.
    Exhaustive,
    /// `count` uniformly drawn `r`-subsets.
    Sample { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdsViolation {
    pub blocks: Vec<usize>,
    pub coordinate: usize,
    pub rank: usize,
    pub expected: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdsReport {
    pub subsets: usize,
    pub matrices: usize,
    pub violations: Vec<MdsViolation>,
}

impl MdsReport {
    pub fn is_mds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `U_{E,k}` for the blocks in `blocks` at coordinate `coord`. Rows are
/// `band * ell + position`, columns `index_in_E * ell + position`.
pub fn subset_matrix(code: &EmsrCode, blocks: &[usize], coord: usize) -> Result<Matrix> {
    if coord >= code.outer().length() {
        return Err(Error::IndexOutOfRange(format!("coordinate {coord}")));
    }
    if let Some(&b) = blocks.iter().find(|&&b| b >= code.blocks()) {
        return Err(Error::IndexOutOfRange(format!(
            "block {b} of {}",
            code.blocks()
        )));
    }
    let f = *code.field();
    let (r, ell) = (code.r(), code.ell());
    let layout = code.layout();
    let mut u = Matrix::zeros(r * ell, blocks.len() * ell);
    for (e, &blk) in blocks.iter().enumerate() {
        for b in 0..ell {
            let x = layout.eval_point(blk, coord, b);
            let mut v = FieldElement::ONE;
            for j in 0..r {
                u.set(j * ell + b, e * ell + b, v);
                v = f.mul(v, x);
            }
        }
    }
    Ok(u)
}

pub fn subset_rank(code: &EmsrCode, blocks: &[usize], coord: usize) -> Result<usize> {
    Ok(subset_matrix(code, blocks, coord)?.rank(code.field()))
}

fn check_subset(code: &EmsrCode, blocks: &[usize]) -> Vec<MdsViolation> {
    let expected = blocks.len() * code.ell();
    (0..code.outer().length())
        .filter_map(|k| {
            let rank = subset_rank(code, blocks, k).expect("indices in range");
            (rank < expected).then(|| MdsViolation {
                blocks: blocks.to_vec(),
                coordinate: k,
                rank,
                expected,
            })
        })
        .collect()
}

/// Checks that every (or every sampled) set of `r` blocks has a full-rank
/// parity restriction, i.e. that any `r` erasures are recoverable.
pub fn mds_check(code: &EmsrCode, mode: MdsMode) -> MdsReport {
    let (m, r) = (code.blocks(), code.r());
    let subsets: Vec<Vec<usize>> = match mode {
        MdsMode::Exhaustive => combinations(m, r).collect(),
        MdsMode::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let mut s = sample(&mut rng, m, r).into_vec();
                    s.sort_unstable();
                    s
                })
                .collect()
        }
    };
    let mut violations: Vec<MdsViolation> = subsets
        .par_iter()
        .flat_map_iter(|s| check_subset(code, s))
        .collect();
    violations.sort_by(|a, b| (&a.blocks, a.coordinate).cmp(&(&b.blocks, b.coordinate)));
    MdsReport {
        subsets: subsets.len(),
        matrices: subsets.len() * code.outer().length(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emsr::tests::desk;

    #[test]
    fn single_block_has_full_rank() {
        let c = desk();
        for i in [0, 12, 24] {
            for k in 0..4 {
                assert_eq!(subset_rank(c, &[i], k).unwrap(), c.ell());
            }
        }
    }

    #[test]
    fn sampled_desk_subsets_are_full_rank() {
        let report = mds_check(desk(), MdsMode::Sample { count: 50, seed: 3 });
        assert_eq!(report.subsets, 50);
        assert_eq!(report.matrices, 200);
        assert!(report.is_mds());
    }

    #[test]
    fn duplicated_scalar_breaks_mds() {
        let c = desk();
        // Blocks sharing a node at coordinate 0 with equal scalars collide.
        let j = (1..25).find(|&j| c.column(j, 0) == c.column(0, 0)).unwrap();
        let mut sigma = c.sigma().to_vec();
        sigma[j] = sigma[0];
        let bad =
            EmsrCode::from_parts_unvalidated(c.inner().clone(), c.outer().clone(), sigma, 0.5)
                .unwrap();
        let third = (1..25).find(|&x| x != j).unwrap();
        let mut e = vec![0, j, third];
        e.sort_unstable();
        assert!(subset_rank(&bad, &e, 0).unwrap() < 3 * c.ell());

        let report = mds_check(&bad, MdsMode::Exhaustive);
        assert!(!report.is_mds());
        let v = &report.violations[0];
        assert!(v.blocks.contains(&0) && v.blocks.contains(&j));
    }

    #[test]
    fn out_of_range_arguments() {
        assert!(subset_matrix(desk(), &[25], 0).is_err());
        assert!(subset_matrix(desk(), &[0], 4).is_err());
    }
}
