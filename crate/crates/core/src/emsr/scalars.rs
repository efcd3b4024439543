//! Choice and validation of the per-block scalars `sigma_i`.
//!
//! A choice is accepted when, at every coordinate and position, the
//! evaluation points `sigma_i * lambda[a_{i,k}][d]` of all `M` blocks are
//! pairwise distinct. Within one inner node distinctness follows from
//! distinct scalars; across nodes it is the condition
//! `sigma_i * lambda[a][d] != sigma_j * lambda[a'][d']` whenever
//! `a_{i,k} = a != a' = a_{j,k}`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::EmsrCode;
use crate::error::{Error, Result};
use crate::gf::{FieldElement, Matrix};
use crate::inner::InnerMsrCode;
use crate::outer::OuterCode;
use crate::repair::interpolation_rows;
use crate::sary::digit_of;

/// Greedy ascending choice: each block takes the smallest nonzero value not
/// excluded by the blocks chosen before it.
pub fn select_scalars(inner: &InnerMsrCode, outer: &OuterCode) -> Result<Vec<FieldElement>> {
    let f = *inner.field();
    let p = f.modulus() as u64;
    let m = outer.size();
    let s = inner.s();
    let cols: Vec<Vec<usize>> = (0..m)
        .map(|i| (0..outer.length()).map(|x| outer.column(i, x)).collect())
        .collect();

    let mut sigma: Vec<FieldElement> = Vec::with_capacity(m);
    for i in 0..m {
        let mut forbidden: HashSet<u32> = HashSet::new();
        for (j, &sj) in sigma.iter().enumerate() {
            forbidden.insert(sj.value());
            for (&a, &b) in cols[i].iter().zip(&cols[j]) {
                if a == b {
                    continue;
                }
                for d in 0..s {
                    let inv = f.inv(inner.lambda(a, d))?;
                    for e in 0..s {
                        let v = f.mul(f.mul(sj, inner.lambda(b, e)), inv);
                        forbidden.insert(v.value());
                    }
                }
            }
        }
        let pick = (1..p)
            .find(|&c| !forbidden.contains(&(c as u32)))
            .ok_or_else(|| {
                Error::FieldTooSmall(format!(
                    "no admissible scalar for block {i} of {m} over GF({p})"
                ))
            })?;
        sigma.push(f.elem(pick));
    }
    Ok(sigma)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalarViolation {
    /// A helper's evaluation point coincides with a root of `p0`.
    RootCollision {
        failed: usize,
        coordinate: usize,
        group: usize,
        helper: usize,
    },
    /// Some choice of non-contacted blocks leaves a singular system.
    SingularSubset {
        failed: usize,
        coordinate: usize,
        group: usize,
        blocks: Vec<usize>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarValidation {
    pub instances: usize,
    pub subsets: usize,
    pub violations: Vec<ScalarViolation>,
}

impl ScalarValidation {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Subset enumerations above this size fall back to the equivalent
/// pairwise-distinctness test.
const SUBSET_LIMIT: usize = 4096;

/// Checks, for every failed block, coordinate and group, that no helper on
/// another inner node evaluates to a root of `p0`, and that every
/// `(r - s)`-subset of the reduced columns `P * L3` has full rank.
pub fn validate_scalars(code: &EmsrCode) -> ScalarValidation {
    let f = *code.field();
    let layout = code.layout();
    let (r, s, ell) = (code.r(), code.s(), code.ell());
    let u = r - s;
    let mut report = ScalarValidation::default();

    for failed in 0..code.blocks() {
        for k in 0..code.outer().length() {
            let node = code.column(failed, k);
            let roots: Vec<FieldElement> = (0..s)
                .map(|d| f.mul(code.sigma()[failed], code.inner().lambda(node, d)))
                .collect();
            let p = match interpolation_rows(&f, &roots, r) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let others: Vec<usize> = (0..code.blocks())
                .filter(|&i| i != failed && code.column(i, k) != node)
                .collect();
            for b in (0..ell).filter(|&b| digit_of(b, s, node + 1) == 0) {
                report.instances += 1;
                let points: Vec<FieldElement> =
                    others.iter().map(|&v| layout.eval_point(v, k, b)).collect();
                for (idx, x) in points.iter().enumerate() {
                    if roots.contains(x) {
                        report.violations.push(ScalarViolation::RootCollision {
                            failed,
                            coordinate: k,
                            group: b,
                            helper: others[idx],
                        });
                    }
                }
                if u == 0 || others.len() < u {
                    continue;
                }
                let reduced = p
                    .mul(&f, &Matrix::vandermonde(&f, &points, r))
                    .expect("shapes agree");
                if binomial_capped(others.len(), u) <= SUBSET_LIMIT {
                    for subset in combinations(others.len(), u) {
                        report.subsets += 1;
                        if reduced.select_columns(&subset).rank(&f) < u {
                            report.violations.push(ScalarViolation::SingularSubset {
                                failed,
                                coordinate: k,
                                group: b,
                                blocks: subset.iter().map(|&c| others[c]).collect(),
                            });
                        }
                    }
                } else {
                    // Reduced columns are p0(x) * (1, x, ..): a subset is
                    // singular iff two of its points coincide.
                    let mut seen = HashSet::new();
                    for (idx, x) in points.iter().enumerate() {
                        if !seen.insert(x.value()) {
                            let first = points.iter().position(|y| y == x).unwrap();
                            report.violations.push(ScalarViolation::SingularSubset {
                                failed,
                                coordinate: k,
                                group: b,
                                blocks: vec![others[first], others[idx]],
                            });
                        }
                    }
                }
            }
        }
    }
    report
}

fn binomial_capped(n: usize, k: usize) -> usize {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
        if acc > SUBSET_LIMIT {
            return usize::MAX;
        }
    }
    acc
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let next = {
            let c = cur.as_mut().unwrap();
            let mut i = k;
            loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                if c[i] < n - k + i {
                    c[i] += 1;
                    for j in i + 1..k {
                        c[j] = c[j - 1] + 1;
                    }
                    break true;
                }
            }
        };
        if !next {
            cur = None;
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emsr::tests::desk;
    use crate::gf::Field;

    #[test]
    fn combinations_enumerate_all() {
        assert_eq!(combinations(4, 2).count(), 6);
        assert_eq!(combinations(5, 0).count(), 1);
        assert_eq!(combinations(2, 3).count(), 0);
        let all: Vec<_> = combinations(3, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn desk_scalars_validate() {
        let report = validate_scalars(desk());
        assert!(
            report.ok(),
            "{:?}",
            &report.violations[..report.violations.len().min(3)]
        );
        // 25 failed blocks, 4 coordinates, 16 groups each.
        assert_eq!(report.instances, 25 * 4 * 16);
        // r - s = 1: one subset per other-node helper (20 of them).
        assert_eq!(report.subsets, 25 * 4 * 16 * 20);
    }

    #[test]
    fn selected_points_are_pairwise_distinct() {
        let c = desk();
        let layout = c.layout();
        for k in 0..4 {
            for b in 0..c.ell() {
                let pts: HashSet<u32> = (0..25)
                    .map(|i| layout.eval_point(i, k, b).value())
                    .collect();
                assert_eq!(pts.len(), 25);
            }
        }
    }

    #[test]
    fn colliding_scalars_are_reported() {
        let c = desk();
        let f = *c.field();
        // Find a pair on different nodes at coordinate 0 and force a collision.
        let (i, j) = (0..25)
            .flat_map(|i| (0..25).map(move |j| (i, j)))
            .find(|&(i, j)| i != j && c.column(i, 0) != c.column(j, 0))
            .unwrap();
        let (a, b) = (c.column(i, 0), c.column(j, 0));
        let mut sigma = c.sigma().to_vec();
        let target = f.mul(sigma[i], c.inner().lambda(a, 0));
        sigma[j] = f.div(target, c.inner().lambda(b, 0)).unwrap();
        let bad =
            EmsrCode::from_parts_unvalidated(c.inner().clone(), c.outer().clone(), sigma, 0.5)
                .unwrap();
        let report = validate_scalars(&bad);
        assert!(!report.ok());
    }

    #[test]
    fn small_fields_fail_cleanly() {
        let outer = crate::outer::build_rs_outer(5, 4, 2).unwrap();
        let inner = InnerMsrCode::new(5, 2, 3, Field::new(13).unwrap()).unwrap();
        assert!(matches!(
            select_scalars(&inner, &outer),
            Err(Error::FieldTooSmall(_))
        ));
    }
}
