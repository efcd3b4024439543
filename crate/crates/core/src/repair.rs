//! Single-block repair by group aggregation and polynomial interpolation.
//!
//! For a failed block `f` and coordinate `k`, let `a = node(f, k)`. Symbols of
//! `f` are recovered `s` at a time: for a group representative `b` with digit
//! `a+1` equal to zero, the group is `{ b(a+1, u) : u < s }`.
//!
//! * Helpers using the same inner node `a` at `k` see varying coefficients
//!   across the group, so all `s` symbols are downloaded from them.
//! * Every other helper sees one coefficient for the whole group and sends a
//!   single aggregate `mu = sum_u c_{b(a+1,u)}`.
//!
//! Summing the `r` parity rows over the group leaves `s` unknown failed
//! symbols plus one unknown `mu` for each non-contacted block. Left-multiplying
//! by the coefficient matrix of `x^i * p0(x)`, where `p0` vanishes at the
//! failed block's `s` evaluation points, removes the failed symbols; the
//! remaining system gives the missing `mu`, and a final `s x s` Vandermonde
//! solve yields the failed symbols.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{poly_from_roots, Field, FieldElement, Matrix};
use crate::layout::{accumulate_powers, Layout};
use crate::sary::digit_of;

/// Read access to stored blocks. Offsets are absolute within a block
/// (`coordinate * ell + position`).
pub trait HelperSource {
    fn read(&self, block: usize, offsets: &[usize]) -> Result<Vec<FieldElement>>;
}

impl HelperSource for [Vec<FieldElement>] {
    fn read(&self, block: usize, offsets: &[usize]) -> Result<Vec<FieldElement>> {
        let data = self
            .get(block)
            .ok_or_else(|| Error::IndexOutOfRange(format!("block {block}")))?;
        offsets
            .iter()
            .map(|&o| {
                data.get(o)
                    .copied()
                    .ok_or_else(|| Error::IndexOutOfRange(format!("offset {o} in block {block}")))
            })
            .collect()
    }
}

impl HelperSource for Vec<Vec<FieldElement>> {
    fn read(&self, block: usize, offsets: &[usize]) -> Result<Vec<FieldElement>> {
        self.as_slice().read(block, offsets)
    }
}

/// Symbols received from each helper during one repair.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownloadTrace {
    pub per_helper: BTreeMap<usize, u64>,
}

impl DownloadTrace {
    pub fn total(&self) -> u64 {
        self.per_helper.values().sum()
    }

    pub fn max(&self) -> u64 {
        self.per_helper.values().copied().max().unwrap_or(0)
    }

    pub fn get(&self, helper: usize) -> u64 {
        self.per_helper.get(&helper).copied().unwrap_or(0)
    }
}

/// Meters every symbol that crosses from a helper to the repairing node.
struct Downloader<'a, S: ?Sized> {
    source: &'a S,
    field: Field,
    failed: usize,
    trace: DownloadTrace,
}

impl<'a, S: HelperSource + ?Sized> Downloader<'a, S> {
    fn symbols(&mut self, block: usize, offsets: &[usize]) -> Result<Vec<FieldElement>> {
        if block == self.failed {
            return Err(Error::AccessDenied(block));
        }
        let vals = self.source.read(block, offsets)?;
        *self.trace.per_helper.entry(block).or_default() += vals.len() as u64;
        Ok(vals)
    }

    /// The helper sums the symbols locally and sends one value.
    fn aggregate(&mut self, block: usize, offsets: &[usize]) -> Result<FieldElement> {
        if block == self.failed {
            return Err(Error::AccessDenied(block));
        }
        let vals = self.source.read(block, offsets)?;
        *self.trace.per_helper.entry(block).or_default() += 1;
        Ok(self.field.sum(vals))
    }
}

/// Intermediate values of one group solve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairWorkspace {
    pub coordinate: usize,
    /// Group representative (its digit at the failed node's position is 0).
    pub group: usize,
    /// Full groups of `s` symbols from blocks sharing the failed inner node.
    pub downloaded: Vec<(usize, Vec<FieldElement>)>,
    /// Aggregates received from contacted blocks on other inner nodes.
    pub mu_downloaded: Vec<(usize, FieldElement)>,
    /// Aggregates of non-contacted blocks, solved for.
    pub mu_recovered: Vec<(usize, FieldElement)>,
    /// `P * (L2 + known part of L3)`.
    pub y: Vec<FieldElement>,
}

/// `(r - s) x r` matrix whose row `i` holds the coefficients (constant term
/// first) of `x^i * prod_u (x - roots[u])`.
pub fn interpolation_rows(field: &Field, roots: &[FieldElement], r: usize) -> Result<Matrix> {
    let s = roots.len();
    if s >= r {
        return Err(Error::InvalidParameters(format!(
            "need fewer roots ({s}) than parity rows ({r})"
        )));
    }
    let p0 = poly_from_roots(field, roots);
    let mut m = Matrix::zeros(r - s, r);
    for i in 0..r - s {
        for (d, &c) in p0.iter().enumerate() {
            m.set(i, i + d, c);
        }
    }
    Ok(m)
}

pub(crate) struct RepairOutput {
    pub block: Vec<FieldElement>,
    pub trace: DownloadTrace,
    pub workspaces: Vec<RepairWorkspace>,
}

/// Repairs `failed` reading only from `contacted`.
pub(crate) fn repair_block<S: HelperSource + ?Sized>(
    layout: &Layout<'_>,
    failed: usize,
    contacted: &BTreeSet<usize>,
    source: &S,
    record: bool,
) -> Result<RepairOutput> {
    let m = layout.blocks();
    if failed >= m {
        return Err(Error::IndexOutOfRange(format!("block {failed} of {m}")));
    }
    if contacted.contains(&failed) {
        return Err(Error::BadHelperSet(format!(
            "failed block {failed} listed as helper"
        )));
    }
    if let Some(&bad) = contacted.iter().find(|&&h| h >= m) {
        return Err(Error::BadHelperSet(format!("helper {bad} out of range")));
    }

    let inner = layout.inner;
    let f = *layout.field();
    let r = inner.r();
    let s = inner.s();
    let ell = inner.ell();
    let missing_budget = r - s;

    let not_contacted: Vec<usize> = (0..m)
        .filter(|&i| i != failed && !contacted.contains(&i))
        .collect();
    if not_contacted.len() > missing_budget {
        return Err(Error::BadHelperSet(format!(
            "{} blocks not contacted, at most {missing_budget} can be interpolated",
            not_contacted.len()
        )));
    }

    let mut out = vec![FieldElement::ZERO; layout.block_len()];
    let mut dl = Downloader {
        source,
        field: f,
        failed,
        trace: DownloadTrace::default(),
    };
    let mut workspaces = Vec::new();

    for k in 0..layout.coords() {
        let node = layout.columns[failed][k];
        let pos = node + 1;
        let stride = s.pow(node as u32);
        let same: Vec<usize> = contacted
            .iter()
            .copied()
            .filter(|&i| layout.columns[i][k] == node)
            .collect();
        if let Some(&i) = not_contacted
            .iter()
            .find(|&&i| layout.columns[i][k] == node)
        {
            return Err(Error::MissingCompulsory(i));
        }
        let others: Vec<usize> = contacted
            .iter()
            .copied()
            .filter(|&i| layout.columns[i][k] != node)
            .collect();

        let sigma_f = layout.sigma[failed];
        let roots: Vec<FieldElement> = (0..s)
            .map(|u| f.mul(sigma_f, inner.lambda(node, u)))
            .collect();
        let p = interpolation_rows(&f, &roots, r)?;
        let root_system = Matrix::vandermonde(&f, &roots, s);

        for b in (0..ell).filter(|&b| digit_of(b, s, pos) == 0) {
            let offsets: Vec<usize> = (0..s).map(|u| k * ell + b + u * stride).collect();
            let mut known = vec![FieldElement::ZERO; r];
            let mut ws = record.then(|| RepairWorkspace {
                coordinate: k,
                group: b,
                downloaded: Vec::new(),
                mu_downloaded: Vec::new(),
                mu_recovered: Vec::new(),
                y: Vec::new(),
            });

            for &q in &same {
                let vals = dl.symbols(q, &offsets)?;
                for (u, &v) in vals.iter().enumerate() {
                    let x = f.mul(layout.sigma[q], inner.lambda(node, u));
                    accumulate_powers(&f, &mut known, x, v);
                }
                if let Some(ws) = ws.as_mut() {
                    ws.downloaded.push((q, vals));
                }
            }
            for &v in &others {
                let mu = dl.aggregate(v, &offsets)?;
                accumulate_powers(&f, &mut known, layout.eval_point(v, k, b), mu);
                if let Some(ws) = ws.as_mut() {
                    ws.mu_downloaded.push((v, mu));
                }
            }

            let y = p.apply(&f, &known)?;
            let mut recovered = Vec::with_capacity(not_contacted.len());
            if !not_contacted.is_empty() {
                let points: Vec<FieldElement> = not_contacted
                    .iter()
                    .map(|&w| layout.eval_point(w, k, b))
                    .collect();
                let u = points.len();
                let reduced = p.mul(&f, &Matrix::vandermonde(&f, &points, r))?;
                let rows: Vec<usize> = (0..u).collect();
                let system = reduced.select_rows(&rows);
                let rhs = Matrix::column(y[..u].iter().map(|&v| f.neg(v)).collect());
                let mu = system
                    .solve(&f, &rhs)
                    .map_err(|_| Error::ScalarValidationBug {
                        failed,
                        coordinate: k,
                    })?;
                for (idx, &w) in not_contacted.iter().enumerate() {
                    let val = mu.get(idx, 0);
                    accumulate_powers(&f, &mut known, points[idx], val);
                    recovered.push((w, val));
                }
            }

            let rhs = Matrix::column(known[..s].iter().map(|&v| f.neg(v)).collect());
            let sol = root_system
                .solve(&f, &rhs)
                .map_err(|_| Error::ScalarValidationBug {
                    failed,
                    coordinate: k,
                })?;
            for (u, &o) in offsets.iter().enumerate() {
                out[o] = sol.get(u, 0);
            }

            if let Some(mut ws) = ws {
                ws.mu_recovered = recovered;
                ws.y = y;
                workspaces.push(ws);
            }
        }
    }

    Ok(RepairOutput {
        block: out,
        trace: dl.trace,
        workspaces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::poly_eval;

    #[test]
    fn interpolation_rows_annihilate_root_columns() {
        let f = Field::new(31).unwrap();
        let roots = [f.elem(3), f.elem(9)];
        let p = interpolation_rows(&f, &roots, 5).unwrap();
        assert_eq!((p.rows(), p.cols()), (3, 5));
        let v = Matrix::vandermonde(&f, &roots, 5);
        assert!(p.mul(&f, &v).unwrap().is_zero());

        // Row i applied to a Vandermonde column at x equals x^i * p0(x).
        let p0 = poly_from_roots(&f, &roots);
        let x = f.elem(17);
        let col = Matrix::vandermonde(&f, &[x], 5);
        let prod = p.mul(&f, &col).unwrap();
        for i in 0..3 {
            let expect = f.mul(f.pow(x, i as u64), poly_eval(&f, &p0, x));
            assert_eq!(prod.get(i, 0), expect);
        }
    }

    #[test]
    fn interpolation_rows_need_slack() {
        let f = Field::new(31).unwrap();
        assert!(interpolation_rows(&f, &[f.elem(1), f.elem(2)], 2).is_err());
    }
}
