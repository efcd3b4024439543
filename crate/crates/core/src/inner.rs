//! The diagonal-parity MSR code with `t`-optimal repair.
//!
//! An `(n, k, t)` code with `s = t - k + 1` stores `ell = s^n` symbols per
//! node. Parity block `(j, i)` is the diagonal matrix `H_i^j` (bands counted
//! from 0 here) where `H_i` has `lambda[i][b_{i+1}]` at diagonal position `b`.
//! Any failed node is rebuilt from any `t` helpers, `ell / s` symbols each.
//!
//! Nodes are indexed from 0; node `i` reads digit position `i + 1` of the
//! symbol index.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement, Matrix};
use crate::layout::Layout;
use crate::repair::{repair_block, DownloadTrace, HelperSource};
use crate::sary::digit_of;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerMsrCode {
    n: usize,
    k: usize,
    t: usize,
    field: Field,
    /// `lambda[i][d]`, node-major.
    lambda: Vec<Vec<FieldElement>>,
    columns: Vec<Vec<usize>>,
    ones: Vec<FieldElement>,
}

/// A codeword of the inner code: `n` blocks of `ell` symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerCodeword {
    pub blocks: Vec<Vec<FieldElement>>,
}

impl InnerMsrCode {
    /// Builds the code with `lambda[i][d] = i * s + d + 1`, i.e. the field
    /// elements `1..=s*n` in node-major order.
    pub fn new(n: usize, k: usize, t: usize, field: Field) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameters("k must be positive".into()));
        }
        if !(k <= t && t + 1 < n) {
            return Err(Error::InvalidParameters(format!(
                "need k <= t < n - 1, got n={n}, k={k}, t={t}"
            )));
        }
        let s = t - k + 1;
        if s < 2 {
            return Err(Error::InvalidParameters(format!(
                "s = t - k + 1 = {s}; repair degenerates below 2"
            )));
        }
        if (s as u32).checked_pow(n as u32).is_none_or(|l| l > 1 << 24) {
            return Err(Error::InvalidParameters(format!(
                "sub-packetization {s}^{n} too large"
            )));
        }
        if (field.modulus() as u64) < (s * n + 1) as u64 {
            return Err(Error::InvalidParameters(format!(
                "field of size {} cannot hold {} distinct nonzero lambdas",
                field.modulus(),
                s * n
            )));
        }
        let lambda = (0..n)
            .map(|i| (0..s).map(|d| field.elem((i * s + d + 1) as u64)).collect())
            .collect();
        Ok(InnerMsrCode {
            n,
            k,
            t,
            field,
            lambda,
            columns: (0..n).map(|i| vec![i]).collect(),
            ones: vec![FieldElement::ONE; n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.n - self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn s(&self) -> usize {
        self.t - self.k + 1
    }

    pub fn ell(&self) -> usize {
        self.s().pow(self.n as u32)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn lambda(&self, node: usize, digit: usize) -> FieldElement {
        self.lambda[node][digit]
    }

    pub fn lambda_table(&self) -> &[Vec<FieldElement>] {
        &self.lambda
    }

    pub(crate) fn layout(&self) -> Layout<'_> {
        Layout {
            inner: self,
            columns: &self.columns,
            sigma: &self.ones,
        }
    }

    /// Diagonal of `H_{band, node}`: entry `b` is `lambda[node][b_{node+1}]^band`.
    pub fn parity_diagonal(&self, band: usize, node: usize) -> Vec<FieldElement> {
        (0..self.ell())
            .map(|b| {
                let d = digit_of(b, self.s(), node + 1);
                self.field.pow(self.lambda[node][d], band as u64)
            })
            .collect()
    }

    /// The full `r*ell x n*ell` parity-check matrix.
    pub fn parity_matrix(&self) -> Matrix {
        let ell = self.ell();
        let mut h = Matrix::zeros(self.r() * ell, self.n * ell);
        for band in 0..self.r() {
            for node in 0..self.n {
                for (b, v) in self.parity_diagonal(band, node).into_iter().enumerate() {
                    h.set(band * ell + b, node * ell + b, v);
                }
            }
        }
        h
    }

    /// Thick columns of `nodes`, side by side: `r*ell x |nodes|*ell`.
    pub fn thick_columns(&self, nodes: &[usize]) -> Matrix {
        let ell = self.ell();
        let cols: Vec<usize> = nodes.iter().flat_map(|&i| i * ell..(i + 1) * ell).collect();
        self.parity_matrix().select_columns(&cols)
    }

    /// Systematic encoding: nodes `0..k` carry the message, nodes `k..n` parity.
    pub fn encode(&self, message: &[FieldElement]) -> Result<InnerCodeword> {
        let ell = self.ell();
        if message.len() != self.k * ell {
            return Err(Error::DimensionMismatch {
                expected: self.k * ell,
                got: message.len(),
            });
        }
        let mut blocks: Vec<Vec<FieldElement>> =
            message.chunks(ell).map(<[FieldElement]>::to_vec).collect();
        blocks.resize(self.n, vec![FieldElement::ZERO; ell]);
        let parity: Vec<usize> = (self.k..self.n).collect();
        self.layout().fill_erasures(&mut blocks, &parity)?;
        Ok(InnerCodeword { blocks })
    }

    pub fn verify(&self, word: &InnerCodeword) -> bool {
        let layout = self.layout();
        layout.check_shape(&word.blocks).is_ok() && layout.satisfies_parity(&word.blocks)
    }

    /// Recovers the nodes in `erased` from the rest of `word`.
    pub fn decode_erasures(
        &self,
        word: &InnerCodeword,
        erased: &BTreeSet<usize>,
    ) -> Result<InnerCodeword> {
        let layout = self.layout();
        layout.check_shape(&word.blocks)?;
        if let Some(&bad) = erased.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange(format!("node {bad} of {}", self.n)));
        }
        let mut blocks = word.blocks.clone();
        let erased: Vec<usize> = erased.iter().copied().collect();
        layout.fill_erasures(&mut blocks, &erased)?;
        Ok(InnerCodeword { blocks })
    }

    /// Rebuilds node `failed` from exactly `t` helpers, reading through
    /// `source`. The failed node is never read.
    pub fn repair<S: HelperSource + ?Sized>(
        &self,
        source: &S,
        failed: usize,
        helpers: &BTreeSet<usize>,
    ) -> Result<(Vec<FieldElement>, DownloadTrace)> {
        if failed >= self.n {
            return Err(Error::IndexOutOfRange(format!(
                "node {failed} of {}",
                self.n
            )));
        }
        if helpers.len() != self.t {
            return Err(Error::BadHelperSet(format!(
                "expected {} helpers, got {}",
                self.t,
                helpers.len()
            )));
        }
        if helpers.contains(&failed) || helpers.iter().any(|&h| h >= self.n) {
            return Err(Error::BadHelperSet(format!(
                "helpers must be drawn from the other {} nodes",
                self.n - 1
            )));
        }
        let out = repair_block(&self.layout(), failed, helpers, source, false)?;
        Ok((out.block, out.trace))
    }
}
