//! The composed epsilon-MSR code.
//!
//! Blocks are indexed by the `M = q^K` outer codewords. Block `i` holds `N`
//! sub-blocks of `ell` symbols; sub-block `k` is encoded against inner node
//! `a_{i,k}` (the `k`-th symbol of outer codeword `i`), and every parity band
//! `j` of block `i` is scaled by `sigma_i^j`. The result is an MDS code over
//! `M` blocks with `r` parity blocks, where any failed block is repaired from
//! `M - n + t` helpers. Only helpers whose outer codeword agrees with the
//! failed one somewhere are compulsory.

mod bandwidth;
mod mds;
mod plan;
mod scalars;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use bandwidth::{
    bandwidth_check, execute_repair, execute_repair_traced, repair_codeword, BandwidthReport,
    BandwidthVerdict, HelperLoad,
};
pub use mds::{mds_check, subset_matrix, subset_rank, MdsMode, MdsReport, MdsViolation};
pub use plan::{
    compulsory_sets, plan_repair, CompulsorySets, HelperChoice, HelperPolicy, RepairPlan,
};
pub use scalars::{select_scalars, validate_scalars, ScalarValidation, ScalarViolation};

use crate::error::{Error, Result};
use crate::gf::{next_prime, Field, FieldElement, Matrix};
use crate::inner::InnerMsrCode;
use crate::layout::Layout;
use crate::outer::OuterCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerParams {
    pub n: usize,
    pub k: usize,
    pub t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuterParams {
    pub q: u32,
    #[serde(rename = "N")]
    pub length: usize,
    #[serde(rename = "K")]
    pub dimension: usize,
}

/// Everything needed to rebuild a code deterministically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmsrParams {
    pub inner: InnerParams,
    pub outer: OuterParams,
    pub epsilon: f64,
    /// Field modulus; when absent the smallest prime admitting a valid
    /// scalar assignment is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
}

impl EmsrParams {
    /// inner (5, 2, 3), outer RS(q=5, N=4, K=2), epsilon = 0.5.
    pub fn desk() -> Self {
        EmsrParams {
            inner: InnerParams { n: 5, k: 2, t: 3 },
            outer: OuterParams {
                q: 5,
                length: 4,
                dimension: 2,
            },
            epsilon: 0.5,
            modulus: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmsrCode {
    inner: InnerMsrCode,
    outer: OuterCode,
    sigma: Vec<FieldElement>,
    columns: Vec<Vec<usize>>,
    epsilon: f64,
}

/// `M` blocks of `N * ell` symbols; sub-block `k` of block `i` is
/// `blocks[i][k*ell..(k+1)*ell]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmsrCodeword {
    pub blocks: Vec<Vec<FieldElement>>,
}

impl EmsrCodeword {
    pub fn sub_block(&self, block: usize, coord: usize, ell: usize) -> &[FieldElement] {
        &self.blocks[block][coord * ell..(coord + 1) * ell]
    }
}

impl EmsrCode {
    /// Builds the code, searching ascending primes for the field when
    /// `params.modulus` is unset.
    pub fn build(params: &EmsrParams) -> Result<Self> {
        let outer =
            OuterCode::reed_solomon(params.outer.q, params.outer.length, params.outer.dimension)?;
        let InnerParams { n, k, t } = params.inner;
        if let Some(p) = params.modulus {
            let inner = InnerMsrCode::new(n, k, t, Field::new(p)?)?;
            let sigma = select_scalars(&inner, &outer)?;
            return EmsrCode::assemble(inner, outer, sigma, params.epsilon);
        }

        // Check structure once on a field that surely fits the lambdas.
        if t >= k {
            let s = t - k + 1;
            let probe = Field::new(next_prime((s * n + 1) as u64))?;
            let inner = InnerMsrCode::new(n, k, t, probe)?;
            check_compatible(&inner, &outer, params.epsilon)?;
        }
        let s = t.saturating_sub(k) + 1;
        let mut p = next_prime(((s * n + 1).max(outer.size() + 1)) as u64);
        loop {
            let inner = InnerMsrCode::new(n, k, t, Field::new(p)?)?;
            match select_scalars(&inner, &outer) {
                Ok(sigma) => return EmsrCode::assemble(inner, outer, sigma, params.epsilon),
                Err(Error::FieldTooSmall(_)) => p = next_prime(p + 1),
                Err(e) => return Err(e),
            }
        }
    }

    /// Assembles a code from explicit scalars. Only shapes and nonzero
    /// scalars are checked; use [`validate_scalars`] and [`mds_check`] to
    /// vet arbitrary choices.
    pub fn from_parts_unvalidated(
        inner: InnerMsrCode,
        outer: OuterCode,
        sigma: Vec<FieldElement>,
        epsilon: f64,
    ) -> Result<Self> {
        EmsrCode::assemble(inner, outer, sigma, epsilon)
    }

    fn assemble(
        inner: InnerMsrCode,
        outer: OuterCode,
        sigma: Vec<FieldElement>,
        epsilon: f64,
    ) -> Result<Self> {
        check_compatible(&inner, &outer, epsilon)?;
        if sigma.len() != outer.size() {
            return Err(Error::DimensionMismatch {
                expected: outer.size(),
                got: sigma.len(),
            });
        }
        if sigma.iter().any(|s| s.is_zero()) {
            return Err(Error::InvalidParameters("scalars must be nonzero".into()));
        }
        let columns = (0..outer.size())
            .map(|i| (0..outer.length()).map(|x| outer.column(i, x)).collect())
            .collect();
        Ok(EmsrCode {
            inner,
            outer,
            sigma,
            columns,
            epsilon,
        })
    }

    pub(crate) fn layout(&self) -> Layout<'_> {
        Layout {
            inner: &self.inner,
            columns: &self.columns,
            sigma: &self.sigma,
        }
    }

    pub fn inner(&self) -> &InnerMsrCode {
        &self.inner
    }

    pub fn outer(&self) -> &OuterCode {
        &self.outer
    }

    pub fn field(&self) -> &Field {
        self.inner.field()
    }

    pub fn sigma(&self) -> &[FieldElement] {
        &self.sigma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same code with a different bandwidth target.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(EmsrCode {
            epsilon,
            ..self.clone()
        })
    }

    pub fn params(&self) -> EmsrParams {
        EmsrParams {
            inner: InnerParams {
                n: self.inner.n(),
                k: self.inner.k(),
                t: self.inner.t(),
            },
            outer: OuterParams {
                q: self.outer.q(),
                length: self.outer.length(),
                dimension: self.outer.dimension(),
            },
            epsilon: self.epsilon,
            modulus: Some(self.field().modulus() as u64),
        }
    }

    /// Inner node used by `block` at `coord`.
    pub fn column(&self, block: usize, coord: usize) -> usize {
        self.columns[block][coord]
    }

    /// Number of blocks, `M`.
    pub fn blocks(&self) -> usize {
        self.outer.size()
    }

    /// Number of message blocks, `M - r`.
    pub fn message_blocks(&self) -> usize {
        self.blocks() - self.r()
    }

    /// Helpers contacted per repair, `M - n + t`.
    pub fn helpers(&self) -> usize {
        self.blocks() - self.inner.n() + self.inner.t()
    }

    /// Symbols per block, `N * ell`.
    pub fn block_len(&self) -> usize {
        self.outer.length() * self.inner.ell()
    }

    pub fn r(&self) -> usize {
        self.inner.r()
    }

    pub fn s(&self) -> usize {
        self.inner.s()
    }

    pub fn ell(&self) -> usize {
        self.inner.ell()
    }

    /// Message length in symbols, `(M - r) * N * ell`.
    pub fn message_len(&self) -> usize {
        self.message_blocks() * self.block_len()
    }

    /// Per-helper download budget `(1 + epsilon) * N * ell / s`.
    pub fn helper_budget(&self) -> f64 {
        (1.0 + self.epsilon) * self.block_len() as f64 / self.s() as f64
    }

    /// Whether `D / N >= 1 - epsilon / (r - 1)`.
    pub fn bandwidth_hypothesis_holds(&self) -> bool {
        let d = self.outer.distance().unwrap_or(0) as f64;
        let n = self.outer.length() as f64;
        let r1 = self.r() as f64 - 1.0;
        d * r1 + 1e-9 >= n * (r1 - self.epsilon)
    }

    /// Compulsory-helper bound `M - W` counting the failed block itself.
    pub fn compulsory_bound(&self) -> usize {
        self.blocks() - self.outer.full_weight() as usize
    }

    pub fn plan(&self, failed: usize, choice: &HelperChoice) -> Result<RepairPlan> {
        plan_repair(self, failed, choice)
    }

    /// Parity-check column of block `i`: `r*N*ell x N*ell`, band `j` holding
    /// `sigma_i^j * diag(H_{j, a_{i,1}}, ..., H_{j, a_{i,N}})`.
    pub fn parity_column(&self, block: usize) -> Result<Matrix> {
        if block >= self.blocks() {
            return Err(Error::IndexOutOfRange(format!(
                "block {block} of {}",
                self.blocks()
            )));
        }
        let len = self.block_len();
        let mut m = Matrix::zeros(self.r() * len, len);
        self.fill_column(&mut m, block, 0);
        Ok(m)
    }

    /// The full `r*N*ell x M*N*ell` parity-check matrix.
    pub fn parity_matrix(&self) -> Matrix {
        let len = self.block_len();
        let mut m = Matrix::zeros(self.r() * len, self.blocks() * len);
        for i in 0..self.blocks() {
            self.fill_column(&mut m, i, i * len);
        }
        m
    }

    fn fill_column(&self, m: &mut Matrix, block: usize, col0: usize) {
        let f = *self.field();
        let ell = self.ell();
        let len = self.block_len();
        let layout = self.layout();
        for k in 0..self.outer.length() {
            for b in 0..ell {
                let x = layout.eval_point(block, k, b);
                let mut v = FieldElement::ONE;
                for j in 0..self.r() {
                    m.set(j * len + k * ell + b, col0 + k * ell + b, v);
                    v = f.mul(v, x);
                }
            }
        }
    }

    /// Systematic encoding: blocks `0..M-r` carry the message.
    pub fn encode(&self, message: &[FieldElement]) -> Result<EmsrCodeword> {
        if message.len() != self.message_len() {
            return Err(Error::DimensionMismatch {
                expected: self.message_len(),
                got: message.len(),
            });
        }
        let len = self.block_len();
        let mut blocks: Vec<Vec<FieldElement>> =
            message.chunks(len).map(<[FieldElement]>::to_vec).collect();
        blocks.resize(self.blocks(), vec![FieldElement::ZERO; len]);
        let parity: Vec<usize> = (self.message_blocks()..self.blocks()).collect();
        self.layout().fill_erasures(&mut blocks, &parity)?;
        Ok(EmsrCodeword { blocks })
    }

    pub fn verify(&self, word: &EmsrCodeword) -> bool {
        let layout = self.layout();
        layout.check_shape(&word.blocks).is_ok() && layout.satisfies_parity(&word.blocks)
    }

    /// Recovers the blocks in `erased` (their contents are ignored).
    pub fn decode_erasures(
        &self,
        word: &EmsrCodeword,
        erased: &BTreeSet<usize>,
    ) -> Result<EmsrCodeword> {
        let layout = self.layout();
        layout.check_shape(&word.blocks)?;
        if let Some(&bad) = erased.iter().find(|&&i| i >= self.blocks()) {
            return Err(Error::IndexOutOfRange(format!(
                "block {bad} of {}",
                self.blocks()
            )));
        }
        let mut blocks = word.blocks.clone();
        let erased: Vec<usize> = erased.iter().copied().collect();
        layout.fill_erasures(&mut blocks, &erased)?;
        Ok(EmsrCodeword { blocks })
    }

    /// Decodes from a partial set of blocks (`None` = missing) and returns
    /// the message.
    pub fn decode_message(
        &self,
        blocks: &[Option<Vec<FieldElement>>],
    ) -> Result<Vec<FieldElement>> {
        if blocks.len() != self.blocks() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks(),
                got: blocks.len(),
            });
        }
        let erased: BTreeSet<usize> = (0..blocks.len()).filter(|&i| blocks[i].is_none()).collect();
        if erased.len() > self.r() {
            return Err(Error::TooManyErasures {
                erased: erased.len(),
                max: self.r(),
            });
        }
        let word = EmsrCodeword {
            blocks: blocks
                .iter()
                .map(|b| {
                    b.clone()
                        .unwrap_or_else(|| vec![FieldElement::ZERO; self.block_len()])
                })
                .collect(),
        };
        let full = self.decode_erasures(&word, &erased)?;
        Ok(full.blocks[..self.message_blocks()].concat())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "epsilon must be finite and >= 0, got {epsilon}"
        )));
    }
    Ok(())
}

fn check_compatible(inner: &InnerMsrCode, outer: &OuterCode, epsilon: f64) -> Result<()> {
    check_epsilon(epsilon)?;
    let q = outer.q() as usize;
    if q > inner.n() {
        return Err(Error::InvalidParameters(format!(
            "outer alphabet {q} exceeds inner length {}",
            inner.n()
        )));
    }
    if q <= inner.r() {
        return Err(Error::InvalidParameters(format!(
            "outer alphabet {q} must exceed inner redundancy {}",
            inner.r()
        )));
    }
    if outer.dimension() == 0 {
        return Err(Error::InvalidParameters(
            "outer code must have dimension >= 1".into(),
        ));
    }
    Ok(())
}
