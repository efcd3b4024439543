//! Position-wise view of a layered parity-check code.
//!
//! Both the inner code and the composed code have parity checks of the form
//! `sum_i x_i(k, b)^j * c^i_{k,b} = 0` for `j in 0..r`, one independent system
//! per coordinate `k` and symbol position `b`. The evaluation point is
//! `x_i(k, b) = sigma_i * lambda[node][digit_{node+1}(b)]` where `node` is the
//! inner column that block `i` uses at coordinate `k`. The inner code is the
//! special case of one coordinate, `node = i` and `sigma_i = 1`.

use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement, Matrix};
use crate::inner::InnerMsrCode;
use crate::sary::digit_of;

#[derive(Clone, Copy)]
pub(crate) struct Layout<'a> {
    pub inner: &'a InnerMsrCode,
    /// `columns[block][coord]` is the 0-based inner node index.
    pub columns: &'a [Vec<usize>],
    pub sigma: &'a [FieldElement],
}

impl<'a> Layout<'a> {
    pub fn field(&self) -> &Field {
        self.inner.field()
    }

    pub fn blocks(&self) -> usize {
        self.columns.len()
    }

    pub fn coords(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn ell(&self) -> usize {
        self.inner.ell()
    }

    pub fn block_len(&self) -> usize {
        self.coords() * self.ell()
    }

    pub fn redundancy(&self) -> usize {
        self.inner.r()
    }

    pub fn eval_point(&self, block: usize, coord: usize, b: usize) -> FieldElement {
        let node = self.columns[block][coord];
        let digit = digit_of(b, self.inner.s(), node + 1);
        self.field()
            .mul(self.sigma[block], self.inner.lambda(node, digit))
    }

    /// Checks the shape of a word: `blocks()` blocks of `block_len()` symbols.
    pub fn check_shape(&self, blocks: &[Vec<FieldElement>]) -> Result<()> {
        if blocks.len() != self.blocks() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks(),
                got: blocks.len(),
            });
        }
        for b in blocks {
            if b.len() != self.block_len() {
                return Err(Error::DimensionMismatch {
                    expected: self.block_len(),
                    got: b.len(),
                });
            }
        }
        Ok(())
    }

    /// True iff every parity equation holds.
    pub fn satisfies_parity(&self, blocks: &[Vec<FieldElement>]) -> bool {
        let f = *self.field();
        let r = self.redundancy();
        let ell = self.ell();
        for k in 0..self.coords() {
            for b in 0..ell {
                let off = k * ell + b;
                let mut syndrome = vec![FieldElement::ZERO; r];
                for (i, block) in blocks.iter().enumerate() {
                    accumulate_powers(&f, &mut syndrome, self.eval_point(i, k, b), block[off]);
                }
                if syndrome.iter().any(|s| !s.is_zero()) {
                    return false;
                }
            }
        }
        true
    }

    /// Overwrites the blocks listed in `erased` with the unique values that
    /// complete a codeword. Intact data left over-determined is checked for
    /// consistency.
    pub fn fill_erasures(&self, blocks: &mut [Vec<FieldElement>], erased: &[usize]) -> Result<()> {
        let r = self.redundancy();
        if erased.len() > r {
            return Err(Error::TooManyErasures {
                erased: erased.len(),
                max: r,
            });
        }
        let f = *self.field();
        let ell = self.ell();
        let e = erased.len();
        for k in 0..self.coords() {
            for b in 0..ell {
                let off = k * ell + b;
                let mut syndrome = vec![FieldElement::ZERO; r];
                for (i, block) in blocks.iter().enumerate() {
                    if !erased.contains(&i) {
                        accumulate_powers(&f, &mut syndrome, self.eval_point(i, k, b), block[off]);
                    }
                }
                let points: Vec<FieldElement> =
                    erased.iter().map(|&i| self.eval_point(i, k, b)).collect();
                if e > 0 {
                    let system = Matrix::vandermonde(&f, &points, e);
                    let rhs = Matrix::column(syndrome[..e].iter().map(|&v| f.neg(v)).collect());
                    let sol = system.solve(&f, &rhs)?;
                    for (idx, &i) in erased.iter().enumerate() {
                        let v = sol.get(idx, 0);
                        blocks[i][off] = v;
                        accumulate_powers(&f, &mut syndrome, points[idx], v);
                    }
                }
                if syndrome.iter().any(|s| !s.is_zero()) {
                    return Err(Error::NotACodeword);
                }
            }
        }
        Ok(())
    }
}

/// `acc[j] += x^j * v` for every `j`.
#[inline]
pub(crate) fn accumulate_powers(
    f: &Field,
    acc: &mut [FieldElement],
    x: FieldElement,
    v: FieldElement,
) {
    if v.is_zero() {
        return;
    }
    let mut term = v;
    for a in acc.iter_mut() {
        *a = f.add(*a, term);
        term = f.mul(term, x);
    }
}
