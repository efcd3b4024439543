//! Prime-field arithmetic and dense matrices over GF(p).
//!
//! Every code in this crate lives in a single prime field. Moduli are kept
//! below 2^31 so that a product of two reduced elements fits in a `u64`.
//!
//! Elimination always takes the first nonzero entry of a column as pivot, so
//! ranks, solutions and anything derived from them are reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of GF(p), stored as its canonical representative in `[0, p)`.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a value already known to be reduced modulo the field prime.
    /// Prefer [`Field::elem`] when that is not guaranteed.
    pub const fn from_raw(v: u32) -> Self {
        FieldElement(v)
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The prime field GF(p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    modulus: u32,
}

/// Deterministic primality test by trial division; adequate for `p < 2^31`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

impl Field {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus >= 1 << 31 || !is_prime(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        Ok(Field {
            modulus: modulus as u32,
        })
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, v: u64) -> FieldElement {
        FieldElement((v % self.modulus as u64) as u32)
    }

    /// Reduces a signed integer into the field.
    pub fn elem_signed(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.modulus as i64) as u32)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a.0 as u64 + b.0 as u64;
        let p = self.modulus as u64;
        FieldElement(if s >= p { s - p } else { s } as u32)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 >= b.0 {
            FieldElement(a.0 - b.0)
        } else {
            FieldElement(self.modulus - (b.0 - a.0))
        }
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a.0 == 0 {
            a
        } else {
            FieldElement(self.modulus - a.0)
        }
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(((a.0 as u64 * b.0 as u64) % self.modulus as u64) as u32)
    }

    pub fn pow(&self, a: FieldElement, mut exp: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::InversionOfZero);
        }
        let (mut r0, mut r1) = (self.modulus as i64, a.0 as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Ok(self.elem_signed(t0))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Sum of a sequence of elements.
    pub fn sum<I: IntoIterator<Item = FieldElement>>(&self, items: I) -> FieldElement {
        items
            .into_iter()
            .fold(FieldElement::ZERO, |acc, x| self.add(acc, x))
    }
}

/// `a^{-1}` in `f`.
pub fn ff_inv(a: FieldElement, f: &Field) -> Result<FieldElement> {
    f.inv(a)
}

/// A dense row-major matrix of field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Matrix::zeros(size, size);
        for i in 0..size {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from integer rows, reducing every entry into `field`.
    pub fn from_rows(field: &Field, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend(row.iter().map(|&v| field.elem(v)));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// A column vector.
    pub fn column(values: Vec<FieldElement>) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values,
        }
    }

    /// The `rows x points.len()` matrix whose column `c` is
    /// `(1, x_c, x_c^2, ...)`.
    pub fn vandermonde(field: &Field, points: &[FieldElement], rows: usize) -> Self {
        let mut m = Matrix::zeros(rows, points.len());
        for (c, &x) in points.iter().enumerate() {
            let mut acc = FieldElement::ONE;
            for r in 0..rows {
                m.set(r, c, acc);
                acc = field.mul(acc, x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<FieldElement> {
        self.data
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn place(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for r in 0..block.rows {
            let dst = (r0 + r) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(r));
        }
    }

    /// The submatrix made of the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn scale_row(&mut self, field: &Field, r: usize, k: FieldElement) {
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = field.mul(*v, k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn mul(&self, field: &Field, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = field.add(out.get(i, j), field.mul(a, rhs.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, field: &Field, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                field.sum(
                    self.row(r)
                        .iter()
                        .zip(x)
                        .filter(|(a, _)| !a.is_zero())
                        .map(|(&a, &b)| field.mul(a, b)),
                )
            })
            .collect())
    }

    /// Rank by forward elimination. Zero multipliers are skipped, which
    /// keeps the cost low on the sparse block matrices used for MDS checks.
    pub fn rank(&self, field: &Field) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(pivot) = (rank..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
                continue;
            };
            m.swap_rows(rank, pivot);
            let inv = field.inv(m.get(rank, c)).expect("pivot is nonzero");
            for r in rank + 1..m.rows {
                let factor = m.get(r, c);
                if factor.is_zero() {
                    continue;
                }
                let k = field.mul(factor, inv);
                for cc in c..m.cols {
                    let p = m.get(rank, cc);
                    if p.is_zero() {
                        continue;
                    }
                    let v = field.sub(m.get(r, cc), field.mul(k, p));
                    m.set(r, cc, v);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Solves `self * x = rhs` for square, full-rank `self`.
    pub fn solve(&self, field: &Field, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        if rhs.rows != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: rhs.rows,
            });
        }
        let n = self.rows;
        let w = n + rhs.cols;
        let mut aug = Matrix::zeros(n, w);
        aug.place(0, 0, self);
        aug.place(0, n, rhs);

        for c in 0..n {
            let pivot = (c..n)
                .find(|&r| !aug.get(r, c).is_zero())
                .ok_or(Error::SingularSystem)?;
            aug.swap_rows(c, pivot);
            let inv = field.inv(aug.get(c, c))?;
            aug.scale_row(field, c, inv);
            for r in 0..n {
                if r == c {
                    continue;
                }
                let factor = aug.get(r, c);
                if factor.is_zero() {
                    continue;
                }
                for cc in c..w {
                    let p = aug.get(c, cc);
                    if p.is_zero() {
                        continue;
                    }
                    let v = field.sub(aug.get(r, cc), field.mul(factor, p));
                    aug.set(r, cc, v);
                }
            }
        }

        let cols: Vec<usize> = (n..w).collect();
        Ok(aug.select_columns(&cols))
    }
}

pub fn mat_rank(m: &Matrix, f: &Field) -> usize {
    m.rank(f)
}

pub fn mat_solve(a: &Matrix, b: &Matrix, f: &Field) -> Result<Matrix> {
    a.solve(f, b)
}

/// Coefficients (constant term first) of `prod (x - root)`.
pub fn poly_from_roots(field: &Field, roots: &[FieldElement]) -> Vec<FieldElement> {
    let mut coeffs = vec![FieldElement::ONE];
    for &root in roots {
        let mut next = vec![FieldElement::ZERO; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] = field.add(next[i + 1], c);
            next[i] = field.sub(next[i], field.mul(c, root));
        }
        coeffs = next;
    }
    coeffs
}

/// Horner evaluation of a polynomial given constant-term-first coefficients.
pub fn poly_eval(field: &Field, coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    coeffs.iter().rev().fold(FieldElement::ZERO, |acc, &c| {
        field.add(field.mul(acc, x), c)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(p: u64) -> Field {
        Field::new(p).unwrap()
    }

    #[test]
    fn rejects_composite_and_large_moduli() {
        assert_eq!(Field::new(12), Err(Error::NotPrime(12)));
        assert_eq!(Field::new(1), Err(Error::NotPrime(1)));
        assert!(Field::new((1 << 31) + 11).is_err());
        assert!(Field::new(2).is_ok());
        assert!(Field::new(2_147_483_647).is_ok());
    }

    #[test]
    fn inverse_examples() {
        let f = gf(11);
        assert_eq!(ff_inv(f.elem(1), &f), Ok(f.elem(1)));
        assert_eq!(ff_inv(f.elem(3), &f), Ok(f.elem(4)));
        assert_eq!(ff_inv(f.elem(0), &f), Err(Error::InversionOfZero));
    }

    #[test]
    fn rank_examples() {
        let f = gf(11);
        assert_eq!(mat_rank(&Matrix::identity(2), &f), 2);
        assert_eq!(mat_rank(&Matrix::zeros(2, 2), &f), 0);
        let v = Matrix::vandermonde(&f, &[f.elem(1), f.elem(2), f.elem(3)], 3);
        // det = (2-1)(3-1)(3-2) = 2 != 0 mod 11
        assert_eq!(mat_rank(&v, &f), 3);
        let wide = Matrix::from_rows(&f, &[vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
        assert_eq!(mat_rank(&wide, &f), 1);
    }

    #[test]
    fn solve_examples() {
        let f = gf(11);
        let b = Matrix::from_rows(&f, &[vec![5, 1], vec![9, 0]]).unwrap();
        assert_eq!(mat_solve(&Matrix::identity(2), &b, &f), Ok(b.clone()));

        let a = Matrix::from_rows(&f, &[vec![2]]).unwrap();
        let b = Matrix::from_rows(&f, &[vec![3]]).unwrap();
        let x = mat_solve(&a, &b, &f).unwrap();
        assert_eq!(x.get(0, 0), f.elem(7));

        let singular = Matrix::from_rows(&f, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(
            mat_solve(&singular, &Matrix::identity(2), &f),
            Err(Error::SingularSystem)
        );
    }

    #[test]
    fn polynomial_from_roots_vanishes_on_roots() {
        let f = gf(101);
        let roots = [f.elem(3), f.elem(7), f.elem(50)];
        let p = poly_from_roots(&f, &roots);
        assert_eq!(p.len(), 4);
        assert_eq!(p[3], FieldElement::ONE);
        for r in roots {
            assert!(poly_eval(&f, &p, r).is_zero());
        }
        assert!(!poly_eval(&f, &p, f.elem(4)).is_zero());
    }

    fn random_matrix(p: u64, rows: usize, cols: usize, seed: &[u64]) -> Matrix {
        let f = gf(p);
        let data = (0..rows * cols)
            .map(|i| f.elem(seed[i % seed.len()].wrapping_mul(i as u64 + 7) >> 3))
            .collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    proptest! {
        #[test]
        fn inverse_is_an_involution(a in 1u64..1_000_003) {
            let f = gf(1_000_003);
            let x = f.elem(a);
            let inv = f.inv(x).unwrap();
            prop_assert_eq!(f.mul(x, inv), FieldElement::ONE);
            prop_assert_eq!(f.inv(inv).unwrap(), x);
        }

        #[test]
        fn rank_invariant_under_row_operations(
            seed in prop::collection::vec(any::<u64>(), 1..40),
            rows in 1usize..7,
            cols in 1usize..7,
            a in 0usize..7,
            b in 0usize..7,
            k in 1u64..13,
        ) {
            let f = gf(13);
            let m = random_matrix(13, rows, cols, &seed);
            let before = m.rank(&f);
            prop_assert!(before <= rows.min(cols));
            let mut swapped = m.clone();
            swapped.swap_rows(a % rows, b % rows);
            prop_assert_eq!(swapped.rank(&f), before);
            let mut scaled = m.clone();
            scaled.scale_row(&f, a % rows, f.elem(k));
            prop_assert_eq!(scaled.rank(&f), before);
        }

        #[test]
        fn solve_then_multiply_reproduces_rhs(
            seed in prop::collection::vec(any::<u64>(), 1..64),
            n in 1usize..8,
            rhs_cols in 1usize..4,
        ) {
            let f = gf(10007);
            let a = random_matrix(10007, n, n, &seed);
            prop_assume!(a.rank(&f) == n);
            let b = random_matrix(10007, n, rhs_cols, &seed[1..].iter().chain(&seed[..1]).copied().collect::<Vec<_>>());
            let x = a.solve(&f, &b).unwrap();
            prop_assert_eq!(a.mul(&f, &x).unwrap(), b);
        }
    }
}
