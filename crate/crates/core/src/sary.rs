//! Base-`s` positional indices for symbols inside a block.
//!
//! Position `b` in `[0, s^n)` is read as the digit string `(b_n, ..., b_1)`;
//! digit `i` (counted from the right, starting at 1) selects which `lambda`
//! entry of inner node `i` scales the symbol.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SAryIndex {
    value: usize,
    radix: usize,
    len: usize,
}

impl SAryIndex {
    pub fn new(value: usize, radix: usize, len: usize) -> Result<Self> {
        if radix < 2 {
            return Err(Error::InvalidParameters(format!("radix {radix} < 2")));
        }
        let bound = radix
            .checked_pow(len as u32)
            .ok_or_else(|| Error::InvalidParameters(format!("{radix}^{len} overflows")))?;
        if value >= bound {
            return Err(Error::IndexOutOfRange(format!(
                "value {value} not below {radix}^{len}"
            )));
        }
        Ok(SAryIndex { value, radix, len })
    }

    /// Builds an index from digits listed most significant first, i.e.
    /// `(b_n, ..., b_1)`.
    pub fn from_digits(digits: &[usize], radix: usize) -> Result<Self> {
        let mut value = 0usize;
        for &d in digits {
            if d >= radix {
                return Err(Error::IndexOutOfRange(format!(
                    "digit {d} >= radix {radix}"
                )));
            }
            value = value * radix + d;
        }
        SAryIndex::new(value, radix, digits.len())
    }

    pub fn value(self) -> usize {
        self.value
    }

    pub fn radix(self) -> usize {
        self.radix
    }

    pub fn len(self) -> usize {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    /// Digits `(b_n, ..., b_1)`.
    pub fn digits(self) -> Vec<usize> {
        (1..=self.len)
            .rev()
            .map(|i| digit_of(self.value, self.radix, i))
            .collect()
    }

    /// Digit at 1-based position `i` from the right.
    pub fn digit(self, i: usize) -> Result<usize> {
        self.check_position(i)?;
        Ok(digit_of(self.value, self.radix, i))
    }

    /// `b(i, u)`: the index with digit `i` replaced by `u`.
    pub fn replace(self, i: usize, u: usize) -> Result<Self> {
        self.check_position(i)?;
        if u >= self.radix {
            return Err(Error::IndexOutOfRange(format!(
                "digit {u} >= radix {}",
                self.radix
            )));
        }
        Ok(SAryIndex {
            value: replace_digit(self.value, self.radix, i, u),
            ..self
        })
    }

    fn check_position(self, i: usize) -> Result<()> {
        if i == 0 || i > self.len {
            return Err(Error::IndexOutOfRange(format!(
                "digit position {i} outside 1..={}",
                self.len
            )));
        }
        Ok(())
    }
}

pub fn digit_replace(b: SAryIndex, i: usize, u: usize) -> Result<SAryIndex> {
    b.replace(i, u)
}

#[inline]
pub(crate) fn digit_of(value: usize, radix: usize, i: usize) -> usize {
    (value / radix.pow(i as u32 - 1)) % radix
}

#[inline]
pub(crate) fn replace_digit(value: usize, radix: usize, i: usize, u: usize) -> usize {
    let w = radix.pow(i as u32 - 1);
    value - digit_of(value, radix, i) * w + u * w
}
