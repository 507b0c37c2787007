//! 2x2 integer matrices with overflow-checked arithmetic.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMat2 {
    pub m: [[i128; 2]; 2],
}

fn ovf(what: &str) -> Error {
    Error::Overflow(format!("2x2 integer matrix {what}"))
}

impl IntMat2 {
    pub const IDENTITY: IntMat2 = IntMat2 { m: [[1, 0], [0, 1]] };

    pub fn new(a11: i128, a12: i128, a21: i128, a22: i128) -> Self {
        IntMat2 { m: [[a11, a12], [a21, a22]] }
    }

    pub fn det(&self) -> i128 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> i128 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn transpose(&self) -> Self {
        IntMat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn neg(&self) -> Self {
        IntMat2::new(-self.m[0][0], -self.m[0][1], -self.m[1][0], -self.m[1][1])
    }

    /// Inverse of a determinant-one matrix (the adjugate).
    pub fn inverse_unimodular(&self) -> Result<Self> {
        if self.det() != 1 {
            return Err(Error::Validation(format!("{self} does not have determinant 1")));
        }
        Ok(IntMat2::new(self.m[1][1], -self.m[0][1], -self.m[1][0], self.m[0][0]))
    }

    pub fn mul(&self, o: &IntMat2) -> Result<Self> {
        let mut out = [[0i128; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let a = self.m[i][0].checked_mul(o.m[0][j]).ok_or_else(|| ovf("product"))?;
                let b = self.m[i][1].checked_mul(o.m[1][j]).ok_or_else(|| ovf("product"))?;
                *cell = a.checked_add(b).ok_or_else(|| ovf("product"))?;
            }
        }
        Ok(IntMat2 { m: out })
    }

    pub fn pow(&self, mut e: u32) -> Result<Self> {
        let mut base = *self;
        let mut acc = IntMat2::IDENTITY;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Integer power, negative exponents through the inverse.
    pub fn zpow(&self, e: i64) -> Result<Self> {
        let exp = u32::try_from(e.unsigned_abs()).map_err(|_| ovf("power"))?;
        if e >= 0 {
            self.pow(exp)
        } else {
            self.inverse_unimodular()?.pow(exp)
        }
    }

    pub fn apply(&self, v: [i128; 2]) -> Result<[i128; 2]> {
        let row = |i: usize| -> Option<i128> {
            self.m[i][0].checked_mul(v[0])?.checked_add(self.m[i][1].checked_mul(v[1])?)
        };
        Ok([row(0).ok_or_else(|| ovf("action"))?, row(1).ok_or_else(|| ovf("action"))?])
    }

    pub fn apply_f64(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] as f64 * v[0] + self.m[0][1] as f64 * v[1],
            self.m[1][0] as f64 * v[0] + self.m[1][1] as f64 * v[1],
        ]
    }

    pub fn max_abs(&self) -> i128 {
        self.m.iter().flatten().map(|v| v.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for IntMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_and_inverse() {
        let a = IntMat2::new(2, 1, 1, 1);
        assert_eq!(a.pow(2).unwrap(), IntMat2::new(5, 3, 3, 2));
        assert_eq!(a.zpow(-1).unwrap(), IntMat2::new(1, -1, -1, 2));
        assert_eq!(a.mul(&a.zpow(-3).unwrap()).unwrap(), a.zpow(-2).unwrap());
        assert_eq!(a.pow(0).unwrap(), IntMat2::IDENTITY);
    }

    #[test]
    fn overflow_is_reported() {
        let a = IntMat2::new(2, 1, 1, 1);
        assert!(matches!(a.pow(200), Err(Error::Overflow(_))));
    }
}
