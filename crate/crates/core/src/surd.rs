//! Exact sign of `r + s*sqrt(d)` for integers `r, s` and a positive non-square `d`.

use crate::error::{Error, Result};
use std::cmp::Ordering;

pub(crate) fn sign(r: i128, s: i128, d: i128) -> Result<Ordering> {
    let zero = Ordering::Equal;
    let rs = r.cmp(&0);
    let ss = s.cmp(&0);
    if rs != Ordering::Less && ss != Ordering::Less {
        return Ok(if rs == zero && ss == zero { zero } else { Ordering::Greater });
    }
    if rs != Ordering::Greater && ss != Ordering::Greater {
        return Ok(Ordering::Less);
    }
    let overflow = || Error::Overflow("surd sign comparison".into());
    let r2 = r.checked_mul(r).ok_or_else(overflow)?;
    let s2d = s
        .checked_mul(s)
        .and_then(|v| v.checked_mul(d))
        .ok_or_else(overflow)?;
    // d is not a square, so r^2 != s^2 d whenever s != 0
    Ok(if r2 > s2d { rs } else { ss })
}
