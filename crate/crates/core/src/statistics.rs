//! Statistics of the values of `Q_{A*}` over orbit representatives: integer
//! spacing histograms and the growth of the set of represented integers.

use crate::error::{Error, Result};
use crate::intmat::IntMat2;
use crate::manifold::{self, Geometry, GluingMap};
use crate::output::fmt12;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Factorization `A = R2 R1` into integer involutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Involution {
    pub r1: IntMat2,
    pub r2: IntMat2,
}

impl Involution {
    pub fn new(r1: IntMat2, r2: IntMat2, a: &GluingMap) -> Result<Self> {
        for (name, r) in [("R1", &r1), ("R2", &r2)] {
            if r.mul(r)? != IntMat2::IDENTITY {
                return Err(Error::Validation(format!("{name} = {r} is not an involution")));
            }
        }
        if r2.mul(&r1)? != *a.matrix() {
            return Err(Error::Validation(format!("R2 R1 != {}", a.matrix())));
        }
        Ok(Involution { r1, r2 })
    }
}

/// Exhaustive search for `A = R2 R1` with entries of `R1` bounded by those of `A`.
pub fn find_involution(a: &GluingMap) -> Option<Involution> {
    let b = a.matrix().max_abs();
    for p in -b..=b {
        for q in -b..=b {
            for r in -b..=b {
                let s = -p;
                if p * s - q * r != -1 {
                    continue;
                }
                let r1 = IntMat2::new(p, q, r, s);
                let Ok(r2) = a.matrix().mul(&r1) else { continue };
                if let Ok(inv) = Involution::new(r1, r2, a) {
                    return Some(inv);
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SymmetryMode {
    /// All orbit representatives, both signs of `Q`.
    OrbitOnly,
    /// Orbits with `p > 0, Q > 0`, further identified under `R2^T`.
    ExtraInvolution(Involution),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueSequence {
    pub values: Vec<u64>,
    pub qmax: u64,
    pub mode: SymmetryMode,
}

/// `|Q_{A*}|` over the reduced fundamental domain selected by `mode`.
pub fn value_sequence(geom: &Geometry, qmax: u64, mode: SymmetryMode) -> Result<ValueSequence> {
    let orbits = manifold::orbit_enumerate(geom, qmax)?;
    let mut values: Vec<u64> = match &mode {
        SymmetryMode::OrbitOnly => orbits.iter().map(|o| o.qvalue.unsigned_abs()).collect(),
        SymmetryMode::ExtraInvolution(inv) => {
            let inv = Involution::new(inv.r1, inv.r2, &geom.gluing)?;
            let s = inv.r2.transpose();
            let mut kept = Vec::new();
            for o in orbits.iter().filter(|o| o.p > 0.0 && o.qvalue > 0) {
                let w = s.apply([o.gamma[0] as i128, o.gamma[1] as i128])?;
                let to64 = |x: i128| i64::try_from(x).map_err(|_| Error::Overflow("involution image".into()));
                let mut partner = geom.canonical([to64(w[0])?, to64(w[1])?])?;
                let (p, _) = geom.eigencoords([partner[0] as f64, partner[1] as f64]);
                if p < 0.0 {
                    partner = [-partner[0], -partner[1]];
                }
                if o.gamma <= partner {
                    kept.push(o.qvalue as u64);
                }
            }
            kept
        }
    };
    values.sort_unstable();
    Ok(ValueSequence { values, qmax, mode })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingHistogram {
    pub bins: BTreeMap<u64, u64>,
    pub total: u64,
}

impl SpacingHistogram {
    pub fn fraction(&self, spacing: u64) -> f64 {
        self.bins.get(&spacing).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn zero_fraction(&self) -> f64 {
        self.fraction(0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("spacing,count,fraction\n");
        for (k, v) in &self.bins {
            let _ = writeln!(s, "{},{},{}", k, v, fmt12(*v as f64 / self.total as f64));
        }
        s
    }
}

/// Histogram of consecutive differences; `drop_degenerate` removes repeated
/// values first.
pub fn spacing_histogram(vs: &ValueSequence, drop_degenerate: bool) -> Result<SpacingHistogram> {
    let mut v = vs.values.clone();
    if drop_degenerate {
        v.dedup();
    }
    if v.len() < 2 {
        return Err(Error::Precondition("need at least two values for spacings".into()));
    }
    let mut bins = BTreeMap::new();
    for w in v.windows(2) {
        *bins.entry(w[1] - w[0]).or_insert(0) += 1;
    }
    Ok(SpacingHistogram { bins, total: (v.len() - 1) as u64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub k: u64,
    pub count: u64,
    pub normalized: f64,
}

/// Number of distinct values up to each checkpoint, with `count sqrt(ln K) / K`.
pub fn represented_growth(vs: &ValueSequence, checkpoints: &[u64]) -> Result<Vec<GrowthRow>> {
    let mut distinct = vs.values.clone();
    distinct.dedup();
    checkpoints
        .iter()
        .map(|&k| {
            if k > vs.qmax || k < 2 {
                return Err(Error::Precondition(format!("checkpoint {k} outside [2, {}]", vs.qmax)));
            }
            let count = distinct.partition_point(|&v| v <= k) as u64;
            let kf = k as f64;
            Ok(GrowthRow { k, count, normalized: count as f64 * kf.ln().sqrt() / kf })
        })
        .collect()
}

pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut s = String::from("K,count,normalized\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.k, r.count, fmt12(r.normalized));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_map_involutions() {
        let a = GluingMap::cat_map();
        let r1 = IntMat2::new(1, 0, -1, -1);
        let r2 = IntMat2::new(1, -1, 0, -1);
        assert!(Involution::new(r1, r2, &a).is_ok());
        assert!(Involution::new(r2, r1, &a).is_err());
        assert!(Involution::new(IntMat2::new(1, 1, 0, 1), r2, &a).is_err());
        assert!(find_involution(&a).is_some());
    }

    #[test]
    fn consecutive_integers() {
        let vs = ValueSequence { values: (1..50).collect(), qmax: 50, mode: SymmetryMode::OrbitOnly };
        let h = spacing_histogram(&vs, false).unwrap();
        assert_eq!(h.bins.len(), 1);
        assert_eq!(h.bins[&1], 48);
    }

    #[test]
    fn dedup_removes_zero_bin() {
        let vs = ValueSequence { values: vec![1, 1, 2, 4, 4, 4, 9], qmax: 9, mode: SymmetryMode::OrbitOnly };
        assert_eq!(spacing_histogram(&vs, false).unwrap().bins[&0], 3);
        assert!(!spacing_histogram(&vs, true).unwrap().bins.contains_key(&0));
    }
}
