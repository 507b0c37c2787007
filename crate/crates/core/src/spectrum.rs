//! Assembly of the Laplace-Beltrami spectrum of `M_A`.
//!
//! Fibre modes with `gamma = 0` give the trivial lines `(2 pi k)^2`. Every
//! other mode is labelled by an `A*`-orbit `[gamma]`; its lines are the
//! Mathieu levels at `|nu(gamma)|` shifted by `nu cos(theta)`. Orbits with the
//! same value of `Q_{A*}` share all their lines, which is where the
//! arithmetic multiplicities come from.

use crate::error::{Error, Result};
use crate::intmat::IntMat2;
use crate::manifold::{self, GluingMap, Geometry, OrbitRep};
use crate::mathieu::{self, MathieuCache, MathieuProblem, MathieuSolution};
use crate::output::fmt12;
use crate::qforms;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineSource {
    Trivial { k: u64 },
    Orbit { orbit: OrbitRep, level: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub energy: f64,
    pub multiplicity: u64,
    pub source: LineSource,
}

impl SpectralLine {
    fn sort_key(&self) -> (u8, u64, u64, [i64; 2]) {
        match &self.source {
            LineSource::Trivial { k } => (0, *k, 0, [0, 0]),
            LineSource::Orbit { orbit, level } => {
                (1, *level as u64, orbit.qvalue.unsigned_abs(), orbit.gamma)
            }
        }
    }

    pub fn orbit(&self) -> Option<(&OrbitRep, usize)> {
        match &self.source {
            LineSource::Orbit { orbit, level } => Some((orbit, *level)),
            LineSource::Trivial { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub lines: Vec<SpectralLine>,
    pub energy_cut: f64,
    pub geometry_hash: String,
    /// Largest `|Q_{A*}|` that was enumerated.
    pub qmax: u64,
    /// Largest level index present among orbit lines.
    pub lmax: usize,
    pub tol: f64,
}

/// SHA-256 of the gluing matrix and the exact metric bits.
pub fn geometry_hash(geom: &Geometry) -> String {
    let mut h = Sha256::new();
    for e in geom.gluing.entries() {
        h.update(e.to_le_bytes());
    }
    for v in [geom.metric.alpha, geom.metric.beta, geom.metric.gamma] {
        h.update(v.to_bits().to_le_bytes());
    }
    format!("{:x}", h.finalize())
}

const BATCH: usize = 16;

/// Every line with energy at most `energy_cut`, levels converged to relative
/// tolerance `tol`.
pub fn assemble(geom: &Geometry, energy_cut: f64, tol: f64) -> Result<SpectrumTable> {
    assemble_with_cache(geom, energy_cut, tol, &MathieuCache::new())
}

pub fn assemble_with_cache(
    geom: &Geometry,
    energy_cut: f64,
    tol: f64,
    cache: &MathieuCache,
) -> Result<SpectrumTable> {
    if !(energy_cut > 0.0 && energy_cut.is_finite()) {
        return Err(Error::Validation(format!("energy cut {energy_cut} must be positive")));
    }
    let mut lines = Vec::new();
    let kmax = (energy_cut.sqrt() / (2.0 * PI)).floor() as u64;
    for k in 0..=kmax {
        let e = 4.0 * PI * PI * (k * k) as f64;
        if e <= energy_cut {
            lines.push(SpectralLine {
                energy: e,
                multiplicity: if k == 0 { 1 } else { 2 },
                source: LineSource::Trivial { k },
            });
        }
    }
    // Lambda_0(|nu|) > |nu|, so no orbit beyond this bound can reach the cut.
    let cos = geom.cos_theta;
    let qmax = (energy_cut / (geom.nu_scale() * (1.0 - cos.abs()))).floor() as u64;
    let mut lmax = 0;
    if qmax >= 1 {
        let orbits = manifold::orbit_enumerate(geom, qmax)?;
        let mut by_q: BTreeMap<u64, Vec<&OrbitRep>> = BTreeMap::new();
        for o in &orbits {
            by_q.entry(o.qvalue.unsigned_abs()).or_default().push(o);
        }
        let distinct: Vec<u64> = by_q.keys().copied().collect();
        let mut levels: Vec<(u64, Vec<f64>)> = Vec::new();
        for chunk in distinct.chunks(BATCH) {
            let solved: Vec<Result<(u64, Vec<f64>)>> = chunk
                .par_iter()
                .map(|&q| {
                    let nu = geom.nu_scale() * q as f64;
                    let p = MathieuProblem::new(nu, geom.mu)?;
                    let lv = cache.levels_below(&p, energy_cut + nu * cos.abs(), tol)?;
                    Ok((q, lv))
                })
                .collect();
            let mut exhausted = true;
            for r in solved {
                let (q, lv) = r?;
                let nu = geom.nu_scale() * q as f64;
                if lv.first().is_some_and(|l0| l0 - nu * cos.abs() <= energy_cut) {
                    exhausted = false;
                }
                levels.push((q, lv));
            }
            // Lambda_0 - |nu cos| is increasing in |nu|.
            if exhausted {
                break;
            }
        }
        for (q, lv) in &levels {
            for o in &by_q[q] {
                for (l, &lam) in lv.iter().enumerate() {
                    let e = lam + o.nu * cos;
                    if e <= energy_cut {
                        lmax = lmax.max(l);
                        lines.push(SpectralLine {
                            energy: e,
                            multiplicity: 1,
                            source: LineSource::Orbit { orbit: (*o).clone(), level: l },
                        });
                    }
                }
            }
        }
    }
    lines.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.sort_key().cmp(&b.sort_key())));
    Ok(SpectrumTable { lines, energy_cut, geometry_hash: geometry_hash(geom), qmax, lmax, tol })
}

impl SpectrumTable {
    /// Number of eigenvalues (with multiplicity) not exceeding `lambda`.
    pub fn count_below(&self, lambda: f64) -> u64 {
        self.lines.iter().take_while(|l| l.energy <= lambda).map(|l| l.multiplicity).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("energy,multiplicity,source_kind,k_or_l,gamma_x,gamma_y,qvalue\n");
        for l in &self.lines {
            match &l.source {
                LineSource::Trivial { k } => {
                    let _ = writeln!(s, "{},{},trivial,{},0,0,0", fmt12(l.energy), l.multiplicity, k);
                }
                LineSource::Orbit { orbit, level } => {
                    let _ = writeln!(
                        s,
                        "{},{},orbit,{},{},{},{}",
                        fmt12(l.energy),
                        l.multiplicity,
                        level,
                        orbit.gamma[0],
                        orbit.gamma[1],
                        orbit.qvalue
                    );
                }
            }
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Inconsistency(e.to_string()))
    }
}

/// Predicted multiplicity data for one orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityPrediction {
    /// `2 r N`.
    pub m: u64,
    pub r: u32,
    pub l: i128,
    /// Value of the primitive form at `gamma`.
    pub n: i128,
    /// Orbits of `<A0, -I>` on solutions of `Q(x, y) = n`.
    pub orbit_count: u64,
    /// Divisor-sum count, when the class number is one and `gcd(n, d) = 1`.
    pub formula_count: Option<i64>,
    pub class_number: u64,
}

pub fn predicted_multiplicity(a: &GluingMap, gamma: [i64; 2]) -> Result<MultiplicityPrediction> {
    if gamma == [0, 0] {
        return Err(Error::Domain("gamma = 0 belongs to the trivial family".into()));
    }
    let qstar = manifold::q_dual(a)?;
    let (qhat, l) = qforms::primitive_part(&qstar);
    let n = qhat.eval(gamma[0] as i128, gamma[1] as i128)?;
    let prim = qforms::primitivity_index(&a.dual())?;
    let gen = qforms::automorph_generator(&qhat)?;
    let orbit_count = qforms::rep_count_bruteforce(&qhat, n, &gen.matrix)?;
    let d = qhat.discriminant();
    let class_number = qforms::class_number(d)?;
    let formula_count = if class_number == 1 && qforms::gcd(n, d) == 1 {
        Some(qforms::rep_count_formula(d as i64, n.unsigned_abs() as u64)?)
    } else {
        None
    };
    if let Some(f) = formula_count {
        if f != orbit_count as i64 {
            return Err(Error::Inconsistency(format!(
                "representation count {orbit_count} disagrees with divisor sum {f} for n = {n}"
            )));
        }
    }
    Ok(MultiplicityPrediction {
        m: 2 * prim.r as u64 * orbit_count,
        r: prim.r,
        l: l.abs(),
        n,
        orbit_count,
        formula_count,
        class_number,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeKind {
    Single,
    /// Orbit lines with equal `Q_{A*}` and level.
    Predicted,
    /// Equal `|Q_{A*}|` and level with both signs, possible only when
    /// `cos(theta) = 0`.
    SignSymmetric,
    Accidental,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineGroup {
    pub energy: f64,
    pub multiplicity: u64,
    pub members: Vec<usize>,
    pub kind: MergeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedSpectrum {
    pub groups: Vec<LineGroup>,
    /// Set when `cos(theta)` vanishes and `+-nu` lines coincide.
    pub non_generic: bool,
}

impl GroupedSpectrum {
    pub fn accidental(&self) -> impl Iterator<Item = &LineGroup> {
        self.groups.iter().filter(|g| g.kind == MergeKind::Accidental)
    }
}

fn classify(table: &SpectrumTable, members: &[usize], non_generic: bool) -> MergeKind {
    if members.len() == 1 {
        return MergeKind::Single;
    }
    let mut keys = Vec::new();
    for &i in members {
        match table.lines[i].orbit() {
            Some((o, l)) => keys.push((o.qvalue, l)),
            None => return MergeKind::Accidental,
        }
    }
    let (q0, l0) = keys[0];
    if keys.iter().all(|&k| k == (q0, l0)) {
        return MergeKind::Predicted;
    }
    let sym = keys.iter().all(|&(q, l)| q.abs() == q0.abs() && l == l0)
        && keys.iter().any(|&(q, _)| q != q0);
    if sym && non_generic {
        MergeKind::SignSymmetric
    } else {
        MergeKind::Accidental
    }
}

/// Merges neighbouring lines whose energies differ by at most
/// `grouping_tol * max(1, E)`.
pub fn group_degenerate(geom: &Geometry, table: &SpectrumTable, grouping_tol: f64) -> Result<GroupedSpectrum> {
    if !(grouping_tol > 0.0) {
        return Err(Error::Validation("grouping tolerance must be positive".into()));
    }
    let non_generic = geom.cos_theta.abs() < 1e-12;
    let mut groups = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    let flush = |cur: &mut Vec<usize>, groups: &mut Vec<LineGroup>| {
        if cur.is_empty() {
            return;
        }
        let members = std::mem::take(cur);
        groups.push(LineGroup {
            energy: table.lines[members[0]].energy,
            multiplicity: members.iter().map(|&i| table.lines[i].multiplicity).sum(),
            kind: classify(table, &members, non_generic),
            members,
        });
    };
    for (i, line) in table.lines.iter().enumerate() {
        if let Some(&last) = cur.last() {
            let e0 = table.lines[last].energy;
            if (line.energy - e0).abs() > grouping_tol * e0.abs().max(1.0) {
                flush(&mut cur, &mut groups);
            }
        }
        cur.push(i);
    }
    flush(&mut cur, &mut groups);
    Ok(GroupedSpectrum { groups, non_generic })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityCheck {
    pub energy: f64,
    pub observed: u64,
    pub predicted: u64,
    pub values: Vec<i128>,
    pub kind: MergeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub checks: Vec<MultiplicityCheck>,
    pub accidental: usize,
    pub sign_symmetric: usize,
}

impl MultiplicityReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &MultiplicityCheck> {
        self.checks.iter().filter(|c| c.observed != c.predicted)
    }
}

/// Compares every orbit group whose primitive-form value satisfies
/// `|n| <= nmax` with the sum of predicted multiplicities of its values.
pub fn check_multiplicities(
    geom: &Geometry,
    table: &SpectrumTable,
    grouped: &GroupedSpectrum,
    nmax: u64,
) -> Result<MultiplicityReport> {
    let qstar = geom.dual_form();
    let (_, l) = qforms::primitive_part(&qstar);
    let mut memo: BTreeMap<i64, u64> = BTreeMap::new();
    let mut checks = Vec::new();
    for g in &grouped.groups {
        if g.kind == MergeKind::Accidental {
            continue;
        }
        let mut reps: BTreeMap<i64, [i64; 2]> = BTreeMap::new();
        for &i in &g.members {
            if let Some((o, _)) = table.lines[i].orbit() {
                reps.entry(o.qvalue).or_insert(o.gamma);
            }
        }
        if reps.is_empty() || reps.keys().any(|q| (*q as i128 / l).unsigned_abs() > nmax as u128) {
            continue;
        }
        let mut predicted = 0;
        for (q, gamma) in &reps {
            let m = match memo.get(q) {
                Some(&m) => m,
                None => {
                    let m = predicted_multiplicity(&geom.gluing, *gamma)?.m;
                    memo.insert(*q, m);
                    m
                }
            };
            predicted += m;
        }
        checks.push(MultiplicityCheck {
            energy: g.energy,
            observed: g.multiplicity,
            predicted,
            values: reps.keys().map(|&q| q as i128 / l).collect(),
            kind: g.kind,
        });
    }
    Ok(MultiplicityReport {
        checks,
        accidental: grouped.accidental().count(),
        sign_symmetric: grouped.groups.iter().filter(|g| g.kind == MergeKind::SignSymmetric).count(),
    })
}

/// The `A*`-averaged eigenfunction `sum_n exp(2 pi i <A*^n gamma, w>) f_l(z + alpha + n)`.
#[derive(Debug, Clone)]
pub struct AveragedEigenfunction {
    star: IntMat2,
    gamma: [i64; 2],
    alpha: f64,
    level: usize,
    solution: Option<MathieuSolution>,
    support: (f64, f64),
}

impl AveragedEigenfunction {
    pub fn new(geom: &Geometry, gamma: [i64; 2], level: usize, trunc_tol: f64) -> Result<Self> {
        if !(trunc_tol > 0.0) {
            return Err(Error::Validation("truncation tolerance must be positive".into()));
        }
        let star = geom.gluing.dual();
        if gamma == [0, 0] {
            return Ok(AveragedEigenfunction {
                star,
                gamma,
                alpha: 0.0,
                level,
                solution: None,
                support: (0.0, 0.0),
            });
        }
        let (nu, alpha) = manifold::nu_alpha(geom, gamma)?;
        let p = MathieuProblem::new(nu.abs(), geom.mu)?;
        let sol = mathieu::solve(&p, level + 1, 1e-8)?;
        let f = &sol.eigenvectors[level];
        let first = f.iter().position(|v| v.abs() >= trunc_tol);
        let last = f.iter().rposition(|v| v.abs() >= trunc_tol);
        let support = match (first, last) {
            (Some(a), Some(b)) => (sol.grid.node(a), sol.grid.node(b + 2)),
            _ => (0.0, 0.0),
        };
        Ok(AveragedEigenfunction { star, gamma, alpha, level, solution: Some(sol), support })
    }

    pub fn eval(&self, w: [f64; 2], z: f64) -> Result<Complex64> {
        let Some(sol) = &self.solution else {
            return Ok(Complex64::from_polar(1.0, 2.0 * PI * self.level as f64 * z));
        };
        let lo = (self.support.0 - z - self.alpha).ceil() as i64;
        let hi = (self.support.1 - z - self.alpha).floor() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for n in lo..=hi {
            let g = self.star.zpow(n)?.apply([self.gamma[0] as i128, self.gamma[1] as i128])?;
            let phase = g[0] as f64 * w[0] + g[1] as f64 * w[1];
            let amp = sol.eigenfunction(self.level, z + self.alpha + n as f64);
            acc += Complex64::from_polar(amp, 2.0 * PI * phase.rem_euclid(1.0));
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub x: f64,
    pub y: (f64, f64, usize),
    pub z: (f64, f64, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub re: f64,
    pub im: f64,
}

fn axis(r: (f64, f64, usize)) -> Vec<f64> {
    if r.2 <= 1 {
        return vec![r.0];
    }
    (0..r.2).map(|i| r.0 + (r.1 - r.0) * i as f64 / (r.2 - 1) as f64).collect()
}

/// Samples the averaged eigenfunction on the slice `x = spec.x`.
pub fn eigenfunction_field(
    geom: &Geometry,
    gamma: [i64; 2],
    level: usize,
    spec: &FieldSpec,
    trunc_tol: f64,
) -> Result<Vec<FieldSample>> {
    let phi = AveragedEigenfunction::new(geom, gamma, level, trunc_tol)?;
    let ys = axis(spec.y);
    let zs = axis(spec.z);
    let mut out = Vec::with_capacity(ys.len() * zs.len());
    for &z in &zs {
        for &y in &ys {
            let v = phi.eval([spec.x, y], z)?;
            out.push(FieldSample { x: spec.x, y, z, re: v.re, im: v.im });
        }
    }
    Ok(out)
}

pub fn field_csv(samples: &[FieldSample]) -> String {
    let mut s = String::from("x,y,z,re,im,abs\n");
    for p in samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt12(p.x),
            fmt12(p.y),
            fmt12(p.z),
            fmt12(p.re),
            fmt12(p.im),
            fmt12(p.re.hypot(p.im))
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{geometry, FibreMetric};

    #[test]
    fn below_first_trivial_line() {
        let g = geometry(GluingMap::cat_map(), FibreMetric::euclidean()).unwrap();
        let t = assemble(&g, 30.0, 1e-8).unwrap();
        assert_eq!(t.lines.len(), 1);
        assert_eq!((t.lines[0].energy, t.lines[0].multiplicity), (0.0, 1));
    }

    #[test]
    fn multiplicity_examples() {
        let cat = GluingMap::cat_map();
        let g = geometry(cat, FibreMetric::euclidean()).unwrap();
        let eleven = manifold::orbit_enumerate(&g, 11)
            .unwrap()
            .into_iter()
            .find(|o| o.qvalue.abs() == 11)
            .unwrap();
        let p = predicted_multiplicity(&cat, eleven.gamma).unwrap();
        assert_eq!((p.orbit_count, p.m, p.formula_count), (2, 4, Some(2)));
        assert_eq!(predicted_multiplicity(&cat, [1, 0]).unwrap().m, 2);
        let sq = GluingMap::new(5, 3, 3, 2).unwrap();
        let p2 = predicted_multiplicity(&sq, [1, 0]).unwrap();
        assert_eq!((p2.r, p2.l, p2.m), (2, 3, 4));
    }
}
