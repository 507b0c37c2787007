//! Geodesic flow on `M_A`: the Hamiltonian, its integrals, caustics, the
//! flower map of the dual lattice and the monodromy read off from it.

use crate::error::{Error, Result};
use crate::manifold::{self, Geometry};
use crate::output::fmt12;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub u: f64,
    pub v: f64,
    pub z: f64,
    pub pu: f64,
    pub pv: f64,
    pub pz: f64,
}

impl PhasePoint {
    /// Deck transformation generated by `A*`.
    pub fn deck(&self, lambda: f64) -> PhasePoint {
        PhasePoint {
            u: lambda * self.u,
            v: self.v / lambda,
            z: self.z + 1.0,
            pu: self.pu / lambda,
            pv: self.pv * lambda,
            pz: self.pz,
        }
    }

    fn axpy(&self, h: f64, d: &PhasePoint) -> PhasePoint {
        PhasePoint {
            u: self.u + h * d.u,
            v: self.v + h * d.v,
            z: self.z + h * d.z,
            pu: self.pu + h * d.pu,
            pv: self.pv + h * d.pv,
            pz: self.pz + h * d.pz,
        }
    }
}

pub fn hamiltonian(pt: &PhasePoint, geom: &Geometry) -> f64 {
    let ez = (2.0 * pt.z * geom.mu).exp();
    0.5 * (geom.e_coef * ez * pt.pu * pt.pu
        + 2.0 * geom.f_coef * pt.pu * pt.pv
        + geom.g_coef / ez * pt.pv * pt.pv)
        + 0.5 * pt.pz * pt.pz
}

fn vector_field(pt: &PhasePoint, geom: &Geometry) -> PhasePoint {
    let ez = (2.0 * pt.z * geom.mu).exp();
    let a = geom.e_coef * ez * pt.pu;
    let b = geom.g_coef / ez * pt.pv;
    PhasePoint {
        u: a + geom.f_coef * pt.pv,
        v: geom.f_coef * pt.pu + b,
        z: pt.pz,
        pu: 0.0,
        pv: 0.0,
        pz: -geom.mu * (a * pt.pu - b * pt.pv),
    }
}

/// `R(Q) = sqrt|Q| exp(-1/Q^2)`, extended by zero at `Q = 0`.
pub fn radius_of(q: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else {
        q.abs().sqrt() * (-1.0 / (q * q)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub q: f64,
    /// Undefined when `Q = 0`.
    pub alpha: Option<f64>,
    pub f1: f64,
    pub f2: f64,
}

/// Offset of the potential well of a fibre momentum,
/// `ln(sqrt(E/G) |p_u / p_v|) / (2 mu)`.
pub fn alpha_of(pu: f64, pv: f64, geom: &Geometry) -> f64 {
    ((geom.e_coef / geom.g_coef).sqrt() * (pu / pv).abs()).ln() / (2.0 * geom.mu)
}

pub fn invariants(pt: &PhasePoint, geom: &Geometry) -> Invariants {
    let q = pt.pu * pt.pv;
    if q == 0.0 {
        return Invariants { q, alpha: None, f1: 0.0, f2: 0.0 };
    }
    let alpha = alpha_of(pt.pu, pt.pv, geom);
    let r = radius_of(q);
    let (s, c) = (2.0 * PI * alpha).sin_cos();
    Invariants { q, alpha: Some(alpha), f1: r * c, f2: r * s }
}

/// Critical values of `Q` on the unit energy level and the radii of the two
/// bifurcation circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bifurcation {
    pub q_plus: f64,
    pub q_minus: f64,
    pub r_plus: f64,
    pub r_minus: f64,
}

pub fn bifurcation_radii(geom: &Geometry) -> Bifurcation {
    let s = (geom.e_coef * geom.g_coef).sqrt();
    let q_plus = 1.0 / (geom.f_coef + s);
    let q_minus = 1.0 / (geom.f_coef - s);
    Bifurcation { q_plus, q_minus, r_plus: radius_of(q_plus), r_minus: radius_of(q_minus) }
}

/// Points of the four families of relative equilibria on `H = 1` with well
/// offset `alpha`: two with `Q = Q+*`, then two with `Q = Q-*`.
pub fn critical_families(geom: &Geometry, alpha: f64) -> [PhasePoint; 4] {
    let ratio = geom.f_coef / (geom.e_coef * geom.g_coef).sqrt();
    let grow = (2.0 * alpha * geom.mu).exp();
    let point = |su: f64, sv: f64, k: f64| PhasePoint {
        z: -alpha,
        pu: su * (grow / (geom.e_coef * k)).sqrt(),
        pv: sv * (1.0 / (grow * geom.g_coef * k)).sqrt(),
        ..PhasePoint::default()
    };
    [
        point(1.0, 1.0, 1.0 + ratio),
        point(-1.0, -1.0, 1.0 + ratio),
        point(1.0, -1.0, 1.0 - ratio),
        point(-1.0, 1.0, 1.0 - ratio),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftStatus {
    Ok,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub energy_drift: f64,
    pub q_drift: f64,
    pub status: DriftStatus,
}

const DRIFT_WARNING: f64 = 1e-6;

/// Classical fourth-order Runge-Kutta with fixed step `h` up to time `t_max`.
pub fn integrate(pt0: &PhasePoint, geom: &Geometry, t_max: f64, h: f64) -> Result<Trajectory> {
    if !(h > 0.0) || !(t_max >= 0.0) {
        return Err(Error::Validation(format!("invalid step {h} or duration {t_max}")));
    }
    let steps = (t_max / h).round() as usize;
    let h0 = hamiltonian(pt0, geom);
    let q0 = pt0.pu * pt0.pv;
    let mut pt = *pt0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    times.push(0.0);
    points.push(pt);
    let (mut de, mut dq) = (0.0f64, 0.0f64);
    for i in 1..=steps {
        let k1 = vector_field(&pt, geom);
        let k2 = vector_field(&pt.axpy(0.5 * h, &k1), geom);
        let k3 = vector_field(&pt.axpy(0.5 * h, &k2), geom);
        let k4 = vector_field(&pt.axpy(h, &k3), geom);
        pt = PhasePoint {
            u: pt.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
            v: pt.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            z: pt.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
            pu: pt.pu,
            pv: pt.pv,
            pz: pt.pz + h / 6.0 * (k1.pz + 2.0 * k2.pz + 2.0 * k3.pz + k4.pz),
        };
        if !pt.z.is_finite() || !pt.pz.is_finite() {
            return Err(Error::Resource(format!("trajectory diverged at step {i}")));
        }
        de = de.max((hamiltonian(&pt, geom) - h0).abs() / h0.abs().max(f64::MIN_POSITIVE));
        dq = dq.max((pt.pu * pt.pv - q0).abs() / q0.abs().max(f64::MIN_POSITIVE));
        times.push(i as f64 * h);
        points.push(pt);
    }
    let status = if de > DRIFT_WARNING || dq > DRIFT_WARNING { DriftStatus::Warning } else { DriftStatus::Ok };
    Ok(Trajectory { times, points, energy_drift: de, q_drift: dq, status })
}

impl Trajectory {
    /// Extreme heights reached, refined by a parabola through the three
    /// samples around each discrete extremum.
    pub fn z_extrema(&self) -> (f64, f64) {
        let z: Vec<f64> = self.points.iter().map(|p| p.z).collect();
        let refine = |i: usize| {
            if i == 0 || i + 1 >= z.len() {
                return z[i];
            }
            let curv = z[i + 1] - 2.0 * z[i] + z[i - 1];
            if curv == 0.0 {
                z[i]
            } else {
                z[i] - (z[i + 1] - z[i - 1]).powi(2) / (8.0 * curv)
            }
        };
        let imin = (0..z.len()).min_by(|&a, &b| z[a].total_cmp(&z[b])).unwrap_or(0);
        let imax = (0..z.len()).max_by(|&a, &b| z[a].total_cmp(&z[b])).unwrap_or(0);
        (refine(imin), refine(imax))
    }

    pub fn to_csv(&self, geom: &Geometry, stride: usize) -> String {
        let mut s = String::from("t,u,v,z,p_u,p_v,p_z,H,Q\n");
        for (t, p) in self.times.iter().zip(&self.points).step_by(stride.max(1)) {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                fmt12(*t),
                fmt12(p.u),
                fmt12(p.v),
                fmt12(p.z),
                fmt12(p.pu),
                fmt12(p.pv),
                fmt12(p.pz),
                fmt12(hamiltonian(p, geom)),
                fmt12(p.pu * p.pv)
            );
        }
        s
    }
}

/// Caustic heights `z-+ = -+acosh((h - F Q)/(sqrt(EG)|Q|))/(2 mu) - alpha`.
pub fn turning_points(pu: f64, pv: f64, energy: f64, geom: &Geometry) -> Result<(f64, f64)> {
    let q = pu * pv;
    if q == 0.0 {
        return Err(Error::Domain("turning points need p_u p_v != 0".into()));
    }
    let arg = (energy - geom.f_coef * q) / ((geom.e_coef * geom.g_coef).sqrt() * q.abs());
    if !(arg >= 1.0) {
        return Err(Error::Domain(format!("energy {energy} is below the well minimum")));
    }
    let w = arg.acosh() / (2.0 * geom.mu);
    let a = alpha_of(pu, pv, geom);
    Ok((-w - a, w - a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowerImage {
    pub f1: f64,
    pub f2: f64,
    /// `p_u = 0`, mapped to the origin.
    pub singular: bool,
}

/// `sqrt|p_u p_v| (cos 2 pi beta, sin 2 pi beta)` with `beta = ln|p_u| / mu`.
pub fn flower_map(pu: f64, pv: f64, mu: f64) -> FlowerImage {
    if pu == 0.0 {
        return FlowerImage { f1: 0.0, f2: 0.0, singular: true };
    }
    let r = (pu * pv).abs().sqrt();
    let beta = pu.abs().ln() / mu;
    let (s, c) = (2.0 * PI * beta).sin_cos();
    FlowerImage { f1: r * c, f2: r * s, singular: false }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowerPoint {
    pub f1: f64,
    pub f2: f64,
    pub gamma: [i64; 2],
    pub qvalue: i64,
}

/// Images of all dual-lattice orbits in the quadrant `p_u > 0, p_v > 0` with
/// `Q_{A*} <= qmax`.
pub fn flower(geom: &Geometry, qmax: u64) -> Result<Vec<FlowerPoint>> {
    Ok(manifold::orbit_enumerate(geom, qmax)?
        .into_iter()
        .filter(|o| o.p > 0.0 && o.q > 0.0)
        .map(|o| {
            let im = flower_map(o.p, o.q, geom.mu);
            FlowerPoint { f1: im.f1, f2: im.f2, gamma: o.gamma, qvalue: o.qvalue }
        })
        .collect())
}

pub fn flower_csv(points: &[FlowerPoint]) -> String {
    let mut s = String::from("gamma_x,gamma_y,F1,F2,Q\n");
    for p in points {
        let _ = writeln!(s, "{},{},{},{},{}", p.gamma[0], p.gamma[1], fmt12(p.f1), fmt12(p.f2), p.qvalue);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub counterclockwise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transport {
    /// For a counterclockwise circuit around the origin this is the gluing
    /// matrix `A`: the transported basis, written as columns in the starting
    /// `gamma`-coordinates, equals `(M^T)^{-1}`.
    pub matrix: [[i64; 2]; 2],
    pub steps: usize,
    pub start: [i64; 2],
}

struct PointIndex<'a> {
    pts: &'a [FlowerPoint],
    cell: f64,
    bins: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> PointIndex<'a> {
    fn new(pts: &'a [FlowerPoint], cell: f64) -> Self {
        let mut bins: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in pts.iter().enumerate() {
            bins.entry(((p.f1 / cell).floor() as i64, (p.f2 / cell).floor() as i64)).or_default().push(i);
        }
        PointIndex { pts, cell, bins }
    }

    /// Nearest and second-nearest points to `x` with their distances.
    fn nearest_two(&self, x: [f64; 2]) -> Option<((usize, f64), (usize, f64))> {
        let (cx, cy) = ((x[0] / self.cell).floor() as i64, (x[1] / self.cell).floor() as i64);
        let mut best: Vec<(usize, f64)> = Vec::new();
        for ring in 0..8i64 {
            for i in -ring..=ring {
                for j in -ring..=ring {
                    if i.abs() != ring && j.abs() != ring {
                        continue;
                    }
                    if let Some(v) = self.bins.get(&(cx + i, cy + j)) {
                        for &k in v {
                            let p = &self.pts[k];
                            best.push((k, (p.f1 - x[0]).hypot(p.f2 - x[1])));
                        }
                    }
                }
            }
            best.sort_by(|a, b| a.1.total_cmp(&b.1));
            best.truncate(2);
            if best.len() == 2 && best[1].1 <= ring as f64 * self.cell {
                return Some((best[0], best[1]));
            }
        }
        (best.len() == 2).then(|| (best[0], best[1]))
    }

    fn pos(&self, i: usize) -> [f64; 2] {
        [self.pts[i].f1, self.pts[i].f2]
    }
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Carries a lattice cell once around `spec` by nearest-neighbour affine
/// continuation and returns the resulting change of basis.
pub fn monodromy_transport(geom: &Geometry, flower: &[FlowerPoint], spec: &LoopSpec) -> Result<Transport> {
    if flower.len() < 16 {
        return Err(Error::Precondition("flower has too few points".into()));
    }
    let labels: HashMap<[i64; 2], usize> = flower.iter().enumerate().map(|(i, p)| (p.gamma, i)).collect();
    let mean_spacing = (PI * spec.radius.max(1.0).powi(2) * 2.0 / flower.len() as f64).sqrt().max(0.5);
    let index = PointIndex::new(flower, mean_spacing.max(1.0));
    let sparse = || Error::Precondition("flower too sparse for continuation; raise qmax".into());
    let locate = |x: [f64; 2], scale: f64| -> Result<usize> {
        let ((i, d1), (_, d2)) = index.nearest_two(x).ok_or_else(sparse)?;
        if d2 < 1.1 * d1 {
            return Err(Error::Precondition(format!(
                "ambiguous continuation near ({:.3}, {:.3}); use a denser flower",
                x[0], x[1]
            )));
        }
        if d1 > 0.45 * scale {
            return Err(sparse());
        }
        Ok(i)
    };
    let label_of = |g: [i64; 2]| -> Result<usize> {
        labels.get(&geom.canonical(g)?).copied().ok_or_else(sparse)
    };
    let c = spec.center;
    let start_target = [c[0] + spec.radius, c[1]];
    let ((s0, _), _) = index.nearest_two(start_target).ok_or_else(sparse)?;
    let gs = balanced(geom, flower[s0].gamma)?;
    // the cell basis is the transported standard basis times `basis`
    let mut basis = [[1i64, 0], [0, 1]];
    let o = index.pos(s0);
    let mut b1 = sub(index.pos(label_of([gs[0] + 1, gs[1]])?), o);
    let mut b2 = sub(index.pos(label_of([gs[0], gs[1] + 1])?), o);
    reduce(&mut b1, &mut b2, &mut basis);
    let mut cell = [
        s0,
        label_of([gs[0] + basis[0][0], gs[1] + basis[1][0]])?,
        label_of([gs[0] + basis[0][1], gs[1] + basis[1][1]])?,
    ];
    let dir = if spec.counterclockwise { 1.0 } else { -1.0 };
    let angle = |p: [f64; 2]| (p[1] - c[1]).atan2(p[0] - c[0]);
    let mut turned = 0.0;
    let mut steps = 0;
    while dir * turned < 2.0 * PI {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::Resource("transport did not close".into()));
        }
        let o = index.pos(cell[0]);
        let b1 = sub(index.pos(cell[1]), o);
        let b2 = sub(index.pos(cell[2]), o);
        let scale = norm(b1).min(norm(b2)).min(norm(sub(b1, b2))).min(norm(add(b1, b2)));
        let a0 = angle(o);
        let mut best: Option<(f64, [f64; 2])> = None;
        for s in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)] {
            let p = [
                o[0] + s.0 as f64 * b1[0] + s.1 as f64 * b2[0],
                o[1] + s.0 as f64 * b1[1] + s.1 as f64 * b2[1],
            ];
            let adv = dir * wrap(angle(p) - a0);
            if adv <= 0.0 {
                continue;
            }
            let dev = (norm(sub(p, c)) - spec.radius).abs();
            let score = adv * spec.radius - 2.0 * dev;
            if best.map_or(true, |(b, _)| score > b) {
                best = Some((score, p));
            }
        }
        let (_, target) = best.ok_or_else(sparse)?;
        let n0 = locate(target, scale)?;
        let p0 = index.pos(n0);
        let mut v1 = sub(index.pos(locate(add(p0, b1), scale)?), p0);
        let mut v2 = sub(index.pos(locate(add(p0, b2), scale)?), p0);
        let mut step = [[1i64, 0], [0, 1]];
        reduce(&mut v1, &mut v2, &mut step);
        basis = mat_mul(basis, step);
        let n1 = locate(add(p0, v1), scale)?;
        let n2 = locate(add(p0, v2), scale)?;
        turned += wrap(angle(p0) - a0);
        cell = [n0, n1, n2];
    }
    // express the final cell in the starting chart, using the smallest
    // window around the start that contains all three labels
    let mut offsets: HashMap<usize, Vec<[i64; 2]>> = HashMap::new();
    for reach in 1..=12i64 {
        offsets.clear();
        for i in -reach..=reach {
            for j in -reach..=reach {
                let g = [gs[0] + i, gs[1] + j];
                if g == [0, 0] {
                    continue;
                }
                if let Some(&k) = labels.get(&geom.canonical(g)?) {
                    offsets.entry(k).or_default().push([i, j]);
                }
            }
        }
        if cell.iter().all(|k| offsets.contains_key(k)) {
            break;
        }
    }
    let offset = |k: usize| -> Result<[i64; 2]> {
        match offsets.get(&k).map(|v| v.as_slice()) {
            Some([w]) => Ok(*w),
            Some(_) => Err(Error::Inconsistency("final cell label is not unique near the start".into())),
            None => Err(Error::Inconsistency("final cell is not near the starting cell".into())),
        }
    };
    let w0 = offset(cell[0])?;
    let w1 = offset(cell[1])?;
    let w2 = offset(cell[2])?;
    let cell_basis = [[w1[0] - w0[0], w2[0] - w0[0]], [w1[1] - w0[1], w2[1] - w0[1]]];
    // transported standard basis W = cell_basis * basis^{-1}
    let w = mat_mul(cell_basis, unimodular_inverse(basis)?);
    let inv = unimodular_inverse(w)?;
    Ok(Transport { matrix: [[inv[0][0], inv[1][0]], [inv[0][1], inv[1][1]]], steps, start: gs })
}

/// Orbit representative with `|p_u| / |p_v|` closest to one, where the flower
/// map is closest to a rigid motion of the lattice.
fn balanced(geom: &Geometry, g: [i64; 2]) -> Result<[i64; 2]> {
    let star = geom.gluing.dual();
    let skew = |g: [i64; 2]| {
        let (p, q) = geom.eigencoords([g[0] as f64, g[1] as f64]);
        (p.abs() / q.abs()).ln().abs()
    };
    let mut best = g;
    for m in [star, star.inverse_unimodular()?] {
        let mut cur = g;
        loop {
            let next = m.apply([cur[0] as i128, cur[1] as i128])?;
            let next = [
                i64::try_from(next[0]).map_err(|_| Error::Overflow("balanced representative".into()))?,
                i64::try_from(next[1]).map_err(|_| Error::Overflow("balanced representative".into()))?,
            ];
            if skew(next) >= skew(cur) {
                break;
            }
            cur = next;
        }
        if skew(cur) < skew(best) {
            best = cur;
        }
    }
    Ok(best)
}

/// Lagrange-Gauss reduction of `(b1, b2)`, recording the column operations
/// in `m`.
fn reduce(b1: &mut [f64; 2], b2: &mut [f64; 2], m: &mut [[i64; 2]; 2]) {
    for _ in 0..64 {
        if norm(*b1) > norm(*b2) {
            std::mem::swap(b1, b2);
            for row in m.iter_mut() {
                row.swap(0, 1);
            }
        }
        let k = ((b1[0] * b2[0] + b1[1] * b2[1]) / (b1[0] * b1[0] + b1[1] * b1[1])).round();
        if k == 0.0 || !k.is_finite() {
            break;
        }
        *b2 = [b2[0] - k * b1[0], b2[1] - k * b1[1]];
        let k = k as i64;
        for row in m.iter_mut() {
            row[1] -= k * row[0];
        }
    }
}

fn mat_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn unimodular_inverse(a: [[i64; 2]; 2]) -> Result<[[i64; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() != 1 {
        return Err(Error::Inconsistency(format!("transported basis has determinant {det}")));
    }
    Ok([[a[1][1] * det, -a[0][1] * det], [-a[1][0] * det, a[0][0] * det]])
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}
