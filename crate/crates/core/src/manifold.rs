//! Geometry of the torus bundle `M_A`: eigenbases of the gluing map, the dual
//! metric coefficients `E, F, G`, the coupling constant and the enumeration of
//! dual-lattice orbits under `A* = A^T`.

use crate::error::{Error, Result};
use crate::intmat::IntMat2;
use crate::qforms::{self, QuadraticForm};
use crate::surd;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::PI;

/// Hyperbolic gluing matrix with determinant one and trace above two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 4]", into = "[i64; 4]")]
pub struct GluingMap(IntMat2);

impl GluingMap {
    pub fn new(a11: i64, a12: i64, a21: i64, a22: i64) -> Result<Self> {
        let m = IntMat2::new(a11 as i128, a12 as i128, a21 as i128, a22 as i128);
        if m.det() != 1 {
            return Err(Error::Validation(format!("gluing map {m} must have determinant 1")));
        }
        if m.trace() <= 2 {
            return Err(Error::Validation(format!("gluing map {m} must have trace > 2")));
        }
        Ok(GluingMap(m))
    }

    pub fn cat_map() -> Self {
        GluingMap(IntMat2::new(2, 1, 1, 1))
    }

    pub fn matrix(&self) -> &IntMat2 {
        &self.0
    }

    pub fn dual(&self) -> IntMat2 {
        self.0.transpose()
    }

    pub fn trace(&self) -> i64 {
        self.0.trace() as i64
    }

    pub fn entries(&self) -> [i64; 4] {
        let m = self.0.m;
        [m[0][0] as i64, m[0][1] as i64, m[1][0] as i64, m[1][1] as i64]
    }
}

impl TryFrom<[i64; 4]> for GluingMap {
    type Error = Error;
    fn try_from(e: [i64; 4]) -> Result<Self> {
        GluingMap::new(e[0], e[1], e[2], e[3])
    }
}

impl From<GluingMap> for [i64; 4] {
    fn from(g: GluingMap) -> Self {
        g.entries()
    }
}

/// Flat metric `alpha dx^2 + 2 beta dx dy + gamma dy^2` on the fibre at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FibreMetric {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl FibreMetric {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let ok = [alpha, beta, gamma].iter().all(|v| v.is_finite())
            && alpha > 0.0
            && gamma > 0.0
            && alpha * gamma - beta * beta > 0.0;
        if !ok {
            return Err(Error::Validation(format!(
                "metric ({alpha}, {beta}, {gamma}) is not positive definite"
            )));
        }
        Ok(FibreMetric { alpha, beta, gamma })
    }

    pub fn euclidean() -> Self {
        FibreMetric { alpha: 1.0, beta: 0.0, gamma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub gluing: GluingMap,
    pub metric: FibreMetric,
    pub lambda: f64,
    pub mu: f64,
    pub disc: i64,
    pub e_u: [f64; 2],
    pub e_v: [f64; 2],
    pub e_u_dual: [f64; 2],
    pub e_v_dual: [f64; 2],
    pub e_coef: f64,
    pub f_coef: f64,
    pub g_coef: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub area: f64,
    pub coupling: f64,
}

pub fn geometry(a: GluingMap, metric: FibreMetric) -> Result<Geometry> {
    let metric = FibreMetric::new(metric.alpha, metric.beta, metric.gamma)?;
    let m = a.matrix().m;
    let t = a.trace() as f64;
    let disc = a.trace() * a.trace() - 4;
    let sd = (disc as f64).sqrt();
    let lambda = (t + sd) / 2.0;
    let (a11, a12) = (m[0][0] as f64, m[0][1] as f64);
    // raw eigenvectors (a12, lambda^{+-1} - a11) have determinant -a12 sqrt(D)
    let scale = 1.0 / (a12.abs() * sd).sqrt();
    let sigma = a12.signum();
    let e_u = [sigma * scale * a12, sigma * scale * (lambda - a11)];
    let e_v = [-scale * a12, -scale * (1.0 / lambda - a11)];
    let e_u_dual = [e_v[1], -e_v[0]];
    let e_v_dual = [-e_u[1], e_u[0]];
    let det_g = metric.alpha * metric.gamma - metric.beta * metric.beta;
    let inv = [
        [metric.gamma / det_g, -metric.beta / det_g],
        [-metric.beta / det_g, metric.alpha / det_g],
    ];
    let gi = |x: [f64; 2], y: [f64; 2]| {
        x[0] * (inv[0][0] * y[0] + inv[0][1] * y[1]) + x[1] * (inv[1][0] * y[0] + inv[1][1] * y[1])
    };
    let e_coef = gi(e_u_dual, e_u_dual);
    let f_coef = gi(e_u_dual, e_v_dual);
    let g_coef = gi(e_v_dual, e_v_dual);
    let eg = e_coef * g_coef;
    let cos_theta = f_coef / eg.sqrt();
    let sin_theta = ((eg - f_coef * f_coef) / eg).sqrt();
    let area = det_g.sqrt();
    let coupling = 1.0 / (sd * area * sin_theta);
    Ok(Geometry {
        gluing: a,
        metric,
        lambda,
        mu: lambda.ln(),
        disc,
        e_u,
        e_v,
        e_u_dual,
        e_v_dual,
        e_coef,
        f_coef,
        g_coef,
        cos_theta,
        sin_theta,
        area,
        coupling,
    })
}

/// The form preserved by `A* = A^T`; its values on the dual lattice set the
/// fibre frequencies.
pub fn q_dual(a: &GluingMap) -> Result<QuadraticForm> {
    qforms::form_from_matrix(&a.dual())
}

/// Scalar curvature `-2 (sin(theta) ln(lambda))^2`.
pub fn curvature(geom: &Geometry) -> f64 {
    -2.0 * (geom.sin_theta * geom.mu).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRep {
    pub gamma: [i64; 2],
    pub qvalue: i64,
    pub alpha: f64,
    pub nu: f64,
    pub p: f64,
    pub q: f64,
}

impl Geometry {
    /// Eigencoordinates `(<gamma, e_u>, <gamma, e_v>)`.
    pub fn eigencoords(&self, g: [f64; 2]) -> (f64, f64) {
        (
            g[0] * self.e_u[0] + g[1] * self.e_u[1],
            g[0] * self.e_v[0] + g[1] * self.e_v[1],
        )
    }

    pub fn dual_form(&self) -> QuadraticForm {
        q_dual(&self.gluing).expect("validated gluing map")
    }

    /// `8 pi^2 c`, the factor turning `Q_{A*}` values into frequencies.
    pub fn nu_scale(&self) -> f64 {
        8.0 * PI * PI * self.coupling
    }

    /// Exact test of `1 <= |<gamma, e_u>| < lambda`.
    pub fn in_strip(&self, g: [i128; 2]) -> Result<bool> {
        let m = self.gluing.matrix().m;
        let (a11, a12, a22) = (m[0][0], m[0][1], m[1][1]);
        let d = self.disc as i128;
        let t = a11 + a22;
        let ab = a12.abs();
        let ov = || Error::Overflow("strip test".into());
        let p = (2 * a12)
            .checked_mul(g[0])
            .zip((a22 - a11).checked_mul(g[1]))
            .and_then(|(x, y)| x.checked_add(y))
            .ok_or_else(ov)?;
        let s = g[1];
        let p2 = p.checked_mul(p).ok_or_else(ov)?;
        let s2d = s.checked_mul(s).and_then(|v| v.checked_mul(d)).ok_or_else(ov)?;
        let ps2 = p.checked_mul(s).and_then(|v| v.checked_mul(2)).ok_or_else(ov)?;
        let r1 = p2.checked_add(s2d).ok_or_else(ov)?;
        let lower = surd::sign(r1, ps2 - 4 * ab, d)?;
        if lower == Ordering::Less {
            return Ok(false);
        }
        let r2 = (2 * t * d * ab).checked_sub(r1).ok_or_else(ov)?;
        let upper = surd::sign(r2, (t * t + d) * ab - ps2, d)?;
        Ok(upper == Ordering::Greater)
    }

    /// The strip representative of the `A*`-orbit of a nonzero `gamma`.
    pub fn canonical(&self, g: [i64; 2]) -> Result<[i64; 2]> {
        if g == [0, 0] {
            return Err(Error::Domain("the zero vector has no orbit representative".into()));
        }
        let star = self.gluing.dual();
        let (p, _) = self.eigencoords([g[0] as f64, g[1] as f64]);
        let k = (p.abs().ln() / self.mu).floor() as i64;
        let mut v = star.zpow(-k)?.apply([g[0] as i128, g[1] as i128])?;
        let inv = star.inverse_unimodular()?;
        for _ in 0..8 {
            if self.in_strip(v)? {
                let to64 = |x: i128| {
                    i64::try_from(x).map_err(|_| Error::Overflow("orbit representative".into()))
                };
                return Ok([to64(v[0])?, to64(v[1])?]);
            }
            let (pv, _) = self.eigencoords([v[0] as f64, v[1] as f64]);
            v = if pv.abs() < self.lambda.sqrt() { star.apply(v)? } else { inv.apply(v)? };
        }
        Err(Error::Inconsistency(format!("could not reduce {g:?} into the strip")))
    }

    pub fn orbit_rep(&self, g: [i64; 2]) -> Result<OrbitRep> {
        let qv = self.dual_form().eval(g[0] as i128, g[1] as i128)?;
        let (nu, alpha) = nu_alpha(self, g)?;
        let (p, q) = self.eigencoords([g[0] as f64, g[1] as f64]);
        Ok(OrbitRep { gamma: g, qvalue: qv as i64, alpha, nu, p, q })
    }
}

/// Frequency `nu = 8 pi^2 c Q_{A*}(gamma)` and offset
/// `alpha = ln(sqrt(E/G) |p/q|) / (2 mu)` of a nonzero dual-lattice vector.
pub fn nu_alpha(geom: &Geometry, g: [i64; 2]) -> Result<(f64, f64)> {
    if g == [0, 0] {
        return Err(Error::Domain("nu and alpha are undefined at gamma = 0".into()));
    }
    let qv = geom.dual_form().eval(g[0] as i128, g[1] as i128)?;
    let (p, q) = geom.eigencoords([g[0] as f64, g[1] as f64]);
    let nu = geom.nu_scale() * qv as f64;
    let alpha = ((geom.e_coef / geom.g_coef).sqrt() * (p / q).abs()).ln() / (2.0 * geom.mu);
    Ok((nu, alpha))
}

const MAX_COLUMNS: i64 = 50_000_000;

/// One representative per `A*`-orbit of nonzero dual vectors with
/// `|Q_{A*}| <= qmax`, taken in the strip `1 <= |p| < lambda`, sorted by
/// `|Q|` and then by `gamma`.
pub fn orbit_enumerate(geom: &Geometry, qmax: u64) -> Result<Vec<OrbitRep>> {
    if qmax == 0 {
        return Err(Error::Validation("qmax must be at least 1".into()));
    }
    let form = geom.dual_form();
    let sd = (geom.disc as f64).sqrt();
    let qbound = qmax as f64 / sd;
    let xmax = (geom.lambda * geom.e_u_dual[0].abs() + qbound * geom.e_v_dual[0].abs()).ceil()
        as i64
        + 1;
    if xmax > MAX_COLUMNS {
        return Err(Error::Resource(format!("qmax = {qmax} needs |gamma_x| <= {xmax}")));
    }
    let (eux, euy) = (geom.e_u[0], geom.e_u[1]);
    let mut out = Vec::new();
    for x in -xmax..=xmax {
        for (lo, hi) in [(1.0, geom.lambda), (-geom.lambda, -1.0)] {
            let y1 = (lo - x as f64 * eux) / euy;
            let y2 = (hi - x as f64 * eux) / euy;
            let (ya, yb) = if y1 < y2 { (y1, y2) } else { (y2, y1) };
            for y in (ya.floor() as i64 - 1)..=(yb.ceil() as i64 + 1) {
                let g = [x as i128, y as i128];
                if g == [0, 0] {
                    continue;
                }
                let (p, _) = geom.eigencoords([x as f64, y as f64]);
                if p.signum() != lo.signum() || !geom.in_strip(g)? {
                    continue;
                }
                let qv = form.eval(g[0], g[1])?;
                if qv.unsigned_abs() <= qmax as u128 {
                    out.push(geom.orbit_rep([x, y])?);
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.qvalue
            .unsigned_abs()
            .cmp(&b.qvalue.unsigned_abs())
            .then(a.gamma.cmp(&b.gamma))
    });
    out.dedup_by(|a, b| a.gamma == b.gamma);
    Ok(out)
}
