//! The modified Mathieu problem `-f'' + |nu| cosh(2 mu z) f = Lambda f` on the
//! line.
//!
//! Levels come from a symmetric central-difference discretization with
//! Dirichlet ends, solved by Sturm-sequence bisection. The grid spacing is
//! halved repeatedly and the raw levels are Richardson-extrapolated in `h^2`;
//! each level is accepted once two successive extrapolated values agree to
//! the requested relative tolerance.

use crate::error::{Error, Result};
use crate::semiclassics::{self, ActionQuery};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MathieuProblem {
    pub nu_abs: f64,
    pub mu: f64,
}

impl MathieuProblem {
    pub fn new(nu_abs: f64, mu: f64) -> Result<Self> {
        let p = MathieuProblem { nu_abs, mu };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.nu_abs.is_finite() && self.mu.is_finite() && self.nu_abs > 0.0 && self.mu > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid Mathieu problem {self:?}")))
        }
    }

    pub fn potential(&self, z: f64) -> f64 {
        self.nu_abs * (2.0 * self.mu * z).cosh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Interior nodes `z_i = -Z + i h`, `i = 1..=points`, with `h = 2Z/(points+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub points: usize,
    pub spacing: f64,
}

impl Grid {
    pub fn new(half_width: f64, points: usize) -> Self {
        Grid { half_width, points, spacing: 2.0 * half_width / (points + 1) as f64 }
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    fn refined(&self) -> Grid {
        Grid::new(self.half_width, 2 * self.points + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MathieuLevels {
    pub problem: MathieuProblem,
    pub levels: Vec<f64>,
    pub grid: Grid,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MathieuSolution {
    pub problem: MathieuProblem,
    pub levels: Vec<f64>,
    pub parities: Vec<Parity>,
    pub grid: Grid,
    /// Interior samples per level, normalized so that `h * sum f^2 = 1`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub tol: f64,
}

const TAIL_EXPONENT: f64 = 22.0;
const MARGIN: f64 = 10.0;
const MAX_POINTS: usize = 1 << 22;

/// Half-width `Z` with `|nu| cosh(2 mu Z) >= 10 Lambda_top` and a WKB decay
/// exponent of at least 22 between the turning point and `Z`.
pub fn domain_half_width(p: &MathieuProblem, lambda_top: f64) -> f64 {
    let acosh1 = |x: f64| x.max(1.0).acosh();
    let z_margin = acosh1(MARGIN * lambda_top / p.nu_abs) / (2.0 * p.mu);
    let mut z = acosh1(lambda_top / p.nu_abs) / (2.0 * p.mu);
    let mut decay = 0.0;
    while decay < TAIL_EXPONENT {
        let excess = (p.potential(z) - lambda_top).max(0.0);
        let dz = (0.02 / p.mu).min(0.05 / (excess.sqrt() + 1e-3).max(1e-9) + 1e-4);
        let mid = (p.potential(z + 0.5 * dz) - lambda_top).max(0.0).sqrt();
        decay += mid * dz;
        z += dz;
    }
    z.max(z_margin)
}

/// Tridiagonal data of the discretized operator: diagonal entries and the
/// square of the constant off-diagonal.
fn operator(p: &MathieuProblem, g: &Grid) -> (Vec<f64>, f64) {
    let h2 = g.spacing * g.spacing;
    let diag = (1..=g.points).map(|i| 2.0 / h2 + p.potential(g.node(i))).collect();
    (diag, 1.0 / (h2 * h2))
}

/// Number of eigenvalues of the tridiagonal operator strictly below `x`.
fn sturm_count(diag: &[f64], off2: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for (i, &d) in diag.iter().enumerate() {
        q = d - x - if i == 0 { 0.0 } else { off2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect(diag: &[f64], off2: f64, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        if sturm_count(diag, off2, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest `count` eigenvalues of the discretized operator, optionally guided
/// by predicted values.
fn grid_levels(p: &MathieuProblem, g: &Grid, count: usize, guess: Option<(&[f64], &[f64])>) -> Vec<f64> {
    let (diag, off2) = operator(p, g);
    let upper = diag.iter().cloned().fold(f64::MIN, f64::max) + 2.0 / (g.spacing * g.spacing);
    let mut out = Vec::with_capacity(count);
    let mut floor = p.nu_abs * (1.0 - 1e-12);
    for k in 0..count {
        let (mut lo, mut hi) = (floor, upper);
        if let Some((pred, width)) = guess {
            let w0 = width[k].max(1e-9 * pred[k].abs());
            let mut w = w0;
            for _ in 0..30 {
                let (a, b) = ((pred[k] - w).max(floor), pred[k] + w);
                if sturm_count(&diag, off2, a) <= k && sturm_count(&diag, off2, b) > k {
                    lo = a;
                    hi = b;
                    break;
                }
                w *= 4.0;
            }
        }
        let v = bisect(&diag, off2, k, lo, hi);
        out.push(v);
        floor = v;
    }
    out
}

/// Raw discrete levels on a fixed grid, without extrapolation.
pub fn discrete_levels(p: &MathieuProblem, half_width: f64, points: usize, count: usize) -> Result<Vec<f64>> {
    p.validate()?;
    if count > points {
        return Err(Error::Validation(format!("{count} levels requested from {points} points")));
    }
    Ok(grid_levels(p, &Grid::new(half_width, points), count, None))
}

/// Raw discrete levels of `-f'' + V f` on an arbitrary interval.
pub fn discrete_levels_on<V: Fn(f64) -> f64>(v: V, lo: f64, hi: f64, points: usize, count: usize) -> Vec<f64> {
    let h = (hi - lo) / (points + 1) as f64;
    let h2 = h * h;
    let diag: Vec<f64> = (1..=points).map(|i| 2.0 / h2 + v(lo + i as f64 * h)).collect();
    let off2 = 1.0 / (h2 * h2);
    let mn = diag.iter().cloned().fold(f64::MAX, f64::min) - 2.0 / h2;
    let mx = diag.iter().cloned().fold(f64::MIN, f64::max) + 2.0 / h2;
    let mut floor = mn;
    (0..count)
        .map(|k| {
            let e = bisect(&diag, off2, k, floor, mx);
            floor = e;
            e
        })
        .collect()
}

fn level_estimate(p: &MathieuProblem, target: f64) -> f64 {
    let count = |l: f64| {
        semiclassics::action(&ActionQuery { energy: l, nu: p.nu_abs, mu: p.mu }).unwrap_or(0.0)
    };
    let mut hi = p.nu_abs * 2.0 + 1.0;
    while count(hi) < target {
        hi = p.nu_abs + 2.0 * (hi - p.nu_abs);
    }
    let mut lo = p.nu_abs;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if count(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

struct Extrapolated {
    levels: Vec<f64>,
    finest: Grid,
    raw_finest: Vec<f64>,
}

fn extrapolate(p: &MathieuProblem, kmax: usize, tol: f64) -> Result<Extrapolated> {
    p.validate()?;
    if kmax == 0 {
        return Err(Error::Validation("kmax must be at least 1".into()));
    }
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::Validation(format!("tolerance {tol} outside (0, 1e-4]")));
    }
    let mut lambda_top = 1.1 * level_estimate(p, kmax as f64 + 1.0);
    for _attempt in 0..6 {
        let z = domain_half_width(p, lambda_top);
        let h0 = (0.4 / lambda_top.sqrt()).min(z / 50.0);
        let n0 = ((2.0 * z / h0).ceil() as usize).max(4 * kmax + 33);
        let mut grid = Grid::new(z, n0);
        let mut table: Vec<Vec<Vec<f64>>> = Vec::new();
        let mut raws: Vec<Vec<f64>> = Vec::new();
        let mut accepted: Vec<Option<f64>> = vec![None; kmax];
        let levels = loop {
            let guess = match raws.len() {
                0 => None,
                1 => Some((raws[0].clone(), raws[0].iter().map(|v| 0.05 * v.abs() + 1.0).collect::<Vec<_>>())),
                n => {
                    let (a, b) = (&raws[n - 1], &raws[n - 2]);
                    let pred: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + (x - y) / 3.0).collect();
                    let w = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
                    Some((pred, w))
                }
            };
            let raw = grid_levels(p, &grid, kmax, guess.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice())));
            let j = table.len();
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(kmax);
            for (k, &r) in raw.iter().enumerate() {
                let mut row = vec![r];
                for m in 1..=j {
                    let prev = table[j - 1][k][m - 1];
                    let cur = row[m - 1];
                    row.push(cur + (cur - prev) / (4f64.powi(m as i32) - 1.0));
                }
                rows.push(row);
            }
            table.push(rows);
            raws.push(raw);
            if j >= 2 {
                let cur: Vec<f64> = table[j].iter().map(|r| r[j]).collect();
                let prev: Vec<f64> = table[j - 1].iter().map(|r| r[j - 1]).collect();
                // low levels settle on coarse grids and are frozen there,
                // before round-off in 2/h^2 reaches them
                for k in 0..kmax {
                    if accepted[k].is_none() && (cur[k] - prev[k]).abs() <= tol * cur[k].abs() {
                        accepted[k] = Some(cur[k]);
                    }
                }
                if accepted.iter().all(Option::is_some) {
                    break accepted.iter().map(|v| v.expect("accepted")).collect::<Vec<f64>>();
                }
                if grid.points * 2 + 1 > MAX_POINTS {
                    let (k, _) = cur
                        .iter()
                        .zip(&prev)
                        .enumerate()
                        .filter(|(k, _)| accepted[*k].is_none())
                        .map(|(k, (a, b))| (k, (a - b).abs() / a.abs()))
                        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                    return Err(Error::Convergence { level: k, previous: prev[k], last: cur[k] });
                }
            }
            grid = grid.refined();
        };
        let top = levels[kmax - 1];
        if top <= lambda_top {
            if levels.windows(2).any(|w| w[1] <= w[0]) || levels[0] <= p.nu_abs {
                return Err(Error::Inconsistency(format!("non-monotone levels for {p:?}")));
            }
            return Ok(Extrapolated { levels, finest: grid, raw_finest: raws.pop().expect("raw") });
        }
        lambda_top = 1.3 * top;
    }
    Err(Error::Inconsistency(format!("level estimate did not stabilize for {p:?}")))
}

/// The lowest `kmax` levels, each to relative tolerance `tol`.
pub fn solve_levels(p: &MathieuProblem, kmax: usize, tol: f64) -> Result<MathieuLevels> {
    let e = extrapolate(p, kmax, tol)?;
    Ok(MathieuLevels { problem: *p, levels: e.levels, grid: e.finest, tol })
}

/// Solves `(T - sigma) x = b` for tridiagonal `T` with partial pivoting.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut dl = sub.to_vec();
    let mut du = sup.to_vec();
    let tiny = f64::EPSILON * d.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let b = rhs;
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = temp;
            let t = b[i];
            b[i] = b[i + 1];
            b[i + 1] = t - fact * b[i + 1];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
    }
}

fn eigenvector(p: &MathieuProblem, g: &Grid, shift: f64) -> Vec<f64> {
    let n = g.points;
    let h2 = g.spacing * g.spacing;
    let off = vec![-1.0 / h2; n - 1];
    let sigma = shift + 1e-12 * shift.abs().max(1.0);
    let diag: Vec<f64> = (1..=n).map(|i| 2.0 / h2 + p.potential(g.node(i)) - sigma).collect();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..4 {
        solve_tridiagonal(&off, &diag, &off, &mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    let norm = (g.spacing * x.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let peak = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let first = x.iter().find(|v| v.abs() > 1e-3 * peak).copied().unwrap_or(1.0);
    let sign = if first < 0.0 { -1.0 } else { 1.0 };
    x.iter().map(|v| sign * v / norm).collect()
}

fn parity_of(f: &[f64]) -> Parity {
    let n = f.len();
    let (mut sym, mut anti) = (0.0, 0.0);
    for i in 0..n {
        let (a, b) = (f[i], f[n - 1 - i]);
        sym += (a - b) * (a - b);
        anti += (a + b) * (a + b);
    }
    if sym <= anti {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Levels together with normalized eigenfunctions sampled on the finest grid.
pub fn solve(p: &MathieuProblem, kmax: usize, tol: f64) -> Result<MathieuSolution> {
    let e = extrapolate(p, kmax, tol)?;
    let eigenvectors: Vec<Vec<f64>> =
        e.raw_finest.iter().map(|&s| eigenvector(p, &e.finest, s)).collect();
    let parities = eigenvectors.iter().map(|f| parity_of(f)).collect();
    Ok(MathieuSolution { problem: *p, levels: e.levels, parities, grid: e.finest, eigenvectors, tol })
}

impl MathieuSolution {
    /// Cubic (Catmull-Rom) interpolation of level `k`; zero outside `[-Z, Z]`.
    pub fn eigenfunction(&self, k: usize, z: f64) -> f64 {
        eigenfunction(self, k, z)
    }

    /// Smallest interval outside of which `|f_k| < threshold * max |f_k|`.
    pub fn support(&self, k: usize, threshold: f64) -> (f64, f64) {
        let f = &self.eigenvectors[k];
        let peak = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let first = f.iter().position(|v| v.abs() >= threshold * peak).unwrap_or(0);
        let last = f.iter().rposition(|v| v.abs() >= threshold * peak).unwrap_or(f.len() - 1);
        (self.grid.node(first), self.grid.node(last + 2))
    }
}

pub fn eigenfunction(s: &MathieuSolution, k: usize, z: f64) -> f64 {
    let g = &s.grid;
    if k >= s.eigenvectors.len() || !(z.abs() < g.half_width) {
        return 0.0;
    }
    let f = &s.eigenvectors[k];
    let n = g.points as i64;
    let sample = |i: i64| if i >= 1 && i <= n { f[(i - 1) as usize] } else { 0.0 };
    let t = (z + g.half_width) / g.spacing;
    let i = t.floor() as i64;
    let u = t - i as f64;
    let (p0, p1, p2, p3) = (sample(i - 1), sample(i), sample(i + 1), sample(i + 2));
    p1 + 0.5
        * u
        * (p2 - p0 + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + u * (3.0 * (p1 - p2) + p3 - p0)))
}

/// Leading small-frequency law `(mu pi k)^2 / ln(|nu|)^2`, with `k` counting
/// levels from one (`k = 1` is the ground state).
pub fn small_nu_model(k: usize, nu_abs: f64, mu: f64) -> Result<f64> {
    if !(nu_abs > 0.0 && nu_abs < 1.0) {
        return Err(Error::Domain(format!("small-frequency law needs 0 < |nu| < 1, got {nu_abs}")));
    }
    let l = nu_abs.ln();
    Ok((mu * std::f64::consts::PI * k as f64).powi(2) / (l * l))
}

type CacheKey = (u64, u64, usize, u64);

/// Shared level cache keyed by `(|nu|, mu, kmax, tol)`.
#[derive(Debug, Default)]
pub struct MathieuCache {
    map: RwLock<HashMap<CacheKey, Arc<MathieuLevels>>>,
}

impl MathieuCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn levels(&self, p: &MathieuProblem, kmax: usize, tol: f64) -> Result<Arc<MathieuLevels>> {
        let key = (p.nu_abs.to_bits(), p.mu.to_bits(), kmax, tol.to_bits());
        if let Some(v) = self.map.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(v));
        }
        let v = Arc::new(solve_levels(p, kmax, tol)?);
        self.map.write().expect("cache lock").insert(key, Arc::clone(&v));
        Ok(v)
    }

    /// Every level not exceeding `lambda_max`.
    pub fn levels_below(&self, p: &MathieuProblem, lambda_max: f64, tol: f64) -> Result<Vec<f64>> {
        if lambda_max <= p.nu_abs {
            return Ok(Vec::new());
        }
        let est = semiclassics::action(&ActionQuery { energy: lambda_max, nu: p.nu_abs, mu: p.mu })?;
        let mut kmax = est.floor() as usize + 3;
        loop {
            let lv = self.levels(p, kmax, tol)?;
            if *lv.levels.last().expect("kmax >= 1") > lambda_max {
                return Ok(lv.levels.iter().copied().filter(|&l| l <= lambda_max).collect());
            }
            kmax = kmax * 3 / 2 + 2;
        }
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
