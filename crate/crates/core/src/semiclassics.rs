//! Semiclassical counting: Weyl's law, the action of the fibre-mode
//! oscillator and the fractions `X+-` of states with positive and negative
//! frequency.

use crate::error::{Error, Result};
use crate::quad;
use crate::spectrum::SpectrumTable;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

/// Complete elliptic integrals `K(k)` and `E(k)` by the arithmetic-geometric mean.
pub fn elliptic_ke(k: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("modulus {k} outside [0, 1)")));
    }
    Ok(agm_ke(k, ((1.0 - k) * (1.0 + k)).sqrt()))
}

/// AGM with the complementary modulus supplied, accurate as `k -> 1`.
fn agm_ke(k: f64, kp: f64) -> (f64, f64) {
    let mut a = 1.0f64;
    let mut b = kp;
    let mut sum = 0.5 * k * k;
    let mut pow2 = 0.5;
    for _ in 0..64 {
        if (a - b).abs() <= 1e-15 * a {
            break;
        }
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    let kk = FRAC_PI_2 / a;
    (kk, kk * (1.0 - sum))
}

/// `f(g) = 4 sqrt(1+g) (K(k) - E(k))` with `k^2 = (1-g)/(1+g)`: the action of
/// the oscillator `-f'' + g cosh(2z) f` at unit energy, up to normalization.
pub fn f_of_g(g: f64) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::Domain(format!("g = {g} outside (0, 1]")));
    }
    let k = ((1.0 - g) / (1.0 + g)).sqrt();
    let (kk, ee) = agm_ke(k, (2.0 * g / (1.0 + g)).sqrt());
    Ok(4.0 * (1.0 + g).sqrt() * (kk - ee))
}

/// `int_0^1 f(g) dg`, computed with `g = exp(-s)` to absorb the logarithmic
/// endpoint.
pub fn integral_of_f(tol: f64) -> Result<f64> {
    quad::integrate(
        |s| {
            let g = (-s).exp();
            if g <= 0.0 {
                0.0
            } else {
                f_of_g(g).unwrap_or(0.0) * g
            }
        },
        0.0,
        80.0,
        tol,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionQuery {
    pub energy: f64,
    pub nu: f64,
    pub mu: f64,
}

impl ActionQuery {
    pub fn g(&self) -> f64 {
        self.nu.abs() / self.energy
    }
}

/// `I = sqrt(Lambda) f(g) / (2 pi mu)`: semiclassical number of oscillator
/// levels below `Lambda` at frequency `nu`.
pub fn action(q: &ActionQuery) -> Result<f64> {
    if !(q.energy > 0.0) || !(q.mu > 0.0) {
        return Err(Error::Validation(format!("invalid action query {q:?}")));
    }
    let g = q.g();
    if g > 1.0 {
        return Err(Error::Domain(format!("energy {} below |nu| = {}", q.energy, q.nu.abs())));
    }
    Ok(q.energy.sqrt() * f_of_g(g)? / (2.0 * PI * q.mu))
}

/// Weyl's law `N(Lambda) = (4 pi / 3) Lambda^{3/2} vol / (2 pi)^3` for a
/// manifold of volume `area` (the fibre area times the unit base length).
pub fn weyl_prediction(lambda: f64, area: f64) -> f64 {
    4.0 * PI / 3.0 * lambda.powf(1.5) * area / (2.0 * PI).powi(3)
}

/// `(X+, X-) = (4/3)(pi/2 +- (theta - pi/2)) / sin(theta)`.
pub fn x_pm(theta: f64) -> Result<(f64, f64)> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, pi)")));
    }
    let s = theta.sin();
    let d = theta - FRAC_PI_2;
    Ok((4.0 / 3.0 * (FRAC_PI_2 + d) / s, 4.0 / 3.0 * (FRAC_PI_2 - d) / s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylPoint {
    pub lambda: f64,
    pub empirical: u64,
    pub predicted: f64,
    pub ratio: f64,
}

/// Empirical versus predicted counting at the requested energies.
pub fn weyl_curve(table: &SpectrumTable, area: f64, lambdas: &[f64]) -> Result<Vec<WeylPoint>> {
    lambdas
        .iter()
        .map(|&l| {
            if l > table.energy_cut {
                return Err(Error::Precondition(format!(
                    "energy {l} exceeds the table cut {}",
                    table.energy_cut
                )));
            }
            let empirical = table.count_below(l);
            let predicted = weyl_prediction(l, area);
            Ok(WeylPoint { lambda: l, empirical, predicted, ratio: empirical as f64 / predicted })
        })
        .collect()
}

pub fn weyl_csv(points: &[WeylPoint]) -> String {
    use crate::output::fmt12;
    let mut s = String::from("lambda,n_empirical,n_predicted,ratio\n");
    for p in points {
        let _ = writeln!(s, "{},{},{},{}", fmt12(p.lambda), p.empirical, fmt12(p.predicted), fmt12(p.ratio));
    }
    s
}

pub fn f_table_csv(samples: usize) -> Result<String> {
    use crate::output::fmt12;
    let mut s = String::from("g,f\n");
    for i in 1..=samples {
        let g = i as f64 / samples as f64;
        let _ = writeln!(s, "{},{}", fmt12(g), fmt12(f_of_g(g)?));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_ke(k: f64) -> (f64, f64) {
        let mut kk = 0.0;
        let mut ee = 0.0;
        let mut c = 1.0f64;
        for n in 0..400 {
            if n > 0 {
                c *= (2 * n - 1) as f64 / (2 * n) as f64;
            }
            let t = c * c * k.powi(2 * n);
            kk += t;
            ee += if n == 0 { t } else { -t / (2 * n - 1) as f64 };
        }
        (FRAC_PI_2 * kk, FRAC_PI_2 * ee)
    }

    #[test]
    fn agm_matches_series() {
        let (kk, ee) = elliptic_ke(0.8).unwrap();
        let (ks, es) = series_ke(0.8);
        assert!((kk - ks).abs() < 1e-10 && (ee - es).abs() < 1e-10);
        assert_eq!(elliptic_ke(0.0).unwrap(), (FRAC_PI_2, FRAC_PI_2));
        assert!(elliptic_ke(1.0).is_err());
    }

    #[test]
    fn legendre_relation() {
        for &k in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let kp = (1.0f64 - k * k).sqrt();
            let (k1, e1) = elliptic_ke(k).unwrap();
            let (k2, e2) = elliptic_ke(kp).unwrap();
            assert!((e1 * k2 + e2 * k1 - k1 * k2 - FRAC_PI_2).abs() < 1e-10);
        }
    }

    #[test]
    fn f_endpoints_and_integral() {
        assert!(f_of_g(1.0).unwrap().abs() < 1e-14);
        assert!(f_of_g(0.0).is_err());
        assert!((integral_of_f(1e-11).unwrap() - 2.0 * PI / 3.0).abs() < 1e-8);
    }

    #[test]
    fn x_pm_cases() {
        let (p, m) = x_pm(FRAC_PI_2).unwrap();
        assert!((p - 2.0 * PI / 3.0).abs() < 1e-14 && (m - p).abs() < 1e-14);
        let (p, m) = x_pm(PI / 3.0).unwrap();
        assert!((p / m - 0.5).abs() < 1e-14);
        assert!(x_pm(0.0).is_err() && x_pm(PI).is_err());
    }

    #[test]
    fn weyl_formula() {
        assert!((weyl_prediction(2000.0, 1.0) - 1510.41).abs() < 0.01);
        assert!((weyl_prediction(2000.0, 2.0) - 2.0 * weyl_prediction(2000.0, 1.0)).abs() < 1e-9);
    }
}
