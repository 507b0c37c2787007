use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solspec::manifold::{geometry, FibreMetric, GluingMap};
use solspec::semiclassics::{self, ActionQuery};
use solspec::spectrum;
use std::f64::consts::PI;

/// `2 int_1^{1/g} sqrt(1 - g xi) / sqrt(xi^2 - 1) d xi` with `xi = cosh t`
/// and `t = T (1 - u^2)`, by composite Simpson.
fn f_by_quadrature(g: f64) -> f64 {
    let t_max = (1.0 / g).acosh();
    let n = 20_000;
    let h = 1.0 / n as f64;
    let w = |u: f64| {
        let t = t_max * (1.0 - u * u);
        (1.0 - g * t.cosh()).max(0.0).sqrt() * 2.0 * t_max * u
    };
    let mut s = w(0.0) + w(1.0);
    for i in 1..n {
        s += w(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * s * h / 3.0
}

#[test]
fn f_matches_direct_quadrature() {
    for g in [0.5, 0.1, 0.9] {
        let a = semiclassics::f_of_g(g).unwrap();
        let b = f_by_quadrature(g);
        assert!((a - b).abs() < 1e-8, "g = {g}: {a} vs {b}");
    }
}

#[test]
fn f_is_strictly_decreasing() {
    let mut prev = f64::INFINITY;
    for i in 1..=2000 {
        let f = semiclassics::f_of_g(i as f64 / 2000.0).unwrap();
        assert!(f < prev);
        prev = f;
    }
}

#[test]
fn f_diverges_like_minus_two_log() {
    let vals: Vec<f64> = (2..=14)
        .map(|e| {
            let g = 10f64.powi(-e);
            semiclassics::f_of_g(g).unwrap() + 2.0 * g.ln()
        })
        .collect();
    assert!(vals.iter().all(|v| v.abs() < 10.0));
    // the remainder settles to a constant
    assert!((vals[vals.len() - 1] - vals[vals.len() - 2]).abs() < 1e-8);
}

#[test]
fn integral_of_f() {
    let v = semiclassics::integral_of_f(1e-12).unwrap();
    assert!((v - 2.0 * PI / 3.0).abs() < 1e-8);
}

#[test]
fn action_properties() {
    let at = |energy: f64, nu: f64| semiclassics::action(&ActionQuery { energy, nu, mu: 1.0 }).unwrap();
    assert!(at(3.0, 3.0).abs() < 1e-12);
    assert!(at(3.0, -3.0).abs() < 1e-12);
    let (a, b) = (at(100.0, 10.0), at(400.0, 40.0));
    assert!((b / a - 2.0).abs() < 1e-12);
    assert!(semiclassics::action(&ActionQuery { energy: 1.0, nu: 2.0, mu: 1.0 }).is_err());
    assert!(semiclassics::action(&ActionQuery { energy: -1.0, nu: 0.5, mu: 1.0 }).is_err());
}

#[test]
fn x_pm_sum_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let th: f64 = rng.gen_range(1e-3..PI - 1e-3);
        let (p, m) = semiclassics::x_pm(th).unwrap();
        assert!((th.sin() * (p + m) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((p / m - th / (PI - th)).abs() < 1e-12 * (th / (PI - th)).max(1.0));
    }
}

#[test]
fn weyl_prediction_values() {
    assert!((semiclassics::weyl_prediction(2000.0, 1.0) - 1510.41).abs() < 0.01);
}

#[test]
fn weyl_curve_respects_table_cut() {
    let g = geometry(GluingMap::cat_map(), FibreMetric::euclidean()).unwrap();
    let table = spectrum::assemble(&g, 300.0, 1e-9).unwrap();
    let pts = semiclassics::weyl_curve(&table, g.area, &[100.0, 300.0]).unwrap();
    assert_eq!(pts[1].empirical, table.lines.iter().map(|l| l.multiplicity).sum::<u64>());
    assert!(pts[0].empirical <= pts[1].empirical);
    assert!(semiclassics::weyl_curve(&table, g.area, &[301.0]).is_err());
    let csv = semiclassics::weyl_csv(&pts);
    assert!(csv.starts_with("lambda,n_empirical,n_predicted,ratio\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn f_table() {
    let csv = semiclassics::f_table_csv(10).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.lines().last().unwrap().starts_with("1.00000000000e0,"));
}
