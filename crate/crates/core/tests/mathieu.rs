use solspec::mathieu::{self, MathieuCache, MathieuProblem, Parity};
use solspec::semiclassics::{action, ActionQuery};

#[test]
fn harmonic_well_limit() {
    let p = MathieuProblem::new(1e4, 1.0).unwrap();
    let s = mathieu::solve_levels(&p, 4, 1e-9).unwrap();
    for (k, l) in s.levels.iter().enumerate() {
        let approx = 1e4 + (2 * k + 1) as f64 * (2.0e4f64).sqrt();
        assert!((l - approx).abs() / approx < 0.02, "k = {k}: {l} vs {approx}");
    }
}

#[test]
fn levels_increase_above_potential_minimum() {
    let p = MathieuProblem::new(1.0, 1.0).unwrap();
    let s = mathieu::solve_levels(&p, 12, 1e-9).unwrap();
    assert!(s.levels[0] > 1.0);
    assert!(s.levels.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn second_order_convergence() {
    for nu in [0.1, 1.0, 10.0] {
        let p = MathieuProblem::new(nu, 1.0).unwrap();
        let z = mathieu::domain_half_width(&p, 200.0);
        let n = 401;
        let a = mathieu::discrete_levels(&p, z, n, 5).unwrap();
        let b = mathieu::discrete_levels(&p, z, 2 * n + 1, 5).unwrap();
        let c = mathieu::discrete_levels(&p, z, 4 * n + 3, 5).unwrap();
        for k in 0..5 {
            let ratio = (a[k] - b[k]) / (b[k] - c[k]);
            assert!((3.5..=4.5).contains(&ratio), "nu = {nu}, k = {k}: ratio {ratio}");
        }
    }
}

#[test]
fn spectrum_is_shift_invariant() {
    let p = MathieuProblem::new(2.0, 0.8).unwrap();
    let z = mathieu::domain_half_width(&p, 100.0);
    let centered = mathieu::discrete_levels(&p, z, 1501, 6).unwrap();
    for s in [0.37, -1.25] {
        let shifted =
            mathieu::discrete_levels_on(|x| p.potential(x + s), -z - s, z - s, 1501, 6);
        for (a, b) in centered.iter().zip(&shifted) {
            assert!((a - b).abs() <= 1e-10 * a.abs(), "shift {s}: {a} vs {b}");
        }
    }
}

#[test]
fn eigenfunctions_are_normalized_with_parity_and_tails() {
    let p = MathieuProblem::new(3.0, 1.0).unwrap();
    let s = mathieu::solve(&p, 6, 1e-8).unwrap();
    let z = s.grid.half_width;
    for k in 0..6 {
        let f = &s.eigenvectors[k];
        let norm: f64 = s.grid.spacing * f.iter().map(|v| v * v).sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-8);
        let peak = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(f[0].abs() < 1e-8 * peak && f[f.len() - 1].abs() < 1e-8 * peak);
        assert_eq!(s.parities[k], if k % 2 == 0 { Parity::Even } else { Parity::Odd });
        for &x in &[0.1, 0.35, 0.8] {
            let (a, b) = (s.eigenfunction(k, x), s.eigenfunction(k, -x));
            let expect = if k % 2 == 0 { b } else { -b };
            assert!((a - expect).abs() < 1e-6);
        }
        assert!(s.eigenfunction(k, z).abs() < 1e-8 * peak);
        assert_eq!(s.eigenfunction(k, z + 1.0), 0.0);
        // trapezoid on a finer resampling of the interpolant
        let m = 20 * s.grid.points;
        let h = 2.0 * z / m as f64;
        let l2: f64 = (1..m).map(|i| s.eigenfunction(k, -z + i as f64 * h).powi(2)).sum::<f64>() * h;
        assert!((l2 - 1.0).abs() < 1e-6, "k = {k}: {l2}");
    }
}

#[test]
fn small_frequency_law() {
    // ground state of the solver is the first level of the small-frequency law
    let ratio = |nu: f64| {
        let p = MathieuProblem::new(nu, 1.0).unwrap();
        let l0 = mathieu::solve_levels(&p, 1, 1e-8).unwrap().levels[0];
        l0 / mathieu::small_nu_model(1, nu, 1.0).unwrap()
    };
    let (r3, r6) = (ratio(1e-3), ratio(1e-6));
    assert!((r6 - 1.0).abs() < 0.35, "ratio at 1e-6 is {r6}");
    assert!((r6 - 1.0).abs() < (r3 - 1.0).abs());
}

#[test]
fn level_count_matches_action() {
    let p = MathieuProblem::new(1.0, 1.0).unwrap();
    let cache = MathieuCache::new();
    for lam in [50.0, 200.0, 1000.0] {
        let n = cache.levels_below(&p, lam, 1e-9).unwrap().len() as f64;
        let i = action(&ActionQuery { energy: lam, nu: 1.0, mu: 1.0 }).unwrap();
        assert!((n - i.round()).abs() <= 1.0, "Lambda = {lam}: {n} levels, action {i}");
    }
}

#[test]
fn cache_reuses_solutions() {
    let cache = MathieuCache::new();
    let p = MathieuProblem::new(5.0, 0.9).unwrap();
    let a = cache.levels(&p, 5, 1e-8).unwrap();
    let b = cache.levels(&p, 5, 1e-8).unwrap();
    assert!(std::sync::Arc::ptr_eq(&a, &b));
    assert_eq!(cache.len(), 1);
    std::thread::scope(|s| {
        for _ in 0..4 {
            s.spawn(|| cache.levels(&MathieuProblem::new(7.0, 0.9).unwrap(), 3, 1e-8).unwrap());
        }
    });
    assert_eq!(cache.len(), 2);
}
