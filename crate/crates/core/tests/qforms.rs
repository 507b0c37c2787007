use proptest::prelude::*;
use solspec::qforms::{self, QuadraticForm};
use solspec::IntMat2;

/// Hyperbolic SL(2, Z) matrices with positive trace built from the two
/// elementary generators.
fn hyperbolic() -> impl Strategy<Value = IntMat2> {
    prop::collection::vec((any::<bool>(), 1i128..4), 2..6).prop_filter_map("not hyperbolic", |word| {
        let mut m = IntMat2::IDENTITY;
        let mut saw = (false, false);
        for (upper, k) in word {
            let g = if upper { IntMat2::new(1, k, 0, 1) } else { IntMat2::new(1, 0, k, 1) };
            if upper {
                saw.0 = true;
            } else {
                saw.1 = true;
            }
            m = m.mul(&g).ok()?;
        }
        (saw.0 && saw.1 && m.trace() > 2 && m.max_abs() < 10_000).then_some(m)
    })
}

proptest! {
    #[test]
    fn discriminant_is_trace_squared_minus_four(a in hyperbolic()) {
        let q = qforms::form_from_matrix(&a).unwrap();
        prop_assert_eq!(q.discriminant(), a.trace() * a.trace() - 4);
    }

    #[test]
    fn form_is_invariant(a in hyperbolic(), vs in prop::collection::vec((-1000i128..1000, -1000i128..1000), 100)) {
        let q = qforms::form_from_matrix(&a).unwrap();
        for (x, y) in vs {
            let w = a.apply([x, y]).unwrap();
            prop_assert_eq!(q.eval(w[0], w[1]).unwrap(), q.eval(x, y).unwrap());
        }
    }

    #[test]
    fn automorph_generator_preserves_the_primitive_part(a in hyperbolic()) {
        let (qh, _) = qforms::primitive_part(&qforms::form_from_matrix(&a).unwrap());
        let gen = qforms::automorph_generator(&qh).unwrap();
        prop_assert!(qh.is_preserved_by(&gen.matrix).unwrap());
        prop_assert_eq!(gen.matrix.det(), 1);
        // A is a power of the generator, up to sign
        let p = qforms::primitivity_index(&a).unwrap();
        let pw = gen.matrix.pow(p.r).unwrap();
        prop_assert!(pw == a || pw.neg() == a);
    }

    #[test]
    fn kronecker_is_completely_multiplicative(
        d in prop::sample::select(vec![5i64, 8, 12, 13, 17, 21, 24, 28, 29, 33, 40, 60, 85, 96]),
        k in 1u64..5000,
        l in 1u64..5000,
    ) {
        prop_assert_eq!(
            qforms::kronecker(d, k * l),
            qforms::kronecker(d, k) * qforms::kronecker(d, l)
        );
    }
}

#[test]
fn pell_powers_stay_on_the_norm_four_curve() {
    for d in [5, 8, 12, 13, 17, 21, 28, 45, 60, 61, 88] {
        let s = qforms::pell_fundamental(d).unwrap();
        for n in 1..=5 {
            let (x, y) = s.power(n).unwrap();
            assert_eq!(x * x - d * y * y, 4, "d = {d}, n = {n}");
        }
    }
}

#[test]
fn pell_matches_brute_force_search() {
    let brute = |d: i128| {
        (1i128..1_000_000)
            .find_map(|y| {
                let x2 = 4 + d * y * y;
                let x = (x2 as f64).sqrt().round() as i128;
                (x - 1..=x + 1).find(|x| x * x == x2).map(|x| (x, y))
            })
    };
    for d in (5..=150).filter(|d| d % 4 <= 1 && ((*d as f64).sqrt().fract() != 0.0)) {
        let s = qforms::pell_fundamental(d).unwrap();
        match brute(d) {
            Some(b) => assert_eq!((s.x0, s.y0), b, "d = {d}"),
            None => assert!(s.y0 >= 1_000_000 && s.x0 * s.x0 - d * s.y0 * s.y0 == 4, "d = {d}"),
        }
    }
}

#[test]
fn pell_examples() {
    let s = qforms::pell_fundamental(5).unwrap();
    assert_eq!((s.x0, s.y0), (3, 1));
    assert_eq!(qforms::pell_fundamental(13).map(|s| (s.x0, s.y0)).unwrap(), (11, 3));
    assert_eq!(qforms::pell_fundamental(17).map(|s| (s.x0, s.y0)).unwrap(), (66, 16));
    assert!(qforms::pell_fundamental(16).is_err());
    assert!(qforms::pell_fundamental(7).is_err());
}

#[test]
fn form_of_fourth_example_matrix() {
    let a = IntMat2::new(1, 3, 1, 4);
    let q = qforms::form_from_matrix(&a.transpose()).unwrap();
    assert_eq!(q, QuadraticForm { a: -3, b: -3, c: 1 });
    assert_eq!(q.discriminant(), 21);
}

fn gcd3(a: i128, b: i128, c: i128) -> i128 {
    let g = |mut x: i128, mut y: i128| {
        (x, y) = (x.abs(), y.abs());
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x
    };
    g(g(a, b), c)
}

/// Union of primitive Gauss-reduced forms linked by some matrix of SL(2, Z) with small
/// entries.
fn class_number_oracle(d: i128) -> u64 {
    let sd = (d as f64).sqrt();
    let mut forms = Vec::new();
    for b in 1..=sd.floor() as i128 {
        if (b * b - d) % 4 != 0 || b as f64 >= sd {
            continue;
        }
        let ac = (b * b - d) / 4;
        for a in -d..=d {
            if a != 0 && ac % a == 0 && gcd3(a, b, ac / a) == 1 {
                let a2 = 2.0 * a.abs() as f64;
                if sd - (b as f64) < a2 && a2 < sd + b as f64 {
                    forms.push((a, b, ac / a));
                }
            }
        }
    }
    let mut parent: Vec<usize> = (0..forms.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let bound = 12i128;
    for p in -bound..=bound {
        for q in -bound..=bound {
            for r in -bound..=bound {
                for s in -bound..=bound {
                    if p * s - q * r != 1 {
                        continue;
                    }
                    for i in 0..forms.len() {
                        let (a, b, c) = forms[i];
                        let img = (
                            a * p * p + b * p * r + c * r * r,
                            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
                            a * q * q + b * q * s + c * s * s,
                        );
                        if let Some(j) = forms.iter().position(|f| *f == img) {
                            let (x, y) = (root(&mut parent, i), root(&mut parent, j));
                            parent[x] = y;
                        }
                    }
                }
            }
        }
    }
    (0..forms.len()).filter(|&i| root(&mut parent, i) == i).count() as u64
}

#[test]
fn class_numbers_agree_with_union_find_oracle() {
    for d in (5..=100i128).filter(|d| d % 4 <= 1 && (*d as f64).sqrt().fract() != 0.0) {
        assert_eq!(qforms::class_number(d).unwrap(), class_number_oracle(d), "d = {d}");
    }
}

#[test]
fn representation_examples() {
    let q = QuadraticForm::new(1, -1, -1).unwrap();
    let gen = qforms::automorph_generator(&q).unwrap();
    assert_eq!(qforms::rep_count_bruteforce(&q, 11, &gen.matrix).unwrap(), 2);
    assert_eq!(qforms::rep_count_bruteforce(&q, 4, &gen.matrix).unwrap(), 1);
    assert_eq!(qforms::rep_count_bruteforce(&q, 2, &gen.matrix).unwrap(), 0);
    assert_eq!(qforms::rep_count_formula(5, 11).unwrap(), 2);
    assert_eq!(qforms::rep_count_formula(5, 121).unwrap(), 3);
    assert_eq!(qforms::rep_count_formula(5, 1).unwrap(), 1);
    assert!(qforms::rep_count_formula(5, 10).is_err());
    assert!(qforms::rep_count_bruteforce(&q, 0, &gen.matrix).is_err());
}

#[test]
fn brute_force_counts_agree_for_several_automorph_powers() {
    // counting modulo a power of the generator multiplies the count by the power
    let q = QuadraticForm::new(1, -1, -1).unwrap();
    let gen = qforms::automorph_generator(&q).unwrap();
    let sq = gen.matrix.pow(2).unwrap();
    for n in [1i128, -1, 11, -19, 29, 121, -209] {
        let one = qforms::rep_count_bruteforce(&q, n, &gen.matrix).unwrap();
        let two = qforms::rep_count_bruteforce(&q, n, &sq).unwrap();
        assert_eq!(two, 2 * one, "n = {n}");
    }
}
