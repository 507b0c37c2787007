use solspec::manifold::{geometry, FibreMetric, Geometry, GluingMap};
use solspec::statistics::{self, Involution, SymmetryMode};
use solspec::IntMat2;

fn cat() -> Geometry {
    geometry(GluingMap::cat_map(), FibreMetric::euclidean()).unwrap()
}

fn extra(g: &Geometry) -> SymmetryMode {
    let inv = Involution::new(IntMat2::new(1, 0, -1, -1), IntMat2::new(1, -1, 0, -1), &g.gluing).unwrap();
    SymmetryMode::ExtraInvolution(inv)
}

#[test]
fn involutions_are_checked() {
    let a = GluingMap::cat_map();
    let found = statistics::find_involution(&a).unwrap();
    assert_eq!(found.r2.mul(&found.r1).unwrap(), *a.matrix());
    assert_eq!(found.r1.det(), -1);
    for m in [[3, 1, 2, 1], [5, 3, 3, 2], [1, 3, 1, 4]] {
        let a = GluingMap::try_from(m).unwrap();
        if let Some(inv) = statistics::find_involution(&a) {
            assert!(Involution::new(inv.r1, inv.r2, &a).is_ok());
        }
    }
    let bad = Involution { r1: IntMat2::IDENTITY, r2: IntMat2::IDENTITY };
    assert!(statistics::value_sequence(&cat(), 100, SymmetryMode::ExtraInvolution(bad)).is_err());
}

#[test]
fn orbit_only_count_and_zero_spacings() {
    let g = cat();
    let q = 90 * 90;
    let vs = statistics::value_sequence(&g, q, SymmetryMode::OrbitOnly).unwrap();
    let expect = 4.0 * g.mu * q as f64 / 5f64.sqrt();
    assert!((vs.values.len() as f64 / expect - 1.0).abs() < 0.05);
    assert!(vs.values.windows(2).all(|w| w[0] <= w[1]));
    let h = statistics::spacing_histogram(&vs, false).unwrap();
    // every value appears at least for gamma and -gamma
    assert!(h.zero_fraction() > 0.5);
    let d = statistics::spacing_histogram(&vs, true).unwrap();
    assert_eq!(d.fraction(0), 0.0);
    assert!(d.bins.values().sum::<u64>() == d.total);
}

#[test]
fn extra_involution_keeps_an_eighth() {
    // the p > 0, Q > 0 quadrant is a quarter of the orbits and the
    // involution pairs its members up to fixed points, of which there are O(sqrt Q)
    let g = cat();
    let q = 60 * 60;
    let all = statistics::value_sequence(&g, q, SymmetryMode::OrbitOnly).unwrap();
    let red = statistics::value_sequence(&g, q, extra(&g)).unwrap();
    let quadrant = solspec::manifold::orbit_enumerate(&g, q)
        .unwrap()
        .iter()
        .filter(|o| o.p > 0.0 && o.qvalue > 0)
        .count();
    let n = red.values.len();
    assert!(2 * n >= quadrant && ((2 * n - quadrant) as f64) < 2.0 * (q as f64).sqrt(), "{n} {quadrant}");
    assert!((8.0 * n as f64 / all.values.len() as f64 - 1.0).abs() < 0.1);
}

#[test]
fn zero_spacings_increase_with_the_cut() {
    let g = cat();
    let mut prev = 0.0;
    for side in [30u64, 60, 90] {
        let vs = statistics::value_sequence(&g, side * side, extra(&g)).unwrap();
        let z = statistics::spacing_histogram(&vs, false).unwrap().zero_fraction();
        assert!(z > prev);
        prev = z;
    }
}

#[test]
fn represented_integers_thin_out() {
    let g = cat();
    let vs = statistics::value_sequence(&g, 100_000, SymmetryMode::OrbitOnly).unwrap();
    let rows = statistics::represented_growth(&vs, &[1_000, 10_000, 100_000]).unwrap();
    assert!(rows.windows(2).all(|w| w[0].count <= w[1].count));
    let density: Vec<f64> = rows.iter().map(|r| r.count as f64 / r.k as f64).collect();
    assert!(density.windows(2).all(|w| w[1] < w[0]));
    assert!(rows.iter().all(|r| r.normalized > 0.1 && r.normalized < 2.0));
    let csv = statistics::growth_csv(&rows);
    assert!(csv.starts_with("K,count,normalized\n"));
    assert_eq!(csv.lines().count(), 4);
    assert!(statistics::represented_growth(&vs, &[200_000]).is_err());
}

#[test]
fn represented_values_match_brute_force() {
    // |x^2 - x y - y^2| over a box covers exactly the listed values
    let g = cat();
    let qmax = 400;
    let vs = statistics::value_sequence(&g, qmax, SymmetryMode::OrbitOnly).unwrap();
    let mut listed = vs.values.clone();
    listed.dedup();
    let mut brute: Vec<u64> = Vec::new();
    for x in -80i64..=80 {
        for y in -80i64..=80 {
            let v = (x * x - x * y - y * y).unsigned_abs();
            if v > 0 && v <= qmax {
                brute.push(v);
            }
        }
    }
    brute.sort_unstable();
    brute.dedup();
    assert_eq!(listed, brute);
}
