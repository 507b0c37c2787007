//! Reduced-scale invariant suites behind `--selftest`.

use solspec::dynamics::{self, LoopSpec, PhasePoint};
use solspec::manifold::{self, FibreMetric, Geometry, GluingMap};
use solspec::qforms;
use solspec::semiclassics;
use solspec::spectrum::{self, AveragedEigenfunction, LineSource};
use solspec::statistics::{self, SymmetryMode};
use solspec::{Error, Result};
use std::f64::consts::PI;

fn ensure(ok: bool, what: &str) -> Result<String> {
    if ok {
        Ok(format!("ok {what}"))
    } else {
        Err(Error::Inconsistency(format!("selftest check failed: {what}")))
    }
}

fn cat() -> Result<Geometry> {
    manifold::geometry(GluingMap::cat_map(), FibreMetric::euclidean())
}

pub fn run(name: &str, geom: &Geometry) -> Result<Vec<String>> {
    match name {
        "forms" => forms(geom),
        "spectrum" => spectrum(geom),
        "weyl" => weyl(geom),
        "spacing" => spacing(geom),
        "flower" => flower(geom),
        "geodesic" => geodesic(geom),
        "field" => field(geom),
        _ => Err(Error::Validation(format!("no selftest named {name}"))),
    }
}

fn forms(geom: &Geometry) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut pell = true;
    for d in [5, 8, 12, 13, 17, 21, 28, 29, 60, 61] {
        let s = qforms::pell_fundamental(d)?;
        for n in 1..=3 {
            let (x, y) = s.power(n)?;
            pell &= x * x - d * y * y == 4;
        }
    }
    out.push(ensure(pell, "Pell powers satisfy x^2 - d y^2 = 4")?);
    let d = geom.disc;
    let mult = (1..40u64).all(|k| (1..40u64).all(|l| qforms::kronecker(d, k * l) == qforms::kronecker(d, k) * qforms::kronecker(d, l)));
    out.push(ensure(mult, "Kronecker symbol is multiplicative")?);
    let q = qforms::QuadraticForm::new(1, -1, -1)?;
    let gen = qforms::automorph_generator(&q)?;
    let mut agree = true;
    for n in (1..=100i128).filter(|n| n % 5 != 0) {
        agree &= qforms::rep_count_formula(5, n as u64)? == qforms::rep_count_bruteforce(&q, n, &gen.matrix)? as i64;
    }
    out.push(ensure(agree, "divisor sum equals brute-force count for D = 5, n <= 100")?);
    let star = geom.gluing.dual();
    let qs = geom.dual_form();
    let mut inv = true;
    for x in -7i128..=7 {
        for y in -7i128..=7 {
            let w = star.apply([x, y])?;
            inv &= qs.eval(w[0], w[1])? == qs.eval(x, y)?;
        }
    }
    out.push(ensure(inv, "dual form is invariant under A*")?);
    let p = qforms::primitivity_index(&star)?;
    let pw = p.generator.matrix.pow(p.r)?;
    out.push(ensure(pw == star || pw.neg() == star, "A* is a power of the automorph generator")?);
    out.push(ensure(qforms::class_number(5)? == 1 && qforms::class_number(65)? == 2, "class numbers of 5 and 65")?);
    Ok(out)
}

fn spectrum(geom: &Geometry) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let small = spectrum::assemble(geom, 400.0, 1e-10)?;
    let large = spectrum::assemble(geom, 800.0, 1e-10)?;
    out.push(ensure(small.lines.first().is_some_and(|l| l.energy == 0.0), "lowest line is the constant")?);
    out.push(ensure(large.lines.windows(2).all(|w| w[0].energy <= w[1].energy), "table is sorted")?);
    let below: Vec<_> = large.lines.iter().filter(|l| l.energy <= 400.0).collect();
    let prefix = below.len() == small.lines.len() && below.iter().zip(&small.lines).all(|(a, b)| a.source == b.source);
    out.push(ensure(prefix, "doubling the cut keeps every line below it")?);
    let paired = large.lines.iter().all(|l| match &l.source {
        LineSource::Orbit { orbit, level } => large.lines.iter().any(|m| {
            m.orbit().is_some_and(|(o, k)| o.gamma == [-orbit.gamma[0], -orbit.gamma[1]] && k == *level && m.energy == l.energy)
        }),
        LineSource::Trivial { .. } => true,
    });
    out.push(ensure(paired, "gamma and -gamma give equal lines")?);
    let grouped = spectrum::group_degenerate(geom, &large, 1e-7)?;
    out.push(ensure(grouped.accidental().count() == 0, "no unexplained merges")?);
    let report = spectrum::check_multiplicities(geom, &large, &grouped, 50)?;
    out.push(ensure(report.mismatches().next().is_none(), "multiplicities match 2 r N for |n| <= 50")?);
    Ok(out)
}

fn weyl(geom: &Geometry) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let v = semiclassics::integral_of_f(1e-12)?;
    out.push(ensure((v - 2.0 * PI / 3.0).abs() < 1e-8, "integral of f is 2 pi / 3")?);
    let mut sum_rule = true;
    for i in 1..100 {
        let th = PI * i as f64 / 100.0;
        let (p, m) = semiclassics::x_pm(th)?;
        sum_rule &= (th.sin() * (p + m) - 4.0 * PI / 3.0).abs() < 1e-12;
    }
    out.push(ensure(sum_rule, "sin(theta) (X+ + X-) = 4 pi / 3")?);
    let mut prev = f64::INFINITY;
    let mut decreasing = true;
    for i in 1..=200 {
        let f = semiclassics::f_of_g(i as f64 / 200.0)?;
        decreasing &= f < prev;
        prev = f;
    }
    out.push(ensure(decreasing, "f is strictly decreasing")?);
    let table = spectrum::assemble(geom, 1000.0, 1e-9)?;
    let pts = semiclassics::weyl_curve(&table, geom.area, &[1000.0])?;
    out.push(ensure((pts[0].ratio - 1.0).abs() < 0.1, "counting function within 10% of Weyl at 1000")?);
    Ok(out)
}

fn spacing(geom: &Geometry) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let x = 2500u64;
    let vs = statistics::value_sequence(geom, x, SymmetryMode::OrbitOnly)?;
    let expect = 4.0 * geom.mu * x as f64 / (geom.disc as f64).sqrt();
    out.push(ensure((vs.values.len() as f64 / expect - 1.0).abs() < 0.05, "orbit count grows like 4 mu X / sqrt D")?);
    out.push(ensure(vs.values.windows(2).all(|w| w[0] <= w[1]), "values are sorted")?);
    let h = statistics::spacing_histogram(&vs, false)?;
    out.push(ensure(h.bins.values().sum::<u64>() == h.total && h.total + 1 == vs.values.len() as u64, "histogram counts every spacing")?);
    let d = statistics::spacing_histogram(&vs, true)?;
    out.push(ensure(d.fraction(0) == 0.0, "dropping repeats removes zero spacings")?);
    let rows = statistics::represented_growth(&vs, &[100, 1000, x])?;
    out.push(ensure(rows.windows(2).all(|w| w[0].count <= w[1].count), "represented count is non-decreasing")?);
    if let Some(inv) = statistics::find_involution(&geom.gluing) {
        let mode = SymmetryMode::ExtraInvolution(inv);
        let z: Vec<f64> = [900u64, 3600]
            .iter()
            .map(|&q| Ok(statistics::spacing_histogram(&statistics::value_sequence(geom, q, mode)?, false)?.zero_fraction()))
            .collect::<Result<_>>()?;
        out.push(ensure(z[1] > z[0], "zero-spacing fraction grows with the cut")?);
    }
    Ok(out)
}

fn flower(geom: &Geometry) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut worst: f64 = 0.0;
    for (pu, pv) in [(0.3, 2.0), (1.0, 1.0), (7.0, 0.2), (2.5, 4.0)] {
        let h = 1e-6 * f64::min(pu, pv);
        let f = |a: f64, b: f64| {
            let im = dynamics::flower_map(a, b, geom.mu);
            [im.f1, im.f2]
        };
        let (a, b, c, d) = (f(pu + h, pv), f(pu - h, pv), f(pu, pv + h), f(pu, pv - h));
        let jac = ((a[0] - b[0]) * (c[1] - d[1]) - (c[0] - d[0]) * (a[1] - b[1])) / (4.0 * h * h);
        worst = worst.max((jac.abs() - PI / geom.mu).abs());
    }
    out.push(ensure(worst < 1e-6, "flower Jacobian is pi / mu")?);
    let pts = dynamics::flower(geom, 500)?;
    let rd = (geom.disc as f64).sqrt();
    let on_circle = pts.iter().all(|p| (p.f1.hypot(p.f2) - (p.qvalue as f64 / rd).sqrt()).abs() < 1e-9);
    out.push(ensure(on_circle, "flower points lie on circles of radius sqrt(Q / sqrt D)")?);
    let a = dynamics::flower_map(1.7, 0.4, geom.mu);
    let b = dynamics::flower_map(1.7 * geom.lambda, 0.4 / geom.lambda, geom.mu);
    out.push(ensure((a.f1 - b.f1).abs() < 1e-12 && (a.f2 - b.f2).abs() < 1e-12, "flower map is constant on A* orbits")?);
    let c = cat()?;
    let fl = dynamics::flower(&c, 3600)?;
    let t = dynamics::monodromy_transport(&c, &fl, &LoopSpec { center: [0.0, 0.0], radius: 25.0, counterclockwise: true })?;
    out.push(ensure(t.matrix == [[2, 1], [1, 1]], "transport recovers the cat map")?);
    Ok(out)
}

fn geodesic(geom: &Geometry) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let pts = [
        PhasePoint { u: 0.1, v: -0.2, z: 0.15, pu: 0.8, pv: 0.6, pz: 0.3 },
        PhasePoint { u: 0.0, v: 0.5, z: -0.7, pu: -1.3, pv: 0.2, pz: -0.4 },
    ];
    let deck = pts.iter().all(|p| {
        let (a, b) = (dynamics::hamiltonian(p, geom), dynamics::hamiltonian(&p.deck(geom.lambda), geom));
        (a - b).abs() < 1e-12 * a.max(1.0)
    });
    out.push(ensure(deck, "Hamiltonian is deck invariant")?);
    for p in &pts {
        let tr = dynamics::integrate(p, geom, 20.0, 1e-3)?;
        out.push(ensure(tr.energy_drift < 1e-8, "energy drift below 1e-8")?);
        let (lo, hi) = dynamics::turning_points(p.pu, p.pv, dynamics::hamiltonian(p, geom), geom)?;
        let (zmin, zmax) = tr.z_extrema();
        out.push(ensure((zmin - lo).abs() < 1e-6 && (zmax - hi).abs() < 1e-6, "height extrema match the caustics")?);
    }
    let fam = dynamics::critical_families(geom, 0.3);
    let still = fam.iter().all(|p| {
        dynamics::integrate(p, geom, 2.0, 1e-2).is_ok_and(|tr| tr.points.iter().all(|q| (q.z - p.z).abs() < 1e-10))
    });
    out.push(ensure(still, "critical families are relative equilibria")?);
    Ok(out)
}

fn field(geom: &Geometry) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let a = *geom.gluing.matrix();
    let phi = AveragedEigenfunction::new(geom, [1, 0], 2, 1e-8)?;
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let w = [i as f64 / 10.0, j as f64 / 10.0 - 0.5];
            let z = (i + j) as f64 / 10.0 - 1.0;
            worst = worst.max((phi.eval(a.apply_f64(w), z + 1.0)? - phi.eval(w, z)?).norm());
        }
    }
    out.push(ensure(worst < 1e-7, "averaged eigenfunction is invariant under the gluing")?);
    let triv = AveragedEigenfunction::new(geom, [0, 0], 2, 1e-8)?;
    let v = triv.eval([0.2, 0.3], 0.1)?;
    out.push(ensure((v.re - (0.4 * PI).cos()).abs() < 1e-14 && (v.im - (0.4 * PI).sin()).abs() < 1e-14, "trivial family is a plane wave")?);
    Ok(out)
}
