//! Indefinite binary quadratic forms: Pell units, automorphs, class numbers and
//! representation counts.
//!
//! All arithmetic is exact. Intermediate values use `i128` with checked
//! operations; anything that would overflow is reported as [`Error::Overflow`].

use crate::error::{Error, Result};
use crate::intmat::IntMat2;
use crate::surd;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

/// The form `a x^2 + b x y + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

fn ovf(what: &str) -> Error {
    Error::Overflow(what.to_string())
}

pub(crate) fn isqrt(n: i128) -> i128 {
    if n < 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r > 0 && r.checked_mul(r).map_or(true, |v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

pub(crate) fn is_square(n: i128) -> bool {
    n >= 0 && {
        let r = isqrt(n);
        r * r == n
    }
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl QuadraticForm {
    /// An indefinite form with non-square discriminant.
    pub fn new(a: i128, b: i128, c: i128) -> Result<Self> {
        let q = QuadraticForm { a, b, c };
        let d = q.try_discriminant()?;
        if d <= 0 {
            return Err(Error::Validation(format!("{q} is not indefinite (d = {d})")));
        }
        if is_square(d) {
            return Err(Error::Validation(format!("{q} has square discriminant {d}")));
        }
        Ok(q)
    }

    fn try_discriminant(&self) -> Result<i128> {
        let b2 = self.b.checked_mul(self.b).ok_or_else(|| ovf("discriminant"))?;
        let ac4 = self
            .a
            .checked_mul(self.c)
            .and_then(|v| v.checked_mul(4))
            .ok_or_else(|| ovf("discriminant"))?;
        b2.checked_sub(ac4).ok_or_else(|| ovf("discriminant"))
    }

    pub fn discriminant(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i128, y: i128) -> Result<i128> {
        let t1 = self.a.checked_mul(x).and_then(|v| v.checked_mul(x));
        let t2 = self.b.checked_mul(x).and_then(|v| v.checked_mul(y));
        let t3 = self.c.checked_mul(y).and_then(|v| v.checked_mul(y));
        match (t1, t2, t3) {
            (Some(t1), Some(t2), Some(t3)) => t1
                .checked_add(t2)
                .and_then(|v| v.checked_add(t3))
                .ok_or_else(|| ovf("form evaluation")),
            _ => Err(ovf("form evaluation")),
        }
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.a as f64 * x * x + self.b as f64 * x * y + self.c as f64 * y * y
    }

    pub fn content(&self) -> i128 {
        gcd(gcd(self.a, self.b), self.c)
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    pub fn neg(&self) -> Self {
        QuadraticForm { a: -self.a, b: -self.b, c: -self.c }
    }

    /// True when `m` maps the form to itself: `Q(m v) = Q(v)`.
    pub fn is_preserved_by(&self, m: &IntMat2) -> Result<bool> {
        for v in [[1, 0], [0, 1], [1, 1]] {
            let w = m.apply(v)?;
            if self.eval(w[0], w[1])? != self.eval(v[0], v[1])? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// The form `(-a21, a11 - a22, a12)` preserved by a hyperbolic matrix of
/// determinant one.
pub fn form_from_matrix(m: &IntMat2) -> Result<QuadraticForm> {
    if m.det() != 1 {
        return Err(Error::Validation(format!("{m} does not have determinant 1")));
    }
    if m.trace().abs() <= 2 {
        return Err(Error::Validation(format!("{m} is not hyperbolic (|trace| <= 2)")));
    }
    let q = QuadraticForm { a: -m.m[1][0], b: m.m[0][0] - m.m[1][1], c: m.m[0][1] };
    QuadraticForm::new(q.a, q.b, q.c)
}

/// Divides out the content and fixes the sign so the first nonzero coefficient
/// is positive. Returns the primitive form and the signed factor `l` with
/// `q = l * primitive`.
pub fn primitive_part(q: &QuadraticForm) -> (QuadraticForm, i128) {
    let g = q.content().max(1);
    let lead = [q.a, q.b, q.c].into_iter().find(|&v| v != 0).unwrap_or(1);
    let l = if lead < 0 { -g } else { g };
    (QuadraticForm { a: q.a / l, b: q.b / l, c: q.c / l }, l)
}

/// Kronecker symbol `(d / k)`.
pub fn kronecker(d: i64, k: u64) -> i32 {
    if k == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut a = d as i128;
    let mut n = k as i128;
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut sign = 1;
    let v = n.trailing_zeros();
    n >>= v;
    if v % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
        sign = -sign;
    }
    a = a.rem_euclid(n);
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 && matches!(n % 8, 3 | 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        (a, n) = (n % a, a);
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Smallest positive solution of `X^2 - d Y^2 = 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PellSolution {
    pub d: i128,
    pub x0: i128,
    pub y0: i128,
}

impl PellSolution {
    /// `(X_n, Y_n)` with `(X_n + Y_n sqrt d)/2 = ((X_0 + Y_0 sqrt d)/2)^n`.
    pub fn power(&self, n: u32) -> Result<(i128, i128)> {
        let (mut x, mut y) = (2i128, 0i128);
        for _ in 0..n {
            let nx = x
                .checked_mul(self.x0)
                .zip(y.checked_mul(self.y0).and_then(|v| v.checked_mul(self.d)))
                .and_then(|(p, q)| p.checked_add(q))
                .ok_or_else(|| ovf("Pell power"))?;
            let ny = x
                .checked_mul(self.y0)
                .zip(y.checked_mul(self.x0))
                .and_then(|(p, q)| p.checked_add(q))
                .ok_or_else(|| ovf("Pell power"))?;
            (x, y) = (nx / 2, ny / 2);
        }
        Ok((x, y))
    }

    /// The unit `(X_0 + Y_0 sqrt d)/2 > 1`.
    pub fn unit(&self) -> f64 {
        (self.x0 as f64 + self.y0 as f64 * (self.d as f64).sqrt()) / 2.0
    }
}

fn validate_discriminant(d: i128) -> Result<()> {
    if d <= 0 {
        return Err(Error::Validation(format!("discriminant {d} is not positive")));
    }
    if is_square(d) {
        return Err(Error::Validation(format!("discriminant {d} is a square")));
    }
    if d.rem_euclid(4) > 1 {
        return Err(Error::Validation(format!("discriminant {d} is not 0 or 1 mod 4")));
    }
    Ok(())
}

/// Fundamental solution of `X^2 - d Y^2 = 4` via the continued fraction of
/// `sqrt d`. Every reduced solution of norm 4 or 1 appears as a convergent once
/// `d >= 17`; the four smaller discriminants are searched directly.
pub fn pell_fundamental(d: i128) -> Result<PellSolution> {
    validate_discriminant(d)?;
    if d < 17 {
        for y in 1i128..1000 {
            let x2 = 4 + d * y * y;
            if is_square(x2) {
                return Ok(PellSolution { d, x0: isqrt(x2), y0: y });
            }
        }
        return Err(Error::Inconsistency(format!("no Pell solution found for d = {d}")));
    }
    let a0 = isqrt(d);
    let (mut m, mut den, mut a) = (0i128, 1i128, a0);
    let (mut h1, mut h2) = (1i128, 0i128);
    let (mut k1, mut k2) = (0i128, 1i128);
    let mut best: Option<(i128, i128)> = None;
    for _ in 0..100_000 {
        let h = a
            .checked_mul(h1)
            .and_then(|v| v.checked_add(h2))
            .ok_or_else(|| ovf("Pell convergent"))?;
        let k = a
            .checked_mul(k1)
            .and_then(|v| v.checked_add(k2))
            .ok_or_else(|| ovf("Pell convergent"))?;
        if let Some((_, by)) = best {
            if k >= by {
                break;
            }
        }
        let norm = h
            .checked_mul(h)
            .zip(k.checked_mul(k).and_then(|v| v.checked_mul(d)))
            .map(|(p, q)| p - q)
            .ok_or_else(|| ovf("Pell norm"))?;
        let candidate = match norm {
            4 => Some((h, k)),
            1 => Some((
                h.checked_mul(2).ok_or_else(|| ovf("Pell solution"))?,
                k.checked_mul(2).ok_or_else(|| ovf("Pell solution"))?,
            )),
            _ => None,
        };
        if let Some((x, y)) = candidate {
            if best.map_or(true, |(_, by)| y < by) {
                best = Some((x, y));
            }
        }
        (h2, h1, k2, k1) = (h1, h, k1, k);
        m = den * a - m;
        den = (d - m * m) / den;
        a = (a0 + m) / den;
    }
    best.map(|(x0, y0)| PellSolution { d, x0, y0 })
        .ok_or_else(|| Error::Inconsistency(format!("continued fraction of sqrt {d} gave no unit")))
}

/// Generator of the automorph group of a primitive form, modulo `-I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automorph {
    pub matrix: IntMat2,
    pub form: QuadraticForm,
}

impl Automorph {
    /// Eigenvalue larger than one, `(t + |u| sqrt d)/2`.
    pub fn unit(&self) -> f64 {
        let t = self.matrix.trace() as f64;
        (t.abs() + (t * t - 4.0).sqrt()) / 2.0
    }
}

/// The automorph built from the fundamental Pell solution. Its lower-left
/// entry has the sign of `a`, which fixes the orientation.
pub fn automorph_generator(q: &QuadraticForm) -> Result<Automorph> {
    if !q.is_primitive() {
        return Err(Error::Precondition(format!("{q} is not primitive")));
    }
    let d = q.try_discriminant()?;
    let p = pell_fundamental(d)?;
    let (x0, y0) = (p.x0, p.y0);
    let by = q.b.checked_mul(y0).ok_or_else(|| ovf("automorph"))?;
    if (x0 - by).rem_euclid(2) != 0 {
        return Err(Error::Inconsistency(format!("X0 - b Y0 is odd for {q}")));
    }
    let m = IntMat2::new(
        (x0 - by) / 2,
        -q.c.checked_mul(y0).ok_or_else(|| ovf("automorph"))?,
        q.a.checked_mul(y0).ok_or_else(|| ovf("automorph"))?,
        (x0 + by) / 2,
    );
    if m.det() != 1 || !q.is_preserved_by(&m)? {
        return Err(Error::Inconsistency(format!("automorph {m} does not preserve {q}")));
    }
    Ok(Automorph { matrix: m, form: *q })
}

/// Primitivity data of a gluing matrix: content `l` of its form, the power
/// `r` with `A = A0^r`, and the generator `A0` (inverted if needed so the
/// exponent is positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Primitivity {
    pub l: i128,
    pub r: u32,
    pub generator: Automorph,
    pub primitive_form: QuadraticForm,
}

pub fn primitivity_index(a: &IntMat2) -> Result<Primitivity> {
    let q = form_from_matrix(a)?;
    let (qhat, l) = primitive_part(&q);
    let gen = automorph_generator(&qhat)?;
    let inv = gen.matrix.inverse_unimodular()?;
    let mut fwd = IntMat2::IDENTITY;
    let mut bwd = IntMat2::IDENTITY;
    for r in 1..=64u32 {
        fwd = match fwd.mul(&gen.matrix) {
            Ok(v) => v,
            Err(_) => break,
        };
        bwd = bwd.mul(&inv)?;
        if fwd == *a {
            return Ok(Primitivity { l: l.abs(), r, generator: gen, primitive_form: qhat });
        }
        if bwd == *a {
            let g = Automorph { matrix: inv, form: qhat };
            return Ok(Primitivity { l: l.abs(), r, generator: g, primitive_form: qhat });
        }
        if fwd.max_abs() > a.max_abs() {
            break;
        }
    }
    Err(Error::Inconsistency(format!("{a} is not a power of the automorph {}", gen.matrix)))
}

fn is_reduced(q: &QuadraticForm, d: i128) -> bool {
    let (a, b) = (q.a.abs(), q.b);
    b > 0 && b * b < d && {
        let lo = 2 * a + b;
        lo * lo > d
    } && {
        let hi = 2 * a - b;
        hi <= 0 || hi * hi < d
    }
}

/// All reduced primitive forms of discriminant `d`, sorted.
pub fn reduced_forms(d: i128) -> Result<Vec<QuadraticForm>> {
    validate_discriminant(d)?;
    if d > 1_000_000_000 {
        return Err(Error::Resource(format!("discriminant {d} too large to enumerate")));
    }
    let s = isqrt(d);
    let mut out = BTreeSet::new();
    let mut b = if d % 2 == 0 { 2 } else { 1 };
    while b <= s {
        let ac = (b * b - d) / 4;
        let n = ac.abs();
        let mut k = 1;
        while k * k <= n {
            if n % k == 0 {
                for a0 in [k, n / k] {
                    for a in [a0, -a0] {
                        let q = QuadraticForm { a, b, c: ac / a };
                        if q.is_primitive() && is_reduced(&q, d) {
                            out.insert(q);
                        }
                    }
                }
            }
            k += 1;
        }
        b += 2;
    }
    Ok(out.into_iter().collect())
}

/// Right neighbour in the cycle of reduced forms.
pub fn rho(q: &QuadraticForm) -> QuadraticForm {
    let d = q.discriminant();
    let s = isqrt(d);
    let m = 2 * q.c.abs();
    let b = s - (s + q.b).rem_euclid(m);
    QuadraticForm { a: q.c, b, c: (b * b - d) / (4 * q.c) }
}

/// Number of proper equivalence classes of primitive forms of discriminant `d`,
/// counted as the number of cycles of reduced forms.
pub fn class_number(d: i128) -> Result<u64> {
    let forms = reduced_forms(d)?;
    let mut seen = BTreeSet::new();
    let mut cycles = 0u64;
    for f in &forms {
        if seen.contains(f) {
            continue;
        }
        cycles += 1;
        let mut g = *f;
        loop {
            seen.insert(g);
            g = rho(&g);
            if !is_reduced(&g, d) {
                return Err(Error::Inconsistency(format!("rho left the reduced set at {g}")));
            }
            if g == *f {
                break;
            }
            if seen.len() > forms.len() {
                return Err(Error::Inconsistency("reduction cycle does not close".into()));
            }
        }
    }
    Ok(cycles)
}

/// Number of solutions of `Q(x, y) = n` modulo the group generated by the
/// automorph `m` and `-I`. Each candidate is tested exactly, including
/// membership in the fundamental domain.
pub fn rep_count_bruteforce(q: &QuadraticForm, n: i128, m: &IntMat2) -> Result<u64> {
    if n == 0 {
        return Err(Error::Validation("cannot count representations of 0".into()));
    }
    if !q.is_primitive() {
        return Err(Error::Precondition(format!("{q} is not primitive")));
    }
    if m.det() != 1 || m.trace().abs() <= 2 || !q.is_preserved_by(m)? {
        return Err(Error::Precondition(format!("{m} is not a hyperbolic automorph of {q}")));
    }
    let d = q.try_discriminant()?;
    // automorphs have the shape [[(t - b u)/2, -c u], [a u, (t + b u)/2]]
    let (t, u) = (m.trace().abs(), m.m[1][0] / q.a * m.trace().signum());
    let u = u.abs();
    let unit = (t as f64 + u as f64 * (d as f64).sqrt()) / 2.0;
    let an = q.a.checked_mul(n).ok_or_else(|| ovf("representation bound"))?.abs();
    // domain s <= phi < s * unit with phi(v) = (2 a x + b y + y sqrt d)/2
    let s = ((an as f64 / unit).sqrt().round() as i128).max(1);
    let sd = (d as f64).sqrt();
    let ymax = ((s as f64 * unit + an as f64 / s as f64) / sd).ceil() as i128 + 1;
    if ymax > 50_000_000 {
        return Err(Error::Resource(format!("representation search over |y| <= {ymax}")));
    }
    let four_an = q.a.checked_mul(n).and_then(|v| v.checked_mul(4)).ok_or_else(|| ovf("rep"))?;
    let mut count = 0u64;
    for y in -ymax..=ymax {
        let disc = d
            .checked_mul(y)
            .and_then(|v| v.checked_mul(y))
            .and_then(|v| v.checked_add(four_an))
            .ok_or_else(|| ovf("representation discriminant"))?;
        if !is_square(disc) {
            continue;
        }
        let r = isqrt(disc);
        let roots: &[i128] = if r == 0 { &[0] } else { &[r, -r] };
        for &root in roots {
            let num = -q.b * y + root;
            if num % (2 * q.a) != 0 {
                continue;
            }
            let x = num / (2 * q.a);
            let lin = 2 * q.a * x + q.b * y;
            let lower = surd::sign(lin - 2 * s, y, d)?;
            let upper = surd::sign(s * t - lin, s * u - y, d)?;
            if lower != Ordering::Less && upper == Ordering::Greater {
                debug_assert_eq!(q.eval(x, y)?, n);
                count += 1;
            }
        }
    }
    Ok(count)
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut k = 1u64;
    while k * k <= n {
        if n % k == 0 {
            small.push(k);
            if k * k != n {
                large.push(n / k);
            }
        }
        k += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `sum_{k | n} (d / k)`, the count of representations by the principal genus
/// when the class number is one. Requires `gcd(n, d) = 1`.
pub fn rep_count_formula(d: i64, n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::Validation("n must be positive".into()));
    }
    if gcd(d as i128, n as i128) != 1 {
        return Err(Error::Precondition(format!("gcd({n}, {d}) != 1")));
    }
    Ok(divisors(n).into_iter().map(|k| kronecker(d, k) as i64).sum())
}
