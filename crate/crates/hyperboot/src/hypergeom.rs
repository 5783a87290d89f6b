//! Gauss hypergeometric series `₂F₁(s, 1−s; 1; z)` through `λ = s(1−s)` only, Pochhammer
//! ladders, and numeric checks of the t-block and crossing identities.
//!
//! High-precision work uses binary fixed point on `BigInt` with a tracked rounding bound;
//! exact rational inputs (λ, z) enter each step exactly and only the running terms are
//! rounded.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, One, Signed, Zero};
use serde::Serialize;

use crate::indexset::{Index, SpectralScalar};
use crate::spectrum::{Amplitude, CandidateSpectrum};
use crate::{qi, Complex, Error, Rational, Result};

/// Exact complex rational.
pub type ComplexQ = num_complex::Complex<Rational>;

/// Rising factorial `(q)_n = q (q+1) ⋯ (q+n−1)`, `(q)_0 = 1`.
pub fn pochhammer<T: Num + Clone + FromPrimitive>(q: &T, n: u32) -> T {
    let mut out = T::one();
    for m in 0..n {
        out = out * (q.clone() + T::from_u32(m).expect("small integer"));
    }
    out
}

/// `(s)_n (1−s)_n = Π_{m<n} (λ + m(m+1))` for `s(1−s) = λ`.
pub fn pochhammer_pair<T: Num + Clone + FromPrimitive>(lambda: &T, n: u32) -> T {
    let mut out = T::one();
    for m in 0..n as u64 {
        out = out * (lambda.clone() + T::from_u64(m * (m + 1)).expect("small integer"));
    }
    out
}

/// `|C_{ī i^{+n}}^{(r,n)}|² / |C_{ī i}^{(r,0)}|² = (s)_n(1−s)_n / (n! (2k)_n)`.
pub fn weyl_ladder_ratio(n: u32, k: u32, lambda: f64) -> f64 {
    let mut out = 1.0;
    for m in 0..n as u64 {
        out *= (lambda + (m * (m + 1)) as f64) / ((m + 1) as f64 * (2 * k as u64 + m) as f64);
    }
    out
}

/// Exact form of [`weyl_ladder_ratio`].
pub fn weyl_ladder_ratio_exact(n: u32, k: u32, lambda: &Rational) -> Rational {
    let den = pochhammer(&qi(1), n) * pochhammer(&qi(2 * k as i64), n);
    pochhammer_pair(lambda, n) / den
}

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Precision {
    pub digits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Self { digits: 50 }
    }
}

impl Precision {
    fn bits(&self) -> u64 {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as u64 + 32
    }

    /// `10^{−digits}`.
    pub fn epsilon(&self) -> f64 {
        10f64.powi(-(self.digits as i32))
    }
}

/// A series value with its certified (or, where stated, estimated) error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesEvaluation {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex,
    /// Real and imaginary parts to the working precision.
    pub re: String,
    pub im: String,
    pub terms_used: u64,
    /// Bound on `|true value − computed value|`, truncation plus rounding.
    pub tail_estimate: f64,
    #[serde(skip)]
    fixed: FixedComplex,
}

fn ser_complex<S: serde::Serializer>(z: &Complex, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Complex fixed-point number `(re + i im) / 2^bits`.
#[derive(Clone, Debug, PartialEq)]
struct FixedComplex {
    re: BigInt,
    im: BigInt,
    bits: u64,
}

fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    // Nearest integer to n/d for d > 0.
    let two = BigInt::from(2);
    (n * &two + d).div_floor(&(d * &two))
}

impl FixedComplex {
    fn zero(bits: u64) -> Self {
        Self { re: BigInt::zero(), im: BigInt::zero(), bits }
    }

    fn from_q(z: &ComplexQ, bits: u64) -> Self {
        let scale = BigInt::one() << bits as usize;
        let conv = |x: &Rational| round_div(&(x.numer() * &scale), x.denom());
        Self { re: conv(&z.re), im: conv(&z.im), bits }
    }

    /// `self · z`, rounded to nearest in each component (error ≤ 1/2 ulp each).
    fn mul_q(&self, z: &ComplexQ) -> Self {
        let d = z.re.denom().lcm(z.im.denom());
        let a = z.re.numer() * (&d / z.re.denom());
        let b = z.im.numer() * (&d / z.im.denom());
        let re = &self.re * &a - &self.im * &b;
        let im = &self.re * &b + &self.im * &a;
        Self { re: round_div(&re, &d), im: round_div(&im, &d), bits: self.bits }
    }

    fn add(&self, o: &Self) -> Self {
        Self { re: &self.re + &o.re, im: &self.im + &o.im, bits: self.bits }
    }

    fn sub(&self, o: &Self) -> Self {
        Self { re: &self.re - &o.re, im: &self.im - &o.im, bits: self.bits }
    }

    fn to_complex(&self) -> Complex {
        let conv = |x: &BigInt| crate::to_f64(&Rational::new(x.clone(), BigInt::one() << self.bits as usize));
        Complex::new(conv(&self.re), conv(&self.im))
    }

    fn norm(&self) -> f64 {
        self.to_complex().norm()
    }

    fn decimal(x: &BigInt, bits: u64, digits: u32) -> String {
        let scaled = round_div(&(x * BigInt::from(10).pow(digits)), &(BigInt::one() << bits as usize));
        let neg = scaled.is_negative();
        let s = scaled.abs().to_string();
        let d = digits as usize;
        let padded = if s.len() <= d { format!("{}{s}", "0".repeat(d + 1 - s.len())) } else { s };
        let (int, frac) = padded.split_at(padded.len() - d);
        format!("{}{int}.{frac}", if neg { "-" } else { "" })
    }
}

fn ulp(bits: u64) -> f64 {
    2f64.powi(-(bits as i32))
}

fn complex_q_norm(z: &ComplexQ) -> f64 {
    Complex::new(crate::to_f64(&z.re), crate::to_f64(&z.im)).norm()
}

/// Exact rational image of a float complex number.
pub fn complex_q(z: Complex) -> Result<ComplexQ> {
    let conv = |x: f64| Rational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite value {x}")));
    Ok(ComplexQ::new(conv(z.re)?, conv(z.im)?))
}

/// `₂F₁(s, 1−s; 1; z) = Σ_n Π_{m<n}(λ + m(m+1)) / n!² · zⁿ` to relative precision
/// `10^{−digits}`. Once `n ≥ λ` every term ratio is at most `|z|`, so the tail after the
/// last kept term `t` is at most `|t| |z| / (1 − |z|)`; the reported bound adds the
/// propagated rounding error.
pub fn f21(lambda: &Rational, z: &ComplexQ, prec: Precision) -> Result<SeriesEvaluation> {
    if lambda.is_negative() {
        return Err(Error::Domain("f21 needs λ ≥ 0".into()));
    }
    let zabs = complex_q_norm(z);
    if zabs >= 1.0 {
        return Err(Error::Domain(format!("f21 needs |z| < 1, got |z| = {zabs}")));
    }
    let bits = prec.bits();
    let u = ulp(bits);
    let lam_f = crate::to_f64(lambda);
    let mut term = FixedComplex::from_q(&ComplexQ::new(qi(1), qi(0)), bits);
    let mut sum = term.clone();
    let mut term_err = 0.0f64;
    let mut sum_err = 0.0f64;
    let mut n: u64 = 0;
    loop {
        let n1 = (n + 1) as i64;
        let ratio = (lambda + qi((n * (n + 1)) as i64)) / qi(n1 * n1);
        let step = z * ComplexQ::new(ratio.clone(), Rational::zero());
        term = term.mul_q(&step);
        // Multiplying by zero is exact; every other step rounds by at most one ulp.
        let rounding = if step.is_zero() { 0.0 } else { u };
        term_err = term_err * zabs * crate::to_f64(&ratio) + rounding;
        sum = sum.add(&term);
        sum_err += term_err;
        n += 1;
        if term_err == 0.0 && term.re.is_zero() && term.im.is_zero() {
            return Ok(evaluation(sum, n, sum_err, prec));
        }
        if (n as f64) >= lam_f {
            let t = term.norm() + term_err;
            let tail = t * zabs / (1.0 - zabs);
            let target = prec.epsilon() * sum.norm().max(1e-300) / 2.0;
            if tail < target || term.re.is_zero() && term.im.is_zero() {
                return Ok(evaluation(sum, n + 1, tail + sum_err, prec));
            }
        }
    }
}

fn evaluation(sum: FixedComplex, terms: u64, err: f64, prec: Precision) -> SeriesEvaluation {
    SeriesEvaluation {
        value: sum.to_complex(),
        re: FixedComplex::decimal(&sum.re, sum.bits, prec.digits),
        im: FixedComplex::decimal(&sum.im, sum.bits, prec.digits),
        terms_used: terms,
        tail_estimate: err,
        fixed: sum,
    }
}

/// Double-precision `₂F₁(s, 1−s; 1; z)` for real `z ∈ [0, 1)`; all terms are positive,
/// so the relative rounding error is a small multiple of the term count.
pub fn f21_real(lambda: f64, z: f64) -> Result<(f64, u64)> {
    if !(0.0..1.0).contains(&z) || lambda < 0.0 {
        return Err(Error::Domain(format!("f21_real needs λ ≥ 0 and z ∈ [0,1), got λ = {lambda}, z = {z}")));
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut n = 0u64;
    loop {
        let n1 = (n + 1) as f64;
        term *= z * (lambda + (n * (n + 1)) as f64) / (n1 * n1);
        sum += term;
        n += 1;
        if n as f64 >= lambda && term * z / (1.0 - z) < f64::EPSILON * sum {
            return Ok((sum, n + 1));
        }
    }
}

/// Exact values `B_{k,0..=n_max}(λ)`.
pub fn b_values(k: u32, n_max: u32, lambda: &Rational) -> Vec<Rational> {
    let kk = k as i64;
    let mut out = vec![qi(1), lambda / qi(2 * kk) - qi(1)];
    for n in 1..n_max as i64 {
        let m = n + kk;
        let a = lambda + qi(2 * kk * (kk - 1) - 2 * m * m);
        let b = qi(m * (m - 1) - kk * (kk - 1));
        let c = qi(m * (m + 1) - kk * (kk - 1));
        let next = (a * &out[n as usize] - b * &out[n as usize - 1]) / c;
        out.push(next);
    }
    out.truncate(n_max as usize + 1);
    out
}

/// Outcome of a t-block check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TBlockReport {
    pub k: u32,
    pub lambda: f64,
    #[serde(serialize_with = "ser_complex")]
    pub z: Complex,
    pub lhs: SeriesEvaluation,
    pub rhs: SeriesEvaluation,
    pub residual: f64,
}

/// Compares `Σ_n (−1)^n (2k)_n / n! · B_{k,n}(λ) zⁿ` with
/// `(1−z)^{−2k} ₂F₁(s, 1−s; 1; z/(z−1))`, each side evaluated independently.
///
/// The left tail is estimated from the ratio of the last two kept terms (no rigorous
/// bound is claimed for it); the right side carries the certified bound of [`f21`].
pub fn verify_tblock(k: u32, lambda: &Rational, z: &ComplexQ, prec: Precision) -> Result<TBlockReport> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let zabs = complex_q_norm(z);
    if zabs >= 0.5 {
        return Err(Error::Domain(format!("verify_tblock needs |z| < 1/2, got {zabs}")));
    }
    let bits = prec.bits();
    let u = ulp(bits);

    // Left side: exact rational coefficients, z-powers in fixed point.
    let mut zpow = FixedComplex::from_q(&ComplexQ::new(qi(1), qi(0)), bits);
    let mut sum = FixedComplex::zero(bits);
    let mut err = 0.0f64;
    let mut pow_err = 0.0f64;
    let mut coef = qi(1); // (−1)^n (2k)_n / n!
    let mut b = vec![qi(1), lambda / qi(2 * k as i64) - qi(1)];
    let mut last = [f64::INFINITY; 2];
    let mut n: u64 = 0;
    let tail = loop {
        let term = zpow.mul_q(&ComplexQ::new(&coef * &b[0], Rational::zero()));
        let bmag = crate::to_f64(&(&coef * &b[0])).abs();
        err += pow_err * bmag + u;
        sum = sum.add(&term);
        let mag = term.norm();
        last = [last[1], mag];
        // advance
        let kk = k as i64;
        let m = n as i64 + kk;
        let next_b = (lambda + qi(2 * kk * (kk - 1) - 2 * (m + 1) * (m + 1))) * &b[1] - qi((m + 1) * m - kk * (kk - 1)) * &b[0];
        let next_b = next_b / qi((m + 1) * (m + 2) - kk * (kk - 1));
        b = vec![b[1].clone(), next_b];
        coef = -coef * qi(2 * kk + n as i64) / qi(n as i64 + 1);
        zpow = zpow.mul_q(z);
        pow_err = pow_err * zabs + u;
        n += 1;
        let target = prec.epsilon() * sum.norm().max(1.0) / 2.0;
        if n > 8 && last[0] < target && last[1] < target {
            let r = if last[0] > 0.0 { (last[1] / last[0]).min(0.999) } else { zabs };
            break last[1] * r / (1.0 - r);
        }
        if n > 100_000 {
            return Err(Error::Domain("t-block series did not converge".into()));
        }
    };
    let lhs = evaluation(sum, n, tail + err, prec);

    // Right side.
    let one = ComplexQ::new(qi(1), qi(0));
    let w = z / (z - &one);
    let f = f21(lambda, &w, prec)?;
    let mut pref = one.clone();
    let inv = &one / (&one - z);
    for _ in 0..2 * k {
        pref = pref * &inv;
    }
    let rhs_fixed = f.fixed.mul_q(&pref);
    let rhs_err = f.tail_estimate * complex_q_norm(&pref) + u;
    let rhs = evaluation(rhs_fixed, f.terms_used, rhs_err, prec);
    let residual = lhs.fixed.sub(&rhs.fixed).norm();
    Ok(TBlockReport {
        k,
        lambda: crate::to_f64(lambda),
        z: Complex::new(crate::to_f64(&z.re), crate::to_f64(&z.im)),
        lhs,
        rhs,
        residual,
    })
}

/// One z-point of a crossing check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingPoint {
    #[serde(serialize_with = "ser_complex")]
    pub z: Complex,
    #[serde(serialize_with = "ser_complex")]
    pub lhs: Complex,
    #[serde(serialize_with = "ser_complex")]
    pub rhs: Complex,
    pub lhs_abs: f64,
    pub rhs_abs: f64,
    pub residual: f64,
}

/// Truncated comparison of `Σ_r F(λ_r, z) |C_{i ī}^{(r,0)}|²` with
/// `(1−z)^{−2k} Σ_r F(λ_r, z/(z−1)) |C_{i ī}^{(r,0)}|²` for `i = (−ρ, k_ρ)`, summed over
/// `0 ≤ r ≤ r1`. The residual is a diagnostic: equality is expected only for genuine
/// orbifold data.
pub fn check_kmp_crossing<A: Amplitude>(spec: &CandidateSpectrum<A>, rho: u32, zs: &[ComplexQ], prec: Precision) -> Result<Vec<CrossingPoint>> {
    let ctx = spec.ctx();
    let k = ctx.holomorphic.weight(rho as usize)? as i64;
    let i = Index::new(-(rho as i64), k);
    let mut weights = Vec::new();
    for r in 0..=spec.window().r1 as i64 {
        let c = spec.get(i, i.bar(), Index::new(r, 0)).to_complex();
        let w = c.norm_sqr();
        if w != 0.0 {
            let lam = ctx.lambda_of(r)?.to_f64();
            let lam = Rational::from_float(lam).ok_or_else(|| Error::Domain("non-finite eigenvalue".into()))?;
            weights.push((lam, w));
        }
    }
    crossing_points(&weights, k as u32, zs, prec)
}

/// [`check_kmp_crossing`] on explicit `(λ_r, |C|²)` pairs.
pub fn crossing_points(weights: &[(Rational, f64)], k: u32, zs: &[ComplexQ], prec: Precision) -> Result<Vec<CrossingPoint>> {
    let one = ComplexQ::new(qi(1), qi(0));
    let mut out = Vec::new();
    for z in zs {
        if complex_q_norm(z) >= 0.5 {
            return Err(Error::Domain("crossing checks need |z| < 1/2".into()));
        }
        let w = z / (z - &one);
        let mut pref = Complex::new(1.0, 0.0);
        let inv = Complex::new(1.0, 0.0) / (Complex::new(1.0, 0.0) - Complex::new(crate::to_f64(&z.re), crate::to_f64(&z.im)));
        for _ in 0..2 * k {
            pref *= inv;
        }
        let (mut lhs, mut rhs) = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
        let (mut la, mut ra) = (0.0, 0.0);
        for (lam, c2) in weights {
            let a = f21(lam, z, prec)?.value * *c2;
            let b = f21(lam, &w, prec)?.value * pref * *c2;
            la += a.norm();
            ra += b.norm();
            lhs += a;
            rhs += b;
        }
        out.push(CrossingPoint {
            z: Complex::new(crate::to_f64(&z.re), crate::to_f64(&z.im)),
            lhs,
            rhs,
            lhs_abs: la,
            rhs_abs: ra,
            residual: (lhs - rhs).norm(),
        });
    }
    Ok(out)
}

/// One λ of the growth check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticPoint {
    pub lambda: f64,
    pub log_f21: f64,
    /// `log ₂F₁ / √λ`.
    pub exponent: f64,
    pub passes: bool,
    pub terms_used: u64,
}

/// Measures `log ₂F₁(s, 1−s; 1; z) / √λ` and compares it with `π − δ`.
pub fn check_asymptotic(lambdas: &[f64], z: f64, delta: f64) -> Result<Vec<AsymptoticPoint>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let (v, terms) = f21_real(lambda, z)?;
            let exponent = v.ln() / lambda.sqrt();
            Ok(AsymptoticPoint {
                lambda,
                log_f21: v.ln(),
                exponent,
                passes: exponent >= std::f64::consts::PI - delta,
                terms_used: terms,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    fn cq(re: Rational, im: Rational) -> ComplexQ {
        ComplexQ::new(re, im)
    }

    #[test]
    fn pochhammer_basics() {
        assert_eq!(pochhammer(&2i64, 3), 24);
        assert_eq!(pochhammer(&7i64, 0), 1);
        assert_eq!(pochhammer_pair(&qi(6), 2), qi(6) * qi(8));
    }

    #[test]
    fn ladder_ratio_small_cases() {
        assert_eq!(weyl_ladder_ratio(0, 3, 5.0), 1.0);
        assert!((weyl_ladder_ratio(1, 3, 5.0) - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(weyl_ladder_ratio_exact(1, 2, &qi(8)), qi(2));
    }

    #[test]
    fn f21_trivial_points() {
        let p = Precision::default();
        let v = f21(&q(7, 3), &cq(qi(0), qi(0)), p).unwrap();
        assert_eq!(v.value, Complex::new(1.0, 0.0));
        assert_eq!(v.tail_estimate, 0.0);
        let v = f21(&qi(0), &cq(q(1, 3), q(1, 5)), p).unwrap();
        assert_eq!(v.value, Complex::new(1.0, 0.0));
        assert_eq!(v.tail_estimate, 0.0);
        assert!(f21(&qi(1), &cq(qi(1), qi(0)), p).is_err());
    }

    #[test]
    fn f21_matches_double_precision() {
        // Against the independent double-precision evaluation.
        let v = f21(&q(23, 2), &cq(q(3, 10), qi(0)), Precision { digits: 30 }).unwrap();
        let (w, _) = f21_real(11.5, 0.3).unwrap();
        assert!((v.value.re - w).abs() < 1e-13 * w);
        assert!(v.tail_estimate < 1e-29 * w);
    }

    #[test]
    fn tblock_small_grid() {
        let p = Precision { digits: 30 };
        for (k, lam, z) in [(2u32, qi(16), cq(q(3, 10), qi(0))), (1, qi(0), cq(q(1, 4), qi(0))), (3, q(11, 2), cq(q(-1, 4), q(1, 5)))] {
            let r = verify_tblock(k, &lam, &z, p).unwrap();
            assert!(r.residual < 1e-25, "{k} {lam} {}", r.residual);
        }
        let r = verify_tblock(2, &qi(3), &cq(qi(0), qi(0)), p).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn asymptotic_trend() {
        let pts = check_asymptotic(&[400.0, 900.0, 1600.0], 0.99, 1.0).unwrap();
        assert!(pts.iter().all(|p| p.passes));
        assert!(pts.windows(2).all(|w| w[0].exponent < w[1].exponent));
    }
}
