//! Recurrence-defined polynomial families in exact arithmetic: p_n, q_{k,n}, B_{k,n},
//! s_n, r_n, the combination R, the corrections p_{n,i,j} and s_{n,i,j}, plus the grid
//! certification of their sign laws and the transfer-matrix product check.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Num, One, Signed, Zero};
use serde::Serialize;

use crate::{q, qi, BiPoly, Error, Rational, Result, UniPoly};

fn memo<K, V, F>(cache: &'static OnceLock<Mutex<HashMap<K, V>>>, key: K, build: F) -> V
where
    K: std::hash::Hash + Eq + Clone,
    V: Clone,
    F: FnOnce() -> V,
{
    let m = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = m.lock().expect("memo lock").get(&key) {
        return v.clone();
    }
    // Built outside the lock; concurrent builders insert identical values.
    let v = build();
    m.lock().expect("memo lock").entry(key).or_insert_with(|| v.clone());
    v
}

fn lam() -> BiPoly {
    BiPoly::lambda()
}

fn mu() -> BiPoly {
    BiPoly::mu()
}

fn cst(c: Rational) -> BiPoly {
    BiPoly::constant(c)
}

/// Coefficients `(2λ − μ + 2n², (λ + n(n − 1))²)` of the p-recurrence at step `n`.
pub fn p_recurrence_coefficients(n: u32) -> (BiPoly, BiPoly) {
    let n = n as i64;
    let alpha = &(&lam().scale(&qi(2)) - &mu()) + &cst(qi(2 * n * n));
    let base = &lam() + &cst(qi(n * (n - 1)));
    (alpha, &base * &base)
}

/// Coefficients `(2(n+k)² − 2k(k−1) − μ, ((n+k)(n+k−1) − k(k−1))²)` of the
/// q-recurrence at step `n`, as polynomials in μ.
pub fn q_recurrence_coefficients(k: u32, n: u32) -> (UniPoly, UniPoly) {
    let (k, m) = (k as i64, (n + k) as i64);
    let alpha = UniPoly::new(vec![qi(2 * m * m - 2 * k * (k - 1)), qi(-1)]);
    let b = m * (m - 1) - k * (k - 1);
    (alpha, UniPoly::constant(qi(b * b)))
}

/// Substitutes a value for λ, leaving a polynomial in μ.
pub fn substitute_lambda(p: &BiPoly, lambda: &Rational) -> UniPoly {
    let deg = p.degree_mu().unwrap_or(0) as usize;
    let mut c = vec![Rational::zero(); deg + 1];
    for (&(a, b), v) in p.terms() {
        c[b as usize] += v * num_traits::pow(lambda.clone(), a as usize);
    }
    UniPoly::new(c)
}

/// `p_n(λ, μ)`: `p_0 = 1`, `p_1 = λ − μ/2`,
/// `p_{n+1} = (2λ − μ + 2n²) p_n − (λ + n(n−1))² p_{n−1}`.
pub fn p(n: u32) -> BiPoly {
    static CACHE: OnceLock<Mutex<HashMap<u32, BiPoly>>> = OnceLock::new();
    memo(&CACHE, n, || match n {
        0 => cst(qi(1)),
        1 => &lam() - &mu().scale(&q(1, 2)),
        _ => {
            let (a, b) = p_recurrence_coefficients(n - 1);
            &(&a * &p(n - 1)) - &(&b * &p(n - 2))
        }
    })
}

/// `q_{k,n}(μ)`: `q_0 = 1`, `q_1 = 2k − μ`, with the shifted p-recurrence.
pub fn q_poly(k: u32, n: u32) -> UniPoly {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), UniPoly>>> = OnceLock::new();
    memo(&CACHE, (k, n), || match n {
        0 => UniPoly::constant(qi(1)),
        1 => UniPoly::new(vec![qi(2 * k as i64), qi(-1)]),
        _ => {
            let (a, b) = q_recurrence_coefficients(k, n - 1);
            &(&a * &q_poly(k, n - 1)) - &(&b * &q_poly(k, n - 2))
        }
    })
}

/// `B_{k,n}(λ)`: `B_0 = 1`, `B_1 = λ/(2k) − 1`, and
/// `c_n B_{n+1} = (λ + 2k(k−1) − 2m²) B_n − (m(m−1) − k(k−1)) B_{n−1}` with `m = n + k`,
/// `c_n = m(m+1) − k(k−1)`.
pub fn b_poly(k: u32, n: u32) -> UniPoly {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), UniPoly>>> = OnceLock::new();
    assert!(k >= 1, "B_{{k,n}} needs k ≥ 1");
    memo(&CACHE, (k, n), || match n {
        0 => UniPoly::constant(qi(1)),
        1 => UniPoly::new(vec![qi(-1), q(1, 2 * k as i64)]),
        _ => {
            let (kk, m) = (k as i64, (n - 1 + k) as i64);
            let a = UniPoly::new(vec![qi(2 * kk * (kk - 1) - 2 * m * m), qi(1)]);
            let b = qi(m * (m - 1) - kk * (kk - 1));
            let c = qi(m * (m + 1) - kk * (kk - 1));
            let num = &(&a * &b_poly(k, n - 1)) - &b_poly(k, n - 2).scale(&b);
            num.scale(&c.recip())
        }
    })
}

/// `s_n = p_{n+1} − (λ + n(n+1)) p_n`.
pub fn s(n: u32) -> BiPoly {
    let nn = n as i64;
    &p(n + 1) - &(&(&lam() + &cst(qi(nn * (nn + 1)))) * &p(n))
}

/// `base(λ, μ) + 1_{μ ≥ 1} · gated(λ, μ) / μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseBivariate {
    pub base: BiPoly,
    pub gated: BiPoly,
}

impl PiecewiseBivariate {
    pub fn eval(&self, lambda: &Rational, mu: &Rational) -> Rational {
        let mut v = self.base.eval(lambda, mu);
        if *mu >= Rational::one() {
            v += self.gated.eval(lambda, mu) / mu;
        }
        v
    }

    pub fn eval_f64(&self, lambda: f64, mu: f64) -> f64 {
        let conv = |c: &Rational| crate::to_f64(c);
        let mut v = self.base.eval_with(&lambda, &mu, conv);
        if mu >= 1.0 {
            v += self.gated.eval_with(&lambda, &mu, conv) / mu;
        }
        v
    }

    /// The polynomial agreeing with `self` on `μ ≥ 1`, if the gated numerator is
    /// divisible by μ.
    pub fn on_mu_at_least_one(&self) -> Option<BiPoly> {
        if self.gated.terms().any(|(&(_, b), _)| b == 0) {
            return None;
        }
        let shifted = BiPoly::from_terms(self.gated.terms().map(|(&(a, b), c)| ((a, b - 1), c.clone())));
        Some(&self.base + &shifted)
    }
}

/// `r_n = 1_{μ≥1} μ^{−1} s_n² − p_n p_{n+1}`.
pub fn r(n: u32) -> PiecewiseBivariate {
    let sn = s(n);
    PiecewiseBivariate { base: (&p(n) * &p(n + 1)).scale(&qi(-1)), gated: &sn * &sn }
}

/// `R = Σ_{n=0}^{N} a_n λ^{2(N−n)} r_n` for nonnegative weights `a`.
pub fn r_combined(a: &[Rational]) -> Result<PiecewiseBivariate> {
    if a.is_empty() {
        return Err(Error::Domain("R needs at least one weight".into()));
    }
    if a.iter().any(Signed::is_negative) {
        return Err(Error::Domain("R weights must be nonnegative".into()));
    }
    let big_n = (a.len() - 1) as u32;
    let mut base = BiPoly::zero();
    let mut gated = BiPoly::zero();
    for (n, an) in a.iter().enumerate() {
        if an.is_zero() {
            continue;
        }
        let w = BiPoly::monomial(an.clone(), 2 * (big_n - n as u32), 0);
        let rn = r(n as u32);
        base = &base + &(&w * &rn.base);
        gated = &gated + &(&w * &rn.gated);
    }
    Ok(PiecewiseBivariate { base, gated })
}

/// `p_{n,i,j}(λ, μ)`; zero unless `i, j ≥ 0` and `i + j ≤ n`, with `p_{n,0,0} = p_n`.
pub fn p_correction(n: i64, i: i64, j: i64) -> BiPoly {
    static CACHE: OnceLock<Mutex<HashMap<(i64, i64, i64), BiPoly>>> = OnceLock::new();
    if n < 0 || i < 0 || j < 0 || i + j > n {
        return BiPoly::zero();
    }
    memo(&CACHE, (n, i, j), || match (n, i, j) {
        (0, 0, 0) => cst(qi(1)),
        (0, _, _) => BiPoly::zero(),
        (1, 0, 0) => p(1),
        (1, 1, 0) | (1, 0, 1) => cst(q(1, 2)),
        (1, _, _) => BiPoly::zero(),
        _ => {
            let m = n - 1;
            let (alpha, _) = p_recurrence_coefficients(m as u32);
            let c = &lam() + &cst(qi(m * (m - 1)));
            let c2 = &c * &c;
            let mut acc = &(&alpha * &p_correction(m, i, j)) - &(&c2 * &p_correction(m - 1, i, j));
            acc = &(&acc + &p_correction(m, i - 1, j)) + &p_correction(m, i, j - 1);
            let side = &p_correction(m - 1, i - 1, j) + &p_correction(m - 1, i, j - 1);
            acc = &acc - &(&c * &side);
            &acc - &p_correction(m - 1, i - 1, j - 1)
        }
    })
}

/// `s_{n,i,j} = p_{n+1,i,j} − (λ + n(n+1)) p_{n,i,j} − p_{n,i−1,j}`.
pub fn s_correction(n: i64, i: i64, j: i64) -> BiPoly {
    let c = &lam() + &cst(qi(n * (n + 1)));
    &(&p_correction(n + 1, i, j) - &(&c * &p_correction(n, i, j))) - &p_correction(n, i - 1, j)
}

/// Values `p_0..=p_{n_max}` at a point, by the same recurrence; generic over the scalar.
pub fn p_values<T: Num + Clone + FromPrimitive>(n_max: u32, lambda: &T, mu: &T) -> Vec<T> {
    let c = |x: i64| T::from_i64(x).expect("integer constant");
    let two = c(2);
    let mut out = vec![T::one()];
    if n_max == 0 {
        return out;
    }
    out.push(lambda.clone() - mu.clone() / two.clone());
    for n in 1..n_max as i64 {
        let alpha = two.clone() * lambda.clone() - mu.clone() + c(2 * n * n);
        let beta = lambda.clone() + c(n * (n - 1));
        let next = alpha * out[n as usize].clone() - beta.clone() * beta * out[n as usize - 1].clone();
        out.push(next);
    }
    out
}

/// Values `q_{k,0..=n_max}(μ)`; generic over the scalar.
pub fn q_values<T: Num + Clone + FromPrimitive>(k: u32, n_max: u32, mu: &T) -> Vec<T> {
    let c = |x: i64| T::from_i64(x).expect("integer constant");
    let k = k as i64;
    let mut out = vec![T::one()];
    if n_max == 0 {
        return out;
    }
    out.push(c(2 * k) - mu.clone());
    for n in 1..n_max as i64 {
        let m = n + k;
        let alpha = c(2 * m * m - 2 * k * (k - 1)) - mu.clone();
        let b = c(m * (m - 1) - k * (k - 1));
        let next = alpha * out[n as usize].clone() - b.clone() * b * out[n as usize - 1].clone();
        out.push(next);
    }
    out
}

/// Values of `p_{n,i,j}` for all `n ≤ n_max` at a point; `table[n][i][j]`, zero outside
/// `i + j ≤ n`.
pub fn p_correction_values<T: Num + Clone + FromPrimitive>(n_max: usize, lambda: &T, mu: &T) -> Vec<Vec<Vec<T>>> {
    let c = |x: i64| T::from_i64(x).expect("integer constant");
    let size = n_max + 1;
    let mut t: Vec<Vec<Vec<T>>> = vec![vec![vec![T::zero(); size + 1]; size + 1]; size];
    let get = |t: &Vec<Vec<Vec<T>>>, n: usize, i: i64, j: i64| -> T {
        if i < 0 || j < 0 || i as usize + j as usize > n {
            T::zero()
        } else {
            t[n][i as usize][j as usize].clone()
        }
    };
    t[0][0][0] = T::one();
    if n_max >= 1 {
        t[1][0][0] = lambda.clone() - mu.clone() / c(2);
        t[1][1][0] = T::one() / c(2);
        t[1][0][1] = T::one() / c(2);
    }
    for m in 1..n_max {
        let mi = m as i64;
        let alpha = c(2) * lambda.clone() - mu.clone() + c(2 * mi * mi);
        let cc = lambda.clone() + c(mi * (mi - 1));
        for i in 0..=(m + 1) as i64 {
            for j in 0..=(m as i64 + 1 - i) {
                let v = alpha.clone() * get(&t, m, i, j) - cc.clone() * cc.clone() * get(&t, m - 1, i, j)
                    + get(&t, m, i - 1, j)
                    + get(&t, m, i, j - 1)
                    - cc.clone() * (get(&t, m - 1, i - 1, j) + get(&t, m - 1, i, j - 1))
                    - get(&t, m - 1, i - 1, j - 1);
                t[m + 1][i as usize][j as usize] = v;
            }
        }
    }
    t
}

/// Which sign law to certify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `(−1)^n p_n(λ, μ) ≥ ½ (0.9 μ)^n` once `μ ≥ A(λ + n²)`.
    P,
    /// `(−1)^n q_{k,n}(μ) ≥ (0.9 μ)^n` once `μ ≥ A(k² + n²)`.
    Q,
}

/// Finite certification grid. `params` are λ values (p-family) or weights k (q-family).
#[derive(Clone, Debug, Serialize)]
pub struct SignGrid {
    pub n_max: u32,
    #[serde(serialize_with = "ser_rationals")]
    pub params: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub mu: Vec<Rational>,
}

impl SignGrid {
    /// μ values `round(10^{e·t/(count−1)})` for `t = 0..count`, deduplicated.
    pub fn log_mu(max_exponent: u32, count: usize) -> Vec<Rational> {
        let mut out: Vec<Rational> = (0..count)
            .map(|t| {
                let e = max_exponent as f64 * t as f64 / (count.max(2) - 1) as f64;
                qi(10f64.powf(e).round() as i64)
            })
            .collect();
        out.dedup();
        out
    }

    /// Default p-family grid: n ≤ 40, λ ∈ {0, 1, 2, 5, 10, 20, 50, 100}, 61 μ values up to 10⁵.
    pub fn default_p() -> Self {
        Self { n_max: 40, params: [0, 1, 2, 5, 10, 20, 50, 100].iter().map(|&x| qi(x)).collect(), mu: Self::log_mu(5, 61) }
    }

    /// Default q-family grid: n ≤ 40, k ≤ 10, 61 μ values up to 10⁵.
    pub fn default_q() -> Self {
        Self { n_max: 40, params: (1..=10).map(qi).collect(), mu: Self::log_mu(5, 61) }
    }
}

/// A grid-certified multiplier `A` for a sign law, with the grid it was certified on.
#[derive(Clone, Debug, Serialize)]
pub struct SignThreshold {
    pub family: Family,
    #[serde(serialize_with = "ser_rational")]
    pub a: Rational,
    pub grid: SignGrid,
    pub points: usize,
    pub failures: usize,
    /// Largest ratio `μ/(λ+n²)` (or `μ/(k²+n²)`) at which the law failed.
    #[serde(serialize_with = "ser_opt_rational")]
    pub max_failing_ratio: Option<Rational>,
}

pub(crate) fn ser_rational<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub(crate) fn ser_rationals<S: serde::Serializer>(x: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|v| v.to_string()))
}

pub(crate) fn ser_opt_rational<S: serde::Serializer>(x: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Finds the smallest ratio `A` among the grid's own ratios such that every grid point
/// with `μ ≥ A·scale` satisfies the sign law. Exact rational arithmetic throughout.
pub fn certify_sign_threshold(family: Family, grid: &SignGrid) -> Result<SignThreshold> {
    if grid.params.is_empty() || grid.mu.is_empty() {
        return Err(Error::Domain("sign-certification grid is empty".into()));
    }
    let nine_tenths = q(9, 10);
    let half = q(1, 2);
    // (ratio, passed) for every grid point with a positive scale.
    let mut outcomes: Vec<(Rational, bool)> = Vec::new();
    let mut unscaled_failure = false;
    for param in &grid.params {
        for mu in &grid.mu {
            let vals = match family {
                Family::P => p_values(grid.n_max, param, mu),
                Family::Q => {
                    let k = param.to_integer();
                    let k = u32::try_from(k).map_err(|_| Error::Domain("q-family weights must be positive integers".into()))?;
                    if k == 0 {
                        return Err(Error::Domain("q-family weights must be positive integers".into()));
                    }
                    q_values(k, grid.n_max, mu)
                }
            };
            let mut bound = match family {
                Family::P => half.clone(),
                Family::Q => Rational::one(),
            };
            let step = &nine_tenths * mu;
            for (n, v) in vals.iter().enumerate() {
                let signed = if n % 2 == 0 { v.clone() } else { -v.clone() };
                let pass = signed >= bound;
                let nn = qi((n * n) as i64);
                let scale = match family {
                    Family::P => param + &nn,
                    Family::Q => param * param + &nn,
                };
                if scale.is_zero() {
                    unscaled_failure |= !pass;
                } else {
                    outcomes.push((mu / &scale, pass));
                }
                bound *= &step;
            }
        }
    }
    if unscaled_failure {
        return Err(Error::Domain("sign law fails at a point with λ + n² = 0; no multiplier certifies it".into()));
    }
    let points = outcomes.len();
    let failures = outcomes.iter().filter(|(_, ok)| !ok).count();
    let max_fail = outcomes.iter().filter(|(_, ok)| !ok).map(|(r, _)| r.clone()).max();
    let a = match &max_fail {
        None => outcomes.iter().map(|(r, _)| r.clone()).min().expect("nonempty grid"),
        Some(m) => outcomes
            .iter()
            .map(|(r, _)| r.clone())
            .filter(|r| r > m)
            .min()
            .ok_or_else(|| Error::Domain(format!("no grid ratio exceeds the largest failing ratio {m}; A is not finite on this grid")))?,
    };
    Ok(SignThreshold { family, a, grid: grid.clone(), points, failures, max_failing_ratio: max_fail })
}

/// Outcome of the correction-domination scan.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub points: usize,
    pub cells: usize,
    pub max_ratio: f64,
    /// `(n, i, j, λ, μ)` of the maximum.
    pub argmax: (usize, usize, usize, f64, f64),
}

/// Computes `|p_{n,i,j}| / (μ^{−(i+j)} binom(n, i+j) |p_n|)` over
/// `n ≤ n_max`, `λ ∈ lambdas`, `μ = A(λ + n²)·f` for `f ∈ factors`.
/// Points with `λ + n² = 0` are skipped (μ would be 0).
pub fn verify_correction_domination(a: &Rational, n_max: usize, lambdas: &[Rational], factors: &[Rational]) -> DominationReport {
    let mut rep = DominationReport { points: 0, cells: 0, max_ratio: 0.0, argmax: (0, 0, 0, 0.0, 0.0) };
    for lambda in lambdas {
        for n in 0..=n_max {
            let scale = lambda + qi((n * n) as i64);
            if scale.is_zero() {
                continue;
            }
            for f in factors {
                let mu = a * &scale * f;
                let table = p_correction_values(n, lambda, &mu);
                let pn = table[n][0][0].abs();
                rep.points += 1;
                for i in 0..=n {
                    for j in 0..=(n - i) {
                        let d = i + j;
                        let denom = &pn * binomial(n, d) / num_traits::pow(mu.clone(), d);
                        let ratio = table[n][i][j].abs() / denom;
                        rep.cells += 1;
                        let r = crate::to_f64(&ratio);
                        if r > rep.max_ratio {
                            rep.max_ratio = r;
                            rep.argmax = (n, i, j, crate::to_f64(lambda), crate::to_f64(&mu));
                        }
                    }
                }
            }
        }
    }
    rep
}

fn binomial(n: usize, k: usize) -> Rational {
    let mut b = BigInt::one();
    for t in 0..k {
        b = b * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    Rational::from_integer(b)
}

type M2 = [[f64; 2]; 2];

fn mat_mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Spectral norm of a 2×2 matrix.
fn op_norm(m: &M2) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let t = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
    ((t + disc) / 2.0).sqrt()
}

/// Admissibility regime for [`verify_matrix_product`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MatrixRegime {
    /// Maximum allowed δ_m and ε_m.
    pub admissible: f64,
}

impl Default for MatrixRegime {
    fn default() -> Self {
        Self { admissible: 1e-2 }
    }
}

/// Per-step diagonalisation data `D_m = diag(1 − s, t)`.
#[derive(Clone, Debug, Serialize)]
pub struct StepData {
    pub m: u32,
    pub delta: f64,
    pub epsilon: f64,
    pub s: f64,
    pub t: f64,
    pub d_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixProductReport {
    pub n: u32,
    pub lambda: f64,
    pub mu: f64,
    pub error: f64,
    pub comparison: f64,
    /// `error / comparison`, or 0 when both vanish.
    pub ratio: f64,
    pub steps: Vec<StepData>,
}

/// Compares `Ã_n⋯Ã_1` with `Q_n D_n⋯D_1 Q_1^{−1}` for
/// `Ã_m = [[1 − δ_m, −ε_m²], [1, 0]]`, `δ_m = (2λ + 2m²)/μ`, `ε_m = (λ + m(m−1))/μ`.
///
/// Eigenvectors are normalised to second coordinate 1, so `Q_m = [[e₁, e₂], [1, 1]]`
/// and `D_m = diag(e₁, e₂)` with `|e₁| > |e₂|`.
pub fn verify_matrix_product(n: u32, lambda: f64, mu: f64, regime: MatrixRegime) -> Result<MatrixProductReport> {
    if n == 0 {
        return Err(Error::Domain("matrix product needs n ≥ 1".into()));
    }
    if !(mu > 0.0) {
        return Err(Error::Domain("μ must be positive".into()));
    }
    let mut steps = Vec::with_capacity(n as usize);
    let mut mats = Vec::with_capacity(n as usize);
    for m in 1..=n {
        let mf = m as f64;
        let delta = (2.0 * lambda + 2.0 * mf * mf) / mu;
        let eps = (lambda + mf * (mf - 1.0)) / mu;
        if delta.abs() > regime.admissible || eps.abs() > regime.admissible {
            return Err(Error::Domain(format!(
                "μ too small: δ_{m} = {delta:e}, ε_{m} = {eps:e} exceed the admissible {:e}",
                regime.admissible
            )));
        }
        let tr = 1.0 - delta;
        let disc = tr * tr - 4.0 * eps * eps;
        if !(disc > 0.0) {
            return Err(Error::Domain(format!("Ã_{m} has no separated real eigenvalues")));
        }
        let e1 = (tr + disc.sqrt()) / 2.0;
        let e2 = eps * eps / e1;
        let a: M2 = [[tr, -eps * eps], [1.0, 0.0]];
        let qm: M2 = [[e1, e2], [1.0, 1.0]];
        mats.push((a, qm, e1, e2));
        steps.push(StepData { m, delta, epsilon: eps, s: 1.0 - e1, t: e2, d_norm: e1.abs() });
    }
    let mut prod: M2 = [[1.0, 0.0], [0.0, 1.0]];
    let (mut d1, mut d2) = (1.0, 1.0);
    for (a, _, e1, e2) in &mats {
        prod = mat_mul(a, &prod);
        d1 *= e1;
        d2 *= e2;
    }
    let (_, q1, _, _) = mats[0];
    let (_, qn, _, _) = mats[n as usize - 1];
    let det = q1[0][0] - q1[0][1];
    let q1_inv: M2 = [[1.0 / det, -q1[0][1] / det], [-1.0 / det, q1[0][0] / det]];
    let approx = mat_mul(&mat_mul(&qn, &[[d1, 0.0], [0.0, d2]]), &q1_inv);
    let diff: M2 = [[prod[0][0] - approx[0][0], prod[0][1] - approx[0][1]], [prod[1][0] - approx[1][0], prod[1][1] - approx[1][1]]];
    let error = op_norm(&diff);
    let an = mats[n as usize - 1].0;
    let a1 = mats[0].0;
    let spread: M2 = [[an[0][0] - a1[0][0], an[0][1] - a1[0][1]], [0.0, 0.0]];
    let comparison = steps.iter().map(|s| s.d_norm).product::<f64>() * op_norm(&spread);
    let ratio = if comparison > 0.0 { error / comparison } else if error == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(MatrixProductReport { n, lambda, mu, error, comparison, ratio, steps })
}

/// Smallest `C` with `|q_{k,n}(μ)| ≤ (C (k² + μ + n²))^n` on a grid, `n ≥ 1`.
pub fn q_trivial_bound_constant(ks: &[u32], n_max: u32, mus: &[f64]) -> f64 {
    let mut c: f64 = 0.0;
    for &k in ks {
        for &mu in mus {
            let vals = q_values(k, n_max, &mu);
            for (n, v) in vals.iter().enumerate().skip(1) {
                let base = (k * k) as f64 + mu + (n * n) as f64;
                c = c.max(v.abs().powf(1.0 / n as f64) / base);
            }
        }
    }
    c
}
