//! λ₁ bounds from the crossing combination of the discrete-series ladder: discrete-side
//! cancellation, functional polynomials `Q_k`, the closed-form bound and a certified
//! search over higher-order functionals.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::indexset::Index;
use crate::recurrences::b_poly;
use crate::roots::{largest_real_root, RootEnclosure, SturmChain};
use crate::spectrum::{Amplitude, CandidateSpectrum};
use crate::{q, qi, Error, Rational, Result, UniPoly};

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::Domain("weight index k must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `λ² − (9k+1)λ + 12k²`.
pub fn closed_form_quadratic(k: u32) -> Result<UniPoly> {
    check_k(k)?;
    let k = k as i64;
    Ok(UniPoly::new(vec![qi(12 * k * k), qi(-(9 * k + 1)), qi(1)]))
}

/// `(sqrt(33k² + 18k + 1) + 9k + 1) / 2`.
pub fn closed_form_bound(k: u32) -> Result<f64> {
    check_k(k)?;
    let k = k as f64;
    Ok(((33.0 * k * k + 18.0 * k + 1.0).sqrt() + 9.0 * k + 1.0) / 2.0)
}

/// The closed-form bound as an exact rational when the discriminant is a perfect square
/// (e.g. `k = 2` gives 16).
pub fn closed_form_bound_exact(k: u32) -> Result<Option<Rational>> {
    check_k(k)?;
    let k = k as i64;
    let disc = BigInt::from(33 * k * k + 18 * k + 1);
    let root = disc.sqrt();
    Ok((&root * &root == disc).then(|| (Rational::from_integer(root) + qi(9 * k + 1)) / qi(2)))
}

fn c(k: i64, n: i64) -> i64 {
    (k + n) * (k + n + 1) - k * (k - 1)
}

/// Coefficients of the RHS of the crossing combination in terms of the lowest-weight
/// sums `D_0..D_N`, for given `a` and `b`.
///
/// Telescoping each discrete column of weight `K = 2k + 2p` down to its lowest level
/// gives `|V(n,n)|² = D_p Π_{q=p+1}^{n} ρ_q(K)` and
/// `|V(n,n+1)|² = |V(n,n)|² (2m(2m+1) − K(K−1)) / (4c_n)` with `m = k + n` and
/// `ρ_q(K) = [(2m−1)(2m−2) − K(K−1)] / [2m(2m−1) − K(K−1)]`, `m = k + q`.
/// Principal columns carry no same-sign products.
pub fn discrete_coefficients(k: u32, a: &[Rational], b: &[Rational]) -> Result<Vec<Rational>> {
    check_k(k)?;
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Domain("a and b must have equal, nonzero length".into()));
    }
    let n_max = a.len() - 1;
    Ok((0..=n_max).map(|p| discrete_coefficient(k as i64, p as i64, a, b)).collect())
}

fn column_ratios(k: i64, p: i64, n: i64) -> (Rational, Rational) {
    // (Π ρ_q, |V(n,n+1)|² / |V(n,n)|²) for the column of weight 2k + 2p.
    let kk = 2 * k + 2 * p;
    let kk2 = kk * (kk - 1);
    let mut prod = qi(1);
    for qq in p + 1..=n {
        let m = k + qq;
        prod *= q((2 * m - 1) * (2 * m - 2) - kk2, 2 * m * (2 * m - 1) - kk2);
    }
    let m = k + n;
    (prod, q(2 * m * (2 * m + 1) - kk2, 4 * c(k, n)))
}

fn discrete_coefficient(k: i64, p: i64, a: &[Rational], b: &[Rational]) -> Rational {
    let mut sum = Rational::zero();
    for n in p..a.len() as i64 {
        let (prod, x) = column_ratios(k, p, n);
        sum += (&a[n as usize] - &b[n as usize] * x) * prod;
    }
    sum
}

/// Chooses `b` so that every lowest-weight contribution cancels. The system is
/// triangular: the `D_p` coefficient involves `b_p, …, b_N` only, with `b_p` entering
/// through `4(k+p)/(4c_p)`.
pub fn solve_cancellation(k: u32, a: &[Rational]) -> Result<Vec<Rational>> {
    check_k(k)?;
    if a.is_empty() {
        return Err(Error::Domain("a must have at least one entry".into()));
    }
    let kk = k as i64;
    let n_max = a.len() - 1;
    let mut b = vec![Rational::zero(); a.len()];
    for p in (0..=n_max).rev() {
        // With b_p = 0 the coefficient is `rest`; b_p contributes −b_p (k+p)/c_p.
        b[p] = Rational::zero();
        let rest = discrete_coefficient(kk, p as i64, a, &b);
        b[p] = rest * q(c(kk, p as i64), kk + p as i64);
    }
    let residual = discrete_coefficients(k, a, &b)?;
    if residual.iter().any(|r| !r.is_zero()) {
        return Err(Error::Unsolvable { residuals: residual.iter().map(|r| r.to_string()).collect() });
    }
    Ok(b)
}

/// `Q(λ) = Σ a_n B_{k,n}(λ)² + b_n B_{k,n}(λ) B_{k,n+1}(λ)`.
pub fn functional_polynomial(k: u32, a: &[Rational], b: &[Rational]) -> Result<UniPoly> {
    check_k(k)?;
    if a.len() != b.len() {
        return Err(Error::Domain("a and b must have equal length".into()));
    }
    let mut out = UniPoly::zero();
    for (n, (an, bn)) in a.iter().zip(b).enumerate() {
        let bk = b_poly(k, n as u32);
        let next = b_poly(k, n as u32 + 1);
        out = &out + &(&bk * &bk).scale(an);
        out = &out + &(&bk * &next).scale(bn);
    }
    Ok(out)
}

/// Certified positivity threshold: `Q > 0` on `(hi, ∞)`, and `Q` has a root in
/// `[lo, hi]` unless the threshold is 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub value: f64,
    #[serde(serialize_with = "crate::recurrences::ser_rational")]
    pub lo: Rational,
    #[serde(serialize_with = "crate::recurrences::ser_rational")]
    pub hi: Rational,
    #[serde(serialize_with = "crate::recurrences::ser_opt_rational")]
    pub exact: Option<Rational>,
}

impl Threshold {
    fn zero() -> Self {
        Self { value: 0.0, lo: Rational::zero(), hi: Rational::zero(), exact: Some(Rational::zero()) }
    }

    fn from_enclosure(e: RootEnclosure) -> Self {
        let value = match &e.exact {
            Some(x) => crate::to_f64(x),
            None => e.midpoint_f64(),
        };
        Self { value, lo: e.lo, hi: e.hi, exact: e.exact }
    }
}

/// Smallest `λ* ≥ 0` with `Q ≥ 0` on `[λ*, ∞)` and no root of `Q` above `λ*`: the largest
/// real root of `Q` (sign change or touching), or 0 when there is none in `(0, ∞)`.
pub fn positivity_threshold(poly: &UniPoly, eps: &Rational) -> Result<Threshold> {
    match poly.leading() {
        Some(l) if l.is_positive() => {}
        _ => return Err(Error::NoThreshold),
    }
    match largest_real_root(poly, eps) {
        Some(e) if e.hi.is_positive() => {
            if e.lo.is_negative() && SturmChain::new(poly).count_between(&Rational::zero(), &e.hi) == 0 {
                // The root lies in (lo, 0]: Q has no root in (0, ∞).
                return Ok(Threshold::zero());
            }
            Ok(Threshold::from_enclosure(e))
        }
        _ => Ok(Threshold::zero()),
    }
}

/// An order-`N` functional for weight `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Functional {
    pub k: u32,
    pub order: u32,
    #[serde(serialize_with = "crate::recurrences::ser_rationals")]
    pub a: Vec<Rational>,
    #[serde(serialize_with = "crate::recurrences::ser_rationals")]
    pub b: Vec<Rational>,
    #[serde(serialize_with = "ser_poly")]
    pub q: UniPoly,
    pub threshold: Threshold,
    /// `Q(0) = 0`.
    pub vacuum_normalized: bool,
}

fn ser_poly<S: serde::Serializer>(p: &UniPoly, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::recurrences::ser_rationals(p.coeffs(), s)
}

impl Functional {
    pub fn new(k: u32, a: Vec<Rational>, eps: &Rational) -> Result<Self> {
        let b = solve_cancellation(k, &a)?;
        let q = functional_polynomial(k, &a, &b)?;
        let threshold = positivity_threshold(&q, eps)?;
        Ok(Self { k, order: a.len() as u32 - 1, vacuum_normalized: q.coeff(0).is_zero(), a, b, q, threshold })
    }
}

/// Controls for [`search_functional`].
#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    /// Width of the final certified enclosure.
    pub precision: Rational,
    /// Nelder–Mead restarts per order.
    pub restarts: usize,
    /// Iteration cap for each Nelder–Mead run.
    pub max_iterations: usize,
    /// Seed of the ChaCha stream that draws starting points.
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { precision: q(1, 1_000_000_000), restarts: 48, max_iterations: 4000, seed: 0 }
    }
}

/// Linear parametrisation of vacuum-normalised functionals: `Q = Σ a_n G_n` with `G_n`
/// the polynomial of the unit vector `e_n`, free coordinates `a_1..a_N` taken on the unit
/// sphere (the threshold is invariant under positive scaling) and `a_0` fixed by
/// `Σ a_n G_n(0) = 0`. Setting `a_N = 0` reproduces every order `N−1` functional exactly.
struct Family {
    order: usize,
    g0: Vec<Rational>,
    g_f64: Vec<Vec<f64>>,
}

impl Family {
    fn new(k: u32, order: usize) -> Result<Self> {
        let mut g = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut e = vec![Rational::zero(); order + 1];
            e[n] = qi(1);
            let b = solve_cancellation(k, &e)?;
            g.push(functional_polynomial(k, &e, &b)?);
        }
        let g0 = g.iter().map(|p| p.coeff(0)).collect::<Vec<_>>();
        if g0[0].is_zero() {
            return Err(Error::Domain("vacuum normalisation cannot be solved for a_0".into()));
        }
        let deg = 2 * order + 2;
        let g_f64 = g.iter().map(|p| (0..=deg).map(|i| crate::to_f64(&p.coeff(i))).collect()).collect();
        Ok(Self { order, g0, g_f64 })
    }

    /// Full exact `a` from the free coordinates `a_1..a_N`.
    fn complete(&self, free: &[Rational]) -> Vec<Rational> {
        let mut a = vec![Rational::zero(); self.order + 1];
        a[1..].clone_from_slice(free);
        let s: Rational = a.iter().zip(&self.g0).skip(1).map(|(x, g)| x * g).sum();
        a[0] = -s / &self.g0[0];
        a
    }

    /// Double-precision threshold of the normalised free vector; infeasible points
    /// (non-positive leading coefficient) score `+∞`.
    fn score(&self, x: &[f64]) -> f64 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return f64::INFINITY;
        }
        let mut a = vec![0.0; self.order + 1];
        for (i, v) in x.iter().enumerate() {
            a[i + 1] = v / norm;
        }
        let g0: Vec<f64> = self.g0.iter().map(crate::to_f64).collect();
        a[0] = -a.iter().zip(&g0).skip(1).map(|(x, g)| x * g).sum::<f64>() / g0[0];
        let deg = self.g_f64[0].len();
        let coeffs: Vec<f64> = (0..deg).map(|i| a.iter().zip(&self.g_f64).map(|(x, g)| x * g[i]).sum()).collect();
        largest_real_root_f64(&coeffs).unwrap_or(f64::INFINITY)
    }
}

/// Largest real root (or 0 if none is positive) of `Σ c_i λ^i` via companion-matrix
/// eigenvalues, `None` if the leading coefficient is not positive.
fn largest_real_root_f64(c: &[f64]) -> Option<f64> {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut deg = c.len() - 1;
    while deg > 0 && c[deg].abs() <= 1e-13 * scale {
        deg -= 1;
    }
    if c[deg] <= 0.0 {
        return None;
    }
    if deg == 0 {
        return Some(0.0);
    }
    let m = nalgebra::DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -c[deg - 1 - j] / c[deg]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let top = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * z.norm().max(1.0))
        .map(|z| z.re)
        .fold(0.0f64, f64::max);
    Some(top)
}

/// Minimises `f` from `x0` with the Nelder–Mead simplex method.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], max_iter: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f(x0))];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = if x[i] != 0.0 { 1.05 * x[i] } else { 2.5e-4 };
        let v = f(&x);
        simplex.push((x, v));
    }
    let by_value = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| a.1.total_cmp(&b.1);
    let lerp = |a: &[f64], b: &[f64], t: f64| a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect::<Vec<f64>>();
    for _ in 0..max_iter {
        simplex.sort_by(by_value);
        let spread_f = simplex.iter().map(|s| (s.1 - simplex[0].1).abs()).fold(0.0, f64::max);
        let spread_x = simplex
            .iter()
            .flat_map(|s| s.0.iter().zip(&simplex[0].0).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max);
        if spread_f <= 1e-13 && spread_x <= 1e-13 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for s in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(&s.0) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let refl = lerp(&centroid, &worst.0, -1.0);
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp = lerp(&centroid, &worst.0, -2.0);
            let fe = f(&exp);
            simplex[n] = if fe < fr { (exp, fe) } else { (refl, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (refl, fr);
            continue;
        }
        let (cont, fc) = if fr < worst.1 {
            let x = lerp(&centroid, &refl, 0.5);
            let v = f(&x);
            (x, v)
        } else {
            let x = lerp(&centroid, &worst.0, 0.5);
            let v = f(&x);
            (x, v)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (cont, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for s in simplex.iter_mut().skip(1) {
            s.0 = lerp(&best, &s.0, 0.5);
            s.1 = f(&s.0);
        }
    }
    simplex.sort_by(by_value);
    simplex.swap_remove(0)
}

/// Searches vacuum-normalised functionals of order `N` for the smallest certified
/// threshold. Each order runs seeded Nelder–Mead restarts on a double-precision score,
/// certifies the best few candidates exactly, and also keeps the order `N−1` optimum
/// (embedded with `a_N = 0`), so certified thresholds never increase with `N`.
pub fn search_functional(k: u32, order: u32, opts: &SearchOptions) -> Result<Functional> {
    check_k(k)?;
    if order == 0 {
        return Err(Error::Domain("search needs order N ≥ 1".into()));
    }
    let mut best: Option<Functional> = None;
    for n in 1..=order as usize {
        best = Some(search_order(k, n, best.as_ref(), opts)?);
    }
    Ok(best.expect("order ≥ 1"))
}

fn search_order(k: u32, order: usize, previous: Option<&Functional>, opts: &SearchOptions) -> Result<Functional> {
    let fam = Family::new(k, order)?;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let embedded = previous.map(|f| {
        let mut free: Vec<Rational> = f.a[1..].to_vec();
        free.push(Rational::zero());
        free
    });
    if let Some(free) = &embedded {
        let mut x: Vec<f64> = free.iter().map(crate::to_f64).collect();
        x[order - 1] = 1e-3;
        starts.push(x);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (k as u64) << 32 ^ order as u64);
    for _ in 0..opts.restarts {
        let scale = [0.1, 1.0, 10.0, 100.0][rng.gen_range(0..4)];
        starts.push((0..order).map(|_| scale * rng.gen_range(-1.0..1.0)).collect());
    }
    if order == 1 {
        starts = vec![vec![1.0], vec![-1.0]];
    }
    let f = |x: &[f64]| fam.score(x);
    let mut found: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|x0| {
            let (x, _) = nelder_mead(&f, &x0, opts.max_iterations);
            let (x, v) = nelder_mead(&f, &x, opts.max_iterations);
            let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            (v, x.iter().map(|t| t / norm).collect())
        })
        .filter(|(v, _)| v.is_finite())
        .collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal)));

    let mut candidates: Vec<Vec<Rational>> = found
        .iter()
        .take(4)
        .filter_map(|(_, x)| x.iter().map(|t| Rational::from_float(*t)).collect::<Option<Vec<_>>>())
        .collect();
    candidates.extend(embedded);
    let mut best: Option<Functional> = None;
    for free in candidates {
        if let Ok(func) = Functional::new(k, fam.complete(&free), &opts.precision) {
            if best.as_ref().is_none_or(|b| func.threshold.hi < b.threshold.hi) {
                best = Some(func);
            }
        }
    }
    best.ok_or_else(|| Error::Domain(format!("no feasible functional found at order {order}")))
}

/// Truncated RHS of the crossing combination for `i = (−ρ, k_ρ)`:
/// `Σ_ℓ (−1)^{ℓ2} Σ_n (a_n C_{i⁺ⁿ i⁺ⁿ}^ℓ C_{ī⁺ⁿ ī⁺ⁿ}^{ℓ̄} + b_n C_{i⁺ⁿ i⁺⁽ⁿ⁺¹⁾}^ℓ C_{ī⁺ⁿ ī⁺⁽ⁿ⁺¹⁾}^{ℓ̄})`,
/// summed over `ℓ ∈ I ∩ window`. Returns `(value, Σ |term|)`.
pub fn crossing_rhs<A: Amplitude>(spec: &CandidateSpectrum<A>, rho: u32, a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    crossing_side(spec, rho, a, b, false)
}

/// Truncated LHS of the same combination, with `ī⁺ⁿ = (−ρ, −k−n)`:
/// `Σ_ℓ (−1)^{ℓ2} Σ_n (a_n C_{i⁺ⁿ ī⁺ⁿ}^ℓ C_{i⁺ⁿ ī⁺ⁿ}^{ℓ̄} + b_n C_{i⁺ⁿ ī⁺ⁿ}^ℓ C_{i⁺⁽ⁿ⁺¹⁾ ī⁺⁽ⁿ⁺¹⁾}^{ℓ̄})`.
pub fn crossing_lhs<A: Amplitude>(spec: &CandidateSpectrum<A>, rho: u32, a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    crossing_side(spec, rho, a, b, true)
}

fn crossing_side<A: Amplitude>(spec: &CandidateSpectrum<A>, rho: u32, a: &[f64], b: &[f64], lhs: bool) -> Result<(f64, f64)> {
    let k = spec.ctx().holomorphic.weight(rho as usize)? as i64;
    let up = |n: i64| Index::new(-(rho as i64), k + n);
    let indices = spec.indices();
    let mut total = crate::Complex::new(0.0, 0.0);
    let mut abs = 0.0;
    let mut add = |coef: f64, (p, q): (Index, Index), (r, s): (Index, Index)| {
        for &l in &indices {
            let sign = if l.i2.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let t = spec.get(p, q, l).to_complex() * spec.get(r, s, l.bar()).to_complex() * (coef * sign);
            abs += t.norm();
            total += t;
        }
    };
    for n in 0..a.len() as i64 {
        let (x, y) = (up(n), up(n + 1));
        if lhs {
            add(a[n as usize], (x, x.bar()), (x, x.bar()));
            add(b[n as usize], (x, x.bar()), (y, y.bar()));
        } else {
            add(a[n as usize], (x, x), (x.bar(), x.bar()));
            add(b[n as usize], (x, y), (x.bar(), y.bar()));
        }
    }
    Ok((total.re, abs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(closed_form_bound_exact(2).unwrap(), Some(qi(16)));
        assert_eq!(closed_form_bound_exact(1).unwrap(), None);
        assert!((closed_form_bound(1).unwrap() - 8.6055).abs() < 5e-4);
        assert!((closed_form_bound(6).unwrap() - 45.5069).abs() < 5e-4);
        assert!(closed_form_bound(0).is_err());
    }

    #[test]
    fn cancellation_examples() {
        for k in 1..=6u32 {
            assert_eq!(solve_cancellation(k, &[qi(1)]).unwrap(), vec![qi(2)]);
            let x = q(4 * k as i64 + 2, k as i64 + 1);
            assert_eq!(solve_cancellation(k, &[qi(-1), qi(1)]).unwrap(), vec![-x.clone(), x]);
        }
    }

    #[test]
    fn order_zero_polynomial() {
        let k = 3;
        let qp = functional_polynomial(k, &[qi(1)], &[qi(2)]).unwrap();
        assert_eq!(qp, UniPoly::new(vec![qi(-1), q(1, 3)]));
    }

    #[test]
    fn threshold_examples() {
        let eps = q(1, 1_000_000);
        let p = UniPoly::new(vec![qi(0), qi(48), qi(-19), qi(1)]).scale(&q(1, 48));
        assert_eq!(positivity_threshold(&p, &eps).unwrap().exact, Some(qi(16)));
        assert_eq!(positivity_threshold(&UniPoly::x(), &eps).unwrap().value, 0.0);
        assert!(matches!(positivity_threshold(&UniPoly::new(vec![qi(1), qi(-1)]), &eps), Err(Error::NoThreshold)));
        // (λ + 1)² has no nonnegative root.
        let sq = UniPoly::new(vec![qi(1), qi(2), qi(1)]);
        assert_eq!(positivity_threshold(&sq, &eps).unwrap().value, 0.0);
    }
}
