//! Candidate spectra: sparse structure constants over a truncation window, the spectrum
//! file format, and the ladder-based fixture generator.
//!
//! The container is generic over the amplitude type: [`Complex`] for ordinary floating
//! data and [`SignedSqrt`] for exact real data whose squares are rational.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::indexset::{Index, SpectralContext, SpectralScalar, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::orbifold::{dim_modular_forms, holomorphic_spectrum, HolomorphicSpectrum, LaplaceSpectrum, TopologicalType};
use crate::{Complex, Error, Rational, Result};

/// Value type of a structure constant.
pub trait Amplitude: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    /// Scalar type of the eigenvalues paired with this amplitude.
    type Real: SpectralScalar;

    fn zero() -> Self;
    /// `±1` (or 0).
    fn from_sign(s: i8) -> Self;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    fn neg(&self) -> Self;
    fn magnitude(&self) -> f64;
    fn to_complex(&self) -> Complex;
    /// `sqrt(rad) · self` for `rad ≥ 0`.
    fn scale_sqrt(&self, rad: &Self::Real) -> Self;
    /// `self / sqrt(rad)` for `rad > 0`.
    fn div_sqrt(&self, rad: &Self::Real) -> Self;
    /// `self + other`, or `None` when the sum leaves the representable set.
    fn try_add(&self, other: &Self) -> Option<Self>;
    /// For the relation `Σ_t sign_t · sqrt(rad_t) · x_t = 0`, returns
    /// `(|Σ|, Σ |term|)`. Exact amplitudes return a residual of exactly 0 iff the
    /// relation holds exactly.
    fn relation_residual(terms: &[(i8, Self::Real, Self)]) -> (f64, f64);
}

impl Amplitude for Complex {
    type Real = f64;

    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn from_sign(s: i8) -> Self {
        Complex::new(s as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex {
        *self
    }
    fn scale_sqrt(&self, rad: &f64) -> Self {
        self * rad.max(0.0).sqrt()
    }
    fn div_sqrt(&self, rad: &f64) -> Self {
        self / rad.sqrt()
    }
    fn try_add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn relation_residual(terms: &[(i8, f64, Self)]) -> (f64, f64) {
        let mut sum = Complex::new(0.0, 0.0);
        let mut scale = 0.0;
        for (s, rad, x) in terms {
            let t = x * (*s as f64 * rad.max(0.0).sqrt());
            scale += t.norm();
            sum += t;
        }
        (sum.norm(), scale)
    }
}

/// Exact real number `sign · sqrt(square)` with rational `square ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedSqrt {
    sign: i8,
    square: Rational,
}

impl SignedSqrt {
    pub fn new(sign: i8, square: Rational) -> Self {
        assert!(!square.is_negative(), "SignedSqrt needs a nonnegative square");
        if sign == 0 || square.is_zero() {
            Self { sign: 0, square: Rational::zero() }
        } else {
            Self { sign: sign.signum(), square }
        }
    }

    /// The rational `x` itself.
    pub fn from_rational(x: &Rational) -> Self {
        let sign = if x.is_positive() { 1 } else if x.is_negative() { -1 } else { 0 };
        Self::new(sign, x * x)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn square(&self) -> &Rational {
        &self.square
    }

    pub fn to_f64(&self) -> f64 {
        self.sign as f64 * crate::to_f64(&self.square).sqrt()
    }
}

/// Exact square root of a rational, if it is a perfect square.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &n * &n == *x.numer() && &d * &d == *x.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Sums signed square roots exactly by grouping commensurable radicals; square roots of
/// rationals with pairwise non-square ratios are linearly independent over ℚ, so the
/// sum vanishes iff every group does. Returns the nonzero groups.
pub fn group_signed_sqrts(terms: &[SignedSqrt]) -> Vec<SignedSqrt> {
    // Each group: representative square q0 and rational multiplier c, value c·sqrt(q0).
    let mut groups: Vec<(Rational, Rational)> = Vec::new();
    'outer: for t in terms {
        if t.sign == 0 {
            continue;
        }
        for (q0, c) in groups.iter_mut() {
            if let Some(r) = rational_sqrt(&(&t.square / &*q0)) {
                *c += r * Rational::from_integer(BigInt::from(t.sign));
                continue 'outer;
            }
        }
        groups.push((t.square.clone(), Rational::from_integer(BigInt::from(t.sign))));
    }
    groups
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(q0, c)| {
            let s = if c.is_positive() { 1 } else { -1 };
            SignedSqrt::new(s, &q0 * &c * &c)
        })
        .collect()
}

impl Amplitude for SignedSqrt {
    type Real = Rational;

    fn zero() -> Self {
        Self::new(0, Rational::zero())
    }
    fn from_sign(s: i8) -> Self {
        Self::new(s, crate::qi(1))
    }
    fn is_zero(&self) -> bool {
        self.sign == 0
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn neg(&self) -> Self {
        Self::new(-self.sign, self.square.clone())
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    fn to_complex(&self) -> Complex {
        Complex::new(self.to_f64(), 0.0)
    }
    fn scale_sqrt(&self, rad: &Rational) -> Self {
        Self::new(self.sign, &self.square * rad)
    }
    fn div_sqrt(&self, rad: &Rational) -> Self {
        Self::new(self.sign, &self.square / rad)
    }
    fn try_add(&self, other: &Self) -> Option<Self> {
        match group_signed_sqrts(&[self.clone(), other.clone()]).as_slice() {
            [] => Some(Self::zero()),
            [one] => Some(one.clone()),
            _ => None,
        }
    }
    fn relation_residual(terms: &[(i8, Rational, Self)]) -> (f64, f64) {
        let exact: Vec<SignedSqrt> =
            terms.iter().map(|(s, rad, x)| SignedSqrt::new(s * x.sign, &x.square * rad)).collect();
        let scale: f64 = exact.iter().map(|t| t.to_f64().abs()).sum();
        let rest = group_signed_sqrts(&exact);
        if rest.is_empty() {
            (0.0, scale)
        } else {
            let approx: f64 = rest.iter().map(SignedSqrt::to_f64).sum::<f64>().abs();
            (approx.max(f64::MIN_POSITIVE), scale)
        }
    }
}

/// Ordered index triple `(i, j, ℓ)` for `C_{ij}^ℓ`.
pub type Triple = (Index, Index, Index);

/// Real amplitude in binary fixed point, `mantissa / 2^FIXED_BITS`, paired with exact
/// rational eigenvalues. Each operation rounds once, so long recursions keep about
/// 190 bits; the fixture generator builds ladders with it and rounds to `f64` at the end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedReal(BigInt);

/// Fractional bits of [`FixedReal`].
pub const FIXED_BITS: usize = 192;

impl FixedReal {
    pub fn from_f64(x: f64) -> Self {
        let q = Rational::from_float(x).unwrap_or_else(Rational::zero);
        let scaled = q * Rational::from_integer(BigInt::from(1) << FIXED_BITS);
        Self(scaled.round().to_integer())
    }

    /// `sign(m) · floor(sqrt(m² · num / den))`.
    fn sqrt_ratio(&self, num: &BigInt, den: &BigInt) -> Self {
        if num.is_negative() || den.is_zero() {
            return Self(BigInt::zero());
        }
        let root = (&self.0 * &self.0 * num / den).sqrt();
        Self(if self.0.is_negative() { -root } else { root })
    }
}

impl Amplitude for FixedReal {
    type Real = Rational;

    fn zero() -> Self {
        Self(BigInt::zero())
    }
    fn from_sign(s: i8) -> Self {
        Self(BigInt::from(s) << FIXED_BITS)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn neg(&self) -> Self {
        Self(-&self.0)
    }
    fn magnitude(&self) -> f64 {
        self.to_complex().re.abs()
    }
    fn to_complex(&self) -> Complex {
        Complex::new(crate::to_f64(&Rational::new(self.0.clone(), BigInt::from(1) << FIXED_BITS)), 0.0)
    }
    fn scale_sqrt(&self, rad: &Rational) -> Self {
        self.sqrt_ratio(rad.numer(), rad.denom())
    }
    fn div_sqrt(&self, rad: &Rational) -> Self {
        self.sqrt_ratio(rad.denom(), rad.numer())
    }
    fn try_add(&self, other: &Self) -> Option<Self> {
        Some(Self(&self.0 + &other.0))
    }
    fn relation_residual(terms: &[(i8, Rational, Self)]) -> (f64, f64) {
        let float: Vec<(i8, f64, Complex)> = terms.iter().map(|(s, r, x)| (*s, crate::to_f64(r), x.to_complex())).collect();
        Complex::relation_residual(&float)
    }
}

fn canonical(i: Index, j: Index, l: Index) -> Triple {
    if i <= j {
        (i, j, l)
    } else {
        (j, i, l)
    }
}

/// Laplace and holomorphic spectra plus sparse structure constants over a window.
///
/// One orientation of each HB1 pair is stored; [`get`](Self::get) symmetrises.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSpectrum<A: Amplitude> {
    ctx: SpectralContext<A::Real>,
    window: Window,
    c: BTreeMap<Triple, A>,
}

/// Floating-point candidate spectrum.
pub type Spectrum = CandidateSpectrum<Complex>;
/// Exact real candidate spectrum.
pub type ExactSpectrum = CandidateSpectrum<SignedSqrt>;

impl<A: Amplitude> CandidateSpectrum<A> {
    /// An all-zero spectrum; fails if the window reaches beyond either horizon.
    pub fn new(ctx: SpectralContext<A::Real>, window: Window) -> Result<Self> {
        ctx.check_window(window)?;
        Ok(Self { ctx, window, c: BTreeMap::new() })
    }

    pub fn ctx(&self) -> &SpectralContext<A::Real> {
        &self.ctx
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Stored entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&Triple, &A)> {
        self.c.iter()
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    fn admissible(&self, i: Index, j: Index, l: Index) -> bool {
        [i, j, l].iter().all(|&x| self.window.contains(x) && self.ctx.member(x).unwrap_or(false))
    }

    /// `C_{ij}^ℓ`, or exactly zero for unstored, off-support, out-of-I or out-of-window
    /// triples.
    pub fn get(&self, i: Index, j: Index, l: Index) -> A {
        if i.i2 + j.i2 != l.i2 {
            return A::zero();
        }
        self.c.get(&canonical(i, j, l)).cloned().unwrap_or_else(A::zero)
    }

    /// Stores `C_{ij}^ℓ` (and, implicitly, `C_{ji}^ℓ`). Zero values are removed.
    pub fn set(&mut self, i: Index, j: Index, l: Index, v: A) -> Result<()> {
        if i.i2 + j.i2 != l.i2 {
            return Err(Error::Validation(format!("C_{{{i}{j}}}^{l} violates weight selection i2 + j2 = ℓ2")));
        }
        if !self.admissible(i, j, l) {
            return Err(Error::Validation(format!("C_{{{i}{j}}}^{l} has an index outside I or the window")));
        }
        let key = canonical(i, j, l);
        if v.is_zero() {
            self.c.remove(&key);
        } else {
            self.c.insert(key, v);
        }
        Ok(())
    }

    /// Sets `C_{(0,0) j}^j = 1` for every `j ∈ I ∩ window`.
    pub fn fill_unit(mut self) -> Self {
        let all = self.ctx.enumerate(self.window).expect("window checked at construction");
        for j in all {
            self.c.insert(canonical(Index::VACUUM, j, j), A::from_sign(1));
        }
        self
    }

    /// `I ∩ window`.
    pub fn indices(&self) -> Vec<Index> {
        self.ctx.enumerate(self.window).expect("window checked at construction")
    }

    /// Merges another spectrum's entries (same context and window); later values win.
    pub fn merge(&mut self, other: &Self) {
        for (k, v) in &other.c {
            self.c.insert(*k, v.clone());
        }
    }
}

/// Seed of a ladder: the values `C_{ī i}^{(r,0)}` for `i = (−ρ, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderSeed<A> {
    pub rho: u32,
    pub k: u32,
    /// Keyed by `ℓ = (r, 0)`, `r ≥ 0`.
    pub base_values: BTreeMap<Index, A>,
}

/// Builds the HB5-consistent family
/// `U_r(p, q) = C_{(−ρ,−k−p),(−ρ,k+q)}^{(r,q−p)}` for every seeded `r`, together with its
/// HB3 mirror `C_{(−ρ,k+p),(−ρ,−k−q)}^{(r,p−q)} = conj U_r(p, q)`.
///
/// Row `p = 0` is the Weyl ladder `U(0,q+1) = sqrt(λ_r + q(q+1)) U(0,q) / sqrt((q+1)(2k+q))`;
/// `U(p,0) = conj U(0,p)`; other rows follow from HB5 at `(ī^{−p}, i^{+q}, (r, q−p+1))`:
/// `U(p,q+1) = [sqrt(λ_r + w(w+1)) U(p,q) − sqrt(p(2k+p−1)) U(p−1,q)] / sqrt((q+1)(2k+q))`
/// with `w = q − p`. The vacuum column `r = 0` only carries `ℓ = (0,0)`, where
/// `U(p,p) = (−1)^p U(0,0)`.
pub fn generate_ladder<A: Amplitude>(ctx: SpectralContext<A::Real>, window: Window, seed: &LadderSeed<A>) -> Result<CandidateSpectrum<A>> {
    let mut spec = CandidateSpectrum::new(ctx, window)?;
    add_ladder(&mut spec, seed)?;
    Ok(spec)
}

/// Adds one ladder family to an existing spectrum.
pub fn add_ladder<A: Amplitude>(spec: &mut CandidateSpectrum<A>, seed: &LadderSeed<A>) -> Result<()> {
    let rho = seed.rho as i64;
    let k = seed.k as i64;
    if rho == 0 || rho > spec.window.r1 as i64 {
        return Err(Error::Horizon(format!("ladder index ρ = {rho} outside the window")));
    }
    let k_rho = spec.ctx.holomorphic.weight(rho as usize)? as i64;
    if k_rho != k {
        return Err(Error::Domain(format!("seed weight {k} differs from k_{rho} = {k_rho}")));
    }
    if k > spec.window.r2 as i64 {
        return Err(Error::Horizon(format!("weight {k} exceeds window r2 = {}", spec.window.r2)));
    }
    let span = spec.window.r2 as i64 - k;
    let ctx = spec.ctx.clone();
    for (l, base) in &seed.base_values {
        if l.i2 != 0 || l.i1 < 0 {
            return Err(Error::Domain(format!("seed index {l} must have ℓ2 = 0 and ℓ1 ≥ 0")));
        }
        if !spec.window.contains(*l) {
            return Err(Error::Horizon(format!("seed index {l} outside the window")));
        }
        let r = l.i1;
        let left = |p: i64| Index::new(-rho, -k - p);
        let right = |q: i64| Index::new(-rho, k + q);
        if r == 0 {
            let mut v = base.clone();
            for p in 0..=span {
                spec.set(left(p), right(p), Index::VACUUM, v.clone())?;
                v = v.neg();
            }
            continue;
        }
        let lam = ctx.lambda_of(r)?;
        let radd = |w: i64| lam.plus(&A::Real::from_i64(w * (w + 1)));
        let int = |n: i64| A::Real::from_i64(n);
        let mut u: Vec<Vec<A>> = vec![vec![A::zero(); span as usize + 1]; span as usize + 1];
        u[0][0] = base.clone();
        for qq in 0..span {
            u[0][qq as usize + 1] = u[0][qq as usize].scale_sqrt(&radd(qq)).div_sqrt(&int((qq + 1) * (2 * k + qq)));
        }
        for p in 1..=span {
            u[p as usize][0] = u[0][p as usize].conj();
            for qq in 0..span {
                let w = qq - p;
                let a = u[p as usize][qq as usize].scale_sqrt(&radd(w));
                let b = u[p as usize - 1][qq as usize].scale_sqrt(&int(p * (2 * k + p - 1)));
                let sum = a.try_add(&b.neg()).ok_or_else(|| {
                    Error::Domain(format!("ladder entry ({p},{}) is not representable in this amplitude type", qq + 1))
                })?;
                u[p as usize][qq as usize + 1] = sum.div_sqrt(&int((qq + 1) * (2 * k + qq)));
            }
        }
        for p in 0..=span {
            for qq in 0..=span {
                let l = Index::new(r, qq - p);
                if !spec.window.contains(l) {
                    continue;
                }
                let v = u[p as usize][qq as usize].clone();
                spec.set(left(p), right(qq), l, v.clone())?;
                spec.set(right(p), left(qq), l.bar(), v.conj())?;
            }
        }
    }
    Ok(())
}

/// Adds the same-sign family `V(n, m) = C_{(−ρ,k+n),(−ρ,k+m)}^{(−σ, 2k+n+m)}` for a
/// discrete column `σ` of weight `K = 2k + 2j`, with HB3 mirrors on the negative side.
///
/// The lowest level `n + m = 2j` is fixed by HB5 at vanishing left coefficient,
/// `sqrt(c_n) V(n+1, m−1) = −sqrt(c_{m−1}) V(n, m)` with `c_n = (k+n)(k+n+1) − k(k−1)`,
/// starting from `V(0, 2j) = lowest`. Higher levels follow from the conjugate relation
/// `sqrt(λ_σ + u(u+1)) V(n, m) = sqrt(c_{n−1}) V(n−1, m) + sqrt(c_{m−1}) V(n, m−1)`,
/// `u = 2k + n + m − 1`.
pub fn add_discrete_column<A: Amplitude>(spec: &mut CandidateSpectrum<A>, rho: u32, sigma: u32, lowest: A) -> Result<()> {
    let k = spec.ctx.holomorphic.weight(rho as usize)? as i64;
    let big_k = spec.ctx.holomorphic.weight(sigma as usize)? as i64;
    if rho > spec.window.r1 || sigma > spec.window.r1 {
        return Err(Error::Horizon(format!("column indices ρ = {rho}, σ = {sigma} outside the window")));
    }
    if big_k < 2 * k || (big_k - 2 * k) % 2 != 0 {
        return Err(Error::Domain(format!("column weight {big_k} is not 2k + 2j for k = {k}")));
    }
    let lowest_level = big_k - 2 * k;
    let top = spec.window.r2 as i64 - 2 * k;
    if top < lowest_level {
        return Err(Error::Horizon(format!("window r2 = {} cannot hold weight {big_k}", spec.window.r2)));
    }
    let int = |n: i64| A::Real::from_i64(n);
    let c = |n: i64| (k + n) * (k + n + 1) - k * (k - 1);
    let lam = spec.ctx.lambda_of(-(sigma as i64))?;
    let mut v: BTreeMap<(i64, i64), A> = BTreeMap::new();
    v.insert((0, lowest_level), lowest);
    for n in 0..lowest_level {
        let m = lowest_level - n;
        let x = v[&(n, m)].scale_sqrt(&int(c(m - 1))).div_sqrt(&int(c(n))).neg();
        v.insert((n + 1, m - 1), x);
    }
    for s in lowest_level + 1..=top {
        let u = 2 * k + s - 1;
        let rad = lam.plus(&int(u * (u + 1)));
        for n in 0..=s {
            let m = s - n;
            let mut acc = A::zero();
            if let Some(x) = v.get(&(n - 1, m)).filter(|_| n > 0) {
                acc = acc.try_add(&x.scale_sqrt(&int(c(n - 1)))).ok_or_else(|| unrepresentable(n, m))?;
            }
            if let Some(x) = v.get(&(n, m - 1)).filter(|_| m > 0) {
                acc = acc.try_add(&x.scale_sqrt(&int(c(m - 1)))).ok_or_else(|| unrepresentable(n, m))?;
            }
            v.insert((n, m), acc.div_sqrt(&rad));
        }
    }
    let col = -(sigma as i64);
    for (&(n, m), x) in &v {
        let (a, b, l) = (Index::new(-(rho as i64), k + n), Index::new(-(rho as i64), k + m), Index::new(col, 2 * k + n + m));
        if n <= m {
            spec.set(a, b, l, x.clone())?;
            spec.set(a.bar(), b.bar(), l.bar(), x.conj())?;
        }
    }
    Ok(())
}

fn unrepresentable(n: i64, m: i64) -> Error {
    Error::Domain(format!("column entry ({n},{m}) is not representable in this amplitude type"))
}

/// Largest holomorphic horizon tried when filling a fixture window.
const MAX_FIXTURE_HORIZON: u32 = 256;

/// Seeded synthetic fixture for a topological type.
///
/// Laplace eigenvalues `λ_1 ≤ … ≤ λ_{r1}` are drawn uniformly from `[0.25, 40)` with four
/// decimals, the holomorphic weights come from Riemann–Roch, and every `ρ ≤ r1` whose
/// weight fits the window (restricted to `k_ρ = weight` when given) gets a ladder with
/// vacuum seed `(−1)^k` and real seeds in `[−1, 1]` (four decimals) for `1 ≤ r ≤ r1`.
/// The unit `C_{0 i}^i = 1` is included. Ladders are built in [`FixedReal`] arithmetic
/// and rounded to `f64` once. The same seed always yields the same data.
pub fn generate_fixture(topology: &TopologicalType, window: Window, seed: u64, weight: Option<u32>) -> Result<Spectrum> {
    if let Some(k) = weight {
        if dim_modular_forms(topology, k)? == 0 {
            return Err(Error::Domain(format!("{topology} has no holomorphic forms of weight {}", 2 * k)));
        }
    }
    let r1 = window.r1 as usize;
    let mut horizon = 1;
    let holo = loop {
        let h = holomorphic_spectrum(topology, horizon)?;
        if h.len() >= r1 {
            break h;
        }
        horizon += 1;
        if horizon > MAX_FIXTURE_HORIZON {
            return Err(Error::Horizon(format!("{topology} needs more than weight {} to list {r1} holomorphic weights", 2 * MAX_FIXTURE_HORIZON)));
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<i64> = (0..r1).map(|_| rng.gen_range(2_500..400_000)).collect();
    draws.sort_unstable();
    let decimal = |x: i64| Rational::new(x.into(), 10_000.into());
    let mut entries = vec![Rational::zero()];
    entries.extend(draws.iter().map(|&x| decimal(x)));
    let top = entries.last().cloned().unwrap_or_else(Rational::zero);
    let laplace = LaplaceSpectrum::new(entries, top.floor() + Rational::from_integer(2.into()))?;
    let ctx = SpectralContext::new(laplace, holo);
    let mut spec = CandidateSpectrum::<FixedReal>::new(ctx, window)?.fill_unit();

    let mut seeds = Vec::new();
    for rho in 1..=window.r1 {
        let k = spec.ctx.holomorphic.weight(rho as usize)?;
        if k > window.r2 || weight.is_some_and(|w| w != k) {
            continue;
        }
        let mut base = BTreeMap::new();
        base.insert(Index::VACUUM, FixedReal::from_sign(if k % 2 == 0 { 1 } else { -1 }));
        for r in 1..=window.r1 as i64 {
            let v = crate::to_f64(&decimal(rng.gen_range(-10_000..=10_000)));
            base.insert(Index::new(r, 0), FixedReal::from_f64(v));
        }
        seeds.push(LadderSeed { rho, k, base_values: base });
    }
    if seeds.is_empty() {
        return Err(Error::Horizon(match weight {
            Some(k) => format!("no ρ ≤ {} carries weight {} within the window", window.r1, 2 * k),
            None => "no ladder fits the window".into(),
        }));
    }
    for sd in &seeds {
        add_ladder(&mut spec, sd)?;
    }
    Ok(spec.to_float())
}

/// Indices touched by the ladders of `spec`'s fixture: `(−ρ, ±(k_ρ + p))` inside the window.
pub fn ladder_support<A: Amplitude>(spec: &CandidateSpectrum<A>) -> Vec<Index> {
    let mut out: Vec<Index> = spec
        .entries()
        .flat_map(|((i, j, _), _)| [*i, *j])
        .filter(|i| i.i1 < 0)
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Current spectrum file version.
pub const FORMAT_VERSION: u32 = 1;

/// One structure constant in the file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub i: [i64; 2],
    pub j: [i64; 2],
    pub l: [i64; 2],
    pub re: String,
    pub im: String,
}

/// The spectrum file document, before canonicalisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumFile {
    pub version: u32,
    pub laplace: Vec<String>,
    pub laplace_horizon: String,
    pub holomorphic: Vec<u32>,
    pub holomorphic_horizon: u32,
    pub window: Window,
    #[serde(rename = "C")]
    pub c: Vec<Entry>,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse { location: format!("line {} column {}", e.line(), e.column()), message: e.to_string() }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    crate::parse_decimal(s)
        .map_err(|_| Error::Parse { location: what.to_string(), message: format!("invalid decimal `{s}`") })?;
    s.trim().parse::<f64>().map_err(|_| Error::Parse { location: what.to_string(), message: format!("invalid decimal `{s}`") })
}

fn fmt_f64(x: f64) -> String {
    // Rust's shortest round-trip representation; normalise negative zero.
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

impl SpectrumFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: SpectrumFile = serde_json::from_str(text).map_err(parse_err)?;
        if f.version != FORMAT_VERSION {
            return Err(Error::Parse { location: "version".into(), message: format!("unsupported version {}", f.version) });
        }
        Ok(f)
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spectrum file serialises");
        s.push('\n');
        s
    }

    /// Context with exact rational eigenvalues.
    pub fn exact_context(&self) -> Result<SpectralContext<Rational>> {
        let lap = self.laplace.iter().map(|s| crate::parse_decimal(s)).collect::<Result<Vec<_>>>()?;
        let lap = LaplaceSpectrum::new(lap, crate::parse_decimal(&self.laplace_horizon)?)?;
        Ok(SpectralContext::new(lap, HolomorphicSpectrum::new(self.holomorphic.clone(), self.holomorphic_horizon)?))
    }

    /// Context with `f64` eigenvalues.
    pub fn float_context(&self) -> Result<SpectralContext<f64>> {
        let lap = self
            .laplace
            .iter()
            .enumerate()
            .map(|(n, s)| parse_f64(s, &format!("laplace[{n}]")))
            .collect::<Result<Vec<_>>>()?;
        let lap = LaplaceSpectrum::new(lap, parse_f64(&self.laplace_horizon, "laplace_horizon")?)?;
        Ok(SpectralContext::new(lap, HolomorphicSpectrum::new(self.holomorphic.clone(), self.holomorphic_horizon)?))
    }

    /// Parsed entries as `(triple, value)` in file order, without canonicalisation.
    pub fn raw_entries(&self) -> Result<Vec<(Triple, Complex)>> {
        self.c
            .iter()
            .enumerate()
            .map(|(n, e)| {
                let re = parse_f64(&e.re, &format!("C[{n}].re"))?;
                let im = parse_f64(&e.im, &format!("C[{n}].im"))?;
                let ix = |a: [i64; 2]| Index::new(a[0], a[1]);
                Ok(((ix(e.i), ix(e.j), ix(e.l)), Complex::new(re, im)))
            })
            .collect()
    }
}

impl Spectrum {
    /// Validates and canonicalises a parsed file. When both orientations of a pair are
    /// present the first one listed wins; [`crate::equations::check_hb1_raw`] reports
    /// any disagreement.
    pub fn from_file(f: &SpectrumFile) -> Result<Self> {
        let ctx = f.float_context()?;
        let mut spec = Self::new(ctx, f.window)?;
        let mut seen = std::collections::BTreeSet::new();
        for (n, ((i, j, l), v)) in f.raw_entries()?.into_iter().enumerate() {
            if i.i2 + j.i2 != l.i2 {
                return Err(Error::Validation(format!("C[{n}]: i2 + j2 ≠ ℓ2 for ({i}, {j}, {l})")));
            }
            if !spec.admissible(i, j, l) {
                return Err(Error::Validation(format!("C[{n}]: index outside I or the window in ({i}, {j}, {l})")));
            }
            if seen.insert(canonical(i, j, l)) {
                spec.set(i, j, l, v)?;
            }
        }
        Ok(spec)
    }

    pub fn to_file(&self) -> SpectrumFile {
        let ix = |i: Index| [i.i1, i.i2];
        SpectrumFile {
            version: FORMAT_VERSION,
            laplace: self.ctx.laplace.entries().iter().map(|&x| fmt_f64(x)).collect(),
            laplace_horizon: fmt_f64(*self.ctx.laplace.horizon()),
            holomorphic: self.ctx.holomorphic.entries().to_vec(),
            holomorphic_horizon: self.ctx.holomorphic.horizon(),
            window: self.window,
            c: self
                .c
                .iter()
                .map(|(&(i, j, l), v)| Entry { i: ix(i), j: ix(j), l: ix(l), re: fmt_f64(v.re), im: fmt_f64(v.im) })
                .collect(),
        }
    }

    pub fn serialize(&self) -> String {
        self.to_file().to_text()
    }

    pub fn deserialize(text: &str) -> Result<Self> {
        Self::from_file(&SpectrumFile::parse(text)?)
    }
}

impl<A: Amplitude<Real = Rational>> CandidateSpectrum<A> {
    /// Floating-point copy for the ordinary checkers.
    pub fn to_float(&self) -> Spectrum {
        Spectrum {
            ctx: self.ctx.to_float(),
            window: self.window,
            c: self.c.iter().map(|(k, v)| (*k, v.to_complex())).collect(),
        }
    }
}

/// Integer view of a rational if it is one (helper for reports).
pub fn as_integer(x: &Rational) -> Option<i64> {
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qi};

    fn ctx() -> SpectralContext<f64> {
        let h = holomorphic_spectrum(&TopologicalType::surface(2).unwrap(), 6).unwrap();
        SpectralContext::new(LaplaceSpectrum::new(vec![0.0, 3.25, 4.5, 7.0], 8.0).unwrap(), h)
    }

    fn seed(rho: u32, k: u32) -> LadderSeed<Complex> {
        let mut base = BTreeMap::new();
        base.insert(Index::new(0, 0), Complex::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
        base.insert(Index::new(1, 0), Complex::new(0.7, 0.0));
        base.insert(Index::new(2, 0), Complex::new(-0.3, 0.0));
        LadderSeed { rho, k, base_values: base }
    }

    #[test]
    fn zero_extension() {
        let s = Spectrum::new(ctx(), Window::new(3, 6)).unwrap().fill_unit();
        assert_eq!(s.get(Index::VACUUM, Index::new(2, 1), Index::new(2, 1)), Complex::new(1.0, 0.0));
        assert_eq!(s.get(Index::VACUUM, Index::new(2, 1), Index::new(3, 1)), Complex::new(0.0, 0.0));
        assert_eq!(s.get(Index::new(2, 1), Index::VACUUM, Index::new(2, 1)), Complex::new(1.0, 0.0));
        assert!(Amplitude::is_zero(&s.get(Index::new(-1, 0), Index::VACUUM, Index::new(-1, 0))));
        assert!(Amplitude::is_zero(&s.get(Index::new(2, 1), Index::VACUUM, Index::new(2, 2))));
    }

    #[test]
    fn ladder_base_and_first_ratio() {
        let s = generate_ladder(ctx(), Window::new(3, 6), &seed(1, 1)).unwrap();
        let i = Index::new(-1, 1);
        let b = s.get(i.bar(), i, Index::new(1, 0));
        assert_eq!(b, Complex::new(0.7, 0.0));
        let up = s.get(i.bar(), i.shift(1), Index::new(1, 1));
        let ratio = up.norm_sqr() / b.norm_sqr();
        assert!((ratio - 3.25 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn ladder_seed_weight_checked() {
        assert!(generate_ladder(ctx(), Window::new(3, 6), &seed(1, 2)).is_err());
        let mut bad = seed(1, 1);
        bad.base_values.insert(Index::new(1, 1), Complex::new(1.0, 0.0));
        assert!(generate_ladder(ctx(), Window::new(3, 6), &bad).is_err());
    }

    #[test]
    fn roundtrip_file() {
        let mut s = generate_ladder(ctx(), Window::new(3, 6), &seed(3, 2)).unwrap().fill_unit();
        add_ladder(&mut s, &seed(1, 1)).unwrap();
        let text = s.serialize();
        let back = Spectrum::deserialize(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.serialize(), text);
    }

    #[test]
    fn file_validation() {
        let s = Spectrum::new(ctx(), Window::new(3, 6)).unwrap();
        let mut f = s.to_file();
        assert_eq!(Spectrum::from_file(&f).unwrap().len(), 0);
        f.c.push(Entry { i: [1, 1], j: [1, 1], l: [1, 1], re: "1".into(), im: "0".into() });
        assert!(matches!(Spectrum::from_file(&f), Err(Error::Validation(_))));
        let text = s.serialize().replace("\"version\"", "\"bogus\": 1, \"version\"");
        assert!(matches!(Spectrum::deserialize(&text), Err(Error::Parse { .. })));
        assert!(matches!(Spectrum::deserialize("{ nope"), Err(Error::Parse { .. })));
    }

    #[test]
    fn signed_sqrt_grouping() {
        // sqrt(8) − 2 sqrt(2) = 0; sqrt(2) + sqrt(3) stays two groups.
        let a = SignedSqrt::new(1, qi(8));
        let b = SignedSqrt::new(-1, qi(8));
        assert!(group_signed_sqrts(&[a.clone(), b]).is_empty());
        let c = SignedSqrt::new(-1, qi(2));
        assert_eq!(a.try_add(&c).unwrap(), SignedSqrt::new(1, qi(2)));
        assert!(SignedSqrt::new(1, qi(2)).try_add(&SignedSqrt::new(1, qi(3))).is_none());
        assert_eq!(rational_sqrt(&q(9, 4)), Some(q(3, 2)));
        assert_eq!(rational_sqrt(&q(2, 1)), None);
    }

    #[test]
    fn exact_ladder_is_representable() {
        let h = holomorphic_spectrum(&TopologicalType::surface(2).unwrap(), 6).unwrap();
        let lap = LaplaceSpectrum::new(vec![qi(0), q(13, 4), q(9, 2)], qi(5)).unwrap();
        let c = SpectralContext::new(lap, h);
        let mut base = BTreeMap::new();
        base.insert(Index::new(1, 0), SignedSqrt::from_rational(&q(3, 5)));
        base.insert(Index::new(2, 0), SignedSqrt::from_rational(&q(-1, 2)));
        let s = generate_ladder(c, Window::new(2, 7), &LadderSeed { rho: 1, k: 1, base_values: base }).unwrap();
        let f = s.to_float();
        assert_eq!(f.len(), s.len());
    }

    #[test]
    fn fixture_is_deterministic_and_consistent() {
        let t = TopologicalType::surface(2).unwrap();
        let a = generate_fixture(&t, Window::new(3, 6), 7, None).unwrap();
        let b = generate_fixture(&t, Window::new(3, 6), 7, None).unwrap();
        assert_eq!(a.serialize(), b.serialize());
        let report = crate::equations::check_all(&a, &Default::default(), &[], crate::equations::Hb6Mode::ListOnly).unwrap();
        assert!(report.passes(false), "{}", report.to_table());
        let c = generate_fixture(&t, Window::new(3, 6), 8, None).unwrap();
        assert_ne!(a.serialize(), c.serialize());
    }

    #[test]
    fn fixture_weight_without_forms() {
        let t = TopologicalType::new(0, vec![2, 3, 7]).unwrap();
        assert!(matches!(generate_fixture(&t, Window::new(3, 8), 1, Some(2)), Err(Error::Domain(_))));
    }
}
