//! Dense univariate and sparse bivariate polynomials over a generic coefficient ring.
//!
//! Coefficients only need `num_traits::Num + Clone`, so the same containers hold exact
//! rationals (the default everywhere in this crate) or floats for quick evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Num, One, Zero};

/// Coefficient requirements shared by the polynomial containers.
pub trait Coeff: Num + Clone + fmt::Debug {}
impl<T: Num + Clone + fmt::Debug> Coeff for T {}

/// Dense polynomial in one variable; `coeffs[d]` multiplies `x^d`.
///
/// The representation is canonical: no trailing zero coefficients, and the zero
/// polynomial is the empty list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnivariatePolynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Coeff> UnivariatePolynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c x^d`.
    pub fn monomial(c: T, d: usize) -> Self {
        let mut coeffs = vec![T::zero(); d + 1];
        coeffs[d] = c;
        Self::new(coeffs)
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(T::one(), 1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, d: usize) -> T {
        self.coeffs.get(d).cloned().unwrap_or_else(T::zero)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    /// Horner evaluation in the coefficient ring.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    /// Horner evaluation in another ring after converting each coefficient.
    pub fn eval_with<U, F>(&self, x: &U, conv: F) -> U
    where
        U: Num + Clone,
        F: Fn(&T) -> U,
    {
        let mut acc = U::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + conv(c);
        }
        acc
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        let mut k = T::zero();
        for c in self.coeffs.iter() {
            if !k.is_zero() {
                out.push(c.clone() * k.clone());
            }
            k = k + T::one();
        }
        Self::new(out)
    }

    /// Euclidean division `self = q * d + r` with `deg r < deg d`. Requires a field.
    ///
    /// # Panics
    /// Panics when `d` is the zero polynomial.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.coeffs[dd].clone();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![T::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = r[i + dd].clone() / lead.clone();
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[i + j] = r[i + j].clone() - c.clone() * dc.clone();
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }
}

impl<T: Coeff> Add for &UnivariatePolynomial<T> {
    type Output = UnivariatePolynomial<T>;
    fn add(self, rhs: Self) -> Self::Output {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UnivariatePolynomial::new((0..n).map(|d| self.coeff(d) + rhs.coeff(d)).collect())
    }
}

impl<T: Coeff> Sub for &UnivariatePolynomial<T> {
    type Output = UnivariatePolynomial<T>;
    fn sub(self, rhs: Self) -> Self::Output {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UnivariatePolynomial::new((0..n).map(|d| self.coeff(d) - rhs.coeff(d)).collect())
    }
}

impl<T: Coeff> Mul for &UnivariatePolynomial<T> {
    type Output = UnivariatePolynomial<T>;
    fn mul(self, rhs: Self) -> Self::Output {
        if self.is_zero() || rhs.is_zero() {
            return UnivariatePolynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        UnivariatePolynomial::new(out)
    }
}

impl<T: Coeff + Neg<Output = T>> Neg for &UnivariatePolynomial<T> {
    type Output = UnivariatePolynomial<T>;
    fn neg(self) -> Self::Output {
        UnivariatePolynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<T: Coeff + fmt::Display> fmt::Display for UnivariatePolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter().enumerate().rev().map(|(d, c)| (c, monomial_name("λ", d))))
    }
}

/// Sparse polynomial in two variables `(λ, μ)`; keys are `(deg_λ, deg_μ)`.
///
/// Zero coefficients are never stored, so structural equality is polynomial equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BivariatePolynomial<T> {
    terms: BTreeMap<(u32, u32), T>,
}

impl<T: Coeff> BivariatePolynomial<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(c, 0, 0)
    }

    /// `c λ^a μ^b`.
    pub fn monomial(c: T, a: u32, b: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        Self { terms }
    }

    pub fn lambda() -> Self {
        Self::monomial(T::one(), 1, 0)
    }

    pub fn mu() -> Self {
        Self::monomial(T::one(), 0, 1)
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), T)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (k, c) in it {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, key: (u32, u32), c: T) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: u32, b: u32) -> T {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    pub fn degree_mu(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, b)| b).max()
    }

    pub fn degree_lambda(&self) -> Option<u32> {
        self.terms.keys().map(|&(a, _)| a).max()
    }

    /// Coefficient of `μ^b` as a polynomial in `λ`.
    pub fn mu_slice(&self, b: u32) -> UnivariatePolynomial<T> {
        let deg = self.degree_lambda().unwrap_or(0) as usize;
        let mut c = vec![T::zero(); deg + 1];
        for (&(a, bb), v) in &self.terms {
            if bb == b {
                c[a as usize] = v.clone();
            }
        }
        UnivariatePolynomial::new(c)
    }

    pub fn eval(&self, lambda: &T, mu: &T) -> T {
        self.eval_with(lambda, mu, |c| c.clone())
    }

    /// Evaluates in another ring after converting each coefficient.
    pub fn eval_with<U, F>(&self, lambda: &U, mu: &U, conv: F) -> U
    where
        U: Num + Clone,
        F: Fn(&T) -> U,
    {
        let mut acc = U::zero();
        for (&(a, b), c) in &self.terms {
            acc = acc + conv(c) * pow(lambda, a) * pow(mu, b);
        }
        acc
    }

    /// Substitutes `μ = t λ` and returns the polynomial in `λ` whose coefficients are
    /// polynomials in `t` (outer index: power of `λ`).
    pub fn along_ray(&self) -> BTreeMap<u32, UnivariatePolynomial<T>> {
        let mut out: BTreeMap<u32, Vec<T>> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            let v = out.entry(a + b).or_default();
            if v.len() <= b as usize {
                v.resize(b as usize + 1, T::zero());
            }
            v[b as usize] = v[b as usize].clone() + c.clone();
        }
        out.into_iter().map(|(d, v)| (d, UnivariatePolynomial::new(v))).collect()
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c.clone() * s.clone())))
    }
}

fn pow<U: Num + Clone>(x: &U, e: u32) -> U {
    let mut acc = U::one();
    for _ in 0..e {
        acc = acc * x.clone();
    }
    acc
}

impl<T: Coeff> Add for &BivariatePolynomial<T> {
    type Output = BivariatePolynomial<T>;
    fn add(self, rhs: Self) -> Self::Output {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl<T: Coeff> Sub for &BivariatePolynomial<T> {
    type Output = BivariatePolynomial<T>;
    fn sub(self, rhs: Self) -> Self::Output {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, T::zero() - c.clone());
        }
        out
    }
}

impl<T: Coeff> Mul for &BivariatePolynomial<T> {
    type Output = BivariatePolynomial<T>;
    fn mul(self, rhs: Self) -> Self::Output {
        let mut out = BivariatePolynomial::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<T: Coeff + fmt::Display> fmt::Display for BivariatePolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Highest total degree first, then by λ-degree.
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by(|(x, _), (y, _)| (y.0 + y.1, y.0).cmp(&(x.0 + x.1, x.0)));
        write_terms(
            f,
            keys.into_iter().map(|(&(a, b), c)| {
                let name = match (monomial_name("λ", a as usize), monomial_name("μ", b as usize)) {
                    (l, m) if l.is_empty() => m,
                    (l, m) if m.is_empty() => l,
                    (l, m) => format!("{l}{m}"),
                };
                (c, name)
            }),
        )
    }
}

fn monomial_name(var: &str, d: usize) -> String {
    match d {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{d}"),
    }
}

fn write_terms<'a, T, I>(f: &mut fmt::Formatter<'_>, it: I) -> fmt::Result
where
    T: Coeff + fmt::Display + 'a,
    I: Iterator<Item = (&'a T, String)>,
{
    let mut first = true;
    for (c, name) in it {
        if c.is_zero() {
            continue;
        }
        let s = c.to_string();
        let (neg, mag) = match s.strip_prefix('-') {
            Some(m) => (true, m.to_string()),
            None => (false, s),
        };
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if neg { '-' } else { '+' })?;
        }
        first = false;
        match (mag.as_str(), name.is_empty()) {
            (_, true) => write!(f, "{mag}")?,
            ("1", false) => write!(f, "{name}")?,
            (_, false) => write!(f, "{mag}·{name}")?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl<T: Coeff> Zero for UnivariatePolynomial<T> {
    fn zero() -> Self {
        UnivariatePolynomial::zero()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<T: Coeff> Add for UnivariatePolynomial<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<T: Coeff> Mul for UnivariatePolynomial<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<T: Coeff> One for UnivariatePolynomial<T> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}
