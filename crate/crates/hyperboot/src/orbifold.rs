//! Topological types of compact hyperbolic 2-orbifolds and their holomorphic spectra.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::{q, qi, Error, Rational, Result};

/// The type `[g; m_1, …, m_s]`: genus plus nondecreasing cone-point orders.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopologicalType {
    genus: u32,
    cone_orders: Vec<u32>,
}

impl TopologicalType {
    /// Builds a type, sorting the cone orders. Fails if an order is below 2 or the
    /// orbifold Euler characteristic is not negative.
    pub fn new(genus: u32, mut cone_orders: Vec<u32>) -> Result<Self> {
        if let Some(m) = cone_orders.iter().find(|&&m| m < 2) {
            return Err(Error::Domain(format!("cone order {m} is below 2")));
        }
        cone_orders.sort_unstable();
        let t = Self { genus, cone_orders };
        if !t.euler_characteristic().is_negative_rational() {
            return Err(Error::Domain(format!("{t} is not hyperbolic (χ = {})", t.euler_characteristic())));
        }
        Ok(t)
    }

    /// A closed surface of the given genus (hyperbolic only for genus ≥ 2).
    pub fn surface(genus: u32) -> Result<Self> {
        Self::new(genus, Vec::new())
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn cone_orders(&self) -> &[u32] {
        &self.cone_orders
    }

    /// `2 − 2g − Σ (1 − 1/m_i)`.
    pub fn euler_characteristic(&self) -> Rational {
        let mut chi = qi(2 - 2 * self.genus as i64);
        for &m in &self.cone_orders {
            chi -= q(m as i64 - 1, m as i64);
        }
        chi
    }

    /// Parses `g` or `[g; m1, m2, …]` (also `g;m1,m2`).
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse { location: String::new(), message: format!("topological type `{s}`: {m}") };
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        let (g, rest) = match t.split_once(';') {
            Some((g, r)) => (g, r),
            None => (t, ""),
        };
        let genus = g.trim().parse::<u32>().map_err(|_| bad("genus must be a nonnegative integer"))?;
        let mut orders = Vec::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            orders.push(part.parse::<u32>().map_err(|_| bad("cone orders must be integers"))?);
        }
        Self::new(genus, orders)
    }
}

trait NegativeRational {
    fn is_negative_rational(&self) -> bool;
}

impl NegativeRational for Rational {
    fn is_negative_rational(&self) -> bool {
        *self < Rational::zero()
    }
}

impl fmt::Display for TopologicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.genus)?;
        for (n, m) in self.cone_orders.iter().enumerate() {
            write!(f, "{}{m}", if n == 0 { "; " } else { ", " })?;
        }
        write!(f, "]")
    }
}

/// `dim M_{2k}` by Riemann–Roch: `g` for `k = 1`, and
/// `(2k − 1)(g − 1) + Σ floor(k(m_i − 1)/m_i)` for `k ≥ 2`.
pub fn dim_modular_forms(t: &TopologicalType, k: u32) -> Result<u64> {
    if k == 0 {
        return Err(Error::Domain("weight index k must be positive".into()));
    }
    if k == 1 {
        return Ok(t.genus as u64);
    }
    let k = k as i64;
    let mut d = (2 * k - 1) * (t.genus as i64 - 1);
    for &m in &t.cone_orders {
        let m = m as i64;
        d += k * (m - 1) / m;
    }
    // Hyperbolicity keeps this nonnegative; clamp defensively for the genus-0 edge.
    Ok(d.max(0) as u64)
}

/// The multiset `{k_r}` of holomorphic weights, complete up to `horizon`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolomorphicSpectrum {
    entries: Vec<u32>,
    horizon: u32,
}

impl HolomorphicSpectrum {
    /// Validates positivity and monotonicity; completeness up to `horizon` is the
    /// caller's claim and cannot be checked without a topological type.
    pub fn new(entries: Vec<u32>, horizon: u32) -> Result<Self> {
        if entries.iter().any(|&k| k == 0) {
            return Err(Error::Validation("holomorphic weights must be positive".into()));
        }
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Validation("holomorphic weights must be nondecreasing".into()));
        }
        if entries.iter().any(|&k| k > horizon) {
            return Err(Error::Validation(format!("holomorphic weight above horizon {horizon}")));
        }
        Ok(Self { entries, horizon })
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `k_r` for `r ≥ 1`.
    pub fn weight(&self, r: usize) -> Result<u32> {
        if r == 0 || r > self.entries.len() {
            return Err(Error::Horizon(format!("holomorphic index {r} outside 1..={}", self.entries.len())));
        }
        Ok(self.entries[r - 1])
    }

    pub fn multiplicity(&self, k: u32) -> usize {
        self.entries.iter().filter(|&&e| e == k).count()
    }

    /// First `r` with `k_r = k`.
    pub fn first_index_of(&self, k: u32) -> Option<usize> {
        self.entries.iter().position(|&e| e == k).map(|p| p + 1)
    }
}

/// Lists every `k ≤ horizon` with multiplicity `dim M_{2k}`.
pub fn holomorphic_spectrum(t: &TopologicalType, horizon: u32) -> Result<HolomorphicSpectrum> {
    let mut entries = Vec::new();
    for k in 1..=horizon {
        let d = dim_modular_forms(t, k)?;
        entries.extend(std::iter::repeat(k).take(d as usize));
    }
    HolomorphicSpectrum::new(entries, horizon)
}

/// The Laplace spectrum `0 = λ_0 < λ_1 ≤ …`, complete up to `horizon`.
///
/// Generic over the scalar: exact rationals when values are supplied as decimals and
/// kept exact, `f64` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceSpectrum<R> {
    entries: Vec<R>,
    horizon: R,
}

impl<R: PartialOrd + Zero + Clone + fmt::Debug> LaplaceSpectrum<R> {
    pub fn new(entries: Vec<R>, horizon: R) -> Result<Self> {
        match entries.first() {
            Some(x) if x.is_zero() => {}
            _ => return Err(Error::Validation("Laplace spectrum must start with λ_0 = 0".into())),
        }
        if entries[1..].iter().any(|x| !(*x > R::zero())) {
            return Err(Error::Validation("Laplace eigenvalues after λ_0 must be positive".into()));
        }
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Validation("Laplace eigenvalues must be nondecreasing".into()));
        }
        if entries.last().is_some_and(|x| *x > horizon) {
            return Err(Error::Validation("Laplace eigenvalue above horizon".into()));
        }
        Ok(Self { entries, horizon })
    }

    pub fn entries(&self) -> &[R] {
        &self.entries
    }

    pub fn horizon(&self) -> &R {
        &self.horizon
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, r: usize) -> Result<&R> {
        self.entries
            .get(r)
            .ok_or_else(|| Error::Horizon(format!("Laplace index {r} beyond the {} listed eigenvalues", self.entries.len())))
    }

    pub fn map<S, F: Fn(&R) -> S>(&self, f: F) -> LaplaceSpectrum<S> {
        LaplaceSpectrum { entries: self.entries.iter().map(&f).collect(), horizon: f(&self.horizon) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_two_multiplicities() {
        let t = TopologicalType::surface(2).unwrap();
        let h = holomorphic_spectrum(&t, 6).unwrap();
        let got: Vec<_> = (1..=6).map(|k| h.multiplicity(k)).collect();
        assert_eq!(got, vec![2, 3, 5, 7, 9, 11]);
        assert_eq!(dim_modular_forms(&t, 4).unwrap(), 7);
    }

    #[test]
    fn genus_three_horizon_two() {
        let h = holomorphic_spectrum(&TopologicalType::surface(3).unwrap(), 2).unwrap();
        assert_eq!((h.multiplicity(1), h.multiplicity(2)), (3, 6));
    }

    #[test]
    fn triangle_237() {
        let t = TopologicalType::parse("[0; 2, 3, 7]").unwrap();
        let d: Vec<_> = (1..=6).map(|k| dim_modular_forms(&t, k).unwrap()).collect();
        assert_eq!(d, vec![0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn non_hyperbolic_rejected() {
        assert!(TopologicalType::surface(0).is_err());
        assert!(TopologicalType::surface(1).is_err());
        assert!(TopologicalType::new(0, vec![2, 3, 6]).is_err());
        assert!(TopologicalType::new(0, vec![1, 5, 7]).is_err());
    }

    #[test]
    fn parse_and_display_roundtrip() {
        let t = TopologicalType::parse("[0;3,3,4]").unwrap();
        assert_eq!(t.to_string(), "[0; 3, 3, 4]");
        assert_eq!(TopologicalType::parse(&t.to_string()).unwrap(), t);
        assert_eq!(TopologicalType::parse("2").unwrap().to_string(), "[2]");
    }

    #[test]
    fn laplace_invariants() {
        assert!(LaplaceSpectrum::new(vec![0.0, 3.0, 2.0], 5.0).is_err());
        assert!(LaplaceSpectrum::new(vec![1.0], 5.0).is_err());
        assert!(LaplaceSpectrum::new(vec![0.0, 0.0], 5.0).is_err());
        let l = LaplaceSpectrum::new(vec![0.0, 2.0], 5.0).unwrap();
        assert!(l.get(2).is_err());
    }
}
