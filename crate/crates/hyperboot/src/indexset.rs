//! The index set I ⊂ ℤ², its involution and ladder maps, and the raising/lowering
//! coefficients.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::orbifold::{HolomorphicSpectrum, LaplaceSpectrum};
use crate::{Error, Rational, Result};

/// Scalar used for eigenvalues: `f64` or exact [`Rational`].
pub trait SpectralScalar: Clone + PartialOrd + Zero + fmt::Debug + Send + Sync {
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
}

impl SpectralScalar for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

impl SpectralScalar for Rational {
    fn from_i64(n: i64) -> Self {
        crate::qi(n)
    }
    fn to_f64(&self) -> f64 {
        crate::to_f64(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

/// A point `(i1, i2)` of ℤ²; `i1` selects the representation, `i2` the weight.
///
/// Ordering is lexicographic in `(i1, i2)`, which fixes every enumeration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Index {
    pub i1: i64,
    pub i2: i64,
}

impl Index {
    pub const VACUUM: Index = Index { i1: 0, i2: 0 };

    pub const fn new(i1: i64, i2: i64) -> Self {
        Self { i1, i2 }
    }

    /// `ī = (i1, −i2)`.
    pub fn bar(self) -> Self {
        Self::new(self.i1, -self.i2)
    }

    /// `i⁺`.
    pub fn raise(self) -> Self {
        self.shift(1)
    }

    /// `i⁻`.
    pub fn lower(self) -> Self {
        self.shift(-1)
    }

    /// `i^{+n}`.
    pub fn shift(self, n: i64) -> Self {
        Self::new(self.i1, self.i2 + n)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i1, self.i2)
    }
}

/// Rectangular truncation `|i1| ≤ r1, |i2| ≤ r2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub r1: u32,
    pub r2: u32,
}

impl Window {
    pub fn new(r1: u32, r2: u32) -> Self {
        Self { r1, r2 }
    }

    pub fn contains(&self, i: Index) -> bool {
        i.i1.unsigned_abs() <= self.r1 as u64 && i.i2.unsigned_abs() <= self.r2 as u64
    }
}

/// Laplace and holomorphic spectra paired, so that `λ_r` is defined for all `r ∈ ℤ`
/// within the horizons.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralContext<R> {
    pub laplace: LaplaceSpectrum<R>,
    pub holomorphic: HolomorphicSpectrum,
}

impl<R: SpectralScalar> SpectralContext<R> {
    pub fn new(laplace: LaplaceSpectrum<R>, holomorphic: HolomorphicSpectrum) -> Self {
        Self { laplace, holomorphic }
    }

    /// `λ_r`, with `λ_r = −k_{−r}(k_{−r} − 1)` for `r < 0`.
    pub fn lambda_of(&self, r: i64) -> Result<R> {
        if r >= 0 {
            self.laplace.get(r as usize).cloned()
        } else {
            let k = self.holomorphic.weight(r.unsigned_abs() as usize)? as i64;
            Ok(R::from_i64(-k * (k - 1)))
        }
    }

    /// Membership in I: `i1 > 0`, or `i = (0,0)`, or `i1 < 0` and `|i2| ≥ k_{−i1}`.
    pub fn member(&self, i: Index) -> Result<bool> {
        Ok(match i.i1 {
            0 => i.i2 == 0,
            r if r > 0 => true,
            r => i.i2.unsigned_abs() >= self.holomorphic.weight(r.unsigned_abs() as usize)? as u64,
        })
    }

    /// `λ_{i1} + i2(i2 + 1)`, the square of the raising coefficient.
    pub fn raising_radicand(&self, i: Index) -> Result<R> {
        Ok(self.lambda_of(i.i1)?.plus(&R::from_i64(i.i2 * (i.i2 + 1))))
    }

    /// `λ_{i1} + i2(i2 − 1)`, the square of the lowering coefficient.
    pub fn lowering_radicand(&self, i: Index) -> Result<R> {
        Ok(self.lambda_of(i.i1)?.plus(&R::from_i64(i.i2 * (i.i2 - 1))))
    }

    /// `sqrt(λ_{i1} + i2(i2 + 1))` for `i ∈ I`.
    pub fn raising_coefficient(&self, i: Index) -> Result<f64> {
        self.require_member(i)?;
        Ok(self.raising_radicand(i)?.to_f64().max(0.0).sqrt())
    }

    /// `sqrt(λ_{i1} + i2(i2 − 1))` for `i ∈ I`.
    pub fn lowering_coefficient(&self, i: Index) -> Result<f64> {
        self.require_member(i)?;
        Ok(self.lowering_radicand(i)?.to_f64().max(0.0).sqrt())
    }

    fn require_member(&self, i: Index) -> Result<()> {
        if self.member(i)? {
            Ok(())
        } else {
            Err(Error::Domain(format!("{i} is not in the index set")))
        }
    }

    /// Refuses windows that reach beyond either spectrum's listed entries.
    pub fn check_window(&self, w: Window) -> Result<()> {
        let r1 = w.r1 as usize;
        if r1 >= self.laplace.len() {
            return Err(Error::Horizon(format!(
                "window r1 = {r1} needs λ_0..λ_{r1}, only {} Laplace eigenvalues listed",
                self.laplace.len()
            )));
        }
        if r1 > self.holomorphic.len() {
            return Err(Error::Horizon(format!(
                "window r1 = {r1} needs k_1..k_{r1}, only {} holomorphic weights listed",
                self.holomorphic.len()
            )));
        }
        Ok(())
    }

    /// `I ∩ window` in lexicographic order.
    pub fn enumerate(&self, w: Window) -> Result<Vec<Index>> {
        self.check_window(w)?;
        let (r1, r2) = (w.r1 as i64, w.r2 as i64);
        let mut out = Vec::new();
        for i1 in -r1..=r1 {
            for i2 in -r2..=r2 {
                let i = Index::new(i1, i2);
                if self.member(i)? {
                    out.push(i);
                }
            }
        }
        Ok(out)
    }

    /// The same context with eigenvalues converted to `f64`.
    pub fn to_float(&self) -> SpectralContext<f64> {
        SpectralContext { laplace: self.laplace.map(|x| x.to_f64()), holomorphic: self.holomorphic.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbifold::{holomorphic_spectrum, TopologicalType};

    fn genus2() -> SpectralContext<f64> {
        let h = holomorphic_spectrum(&TopologicalType::surface(2).unwrap(), 6).unwrap();
        let l = LaplaceSpectrum::new(vec![0.0, 3.8, 5.4, 8.2], 9.0).unwrap();
        SpectralContext::new(l, h)
    }

    #[test]
    fn membership_examples() {
        let c = genus2();
        assert!(c.member(Index::VACUUM).unwrap());
        assert!(c.member(Index::new(3, -5)).unwrap());
        assert!(!c.member(Index::new(-1, 0)).unwrap());
        assert!(c.member(Index::new(-1, 1)).unwrap());
        assert!(!c.member(Index::new(-1, 1).lower()).unwrap());
        assert!(c.member(Index::new(-200, 0)).is_err());
    }

    #[test]
    fn ladder_maps() {
        assert_eq!(Index::new(-1, 3).bar(), Index::new(-1, -3));
        assert_eq!(Index::new(2, 0).raise(), Index::new(2, 1));
        assert_eq!(Index::new(2, 0).shift(-4), Index::new(2, -4));
    }

    #[test]
    fn lambda_indexing() {
        let c = genus2();
        assert_eq!(c.lambda_of(0).unwrap(), 0.0);
        assert_eq!(c.lambda_of(-1).unwrap(), 0.0);
        assert_eq!(c.lambda_of(-3).unwrap(), -2.0);
        assert!(c.lambda_of(4).is_err());
    }

    #[test]
    fn coefficients() {
        let c = genus2();
        assert_eq!(c.raising_coefficient(Index::VACUUM).unwrap(), 0.0);
        // k_3 = 2
        assert_eq!(c.lowering_coefficient(Index::new(-3, 2)).unwrap(), 0.0);
        assert_eq!(c.raising_coefficient(Index::new(-3, 2)).unwrap(), 2.0);
        assert!(c.raising_coefficient(Index::new(-1, 0)).is_err());
    }

    #[test]
    fn window_horizon_refused() {
        let c = genus2();
        assert!(c.enumerate(Window::new(4, 2)).is_err());
        let all = c.enumerate(Window::new(3, 2)).unwrap();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }
}
