//! Verification and computation toolkit for the hyperbolic bootstrap equations.
//!
//! The crate models candidate spectra of compact hyperbolic 2-orbifolds (Laplace
//! eigenvalues, holomorphic weights and structure constants), checks the bootstrap
//! equations on truncated data, evaluates the recurrence-defined polynomial families in
//! exact rational arithmetic, derives λ₁ bounds from extremal functionals, and verifies
//! the hypergeometric crossing identities numerically.
//!
//! Containers are generic over their scalar through `num-traits`; the aliases below fix
//! the concrete choices used throughout.

pub mod bounds;
pub mod equations;
pub mod error;
pub mod hypergeom;
pub mod indexset;
pub mod orbifold;
pub mod poly;
pub mod recurrences;
pub mod roots;
pub mod spectrum;

pub use error::{Error, Result};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Complex scalar used for structure constants.
pub type Complex = num_complex::Complex64;
/// Exact univariate polynomial (B_{k,n}, q_{k,n}, functional polynomials).
pub type UniPoly = poly::UnivariatePolynomial<Rational>;
/// Exact bivariate polynomial in (λ, μ) (p_n, s_n, corrections).
pub type BiPoly = poly::BivariatePolynomial<Rational>;
/// Floating-point spectral context.
pub type Context = indexset::SpectralContext<f64>;
/// Exact-rational spectral context.
pub type ExactContext = indexset::SpectralContext<Rational>;

/// Shorthand for the rational `n/d`.
///
/// # Panics
/// Panics when `d == 0`.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Shorthand for the integer `n` as a rational.
pub fn qi(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Best-effort conversion of a rational to `f64`.
pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        // Fall back through logarithms for values outside the direct range.
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Parses a plain decimal string (`-12.375`, `4`, `1e-3`) into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    use num_bigint::BigInt;
    let bad = || Error::Parse { location: String::new(), message: format!("invalid decimal `{s}`") };
    let t = s.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(p) => (&t[..p], t[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() { BigInt::from(0) } else { digits.parse().map_err(|_| bad())? };
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(n);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}
