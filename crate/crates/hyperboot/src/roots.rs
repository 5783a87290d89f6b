//! Real-root isolation for exact rational polynomials by Sturm sequences.

use num_traits::{One, Signed, Zero};

use crate::{Rational, UniPoly};

/// A real root enclosed in `[lo, hi]`, with the exact value when it is rational and
/// was recognised during refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct RootEnclosure {
    pub lo: Rational,
    pub hi: Rational,
    pub exact: Option<Rational>,
}

impl RootEnclosure {
    pub fn midpoint_f64(&self) -> f64 {
        match &self.exact {
            Some(x) => crate::to_f64(x),
            None => crate::to_f64(&((&self.lo + &self.hi) / crate::qi(2))),
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Sturm chain of the square-free part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<UniPoly>,
}

impl SturmChain {
    /// # Panics
    /// Panics on the zero polynomial.
    pub fn new(p: &UniPoly) -> Self {
        assert!(!p.is_zero(), "Sturm chain of the zero polynomial");
        let sf = square_free(p);
        let mut chain = vec![monic_abs(&sf), monic_abs(&sf.derivative())];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            // Positive rescaling keeps the sign pattern while taming coefficient growth.
            chain.push(-&monic_abs(&r));
        }
        Self { chain }
    }

    fn variations<F: Fn(&UniPoly) -> i8>(&self, sign: F) -> usize {
        let mut last = 0i8;
        let mut count = 0;
        for p in &self.chain {
            let s = sign(p);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    fn variations_at(&self, x: &Rational) -> usize {
        self.variations(|p| sgn(&p.eval(x)))
    }

    fn variations_at_pos_inf(&self) -> usize {
        self.variations(|p| p.leading().map_or(0, sgn))
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count_between(&self, a: &Rational, b: &Rational) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }

    /// Number of distinct real roots strictly greater than `a`.
    pub fn count_above(&self, a: &Rational) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at_pos_inf())
    }

    pub fn polynomial(&self) -> &UniPoly {
        &self.chain[0]
    }
}

fn sgn(x: &Rational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn monic(p: &UniPoly) -> UniPoly {
    match p.leading() {
        Some(l) => p.scale(&l.recip()),
        None => p.clone(),
    }
}

fn monic_abs(p: &UniPoly) -> UniPoly {
    match p.leading() {
        Some(l) => p.scale(&l.abs().recip()),
        None => p.clone(),
    }
}

fn gcd(a: &UniPoly, b: &UniPoly) -> UniPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let (_, r) = a.div_rem(&b);
        a = b;
        b = monic(&r);
    }
    monic(&a)
}

/// `p / gcd(p, p')`: same roots, all simple.
pub fn square_free(p: &UniPoly) -> UniPoly {
    let d = p.derivative();
    if d.is_zero() {
        return p.clone();
    }
    let g = gcd(p, &d);
    p.div_rem(&g).0
}

/// Cauchy bound: every real root lies in `(-B, B)`.
pub fn cauchy_bound(p: &UniPoly) -> Rational {
    let lead = p.leading().expect("nonzero polynomial").abs();
    let mut m = Rational::zero();
    for c in &p.coeffs()[..p.coeffs().len() - 1] {
        let r = c.abs() / &lead;
        if r > m {
            m = r;
        }
    }
    m + Rational::one()
}

/// The simplest rational (smallest denominator) in the closed interval `[lo, hi]`,
/// by continued-fraction descent.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    if lo > hi {
        return simplest_between(hi, lo);
    }
    if lo.is_negative() && hi.is_positive() || lo.is_zero() || hi.is_zero() {
        return Rational::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if &fl + Rational::one() <= *hi {
        return fl + Rational::one();
    }
    // Both in (fl, fl + 1): recurse on reciprocals of the fractional parts.
    let inner = simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// Refines an isolating interval `(lo, hi]` holding exactly one root of `chain` until
/// its width is at most `eps`; recognises rational roots hit exactly.
pub fn refine(chain: &SturmChain, mut lo: Rational, mut hi: Rational, eps: &Rational) -> RootEnclosure {
    let p = chain.polynomial();
    if p.eval(&hi).is_zero() {
        return RootEnclosure { lo: hi.clone(), hi: hi.clone(), exact: Some(hi) };
    }
    let two = crate::qi(2);
    let mut rounds = 0usize;
    while &hi - &lo > *eps {
        rounds += 1;
        // Periodically try the simplest rational in the bracket: this finds small
        // rational roots exactly and never costs more than one evaluation.
        let mid = if rounds % 4 == 1 { simplest_between(&lo, &hi) } else { (&lo + &hi) / &two };
        let mid = if mid <= lo || mid >= hi { (&lo + &hi) / &two } else { mid };
        if p.eval(&mid).is_zero() {
            return RootEnclosure { lo: mid.clone(), hi: mid.clone(), exact: Some(mid) };
        }
        if chain.count_between(&lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    RootEnclosure { lo, hi, exact: None }
}

/// All distinct real roots, in increasing order, each enclosed to width `eps`.
pub fn real_roots(p: &UniPoly, eps: &Rational) -> Vec<RootEnclosure> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let chain = SturmChain::new(p);
    let b = cauchy_bound(chain.polynomial());
    let mut out = Vec::new();
    isolate(&chain, -b.clone(), b, eps, &mut out);
    out
}

fn isolate(chain: &SturmChain, lo: Rational, hi: Rational, eps: &Rational, out: &mut Vec<RootEnclosure>) {
    match chain.count_between(&lo, &hi) {
        0 => {}
        1 => out.push(refine(chain, lo, hi, eps)),
        _ => {
            let mid = (&lo + &hi) / crate::qi(2);
            isolate(chain, lo, mid.clone(), eps, out);
            isolate(chain, mid, hi, eps, out);
        }
    }
}

/// The largest real root, enclosed to width `eps`, or `None` when there is none.
pub fn largest_real_root(p: &UniPoly, eps: &Rational) -> Option<RootEnclosure> {
    if p.degree().unwrap_or(0) == 0 {
        return None;
    }
    let chain = SturmChain::new(p);
    let b = cauchy_bound(chain.polynomial());
    let mut lo = -b.clone();
    if chain.count_above(&lo) == 0 {
        return None;
    }
    // Shrink from below until exactly one root remains above `lo`.
    let mut top = b;
    loop {
        let n = chain.count_above(&lo);
        if n == 1 {
            break;
        }
        let mid = (&lo + &top) / crate::qi(2);
        if chain.count_above(&mid) >= 1 {
            lo = mid;
        } else {
            top = mid;
        }
    }
    Some(refine(&chain, lo, top, eps))
}
