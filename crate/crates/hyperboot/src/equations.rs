//! Residual checkers for HB1–HB6 and their linear consequences over a truncation window.
//!
//! An instance is enumerated only when every index it references is either outside `I`
//! (read as zero by convention) or inside the window, so truncation never fabricates a
//! residual. Instances off the weight-selection support vanish term by term and are not
//! enumerated.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::indexset::{Index, SpectralScalar, Window};
use crate::spectrum::{Amplitude, CandidateSpectrum, SpectrumFile, Triple};
use crate::{Complex, Error, Result};

/// Per-instance acceptance: `residual ≤ max(abs, rel · scale)`, where `scale` is the sum
/// of the magnitudes of the terms in the instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-9, rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.abs.max(self.rel * scale)
    }
}

/// Which relation a report entry covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationId {
    Hb1,
    Hb2,
    Hb3,
    Hb4,
    Hb5,
    Hb5Inverted,
    NumRecursion,
    Hb6,
}

impl EquationId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Hb1 => "HB1",
            Self::Hb2 => "HB2",
            Self::Hb3 => "HB3",
            Self::Hb4 => "HB4",
            Self::Hb5 => "HB5",
            Self::Hb5Inverted => "HB5-inverted",
            Self::NumRecursion => "num-recursion",
            Self::Hb6 => "HB6",
        }
    }
}

/// Truncated HB6 sums for one quadruple `(i, j, i', j')`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hb6Diagnostic {
    pub quadruple: [Index; 4],
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    /// `Σ |term|` of each side.
    pub lhs_abs: f64,
    pub rhs_abs: f64,
    pub residual: f64,
}

/// Statistics for one relation over the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationReport {
    pub id: EquationId,
    pub instances: u64,
    pub violations: u64,
    pub max_residual: f64,
    pub rms_residual: f64,
    /// Instance with the largest residual (earliest in enumeration order on ties).
    pub worst: Option<String>,
    /// HB6 only: diagnostics for the caller's quadruples and for the worst instance.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub hb6: Vec<Hb6Diagnostic>,
}

impl EquationReport {
    pub fn passes(&self) -> bool {
        self.violations == 0
    }
}

/// Aggregated report; order of `equations` is fixed by [`check_all`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub window: Window,
    pub tolerance: Tolerance,
    pub equations: Vec<EquationReport>,
}

impl ResidualReport {
    pub fn get(&self, id: EquationId) -> Option<&EquationReport> {
        self.equations.iter().find(|e| e.id == id)
    }

    /// True when every relation except HB6 is within tolerance. HB6 sums are truncated,
    /// so they are diagnostics unless `include_hb6` is set.
    pub fn passes(&self, include_hb6: bool) -> bool {
        self.equations.iter().all(|e| e.passes() || (e.id == EquationId::Hb6 && !include_hb6))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14} {:>10} {:>10} {:>12} {:>12}  worst", "equation", "instances", "violations", "max", "rms");
        for e in &self.equations {
            let _ = writeln!(
                s,
                "{:<14} {:>10} {:>10} {:>12.3e} {:>12.3e}  {}",
                e.id.name(),
                e.instances,
                e.violations,
                e.max_residual,
                e.rms_residual,
                e.worst.as_deref().unwrap_or("-")
            );
        }
        s
    }
}

#[derive(Clone, Debug, Default)]
struct Acc {
    count: u64,
    violations: u64,
    max: f64,
    sumsq: f64,
    worst: Option<String>,
}

impl Acc {
    fn push(&mut self, residual: f64, scale: f64, tol: &Tolerance, label: impl FnOnce() -> String) {
        self.count += 1;
        self.sumsq += residual * residual;
        if !tol.accepts(residual, scale) {
            self.violations += 1;
        }
        if residual > self.max || self.worst.is_none() {
            if residual > self.max {
                self.max = residual;
            }
            if residual > 0.0 || self.worst.is_none() {
                self.worst = Some(label());
            }
        }
    }

    fn merge(&mut self, o: Acc) {
        self.count += o.count;
        self.violations += o.violations;
        self.sumsq += o.sumsq;
        if o.max > self.max {
            self.max = o.max;
            self.worst = o.worst;
        } else if self.worst.is_none() {
            self.worst = o.worst;
        }
    }

    fn finish(self, id: EquationId) -> EquationReport {
        EquationReport {
            id,
            instances: self.count,
            violations: self.violations,
            max_residual: self.max,
            rms_residual: if self.count == 0 { 0.0 } else { (self.sumsq / self.count as f64).sqrt() },
            worst: if self.max > 0.0 { self.worst } else { None },
            hb6: Vec::new(),
        }
    }
}

/// Runs `f` over `items` in parallel and merges the per-item accumulators in order.
fn reduce<T: Sync, F: Fn(&T) -> Acc + Sync + Send>(items: &[T], f: F) -> Acc {
    let parts: Vec<Acc> = items.par_iter().map(f).collect();
    let mut total = Acc::default();
    for p in parts {
        total.merge(p);
    }
    total
}

/// Shared lookups for one spectrum.
struct View<'a, A: Amplitude> {
    spec: &'a CandidateSpectrum<A>,
    window: Window,
    lambda: BTreeMap<i64, A::Real>,
    all: Vec<Index>,
}

impl<'a, A: Amplitude> View<'a, A> {
    fn new(spec: &'a CandidateSpectrum<A>) -> Result<Self> {
        let window = spec.window();
        let ctx = spec.ctx();
        ctx.check_window(window)?;
        let r1 = window.r1 as i64;
        let mut lambda = BTreeMap::new();
        for r in -r1..=r1 {
            lambda.insert(r, ctx.lambda_of(r)?);
        }
        Ok(Self { spec, window, lambda, all: ctx.enumerate(window)? })
    }

    fn member(&self, i: Index) -> bool {
        self.spec.ctx().member(i).unwrap_or(false)
    }

    /// In `I ∩ window`, or outside `I` (known to be zero).
    fn known(&self, i: Index) -> bool {
        !self.member(i) || self.window.contains(i)
    }

    fn lambda(&self, r: i64) -> A::Real {
        self.lambda[&r].clone()
    }

    fn raising(&self, i: Index) -> A::Real {
        self.lambda(i.i1).plus(&A::Real::from_i64(i.i2 * (i.i2 + 1)))
    }

    fn lowering(&self, i: Index) -> A::Real {
        self.lambda(i.i1).plus(&A::Real::from_i64(i.i2 * (i.i2 - 1)))
    }

    fn get(&self, i: Index, j: Index, l: Index) -> A {
        self.spec.get(i, j, l)
    }

    /// Members of `I ∩ window` with the given weight.
    fn with_weight(&self, l2: i64) -> impl Iterator<Item = Index> + '_ {
        let r1 = self.window.r1 as i64;
        (-r1..=r1).map(move |l1| Index::new(l1, l2)).filter(move |&l| self.window.contains(l) && self.member(l))
    }
}

fn one<R: SpectralScalar>() -> R {
    R::from_i64(1)
}

fn label3(i: Index, j: Index, l: Index) -> String {
    format!("(i,j,l)=({i},{j},{l})")
}

/// HB1 on a canonical store: symmetrised reads make every residual exactly zero.
pub fn check_hb1<A: Amplitude>(spec: &CandidateSpectrum<A>, tol: &Tolerance) -> Result<EquationReport> {
    let v = View::new(spec)?;
    let acc = reduce(&v.all, |&i| {
        let mut acc = Acc::default();
        for &j in v.all.iter().filter(|&&j| j > i) {
            for l in v.with_weight(i.i2 + j.i2) {
                let (r, s) = A::relation_residual(&[(1, one(), v.get(i, j, l)), (-1, one(), v.get(j, i, l))]);
                acc.push(r, s, tol, || label3(i, j, l));
            }
        }
        acc
    });
    Ok(acc.finish(EquationId::Hb1))
}

/// HB1 on foreign data before canonicalisation: wherever a file lists both orientations
/// `(i, j, ℓ)` and `(j, i, ℓ)`, the two values must agree. A single listed orientation
/// stands for both.
pub fn check_hb1_raw(file: &SpectrumFile, tol: &Tolerance) -> Result<EquationReport> {
    let mut map: BTreeMap<Triple, Complex> = BTreeMap::new();
    for (t, v) in file.raw_entries()? {
        map.insert(t, v);
    }
    let mut acc = Acc::default();
    for (&(i, j, l), &v) in &map {
        if i > j && map.contains_key(&(j, i, l)) {
            continue;
        }
        match map.get(&(j, i, l)) {
            Some(&w) if i != j => acc.push((v - w).norm(), v.norm() + w.norm(), tol, || label3(i, j, l)),
            _ => acc.push(0.0, v.norm(), tol, || label3(i, j, l)),
        }
    }
    Ok(acc.finish(EquationId::Hb1))
}

/// HB2: every stored value must lie on `i2 + j2 = ℓ2`.
pub fn check_hb2<A: Amplitude>(spec: &CandidateSpectrum<A>, tol: &Tolerance) -> Result<EquationReport> {
    View::new(spec)?;
    let mut acc = Acc::default();
    for (&(i, j, l), v) in spec.entries() {
        let r = if i.i2 + j.i2 == l.i2 { 0.0 } else { v.magnitude() };
        acc.push(r, v.magnitude(), tol, || label3(i, j, l));
    }
    Ok(acc.finish(EquationId::Hb2))
}

/// HB3: `conj C_{ij}^ℓ = C_{ī j̄}^{ℓ̄}`.
pub fn check_hb3<A: Amplitude>(spec: &CandidateSpectrum<A>, tol: &Tolerance) -> Result<EquationReport> {
    let v = View::new(spec)?;
    let acc = reduce(&v.all, |&i| {
        let mut acc = Acc::default();
        for &j in v.all.iter().filter(|&&j| j >= i) {
            for l in v.with_weight(i.i2 + j.i2) {
                let a = v.get(i, j, l).conj();
                let b = v.get(i.bar(), j.bar(), l.bar());
                let (r, s) = A::relation_residual(&[(1, one(), a), (-1, one(), b)]);
                acc.push(r, s, tol, || label3(i, j, l));
            }
        }
        acc
    });
    Ok(acc.finish(EquationId::Hb3))
}

/// HB4: `C_{(0,0) j}^ℓ = 1_{j=ℓ}`.
pub fn check_hb4<A: Amplitude>(spec: &CandidateSpectrum<A>, tol: &Tolerance) -> Result<EquationReport> {
    let v = View::new(spec)?;
    let mut acc = Acc::default();
    for &j in &v.all {
        for l in v.with_weight(j.i2) {
            let target = A::from_sign(if j == l { 1 } else { 0 });
            let (r, s) = A::relation_residual(&[(1, one(), v.get(Index::VACUUM, j, l)), (-1, one(), target)]);
            acc.push(r, s, tol, || label3(Index::VACUUM, j, l));
        }
    }
    Ok(acc.finish(EquationId::Hb4))
}

/// HB5: `sqrt(λ_ℓ + ℓ2(ℓ2−1)) C_{ij}^{ℓ⁻} = sqrt(λ_i + i2(i2+1)) C_{i⁺j}^ℓ + sqrt(λ_j + j2(j2+1)) C_{ij⁺}^ℓ`.
pub fn check_hb5<A: Amplitude>(spec: &CandidateSpectrum<A>, tol: &Tolerance) -> Result<EquationReport> {
    let v = View::new(spec)?;
    let acc = reduce(&v.all, |&i| {
        let mut acc = Acc::default();
        if !v.known(i.raise()) {
            return acc;
        }
        for &j in v.all.iter().filter(|&&j| v.known(j.raise())) {
            for l in v.with_weight(i.i2 + j.i2 + 1).filter(|&l| v.known(l.lower())) {
                let terms = [
                    (1, v.lowering(l), v.get(i, j, l.lower())),
                    (-1, v.raising(i), v.get(i.raise(), j, l)),
                    (-1, v.raising(j), v.get(i, j.raise(), l)),
                ];
                let (r, s) = A::relation_residual(&terms);
                acc.push(r, s, tol, || label3(i, j, l));
            }
        }
        acc
    });
    Ok(acc.finish(EquationId::Hb5))
}

/// The conjugate form of HB5: `sqrt(λ_ℓ + ℓ2(ℓ2+1)) C_{ij}^{ℓ⁺} = sqrt(λ_i + i2(i2−1)) C_{i⁻j}^ℓ + sqrt(λ_j + j2(j2−1)) C_{ij⁻}^ℓ`.
pub fn check_hb5_inverted<A: Amplitude>(spec: &CandidateSpectrum<A>, tol: &Tolerance) -> Result<EquationReport> {
    let v = View::new(spec)?;
    let acc = reduce(&v.all, |&i| {
        let mut acc = Acc::default();
        if !v.known(i.lower()) {
            return acc;
        }
        for &j in v.all.iter().filter(|&&j| v.known(j.lower())) {
            for l in v.with_weight(i.i2 + j.i2 - 1).filter(|&l| v.known(l.raise())) {
                let terms = [
                    (1, v.raising(l), v.get(i, j, l.raise())),
                    (-1, v.lowering(i), v.get(i.lower(), j, l)),
                    (-1, v.lowering(j), v.get(i, j.lower(), l)),
                ];
                let (r, s) = A::relation_residual(&terms);
                acc.push(r, s, tol, || label3(i, j, l));
            }
        }
        acc
    });
    Ok(acc.finish(EquationId::Hb5Inverted))
}

/// `(λ_ℓ − λ_i − λ_j + 2 i2 j2) C_{ij}^ℓ = sqrt(raise_i · lower_j) C_{i⁺j⁻}^ℓ + sqrt(lower_i · raise_j) C_{i⁻j⁺}^ℓ`.
pub fn check_num_recursion<A: Amplitude>(spec: &CandidateSpectrum<A>, tol: &Tolerance) -> Result<EquationReport> {
    let v = View::new(spec)?;
    let acc = reduce(&v.all, |&i| {
        let mut acc = Acc::default();
        if !v.known(i.raise()) || !v.known(i.lower()) {
            return acc;
        }
        for &j in v.all.iter().filter(|&&j| v.known(j.raise()) && v.known(j.lower())) {
            for l in v.with_weight(i.i2 + j.i2) {
                let coef = v
                    .lambda(l.i1)
                    .plus(&A::Real::from_i64(2 * i.i2 * j.i2))
                    .plus(&neg(&v.lambda(i.i1)))
                    .plus(&neg(&v.lambda(j.i1)));
                let sign = if coef.to_f64() < 0.0 { -1 } else { 1 };
                let sq = square(&coef);
                let terms = [
                    (sign, sq, v.get(i, j, l)),
                    (-1, mul(&v.raising(i), &v.lowering(j)), v.get(i.raise(), j.lower(), l)),
                    (-1, mul(&v.lowering(i), &v.raising(j)), v.get(i.lower(), j.raise(), l)),
                ];
                let (r, s) = A::relation_residual(&terms);
                acc.push(r, s, tol, || label3(i, j, l));
            }
        }
        acc
    });
    Ok(acc.finish(EquationId::NumRecursion))
}

fn neg<R: SpectralScalar>(x: &R) -> R {
    x.times(&R::from_i64(-1))
}

fn square<R: SpectralScalar>(x: &R) -> R {
    x.times(x)
}

fn mul<R: SpectralScalar>(x: &R, y: &R) -> R {
    x.times(y)
}

/// Which HB6 quadruples to evaluate besides a caller-supplied list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hb6Mode {
    /// Only the supplied list.
    ListOnly,
    /// The supplied list plus every `(i, ī, j, j̄)` with `i ≤ j`.
    Diagonal,
    /// Every quadruple in the window with total weight zero.
    Exhaustive,
}

fn hb6_sums<A: Amplitude>(v: &View<'_, A>, q: [Index; 4]) -> Hb6Diagnostic {
    let [i, j, ip, jp] = q;
    let side = |a: Index, b: Index, c: Index, d: Index| {
        let mut sum = Complex::new(0.0, 0.0);
        let mut abs = 0.0;
        if a.i2 + b.i2 + c.i2 + d.i2 == 0 {
            for l in v.with_weight(a.i2 + b.i2) {
                let sign = if l.i2.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let t = v.get(a, b, l).to_complex() * v.get(c, d, l.bar()).to_complex() * sign;
                abs += t.norm();
                sum += t;
            }
        }
        (sum, abs)
    };
    let (lhs, lhs_abs) = side(i, j, ip, jp);
    let (rhs, rhs_abs) = side(i, ip, j, jp);
    Hb6Diagnostic {
        quadruple: q,
        lhs: [lhs.re, lhs.im],
        rhs: [rhs.re, rhs.im],
        lhs_abs,
        rhs_abs,
        residual: (lhs - rhs).norm(),
    }
}

/// HB6 with sums truncated to the window. Residuals are diagnostics: the report carries
/// both sides and their absolute sums, never a convergence claim.
pub fn check_hb6<A: Amplitude>(spec: &CandidateSpectrum<A>, tol: &Tolerance, list: &[[Index; 4]], mode: Hb6Mode) -> Result<EquationReport> {
    let v = View::new(spec)?;
    for q in list {
        if let Some(x) = q.iter().find(|x| !v.window.contains(**x)) {
            return Err(Error::Horizon(format!("HB6 quadruple index {x} outside the window")));
        }
    }
    let mut acc = Acc::default();
    let mut details = Vec::new();
    let mut worst: Option<Hb6Diagnostic> = None;
    let mut record = |acc: &mut Acc, d: Hb6Diagnostic| {
        let better = worst.as_ref().is_none_or(|w| d.residual > w.residual);
        let label = format!("(i,j,i',j')=({},{},{},{})", d.quadruple[0], d.quadruple[1], d.quadruple[2], d.quadruple[3]);
        acc.push(d.residual, d.lhs_abs + d.rhs_abs, tol, || label);
        if better {
            worst = Some(d);
        }
    };
    for &q in list {
        let d = hb6_sums(&v, q);
        details.push(d.clone());
        record(&mut acc, d);
    }
    let generated: Vec<Vec<Hb6Diagnostic>> = match mode {
        Hb6Mode::ListOnly => Vec::new(),
        Hb6Mode::Diagonal => v
            .all
            .par_iter()
            .map(|&i| v.all.iter().filter(|&&j| j >= i).map(|&j| hb6_sums(&v, [i, i.bar(), j, j.bar()])).collect())
            .collect(),
        Hb6Mode::Exhaustive => v
            .all
            .par_iter()
            .map(|&i| {
                let mut out = Vec::new();
                for &j in &v.all {
                    for &ip in &v.all {
                        let jp2 = -(i.i2 + j.i2 + ip.i2);
                        for jp in v.with_weight(jp2) {
                            out.push(hb6_sums(&v, [i, j, ip, jp]));
                        }
                    }
                }
                out
            })
            .collect(),
    };
    for d in generated.into_iter().flatten() {
        record(&mut acc, d);
    }
    let mut report = acc.finish(EquationId::Hb6);
    if let Some(w) = worst {
        if !details.contains(&w) {
            details.push(w);
        }
    }
    report.hb6 = details;
    Ok(report)
}

/// Runs every checker in a fixed order.
pub fn check_all<A: Amplitude>(spec: &CandidateSpectrum<A>, tol: &Tolerance, hb6_list: &[[Index; 4]], mode: Hb6Mode) -> Result<ResidualReport> {
    Ok(ResidualReport {
        window: spec.window(),
        tolerance: *tol,
        equations: vec![
            check_hb1(spec, tol)?,
            check_hb2(spec, tol)?,
            check_hb3(spec, tol)?,
            check_hb4(spec, tol)?,
            check_hb5(spec, tol)?,
            check_hb5_inverted(spec, tol)?,
            check_num_recursion(spec, tol)?,
            check_hb6(spec, tol, hb6_list, mode)?,
        ],
    })
}

/// Checks `C_{ij}^{(0,0)} = (−1)^{i2} 1_{i = j̄}` for every stored triple with `ℓ = (0,0)`
/// and, for each `i` in `support`, that `C_{i ī}^{(0,0)}` has the required value.
pub fn check_vacuum_identity<A: Amplitude>(spec: &CandidateSpectrum<A>, support: &[Index], tol: &Tolerance) -> EquationReport {
    let expected = |i: Index, j: Index| A::from_sign(if i == j.bar() { if i.i2.rem_euclid(2) == 0 { 1 } else { -1 } } else { 0 });
    let mut acc = Acc::default();
    for (&(i, j, l), x) in spec.entries() {
        if l == Index::VACUUM {
            let (r, s) = A::relation_residual(&[(1, one(), x.clone()), (-1, one(), expected(i, j))]);
            acc.push(r, s, tol, || label3(i, j, l));
        }
    }
    for &i in support {
        let (r, s) = A::relation_residual(&[(1, one(), spec.get(i, i.bar(), Index::VACUUM)), (-1, one(), expected(i, i.bar()))]);
        acc.push(r, s, tol, || label3(i, i.bar(), Index::VACUUM));
    }
    acc.finish(EquationId::Hb4)
}
