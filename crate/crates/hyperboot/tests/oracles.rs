//! Library results against values computed by unrelated routes.

use hyperboot::bounds::{crossing_rhs, solve_cancellation};
use hyperboot::hypergeom::{f21, f21_real, ComplexQ, Precision};
use hyperboot::indexset::{SpectralContext, Window};
use hyperboot::orbifold::{holomorphic_spectrum, LaplaceSpectrum, TopologicalType};
use hyperboot::spectrum::{add_discrete_column, Spectrum};
use hyperboot::{q, qi, to_f64, Complex, Rational};

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        (a, b) = ((a + b) / 2.0, (a * b).sqrt());
    }
    a
}

#[test]
fn quarter_lambda_is_the_complete_elliptic_integral() {
    // λ = 1/4 means s = 1/2, and ₂F₁(½, ½; 1; z) = 1 / AGM(1, √(1−z)).
    for (num, den) in [(1, 10), (1, 2), (9, 10), (99, 100)] {
        let z = num as f64 / den as f64;
        let want = 1.0 / agm(1.0, (1.0 - z).sqrt());
        let v = f21(&q(1, 4), &ComplexQ::new(q(num, den), qi(0)), Precision { digits: 30 }).unwrap();
        assert!((v.value.re - want).abs() < 1e-14 * want, "z={z}: {} vs {want}", v.value.re);
        let (r, _) = f21_real(0.25, z).unwrap();
        assert!((r - want).abs() < 1e-13 * want);
    }
}

#[test]
fn zero_lambda_and_small_lambda_expansion() {
    // λ = 0 leaves only the constant term.
    let v = f21(&qi(0), &ComplexQ::new(q(3, 10), q(-1, 5)), Precision::default()).unwrap();
    assert_eq!(v.value, Complex::new(1.0, 0.0));
    // To first order in λ the n-th coefficient is λ/n, so ₂F₁ = 1 − λ log(1 − z).
    let z: f64 = 0.3;
    let lambda = 1e-9;
    let (r, _) = f21_real(lambda, z).unwrap();
    assert!((r - 1.0 + lambda * (1.0 - z).ln()).abs() < 1e-15);
}

fn discrete_spectrum() -> Spectrum {
    // Genus 2: half-weights 1 (×2), 2 (×3), 3 (×5), 4 (×7).
    let h = holomorphic_spectrum(&TopologicalType::surface(2).unwrap(), 4).unwrap();
    let lap: Vec<f64> = (0..=12).map(|r| if r == 0 { 0.0 } else { 2.0 + 1.5 * r as f64 }).collect();
    let ctx = SpectralContext::new(LaplaceSpectrum::new(lap, 21.0).unwrap(), h);
    let mut spec = Spectrum::new(ctx, Window::new(11, 9)).unwrap();
    // ρ = 1 has k = 1; σ = 3 carries weight 2 = 2k, σ = 11 weight 4 = 2k + 2.
    add_discrete_column(&mut spec, 1, 3, Complex::new(0.8, 0.0)).unwrap();
    add_discrete_column(&mut spec, 1, 11, Complex::new(-0.3, 0.0)).unwrap();
    spec
}

#[test]
fn cancellation_removes_discrete_columns_numerically() {
    let spec = discrete_spectrum();
    for a in [vec![qi(1)], vec![qi(-1), qi(1)], vec![q(1, 3), qi(-2), q(5, 7)]] {
        let b = solve_cancellation(1, &a).unwrap();
        let af: Vec<f64> = a.iter().map(to_f64).collect();
        let bf: Vec<f64> = b.iter().map(to_f64).collect();
        let (value, abs) = crossing_rhs(&spec, 1, &af, &bf).unwrap();
        assert!(abs > 1e-3, "columns do not reach the combination");
        assert!(value.abs() < 1e-12 * abs, "a={a:?}: {value} against Σ|term| = {abs}");
        // Without the cancelling b the same data gives a visible contribution.
        let (raw, _) = crossing_rhs(&spec, 1, &af, &vec![0.0; af.len()]).unwrap();
        assert!(raw.abs() > 1e-6);
    }
}

#[test]
fn order_zero_cancellation_matches_by_hand() {
    // One column of weight 2k: V(0,0) = D, V(0,1) from the conjugate relation; the
    // combination is a_0 |V(0,0)|² + b_0 |V(0,1)|² with |V(0,1)|² = D (2k(2k+1) − 2k(2k−1)) / (4·2k).
    for k in 1..=5i64 {
        let b = solve_cancellation(k as u32, &[qi(1)]).unwrap();
        let ratio: Rational = q(2 * k * (2 * k + 1) - 2 * k * (2 * k - 1), 8 * k);
        assert_eq!(qi(1) - &b[0] * ratio, qi(0));
    }
}
