use std::collections::BTreeMap;

use hyperboot::equations::{check_all, check_hb5, EquationId, Hb6Mode, Tolerance};
use hyperboot::indexset::{Index, SpectralContext, Window};
use hyperboot::orbifold::{holomorphic_spectrum, LaplaceSpectrum, TopologicalType};
use hyperboot::spectrum::{generate_fixture, generate_ladder, ExactSpectrum, LadderSeed, SignedSqrt, Spectrum};
use hyperboot::{q, qi, Complex};

const GATED: [EquationId; 6] = [EquationId::Hb1, EquationId::Hb2, EquationId::Hb3, EquationId::Hb4, EquationId::Hb5, EquationId::NumRecursion];

fn fixture() -> Spectrum {
    generate_fixture(&TopologicalType::surface(2).unwrap(), Window::new(4, 8), 3, None).unwrap()
}

#[test]
fn fixture_survives_a_file_roundtrip() {
    let spec = fixture();
    let text = spec.serialize();
    let back = Spectrum::deserialize(&text).unwrap();
    assert_eq!(back.serialize(), text);
    let report = check_all(&back, &Tolerance::default(), &[], Hb6Mode::ListOnly).unwrap();
    assert!(report.passes(false), "{}", report.to_table());
}

#[test]
fn corrupted_entry_is_located() {
    let mut spec = fixture();
    let (&(i, j, l), v) = spec.entries().find(|((i, j, l), _)| i.i1 < 0 && j.i1 < 0 && l.i1 > 0 && l.i2 != 0).unwrap();
    let v = *v;
    spec.set(i, j, l, v + Complex::new(0.25, 0.0)).unwrap();
    let report = check_hb5(&spec, &Tolerance::default()).unwrap();
    assert!(report.violations > 0);
    assert!(report.max_residual > 1e-3);
    // The worst instance involves the corrupted eigen-channel.
    let worst = report.worst.unwrap();
    assert!(worst.contains(&format!("{}", Index::new(l.i1, l.i2 + 1))) || worst.contains(&format!("{l}")), "{worst}");
}

fn exact_ladder() -> ExactSpectrum {
    let h = holomorphic_spectrum(&TopologicalType::surface(2).unwrap(), 6).unwrap();
    let lap = LaplaceSpectrum::new(vec![qi(0), q(13, 4), q(9, 2), q(31, 5)], qi(8)).unwrap();
    let ctx = SpectralContext::new(lap, h);
    let mut base = BTreeMap::new();
    base.insert(Index::VACUUM, SignedSqrt::from_rational(&qi(-1)));
    base.insert(Index::new(1, 0), SignedSqrt::from_rational(&q(3, 5)));
    base.insert(Index::new(2, 0), SignedSqrt::from_rational(&q(-1, 2)));
    base.insert(Index::new(3, 0), SignedSqrt::new(1, q(2, 7)));
    let spec = generate_ladder(ctx, Window::new(3, 6), &LadderSeed { rho: 1, k: 1, base_values: base }).unwrap();
    spec.fill_unit()
}

#[test]
fn exact_ladder_has_zero_residuals() {
    let spec = exact_ladder();
    let report = check_all(&spec, &Tolerance { abs: 0.0, rel: 0.0 }, &[], Hb6Mode::ListOnly).unwrap();
    for id in GATED {
        let e = report.get(id).unwrap();
        assert_eq!(e.max_residual, 0.0, "{} worst {:?}", id.name(), e.worst);
    }
}

#[test]
fn float_copy_of_exact_ladder_is_consistent() {
    let spec = exact_ladder().to_float();
    let report = check_all(&spec, &Tolerance::default(), &[], Hb6Mode::ListOnly).unwrap();
    for id in GATED {
        assert!(report.get(id).unwrap().max_residual < 1e-12, "{}", id.name());
    }
}
