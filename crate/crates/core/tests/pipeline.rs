//! Cross-module flows through the public API: sample, check, invert, and
//! compare routes on one configuration per case.

use rank1horn::densities::pdf_additive;
use rank1horn::oracle::{
    sample_additive_oracle, sample_multiplicative_oracle, sample_quadratic_form_oracle,
    sample_quadratic_form_secular,
};
use rank1horn::secular::{
    sample_additive_secular, sample_multiplicative_secular, weights_from_roots_additive,
};
use rank1horn::spectra::{check_additive_sample, check_multiplicative_sample};
use rank1horn::stats::{ks_one_sample, ks_two_sample, NumericCdf};
use rank1horn::{AngularSpectrum, Field, RngState, SpectrumSpec};

#[test]
fn additive_routes_check_and_agree() {
    let spec = SpectrumSpec::simple(vec![1.0, 0.0, -1.0]).unwrap();
    let mut rng = RngState::new(31);
    let mut top_secular = Vec::new();
    let mut top_oracle = Vec::new();
    for _ in 0..800 {
        let s = sample_additive_secular(&spec, 0.8, Field::Complex, &mut rng).unwrap();
        check_additive_sample(&spec, 0.8, &s).unwrap();
        // inverting the roots recovers a valid weight vector
        let w = weights_from_roots_additive(spec.values(), &s.eigenvalues, 0.8).unwrap();
        assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        top_secular.push(s.eigenvalues[0]);
        let o = sample_additive_oracle(&spec, 0.8, Field::Complex, &mut rng).unwrap();
        check_additive_sample(&spec, 0.8, &o).unwrap();
        top_oracle.push(o.eigenvalues[0]);
    }
    let r = ks_two_sample(&top_secular, &top_oracle, 0.01).unwrap();
    assert!(r.pass, "stat {} threshold {}", r.statistic, r.threshold);
}

#[test]
fn multiplicative_degenerate_pipeline_keeps_pins() {
    let spec = AngularSpectrum::new(vec![0.5, 3.5], vec![3, 1]).unwrap();
    let mut rng = RngState::new(32);
    for _ in 0..300 {
        let s = sample_multiplicative_secular(&spec, 1.0, &mut rng).unwrap();
        check_multiplicative_sample(&spec, 1.0, &s).unwrap();
        assert_eq!(s.deterministic, vec![(0.5, 2)]);
        let o = sample_multiplicative_oracle(&spec, 1.0, &mut rng).unwrap();
        check_multiplicative_sample(&spec, 1.0, &o).unwrap();
        assert_eq!(o.deterministic, vec![(0.5, 2)]);
    }
}

#[test]
fn secular_draws_match_quadrature_cdf() {
    let mut rng = RngState::new(33);
    let mut top = Vec::new();
    for _ in 0..4000 {
        let s = sample_additive_secular(
            &SpectrumSpec::simple(vec![1.0, 0.0]).unwrap(),
            1.0,
            Field::Complex,
            &mut rng,
        )
        .unwrap();
        top.push(s.eigenvalues[0]);
    }
    let cdf = NumericCdf::build(
        |x| pdf_additive(&[1.0, 0.0], 1.0, &[x]).unwrap_or(f64::NAN),
        1.0,
        2.0,
        (false, false),
        1024,
        1e-9,
    )
    .unwrap();
    let r = ks_one_sample(&top, |x| cdf.eval(x), 0.01).unwrap();
    assert!(r.pass, "stat {} threshold {}", r.statistic, r.threshold);
}

#[test]
fn quadratic_form_routes_agree() {
    let spec = SpectrumSpec::simple(vec![2.0, 1.0, 0.0]).unwrap();
    let mut rng = RngState::new(34);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for _ in 0..3000 {
        a.push(sample_quadratic_form_secular(&spec, Field::Complex, &mut rng).unwrap());
        b.push(sample_quadratic_form_oracle(&spec, Field::Complex, &mut rng).unwrap());
    }
    let r = ks_two_sample(&a, &b, 0.01).unwrap();
    assert!(r.pass, "stat {} threshold {}", r.statistic, r.threshold);
}
