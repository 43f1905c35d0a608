//! Verification suites behind `rank1horn verify`. Each suite returns a list
//! of reports; a report passes when its statistic stays at or below its
//! threshold. Sampling is parallel but deterministic: draw i of a given
//! check uses RNG stream base + i, so reruns with one seed reproduce bytes.

use crate::TestArg;
use rank1horn::densities::{
    pdf_additive, pdf_heckman_n3, pdf_multiplicative, pdf_projection, pdf_projection_real,
    pdf_quadratic_form, pdf_spacing_n2,
};
use rank1horn::oracle::{
    sample_additive_oracle, sample_diagonal_entries, sample_multiplicative_oracle,
    sample_projection_oracle, sample_quadratic_form_oracle,
};
use rank1horn::secular::{
    cauchy_double_alternant, sample_additive_secular, sample_multiplicative_secular,
    sample_projection_secular,
};
use rank1horn::spectra::{
    check_additive_sample, check_multiplicative_sample, check_projection_sample,
};
use rank1horn::stats::{
    change_of_variables_check, chi_square_gof, integrate_2d, integrate_pdf, ks_one_sample,
    ks_two_sample, roundtrip_report, NumericCdf, RoundtripTask,
};
use rank1horn::{
    AngularSpectrum, EigenSample, Field, Result, RngState, SpectrumSpec, TestReport,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

const LEVEL: f64 = 0.01;
const MASS_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-9;

pub fn run_suite(which: TestArg, seed: u64, n: usize) -> Result<Vec<TestReport>> {
    let mut reports = Vec::new();
    if matches!(which, TestArg::Normalization | TestArg::All) {
        reports.extend(normalization_reports()?);
    }
    if matches!(which, TestArg::Roundtrip | TestArg::All) {
        reports.extend(roundtrip_reports(seed)?);
    }
    if matches!(which, TestArg::Jacobian | TestArg::All) {
        reports.extend(jacobian_reports(seed)?);
    }
    if matches!(which, TestArg::Constraints | TestArg::All) {
        reports.extend(constraint_reports(seed, n)?);
    }
    if matches!(which, TestArg::Ks | TestArg::All) {
        reports.extend(ks_reports(seed, n)?);
    }
    Ok(reports)
}

fn simple(values: &[f64]) -> SpectrumSpec {
    SpectrumSpec::simple(values.to_vec()).expect("valid test spectrum")
}

fn mass_report(name: &str, mass: f64) -> TestReport {
    let mut details = BTreeMap::new();
    details.insert("mass".into(), serde_json::json!(mass));
    TestReport::new(name, (mass - 1.0).abs(), MASS_TOL, 0, details)
}

/// Integrates each closed-form density over its support; total mass must be 1.
fn normalization_reports() -> Result<Vec<TestReport>> {
    let mut out = Vec::new();

    // additive n=2, shift smaller than the gap: support (a_1, a_1+b)
    let mass = integrate_pdf(
        |x| pdf_additive(&[1.0, 0.0], 0.5, &[x]).unwrap_or(f64::NAN),
        1.0,
        1.5,
        (false, false),
        1e-8,
    )?;
    out.push(mass_report("normalization_additive_n2_small_shift", mass));

    // additive n=2, shift larger than the gap: support (a_2+b, a_1+b)
    let mass = integrate_pdf(
        |x| pdf_additive(&[1.0, 0.0], 2.5, &[x]).unwrap_or(f64::NAN),
        2.5,
        3.5,
        (false, false),
        1e-8,
    )?;
    out.push(mass_report("normalization_additive_n2_large_shift", mass));

    // additive n=3 over the free coordinates (mu_1, mu_2); mu_3 is fixed
    // by the trace, which confines mu_2 to (0, 2 - mu_1)
    let mass = integrate_2d(
        |x, y| pdf_additive(&[1.0, 0.0, -1.0], 1.0, &[x, y]).unwrap_or(f64::NAN),
        1.0,
        2.0,
        |x| (0.0, 2.0 - x),
        2.5e-7,
    )?;
    out.push(mass_report("normalization_additive_n3", mass));

    // n=2 spacing, wide shift: support (0, a_1-a_2+b) with a hard upper edge
    let mass = integrate_pdf(
        |s| pdf_spacing_n2(1.0, 0.0, 1.0, s).unwrap_or(f64::NAN),
        0.0,
        2.0,
        (false, true),
        1e-8,
    )?;
    out.push(mass_report("normalization_spacing_n2", mass));

    // n=2 spacing, narrow shift: both endpoints are integrable singularities
    let mass = integrate_pdf(
        |s| pdf_spacing_n2(1.0, 0.0, 0.25, s).unwrap_or(f64::NAN),
        0.75,
        1.25,
        (true, true),
        1e-8,
    )?;
    out.push(mass_report("normalization_spacing_n2_gap", mass));

    let mass = integrate_pdf(
        |x| pdf_projection(&[1.0, 0.0], &[x]).unwrap_or(f64::NAN),
        0.0,
        1.0,
        (false, false),
        1e-8,
    )?;
    out.push(mass_report("normalization_projection_n2", mass));

    // real-field n=2 projection has inverse-square-root edges
    let mass = integrate_pdf(
        |x| pdf_projection_real(&[1.0, 0.0], &[x]).unwrap_or(f64::NAN),
        0.0,
        1.0,
        (true, true),
        1e-8,
    )?;
    out.push(mass_report("normalization_projection_real_n2", mass));

    let spec = AngularSpectrum::simple(vec![0.0, PI])?;
    let mass = integrate_pdf(
        |p| pdf_multiplicative(&spec, PI, &[p]).unwrap_or(f64::NAN),
        0.0,
        PI,
        (false, false),
        1e-8,
    )?;
    out.push(mass_report("normalization_multiplicative_n2", mass));

    Ok(out)
}

/// Weight -> roots -> weight inversions on n=10 spectra.
fn roundtrip_reports(seed: u64) -> Result<Vec<TestReport>> {
    const TRIALS: usize = 1000;
    let spec = simple(&[5.0, 4.5, 4.2, 3.5, 3.1, 2.1, 1.9, 1.3, 0.5, -0.3]);
    let angles = AngularSpectrum::simple(vec![0.2, 0.8, 1.5, 2.1, 2.9, 3.3, 4.0, 4.7, 5.3, 5.9])?;
    let mut out = Vec::new();
    let mut rng = RngState::with_stream(seed, 200);
    out.push(roundtrip_report(
        &RoundtripTask::Additive { spec: &spec, b: 1.1 },
        TRIALS,
        &mut rng,
    )?);
    let mut rng = RngState::with_stream(seed, 201);
    out.push(roundtrip_report(
        &RoundtripTask::Projection { spec: &spec },
        TRIALS,
        &mut rng,
    )?);
    let mut rng = RngState::with_stream(seed, 202);
    out.push(roundtrip_report(
        &RoundtripTask::Multiplicative {
            spec: &angles,
            phi: 2.0,
        },
        TRIALS,
        &mut rng,
    )?);
    Ok(out)
}

/// Change-of-variables identity on random spectra, plus the closed-form
/// Cauchy determinant against direct LU evaluation.
fn jacobian_reports(seed: u64) -> Result<Vec<TestReport>> {
    const CONFIGS: usize = 100;
    let mut rng = RngState::with_stream(seed, 300);
    let mut worst = 0.0f64;
    for _ in 0..CONFIGS {
        let mut values = vec![3.0];
        for _ in 1..4 {
            let gap = 0.3 + rng.uniform();
            values.push(values.last().unwrap() - gap);
        }
        let b = 0.5 + 2.0 * rng.uniform();
        let spec = simple(&values);
        let r = change_of_variables_check(&spec, b, 1, &mut rng)?;
        worst = worst.max(r.statistic);
    }
    let mut details = BTreeMap::new();
    details.insert("configs".into(), serde_json::json!(CONFIGS));
    let mut out = vec![TestReport::new(
        "change_of_variables",
        worst,
        1e-8,
        CONFIGS,
        details,
    )];

    let mut rng = RngState::with_stream(seed, 301);
    let mut worst = 0.0f64;
    for &n in &[4usize, 5] {
        for _ in 0..20 {
            let (x, y) = separated_points(&mut rng, n);
            let closed = cauchy_double_alternant(&x, &y)?;
            let direct = nalgebra::DMatrix::from_fn(n, n, |j, l| 1.0 / (x[j] - y[l]))
                .determinant();
            let rel = (closed - direct).abs() / direct.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    let mut details = BTreeMap::new();
    details.insert("sizes".into(), serde_json::json!([4, 5]));
    out.push(TestReport::new(
        "cauchy_determinant",
        worst,
        1e-10,
        40,
        details,
    ));
    Ok(out)
}

/// Two point sets with all pairwise and internal separations >= 0.05,
/// so the Cauchy matrix stays well conditioned.
fn separated_points(rng: &mut RngState, n: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let x: Vec<f64> = (0..n).map(|_| 10.0 * rng.uniform()).collect();
        let y: Vec<f64> = (0..n).map(|_| 10.0 * rng.uniform()).collect();
        let mut ok = true;
        for j in 0..n {
            for l in 0..n {
                if (x[j] - y[l]).abs() < 0.05 {
                    ok = false;
                }
                if j < l && ((x[j] - x[l]).abs() < 0.05 || (y[j] - y[l]).abs() < 0.05) {
                    ok = false;
                }
            }
        }
        if ok {
            return (x, y);
        }
    }
}

fn constraint_report(
    name: &str,
    seed: u64,
    stream_base: u64,
    n: usize,
    draw: impl Sync + Fn(&mut RngState) -> Result<EigenSample>,
    check: impl Sync + Fn(&EigenSample) -> Result<()>,
) -> Result<TestReport> {
    let per_draw: Vec<Result<(f64, bool)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngState::with_stream(seed, stream_base + i as u64);
            let s = draw(&mut rng)?;
            Ok((s.constraint_residual, check(&s).is_err()))
        })
        .collect();
    let mut max_residual = 0.0f64;
    let mut violations = 0u64;
    for r in per_draw {
        let (res, bad) = r?;
        max_residual = max_residual.max(res);
        violations += bad as u64;
    }
    let statistic = if violations > 0 {
        f64::INFINITY
    } else {
        max_residual
    };
    let mut details = BTreeMap::new();
    details.insert("violations".into(), serde_json::json!(violations));
    details.insert("max_residual".into(), serde_json::json!(max_residual));
    Ok(TestReport::new(name, statistic, RESIDUAL_TOL, n, details))
}

/// Every draw from both routes must satisfy strict interlacing (or the
/// one-per-arc rule) and its trace or phase-sum identity.
fn constraint_reports(seed: u64, n: usize) -> Result<Vec<TestReport>> {
    let add = simple(&[1.5, 0.5, -0.5, -1.5]);
    let prj = simple(&[2.0, 1.0, -0.5, -2.0]);
    let ang = AngularSpectrum::simple(vec![0.5, 2.5, 4.5])?;
    let phi = 1.3;
    Ok(vec![
        constraint_report(
            "constraints_additive_secular",
            seed,
            1_000_000,
            n,
            |rng| sample_additive_secular(&add, 1.0, Field::Complex, rng),
            |s| check_additive_sample(&add, 1.0, s),
        )?,
        constraint_report(
            "constraints_additive_oracle",
            seed,
            2_000_000,
            n,
            |rng| sample_additive_oracle(&add, 1.0, Field::Complex, rng),
            |s| check_additive_sample(&add, 1.0, s),
        )?,
        constraint_report(
            "constraints_projection_secular",
            seed,
            3_000_000,
            n,
            |rng| sample_projection_secular(&prj, Field::Complex, rng),
            |s| check_projection_sample(&prj, s),
        )?,
        constraint_report(
            "constraints_projection_oracle",
            seed,
            4_000_000,
            n,
            |rng| sample_projection_oracle(&prj, Field::Complex, rng),
            |s| check_projection_sample(&prj, s),
        )?,
        constraint_report(
            "constraints_multiplicative_secular",
            seed,
            5_000_000,
            n,
            |rng| sample_multiplicative_secular(&ang, phi, rng),
            |s| check_multiplicative_sample(&ang, phi, s),
        )?,
        constraint_report(
            "constraints_multiplicative_oracle",
            seed,
            6_000_000,
            n,
            |rng| sample_multiplicative_oracle(&ang, phi, rng),
            |s| check_multiplicative_sample(&ang, phi, s),
        )?,
    ])
}

/// Draws n samples in parallel and returns the free coordinates per draw.
fn collect_draws(
    seed: u64,
    stream_base: u64,
    n: usize,
    draw: impl Sync + Fn(&mut RngState) -> Result<Vec<f64>>,
) -> Result<Vec<Vec<f64>>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngState::with_stream(seed, stream_base + i as u64);
            draw(&mut rng)
        })
        .collect()
}

/// Per-coordinate two-sample KS between two routes producing the same law.
fn ks_route_pair(
    name: &str,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
) -> Result<Vec<TestReport>> {
    let dims = xs[0].len();
    let mut out = Vec::with_capacity(dims);
    for k in 0..dims {
        let a: Vec<f64> = xs.iter().map(|row| row[k]).collect();
        let b: Vec<f64> = ys.iter().map(|row| row[k]).collect();
        let mut r = ks_two_sample(&a, &b, LEVEL)?;
        r.test_name = format!("ks_{}_coord{}", name, k + 1);
        out.push(r);
    }
    Ok(out)
}

/// Distribution-level agreement: secular vs oracle on every case, samples
/// vs closed-form laws where those are available.
fn ks_reports(seed: u64, n: usize) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();

    type DrawFn = Box<dyn Fn(&mut RngState) -> Result<Vec<f64>> + Sync>;
    struct PairCfg<'a> {
        name: &'a str,
        stream: u64,
        secular: DrawFn,
        oracle: DrawFn,
    }

    let a2 = simple(&[1.0, 0.0]);
    let a4 = simple(&[1.5, 0.5, -0.5, -1.5]);
    let adeg = SpectrumSpec::sorted(vec![1.0, 0.0], vec![2, 1])?;
    let p2 = simple(&[1.0, 0.0]);
    let p4 = simple(&[2.0, 1.0, -0.5, -2.0]);
    let m2 = AngularSpectrum::simple(vec![0.0, PI])?;
    let m3 = AngularSpectrum::simple(vec![0.5, 2.5, 4.5])?;

    let pairs: Vec<PairCfg> = vec![
        PairCfg {
            name: "additive_complex_n2",
            stream: 10_000_000,
            secular: {
                let s = a2.clone();
                Box::new(move |rng| Ok(sample_additive_secular(&s, 1.0, Field::Complex, rng)?.eigenvalues))
            },
            oracle: {
                let s = a2.clone();
                Box::new(move |rng| Ok(sample_additive_oracle(&s, 1.0, Field::Complex, rng)?.eigenvalues))
            },
        },
        PairCfg {
            name: "additive_complex_n4",
            stream: 12_000_000,
            secular: {
                let s = a4.clone();
                Box::new(move |rng| Ok(sample_additive_secular(&s, 1.0, Field::Complex, rng)?.eigenvalues))
            },
            oracle: {
                let s = a4.clone();
                Box::new(move |rng| Ok(sample_additive_oracle(&s, 1.0, Field::Complex, rng)?.eigenvalues))
            },
        },
        PairCfg {
            name: "additive_real_n2",
            stream: 14_000_000,
            secular: {
                let s = a2.clone();
                Box::new(move |rng| Ok(sample_additive_secular(&s, 1.0, Field::Real, rng)?.eigenvalues))
            },
            oracle: {
                let s = a2.clone();
                Box::new(move |rng| Ok(sample_additive_oracle(&s, 1.0, Field::Real, rng)?.eigenvalues))
            },
        },
        PairCfg {
            name: "additive_degenerate",
            stream: 16_000_000,
            secular: {
                let s = adeg.clone();
                Box::new(move |rng| Ok(sample_additive_secular(&s, 1.0, Field::Complex, rng)?.eigenvalues))
            },
            oracle: {
                let s = adeg.clone();
                Box::new(move |rng| Ok(sample_additive_oracle(&s, 1.0, Field::Complex, rng)?.eigenvalues))
            },
        },
        PairCfg {
            name: "projection_complex_n2",
            stream: 18_000_000,
            secular: {
                let s = p2.clone();
                Box::new(move |rng| Ok(sample_projection_secular(&s, Field::Complex, rng)?.eigenvalues))
            },
            oracle: {
                let s = p2.clone();
                Box::new(move |rng| Ok(sample_projection_oracle(&s, Field::Complex, rng)?.eigenvalues))
            },
        },
        PairCfg {
            name: "projection_complex_n4",
            stream: 20_000_000,
            secular: {
                let s = p4.clone();
                Box::new(move |rng| Ok(sample_projection_secular(&s, Field::Complex, rng)?.eigenvalues))
            },
            oracle: {
                let s = p4.clone();
                Box::new(move |rng| Ok(sample_projection_oracle(&s, Field::Complex, rng)?.eigenvalues))
            },
        },
        PairCfg {
            name: "multiplicative_n2",
            stream: 22_000_000,
            secular: {
                let s = m2.clone();
                Box::new(move |rng| Ok(sample_multiplicative_secular(&s, PI, rng)?.eigenvalues))
            },
            oracle: {
                let s = m2.clone();
                Box::new(move |rng| Ok(sample_multiplicative_oracle(&s, PI, rng)?.eigenvalues))
            },
        },
        PairCfg {
            name: "multiplicative_n3",
            stream: 24_000_000,
            secular: {
                let s = m3.clone();
                Box::new(move |rng| Ok(sample_multiplicative_secular(&s, 1.3, rng)?.eigenvalues))
            },
            oracle: {
                let s = m3.clone();
                Box::new(move |rng| Ok(sample_multiplicative_oracle(&s, 1.3, rng)?.eigenvalues))
            },
        },
    ];

    for cfg in &pairs {
        let xs = collect_draws(seed, cfg.stream, n, &cfg.secular)?;
        let ys = collect_draws(seed, cfg.stream + 1_000_000, n, &cfg.oracle)?;
        out.extend(ks_route_pair(cfg.name, &xs, &ys)?);
    }

    // one-sample tests against the closed-form n=2 laws
    let draws = collect_draws(seed, 30_000_000, n, |rng| {
        Ok(sample_additive_secular(&a2, 1.0, Field::Complex, rng)?.eigenvalues)
    })?;
    let top: Vec<f64> = draws.iter().map(|row| row[0]).collect();
    let cdf = NumericCdf::build(
        |x| pdf_additive(&[1.0, 0.0], 1.0, &[x]).unwrap_or(f64::NAN),
        1.0,
        2.0,
        (false, false),
        2048,
        1e-9,
    )?;
    let mut r = ks_one_sample(&top, |x| cdf.eval(x), LEVEL)?;
    r.test_name = "ks_cdf_additive_n2".into();
    out.push(r);

    let draws = collect_draws(seed, 31_000_000, n, |rng| {
        Ok(sample_projection_secular(&p2, Field::Complex, rng)?.eigenvalues)
    })?;
    let top: Vec<f64> = draws.iter().map(|row| row[0]).collect();
    let cdf = NumericCdf::build(
        |x| pdf_projection(&[1.0, 0.0], &[x]).unwrap_or(f64::NAN),
        0.0,
        1.0,
        (false, false),
        2048,
        1e-9,
    )?;
    let mut r = ks_one_sample(&top, |x| cdf.eval(x), LEVEL)?;
    r.test_name = "ks_cdf_projection_n2".into();
    out.push(r);

    let draws = collect_draws(seed, 32_000_000, n, |rng| {
        let s = sample_additive_secular(&a2, 1.0, Field::Real, rng)?;
        Ok(vec![s.eigenvalues[0] - s.eigenvalues[1]])
    })?;
    let gaps: Vec<f64> = draws.iter().map(|row| row[0]).collect();
    let cdf = NumericCdf::build(
        |s| pdf_spacing_n2(1.0, 0.0, 1.0, s).unwrap_or(f64::NAN),
        0.0,
        2.0,
        (false, true),
        2048,
        1e-9,
    )?;
    let mut r = ks_one_sample(&gaps, |x| cdf.eval(x), LEVEL)?;
    r.test_name = "ks_cdf_spacing_n2".into();
    out.push(r);

    // n=2 quadratic form is uniform on (b_2, b_1)
    let q2 = simple(&[1.0, 0.0]);
    let draws = collect_draws(seed, 33_000_000, n, |rng| {
        Ok(vec![sample_quadratic_form_oracle(&q2, Field::Complex, rng)?])
    })?;
    let vals: Vec<f64> = draws.iter().map(|row| row[0]).collect();
    let mut r = ks_one_sample(&vals, |x| x.clamp(0.0, 1.0), LEVEL)?;
    r.test_name = "ks_quadratic_form_uniform".into();
    out.push(r);

    out.push(quadratic_form_chi2(seed, n * 10)?);
    out.push(diagonal_entries_chi2(seed, n * 10)?);
    Ok(out)
}

/// Binned fit of n=3 quadratic-form draws against the closed-form density.
fn quadratic_form_chi2(seed: u64, draws: usize) -> Result<TestReport> {
    let b = [2.0, 1.0, 0.0];
    let spec = simple(&b);
    const BINS: usize = 40;
    let (lo, hi) = (0.0, 2.0);
    let width = (hi - lo) / BINS as f64;
    let samples = collect_draws(seed, 40_000_000, draws, |rng| {
        Ok(vec![sample_quadratic_form_oracle(&spec, Field::Complex, rng)?])
    })?;
    let mut observed = vec![0u64; BINS];
    for row in &samples {
        let k = (((row[0] - lo) / width) as usize).min(BINS - 1);
        observed[k] += 1;
    }
    let mut expected = Vec::with_capacity(BINS);
    for k in 0..BINS {
        let a = lo + k as f64 * width;
        let mass = integrate_pdf(
            |x| pdf_quadratic_form(&b, x).unwrap_or(f64::NAN),
            a,
            a + width,
            (false, false),
            1e-9,
        )?;
        expected.push(mass * draws as f64);
    }
    chi_square_gof(&observed, &expected, LEVEL, "chi2_quadratic_form_n3")
}

/// Binned 2D fit of ordered diagonal-entry draws against the closed-form
/// density for b = (2, 1, 0). The support sits inside (1,2) x (0.5,2).
fn diagonal_entries_chi2(seed: u64, draws: usize) -> Result<TestReport> {
    let b = [2.0, 1.0, 0.0];
    let spec = simple(&b);
    const GRID: usize = 12;
    const SUB: usize = 48;
    let (x_lo, x_hi) = (1.0, 2.0);
    let (y_lo, y_hi) = (0.5, 2.0);
    let dx = (x_hi - x_lo) / GRID as f64;
    let dy = (y_hi - y_lo) / GRID as f64;
    let samples = collect_draws(seed, 41_000_000, draws, |rng| {
        let s = sample_diagonal_entries(&spec, rng)?;
        Ok(s.eigenvalues)
    })?;
    let mut observed = vec![0u64; GRID * GRID];
    for row in &samples {
        let i = (((row[0] - x_lo) / dx) as usize).min(GRID - 1);
        let j = (((row[1] - y_lo) / dy) as usize).min(GRID - 1);
        observed[i * GRID + j] += 1;
    }
    let mut expected = vec![0.0f64; GRID * GRID];
    let sub_area = (dx / SUB as f64) * (dy / SUB as f64);
    for i in 0..GRID {
        for j in 0..GRID {
            let mut mass = 0.0;
            for p in 0..SUB {
                for q in 0..SUB {
                    let x = x_lo + i as f64 * dx + (p as f64 + 0.5) * dx / SUB as f64;
                    let y = y_lo + j as f64 * dy + (q as f64 + 0.5) * dy / SUB as f64;
                    mass += pdf_heckman_n3(&b, x, y)?;
                }
            }
            expected[i * GRID + j] = mass * sub_area * draws as f64;
        }
    }
    chi_square_gof(&observed, &expected, LEVEL, "chi2_diagonal_entries_n3")
}
