//! Verification harness: empirical-distribution tests, quadrature, and the
//! cross-consistency checks tying the samplers to the closed forms.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

use crate::densities::{dirichlet_density, pdf_additive};
use crate::error::{Error, Result};
use crate::randsrc::{dirichlet, Field, RngState};
use crate::secular::{
    additive_roots, jacobian_additive, multiplicative_roots, projection_roots,
    weights_from_roots_additive, weights_from_roots_multiplicative,
    weights_from_roots_projection,
};
use crate::spectra::{AngularSpectrum, SpectrumSpec};

/// Maximum bisection depth for the adaptive quadrature.
const MAX_DEPTH: usize = 45;
/// Relative inset applied at interval endpoints so evaluators that return
/// a boundary sentinel (0 or +inf exactly on the edge) are never sampled
/// there; the truncated mass is far below every tolerance in use.
const EDGE_INSET: f64 = 1e-12;

/// Outcome of one verification test; serialized as a JSON line by the CLI.
/// `pass` holds exactly when `statistic <= threshold`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub n_samples: usize,
    pub pass: bool,
    pub details: BTreeMap<String, serde_json::Value>,
}

impl TestReport {
    pub fn new(
        test_name: impl Into<String>,
        statistic: f64,
        threshold: f64,
        n_samples: usize,
        details: BTreeMap<String, serde_json::Value>,
    ) -> Self {
        TestReport {
            test_name: test_name.into(),
            statistic,
            threshold,
            n_samples,
            pass: statistic <= threshold,
            details,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

fn detail(v: f64) -> serde_json::Value {
    serde_json::json!(v)
}

/// Survival function of the Kolmogorov distribution,
/// Q(x) = 2 sum_j (-1)^{j-1} exp(-2 j^2 x^2).
fn kolmogorov_q(x: f64) -> f64 {
    if x < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = sign * (-2.0 * (j as f64 * x).powi(2)).exp();
        sum += term;
        if term.abs() < 1e-14 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Inverse of kolmogorov_q by bisection (Q is strictly decreasing).
fn kolmogorov_q_inv(level: f64) -> f64 {
    let (mut lo, mut hi) = (0.05, 5.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_q(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Effective-size correction factor for the asymptotic KS p-value.
fn ks_scale(ne: f64) -> f64 {
    ne.sqrt() + 0.12 + 0.11 / ne.sqrt()
}

fn ks_report(name: &str, d: f64, ne: f64, n_samples: usize, level: f64) -> TestReport {
    let p = kolmogorov_q(ks_scale(ne) * d);
    let threshold = kolmogorov_q_inv(level) / ks_scale(ne);
    let mut details = BTreeMap::new();
    details.insert("p_value".into(), detail(p));
    details.insert("level".into(), detail(level));
    details.insert("effective_n".into(), detail(ne));
    TestReport::new(name, d, threshold, n_samples, details)
}

/// Two-sample Kolmogorov-Smirnov test at the given significance level.
pub fn ks_two_sample(xs: &[f64], ys: &[f64], level: f64) -> Result<TestReport> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n1 && j < n2 {
        let v = a[i].min(b[j]);
        while i < n1 && a[i] == v {
            i += 1;
        }
        while j < n2 && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    Ok(ks_report("ks_two_sample", d, ne, n1 + n2, level))
}

/// One-sample Kolmogorov-Smirnov test against a supplied CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64, level: f64) -> Result<TestReport> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = xs.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let n = a.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(ks_report("ks_one_sample", d, n, a.len(), level))
}

/// Chi-square goodness of fit on binned counts. Bins with expectation
/// below 5 are pooled with their successors to keep the asymptotics sound.
pub fn chi_square_gof(
    observed: &[u64],
    expected: &[f64],
    level: f64,
    name: &str,
) -> Result<TestReport> {
    if observed.is_empty() || observed.len() != expected.len() {
        return Err(Error::InvalidInput(
            "observed and expected bins must have equal nonzero lengths".into(),
        ));
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0f64, 0.0f64);
    for (&o, &e) in observed.iter().zip(expected) {
        pool_o += o as f64;
        pool_e += e;
        if pool_e >= 5.0 {
            cells.push((pool_o, pool_e));
            pool_o = 0.0;
            pool_e = 0.0;
        }
    }
    if pool_e > 0.0 || pool_o > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += pool_o;
            last.1 += pool_e;
        } else {
            cells.push((pool_o, pool_e));
        }
    }
    if cells.len() < 2 {
        return Err(Error::InvalidInput(
            "too few populated bins for a chi-square test".into(),
        ));
    }
    let mut stat = 0.0;
    for &(o, e) in &cells {
        if e <= 0.0 {
            if o > 0.0 {
                stat = f64::INFINITY;
            }
            continue;
        }
        stat += (o - e) * (o - e) / e;
    }
    let dof = (cells.len() - 1) as f64;
    let dist = ChiSquared::new(dof)
        .map_err(|e| Error::InvalidInput(format!("chi-square dof: {e}")))?;
    let threshold = dist.inverse_cdf(1.0 - level);
    let n: f64 = observed.iter().map(|&o| o as f64).sum();
    let mut details = BTreeMap::new();
    details.insert("dof".into(), detail(dof));
    details.insert("level".into(), detail(level));
    details.insert(
        "p_value".into(),
        detail(if stat.is_finite() { 1.0 - dist.cdf(stat) } else { 0.0 }),
    );
    Ok(TestReport::new(name, stat, threshold, n as usize, details))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    leak: &mut f64,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() {
        *leak = f64::INFINITY;
        return whole;
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        *leak += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, leak)
        + simpson_rec(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, leak)
}

/// Adaptive Simpson quadrature over [a, b] to absolute tolerance `tol`.
/// Endpoints are evaluated as given; callers inset or substitute around
/// singular edges first.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput("need a finite interval a < b".into()));
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !fa.is_finite() || !fm.is_finite() || !fb.is_finite() {
        return Err(Error::TolUnreached(tol));
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut leak = 0.0;
    let v = simpson_rec(&f, a, fa, m, fm, b, fb, whole, tol, MAX_DEPTH, &mut leak);
    if !v.is_finite() || leak > tol {
        return Err(Error::TolUnreached(leak.max(tol)));
    }
    Ok(v)
}

/// Smallest substitution coordinate that still lands strictly inside the
/// interval: edge ± u² must be representable as distinct from the edge, so
/// u is floored at sqrt(ulp(edge)). The skipped mass under an
/// inverse-square-root singularity is ~ sqrt(eps)·pdf scale, far below
/// the 1e-6 normalization tolerances in use.
fn u_floor(edge: f64, len: f64) -> f64 {
    (f64::EPSILON * edge.abs())
        .sqrt()
        .max(EDGE_INSET * len)
}

/// Integrates a density over (lo, hi), handling inverse-square-root edge
/// singularities through the substitution x = edge ± u², which maps the
/// divergent factor to a bounded integrand.
pub fn integrate_pdf(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    singular: (bool, bool),
    tol: f64,
) -> Result<f64> {
    if !(hi > lo) {
        return Err(Error::InvalidInput("need lo < hi".into()));
    }
    match singular {
        (false, false) => {
            let inset = EDGE_INSET * (hi - lo);
            integrate_1d(&f, lo + inset, hi - inset, tol)
        }
        (true, false) => {
            let len = (hi - lo).sqrt();
            integrate_1d(
                |u| f(lo + u * u) * 2.0 * u,
                u_floor(lo, len),
                len * (1.0 - EDGE_INSET),
                tol,
            )
        }
        (false, true) => {
            let len = (hi - lo).sqrt();
            integrate_1d(
                |u| f(hi - u * u) * 2.0 * u,
                u_floor(hi, len),
                len * (1.0 - EDGE_INSET),
                tol,
            )
        }
        (true, true) => {
            let mid = 0.5 * (lo + hi);
            let len_l = (mid - lo).sqrt();
            let left = integrate_1d(
                |u| f(lo + u * u) * 2.0 * u,
                u_floor(lo, len_l),
                len_l * (1.0 - EDGE_INSET),
                0.5 * tol,
            )?;
            let len_r = (hi - mid).sqrt();
            let right = integrate_1d(
                |u| f(hi - u * u) * 2.0 * u,
                u_floor(hi, len_r),
                len_r * (1.0 - EDGE_INSET),
                0.5 * tol,
            )?;
            Ok(left + right)
        }
    }
}

/// Nested adaptive quadrature of a bivariate density: the outer variable
/// runs over (lo, hi), the inner range depends on the outer point. Inner
/// integrals run at a tolerance 10x tighter than their share.
pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    lo: f64,
    hi: f64,
    inner_bounds: impl Fn(f64) -> (f64, f64),
    tol: f64,
) -> Result<f64> {
    let inner_tol = tol * 0.1;
    let outer = |x: f64| -> f64 {
        let (ylo, yhi) = inner_bounds(x);
        if !(yhi > ylo) {
            return 0.0;
        }
        let inset = EDGE_INSET * (yhi - ylo);
        integrate_1d(|y| f(x, y), ylo + inset, yhi - inset, inner_tol).unwrap_or(f64::NAN)
    };
    let inset = EDGE_INSET * (hi - lo);
    integrate_1d(outer, lo + inset, hi - inset, tol)
}

/// A numeric CDF built by quadrature of a pdf, with knots clustered
/// quadratically near singular edges so linear interpolation stays
/// accurate where the density diverges.
pub struct NumericCdf {
    knots: Vec<f64>,
    cum: Vec<f64>,
}

impl NumericCdf {
    pub fn build(
        pdf: impl Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        singular: (bool, bool),
        knot_count: usize,
        tol: f64,
    ) -> Result<Self> {
        if !(hi > lo) || knot_count < 16 {
            return Err(Error::InvalidInput(
                "need lo < hi and at least 16 knots".into(),
            ));
        }
        let knots = knot_grid(lo, hi, singular, knot_count);
        let seg_tol = tol / knots.len() as f64;
        let mut cum = Vec::with_capacity(knots.len());
        cum.push(0.0);
        let mut total = 0.0;
        for w in knots.windows(2) {
            let seg_singular = (singular.0 && w[0] == lo, singular.1 && w[1] == hi);
            total += integrate_pdf(&pdf, w[0], w[1], seg_singular, seg_tol)?;
            cum.push(total);
        }
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::TolUnreached(tol));
        }
        for c in cum.iter_mut() {
            *c /= total;
        }
        Ok(NumericCdf { knots, cum })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return 0.0;
        }
        if x >= self.knots[n - 1] {
            return 1.0;
        }
        let i = match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&x).unwrap())
        {
            Ok(i) => return self.cum[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.knots[i - 1], self.knots[i]);
        let (c0, c1) = (self.cum[i - 1], self.cum[i]);
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    }
}

/// Knot layout: uniform in the bulk, quadratically clustered into any
/// singular edge (uniform in u where x = edge ± u²).
fn knot_grid(lo: f64, hi: f64, singular: (bool, bool), count: usize) -> Vec<f64> {
    let range = hi - lo;
    let zone = range * 0.1;
    let zone_knots = count / 4;
    let mut knots = Vec::with_capacity(count + 2 * zone_knots);
    let mut bulk_lo = lo;
    let mut bulk_hi = hi;
    if singular.0 {
        let ulen = zone.sqrt();
        for j in 0..zone_knots {
            knots.push(lo + (j as f64 * ulen / zone_knots as f64).powi(2));
        }
        bulk_lo = lo + zone;
    }
    let mut upper = Vec::new();
    if singular.1 {
        let ulen = zone.sqrt();
        for j in 0..zone_knots {
            upper.push(hi - (j as f64 * ulen / zone_knots as f64).powi(2));
        }
        bulk_hi = hi - zone;
    }
    let bulk = count.max(16);
    for j in 0..=bulk {
        knots.push(bulk_lo + (bulk_hi - bulk_lo) * j as f64 / bulk as f64);
    }
    knots.extend(upper);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();
    knots
}

/// One solve-and-invert consistency task.
pub enum RoundtripTask<'a> {
    Additive { spec: &'a SpectrumSpec, b: f64 },
    Projection { spec: &'a SpectrumSpec },
    Multiplicative { spec: &'a AngularSpectrum, phi: f64 },
}

/// Draws random weights, solves the matching secular equation, inverts
/// back through the residue formulas, and reports the worst deviation.
pub fn roundtrip_report(
    task: &RoundtripTask,
    n_trials: usize,
    rng: &mut RngState,
) -> Result<TestReport> {
    if n_trials == 0 {
        return Err(Error::EmptySample);
    }
    let mut worst = 0.0f64;
    let name;
    match task {
        RoundtripTask::Additive { spec, b } => {
            name = "roundtrip_additive";
            let shapes = Field::Complex.dirichlet_shapes(spec.multiplicities());
            for _ in 0..n_trials {
                let w = dirichlet(rng, &shapes)?;
                let out = additive_roots(spec, &w, *b)?;
                let back = weights_from_roots_additive(spec.values(), &out.eigenvalues, *b)?;
                for (x, y) in w.as_slice().iter().zip(back.as_slice()) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        RoundtripTask::Projection { spec } => {
            name = "roundtrip_projection";
            let shapes = Field::Complex.dirichlet_shapes(spec.multiplicities());
            for _ in 0..n_trials {
                let w = dirichlet(rng, &shapes)?;
                let out = projection_roots(spec, &w)?;
                let back = weights_from_roots_projection(spec.values(), &out.eigenvalues)?;
                for (x, y) in w.as_slice().iter().zip(back.as_slice()) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        RoundtripTask::Multiplicative { spec, phi } => {
            name = "roundtrip_multiplicative";
            let shapes = Field::Complex.dirichlet_shapes(spec.multiplicities());
            for _ in 0..n_trials {
                let q = dirichlet(rng, &shapes)?;
                let out = multiplicative_roots(spec, &q, *phi)?;
                let back =
                    weights_from_roots_multiplicative(spec.angles(), &out.eigenvalues, *phi)?;
                for (x, y) in q.as_slice().iter().zip(back.as_slice()) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    let mut details = BTreeMap::new();
    details.insert("trials".into(), detail(n_trials as f64));
    Ok(TestReport::new(name, worst, 1e-8, n_trials, details))
}

/// Verifies the change-of-variables identity behind the additive density:
/// the Dirichlet weight density times the Jacobian, assembled from the
/// residue inversion and the closed-form determinant, must reproduce
/// pdf_additive at sampled points to relative 1e-8.
pub fn change_of_variables_check(
    spec: &SpectrumSpec,
    b: f64,
    n_trials: usize,
    rng: &mut RngState,
) -> Result<TestReport> {
    if n_trials == 0 {
        return Err(Error::EmptySample);
    }
    if !spec.is_simple() {
        return Err(Error::InvalidInput(
            "change-of-variables check runs on simple spectra".into(),
        ));
    }
    let a = spec.values();
    let n = a.len();
    let shapes = vec![1.0; n];
    let mut worst = 0.0f64;
    for _ in 0..n_trials {
        let w = dirichlet(rng, &shapes)?;
        let out = additive_roots(spec, &w, b)?;
        let lam = &out.eigenvalues;
        let back = weights_from_roots_additive(a, lam, b)?;
        let jac = jacobian_additive(a, lam, b)?;
        let free_product: f64 = back.as_slice()[..n - 1].iter().product();
        let assembled = dirichlet_density(back.as_slice(), &shapes)? * free_product * jac;
        let direct = pdf_additive(a, b, &lam[..n - 1])?;
        let rel = (assembled - direct).abs() / direct.max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    let mut details = BTreeMap::new();
    details.insert("trials".into(), detail(n_trials as f64));
    details.insert("b".into(), detail(b));
    Ok(TestReport::new(
        "change_of_variables",
        worst,
        1e-8,
        n_trials,
        details,
    ))
}
