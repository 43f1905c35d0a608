//! Core domain types: fixed spectra, simplex weights, eigenvalue samples,
//! and the interlacing-support geometry shared by the solvers, oracles and
//! density evaluators.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Relative gap below which two spectrum entries count as equal.
/// Inputs closer than this must be supplied as one entry with a
/// multiplicity, since the secular solvers need well-separated poles.
pub const MERGE_TOL: f64 = 1e-10;

/// Absolute tolerance for the trace / phase-sum constraints on samples of
/// O(1) spectral diameter; scaled by the diameter otherwise.
pub const CONSTRAINT_TOL: f64 = 1e-9;

fn merge_gap(a: f64, b: f64) -> f64 {
    MERGE_TOL * 1.0_f64.max(a.abs().max(b.abs()))
}

/// A fixed real spectrum: strictly descending distinct values with
/// multiplicities. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSpec {
    values: Vec<f64>,
    multiplicities: Vec<usize>,
}

// Accepts {"values":[...]} with multiplicities defaulting to all ones.
impl<'de> Deserialize<'de> for SpectrumSpec {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            values: Vec<f64>,
            #[serde(default)]
            multiplicities: Option<Vec<usize>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mults = raw
            .multiplicities
            .unwrap_or_else(|| vec![1; raw.values.len()]);
        SpectrumSpec::new(raw.values, mults).map_err(serde::de::Error::custom)
    }
}

impl SpectrumSpec {
    /// Validates a strictly descending spectrum.
    pub fn new(values: Vec<f64>, multiplicities: Vec<usize>) -> Result<Self> {
        validate_spectrum(&values, &multiplicities, false)
    }

    /// Sorts the values descending (carrying multiplicities along) before
    /// validating.
    pub fn sorted(values: Vec<f64>, multiplicities: Vec<usize>) -> Result<Self> {
        validate_spectrum(&values, &multiplicities, true)
    }

    /// All multiplicities one.
    pub fn simple(values: Vec<f64>) -> Result<Self> {
        let m = vec![1; values.len()];
        Self::new(values, m)
    }

    /// Number of distinct eigenvalues.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Matrix dimension `N`, the sum of multiplicities.
    pub fn total_dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    /// Spread `a_1 - a_n`; zero for a single eigenvalue.
    pub fn diameter(&self) -> f64 {
        self.values[0] - self.values[self.values.len() - 1]
    }

    /// Trace of the diagonal matrix with these values and multiplicities.
    pub fn trace(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.multiplicities)
            .map(|(a, &m)| a * m as f64)
            .sum()
    }

    /// Diagonal of the `N x N` matrix, each value repeated its multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_dim());
        for (a, &m) in self.values.iter().zip(&self.multiplicities) {
            out.extend(std::iter::repeat_n(*a, m));
        }
        out
    }
}

/// Validates (and optionally sorts) a raw spectrum.
pub fn validate_spectrum(
    values: &[f64],
    multiplicities: &[usize],
    allow_sort: bool,
) -> Result<SpectrumSpec> {
    if values.is_empty() || values.len() != multiplicities.len() {
        return Err(Error::InvalidInput(format!(
            "need equal, nonzero lengths; got {} values, {} multiplicities",
            values.len(),
            multiplicities.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("values must be finite".into()));
    }
    if multiplicities.contains(&0) {
        return Err(Error::NonPositiveMultiplicity);
    }
    let mut pairs: Vec<(f64, usize)> = values
        .iter()
        .copied()
        .zip(multiplicities.iter().copied())
        .collect();
    if allow_sort {
        pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    }
    for win in pairs.windows(2) {
        let (hi, lo) = (win[0].0, win[1].0);
        if (hi - lo).abs() <= merge_gap(hi, lo) {
            return Err(Error::DuplicateEigenvalue(hi, lo));
        }
        if hi < lo {
            return Err(Error::OrderViolation);
        }
    }
    let (values, multiplicities) = pairs.into_iter().unzip();
    Ok(SpectrumSpec {
        values,
        multiplicities,
    })
}

/// A fixed unitary spectrum: strictly increasing eigenphases in `[0, 2π)`
/// with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularSpectrum {
    angles: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl<'de> Deserialize<'de> for AngularSpectrum {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(alias = "values")]
            angles: Vec<f64>,
            #[serde(default)]
            multiplicities: Option<Vec<usize>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mults = raw
            .multiplicities
            .unwrap_or_else(|| vec![1; raw.angles.len()]);
        AngularSpectrum::new(raw.angles, mults).map_err(serde::de::Error::custom)
    }
}

impl AngularSpectrum {
    pub fn new(angles: Vec<f64>, multiplicities: Vec<usize>) -> Result<Self> {
        if angles.is_empty() || angles.len() != multiplicities.len() {
            return Err(Error::InvalidInput(format!(
                "need equal, nonzero lengths; got {} angles, {} multiplicities",
                angles.len(),
                multiplicities.len()
            )));
        }
        if angles.iter().any(|t| !t.is_finite() || *t < 0.0 || *t >= TAU) {
            return Err(Error::InvalidInput("angles must lie in [0, 2pi)".into()));
        }
        if multiplicities.contains(&0) {
            return Err(Error::NonPositiveMultiplicity);
        }
        for win in angles.windows(2) {
            if win[1] - win[0] <= MERGE_TOL {
                return if win[1] >= win[0] {
                    Err(Error::DuplicateEigenvalue(win[0], win[1]))
                } else {
                    Err(Error::OrderViolation)
                };
            }
        }
        // the wrap-around gap must be open as well
        if angles.len() > 1 && (angles[0] + TAU) - angles[angles.len() - 1] <= MERGE_TOL {
            return Err(Error::DuplicateEigenvalue(
                angles[angles.len() - 1],
                angles[0],
            ));
        }
        Ok(AngularSpectrum {
            angles,
            multiplicities,
        })
    }

    pub fn simple(angles: Vec<f64>) -> Result<Self> {
        let m = vec![1; angles.len()];
        Self::new(angles, m)
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    /// Phase sum counting multiplicities.
    pub fn phase_trace(&self) -> f64 {
        self.angles
            .iter()
            .zip(&self.multiplicities)
            .map(|(t, &m)| t * m as f64)
            .sum()
    }

    pub fn expanded(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_dim());
        for (t, &m) in self.angles.iter().zip(&self.multiplicities) {
            out.extend(std::iter::repeat_n(*t, m));
        }
        out
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySample);
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "weights must sum to 1 within 1e-12, got {sum}"
            )));
        }
        Ok(WeightVector(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Which ensemble a sample or density query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    Additive,
    Projection,
    Multiplicative,
    QuadraticForm,
    DiagonalEntries,
}

/// One draw of output eigenvalues (or eigenphases).
///
/// `eigenvalues` holds only the *fluctuating* part: descending reals for the
/// additive/projection cases, increasing angles in `[0, 2π)` for the
/// multiplicative case. Values forced by degeneracy or by the projection
/// (the zero of `ΠAΠ`, the retained `a_l` copies) sit in `deterministic`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenSample {
    pub case: CaseTag,
    pub eigenvalues: Vec<f64>,
    /// `(value, multiplicity)` pairs, in the order they appear in the
    /// spectrum (zero eigenvalue first for the projection case).
    pub deterministic: Vec<(f64, usize)>,
    /// Trace residual (additive), phase-sum residual mod 2π
    /// (multiplicative), zero for the unconstrained projection case.
    pub constraint_residual: f64,
}

impl EigenSample {
    /// Fluctuating and deterministic parts merged: descending for real
    /// cases, increasing for angles.
    pub fn full_spectrum(&self) -> Vec<f64> {
        let mut all = self.eigenvalues.clone();
        for &(v, m) in &self.deterministic {
            all.extend(std::iter::repeat_n(v, m));
        }
        match self.case {
            CaseTag::Multiplicative => all.sort_by(|x, y| x.partial_cmp(y).unwrap()),
            _ => all.sort_by(|x, y| y.partial_cmp(x).unwrap()),
        }
        all
    }
}

/// Open brackets that contain exactly one root each.
///
/// Additive: `(a_1, a_1+b), (a_2, a_1), …, (a_n, a_{n-1})`; the top
/// bracket's upper end comes from the trace identity. Projection:
/// `(a_2, a_1), …, (a_n, a_{n-1})`.
pub fn interlacing_support(
    spec: &SpectrumSpec,
    case: CaseTag,
    b: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    let a = spec.values();
    match case {
        CaseTag::Additive => {
            let b = b.ok_or_else(|| Error::InvalidInput("additive case needs b".into()))?;
            if b <= 0.0 {
                return Err(Error::NonPositiveParameter(b));
            }
            let mut iv = Vec::with_capacity(a.len());
            iv.push((a[0], a[0] + b));
            for w in a.windows(2) {
                iv.push((w[1], w[0]));
            }
            Ok(iv)
        }
        CaseTag::Projection => Ok(a.windows(2).map(|w| (w[1], w[0])).collect()),
        _ => Err(Error::InvalidInput(
            "interlacing_support handles additive/projection; use angular_arcs".into(),
        )),
    }
}

/// The `n` cyclic arcs `(θ_i, θ_{i+1})`, the last one wrapping to
/// `θ_1 + 2π`. Each contains exactly one eigenphase of the product matrix.
pub fn angular_arcs(spec: &AngularSpectrum) -> Vec<(f64, f64)> {
    let t = spec.angles();
    let n = t.len();
    let mut arcs = Vec::with_capacity(n);
    for i in 0..n {
        let hi = if i + 1 < n { t[i + 1] } else { t[0] + TAU };
        arcs.push((t[i], hi));
    }
    arcs
}

fn constraint_tol(diameter: f64) -> f64 {
    CONSTRAINT_TOL * 1.0_f64.max(diameter)
}

/// Checks the additive-sample invariants: strict interlacing
/// `μ_1 > a_1 > μ_2 > ⋯ > μ_n > a_n` and the trace identity
/// `Σ full spectrum = Σ a_l m_l + b`.
pub fn check_additive_sample(spec: &SpectrumSpec, b: f64, sample: &EigenSample) -> Result<()> {
    let a = spec.values();
    let mu = &sample.eigenvalues;
    if mu.len() != a.len() {
        return Err(Error::SupportViolation(format!(
            "expected {} free eigenvalues, got {}",
            a.len(),
            mu.len()
        )));
    }
    for j in 0..a.len() {
        if !(mu[j] > a[j]) || (j + 1 < a.len() && !(a[j] > mu[j + 1])) {
            return Err(Error::SupportViolation(format!(
                "additive interlacing broken near index {j}"
            )));
        }
    }
    let total: f64 = sample.full_spectrum().iter().sum();
    let resid = (total - spec.trace() - b).abs();
    if resid > constraint_tol(spec.diameter().max(b)) {
        return Err(Error::SupportViolation(format!(
            "trace constraint residual {resid:.3e}"
        )));
    }
    Ok(())
}

/// Checks the projection-sample invariants: exactly one deterministic zero
/// and strict interlacing `a_1 > λ_1 > a_2 > ⋯ > λ_{n-1} > a_n`.
pub fn check_projection_sample(spec: &SpectrumSpec, sample: &EigenSample) -> Result<()> {
    let a = spec.values();
    let lam = &sample.eigenvalues;
    if lam.len() + 1 != a.len() && !(a.len() == 1 && lam.is_empty()) {
        return Err(Error::SupportViolation(format!(
            "expected {} free eigenvalues, got {}",
            a.len() - 1,
            lam.len()
        )));
    }
    let zeros = sample
        .deterministic
        .iter()
        .filter(|(v, _)| v.abs() <= 1e-10 * 1.0_f64.max(spec.diameter()))
        .count();
    if zeros == 0 {
        return Err(Error::SupportViolation(
            "projection sample lacks its deterministic zero eigenvalue".into(),
        ));
    }
    for j in 0..lam.len() {
        if !(a[j] > lam[j]) || !(lam[j] > a[j + 1]) {
            return Err(Error::SupportViolation(format!(
                "projection interlacing broken near index {j}"
            )));
        }
    }
    Ok(())
}

/// Checks the multiplicative-sample invariants: one eigenphase per cyclic
/// arc and the phase-sum identity `Σψ ≡ Σ θ_l m_l + φ (mod 2π)` over the
/// full spectrum.
pub fn check_multiplicative_sample(
    spec: &AngularSpectrum,
    phi: f64,
    sample: &EigenSample,
) -> Result<()> {
    let psi = &sample.eigenvalues;
    let n = spec.len();
    if psi.len() != n {
        return Err(Error::SupportViolation(format!(
            "expected {} free eigenphases, got {}",
            n,
            psi.len()
        )));
    }
    for (lo, hi) in angular_arcs(spec) {
        // membership of the half-open circle value in the open arc
        let hits = psi
            .iter()
            .filter(|&&p| {
                let mut x = p;
                if x <= lo {
                    x += TAU;
                }
                x > lo && x < hi
            })
            .count();
        if hits != 1 {
            return Err(Error::SupportViolation(format!(
                "arc ({lo:.6}, {hi:.6}) contains {hits} eigenphases, expected 1"
            )));
        }
    }
    let total: f64 = sample.full_spectrum().iter().sum();
    let resid = phase_residual(total, spec.phase_trace() + phi);
    if resid > CONSTRAINT_TOL {
        return Err(Error::SupportViolation(format!(
            "phase-sum constraint residual {resid:.3e}"
        )));
    }
    Ok(())
}

/// Distance between two angles modulo 2π.
pub fn phase_residual(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y == TAU {
        0.0
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_spectrum() {
        let s = validate_spectrum(&[1.0, 0.0], &[1, 1], false).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.total_dim(), 2);
    }

    #[test]
    fn unsorted_without_permission_is_order_violation() {
        let e = validate_spectrum(&[0.0, 1.0], &[1, 1], false).unwrap_err();
        assert!(matches!(e, Error::OrderViolation));
        // with sorting allowed the same input is fine
        let s = validate_spectrum(&[0.0, 1.0], &[1, 1], true).unwrap();
        assert_eq!(s.values(), &[1.0, 0.0]);
    }

    #[test]
    fn below_merge_tolerance_is_duplicate() {
        let e = validate_spectrum(&[1.0, 1.0 + 1e-14], &[1, 1], true).unwrap_err();
        assert!(matches!(e, Error::DuplicateEigenvalue(_, _)));
        let e = validate_spectrum(&[1.0, 1.0 + 1e-14], &[1, 1], false).unwrap_err();
        assert!(matches!(e, Error::DuplicateEigenvalue(_, _)));
    }

    #[test]
    fn zero_multiplicity_rejected() {
        let e = validate_spectrum(&[1.0, 0.0], &[1, 0], false).unwrap_err();
        assert!(matches!(e, Error::NonPositiveMultiplicity));
    }

    #[test]
    fn spectrum_json_round_trip() {
        let s = SpectrumSpec::new(vec![2.0, 1.0, 0.0], vec![2, 1, 3]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"values":[2.0,1.0,0.0],"multiplicities":[2,1,3]}"#);
        let back: SpectrumSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        // multiplicities may be omitted
        let simple: SpectrumSpec = serde_json::from_str(r#"{"values":[1.0,0.0]}"#).unwrap();
        assert!(simple.is_simple());
    }

    #[test]
    fn interlacing_support_additive() {
        let s = SpectrumSpec::simple(vec![1.0, 0.0]).unwrap();
        let iv = interlacing_support(&s, CaseTag::Additive, Some(1.0)).unwrap();
        assert_eq!(iv, vec![(1.0, 2.0), (0.0, 1.0)]);
    }

    #[test]
    fn interlacing_support_projection() {
        let s = SpectrumSpec::simple(vec![1.0, 0.0]).unwrap();
        let iv = interlacing_support(&s, CaseTag::Projection, None).unwrap();
        assert_eq!(iv, vec![(0.0, 1.0)]);
    }

    #[test]
    fn interlacing_support_n1_additive() {
        let s = SpectrumSpec::simple(vec![5.0]).unwrap();
        let iv = interlacing_support(&s, CaseTag::Additive, Some(2.0)).unwrap();
        assert_eq!(iv, vec![(5.0, 7.0)]);
    }

    #[test]
    fn support_intervals_disjoint_and_ordered() {
        let s = SpectrumSpec::simple(vec![3.0, 1.5, 0.25, -2.0]).unwrap();
        for case in [CaseTag::Additive, CaseTag::Projection] {
            let iv = interlacing_support(&s, case, Some(0.7)).unwrap();
            for w in iv.windows(2) {
                assert!(w[0].0 >= w[1].1, "intervals overlap: {w:?}");
                assert!(w[0].0 < w[0].1 && w[1].0 < w[1].1);
            }
        }
    }

    #[test]
    fn multiplicative_case_rejected_by_real_support() {
        let s = SpectrumSpec::simple(vec![1.0, 0.0]).unwrap();
        assert!(interlacing_support(&s, CaseTag::Multiplicative, None).is_err());
    }

    #[test]
    fn angular_arcs_wrap() {
        let s = AngularSpectrum::simple(vec![0.0, std::f64::consts::PI]).unwrap();
        let arcs = angular_arcs(&s);
        assert_eq!(arcs.len(), 2);
        assert_eq!(arcs[0], (0.0, std::f64::consts::PI));
        assert_eq!(arcs[1], (std::f64::consts::PI, TAU));
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn angles_outside_range_rejected() {
        assert!(AngularSpectrum::simple(vec![0.0, TAU]).is_err());
        assert!(AngularSpectrum::simple(vec![-0.1]).is_err());
    }
}
