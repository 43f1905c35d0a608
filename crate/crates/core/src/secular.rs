//! Root solvers for the three secular equations, residue-based inverse maps
//! from eigenvalues back to simplex weights, and the Jacobian determinant
//! used by density cross-checks.
//!
//! All three secular functions are strictly monotone between consecutive
//! poles, so every root is bracketed and a safeguarded Newton iteration
//! converges unconditionally.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::randsrc::{dirichlet, Field, RngState};
use crate::spectra::{
    angular_arcs, phase_residual, wrap_angle, AngularSpectrum, CaseTag, EigenSample, SpectrumSpec,
    WeightVector,
};

/// Weights below this count as exact zeros: the pole is dropped from the
/// secular function and the matching root is reported exactly at that pole.
pub const WEIGHT_FLOOR: f64 = 1e-14;

const MAX_ITER: usize = 200;

/// Brackets are shrunk inward by this fraction of their length so the
/// secular function is never evaluated at a pole.
const BRACKET_SHRINK: f64 = 1e-13;

/// One secular problem instance; the variant fixes which equation applies.
#[derive(Debug, Clone)]
pub enum SecularProblem {
    /// Roots of `1 - b Σ w_l/(λ - a_l)`.
    Additive {
        spectrum: SpectrumSpec,
        weights: WeightVector,
        shift: f64,
    },
    /// Roots of `Σ w_p/(λ - a_p)`.
    Projection {
        spectrum: SpectrumSpec,
        weights: WeightVector,
    },
    /// Roots of `cot(φ/2) - Σ q_j cot((ψ - θ_j)/2)`.
    Multiplicative {
        spectrum: AngularSpectrum,
        weights: WeightVector,
        phase: f64,
    },
}

impl SecularProblem {
    pub fn solve(&self) -> Result<EigenSample> {
        match self {
            SecularProblem::Additive {
                spectrum,
                weights,
                shift,
            } => additive_roots(spectrum, weights, *shift),
            SecularProblem::Projection { spectrum, weights } => {
                projection_roots(spectrum, weights)
            }
            SecularProblem::Multiplicative {
                spectrum,
                weights,
                phase,
            } => multiplicative_roots(spectrum, weights, *phase),
        }
    }
}

/// Finds the unique zero of a strictly monotone function on `(lo, hi)`.
/// `f` returns `(value, derivative)`; Newton steps are taken while they stay
/// inside the current sign-change bracket, bisection otherwise.
fn bracketed_root(
    mut lo: f64,
    mut hi: f64,
    increasing: bool,
    mut f: impl FnMut(f64) -> (f64, f64),
) -> Result<f64> {
    let mut x = 0.5 * (lo + hi);
    for it in 0..MAX_ITER {
        let (mut v, mut d) = f(x);
        if !increasing {
            v = -v;
            d = -d;
        }
        if v == 0.0 {
            return Ok(x);
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(0.5 * (lo + hi));
        }
        // Newton can micro-step when the root hugs a pole; a periodic
        // bisection keeps the bracket halving regardless.
        let proposal = x - v / d;
        let next = if it % 3 != 2 && proposal.is_finite() && proposal > lo && proposal < hi {
            proposal
        } else {
            0.5 * (lo + hi)
        };
        if next == x || next == lo || next == hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::ConvergenceFailure(format!(
        "root search stalled on ({lo}, {hi})"
    )))
}

/// Splits weights at the floor: `(active index, pole, weight)` triples with
/// the active weights renormalized, plus the poles pinned by zero weights.
fn split_active(poles: &[f64], weights: &WeightVector) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut active_poles = Vec::with_capacity(poles.len());
    let mut active_weights = Vec::with_capacity(poles.len());
    let mut pinned = Vec::new();
    for (l, &p) in poles.iter().enumerate() {
        if weights[l] < WEIGHT_FLOOR {
            pinned.push(p);
        } else {
            active_poles.push(p);
            active_weights.push(weights[l]);
        }
    }
    if active_poles.is_empty() {
        return Err(Error::DegenerateWeight(
            "every weight sits below the floor".into(),
        ));
    }
    let total: f64 = active_weights.iter().sum();
    for w in &mut active_weights {
        *w /= total;
    }
    Ok((active_poles, active_weights, pinned))
}

fn check_lengths(n_spec: usize, n_weights: usize) -> Result<()> {
    if n_spec != n_weights {
        return Err(Error::InvalidInput(format!(
            "{n_weights} weights for {n_spec} distinct spectrum entries"
        )));
    }
    Ok(())
}

/// Solves `1 - b Σ w_l/(λ - a_l) = 0`: one root above `a_1` (bounded by
/// `a_1 + b` through the trace identity) and one in each gap `(a_l, a_{l-1})`.
pub fn additive_roots(
    spectrum: &SpectrumSpec,
    weights: &WeightVector,
    b: f64,
) -> Result<EigenSample> {
    check_lengths(spectrum.len(), weights.len())?;
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::NonPositiveParameter(b));
    }
    let (ap, aw, pinned) = split_active(spectrum.values(), weights)?;
    let k = ap.len();
    let mut roots = Vec::with_capacity(spectrum.len());
    if k == 1 {
        roots.push(ap[0] + b);
    } else {
        for i in 0..k {
            let (blo, bhi) = if i == 0 {
                (ap[0], ap[0] + b)
            } else {
                (ap[i], ap[i - 1])
            };
            let eps = BRACKET_SHRINK * (bhi - blo);
            let root = bracketed_root(blo + eps, bhi - eps, true, |x| {
                let mut v = 1.0;
                let mut d = 0.0;
                for (p, w) in ap.iter().zip(&aw) {
                    let diff = x - p;
                    v -= b * w / diff;
                    d += b * w / (diff * diff);
                }
                (v, d)
            })?;
            roots.push(root);
        }
    }
    roots.extend_from_slice(&pinned);
    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let mut sample = EigenSample {
        case: CaseTag::Additive,
        eigenvalues: roots,
        deterministic: repeated_part(spectrum.values(), spectrum.multiplicities()),
        constraint_residual: 0.0,
    };
    let total: f64 = sample.full_spectrum().iter().sum();
    sample.constraint_residual = (total - spectrum.trace() - b).abs();
    Ok(sample)
}

/// Solves `Σ w_p/(λ - a_p) = 0`: one root per gap `(a_{j+1}, a_j)`, plus the
/// deterministic zero eigenvalue of the projected matrix.
pub fn projection_roots(spectrum: &SpectrumSpec, weights: &WeightVector) -> Result<EigenSample> {
    check_lengths(spectrum.len(), weights.len())?;
    let (ap, aw, pinned) = split_active(spectrum.values(), weights)?;
    let k = ap.len();
    let mut roots = Vec::with_capacity(spectrum.len().saturating_sub(1));
    for i in 1..k {
        let (blo, bhi) = (ap[i], ap[i - 1]);
        let eps = BRACKET_SHRINK * (bhi - blo);
        let root = bracketed_root(blo + eps, bhi - eps, false, |x| {
            let mut v = 0.0;
            let mut d = 0.0;
            for (p, w) in ap.iter().zip(&aw) {
                let diff = x - p;
                v += w / diff;
                d -= w / (diff * diff);
            }
            (v, d)
        })?;
        roots.push(root);
    }
    roots.extend_from_slice(&pinned);
    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let mut deterministic = vec![(0.0, 1)];
    deterministic.extend(repeated_part(spectrum.values(), spectrum.multiplicities()));
    Ok(EigenSample {
        case: CaseTag::Projection,
        eigenvalues: roots,
        deterministic,
        constraint_residual: 0.0,
    })
}

/// `cot(z/2)` with `z` reduced mod 2π, and the ψ-derivative of
/// `cot((ψ-θ)/2)`, which is `-1/(2 sin²((ψ-θ)/2))`.
fn cot_half(z: f64) -> (f64, f64) {
    let h = 0.5 * z.rem_euclid(TAU);
    let (s, c) = h.sin_cos();
    (c / s, -0.5 / (s * s))
}

/// Solves `cot(φ/2) = Σ q_j cot((ψ - θ_j)/2)`: one eigenphase per cyclic
/// arc `(θ_i, θ_{i+1})`, the last arc wrapping past 2π.
///
/// The Newton iteration runs in the half-angle tangent `u = tan((ψ-c)/2)`
/// about each arc's midpoint `c`, which keeps steps finite however close
/// the arc endpoints sit to the poles.
pub fn multiplicative_roots(
    spectrum: &AngularSpectrum,
    weights: &WeightVector,
    phi: f64,
) -> Result<EigenSample> {
    check_lengths(spectrum.len(), weights.len())?;
    if !(phi > 0.0 && phi < TAU) {
        return Err(Error::InvalidInput(format!(
            "phase must lie in (0, 2pi), got {phi}"
        )));
    }
    let (tp, tw, pinned) = split_active(spectrum.angles(), weights)?;
    let k = tp.len();
    let target = {
        let h = 0.5 * phi;
        h.cos() / h.sin()
    };
    let mut roots = Vec::with_capacity(spectrum.len());
    if k == 1 {
        roots.push(wrap_angle(tp[0] + phi));
    } else {
        for i in 0..k {
            let lo = tp[i];
            let hi = if i + 1 < k { tp[i + 1] } else { tp[0] + TAU };
            let eps = BRACKET_SHRINK * (hi - lo);
            let c = 0.5 * (lo + hi);
            let u_lo = (0.5 * (lo + eps - c)).tan();
            let u_hi = (0.5 * (hi - eps - c)).tan();
            let u = bracketed_root(u_lo, u_hi, false, |u| {
                let psi = c + 2.0 * u.atan();
                let mut v = -target;
                let mut d = 0.0;
                for (t, q) in tp.iter().zip(&tw) {
                    let (cot, dcot) = cot_half(psi - t);
                    v += q * cot;
                    d += q * dcot;
                }
                (v, d * 2.0 / (1.0 + u * u))
            })?;
            roots.push(wrap_angle(c + 2.0 * u.atan()));
        }
    }
    roots.extend(pinned.iter().map(|&t| wrap_angle(t)));
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut sample = EigenSample {
        case: CaseTag::Multiplicative,
        eigenvalues: roots,
        deterministic: repeated_part(spectrum.angles(), spectrum.multiplicities()),
        constraint_residual: 0.0,
    };
    let total: f64 = sample.full_spectrum().iter().sum();
    sample.constraint_residual = phase_residual(total, spectrum.phase_trace() + phi);
    Ok(sample)
}

fn repeated_part(values: &[f64], multiplicities: &[usize]) -> Vec<(f64, usize)> {
    values
        .iter()
        .zip(multiplicities)
        .filter(|(_, &m)| m > 1)
        .map(|(&v, &m)| (v, m - 1))
        .collect()
}

fn check_additive_interlacing(a: &[f64], lambda: &[f64], b: f64) -> Result<()> {
    let n = a.len();
    if lambda.len() != n || n == 0 {
        return Err(Error::InvalidInput(format!(
            "{} roots for {} poles",
            lambda.len(),
            n
        )));
    }
    if !(lambda[0] > a[0]) || !(lambda[0] < a[0] + b) {
        return Err(Error::SupportViolation(format!(
            "top root {} outside (a_1, a_1+b) = ({}, {})",
            lambda[0],
            a[0],
            a[0] + b
        )));
    }
    for j in 1..n {
        if !(a[j - 1] > lambda[j]) || !(lambda[j] > a[j]) {
            return Err(Error::SupportViolation(format!(
                "root {} outside gap ({}, {})",
                lambda[j],
                a[j],
                a[j - 1]
            )));
        }
    }
    Ok(())
}

/// Residues of `Π(λ-λ_l)/Π(λ-a_l)` at each pole: recovers the weights that
/// produced an additive root configuration.
pub fn weights_from_roots_additive(a: &[f64], lambda: &[f64], b: f64) -> Result<WeightVector> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::NonPositiveParameter(b));
    }
    check_additive_interlacing(a, lambda, b)?;
    let n = a.len();
    let mut w = vec![0.0; n];
    for j in 0..n {
        // interleave numerator and denominator factors to keep the running
        // product near unit scale
        let mut val = (lambda[j] - a[j]) / b;
        for l in 0..n {
            if l != j {
                val *= (a[j] - lambda[l]) / (a[j] - a[l]);
            }
        }
        w[j] = val;
    }
    finish_simplex(w)
}

/// Inverse of `projection_roots`: weights from the n−1 interior roots.
pub fn weights_from_roots_projection(a: &[f64], lambda: &[f64]) -> Result<WeightVector> {
    let n = a.len();
    if n == 0 || lambda.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "{} roots for {} poles",
            lambda.len(),
            n
        )));
    }
    for j in 0..lambda.len() {
        if !(a[j] > lambda[j]) || !(lambda[j] > a[j + 1]) {
            return Err(Error::SupportViolation(format!(
                "root {} outside gap ({}, {})",
                lambda[j],
                a[j + 1],
                a[j]
            )));
        }
    }
    let mut w = vec![0.0; n];
    for j in 0..n {
        let mut val = 1.0;
        for (l, &lam) in lambda.iter().enumerate() {
            let dl = if l < j { l } else { l + 1 };
            val *= (a[j] - lam) / (a[j] - a[dl]);
        }
        w[j] = val;
    }
    finish_simplex(w)
}

/// Inverse of `multiplicative_roots` on a simple spectrum, via residues of
/// the rational function on the unit circle. Rejects `φ ≡ 0 (mod 2π)`,
/// where the product matrix degenerates to the original one.
pub fn weights_from_roots_multiplicative(
    theta: &[f64],
    psi: &[f64],
    phi: f64,
) -> Result<WeightVector> {
    let n = theta.len();
    if n == 0 || psi.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} eigenphases for {} poles",
            psi.len(),
            n
        )));
    }
    let t = Complex64::from_polar(1.0, phi);
    let t_minus_1 = t - 1.0;
    if t_minus_1.norm() <= 1e-12 {
        return Err(Error::SupportViolation(
            "phase is a multiple of 2pi; the residue map is singular".into(),
        ));
    }
    let arcs = AngularSpectrum::simple(theta.to_vec()).map(|s| angular_arcs(&s))?;
    for (lo, hi) in arcs {
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
                "arc ({lo:.6}, {hi:.6}) holds {hits} eigenphases, expected 1"
            )));
        }
    }
    let lam: Vec<Complex64> = theta.iter().map(|&x| Complex64::from_polar(1.0, x)).collect();
    let tilde: Vec<Complex64> = psi.iter().map(|&x| Complex64::from_polar(1.0, x)).collect();
    let mut w = vec![0.0; n];
    for j in 0..n {
        let mut val = (lam[j] - tilde[j]) / (-t_minus_1 * lam[j]);
        for l in 0..n {
            if l != j {
                val *= (lam[j] - tilde[l]) / (lam[j] - lam[l]);
            }
        }
        if val.im.abs() > 1e-10 {
            return Err(Error::NonRealResidue(val.im));
        }
        w[j] = val.re;
    }
    finish_simplex(w)
}

/// Validates recovered residues: tiny negative round-off is clamped, the
/// total must land on 1 within 1e-10, and the result is renormalized.
fn finish_simplex(mut w: Vec<f64>) -> Result<WeightVector> {
    for x in &mut w {
        if *x < 0.0 {
            if *x < -1e-10 {
                return Err(Error::SupportViolation(format!(
                    "recovered weight {x} is negative"
                )));
            }
            *x = 0.0;
        }
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::SupportViolation(format!(
            "recovered weights sum to {sum}, not 1"
        )));
    }
    for x in &mut w {
        *x /= sum;
    }
    WeightVector::new(w)
}

/// Log-magnitude and sign of the Cauchy determinant `det[1/(x_j - y_l)]`,
/// from the double-alternant product form.
fn cauchy_log_det(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::InvalidInput(format!(
            "cauchy determinant needs square data, got {n} x {}",
            y.len()
        )));
    }
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    let mut push = |factor: f64| -> Result<()> {
        if factor == 0.0 {
            sign = 0.0;
            log_abs = f64::NEG_INFINITY;
        } else {
            if factor < 0.0 {
                sign = -sign;
            }
            log_abs += factor.abs().ln();
        }
        Ok(())
    };
    for j in 0..n {
        for k in (j + 1)..n {
            push(x[j] - x[k])?;
            push(y[k] - y[j])?;
        }
    }
    for &xj in x {
        for &yl in y {
            let d = xj - yl;
            if d == 0.0 {
                return Err(Error::InvalidInput(
                    "cauchy determinant pole: x_j equals y_l".into(),
                ));
            }
            if d < 0.0 {
                sign = -sign;
            }
            log_abs -= d.abs().ln();
        }
    }
    Ok((log_abs, sign))
}

/// The Cauchy double alternant `det[1/(x_j - y_l)]` evaluated through its
/// closed product form.
pub fn cauchy_double_alternant(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Ok(1.0);
    }
    let (log_abs, sign) = cauchy_log_det(x, y)?;
    Ok(sign * log_abs.exp())
}

/// `|det[1/(a_j - λ_l) - 1/(a_j - λ_n)]|` over `j, l = 1..n-1`, the change
/// of variables factor between the free weights and the free eigenvalues of
/// the additive problem. Evaluated through the product form.
pub fn jacobian_additive(a: &[f64], lambda: &[f64], b: f64) -> Result<f64> {
    check_additive_interlacing(a, lambda, b)?;
    let n = a.len();
    if n == 1 {
        return Ok(1.0);
    }
    let last = lambda[n - 1];
    let mut log_abs = 0.0;
    for l in 0..n - 1 {
        log_abs += (lambda[l] - last).abs().ln() - (a[l] - last).abs().ln();
    }
    let (cauchy, _) = cauchy_log_det(&a[..n - 1], &lambda[..n - 1])?;
    Ok((log_abs + cauchy).exp())
}

/// Draws weights from the Dirichlet law the field induces on the
/// multiplicity blocks, then solves the additive secular equation.
pub fn sample_additive_secular(
    spectrum: &SpectrumSpec,
    b: f64,
    field: Field,
    rng: &mut RngState,
) -> Result<EigenSample> {
    let shapes = field.dirichlet_shapes(spectrum.multiplicities());
    let w = dirichlet(rng, &shapes)?;
    additive_roots(spectrum, &w, b)
}

/// Dirichlet weights, then the projection secular equation.
pub fn sample_projection_secular(
    spectrum: &SpectrumSpec,
    field: Field,
    rng: &mut RngState,
) -> Result<EigenSample> {
    let shapes = field.dirichlet_shapes(spectrum.multiplicities());
    let w = dirichlet(rng, &shapes)?;
    projection_roots(spectrum, &w)
}

/// Dirichlet weights (complex-field shapes), then the angular secular
/// equation.
pub fn sample_multiplicative_secular(
    spectrum: &AngularSpectrum,
    phi: f64,
    rng: &mut RngState,
) -> Result<EigenSample> {
    let shapes = Field::Complex.dirichlet_shapes(spectrum.multiplicities());
    let q = dirichlet(rng, &shapes)?;
    multiplicative_roots(spectrum, &q, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{check_additive_sample, check_multiplicative_sample, interlacing_support};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn simple(values: &[f64]) -> SpectrumSpec {
        SpectrumSpec::simple(values.to_vec()).unwrap()
    }

    fn wv(w: &[f64]) -> WeightVector {
        WeightVector::new(w.to_vec()).unwrap()
    }

    #[test]
    fn additive_two_pole_closed_form() {
        let s = simple(&[1.0, 0.0]);
        let out = additive_roots(&s, &wv(&[0.5, 0.5]), 1.0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(out.eigenvalues[0], 1.0 + r, epsilon = 1e-12);
        assert_abs_diff_eq!(out.eigenvalues[1], 1.0 - r, epsilon = 1e-12);
        assert!(out.constraint_residual < 1e-12);
        check_additive_sample(&s, 1.0, &out).unwrap();
    }

    #[test]
    fn additive_single_pole_is_analytic() {
        let s = simple(&[5.0]);
        let out = additive_roots(&s, &wv(&[1.0]), 2.0).unwrap();
        assert_eq!(out.eigenvalues, vec![7.0]);
        let w = weights_from_roots_additive(&[5.0], &[7.0 - 1e-13], 2.0).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn additive_tiny_shift_matches_perturbation() {
        let s = simple(&[1.0, 0.0]);
        let b = 1e-8;
        let out = additive_roots(&s, &wv(&[0.5, 0.5]), b).unwrap();
        assert_abs_diff_eq!(out.eigenvalues[0], 1.0 + 0.5 * b, epsilon = 1e-12);
        assert_abs_diff_eq!(out.eigenvalues[1], 0.5 * b, epsilon = 1e-12);
    }

    #[test]
    fn additive_zero_weight_pins_root_at_pole() {
        let s = simple(&[2.0, 1.0, 0.0]);
        let out = additive_roots(&s, &wv(&[0.5, 0.0, 0.5]), 1.0).unwrap();
        let golden = 5.0_f64.sqrt();
        assert_abs_diff_eq!(out.eigenvalues[0], (3.0 + golden) / 2.0, epsilon = 1e-10);
        assert_eq!(out.eigenvalues[1], 1.0);
        assert_abs_diff_eq!(out.eigenvalues[2], (3.0 - golden) / 2.0, epsilon = 1e-10);
        assert!(out.constraint_residual < 1e-9);
    }

    #[test]
    fn additive_roots_stay_bracketed_with_positive_slope() {
        let s = simple(&[3.0, 1.5, 0.25, -2.0]);
        let b = 0.7;
        let mut rng = RngState::new(17);
        let support = interlacing_support(&s, CaseTag::Additive, Some(b)).unwrap();
        for _ in 0..100 {
            let out = sample_additive_secular(&s, b, Field::Complex, &mut rng).unwrap();
            for (root, (lo, hi)) in out.eigenvalues.iter().zip(&support) {
                assert!(root > lo && root < hi, "{root} outside ({lo}, {hi})");
            }
            // the secular function must cross upward at each root
            let w = weights_from_roots_additive(s.values(), &out.eigenvalues, b).unwrap();
            for root in &out.eigenvalues {
                let slope: f64 = s
                    .values()
                    .iter()
                    .zip(w.as_slice())
                    .map(|(a, wl)| b * wl / ((root - a) * (root - a)))
                    .sum();
                assert!(slope > 0.0);
            }
        }
    }

    #[test]
    fn projection_two_pole_closed_form() {
        let s = simple(&[1.0, 0.0]);
        let out = projection_roots(&s, &wv(&[0.5, 0.5])).unwrap();
        assert_abs_diff_eq!(out.eigenvalues[0], 0.5, epsilon = 1e-12);
        let out = projection_roots(&s, &wv(&[0.3, 0.7])).unwrap();
        assert_abs_diff_eq!(out.eigenvalues[0], 0.7, epsilon = 1e-12);
        assert_eq!(out.deterministic, vec![(0.0, 1)]);
    }

    #[test]
    fn projection_single_pole_has_only_zero() {
        let s = simple(&[4.0]);
        let out = projection_roots(&s, &wv(&[1.0])).unwrap();
        assert!(out.eigenvalues.is_empty());
        assert_eq!(out.full_spectrum(), vec![0.0]);
    }

    #[test]
    fn projection_weight_inversion_round_trip() {
        let a = [2.0, 1.0, 0.0];
        let lambda = [1.5, 0.5];
        let w = weights_from_roots_projection(&a, &lambda).unwrap();
        let s = simple(&a);
        let out = projection_roots(&s, &w).unwrap();
        assert_abs_diff_eq!(out.eigenvalues[0], 1.5, epsilon = 1e-10);
        assert_abs_diff_eq!(out.eigenvalues[1], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn projection_inverse_two_pole() {
        let w = weights_from_roots_projection(&[1.0, 0.0], &[0.5]).unwrap();
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn multiplicative_symmetric_example() {
        let s = AngularSpectrum::simple(vec![0.0, PI]).unwrap();
        let out = multiplicative_roots(&s, &wv(&[0.5, 0.5]), PI).unwrap();
        assert_abs_diff_eq!(out.eigenvalues[0], PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.eigenvalues[1], 3.0 * PI / 2.0, epsilon = 1e-12);
        assert!(out.constraint_residual < 1e-9);
        check_multiplicative_sample(&s, PI, &out).unwrap();
    }

    #[test]
    fn multiplicative_small_phase_stays_near_poles() {
        let s = AngularSpectrum::simple(vec![0.5, 2.0, 4.0]).unwrap();
        let out = multiplicative_roots(&s, &wv(&[0.2, 0.3, 0.5]), 1e-9).unwrap();
        for (psi, theta) in out.eigenvalues.iter().zip(s.angles()) {
            assert!((psi - theta).abs() < 1e-8, "{psi} vs {theta}");
        }
    }

    #[test]
    fn multiplicative_single_pole_rotates_by_phase() {
        let s = AngularSpectrum::simple(vec![1.0]).unwrap();
        let out = multiplicative_roots(&s, &wv(&[1.0]), 2.0).unwrap();
        assert_abs_diff_eq!(out.eigenvalues[0], 3.0, epsilon = 1e-12);
        // wrap past 2pi
        let out = multiplicative_roots(&s, &wv(&[1.0]), 6.0).unwrap();
        assert_abs_diff_eq!(out.eigenvalues[0], wrap_angle(7.0), epsilon = 1e-12);
    }

    #[test]
    fn multiplicative_inverse_recovers_weights() {
        let q = weights_from_roots_multiplicative(&[0.0, PI], &[PI / 2.0, 3.0 * PI / 2.0], PI)
            .unwrap();
        assert_abs_diff_eq!(q[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(q[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn multiplicative_inverse_rejects_unit_t() {
        let e = weights_from_roots_multiplicative(&[0.0, PI], &[0.0, PI], 0.0).unwrap_err();
        assert!(matches!(e, Error::SupportViolation(_)));
    }

    #[test]
    fn multiplicative_rejects_phase_outside_range() {
        let s = AngularSpectrum::simple(vec![0.0, PI]).unwrap();
        assert!(multiplicative_roots(&s, &wv(&[0.5, 0.5]), 0.0).is_err());
        assert!(multiplicative_roots(&s, &wv(&[0.5, 0.5]), TAU).is_err());
    }

    #[test]
    fn jacobian_two_pole_direct() {
        let j = jacobian_additive(&[1.0, 0.0], &[1.7, 0.3], 1.0).unwrap();
        assert_abs_diff_eq!(j, 2.0 / 0.7, epsilon = 1e-12);
    }

    #[test]
    fn jacobian_matches_direct_determinant() {
        let a = [4.0, 2.5, 1.0, 0.2, -1.0];
        let b = 1.3;
        let s = simple(&a);
        let mut rng = RngState::new(23);
        for _ in 0..50 {
            let out = sample_additive_secular(&s, b, Field::Complex, &mut rng).unwrap();
            let lam = &out.eigenvalues;
            let n = a.len();
            let m = DMatrix::from_fn(n - 1, n - 1, |j, l| {
                1.0 / (a[j] - lam[l]) - 1.0 / (a[j] - lam[n - 1])
            });
            let direct = m.determinant().abs();
            let closed = jacobian_additive(&a, lam, b).unwrap();
            assert!(
                (closed - direct).abs() <= 1e-8 * direct.abs(),
                "closed {closed} direct {direct}"
            );
        }
    }

    #[test]
    fn cauchy_identity_matches_direct_determinant() {
        let x = [3.0, 1.2, 0.4, -0.9];
        let y = [2.1, 0.8, 0.0, -2.0];
        let m = DMatrix::from_fn(4, 4, |j, l| 1.0 / (x[j] - y[l]));
        let direct = m.determinant();
        let closed = cauchy_double_alternant(&x, &y).unwrap();
        assert!(
            (closed - direct).abs() <= 1e-10 * direct.abs(),
            "closed {closed} direct {direct}"
        );
    }

    #[test]
    fn large_simple_round_trip() {
        let n = 50;
        let values: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        let s = SpectrumSpec::simple(values.clone()).unwrap();
        let w = wv(&vec![1.0 / n as f64; n]);
        let b = 2.0;
        let out = additive_roots(&s, &w, b).unwrap();
        let back = weights_from_roots_additive(&values, &out.eigenvalues, b).unwrap();
        for (x, y) in back.as_slice().iter().zip(w.as_slice()) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
        let out = projection_roots(&s, &w).unwrap();
        let back = weights_from_roots_projection(&values, &out.eigenvalues).unwrap();
        for (x, y) in back.as_slice().iter().zip(w.as_slice()) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    fn normalized(raw: Vec<f64>) -> Vec<f64> {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    }

    fn descending_from_gaps(base: f64, gaps: &[f64]) -> Vec<f64> {
        let mut v = vec![base];
        for g in gaps {
            v.push(v.last().unwrap() - g);
        }
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn additive_round_trip(
            base in -1.0f64..1.0,
            gaps in prop::collection::vec(0.01f64..1.0, 1..6),
            raw in prop::collection::vec(1e-6f64..1.0, 2..7),
            b in 0.05f64..3.0,
        ) {
            let n = gaps.len().min(raw.len() - 1) + 1;
            let a = descending_from_gaps(base, &gaps[..n - 1]);
            let w = wv(&normalized(raw[..n].to_vec()));
            let s = SpectrumSpec::simple(a.clone()).unwrap();
            let out = additive_roots(&s, &w, b).unwrap();
            let back = weights_from_roots_additive(&a, &out.eigenvalues, b).unwrap();
            for (x, y) in back.as_slice().iter().zip(w.as_slice()) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }

        #[test]
        fn projection_round_trip(
            base in -1.0f64..1.0,
            gaps in prop::collection::vec(0.01f64..1.0, 1..6),
            raw in prop::collection::vec(1e-6f64..1.0, 2..7),
        ) {
            let n = gaps.len().min(raw.len() - 1) + 1;
            let a = descending_from_gaps(base, &gaps[..n - 1]);
            let w = wv(&normalized(raw[..n].to_vec()));
            let s = SpectrumSpec::simple(a.clone()).unwrap();
            let out = projection_roots(&s, &w).unwrap();
            let back = weights_from_roots_projection(&a, &out.eigenvalues).unwrap();
            for (x, y) in back.as_slice().iter().zip(w.as_slice()) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }

        #[test]
        fn multiplicative_round_trip(
            gaps in prop::collection::vec(0.05f64..1.0, 3..6),
            raw in prop::collection::vec(1e-6f64..1.0, 2..6),
            phi_frac in 0.02f64..0.98,
        ) {
            let n = (gaps.len() - 1).min(raw.len());
            let total: f64 = gaps.iter().sum();
            let mut theta = Vec::with_capacity(n);
            let mut cum = 0.0;
            for g in &gaps[..n] {
                theta.push(TAU * cum / total);
                cum += g;
            }
            let q = wv(&normalized(raw[..n].to_vec()));
            let phi = TAU * phi_frac;
            let s = AngularSpectrum::simple(theta.clone()).unwrap();
            let out = multiplicative_roots(&s, &q, phi).unwrap();
            let back = weights_from_roots_multiplicative(&theta, &out.eigenvalues, phi).unwrap();
            for (x, y) in back.as_slice().iter().zip(q.as_slice()) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }
    }
}
