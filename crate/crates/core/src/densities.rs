//! Closed-form eigenvalue densities for every sampled ensemble, the HCIZ
//! integral, the quadratic-form density, and the three-eigenvalue diagonal
//! entries density.
//!
//! Constrained densities are expressed over the n−1 free coordinates with
//! the last coordinate eliminated through the trace (or phase-sum)
//! identity. Evaluators return exactly 0 outside the support and a +∞
//! sentinel on boundary points where an inverse-square-root factor
//! diverges, so quadrature can use open rules.

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::randsrc::Field;
use crate::spectra::{AngularSpectrum, CaseTag, SpectrumSpec};

/// `Σ_{j<k} ln|u_j - u_k|`, the log-magnitude of the Vandermonde product.
fn log_vandermonde_abs(u: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..u.len() {
        for k in (j + 1)..u.len() {
            acc += (u[j] - u[k]).abs().ln();
        }
    }
    acc
}

fn check_finite(point: &[f64]) -> Result<()> {
    if point.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("evaluation point must be finite".into()));
    }
    Ok(())
}

fn strictly_descending(u: &[f64]) -> bool {
    u.windows(2).all(|w| w[0] > w[1])
}

/// Interlacing `a_1 > λ_1 > a_2 > ⋯ > λ_{n-1} > a_n` (weak test returns
/// boundary hits separately).
fn interlaces_projection(a: &[f64], lambda: &[f64]) -> bool {
    lambda
        .iter()
        .enumerate()
        .all(|(j, &l)| a[j] > l && l > a[j + 1])
}

/// Interlacing `μ_1 > a_1 > μ_2 > ⋯ > μ_n > a_n`.
fn interlaces_additive(a: &[f64], mu: &[f64]) -> bool {
    (0..a.len()).all(|j| mu[j] > a[j] && (j + 1 >= a.len() || a[j] > mu[j + 1]))
}

/// Density of the nonzero eigenvalues of the co-rank-1 projection of a
/// simple spectrum: `Γ(n) Δ(λ)/Δ(a)` on the interlacing region.
pub fn pdf_projection(a: &[f64], lambda: &[f64]) -> Result<f64> {
    let n = a.len();
    if n == 0 || lambda.len() + 1 != n || !strictly_descending(a) {
        return Err(Error::InvalidInput(
            "need a strictly descending spectrum and n-1 eigenvalues".into(),
        ));
    }
    check_finite(lambda)?;
    if n == 1 {
        return Ok(1.0);
    }
    if !interlaces_projection(a, lambda) {
        return Ok(0.0);
    }
    let log = ln_gamma(n as f64) + log_vandermonde_abs(lambda) - log_vandermonde_abs(a);
    Ok(log.exp())
}

/// Density of the free eigenvalues of `A + b xx†` for a simple spectrum,
/// over `dλ_1…dλ_{n-1}` with `λ_n` eliminated by the trace identity.
pub fn pdf_additive(a: &[f64], b: f64, lambda_free: &[f64]) -> Result<f64> {
    let n = a.len();
    if n == 0 || lambda_free.len() + 1 != n || !strictly_descending(a) {
        return Err(Error::InvalidInput(
            "need a strictly descending spectrum and n-1 free eigenvalues".into(),
        ));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::NonPositiveParameter(b));
    }
    check_finite(lambda_free)?;
    let mut mu = lambda_free.to_vec();
    let total: f64 = a.iter().sum::<f64>() + b;
    mu.push(total - lambda_free.iter().sum::<f64>());
    if !interlaces_additive(a, &mu) {
        return Ok(0.0);
    }
    let log = ln_gamma(n as f64) - (n as f64 - 1.0) * b.ln() + log_vandermonde_abs(&mu)
        - log_vandermonde_abs(a);
    Ok(log.exp())
}

/// Shared core of the degenerate and real-field variants: Dirichlet
/// exponents `s_l` per distinct eigenvalue (`m_l` over the complex field,
/// `m_l/2` over the reals). `shift` selects additive (full Vandermonde,
/// `b^{-(Σs-1)}`) versus projection form.
fn pdf_weighted(a: &[f64], s: &[f64], shift: Option<f64>, lambda: &[f64]) -> Result<f64> {
    let n = a.len();
    let expected = if shift.is_some() { n } else { n - 1 };
    if n == 0 || lambda.len() != expected || !strictly_descending(a) {
        return Err(Error::InvalidInput(
            "spectrum/eigenvalue dimensions mismatch".into(),
        ));
    }
    if s.len() != n || s.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NonPositiveParameter(
            s.iter().copied().find(|&x| !(x > 0.0)).unwrap_or(f64::NAN),
        ));
    }
    // boundary hits: a cross factor |λ_j - a_p|^{s_p-1} at zero distance
    for &l in lambda {
        for (p, &ap) in a.iter().enumerate() {
            if l == ap {
                return Ok(if s[p] < 1.0 { f64::INFINITY } else { 0.0 });
            }
        }
    }
    let inside = match shift {
        Some(_) => interlaces_additive(a, lambda),
        None => interlaces_projection(a, lambda),
    };
    if !inside {
        return Ok(0.0);
    }
    let total_s: f64 = s.iter().sum();
    let mut log = ln_gamma(total_s) - s.iter().map(|&x| ln_gamma(x)).sum::<f64>();
    if let Some(b) = shift {
        log -= (total_s - 1.0) * b.ln();
    }
    log += log_vandermonde_abs(lambda);
    for j in 0..n {
        for k in (j + 1)..n {
            log -= (s[j] + s[k] - 1.0) * (a[j] - a[k]).abs().ln();
        }
    }
    for &l in lambda {
        for (p, &ap) in a.iter().enumerate() {
            log += (s[p] - 1.0) * (l - ap).abs().ln();
        }
    }
    Ok(log.exp())
}

fn effective_shapes(spec: &SpectrumSpec, field: Field) -> Vec<f64> {
    field.dirichlet_shapes(spec.multiplicities())
}

/// Projection density for a spectrum with multiplicities (complex field).
pub fn pdf_projection_degenerate(spec: &SpectrumSpec, lambda: &[f64]) -> Result<f64> {
    pdf_weighted(
        spec.values(),
        &effective_shapes(spec, Field::Complex),
        None,
        lambda,
    )
}

/// Additive density for a spectrum with multiplicities (complex field),
/// over the n−1 free coordinates.
pub fn pdf_additive_degenerate(spec: &SpectrumSpec, b: f64, lambda_free: &[f64]) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::NonPositiveParameter(b));
    }
    let a = spec.values();
    if lambda_free.len() + 1 != a.len() {
        return Err(Error::InvalidInput(
            "need n-1 free eigenvalues for the additive density".into(),
        ));
    }
    check_finite(lambda_free)?;
    let mut mu = lambda_free.to_vec();
    mu.push(spec.trace() + b - lambda_free.iter().sum::<f64>());
    pdf_weighted(a, &effective_shapes(spec, Field::Complex), Some(b), &mu)
}

/// Real-symmetric projection density: the degenerate formula at exponents
/// `m_l/2`, which for a simple spectrum carries inverse-square-root
/// singularities at every support boundary.
pub fn pdf_projection_real(a: &[f64], lambda: &[f64]) -> Result<f64> {
    let s = vec![0.5; a.len()];
    pdf_weighted(a, &s, None, lambda)
}

/// Real-symmetric additive density over the n−1 free coordinates.
pub fn pdf_additive_real(a: &[f64], b: f64, lambda_free: &[f64]) -> Result<f64> {
    let n = a.len();
    if n == 0 || lambda_free.len() + 1 != n {
        return Err(Error::InvalidInput(
            "need n-1 free eigenvalues for the additive density".into(),
        ));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::NonPositiveParameter(b));
    }
    check_finite(lambda_free)?;
    let mut mu = lambda_free.to_vec();
    mu.push(a.iter().sum::<f64>() + b - lambda_free.iter().sum::<f64>());
    pdf_weighted(a, &vec![0.5; n], Some(b), &mu)
}

/// Spacing density of `s = λ_1 - λ_2` for the two-eigenvalue real additive
/// case: `(2/π) s/√((s²-s_min²)(s_max²-s²))` with `s_max = a_1-a_2+b` and
/// the lower support endpoint at `|a_1-a_2-b|` (the formula depends on
/// `s_min` only through its square).
pub fn pdf_spacing_n2(a1: f64, a2: f64, b: f64, s: f64) -> Result<f64> {
    if !(a1 > a2) || !a1.is_finite() || !a2.is_finite() {
        return Err(Error::InvalidInput("need a1 > a2".into()));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::NonPositiveParameter(b));
    }
    if !s.is_finite() {
        return Err(Error::InvalidInput("spacing must be finite".into()));
    }
    let s_max = a1 - a2 + b;
    let s_lo = (a1 - a2 - b).abs();
    if s == s_max || (s == s_lo && s_lo > 0.0) {
        return Ok(f64::INFINITY);
    }
    if s <= s_lo || s >= s_max {
        return Ok(0.0);
    }
    let val = (2.0 / PI) * s / ((s * s - s_lo * s_lo) * (s_max * s_max - s * s)).sqrt();
    Ok(val)
}

/// Chordal distance `|e^{iα} - e^{iβ}| = 2|sin((α-β)/2)|`.
fn chord(alpha: f64, beta: f64) -> f64 {
    2.0 * (0.5 * (alpha - beta)).sin().abs()
}

/// Density of the free eigenphases of `A·W·diag(e^{iφ},1,…,1)·W†` over
/// `dψ_1…dψ_{n-1}`, each `ψ_i` in its arc `(θ_i, θ_{i+1})`; `ψ_n` is
/// reconstructed into the wrap-around arc from the phase-sum identity and
/// the density is 0 when it lands outside.
pub fn pdf_multiplicative(spec: &AngularSpectrum, phi: f64, psi_free: &[f64]) -> Result<f64> {
    let n = spec.len();
    let theta = spec.angles();
    if psi_free.len() + 1 != n {
        return Err(Error::InvalidInput(
            "need n-1 free eigenphases for the multiplicative density".into(),
        ));
    }
    if !(phi > 0.0 && phi < TAU) {
        return Err(Error::InvalidInput(format!(
            "phase must lie in (0, 2pi), got {phi}"
        )));
    }
    check_finite(psi_free)?;
    for (i, &p) in psi_free.iter().enumerate() {
        if !(p > theta[i]) || !(p < theta[i + 1]) {
            return Ok(0.0);
        }
    }
    // phase-sum identity fixes the wrap-arc eigenphase mod 2pi
    let target = spec.phase_trace() + phi - psi_free.iter().sum::<f64>();
    let psi_n = theta[n - 1] + (target - theta[n - 1]).rem_euclid(TAU);
    if n > 1 && psi_n >= theta[0] + TAU {
        return Ok(0.0);
    }
    if psi_n == theta[n - 1] {
        return Ok(0.0);
    }
    let mut psi = psi_free.to_vec();
    psi.push(psi_n);
    let m = spec.multiplicities();
    let big_n: usize = m.iter().sum();
    let mut log = ln_gamma(big_n as f64);
    for &ml in m {
        log -= ln_gamma(ml as f64);
    }
    log -= (big_n as f64 - 1.0) * (2.0 * (0.5 * phi).sin().abs()).ln();
    for j in 0..n {
        for k in (j + 1)..n {
            log += chord(psi[k], psi[j]).ln();
            log -= (m[j] + m[k] - 1) as f64 * chord(theta[k], theta[j]).ln();
        }
    }
    for (j, &mj) in m.iter().enumerate() {
        if mj == 1 {
            continue;
        }
        for &p in &psi {
            log += (mj as f64 - 1.0) * chord(theta[j], p).ln();
        }
    }
    Ok(log.exp())
}

/// The HCIZ unitary group integral `∫ exp(Tr U†XUY) dU` for diagonalized
/// arguments: `ΠΓ(j)·det[e^{x_j y_k}]/(Δ(x)Δ(y))`.
pub fn hciz(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::InvalidInput(
            "need two equal-length nonempty eigenvalue lists".into(),
        ));
    }
    check_finite(x)?;
    check_finite(y)?;
    for u in [x, y] {
        let mut gap = f64::INFINITY;
        for j in 0..n {
            for k in (j + 1)..n {
                gap = gap.min((u[j] - u[k]).abs());
            }
        }
        if gap < 1e-8 {
            return Err(Error::NearConfluent(gap));
        }
    }
    if n == 1 {
        return Ok((x[0] * y[0]).exp());
    }
    let det = DMatrix::from_fn(n, n, |j, k| (x[j] * y[k]).exp()).determinant();
    let vand = |u: &[f64]| -> f64 {
        let mut p = 1.0;
        for j in 0..n {
            for k in (j + 1)..n {
                p *= u[k] - u[j];
            }
        }
        p
    };
    let mut prefactor = 1.0;
    for j in 1..=n {
        prefactor *= statrs::function::gamma::gamma(j as f64);
    }
    Ok(prefactor * det / (vand(x) * vand(y)))
}

/// Density of the quadratic form `z B z†` for `z` uniform on the complex
/// unit sphere: a piecewise polynomial of degree n−2 on `(min b, max b)`.
pub fn pdf_quadratic_form(b_values: &[f64], x: f64) -> Result<f64> {
    let n = b_values.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "the quadratic form density needs at least two eigenvalues".into(),
        ));
    }
    if !x.is_finite() {
        return Err(Error::InvalidInput("evaluation point must be finite".into()));
    }
    check_finite(b_values)?;
    let mut b = b_values.to_vec();
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    if b.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicateEigenvalue(b[0], b[0]));
    }
    if x <= b[0] || x >= b[n - 1] {
        return Ok(0.0);
    }
    let mat = DMatrix::from_fn(n, n, |r, c| {
        if r + 1 < n {
            b[c].powi(r as i32)
        } else {
            let d = b[c] - x;
            d.powi(n as i32 - 2) * d.signum()
        }
    });
    let mut vand = 1.0;
    for j in 0..n {
        for k in (j + 1)..n {
            vand *= b[k] - b[j];
        }
    }
    Ok(((n as f64 - 1.0) / 2.0) * mat.determinant() / vand)
}

/// Density of the two free ordered diagonal entries `(x_1, x_2)` of
/// `U diag(b) U†` for a 3×3 Haar unitary `U`, with `x_3` eliminated by the
/// trace identity. Piecewise linear over four regions split by how many
/// entries exceed the middle eigenvalue; the weights agree on every shared
/// boundary.
pub fn pdf_heckman_n3(b_values: &[f64], x1: f64, x2: f64) -> Result<f64> {
    if b_values.len() != 3 {
        return Err(Error::InvalidInput(
            "the diagonal-entries density is implemented for three eigenvalues".into(),
        ));
    }
    check_finite(b_values)?;
    if !x1.is_finite() || !x2.is_finite() {
        return Err(Error::InvalidInput("evaluation point must be finite".into()));
    }
    let mut b = b_values.to_vec();
    b.sort_by(|p, q| q.partial_cmp(p).unwrap());
    let (b1, b2, b3) = (b[0], b[1], b[2]);
    if b1 == b2 || b2 == b3 {
        return Err(Error::DuplicateEigenvalue(b1, b3));
    }
    let x3 = b1 + b2 + b3 - x1 - x2;
    if !(x1 >= x2 && x2 >= x3) || x1 >= b1 || x3 <= b3 {
        return Ok(0.0);
    }
    let weight = if x3 > b2 {
        b2 - b3
    } else if x2 > b2 {
        x3 - b3
    } else if x1 > b2 {
        b1 - x1
    } else {
        b1 - b2
    };
    let delta = (b1 - b2) * (b1 - b3) * (b2 - b3);
    Ok(12.0 * weight / delta)
}

/// Dirichlet density over the free coordinates `w_1…w_{n-1}`:
/// `Γ(Σs)/ΠΓ(s_j) · Π w_j^{s_j-1}` for `w` on the simplex.
pub fn dirichlet_density(weights: &[f64], shapes: &[f64]) -> Result<f64> {
    let n = shapes.len();
    if n == 0 || weights.len() != n {
        return Err(Error::InvalidInput(
            "weights and shapes must have matching nonzero lengths".into(),
        ));
    }
    if shapes.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::NonPositiveParameter(
            shapes.iter().copied().find(|&s| !(s > 0.0)).unwrap_or(f64::NAN),
        ));
    }
    check_finite(weights)?;
    if weights.iter().any(|&w| w < 0.0)
        || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Ok(0.0);
    }
    let mut log = ln_gamma(shapes.iter().sum());
    for (&w, &s) in weights.iter().zip(shapes) {
        log -= ln_gamma(s);
        if s != 1.0 {
            if w == 0.0 {
                return Ok(if s < 1.0 { f64::INFINITY } else { 0.0 });
            }
            log += (s - 1.0) * w.ln();
        }
    }
    Ok(log.exp())
}

/// One density evaluation request, dispatched by ensemble.
#[derive(Debug, Clone)]
pub enum DensityQuery {
    Additive {
        spectrum: SpectrumSpec,
        field: Field,
        shift: f64,
        point: Vec<f64>,
    },
    Projection {
        spectrum: SpectrumSpec,
        field: Field,
        point: Vec<f64>,
    },
    Multiplicative {
        spectrum: AngularSpectrum,
        phase: f64,
        point: Vec<f64>,
    },
    QuadraticForm {
        spectrum: SpectrumSpec,
        point: f64,
    },
    DiagonalEntries {
        spectrum: SpectrumSpec,
        point: (f64, f64),
    },
}

impl DensityQuery {
    pub fn case(&self) -> CaseTag {
        match self {
            DensityQuery::Additive { .. } => CaseTag::Additive,
            DensityQuery::Projection { .. } => CaseTag::Projection,
            DensityQuery::Multiplicative { .. } => CaseTag::Multiplicative,
            DensityQuery::QuadraticForm { .. } => CaseTag::QuadraticForm,
            DensityQuery::DiagonalEntries { .. } => CaseTag::DiagonalEntries,
        }
    }

    pub fn evaluate(&self) -> Result<f64> {
        match self {
            DensityQuery::Additive {
                spectrum,
                field,
                shift,
                point,
            } => {
                if point.len() + 1 != spectrum.len() {
                    return Err(Error::InvalidInput(format!(
                        "additive density expects {} free coordinates, got {}",
                        spectrum.len() - 1,
                        point.len()
                    )));
                }
                let mut mu = point.clone();
                mu.push(spectrum.trace() + shift - point.iter().sum::<f64>());
                pdf_weighted(
                    spectrum.values(),
                    &effective_shapes(spectrum, *field),
                    Some(*shift),
                    &mu,
                )
            }
            DensityQuery::Projection {
                spectrum,
                field,
                point,
            } => pdf_weighted(
                spectrum.values(),
                &effective_shapes(spectrum, *field),
                None,
                point,
            ),
            DensityQuery::Multiplicative {
                spectrum,
                phase,
                point,
            } => pdf_multiplicative(spectrum, *phase, point),
            DensityQuery::QuadraticForm { spectrum, point } => {
                if !spectrum.is_simple() {
                    return Err(Error::InvalidInput(
                        "quadratic form density needs a simple spectrum".into(),
                    ));
                }
                pdf_quadratic_form(spectrum.values(), *point)
            }
            DensityQuery::DiagonalEntries { spectrum, point } => {
                if !spectrum.is_simple() {
                    return Err(Error::InvalidInput(
                        "diagonal-entries density needs a simple spectrum".into(),
                    ));
                }
                pdf_heckman_n3(spectrum.values(), point.0, point.1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randsrc::RngState;
    use crate::secular::{jacobian_additive, sample_additive_secular, weights_from_roots_additive};
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_two_pole_is_uniform() {
        assert_abs_diff_eq!(pdf_projection(&[1.0, 0.0], &[0.3]).unwrap(), 1.0);
        assert_eq!(pdf_projection(&[1.0, 0.0], &[1.3]).unwrap(), 0.0);
        assert_eq!(pdf_projection(&[1.0, 0.0], &[-0.1]).unwrap(), 0.0);
    }

    #[test]
    fn additive_two_pole_linear_ramp() {
        let v = pdf_additive(&[1.0, 0.0], 1.0, &[1.5]).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        assert_eq!(pdf_additive(&[1.0, 0.0], 1.0, &[2.5]).unwrap(), 0.0);
        // ramp shape: (2λ - (a1+a2+b))/(b(a1-a2))
        let v = pdf_additive(&[1.0, 0.0], 1.0, &[1.8]).unwrap();
        assert_abs_diff_eq!(v, 2.0 * 1.8 - 2.0, epsilon = 1e-12);
    }

    #[test]
    fn additive_single_pole_is_unit() {
        assert_abs_diff_eq!(pdf_additive(&[5.0], 2.0, &[]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_reduces_to_simple_at_unit_multiplicities() {
        let a = [2.0, 0.7, -1.0];
        let spec = SpectrumSpec::simple(a.to_vec()).unwrap();
        for lam in [[1.5, 0.0], [1.9, -0.9], [0.9, 0.1]] {
            let simple = pdf_projection(&a, &lam).unwrap();
            let degen = pdf_projection_degenerate(&spec, &lam).unwrap();
            assert_abs_diff_eq!(simple, degen, epsilon = 1e-12 * simple.max(1.0));
        }
        let b = 0.8;
        for lam in [[2.3, 1.0], [2.7, 0.9], [2.05, 0.75]] {
            let simple = pdf_additive(&a, b, &lam).unwrap();
            let degen = pdf_additive_degenerate(&spec, b, &lam).unwrap();
            assert_abs_diff_eq!(simple, degen, epsilon = 1e-12 * simple.max(1.0));
        }
    }

    #[test]
    fn real_projection_two_pole_is_arcsine() {
        // Γ(1)π^{-1}(λ(1-λ))^{-1/2}
        let v = pdf_projection_real(&[1.0, 0.0], &[0.5]).unwrap();
        assert_abs_diff_eq!(v, 2.0 / PI, epsilon = 1e-12);
        assert_eq!(pdf_projection_real(&[1.0, 0.0], &[1.5]).unwrap(), 0.0);
        assert_eq!(
            pdf_projection_real(&[1.0, 0.0], &[1.0]).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn spacing_density_matches_real_additive() {
        let (a1, a2, b) = (1.0, 0.0, 1.0);
        // s = 2λ_1 - (a1+a2+b); the free-coordinate density carries the
        // factor |ds/dλ_1| = 2
        for lam1 in [1.2, 1.5, 1.7, 1.9] {
            let s = 2.0 * lam1 - (a1 + a2 + b);
            let lhs = pdf_additive_real(&[a1, a2], b, &[lam1]).unwrap();
            let rhs = 2.0 * pdf_spacing_n2(a1, a2, b, s).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * rhs.max(1.0));
        }
    }

    #[test]
    fn spacing_support_endpoints() {
        assert_eq!(pdf_spacing_n2(1.0, 0.0, 1.0, 2.0).unwrap(), f64::INFINITY);
        assert_eq!(pdf_spacing_n2(1.0, 0.0, 1.0, 2.5).unwrap(), 0.0);
        assert_eq!(pdf_spacing_n2(1.0, 0.0, 0.25, 0.5).unwrap(), 0.0);
        assert_eq!(
            pdf_spacing_n2(1.0, 0.0, 0.25, 0.75).unwrap(),
            f64::INFINITY
        );
        let v = pdf_spacing_n2(1.0, 0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(v, 2.0 / (PI * 3.0_f64.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn multiplicative_two_phase_value() {
        let spec = AngularSpectrum::simple(vec![0.0, PI]).unwrap();
        let v = pdf_multiplicative(&spec, PI, &[PI / 2.0]).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
        assert_eq!(pdf_multiplicative(&spec, PI, &[3.5]).unwrap(), 0.0);
    }

    #[test]
    fn hciz_small_cases() {
        assert_abs_diff_eq!(hciz(&[2.0], &[0.5]).unwrap(), 1.0_f64.exp(), epsilon = 1e-12);
        let v = hciz(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(v, 1.0_f64.exp() - 1.0, epsilon = 1e-12);
        let x = [1.3, 0.4, -0.8];
        let y = [0.9, 0.2, -1.5];
        assert_abs_diff_eq!(
            hciz(&x, &y).unwrap(),
            hciz(&y, &x).unwrap(),
            epsilon = 1e-12
        );
        assert!(matches!(
            hciz(&[1.0, 1.0 + 1e-9], &[1.0, 0.0]),
            Err(Error::NearConfluent(_))
        ));
    }

    #[test]
    fn quadratic_form_uniform_and_tent() {
        assert_abs_diff_eq!(
            pdf_quadratic_form(&[1.0, 0.0], 0.4).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(pdf_quadratic_form(&[1.0, 0.0], 1.4).unwrap(), 0.0);
        // n=3 with b=(2,1,0): symmetric tent, peak 1 at the midpoint
        assert_abs_diff_eq!(
            pdf_quadratic_form(&[2.0, 1.0, 0.0], 1.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pdf_quadratic_form(&[2.0, 1.0, 0.0], 0.5).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pdf_quadratic_form(&[2.0, 1.0, 0.0], 1.5).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn heckman_example_and_support() {
        let b = [2.0, 1.0, 0.0];
        assert_abs_diff_eq!(
            pdf_heckman_n3(&b, 1.5, 1.2).unwrap(),
            1.8,
            epsilon = 1e-12
        );
        // unordered or out-of-range points sit outside the support
        assert_eq!(pdf_heckman_n3(&b, 1.2, 1.5).unwrap(), 0.0);
        assert_eq!(pdf_heckman_n3(&b, 2.5, 0.2).unwrap(), 0.0);
        assert_eq!(pdf_heckman_n3(&b, 0.9, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn heckman_weight_is_continuous_across_region_boundaries() {
        let eps = 1e-9;
        // crossing x3 = b2 (vary x2 so x3 passes through 0.5)
        let b = [3.0, 0.5, 0.0];
        let lo = pdf_heckman_n3(&b, 1.8, 1.2 - eps).unwrap();
        let hi = pdf_heckman_n3(&b, 1.8, 1.2 + eps).unwrap();
        assert!(lo > 0.0 && (lo - hi).abs() < 1e-6, "jump {lo} vs {hi}");
        // crossing x2 = b2 at x1 = 2.6 (x3 stays near 0.4)
        let lo = pdf_heckman_n3(&b, 2.6, 0.5 - eps).unwrap();
        let hi = pdf_heckman_n3(&b, 2.6, 0.5 + eps).unwrap();
        assert!(lo > 0.0 && (lo - hi).abs() < 1e-6, "jump {lo} vs {hi}");
        // crossing x1 = b2 (needs b2 above the eigenvalue mean)
        let b = [2.0, 1.5, 0.0];
        let lo = pdf_heckman_n3(&b, 1.5 - eps, 1.1).unwrap();
        let hi = pdf_heckman_n3(&b, 1.5 + eps, 1.1).unwrap();
        assert!(lo > 0.0 && (lo - hi).abs() < 1e-6, "jump {lo} vs {hi}");
    }

    #[test]
    fn dirichlet_density_values() {
        let v = dirichlet_density(&[0.3, 0.7], &[2.0, 1.0]).unwrap();
        assert_abs_diff_eq!(v, 0.6, epsilon = 1e-12);
        let v = dirichlet_density(&[0.2, 0.8], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        assert_eq!(dirichlet_density(&[0.2, 0.9], &[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn additive_density_equals_dirichlet_change_of_variables() {
        let a = [2.0, 0.5, -0.5];
        let b = 0.9;
        let spec = SpectrumSpec::simple(a.to_vec()).unwrap();
        let mut rng = RngState::new(3);
        for _ in 0..20 {
            let out = sample_additive_secular(&spec, b, Field::Complex, &mut rng).unwrap();
            let lam = &out.eigenvalues;
            let w = weights_from_roots_additive(&a, lam, b).unwrap();
            let jac = jacobian_additive(&a, lam, b).unwrap();
            let free_w_product: f64 = w.as_slice()[..a.len() - 1].iter().product();
            let via_dirichlet =
                dirichlet_density(w.as_slice(), &[1.0; 3]).unwrap() * free_w_product * jac;
            let direct = pdf_additive(&a, b, &lam[..a.len() - 1]).unwrap();
            assert!(
                (via_dirichlet - direct).abs() <= 1e-8 * direct,
                "{via_dirichlet} vs {direct}"
            );
        }
    }

    #[test]
    fn query_dispatch_matches_direct_calls() {
        let spec = SpectrumSpec::simple(vec![1.0, 0.0]).unwrap();
        let q = DensityQuery::Additive {
            spectrum: spec.clone(),
            field: Field::Complex,
            shift: 1.0,
            point: vec![1.5],
        };
        assert_abs_diff_eq!(q.evaluate().unwrap(), 1.0, epsilon = 1e-12);
        let q = DensityQuery::Projection {
            spectrum: spec.clone(),
            field: Field::Real,
            point: vec![0.5],
        };
        assert_abs_diff_eq!(q.evaluate().unwrap(), 2.0 / PI, epsilon = 1e-12);
        let q = DensityQuery::QuadraticForm {
            spectrum: spec,
            point: 0.4,
        };
        assert_abs_diff_eq!(q.evaluate().unwrap(), 1.0, epsilon = 1e-12);
    }
}
