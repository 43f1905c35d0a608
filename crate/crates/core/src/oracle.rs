//! Matrix route: realize each ensemble as an explicit random matrix,
//! diagonalize it, and pull the randomized eigenvalues back out. Serves as
//! an independent cross-check of the root-finding route.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::randsrc::{
    dirichlet, haar_unitary, unit_vector_complex, unit_vector_real, Field, RngState,
};
use crate::spectra::{
    phase_residual, wrap_angle, AngularSpectrum, CaseTag, EigenSample, SpectrumSpec,
};

type CMatrix = DMatrix<Complex64>;

const MAX_EIG_SWEEPS: usize = 50_000;
/// relative scale for recognizing eigenvalues pinned at spectrum points
const DETECT_TOL: f64 = 1e-8;
const CAYLEY_RETRIES: usize = 12;
/// rotation increment between Cayley attempts; irrational multiple of 2pi
/// so repeated shifts never revisit a bad branch point
const GOLDEN_ANGLE: f64 = 2.399963229728653;

/// Eigenvalues of a Hermitian matrix, descending. The input is
/// symmetrized first so roundoff-level asymmetry cannot leak imaginary
/// parts into the spectrum.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, MAX_EIG_SWEEPS)
        .ok_or_else(|| Error::EigensolverFailure("hermitian eigensolver stalled".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Eigenvalues of a real symmetric matrix, descending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let sym = (m + m.transpose()).scale(0.5);
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, MAX_EIG_SWEEPS)
        .ok_or_else(|| Error::EigensolverFailure("symmetric eigensolver stalled".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Eigenphases of a unitary matrix in [0, 2pi), unsorted.
///
/// Rotates by e^{-ia} and takes the Cayley transform
/// H = i(I-S)(I+S)^{-1}, which is Hermitian with eigenvalues tan(b/2) for
/// eigenphases b of S. Retries with golden-angle rotations whenever an
/// eigenphase sits near the branch point at a+pi, and accepts a result
/// only when the reconstructed trace matches the input.
pub fn unitary_eigenphases(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::InvalidInput("need a square nonempty matrix".into()));
    }
    let trace: Complex64 = m.diagonal().sum();
    for k in 0..CAYLEY_RETRIES {
        let alpha = wrap_angle(k as f64 * GOLDEN_ANGLE);
        let rotated = m.scale(1.0) * Complex64::from_polar(1.0, -alpha);
        let id = CMatrix::identity(n, n);
        let Some(inv) = (&id + &rotated).try_inverse() else {
            continue;
        };
        let h = (&id - &rotated) * inv * Complex64::new(0.0, 1.0);
        let herm = (&h + &h.adjoint()).scale(0.5);
        let Some(eig) = herm.try_symmetric_eigen(f64::EPSILON, MAX_EIG_SWEEPS) else {
            continue;
        };
        let phases: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&t| wrap_angle(alpha + 2.0 * t.atan()))
            .collect();
        let rebuilt: Complex64 = phases
            .iter()
            .map(|&p| Complex64::from_polar(1.0, p))
            .sum();
        if (rebuilt - trace).norm() <= 1e-7 * n as f64 {
            return Ok(phases);
        }
    }
    Err(Error::EigensolverFailure(
        "unitary eigenphase extraction did not stabilize".into(),
    ))
}

fn diag_complex(values: &[f64]) -> CMatrix {
    CMatrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            Complex64::new(values[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Splits a descending full spectrum into the n moved roots and the
/// deterministic copies left pinned at each a_l: the sorted layout is
/// [mu_1, a_1 x (m_1-1), mu_2, a_2 x (m_2-1), ...].
fn extract_additive(full: &[f64], spec: &SpectrumSpec, b: f64) -> Result<EigenSample> {
    let tol = DETECT_TOL * spec.diameter().max(b).max(1.0);
    let mut moved = Vec::with_capacity(spec.len());
    let mut deterministic = Vec::new();
    let mut pin_dev = 0.0f64;
    let mut idx = 0;
    for (l, (&a, &m)) in spec.values().iter().zip(spec.multiplicities()).enumerate() {
        moved.push(full[idx]);
        idx += 1;
        for _ in 1..m {
            let dev = (full[idx] - a).abs();
            if dev > tol {
                return Err(Error::EigensolverFailure(format!(
                    "pinned eigenvalue {} drifted from {} (block {})",
                    full[idx], a, l
                )));
            }
            pin_dev = pin_dev.max(dev);
            idx += 1;
        }
        if m > 1 {
            deterministic.push((a, m - 1));
        }
    }
    let residual = (full.iter().sum::<f64>() - spec.trace() - b).abs();
    Ok(EigenSample {
        case: CaseTag::Additive,
        eigenvalues: moved,
        deterministic,
        constraint_residual: residual.max(pin_dev),
    })
}

/// Splits a descending full spectrum of the projected matrix: one kernel
/// eigenvalue at 0, then [a_1 x (m_1-1), nu_1, a_2 x (m_2-1), nu_2, ...].
fn extract_projection(full: &[f64], spec: &SpectrumSpec) -> Result<EigenSample> {
    let tol = DETECT_TOL * spec.diameter().max(1.0);
    let mut rest = full.to_vec();
    let kernel_idx = rest
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .expect("nonempty spectrum");
    let kernel = rest.remove(kernel_idx);
    if kernel.abs() > tol {
        return Err(Error::EigensolverFailure(format!(
            "kernel eigenvalue {kernel} is not numerically zero"
        )));
    }
    let n = spec.len();
    let mut moved = Vec::with_capacity(n.saturating_sub(1));
    let mut deterministic = vec![(0.0, 1)];
    let mut pin_dev = 0.0f64;
    let mut idx = 0;
    for (l, (&a, &m)) in spec.values().iter().zip(spec.multiplicities()).enumerate() {
        for _ in 1..m {
            let dev = (rest[idx] - a).abs();
            if dev > tol {
                return Err(Error::EigensolverFailure(format!(
                    "pinned eigenvalue {} drifted from {} (block {})",
                    rest[idx], a, l
                )));
            }
            pin_dev = pin_dev.max(dev);
            idx += 1;
        }
        if m > 1 {
            deterministic.push((a, m - 1));
        }
        if l + 1 < n {
            moved.push(rest[idx]);
            idx += 1;
        }
    }
    Ok(EigenSample {
        case: CaseTag::Projection,
        eigenvalues: moved,
        deterministic,
        constraint_residual: kernel.abs().max(pin_dev),
    })
}

/// Removes the m_j - 1 eigenphases pinned at each theta_j (by nearest
/// cyclic distance) and returns the moved phases sorted ascending.
fn extract_multiplicative(
    phases: &[f64],
    spec: &AngularSpectrum,
    phi: f64,
) -> Result<EigenSample> {
    let tol = DETECT_TOL * TAU;
    let mut rest = phases.to_vec();
    let mut deterministic = Vec::new();
    let mut pin_dev = 0.0f64;
    for (&theta, &m) in spec.angles().iter().zip(spec.multiplicities()) {
        for _ in 1..m {
            let (i, dist) = rest
                .iter()
                .enumerate()
                .map(|(i, &p)| (i, phase_residual(p, theta)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("nonempty phase list");
            if dist > tol {
                return Err(Error::EigensolverFailure(format!(
                    "pinned eigenphase near {theta} drifted by {dist}"
                )));
            }
            pin_dev = pin_dev.max(dist);
            rest.remove(i);
        }
        if m > 1 {
            deterministic.push((theta, m - 1));
        }
    }
    rest.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total: f64 = rest.iter().sum();
    for &(theta, count) in &deterministic {
        total += theta * count as f64;
    }
    let residual = phase_residual(total, spec.phase_trace() + phi);
    Ok(EigenSample {
        case: CaseTag::Multiplicative,
        eigenvalues: rest,
        deterministic,
        constraint_residual: residual.max(pin_dev),
    })
}

/// Diagonalizes A + b xx† for a random unit vector x.
pub fn sample_additive_oracle(
    spec: &SpectrumSpec,
    b: f64,
    field: Field,
    rng: &mut RngState,
) -> Result<EigenSample> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::NonPositiveParameter(b));
    }
    let values = spec.expanded();
    let n = values.len();
    let full = match field {
        Field::Complex => {
            let x = unit_vector_complex(rng, n);
            let mut m = CMatrix::from_fn(n, n, |i, j| x[i] * x[j].conj() * Complex64::new(b, 0.0));
            for i in 0..n {
                m[(i, i)] += Complex64::new(values[i], 0.0);
            }
            hermitian_eigenvalues(&m)?
        }
        Field::Real => {
            let x = unit_vector_real(rng, n);
            let mut m = DMatrix::from_fn(n, n, |i, j| b * x[i] * x[j]);
            for i in 0..n {
                m[(i, i)] += values[i];
            }
            symmetric_eigenvalues(&m)?
        }
    };
    extract_additive(&full, spec, b)
}

/// Diagonalizes the co-rank-1 compression (I - xx†) A (I - xx†).
pub fn sample_projection_oracle(
    spec: &SpectrumSpec,
    field: Field,
    rng: &mut RngState,
) -> Result<EigenSample> {
    let values = spec.expanded();
    let n = values.len();
    let full = match field {
        Field::Complex => {
            let x = unit_vector_complex(rng, n);
            let proj = CMatrix::identity(n, n) - &x * x.adjoint();
            let m = &proj * diag_complex(&values) * &proj;
            hermitian_eigenvalues(&m)?
        }
        Field::Real => {
            let x = unit_vector_real(rng, n);
            let proj = DMatrix::identity(n, n) - &x * x.transpose();
            let diag = DMatrix::from_diagonal(&DVector::from_vec(values.clone()));
            let m = &proj * diag * &proj;
            symmetric_eigenvalues(&m)?
        }
    };
    extract_projection(&full, spec)
}

/// Diagonalizes A W diag(e^{i phi}, 1, ..., 1) W† for Haar-random W.
pub fn sample_multiplicative_oracle(
    spec: &AngularSpectrum,
    phi: f64,
    rng: &mut RngState,
) -> Result<EigenSample> {
    if !(phi > 0.0 && phi < TAU) {
        return Err(Error::InvalidInput(format!(
            "phase must lie in (0, 2pi), got {phi}"
        )));
    }
    let angles = spec.expanded();
    let n = angles.len();
    let a = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, angles[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let w = haar_unitary(rng, n);
    let mut t = CMatrix::identity(n, n);
    t[(0, 0)] = Complex64::from_polar(1.0, phi);
    let m = a * &w * t * w.adjoint();
    let phases = unitary_eigenphases(&m)?;
    extract_multiplicative(&phases, spec, phi)
}

/// The quadratic form x† B x for a random unit vector, via the explicit
/// vector on the expanded diagonal.
pub fn sample_quadratic_form_oracle(
    spec: &SpectrumSpec,
    field: Field,
    rng: &mut RngState,
) -> Result<f64> {
    let values = spec.expanded();
    let n = values.len();
    Ok(match field {
        Field::Complex => {
            let x = unit_vector_complex(rng, n);
            values.iter().zip(x.iter()).map(|(&v, z)| v * z.norm_sqr()).sum()
        }
        Field::Real => {
            let x = unit_vector_real(rng, n);
            values.iter().zip(x.iter()).map(|(&v, &t)| v * t * t).sum()
        }
    })
}

/// The same quadratic form sampled through its weight representation:
/// Dirichlet weights over the distinct eigenvalues.
pub fn sample_quadratic_form_secular(
    spec: &SpectrumSpec,
    field: Field,
    rng: &mut RngState,
) -> Result<f64> {
    let shapes = field.dirichlet_shapes(spec.multiplicities());
    let w = dirichlet(rng, &shapes)?;
    Ok(spec
        .values()
        .iter()
        .zip(w.as_slice())
        .map(|(&v, &wl)| v * wl)
        .sum())
}

/// Ordered diagonal entries of U diag(b) U† for Haar-random unitary U,
/// descending, with the trace deviation as the constraint residual.
pub fn sample_diagonal_entries(spec: &SpectrumSpec, rng: &mut RngState) -> Result<EigenSample> {
    let values = spec.expanded();
    let n = values.len();
    let u = haar_unitary(rng, n);
    let mut entries: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| values[k] * u[(i, k)].norm_sqr())
                .sum::<f64>()
        })
        .collect();
    entries.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let residual = (entries.iter().sum::<f64>() - spec.trace()).abs();
    Ok(EigenSample {
        case: CaseTag::DiagonalEntries,
        eigenvalues: entries,
        deterministic: Vec::new(),
        constraint_residual: residual,
    })
}

/// Monte Carlo estimate of the HCIZ integral: the Haar average of
/// exp(sum_{j,k} x_j y_k |U_{jk}|^2). Returns (mean, standard error).
pub fn hciz_monte_carlo(
    x: &[f64],
    y: &[f64],
    draws: usize,
    rng: &mut RngState,
) -> Result<(f64, f64)> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::InvalidInput(
            "need two equal-length nonempty eigenvalue lists".into(),
        ));
    }
    if draws == 0 {
        return Err(Error::EmptySample);
    }
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..draws {
        let u = haar_unitary(rng, n);
        let mut exponent = 0.0;
        for j in 0..n {
            for k in 0..n {
                exponent += x[j] * y[k] * u[(j, k)].norm_sqr();
            }
        }
        let v = exponent.exp();
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / draws as f64;
    let var = (sumsq / draws as f64 - mean * mean).max(0.0);
    let se = (var / draws as f64).sqrt();
    Ok((mean, se))
}
