//! Seeded randomness: ChaCha streams, Dirichlet simplex draws, uniform unit
//! vectors and Haar-distributed unitary/orthogonal matrices.
//!
//! Every sampler takes `&mut RngState` so that a `(seed, stream)` pair fully
//! determines its output. Parallel drivers give each sample its own stream
//! id, which keeps results independent of thread count.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::spectra::WeightVector;

/// Environment variable consulted for the default seed.
pub const SEED_ENV_VAR: &str = "RANK1HORN_SEED";

/// Scalar field of the random vector `x` (or the invariance group of `W`).
/// Controls the Dirichlet exponents: a multiplicity-`m` block contributes
/// shape `m` over the complex numbers and `m/2` over the reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn dirichlet_shapes(self, multiplicities: &[usize]) -> Vec<f64> {
        let scale = match self {
            Field::Complex => 1.0,
            Field::Real => 0.5,
        };
        multiplicities.iter().map(|&m| m as f64 * scale).collect()
    }
}

impl std::str::FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::InvalidInput(format!(
                "unknown field {other:?}; expected real or complex"
            ))),
        }
    }
}

/// A seeded ChaCha12 generator pinned to one of 2^64 independent streams.
#[derive(Debug, Clone)]
pub struct RngState {
    rng: ChaCha12Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Same seed, different stream: statistically independent sequences.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngState { rng }
    }

    /// Seed from `RANK1HORN_SEED`, defaulting to 0 when unset or malformed.
    pub fn seed_from_env() -> u64 {
        std::env::var(SEED_ENV_VAR)
            .ok()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .unwrap_or(0)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        use rand::Rng;
        self.rng.gen::<f64>()
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        // variance 1 in total: each component has variance 1/2
        let re: f64 = StandardNormal.sample(&mut self.rng);
        let im: f64 = StandardNormal.sample(&mut self.rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Draws from the Dirichlet distribution with the given shape parameters,
/// via normalized Gamma variates.
pub fn dirichlet(rng: &mut RngState, shapes: &[f64]) -> Result<WeightVector> {
    if shapes.is_empty() {
        return Err(Error::EmptySample);
    }
    if shapes.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::NonPositiveParameter(
            shapes.iter().copied().find(|&s| !(s > 0.0)).unwrap_or(f64::NAN),
        ));
    }
    if shapes.len() == 1 {
        return WeightVector::new(vec![1.0]);
    }
    let gammas: Vec<Gamma<f64>> = shapes
        .iter()
        .map(|&s| Gamma::new(s, 1.0).map_err(|e| Error::InvalidInput(e.to_string())))
        .collect::<Result<_>>()?;
    // For shapes well below 1 every variate can underflow to zero; redraw.
    for _ in 0..64 {
        let draws: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return WeightVector::new(draws.iter().map(|d| d / total).collect());
        }
    }
    Err(Error::ConvergenceFailure(
        "dirichlet draw kept underflowing to zero".into(),
    ))
}

/// Uniform point on the real unit sphere in `R^n`.
pub fn unit_vector_real(rng: &mut RngState, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.standard_normal());
        let norm = v.norm();
        if norm > 1e-150 {
            return v / norm;
        }
    }
}

/// Uniform point on the complex unit sphere in `C^n`.
pub fn unit_vector_complex(rng: &mut RngState, n: usize) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.complex_normal());
        let norm = v.norm();
        if norm > 1e-150 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

/// Squared component mass of `x` in each multiplicity block. For a uniform
/// unit vector this is exactly a Dirichlet draw with the field's shapes.
pub fn block_weights_real(x: &DVector<f64>, multiplicities: &[usize]) -> Result<WeightVector> {
    block_weights_impl(multiplicities, x.len(), |i| x[i] * x[i])
}

pub fn block_weights_complex(
    x: &DVector<Complex64>,
    multiplicities: &[usize],
) -> Result<WeightVector> {
    block_weights_impl(multiplicities, x.len(), |i| x[i].norm_sqr())
}

fn block_weights_impl(
    multiplicities: &[usize],
    len: usize,
    sq: impl Fn(usize) -> f64,
) -> Result<WeightVector> {
    let dim: usize = multiplicities.iter().sum();
    if dim != len {
        return Err(Error::InvalidInput(format!(
            "vector length {len} does not match total multiplicity {dim}"
        )));
    }
    let mut weights = Vec::with_capacity(multiplicities.len());
    let mut i = 0;
    let mut total = 0.0;
    for &m in multiplicities {
        let w: f64 = (i..i + m).map(&sq).sum();
        weights.push(w);
        total += w;
        i += m;
    }
    // renormalize away the rounding drift so downstream sum checks hold
    for w in &mut weights {
        *w /= total;
    }
    WeightVector::new(weights)
}

/// Haar-distributed unitary matrix: QR of a Ginibre matrix with the R
/// diagonal's phases folded into Q.
pub fn haar_unitary(rng: &mut RngState, n: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.complex_normal());
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed (real) orthogonal matrix.
pub fn haar_orthogonal(rng: &mut RngState, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.standard_normal());
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let s = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            q[(i, j)] *= s;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let mut a = RngState::with_stream(7, 3);
        let mut b = RngState::with_stream(7, 3);
        let mut c = RngState::with_stream(7, 4);
        let xa: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn dirichlet_lands_on_simplex() {
        let mut rng = RngState::new(11);
        for shapes in [vec![1.0, 1.0], vec![2.0, 0.5, 1.5], vec![0.5; 6]] {
            let w = dirichlet(&mut rng, &shapes).unwrap();
            assert_eq!(w.len(), shapes.len());
            let sum: f64 = w.as_slice().iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            assert!(w.as_slice().iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn dirichlet_rejects_bad_shapes() {
        let mut rng = RngState::new(0);
        assert!(dirichlet(&mut rng, &[]).is_err());
        assert!(dirichlet(&mut rng, &[1.0, 0.0]).is_err());
        assert!(dirichlet(&mut rng, &[1.0, -2.0]).is_err());
    }

    #[test]
    fn field_shapes_halve_over_reals() {
        assert_eq!(Field::Complex.dirichlet_shapes(&[2, 1]), vec![2.0, 1.0]);
        assert_eq!(Field::Real.dirichlet_shapes(&[2, 1]), vec![1.0, 0.5]);
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let mut rng = RngState::new(5);
        let v = unit_vector_real(&mut rng, 7);
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
        let w = unit_vector_complex(&mut rng, 7);
        assert_abs_diff_eq!(w.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn block_weights_sum_blocks() {
        let mut rng = RngState::new(9);
        let v = unit_vector_real(&mut rng, 6);
        let w = block_weights_real(&v, &[2, 3, 1]).unwrap();
        assert_eq!(w.len(), 3);
        assert_abs_diff_eq!(
            w.as_slice()[0],
            v[0] * v[0] + v[1] * v[1],
            epsilon = 1e-12
        );
        assert!(block_weights_real(&v, &[2, 2]).is_err());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = RngState::new(42);
        let u = haar_unitary(&mut rng, 5);
        let prod = &u * u.adjoint();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod[(i, j)].re, want, epsilon = 1e-12);
                assert_abs_diff_eq!(prod[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn haar_orthogonal_is_orthogonal() {
        let mut rng = RngState::new(43);
        let q = haar_orthogonal(&mut rng, 5);
        let prod = &q * q.transpose();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod[(i, j)], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn haar_unitary_first_entry_mass_is_uniformish() {
        // |U_11|^2 of a Haar unitary is Beta(1, n-1); its mean is 1/n.
        let mut rng = RngState::new(100);
        let n = 4;
        let trials = 2000;
        let mean: f64 = (0..trials)
            .map(|_| haar_unitary(&mut rng, n)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 0.25).abs() < 0.02, "mean {mean}");
    }
}
