//! Spatial covariance models and channel sampling.

use std::f64::consts::PI;

use rand::Rng;

use crate::numerics::{
    eigh, majorizes, sqrt_from_eigen, CMat, CVec, EigenSystem, HermitianMatrix, C64, PSD_CLIP,
};
use crate::rng::{self, Purpose};
use crate::{Error, Result};

/// A trace-normalized PSD spatial covariance `R = E{g g^H}` with its
/// eigensystem and square root cached.
///
/// Cached eigenvalues are clipped at zero, so rank-deficient models report
/// exact zeros rather than `-1e-15` noise.
#[derive(Debug, Clone)]
pub struct SpatialCovariance {
    matrix: HermitianMatrix,
    eig: EigenSystem,
    sqrt: CMat,
}

impl SpatialCovariance {
    /// Wraps `r`, which must already satisfy `tr(R) = M` (within `1e-9 M`).
    pub fn new(r: HermitianMatrix) -> Result<Self> {
        let m = r.dim() as f64;
        let tr = r.trace();
        if (tr - m).abs() > 1e-9 * m {
            return Err(Error::Domain(format!(
                "covariance trace {tr} differs from dimension {m}"
            )));
        }
        Self::from_normalized(r)
    }

    /// Rescales `r` to trace `M` first.
    pub fn normalized(r: HermitianMatrix) -> Result<Self> {
        let m = r.dim() as f64;
        let tr = r.trace();
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::Degenerate(format!("covariance trace {tr}")));
        }
        Self::from_normalized(r.scaled(m / tr))
    }

    fn from_normalized(r: HermitianMatrix) -> Result<Self> {
        let mut eig = eigh(&r)?;
        let top = eig.values[0].abs().max(1.0);
        let smallest = *eig.values.last().expect("non-empty");
        if smallest < PSD_CLIP * top {
            return Err(Error::NotPsd(smallest));
        }
        for v in eig.values.iter_mut() {
            *v = v.max(0.0);
        }
        let sqrt = sqrt_from_eigen(&eig)?;
        Ok(SpatialCovariance {
            matrix: r,
            eig,
            sqrt,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eig
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn sqrt(&self) -> &CMat {
        &self.sqrt
    }

    pub fn trace_target(&self) -> f64 {
        self.dim() as f64
    }

    /// True when the smallest eigenvalue is above `1e-10` of the largest.
    pub fn is_full_rank(&self) -> bool {
        let v = &self.eig.values;
        v[v.len() - 1] > 1e-10 * v[0]
    }
}

/// One channel draw `g = R^{1/2} h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub g: CVec,
}

/// `[R]_{m,n} = a^{|m-n|}`.
pub fn exp_covariance(m: usize, a: f64) -> Result<SpatialCovariance> {
    if m == 0 {
        return Err(Error::Domain("M must be positive".into()));
    }
    if !(0.0..1.0).contains(&a) {
        return Err(Error::Domain(format!("correlation a={a} outside [0, 1)")));
    }
    let r = HermitianMatrix::from_real_fn(m, |i, j| a.powi((i - j) as i32));
    SpatialCovariance::new(r)
}

/// Ray-based covariance for a half-wavelength uniform linear array.
///
/// Path angles are Laplacian around `mean_angle` with standard deviation
/// `angle_spread` (radians), drawn from a stream keyed by `seed`. The result
/// is `Σ_p a(θ_p) a(θ_p)^H` normalized to trace `M`, so it has rank at most
/// `num_paths`.
pub fn ray_covariance(
    m: usize,
    num_paths: usize,
    angle_spread: f64,
    mean_angle: f64,
    seed: u64,
) -> Result<SpatialCovariance> {
    if m == 0 || num_paths == 0 {
        return Err(Error::Domain(
            "M and the path count must be positive".into(),
        ));
    }
    if !(angle_spread >= 0.0) || !angle_spread.is_finite() || !mean_angle.is_finite() {
        return Err(Error::Domain(format!(
            "angle spread {angle_spread} / mean {mean_angle} invalid"
        )));
    }
    let mut rng = rng::stream(seed, 0, 0, Purpose::Geometry);
    let scale = angle_spread / std::f64::consts::SQRT_2;
    let mut acc = CMat::zeros(m, m);
    for _ in 0..num_paths {
        let theta = mean_angle + laplace(&mut rng, scale);
        let a = steering_vector(m, theta);
        acc += &a * a.adjoint();
    }
    SpatialCovariance::normalized(HermitianMatrix::hermitian_part(&acc))
}

/// `a(θ)_n = exp(jπ n sin θ)`.
pub fn steering_vector(m: usize, theta: f64) -> CVec {
    let phase = PI * theta.sin();
    CVec::from_fn(m, |n, _| C64::from_polar(1.0, phase * n as f64))
}

fn laplace<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

pub fn sample_channel<R: Rng + ?Sized>(cov: &SpatialCovariance, rng: &mut R) -> ChannelRealization {
    let h = rng::complex_gaussian_vector(rng, cov.dim());
    ChannelRealization { g: cov.sqrt() * h }
}

/// Whether `c1` is at least as spatially correlated as `c2`, i.e. its
/// eigenvalues majorize those of `c2`.
pub fn more_correlated(c1: &SpatialCovariance, c2: &SpatialCovariance) -> Result<bool> {
    if c1.dim() != c2.dim() {
        return Err(Error::Dimension(format!(
            "covariances of size {} and {}",
            c1.dim(),
            c2.dim()
        )));
    }
    majorizes(c1.eigenvalues(), c2.eigenvalues())
}
