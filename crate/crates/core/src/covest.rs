//! Spatial covariance estimation from hybrid observations.
//!
//! Over `N_c` coherence intervals the receiver trains with `T = M / L`
//! phase-only combiners whose stack `F_c` is square and invertible (rows of
//! the DFT by default). The sample covariance of `y_c` then determines `R`:
//! `R = (1/ρ) F_c^{-1} (R_yc − F_d F_d^H) F_c^{-H}`. Finite-sample estimates
//! can be indefinite and are repaired by [`psd_project`].

use crate::channel::{sample_channel, SpatialCovariance};
use crate::exec::{map_indexed, Execution};
use crate::numerics::{eigh, CMat, CVec, HermitianMatrix, C64};
use crate::rng::{complex_gaussian_vector, stream, Purpose};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainingMatrix {
    #[default]
    Dft,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovEstConfig {
    pub m: usize,
    pub l: usize,
    pub rho: f64,
    pub n_c: usize,
    pub training_matrix: TrainingMatrix,
}

impl CovEstConfig {
    pub fn new(m: usize, l: usize, rho: f64, n_c: usize) -> Result<Self> {
        if l == 0 || l > m {
            return Err(Error::Dimension(format!(
                "need 1 <= L <= M, got L={l}, M={m}"
            )));
        }
        if !m.is_multiple_of(l) {
            return Err(Error::Domain(format!(
                "covariance training needs L to divide M, got M={m}, L={l}"
            )));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!(
                "pilot power must be positive, got {rho}"
            )));
        }
        if n_c == 0 {
            return Err(Error::Domain("need at least one coherence interval".into()));
        }
        Ok(CovEstConfig {
            m,
            l,
            rho,
            n_c,
            training_matrix: TrainingMatrix::Dft,
        })
    }

    /// Trainings per interval, `M / L`.
    pub fn t(&self) -> usize {
        self.m / self.l
    }

    /// The `T` combiners, `L` consecutive rows of the training matrix each.
    pub fn training_blocks(&self) -> Vec<CMat> {
        let f = match self.training_matrix {
            TrainingMatrix::Dft => dft_training_matrix(self.m),
        };
        (0..self.t())
            .map(|t| f.rows(t * self.l, self.l).into_owned())
            .collect()
    }
}

/// Unnormalized DFT, `[F]_{m,n} = exp(−j 2π m n / M)`.
pub fn dft_training_matrix(m: usize) -> CMat {
    CMat::from_fn(m, m, |r, n| {
        C64::from_polar(
            1.0,
            -2.0 * std::f64::consts::PI * ((r * n) % m) as f64 / m as f64,
        )
    })
}

/// Running mean of `y y^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCovariance {
    mean: CMat,
    count: usize,
}

impl SampleCovariance {
    pub fn new(m: usize) -> Self {
        SampleCovariance {
            mean: CMat::zeros(m, m),
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.nrows()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn accumulate(&mut self, y: &CVec) -> Result<()> {
        let m = self.dim();
        if y.len() != m {
            return Err(Error::Dimension(format!(
                "vector of length {}, expected {m}",
                y.len()
            )));
        }
        self.count += 1;
        let w = 1.0 / self.count as f64;
        for j in 0..m {
            let yj = y[j].conj();
            for i in 0..m {
                let delta = y[i] * yj - self.mean[(i, j)];
                self.mean[(i, j)] += delta * w;
            }
            // y_j y_j^* can pick up a rounding-level imaginary part
            self.mean[(j, j)].im = 0.0;
        }
        Ok(())
    }

    /// Count-weighted average of two running means.
    pub fn merge(&self, other: &SampleCovariance) -> Result<SampleCovariance> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "merging {}x{} with {}x{}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        let count = self.count + other.count;
        if count == 0 {
            return Ok(self.clone());
        }
        let (a, b) = (
            self.count as f64 / count as f64,
            other.count as f64 / count as f64,
        );
        let mean = self.mean.zip_map(&other.mean, |x, y| x * a + y * b);
        Ok(SampleCovariance { mean, count })
    }

    pub fn matrix(&self) -> HermitianMatrix {
        HermitianMatrix::hermitian_part(&self.mean)
    }
}

/// `(1/ρ) F_c^{-1} (R_yc − R_Fd) F_c^{-H}` with `R_Fd = blkdiag(F_t F_t^H)`.
pub fn recover_channel_cov(
    sample: &HermitianMatrix,
    blocks: &[CMat],
    rho: f64,
) -> Result<HermitianMatrix> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!(
            "pilot power must be positive, got {rho}"
        )));
    }
    let fc = crate::numerics::vstack(blocks);
    let m = sample.dim();
    if fc.shape() != (m, m) {
        return Err(Error::Dimension(format!(
            "stacked training is {}x{}, must be square of size {m}",
            fc.nrows(),
            fc.ncols()
        )));
    }
    let fc_inv = fc
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular {
            what: "F_c".into(),
            condition: f64::INFINITY,
        })?;
    let mut centered = sample.as_matrix().clone();
    let mut row = 0;
    for b in blocks {
        let n = b.nrows();
        let mut view = centered.view_mut((row, row), (n, n));
        view -= b * b.adjoint();
        row += n;
    }
    let r = &fc_inv * centered * fc_inv.adjoint() * C64::new(1.0 / rho, 0.0);
    Ok(HermitianMatrix::hermitian_part(&r))
}

/// Clips negative eigenvalues to zero and rescales to trace `M`.
pub fn psd_project(raw: &HermitianMatrix) -> Result<SpatialCovariance> {
    let mut e = eigh(raw)?;
    for v in e.values.iter_mut() {
        *v = v.max(0.0);
    }
    if e.values.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate(
            "no positive eigenvalue left after clipping".into(),
        ));
    }
    SpatialCovariance::normalized(HermitianMatrix::hermitian_part(&e.reconstruct()))
}

/// `‖A − B‖_F / ‖B‖_F`.
pub fn relative_frobenius_error(estimate: &HermitianMatrix, truth: &HermitianMatrix) -> f64 {
    (estimate.as_matrix() - truth.as_matrix()).norm() / truth.frobenius_norm()
}

#[derive(Debug, Clone)]
pub struct CovEstimate {
    pub cov: SpatialCovariance,
    /// `(interval count, relative Frobenius error of the projected estimate)`
    /// at each requested checkpoint.
    pub trajectory: Vec<(usize, f64)>,
}

/// Simulates `cfg.n_c` training intervals against `truth` and estimates the
/// covariance. Interval `i` draws from `stream(seed, i, lane, CovChannel)` and
/// `stream(seed, i, lane, CovNoise)`. The error is recorded after every
/// interval listed in `checkpoints` (values above `n_c` are ignored).
pub fn estimate_covariance(
    cfg: &CovEstConfig,
    truth: &SpatialCovariance,
    seed: u64,
    lane: u32,
    checkpoints: &[usize],
    exec: Execution,
) -> Result<CovEstimate> {
    if truth.dim() != cfg.m {
        return Err(Error::Dimension(format!(
            "covariance is {}x{}, config has M={}",
            truth.dim(),
            truth.dim(),
            cfg.m
        )));
    }
    let blocks = cfg.training_blocks();
    let fc = crate::numerics::vstack(&blocks);
    let sqrt_rho = C64::new(cfg.rho.sqrt(), 0.0);
    let observations = map_indexed(cfg.n_c, exec, |i| {
        let mut ch = stream(seed, i as u64, lane, Purpose::CovChannel);
        let mut nz = stream(seed, i as u64, lane, Purpose::CovNoise);
        let g = sample_channel(truth, &mut ch);
        let mut y = &fc * &g.g * sqrt_rho;
        let mut row = 0;
        for b in &blocks {
            let n = complex_gaussian_vector(&mut nz, cfg.m);
            let mut part = y.rows_mut(row, b.nrows());
            part += b * n;
            row += b.nrows();
        }
        y
    });

    let mut sample = SampleCovariance::new(cfg.m);
    let mut trajectory = Vec::new();
    let mut wanted: Vec<usize> = checkpoints
        .iter()
        .copied()
        .filter(|&c| c >= 1 && c <= cfg.n_c)
        .collect();
    wanted.sort_unstable();
    wanted.dedup();
    let mut next = wanted.iter().peekable();
    for y in &observations {
        sample.accumulate(y)?;
        if next.peek() == Some(&&sample.count()) {
            next.next();
            let est = psd_project(&recover_channel_cov(&sample.matrix(), &blocks, cfg.rho)?)?;
            trajectory.push((
                sample.count(),
                relative_frobenius_error(est.matrix(), truth.matrix()),
            ));
        }
    }
    let cov = psd_project(&recover_channel_cov(&sample.matrix(), &blocks, cfg.rho)?)?;
    Ok(CovEstimate { cov, trajectory })
}
