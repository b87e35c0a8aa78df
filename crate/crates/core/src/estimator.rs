//! Observation synthesis, the Wiener channel estimator and MSE evaluation.
//!
//! With `T` trainings through `L x M` combiners `F_t`, the stacked receive
//! vector is `y_c = √ρ F_c g + F_d n_c`, where `F_c` stacks the `F_t`
//! vertically and `F_d = blkdiag(F_t)` is `TL x TM`. The effective noise
//! covariance `R_Fd = blkdiag(F_t F_t^H)` is kept per block so phase-only
//! combiners (non-orthonormal rows) are handled exactly.

use rand::Rng;

use crate::channel::{sample_channel, ChannelRealization, SpatialCovariance};
use crate::combiner::CombinerSet;
use crate::exec::{map_indexed, Execution};
use crate::numerics::{block_diagonal, hpd_cholesky, vstack, CMat, CVec, HermitianMatrix, C64};
use crate::rng::{complex_gaussian_vector, stream, Purpose};
use crate::{Error, Result};

/// `R` with condition number above this is treated as rank deficient by
/// [`analytic_mse`], which then avoids `R^{-1}`.
const INVERTIBLE_COND: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingScenario {
    pub m: usize,
    pub l: usize,
    pub t: usize,
    /// Linear pilot power; noise has unit variance, so this is the SNR.
    pub rho: f64,
}

impl TrainingScenario {
    pub fn new(m: usize, l: usize, t: usize, rho: f64) -> Result<Self> {
        if l == 0 || l > m {
            return Err(Error::Dimension(format!(
                "need 1 <= L <= M, got L={l}, M={m}"
            )));
        }
        if t == 0 {
            return Err(Error::Dimension("need at least one training".into()));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!(
                "pilot power must be positive, got {rho}"
            )));
        }
        Ok(TrainingScenario { m, l, t, rho })
    }

    pub fn from_snr_db(m: usize, l: usize, t: usize, snr_db: f64) -> Result<Self> {
        Self::new(m, l, t, db_to_linear(snr_db))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Per-training combiners in stacked form, with the factors the estimator
/// needs precomputed.
#[derive(Debug, Clone)]
pub struct StackedCombiner {
    blocks: Vec<CMat>,
    fc: CMat,
    /// `F_t F_t^H` per training.
    noise_blocks: Vec<CMat>,
}

impl StackedCombiner {
    pub fn from_blocks(blocks: Vec<CMat>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Dimension("need at least one training".into()))?;
        let m = first.ncols();
        if blocks.iter().any(|b| b.ncols() != m || b.nrows() == 0) {
            return Err(Error::Dimension("training blocks disagree on width".into()));
        }
        let fc = vstack(&blocks);
        let noise_blocks = blocks.iter().map(|b| b * b.adjoint()).collect();
        Ok(StackedCombiner {
            blocks,
            fc,
            noise_blocks,
        })
    }

    pub fn from_set(set: &CombinerSet) -> Result<Self> {
        Self::from_blocks(set.combiners.iter().map(|c| c.entries().clone()).collect())
    }

    /// Single training with `F = I_M`.
    pub fn fully_digital(m: usize) -> Self {
        Self::from_blocks(vec![CMat::identity(m, m)]).expect("non-empty identity")
    }

    pub fn trainings(&self) -> usize {
        self.blocks.len()
    }

    pub fn antennas(&self) -> usize {
        self.fc.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.fc.nrows()
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn f_c(&self) -> &CMat {
        &self.fc
    }

    /// Dense `F_d` (`TL x TM`).
    pub fn f_d(&self) -> CMat {
        block_diagonal(&self.blocks)
    }

    /// Dense `R_Fd = F_d F_d^H`.
    pub fn r_fd(&self) -> CMat {
        block_diagonal(&self.noise_blocks)
    }

    /// `F_c^H R_Fd^{-1} F_c = Σ_t F_t^H (F_t F_t^H)^{-1} F_t`.
    fn information(&self) -> Result<CMat> {
        let m = self.antennas();
        let mut acc = CMat::zeros(m, m);
        for (f, nb) in self.blocks.iter().zip(&self.noise_blocks) {
            let chol = hpd_cholesky(nb, "F_t F_t^H")?;
            acc += f.adjoint() * chol.solve(f);
        }
        Ok(acc)
    }

    /// `[F_1 n_1; …; F_T n_T]` with fresh `n_t ~ CN(0, I_M)`.
    fn filtered_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        let mut out = CVec::zeros(self.outputs());
        let mut row = 0;
        for f in &self.blocks {
            let n = complex_gaussian_vector(rng, f.ncols());
            out.rows_mut(row, f.nrows()).copy_from(&(f * n));
            row += f.nrows();
        }
        out
    }

    fn check(&self, cov: &SpatialCovariance) -> Result<()> {
        if cov.dim() != self.antennas() {
            return Err(Error::Dimension(format!(
                "combiners are {} wide, covariance is {}x{}",
                self.antennas(),
                cov.dim(),
                cov.dim()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBatch {
    pub y_c: CVec,
    pub f_c: CMat,
    pub f_d: CMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    #[default]
    Random,
    /// Noise forced to zero; the rng is not consumed.
    Zero,
}

/// Synthesizes one stacked observation of `g`.
pub fn stack_observations<R: Rng + ?Sized>(
    set: &CombinerSet,
    g: &ChannelRealization,
    scenario: &TrainingScenario,
    noise: NoiseMode,
    rng: &mut R,
) -> Result<ObservationBatch> {
    if set.antennas() != scenario.m
        || set.rf_chains() != scenario.l
        || set.trainings() != scenario.t
        || g.g.len() != scenario.m
    {
        return Err(Error::Dimension(format!(
            "combiners {}x{}x{} / channel {} do not match scenario T={} L={} M={}",
            set.trainings(),
            set.rf_chains(),
            set.antennas(),
            g.g.len(),
            scenario.t,
            scenario.l,
            scenario.m
        )));
    }
    let stacked = StackedCombiner::from_set(set)?;
    let y_c = observe(&stacked, &g.g, scenario.rho, noise, rng);
    Ok(ObservationBatch {
        y_c,
        f_c: stacked.fc.clone(),
        f_d: stacked.f_d(),
    })
}

fn observe<R: Rng + ?Sized>(
    stacked: &StackedCombiner,
    g: &CVec,
    rho: f64,
    noise: NoiseMode,
    rng: &mut R,
) -> CVec {
    let signal = &stacked.fc * g * C64::new(rho.sqrt(), 0.0);
    match noise {
        NoiseMode::Random => signal + stacked.filtered_noise(rng),
        NoiseMode::Zero => signal,
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!(
            "pilot power must be positive, got {rho}"
        )));
    }
    Ok(())
}

/// `ρ F_c R F_c^H + R_Fd`.
fn innovation_covariance(cov: &SpatialCovariance, stacked: &StackedCombiner, rho: f64) -> CMat {
    let fr = &stacked.fc * cov.matrix().as_matrix();
    let mut s = (&fr * stacked.fc.adjoint()) * C64::new(rho, 0.0);
    let mut row = 0;
    for nb in &stacked.noise_blocks {
        let n = nb.nrows();
        let mut view = s.view_mut((row, row), (n, n));
        view += nb;
        row += n;
    }
    s
}

/// `W = √ρ R F_c^H (ρ F_c R F_c^H + R_Fd)^{-1}` (`M x TL`).
pub fn wiener_filter(cov: &SpatialCovariance, stacked: &StackedCombiner, rho: f64) -> Result<CMat> {
    check_rho(rho)?;
    stacked.check(cov)?;
    let s = innovation_covariance(cov, stacked, rho);
    let chol = hpd_cholesky(&s, "ρ F_c R F_c^H + R_Fd")?;
    // S and R are Hermitian, so W^H = S^{-1} (√ρ F_c R).
    let rhs = (&stacked.fc * cov.matrix().as_matrix()) * C64::new(rho.sqrt(), 0.0);
    Ok(chol.solve(&rhs).adjoint())
}

/// Closed-form MMSE `tr((R^{-1} + ρ F_c^H R_Fd^{-1} F_c)^{-1})`.
///
/// For rank-deficient or badly conditioned `R` (condition above `1e8`) the
/// equivalent form without `R^{-1}` is used instead, see
/// [`analytic_mse_pre_woodbury`].
pub fn analytic_mse(cov: &SpatialCovariance, stacked: &StackedCombiner, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    stacked.check(cov)?;
    let v = cov.eigenvalues();
    let (hi, lo) = (v[0], v[v.len() - 1]);
    if lo <= 0.0 || hi / lo > INVERTIBLE_COND {
        return analytic_mse_pre_woodbury(cov, stacked, rho);
    }
    analytic_mse_woodbury(cov, stacked, rho)
}

/// The Woodbury form; requires invertible `R`.
pub fn analytic_mse_woodbury(
    cov: &SpatialCovariance,
    stacked: &StackedCombiner,
    rho: f64,
) -> Result<f64> {
    check_rho(rho)?;
    stacked.check(cov)?;
    let r_inv = hpd_cholesky(cov.matrix().as_matrix(), "R")?.inverse();
    let precision = r_inv + stacked.information()? * C64::new(rho, 0.0);
    let chol = hpd_cholesky(&precision, "R^{-1} + ρ F_c^H R_Fd^{-1} F_c")?;
    Ok(chol.inverse().trace().re)
}

/// `tr(R − ρ R F_c^H (ρ F_c R F_c^H + R_Fd)^{-1} F_c R)`; valid for singular `R`.
pub fn analytic_mse_pre_woodbury(
    cov: &SpatialCovariance,
    stacked: &StackedCombiner,
    rho: f64,
) -> Result<f64> {
    check_rho(rho)?;
    stacked.check(cov)?;
    let s = innovation_covariance(cov, stacked, rho);
    let chol = hpd_cholesky(&s, "ρ F_c R F_c^H + R_Fd")?;
    let fr = &stacked.fc * cov.matrix().as_matrix();
    let reduction = (fr.adjoint() * chol.solve(&fr)).trace().re * rho;
    Ok((cov.matrix().trace() - reduction).max(0.0))
}

/// MSE of an arbitrary linear estimator `W` when the channel really has
/// covariance `cov`: `tr(E R E^H) + tr(W R_Fd W^H)` with `E = I − √ρ W F_c`.
/// Coincides with [`analytic_mse`] when `W` is the Wiener filter for `cov`.
pub fn mismatched_mse(
    cov: &SpatialCovariance,
    stacked: &StackedCombiner,
    w: &CMat,
    rho: f64,
) -> Result<f64> {
    check_rho(rho)?;
    stacked.check(cov)?;
    let m = cov.dim();
    if w.shape() != (m, stacked.outputs()) {
        return Err(Error::Dimension(format!(
            "filter is {}x{}, expected {m}x{}",
            w.nrows(),
            w.ncols(),
            stacked.outputs()
        )));
    }
    let e = CMat::identity(m, m) - (w * &stacked.fc) * C64::new(rho.sqrt(), 0.0);
    let signal = (&e * cov.matrix().as_matrix() * e.adjoint()).trace().re;
    let mut noise = 0.0;
    let mut col = 0;
    for nb in &stacked.noise_blocks {
        let n = nb.nrows();
        let wt = w.columns(col, n);
        noise += (wt * nb * wt.adjoint()).trace().re;
        col += n;
    }
    Ok(signal + noise)
}

/// Closed-form MSE of the single-training optimum from the eigenvalues:
/// `Σ_{l≤L} λ_l / (1 + ρ λ_l) + Σ_{l>L} λ_l`, which equals
/// `M − Σ_{l≤L} λ_l² / (λ_l + 1/ρ)`.
pub fn analytic_mse_single_optimal(lambdas: &[f64], l: usize, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let m = lambdas.len();
    if l == 0 || l > m {
        return Err(Error::Dimension(format!(
            "need 1 <= L <= M, got L={l}, M={m}"
        )));
    }
    if lambdas.windows(2).any(|w| w[1] > w[0]) || lambdas.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Domain(
            "eigenvalues must be non-negative and sorted descending".into(),
        ));
    }
    let total: f64 = lambdas.iter().sum();
    if (total - m as f64).abs() > 1e-9 * m as f64 {
        return Err(Error::Domain(format!(
            "eigenvalues sum to {total}, expected {m}"
        )));
    }
    let observed: f64 = lambdas[..l].iter().map(|&v| v / (1.0 + rho * v)).sum();
    let missed: f64 = lambdas[l..].iter().sum();
    Ok(observed + missed)
}

/// MSE with `F = I_M` and one training: `Σ λ_l / (1 + ρ λ_l)`.
pub fn fully_digital_reference(cov: &SpatialCovariance, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(cov.eigenvalues().iter().map(|&v| v / (1.0 + rho * v)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub g_hat: CVec,
    pub squared_error: f64,
    pub nmse_linear: f64,
}

/// A Wiener filter bound to its combiners.
#[derive(Debug, Clone)]
pub struct WienerEstimator {
    stacked: StackedCombiner,
    w: CMat,
    rho: f64,
}

impl WienerEstimator {
    /// Builds the filter from the covariance the receiver believes in, which
    /// need not be the true one.
    pub fn new(assumed: &SpatialCovariance, stacked: StackedCombiner, rho: f64) -> Result<Self> {
        let w = wiener_filter(assumed, &stacked, rho)?;
        Ok(WienerEstimator { stacked, w, rho })
    }

    pub fn for_set(assumed: &SpatialCovariance, set: &CombinerSet, rho: f64) -> Result<Self> {
        Self::new(assumed, StackedCombiner::from_set(set)?, rho)
    }

    pub fn filter(&self) -> &CMat {
        &self.w
    }

    pub fn stacked(&self) -> &StackedCombiner {
        &self.stacked
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn estimate(&self, y_c: &CVec) -> CVec {
        &self.w * y_c
    }

    /// Observes `g` through this estimator's combiners (noise from `rng`).
    pub fn observe<R: Rng + ?Sized>(&self, g: &CVec, noise: NoiseMode, rng: &mut R) -> CVec {
        observe(&self.stacked, g, self.rho, noise, rng)
    }

    pub fn report(&self, g: &ChannelRealization, y_c: &CVec) -> EstimateReport {
        let g_hat = self.estimate(y_c);
        let squared_error = (&g.g - &g_hat).norm_squared();
        let nmse_linear = squared_error / g.g.len() as f64;
        EstimateReport {
            g_hat,
            squared_error,
            nmse_linear,
        }
    }

    /// Exact MSE of this filter against channels drawn from `truth`.
    pub fn mse_against(&self, truth: &SpatialCovariance) -> Result<f64> {
        mismatched_mse(truth, &self.stacked, &self.w, self.rho)
    }
}

/// Monte Carlo settings. Trial `i` draws its channel from
/// `stream(seed, i, lane, Channel)` and its noise from
/// `stream(seed, i, lane, Noise)`, so different designs evaluated with the
/// same options see identical channels and noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub trials: usize,
    pub seed: u64,
    pub lane: u32,
    pub exec: Execution,
    pub noise: NoiseMode,
}

impl McOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        McOptions {
            trials,
            seed,
            lane: 0,
            exec: Execution::default(),
            noise: NoiseMode::Random,
        }
    }
}

/// Mean per-trial `‖g − ĝ‖² / M` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmseEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

impl NmseEstimate {
    /// Index-ordered mean and standard error of per-trial samples.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        NmseEstimate {
            mean,
            std_err,
            trials: n,
        }
    }

    pub fn mean_db(&self) -> f64 {
        linear_to_db(self.mean)
    }

    /// First-order standard error of `mean_db`.
    pub fn std_err_db(&self) -> f64 {
        10.0 / std::f64::consts::LN_10 * self.std_err / self.mean
    }
}

/// Monte Carlo NMSE of `estimator` on channels drawn from `truth`.
pub fn monte_carlo_nmse(
    estimator: &WienerEstimator,
    truth: &SpatialCovariance,
    opts: &McOptions,
) -> Result<NmseEstimate> {
    if opts.trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    estimator.stacked.check(truth)?;
    let m = truth.dim() as f64;
    let samples = map_indexed(opts.trials, opts.exec, |i| {
        let mut ch_rng = stream(opts.seed, i as u64, opts.lane, Purpose::Channel);
        let mut noise_rng = stream(opts.seed, i as u64, opts.lane, Purpose::Noise);
        let g = sample_channel(truth, &mut ch_rng);
        let y = observe(
            &estimator.stacked,
            &g.g,
            estimator.rho,
            opts.noise,
            &mut noise_rng,
        );
        (&g.g - estimator.estimate(&y)).norm_squared() / m
    });
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite squared error".into()));
    }
    Ok(NmseEstimate::from_samples(&samples))
}

/// Monte Carlo NMSE of the Wiener estimator for `set` with known `cov`.
pub fn empirical_nmse(
    set: &CombinerSet,
    cov: &SpatialCovariance,
    scenario: &TrainingScenario,
    opts: &McOptions,
) -> Result<NmseEstimate> {
    if set.antennas() != scenario.m
        || set.trainings() != scenario.t
        || set.rf_chains() != scenario.l
    {
        return Err(Error::Dimension(
            "combiner set does not match scenario".into(),
        ));
    }
    let est = WienerEstimator::for_set(cov, set, scenario.rho)?;
    monte_carlo_nmse(&est, cov, opts)
}

/// Hermitian wrapper for `R_Fd`, handy for diagnostics.
pub fn noise_covariance(stacked: &StackedCombiner) -> HermitianMatrix {
    HermitianMatrix::hermitian_part(&stacked.r_fd())
}
