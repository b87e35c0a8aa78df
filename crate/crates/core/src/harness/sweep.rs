//! Seeded Monte Carlo sweeps over SNR and design method.
//!
//! Channel realizations and noise are common across methods and SNR points:
//! trial `i` for user `u` always draws from `stream(seed, i, u, ·)`, so
//! curves are compared on identical samples.

use std::time::Instant;

use rand::RngCore;

use crate::channel::{exp_covariance, ray_covariance, sample_channel, SpatialCovariance};
use crate::combiner::{
    design_alternating, design_block_selection, design_dft_random, design_sequential,
    design_single_optimal, Combiner, CombinerSet, DesignMethod, PhaseMode,
};
use crate::covest::{estimate_covariance, CovEstConfig};
use crate::estimator::{db_to_linear, McOptions, NmseEstimate, NoiseMode, WienerEstimator};
use crate::exec::{map_indexed, Execution};
use crate::harness::config::{CovarianceModel, MethodSpec, SweepConfig};
use crate::harness::precoder::{phased_zf_precoder, sum_spectral_efficiency};
use crate::numerics::CMat;
use crate::rng::{stream, Purpose};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub exec: Execution,
    /// Fill the `wall_ms` column. Off by default so output is reproducible
    /// byte for byte.
    pub timing: bool,
}

/// One CSV row. `None` renders as an empty cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub method: String,
    pub phase_mode: String,
    pub quant_bits: u32,
    pub m: usize,
    pub l: usize,
    pub t: usize,
    pub k: Option<usize>,
    pub a: Option<f64>,
    pub snr_db: f64,
    pub trials: usize,
    pub nmse_db: Option<f64>,
    pub nmse_db_analytic: Option<f64>,
    pub std_err_db: Option<f64>,
    pub se_bits_per_hz: Option<f64>,
    pub se_perfect_bits_per_hz: Option<f64>,
    pub iters: Option<usize>,
    pub status: String,
    pub wall_ms: Option<f64>,
}

/// Spatial covariance of user `user` out of `users`. Exponential models are
/// shared; ray models spread the users' mean angles evenly over ±60°
/// around `ray_mean_deg`, each with its own path draw.
pub fn user_covariance(cfg: &SweepConfig, user: usize, users: usize) -> Result<SpatialCovariance> {
    match cfg.model {
        CovarianceModel::Exponential => exp_covariance(cfg.m, cfg.a),
        CovarianceModel::Ray => {
            let offset = -60.0 + 120.0 * (user as f64 + 0.5) / users as f64;
            let geometry_seed = stream(cfg.seed, user as u64, 0, Purpose::Geometry).next_u64();
            ray_covariance(
                cfg.m,
                cfg.ray_paths,
                cfg.ray_spread_deg.to_radians(),
                (cfg.ray_mean_deg + offset).to_radians(),
                geometry_seed,
            )
        }
    }
}

/// The covariance the receiver designs with: the truth when `n_c = 0`,
/// otherwise an estimate from `n_c` training intervals at `pilot_rho`.
fn assumed_covariance(
    cfg: &SweepConfig,
    truth: &SpatialCovariance,
    user: usize,
    pilot_rho: f64,
    exec: Execution,
) -> Result<SpatialCovariance> {
    if cfg.n_c == 0 {
        return Ok(truth.clone());
    }
    let cc = CovEstConfig::new(cfg.m, cfg.l, pilot_rho, cfg.n_c)?;
    Ok(estimate_covariance(&cc, truth, cfg.seed, user as u32, &[], exec)?.cov)
}

/// A realized design plus what the row reports about it.
#[derive(Debug, Clone)]
pub struct Design {
    pub set: CombinerSet,
    pub phase_mode: PhaseMode,
    pub iters: Option<usize>,
    pub truncated: bool,
}

/// Designs combiners for `method` from `cov` at pilot power `rho` and maps
/// them onto the configured phase mode. `single_optimal` always uses one
/// training and `fully_digital` is the identity with `L = M`.
pub fn design(
    cfg: &SweepConfig,
    method: MethodSpec,
    cov: &SpatialCovariance,
    rho: f64,
    lane: u32,
) -> Result<Design> {
    let raw = match method {
        MethodSpec::FullyDigital => {
            let id = Combiner::new(CMat::identity(cfg.m, cfg.m), PhaseMode::Unconstrained)?;
            let set = CombinerSet::new(vec![id], Vec::new(), DesignMethod::SingleOptimal)?;
            return Ok(Design {
                set,
                phase_mode: PhaseMode::Unconstrained,
                iters: None,
                truncated: false,
            });
        }
        MethodSpec::Design(DesignMethod::SingleOptimal) => {
            let f = design_single_optimal(cov, cfg.l)?;
            CombinerSet::new(vec![f], Vec::new(), DesignMethod::SingleOptimal)?
        }
        MethodSpec::Design(DesignMethod::BlockSelection) => {
            design_block_selection(cov, cfg.l, cfg.t)?
        }
        MethodSpec::Design(DesignMethod::Sequential) => design_sequential(cov, cfg.l, cfg.t, rho)?,
        MethodSpec::Design(DesignMethod::Alternating) => {
            let init = design_sequential(cov, cfg.l, cfg.t, rho)?;
            design_alternating(cov, cfg.l, cfg.t, rho, &cfg.alternating_options(), &init)?
        }
        MethodSpec::Design(DesignMethod::DftRandom) => {
            let mut rng = stream(cfg.seed, 0, lane, Purpose::Design);
            design_dft_random(cfg.m, cfg.l, cfg.t, &mut rng)?
        }
    };
    let alternating = method == MethodSpec::Design(DesignMethod::Alternating);
    Ok(Design {
        iters: alternating.then_some(raw.iterations),
        truncated: raw.truncated,
        set: raw.realize(cfg.phase_mode)?,
        phase_mode: cfg.phase_mode,
    })
}

fn empty_record(
    cfg: &SweepConfig,
    method: MethodSpec,
    snr_db: f64,
    k: Option<usize>,
) -> SweepRecord {
    let (mode, l, t) = match method {
        MethodSpec::FullyDigital => (PhaseMode::Unconstrained, cfg.m, 1),
        MethodSpec::Design(DesignMethod::SingleOptimal) => (cfg.phase_mode, cfg.l, 1),
        MethodSpec::Design(_) => (cfg.phase_mode, cfg.l, cfg.t),
    };
    SweepRecord {
        method: method.name().to_string(),
        phase_mode: mode.name().to_string(),
        quant_bits: mode.quant_bits(),
        m: cfg.m,
        l,
        t,
        k,
        a: (cfg.model == CovarianceModel::Exponential).then_some(cfg.a),
        snr_db,
        trials: cfg.trials,
        nmse_db: None,
        nmse_db_analytic: None,
        std_err_db: None,
        se_bits_per_hz: None,
        se_perfect_bits_per_hz: None,
        iters: None,
        status: "ok".to_string(),
        wall_ms: None,
    }
}

fn status_of(truncated: bool, regularized: bool) -> String {
    match (truncated, regularized) {
        (false, false) => "ok",
        (true, false) => "truncated",
        (false, true) => "regularized",
        (true, true) => "truncated+regularized",
    }
    .to_string()
}

fn pilot_rho(cfg: &SweepConfig, snr_db: f64) -> f64 {
    db_to_linear(cfg.pilot_snr_db.unwrap_or(snr_db))
}

/// NMSE sweep: one row per (method, SNR). Rows train at the row SNR;
/// `pilot_snr_db` only sets the power of covariance-estimation intervals.
///
/// Failures inside a row are reported in its `status` cell. Failures that
/// affect every row (building or estimating the covariance) abort the sweep.
pub fn run_mse_sweep(cfg: &SweepConfig, opts: &RunOptions) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let truth = user_covariance(cfg, 0, 1)?;
    let assumed: Vec<SpatialCovariance> = cfg
        .snr_db
        .iter()
        .map(|&snr| assumed_covariance(cfg, &truth, 0, pilot_rho(cfg, snr), opts.exec))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        for (p, &snr) in cfg.snr_db.iter().enumerate() {
            let start = Instant::now();
            let mut row = empty_record(cfg, method, snr, None);
            match mse_point(
                cfg,
                method,
                &truth,
                &assumed[p],
                db_to_linear(snr),
                opts.exec,
            ) {
                Ok((est, analytic, d)) => {
                    row.nmse_db = Some(est.mean_db());
                    row.nmse_db_analytic = Some(10.0 * (analytic / cfg.m as f64).log10());
                    row.std_err_db = Some(est.std_err_db());
                    row.iters = d.iters;
                    row.status = status_of(d.truncated, false);
                }
                Err(e) => row.status = e.status_tag().to_string(),
            }
            if opts.timing {
                row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

fn mse_point(
    cfg: &SweepConfig,
    method: MethodSpec,
    truth: &SpatialCovariance,
    assumed: &SpatialCovariance,
    rho: f64,
    exec: Execution,
) -> Result<(NmseEstimate, f64, Design)> {
    let d = design(cfg, method, assumed, rho, 0)?;
    let est = WienerEstimator::for_set(assumed, &d.set, rho)?;
    let analytic = est.mse_against(truth)?;
    let mc = McOptions {
        trials: cfg.trials,
        seed: cfg.seed,
        lane: 0,
        exec,
        noise: NoiseMode::Random,
    };
    let nmse = crate::estimator::monte_carlo_nmse(&est, truth, &mc)?;
    Ok((nmse, analytic, d))
}

/// Per-trial outcome of the spectral-efficiency simulation.
struct SeTrial {
    se_est: f64,
    se_perfect: f64,
    nmse: f64,
    regularized: bool,
}

/// Downlink sum spectral efficiency sweep with `K` users.
///
/// Each user's channel is estimated with its own designed combiners (from
/// the true or estimated covariance), the phase-steered zero-forcing
/// precoder is built from the estimates and evaluated on the true channels.
/// The perfect-CSI branch builds the precoder from the true channels.
/// Training uses `pilot_snr_db` when set, otherwise the row SNR.
pub fn run_se_sweep(cfg: &SweepConfig, opts: &RunOptions) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    if cfg.k > cfg.l {
        return Err(Error::config(
            "k",
            format!("need k <= l, got k={} l={}", cfg.k, cfg.l),
        ));
    }
    let truths: Vec<SpatialCovariance> = (0..cfg.k)
        .map(|u| user_covariance(cfg, u, cfg.k))
        .collect::<Result<_>>()?;
    let assumed: Vec<Vec<SpatialCovariance>> = cfg
        .snr_db
        .iter()
        .map(|&snr| {
            truths
                .iter()
                .enumerate()
                .map(|(u, truth)| assumed_covariance(cfg, truth, u, pilot_rho(cfg, snr), opts.exec))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        for (p, &snr) in cfg.snr_db.iter().enumerate() {
            let start = Instant::now();
            let mut row = empty_record(cfg, method, snr, Some(cfg.k));
            match se_point(cfg, method, &truths, &assumed[p], snr, opts.exec) {
                Ok((trials, analytic, d)) => {
                    let regularized = trials.iter().any(|s| s.regularized);
                    let n = trials.len() as f64;
                    let nmse: Vec<f64> = trials.iter().map(|s| s.nmse).collect();
                    let est = NmseEstimate::from_samples(&nmse);
                    row.nmse_db = Some(est.mean_db());
                    row.nmse_db_analytic = Some(10.0 * analytic.log10());
                    row.std_err_db = Some(est.std_err_db());
                    row.se_bits_per_hz = Some(trials.iter().map(|s| s.se_est).sum::<f64>() / n);
                    row.se_perfect_bits_per_hz =
                        Some(trials.iter().map(|s| s.se_perfect).sum::<f64>() / n);
                    row.iters = d.iters;
                    row.status = status_of(d.truncated, regularized);
                }
                Err(e) => row.status = e.status_tag().to_string(),
            }
            if opts.timing {
                row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

fn se_point(
    cfg: &SweepConfig,
    method: MethodSpec,
    truths: &[SpatialCovariance],
    assumed: &[SpatialCovariance],
    snr_db: f64,
    exec: Execution,
) -> Result<(Vec<SeTrial>, f64, Design)> {
    let pilot = pilot_rho(cfg, snr_db);
    let rho = db_to_linear(snr_db);
    let mut estimators = Vec::with_capacity(cfg.k);
    let mut analytic = 0.0;
    let mut first = None;
    for (u, (truth, cov)) in truths.iter().zip(assumed).enumerate() {
        let d = design(cfg, method, cov, pilot, u as u32)?;
        let est = WienerEstimator::for_set(cov, &d.set, pilot)?;
        analytic += est.mse_against(truth)? / (cfg.m * cfg.k) as f64;
        estimators.push(est);
        first.get_or_insert(d);
    }
    let d = first.expect("at least one user");
    let bits = match d.phase_mode {
        PhaseMode::Quantized(b) => Some(b),
        _ => None,
    };
    let outcomes = map_indexed(cfg.trials, exec, |i| -> Result<SeTrial> {
        let mut h = CMat::zeros(cfg.m, cfg.k);
        let mut h_hat = CMat::zeros(cfg.m, cfg.k);
        let mut nmse = 0.0;
        for (u, (truth, est)) in truths.iter().zip(&estimators).enumerate() {
            let mut ch = stream(cfg.seed, i as u64, u as u32, Purpose::Channel);
            let mut nz = stream(cfg.seed, i as u64, u as u32, Purpose::Noise);
            let g = sample_channel(truth, &mut ch).g;
            let g_hat = est.estimate(&est.observe(&g, NoiseMode::Random, &mut nz));
            nmse += (&g - &g_hat).norm_squared() / (cfg.m * cfg.k) as f64;
            h.set_column(u, &g);
            h_hat.set_column(u, &g_hat);
        }
        let p_est = phased_zf_precoder(&h_hat, cfg.l, bits)?;
        let p_true = phased_zf_precoder(&h, cfg.l, bits)?;
        Ok(SeTrial {
            se_est: sum_spectral_efficiency(&h, &p_est.composite(), rho)?,
            se_perfect: sum_spectral_efficiency(&h, &p_true.composite(), rho)?,
            nmse,
            regularized: p_est.regularized || p_true.regularized,
        })
    });
    let trials = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    if trials
        .iter()
        .any(|s| !s.se_est.is_finite() || !s.nmse.is_finite())
    {
        return Err(Error::NumericalFailure("non-finite trial outcome".into()));
    }
    Ok((trials, analytic, d))
}

/// A single design for inspection.
#[derive(Debug, Clone)]
pub struct DesignDump {
    pub method: MethodSpec,
    pub snr_db: f64,
    pub design: Design,
}

/// Designs the combiners of the only configured method at the only
/// configured SNR (or `pilot_snr_db` when given).
pub fn run_design(cfg: &SweepConfig, opts: &RunOptions) -> Result<DesignDump> {
    cfg.validate()?;
    if cfg.methods.len() != 1 {
        return Err(Error::config("methods", "design dumps exactly one method"));
    }
    let snr_db = single_snr(cfg)?;
    let truth = user_covariance(cfg, 0, 1)?;
    let rho = db_to_linear(snr_db);
    let cov = assumed_covariance(cfg, &truth, 0, rho, opts.exec)?;
    let design = design(cfg, cfg.methods[0], &cov, rho, 0)?;
    Ok(DesignDump {
        method: cfg.methods[0],
        snr_db,
        design,
    })
}

fn single_snr(cfg: &SweepConfig) -> Result<f64> {
    match (cfg.pilot_snr_db, cfg.snr_db.as_slice()) {
        (Some(p), _) => Ok(p),
        (None, [s]) => Ok(*s),
        _ => Err(Error::config(
            "snr_db",
            "give a single value or set pilot_snr_db",
        )),
    }
}

/// Relative Frobenius error of the covariance estimate after every interval
/// `1..=n_c`, pilot power from `pilot_snr_db` or the single `snr_db`.
pub fn run_covest(cfg: &SweepConfig, opts: &RunOptions) -> Result<Vec<(usize, f64)>> {
    cfg.validate()?;
    if cfg.n_c == 0 {
        return Err(Error::config("n_c", "covariance estimation needs n_c >= 1"));
    }
    let rho = db_to_linear(single_snr(cfg)?);
    let truth = user_covariance(cfg, 0, 1)?;
    let cc = CovEstConfig::new(cfg.m, cfg.l, rho, cfg.n_c)?;
    let checkpoints: Vec<usize> = (1..=cfg.n_c).collect();
    Ok(estimate_covariance(&cc, &truth, cfg.seed, 0, &checkpoints, opts.exec)?.trajectory)
}
