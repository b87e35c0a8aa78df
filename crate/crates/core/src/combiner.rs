//! RF combiner design.
//!
//! All unconstrained designs work in the eigenbasis of `R = U Λ U^H`: a
//! training is described by an `M x L` orthonormal `Ṽ_t` and realized as
//! `F_t = (U Ṽ_t)^H`. The single-training optimum and the sequential and
//! block designs pick `Ṽ_t` as identity columns, i.e. eigenvector
//! selections, so they are recorded as index sets.
//!
//! Hardware combiners only shift phases; [`phase_only_project`] and
//! [`quantize_phases`] map an unconstrained design onto that set.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::channel::SpatialCovariance;
use crate::numerics::{gen_eigh_pencil, orthonormalize_columns, CMat, HermitianMatrix, C64};
use crate::rng::complex_gaussian_matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    #[default]
    Unconstrained,
    PhaseOnly,
    Quantized(u32),
}

impl PhaseMode {
    pub fn name(&self) -> &'static str {
        match self {
            PhaseMode::Unconstrained => "unconstrained",
            PhaseMode::PhaseOnly | PhaseMode::Quantized(_) => "phase_only",
        }
    }

    pub fn quant_bits(&self) -> u32 {
        match self {
            PhaseMode::Quantized(b) => *b,
            _ => 0,
        }
    }
}

/// An `L x M` analog combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    entries: CMat,
    mode: PhaseMode,
}

impl Combiner {
    /// Checks the invariant of `mode`: orthonormal rows when unconstrained,
    /// unit-modulus entries when phase-only, and entries on the `2^b`-point
    /// phase grid when quantized.
    pub fn new(entries: CMat, mode: PhaseMode) -> Result<Self> {
        let (l, m) = entries.shape();
        if l == 0 || l > m {
            return Err(Error::Dimension(format!(
                "combiner must be L x M with 1 <= L <= M, got {l}x{m}"
            )));
        }
        match mode {
            PhaseMode::Unconstrained => {
                let gram = &entries * entries.adjoint() - CMat::identity(l, l);
                if gram.norm() > 1e-10 {
                    return Err(Error::Domain(format!(
                        "unconstrained combiner rows not orthonormal (deviation {:.3e})",
                        gram.norm()
                    )));
                }
            }
            PhaseMode::PhaseOnly => {
                if entries.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
                    return Err(Error::Domain(
                        "phase-only combiner has non-unit entries".into(),
                    ));
                }
            }
            PhaseMode::Quantized(bits) => {
                if bits == 0 {
                    return Err(Error::Domain("quantization needs at least one bit".into()));
                }
                let step = 2.0 * PI / (1u64 << bits) as f64;
                let off_grid = entries.iter().any(|z| {
                    let k = (wrap_phase(z.arg()) / step).round();
                    (z - C64::from_polar(1.0, k * step)).norm() > 1e-12
                });
                if off_grid {
                    return Err(Error::Domain(format!(
                        "entries not on the {bits}-bit phase grid"
                    )));
                }
            }
        }
        Ok(Combiner { entries, mode })
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn mode(&self) -> PhaseMode {
        self.mode
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignMethod {
    SingleOptimal,
    BlockSelection,
    Sequential,
    Alternating,
    DftRandom,
}

impl DesignMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DesignMethod::SingleOptimal => "single_optimal",
            DesignMethod::BlockSelection => "block_selection",
            DesignMethod::Sequential => "sequential",
            DesignMethod::Alternating => "alternating",
            DesignMethod::DftRandom => "dft_random",
        }
    }
}

impl fmt::Display for DesignMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "single_optimal" => DesignMethod::SingleOptimal,
            "block_selection" => DesignMethod::BlockSelection,
            "sequential" => DesignMethod::Sequential,
            "alternating" => DesignMethod::Alternating,
            "dft_random" => DesignMethod::DftRandom,
            other => return Err(Error::Domain(format!("unknown design method `{other}`"))),
        })
    }
}

/// The `T` combiners used for one estimation plus design metadata.
#[derive(Debug, Clone)]
pub struct CombinerSet {
    pub combiners: Vec<Combiner>,
    /// Eigen-directions selected per training; empty when the design is not
    /// an eigenvector selection.
    pub index_sets: Vec<Vec<usize>>,
    pub method: DesignMethod,
    /// Closed-form MSE of this exact set, when the designer knows `ρ`.
    pub mse_predicted: Option<f64>,
    /// Alternating sweeps performed (0 for one-shot designs).
    pub iterations: usize,
    /// Set when the alternating loop hit `max_iter` before converging.
    pub truncated: bool,
    /// MSE after each alternating sweep, starting with the initial value.
    pub mse_trajectory: Vec<f64>,
}

impl CombinerSet {
    pub fn new(
        combiners: Vec<Combiner>,
        index_sets: Vec<Vec<usize>>,
        method: DesignMethod,
    ) -> Result<Self> {
        let first = combiners
            .first()
            .ok_or_else(|| Error::Dimension("a combiner set needs at least one training".into()))?;
        let (l, m, mode) = (first.rows(), first.cols(), first.mode());
        if combiners
            .iter()
            .any(|c| c.rows() != l || c.cols() != m || c.mode() != mode)
        {
            return Err(Error::Dimension(
                "combiners disagree on shape or mode".into(),
            ));
        }
        if !index_sets.is_empty() {
            if index_sets.len() != combiners.len() {
                return Err(Error::Dimension(
                    "one index set per training expected".into(),
                ));
            }
            for set in &index_sets {
                let mut sorted = set.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != set.len() || set.iter().any(|&i| i >= m) {
                    return Err(Error::Domain(format!("invalid index set {set:?}")));
                }
            }
        }
        Ok(CombinerSet {
            combiners,
            index_sets,
            method,
            mse_predicted: None,
            iterations: 0,
            truncated: false,
            mse_trajectory: Vec::new(),
        })
    }

    pub fn trainings(&self) -> usize {
        self.combiners.len()
    }

    pub fn rf_chains(&self) -> usize {
        self.combiners[0].rows()
    }

    pub fn antennas(&self) -> usize {
        self.combiners[0].cols()
    }

    pub fn mode(&self) -> PhaseMode {
        self.combiners[0].mode()
    }

    /// Maps the set onto the hardware constraint `mode`. Phase-only inputs
    /// stay untouched for `Unconstrained`/`PhaseOnly`. The closed-form MSE is
    /// dropped because it no longer describes the projected set.
    pub fn realize(&self, mode: PhaseMode) -> Result<CombinerSet> {
        let combiners = self
            .combiners
            .iter()
            .map(|c| match (mode, c.mode()) {
                (PhaseMode::Unconstrained, _) => Ok(c.clone()),
                (PhaseMode::PhaseOnly, PhaseMode::Unconstrained) => Ok(phase_only_project(c)),
                (PhaseMode::PhaseOnly, _) => Ok(c.clone()),
                (PhaseMode::Quantized(bits), PhaseMode::Unconstrained) => {
                    quantize_phases(&phase_only_project(c), bits)
                }
                (PhaseMode::Quantized(bits), _) => quantize_phases(c, bits),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = CombinerSet::new(combiners, self.index_sets.clone(), self.method)?;
        out.iterations = self.iterations;
        out.truncated = self.truncated;
        out.mse_trajectory = self.mse_trajectory.clone();
        if mode == PhaseMode::Unconstrained {
            out.mse_predicted = self.mse_predicted;
        }
        Ok(out)
    }
}

/// Diagonal of `Γ_t` during the sequential design together with `ρ` and the
/// step counter.
#[derive(Debug, Clone)]
pub struct SequentialState {
    gamma: Vec<f64>,
    rho: f64,
    step: usize,
}

impl SequentialState {
    /// Starts from `Γ_1 = Λ`.
    pub fn new(lambdas: &[f64], rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!(
                "pilot power must be positive, got {rho}"
            )));
        }
        if lambdas.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Domain("eigenvalues must be non-negative".into()));
        }
        Ok(SequentialState {
            gamma: lambdas.to_vec(),
            rho,
            step: 0,
        })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Generalized eigenvalues `γ_j² / (γ_j + 1/ρ)` of `(Γ², Γ + ρ^{-1} I)`.
    /// Equal to the MSE reduction from observing direction `j` once more.
    pub fn scores(&self) -> Vec<f64> {
        pencil_scores(&self.gamma, self.rho)
    }

    /// The `l` best-scoring directions, ties to the lower index, returned in
    /// ascending index order.
    pub fn select(&self, l: usize) -> Vec<usize> {
        top_indices(&self.scores(), l)
    }

    /// `Γ^{-1} += ρ Ṽ Ṽ^H` for the selected identity columns.
    pub fn absorb(&mut self, selected: &[usize]) {
        for &j in selected {
            let g = self.gamma[j];
            self.gamma[j] = g / (1.0 + self.rho * g);
        }
        self.step += 1;
    }

    /// `tr(Γ)`, the MSE after the trainings absorbed so far.
    pub fn mse(&self) -> f64 {
        self.gamma.iter().sum()
    }
}

fn pencil_scores(gamma: &[f64], rho: f64) -> Vec<f64> {
    gamma.iter().map(|&g| g * g / (g + 1.0 / rho)).collect()
}

fn top_indices(scores: &[f64], l: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));
    let mut picked = order[..l].to_vec();
    picked.sort_unstable();
    picked
}

fn check_l(cov: &SpatialCovariance, l: usize) -> Result<()> {
    if l == 0 || l > cov.dim() {
        return Err(Error::Dimension(format!(
            "need 1 <= L <= M, got L={l}, M={}",
            cov.dim()
        )));
    }
    Ok(())
}

/// `F = U[:, idx]^H`.
fn eigen_rows(cov: &SpatialCovariance, idx: &[usize]) -> Combiner {
    let rows = cov.eigen().select_columns(idx).adjoint();
    Combiner {
        entries: rows,
        mode: PhaseMode::Unconstrained,
    }
}

/// Receives along the `L` dominant eigenvectors: `F = (U_{[1:L]})^H`.
pub fn design_single_optimal(cov: &SpatialCovariance, l: usize) -> Result<Combiner> {
    check_l(cov, l)?;
    let idx: Vec<usize> = (0..l).collect();
    Ok(eigen_rows(cov, &idx))
}

/// Training `t` uses eigen-indices `tL .. (t+1)L`.
pub fn design_block_selection(cov: &SpatialCovariance, l: usize, t: usize) -> Result<CombinerSet> {
    check_l(cov, l)?;
    if t == 0 || t * l > cov.dim() {
        return Err(Error::Dimension(format!(
            "block selection needs T*L <= M, got T={t}, L={l}, M={}",
            cov.dim()
        )));
    }
    let sets: Vec<Vec<usize>> = (0..t).map(|k| (k * l..(k + 1) * l).collect()).collect();
    let combiners = sets.iter().map(|s| eigen_rows(cov, s)).collect();
    CombinerSet::new(combiners, sets, DesignMethod::BlockSelection)
}

/// Step-wise optimal selection: training `t` takes the `L` directions with
/// the largest pencil scores of the current `Γ_t`, then folds them into
/// `Γ_{t+1}`. Directions may repeat across trainings.
pub fn design_sequential(
    cov: &SpatialCovariance,
    l: usize,
    t: usize,
    rho: f64,
) -> Result<CombinerSet> {
    check_l(cov, l)?;
    if t == 0 {
        return Err(Error::Dimension("need at least one training".into()));
    }
    let mut state = SequentialState::new(cov.eigenvalues(), rho)?;
    let mut sets = Vec::with_capacity(t);
    for _ in 0..t {
        let pick = state.select(l);
        state.absorb(&pick);
        sets.push(pick);
    }
    let combiners = sets.iter().map(|s| eigen_rows(cov, s)).collect();
    let mut set = CombinerSet::new(combiners, sets, DesignMethod::Sequential)?;
    set.mse_predicted = Some(state.mse());
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternatingOptions {
    /// Stop once the relative MSE change of a full sweep drops below this.
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for AlternatingOptions {
    fn default() -> Self {
        AlternatingOptions {
            epsilon: 1e-8,
            max_iter: 100,
        }
    }
}

/// Coordinate descent over trainings.
///
/// Each update fixes `Ṽ_t, t ≠ j` and replaces `Ṽ_j` with the top-`L`
/// generalized eigenvectors of `(Q_j², Q_j + ρ^{-1} I)` where
/// `Q_j^{-1} = Λ^{-1} + ρ Σ_{t≠j} Ṽ_t Ṽ_t^H`. When `init` is an eigenvector
/// selection, `Q_j` stays diagonal and updates remain index selections;
/// otherwise the dense pencil is solved.
pub fn design_alternating(
    cov: &SpatialCovariance,
    l: usize,
    t: usize,
    rho: f64,
    opts: &AlternatingOptions,
    init: &CombinerSet,
) -> Result<CombinerSet> {
    check_l(cov, l)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!(
            "pilot power must be positive, got {rho}"
        )));
    }
    if !(opts.epsilon > 0.0) || opts.max_iter == 0 {
        return Err(Error::Domain(
            "alternating needs epsilon > 0 and max_iter >= 1".into(),
        ));
    }
    if init.trainings() != t || init.rf_chains() != l || init.antennas() != cov.dim() {
        return Err(Error::Dimension(format!(
            "initial set is {}x{}x{}, expected {t}x{l}x{}",
            init.trainings(),
            init.rf_chains(),
            init.antennas(),
            cov.dim()
        )));
    }
    if init.mode() != PhaseMode::Unconstrained {
        return Err(Error::Domain(
            "alternating needs an unconstrained initial set".into(),
        ));
    }
    match selection_of(cov, init) {
        Some(sets) => alternating_selection(cov, l, rho, opts, sets),
        None => alternating_dense(cov, l, rho, opts, init),
    }
}

/// Index sets of `init` when every combiner is exactly `U[:, idx]^H` up to
/// per-row phases.
fn selection_of(cov: &SpatialCovariance, init: &CombinerSet) -> Option<Vec<Vec<usize>>> {
    if init.index_sets.len() != init.trainings() {
        return None;
    }
    let u = &cov.eigen().vectors;
    for (c, idx) in init.combiners.iter().zip(&init.index_sets) {
        let v = u.adjoint() * c.entries().adjoint();
        for (k, &i) in idx.iter().enumerate() {
            if (v[(i, k)].norm() - 1.0).abs() > 1e-8 {
                return None;
            }
        }
    }
    Some(init.index_sets.clone())
}

fn selection_mse(lambdas: &[f64], counts: &[usize], rho: f64) -> f64 {
    lambdas
        .iter()
        .zip(counts)
        .map(|(&lam, &c)| lam / (1.0 + rho * c as f64 * lam))
        .sum()
}

fn alternating_selection(
    cov: &SpatialCovariance,
    l: usize,
    rho: f64,
    opts: &AlternatingOptions,
    mut sets: Vec<Vec<usize>>,
) -> Result<CombinerSet> {
    let lambdas = cov.eigenvalues();
    let m = lambdas.len();
    let counts_of = |sets: &[Vec<usize>]| {
        let mut c = vec![0usize; m];
        for s in sets {
            for &i in s {
                c[i] += 1;
            }
        }
        c
    };
    let mut prev = selection_mse(lambdas, &counts_of(&sets), rho);
    let mut trajectory = vec![prev];
    let (mut best, mut best_sets) = (prev, sets.clone());
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_iter {
        sweeps += 1;
        for j in 0..sets.len() {
            let mut counts = counts_of(&sets);
            for &i in &sets[j] {
                counts[i] -= 1;
            }
            let q: Vec<f64> = lambdas
                .iter()
                .zip(&counts)
                .map(|(&lam, &c)| lam / (1.0 + rho * c as f64 * lam))
                .collect();
            sets[j] = top_indices(&pencil_scores(&q, rho), l);
        }
        let mse = selection_mse(lambdas, &counts_of(&sets), rho);
        trajectory.push(mse);
        if mse <= best {
            best = mse;
            best_sets = sets.clone();
        }
        let rel = (mse - prev).abs() / prev;
        prev = mse;
        if rel < opts.epsilon {
            converged = true;
            break;
        }
    }
    let combiners = best_sets.iter().map(|s| eigen_rows(cov, s)).collect();
    let mut out = CombinerSet::new(combiners, best_sets, DesignMethod::Alternating)?;
    out.mse_predicted = Some(best);
    out.iterations = sweeps;
    out.truncated = !converged;
    out.mse_trajectory = trajectory;
    Ok(out)
}

/// `Λ^{1/2} (I + ρ Λ^{1/2} S Λ^{1/2})^{-1} Λ^{1/2}`, i.e. `(Λ^{-1} + ρ S)^{-1}`
/// without inverting `Λ`.
fn posterior_covariance(lambdas: &[f64], s: &CMat, rho: f64) -> Result<CMat> {
    let m = lambdas.len();
    let root: Vec<f64> = lambdas.iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut inner = CMat::identity(m, m);
    for j in 0..m {
        for i in 0..m {
            inner[(i, j)] += s[(i, j)] * (rho * root[i] * root[j]);
        }
    }
    let chol = crate::numerics::hpd_cholesky(&inner, "I + ρ Λ^½ S Λ^½")?;
    let mut inv = chol.inverse();
    for j in 0..m {
        for i in 0..m {
            inv[(i, j)] *= root[i] * root[j];
        }
    }
    Ok(inv)
}

fn sum_projectors(vs: &[CMat], skip: Option<usize>, m: usize) -> CMat {
    let mut s = CMat::zeros(m, m);
    for (t, v) in vs.iter().enumerate() {
        if Some(t) != skip {
            s += v * v.adjoint();
        }
    }
    s
}

fn alternating_dense(
    cov: &SpatialCovariance,
    l: usize,
    rho: f64,
    opts: &AlternatingOptions,
    init: &CombinerSet,
) -> Result<CombinerSet> {
    let lambdas = cov.eigenvalues();
    let m = lambdas.len();
    let u = &cov.eigen().vectors;
    let mut vs: Vec<CMat> = init
        .combiners
        .iter()
        .map(|c| orthonormalize_columns(&(u.adjoint() * c.entries().adjoint())))
        .collect::<Result<_>>()?;
    let mse_of = |vs: &[CMat]| -> Result<f64> {
        Ok(
            posterior_covariance(lambdas, &sum_projectors(vs, None, m), rho)?
                .trace()
                .re,
        )
    };
    let mut prev = mse_of(&vs)?;
    let mut trajectory = vec![prev];
    let (mut best, mut best_vs) = (prev, vs.clone());
    let mut converged = false;
    let mut sweeps = 0;
    let noise = CMat::identity(m, m) * C64::new(1.0 / rho, 0.0);
    while sweeps < opts.max_iter {
        sweeps += 1;
        for j in 0..vs.len() {
            let q = posterior_covariance(lambdas, &sum_projectors(&vs, Some(j), m), rho)?;
            let a = HermitianMatrix::hermitian_part(&(&q * &q));
            let b = HermitianMatrix::hermitian_part(&(&q + &noise));
            let pencil = gen_eigh_pencil(&a, &b)?;
            let top = pencil.vectors.columns(0, l).into_owned();
            vs[j] = orthonormalize_columns(&top)?;
        }
        let mse = mse_of(&vs)?;
        trajectory.push(mse);
        if mse <= best {
            best = mse;
            best_vs = vs.clone();
        }
        let rel = (mse - prev).abs() / prev;
        prev = mse;
        if rel < opts.epsilon {
            converged = true;
            break;
        }
    }
    let combiners = best_vs
        .iter()
        .map(|v| Combiner::new((u * v).adjoint(), PhaseMode::Unconstrained))
        .collect::<Result<Vec<_>>>()?;
    let mut out = CombinerSet::new(combiners, Vec::new(), DesignMethod::Alternating)?;
    out.mse_predicted = Some(best);
    out.iterations = sweeps;
    out.truncated = !converged;
    out.mse_trajectory = trajectory;
    Ok(out)
}

/// `T` trainings with random orthonormal `Ṽ_t`, used to start the dense
/// alternating solver away from eigenvector selections.
pub fn random_orthonormal_set<R: Rng + ?Sized>(
    cov: &SpatialCovariance,
    l: usize,
    t: usize,
    rng: &mut R,
) -> Result<CombinerSet> {
    check_l(cov, l)?;
    let u = &cov.eigen().vectors;
    let combiners = (0..t)
        .map(|_| {
            let v = orthonormalize_columns(&complex_gaussian_matrix(rng, cov.dim(), l))?;
            Combiner::new((u * v).adjoint(), PhaseMode::Unconstrained)
        })
        .collect::<Result<Vec<_>>>()?;
    CombinerSet::new(combiners, Vec::new(), DesignMethod::Alternating)
}

/// Keeps each entry's phase and sets its magnitude to one. Zero entries map
/// to `1`.
pub fn phase_only_project(c: &Combiner) -> Combiner {
    let entries = c.entries.map(|z| {
        if z.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            C64::from_polar(1.0, z.arg())
        }
    });
    Combiner {
        entries,
        mode: PhaseMode::PhaseOnly,
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Index `k` of the nearest level `2πk / 2^bits`; exact midpoints go to the
/// lower level.
pub fn quantize_phase_index(phi: f64, bits: u32) -> u64 {
    let levels = 1u64 << bits;
    let step = 2.0 * PI / levels as f64;
    let x = wrap_phase(phi) / step;
    let lower = x.floor();
    let k = if x - lower > 0.5 { lower + 1.0 } else { lower };
    (k as u64) % levels
}

/// Snaps every phase of a phase-only combiner to the uniform `2^bits` grid.
pub fn quantize_phases(c: &Combiner, bits: u32) -> Result<Combiner> {
    if bits == 0 {
        return Err(Error::Domain("quantization needs at least one bit".into()));
    }
    if bits > 52 {
        return Err(Error::Domain(format!(
            "{bits} quantization bits is beyond f64 resolution"
        )));
    }
    if c.mode == PhaseMode::Unconstrained {
        return Err(Error::Domain(
            "quantize a phase-only combiner, not an unconstrained one".into(),
        ));
    }
    Ok(Combiner {
        entries: quantize_matrix(&c.entries, bits),
        mode: PhaseMode::Quantized(bits),
    })
}

/// Entry-wise phase quantization of an arbitrary matrix (magnitudes dropped).
pub fn quantize_matrix(m: &CMat, bits: u32) -> CMat {
    let step = 2.0 * PI / (1u64 << bits) as f64;
    m.map(|z| C64::from_polar(1.0, quantize_phase_index(z.arg(), bits) as f64 * step))
}

/// `exp(-j 2π r n / M)` for row `r` and column `n`.
fn dft_row(m: usize, r: usize) -> impl Iterator<Item = C64> {
    (0..m).map(move |n| C64::from_polar(1.0, -2.0 * PI * ((r * n) % m) as f64 / m as f64))
}

/// `L` distinct DFT rows chosen uniformly at random (ascending order).
pub fn dft_random_columns<R: Rng + ?Sized>(m: usize, l: usize, rng: &mut R) -> Result<Combiner> {
    if l == 0 || l > m {
        return Err(Error::Dimension(format!(
            "need 1 <= L <= M, got L={l}, M={m}"
        )));
    }
    let mut rows = index::sample(rng, m, l).into_vec();
    rows.sort_unstable();
    Ok(dft_rows(m, &rows))
}

fn dft_rows(m: usize, rows: &[usize]) -> Combiner {
    let mut entries = CMat::zeros(rows.len(), m);
    for (i, &r) in rows.iter().enumerate() {
        for (n, z) in dft_row(m, r).enumerate() {
            entries[(i, n)] = z;
        }
    }
    Combiner {
        entries,
        mode: PhaseMode::PhaseOnly,
    }
}

/// Random-DFT baseline over `T` trainings. Rows never repeat while `T L <= M`;
/// beyond that each training draws independently.
pub fn design_dft_random<R: Rng + ?Sized>(
    m: usize,
    l: usize,
    t: usize,
    rng: &mut R,
) -> Result<CombinerSet> {
    if l == 0 || l > m || t == 0 {
        return Err(Error::Dimension(format!(
            "need 1 <= L <= M and T >= 1, got L={l}, M={m}, T={t}"
        )));
    }
    let combiners = if t * l <= m {
        let rows = index::sample(rng, m, t * l).into_vec();
        rows.chunks(l)
            .map(|chunk| {
                let mut c = chunk.to_vec();
                c.sort_unstable();
                dft_rows(m, &c)
            })
            .collect()
    } else {
        (0..t)
            .map(|_| dft_random_columns(m, l, rng))
            .collect::<Result<Vec<_>>>()?
    };
    CombinerSet::new(combiners, Vec::new(), DesignMethod::DftRandom)
}
