//! End-to-end acceptance checks at full scale (M = 64, 10^4 trials).
//!
//! Prints one PASS/FAIL line per criterion and exits non-zero if any fail.
//! Oracles are evaluated here from eigenvalues directly rather than through
//! the library's MSE routines wherever that is possible.

use std::process::ExitCode;
use std::time::Instant;

use hybrid_est::channel::{exp_covariance, SpatialCovariance};
use hybrid_est::combiner::{
    design_alternating, design_block_selection, design_sequential, design_single_optimal,
    AlternatingOptions, CombinerSet, DesignMethod, PhaseMode,
};
use hybrid_est::estimator::{
    analytic_mse, analytic_mse_single_optimal, db_to_linear, empirical_nmse, McOptions,
    StackedCombiner, TrainingScenario,
};
use hybrid_est::harness::{
    run_se_sweep, CovarianceModel, MethodSpec, RunOptions, SweepConfig, SweepRecord,
};
use hybrid_est::numerics::{block_grq, gen_eigh_pencil, orthonormalize_columns, HermitianMatrix};
use hybrid_est::rng::{complex_gaussian_matrix, stream, Purpose};

const M: usize = 64;
const TRIALS: usize = 10_000;
const SEED: u64 = 1;

type Outcome = (bool, String);

fn snr_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).step_by(5).map(|v| v as f64).collect()
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn exp64(a: f64) -> SpatialCovariance {
    exp_covariance(M, a).expect("valid covariance")
}

fn mse_of(cov: &SpatialCovariance, set: &CombinerSet, rho: f64) -> f64 {
    analytic_mse(cov, &StackedCombiner::from_set(set).unwrap(), rho).unwrap()
}

/// `Σ_{i≤L} λ/(1+ρλ) + Σ_{i>L} λ` straight from the eigenvalues.
fn eq_single(lambdas: &[f64], l: usize, rho: f64) -> f64 {
    lambdas[..l]
        .iter()
        .map(|&v| v / (1.0 + rho * v))
        .sum::<f64>()
        + lambdas[l..].iter().sum::<f64>()
}

fn fd(lambdas: &[f64], rho: f64) -> f64 {
    eq_single(lambdas, lambdas.len(), rho)
}

fn single_set(cov: &SpatialCovariance, l: usize) -> CombinerSet {
    CombinerSet::new(
        vec![design_single_optimal(cov, l).unwrap()],
        Vec::new(),
        DesignMethod::SingleOptimal,
    )
    .unwrap()
}

fn closed_form_accuracy() -> Outcome {
    let cov = exp64(0.8);
    let mut worst: f64 = 0.0;
    let mut fails = Vec::new();
    let mut points = 0;
    for l in [4, 8, 16] {
        let set = single_set(&cov, l);
        for snr in snr_grid(-20, 20) {
            let rho = db_to_linear(snr);
            let sc = TrainingScenario::new(M, l, 1, rho).unwrap();
            let est = empirical_nmse(&set, &cov, &sc, &McOptions::new(TRIALS, SEED)).unwrap();
            let oracle = eq_single(cov.eigenvalues(), l, rho) / M as f64;
            let z = (est.mean - oracle).abs() / est.std_err;
            worst = worst.max(z);
            points += 1;
            if z > 3.0 {
                fails.push(format!("L={l} snr={snr}: z={z:.2}"));
            }
        }
    }
    (
        fails.is_empty(),
        format!(
            "{points} points, worst deviation {worst:.2} standard errors {}",
            fails.join("; ")
        ),
    )
}

fn sixteen_chain_gap() -> Outcome {
    let cov = exp64(0.8);
    let gap = db(eq_single(cov.eigenvalues(), 16, 1.0) / fd(cov.eigenvalues(), 1.0));
    (
        (gap - 0.5).abs() <= 0.25,
        format!("gap {gap:.3} dB (target 0.5 ± 0.25)"),
    )
}

fn full_dof_convergence() -> Outcome {
    let cov = exp64(0.8);
    let mut worst: f64 = 0.0;
    for snr in snr_grid(10, 20) {
        let rho = db_to_linear(snr);
        let set = design_sequential(&cov, 8, 8, rho).unwrap();
        worst = worst.max(db(mse_of(&cov, &set, rho) / fd(cov.eigenvalues(), rho)).abs());
    }
    (
        worst <= 1.0,
        format!("largest gap to fully digital at SNR >= 10 dB: {worst:.4} dB"),
    )
}

fn low_snr_crossover() -> Outcome {
    let cov = exp64(0.8);
    let mut ok = true;
    let mut parts = Vec::new();
    for snr in snr_grid(-20, -10) {
        let rho = db_to_linear(snr);
        let set = design_sequential(&cov, 8, 2, rho).unwrap();
        let (h, f) = (mse_of(&cov, &set, rho), fd(cov.eigenvalues(), rho));
        ok &= h < f;
        parts.push(format!("{snr} dB: {:+.3} dB", db(h / f)));
    }
    (
        ok,
        format!("T=2 sequential minus fully digital: {}", parts.join(", ")),
    )
}

fn method_ordering() -> Outcome {
    let cov = exp64(0.8);
    let opts = AlternatingOptions::default();
    let mut ok = true;
    let mut notes = Vec::new();
    let mut max_alt: f64 = 0.0;
    for t in [2, 4, 6, 8] {
        let mut gaps = Vec::new();
        for snr in snr_grid(-20, 20) {
            let rho = db_to_linear(snr);
            let seq = design_sequential(&cov, 8, t, rho).unwrap();
            let block = design_block_selection(&cov, 8, t).unwrap();
            let alt = design_alternating(&cov, 8, t, rho, &opts, &seq).unwrap();
            let (s, b, a) = (
                mse_of(&cov, &seq, rho),
                mse_of(&cov, &block, rho),
                mse_of(&cov, &alt, rho),
            );
            if s > b * (1.0 + 1e-12) {
                ok = false;
                notes.push(format!("T={t} {snr} dB: sequential above block"));
            }
            if a > s * (1.0 + 1e-12) {
                ok = false;
                notes.push(format!("T={t} {snr} dB: alternating above sequential"));
            }
            max_alt = max_alt.max(db(s / a).abs());
            gaps.push(db(b / s));
        }
        let (low, high) = (gaps[0], *gaps.last().unwrap());
        if low.partial_cmp(&high) != Some(std::cmp::Ordering::Greater) {
            ok = false;
        }
        notes.push(format!(
            "T={t} block gap {low:.3} dB at -20, {high:.3} dB at +20"
        ));
    }
    ok &= max_alt <= 0.1;
    notes.push(format!("max |alternating - sequential| {max_alt:.2e} dB"));
    (ok, notes.join("; "))
}

fn phase_only_loss_db(a: f64, t: usize, snr: f64) -> f64 {
    let cov = exp64(a);
    let rho = db_to_linear(snr);
    let set = design_sequential(&cov, 8, t, rho).unwrap();
    let po = set.realize(PhaseMode::PhaseOnly).unwrap();
    db(mse_of(&cov, &po, rho) / mse_of(&cov, &set, rho))
}

fn phase_only_loss() -> Outcome {
    let grid = snr_grid(-20, 20);
    let losses: Vec<f64> = grid
        .iter()
        .map(|&s| phase_only_loss_db(0.8, 8, s))
        .collect();
    let (lo, hi) = (losses[0], *losses.last().unwrap());
    let monotone = losses.windows(2).all(|w| w[0] < w[1]);
    let fig_b = phase_only_loss_db(0.9, 6, 20.0);
    let ok = (hi - 1.5).abs() <= 0.5 && lo <= 0.2 && monotone && (fig_b - 0.7).abs() <= 0.4;
    (
        ok,
        format!(
            "T=8 a=0.8: {hi:.3} dB at 20 dB, {lo:.3} dB at -20 dB, monotone={monotone}; T=6 a=0.9 at 20 dB: {fig_b:.3} dB"
        ),
    )
}

fn correlation_monotonicity() -> Outcome {
    let alphas = [0.0, 0.2, 0.4, 0.6, 0.8, 0.9];
    let spectra: Vec<Vec<f64>> = alphas
        .iter()
        .map(|&a| exp64(a).eigenvalues().to_vec())
        .collect();
    let mut checked = 0;
    let mut bad = 0;
    for l in 1..=M {
        for snr in snr_grid(-20, 20) {
            let rho = db_to_linear(snr);
            let v: Vec<f64> = spectra
                .iter()
                .map(|s| analytic_mse_single_optimal(s, l, rho).unwrap())
                .collect();
            for w in v.windows(2) {
                checked += 1;
                if w[1] > w[0] + 1e-12 {
                    bad += 1;
                }
            }
        }
    }
    (
        bad == 0,
        format!("{checked} adjacent pairs, {bad} increases"),
    )
}

fn chain_and_power_monotonicity() -> Outcome {
    let mut bad = Vec::new();
    let grid = snr_grid(-20, 20);
    for a in [0.0, 0.2, 0.4, 0.6, 0.8, 0.9] {
        let lambdas = exp64(a).eigenvalues().to_vec();
        for &snr in &grid {
            let rho = db_to_linear(snr);
            let by_l: Vec<f64> = (1..=M)
                .map(|l| analytic_mse_single_optimal(&lambdas, l, rho).unwrap())
                .collect();
            if !by_l.windows(2).all(|w| w[1] < w[0]) {
                bad.push(format!("a={a} snr={snr}: not strictly decreasing in L"));
            }
        }
        for l in 1..=M {
            let by_rho: Vec<f64> = grid
                .iter()
                .map(|&s| analytic_mse_single_optimal(&lambdas, l, db_to_linear(s)).unwrap())
                .collect();
            if !by_rho.windows(2).all(|w| w[1] < w[0]) {
                bad.push(format!("a={a} L={l}: not strictly decreasing in rho"));
            }
        }
    }
    (
        bad.is_empty(),
        if bad.is_empty() {
            "all strict".to_string()
        } else {
            bad.join("; ")
        },
    )
}

/// Every assignment of an `L`-subset per training, minimizing
/// `Σ λ_i / (1 + ρ c_i λ_i)` with `c_i` the number of selections of `i`.
fn brute_force(lambdas: &[f64], l: usize, t: usize, rho: f64) -> f64 {
    let m = lambdas.len();
    let subsets: Vec<Vec<usize>> = (0u32..(1 << m))
        .filter(|s| s.count_ones() as usize == l)
        .map(|s| (0..m).filter(|i| s & (1 << i) != 0).collect())
        .collect();
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; t];
    loop {
        let mut counts = vec![0usize; m];
        for &k in &idx {
            for &i in &subsets[k] {
                counts[i] += 1;
            }
        }
        let mse: f64 = lambdas
            .iter()
            .zip(&counts)
            .map(|(&v, &c)| v / (1.0 + rho * c as f64 * v))
            .sum();
        best = best.min(mse);
        let mut pos = 0;
        loop {
            if pos == t {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] < subsets.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn toy_global_optimality() -> Outcome {
    let opts = AlternatingOptions::default();
    let (mut cells, mut seq_hits, mut alt_fail) = (0, 0, 0);
    let mut worst_seq: f64 = 0.0;
    let mut worst_alt: f64 = 0.0;
    for m in 1..=6 {
        for l in 1..=2.min(m) {
            for t in 1..=2 {
                for a in [0.3, 0.5, 0.8] {
                    let cov = exp_covariance(m, a).unwrap();
                    for rho in [0.1, 1.0, 10.0] {
                        let best = brute_force(cov.eigenvalues(), l, t, rho);
                        let seq = design_sequential(&cov, l, t, rho).unwrap();
                        let alt = design_alternating(&cov, l, t, rho, &opts, &seq).unwrap();
                        let (s, al) = (mse_of(&cov, &seq, rho), mse_of(&cov, &alt, rho));
                        cells += 1;
                        if (al - best).abs() > 1e-6 {
                            alt_fail += 1;
                        }
                        worst_alt = worst_alt.max((al - best).abs());
                        if (s - best).abs() <= 1e-6 {
                            seq_hits += 1;
                        }
                        worst_seq = worst_seq.max(s / best - 1.0);
                    }
                }
            }
        }
    }
    let ratio = seq_hits as f64 / cells as f64;
    let ok = alt_fail == 0 && ratio >= 0.9 && worst_seq <= 0.05;
    (
        ok,
        format!(
            "{cells} cells; alternating off by at most {worst_alt:.1e}; sequential optimal in {seq_hits}/{cells}, worst excess {:.3}%",
            100.0 * worst_seq
        ),
    )
}

fn grq_lemma() -> Outcome {
    let mut rng = stream(SEED, 0, 0, Purpose::Design);
    let mut worst_subset: f64 = 0.0;
    let mut bound_violations = 0;
    let mut v_count = 0;
    for m in 2..=6 {
        for _ in 0..10 {
            let x = complex_gaussian_matrix(&mut rng, m, m);
            let y = complex_gaussian_matrix(&mut rng, m, m);
            let a = HermitianMatrix::hermitian_part(&(&x + x.adjoint()));
            let b = HermitianMatrix::hermitian_part(
                &(&y * y.adjoint()
                    + nalgebra::DMatrix::identity(m, m) * hybrid_est::C64::new(0.1, 0.0)),
            );
            let pencil = gen_eigh_pencil(&a, &b).unwrap();
            for mask in 1u32..(1 << m) {
                let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
                let v = pencil.select_columns(&idx);
                let want: f64 = idx.iter().map(|&i| pencil.values[i]).sum();
                let got = block_grq(&v, &a, &b).unwrap();
                worst_subset = worst_subset.max((got - want).abs() / want.abs().max(1.0));
            }
            for _ in 0..20 {
                let l = 1 + v_count % m;
                v_count += 1;
                let v = orthonormalize_columns(&complex_gaussian_matrix(&mut rng, m, l)).unwrap();
                let q = block_grq(&v, &a, &b).unwrap();
                let upper: f64 = pencil.values[..l].iter().sum();
                let lower: f64 = pencil.values[m - l..].iter().sum();
                let tol = 1e-9 * upper.abs().max(lower.abs()).max(1.0);
                if q > upper + tol || q < lower - tol {
                    bound_violations += 1;
                }
            }
        }
    }
    let ok = worst_subset <= 1e-9 && bound_violations == 0 && v_count >= 1000;
    (
        ok,
        format!("subset GRQ error {worst_subset:.1e}; {v_count} random V, {bound_violations} bound violations"),
    )
}

fn se_config(t: usize) -> SweepConfig {
    let mut cfg = SweepConfig::new(M, 8, vec![10.0]);
    cfg.t = t;
    cfg.k = 8;
    cfg.a = 0.8;
    cfg.trials = TRIALS;
    cfg.seed = SEED;
    cfg.methods = vec![MethodSpec::Design(DesignMethod::Sequential)];
    cfg.phase_mode = PhaseMode::PhaseOnly;
    cfg
}

fn run_se(cfg: &SweepConfig) -> Vec<SweepRecord> {
    let rows = run_se_sweep(cfg, &RunOptions::default()).unwrap();
    for r in &rows {
        assert!(r.status == "ok", "row failed: {r:?}");
    }
    rows
}

fn covariance_pipeline() -> Outcome {
    let truth_cfg = se_config(8);
    let est_cfg = SweepConfig {
        n_c: 300,
        ..truth_cfg.clone()
    };
    let (t, e) = (&run_se(&truth_cfg)[0], &run_se(&est_cfg)[0]);
    let (se_t, se_e) = (t.se_bits_per_hz.unwrap(), e.se_bits_per_hz.unwrap());
    let se_rel = (se_t - se_e).abs() / se_t;
    let nmse_gap = e.nmse_db.unwrap() - t.nmse_db.unwrap();
    let ok = se_rel <= 0.05 && nmse_gap <= 0.5;
    (
        ok,
        format!(
            "SE {se_e:.3} vs {se_t:.3} bits/s/Hz ({:.2}% apart, limit 5%); NMSE gap {nmse_gap:.3} dB (limit 0.5 dB)",
            100.0 * se_rel
        ),
    )
}

fn quantization_ordering() -> Outcome {
    let grid = snr_grid(-10, 20);
    let mut curves = Vec::new();
    for bits in [2, 3, 4, 0] {
        let mut cfg = se_config(8);
        cfg.snr_db = grid.clone();
        if bits > 0 {
            cfg.phase_mode = PhaseMode::Quantized(bits);
        }
        curves.push(
            run_se(&cfg)
                .iter()
                .map(|r| r.se_bits_per_hz.unwrap())
                .collect::<Vec<f64>>(),
        );
    }
    let mut ok = true;
    let mut notes = Vec::new();
    for (p, snr) in grid.iter().enumerate() {
        let (q2, q3, q4, qi) = (curves[0][p], curves[1][p], curves[2][p], curves[3][p]);
        ok &= q2 < q3 && q3 <= q4 && q4 <= qi;
        notes.push(format!("{snr} dB: {q2:.2} < {q3:.2} <= {q4:.2} <= {qi:.2}"));
    }
    (ok, notes.join("; "))
}

fn ray_model() -> Outcome {
    let mut cfg = se_config(6);
    cfg.model = CovarianceModel::Ray;
    cfg.ray_paths = 6;
    cfg.ray_spread_deg = 10.0;
    cfg.snr_db = snr_grid(-10, 10);
    cfg.pilot_snr_db = Some(20.0);
    cfg.n_c = 1000;
    cfg.phase_mode = PhaseMode::Quantized(3);
    let mut ok = true;
    let mut notes = Vec::new();
    for r in run_se(&cfg) {
        let ratio = r.se_bits_per_hz.unwrap() / r.se_perfect_bits_per_hz.unwrap();
        ok &= ratio >= 0.95;
        notes.push(format!("{} dB: {:.3}", r.snr_db, ratio));
    }
    (ok, format!("estimated/perfect SE: {}", notes.join(", ")))
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("closed-form accuracy", closed_form_accuracy),
        ("16-chain gap", sixteen_chain_gap),
        ("full-DoF convergence", full_dof_convergence),
        ("low-SNR crossover", low_snr_crossover),
        ("method ordering", method_ordering),
        ("phase-only loss", phase_only_loss),
        ("correlation monotonicity", correlation_monotonicity),
        (
            "RF-chain and power monotonicity",
            chain_and_power_monotonicity,
        ),
        ("toy-scale global optimality", toy_global_optimality),
        ("GRQ lemma", grq_lemma),
        ("covariance pipeline", covariance_pipeline),
        ("quantization ordering", quantization_ordering),
        ("ray-model experiment", ray_model),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<32} {}  [{:.1}s] {}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
