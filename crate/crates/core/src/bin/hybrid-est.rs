use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hybrid_est::exec::{with_threads, Execution};
use hybrid_est::harness::{
    run_covest, run_design, run_mse_sweep, run_se_sweep, write_covest_csv, write_design_csv,
    write_sweep_csv, RunOptions, SweepConfig,
};
use hybrid_est::Error;

#[derive(Parser)]
#[command(
    name = "hybrid-est",
    version,
    about = "Hybrid analog/digital channel estimation sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NMSE versus SNR for each design method.
    MseSweep(Common),
    /// Downlink sum spectral efficiency with estimated and perfect CSI.
    SeSweep(Common),
    /// Covariance estimation error after each coherence interval.
    Covest(Common),
    /// Dump the designed combiners of one method.
    Design(Common),
}

#[derive(Args)]
struct Common {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 picks automatically.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Run trials on the calling thread only.
    #[arg(long)]
    sequential: bool,
    /// Fill the wall_ms column.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    overrides: Overrides,
}

/// Per-key overrides; they win over values from `--config`.
#[derive(Args)]
struct Overrides {
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "ray_paths", alias = "ray-paths")]
    ray_paths: Option<String>,
    #[arg(
        long = "ray_spread_deg",
        alias = "ray-spread-deg",
        allow_hyphen_values = true
    )]
    ray_spread_deg: Option<String>,
    #[arg(
        long = "ray_mean_deg",
        alias = "ray-mean-deg",
        allow_hyphen_values = true
    )]
    ray_mean_deg: Option<String>,
    #[arg(long = "snr_db", alias = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    #[arg(
        long = "pilot_snr_db",
        visible_alias = "rho_db",
        alias = "pilot-snr-db",
        allow_hyphen_values = true
    )]
    pilot_snr_db: Option<String>,
    #[arg(long)]
    methods: Option<String>,
    #[arg(long = "phase_mode", alias = "phase-mode")]
    phase_mode: Option<String>,
    #[arg(long = "quant_bits", alias = "quant-bits")]
    quant_bits: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long = "n_c", alias = "n-c")]
    n_c: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long = "max_iter", alias = "max-iter")]
    max_iter: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, String)> {
        let all = [
            ("m", &self.m),
            ("l", &self.l),
            ("t", &self.t),
            ("k", &self.k),
            ("a", &self.a),
            ("model", &self.model),
            ("ray_paths", &self.ray_paths),
            ("ray_spread_deg", &self.ray_spread_deg),
            ("ray_mean_deg", &self.ray_mean_deg),
            ("snr_db", &self.snr_db),
            ("pilot_snr_db", &self.pilot_snr_db),
            ("methods", &self.methods),
            ("phase_mode", &self.phase_mode),
            ("quant_bits", &self.quant_bits),
            ("trials", &self.trials),
            ("n_c", &self.n_c),
            ("epsilon", &self.epsilon),
            ("max_iter", &self.max_iter),
            ("seed", &self.seed),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::Io(_) | Error::Csv(_) => 1,
        _ => 3,
    }
}

fn run(cli: Cli) -> hybrid_est::Result<()> {
    let (kind, common) = match &cli.command {
        Command::MseSweep(c) => ("mse", c),
        Command::SeSweep(c) => ("se", c),
        Command::Covest(c) => ("covest", c),
        Command::Design(c) => ("design", c),
    };
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Config {
            field: "config".into(),
            message: format!("{}: {e}", path.display()),
        })?,
        None => String::new(),
    };
    let cfg = SweepConfig::parse(&text, &common.overrides.pairs())?;
    let opts = RunOptions {
        exec: if common.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        timing: common.timing,
    };

    let mut buf = Vec::new();
    with_threads(common.threads, || -> hybrid_est::Result<()> {
        match kind {
            "mse" => write_sweep_csv(&mut buf, &run_mse_sweep(&cfg, &opts)?),
            "se" => write_sweep_csv(&mut buf, &run_se_sweep(&cfg, &opts)?),
            "covest" => write_covest_csv(&mut buf, &run_covest(&cfg, &opts)?),
            _ => write_design_csv(&mut buf, &run_design(&cfg, &opts)?),
        }
    })?;

    match &common.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(&buf)?;
            f.flush()?;
        }
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}
