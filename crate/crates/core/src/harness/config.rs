//! Sweep configuration: a flat `key = value` text format plus overrides.
//!
//! ```text
//! # comments and blank lines are ignored
//! m = 64
//! l = 8
//! t = 8
//! snr_db = -20, -10, 0, 10, 20
//! methods = sequential, block_selection
//! ```

use std::fmt;
use std::str::FromStr;

use crate::combiner::{AlternatingOptions, DesignMethod, PhaseMode};
use crate::{Error, Result};

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "m",
    "l",
    "t",
    "k",
    "a",
    "model",
    "ray_paths",
    "ray_spread_deg",
    "ray_mean_deg",
    "snr_db",
    "pilot_snr_db",
    "methods",
    "phase_mode",
    "quant_bits",
    "trials",
    "n_c",
    "epsilon",
    "max_iter",
    "seed",
];

/// Keys with no default.
const REQUIRED: &[&str] = &["m", "l", "snr_db"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceModel {
    Exponential,
    Ray,
}

impl CovarianceModel {
    pub fn name(&self) -> &'static str {
        match self {
            CovarianceModel::Exponential => "exp",
            CovarianceModel::Ray => "ray",
        }
    }
}

/// A method column entry: a combiner design or the fully-digital reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    Design(DesignMethod),
    FullyDigital,
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Design(d) => d.name(),
            MethodSpec::FullyDigital => "fully_digital",
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "fully_digital" {
            return Ok(MethodSpec::FullyDigital);
        }
        s.parse().map(MethodSpec::Design)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub m: usize,
    pub l: usize,
    pub t: usize,
    /// Users (spectral-efficiency sweeps only).
    pub k: usize,
    pub a: f64,
    pub model: CovarianceModel,
    pub ray_paths: usize,
    pub ray_spread_deg: f64,
    pub ray_mean_deg: f64,
    pub snr_db: Vec<f64>,
    /// Pilot SNR for training and covariance estimation; `None` trains at
    /// each row's `snr_db`.
    pub pilot_snr_db: Option<f64>,
    pub methods: Vec<MethodSpec>,
    pub phase_mode: PhaseMode,
    pub trials: usize,
    /// Coherence intervals for covariance estimation; 0 uses the true `R`.
    pub n_c: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl SweepConfig {
    /// Defaults for everything except the required keys.
    pub fn new(m: usize, l: usize, snr_db: Vec<f64>) -> Self {
        let alt = AlternatingOptions::default();
        SweepConfig {
            m,
            l,
            t: 1,
            k: 1,
            a: 0.8,
            model: CovarianceModel::Exponential,
            ray_paths: 6,
            ray_spread_deg: 10.0,
            ray_mean_deg: 0.0,
            snr_db,
            pilot_snr_db: None,
            methods: vec![MethodSpec::Design(DesignMethod::Sequential)],
            phase_mode: PhaseMode::Unconstrained,
            trials: 10_000,
            n_c: 0,
            epsilon: alt.epsilon,
            max_iter: alt.max_iter,
            seed: 1,
        }
    }

    /// Parses file text, then applies `overrides` (which replace file values).
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut entries = parse_pairs(text)?;
        for (key, value) in overrides {
            check_key(key)?;
            match entries.iter_mut().find(|(k, _)| k == key) {
                Some(slot) => slot.1 = value.clone(),
                None => entries.push((key.clone(), value.clone())),
            }
        }
        Self::from_pairs(&entries)
    }

    /// Builds a config from distinct `(key, value)` pairs.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        for (i, (key, _)) in pairs.iter().enumerate() {
            check_key(key)?;
            if pairs[..i].iter().any(|(k, _)| k == key) {
                return Err(Error::config(key, "duplicate key"));
            }
        }
        let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.trim());
        for key in REQUIRED {
            if get(key).is_none() {
                return Err(Error::config(*key, "required key missing"));
            }
        }
        let mut cfg = SweepConfig::new(
            number(get("m").unwrap_or_default(), "m")?,
            number(get("l").unwrap_or_default(), "l")?,
            list(get("snr_db").unwrap_or_default(), "snr_db")?,
        );
        if let Some(v) = get("t") {
            cfg.t = number(v, "t")?;
        }
        if let Some(v) = get("k") {
            cfg.k = number(v, "k")?;
        }
        if let Some(v) = get("a") {
            cfg.a = number(v, "a")?;
        }
        if let Some(v) = get("model") {
            cfg.model = match v {
                "exp" => CovarianceModel::Exponential,
                "ray" => CovarianceModel::Ray,
                other => {
                    return Err(Error::config(
                        "model",
                        format!("expected exp or ray, got `{other}`"),
                    ))
                }
            };
        }
        if let Some(v) = get("ray_paths") {
            cfg.ray_paths = number(v, "ray_paths")?;
        }
        if let Some(v) = get("ray_spread_deg") {
            cfg.ray_spread_deg = number(v, "ray_spread_deg")?;
        }
        if let Some(v) = get("ray_mean_deg") {
            cfg.ray_mean_deg = number(v, "ray_mean_deg")?;
        }
        if let Some(v) = get("pilot_snr_db") {
            cfg.pilot_snr_db = Some(number(v, "pilot_snr_db")?);
        }
        if let Some(v) = get("methods") {
            cfg.methods = v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<MethodSpec>()
                        .map_err(|e| Error::config("methods", e.to_string()))
                })
                .collect::<Result<_>>()?;
        }
        let phase_only = match get("phase_mode") {
            None | Some("unconstrained") => false,
            Some("phase_only") => true,
            Some(other) => {
                return Err(Error::config(
                    "phase_mode",
                    format!("expected unconstrained or phase_only, got `{other}`"),
                ))
            }
        };
        let bits: u32 = match get("quant_bits") {
            Some(v) => number(v, "quant_bits")?,
            None => 0,
        };
        cfg.phase_mode = match (phase_only, bits) {
            (false, 0) => PhaseMode::Unconstrained,
            (true, 0) => PhaseMode::PhaseOnly,
            (true, b) => PhaseMode::Quantized(b),
            (false, _) => {
                return Err(Error::config(
                    "quant_bits",
                    "quantization requires phase_mode = phase_only",
                ))
            }
        };
        if let Some(v) = get("trials") {
            cfg.trials = number(v, "trials")?;
        }
        if let Some(v) = get("n_c") {
            cfg.n_c = number(v, "n_c")?;
        }
        if let Some(v) = get("epsilon") {
            cfg.epsilon = number(v, "epsilon")?;
        }
        if let Some(v) = get("max_iter") {
            cfg.max_iter = number(v, "max_iter")?;
        }
        if let Some(v) = get("seed") {
            cfg.seed = number(v, "seed")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks cross-field constraints common to every subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("m", "must be at least 1"));
        }
        if self.l == 0 || self.l > self.m {
            return Err(Error::config(
                "l",
                format!("need 1 <= l <= m, got l={} with m={}", self.l, self.m),
            ));
        }
        if self.t == 0 {
            return Err(Error::config("t", "must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.a) {
            return Err(Error::config(
                "a",
                format!("must lie in [0, 1), got {}", self.a),
            ));
        }
        if self.ray_paths == 0 {
            return Err(Error::config("ray_paths", "must be at least 1"));
        }
        if !(self.ray_spread_deg >= 0.0) || !self.ray_spread_deg.is_finite() {
            return Err(Error::config(
                "ray_spread_deg",
                "must be finite and non-negative",
            ));
        }
        if !self.ray_mean_deg.is_finite() {
            return Err(Error::config("ray_mean_deg", "must be finite"));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config(
                "snr_db",
                "need a non-empty list of finite values",
            ));
        }
        if matches!(self.pilot_snr_db, Some(v) if !v.is_finite()) {
            return Err(Error::config("pilot_snr_db", "must be finite"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "need at least one method"));
        }
        if let PhaseMode::Quantized(b) = self.phase_mode {
            if b > 16 {
                return Err(Error::config(
                    "quant_bits",
                    format!("at most 16 bits supported, got {b}"),
                ));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter", "must be at least 1"));
        }
        if self
            .methods
            .contains(&MethodSpec::Design(DesignMethod::BlockSelection))
            && self.t * self.l > self.m
        {
            return Err(Error::config(
                "t",
                format!(
                    "block_selection needs t*l <= m, got t={} l={} m={}",
                    self.t, self.l, self.m
                ),
            ));
        }
        if self.n_c > 0 && !self.m.is_multiple_of(self.l) {
            return Err(Error::config(
                "l",
                format!(
                    "covariance estimation needs l to divide m, got l={} m={}",
                    self.l, self.m
                ),
            ));
        }
        Ok(())
    }

    pub fn alternating_options(&self) -> AlternatingOptions {
        AlternatingOptions {
            epsilon: self.epsilon,
            max_iter: self.max_iter,
        }
    }
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::config(key, "unknown key"))
    }
}

/// Splits config text into `(key, value)` pairs, rejecting unknown and
/// repeated keys.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut lines: Vec<usize> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", idx + 1), "expected `key = value`"))?;
        let key = key.trim().to_string();
        check_key(&key)?;
        if let Some(pos) = out.iter().position(|(k, _)| *k == key) {
            return Err(Error::config(
                key,
                format!("duplicate key (lines {} and {})", lines[pos] + 1, idx + 1),
            ));
        }
        out.push((key, value.trim().to_string()));
        lines.push(idx);
    }
    Ok(out)
}

fn number<T: FromStr>(v: &str, field: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{}`", v.trim())))
}

fn list(v: &str, field: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| number(s, field)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = SweepConfig::parse("m = 64\nl = 8\nt = 8\na = 0.8\nsnr_db = -20, 0, 20\n", &[])
            .unwrap();
        assert_eq!((cfg.m, cfg.l, cfg.t, cfg.k), (64, 8, 8, 1));
        assert_eq!(cfg.snr_db, vec![-20.0, 0.0, 20.0]);
        assert_eq!(cfg.trials, 10_000);
        assert_eq!(cfg.epsilon, 1e-8);
        assert_eq!(cfg.max_iter, 100);
        assert_eq!(cfg.phase_mode, PhaseMode::Unconstrained);
        assert_eq!(cfg.model, CovarianceModel::Exponential);
    }

    #[test]
    fn l_above_m_names_field() {
        let e = SweepConfig::parse("m = 4\nl = 8\nsnr_db = 0\n", &[]).unwrap_err();
        assert_eq!(field_of(e), "l");
    }

    #[test]
    fn duplicate_and_unknown_keys() {
        let e = SweepConfig::parse("m = 4\nm = 4\nl = 2\nsnr_db = 0\n", &[]).unwrap_err();
        assert_eq!(field_of(e), "m");
        let e = SweepConfig::parse("m = 4\nl = 2\nsnr_db = 0\nfoo = 1\n", &[]).unwrap_err();
        assert_eq!(field_of(e), "foo");
        let e = SweepConfig::parse("m = 4\nl = 2\n", &[]).unwrap_err();
        assert_eq!(field_of(e), "snr_db");
    }

    #[test]
    fn overrides_replace_file_values() {
        let o = vec![
            ("l".to_string(), "4".to_string()),
            ("trials".to_string(), "7".to_string()),
        ];
        let cfg = SweepConfig::parse("m = 8\nl = 2\nsnr_db = 0\n", &o).unwrap();
        assert_eq!((cfg.l, cfg.trials), (4, 7));
        let bad = vec![("bogus".to_string(), "1".to_string())];
        assert!(SweepConfig::parse("m = 8\nl = 2\nsnr_db = 0\n", &bad).is_err());
    }

    #[test]
    fn phase_mode_and_methods() {
        let cfg = SweepConfig::parse(
            "m=8\nl=2\nt=2\nsnr_db=0\nphase_mode=phase_only\nquant_bits=3\nmethods=sequential,fully_digital,dft_random\n",
            &[],
        )
        .unwrap();
        assert_eq!(cfg.phase_mode, PhaseMode::Quantized(3));
        assert_eq!(cfg.methods[1], MethodSpec::FullyDigital);
        let e = SweepConfig::parse("m=8\nl=2\nsnr_db=0\nquant_bits=3\n", &[]).unwrap_err();
        assert_eq!(field_of(e), "quant_bits");
        let e = SweepConfig::parse("m=8\nl=2\nsnr_db=0\nmethods=greedy\n", &[]).unwrap_err();
        assert_eq!(field_of(e), "methods");
        let e = SweepConfig::parse("m=8\nl=4\nt=3\nsnr_db=0\nmethods=block_selection\n", &[])
            .unwrap_err();
        assert_eq!(field_of(e), "t");
        let e = SweepConfig::parse("m=8\nl=3\nsnr_db=0\nn_c=10\n", &[]).unwrap_err();
        assert_eq!(field_of(e), "l");
    }

    #[test]
    fn malformed_values() {
        for text in [
            "m=x\nl=1\nsnr_db=0",
            "m=4\nl=1\nsnr_db=0,,1",
            "m=4\nl=1\nsnr_db=0\na=1.0",
            "m=4\nl=1\nsnr_db=0\ntrials=0",
            "m=4\nl",
        ] {
            assert!(
                SweepConfig::parse(text, &[]).unwrap_err().is_config(),
                "{text}"
            );
        }
    }
}
