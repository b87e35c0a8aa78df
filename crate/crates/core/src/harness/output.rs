//! CSV emission.

use std::io::Write;

use crate::harness::sweep::{DesignDump, SweepRecord};
use crate::Result;

pub const SWEEP_COLUMNS: &[&str] = &[
    "method",
    "phase_mode",
    "quant_bits",
    "m",
    "l",
    "t",
    "k",
    "a",
    "snr_db",
    "trials",
    "nmse_db",
    "nmse_db_analytic",
    "std_err_db",
    "se_bits_per_hz",
    "se_perfect_bits_per_hz",
    "iters",
    "status",
    "wall_ms",
];

/// Renders `x` with 9 significant digits, `%g` style: plain notation for
/// decimal exponents in `[-5, 9)`, scientific otherwise, trailing zeros
/// dropped.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.phase_mode.clone(),
            r.quant_bits.to_string(),
            r.m.to_string(),
            r.l.to_string(),
            r.t.to_string(),
            opt(r.k, |v| v.to_string()),
            opt(r.a, format_number),
            format_number(r.snr_db),
            r.trials.to_string(),
            opt(r.nmse_db, format_number),
            opt(r.nmse_db_analytic, format_number),
            opt(r.std_err_db, format_number),
            opt(r.se_bits_per_hz, format_number),
            opt(r.se_perfect_bits_per_hz, format_number),
            opt(r.iters, |v| v.to_string()),
            r.status.clone(),
            opt(r.wall_ms, format_number),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata as `# key=value` lines, then `t,i,j,re,im` rows (zero-based)
/// for every combiner entry.
pub fn write_design_csv<W: Write>(mut out: W, dump: &DesignDump) -> Result<()> {
    let set = &dump.design.set;
    writeln!(out, "# method={}", dump.method)?;
    writeln!(out, "# phase_mode={}", dump.design.phase_mode.name())?;
    writeln!(out, "# quant_bits={}", dump.design.phase_mode.quant_bits())?;
    writeln!(out, "# snr_db={}", format_number(dump.snr_db))?;
    writeln!(
        out,
        "# m={} l={} t={}",
        set.antennas(),
        set.rf_chains(),
        set.trainings()
    )?;
    if let Some(mse) = set.mse_predicted {
        writeln!(out, "# mse_predicted={}", format_number(mse))?;
    }
    if let Some(it) = dump.design.iters {
        writeln!(out, "# iters={it} truncated={}", dump.design.truncated)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "i", "j", "re", "im"])?;
    for (t, c) in set.combiners.iter().enumerate() {
        let e = c.entries();
        for i in 0..e.nrows() {
            for j in 0..e.ncols() {
                let z = e[(i, j)];
                w.write_record([
                    t.to_string(),
                    i.to_string(),
                    j.to_string(),
                    format_number(z.re),
                    format_number(z.im),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_covest_csv<W: Write>(out: W, trajectory: &[(usize, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["interval", "rel_frob_error"])?;
    for &(n, e) in trajectory {
        w.write_record([n.to_string(), format_number(e)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-20.0), "-20");
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265");
        assert_eq!(format_number(-12.3456789012), "-12.3456789");
        assert_eq!(format_number(123456789.4), "123456789");
        assert_eq!(format_number(1234567890.0), "1.23456789e9");
        assert_eq!(format_number(0.000123456789123), "0.000123456789");
        assert_eq!(format_number(1.5e-7), "1.5e-7");
        assert_eq!(format_number(9.9999999999), "10");
        assert_eq!(format_number(999999999.9), "1e9");
    }

    #[test]
    fn empty_cells_for_missing_values() {
        let row = SweepRecord {
            method: "sequential".into(),
            phase_mode: "unconstrained".into(),
            quant_bits: 0,
            m: 8,
            l: 2,
            t: 2,
            k: None,
            a: Some(0.8),
            snr_db: -10.0,
            trials: 5,
            nmse_db: Some(-3.5),
            nmse_db_analytic: Some(-3.25),
            std_err_db: Some(0.01),
            se_bits_per_hz: None,
            se_perfect_bits_per_hz: None,
            iters: None,
            status: "ok".into(),
            wall_ms: None,
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_COLUMNS.join(","));
        assert_eq!(
            lines[1],
            "sequential,unconstrained,0,8,2,2,,0.8,-10,5,-3.5,-3.25,0.01,,,,ok,"
        );
    }

    #[test]
    fn covest_csv() {
        let mut buf = Vec::new();
        write_covest_csv(&mut buf, &[(1, 0.5), (2, 0.25)]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "interval,rel_frob_error\n1,0.5\n2,0.25\n"
        );
    }
}
