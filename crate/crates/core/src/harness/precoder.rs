//! Downlink hybrid precoding used to turn channel estimates into spectral
//! efficiency.
//!
//! The user `k` receives `h_k^H x` with `x = F_RF W_BB s`. Analog columns
//! follow the phases of the estimated channels (equal-gain beams), the
//! remaining `L − K` columns are DFT beams, and the baseband zero-forces the
//! effective `K x L` channel.

use crate::combiner::quantize_matrix;
use crate::numerics::{hpd_cholesky, CMat, C64};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct HybridPrecoder {
    /// `M x L`, unit-modulus entries.
    pub analog: CMat,
    /// `L x K`.
    pub baseband: CMat,
    /// Set when the effective channel was too ill-conditioned for exact
    /// zero-forcing and a diagonal load was added.
    pub regularized: bool,
}

impl HybridPrecoder {
    /// `F_RF W_BB`, column `k` precodes user `k`.
    pub fn composite(&self) -> CMat {
        &self.analog * &self.baseband
    }
}

/// Builds the phase-steered zero-forcing precoder from `M x K` channel
/// estimates. With `quant_bits = Some(b)` the analog phases are snapped to
/// the `2^b`-level grid.
pub fn phased_zf_precoder(
    h_hat: &CMat,
    l: usize,
    quant_bits: Option<u32>,
) -> Result<HybridPrecoder> {
    let (m, k) = h_hat.shape();
    if k == 0 || k > l || l > m {
        return Err(Error::Dimension(format!(
            "need 1 <= K <= L <= M, got K={k}, L={l}, M={m}"
        )));
    }
    let mut analog = CMat::zeros(m, l);
    for j in 0..l {
        for i in 0..m {
            analog[(i, j)] = if j < k {
                let z = h_hat[(i, j)];
                if z.norm() == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::from_polar(1.0, z.arg())
                }
            } else {
                C64::from_polar(
                    1.0,
                    -2.0 * std::f64::consts::PI * ((i * j) % m) as f64 / m as f64,
                )
            };
        }
    }
    if let Some(bits) = quant_bits {
        if bits == 0 {
            return Err(Error::Domain("quantization needs at least one bit".into()));
        }
        analog = quantize_matrix(&analog, bits);
    }

    let h_eff = h_hat.adjoint() * &analog;
    let gram = &h_eff * h_eff.adjoint();
    let (chol, regularized) = match hpd_cholesky(&gram, "effective channel Gram matrix") {
        Ok(c) if well_conditioned(&c.l()) => (c, false),
        _ => {
            let load = 1e-9 * (gram.trace().re / k as f64).max(f64::MIN_POSITIVE);
            let loaded = &gram + CMat::identity(k, k) * C64::new(load, 0.0);
            (
                hpd_cholesky(&loaded, "regularized effective channel Gram matrix")?,
                true,
            )
        }
    };
    let mut baseband = h_eff.adjoint() * chol.inverse();
    let norm = (&analog * &baseband).norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::NumericalFailure("precoder has no power".into()));
    }
    baseband /= C64::new(norm, 0.0);
    Ok(HybridPrecoder {
        analog,
        baseband,
        regularized,
    })
}

/// Pivot ratio of a Cholesky factor, a cheap proxy for the condition number
/// of the factored matrix.
fn well_conditioned(l: &CMat) -> bool {
    let d: Vec<f64> = l.diagonal().iter().map(|z| z.re).collect();
    let hi = d.iter().cloned().fold(0.0, f64::max);
    let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
    lo * lo > 1e-12 * hi * hi
}

/// Single-user unit-norm beam along `h`.
pub fn matched_filter(h: &CMat) -> Result<CMat> {
    let n = h.norm();
    if h.ncols() != 1 || n == 0.0 {
        return Err(Error::Domain(
            "matched filter needs one non-zero channel".into(),
        ));
    }
    Ok(h / C64::new(n, 0.0))
}

/// `Σ_k log2(1 + ρ |h_k^H p_k|² / (1 + ρ Σ_{j≠k} |h_k^H p_j|²))`.
pub fn sum_spectral_efficiency(h_true: &CMat, precoder: &CMat, rho: f64) -> Result<f64> {
    if h_true.nrows() != precoder.nrows() || h_true.ncols() != precoder.ncols() {
        return Err(Error::Dimension(format!(
            "channels {}x{} vs precoder {}x{}",
            h_true.nrows(),
            h_true.ncols(),
            precoder.nrows(),
            precoder.ncols()
        )));
    }
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!(
            "SNR must be non-negative, got {rho}"
        )));
    }
    let gains = h_true.adjoint() * precoder;
    let k = gains.nrows();
    let mut total = 0.0;
    for u in 0..k {
        let signal = gains[(u, u)].norm_sqr();
        let interference: f64 = (0..k)
            .filter(|&j| j != u)
            .map(|j| gains[(u, j)].norm_sqr())
            .sum();
        total += (1.0 + rho * signal / (1.0 + rho * interference)).log2();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian_matrix, stream, Purpose};
    use approx::assert_relative_eq;

    #[test]
    fn single_user_equal_gain() {
        let mut rng = stream(1, 0, 0, Purpose::Channel);
        let h = complex_gaussian_matrix(&mut rng, 16, 1);
        let p = phased_zf_precoder(&h, 1, None).unwrap();
        let rho = 3.0;
        let gain = (h.adjoint() * p.composite())[(0, 0)].norm_sqr() * rho;
        let sum_abs: f64 = h.iter().map(|z| z.norm()).sum();
        assert_relative_eq!(gain, rho * sum_abs * sum_abs / 16.0, max_relative = 1e-10);
        assert!(!p.regularized);
    }

    #[test]
    fn full_rank_zero_forcing() {
        let mut rng = stream(2, 0, 0, Purpose::Channel);
        let h = complex_gaussian_matrix(&mut rng, 8, 4);
        let p = phased_zf_precoder(&h, 8, None).unwrap();
        let g = h.adjoint() * p.composite();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(g[(i, j)].norm() < 1e-9);
                }
            }
        }
        let p4 = phased_zf_precoder(&h, 4, None).unwrap();
        let g4 = h.adjoint() * p4.composite();
        assert!(g4[(0, 1)].norm() < 1e-9);
    }

    #[test]
    fn power_is_normalized() {
        for seed in 0..10 {
            let mut rng = stream(seed, 0, 0, Purpose::Channel);
            let h = complex_gaussian_matrix(&mut rng, 16, 3);
            for bits in [None, Some(2)] {
                let p = phased_zf_precoder(&h, 5, bits).unwrap();
                assert_relative_eq!(p.composite().norm(), 1.0, epsilon = 1e-9);
                assert!(p.analog.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn dependent_users_get_regularized() {
        let mut rng = stream(5, 0, 0, Purpose::Channel);
        let col = complex_gaussian_matrix(&mut rng, 8, 1);
        let mut h = CMat::zeros(8, 2);
        h.set_column(0, &col.column(0));
        h.set_column(1, &col.column(0));
        let p = phased_zf_precoder(&h, 2, None).unwrap();
        assert!(p.regularized);
        assert!(phased_zf_precoder(&h, 1, None).is_err());
    }

    #[test]
    fn spectral_efficiency_examples() {
        let mut rng = stream(3, 0, 0, Purpose::Channel);
        let h = complex_gaussian_matrix(&mut rng, 8, 1);
        let p = matched_filter(&h).unwrap();
        let rho = 2.5;
        let expected = (1.0 + rho * h.norm_squared()).log2();
        assert_relative_eq!(
            sum_spectral_efficiency(&h, &p, rho).unwrap(),
            expected,
            max_relative = 1e-12
        );
        assert_eq!(sum_spectral_efficiency(&h, &p, 0.0).unwrap(), 0.0);

        let hm = complex_gaussian_matrix(&mut rng, 8, 3);
        let zf = phased_zf_precoder(&hm, 8, None).unwrap().composite();
        let g = hm.adjoint() * &zf;
        let interference: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| g[(i, j)].norm_sqr())
            .sum();
        assert!(interference <= 1e-12);
    }
}
