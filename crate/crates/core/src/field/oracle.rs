//! Time-domain reference for the Alice → fiber → Bob cascade.
//!
//! The modulated field `exp(j·m·cos(Ωt + φ))` is sampled over an integer
//! number of RF periods, dispersion and loss are applied bin by bin in the
//! frequency domain, Bob's modulation is applied in the time domain, and the
//! line powers are read off a final forward transform. Nothing here shares
//! code with the sideband algebra in the parent module.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::{LinkParams, ModulatorParams};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// One spectral line: harmonic order `k`, offset `kΩ` (rad/s) and power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine<T> {
    pub order: i32,
    pub offset: T,
    pub power: T,
}

#[allow(clippy::too_many_arguments)]
pub fn time_domain_oracle<T: Scalar>(
    source_power: T,
    alice: &ModulatorParams<T>,
    bob: &ModulatorParams<T>,
    link: &LinkParams<T>,
    omega_rf: T,
    n_samples: usize,
    n_periods: usize,
) -> Result<Vec<SpectralLine<T>>> {
    if n_samples < 1024 || !n_samples.is_power_of_two() {
        return Err(invalid(format!(
            "n_samples must be a power of two >= 1024, got {n_samples}"
        )));
    }
    if n_periods == 0 || n_samples / n_periods < 8 {
        return Err(invalid(format!(
            "need at least 8 samples per RF period ({n_samples} samples over {n_periods} periods)"
        )));
    }
    if !(source_power >= T::zero()) {
        return Err(invalid("source power must be >= 0"));
    }
    alice.validate()?;
    bob.validate()?;
    link.validate()?;

    let n = n_samples;
    let nt = T::from_count(n);
    let periods = T::from_count(n_periods);
    // RF phase at sample i: Ωt = 2π·P·i/N
    let rf_phase = |i: usize| T::TAU() * periods * T::from_count(i) / nt;
    let pm = |m: &ModulatorParams<T>, i: usize| {
        Complex::from_polar(m.t_mod, m.m * (rf_phase(i) + m.phi).cos())
    };

    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex<T>> = (0..n).map(|i| pm(alice, i)).collect();
    fwd.process(&mut buf);

    let amp = link.amplitude_factor(link.length);
    let half_gvd = T::lit(0.5) * link.beta2 * link.length;
    for (b, x) in buf.iter_mut().enumerate() {
        let w = bin_offset(b, n, n_periods, omega_rf);
        *x = *x * Complex::from_polar(amp / nt, half_gvd * w * w);
    }
    inv.process(&mut buf);

    for (i, x) in buf.iter_mut().enumerate() {
        *x = *x * pm(bob, i);
    }
    fwd.process(&mut buf);

    let half = (n / n_periods / 2) as i32;
    let lines = (-half + 1..half)
        .map(|k| {
            let b = (k * n_periods as i32).rem_euclid(n as i32) as usize;
            let a = buf[b] / nt;
            SpectralLine {
                order: k,
                offset: T::from_i32(k).unwrap() * omega_rf,
                power: a.norm_sqr() * source_power,
            }
        })
        .collect();
    Ok(lines)
}

/// Angular frequency offset of FFT bin `b` (signed, in units where bin `P` is Ω).
fn bin_offset<T: Scalar>(b: usize, n: usize, n_periods: usize, omega_rf: T) -> T {
    let signed = if b <= n / 2 {
        b as f64
    } else {
        b as f64 - n as f64
    };
    T::lit(signed / n_periods as f64) * omega_rf
}

/// `(P(+Ω), P(−Ω))` from an oracle line list.
pub fn oracle_sideband_powers<T: Scalar>(lines: &[SpectralLine<T>]) -> (T, T) {
    let find = |k: i32| {
        lines
            .iter()
            .find(|l| l.order == k)
            .map(|l| l.power)
            .unwrap_or_else(T::zero)
    };
    (find(1), find(-1))
}

/// Divides a sweep of `(P+, P−)` samples taken on a uniform phase grid by the
/// grid mean of `P+ + P−`.
///
/// For the first-order model this reproduces the cascade reference power
/// exactly, so it lets absolute powers from any route be compared on the same
/// normalized scale.
pub fn normalize_by_phase_average<T: Scalar>(samples: &[(T, T)]) -> Vec<(T, T)> {
    let total = samples.iter().fold(T::zero(), |acc, &(p, q)| acc + p + q)
        / T::from_count(samples.len().max(1));
    samples
        .iter()
        .map(|&(p, q)| (p / total, q / total))
        .collect()
}
