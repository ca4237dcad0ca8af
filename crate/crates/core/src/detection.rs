//! Measurement side of the receiver: optical spectrum rendering and the
//! photon-counting click model with dark counts.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::field::SidebandField;
use crate::scalar::{db_to_power, Scalar, SPEED_OF_LIGHT};

/// Rendered spectra never drop below this level.
pub const SPECTRUM_FLOOR_DBM: f64 = -80.0;

/// Optical spectrum analyzer settings. The resolution bandwidth is the FWHM
/// of a Gaussian filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsaParams<T> {
    pub center_wavelength_nm: T,
    pub span_nm: T,
    pub resolution_bandwidth_nm: T,
    pub points: usize,
}

impl<T: Scalar> OsaParams<T> {
    pub fn new(
        center_wavelength_nm: T,
        span_nm: T,
        resolution_bandwidth_nm: T,
        points: usize,
    ) -> Result<Self> {
        let o = Self {
            center_wavelength_nm,
            span_nm,
            resolution_bandwidth_nm,
            points,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength_nm > T::zero()) {
            return Err(invalid("OSA center wavelength must be positive"));
        }
        if !(self.span_nm > T::zero()) {
            return Err(invalid("OSA span must be positive"));
        }
        if !(self.resolution_bandwidth_nm > T::zero()) {
            return Err(invalid("OSA resolution bandwidth must be positive"));
        }
        if self.points < 2 {
            return Err(invalid("OSA needs at least 2 points"));
        }
        Ok(())
    }

    /// Equivalent noise bandwidth of the Gaussian filter, `RBW·√(π / 4ln2)`.
    pub fn noise_bandwidth_nm(&self) -> T {
        self.resolution_bandwidth_nm * (T::PI() / (T::lit(4.0) * T::LN_2())).sqrt()
    }

    fn step_nm(&self) -> T {
        self.span_nm / T::from_count(self.points - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint<T> {
    pub wavelength_nm: T,
    pub power_dbm: T,
}

/// Vacuum wavelength (nm) of line `k` around a carrier at `center_nm`.
pub fn line_wavelength_nm<T: Scalar>(center_nm: T, order: i32, omega_rf: T) -> T {
    let c = T::lit(SPEED_OF_LIGHT);
    let f0 = c / (center_nm * T::lit(1e-9));
    let f = f0 + T::from_i32(order).unwrap() * omega_rf / T::TAU();
    c / f * T::lit(1e9)
}

/// Renders every line of `field` as a Gaussian of the OSA's resolution
/// bandwidth. Line powers are scaled so the carrier peak reads
/// `carrier_power_dbm`.
pub fn synth_spectrum<T: Scalar>(
    field: &SidebandField<T>,
    carrier_power_dbm: T,
    osa: &OsaParams<T>,
) -> Result<Vec<SpectrumPoint<T>>> {
    osa.validate()?;
    let carrier = field.carrier.norm_sqr();
    if !(carrier > T::zero()) {
        return Err(invalid("carrier line is empty; cannot set the power scale"));
    }
    let half_span = osa.span_nm / T::lit(2.0);
    for k in [-1, 1] {
        let off = (line_wavelength_nm(osa.center_wavelength_nm, k, field.omega_rf)
            - osa.center_wavelength_nm)
            .abs();
        if off > half_span {
            return Err(invalid(format!(
                "OSA span {} nm does not cover the first-order sidebands ({} nm from the carrier)",
                osa.span_nm, off
            )));
        }
    }

    let scale = db_to_power(carrier_power_dbm) / carrier;
    let lines: Vec<(T, T)> = field
        .lines()
        .into_iter()
        .map(|(k, a)| {
            (
                line_wavelength_nm(osa.center_wavelength_nm, k, field.omega_rf),
                a.norm_sqr() * scale,
            )
        })
        .filter(|(_, p)| *p > T::zero())
        .collect();

    let shape =
        T::lit(4.0) * T::LN_2() / (osa.resolution_bandwidth_nm * osa.resolution_bandwidth_nm);
    let start = osa.center_wavelength_nm - half_span;
    let step = osa.step_nm();
    let floor = T::lit(SPECTRUM_FLOOR_DBM);
    Ok((0..osa.points)
        .map(|i| {
            let wl = start + step * T::from_count(i);
            let mw = lines.iter().fold(T::zero(), |acc, &(lk, p)| {
                let d = wl - lk;
                acc + p * (-shape * d * d).exp()
            });
            let dbm = if mw > T::zero() {
                (T::lit(10.0) * mw.log10()).max(floor)
            } else {
                floor
            };
            SpectrumPoint {
                wavelength_nm: wl,
                power_dbm: dbm,
            }
        })
        .collect())
}

/// Reading (dBm) at the sample closest to `wavelength_nm`.
pub fn peak_near<T: Scalar>(spectrum: &[SpectrumPoint<T>], wavelength_nm: T) -> Option<T> {
    spectrum
        .iter()
        .min_by(|a, b| {
            let da = (a.wavelength_nm - wavelength_nm).abs();
            let db = (b.wavelength_nm - wavelength_nm).abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|p| p.power_dbm)
}

/// Total optical power (mW) recovered from a rendered spectrum by
/// trapezoidal integration divided by the filter's noise bandwidth.
pub fn integrated_power_mw<T: Scalar>(spectrum: &[SpectrumPoint<T>], osa: &OsaParams<T>) -> T {
    let lin: Vec<T> = spectrum.iter().map(|p| db_to_power(p.power_dbm)).collect();
    let step = osa.step_nm();
    let inner = lin.iter().fold(T::zero(), |a, &v| a + v);
    let ends = (lin[0] + lin[lin.len() - 1]) / T::lit(2.0);
    (inner - ends) * step / osa.noise_bandwidth_nm()
}

/// Single-photon detector pair behind the two sideband filters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams<T> {
    /// Detection efficiency in `[0, 1]`.
    pub eta: T,
    /// Dark-count probability per gate, `d_B`, in `[0, 1)`.
    pub dark_prob: T,
    /// Mean sideband photon number per pulse leaving Alice.
    pub mu_sb: T,
}

impl<T: Scalar> DetectorParams<T> {
    pub fn new(eta: T, dark_prob: T, mu_sb: T) -> Result<Self> {
        let d = Self {
            eta,
            dark_prob,
            mu_sb,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= T::zero() && self.eta <= T::one()) {
            return Err(invalid("detector efficiency must lie in [0, 1]"));
        }
        if !(self.dark_prob >= T::zero() && self.dark_prob < T::one()) {
            return Err(invalid("dark-count probability must lie in [0, 1)"));
        }
        if !(self.mu_sb >= T::zero()) || !self.mu_sb.is_finite() {
            return Err(invalid("mean photon number must be >= 0"));
        }
        Ok(())
    }

    /// Mean detected signal photons per pulse after `path_loss_db`:
    /// `μ·η·10^(−loss/10)`. This is `p_signal` in the closed-form QBER.
    pub fn signal_probability(&self, path_loss_db: T) -> T {
        self.mu_sb * self.eta * db_to_power(-path_loss_db)
    }
}

fn check_unit<T: Scalar>(name: &str, p: T) -> Result<()> {
    let slack = T::lit(1e-12);
    if !(p >= -slack && p <= T::one() + slack) {
        return Err(invalid(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Click probability of each detector:
/// `q = 1 − (1 − d_B)·exp(−μ·η·10^(−loss/10)·p)`.
pub fn click_probabilities<T: Scalar>(
    p_plus: T,
    p_minus: T,
    det: &DetectorParams<T>,
    path_loss_db: T,
) -> Result<(T, T)> {
    det.validate()?;
    check_unit("p_plus", p_plus)?;
    check_unit("p_minus", p_minus)?;
    if !(path_loss_db >= T::zero()) {
        return Err(invalid("path loss must be >= 0 dB"));
    }
    let signal = det.signal_probability(path_loss_db);
    let q = |p: T| {
        let p = p.max(T::zero()).min(T::one());
        // d + (1 − d)(1 − e^{−x}), exact at x = 0
        det.dark_prob - (T::one() - det.dark_prob) * (-signal * p).exp_m1()
    };
    Ok((q(p_plus), q(p_minus)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClickOutcome {
    None,
    Plus,
    Minus,
    Both,
}

/// Two independent Bernoulli draws. Always consumes exactly two uniforms so
/// the stream position is independent of the outcome.
pub fn sample_clicks<T: Scalar, R: Rng + ?Sized>(
    q_plus: T,
    q_minus: T,
    rng: &mut R,
) -> ClickOutcome {
    let u_plus: f64 = rng.gen();
    let u_minus: f64 = rng.gen();
    let plus = u_plus < q_plus.to_f64().unwrap_or(0.0);
    let minus = u_minus < q_minus.to_f64().unwrap_or(0.0);
    match (plus, minus) {
        (false, false) => ClickOutcome::None,
        (true, false) => ClickOutcome::Plus,
        (false, true) => ClickOutcome::Minus,
        (true, true) => ClickOutcome::Both,
    }
}
