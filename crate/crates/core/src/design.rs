//! The dispersion design criterion `|β₂|·L·Ω² = nπ`.
//!
//! At this point the two first-order sidebands' interference arguments
//! differ by `nπ`, which makes their powers complementary. Only the
//! magnitude of `β₂` matters: the observables depend on it through `cos`.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, SPEED_OF_LIGHT};

/// s²/m per ps²/km.
pub const PS2_PER_KM: f64 = 1e-27;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignCriterion<T> {
    pub n: u32,
    /// |β₂| (s²/m).
    pub beta2_abs: T,
    /// Ω (rad/s).
    pub omega_rf: T,
    /// L (m).
    pub length: T,
}

impl<T: Scalar> DesignCriterion<T> {
    /// `|β₂|·L·Ω²`.
    pub fn product(&self) -> T {
        self.beta2_abs * self.length * self.omega_rf * self.omega_rf
    }

    /// `|β₂|·L·Ω² − nπ`.
    pub fn residual(&self) -> T {
        self.product() - T::from_u32(self.n).unwrap() * T::PI()
    }

    /// Residual relative to `nπ`.
    pub fn relative_residual(&self) -> T {
        self.residual() / (T::from_u32(self.n).unwrap() * T::PI())
    }

    /// Solves for the length, keeping |β₂|, Ω and n.
    pub fn for_length(beta2_abs: T, omega_rf: T, n: u32) -> Result<Self> {
        Ok(Self {
            n,
            beta2_abs,
            omega_rf,
            length: solve_length(beta2_abs, omega_rf, n)?,
        })
    }

    pub fn for_frequency(beta2_abs: T, length: T, n: u32) -> Result<Self> {
        Ok(Self {
            n,
            beta2_abs,
            omega_rf: solve_frequency(beta2_abs, length, n)?,
            length,
        })
    }

    pub fn for_dispersion(omega_rf: T, length: T, n: u32) -> Result<Self> {
        Ok(Self {
            n,
            beta2_abs: solve_dispersion(omega_rf, length, n)?,
            omega_rf,
            length,
        })
    }
}

fn n_pi<T: Scalar>(n: u32) -> Result<T> {
    if n == 0 {
        return Err(Error::NoSolution("harmonic n must be >= 1".into()));
    }
    Ok(T::from_u32(n).unwrap() * T::PI())
}

fn positive<T: Scalar>(v: T, what: &str) -> Result<T> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NoSolution(format!(
            "{what} must be positive, got {v}"
        )))
    }
}

/// `L = nπ / (|β₂|·Ω²)`.
pub fn solve_length<T: Scalar>(beta2_abs: T, omega_rf: T, n: u32) -> Result<T> {
    let b = positive(beta2_abs.abs(), "|beta2|")?;
    let w = positive(omega_rf, "RF angular frequency")?;
    Ok(n_pi::<T>(n)? / (b * w * w))
}

/// `Ω = √(nπ / (|β₂|·L))`.
pub fn solve_frequency<T: Scalar>(beta2_abs: T, length: T, n: u32) -> Result<T> {
    let b = positive(beta2_abs.abs(), "|beta2|")?;
    let l = positive(length, "link length")?;
    Ok((n_pi::<T>(n)? / (b * l)).sqrt())
}

/// `|β₂| = nπ / (L·Ω²)`: the dispersion needed for a given link and RF tone.
pub fn solve_dispersion<T: Scalar>(omega_rf: T, length: T, n: u32) -> Result<T> {
    let w = positive(omega_rf, "RF angular frequency")?;
    let l = positive(length, "link length")?;
    Ok(n_pi::<T>(n)? / (l * w * w))
}

/// `β₂ = −D·λ²/(2πc)` for `D` in ps/(nm·km) and `λ` in nm. Result in s²/m.
pub fn beta2_from_dispersion_parameter<T: Scalar>(d_ps_nm_km: T, wavelength_nm: T) -> Result<T> {
    if !(wavelength_nm > T::zero()) {
        return Err(Error::InvalidParameter(
            "wavelength must be positive".into(),
        ));
    }
    // ps/(nm·km) → s/m²
    let d = d_ps_nm_km * T::lit(1e-6);
    let lambda = wavelength_nm * T::lit(1e-9);
    Ok(-d * lambda * lambda / (T::TAU() * T::lit(SPEED_OF_LIGHT)))
}

/// Inverse of [`beta2_from_dispersion_parameter`].
pub fn dispersion_parameter_from_beta2<T: Scalar>(beta2: T, wavelength_nm: T) -> Result<T> {
    if !(wavelength_nm > T::zero()) {
        return Err(Error::InvalidParameter(
            "wavelength must be positive".into(),
        ));
    }
    let lambda = wavelength_nm * T::lit(1e-9);
    Ok(-beta2 * T::TAU() * T::lit(SPEED_OF_LIGHT) / (lambda * lambda) * T::lit(1e6))
}

pub fn beta2_to_ps2_per_km<T: Scalar>(beta2: T) -> T {
    beta2 / T::lit(PS2_PER_KM)
}

pub fn beta2_from_ps2_per_km<T: Scalar>(ps2_per_km: T) -> T {
    ps2_per_km * T::lit(PS2_PER_KM)
}
