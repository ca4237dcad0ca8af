//! Optical field as a carrier plus discrete RF sidebands, and the operators
//! that act on it: electro-optic phase modulation and dispersive fiber.
//!
//! Line `k` of a [`SidebandField`] oscillates as `e^{jkΩt}` relative to the
//! optical carrier, so `upper` is the line at `ω₀ + Ω` and `lower` the line
//! at `ω₀ − Ω`. Amplitudes are normalized to the source field `E₀`.

mod oracle;

pub use oracle::{
    normalize_by_phase_average, oracle_sideband_powers, time_domain_oracle, SpectralLine,
};

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::bessel::jacobi_anger_orders;
use crate::error::{invalid, Error, Result};
use crate::scalar::{db_to_amplitude, Scalar};

/// Largest modulation index accepted by [`ModulationMode::FirstOrder`].
pub const FIRST_ORDER_LIMIT: f64 = 0.5;

/// Bessel orders are retained until `|J_k(m)|` drops below this.
pub const BESSEL_TRUNCATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SidebandField<T> {
    pub carrier: Complex<T>,
    /// Line at `ω₀ + Ω`.
    pub upper: Complex<T>,
    /// Line at `ω₀ − Ω`.
    pub lower: Complex<T>,
    /// Lines with `|k| >= 2`, sorted by order. Empty in first-order mode.
    pub higher_orders: Vec<(i32, Complex<T>)>,
    /// RF angular frequency Ω (rad/s).
    pub omega_rf: T,
}

impl<T: Scalar> SidebandField<T> {
    /// Unmodulated carrier with the given complex amplitude.
    pub fn carrier_only(amplitude: Complex<T>, omega_rf: T) -> Self {
        Self {
            carrier: amplitude,
            upper: Complex::new(T::zero(), T::zero()),
            lower: Complex::new(T::zero(), T::zero()),
            higher_orders: Vec::new(),
            omega_rf,
        }
    }

    /// Builds a field from `(order, amplitude)` pairs; repeated orders add.
    pub fn from_lines<I>(lines: I, omega_rf: T) -> Self
    where
        I: IntoIterator<Item = (i32, Complex<T>)>,
    {
        let mut map: BTreeMap<i32, Complex<T>> = BTreeMap::new();
        for (k, a) in lines {
            let e = map
                .entry(k)
                .or_insert_with(|| Complex::new(T::zero(), T::zero()));
            *e = *e + a;
        }
        let zero = Complex::new(T::zero(), T::zero());
        let carrier = map.remove(&0).unwrap_or(zero);
        let upper = map.remove(&1).unwrap_or(zero);
        let lower = map.remove(&-1).unwrap_or(zero);
        Self {
            carrier,
            upper,
            lower,
            higher_orders: map.into_iter().collect(),
            omega_rf,
        }
    }

    /// Amplitude of line `k`.
    pub fn line(&self, k: i32) -> Complex<T> {
        match k {
            0 => self.carrier,
            1 => self.upper,
            -1 => self.lower,
            _ => self
                .higher_orders
                .iter()
                .find(|(o, _)| *o == k)
                .map(|(_, a)| *a)
                .unwrap_or_else(|| Complex::new(T::zero(), T::zero())),
        }
    }

    /// All lines sorted by order.
    pub fn lines(&self) -> Vec<(i32, Complex<T>)> {
        let mut v: Vec<(i32, Complex<T>)> = self
            .higher_orders
            .iter()
            .copied()
            .chain([(-1, self.lower), (0, self.carrier), (1, self.upper)])
            .collect();
        v.sort_by_key(|(k, _)| *k);
        v
    }

    pub fn is_first_order(&self) -> bool {
        self.higher_orders.is_empty()
    }

    /// Sum of `|amplitude|²` over every line.
    pub fn total_power(&self) -> T {
        self.lines()
            .iter()
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }

    fn map_lines(&self, f: impl Fn(i32, Complex<T>) -> Complex<T>) -> Self {
        Self {
            carrier: f(0, self.carrier),
            upper: f(1, self.upper),
            lower: f(-1, self.lower),
            higher_orders: self
                .higher_orders
                .iter()
                .map(|&(k, a)| (k, f(k, a)))
                .collect(),
            omega_rf: self.omega_rf,
        }
    }
}

/// Electro-optic phase modulator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatorParams<T> {
    /// Modulation index (rad of optical phase per unit RF amplitude).
    pub m: T,
    /// RF drive phase (rad).
    pub phi: T,
    /// Amplitude transmittance, `0 < t_mod <= 1`.
    pub t_mod: T,
}

impl<T: Scalar> ModulatorParams<T> {
    pub fn new(m: T, phi: T, t_mod: T) -> Result<Self> {
        let p = Self { m, phi, t_mod };
        p.validate()?;
        Ok(p)
    }

    /// `m = π·V_drive/V_π`, transmittance from an insertion loss in dB.
    pub fn from_drive(v_drive: T, v_pi: T, phi: T, insertion_loss_db: T) -> Result<Self> {
        if !(v_pi > T::zero()) {
            return Err(invalid("half-wave voltage must be positive"));
        }
        Self::new(
            T::PI() * v_drive / v_pi,
            phi,
            db_to_amplitude(-insertion_loss_db),
        )
    }

    pub fn with_phase(self, phi: T) -> Self {
        Self { phi, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= T::zero()) || !self.m.is_finite() {
            return Err(invalid(format!(
                "modulation index must be >= 0, got {}",
                self.m
            )));
        }
        if !self.phi.is_finite() {
            return Err(invalid("RF phase must be finite"));
        }
        if !(self.t_mod > T::zero() && self.t_mod <= T::one()) {
            return Err(invalid(format!(
                "modulator transmittance must lie in (0, 1], got {}",
                self.t_mod
            )));
        }
        Ok(())
    }
}

/// Fiber span between the two modulators.
///
/// `beta2` is signed (negative for standard fiber at 1550 nm); it enters the
/// propagation phase as-is, while the design criterion only uses `|beta2|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams<T> {
    pub alpha_db_per_km: T,
    /// Group-velocity dispersion (s²/m).
    pub beta2: T,
    /// Length (m).
    pub length: T,
}

impl<T: Scalar> LinkParams<T> {
    pub fn new(alpha_db_per_km: T, beta2: T, length: T) -> Result<Self> {
        let l = Self {
            alpha_db_per_km,
            beta2,
            length,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_db_per_km >= T::zero()) || !self.alpha_db_per_km.is_finite() {
            return Err(invalid("fiber loss must be >= 0 dB/km"));
        }
        if !self.beta2.is_finite() {
            return Err(invalid("beta2 must be finite"));
        }
        if !(self.length >= T::zero()) || !self.length.is_finite() {
            return Err(invalid("link length must be >= 0"));
        }
        Ok(())
    }

    /// Same fiber cut to length `z`.
    pub fn truncated(&self, z: T) -> Result<Self> {
        self.check_position(z)?;
        Ok(Self { length: z, ..*self })
    }

    pub fn check_position(&self, z: T) -> Result<()> {
        if !(z >= T::zero() && z <= self.length) {
            return Err(invalid(format!(
                "position {} m outside the link [0, {}] m",
                z, self.length
            )));
        }
        Ok(())
    }

    /// Power loss accumulated over `z` metres, in dB.
    pub fn loss_db(&self, z: T) -> T {
        self.alpha_db_per_km * z / T::lit(1000.0)
    }

    /// Field amplitude factor after `z` metres.
    pub fn amplitude_factor(&self, z: T) -> T {
        db_to_amplitude(-self.loss_db(z))
    }

    /// `β₂·z·Ω²`, the relative dispersion phase between the two first-order sidebands'
    /// interference arguments.
    pub fn dispersion_product(&self, z: T, omega_rf: T) -> T {
        self.beta2 * z * omega_rf * omega_rf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulationMode {
    /// Small-index expansion `1 + j m cos(Ωt + φ)`; cross products between
    /// incoming sidebands and the new modulation are dropped.
    FirstOrder,
    /// Full Jacobi–Anger expansion applied to every incoming line.
    Exact,
}

/// Applies a phase modulator driven at the field's RF frequency.
pub fn phase_modulate<T: Scalar>(
    field: &SidebandField<T>,
    modulator: &ModulatorParams<T>,
    mode: ModulationMode,
) -> Result<SidebandField<T>> {
    modulator.validate()?;
    let t = modulator.t_mod;
    match mode {
        ModulationMode::FirstOrder => {
            if modulator.m > T::lit(FIRST_ORDER_LIMIT) {
                return Err(Error::RegimeViolation {
                    m: modulator.m.to_f64().unwrap_or(f64::NAN),
                    limit: FIRST_ORDER_LIMIT,
                });
            }
            let half = modulator.m / T::lit(2.0);
            let j = Complex::new(T::zero(), T::one());
            let c = field.carrier * t;
            let mut out = field.map_lines(|_, a| a * t);
            out.upper = out.upper + j * Complex::from_polar(half, modulator.phi) * c;
            out.lower = out.lower + j * Complex::from_polar(half, -modulator.phi) * c;
            Ok(out)
        }
        ModulationMode::Exact => {
            let bessel = jacobi_anger_orders(modulator.m, T::lit(BESSEL_TRUNCATION));
            let kmax = (bessel.len() - 1) as i32;
            // Kernel for line offset n: j^n J_n(m) e^{jnφ}.
            let kernel: Vec<(i32, Complex<T>)> = (-kmax..=kmax)
                .map(|n| {
                    let jn = bessel[n.unsigned_abs() as usize];
                    let jn = if n < 0 && n % 2 != 0 { -jn } else { jn };
                    let phase = T::FRAC_PI_2() * T::from_i32(n).unwrap()
                        + modulator.phi * T::from_i32(n).unwrap();
                    (n, Complex::from_polar(jn * t, phase))
                })
                .collect();
            let zero = Complex::new(T::zero(), T::zero());
            let products = field
                .lines()
                .into_iter()
                .filter(|(_, a)| *a != zero)
                .flat_map(|(k, a)| kernel.iter().map(move |&(n, w)| (k + n, a * w)))
                .collect::<Vec<_>>();
            Ok(SidebandField::from_lines(products, field.omega_rf))
        }
    }
}

/// Propagates the field over `z` metres of the link.
///
/// Line `k` picks up `exp(j·½·β₂·z·(kΩ)²)` and every line is attenuated by
/// the fiber loss. The common propagation phase `β₀z` is dropped.
pub fn propagate<T: Scalar>(
    field: &SidebandField<T>,
    link: &LinkParams<T>,
    z: T,
) -> Result<SidebandField<T>> {
    link.validate()?;
    link.check_position(z)?;
    let amp = link.amplitude_factor(z);
    let half_gvd = T::lit(0.5) * link.beta2 * z;
    let omega = field.omega_rf;
    Ok(field.map_lines(|k, a| {
        let w = T::from_i32(k).unwrap() * omega;
        a * Complex::from_polar(amp, half_gvd * w * w)
    }))
}

/// Upper and lower sideband powers divided by `reference_power`.
///
/// For a cascade, pass [`Cascade::reference_power`], which makes the result
/// take the form `½[1 + V cos(·)]`.
pub fn sideband_powers<T: Scalar>(field: &SidebandField<T>, reference_power: T) -> Result<(T, T)> {
    if !(reference_power > T::zero()) {
        return Err(Error::UndefinedNormalization);
    }
    Ok((
        field.upper.norm_sqr() / reference_power,
        field.lower.norm_sqr() / reference_power,
    ))
}

/// Interference visibility `2·m_a·m_b / (m_a² + m_b²)`.
pub fn visibility<T: Scalar>(m_a: T, m_b: T) -> Result<T> {
    if !(m_a >= T::zero() && m_b >= T::zero()) {
        return Err(invalid("modulation indices must be >= 0"));
    }
    let den = m_a * m_a + m_b * m_b;
    if den == T::zero() {
        return Err(Error::UndefinedVisibility);
    }
    Ok(T::lit(2.0) * m_a * m_b / den)
}

/// Smallest non-negative `m_b` giving visibility `v` against `m_a`.
pub fn index_for_visibility<T: Scalar>(m_a: T, v: T) -> Result<T> {
    if !(v > T::zero() && v <= T::one()) {
        return Err(invalid("visibility must lie in (0, 1]"));
    }
    if !(m_a > T::zero()) {
        return Err(invalid("reference modulation index must be positive"));
    }
    Ok(m_a * (T::one() - (T::one() - v * v).sqrt()) / v)
}

/// Phase added to Bob's RF drive so that the sideband arguments become
/// `ΔΦ` (upper) and `ΔΦ + β₂LΩ²` (lower). Equals `½·β₂·L·Ω²`.
pub fn calibrate_reference<T: Scalar>(link: &LinkParams<T>, omega_rf: T) -> T {
    T::lit(0.5) * link.dispersion_product(link.length, omega_rf)
}

/// Alice modulator, fiber, Bob modulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cascade<T> {
    pub alice: ModulatorParams<T>,
    pub bob: ModulatorParams<T>,
    pub link: LinkParams<T>,
    pub omega_rf: T,
}

impl<T: Scalar> Cascade<T> {
    /// Field leaving Bob's modulator when he sits at position `z`.
    pub fn output_field(&self, z: T, mode: ModulationMode) -> Result<SidebandField<T>> {
        let source = SidebandField::carrier_only(Complex::new(T::one(), T::zero()), self.omega_rf);
        let after_alice = phase_modulate(&source, &self.alice, mode)?;
        let at_z = propagate(&after_alice, &self.link, z)?;
        phase_modulate(&at_z, &self.bob, mode)
    }

    /// `2·(a_A² + a_B²)` with `a = m·t_A·t_B·loss/2` for each modulator.
    ///
    /// This is the phase-averaged total of both first-order sideband powers;
    /// for `m_A = m_B` it equals the fully constructive sideband power.
    pub fn reference_power(&self, z: T) -> Result<T> {
        self.link.check_position(z)?;
        let g = self.alice.t_mod * self.bob.t_mod * self.link.amplitude_factor(z) / T::lit(2.0);
        let a = self.alice.m * g;
        let b = self.bob.m * g;
        let r = T::lit(2.0) * (a * a + b * b);
        if r == T::zero() {
            return Err(Error::UndefinedNormalization);
        }
        Ok(r)
    }

    pub fn visibility(&self) -> Result<T> {
        visibility(self.alice.m, self.bob.m)
    }

    /// Normalized `(p_plus, p_minus)` for a receiver at `z`.
    pub fn sideband_powers(&self, z: T, mode: ModulationMode) -> Result<(T, T)> {
        let reference = self.reference_power(z)?;
        sideband_powers(&self.output_field(z, mode)?, reference)
    }

    pub fn with_phases(&self, phi_a: T, phi_b: T) -> Self {
        Self {
            alice: self.alice.with_phase(phi_a),
            bob: self.bob.with_phase(phi_b),
            ..*self
        }
    }
}
