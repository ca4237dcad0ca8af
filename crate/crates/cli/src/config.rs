//! Plain-text run configuration: one `section.key = value` per line, `#`
//! comments, later assignments override earlier ones.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use dsqkd::design::{beta2_from_dispersion_parameter, beta2_from_ps2_per_km, solve_dispersion};
use dsqkd::detection::{DetectorParams, OsaParams};
use dsqkd::field::{index_for_visibility, Cascade, LinkParams, ModulationMode, ModulatorParams};
use dsqkd::protocol::SessionConfig;
use dsqkd::scalar::db_to_amplitude;

use crate::error::CliError;

/// Every recognised key with its default. `bob.m`, `bob.v_drive`,
/// `alice.v_drive`, `link.dispersion_ps_nm_km` and `link.beta2_ps2_per_km`
/// have no default and are optional.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("source.wavelength_nm", "1550"),
    ("source.power_dbm", "5"),
    ("rf.frequency_ghz", "15"),
    ("alice.m", "0.35"),
    ("alice.insertion_loss_db", "2.5"),
    ("alice.v_pi", "7.4"),
    ("bob.insertion_loss_db", "2.5"),
    ("bob.v_pi", "7.4"),
    ("protocol.visibility", "0.98"),
    ("link.length_km", "15"),
    ("link.alpha_db_per_km", "0.2"),
    ("link.design_n", "1"),
    ("detector.eta", "0.1"),
    ("detector.dark_prob", "8e-6"),
    ("detector.mu_sb", "0.1"),
    ("session.pulses", "100000"),
    ("session.seed", "1"),
    ("session.workers", "0"),
    ("session.z_over_l", "1"),
    ("sweep.steps", "101"),
    ("sweep.phase_steps", "361"),
    ("sweep.lengths_km", "15,7.3,0"),
    ("sweep.length_max_km", "15"),
    ("osa.span_nm", "0.6"),
    ("osa.rbw_nm", "0.01"),
    ("osa.points", "2001"),
    ("design.n", "1"),
    ("design.solve", "length"),
    ("model.mode", "first_order"),
];

const OPTIONAL: &[&str] = &[
    "alice.v_drive",
    "bob.m",
    "bob.v_drive",
    "link.dispersion_ps_nm_km",
    "link.beta2_ps2_per_km",
];

/// Raw key-value store before typing.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl Default for ConfigMap {
    fn default() -> Self {
        Self {
            values: DEFAULTS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl ConfigMap {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        if !DEFAULTS.iter().any(|(k, _)| *k == key) && !OPTIONAL.contains(&key) {
            return Err(CliError::Config(format!(
                "unknown configuration key '{key}'"
            )));
        }
        self.values
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies a `section.key=value` assignment.
    pub fn apply_assignment(&mut self, text: &str) -> Result<(), CliError> {
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected section.key=value, got '{text}'")))?;
        self.set(k, v)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.apply_assignment(line)
                .map_err(|e| CliError::Config(format!("line {}: {}", n + 1, e.message())))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn real(&self, key: &str) -> Result<f64, CliError> {
        let raw = self
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing '{key}'")))?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Config(format!("'{key}' must be a number, got '{raw}'")))
    }

    fn opt_real(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(_) => self.real(key).map(Some),
        }
    }

    fn count(&self, key: &str) -> Result<u64, CliError> {
        let raw = self
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing '{key}'")))?;
        raw.parse::<u64>().map_err(|_| {
            CliError::Config(format!(
                "'{key}' must be a non-negative integer, got '{raw}'"
            ))
        })
    }

    /// Renders the effective configuration in the file format.
    pub fn to_text(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Where the fiber dispersion came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersionSource {
    /// `D` in ps/(nm·km).
    Parameter(f64),
    /// `β₂` in ps²/km.
    Beta2(f64),
    /// Solved from the criterion at the configured length and RF frequency.
    Design(u32),
}

/// Typed, validated configuration for every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wavelength_nm: f64,
    pub source_power_dbm: f64,
    pub omega_rf: f64,
    pub alice: ModulatorParams<f64>,
    pub bob: ModulatorParams<f64>,
    pub link: LinkParams<f64>,
    pub dispersion_source: DispersionSource,
    pub detector: DetectorParams<f64>,
    pub mode: ModulationMode,
    pub pulses: usize,
    pub seed: u64,
    pub workers: usize,
    pub z_over_l: f64,
    pub steps: usize,
    pub phase_steps: usize,
    pub panel_lengths_km: Vec<f64>,
    pub length_max_km: f64,
    pub osa: OsaParams<f64>,
    pub design_n: u32,
    pub design_solve: String,
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self, CliError> {
        let wavelength_nm = map.real("source.wavelength_nm")?;
        let f_ghz = map.real("rf.frequency_ghz")?;
        if !(f_ghz > 0.0) {
            return Err(CliError::Config("rf.frequency_ghz must be positive".into()));
        }
        let omega_rf = 2.0 * PI * f_ghz * 1e9;

        let alice = modulator(map, "alice", Some(map.real("alice.m")?))?;
        let bob_m = match (map.opt_real("bob.m")?, map.opt_real("bob.v_drive")?) {
            (Some(m), _) => Some(m),
            (None, Some(_)) => None,
            (None, None) => {
                let v = map.real("protocol.visibility")?;
                Some(index_for_visibility(alice.m, v)?)
            }
        };
        let bob = modulator(map, "bob", bob_m)?;

        let length = map.real("link.length_km")? * 1e3;
        let alpha = map.real("link.alpha_db_per_km")?;
        let design_n = map.count("link.design_n")? as u32;
        let (beta2, dispersion_source) = match (
            map.opt_real("link.dispersion_ps_nm_km")?,
            map.opt_real("link.beta2_ps2_per_km")?,
        ) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give link.dispersion_ps_nm_km or link.beta2_ps2_per_km, not both".into(),
                ))
            }
            (Some(d), None) => (
                beta2_from_dispersion_parameter(d, wavelength_nm)?,
                DispersionSource::Parameter(d),
            ),
            (None, Some(b)) => (beta2_from_ps2_per_km(b), DispersionSource::Beta2(b)),
            // anomalous-dispersion sign, as in standard fiber at 1550 nm
            (None, None) => (
                -solve_dispersion(omega_rf, length, design_n)?,
                DispersionSource::Design(design_n),
            ),
        };
        let link = LinkParams::new(alpha, beta2, length)?;

        let detector = DetectorParams::new(
            map.real("detector.eta")?,
            map.real("detector.dark_prob")?,
            map.real("detector.mu_sb")?,
        )?;

        let mode = match map.get("model.mode").unwrap_or("first_order") {
            "first_order" => ModulationMode::FirstOrder,
            "exact" => ModulationMode::Exact,
            other => {
                return Err(CliError::Config(format!(
                    "model.mode must be first_order or exact, got '{other}'"
                )))
            }
        };

        let pulses = map.count("session.pulses")? as usize;
        if pulses == 0 {
            return Err(CliError::Config("session.pulses must be >= 1".into()));
        }
        let z_over_l = map.real("session.z_over_l")?;
        if !(0.0..=1.0).contains(&z_over_l) {
            return Err(CliError::Config(
                "session.z_over_l must lie in [0, 1]".into(),
            ));
        }
        let steps = map.count("sweep.steps")? as usize;
        let phase_steps = map.count("sweep.phase_steps")? as usize;
        if steps < 2 || phase_steps < 2 {
            return Err(CliError::Config("sweep steps must be >= 2".into()));
        }
        let panel_lengths_km = map
            .get("sweep.lengths_km")
            .unwrap_or("")
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| CliError::Config(format!("bad entry '{s}' in sweep.lengths_km")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let length_max_km = map.real("sweep.length_max_km")?;
        if !(length_max_km > 0.0) {
            return Err(CliError::Config(
                "sweep.length_max_km must be positive".into(),
            ));
        }

        let points = map.count("osa.points")? as usize;
        let osa = OsaParams::new(
            wavelength_nm,
            map.real("osa.span_nm")?,
            map.real("osa.rbw_nm")?,
            points,
        )?;

        let design_solve = map.get("design.solve").unwrap_or("length").to_string();
        if !["length", "frequency", "dispersion"].contains(&design_solve.as_str()) {
            return Err(CliError::Config(format!(
                "design.solve must be length, frequency or dispersion, got '{design_solve}'"
            )));
        }

        Ok(Self {
            wavelength_nm,
            source_power_dbm: map.real("source.power_dbm")?,
            omega_rf,
            alice,
            bob,
            link,
            dispersion_source,
            detector,
            mode,
            pulses,
            seed: map.count("session.seed")?,
            workers: map.count("session.workers")? as usize,
            z_over_l,
            steps,
            phase_steps,
            panel_lengths_km,
            length_max_km,
            osa,
            design_n: map.count("design.n")? as u32,
            design_solve,
        })
    }

    pub fn cascade(&self) -> Cascade<f64> {
        Cascade {
            alice: self.alice,
            bob: self.bob,
            link: self.link,
            omega_rf: self.omega_rf,
        }
    }

    /// Same configuration over a fiber of a different length.
    pub fn with_length(&self, length_m: f64) -> Result<Self, CliError> {
        Ok(Self {
            link: LinkParams::new(self.link.alpha_db_per_km, self.link.beta2, length_m)?,
            ..self.clone()
        })
    }

    pub fn session(&self) -> SessionConfig<f64> {
        SessionConfig {
            n_pulses: self.pulses,
            link: self.link,
            alice: self.alice,
            bob: self.bob,
            omega_rf: self.omega_rf,
            det: self.detector,
            receiver_position_z: self.z_over_l * self.link.length,
            mode: self.mode,
            seed: self.seed,
        }
    }
}

fn modulator(map: &ConfigMap, who: &str, m: Option<f64>) -> Result<ModulatorParams<f64>, CliError> {
    let loss = map.real(&format!("{who}.insertion_loss_db"))?;
    let v_pi = map.real(&format!("{who}.v_pi"))?;
    match map.opt_real(&format!("{who}.v_drive"))? {
        Some(v) => Ok(ModulatorParams::from_drive(v, v_pi, 0.0, loss)?),
        None => {
            let m = m.ok_or_else(|| CliError::Config(format!("{who}.m is required")))?;
            Ok(ModulatorParams::new(m, 0.0, db_to_amplitude(-loss))?)
        }
    }
}
