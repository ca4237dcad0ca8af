use std::f64::consts::PI;
use std::fmt::Write as _;

use dsqkd::design::{
    beta2_from_dispersion_parameter, beta2_to_ps2_per_km, dispersion_parameter_from_beta2,
    solve_dispersion, solve_frequency, solve_length, DesignCriterion,
};
use dsqkd::detection::synth_spectrum;
use dsqkd::field::{calibrate_reference, visibility, LinkParams};
use dsqkd::protocol::{
    am_am_reference_qber, contrast, qber_closed_form, run_session_with_workers, QberReport,
};
use dsqkd::scalar::power_to_db;

use crate::config::{DispersionSource, RunConfig};
use crate::error::CliError;

/// One CSV table (header row included) and the file stem it is saved under.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub name: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommandOutput {
    pub panels: Vec<Panel>,
    /// Human-readable remarks for stderr.
    pub notes: Vec<String>,
}

impl CommandOutput {
    fn single(name: &str, body: String) -> Self {
        Self {
            panels: vec![Panel {
                name: name.to_string(),
                body,
            }],
            notes: Vec::new(),
        }
    }
}

/// Relative tolerance on `|β₂|LΩ² = π` before `qber-curve` warns.
const CRITERION_WARN: f64 = 1e-6;

fn grid(start: f64, stop: f64, steps: usize) -> impl Iterator<Item = f64> {
    (0..steps).map(move |i| {
        if i + 1 == steps {
            stop
        } else {
            start + (stop - start) * i as f64 / (steps - 1) as f64
        }
    })
}

fn length_label(km: f64) -> String {
    format!("{km}")
}

fn criterion(cfg: &RunConfig, n: u32) -> DesignCriterion<f64> {
    DesignCriterion {
        n,
        beta2_abs: cfg.link.beta2.abs(),
        omega_rf: cfg.omega_rf,
        length: cfg.link.length,
    }
}

/// QBER against normalized receiver position, with the AM-AM baseline.
pub fn qber_curve(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let session = cfg.session();
    let v = visibility(cfg.alice.m, cfg.bob.m)?;
    let length = cfg.link.length;
    let p_at_bob = cfg.detector.signal_probability(cfg.link.loss_db(length));
    let baseline = am_am_reference_qber(v, cfg.detector.dark_prob, p_at_bob);

    let mut body = String::from("z_over_L,qber_ds,qber_am_am_reference\n");
    for x in grid(0.0, 1.0, cfg.steps) {
        let q = qber_closed_form(x * length, &session)?;
        let _ = writeln!(body, "{x},{q:e},{baseline:e}");
    }
    let mut out = CommandOutput::single("qber_curve", body);
    let crit = criterion(cfg, 1);
    if crit.relative_residual().abs() > CRITERION_WARN {
        out.notes.push(format!(
            "warning: |beta2|*L*Omega^2 = {:.6} rad, not pi; the curve does not reach the BB84 limit at z = L",
            crit.product()
        ));
    }
    out.notes.push(
        "note: qber_am_am_reference is z-independent (C = V, p_signal evaluated at z = L)"
            .to_string(),
    );
    Ok(out)
}

/// Spectra for every panel length and `ΔΦ ∈ {0, π}`.
pub fn spectrum(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut out = CommandOutput::default();
    for &km in &cfg.panel_lengths_km {
        let at = cfg.with_length(km * 1e3)?;
        let offset = calibrate_reference(&at.link, at.omega_rf);
        for (label, dphi) in [("0", 0.0), ("pi", PI)] {
            let field = at
                .cascade()
                .with_phases(0.0, dphi + offset)
                .output_field(at.link.length, at.mode)?;
            let carrier_dbm = cfg.source_power_dbm + power_to_db(field.carrier.norm_sqr());
            let points = synth_spectrum(&field, carrier_dbm, &cfg.osa)?;
            let mut body = String::from("wavelength_nm,power_dbm\n");
            for p in points {
                let _ = writeln!(body, "{},{:e}", p.wavelength_nm, p.power_dbm);
            }
            out.panels.push(Panel {
                name: format!("spectrum_L{}km_dphi{}", length_label(km), label),
                body,
            });
        }
    }
    Ok(out)
}

/// Normalized sideband powers against `ΔΦ ∈ [0, 2π]` for every panel length.
pub fn sidebands(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut out = CommandOutput::default();
    for &km in &cfg.panel_lengths_km {
        let at = cfg.with_length(km * 1e3)?;
        let offset = calibrate_reference(&at.link, at.omega_rf);
        let cascade = at.cascade();
        let mut body = String::from("delta_phi,p_plus,p_minus\n");
        for dphi in grid(0.0, 2.0 * PI, cfg.phase_steps) {
            let (p, q) = cascade
                .with_phases(0.0, dphi + offset)
                .sideband_powers(at.link.length, at.mode)?;
            let _ = writeln!(body, "{dphi},{p:e},{q:e}");
        }
        out.panels.push(Panel {
            name: format!("sidebands_L{}km", length_label(km)),
            body,
        });
    }
    Ok(out)
}

/// Contrast against fiber length from 0 to `sweep.length_max_km`.
pub fn contrast_curve(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let v = visibility(cfg.alice.m, cfg.bob.m)?;
    let max_m = cfg.length_max_km * 1e3;
    let link = LinkParams::new(cfg.link.alpha_db_per_km, cfg.link.beta2, max_m)?;
    let mut body = String::from("length_km,contrast\n");
    for z in grid(0.0, max_m, cfg.steps) {
        let c = contrast(z, cfg.omega_rf, &link, v)?;
        let _ = writeln!(body, "{},{c:e}", z / 1e3);
    }
    Ok(CommandOutput::single("contrast", body))
}

/// Solves the design criterion for the unknown named by `design.solve`.
pub fn design(cfg: &RunConfig) -> Result<String, CliError> {
    let n = cfg.design_n;
    let mut notes = Vec::new();
    let beta2 = match cfg.dispersion_source {
        DispersionSource::Design(_) if cfg.design_solve != "dispersion" => {
            notes.push("no dispersion given; using standard fiber D = 17 ps/(nm km)");
            beta2_from_dispersion_parameter(17.0, cfg.wavelength_nm)?
        }
        _ => cfg.link.beta2,
    };
    let solved = match cfg.design_solve.as_str() {
        "length" => DesignCriterion {
            n,
            beta2_abs: beta2.abs(),
            omega_rf: cfg.omega_rf,
            length: solve_length(beta2.abs(), cfg.omega_rf, n)?,
        },
        "frequency" => DesignCriterion {
            n,
            beta2_abs: beta2.abs(),
            omega_rf: solve_frequency(beta2.abs(), cfg.link.length, n)?,
            length: cfg.link.length,
        },
        _ => DesignCriterion {
            n,
            beta2_abs: solve_dispersion(cfg.omega_rf, cfg.link.length, n)?,
            omega_rf: cfg.omega_rf,
            length: cfg.link.length,
        },
    };
    let configured = DesignCriterion {
        n,
        beta2_abs: beta2.abs(),
        omega_rf: cfg.omega_rf,
        length: cfg.link.length,
    };

    let mut s = String::new();
    let _ = writeln!(s, "solve={}", cfg.design_solve);
    let _ = writeln!(s, "n={n}");
    let _ = writeln!(s, "beta2_abs_s2_per_m={:e}", solved.beta2_abs);
    let _ = writeln!(
        s,
        "beta2_abs_ps2_per_km={}",
        beta2_to_ps2_per_km(solved.beta2_abs)
    );
    let _ = writeln!(
        s,
        "dispersion_ps_nm_km={}",
        dispersion_parameter_from_beta2(-solved.beta2_abs, cfg.wavelength_nm)?
    );
    let _ = writeln!(s, "frequency_ghz={}", solved.omega_rf / (2.0 * PI) / 1e9);
    let _ = writeln!(s, "length_km={}", solved.length / 1e3);
    let _ = writeln!(s, "criterion_product_rad={}", solved.product());
    let _ = writeln!(s, "criterion_residual_rad={:e}", solved.residual());
    let _ = writeln!(s, "configured_product_rad={}", configured.product());
    let _ = writeln!(s, "configured_residual_rad={:e}", configured.residual());
    for n in notes {
        let _ = writeln!(s, "note={n}");
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionFormat {
    KeyValue,
    Csv,
}

/// One Monte-Carlo session at `session.z_over_l`.
pub fn session(cfg: &RunConfig, format: SessionFormat) -> Result<String, CliError> {
    let report = run_session_with_workers(&cfg.session(), cfg.workers)?;
    Ok(match format {
        SessionFormat::KeyValue => report.to_key_value(),
        SessionFormat::Csv => format!(
            "{}\n{}\n",
            QberReport::<f64>::csv_header(),
            report.to_csv_row()
        ),
    })
}

/// Sessions over `steps` receiver positions, one CSV row each.
pub fn session_sweep(cfg: &RunConfig, steps: usize) -> Result<String, CliError> {
    if steps < 2 {
        return Err(CliError::Config(
            "session sweep needs at least 2 positions".into(),
        ));
    }
    let base = cfg.session();
    let mut s = format!("z_over_L,{}\n", QberReport::<f64>::csv_header());
    for x in grid(0.0, 1.0, steps) {
        let r = run_session_with_workers(&base.at_position(x * base.link.length), cfg.workers)?;
        let _ = writeln!(s, "{x},{}", r.to_csv_row());
    }
    Ok(s)
}
