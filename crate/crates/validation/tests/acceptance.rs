//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dsqkd::design::{
    beta2_from_dispersion_parameter, beta2_to_ps2_per_km, solve_dispersion, solve_frequency,
    solve_length, DesignCriterion,
};
use dsqkd::detection::{line_wavelength_nm, peak_near, synth_spectrum};
use dsqkd::field::{
    calibrate_reference, normalize_by_phase_average, oracle_sideband_powers, time_domain_oracle,
    visibility, Cascade, LinkParams, ModulationMode,
};
use dsqkd::protocol::{am_am_reference_qber, contrast, qber_closed_form, run_session_with_workers};
use dsqkd::SPEED_OF_LIGHT;
use dsqkd_cli::{ConfigMap, RunConfig};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn config(assignments: &[&str]) -> RunConfig {
    let mut map = ConfigMap::default();
    for a in assignments {
        map.apply_assignment(a).expect("valid assignment");
    }
    RunConfig::from_map(&map).expect("valid configuration")
}

fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

/// Normalized `(P+, P−)` over a ΔΦ grid, Bob calibrated for the link's length.
fn sweep(cascade: &Cascade<f64>, mode: ModulationMode, phases: &[f64]) -> Vec<(f64, f64)> {
    let offset = calibrate_reference(&cascade.link, cascade.omega_rf);
    phases
        .iter()
        .map(|&d| {
            cascade
                .with_phases(0.0, d + offset)
                .sideband_powers(cascade.link.length, mode)
                .unwrap()
        })
        .collect()
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

fn complementarity() -> Verdict {
    let start = Instant::now();
    let cfg = config(&["bob.m=0.35"]);
    let cascade = cfg.cascade();
    let product = cascade
        .link
        .dispersion_product(cascade.link.length, cascade.omega_rf);
    let worst = sweep(&cascade, cfg.mode, &phase_grid(360))
        .into_iter()
        .map(|(p, q)| (p + q - 1.0).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    Verdict {
        pass: worst <= 1e-9
            && (product.abs() - PI).abs() < 1e-12
            && elapsed < Duration::from_secs(1),
        detail: format!("max |p+ + p- - 1| = {worst:.3e} (<= 1e-9), {elapsed:.2?} (< 1 s)"),
    }
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let phases = phase_grid(16);
    let mut parts = Vec::new();
    let mut pass = true;
    for (m, tol) in [(0.05, 1e-3), (0.35, 2e-2)] {
        let mut worst = 0.0f64;
        for km in [0.0, 7.3, 15.0] {
            let cfg = config(&[&format!("alice.m={m}"), &format!("bob.m={m}")])
                .with_length(km * 1e3)
                .unwrap();
            let cascade = cfg.cascade();
            let offset = calibrate_reference(&cascade.link, cascade.omega_rf);
            let first =
                normalize_by_phase_average(&sweep(&cascade, ModulationMode::FirstOrder, &phases));
            let oracle: Vec<_> = phases
                .iter()
                .map(|&d| {
                    let bob = cascade.bob.with_phase(d + offset);
                    let lines = time_domain_oracle(
                        1.0,
                        &cascade.alice,
                        &bob,
                        &cascade.link,
                        cascade.omega_rf,
                        1024,
                        1,
                    )
                    .unwrap();
                    oracle_sideband_powers(&lines)
                })
                .collect();
            let oracle = normalize_by_phase_average(&oracle);
            for ((p, q), (po, qo)) in first.into_iter().zip(oracle) {
                worst = worst.max((p - po).abs()).max((q - qo).abs());
            }
        }
        pass &= worst <= tol;
        parts.push(format!("m={m}: {worst:.3e} (<= {tol:e})"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    Verdict {
        pass,
        detail: format!(
            "full-scale error {}, {elapsed:.2?} (< 10 s)",
            parts.join(", ")
        ),
    }
}

fn contrast_points() -> Verdict {
    let cfg = config(&["bob.m=0.35"]);
    let cascade = cfg.cascade();
    let link = cascade.link;
    let l = link.length;
    let v_design = 0.98;

    // decision-error oracle at L/2: bit 0 sent and measured in the first basis
    let half = LinkParams::new(link.alpha_db_per_km, link.beta2, l / 2.0).unwrap();
    let at_half = Cascade {
        link: half,
        ..cascade
    };
    let offset = calibrate_reference(&half, cascade.omega_rf);
    let (p_zero, p_one) = at_half
        .with_phases(0.0, offset)
        .sideband_powers(half.length, cfg.mode)
        .unwrap();
    let e = p_one / (p_zero + p_one);
    let oracle = 1.0 - 2.0 * e;

    let c0 = contrast(0.0, cfg.omega_rf, &link, v_design).unwrap();
    let cl = contrast(l, cfg.omega_rf, &link, v_design).unwrap();
    let cm = contrast(l / 2.0, cfg.omega_rf, &link, 1.0).unwrap();
    let pass = c0 == 0.0
        && (cl - v_design).abs() <= 1e-12
        && (oracle - 1.0 / 3.0).abs() <= 1e-12
        && (cm - 1.0 / 3.0).abs() <= 1e-12;
    Verdict {
        pass,
        detail: format!(
            "C(0) = {c0:e}, |C(L) - V| = {:.1e}, oracle C(L/2) = {oracle:.15}, |C(L/2) - 1/3| = {:.1e}",
            (cl - v_design).abs(),
            (cm - 1.0 / 3.0).abs()
        ),
    }
}

fn qber_curve() -> Verdict {
    // μη = 10 keeps p_signal ≫ d_B
    let cfg = config(&[
        "link.alpha_db_per_km=0",
        "detector.mu_sb=100",
        "detector.eta=0.1",
    ]);
    let session = cfg.session();
    let l = cfg.link.length;
    let v = visibility(cfg.alice.m, cfg.bob.m).unwrap();
    let curve: Vec<f64> = (0..=1000)
        .map(|i| qber_closed_form(l * i as f64 / 1000.0, &session).unwrap())
        .collect();
    let monotone = curve.windows(2).all(|w| w[1] <= w[0]);
    let at_l = *curve.last().unwrap();
    let p = cfg.detector.signal_probability(cfg.link.loss_db(l));
    let baseline = am_am_reference_qber(v, cfg.detector.dark_prob, p);
    let pass = (v - 0.98).abs() < 1e-12
        && cfg.detector.dark_prob == 8e-6
        && monotone
        && curve[0] == 0.5
        && (at_l - 0.01).abs() <= 1e-6
        && (at_l - baseline).abs() <= 1e-12;
    Verdict {
        pass,
        detail: format!(
            "monotone = {monotone}, QBER(0) = {}, |QBER(L) - 0.01| = {:.2e}, |QBER(L) - AM-AM| = {:.1e}",
            curve[0],
            (at_l - 0.01).abs(),
            (at_l - baseline).abs()
        ),
    }
}

fn monte_carlo() -> Verdict {
    let start = Instant::now();
    let cfg = config(&["session.pulses=100000"]);
    let base = cfg.session();
    let l = base.link.length;
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, frac) in [
        ("0", 0.0),
        ("L/4", 0.25),
        ("L/2", 0.5),
        ("3L/4", 0.75),
        ("L", 1.0),
    ] {
        let at = base.at_position(frac * l);
        let reports: Vec<_> = [1, 2, 8]
            .iter()
            .map(|&w| run_session_with_workers(&at, w).unwrap())
            .collect();
        let same = reports.windows(2).all(|w| w[0] == w[1]);
        let r = reports[0];
        let sigmas = match (r.qber_estimate, r.binomial_std_error) {
            (Some(q), Some(se)) if se > 0.0 => (q - r.qber_closed_form).abs() / se,
            _ => f64::INFINITY,
        };
        pass &= same && sigmas <= 3.0;
        parts.push(format!(
            "{label}: {sigmas:.2} sigma (n = {}){}",
            r.sifted_count,
            if same { "" } else { " workers differ" }
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    Verdict {
        pass,
        detail: format!("{}; {elapsed:.2?} (< 60 s)", parts.join(", ")),
    }
}

fn design() -> Verdict {
    let beta2 = beta2_from_dispersion_parameter(17.0f64, 1550.0)
        .unwrap()
        .abs();
    let ps2 = beta2_to_ps2_per_km(beta2);
    let omega = 2.0 * PI * 15e9;

    // arithmetic oracle: |β₂| = Dλ²/(2πc), L = π/(|β₂|Ω²)
    let oracle_beta2 = 17e-6 * 1550e-9 * 1550e-9 / (2.0 * PI * SPEED_OF_LIGHT);
    let oracle_length = PI / (oracle_beta2 * omega * omega);
    let length = solve_length(beta2, omega, 1).unwrap();

    let mut worst = 0.0f64;
    for n in 1..=8 {
        let l = solve_length(beta2, omega, n).unwrap();
        let f = solve_frequency(beta2, 15e3, n).unwrap();
        let b = solve_dispersion(omega, 15e3, n).unwrap();
        for c in [
            DesignCriterion {
                n,
                beta2_abs: beta2,
                omega_rf: omega,
                length: l,
            },
            DesignCriterion {
                n,
                beta2_abs: beta2,
                omega_rf: f,
                length: 15e3,
            },
            DesignCriterion {
                n,
                beta2_abs: b,
                omega_rf: omega,
                length: 15e3,
            },
        ] {
            worst = worst.max(c.relative_residual().abs());
        }
    }
    let beta_err = (ps2 - 21.7).abs() / 21.7;
    let len_err = (length - oracle_length).abs() / oracle_length;
    let near = (length / 1e3 - 16.3).abs() / 16.3;
    Verdict {
        pass: beta_err <= 5e-3 && len_err <= 5e-3 && near <= 5e-3 && worst <= 1e-12,
        detail: format!(
            "|beta2| = {ps2:.4} ps^2/km ({:.3}%), L = {:.4} km (oracle {:.2e} rel, 16.3 km {:.3}%), round-trip {worst:.1e}",
            beta_err * 100.0,
            length / 1e3,
            len_err,
            near * 100.0
        ),
    }
}

/// Least-squares `a + b·cos + c·sin` on a uniform full-period grid.
fn cosine_fit(phases: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = phases.len() as f64;
    let a = y.iter().sum::<f64>() / n;
    let b = 2.0 * phases.iter().zip(y).map(|(t, v)| t.cos() * v).sum::<f64>() / n;
    let c = 2.0 * phases.iter().zip(y).map(|(t, v)| t.sin() * v).sum::<f64>() / n;
    let resid = phases
        .iter()
        .zip(y)
        .map(|(t, v)| (a + b * t.cos() + c * t.sin() - v).abs())
        .fold(0.0, f64::max);
    (a, (b * b + c * c).sqrt(), (-c).atan2(b), resid)
}

fn sideband_sweep() -> Verdict {
    let base = config(&[]);
    let v = visibility(base.alice.m, base.bob.m).unwrap();
    let phases = phase_grid(360);
    let mut worst_fit = 0.0f64;
    let mut zero_km = f64::NAN;
    let mut offset_gap = f64::NAN;
    for km in [0.0, 7.3, 15.0] {
        let cfg = base.with_length(km * 1e3).unwrap();
        let (plus, minus): (Vec<f64>, Vec<f64>) =
            sweep(&cfg.cascade(), cfg.mode, &phases).into_iter().unzip();
        let fits = [cosine_fit(&phases, &plus), cosine_fit(&phases, &minus)];
        for (a, amp, _, resid) in fits {
            worst_fit = worst_fit
                .max(resid)
                .max((a - 0.5).abs())
                .max((amp - 0.5 * v).abs());
        }
        if km == 0.0 {
            zero_km = plus
                .iter()
                .zip(&minus)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
        }
        if km == 15.0 {
            offset_gap = (wrap(fits[0].2 - fits[1].2).abs() - PI).abs();
        }
    }
    Verdict {
        pass: worst_fit < 1e-9 && zero_km <= 1e-12 && offset_gap <= 1e-9,
        detail: format!(
            "fit residual {worst_fit:.1e} (< 1e-9), 0 km column gap {zero_km:.1e} (<= 1e-12), \
             |offset difference - pi| at 15 km {offset_gap:.1e} (<= 1e-9)"
        ),
    }
}

fn spectrum() -> Verdict {
    let base = config(&[]);
    let v = visibility(base.alice.m, base.bob.m).unwrap();
    let ratio_db = |km: f64| {
        let cfg = base.with_length(km * 1e3).unwrap();
        let cascade = cfg.cascade();
        let offset = calibrate_reference(&cascade.link, cascade.omega_rf);
        let field = cascade
            .with_phases(0.0, offset)
            .output_field(cascade.link.length, cfg.mode)
            .unwrap();
        let trace = synth_spectrum(&field, cfg.source_power_dbm, &cfg.osa).unwrap();
        let at = |k| {
            peak_near(
                &trace,
                line_wavelength_nm(cfg.wavelength_nm, k, cfg.omega_rf),
            )
            .unwrap()
        };
        (at(-1), at(1))
    };
    let (lower, upper) = ratio_db(15.0);
    let expected = 10.0 * ((1.0 - v) / (1.0 + v)).log10();
    let measured = lower - upper;
    let (lower0, upper0) = ratio_db(0.0);
    let gap0 = (lower0 - upper0).abs();
    Verdict {
        pass: (v - 0.98).abs() < 1e-12 && (measured - expected).abs() <= 0.5 && gap0 <= 0.01,
        detail: format!(
            "15 km ratio {measured:.3} dB vs {expected:.3} dB (within 0.5 dB), 0 km gap {gap0:.1e} dB (<= 0.01)"
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("complementarity", complementarity),
        ("oracle equivalence", oracle_equivalence),
        ("contrast endpoints and midpoint", contrast_points),
        ("QBER curve", qber_curve),
        ("Monte-Carlo consistency", monte_carlo),
        ("design solver", design),
        ("sideband sweep", sideband_sweep),
        ("spectrum sanity", spectrum),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
