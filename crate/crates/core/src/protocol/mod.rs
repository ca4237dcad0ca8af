//! BB84 over the sideband link: phase encoding, basis reconciliation, the
//! closed-form contrast/QBER for a receiver at position `z`, and the
//! Monte-Carlo session engine.

mod report;
mod session;

pub use report::QberReport;
pub use session::{
    run_session, run_session_with_workers, sifted_qber_expectation, SessionConfig, CHUNK_PULSES,
};

use crate::detection::ClickOutcome;
use crate::error::{invalid, Result};
use crate::field::LinkParams;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

/// The two conjugate phase bases: `{0, π}` and `{π/2, 3π/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    First,
    Second,
}

impl Basis {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Basis::Second
        } else {
            Basis::First
        }
    }

    fn base_phase<T: Scalar>(self) -> T {
        match self {
            Basis::First => T::zero(),
            Basis::Second => T::FRAC_PI_2(),
        }
    }
}

/// Alice's RF phase for a bit in a basis.
pub fn encode_alice<T: Scalar>(bit: Bit, basis: Basis) -> T {
    let flip = match bit {
        Bit::Zero => T::zero(),
        Bit::One => T::PI(),
    };
    basis.base_phase::<T>() + flip
}

/// Bob's RF phase for a measurement basis, including his dispersion calibration.
pub fn choose_bob_phase<T: Scalar>(basis: Basis, calibration_offset: T) -> T {
    basis.base_phase::<T>() + calibration_offset
}

/// Upper-sideband click reads 0, lower-sideband click reads 1.
/// `None` and `Both` carry no bit.
pub fn decide_bit(outcome: ClickOutcome) -> Option<Bit> {
    match outcome {
        ClickOutcome::Plus => Some(Bit::Zero),
        ClickOutcome::Minus => Some(Bit::One),
        ClickOutcome::None | ClickOutcome::Both => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliceRecord {
    pub bit: Bit,
    pub basis: Basis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BobRecord {
    pub basis: Basis,
    pub outcome: ClickOutcome,
}

/// Indices where the bases agree and exactly one detector clicked.
pub fn sift(alice: &[AliceRecord], bob: &[BobRecord]) -> Result<Vec<usize>> {
    if alice.len() != bob.len() {
        return Err(invalid(format!(
            "record length mismatch: alice {} vs bob {}",
            alice.len(),
            bob.len()
        )));
    }
    Ok(alice
        .iter()
        .zip(bob)
        .enumerate()
        .filter(|(_, (a, b))| a.basis == b.basis && decide_bit(b.outcome).is_some())
        .map(|(i, _)| i)
        .collect())
}

/// Distinguishability available to a receiver at `z`:
/// `C = V·sin²(½β₂zΩ²) / (1 + V·cos²(½β₂zΩ²))`.
///
/// This is `(P₊ − P₋)/(P₊ + P₋)` of a matched-basis bit-0 state measured with
/// a reference calibrated at `z`. It is 0 at `z = 0` and `V` where
/// `β₂zΩ² = π`.
pub fn contrast<T: Scalar>(z: T, omega_rf: T, link: &LinkParams<T>, v: T) -> Result<T> {
    link.check_position(z)?;
    if !(v >= T::zero() && v <= T::one()) {
        return Err(invalid("visibility must lie in [0, 1]"));
    }
    let half = T::lit(0.5) * link.dispersion_product(z, omega_rf);
    let s = half.sin();
    let c = half.cos();
    Ok(v * s * s / (T::one() + v * c * c))
}

/// `QBER = ½·((1 − C)·p + d) / (p + d)`.
pub fn qber_from_contrast<T: Scalar>(c: T, p_signal: T, dark_prob: T) -> T {
    let den = p_signal + dark_prob;
    if den == T::zero() {
        return T::lit(0.5);
    }
    T::lit(0.5) * ((T::one() - c) * p_signal + dark_prob) / den
}

/// Closed-form QBER for a receiver at `z`, using [`contrast`] and the
/// detector's `p_signal(z) = μ·η·10^(−αz/10)`.
pub fn qber_closed_form<T: Scalar>(z: T, cfg: &SessionConfig<T>) -> Result<T> {
    cfg.validate()?;
    let v = crate::field::visibility(cfg.alice.m, cfg.bob.m)?;
    let c = contrast(z, cfg.omega_rf, &cfg.link, v)?;
    let p = cfg.det.signal_probability(cfg.link.loss_db(z));
    Ok(qber_from_contrast(c, p, cfg.det.dark_prob))
}

/// Dispersionless AM-AM baseline: the same expression with `C = V`,
/// independent of position.
pub fn am_am_reference_qber<T: Scalar>(v: T, dark_prob: T, p_signal: T) -> T {
    qber_from_contrast(v, p_signal, dark_prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::solve_length;
    use crate::detection::ClickOutcome;
    use crate::detection::ClickOutcome::{Both, Minus, Plus};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const OMEGA: f64 = 2.0 * PI * 15e9;

    fn design_link() -> LinkParams<f64> {
        let b: f64 = -2.17e-26;
        LinkParams::new(0.0, b, solve_length(b, OMEGA, 1).unwrap()).unwrap()
    }

    #[test]
    fn alice_phases() {
        assert_eq!(encode_alice::<f64>(Bit::Zero, Basis::First), 0.0);
        assert_eq!(encode_alice::<f64>(Bit::One, Basis::First), PI);
        assert_eq!(encode_alice::<f64>(Bit::Zero, Basis::Second), PI / 2.0);
        assert_eq!(encode_alice::<f64>(Bit::One, Basis::Second), 1.5 * PI);
    }

    #[test]
    fn bob_phases() {
        assert_eq!(choose_bob_phase(Basis::First, 0.0), 0.0);
        assert_eq!(choose_bob_phase(Basis::Second, 0.0), PI / 2.0);
        assert_eq!(choose_bob_phase(Basis::First, PI / 2.0), PI / 2.0);
    }

    #[test]
    fn bit_decisions() {
        assert_eq!(decide_bit(Plus), Some(Bit::Zero));
        assert_eq!(decide_bit(Minus), Some(Bit::One));
        assert_eq!(decide_bit(Both), None);
        assert_eq!(decide_bit(ClickOutcome::None), None);
    }

    #[test]
    fn sifting() {
        let a = |basis| AliceRecord {
            bit: Bit::Zero,
            basis,
        };
        let b = |basis, outcome| BobRecord { basis, outcome };
        let alice = vec![
            a(Basis::First),
            a(Basis::Second),
            a(Basis::First),
            a(Basis::Second),
        ];
        let same = vec![
            b(Basis::First, Plus),
            b(Basis::Second, Minus),
            b(Basis::First, Minus),
            b(Basis::Second, Plus),
        ];
        assert_eq!(sift(&alice, &same).unwrap(), vec![0, 1, 2, 3]);
        let crossed: Vec<_> = same
            .iter()
            .map(|r| BobRecord {
                basis: if r.basis == Basis::First {
                    Basis::Second
                } else {
                    Basis::First
                },
                ..*r
            })
            .collect();
        assert!(sift(&alice, &crossed).unwrap().is_empty());
        let ambiguous = vec![
            b(Basis::First, Both),
            b(Basis::Second, ClickOutcome::None),
            b(Basis::First, Plus),
            b(Basis::Second, Plus),
        ];
        assert_eq!(sift(&alice, &ambiguous).unwrap(), vec![2, 3]);
        assert!(sift(&alice[..2], &same).is_err());
    }

    #[test]
    fn uniform_bases_keep_half() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let (alice, bob): (Vec<_>, Vec<_>) = (0..n)
            .map(|_| {
                (
                    AliceRecord {
                        bit: Bit::from_bool(rng.gen()),
                        basis: Basis::from_bool(rng.gen()),
                    },
                    BobRecord {
                        basis: Basis::from_bool(rng.gen()),
                        outcome: Plus,
                    },
                )
            })
            .unzip();
        let kept = sift(&alice, &bob).unwrap().len() as f64 / n as f64;
        // σ = 5e-4; the ±0.15% band is 3σ
        assert!((kept - 0.5).abs() < 0.0015, "{kept}");
    }

    /// Matched-basis bit-0 state at `z`, receiver calibrated at `z`: enumerate
    /// the two outcomes from the cosine law and return the error fraction.
    fn decision_error_oracle(v: f64, theta: f64) -> f64 {
        // Alice bit 0, Bob matched: ΔΦ = 0 on the upper line, θ on the lower.
        let p_upper = 0.5 * (1.0 + v * 0.0f64.cos());
        let p_lower = 0.5 * (1.0 + v * theta.cos());
        // upper decides 0 (correct), lower decides 1 (error)
        p_lower / (p_upper + p_lower)
    }

    #[test]
    fn contrast_examples() {
        let link = design_link();
        let l = link.length;
        assert_eq!(contrast(0.0, OMEGA, &link, 0.98).unwrap(), 0.0);
        assert!((contrast(l, OMEGA, &link, 0.98).unwrap() - 0.98).abs() < 1e-12);
        let mid = contrast(l / 2.0, OMEGA, &link, 1.0).unwrap();
        assert!((mid - 1.0 / 3.0).abs() < 1e-12);
        // oracle: ½(1 − C) = e(z)  ⇒  C = 1 − 2 e(z)
        let from_oracle = 1.0 - 2.0 * decision_error_oracle(1.0, PI / 2.0);
        assert!((from_oracle - 1.0 / 3.0).abs() < 1e-15);
        assert!(contrast(l * 1.01, OMEGA, &link, 1.0).is_err());
    }

    #[test]
    fn qber_closed_form_examples() {
        assert!((qber_from_contrast(0.98f64, 1.0, 1e-12) - 0.01).abs() < 1e-11);
        assert_eq!(qber_from_contrast(0.98, 0.0, 8e-6), 0.5);
        assert!((qber_from_contrast(0.0f64, 0.3, 8e-6) - 0.5).abs() < 1e-15);
        assert!((am_am_reference_qber(0.98f64, 1e-12, 1.0) - 0.01).abs() < 1e-11);
        assert_eq!(am_am_reference_qber(1.0, 0.0, 0.2), 0.0);
        assert_eq!(am_am_reference_qber(0.98, 8e-6, 0.0), 0.5);
    }

    proptest! {
        #[test]
        fn contrast_matches_decision_oracle(v in 0.0f64..=1.0, frac in 0.0f64..=1.0) {
            let link = design_link();
            let c = contrast(frac * link.length, OMEGA, &link, v).unwrap();
            let theta = link.dispersion_product(frac * link.length, OMEGA);
            let e = decision_error_oracle(v, theta);
            prop_assert!((0.5 * (1.0 - c) - e).abs() < 1e-12);
            prop_assert!(c >= 0.0 && c <= v + 1e-15);
        }

        #[test]
        fn contrast_increases_along_design_link(v in 0.05f64..=1.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let link = design_link();
            let c_lo = contrast(lo * link.length, OMEGA, &link, v).unwrap();
            let c_hi = contrast(hi * link.length, OMEGA, &link, v).unwrap();
            prop_assert!(c_hi > c_lo);
        }
    }
}
