use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    choose_bob_phase, decide_bit, encode_alice, qber_closed_form, sift, AliceRecord, Basis, Bit,
    BobRecord, QberReport,
};
use crate::detection::{click_probabilities, sample_clicks, DetectorParams};
use crate::error::{invalid, Result};
use crate::field::{calibrate_reference, Cascade, LinkParams, ModulationMode, ModulatorParams};
use crate::scalar::Scalar;

/// Pulses per RNG stream. Chunk `i` always draws from stream `i` of the
/// session seed, so results do not depend on how chunks are scheduled.
pub const CHUNK_PULSES: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig<T> {
    pub n_pulses: usize,
    pub link: LinkParams<T>,
    /// Alice's modulator; its phase is overwritten per pulse.
    pub alice: ModulatorParams<T>,
    /// Bob's modulator; its phase is overwritten per pulse.
    pub bob: ModulatorParams<T>,
    /// RF angular frequency Ω (rad/s).
    pub omega_rf: T,
    pub det: DetectorParams<T>,
    /// Where the measurement happens (m). `< link.length` models a receiver
    /// tapping the fiber part way.
    pub receiver_position_z: T,
    pub mode: ModulationMode,
    pub seed: u64,
}

impl<T: Scalar> SessionConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 {
            return Err(invalid("n_pulses must be >= 1"));
        }
        if !(self.omega_rf > T::zero()) {
            return Err(invalid("RF angular frequency must be positive"));
        }
        self.link.validate()?;
        self.alice.validate()?;
        self.bob.validate()?;
        self.det.validate()?;
        self.link.check_position(self.receiver_position_z)
    }

    pub fn at_position(&self, z: T) -> Self {
        Self {
            receiver_position_z: z,
            ..*self
        }
    }

    fn cascade(&self) -> Cascade<T> {
        Cascade {
            alice: self.alice,
            bob: self.bob,
            link: self.link,
            omega_rf: self.omega_rf,
        }
    }
}

const BASES: [Basis; 2] = [Basis::First, Basis::Second];
const BITS: [Bit; 2] = [Bit::Zero, Bit::One];

/// `(q_plus, q_minus)` for every (Alice basis, bit, Bob basis), indexed
/// `[alice_basis][bit][bob_basis]`.
type ClickTable<T> = [[[(T, T); 2]; 2]; 2];

fn click_table<T: Scalar>(cfg: &SessionConfig<T>) -> Result<ClickTable<T>> {
    let z = cfg.receiver_position_z;
    // the receiver calibrates its phase reference for its own position
    let offset = calibrate_reference(&cfg.link.truncated(z)?, cfg.omega_rf);
    let cascade = cfg.cascade();
    let loss = cfg.link.loss_db(z);
    let mut table = [[[(T::zero(), T::zero()); 2]; 2]; 2];
    for (ia, &a) in BASES.iter().enumerate() {
        for (ib, &bit) in BITS.iter().enumerate() {
            for (ic, &b) in BASES.iter().enumerate() {
                let c = cascade.with_phases(encode_alice(bit, a), choose_bob_phase(b, offset));
                let (p_plus, p_minus) = c.sideband_powers(z, cfg.mode)?;
                table[ia][ib][ic] = click_probabilities(
                    p_plus.min(T::one()),
                    p_minus.min(T::one()),
                    &cfg.det,
                    loss,
                )?;
            }
        }
    }
    Ok(table)
}

fn basis_index(b: Basis) -> usize {
    match b {
        Basis::First => 0,
        Basis::Second => 1,
    }
}

fn bit_index(b: Bit) -> usize {
    match b {
        Bit::Zero => 0,
        Bit::One => 1,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    pulses: u64,
    sifted: u64,
    errors: u64,
    double_clicks: u64,
    no_clicks: u64,
    mismatched_single: u64,
    mismatched_errors: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;
    fn add(self, o: Tally) -> Tally {
        Tally {
            pulses: self.pulses + o.pulses,
            sifted: self.sifted + o.sifted,
            errors: self.errors + o.errors,
            double_clicks: self.double_clicks + o.double_clicks,
            no_clicks: self.no_clicks + o.no_clicks,
            mismatched_single: self.mismatched_single + o.mismatched_single,
            mismatched_errors: self.mismatched_errors + o.mismatched_errors,
        }
    }
}

fn run_chunk<T: Scalar>(
    seed: u64,
    chunk: usize,
    pulses: usize,
    table: &ClickTable<T>,
) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);

    let mut alice = Vec::with_capacity(pulses);
    let mut bob = Vec::with_capacity(pulses);
    for _ in 0..pulses {
        let a = AliceRecord {
            bit: Bit::from_bool(rng.gen()),
            basis: Basis::from_bool(rng.gen()),
        };
        let b_basis = Basis::from_bool(rng.gen());
        let (q_plus, q_minus) = table[basis_index(a.basis)][bit_index(a.bit)][basis_index(b_basis)];
        let outcome = sample_clicks(q_plus, q_minus, &mut rng);
        alice.push(a);
        bob.push(BobRecord {
            basis: b_basis,
            outcome,
        });
    }

    let mut t = Tally {
        pulses: pulses as u64,
        ..Tally::default()
    };
    for b in &bob {
        match b.outcome {
            crate::detection::ClickOutcome::Both => t.double_clicks += 1,
            crate::detection::ClickOutcome::None => t.no_clicks += 1,
            _ => {}
        }
    }
    let kept = sift(&alice, &bob)?;
    t.sifted = kept.len() as u64;
    t.errors = kept
        .iter()
        .filter(|&&i| decide_bit(bob[i].outcome) != Some(alice[i].bit))
        .count() as u64;
    for (a, b) in alice.iter().zip(&bob) {
        if a.basis != b.basis {
            if let Some(bit) = decide_bit(b.outcome) {
                t.mismatched_single += 1;
                if bit != a.bit {
                    t.mismatched_errors += 1;
                }
            }
        }
    }
    Ok(t)
}

/// Runs a session on rayon's global pool.
pub fn run_session<T: Scalar>(cfg: &SessionConfig<T>) -> Result<QberReport<T>> {
    run_session_with_workers(cfg, 0)
}

/// Runs a session on a dedicated pool of `workers` threads (`0` = rayon's
/// default). The report is identical for every worker count.
pub fn run_session_with_workers<T: Scalar>(
    cfg: &SessionConfig<T>,
    workers: usize,
) -> Result<QberReport<T>> {
    cfg.validate()?;
    let table = click_table(cfg)?;
    let n_chunks = cfg.n_pulses.div_ceil(CHUNK_PULSES);
    let chunk_len = |i: usize| CHUNK_PULSES.min(cfg.n_pulses - i * CHUNK_PULSES);

    let work = || -> Result<Vec<Tally>> {
        (0..n_chunks)
            .into_par_iter()
            .map(|i| run_chunk(cfg.seed, i, chunk_len(i), &table))
            .collect()
    };
    let tallies = if workers == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?
            .install(work)?
    };
    let total = tallies.into_iter().fold(Tally::default(), |a, b| a + b);

    let closed = qber_closed_form(cfg.receiver_position_z, cfg)?;
    Ok(QberReport::from_counts(
        total.pulses,
        total.sifted,
        total.errors,
        total.double_clicks,
        total.no_clicks,
        total.mismatched_single,
        total.mismatched_errors,
        closed,
    ))
}

/// Exact expectation of the sifted error fraction the Monte-Carlo session
/// converges to: every matched (basis, bit) case is weighted by its
/// single-click probabilities `q₊(1 − q₋)` and `q₋(1 − q₊)`.
///
/// Unlike [`qber_closed_form`], this averages both bit values, so at
/// intermediate positions it corresponds to a contrast of `V·sin²(½β₂zΩ²)`.
pub fn sifted_qber_expectation<T: Scalar>(cfg: &SessionConfig<T>) -> Result<T> {
    cfg.validate()?;
    let table = click_table(cfg)?;
    let mut single = T::zero();
    let mut wrong = T::zero();
    for &basis in &BASES {
        for &bit in &BITS {
            let (qp, qm) = table[basis_index(basis)][bit_index(bit)][basis_index(basis)];
            let plus_only = qp * (T::one() - qm);
            let minus_only = qm * (T::one() - qp);
            single = single + plus_only + minus_only;
            wrong = wrong
                + match bit {
                    Bit::Zero => minus_only,
                    Bit::One => plus_only,
                };
        }
    }
    if single == T::zero() {
        return Err(invalid("no single clicks are possible"));
    }
    Ok(wrong / single)
}
