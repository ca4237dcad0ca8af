use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Sifted-key statistics of one session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QberReport<T> {
    pub pulses: u64,
    pub sifted_count: u64,
    pub error_count: u64,
    /// `error_count / sifted_count`; `None` when nothing survived sifting.
    pub qber_estimate: Option<T>,
    pub qber_closed_form: T,
    /// `√(q(1 − q)/n)` of the estimate.
    pub binomial_std_error: Option<T>,
    pub double_click_count: u64,
    pub no_click_count: u64,
    /// Single-click pulses discarded for mismatched bases.
    pub mismatched_single_count: u64,
    /// Of those, how many decoded to the wrong bit.
    pub mismatched_error_count: u64,
}

const KEYS: [&str; 10] = [
    "pulses",
    "sifted_count",
    "error_count",
    "qber_estimate",
    "qber_closed_form",
    "binomial_std_error",
    "double_click_count",
    "no_click_count",
    "mismatched_single_count",
    "mismatched_error_count",
];

const UNDEFINED: &str = "undefined";

impl<T: Scalar> QberReport<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn from_counts(
        pulses: u64,
        sifted: u64,
        errors: u64,
        double_clicks: u64,
        no_clicks: u64,
        mismatched_single: u64,
        mismatched_errors: u64,
        closed_form: T,
    ) -> Self {
        let (estimate, se) = if sifted > 0 {
            let n = T::from_u64(sifted).unwrap();
            let q = T::from_u64(errors).unwrap() / n;
            (Some(q), Some((q * (T::one() - q) / n).sqrt()))
        } else {
            (None, None)
        };
        Self {
            pulses,
            sifted_count: sifted,
            error_count: errors,
            qber_estimate: estimate,
            qber_closed_form: closed_form,
            binomial_std_error: se,
            double_click_count: double_clicks,
            no_click_count: no_clicks,
            mismatched_single_count: mismatched_single,
            mismatched_error_count: mismatched_errors,
        }
    }

    fn values(&self) -> [String; 10] {
        let opt = |v: Option<T>| {
            v.map(|x| format!("{x:e}"))
                .unwrap_or_else(|| UNDEFINED.to_string())
        };
        [
            self.pulses.to_string(),
            self.sifted_count.to_string(),
            self.error_count.to_string(),
            opt(self.qber_estimate),
            format!("{:e}", self.qber_closed_form),
            opt(self.binomial_std_error),
            self.double_click_count.to_string(),
            self.no_click_count.to_string(),
            self.mismatched_single_count.to_string(),
            self.mismatched_error_count.to_string(),
        ]
    }

    /// One `key=value` per line.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(self.values()) {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn csv_header() -> String {
        KEYS.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        self.values().join(",")
    }

    /// Parses the output of [`QberReport::to_key_value`].
    pub fn from_key_value(text: &str) -> Result<Self> {
        let mut fields: [Option<&str>; 10] = [None; 10];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("malformed report line '{line}'")))?;
            let idx = KEYS
                .iter()
                .position(|&key| key == k.trim())
                .ok_or_else(|| invalid(format!("unknown report key '{}'", k.trim())))?;
            fields[idx] = Some(v.trim());
        }
        let get = |i: usize| {
            fields[i].ok_or_else(|| invalid(format!("missing report key '{}'", KEYS[i])))
        };
        let int = |i: usize| -> Result<u64> {
            get(i)?
                .parse()
                .map_err(|_| invalid(format!("bad integer for '{}'", KEYS[i])))
        };
        let real = |i: usize| -> Result<T> {
            let s = get(i)?;
            f64::from_str(s)
                .ok()
                .and_then(T::from_f64)
                .ok_or_else(|| invalid(format!("bad number for '{}'", KEYS[i])))
        };
        let opt = |i: usize| -> Result<Option<T>> {
            if get(i)? == UNDEFINED {
                Ok(None)
            } else {
                real(i).map(Some)
            }
        };
        Ok(Self {
            pulses: int(0)?,
            sifted_count: int(1)?,
            error_count: int(2)?,
            qber_estimate: opt(3)?,
            qber_closed_form: real(4)?,
            binomial_std_error: opt(5)?,
            double_click_count: int(6)?,
            no_click_count: int(7)?,
            mismatched_single_count: int(8)?,
            mismatched_error_count: int(9)?,
        })
    }
}
