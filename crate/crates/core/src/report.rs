//! Audit reports and the fixed-precision number formatting used by every
//! emitted artifact.

use serde::{Serialize, Serializer};

/// Number of significant digits in emitted CSV/JSON numbers.
pub const SIG_DIGITS: usize = 12;

/// Formats like C's `%.12g`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds to `SIG_DIGITS` significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

pub fn ser_sig<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

pub fn ser_sig_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&round_sig(*x))?;
    }
    seq.end()
}

pub fn ser_sig_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&round_sig(*v)),
        None => s.serialize_none(),
    }
}

/// One audited relation. The `check` string carries the anchor label of the
/// relation in square brackets so failures are traceable.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub check: String,
    #[serde(serialize_with = "ser_sig")]
    pub lhs: f64,
    #[serde(serialize_with = "ser_sig")]
    pub rhs: f64,
    #[serde(serialize_with = "ser_sig")]
    pub slack: f64,
    pub pass: bool,
}

impl Check {
    /// `lhs <= rhs + tol`; slack is `rhs - lhs`.
    pub fn le(name: &str, anchor: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Check {
            check: label(name, anchor),
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs + tol,
        }
    }

    /// `|lhs - rhs| <= tol`; slack is `tol - |lhs - rhs|`.
    pub fn eq(name: &str, anchor: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let dev = (lhs - rhs).abs();
        Check {
            check: label(name, anchor),
            lhs,
            rhs,
            slack: tol - dev,
            pass: dev <= tol,
        }
    }

    /// A boolean finding with the measured value as `lhs` and threshold as `rhs`.
    pub fn flag(name: &str, anchor: &str, lhs: f64, rhs: f64, pass: bool) -> Self {
        Check {
            check: label(name, anchor),
            lhs,
            rhs,
            slack: rhs - lhs,
            pass,
        }
    }
}

fn label(name: &str, anchor: &str) -> String {
    if anchor.is_empty() {
        name.to_string()
    } else {
        format!("{name} [{anchor}]")
    }
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct AuditReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl AuditReport {
    pub fn new(suite: impl Into<String>) -> Self {
        AuditReport {
            suite: suite.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: AuditReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}
