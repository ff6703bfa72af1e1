//! Major/minor arc classification of `α` at scale `x`.
//!
//! With `L = log x`, `R = L^(A+1)` and `Q = R^12 L^26 = L^(12A+38)`, `α` is on
//! a minor arc when some convergent denominator satisfies `Q < q_j <= x/Q`.
//! Otherwise the last convergent with `q_i <= Q` has `q_(i+1) > x/Q` and `α`
//! sits within `1/(q_i q_(i+1))` of `a_i/q_i`.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::alpha::{ln_big, Alpha};
use super::cf::{continued_fraction, deviation, Convergent};
use crate::error::{Error, Result};

const MAX_TERMS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcClassification {
    pub x: String,
    #[serde(rename = "A")]
    pub a_exponent: f64,
    pub log_x: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "Q")]
    pub q_threshold: f64,
    pub log_q_threshold: f64,
    /// `log(x/Q)`.
    pub log_upper: f64,
    pub verdict: ArcVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ArcVerdict {
    /// Smallest convergent denominator in `(Q, x/Q]`.
    Minor { convergent: Convergent },
    /// Last convergent with `q <= Q`; `β = α − a/q` lies in
    /// `[beta_lo, beta_hi]`.
    Major {
        convergent: Convergent,
        #[serde(serialize_with = "ser_bigint")]
        next_q: BigInt,
        beta_lo: f64,
        beta_hi: f64,
    },
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl ArcVerdict {
    pub fn is_minor(&self) -> bool {
        matches!(self, ArcVerdict::Minor { .. })
    }

    pub fn convergent(&self) -> &Convergent {
        match self {
            ArcVerdict::Minor { convergent } | ArcVerdict::Major { convergent, .. } => convergent,
        }
    }
}

/// Compares `log q` to a threshold, refusing to decide near-ties that the
/// `f64` logarithms cannot separate.
fn cmp_log(log_q: f64, threshold: f64) -> Result<Ordering> {
    let tol = 1e-10 * threshold.abs().max(1.0);
    if (log_q - threshold).abs() <= tol {
        return Err(Error::PrecisionExhausted(format!(
            "log q = {log_q} is within {tol:e} of the threshold {threshold}"
        )));
    }
    Ok(log_q.partial_cmp(&threshold).unwrap_or(Ordering::Equal))
}

pub fn classify_arc(alpha: &Alpha, x: &BigUint, a_exponent: f64) -> Result<ArcClassification> {
    if alpha.is_rational() {
        return Err(Error::Input(
            "arc classification assumes irrational alpha".into(),
        ));
    }
    if *x < BigUint::from(16u32) {
        return Err(Error::Input(format!("classify_arc needs x >= 16, got {x}")));
    }
    if !(a_exponent >= 0.0 && a_exponent.is_finite()) {
        return Err(Error::Input(format!("A must be finite and >= 0, got {a_exponent}")));
    }
    let log_x = ln_big(&BigInt::from(x.clone()));
    let log_l = log_x.ln();
    let log_q_threshold = (12.0 * a_exponent + 38.0) * log_l;
    let log_upper = log_x - log_q_threshold;
    let stop_at = log_q_threshold.max(log_upper);

    let mut terms = 64usize;
    let convergents = loop {
        let cf = continued_fraction(alpha, terms)?;
        let reached = cf
            .convergents
            .last()
            .is_some_and(|c| ln_big(&c.q) > stop_at);
        if reached {
            break cf.convergents;
        }
        if cf.truncated || terms >= MAX_TERMS {
            return Err(Error::PrecisionExhausted(format!(
                "continued fraction of {alpha} certified only to {} terms, not enough for x = {x}",
                cf.quotients.len()
            )));
        }
        terms *= 2;
    };

    let logs: Vec<f64> = convergents.iter().map(|c| ln_big(&c.q)).collect();
    let mut minor = None;
    for (c, &lq) in convergents.iter().zip(&logs) {
        if cmp_log(lq, log_q_threshold)? == Ordering::Greater {
            if cmp_log(lq, log_upper)? != Ordering::Greater {
                minor = Some(c.clone());
            }
            break;
        }
    }

    let verdict = match minor {
        Some(convergent) => ArcVerdict::Minor { convergent },
        None => {
            let mut last = None;
            for (i, &lq) in logs.iter().enumerate() {
                if cmp_log(lq, log_q_threshold)? == Ordering::Greater {
                    break;
                }
                last = Some(i);
            }
            let i = last.ok_or_else(|| Error::Invariant("no convergent with q <= Q".into()))?;
            let convergent = convergents[i].clone();
            let next_q = convergents[i + 1].q.clone();
            if cmp_log(logs[i + 1], log_upper)? != Ordering::Greater {
                return Err(Error::Invariant(format!(
                    "q_{} does not exceed x/Q in a major-arc verdict",
                    i + 2
                )));
            }
            let (beta_lo, beta_hi) = beta_interval(alpha, &convergent, &next_q);
            ArcVerdict::Major {
                convergent,
                next_q,
                beta_lo,
                beta_hi,
            }
        }
    };

    Ok(ArcClassification {
        x: x.to_string(),
        a_exponent,
        log_x,
        r: ((a_exponent + 1.0) * log_l).exp(),
        q_threshold: log_q_threshold.exp(),
        log_q_threshold,
        log_upper,
        verdict,
    })
}

/// Outward-rounded `f64` interval for `α − a/q`.
fn beta_interval(alpha: &Alpha, c: &Convergent, next_q: &BigInt) -> (f64, f64) {
    let bits = 64 + c.q.bits() as u32 + next_q.bits() as u32;
    let enclosure = alpha.enclose(bits);
    let (lo, hi) = deviation(&enclosure, c);
    let den = &c.q << bits;
    let to_f64 = |v: BigInt| BigRational::new(v, den.clone()).to_f64().unwrap_or(f64::NAN);
    let lo_f = to_f64(lo.clone());
    let hi_f = to_f64(hi.clone());
    let down = |v: f64, exact_zero: bool| if exact_zero { v } else { v.next_down() };
    let up = |v: f64, exact_zero: bool| if exact_zero { v } else { v.next_up() };
    (down(lo_f, lo.is_zero()), up(hi_f, hi.is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_at_a_million_is_major() {
        let sqrt2 = Alpha::sqrt(2).unwrap();
        let cls = classify_arc(&sqrt2, &BigUint::from(1_000_000u32), 0.0).unwrap();
        // Q = (log 10^6)^38 ≈ 1.6e43 is far above x/Q
        assert!((cls.log_q_threshold - 38.0 * (1e6f64).ln().ln()).abs() < 1e-9);
        assert!(cls.log_upper < cls.log_q_threshold);
        match &cls.verdict {
            ArcVerdict::Major {
                convergent,
                next_q,
                beta_lo,
                beta_hi,
            } => {
                assert!(ln_big(&convergent.q) <= cls.log_q_threshold);
                assert!(ln_big(next_q) > cls.log_q_threshold);
                let beta_mid = 0.5 * (beta_lo + beta_hi);
                assert!(beta_lo <= beta_hi);
                let bound = 1.0 / (convergent.q.to_f64().unwrap() * next_q.to_f64().unwrap());
                assert!(beta_mid.abs() <= bound);
            }
            other => panic!("expected major, got {other:?}"),
        }
    }

    #[test]
    fn sqrt2_minor_at_astronomical_x() {
        // L > 76 log L needs log x around 500; take x = 2^722.
        let x = BigUint::from(1u32) << 722u32;
        let cls = classify_arc(&Alpha::sqrt(2).unwrap(), &x, 0.0).unwrap();
        assert!(cls.log_q_threshold < cls.log_upper);
        match &cls.verdict {
            ArcVerdict::Minor { convergent } => {
                let lq = ln_big(&convergent.q);
                assert!(cls.log_q_threshold < lq && lq <= cls.log_upper);
            }
            other => panic!("expected minor, got {other:?}"),
        }
    }

    #[test]
    fn rejects_rationals_and_small_x() {
        let rat = Alpha::rational(1, 3).unwrap();
        assert!(classify_arc(&rat, &BigUint::from(1000u32), 0.0).is_err());
        assert!(classify_arc(&Alpha::sqrt(2).unwrap(), &BigUint::from(15u32), 0.0).is_err());
        assert!(classify_arc(&Alpha::sqrt(2).unwrap(), &BigUint::from(100u32), -1.0).is_err());
    }

    #[test]
    fn decimal_runs_out_of_digits() {
        let pi = Alpha::parse("dec:3.14159265358979323846264338327950288").unwrap();
        assert!(matches!(
            classify_arc(&pi, &BigUint::from(1_000_000u32), 0.0),
            Err(Error::PrecisionExhausted(_))
        ));
    }
}
