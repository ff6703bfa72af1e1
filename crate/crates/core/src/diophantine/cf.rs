//! Continued fraction expansions and convergents.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::alpha::{ln_big, Alpha};
use super::fixed::Enclosure;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Convergent {
    /// One-based position in the expansion.
    pub index: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub a: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub q: BigInt,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub quotients: Vec<BigInt>,
    pub convergents: Vec<Convergent>,
    /// The expansion ended because `α` is rational and fully expanded.
    pub terminated: bool,
    /// The expansion stopped because the next quotient could not be certified.
    pub truncated: bool,
}

/// Expands `α` into at most `max_terms` partial quotients.
///
/// Rational input runs the Euclidean algorithm; quadratic irrationals use the
/// exact periodic recurrence on `(P + √D) / Q`; decimal literals expand both
/// ends of their uncertainty interval and stop before the first quotient on
/// which the ends disagree.
pub fn continued_fraction(alpha: &Alpha, max_terms: usize) -> Result<ContinuedFraction> {
    if max_terms == 0 {
        return Err(Error::Input("continued_fraction needs max_terms >= 1".into()));
    }
    let (quotients, terminated, truncated) = match alpha {
        Alpha::Rational { p, q } => {
            let (qs, done) = euclid(p.clone(), q.clone(), max_terms);
            (qs, done, false)
        }
        Alpha::Quadratic { a, b, c, d } => (quadratic_quotients(a, b, c, d, max_terms), false, false),
        Alpha::Decimal { mantissa, digits } => {
            let pow = BigInt::from(10u32).pow(*digits);
            let lo = BigRational::new(mantissa - 1, pow.clone());
            let hi = BigRational::new(mantissa + 1, pow);
            let (qs, truncated) = interval_quotients(lo, hi, max_terms);
            (qs, false, truncated)
        }
    };
    let convergents = convergents_from(&quotients);
    Ok(ContinuedFraction {
        quotients,
        convergents,
        terminated,
        truncated,
    })
}

fn euclid(mut p: BigInt, mut q: BigInt, max_terms: usize) -> (Vec<BigInt>, bool) {
    let mut out = Vec::new();
    while out.len() < max_terms {
        let (c, r) = p.div_mod_floor(&q);
        out.push(c);
        if r.is_zero() {
            return (out, true);
        }
        p = q;
        q = r;
    }
    (out, false)
}

fn quadratic_quotients(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt, max_terms: usize) -> Vec<BigInt> {
    // α = (P + √D) / Q with D = b²d.
    let big_d = b * b * d;
    let (mut p, mut q) = if b.is_positive() {
        (a.clone(), c.clone())
    } else {
        (-a, -c)
    };
    // The recurrence needs Q | D − P².
    let (mut big_d, rem) = (big_d.clone(), (&big_d - &p * &p).mod_floor(&q));
    if !rem.is_zero() {
        let scale = q.abs();
        p *= &scale;
        big_d *= &scale * &scale;
        q *= &scale;
    }
    let s = big_d.sqrt();
    let mut out = Vec::with_capacity(max_terms);
    while out.len() < max_terms {
        // ⌊(P + √D)/Q⌋; the quotient is irrational so the floor of the
        // integer part gives it exactly.
        let t: BigInt = &p + &s;
        let c_k = if q.is_positive() {
            t.div_floor(&q)
        } else {
            let neg_q: BigInt = -&q;
            let f: BigInt = t.div_floor(&neg_q);
            -(f + 1u32)
        };
        let p_next = &c_k * &q - &p;
        let q_next = (&big_d - &p_next * &p_next) / &q;
        out.push(c_k);
        p = p_next;
        q = q_next;
    }
    out
}

fn interval_quotients(mut lo: BigRational, mut hi: BigRational, max_terms: usize) -> (Vec<BigInt>, bool) {
    let mut out = Vec::new();
    while out.len() < max_terms {
        let c = lo.floor().to_integer();
        if hi.floor().to_integer() != c {
            return (out, true);
        }
        let c_r = BigRational::from_integer(c.clone());
        if lo == c_r {
            // the next step would divide by a possibly zero remainder
            return (out, true);
        }
        out.push(c);
        let next_lo = (&hi - &c_r).recip();
        let next_hi = (&lo - &c_r).recip();
        lo = next_lo;
        hi = next_hi;
    }
    (out, false)
}

fn convergents_from(quotients: &[BigInt]) -> Vec<Convergent> {
    let (mut a_prev, mut a) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    quotients
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let a_next = c * &a + &a_prev;
            let q_next = c * &q + &q_prev;
            a_prev = std::mem::replace(&mut a, a_next);
            q_prev = std::mem::replace(&mut q, q_next);
            Convergent {
                index: i + 1,
                a: a.clone(),
                q: q.clone(),
            }
        })
        .collect()
}

/// `log q_{j+1} / log q_j` over consecutive convergents with `q_j >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrationalityProfile {
    /// `(j, ratio)` with `j` the index of `q_j`.
    pub ratios: Vec<(usize, f64)>,
    pub running_max: Vec<f64>,
    /// `1 + max ratio` over the computed range, a finite-range proxy for
    /// the irrationality measure, never an extrapolation.
    pub measure_proxy: f64,
}

pub fn irrationality_profile(cf: &ContinuedFraction) -> Result<IrrationalityProfile> {
    if cf.terminated {
        return Err(Error::Input(
            "rational alpha has a terminating expansion; no irrationality profile".into(),
        ));
    }
    let usable: Vec<&Convergent> = cf
        .convergents
        .iter()
        .filter(|c| c.q >= BigInt::from(2))
        .collect();
    if usable.len() < 3 {
        return Err(Error::Input(format!(
            "irrationality profile needs >= 3 convergents with q >= 2, got {}",
            usable.len()
        )));
    }
    let mut ratios = Vec::new();
    let mut running_max = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for pair in usable.windows(2) {
        let r = ln_big(&pair[1].q) / ln_big(&pair[0].q);
        best = best.max(r);
        ratios.push((pair[0].index, r));
        running_max.push(best);
    }
    Ok(IrrationalityProfile {
        ratios,
        running_max,
        measure_proxy: 1.0 + best,
    })
}

/// Result of checking the convergent laws against a certified enclosure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergentLaws {
    pub checked: usize,
    pub coprime: bool,
    pub recurrences: bool,
    pub denominators_increasing: bool,
    pub sign_alternates: bool,
    pub approximation_bound: bool,
    /// Human-readable notes on the first failures, if any.
    pub failures: Vec<String>,
}

impl ConvergentLaws {
    pub fn all_hold(&self) -> bool {
        self.coprime
            && self.recurrences
            && self.denominators_increasing
            && self.sign_alternates
            && self.approximation_bound
    }
}

/// Verifies `gcd(a_j, q_j) = 1`, the three-term recurrences, the sign
/// alternation of `α − a_j/q_j` and `|α − a_j/q_j| <= 1/(q_j q_{j+1})`,
/// the last two with interval arithmetic at a precision that grows with
/// `q_{j+1}`.
pub fn check_convergent_laws(alpha: &Alpha, cf: &ContinuedFraction) -> Result<ConvergentLaws> {
    let conv = &cf.convergents;
    let mut laws = ConvergentLaws {
        checked: conv.len(),
        coprime: true,
        recurrences: true,
        denominators_increasing: true,
        sign_alternates: true,
        approximation_bound: true,
        failures: Vec::new(),
    };
    for (j, c) in conv.iter().enumerate() {
        if !c.a.gcd(&c.q).is_one() {
            laws.coprime = false;
            laws.failures.push(format!("gcd(a_{0}, q_{0}) != 1", c.index));
        }
        let (a2, q2) = if j >= 2 {
            (conv[j - 2].a.clone(), conv[j - 2].q.clone())
        } else if j == 1 {
            (BigInt::one(), BigInt::zero())
        } else {
            (BigInt::zero(), BigInt::one())
        };
        let (a1, q1) = if j >= 1 {
            (conv[j - 1].a.clone(), conv[j - 1].q.clone())
        } else {
            (BigInt::one(), BigInt::zero())
        };
        let cq = &cf.quotients[j];
        if c.a != cq * &a1 + &a2 || c.q != cq * &q1 + &q2 {
            laws.recurrences = false;
            laws.failures.push(format!("recurrence fails at j = {}", c.index));
        }
        // q_1 = 1 may equal q_2 = c_2 = 1 (golden ratio); strict from then on.
        if j >= 2 && c.q <= q1 {
            laws.denominators_increasing = false;
            laws.failures.push(format!("q_{} not increasing", c.index));
        }
    }
    // Interval checks stop before the last convergent of a rational, where
    // α − a/q = 0 exactly.
    let limit = if cf.terminated {
        conv.len().saturating_sub(1)
    } else {
        conv.len()
    };
    for j in 0..limit {
        let c = &conv[j];
        let next_q = conv.get(j + 1).map(|n| n.q.clone());
        let (lo, hi, bits) = match alpha {
            // exact: (p q_j − a_j r) / r, with r = 2^bits replaced by the
            // denominator itself
            Alpha::Rational { p, q } => {
                let d = p * &c.q - &c.a * q;
                (d.clone(), d, u32::MAX)
            }
            _ => {
                let bits = 96 + 2 * next_q.as_ref().unwrap_or(&c.q).bits() as u32;
                let (lo, hi) = deviation(&alpha.enclose(bits), c);
                (lo, hi, bits)
            }
        };
        let sign = if lo.is_positive() {
            1
        } else if hi.is_negative() {
            -1
        } else {
            0
        };
        let expected = if j % 2 == 0 { 1 } else { -1 };
        if sign != expected {
            laws.sign_alternates = false;
            laws.failures.push(format!(
                "sign of α − a_{0}/q_{0} not certified as {expected:+}",
                c.index
            ));
        }
        if let Some(q_next) = next_q {
            // |α q − a| · q_next <= 1, scaled by 2^bits
            let worst = lo.abs().max(hi.abs());
            let unit = match alpha {
                Alpha::Rational { q, .. } => q.clone(),
                _ => BigInt::one() << bits,
            };
            if worst * q_next > unit {
                laws.approximation_bound = false;
                laws.failures.push(format!(
                    "|α − a_{0}/q_{0}| <= 1/(q_{0} q_{1}) not certified",
                    c.index,
                    c.index + 1
                ));
            }
        }
    }
    Ok(laws)
}

/// `α·q − a` enclosed, in units of `2^-bits`.
pub(crate) fn deviation(enclosure: &Enclosure, c: &Convergent) -> (BigInt, BigInt) {
    let shift = &c.a << enclosure.bits;
    (&enclosure.lo * &c.q - &shift, &enclosure.hi * &c.q - shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(cf: &ContinuedFraction) -> Vec<(i64, i64)> {
        cf.convergents
            .iter()
            .map(|c| (c.a.to_string().parse().unwrap(), c.q.to_string().parse().unwrap()))
            .collect()
    }

    #[test]
    fn sqrt2_expansion() {
        let cf = continued_fraction(&Alpha::sqrt(2).unwrap(), 5).unwrap();
        let qs: Vec<i64> = cf.quotients.iter().map(|q| q.to_string().parse().unwrap()).collect();
        assert_eq!(qs, vec![1, 2, 2, 2, 2]);
        assert_eq!(pairs(&cf), vec![(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]);
        assert!(!cf.terminated && !cf.truncated);
    }

    #[test]
    fn golden_ratio_is_fibonacci() {
        let cf = continued_fraction(&Alpha::golden_ratio(), 30).unwrap();
        assert!(cf.quotients.iter().all(|q| q.is_one()));
        let (mut f0, mut f1) = (1i64, 1i64);
        for c in &cf.convergents {
            assert_eq!(c.q, BigInt::from(f0));
            assert_eq!(c.a, BigInt::from(f1));
            let next = f0 + f1;
            f0 = f1;
            f1 = next;
        }
    }

    #[test]
    fn rational_terminates() {
        let cf = continued_fraction(&Alpha::rational(355, 113).unwrap(), 10).unwrap();
        assert_eq!(cf.quotients, vec![BigInt::from(3), BigInt::from(7), BigInt::from(16)]);
        assert!(cf.terminated);
        assert_eq!(pairs(&cf).last(), Some(&(355, 113)));
        let neg = continued_fraction(&Alpha::rational(-7, 3).unwrap(), 10).unwrap();
        assert_eq!(neg.quotients, vec![BigInt::from(-3), BigInt::from(1), BigInt::from(2)]);
        assert!(continued_fraction(&Alpha::rational(1, 2).unwrap(), 0).is_err());
    }

    #[test]
    fn general_quadratics_match_float_expansion() {
        for (spec, expected) in [
            ("quad:sqrt3", vec![1, 1, 2, 1, 2, 1, 2]),
            ("quad:(1-sqrt5)/2", vec![-1, 2, 1, 1, 1, 1, 1]),
            ("quad:-sqrt2", vec![-2, 1, 1, 2, 2, 2, 2]),
            ("quad:(3+sqrt7)/5", vec![1, 7, 1, 2, 1, 8, 13]),
            ("quad:2*sqrt3", vec![3, 2, 6, 2, 6, 2, 6]),
        ] {
            let cf = continued_fraction(&Alpha::parse(spec).unwrap(), expected.len()).unwrap();
            let got: Vec<i64> = cf.quotients.iter().map(|q| q.to_string().parse().unwrap()).collect();
            assert_eq!(got, expected, "{spec}");
        }
    }

    #[test]
    fn decimal_expansion_stops_honestly() {
        let pi = Alpha::parse("dec:3.14159265358979323846264338327950288").unwrap();
        let cf = continued_fraction(&pi, 200).unwrap();
        assert!(cf.truncated);
        let qs: Vec<i64> = cf.quotients.iter().take(5).map(|q| q.to_string().parse().unwrap()).collect();
        assert_eq!(qs, vec![3, 7, 15, 1, 292]);
        assert!(cf.quotients.len() > 20 && cf.quotients.len() < 80);
        // Every emitted convergent is a convergent of both interval ends; the
        // certified laws must therefore hold.
        let laws = check_convergent_laws(&pi, &cf).unwrap();
        assert!(laws.coprime && laws.recurrences);
    }

    #[test]
    fn profiles() {
        let cf = continued_fraction(&Alpha::sqrt(2).unwrap(), 40).unwrap();
        let prof = irrationality_profile(&cf).unwrap();
        let last = prof.ratios.last().unwrap().1;
        assert!(last > 1.0 && last < 1.05);
        assert!(prof.running_max.windows(2).all(|w| w[0] <= w[1]));
        let rat = continued_fraction(&Alpha::rational(355, 113).unwrap(), 10).unwrap();
        assert!(irrationality_profile(&rat).is_err());
        let short = continued_fraction(&Alpha::sqrt(2).unwrap(), 3).unwrap();
        assert!(irrationality_profile(&short).is_err());
    }

    #[test]
    fn laws_hold_for_classics() {
        for alpha in [Alpha::sqrt(2).unwrap(), Alpha::golden_ratio(), Alpha::parse("quad:(3+sqrt7)/5").unwrap()] {
            let cf = continued_fraction(&alpha, 60).unwrap();
            let laws = check_convergent_laws(&alpha, &cf).unwrap();
            assert!(laws.all_hold(), "{alpha}: {:?}", laws.failures);
        }
        let rat = Alpha::rational(355, 113).unwrap();
        let cf = continued_fraction(&rat, 10).unwrap();
        assert!(check_convergent_laws(&rat, &cf).unwrap().all_hold());
    }
}
