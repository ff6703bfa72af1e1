use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fixed::Enclosure;
use crate::error::{Error, Result};

/// Minimum number of fractional digits accepted in a decimal literal.
pub const MIN_DECIMAL_DIGITS: u32 = 30;

/// An exactly specified real number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alpha {
    /// `p / q`, reduced, `q > 0`.
    Rational { p: BigInt, q: BigInt },
    /// `(a + b·√d) / c` with `d > 0` non-square, `b ≠ 0`, `c > 0`, and
    /// `gcd(a, b, c) = 1`.
    Quadratic {
        a: BigInt,
        b: BigInt,
        c: BigInt,
        d: BigInt,
    },
    /// A decimal literal taken to be within one unit of its last digit:
    /// `|α − mantissa / 10^digits| ≤ 10^-digits`.
    Decimal { mantissa: BigInt, digits: u32 },
}

impl Alpha {
    pub fn rational(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        let (mut p, mut q) = (p.into(), q.into());
        if q.is_zero() {
            return Err(Error::Config("rational alpha with zero denominator".into()));
        }
        if q.is_negative() {
            p = -p;
            q = -q;
        }
        let g = p.gcd(&q);
        if !g.is_one() && !g.is_zero() {
            p /= &g;
            q /= &g;
        }
        Ok(Alpha::Rational { p, q })
    }

    pub fn quadratic(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let (mut a, mut b, mut c, d) = (a.into(), b.into(), c.into(), d.into());
        if !d.is_positive() {
            return Err(Error::Config(format!("quadratic alpha needs d > 0, got {d}")));
        }
        let r = d.sqrt();
        if &r * &r == d {
            return Err(Error::Config(format!("quadratic alpha needs non-square d, got {d}")));
        }
        if b.is_zero() {
            return Err(Error::Config("quadratic alpha needs b != 0".into()));
        }
        if c.is_zero() {
            return Err(Error::Config("quadratic alpha needs c != 0".into()));
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        Ok(Alpha::Quadratic { a, b, c, d })
    }

    pub fn sqrt(d: u64) -> Result<Self> {
        Alpha::quadratic(0, 1, 1, d)
    }

    pub fn golden_ratio() -> Self {
        Alpha::quadratic(1, 1, 2, 5).expect("valid")
    }

    /// Parses the decimal text (digits, one optional point, optional sign).
    pub fn decimal(text: &str) -> Result<Self> {
        let text = text.trim().trim_end_matches('…').trim_end_matches("...");
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
        let valid = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
        if (whole.is_empty() && frac.is_empty()) || !valid(whole) || !valid(frac) {
            return Err(Error::Config(format!("not a decimal literal: {text:?}")));
        }
        let digits = frac.len() as u32;
        if digits < MIN_DECIMAL_DIGITS {
            return Err(Error::Config(format!(
                "decimal alpha needs at least {MIN_DECIMAL_DIGITS} fractional digits, got {digits}"
            )));
        }
        let mut mantissa: BigInt = format!("{whole}{frac}").parse().expect("digits");
        if neg {
            mantissa = -mantissa;
        }
        Ok(Alpha::Decimal { mantissa, digits })
    }

    /// Parses `rat:p/q`, `quad:(a+b*sqrtd)/c` (and shorter forms such as
    /// `quad:sqrt2`), or `dec:3.1415…`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, body) = spec
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("alpha {spec:?} needs a rat:/quad:/dec: prefix")))?;
        match kind {
            "rat" => {
                let (p, q) = body.split_once('/').unwrap_or((body, "1"));
                let p: BigInt = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad numerator in {spec:?}")))?;
                let q: BigInt = q
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad denominator in {spec:?}")))?;
                Alpha::rational(p, q)
            }
            "quad" => parse_quadratic(body),
            "dec" => Alpha::decimal(body),
            other => Err(Error::Config(format!("unknown alpha kind {other:?}"))),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Alpha::Rational { .. })
    }

    /// Rational and quadratic values can be enclosed to any precision.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Alpha::Decimal { .. })
    }

    pub fn id(&self) -> String {
        self.to_string()
    }

    /// `α + k` for an integer `k`.
    pub fn shift(&self, k: i64) -> Alpha {
        let k = BigInt::from(k);
        match self {
            Alpha::Rational { p, q } => Alpha::Rational {
                p: p + &k * q,
                q: q.clone(),
            },
            Alpha::Quadratic { a, b, c, d } => {
                Alpha::quadratic(a + &k * c, b.clone(), c.clone(), d.clone()).expect("valid")
            }
            Alpha::Decimal { mantissa, digits } => Alpha::Decimal {
                mantissa: mantissa + k * BigInt::from(10u32).pow(*digits),
                digits: *digits,
            },
        }
    }

    /// `1/α` for the exactly representable variants.
    pub fn reciprocal(&self) -> Result<Alpha> {
        match self {
            Alpha::Rational { p, q } => Alpha::rational(q.clone(), p.clone()),
            Alpha::Quadratic { a, b, c, d } => {
                // c / (a + b√d) = c(a − b√d) / (a² − b²d); the denominator is
                // non-zero because √d is irrational.
                let den = a * a - b * b * d;
                Alpha::quadratic(c * a, -(c * b), den, d.clone())
            }
            Alpha::Decimal { .. } => Err(Error::Input(
                "decimal alpha has no exact reciprocal; use Enclosure::reciprocal".into(),
            )),
        }
    }

    /// Integer interval `[lo, hi]` with `lo/2^bits <= α <= hi/2^bits`.
    ///
    /// For rational and quadratic values the width is at most 2 units; for a
    /// decimal literal it is bounded below by its stated precision.
    pub fn enclose(&self, bits: u32) -> Enclosure {
        let scale = BigInt::one() << bits;
        match self {
            Alpha::Rational { p, q } => {
                let (lo, rem) = (p * &scale).div_mod_floor(q);
                let hi = if rem.is_zero() { lo.clone() } else { &lo + 1 };
                Enclosure::new(lo, hi, bits)
            }
            Alpha::Quadratic { a, b, c, d } => {
                // s <= |b|·√d·2^bits < s + 1
                let s = (b * b * d * &scale * &scale).sqrt();
                let base = a * &scale;
                let (num_lo, num_hi) = if b.is_positive() {
                    (&base + &s, &base + &s + 1)
                } else {
                    (&base - &s - 1, &base - &s)
                };
                Enclosure::new(num_lo.div_floor(c), ceil_div(&num_hi, c), bits)
            }
            Alpha::Decimal { mantissa, digits } => {
                let pow = BigInt::from(10u32).pow(*digits);
                let m_lo: BigInt = mantissa - 1u32;
                let m_hi: BigInt = mantissa + 1u32;
                let lo = (m_lo * &scale).div_floor(&pow);
                let hi = ceil_div(&(m_hi * &scale), &pow);
                Enclosure::new(lo, hi, bits)
            }
        }
    }

    /// Nearest `f64` (not certified).
    pub fn approx_f64(&self) -> f64 {
        self.enclose(128).midpoint_f64()
    }
}

pub(crate) fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

fn parse_quadratic(body: &str) -> Result<Alpha> {
    let err = || Error::Config(format!("bad quadratic alpha {body:?}; expected (a+b*sqrtd)/c"));
    let compact: String = body.chars().filter(|c| !c.is_whitespace()).collect();
    let (numer, denom) = if let Some(rest) = compact.strip_prefix('(') {
        let (inner, tail) = rest.split_once(')').ok_or_else(err)?;
        let denom = if tail.is_empty() {
            BigInt::one()
        } else {
            tail.strip_prefix('/')
                .ok_or_else(err)?
                .parse::<BigInt>()
                .map_err(|_| err())?
        };
        (inner.to_string(), denom)
    } else {
        match compact.rsplit_once('/') {
            Some((n, d)) => (n.to_string(), d.parse::<BigInt>().map_err(|_| err())?),
            None => (compact.clone(), BigInt::one()),
        }
    };
    let pos = numer.find("sqrt").ok_or_else(err)?;
    let d: BigInt = numer[pos + 4..].parse().map_err(|_| err())?;
    let head = &numer[..pos];
    let head = head.strip_suffix('*').unwrap_or(head);
    // head is "", "b", "-b", "a+", "a-", "a+b", "a-b", "+", "-"
    let split = head
        .char_indices()
        .skip(1)
        .filter(|&(_, ch)| ch == '+' || ch == '-')
        .map(|(i, _)| i)
        .last();
    let (a_text, b_text) = match split {
        Some(i) => (&head[..i], &head[i..]),
        None => ("", head),
    };
    let a: BigInt = if a_text.is_empty() {
        BigInt::zero()
    } else {
        a_text.parse().map_err(|_| err())?
    };
    let b: BigInt = match b_text {
        "" | "+" => BigInt::one(),
        "-" => -BigInt::one(),
        t => t.trim_start_matches('+').parse().map_err(|_| err())?,
    };
    Alpha::quadratic(a, b, denom, d)
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Rational { p, q } => write!(f, "rat:{p}/{q}"),
            Alpha::Quadratic { a, b, c, d } => {
                let surd = if b.is_one() {
                    format!("sqrt{d}")
                } else if *b == -BigInt::one() {
                    format!("-sqrt{d}")
                } else {
                    format!("{b}*sqrt{d}")
                };
                let numer = if a.is_zero() {
                    surd
                } else if b.is_negative() {
                    format!("{a}{surd}")
                } else {
                    format!("{a}+{surd}")
                };
                if c.is_one() {
                    write!(f, "quad:{numer}")
                } else {
                    write!(f, "quad:({numer})/{c}")
                }
            }
            Alpha::Decimal { mantissa, digits } => {
                let neg = mantissa.sign() == Sign::Minus;
                let text = mantissa.abs().to_string();
                let width = *digits as usize + 1;
                let padded = format!("{text:0>width$}");
                let (whole, frac) = padded.split_at(padded.len() - *digits as usize);
                write!(f, "dec:{}{whole}.{frac}", if neg { "-" } else { "" })
            }
        }
    }
}

/// Natural log of a positive big integer.
pub fn ln_big(n: &BigInt) -> f64 {
    debug_assert!(n.is_positive());
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for (text, canon) in [
            ("rat:355/113", "rat:355/113"),
            ("rat:-6/4", "rat:-3/2"),
            ("rat:0/1", "rat:0/1"),
            ("rat:7", "rat:7/1"),
            ("quad:(1+1*sqrt5)/2", "quad:(1+sqrt5)/2"),
            ("quad:sqrt2", "quad:sqrt2"),
            ("quad:2*sqrt3", "quad:2*sqrt3"),
            ("quad:(1-sqrt5)/2", "quad:(1-sqrt5)/2"),
            ("quad:-sqrt7", "quad:-sqrt7"),
            ("quad:3+2*sqrt2", "quad:3+2*sqrt2"),
            ("quad:(2+2*sqrt2)/4", "quad:(1+sqrt2)/2"),
            ("quad:(1+sqrt5)/-2", "quad:(-1-sqrt5)/2"),
            (
                "dec:3.14159265358979323846264338327950288",
                "dec:3.14159265358979323846264338327950288",
            ),
            (
                "dec:0.000000000000000000000000000001",
                "dec:0.000000000000000000000000000001",
            ),
        ] {
            let alpha = Alpha::parse(text).unwrap();
            assert_eq!(alpha.to_string(), canon, "{text}");
            assert_eq!(Alpha::parse(canon).unwrap(), alpha);
        }
    }

    #[test]
    fn rejects_invalid() {
        for bad in [
            "rat:1/0",
            "quad:sqrt4",
            "quad:(1+0*sqrt2)/1",
            "quad:(1+sqrt2)/0",
            "quad:sqrt-2",
            "dec:3.14",
            "dec:abc",
            "pi",
            "flt:1.0",
        ] {
            assert!(Alpha::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn enclosures_bracket_the_value() {
        let sqrt2 = Alpha::sqrt(2).unwrap();
        let e = sqrt2.enclose(60);
        // 2 * lo^2 <= 2^120 * 2 ... check lo^2 <= 2·4^60 <= hi^2
        let two = BigInt::from(2) << 120;
        assert!(&e.lo * &e.lo <= two && two <= &e.hi * &e.hi);
        assert!(&e.hi - &e.lo <= BigInt::from(2));

        let neg = Alpha::parse("quad:(1-sqrt5)/2").unwrap();
        let v = neg.approx_f64();
        assert!((v - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);

        let third = Alpha::rational(1, 3).unwrap().enclose(10);
        assert_eq!((third.lo.clone(), third.hi.clone()), (BigInt::from(341), BigInt::from(342)));
        let quarter = Alpha::rational(1, 4).unwrap().enclose(10);
        assert_eq!(quarter.lo, quarter.hi);
    }

    #[test]
    fn reciprocals() {
        let phi = Alpha::golden_ratio();
        let inv = phi.reciprocal().unwrap();
        assert!((inv.approx_f64() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let r = Alpha::rational(-3, 7).unwrap().reciprocal().unwrap();
        assert_eq!(r, Alpha::rational(-7, 3).unwrap());
        assert!(Alpha::parse("dec:3.14159265358979323846264338327950288")
            .unwrap()
            .reciprocal()
            .is_err());
    }

    #[test]
    fn shift_adds_integer() {
        let a = Alpha::sqrt(2).unwrap().shift(1);
        assert_eq!(a.to_string(), "quad:1+sqrt2");
        let d = Alpha::parse("dec:0.123456789012345678901234567890").unwrap().shift(2);
        assert_eq!(d.to_string(), "dec:2.123456789012345678901234567890");
    }

    #[test]
    fn big_logs() {
        let n = BigInt::from(10u32).pow(400);
        assert!((ln_big(&n) - 400.0 * 10f64.ln()).abs() < 1e-9);
        assert!((ln_big(&BigInt::from(1000)) - 1000f64.ln()).abs() < 1e-15);
    }
}
