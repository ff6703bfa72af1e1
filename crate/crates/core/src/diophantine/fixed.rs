//! Certified fixed-point arithmetic for `α·n mod 1` and `⌊α·n⌋`.
//!
//! An [`Enclosure`] is an integer interval `[lo, hi]` in units of `2^-bits`
//! known to contain `α`. Multiplying by a positive integer `n` scales both
//! ends, so the fractional part of `α·n` is known up to `(hi − lo)·n` units.
//! The mantissa width rule is `bits >= ceil(log2(n)) + guard`, which keeps
//! that error below `2^-guard` times the enclosure width.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use super::alpha::Alpha;
use crate::error::{Error, Result};

/// Target accuracy for every certified fractional part.
pub const PHASE_TOLERANCE: f64 = 3.552713678800501e-15; // 2^-48
pub const MIN_GUARD_BITS: u32 = 64;

/// Error of rounding a value in `[0, 1)` to `f64` by truncating to 53 bits.
const F64_TRUNCATION: f64 = 1.1102230246251565e-16; // 2^-53

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: BigInt,
    pub hi: BigInt,
    pub bits: u32,
}

impl Enclosure {
    pub fn new(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        debug_assert!(lo <= hi);
        Enclosure { lo, hi, bits }
    }

    pub fn width_units(&self) -> BigInt {
        &self.hi - &self.lo
    }

    /// Width as a real number.
    pub fn width(&self) -> f64 {
        scaled_to_f64(&self.width_units(), self.bits)
    }

    pub fn lo_f64(&self) -> f64 {
        scaled_to_f64(&self.lo, self.bits)
    }

    pub fn hi_f64(&self) -> f64 {
        scaled_to_f64(&self.hi, self.bits)
    }

    pub fn midpoint_f64(&self) -> f64 {
        scaled_to_f64(&(&self.lo + &self.hi), self.bits + 1)
    }

    pub fn lo_rational(&self) -> BigRational {
        BigRational::new(self.lo.clone(), BigInt::one() << self.bits)
    }

    pub fn hi_rational(&self) -> BigRational {
        BigRational::new(self.hi.clone(), BigInt::one() << self.bits)
    }

    /// `⌊α·n⌋` when the enclosure of `α·n` does not straddle an integer.
    pub fn floor_mul(&self, n: &BigInt) -> Option<BigInt> {
        debug_assert!(n.is_positive());
        let lo = (&self.lo * n) >> self.bits;
        let hi = (&self.hi * n) >> self.bits;
        (lo == hi).then_some(lo)
    }

    /// Fractional part of `α·n` as `(start, width)` in units of `2^-bits`:
    /// `{α·n} ∈ [start, start + width]` read modulo 1.
    pub fn frac_mul(&self, n: &BigInt) -> (BigUint, BigUint) {
        let modulus = BigInt::one() << self.bits;
        let start = (&self.lo * n).mod_floor(&modulus);
        let width = (&self.hi - &self.lo) * n;
        (
            start.to_biguint().expect("non-negative"),
            width.to_biguint().expect("non-negative"),
        )
    }

    /// Enclosure of `1/α` at the same scale. Requires `α > 0` certified.
    pub fn reciprocal(&self) -> Result<Enclosure> {
        if !self.lo.is_positive() {
            return Err(Error::PrecisionExhausted(
                "reciprocal needs an enclosure bounded away from zero".into(),
            ));
        }
        let num = BigInt::one() << (2 * self.bits);
        let lo = num.div_floor(&self.hi);
        let hi = super::alpha::ceil_div(&num, &self.lo);
        Ok(Enclosure::new(lo, hi, self.bits))
    }
}

/// `v / 2^bits` as `f64`, correctly handling values far outside `f64`'s
/// integer range.
pub(crate) fn scaled_to_f64(v: &BigInt, bits: u32) -> f64 {
    let len = v.bits();
    if len <= 1000 {
        let value = v.to_f64().unwrap_or(f64::NAN);
        return value * (-(bits as f64)).exp2();
    }
    let shift = len - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::NAN);
    top * (shift as f64 - bits as f64).exp2()
}

/// A certified fractional part `{α·n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracPart {
    /// In `[0, 1)`.
    pub value: f64,
    /// Bound on the circular distance between `value` and the true `{α·n}`.
    pub error_bound: f64,
}

/// `{α·n}` with a certified error below `2^-48`.
///
/// Rational `α` is reduced exactly. Otherwise `α` is enclosed with
/// `ceil(log2 n) + guard_bits` fractional bits and the error is computed from
/// the enclosure width; a decimal literal too short to support that budget is
/// rejected.
pub fn fractional_part(alpha: &Alpha, n: u64, guard_bits: u32) -> Result<FracPart> {
    if n == 0 {
        return Err(Error::Input("fractional_part needs n >= 1".into()));
    }
    if guard_bits < MIN_GUARD_BITS {
        return Err(Error::Input(format!(
            "guard_bits must be >= {MIN_GUARD_BITS}, got {guard_bits}"
        )));
    }
    if let Alpha::Rational { p, q } = alpha {
        let r = (p * BigInt::from(n)).mod_floor(q);
        let value = BigRational::new(r.clone(), q.clone()).to_f64().unwrap_or(f64::NAN);
        let exact = q.bits() <= 54
            && q.to_u64().is_some_and(|q| q.is_power_of_two());
        return Ok(FracPart {
            value,
            error_bound: if exact { 0.0 } else { F64_TRUNCATION },
        });
    }
    if let Alpha::Decimal { digits, .. } = alpha {
        let needed = (n as f64).log10() + guard_bits as f64 * 0.302;
        if (*digits as f64) <= needed {
            return Err(Error::PrecisionExhausted(format!(
                "decimal alpha has {digits} digits; n = {n} with {guard_bits} guard bits needs more than {needed:.1}"
            )));
        }
    }
    let bits = 64 - (n - 1).leading_zeros().min(63) + guard_bits;
    let enclosure = alpha.enclose(bits);
    let (start, width) = enclosure.frac_mul(&BigInt::from(n));
    let width = scaled_to_f64(&BigInt::from(width), bits);
    let value = top53(&start, bits);
    let error_bound = width + F64_TRUNCATION;
    if error_bound >= PHASE_TOLERANCE {
        return Err(Error::PrecisionExhausted(format!(
            "certified error {error_bound:e} for n = {n} exceeds 2^-48"
        )));
    }
    Ok(FracPart { value, error_bound })
}

/// Truncates `v / 2^bits` (with `v < 2^bits`) to an `f64` in `[0, 1)`.
fn top53(v: &BigUint, bits: u32) -> f64 {
    if bits <= 53 {
        return v.to_f64().unwrap_or(0.0) * (-(bits as f64)).exp2();
    }
    let top = (v >> (bits - 53)).to_u64().unwrap_or(0);
    top as f64 * (-53f64).exp2()
}

/// Fast per-multiplier phases of a fixed `α`.
///
/// Rational `α` with a denominator below `2^64` is evaluated exactly as
/// `(p·k mod q) / q`. Anything else uses a 128-bit enclosure of `{α}`, where
/// the wrapping product `frac · k mod 2^128` is exactly `{frac·k}` and the
/// width contributes `width·k·2^-128` of error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKernel {
    Exact { num: u64, den: u64 },
    Fixed { frac: u128, width: u128 },
}

impl PhaseKernel {
    pub fn new(alpha: &Alpha) -> Result<Self> {
        if let Alpha::Rational { p, q } = alpha {
            if let Some(den) = q.to_u64() {
                let num = p.mod_floor(q).to_u64().expect("reduced below q");
                return Ok(PhaseKernel::Exact { num, den });
            }
        }
        let enclosure = alpha.enclose(128);
        let modulus = BigInt::one() << 128u32;
        let frac = enclosure.lo.mod_floor(&modulus).to_u128().expect("< 2^128");
        let width = enclosure.width_units().to_u128().ok_or_else(|| {
            Error::PrecisionExhausted(format!("alpha {alpha} is too imprecise for 128-bit phases"))
        })?;
        Ok(PhaseKernel::Fixed { frac, width })
    }

    /// `{α·k}` in turns, with its certified error (which includes the
    /// truncation to `f64`).
    pub fn phase(&self, k: u64) -> (f64, f64) {
        match *self {
            PhaseKernel::Exact { num, den } => {
                let r = (num as u128 * k as u128 % den as u128) as u64;
                (r as f64 / den as f64, if r == 0 { 0.0 } else { F64_TRUNCATION })
            }
            PhaseKernel::Fixed { frac, .. } => {
                let v = frac.wrapping_mul(k as u128);
                ((v >> 75) as f64 * (-53f64).exp2(), self.error_bound(k))
            }
        }
    }

    /// Exact residue `(r, q)` with `{α·k} = r/q`, for rational kernels.
    pub fn exact_residue(&self, k: u64) -> Option<(u64, u64)> {
        match *self {
            PhaseKernel::Exact { num, den } => {
                Some(((num as u128 * k as u128 % den as u128) as u64, den))
            }
            PhaseKernel::Fixed { .. } => None,
        }
    }

    /// Worst-case phase error over all multipliers `<= kmax`.
    pub fn error_bound(&self, kmax: u64) -> f64 {
        match *self {
            PhaseKernel::Exact { .. } => F64_TRUNCATION,
            PhaseKernel::Fixed { width, .. } => {
                width as f64 * kmax as f64 * (-128f64).exp2() + F64_TRUNCATION
            }
        }
    }

    /// Fails when phases up to `kmax` cannot be certified to `2^-48`.
    pub fn certify(&self, kmax: u64) -> Result<()> {
        let err = self.error_bound(kmax);
        if err >= PHASE_TOLERANCE {
            Err(Error::PrecisionExhausted(format!(
                "phase error {err:e} at multiplier {kmax} exceeds 2^-48"
            )))
        } else {
            Ok(())
        }
    }
}

/// `α` split as `int + frac·2^-128` with `α ∈ [int + frac/2^128, … + width/2^128]`,
/// used for certified floors of `α·n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixed128 {
    int: i128,
    frac: u128,
    width: u128,
}

impl Fixed128 {
    pub fn new(enclosure: &Enclosure) -> Option<Self> {
        if enclosure.bits != 128 {
            return None;
        }
        let (int, frac) = enclosure.lo.div_mod_floor(&(BigInt::one() << 128u32));
        Some(Fixed128 {
            int: int.to_i128()?,
            frac: frac.to_u128()?,
            width: enclosure.width_units().to_u128()?,
        })
    }

    /// `⌊α·n⌋` if certified at this precision.
    pub fn floor_mul(&self, n: u64) -> Option<i128> {
        let (carry, low) = mul_128_by_64(self.frac, n);
        let spread = self.width.checked_mul(n as u128)?;
        low.checked_add(spread)?;
        self.int
            .checked_mul(n as i128)?
            .checked_add(carry as i128)
    }

    /// `{α·n}` as `(start, width)` in units of `2^-128`, or `None` when the
    /// interval wraps past an integer.
    pub fn frac_mul(&self, n: u64) -> Option<(u128, u128)> {
        let (_, low) = mul_128_by_64(self.frac, n);
        let spread = self.width.checked_mul(n as u128)?;
        low.checked_add(spread)?;
        Some((low, spread))
    }
}

/// `a·b = carry·2^128 + low`.
fn mul_128_by_64(a: u128, b: u64) -> (u64, u128) {
    let b = b as u128;
    let lo = (a & u64::MAX as u128) * b;
    let hi = (a >> 64) * b;
    let low = (hi << 64).wrapping_add(lo);
    let carry = (hi >> 64) + (((hi & u64::MAX as u128) + (lo >> 64)) >> 64);
    (carry as u64, low)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_rational_fraction() {
        let f = fractional_part(&Alpha::rational(1, 4).unwrap(), 6, 64).unwrap();
        assert_eq!(f.value, 0.5);
        assert_eq!(f.error_bound, 0.0);
        let f = fractional_part(&Alpha::rational(-1, 3).unwrap(), 1, 64).unwrap();
        assert!((f.value - 2.0 / 3.0).abs() <= f.error_bound);
    }

    #[test]
    fn sqrt2_fraction() {
        let sqrt2 = Alpha::sqrt(2).unwrap();
        let f = fractional_part(&sqrt2, 1, 64).unwrap();
        assert!((f.value - 0.41421356237309504880).abs() < PHASE_TOLERANCE);
        assert!(f.error_bound < PHASE_TOLERANCE);
    }

    #[test]
    fn double_width_recompute_agrees() {
        let sqrt2 = Alpha::sqrt(2).unwrap();
        for n in [10_000_000u64, 1, 2, 99_999_989, 1 << 40] {
            let g = fractional_part(&sqrt2, n, 64).unwrap();
            let g2 = fractional_part(&sqrt2, n, 128).unwrap();
            let diff = (g.value - g2.value).abs();
            let circ = diff.min(1.0 - diff);
            assert!(circ <= g.error_bound + g2.error_bound, "n = {n}");
            assert!(circ < PHASE_TOLERANCE);
        }
    }

    #[test]
    fn guard_and_domain_checks() {
        let sqrt2 = Alpha::sqrt(2).unwrap();
        assert!(fractional_part(&sqrt2, 0, 64).is_err());
        assert!(fractional_part(&sqrt2, 5, 32).is_err());
        let pi = Alpha::parse("dec:3.14159265358979323846264338327950288").unwrap();
        // 35 digits: fine at n = 10^6 (needs > 25.3), too short at n = 10^16
        assert!(fractional_part(&pi, 1_000_000, 64).is_ok());
        assert!(matches!(
            fractional_part(&pi, 10u64.pow(16), 64),
            Err(Error::PrecisionExhausted(_))
        ));
        let f = fractional_part(&pi, 1, 64).unwrap();
        assert!((f.value - 0.14159265358979323).abs() < 1e-15);
    }

    #[test]
    fn kernel_matches_bigint_path() {
        let phi = Alpha::golden_ratio();
        let kernel = PhaseKernel::new(&phi).unwrap();
        for k in [1u64, 7, 1_000_003, 123_456_789_012] {
            let (v, err) = kernel.phase(k);
            let slow = fractional_part(&phi, k, 96).unwrap();
            let diff = (v - slow.value).abs();
            assert!(diff.min(1.0 - diff) <= err + slow.error_bound);
        }
        let rat = PhaseKernel::new(&Alpha::rational(3, 7).unwrap()).unwrap();
        assert_eq!(rat.exact_residue(5), Some((1, 7)));
        assert_eq!(rat.phase(7).0, 0.0);
    }

    #[test]
    fn widening_multiply() {
        let a = u128::MAX;
        let (carry, low) = mul_128_by_64(a, u64::MAX);
        // (2^128 − 1)(2^64 − 1) = 2^192 − 2^128 − 2^64 + 1
        assert_eq!(carry, u64::MAX - 1);
        assert_eq!(low, (1u128 << 64).wrapping_neg().wrapping_add(1));
        assert_eq!(mul_128_by_64(1 << 127, 2), (1, 0));
    }

    #[test]
    fn fixed128_floors() {
        let sqrt2 = Alpha::sqrt(2).unwrap();
        let fixed = Fixed128::new(&sqrt2.enclose(128)).unwrap();
        let expected = [1, 2, 4, 5, 7, 8, 9];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(fixed.floor_mul(i as u64 + 1), Some(e));
        }
        let neg = Alpha::parse("quad:-sqrt2").unwrap();
        let fixed = Fixed128::new(&neg.enclose(128)).unwrap();
        assert_eq!(fixed.floor_mul(1), Some(-2));
        assert_eq!(fixed.floor_mul(5), Some(-8));
        let e = sqrt2.enclose(200);
        assert_eq!(e.floor_mul(&BigInt::from(1000)), Some(BigInt::from(1414)));
    }

    #[test]
    fn reciprocal_enclosure() {
        let e = Alpha::sqrt(2).unwrap().enclose(100);
        let r = e.reciprocal().unwrap();
        assert!(r.lo_f64() <= std::f64::consts::FRAC_1_SQRT_2 + 1e-16);
        assert!(r.hi_f64() >= std::f64::consts::FRAC_1_SQRT_2 - 1e-16);
        assert!(Alpha::parse("quad:-sqrt2").unwrap().enclose(64).reciprocal().is_err());
    }
}
