//! Beatty hits `#{n >= 1 : ⌊αn⌋ ∈ B(x)}` and the set identity behind the
//! `(1/α)·B(x)` asymptotic.
//!
//! With `λ = 1/α`, `⌊αn⌋ = m` has a solution `n` exactly when `[λm, λ(m+1))`
//! contains an integer, i.e. when `1 − λ < {λm} < 1`. Both sides are built
//! independently and compared as sets of `m`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::diophantine::{Alpha, Enclosure, Fixed128};
use crate::error::{Error, Result};
use crate::report::CsvTable;
use crate::rules::SequenceSlice;

const MAX_BITS: u32 = 4096;

/// Certified `⌊v·n⌋` for a fixed positive real `v`.
struct FloorOracle {
    fast: Option<Fixed128>,
    enclose: Box<dyn Fn(u32) -> Result<Enclosure> + Sync>,
    /// Whether more bits narrow the enclosure.
    exact: bool,
    label: String,
}

impl FloorOracle {
    fn new(enclose: Box<dyn Fn(u32) -> Result<Enclosure> + Sync>, exact: bool, label: String) -> Result<Self> {
        let fast = Fixed128::new(&enclose(128)?);
        Ok(FloorOracle {
            fast,
            enclose,
            exact,
            label,
        })
    }

    fn floor(&self, n: u64) -> Result<u64> {
        if let Some(v) = self.fast.as_ref().and_then(|f| f.floor_mul(n)) {
            return u64::try_from(v).map_err(|_| Error::Invariant(format!("floor {v} out of range")));
        }
        let big_n = BigInt::from(n);
        let mut bits = 192;
        loop {
            let e = (self.enclose)(bits)?;
            if let Some(v) = e.floor_mul(&big_n) {
                return v
                    .to_u64()
                    .ok_or_else(|| Error::Invariant(format!("floor {v} out of range")));
            }
            if !self.exact || bits >= MAX_BITS {
                return Err(Error::PrecisionExhausted(format!(
                    "floor of {}·{n} not certified at {bits} bits",
                    self.label
                )));
            }
            bits *= 2;
        }
    }
}

fn check_alpha(alpha: &Alpha) -> Result<()> {
    if alpha.is_rational() {
        return Err(Error::Input(format!(
            "Beatty operations need irrational alpha, got {alpha}"
        )));
    }
    let e = alpha.enclose(128);
    let one = BigInt::one() << 128u32;
    if e.lo > one {
        Ok(())
    } else if e.hi <= one {
        Err(Error::Input(format!("Beatty operations need alpha > 1, got {alpha}")))
    } else {
        Err(Error::PrecisionExhausted(format!("cannot certify {alpha} > 1")))
    }
}

fn alpha_oracle(alpha: &Alpha) -> Result<FloorOracle> {
    let a = alpha.clone();
    FloorOracle::new(Box::new(move |bits| Ok(a.enclose(bits))), alpha.is_exact(), alpha.id())
}

fn lambda_oracle(alpha: &Alpha) -> Result<FloorOracle> {
    let label = format!("1/({alpha})");
    if alpha.is_exact() {
        let lambda = alpha.reciprocal()?;
        FloorOracle::new(Box::new(move |bits| Ok(lambda.enclose(bits))), true, label)
    } else {
        let a = alpha.clone();
        FloorOracle::new(Box::new(move |bits| a.enclose(bits).reciprocal()), false, label)
    }
}

/// Sorted `⌊αn⌋ ∈ B(x)` over `n >= 1`.
fn floor_hits(slice: &SequenceSlice, alpha: &Alpha) -> Result<Vec<u64>> {
    let oracle = alpha_oracle(alpha)?;
    let lo = alpha.enclose(64).lo_f64();
    // ⌊αn⌋ <= x forces n <= (x + 1)/α; the margin absorbs f64 rounding
    let nmax = ((slice.limit() as f64 + 1.0) / lo).ceil() as u64 + 2;
    let hits: Vec<Option<u64>> = (1..=nmax)
        .into_par_iter()
        .map(|n| {
            let m = oracle.floor(n)?;
            Ok((m <= slice.limit() && slice.contains(m)).then_some(m))
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeattyReport {
    pub x: u64,
    pub rule: String,
    pub alpha_id: String,
    pub hit_count: u64,
    pub b_count: u64,
    /// `hit_count · α / B(x)`.
    pub density_ratio: f64,
    /// Bound on `|density_ratio − hit_count·α/B(x)|` from the enclosure of `α`.
    pub density_error: f64,
}

pub fn beatty_hits(slice: &SequenceSlice, alpha: &Alpha) -> Result<BeattyReport> {
    check_alpha(alpha)?;
    let hits = floor_hits(slice, alpha)?;
    let b = slice.count();
    let hit_count = hits.len() as u64;
    let e = alpha.enclose(128);
    let (density_ratio, density_error) = if b == 0 {
        (0.0, 0.0)
    } else {
        let scale = hit_count as f64 / b as f64;
        (
            scale * e.midpoint_f64(),
            scale * (e.width() + 4.0 * f64::EPSILON * e.hi_f64()),
        )
    };
    Ok(BeattyReport {
        x: slice.limit(),
        rule: slice.rule_id().to_string(),
        alpha_id: alpha.id(),
        hit_count,
        b_count: b,
        density_ratio,
        density_error,
    })
}

pub fn beatty_csv(rows: &[BeattyReport]) -> CsvTable {
    let mut t = CsvTable::new(["x", "rule", "alpha_id", "hit_count", "b_count", "density_ratio"]);
    for r in rows {
        t.push([
            r.x.to_string(),
            r.rule.clone(),
            r.alpha_id.clone(),
            r.hit_count.to_string(),
            r.b_count.to_string(),
            r.density_ratio.to_string(),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub x: u64,
    pub rule: String,
    pub alpha_id: String,
    /// `#{n : ⌊αn⌋ ∈ B(x)}`.
    pub floor_count: u64,
    /// `#{m ∈ B(x) : 1 − λ < {λm} < 1}`.
    pub fraction_count: u64,
    pub holds: bool,
    /// Members hit by a floor but failing the fractional-part test.
    pub only_floor: Vec<u64>,
    /// Members passing the fractional-part test but hit by no floor.
    pub only_fraction: Vec<u64>,
}

pub fn identity_check(slice: &SequenceSlice, alpha: &Alpha) -> Result<IdentityCheck> {
    check_alpha(alpha)?;
    let floor_side = floor_hits(slice, alpha)?;
    let lambda = lambda_oracle(alpha)?;
    // {λm} > 1 − λ  ⟺  ⌊λm + λ⌋ > ⌊λm⌋, and λ(m+1) is never an integer
    let flags: Vec<bool> = slice
        .members()
        .par_iter()
        .map(|&m| Ok(lambda.floor(m + 1)? > lambda.floor(m)?))
        .collect::<Result<_>>()?;
    let fraction_side: Vec<u64> = slice
        .members()
        .iter()
        .zip(flags)
        .filter_map(|(&m, f)| f.then_some(m))
        .collect();
    let only_floor: Vec<u64> = floor_side
        .iter()
        .copied()
        .filter(|m| fraction_side.binary_search(m).is_err())
        .collect();
    let only_fraction: Vec<u64> = fraction_side
        .iter()
        .copied()
        .filter(|m| floor_side.binary_search(m).is_err())
        .collect();
    Ok(IdentityCheck {
        x: slice.limit(),
        rule: slice.rule_id().to_string(),
        alpha_id: alpha.id(),
        floor_count: floor_side.len() as u64,
        fraction_count: fraction_side.len() as u64,
        holds: only_floor.is_empty() && only_fraction.is_empty(),
        only_floor,
        only_fraction,
    })
}
