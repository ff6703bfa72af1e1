//! Exponential sums `Σ_{n∈B(x)} e(αhn)`, Ramanujan sums, and the major-arc
//! main term `Σ μ(q/(n,q))/φ(q/(n,q)) e(βn)`.
//!
//! Sums run over fixed-size chunks in parallel; each chunk and the final
//! combination use Neumaier summation in a fixed order, so results do not
//! depend on the thread count.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::diophantine::{Alpha, PhaseKernel};
use crate::error::{Error, Result};
use crate::numtheory::{euler_phi_trial, mobius_trial};
use crate::report::CsvTable;
use crate::rules::SequenceSlice;

const CHUNK: usize = 1 << 14;
/// Rounding in `sin_cos` plus the `2π·t` product, per term.
const TRIG_ERROR: f64 = 4.0 * f64::EPSILON;
/// Neumaier summation error per term, generously.
const SUM_ERROR: f64 = 2.0 * f64::EPSILON;
const TAU: f64 = std::f64::consts::TAU;

pub(crate) fn ser_complex<S: Serializer>(v: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct C {
        re: f64,
        im: f64,
    }
    C { re: v.re, im: v.im }.serialize(s)
}

/// `e(t) = exp(2πit)` for `t` in turns, exact at quarter turns.
pub fn unit_root(t: f64) -> Complex64 {
    let t = t - t.round();
    if t == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if t.abs() == 0.5 {
        Complex64::new(-1.0, 0.0)
    } else if t == 0.25 {
        Complex64::new(0.0, 1.0)
    } else if t == -0.25 {
        Complex64::new(0.0, -1.0)
    } else {
        let (s, c) = (TAU * t).sin_cos();
        Complex64::new(c, s)
    }
}

/// `e(r/q)`, exact whenever `4r/q` is an integer.
pub fn unit_root_exact(r: u64, q: u64) -> Complex64 {
    let r = r % q;
    if (4 * r as u128) % q as u128 == 0 {
        match (4 * r as u128 / q as u128) as u8 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else if 2 * r as u128 > q as u128 {
        let (s, c) = (TAU * ((q - r) as f64 / q as f64)).sin_cos();
        Complex64::new(c, -s)
    } else {
        let (s, c) = (TAU * (r as f64 / q as f64)).sin_cos();
        Complex64::new(c, s)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `Σ f(n)` over `members`, deterministic for any thread count.
pub(crate) fn chunked_sum<F>(members: &[u64], f: F) -> Complex64
where
    F: Fn(u64) -> Complex64 + Sync,
{
    let partials: Vec<Complex64> = members
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = ComplexSum::default();
            for &n in chunk {
                acc.add(f(n));
            }
            acc.value()
        })
        .collect();
    let mut acc = ComplexSum::default();
    for z in partials {
        acc.add(z);
    }
    acc.value()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpSumResult {
    pub x: u64,
    pub h: u64,
    pub rule: String,
    pub alpha_id: String,
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub modulus: f64,
    pub member_count: u64,
    pub normalized_modulus: f64,
    pub phase_error_bound: f64,
}

pub fn exp_sum(slice: &SequenceSlice, alpha: &Alpha, h: u64) -> Result<ExpSumResult> {
    if h == 0 {
        return Err(Error::Input("exp_sum needs h >= 1".into()));
    }
    let kernel = PhaseKernel::new(alpha)?;
    let kmax = h
        .checked_mul(slice.limit())
        .ok_or_else(|| Error::Input(format!("h·x overflows 64 bits (h = {h}, x = {})", slice.limit())))?;
    kernel.certify(kmax)?;
    let value = match kernel {
        PhaseKernel::Exact { num, den } => {
            let step = (num as u128 * h as u128 % den as u128) as u64;
            chunked_sum(slice.members(), |n| {
                unit_root_exact((step as u128 * n as u128 % den as u128) as u64, den)
            })
        }
        PhaseKernel::Fixed { .. } => chunked_sum(slice.members(), |n| unit_root(kernel.phase(h * n).0)),
    };
    let b = slice.count();
    let per_term = TAU * kernel.error_bound(kmax) + TRIG_ERROR + SUM_ERROR;
    let modulus = value.norm();
    Ok(ExpSumResult {
        x: slice.limit(),
        h,
        rule: slice.rule_id().to_string(),
        alpha_id: alpha.id(),
        value,
        modulus,
        member_count: b,
        normalized_modulus: if b == 0 { 0.0 } else { (modulus / b as f64).min(1.0) },
        phase_error_bound: b as f64 * per_term,
    })
}

pub const EXPSUM_CSV_HEADER: [&str; 8] = [
    "x",
    "h",
    "alpha_id",
    "re",
    "im",
    "modulus",
    "normalized_modulus",
    "phase_error_bound",
];

pub fn exp_sum_csv(results: &[ExpSumResult]) -> CsvTable {
    let mut t = CsvTable::new(EXPSUM_CSV_HEADER);
    for r in results {
        t.push([
            r.x.to_string(),
            r.h.to_string(),
            r.alpha_id.clone(),
            r.value.re.to_string(),
            r.value.im.to_string(),
            r.modulus.to_string(),
            r.normalized_modulus.to_string(),
            r.phase_error_bound.to_string(),
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamanujanSum {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    /// `μ(q/d)`.
    pub predicted: i8,
}

/// `Σ_{1≤n≤q, (n,q)=d} e(an/q)` summed directly, with `μ(q/d)`.
pub fn ramanujan_sum(a: i64, q: u64, d: u64) -> Result<RamanujanSum> {
    if q == 0 || d == 0 || q % d != 0 {
        return Err(Error::Input(format!("need q >= 1 and d | q, got q = {q}, d = {d}")));
    }
    let a_mod = a.rem_euclid(q as i64) as u64;
    if a_mod.gcd(&q) != 1 {
        return Err(Error::Input(format!("need gcd(a, q) = 1, got a = {a}, q = {q}")));
    }
    let mut acc = ComplexSum::default();
    for n in (d..=q).step_by(d as usize) {
        if n.gcd(&q) == d {
            acc.add(unit_root_exact((a_mod as u128 * n as u128 % q as u128) as u64, q));
        }
    }
    Ok(RamanujanSum {
        value: acc.value(),
        predicted: mobius_trial(q / d),
    })
}

/// Members with `(n, q) = d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidueClass {
    pub d: u64,
    /// `μ(q/d)`.
    pub mu: i8,
    /// `φ(q/d)`.
    pub phi: u64,
    pub count: u64,
    /// `Σ_{(n,q)=d} e(αn)`.
    #[serde(serialize_with = "ser_complex")]
    pub lhs: Complex64,
    /// `μ(q/d)/φ(q/d) · Σ_{(n,q)=d} e(βn)`.
    #[serde(serialize_with = "ser_complex")]
    pub main_term: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorArcComparison {
    pub x: u64,
    pub rule: String,
    pub a: i64,
    pub q: u64,
    pub beta: String,
    pub member_count: u64,
    #[serde(serialize_with = "ser_complex")]
    pub lhs: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub main_term: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub residual: Complex64,
    pub residual_over_x: f64,
    pub classes: Vec<ResidueClass>,
}

/// `(r, m)` with `{v·n} = r/m` for the reduced rational `v`.
fn residue_stepper(v: &Ratio<i128>) -> Result<(u64, u64)> {
    let den = u64::try_from(*v.denom())
        .map_err(|_| Error::Input(format!("denominator of {v} exceeds 64 bits")))?;
    let num = v.numer().rem_euclid(*v.denom()) as u64;
    Ok((num, den))
}

/// Compares `Σ e(αn)` with the major-arc main term for `α = a/q + β`.
pub fn major_arc_compare(
    slice: &SequenceSlice,
    a: i64,
    q: u64,
    beta: Ratio<i64>,
) -> Result<MajorArcComparison> {
    if q == 0 || q > i64::MAX as u64 {
        return Err(Error::Input(format!("need 1 <= q < 2^63, got q = {q}")));
    }
    if a.rem_euclid(q as i64).unsigned_abs().gcd(&q) != 1 {
        return Err(Error::Input(format!("need gcd(a, q) = 1, got a = {a}, q = {q}")));
    }
    let beta128 = Ratio::new(*beta.numer() as i128, *beta.denom() as i128);
    let alpha = Ratio::new(a as i128, q as i128) + beta128;
    let (an, ad) = residue_stepper(&alpha)?;
    let (bn, bd) = residue_stepper(&beta128)?;

    let mut divisors: Vec<u64> = (1..=crate::numtheory::isqrt(q))
        .filter(|d| q % d == 0)
        .flat_map(|d| [d, q / d])
        .collect();
    divisors.sort_unstable();
    divisors.dedup();
    let coefs: Vec<(i8, u64)> = divisors
        .iter()
        .map(|&d| (mobius_trial(q / d), euler_phi_trial(q / d)))
        .collect();
    let members = slice.members();
    let classes: Vec<ResidueClass> = divisors
        .par_iter()
        .zip(coefs.par_iter())
        .map(|(&d, &(mu, phi))| {
            let in_class: Vec<u64> = members.iter().copied().filter(|n| n.gcd(&q) == d).collect();
            let lhs = chunked_sum(&in_class, |n| {
                unit_root_exact((an as u128 * (n % ad) as u128 % ad as u128) as u64, ad)
            });
            let main_term = if mu == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                let s = chunked_sum(&in_class, |n| {
                    unit_root_exact((bn as u128 * (n % bd) as u128 % bd as u128) as u64, bd)
                });
                s * (f64::from(mu) / phi as f64)
            };
            ResidueClass {
                d,
                mu,
                phi,
                count: in_class.len() as u64,
                lhs,
                main_term,
            }
        })
        .collect();

    let mut lhs = ComplexSum::default();
    let mut main = ComplexSum::default();
    for c in &classes {
        lhs.add(c.lhs);
        main.add(c.main_term);
    }
    let (lhs, main_term) = (lhs.value(), main.value());
    let residual = lhs - main_term;
    Ok(MajorArcComparison {
        x: slice.limit(),
        rule: slice.rule_id().to_string(),
        a,
        q,
        beta: beta.to_string(),
        member_count: slice.count(),
        lhs,
        main_term,
        residual,
        residual_over_x: residual.norm() / slice.limit() as f64,
        classes,
    })
}

pub fn major_arc_csv(rows: &[MajorArcComparison]) -> CsvTable {
    let mut t = CsvTable::new([
        "x",
        "rule",
        "a",
        "q",
        "beta",
        "lhs_re",
        "lhs_im",
        "main_re",
        "main_im",
        "residual_re",
        "residual_im",
        "residual_over_x",
    ]);
    for r in rows {
        t.push([
            r.x.to_string(),
            r.rule.clone(),
            r.a.to_string(),
            r.q.to_string(),
            r.beta.clone(),
            r.lhs.re.to_string(),
            r.lhs.im.to_string(),
            r.main_term.re.to_string(),
            r.main_term.im.to_string(),
            r.residual.re.to_string(),
            r.residual.im.to_string(),
            r.residual_over_x.to_string(),
        ]);
    }
    t
}

/// `|Σ e(αn)| · q^(δ−ε) / B(x)`, the implied constant in the minor-arc bound.
pub fn theorem2_bound_ratio(
    slice: &SequenceSlice,
    alpha: &Alpha,
    q: u64,
    delta: f64,
    epsilon: f64,
) -> Result<f64> {
    if !(0.0 < epsilon && epsilon < delta && delta <= 1.0) {
        return Err(Error::Input(format!(
            "need 0 < epsilon < delta <= 1, got delta = {delta}, epsilon = {epsilon}"
        )));
    }
    if q == 0 {
        return Err(Error::Input("need q >= 1".into()));
    }
    if slice.count() == 0 {
        return Err(Error::Input("empty slice".into()));
    }
    let s = exp_sum(slice, alpha, 1)?;
    Ok(s.modulus * (q as f64).powf(delta - epsilon) / slice.count() as f64)
}
