//! Star discrepancy of `{αn}` over a slice, the Erdős–Turán bound, and the
//! `x / exp(κ√(log x log log x))` envelope.

use rayon::prelude::*;
use serde::Serialize;

use crate::diophantine::{Alpha, PhaseKernel};
use crate::error::{Error, Result};
use crate::expsum::exp_sum;
use crate::rules::SequenceSlice;

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSample {
    alpha_id: String,
    rule: String,
    x: u64,
    points: Vec<f64>,
    sorted: Vec<f64>,
    /// Per-point certified error.
    point_error: f64,
}

impl FractionalSample {
    pub fn new(slice: &SequenceSlice, alpha: &Alpha) -> Result<Self> {
        let kernel = PhaseKernel::new(alpha)?;
        kernel.certify(slice.limit())?;
        let points: Vec<f64> = slice.members().par_iter().map(|&n| kernel.phase(n).0).collect();
        let mut sample = Self::from_points(points)?;
        sample.alpha_id = alpha.id();
        sample.rule = slice.rule_id().to_string();
        sample.x = slice.limit();
        sample.point_error = kernel.error_bound(slice.limit());
        Ok(sample)
    }

    /// A sample of exact points, for tests and external data.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if let Some(bad) = points.iter().find(|u| !(0.0..1.0).contains(*u)) {
            return Err(Error::Input(format!("point {bad} outside [0, 1)")));
        }
        let mut sorted = points.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(FractionalSample {
            alpha_id: String::new(),
            rule: String::new(),
            x: 0,
            points,
            sorted,
            point_error: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn sorted_points(&self) -> &[f64] {
        &self.sorted
    }

    /// `B(x, y, α) = #{n : {αn} <= y}`.
    pub fn count_below(&self, y: f64) -> Result<u64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Input(format!("need 0 <= y <= 1, got {y}")));
        }
        Ok(self.sorted.partition_point(|&u| u <= y) as u64)
    }

    /// `sup_y |B(x,y,α) − y·N|`.
    ///
    /// The count is a step function, constant on `[u_(i), u_(i+1))` with
    /// value at least `i`, so the supremum is attained either at a point
    /// (`i − N·u_(i)`) or just below one (`N·u_(i) − (i − 1)`). Repeated
    /// points need no special case: the largest index of a run dominates the
    /// first form and the smallest index the second.
    pub fn sup_deviation(&self) -> Result<DiscrepancyReport> {
        let n = self.sorted.len();
        if n == 0 {
            return Err(Error::Input("discrepancy of an empty sample".into()));
        }
        let nf = n as f64;
        let mut sup = 0f64;
        for (i, &u) in self.sorted.iter().enumerate() {
            let at = (i + 1) as f64 - nf * u;
            let below = nf * u - i as f64;
            sup = sup.max(at).max(below);
        }
        Ok(DiscrepancyReport {
            x: self.x,
            alpha: self.alpha_id.clone(),
            rule: self.rule.clone(),
            n: n as u64,
            sup_deviation: sup,
            star_discrepancy: sup / nf,
            uncertainty: nf * self.point_error,
            envelope: None,
            et: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub kappa: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtBound {
    pub m: u64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub x: u64,
    pub alpha: String,
    pub rule: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub sup_deviation: f64,
    pub star_discrepancy: f64,
    /// `N` times the per-point phase error.
    pub uncertainty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Envelope>,
    pub et: Vec<EtBound>,
}

/// Right-hand side of the Erdős–Turán inequality with `m` harmonics.
pub fn erdos_turan_bound(slice: &SequenceSlice, alpha: &Alpha, m: u64) -> Result<f64> {
    Ok(erdos_turan_bounds(slice, alpha, &[m])?[0].bound)
}

/// Erdős–Turán bounds for several `m`, sharing the sums `|S_h|`.
pub fn erdos_turan_bounds(slice: &SequenceSlice, alpha: &Alpha, ms: &[u64]) -> Result<Vec<EtBound>> {
    if ms.iter().any(|&m| m == 0) {
        return Err(Error::Input("Erdős–Turán bound needs m >= 1".into()));
    }
    let hmax = ms.iter().copied().max().unwrap_or(0);
    let moduli: Vec<f64> = (1..=hmax)
        .into_par_iter()
        .map(|h| exp_sum(slice, alpha, h).map(|r| r.modulus))
        .collect::<Result<_>>()?;
    let b = slice.count() as f64;
    Ok(ms
        .iter()
        .map(|&m| {
            let tail = 1.0 / (m + 1) as f64;
            let harmonics: f64 = moduli[..m as usize]
                .iter()
                .enumerate()
                .map(|(i, s)| (1.0 / (i + 1) as f64 - tail) * s)
                .sum();
            EtBound {
                m,
                bound: 6.0 * b * tail + 4.0 / std::f64::consts::PI * harmonics,
            }
        })
        .collect())
}

/// `x / exp(κ √(log x · log log x))`.
pub fn theorem4_envelope(x: u64, kappa: f64) -> Result<f64> {
    if x < 16 {
        return Err(Error::Input(format!("envelope needs x >= 16, got {x}")));
    }
    let kmax = 1.0 / 6f64.sqrt();
    if !(kappa > 0.0 && kappa < kmax) {
        return Err(Error::Input(format!("need 0 < kappa < 1/sqrt(6), got {kappa}")));
    }
    let l = (x as f64).ln();
    Ok(x as f64 * (-kappa * (l * l.ln()).sqrt()).exp())
}

/// Discrepancy report with optional envelope and Erdős–Turán rows.
pub fn discrepancy_report(
    slice: &SequenceSlice,
    alpha: &Alpha,
    kappa: Option<f64>,
    ms: &[u64],
) -> Result<DiscrepancyReport> {
    let sample = FractionalSample::new(slice, alpha)?;
    let mut report = sample.sup_deviation()?;
    if let Some(kappa) = kappa {
        report.envelope = Some(Envelope {
            kappa,
            value: theorem4_envelope(slice.limit(), kappa)?,
        });
    }
    report.et = erdos_turan_bounds(slice, alpha, ms)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::SieveTable;
    use crate::rules::{generate, IntervalRule};

    #[test]
    fn counting_examples() {
        let s = FractionalSample::from_points(vec![0.75, 0.25]).unwrap();
        assert_eq!(s.count_below(0.5).unwrap(), 1);
        assert_eq!(s.count_below(1.0).unwrap(), 2);
        assert_eq!(s.count_below(0.0).unwrap(), 0);
        assert_eq!(s.count_below(0.25).unwrap(), 1);
        assert!(s.count_below(1.5).is_err());
        let r = s.sup_deviation().unwrap();
        assert_eq!(r.sup_deviation, 0.5);
        assert_eq!(r.star_discrepancy, 0.25);
    }

    #[test]
    fn extreme_and_grid() {
        let r = FractionalSample::from_points(vec![0.0]).unwrap().sup_deviation().unwrap();
        assert_eq!(r.sup_deviation, 1.0);
        let n = 64;
        let grid: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let r = FractionalSample::from_points(grid).unwrap().sup_deviation().unwrap();
        assert_eq!(r.star_discrepancy, 1.0 / n as f64);
        assert!(FractionalSample::from_points(vec![1.0]).is_err());
    }

    #[test]
    fn ties_are_handled() {
        let r = FractionalSample::from_points(vec![0.5, 0.5, 0.5]).unwrap().sup_deviation().unwrap();
        assert_eq!(r.sup_deviation, 1.5);
    }

    #[test]
    fn et_first_term_for_integer_alpha() {
        let sieve = SieveTable::build(500).unwrap();
        let s = generate(&IntervalRule::parse("practical").unwrap(), 500, &sieve).unwrap();
        let b = s.count() as f64;
        let bound = erdos_turan_bound(&s, &Alpha::rational(2, 1).unwrap(), 1).unwrap();
        assert!((bound - (3.0 * b + 2.0 * b / std::f64::consts::PI)).abs() < 1e-9 * b);
        assert!(erdos_turan_bound(&s, &Alpha::sqrt(2).unwrap(), 0).is_err());
    }

    #[test]
    fn et_dominates_discrepancy() {
        let sieve = SieveTable::build(10_000).unwrap();
        let s = generate(&IntervalRule::parse("practical").unwrap(), 10_000, &sieve).unwrap();
        let r = discrepancy_report(&s, &Alpha::sqrt(2).unwrap(), Some(0.3), &[100]).unwrap();
        assert!(r.sup_deviation <= r.et[0].bound);
        assert!(r.envelope.is_some());
    }

    #[test]
    fn envelope_checks() {
        let x = 10_000_000u64;
        let v = theorem4_envelope(x, 0.4).unwrap();
        // same value through logs: ln v = ln x − κ·sqrt(ln x · ln ln x)
        let lx = 7.0 * 10f64.ln();
        let lv = lx - 0.4 * (lx * lx.ln()).sqrt();
        assert!((v.ln() - lv).abs() < 1e-12);
        assert!(theorem4_envelope(x, 0.3).unwrap() > v);
        assert!((theorem4_envelope(x, 1e-12).unwrap() / x as f64 - 1.0).abs() < 1e-9);
        assert!(theorem4_envelope(x, 0.41).is_err());
        assert!(theorem4_envelope(15, 0.1).is_err());
    }
}
