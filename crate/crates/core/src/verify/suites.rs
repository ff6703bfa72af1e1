use num_integer::Integer;
use rayon::prelude::*;

use super::{params, Assertion, Calibration, Comparison, SuiteReport};
use crate::error::{Error, Result};
use crate::numtheory::{smooth_count_with, SieveTable};
use crate::rules::{Endpoint, IntervalRule, SequenceSlice};

fn check_xs(xs: &[u64], slice: &SequenceSlice) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Input("empty x grid".into()));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input(format!("x grid must be strictly ascending, got {xs:?}")));
    }
    if xs[0] < 16 {
        return Err(Error::Input(format!("x grid must start at 16 or above, got {}", xs[0])));
    }
    let last = *xs.last().expect("non-empty");
    if last > slice.limit() {
        return Err(Error::range("x", last, 16, slice.limit()));
    }
    Ok(())
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

/// `max_{d <= dmax} B_d(x)·w(d) / B(x)` and its argmax.
fn max_divisor_ratio(slice: &SequenceSlice, dmax: u64, weight: impl Fn(u64) -> f64) -> (f64, u64) {
    let table = slice.multiples_table(dmax);
    let b = slice.count() as f64;
    let mut best = (f64::NEG_INFINITY, 1);
    for (d, &bd) in table.iter().enumerate().skip(1) {
        let r = bd as f64 * weight(d as u64) / b;
        if r > best.0 {
            best = (r, d as u64);
        }
    }
    best
}

/// Density `B(x)(log x)^A / x` bounded below and divisor decay
/// `B_d(x) d^δ / B(x)` bounded above, over a grid of `x`.
pub fn check_bcond(
    slice: &SequenceSlice,
    xs: &[u64],
    a: f64,
    delta: f64,
    dmax: u64,
    cal: &Calibration,
) -> Result<SuiteReport> {
    check_xs(xs, slice)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Input(format!("need 0 < delta <= 1, got {delta}")));
    }
    if dmax == 0 || !a.is_finite() {
        return Err(Error::Input("need dmax >= 1 and finite A".into()));
    }
    let rule = slice.rule_id();
    let mut report = SuiteReport::new(
        "bcond",
        params([
            ("rule", rule.to_string()),
            ("xs", join(xs)),
            ("A", a.to_string()),
            ("delta", delta.to_string()),
            ("dmax", dmax.to_string()),
        ]),
        &["x", "B", "lower_ratio", "upper_ratio", "argmax_d", "d1_ratio"],
    );
    let rows: Vec<(u64, u64, f64, f64, u64, f64)> = xs
        .par_iter()
        .map(|&x| {
            let s = slice.truncate(x);
            let b = s.count();
            let lower = b as f64 * (x as f64).ln().powf(a) / x as f64;
            let (upper, arg) = max_divisor_ratio(&s, dmax, |d| (d as f64).powf(delta));
            let d1 = s.count_multiples(1).expect("d = 1") as f64 / b as f64;
            (x, b, lower, upper, arg, d1)
        })
        .collect();
    for &(x, b, lower, upper, arg, d1) in &rows {
        report.rows.push(vec![
            x.to_string(),
            b.to_string(),
            lower.to_string(),
            upper.to_string(),
            arg.to_string(),
            d1.to_string(),
        ]);
    }
    let min_lower = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let max_upper = rows.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    report.assertions.push(Assertion::calibrated(
        "min lower_ratio",
        min_lower,
        Comparison::AtLeast,
        cal.get_for("bcond", rule, "lower_min")?,
    ));
    report.assertions.push(Assertion::calibrated(
        "max upper_ratio",
        max_upper,
        Comparison::AtMost,
        cal.get_for("bcond", rule, "upper_max")?,
    ));
    let worst_d1 = rows.iter().map(|r| (r.5 - 1.0).abs()).fold(0.0, f64::max);
    report.assertions.push(Assertion::new(
        "max |B_1/B - 1|",
        worst_d1,
        Comparison::Equal,
        0.0,
        "identity: every member is a multiple of 1",
    ));
    Ok(report.finish())
}

/// Running estimate of `c_θ = lim B(x) log x / x` and the divisor bound
/// `B_d(x) ≪ B(x) log 2d / d`, for θ-rules.
pub fn check_bmult(
    rule: &IntervalRule,
    slice: &SequenceSlice,
    xs: &[u64],
    dmax: u64,
    cal: &Calibration,
) -> Result<SuiteReport> {
    if !rule.is_theta_rule() {
        return Err(Error::Input(format!("{rule} is not of the form I(n) = [1, θ(n)]")));
    }
    if rule.id() != slice.rule_id() {
        return Err(Error::Input(format!(
            "slice was generated by {}, not {rule}",
            slice.rule_id()
        )));
    }
    check_xs(xs, slice)?;
    if dmax == 0 {
        return Err(Error::Input("need dmax >= 1".into()));
    }
    let mut report = SuiteReport::new(
        "bmult",
        params([
            ("rule", rule.id().to_string()),
            ("xs", join(xs)),
            ("dmax", dmax.to_string()),
        ]),
        &["x", "B", "c_theta_estimate", "max_divisor_ratio", "argmax_d", "d1_ratio"],
    );
    let ln2 = std::f64::consts::LN_2;
    let rows: Vec<(u64, u64, f64, f64, u64, f64)> = xs
        .par_iter()
        .map(|&x| {
            let s = slice.truncate(x);
            let b = s.count();
            let c = b as f64 * (x as f64).ln() / x as f64;
            let (ratio, arg) = max_divisor_ratio(&s, dmax, |d| d as f64 / (2.0 * d as f64).ln());
            let d1 = s.count_multiples(1).expect("d = 1") as f64 / b as f64 / ln2;
            (x, b, c, ratio, arg, d1)
        })
        .collect();
    for &(x, b, c, ratio, arg, d1) in &rows {
        report.rows.push(vec![
            x.to_string(),
            b.to_string(),
            c.to_string(),
            ratio.to_string(),
            arg.to_string(),
            d1.to_string(),
        ]);
    }
    let max_ratio = rows.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    report.assertions.push(Assertion::calibrated(
        "max divisor ratio",
        max_ratio,
        Comparison::AtMost,
        cal.get_for("bmult", rule.id(), "ratio_max")?,
    ));
    if let [.., prev, last] = rows.as_slice() {
        report.assertions.push(Assertion::calibrated(
            "relative change of c_theta over the last step",
            ((last.2 - prev.2) / prev.2).abs(),
            Comparison::AtMost,
            cal.get_for("bmult", rule.id(), "rel_change_max")?,
        ));
    }
    let d1 = rows.iter().map(|r| (r.5 - 1.0 / ln2).abs()).fold(0.0, f64::max);
    report.assertions.push(Assertion::new(
        "max |B_1/(B log 2) - 1/log 2|",
        d1,
        Comparison::Equal,
        0.0,
        "identity: B_1(x) = B(x)",
    ));
    Ok(report.finish())
}

/// Constants in `θ(n) <= θ(mn) <= C m^J θ(n)` and
/// `max(2, n) <= θ(n) <= K n exp((log n)^η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaConstants {
    pub c: f64,
    pub j: f64,
    pub k: f64,
    pub eta: f64,
}

/// Per-rule defaults. For practical numbers `σ(mn) <= σ(m)σ(n)` and
/// `σ(m) <= m^2` give `C = 2, J = 2`.
pub fn default_theta_constants(rule: &IntervalRule) -> Option<ThetaConstants> {
    use crate::rules::RuleKind;
    match rule.kind() {
        RuleKind::TDense { num, den } => Some(ThetaConstants {
            c: 1.0,
            j: 1.0,
            k: num as f64 / den as f64,
            eta: 0.0,
        }),
        RuleKind::Practical => Some(ThetaConstants {
            c: 2.0,
            j: 2.0,
            k: 4.0,
            eta: 0.5,
        }),
        RuleKind::PhiPractical | RuleKind::Nullwert => Some(ThetaConstants {
            c: 1.0,
            j: 1.0,
            k: 2.0,
            eta: 0.0,
        }),
        _ => None,
    }
}

fn theta_parts(rule: &IntervalRule, n: u64, sieve: &SieveTable) -> Result<(u128, u128)> {
    match rule.theta_of(n, sieve)? {
        Some(Endpoint::Finite { num, den }) => Ok((num, den)),
        _ => Err(Error::Invariant(format!("θ({n}) is not finite for {rule}"))),
    }
}

const REL_TOL: f64 = 1e-12;

/// Exhaustive check of the θ growth conditions for all `m, n <= bound`.
/// The sieve must reach `bound^2`.
pub fn check_thetahyp(
    rule: &IntervalRule,
    constants: ThetaConstants,
    bound: u64,
    sieve: &SieveTable,
) -> Result<SuiteReport> {
    if !rule.is_theta_rule() {
        return Err(Error::Input(format!("{rule} is not of the form I(n) = [1, θ(n)]")));
    }
    if bound < 1 {
        return Err(Error::Input("need bound >= 1".into()));
    }
    let need = bound.checked_mul(bound).ok_or_else(|| Error::Input("bound^2 overflows".into()))?;
    if sieve.limit() < need.max(2) {
        return Err(Error::range("bound^2", need, 2, sieve.limit()));
    }
    let ThetaConstants { c, j, k, eta } = constants;
    let mut report = SuiteReport::new(
        "thetahyp",
        params([
            ("rule", rule.id().to_string()),
            ("C", c.to_string()),
            ("J", j.to_string()),
            ("K", k.to_string()),
            ("eta", eta.to_string()),
            ("bound", bound.to_string()),
        ]),
        &["condition", "checked", "violations", "witness"],
    );

    // Per n: violations of each condition and the smallest violating m.
    type Cell = ([u64; 4], [Option<(u64, u64, String)>; 4]);
    let cells: Vec<Cell> = (1..=bound)
        .into_par_iter()
        .map(|n| -> Result<Cell> {
            let mut counts = [0u64; 4];
            let mut witness: [Option<(u64, u64, String)>; 4] = Default::default();
            let (tn, dn) = theta_parts(rule, n, sieve)?;
            let theta_n = tn as f64 / dn as f64;
            // max(2, n) <= θ(n)
            if (n.max(2) as u128) * dn > tn {
                counts[2] += 1;
                witness[2] = Some((1, n, format!("θ({n}) = {theta_n} < max(2, {n})")));
            }
            let cap = k * n as f64 * (n as f64).ln().powf(eta).exp();
            if theta_n > cap * (1.0 + REL_TOL) {
                counts[3] += 1;
                witness[3] = Some((1, n, format!("θ({n}) = {theta_n} > K n exp((log n)^η) = {cap}")));
            }
            for m in 1..=bound {
                let (tmn, dmn) = theta_parts(rule, m * n, sieve)?;
                if tn * dmn > tmn * dn {
                    counts[0] += 1;
                    if witness[0].is_none() {
                        witness[0] = Some((m, n, format!("m = {m}, n = {n}: θ(mn) < θ(n)")));
                    }
                }
                let theta_mn = tmn as f64 / dmn as f64;
                let rhs = c * (m as f64).powf(j) * theta_n;
                if theta_mn > rhs * (1.0 + REL_TOL) {
                    counts[1] += 1;
                    if witness[1].is_none() {
                        witness[1] = Some((
                            m,
                            n,
                            format!("m = {m}, n = {n}: θ(mn) = {theta_mn} > C m^J θ(n) = {rhs}"),
                        ));
                    }
                }
            }
            Ok((counts, witness))
        })
        .collect::<Result<_>>()?;

    let names = [
        "θ(n) <= θ(mn)",
        "θ(mn) <= C m^J θ(n)",
        "max(2, n) <= θ(n)",
        "θ(n) <= K n exp((log n)^η)",
    ];
    let checked = [bound * bound, bound * bound, bound, bound];
    for i in 0..4 {
        let violations: u64 = cells.iter().map(|c| c.0[i]).sum();
        let witness = cells
            .iter()
            .filter_map(|c| c.1[i].as_ref())
            .min_by_key(|w| (w.0, w.1))
            .map(|w| w.2.clone())
            .unwrap_or_default();
        report.rows.push(vec![
            names[i].to_string(),
            checked[i].to_string(),
            violations.to_string(),
            witness,
        ]);
        report.assertions.push(Assertion::new(
            format!("violations of {}", names[i]),
            violations as f64,
            Comparison::Equal,
            0.0,
            format!("exhaustive over m, n <= {bound}"),
        ));
    }
    Ok(report.finish())
}

/// `Ψ(x, y) / (x exp(−u log u))` over a grid, restricted to
/// `y >= (log x)^2` and `u >= 1`.
pub fn check_debruijn(grid: &[(u64, u64)], sieve: &SieveTable, cal: &Calibration) -> Result<SuiteReport> {
    if grid.is_empty() {
        return Err(Error::Input("empty (x, y) grid".into()));
    }
    let mut report = SuiteReport::new(
        "debruijn",
        params([(
            "grid",
            grid.iter()
                .map(|(x, y)| format!("{x}:{y}"))
                .collect::<Vec<_>>()
                .join(" "),
        )]),
        &["x", "y", "u", "psi", "envelope", "ratio", "status"],
    );
    let rows: Vec<(u64, u64, Option<(f64, u64, f64, f64)>, &'static str)> = grid
        .par_iter()
        .map(|&(x, y)| {
            if x < 2 || y < 2 {
                return Err(Error::Input(format!("need x, y >= 2, got ({x}, {y})")));
            }
            let lx = (x as f64).ln();
            if (y as f64) < lx * lx {
                return Ok((x, y, None, "skipped: y < (log x)^2"));
            }
            if y > x {
                return Ok((x, y, None, "skipped: u < 1"));
            }
            let u = lx / (y as f64).ln();
            let psi = smooth_count_with(sieve, x, y)?;
            let envelope = x as f64 * (-u * u.ln()).exp();
            Ok((x, y, Some((u, psi, envelope, psi as f64 / envelope)), "ok"))
        })
        .collect::<Result<_>>()?;
    let mut ratios = Vec::new();
    for (x, y, cell, status) in rows {
        let mut row = vec![x.to_string(), y.to_string()];
        match cell {
            Some((u, psi, env, ratio)) => {
                ratios.push(ratio);
                row.extend([u.to_string(), psi.to_string(), env.to_string(), ratio.to_string()]);
            }
            None => row.extend(["", "", "", ""].map(String::from)),
        }
        row.push(status.to_string());
        report.rows.push(row);
    }
    let non_finite = ratios.iter().filter(|r| !r.is_finite()).count();
    report.assertions.push(Assertion::new(
        "non-finite ratios",
        non_finite as f64,
        Comparison::Equal,
        0.0,
        "every gated row has a finite ratio",
    ));
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    report.assertions.push(Assertion::calibrated(
        "max ratio",
        max_ratio,
        Comparison::AtMost,
        cal.get("debruijn.ratio_max")?,
    ));
    Ok(report.finish())
}

/// `max_{q <= qmax, (a,q)=1} |π(x; q, a) − π(x)/φ(q)| / (x / log x)` across
/// a grid of `x`, expected to decrease.
pub fn check_siegel_walfisz(
    xs: &[u64],
    qmax: u64,
    sieve: &SieveTable,
    cal: &Calibration,
) -> Result<SuiteReport> {
    if xs.is_empty() || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input(format!("x grid must be non-empty and ascending, got {xs:?}")));
    }
    if xs[0] < 16 {
        return Err(Error::Input(format!("x grid must start at 16 or above, got {}", xs[0])));
    }
    let last = *xs.last().expect("non-empty");
    if last > sieve.limit() {
        return Err(Error::range("x", last, 16, sieve.limit()));
    }
    if qmax == 0 {
        return Err(Error::Input("need qmax >= 1".into()));
    }
    let first_cap = (xs[0] as f64).ln().powi(4);
    if qmax as f64 > first_cap {
        return Err(Error::Input(format!(
            "qmax = {qmax} exceeds (log x)^4 = {first_cap:.1} at x = {}",
            xs[0]
        )));
    }
    let mut report = SuiteReport::new(
        "siegel_walfisz",
        params([("xs", join(xs)), ("qmax", qmax.to_string())]),
        &["x", "pi_x", "max_deviation", "argmax_q", "argmax_a", "q1_deviation"],
    );
    let rows: Vec<(u64, u64, f64, u64, u64, f64)> = xs
        .par_iter()
        .map(|&x| {
            let primes = sieve.primes_up_to(x);
            let pi = primes.len() as u64;
            let scale = x as f64 / (x as f64).ln();
            let mut best = (0.0f64, 1u64, 0u64);
            let mut q1 = 0.0;
            for q in 1..=qmax {
                let mut counts = vec![0u64; q as usize];
                for &p in primes {
                    counts[(p % q) as usize] += 1;
                }
                let phi = (0..q).filter(|a| a.gcd(&q) == 1).count() as f64;
                for a in 0..q {
                    if a.gcd(&q) != 1 {
                        continue;
                    }
                    let dev = (counts[a as usize] as f64 - pi as f64 / phi).abs() / scale;
                    if q == 1 {
                        q1 = dev;
                    }
                    if dev > best.0 {
                        best = (dev, q, a);
                    }
                }
            }
            (x, pi, best.0, best.1, best.2, q1)
        })
        .collect();
    for &(x, pi, dev, q, a, q1) in &rows {
        report.rows.push(vec![
            x.to_string(),
            pi.to_string(),
            dev.to_string(),
            q.to_string(),
            a.to_string(),
            q1.to_string(),
        ]);
    }
    let worst_step = rows
        .windows(2)
        .map(|w| w[1].2 / w[0].2)
        .fold(0.0f64, f64::max);
    if rows.len() >= 2 {
        report.assertions.push(Assertion::calibrated(
            "max ratio of consecutive deviations",
            worst_step,
            Comparison::AtMost,
            cal.get("siegel_walfisz.step_ratio_max")?,
        ));
    }
    let q1 = rows.iter().map(|r| r.5).fold(0.0, f64::max);
    report.assertions.push(Assertion::new(
        "q = 1 deviation",
        q1,
        Comparison::Equal,
        0.0,
        "identity: π(x; 1, 0) = π(x)",
    ));
    Ok(report.finish())
}
