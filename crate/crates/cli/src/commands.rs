use num_bigint::BigUint;
use num_rational::Ratio;
use serde_json::{json, Value};

use bseq::beatty::{beatty_csv, beatty_hits, identity_check};
use bseq::diophantine::{check_convergent_laws, classify_arc, continued_fraction, Alpha, ArcVerdict};
use bseq::equidist::{discrepancy_report, erdos_turan_bounds, FractionalSample};
use bseq::expsum::{exp_sum, exp_sum_csv, major_arc_compare, major_arc_csv};
use bseq::numtheory::SieveTable;
use bseq::report::CsvTable;
use bseq::rules::{generate, is_member, CacheOutcome, IntervalRule, SequenceSlice, SliceCache};
use bseq::verify::{
    check_bcond, check_bmult, check_debruijn, check_siegel_walfisz, check_thetahyp,
    default_theta_constants, Calibration, SuiteReport,
};
use bseq::{Error, Result};

use crate::config::{Command, Format, RunConfig, Suite};

pub struct Output {
    pub text: String,
    /// False when a verify suite ran but an assertion failed.
    pub passed: bool,
}

const DEFAULT_XS: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];
const DEFAULT_YS: [u64; 4] = [300, 1000, 10_000, 100_000];
const DEFAULT_ET_M: [u64; 3] = [10, 100, 1000];

fn need<'a, T>(v: &'a Option<T>, key: &str, cmd: Command) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::Input(format!("{} needs --{key}", cmd.name())))
}

fn x_u64(cfg: &RunConfig, cmd: Command) -> Result<u64> {
    let x = need(&cfg.x, "x", cmd)?;
    u64::try_from(x).map_err(|_| Error::Input(format!("--x = {x} does not fit in 64 bits")))
}

fn rule(cfg: &RunConfig, cmd: Command) -> Result<IntervalRule> {
    IntervalRule::parse(need(&cfg.rule, "rule", cmd)?)
}

fn alpha(cfg: &RunConfig, cmd: Command) -> Result<Alpha> {
    Alpha::parse(need(&cfg.alpha, "alpha", cmd)?)
}

fn sieve_for(limit: u64) -> Result<SieveTable> {
    SieveTable::build(limit.max(2))
}

fn load_slice(cfg: &RunConfig, rule: &IntervalRule, x: u64, sieve: &SieveTable) -> Result<SequenceSlice> {
    let Some(dir) = &cfg.cache_dir else {
        return generate(rule, x, sieve);
    };
    let cache = SliceCache::new(dir);
    let (slice, outcome) = cache.load_or_generate(rule, x, sieve)?;
    match outcome {
        CacheOutcome::Hit => eprintln!("bseq: cache hit {}", cache.path_for(rule.id(), x).display()),
        CacheOutcome::Miss => eprintln!("bseq: cache miss, stored {}", cache.path_for(rule.id(), x).display()),
        CacheOutcome::Rejected(why) => eprintln!("bseq: warning: ignoring cache file ({why}); regenerated"),
    }
    Ok(slice)
}

fn slice_from(cfg: &RunConfig, cmd: Command) -> Result<SequenceSlice> {
    let rule = rule(cfg, cmd)?;
    let x = x_u64(cfg, cmd)?;
    let sieve = sieve_for(x)?;
    load_slice(cfg, &rule, x, &sieve)
}

fn render_json(cfg: &RunConfig, mut v: Value) -> String {
    if cfg.no_timestamp != Some(true) {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        if let Value::Object(map) = &mut v {
            map.insert("generated_at".into(), json!(now));
        }
    }
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn ok(text: String) -> Result<Output> {
    Ok(Output { text, passed: true })
}

pub fn execute(cfg: &RunConfig) -> Result<Output> {
    let cmd = cfg
        .command
        .ok_or_else(|| Error::Input("no subcommand given".into()))?;
    let default_format = match cmd {
        Command::Classify | Command::Discrepancy | Command::Verify => Format::Json,
        _ => Format::Csv,
    };
    let format = cfg.format.unwrap_or(default_format);
    let emit = |table: CsvTable, value: Value| -> Result<Output> {
        match format {
            Format::Csv => ok(table.render()),
            Format::Json => ok(render_json(cfg, value)),
        }
    };
    match cmd {
        Command::Gen => {
            let slice = slice_from(cfg, cmd)?;
            let mut t = CsvTable::new(["n"]);
            for &n in slice.members() {
                t.push([n]);
            }
            emit(
                t,
                json!({
                    "rule": slice.rule_id(),
                    "x": slice.limit(),
                    "count": slice.count(),
                    "members": slice.members(),
                }),
            )
        }
        Command::Member => {
            let rule = rule(cfg, cmd)?;
            let n = *need(&cfg.n, "n", cmd)?;
            let sieve = sieve_for(n)?;
            let m = is_member(n, &rule, &sieve)?;
            let witness = m.witness();
            let mut t = CsvTable::new(["n", "rule", "member", "chain", "witness"]);
            let chain = m.chain.primes.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
            t.push([n.to_string(), rule.id().to_string(), m.member.to_string(), chain, witness.clone()]);
            emit(
                t,
                json!({
                    "n": n,
                    "rule": rule.id(),
                    "member": m.member,
                    "chain": m.chain.primes,
                    "witness": witness,
                }),
            )
        }
        Command::Expsum => {
            let slice = slice_from(cfg, cmd)?;
            let a = alpha(cfg, cmd)?;
            let r = exp_sum(&slice, &a, cfg.h.unwrap_or(1))?;
            emit(exp_sum_csv(std::slice::from_ref(&r)), to_value(&r))
        }
        Command::Majorarc => {
            let slice = slice_from(cfg, cmd)?;
            let q = *need(&cfg.q, "q", cmd)?;
            let beta = cfg.beta.unwrap_or_else(|| Ratio::from_integer(0));
            let r = major_arc_compare(&slice, cfg.a.unwrap_or(1), q, beta)?;
            emit(major_arc_csv(std::slice::from_ref(&r)), to_value(&r))
        }
        Command::Cf => {
            let a = alpha(cfg, cmd)?;
            let cf = continued_fraction(&a, cfg.terms.unwrap_or(10))?;
            let laws = check_convergent_laws(&a, &cf)?;
            let mut t = CsvTable::new(["j", "quotient", "a", "q"]);
            for (c, quotient) in cf.convergents.iter().zip(&cf.quotients) {
                t.push([c.index.to_string(), quotient.to_string(), c.a.to_string(), c.q.to_string()]);
            }
            emit(
                t,
                json!({
                    "alpha": a.id(),
                    "quotients": cf.quotients.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                    "convergents": to_value(&cf.convergents),
                    "terminated": cf.terminated,
                    "truncated": cf.truncated,
                    "laws": to_value(&laws),
                }),
            )
        }
        Command::Classify => {
            let a = alpha(cfg, cmd)?;
            let x: &BigUint = need(&cfg.x, "x", cmd)?;
            let cls = classify_arc(&a, x, cfg.big_a.unwrap_or(0.0))?;
            let mut t = CsvTable::new(["x", "alpha_id", "A", "log_Q", "log_x_over_Q", "verdict", "a", "q"]);
            let c = cls.verdict.convergent();
            let verdict = match cls.verdict {
                ArcVerdict::Minor { .. } => "minor",
                ArcVerdict::Major { .. } => "major",
            };
            t.push([
                cls.x.clone(),
                a.id(),
                cls.a_exponent.to_string(),
                cls.log_q_threshold.to_string(),
                cls.log_upper.to_string(),
                verdict.to_string(),
                c.a.to_string(),
                c.q.to_string(),
            ]);
            let mut v = to_value(&cls);
            v["alpha"] = json!(a.id());
            emit(t, v)
        }
        Command::Discrepancy => {
            let slice = slice_from(cfg, cmd)?;
            let a = alpha(cfg, cmd)?;
            let ms = cfg.m.clone().unwrap_or_default();
            let r = discrepancy_report(&slice, &a, cfg.kappa, &ms)?;
            let mut t = CsvTable::new(["x", "rule", "alpha", "N", "sup_deviation", "star_discrepancy", "uncertainty"]);
            t.push([
                r.x.to_string(),
                r.rule.clone(),
                r.alpha.clone(),
                r.n.to_string(),
                r.sup_deviation.to_string(),
                r.star_discrepancy.to_string(),
                r.uncertainty.to_string(),
            ]);
            emit(t, to_value(&r))
        }
        Command::Et => {
            let slice = slice_from(cfg, cmd)?;
            let a = alpha(cfg, cmd)?;
            let ms = cfg.m.clone().unwrap_or_else(|| DEFAULT_ET_M.to_vec());
            let sup = FractionalSample::new(&slice, &a)?.sup_deviation()?;
            let bounds = erdos_turan_bounds(&slice, &a, &ms)?;
            let mut t = CsvTable::new(["x", "rule", "alpha_id", "m", "bound", "sup_deviation", "holds"]);
            for b in &bounds {
                t.push([
                    slice.limit().to_string(),
                    slice.rule_id().to_string(),
                    a.id(),
                    b.m.to_string(),
                    b.bound.to_string(),
                    sup.sup_deviation.to_string(),
                    (sup.sup_deviation <= b.bound).to_string(),
                ]);
            }
            emit(
                t,
                json!({
                    "x": slice.limit(),
                    "rule": slice.rule_id(),
                    "alpha": a.id(),
                    "sup_deviation": sup.sup_deviation,
                    "et": to_value(&bounds),
                }),
            )
        }
        Command::Beatty => {
            let slice = slice_from(cfg, cmd)?;
            let a = alpha(cfg, cmd)?;
            let r = beatty_hits(&slice, &a)?;
            let id = identity_check(&slice, &a)?;
            if !id.holds {
                return Err(Error::Invariant(format!(
                    "Beatty set identity failed: {} floor-only, {} fraction-only members",
                    id.only_floor.len(),
                    id.only_fraction.len()
                )));
            }
            emit(
                beatty_csv(std::slice::from_ref(&r)),
                json!({ "beatty": to_value(&r), "identity": to_value(&id) }),
            )
        }
        Command::Verify => {
            let report = run_suite(cfg)?;
            let passed = report.passed;
            let text = match format {
                Format::Csv => report.table().render(),
                Format::Json => render_json(cfg, to_value(&report)),
            };
            eprintln!("bseq: {}", report.summary);
            Ok(Output { text, passed })
        }
    }
}

fn run_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let cmd = Command::Verify;
    let cal = Calibration::embedded();
    let suite = *need(&cfg.suite, "suite", cmd)?;
    let xs = cfg.xs.clone().unwrap_or_else(|| DEFAULT_XS.to_vec());
    let xmax = xs.iter().copied().max().unwrap_or(2);
    let dmax = cfg.dmax.unwrap_or(1000);
    match suite {
        Suite::Bcond => {
            let rule = rule(cfg, cmd)?;
            let sieve = sieve_for(xmax)?;
            let slice = load_slice(cfg, &rule, xmax, &sieve)?;
            check_bcond(&slice, &xs, cfg.big_a.unwrap_or(1.0), cfg.delta.unwrap_or(0.5), dmax, &cal)
        }
        Suite::Bmult => {
            let rule = rule(cfg, cmd)?;
            let sieve = sieve_for(xmax)?;
            let slice = load_slice(cfg, &rule, xmax, &sieve)?;
            check_bmult(&rule, &slice, &xs, dmax, &cal)
        }
        Suite::Thetahyp => {
            let rule = rule(cfg, cmd)?;
            let constants = default_theta_constants(&rule)
                .ok_or_else(|| Error::Input(format!("{rule} is not of the form I(n) = [1, θ(n)]")))?;
            let bound = cfg.bound.unwrap_or(500);
            let limit = bound
                .checked_mul(bound)
                .ok_or_else(|| Error::Input("--bound squared overflows".into()))?;
            check_thetahyp(&rule, constants, bound, &sieve_for(limit)?)
        }
        Suite::Debruijn => {
            let ys = cfg.ys.clone().unwrap_or_else(|| DEFAULT_YS.to_vec());
            let grid: Vec<(u64, u64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
            let limit = grid.iter().map(|&(x, y)| x.min(y)).max().unwrap_or(2);
            check_debruijn(&grid, &sieve_for(limit)?, &cal)
        }
        Suite::SiegelWalfisz => check_siegel_walfisz(&xs, cfg.qmax.unwrap_or(30), &sieve_for(xmax)?, &cal),
    }
}
