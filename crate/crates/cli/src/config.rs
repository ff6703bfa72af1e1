//! Run configuration: one `key = value` grammar shared by flags, config files
//! and the printed form.

use std::fmt;
use std::path::PathBuf;

use num_bigint::BigUint;
use num_rational::Ratio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Gen,
    Member,
    Expsum,
    Majorarc,
    Cf,
    Classify,
    Discrepancy,
    Et,
    Beatty,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Member => "member",
            Command::Expsum => "expsum",
            Command::Majorarc => "majorarc",
            Command::Cf => "cf",
            Command::Classify => "classify",
            Command::Discrepancy => "discrepancy",
            Command::Et => "et",
            Command::Beatty => "beatty",
            Command::Verify => "verify",
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        <Command as clap::ValueEnum>::from_str(s, false).map_err(|_| format!("unknown command {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bcond,
    Bmult,
    Thetahyp,
    Debruijn,
    SiegelWalfisz,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Bcond => "bcond",
            Suite::Bmult => "bmult",
            Suite::Thetahyp => "thetahyp",
            Suite::Debruijn => "debruijn",
            Suite::SiegelWalfisz => "siegel-walfisz",
        }
    }
}

/// Every option of a run. `None` means "not given"; defaults are applied by
/// the subcommand that reads the field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub rule: Option<String>,
    pub alpha: Option<String>,
    pub x: Option<BigUint>,
    pub h: Option<u64>,
    pub q: Option<u64>,
    pub a: Option<i64>,
    pub beta: Option<Ratio<i64>>,
    pub n: Option<u64>,
    pub terms: Option<usize>,
    pub m: Option<Vec<u64>>,
    pub kappa: Option<f64>,
    pub big_a: Option<f64>,
    pub delta: Option<f64>,
    pub dmax: Option<u64>,
    pub xs: Option<Vec<u64>>,
    pub ys: Option<Vec<u64>>,
    pub suite: Option<Suite>,
    pub bound: Option<u64>,
    pub qmax: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub no_timestamp: Option<bool>,
}

/// Keys in printing order.
pub const KEYS: &[&str] = &[
    "command",
    "rule",
    "alpha",
    "x",
    "h",
    "q",
    "a",
    "beta",
    "n",
    "terms",
    "m",
    "kappa",
    "A",
    "delta",
    "dmax",
    "xs",
    "ys",
    "suite",
    "bound",
    "qmax",
    "out",
    "format",
    "cache-dir",
    "threads",
    "no-timestamp",
];

/// Integers written as digits, `10^k`, `2^k` or `1ek`.
pub fn parse_big(s: &str) -> Result<BigUint, String> {
    let s = s.trim();
    let err = || format!("bad integer {s:?}");
    if let Some((base, exp)) = s.split_once('^') {
        let base: BigUint = base.trim().parse().map_err(|_| err())?;
        let exp: u32 = exp.trim().parse().map_err(|_| err())?;
        return Ok(base.pow(exp));
    }
    if let Some((mant, exp)) = s.split_once(['e', 'E']) {
        let mant: BigUint = mant.trim().parse().map_err(|_| err())?;
        let exp: u32 = exp.trim().parse().map_err(|_| err())?;
        return Ok(mant * BigUint::from(10u32).pow(exp));
    }
    s.parse().map_err(|_| err())
}

fn parse_u64(s: &str) -> Result<u64, String> {
    u64::try_from(parse_big(s)?).map_err(|_| format!("{s:?} does not fit in 64 bits"))
}

fn parse_list(s: &str) -> Result<Vec<u64>, String> {
    s.split(',').map(parse_u64).collect()
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// `p/q`, an integer, or a decimal such as `1e-9` or `0.25`, kept exact.
pub fn parse_ratio(s: &str) -> Result<Ratio<i64>, String> {
    let s = s.trim();
    let err = || format!("bad rational {s:?}");
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| err())?;
        let q: i64 = q.trim().parse().map_err(|_| err())?;
        if q == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Ratio::new(p, q));
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int_part}{frac_part}");
    let num: i64 = digits.parse().map_err(|_| err())?;
    let scale = exp - frac_part.len() as i32;
    let pow = |k: i32| 10i64.checked_pow(k as u32).ok_or_else(err);
    if scale >= 0 {
        Ok(Ratio::from_integer(num.checked_mul(pow(scale)?).ok_or_else(err)?))
    } else {
        Ok(Ratio::new(num, pow(-scale)?))
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("bad value {s:?} for {key}"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("bad boolean {s:?}")),
    }
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "command" => self.command = Some(Command::parse(v)?),
            "rule" => self.rule = Some(v.to_string()),
            "alpha" => self.alpha = Some(v.to_string()),
            "x" => self.x = Some(parse_big(v)?),
            "h" => self.h = Some(parse_u64(v)?),
            "q" => self.q = Some(parse_u64(v)?),
            "a" => self.a = Some(parse_num(key, v)?),
            "beta" => self.beta = Some(parse_ratio(v)?),
            "n" => self.n = Some(parse_u64(v)?),
            "terms" => self.terms = Some(parse_num(key, v)?),
            "m" => self.m = Some(parse_list(v)?),
            "kappa" => self.kappa = Some(parse_f64(v)?),
            "A" => self.big_a = Some(parse_f64(v)?),
            "delta" => self.delta = Some(parse_f64(v)?),
            "dmax" => self.dmax = Some(parse_u64(v)?),
            "xs" => self.xs = Some(parse_list(v)?),
            "ys" => self.ys = Some(parse_list(v)?),
            "suite" => {
                self.suite = Some(match v {
                    "bcond" => Suite::Bcond,
                    "bmult" => Suite::Bmult,
                    "thetahyp" => Suite::Thetahyp,
                    "debruijn" => Suite::Debruijn,
                    "siegel-walfisz" => Suite::SiegelWalfisz,
                    _ => return Err(format!("unknown suite {v:?}")),
                })
            }
            "bound" => self.bound = Some(parse_u64(v)?),
            "qmax" => self.qmax = Some(parse_u64(v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => {
                self.format = Some(match v {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(format!("unknown format {v:?}")),
                })
            }
            "cache-dir" => self.cache_dir = Some(PathBuf::from(v)),
            "threads" => {
                let t: usize = parse_num(key, v)?;
                if t == 0 {
                    return Err("threads must be at least 1".into());
                }
                self.threads = Some(t)
            }
            "no-timestamp" => self.no_timestamp = Some(parse_bool(v)?),
            _ => return Err(format!("unknown key {key:?}; expected one of {}", KEYS.join(", "))),
        }
        Ok(())
    }

    /// Present fields as `(key, value)` in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        put("command", self.command.map(|c| c.name().to_string()));
        put("rule", self.rule.clone());
        put("alpha", self.alpha.clone());
        put("x", self.x.as_ref().map(|v| v.to_string()));
        put("h", self.h.map(|v| v.to_string()));
        put("q", self.q.map(|v| v.to_string()));
        put("a", self.a.map(|v| v.to_string()));
        put("beta", self.beta.map(|v| v.to_string()));
        put("n", self.n.map(|v| v.to_string()));
        put("terms", self.terms.map(|v| v.to_string()));
        put("m", self.m.as_deref().map(join));
        put("kappa", self.kappa.map(|v| v.to_string()));
        put("A", self.big_a.map(|v| v.to_string()));
        put("delta", self.delta.map(|v| v.to_string()));
        put("dmax", self.dmax.map(|v| v.to_string()));
        put("xs", self.xs.as_deref().map(join));
        put("ys", self.ys.as_deref().map(join));
        put("suite", self.suite.map(|s| s.name().to_string()));
        put("bound", self.bound.map(|v| v.to_string()));
        put("qmax", self.qmax.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put(
            "format",
            self.format.map(|f| match f {
                Format::Csv => "csv".to_string(),
                Format::Json => "json".to_string(),
            }),
        );
        put("cache-dir", self.cache_dir.as_ref().map(|p| p.display().to_string()));
        put("threads", self.threads.map(|v| v.to_string()));
        put("no-timestamp", self.no_timestamp.map(|v| v.to_string()));
        out
    }

    /// `key = value` lines; blank lines and `#` comments are ignored.
    pub fn parse_text(text: &str) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
            cfg.set(k.trim(), v).map_err(|e| format!("config line {}: {e}", i + 1))?;
        }
        Ok(cfg)
    }

    /// Fields of `self` win; missing ones come from `lower`.
    pub fn over(self, lower: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(lower.command),
            rule: self.rule.or(lower.rule),
            alpha: self.alpha.or(lower.alpha),
            x: self.x.or(lower.x),
            h: self.h.or(lower.h),
            q: self.q.or(lower.q),
            a: self.a.or(lower.a),
            beta: self.beta.or(lower.beta),
            n: self.n.or(lower.n),
            terms: self.terms.or(lower.terms),
            m: self.m.or(lower.m),
            kappa: self.kappa.or(lower.kappa),
            big_a: self.big_a.or(lower.big_a),
            delta: self.delta.or(lower.delta),
            dmax: self.dmax.or(lower.dmax),
            xs: self.xs.or(lower.xs),
            ys: self.ys.or(lower.ys),
            suite: self.suite.or(lower.suite),
            bound: self.bound.or(lower.bound),
            qmax: self.qmax.or(lower.qmax),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
            cache_dir: self.cache_dir.or(lower.cache_dir),
            threads: self.threads.or(lower.threads),
            no_timestamp: self.no_timestamp.or(lower.no_timestamp),
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full() -> RunConfig {
        RunConfig {
            command: Some(Command::Majorarc),
            rule: Some("t-dense:5/2".into()),
            alpha: Some("quad:(1+sqrt5)/2".into()),
            x: Some(parse_big("2^80").unwrap()),
            h: Some(3),
            q: Some(5),
            a: Some(-2),
            beta: Some(Ratio::new(1, 1_000_000_000)),
            n: Some(12),
            terms: Some(20),
            m: Some(vec![10, 100, 1000]),
            kappa: Some(0.1 + 0.2),
            big_a: Some(1.0),
            delta: Some(0.9),
            dmax: Some(1000),
            xs: Some(vec![10_000, 100_000]),
            ys: Some(vec![300]),
            suite: Some(Suite::SiegelWalfisz),
            bound: Some(500),
            qmax: Some(30),
            out: Some(PathBuf::from("/tmp/out file.csv")),
            format: Some(Format::Json),
            cache_dir: Some(PathBuf::from("cache")),
            threads: Some(4),
            no_timestamp: Some(true),
        }
    }

    #[test]
    fn text_round_trip() {
        for cfg in [full(), RunConfig::default()] {
            let text = cfg.to_string();
            assert_eq!(RunConfig::parse_text(&text).unwrap(), cfg, "{text}");
        }
        assert_eq!(full().entries().len(), KEYS.len());
        let keys: Vec<&str> = full().entries().iter().map(|e| e.0).collect();
        assert_eq!(keys, KEYS);
    }

    #[test]
    fn shorthand_numbers() {
        assert_eq!(parse_big("10^6").unwrap(), BigUint::from(1_000_000u32));
        assert_eq!(parse_big("1e4").unwrap(), BigUint::from(10_000u32));
        assert_eq!(parse_ratio("1e-9").unwrap(), Ratio::new(1, 1_000_000_000));
        assert_eq!(parse_ratio("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_ratio("-3/6").unwrap(), Ratio::new(-1, 2));
        assert_eq!(parse_ratio("2e3").unwrap(), Ratio::from_integer(2000));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_big("x").is_err());
    }

    #[test]
    fn precedence_and_errors() {
        let file = RunConfig::parse_text("# defaults\nrule = primes\nx = 100\n").unwrap();
        let mut flags = RunConfig::default();
        flags.set("x", "30").unwrap();
        let merged = flags.over(file);
        assert_eq!(merged.rule.as_deref(), Some("primes"));
        assert_eq!(merged.x, Some(BigUint::from(30u32)));
        assert!(RunConfig::parse_text("bogus = 1").is_err());
        assert!(RunConfig::parse_text("threads = 0").is_err());
        assert!(RunConfig::parse_text("no equals").is_err());
    }
}
