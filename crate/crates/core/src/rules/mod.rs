//! Interval rules `n ↦ I(n)` and the integer sets they generate.
//!
//! A positive integer `n = p_1 ⋯ p_k` (primes in ascending order) belongs to
//! the set generated by a rule when every `p_j` lies in `I(p_1 ⋯ p_{j-1})`.
//! `n = 1` is always a member.

mod cache;
mod generate;

use std::fmt;

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::numtheory::{FactorChain, SieveTable};

pub use cache::{read_slice, write_slice, CacheOutcome, SliceCache, CACHE_MAGIC};
pub use generate::{generate, SequenceSlice};

/// Hard capacity of a piece list. Builtin rules need at most two pieces.
pub const PIECE_CAPACITY: usize = 4;
pub const DEFAULT_MAX_PIECES: usize = 4;

/// Non-negative rational endpoint `num / den`, or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Finite { num: u128, den: u128 },
    PosInfinity,
}

impl Endpoint {
    pub fn int(v: u64) -> Self {
        Endpoint::Finite {
            num: v as u128,
            den: 1,
        }
    }

    pub fn ratio(num: u128, den: u128) -> Self {
        debug_assert!(den > 0);
        let g = num_integer::gcd(num, den);
        Endpoint::Finite {
            num: num / g,
            den: den / g,
        }
    }

    /// `floor` of a finite endpoint; `None` for `+∞`.
    fn floor(self) -> Option<u128> {
        match self {
            Endpoint::Finite { num, den } => Some(num / den),
            Endpoint::PosInfinity => None,
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, Endpoint::Finite { num, den } if num % den == 0)
    }

    /// Three-way comparison of the integer `p` against this endpoint.
    fn cmp_int(self, p: u64) -> std::cmp::Ordering {
        match self {
            Endpoint::Finite { num, den } => (p as u128 * den).cmp(&num),
            Endpoint::PosInfinity => std::cmp::Ordering::Less,
        }
    }
}

impl PartialOrd for Endpoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use Endpoint::*;
        Some(match (self, other) {
            (PosInfinity, PosInfinity) => std::cmp::Ordering::Equal,
            (PosInfinity, _) => std::cmp::Ordering::Greater,
            (_, PosInfinity) => std::cmp::Ordering::Less,
            (Finite { num: a, den: b }, Finite { num: c, den: d }) => (a * d).cmp(&(c * b)),
        })
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Endpoint::Finite { num, den: 1 } => write!(f, "{num}"),
            Endpoint::Finite { num, den } => write!(f, "{num}/{den}"),
            Endpoint::PosInfinity => write!(f, "∞"),
        }
    }
}

/// One interval of `I(n)` with explicit endpoint flags. A single point `{v}`
/// is the closed piece `[v, v]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Piece {
    pub lo: Endpoint,
    pub lo_inclusive: bool,
    pub hi: Endpoint,
    pub hi_inclusive: bool,
}

impl Piece {
    pub fn closed(lo: Endpoint, hi: Endpoint) -> Self {
        Piece {
            lo,
            lo_inclusive: true,
            hi,
            hi_inclusive: !matches!(hi, Endpoint::PosInfinity),
        }
    }

    pub fn open_above(lo: Endpoint) -> Self {
        Piece {
            lo,
            lo_inclusive: false,
            hi: Endpoint::PosInfinity,
            hi_inclusive: false,
        }
    }

    pub fn point(v: u64) -> Self {
        Piece::closed(Endpoint::int(v), Endpoint::int(v))
    }

    pub fn contains(&self, p: u64) -> bool {
        use std::cmp::Ordering::*;
        let above_lo = match self.lo.cmp_int(p) {
            Greater => true,
            Equal => self.lo_inclusive,
            Less => false,
        };
        let below_hi = match self.hi.cmp_int(p) {
            Less => true,
            Equal => self.hi_inclusive,
            Greater => false,
        };
        above_lo && below_hi
    }

    /// Integers in this piece, as an inclusive range `(lo, hi)`, clipped to
    /// `[floor_lo, ceil_hi]`. `None` when empty.
    fn integer_range(&self, floor_lo: u64, ceil_hi: u64) -> Option<(u64, u64)> {
        let lo = match self.lo.floor() {
            Some(f) => {
                let first = if self.lo.is_integer() && self.lo_inclusive {
                    f
                } else {
                    f + 1
                };
                first.max(floor_lo as u128)
            }
            None => return None,
        };
        let hi = match self.hi.floor() {
            Some(f) => {
                if self.hi.is_integer() && !self.hi_inclusive {
                    if f == 0 {
                        return None;
                    }
                    f - 1
                } else {
                    f
                }
            }
            None => u128::MAX,
        }
        .min(ceil_hi as u128);
        (lo <= hi).then_some((lo as u64, hi as u64))
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi && self.lo_inclusive && self.hi_inclusive {
            return write!(f, "{{{}}}", self.lo);
        }
        let open = if self.lo_inclusive { '[' } else { '(' };
        let close = if self.hi_inclusive { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

pub type Pieces = ArrayVec<Piece, PIECE_CAPACITY>;

pub fn format_pieces(pieces: &[Piece]) -> String {
    if pieces.is_empty() {
        return "∅".to_string();
    }
    pieces
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(" ∪ ")
}

/// Multiplicative data of a chain prefix `m`, updated one prime at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainState {
    pub m: u64,
    /// `P(m)`, with `P(1) = 1`.
    pub largest_prime: u64,
    /// Exponent of `largest_prime` in `m`.
    pub largest_exp: u32,
    pub sigma: u64,
    pub big_omega: u32,
}

impl ChainState {
    pub const ONE: ChainState = ChainState {
        m: 1,
        largest_prime: 1,
        largest_exp: 0,
        sigma: 1,
        big_omega: 0,
    };

    /// State for `m·p`. Requires `p >= P(m)`, `p` prime.
    pub fn extend(&self, p: u64) -> ChainState {
        debug_assert!(p >= self.largest_prime);
        if p == self.largest_prime {
            let e = self.largest_exp;
            let old = geometric_sum(p, e);
            let new = geometric_sum(p, e + 1);
            ChainState {
                m: self.m * p,
                largest_prime: p,
                largest_exp: e + 1,
                sigma: self.sigma / old * new,
                big_omega: self.big_omega + 1,
            }
        } else {
            ChainState {
                m: self.m * p,
                largest_prime: p,
                largest_exp: 1,
                sigma: self.sigma * (p + 1),
                big_omega: self.big_omega + 1,
            }
        }
    }
}

/// `1 + p + … + p^e`.
fn geometric_sum(p: u64, e: u32) -> u64 {
    let mut acc = 1u64;
    for _ in 0..e {
        acc = acc * p + 1;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// `I(1) = [1, ∞)`, empty otherwise.
    Primes,
    /// `[1, ∞)` while `Ω(n) < k`.
    AlmostPrime { k: u32 },
    /// `(P(n), ∞)`.
    Squarefree,
    /// `{P(n)} ∪ (n, ∞)`.
    Lexicographical,
    /// `[1, n·t]` with `t = num/den >= 2`.
    TDense { num: u64, den: u64 },
    /// `[1, σ(n) + 1]`.
    Practical,
    /// `[1, n + 1]`.
    PhiPractical,
    /// `[1, max(2, n)]`.
    Nullwert,
}

impl RuleKind {
    fn pieces_needed(&self) -> usize {
        match self {
            RuleKind::Lexicographical => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalRule {
    id: String,
    kind: RuleKind,
    max_pieces: usize,
}

pub const BUILTIN_NAMES: &[&str] = &[
    "primes",
    "almost-prime",
    "squarefree",
    "lexicographical",
    "t-dense",
    "practical",
    "phi-practical",
    "nullwert",
];

/// Looks up a builtin rule by name. `param` is the text after the colon in
/// `name:param` (an integer `k` for almost-primes, a rational `t` for t-dense).
pub fn builtin_rule(name: &str, param: Option<&str>) -> Result<IntervalRule> {
    let no_param = |kind: RuleKind| -> Result<RuleKind> {
        match param {
            None => Ok(kind),
            Some(p) => Err(Error::Config(format!(
                "rule {name} takes no parameter, got {p:?}"
            ))),
        }
    };
    let kind = match name {
        "primes" => no_param(RuleKind::Primes)?,
        "squarefree" => no_param(RuleKind::Squarefree)?,
        "lexicographical" => no_param(RuleKind::Lexicographical)?,
        "practical" => no_param(RuleKind::Practical)?,
        "phi-practical" => no_param(RuleKind::PhiPractical)?,
        "nullwert" => no_param(RuleKind::Nullwert)?,
        "almost-prime" => {
            let text = param.ok_or_else(|| {
                Error::Config("almost-prime needs a parameter, e.g. almost-prime:2".into())
            })?;
            let k: u32 = text
                .parse()
                .map_err(|_| Error::Config(format!("almost-prime: bad k {text:?}")))?;
            if k == 0 {
                return Err(Error::Config("almost-prime needs k >= 1".into()));
            }
            RuleKind::AlmostPrime { k }
        }
        "t-dense" => {
            let text = param.ok_or_else(|| {
                Error::Config("t-dense needs a parameter, e.g. t-dense:2".into())
            })?;
            let (num, den) = parse_ratio(text)?;
            if num < 2 * den {
                return Err(Error::Config(format!("t-dense needs t >= 2, got {text}")));
            }
            RuleKind::TDense { num, den }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown rule {other:?}; expected one of {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(IntervalRule::from_kind(kind))
}

/// Parses `"7"`, `"5/2"` or `"2.5"` into a reduced fraction.
fn parse_ratio(text: &str) -> Result<(u64, u64)> {
    let bad = || Error::Config(format!("not a non-negative rational: {text:?}"));
    let (num, den) = if let Some((n, d)) = text.split_once('/') {
        (
            n.trim().parse::<u64>().map_err(|_| bad())?,
            d.trim().parse::<u64>().map_err(|_| bad())?,
        )
    } else if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let whole: u64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let frac: u64 = frac.parse().map_err(|_| bad())?;
        (
            whole.checked_mul(den).and_then(|w| w.checked_add(frac)).ok_or_else(bad)?,
            den,
        )
    } else {
        (text.trim().parse::<u64>().map_err(|_| bad())?, 1)
    };
    if den == 0 {
        return Err(bad());
    }
    let g = num_integer::gcd(num, den).max(1);
    Ok((num / g, den / g))
}

impl IntervalRule {
    pub fn from_kind(kind: RuleKind) -> Self {
        let id = match kind {
            RuleKind::Primes => "primes".to_string(),
            RuleKind::AlmostPrime { k } => format!("almost-prime:{k}"),
            RuleKind::Squarefree => "squarefree".to_string(),
            RuleKind::Lexicographical => "lexicographical".to_string(),
            RuleKind::TDense { num, den: 1 } => format!("t-dense:{num}"),
            RuleKind::TDense { num, den } => format!("t-dense:{num}/{den}"),
            RuleKind::Practical => "practical".to_string(),
            RuleKind::PhiPractical => "phi-practical".to_string(),
            RuleKind::Nullwert => "nullwert".to_string(),
        };
        IntervalRule {
            id,
            kind,
            max_pieces: DEFAULT_MAX_PIECES,
        }
    }

    /// Parses the `name[:param]` grammar used on the command line.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec.split_once(':') {
            Some((name, param)) => builtin_rule(name, Some(param)),
            None => builtin_rule(spec, None),
        }
    }

    pub fn with_max_pieces(mut self, max_pieces: usize) -> Result<Self> {
        if max_pieces < self.kind.pieces_needed() || max_pieces > PIECE_CAPACITY {
            return Err(Error::Config(format!(
                "max_pieces {max_pieces} outside [{}, {PIECE_CAPACITY}] for rule {}",
                self.kind.pieces_needed(),
                self.id
            )));
        }
        self.max_pieces = max_pieces;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn max_pieces(&self) -> usize {
        self.max_pieces
    }

    /// `I(m)` for the chain prefix described by `state`.
    pub fn evaluate(&self, state: &ChainState) -> Pieces {
        let mut out = Pieces::new();
        let m = state.m;
        match self.kind {
            RuleKind::Primes => {
                if m == 1 {
                    out.push(Piece::closed(Endpoint::int(1), Endpoint::PosInfinity));
                }
            }
            RuleKind::AlmostPrime { k } => {
                if state.big_omega < k {
                    out.push(Piece::closed(Endpoint::int(1), Endpoint::PosInfinity));
                }
            }
            RuleKind::Squarefree => {
                out.push(Piece::open_above(Endpoint::int(state.largest_prime)));
            }
            RuleKind::Lexicographical => {
                out.push(Piece::point(state.largest_prime));
                out.push(Piece::open_above(Endpoint::int(m)));
            }
            RuleKind::TDense { .. }
            | RuleKind::Practical
            | RuleKind::PhiPractical
            | RuleKind::Nullwert => {
                let theta = self.theta(state).expect("theta rule");
                out.push(Piece::closed(Endpoint::int(1), theta));
            }
        }
        debug_assert!(out.len() <= self.max_pieces);
        out
    }

    /// Upper endpoint `θ(m)` for rules of the form `I(m) = [1, θ(m)]`.
    pub fn theta(&self, state: &ChainState) -> Option<Endpoint> {
        let m = state.m as u128;
        match self.kind {
            RuleKind::TDense { num, den } => Some(Endpoint::ratio(m * num as u128, den as u128)),
            RuleKind::Practical => Some(Endpoint::int(state.sigma + 1)),
            RuleKind::PhiPractical => Some(Endpoint::int(state.m + 1)),
            RuleKind::Nullwert => Some(Endpoint::int(state.m.max(2))),
            _ => None,
        }
    }

    pub fn is_theta_rule(&self) -> bool {
        self.theta(&ChainState::ONE).is_some()
    }

    /// `θ(n)` computed from a factorization.
    pub fn theta_of(&self, n: u64, sieve: &SieveTable) -> Result<Option<Endpoint>> {
        Ok(self.theta(&chain_state(&sieve.factorize(n)?)))
    }

    /// Pieces of `I(n)` for an arbitrary `n` within the sieve.
    pub fn pieces_at(&self, n: u64, sieve: &SieveTable) -> Result<Pieces> {
        Ok(self.evaluate(&chain_state(&sieve.factorize(n)?)))
    }
}

impl fmt::Display for IntervalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

pub fn chain_state(chain: &FactorChain) -> ChainState {
    chain
        .primes
        .iter()
        .fold(ChainState::ONE, |s, &p| s.extend(p))
}

/// Outcome of a membership test, with the factor chain as witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub n: u64,
    pub member: bool,
    pub chain: FactorChain,
    /// Zero-based index of the first prime outside `I(prefix)`.
    pub violation: Option<usize>,
    /// `I(prefix)` at the violating index.
    pub violated_pieces: Vec<Piece>,
}

impl Membership {
    /// Human-readable witness such as `p_2 = 2 ∉ (2, ∞)`; one-based index.
    pub fn witness(&self) -> String {
        match self.violation {
            Some(j) => format!(
                "p_{} = {} ∉ {}",
                j + 1,
                self.chain.primes[j],
                format_pieces(&self.violated_pieces)
            ),
            None => format!("chain {:?} accepted", self.chain.primes),
        }
    }
}

pub fn is_member(n: u64, rule: &IntervalRule, sieve: &SieveTable) -> Result<Membership> {
    let chain = sieve.factorize(n)?;
    let mut state = ChainState::ONE;
    for (j, &p) in chain.primes.iter().enumerate() {
        let pieces = rule.evaluate(&state);
        if !pieces.iter().any(|piece| piece.contains(p)) {
            return Ok(Membership {
                n,
                member: false,
                chain,
                violation: Some(j),
                violated_pieces: pieces.to_vec(),
            });
        }
        state = state.extend(p);
    }
    Ok(Membership {
        n,
        member: true,
        chain,
        violation: None,
        violated_pieces: Vec::new(),
    })
}

/// Inclusive integer ranges covered by `pieces ∩ [lo, hi]`, sorted and merged.
pub(crate) fn merged_ranges(pieces: &[Piece], lo: u64, hi: u64) -> ArrayVec<(u64, u64), PIECE_CAPACITY> {
    let mut ranges: ArrayVec<(u64, u64), PIECE_CAPACITY> = pieces
        .iter()
        .filter_map(|p| p.integer_range(lo, hi))
        .collect();
    ranges.sort_unstable();
    let mut merged: ArrayVec<(u64, u64), PIECE_CAPACITY> = ArrayVec::new();
    for (a, b) in ranges {
        match merged.last_mut() {
            Some((_, end)) if a <= end.saturating_add(1) => *end = (*end).max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}
