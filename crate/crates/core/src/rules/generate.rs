use rayon::prelude::*;

use super::{merged_ranges, ChainState, IntervalRule};
use crate::error::{Error, Result};
use crate::numtheory::SieveTable;

/// Members of a generated set up to `limit`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSlice {
    rule_id: String,
    limit: u64,
    members: Vec<u64>,
}

impl SequenceSlice {
    /// Checks the slice invariants: strictly ascending, inside `[1, limit]`,
    /// starting at 1.
    pub fn from_members(rule_id: impl Into<String>, limit: u64, members: Vec<u64>) -> Result<Self> {
        if members.first() != Some(&1) {
            return Err(Error::Invariant("slice must start with 1".into()));
        }
        if !members.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Invariant("slice members must be strictly ascending".into()));
        }
        if members.last().is_some_and(|&m| m > limit) {
            return Err(Error::Invariant(format!("slice member exceeds limit {limit}")));
        }
        Ok(SequenceSlice {
            rule_id: rule_id.into(),
            limit,
            members,
        })
    }

    pub fn rule_id(&self) -> &str {
        &self.rule_id
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    /// `B(x)`.
    pub fn count(&self) -> u64 {
        self.members.len() as u64
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.binary_search(&n).is_ok()
    }

    /// `B_d(x)`: members divisible by `d`.
    pub fn count_multiples(&self, d: u64) -> Result<u64> {
        if d == 0 {
            return Err(Error::Input("count_multiples needs d >= 1".into()));
        }
        if d == 1 {
            return Ok(self.count());
        }
        Ok(self.members.iter().filter(|&&n| n % d == 0).count() as u64)
    }

    /// `B_d(x)` for every `d` in `1..=dmax` (index 0 unused).
    ///
    /// Walks multiples of each `d` through a membership bitmap, `O(x log dmax)`.
    pub fn multiples_table(&self, dmax: u64) -> Vec<u64> {
        let x = self.limit as usize;
        let mut bitmap = vec![false; x + 1];
        for &n in &self.members {
            bitmap[n as usize] = true;
        }
        let mut table = vec![0u64; dmax as usize + 1];
        for (d, slot) in table.iter_mut().enumerate().skip(1) {
            *slot = (d..=x).step_by(d).filter(|&k| bitmap[k]).count() as u64;
        }
        table
    }

    /// Prefix of this slice up to a smaller limit.
    pub fn truncate(&self, limit: u64) -> SequenceSlice {
        let end = self.members.partition_point(|&n| n <= limit);
        SequenceSlice {
            rule_id: self.rule_id.clone(),
            limit: limit.min(self.limit),
            members: self.members[..end].to_vec(),
        }
    }
}

/// All members of the rule's set in `[1, x]`.
///
/// Depth-first from `m = 1`: a member `m` with largest prime `P(m)` has
/// children `m·p` for primes `p ∈ I(m) ∩ [P(m), ⌊x/m⌋]`. Each member is
/// reached exactly once, by its sorted chain. Subtrees of the root run in
/// parallel; the result is sorted once at the end, so thread count never
/// changes the output.
pub fn generate(rule: &IntervalRule, x: u64, sieve: &SieveTable) -> Result<SequenceSlice> {
    if x < 2 || x > sieve.limit() {
        return Err(Error::range("x", x, 2, sieve.limit()));
    }
    let primes = sieve.primes_up_to(x);
    let root = ChainState::ONE;
    let children = child_states(rule, &root, x, primes);
    let mut members: Vec<u64> = children
        .par_iter()
        .map(|child| {
            let mut out = Vec::new();
            walk(rule, child, x, primes, &mut out);
            out
        })
        .flatten_iter()
        .collect();
    members.push(1);
    members.sort_unstable();
    Ok(SequenceSlice {
        rule_id: rule.id().to_string(),
        limit: x,
        members,
    })
}

fn child_states(rule: &IntervalRule, state: &ChainState, x: u64, primes: &[u64]) -> Vec<ChainState> {
    let mut out = Vec::new();
    for_each_child(rule, state, x, primes, |c| out.push(c));
    out
}

fn for_each_child(
    rule: &IntervalRule,
    state: &ChainState,
    x: u64,
    primes: &[u64],
    mut f: impl FnMut(ChainState),
) {
    let budget = x / state.m;
    let floor = state.largest_prime.max(2);
    if budget < floor {
        return;
    }
    let pieces = rule.evaluate(state);
    for (lo, hi) in merged_ranges(&pieces, floor, budget) {
        let start = primes.partition_point(|&p| p < lo);
        for &p in primes[start..].iter().take_while(|&&p| p <= hi) {
            f(state.extend(p));
        }
    }
}

fn walk(rule: &IntervalRule, state: &ChainState, x: u64, primes: &[u64], out: &mut Vec<u64>) {
    out.push(state.m);
    let mut stack = Vec::new();
    for_each_child(rule, state, x, primes, |c| stack.push(c));
    for child in &stack {
        walk(rule, child, x, primes, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::is_member;

    fn gen(rule: &str, x: u64) -> Vec<u64> {
        let sieve = SieveTable::build(x.max(2)).unwrap();
        generate(&IntervalRule::parse(rule).unwrap(), x, &sieve)
            .unwrap()
            .members
    }

    #[test]
    fn small_examples() {
        assert_eq!(
            gen("practical", 30),
            vec![1, 2, 4, 6, 8, 12, 16, 18, 20, 24, 28, 30]
        );
        assert_eq!(gen("t-dense:2", 24), vec![1, 2, 4, 6, 8, 12, 16, 18, 20, 24]);
        assert_eq!(gen("primes", 10), vec![1, 2, 3, 5, 7]);
        assert_eq!(gen("lexicographical", 2), vec![1, 2]);
    }

    #[test]
    fn count_multiples_examples() {
        let sieve = SieveTable::build(30).unwrap();
        let slice = generate(&IntervalRule::parse("practical").unwrap(), 30, &sieve).unwrap();
        assert_eq!(slice.count_multiples(4).unwrap(), 7);
        assert_eq!(slice.count_multiples(1).unwrap(), slice.count());
        assert_eq!(slice.count_multiples(31).unwrap(), 0);
        assert!(slice.count_multiples(0).is_err());
        let table = slice.multiples_table(40);
        for d in 1..=40u64 {
            assert_eq!(table[d as usize], slice.count_multiples(d).unwrap());
        }
    }

    #[test]
    fn generator_matches_membership_filter() {
        let x = 20_000u64;
        let sieve = SieveTable::build(x).unwrap();
        for id in [
            "primes",
            "almost-prime:1",
            "almost-prime:2",
            "almost-prime:3",
            "squarefree",
            "lexicographical",
            "t-dense:2",
            "t-dense:3",
            "t-dense:5/2",
            "practical",
            "phi-practical",
            "nullwert",
        ] {
            let rule = IntervalRule::parse(id).unwrap();
            let slice = generate(&rule, x, &sieve).unwrap();
            let filtered: Vec<u64> = (1..=x)
                .filter(|&n| is_member(n, &rule, &sieve).unwrap().member)
                .collect();
            assert_eq!(slice.members, filtered, "rule {id}");
        }
    }

    #[test]
    fn rejects_bad_limits() {
        let sieve = SieveTable::build(100).unwrap();
        let rule = IntervalRule::parse("primes").unwrap();
        assert!(generate(&rule, 1, &sieve).is_err());
        assert!(generate(&rule, 101, &sieve).is_err());
    }

    #[test]
    fn slice_invariants_checked() {
        assert!(SequenceSlice::from_members("r", 5, vec![1, 2, 5]).is_ok());
        assert!(SequenceSlice::from_members("r", 5, vec![2, 3]).is_err());
        assert!(SequenceSlice::from_members("r", 5, vec![1, 3, 3]).is_err());
        assert!(SequenceSlice::from_members("r", 5, vec![1, 6]).is_err());
    }
}
