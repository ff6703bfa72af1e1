//! Sieves and multiplicative functions.
//!
//! Everything here hangs off [`SieveTable`], a linear (Euler) sieve that stores
//! the smallest prime factor of every integer up to its limit. Factoring any
//! `n <= limit` is then a walk down the spf chain in `O(Ω(n))` steps.

use crate::error::{Error, Result};

/// Largest sieve limit accepted by [`SieveTable::build`].
///
/// The table costs 4 bytes per integer, so the ceiling is about 4 GB of spf
/// entries plus the prime list.
pub const MAX_SIEVE_LIMIT: u64 = 1_000_000_000;

#[derive(Debug, Clone)]
pub struct SieveTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u64>,
}

impl SieveTable {
    pub fn build(limit: u64) -> Result<Self> {
        if !(2..=MAX_SIEVE_LIMIT).contains(&limit) {
            return Err(Error::Config(format!(
                "sieve limit {limit} outside [2, {MAX_SIEVE_LIMIT}]"
            )));
        }
        let len = limit as usize + 1;
        let mut spf = vec![0u32; len];
        let mut primes: Vec<u64> = Vec::with_capacity(estimate_prime_count(limit));
        for i in 2..len {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u64);
            }
            let spf_i = spf[i] as u64;
            for &p in &primes {
                if p > spf_i {
                    break;
                }
                let target = i as u64 * p;
                if target > limit {
                    break;
                }
                spf[target as usize] = p as u32;
            }
        }
        Ok(SieveTable { limit, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `<= x`, `x` clamped to the sieve limit.
    pub fn primes_up_to(&self, x: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= x);
        &self.primes[..end]
    }

    pub fn smallest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check(n, 2)?;
        Ok(self.spf[n as usize] as u64)
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        if n < 2 {
            return Ok(false);
        }
        self.check(n, 2)?;
        Ok(self.spf[n as usize] as u64 == n)
    }

    /// `P(n)`, with the convention `P(1) = 1`.
    pub fn largest_prime_factor(&self, n: u64) -> Result<u64> {
        Ok(self.factorize(n)?.largest_prime())
    }

    pub fn factorize(&self, n: u64) -> Result<FactorChain> {
        self.check(n, 1)?;
        let mut primes = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            primes.push(p);
            m /= p;
        }
        Ok(FactorChain::from_sorted(primes))
    }

    pub fn arithmetic_profile(&self, n: u64) -> Result<ArithmeticProfile> {
        Ok(ArithmeticProfile::from_chain(&self.factorize(n)?))
    }

    pub fn mobius(&self, n: u64) -> Result<i8> {
        Ok(self.arithmetic_profile(n)?.mobius)
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        Ok(self.arithmetic_profile(n)?.euler_phi)
    }

    /// Number of primes `p <= x` with `p ≡ a (mod q)`.
    pub fn prime_count_residue(&self, x: u64, a: u64, q: u64) -> Result<u64> {
        if q == 0 || a >= q {
            return Err(Error::Input(format!(
                "need q >= 1 and 0 <= a < q, got a = {a}, q = {q}"
            )));
        }
        if x < 2 {
            return Err(Error::Input(format!("need x >= 2, got {x}")));
        }
        self.check(x, 2)?;
        Ok(self
            .primes_up_to(x)
            .iter()
            .filter(|&&p| p % q == a)
            .count() as u64)
    }

    /// `π(x)`.
    pub fn prime_count(&self, x: u64) -> Result<u64> {
        self.prime_count_residue(x, 0, 1)
    }

    fn check(&self, n: u64, min: u64) -> Result<()> {
        if n < min || n > self.limit {
            Err(Error::range("n", n, min, self.limit))
        } else {
            Ok(())
        }
    }
}

fn estimate_prime_count(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize
    }
}

/// Sorted prime factorization `p_1 <= ... <= p_k` with its prefix products.
///
/// `prefix_products[j]` is the product of the primes strictly before index
/// `j`, so `prefix_products[0] == 1`. Membership in a prime-chain sequence
/// is decided by testing `primes[j]` against the rule evaluated at
/// `prefix_products[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorChain {
    pub primes: Vec<u64>,
    pub prefix_products: Vec<u64>,
}

impl FactorChain {
    /// Caller guarantees `primes` is non-decreasing and every entry is prime.
    pub fn from_sorted(primes: Vec<u64>) -> Self {
        debug_assert!(primes.windows(2).all(|w| w[0] <= w[1]));
        let mut prefix_products = Vec::with_capacity(primes.len());
        let mut acc = 1u64;
        for &p in &primes {
            prefix_products.push(acc);
            acc *= p;
        }
        FactorChain {
            primes,
            prefix_products,
        }
    }

    pub fn value(&self) -> u64 {
        self.primes.iter().product()
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn largest_prime(&self) -> u64 {
        self.primes.last().copied().unwrap_or(1)
    }

    /// `(p, e)` pairs in ascending order of `p`.
    pub fn prime_powers(&self) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        for &p in &self.primes {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for (p, e) in self.prime_powers() {
            let base = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..base {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArithmeticProfile {
    pub n: u64,
    pub mobius: i8,
    pub euler_phi: u64,
    pub sigma: u64,
    pub big_omega: u32,
}

impl ArithmeticProfile {
    pub fn from_chain(chain: &FactorChain) -> Self {
        let mut mobius = 1i8;
        let mut euler_phi = 1u64;
        let mut sigma = 1u64;
        for (p, e) in chain.prime_powers() {
            mobius = if e > 1 { 0 } else { -mobius };
            let pe = p.pow(e);
            euler_phi *= pe - pe / p;
            sigma *= (pe * p - 1) / (p - 1);
        }
        ArithmeticProfile {
            n: chain.value(),
            mobius,
            euler_phi,
            sigma,
            big_omega: chain.len() as u32,
        }
    }
}

/// Odd-only Eratosthenes, for callers that need primes but not an spf table.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let half = ((n - 1) / 2) as usize;
    // composite[i] marks 2i + 3
    let mut composite = vec![false; half];
    let mut i = 0usize;
    loop {
        let p = 2 * i as u64 + 3;
        if p * p > n {
            break;
        }
        if !composite[i] {
            let mut j = ((p * p - 3) / 2) as usize;
            while j < half {
                composite[j] = true;
                j += p as usize;
            }
        }
        i += 1;
    }
    let mut primes = vec![2u64];
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 3),
    );
    primes
}

/// `Ψ(x, y)`: number of `n <= x` whose prime factors are all `<= y`
/// (`n = 1` included).
///
/// Depth-first over products of primes in ascending order. A child whose
/// prime exceeds `sqrt` of the remaining budget can have no further children,
/// so those leaves are counted in bulk with a binary search.
pub fn smooth_count(x: u64, y: u64) -> Result<u64> {
    if x == 0 || y == 0 {
        return Err(Error::Input(format!(
            "smooth_count needs x >= 1 and y >= 1, got ({x}, {y})"
        )));
    }
    if y >= x {
        return Ok(x);
    }
    let primes = primes_up_to(y);
    Ok(smooth_count_from_primes(x, &primes))
}

/// As [`smooth_count`], reusing a sieve's prime list (`y` must not exceed
/// the sieve limit unless `y >= x`).
pub fn smooth_count_with(sieve: &SieveTable, x: u64, y: u64) -> Result<u64> {
    if x == 0 || y == 0 {
        return Err(Error::Input(format!(
            "smooth_count needs x >= 1 and y >= 1, got ({x}, {y})"
        )));
    }
    if y >= x {
        return Ok(x);
    }
    if y > sieve.limit() {
        return Err(Error::range("y", y, 1, sieve.limit()));
    }
    Ok(smooth_count_from_primes(x, sieve.primes_up_to(y)))
}

fn smooth_count_from_primes(x: u64, primes: &[u64]) -> u64 {
    fn walk(budget: u64, start: usize, primes: &[u64]) -> u64 {
        let tail = &primes[start..];
        let upto = tail.partition_point(|&p| p <= budget);
        let root = isqrt(budget);
        let branch = tail[..upto].partition_point(|&p| p <= root);
        let mut count = 1 + (upto - branch) as u64;
        for (offset, &p) in tail[..branch].iter().enumerate() {
            count += walk(budget / p, start + offset, primes);
        }
        count
    }
    walk(x, 0, primes)
}

/// `μ(n)` by trial division, for small moduli outside any sieve.
pub fn mobius_trial(n: u64) -> i8 {
    let mut m = n;
    let mut mu = 1i8;
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return 0;
            }
            mu = -mu;
        }
        d += 1;
    }
    if m > 1 {
        mu = -mu;
    }
    mu
}

/// `φ(n)` by trial division.
pub fn euler_phi_trial(n: u64) -> u64 {
    let mut m = n;
    let mut phi = n;
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            while m % d == 0 {
                m /= d;
            }
            phi -= phi / d;
        }
        d += 1;
    }
    if m > 1 {
        phi -= phi / m;
    }
    phi
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_sieves() {
        assert_eq!(SieveTable::build(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(SieveTable::build(2).unwrap().primes(), &[2]);
        assert!(SieveTable::build(1).is_err());
        assert!(SieveTable::build(MAX_SIEVE_LIMIT + 1).is_err());
    }

    #[test]
    fn million_prime_count_matches_trial_division() {
        let sieve = SieveTable::build(1_000_000).unwrap();
        let oracle = (2..=1_000_000u64)
            .filter(|&n| trial_division_is_prime(n))
            .count();
        assert_eq!(oracle, 78498);
        assert_eq!(sieve.primes().len(), oracle);
        assert_eq!(primes_up_to(1_000_000).len(), oracle);
    }

    #[test]
    fn factorizations() {
        let sieve = SieveTable::build(10_000_000).unwrap();
        assert_eq!(sieve.factorize(12).unwrap().primes, vec![2, 2, 3]);
        assert!(sieve.factorize(1).unwrap().is_empty());
        assert_eq!(
            sieve.factorize(9_699_690).unwrap().primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19]
        );
        assert_eq!(
            sieve.factorize(12).unwrap().prefix_products,
            vec![1, 2, 4]
        );
        assert!(matches!(
            sieve.factorize(10_000_001),
            Err(Error::Range { .. })
        ));
        assert!(sieve.factorize(0).is_err());
    }

    #[test]
    fn profiles() {
        let sieve = SieveTable::build(100).unwrap();
        let p = |n| sieve.arithmetic_profile(n).unwrap();
        assert_eq!(
            (p(6).mobius, p(6).euler_phi, p(6).sigma, p(6).big_omega),
            (1, 2, 12, 2)
        );
        assert_eq!(
            (p(4).mobius, p(4).euler_phi, p(4).sigma, p(4).big_omega),
            (0, 2, 7, 2)
        );
        assert_eq!(
            (p(30).mobius, p(30).euler_phi, p(30).sigma, p(30).big_omega),
            (-1, 8, 72, 3)
        );
        assert_eq!(
            (p(1).mobius, p(1).euler_phi, p(1).sigma, p(1).big_omega),
            (1, 1, 1, 0)
        );
        assert_eq!(sieve.largest_prime_factor(1).unwrap(), 1);
    }

    #[test]
    fn divisor_sum_identities() {
        let sieve = SieveTable::build(10_000).unwrap();
        for n in 1..=10_000u64 {
            let chain = sieve.factorize(n).unwrap();
            assert_eq!(chain.value(), n);
            let divs = chain.divisors();
            let phi_sum: u64 = divs.iter().map(|&d| sieve.euler_phi(d).unwrap()).sum();
            assert_eq!(phi_sum, n);
            let mu_sum: i64 = divs.iter().map(|&d| sieve.mobius(d).unwrap() as i64).sum();
            assert_eq!(mu_sum, (n == 1) as i64);
            let profile = sieve.arithmetic_profile(n).unwrap();
            assert_eq!(profile.sigma, divs.iter().sum::<u64>());
            assert!(profile.euler_phi <= n && profile.sigma >= n);
            assert_eq!(profile.mobius == 0, divs.iter().any(|&d| d > 1 && n % (d * d) == 0));
        }
    }

    #[test]
    fn smooth_counts() {
        assert_eq!(smooth_count(10, 2).unwrap(), 4);
        assert_eq!(smooth_count(100, 5).unwrap(), 34);
        assert_eq!(smooth_count(10, 10).unwrap(), 10);
        assert_eq!(smooth_count(1000, 1000).unwrap(), 1000);
        assert_eq!(smooth_count(1, 1).unwrap(), 1);
        assert_eq!(smooth_count(50, 1).unwrap(), 1);
        assert!(smooth_count(0, 3).is_err());
    }

    #[test]
    fn smooth_count_matches_sieve_enumeration() {
        let sieve = SieveTable::build(20_000).unwrap();
        for &y in &[2u64, 3, 7, 30, 97, 141, 1000, 19_999] {
            for &x in &[1u64, 2, 99, 100, 1234, 20_000] {
                let direct = (1..=x)
                    .filter(|&n| sieve.largest_prime_factor(n).unwrap() <= y)
                    .count() as u64;
                assert_eq!(smooth_count(x, y).unwrap(), direct, "x={x} y={y}");
                assert_eq!(smooth_count_with(&sieve, x, y).unwrap(), direct);
            }
        }
    }

    #[test]
    fn residue_counts() {
        let sieve = SieveTable::build(1_000_000).unwrap();
        assert_eq!(sieve.prime_count_residue(20, 1, 4).unwrap(), 3);
        assert_eq!(sieve.prime_count_residue(20, 0, 1).unwrap(), 8);
        let total = sieve.prime_count(1_000_000).unwrap();
        assert_eq!(total, sieve.primes().len() as u64);
        let ones = sieve.prime_count_residue(1_000_000, 1, 3).unwrap();
        let expected = total as f64 / 2.0;
        assert!(((ones as f64 - expected) / expected).abs() < 0.001);
        assert!(sieve.prime_count_residue(20, 4, 4).is_err());
        assert!(sieve.prime_count_residue(20, 0, 0).is_err());
    }

    #[test]
    fn trial_division_functions_match_sieve() {
        let sieve = SieveTable::build(5000).unwrap();
        for n in 1..=5000u64 {
            assert_eq!(mobius_trial(n), sieve.mobius(n).unwrap(), "{n}");
            assert_eq!(euler_phi_trial(n), sieve.euler_phi(n).unwrap(), "{n}");
        }
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 2, 3, 4, 15, 16, 17, u64::MAX, (1 << 52) + 1] {
            let r = isqrt(n);
            assert!(r.checked_mul(r).unwrap() <= n);
            assert!((r + 1).checked_mul(r + 1).map_or(true, |s| s > n));
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn smooth_count_monotone(x in 1u64..5000, y in 1u64..200, dx in 0u64..500, dy in 0u64..50) {
                let base = smooth_count(x, y).unwrap();
                prop_assert!(smooth_count(x + dx, y).unwrap() >= base);
                prop_assert!(smooth_count(x, y + dy).unwrap() >= base);
            }
        }
    }
}
