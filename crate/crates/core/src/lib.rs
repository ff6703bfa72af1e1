//! Integer sequences defined by prime-factorization interval rules, and the
//! distribution of `α·n mod 1` along them.
//!
//! * [`numtheory`]: linear sieve, multiplicative functions, `Ψ(x, y)`, `π(x; q, a)`.
//! * [`rules`]: interval rules `I(n)`, membership, generation and the slice cache.
//! * [`diophantine`]: exact `α`, certified fractional parts, continued fractions.
//! * [`expsum`]: exponential sums, Ramanujan sums, major-arc comparison.
//! * [`equidist`]: star discrepancy, Erdős–Turán bound.
//! * [`beatty`]: `⌊α·n⌋` hits in a slice.
//! * [`verify`]: calibrated empirical suites.

pub mod beatty;
pub mod diophantine;
pub mod equidist;
pub mod error;
pub mod expsum;
pub mod numtheory;
pub mod report;
pub mod rules;
pub mod verify;

pub use error::{Error, Result};
