//! Exact `α`, certified fractional parts, continued fractions and the
//! major/minor arc split.

mod alpha;
mod arc;
mod cf;
mod fixed;

pub use alpha::{ln_big, Alpha, MIN_DECIMAL_DIGITS};
pub use arc::{classify_arc, ArcClassification, ArcVerdict};
pub use cf::{
    check_convergent_laws, continued_fraction, irrationality_profile, ContinuedFraction,
    Convergent, ConvergentLaws, IrrationalityProfile,
};
pub use fixed::{
    fractional_part, Enclosure, Fixed128, FracPart, PhaseKernel, MIN_GUARD_BITS, PHASE_TOLERANCE,
};
