//! Non-signaling boxes and adversarial box partitions.
//!
//! The crate models bipartite conditional distributions `P(x,y|u,v)` over
//! n-bit ports, the partitions an eavesdropper may induce on them, and the
//! attacks and bounds showing that hashing the outputs of noisy PR boxes
//! cannot make a key bit secret against a non-signaling adversary.
//!
//! All computations default to exact rational arithmetic; `f64` tables are
//! supported for sweeps.

pub mod attack;
pub mod bits;
pub mod bounds;
pub mod error;
pub mod hash;
pub mod lp;
pub mod lp_attack;
pub mod partition;
pub mod report;
pub mod scalar;
pub mod sweep;
pub mod table;
pub mod verify;

pub use bits::BitString;
pub use error::{Error, Result};
pub use hash::HashFunction;
pub use partition::BoxPartition;
pub use report::AttackReport;
pub use scalar::{Mode, Probability, Rational, Scalar};
pub use table::{BehaviorTable, Port};
