//! Exact equivariant-localization computations: Duistermaat-Heckman measures as
//! delta-Heaviside convolutions, coadjoint orbit volumes, induction from the torus,
//! Yang-Mills lattice sums and moment-map gradient flows.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod exact;
pub mod gradflow;
pub mod lie;
pub mod localization;
pub mod measure;
pub mod par;
pub mod verify;
pub mod yangmills;

pub use error::{Error, Result};
pub use exact::Q;
pub use lie::{build_root_system, Normalization, RootKind, RootSystem};
pub use measure::Measure;
