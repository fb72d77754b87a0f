//! Metrics between finite-dimensional quantum channels given by Kraus operators:
//! minimax fidelity, CB-norm distance, pointwise Hellinger distances, and the
//! classical / semiclassical reductions, together with closed forms for unitary
//! and noise channels and the bit-commitment cheating bounds built on them.

pub mod channels;
pub mod classical;
pub mod closedforms;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod optimize;
pub mod qbc;
pub mod sampling;
pub mod selfcheck;

pub use error::{Error, Result};
