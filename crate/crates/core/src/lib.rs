//! Binary tilings of the upper half-space, their discrete metrics, and the
//! spanner / nearest-neighbor structures built on them.

pub mod avd;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod figures;
pub mod hyperbolic;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod quadtree;
pub mod render;
pub mod shortcut;
pub mod spanner;
pub mod tiling;
pub mod verify;

pub use error::{Error, Result};
pub use tiling::{CellId, HPoint};
