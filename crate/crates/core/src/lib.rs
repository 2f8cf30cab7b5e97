//! Desk-scale computation of Vapnik–Chervonenkis objects on finite weighted
//! spaces.
//!
//! - [`system`]: shattering, VC and dual VC dimension, joins, Boolean
//!   independence, dual families.
//! - [`boundary`]: π-boundaries and partition search.
//! - [`counterexample`]: disjoint intervals whose prefix joins fail.
//! - [`bracketing`]: bracket covers for set classes, VC-major and VC-graph
//!   function classes, envelope truncation, exact small bracketing numbers.
//! - [`ergodic`]: stationary process generators and uniform discrepancy.
//! - [`instance`], [`cli`]: the JSON instance format and command surface.

pub mod boundary;
pub mod cli;
pub mod bracketing;
pub mod counterexample;
pub mod ergodic;
pub mod error;
pub mod instance;
pub mod space;
pub mod system;

pub use error::{Result, VcError};
pub use space::{Cell, GroundSpace, Member, Partition, PointSet, SetFamily};
