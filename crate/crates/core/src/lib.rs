//! Construction and verification of invariant Ricci-positive metrics.
//!
//! The crate builds the warping functions of doubly warped submersion
//! metrics on disc bundles over projective spaces, evaluates their closed-form
//! curvature, checks every positivity and gluing condition on dense grids, and
//! cross-validates the closed forms against a finite-difference curvature
//! oracle computed directly from coordinate metrics.
//!
//! Modules, bottom up:
//!
//! * [`profiles`]: piecewise analytic warping functions with exact jets.
//! * [`curvature`]: closed-form Ricci quantities and condition checkers.
//! * [`oracle`]: Christoffel/Riemann/Ricci by central differences.
//! * [`assembly`]: collars, tubes, gluing checks and feasibility reports.
//! * [`cli`]: the batch front-end behind the `orbit-ricci` binary.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod oracle;
pub mod profiles;

pub use error::{Error, Result};
pub use profiles::{GridSpec, Jet2, Profile, Segment, SegmentKind};
