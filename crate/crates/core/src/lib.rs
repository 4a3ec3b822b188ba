//! Dimension bounds, measurement constructions and numerical verification
//! for quantum tomography with manifold-valued prior information.
//!
//! The crate is organized around the pipeline
//!
//! * [`linalg`] — dense complex linear algebra on the Hilbert space `C^n`
//!   and on the real inner-product space of Hermitian operators,
//! * [`opsys`] — POVMs, operator systems and the projections/metrics that
//!   turn a measurement into a linear map on Hermitian operators,
//! * [`bounds`] — exact integer lower/upper bounds on the number of
//!   measurement outcomes needed to identify states on flag-manifold and
//!   projective-Stiefel orbits, plus the published reference tables,
//! * [`manifolds`] — samplers and tangent data for the state manifolds the
//!   bounds apply to (fixed spectrum, unitary symmetry, Bob-unitary orbits),
//! * [`constructions`] — explicit measurement schemes matching the upper
//!   bounds, with certification of their separation properties,
//! * [`verify`] — sampling-based completeness/immersion/stability probes.

pub mod bounds;
pub mod constructions;
pub mod doc;
pub mod error;
pub mod linalg;
pub mod manifolds;
pub mod opsys;
pub mod tables;
pub mod verify;

pub use error::{Error, Result};
