//! Multipole expansion of time-harmonic electromagnetic fields outside a
//! sphere that encloses all sources.
//!
//! * [`specfun`]: normalized Legendre functions, scalar harmonics,
//!   spherical Hankel functions.
//! * [`harmonics`]: vector spherical harmonics, the quadrature grid and
//!   projections.
//! * [`multipole`]: coefficient sets, field synthesis, far fields, duality.
//! * [`extraction`]: coefficient recovery from radial E+H, tangential E or
//!   tangential H samples, and the cross-route equivalence report.
//! * [`dipole`]: half-wave dipole validation harness.

pub mod dipole;
pub mod error;
pub mod extraction;
pub mod harmonics;
pub mod multipole;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use harmonics::{FieldKind, FieldSamples, ProjectionKind, SphVector, SphereGrid, TangentialVector};
pub use multipole::{CoefficientSet, FarFieldPattern, Medium};
pub use specfun::ModeIndex;

pub use num_complex::Complex64;
