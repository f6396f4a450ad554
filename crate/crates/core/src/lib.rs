//! Wavelet frames over matrix dilation groups.
//!
//! The crate covers the affine groups `ℝ^d ⋊ H` for similitude, diagonal and
//! shearlet dilation groups: dual-orbit geometry, the envelope integrals `Φ_ℓ`
//! and embedding indices, vanishing-moment atoms, the continuous wavelet
//! transform, sampling sets, discrete frames and n-term approximation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod approx;
pub mod atoms;
pub mod bump;
pub mod cwt;
pub mod error;
pub mod fourier;
pub mod frames;
pub mod grid;
pub mod groups;
pub mod io;
pub mod orbit;
pub mod par;
pub mod phi;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
pub use grid::{GridSpec, SampledFunction};
pub use groups::{AffinePoint, DilationGroupSpec, Family, GroupElement};
pub use orbit::OrbitGeometry;
pub use par::Execution;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
