//! Gap-tooth multiscale simulation laboratory.
//!
//! A one-dimensional periodic domain is covered by `m` short "teeth", each
//! carrying its own fine-grid microsimulator of a diffusive PDE.  The teeth
//! are separated by unsimulated gaps and communicate only through boundary
//! conditions interpolated from the macroscopic field (the tooth centre
//! values).  The crate provides
//!
//! * [`stencil`]: interpolation and derivative weights on the macroscopic
//!   grid, and the tooth boundary condition families built from them,
//! * [`microsim`]: tooth geometry and the explicit in-tooth stepper,
//! * [`coupling`]: the assembled scheme marching all teeth together,
//! * [`spectra`]: growth-rate analysis of the linearised one-step map,
//!   with grid-refinement studies,
//! * [`cli`]: experiment files, named presets and the command entry points
//!   used by the `gaptooth` binary.
//!
//! The `examples/` directory exercises each capability in a runnable form;
//! `examples/growth_rate_table.rs` is a good starting point.

pub mod cli;
pub mod coupling;
mod error;
pub mod microsim;
pub mod spectra;
pub mod stencil;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
