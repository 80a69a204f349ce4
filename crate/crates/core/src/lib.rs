//! Numerical toolkit for steady two-dimensional water waves with vorticity.
//!
//! The crate computes the concrete objects attached to unidirectional flows in
//! a channel of finite depth: uniform streams and their Bernoulli/Froude maps,
//! the dispersion function and its root, Sturm–Liouville spectra on the
//! vertical interval, the linearized (Frechet-derivative) spectra in both the
//! physical plane and the hodograph plane, small-amplitude Stokes expansions,
//! and Newton continuation of periodic wave branches in the hodograph plane.
//!
//! Everything is desk scale and deterministic: quadrature, root finding,
//! eigensolvers and linear solves are all direct methods with fixed seeds
//! where randomness is involved.

pub mod error;
pub mod numerics;

pub mod vorticity;

pub mod stream;

pub mod dispersion;

pub mod spectra;

pub mod expansion;

pub mod continuation;

pub mod frechet;

pub mod verify;

pub use error::WaveError;
pub use vorticity::{CaseTag, VorticityModel};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, WaveError>;
