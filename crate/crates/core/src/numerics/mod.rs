//! Shared numerical building blocks.
//!
//! All routines are deterministic direct methods sized for desk-scale grids:
//! adaptive Gauss–Legendre panels, bracketed hybrid root finding, monotone
//! cubic interpolation, Sturm-sequence tridiagonal eigensolvers, banded
//! Cholesky/LDLᵀ factorizations with shift–invert Lanczos on top, cosine/sine
//! collocation transforms and a bordered block-tridiagonal Newton solver.

pub mod banded;
pub mod blocklu;
pub mod fem;
pub mod fourier;
pub mod interp;
pub mod lanczos;
pub mod poly;
pub mod quad;
pub mod roots;
pub mod tridiag;
