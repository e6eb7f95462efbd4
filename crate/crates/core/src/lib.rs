//! Determinantal point processes with translation-invariant kernels:
//! kernels from spectral densities, correlation and cluster functions,
//! Fredholm determinants of Nyström discretizations, exact spectral
//! sampling, and the small-spacing statistics built on top of them.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod error;
pub mod experiment;
pub mod fredholm;
pub mod linalg;
pub mod quadrature;
pub mod sampler;
pub mod spacing;
pub mod spectral_kernel;

pub use error::{Error, Result};
pub use spectral_kernel::{SpectralDensity, TranslationKernel};
