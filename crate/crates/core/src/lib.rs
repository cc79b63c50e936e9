//! Numerical laboratory for the Kronig-Penney model in a constant electric
//! field: -d^2/dx^2 - Fx + sum_n g_n delta(x - n).
//!
//! The crate implements the computational objects that drive the spectral
//! analysis of this operator at desk scale: the Airy reference solution and
//! its continuous phase (`special`), exact cell propagation and SU(1,1)
//! transfer products (`propagation`), the relative Prufer recursion and its
//! resonance grid (`prufer`), oscillatory exponential sums with certified
//! envelopes and a precise stationary-phase asymptotic (`expsum`), stationary
//! and non-stationary phase expansions with boundary terms (`oscillatory`),
//! the l-scale and q-scale coarse-grained recursions of the rational case
//! (`coarse`), and a reproducible Monte Carlo harness for the random coupling
//! model (`random`).

pub mod coarse;
pub mod dd;
pub mod error;
pub mod expsum;
pub mod fit;
pub mod jet;
pub mod oscillatory;
pub mod params;
pub mod propagation;
pub mod prufer;
pub mod quad;
pub mod random;
pub mod report;
pub mod special;

pub use error::{Error, Result};
pub use params::{ModelParams, RationalField};
pub use special::{airy, gamma_asymptotic, AiryValues, ReferenceSolution};
