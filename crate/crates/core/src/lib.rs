//! Exact Rho, Eta and Chern-Simons invariants of flat U(1)-connections on
//! principal circle bundles over surfaces and on 3-dimensional torus mapping
//! tori, together with numerical checks of the analytic identities behind
//! the closed forms.
//!
//! Exact values are [`Rational`]s. Floating point only appears in the
//! [`analytic`] module and in the Fourier/cotangent oracles of [`dedekind`].

pub mod analytic;
pub mod bernoulli;
pub mod cli;
pub mod dedekind;
mod error;
pub mod moduli;
pub mod rational;
pub mod rho;
pub mod sl2z;

pub use error::{Error, Result};
pub use rational::Rational;
