//! Bayesian error models for bibliometric data and Monte Carlo propagation of
//! their uncertainty into citation indicators.
//!
//! The crate covers two error sources: citations missing from a database
//! (a negative-binomial regression fitted by adaptive Metropolis) and wrong
//! document types (a Dirichlet-categorical model). Both can run in the
//! correcting direction ([`models::ModelKind::SecondKind`]) or the
//! error-injecting direction ([`models::ModelKind::FirstKind`]).

pub mod data;
pub mod error;
pub mod indicators;
pub mod models;
pub mod predictive;
pub mod rng;
pub mod simulation;

pub use error::{Error, Result};
