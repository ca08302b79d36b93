//! Randomly scrambled base-2 digital nets.
//!
//! Building blocks: exact GF(2) linear algebra ([`gf2`]), Walsh index sets
//! ([`kappa`], [`walsh`]), generator matrices and their quality parameters
//! ([`net`]), linear scrambles with digital shifts ([`scramble`]), moment
//! estimation with exact oracles ([`moments`], [`zprob`]) and Monte Carlo
//! probes of the probabilistic bounds on those moments ([`probes`]).

pub mod dyadic;
pub mod error;
pub mod gf2;
pub mod kappa;
pub mod net;
pub mod rng;
pub mod scramble;
pub mod walsh;
pub mod integrand;
pub mod moments;
pub mod probes;
pub mod stats;
pub mod zprob;

pub use error::{Error, Result};
