//! Translation-invariant splitting Gibbs measures of the coupled Ising-Potts
//! model on the Cayley tree: boundary-law fixed points, their census over the
//! coupling parameter, and Markov-chain extremality tests.

pub mod census;
pub mod chain;
pub mod error;
pub mod extremality;
pub mod model;
pub mod rootfind;
pub mod tisgm;

pub use error::{Error, Result};
pub use model::ModelParams;
