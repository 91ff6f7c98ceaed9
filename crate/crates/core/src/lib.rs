//! Theta constants, Siegel modular forms built from them, and the checks that
//! tie the two together.

pub mod algebra;
pub mod ansatz;
pub mod charspace;
pub mod degeneration;
pub mod error;
pub mod hyperelliptic;
pub mod lattice;
pub mod numeric;
pub mod sampling;
pub mod theta;

pub use error::{Error, Result};
