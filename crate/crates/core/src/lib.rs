pub mod chartmetric;
pub mod cli;
pub mod coneinv;
pub mod error;
pub mod flatmodel;
pub mod jet;
pub mod number;
pub mod params;
pub mod potential;
pub mod quadrature;
pub mod symalg;

pub use error::{Error, Result};
pub use number::{Rat, Surd};
pub use params::{Partition, SolitonParams};
