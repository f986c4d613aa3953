//! Extreme points of orbits `Ω(y) = {x : x ≺ y}` of simple functions on
//! finite measure spaces, with exact rational arithmetic, plus a floating
//! point counterpart for Hermitian matrices.

pub mod acceptance;
pub mod error;
pub mod extremality;
pub mod matrix;
pub mod measure;
pub mod oracle;
pub mod rational;
pub mod scales;
pub mod witness;

pub use error::{Error, Result};
pub use rational::{rat, Rational};
