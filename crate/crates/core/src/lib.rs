pub mod bvring;
pub mod coeffring;
pub mod dickson;
pub mod error;
pub mod fgl;
pub mod linalg;
pub mod scalar;
pub mod series;
pub mod weierstrass;

pub use error::{Error, Result};
