pub mod algebra;
pub mod complex;
pub mod envelope;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod operad;
pub mod tree;

pub use error::{Error, Result};
