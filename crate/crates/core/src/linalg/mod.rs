//! Exact linear algebra over ZZ, QQ and GF(p).

pub mod matrix;
pub mod module;
pub mod ring;
pub mod snf;
pub mod sparse;

pub use matrix::ExactMatrix;
pub use module::{cokernel, kernel_basis, module_invariants, solve, FgModule, ModuleDescriptor};
pub use ring::{int, Ring, Scalar};
pub use snf::{snf, SmithForm};
pub use sparse::{SVec, SparseQuotient, SparseReducer};
