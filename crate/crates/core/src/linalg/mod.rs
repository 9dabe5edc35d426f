//! Dense complex linear algebra for bipartite operators.

pub mod bipartite;
pub mod eig;
pub mod expm;
pub mod matrix;
pub mod svd;

pub use bipartite::{partial_transpose, BipartiteDensity, Subsystem};
pub use eig::{hermitian_eig, HermitianEig};
pub use expm::exp_anti_hermitian;
pub use matrix::{hs_inner, kron, paulis, unvectorize, vectorize, ComplexMatrix, C64};
pub use svd::{complex_svd, SvdResult};
