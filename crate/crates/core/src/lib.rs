//! Entanglement witnesses for depolarized bipartite states in finite
//! dimension and for twin-beam states under Gaussian phase or amplitude noise.
//!
//! * [`linalg`]: dense complex matrices, partial transpose, Jacobi
//!   eigensolver, SVD.
//! * [`special`]: Kummer's confluent hypergeometric function, oscillator
//!   wavefunctions, homodyne pattern functions.
//! * [`finite`]: witness construction for p|Ψ⟩⟩⟨⟨Ψ| + (1−p)/d² I and its
//!   three-observable local decomposition.
//! * [`cv`]: truncated two-mode Fock space, noisy twin beams, the Gaussian
//!   displacement channel and the beam-splitter squeezing test.
//! * [`tomography`]: simulated two-mode homodyne data and Monte Carlo
//!   estimation of the witness.
//! * [`report`]: JSON/CSV report schemas shared by the CLI and bindings.

pub mod cv;
pub mod error;
pub mod finite;
pub mod linalg;
pub mod report;
pub mod special;
pub mod tomography;
pub mod witness;

pub use error::{Error, Result};
