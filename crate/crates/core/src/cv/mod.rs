//! Continuous-variable twin beams under phase and Gaussian displacement noise.

pub mod beam;
pub mod fock;
pub mod gauss;

pub use beam::{
    beam_splitter, beam_splitter_port, beam_splitter_unitary, bs_squeezing, quadrature_variance,
    squeezing_witness, BsSqueezing,
};
pub use fock::{
    cv_witness, expect_witness_phase, min_pt_eig, phase_noisy_twb, pt_diagonal_eigenvalue,
    pt_pair_eigenvalue, pt_spectrum_phase, twb_state, FockTruncation, GaussNoiseParams,
    PhaseNoiseParams, TwbParams, DEFAULT_TAIL_TOL,
};
pub use gauss::{
    expect_witness_gauss, gauss_channel_apply, gauss_noisy_twb, gauss_separability_threshold,
    GaussChannel, GaussThreshold,
};
