//! Simulation of canonical phase measurement by multiport projection
//! synthesis: single-mode states, linear optical networks acting on Fock
//! states, photodetection with finite efficiency, and the sweep that turns
//! desired detection events into samples of the phase distribution.

// `!(x >= 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detector;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod optics;
pub mod phase;

pub use detector::{
    apply_efficiency, categorize, invert_efficiency, invert_efficiency_report, CountClass, DetectorModel, Efficiency,
    InversionReport, JointCountDistribution,
};
pub use error::{Error, Result};
pub use experiment::{
    analytic_curve, compare_results, compare_to_canonical, minimum_point_count, run_exact, run_monte_carlo,
    DeviationMetrics, Diagnostics, ExperimentConfig, SettingResult, SweepResult,
};
pub use fock::{
    binomial_state, coherent_state, hermite, number_state, phase_shift, squeezed_state, FockVector, Mixture,
    SqueezedParams, State, StateEnsemble, StateSpec,
};
pub use num_complex::Complex64;
pub use optics::{
    beam_splitter_matrix, compose, dft_multiport, dft_transform, eight_port_network, evolve, evolve_sequential,
    evolve_with, permanent, Engine, EvolveOptions, ModeTransform, MultiModeState, Network, NetworkElement,
};
pub use phase::{
    canonical_distribution, normalize_counts, projection_probability, truncated_phase_state, PhaseDistribution,
    PhasePoint, Provenance, TruncatedPhaseState,
};
