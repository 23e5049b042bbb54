//! Two-qubit CHSH scenarios: states, measurements, joint tables, and the
//! checks that tell quantum, local and box-like correlations apart.
//!
//! Everything here works without `std`; only `alloc` is needed.

#![cfg_attr(not(test), no_std)]
// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(
    clippy::needless_range_loop,
    clippy::large_enum_variant,
    clippy::type_complexity
)]

extern crate alloc;

pub mod eigen;
pub mod error;
pub mod hilbert;
pub mod lhv;
pub mod measurement;
pub mod mixture;
pub mod reference;
pub mod scenario;
pub mod schmidt;
pub mod synthesis;

pub use error::{Error, Result};
pub use hilbert::{
    kron_operator, kron_state, tensor_operator, tensor_state, validate_density, Amplitude,
    Density4, DensityDiagnostics, Ket, Ket2, Ket4, Op, Op2, Op4,
};
pub use lhv::{
    fine_chsh_all, lhv_feasible, strategy_tables, DeterministicStrategy, FineCheck, LhvCertificate,
    Witness,
};
pub use measurement::{
    expectation, lueders_nonselective, make_measurement, outcome_probabilities,
    OutcomeDistribution, Setting, SettingTag, Spectral4,
};
pub use mixture::{
    bounded_chsh, mixture_delta_breakdown, mixture_joint_probabilities, product_measurement,
    product_mixture_density, LocalSettings, MixtureComponent, ProductMixture, Spectral2,
};
pub use reference::{build_reference, expected_report, ExpectedReport, Reference, ReferenceKind};
pub use scenario::{
    analyze_model, analyze_tables, bell_operator, chsh_delta, chsh_max_sym, chsh_variants,
    classify, classify_with, marginal_deviation, scenario_probabilities, AnalysisReport, Category,
    Classification, ClassifyTolerance, JointTables, QuantumModel,
};
pub use schmidt::{
    is_product_measurement, is_product_state, schmidt_decompose, tensor_factors,
    MeasurementStructure, ProductFactorization, SchmidtForm,
};
pub use synthesis::{
    basis_matching_probabilities, synthesize_model, StateHint, SynthesisMethod, SynthesisRequest,
    SynthesisResult,
};
