//! Sobolev discrepancy between sampled distributions through a finite
//! feature map.
//!
//! The discrepancy compares a target distribution `p` against a source `q`
//! by the cheapest kinetic energy that advects `q` onto `p`. Restricting the
//! critic to a finite feature space turns the computation into a regularized
//! linear solve: with kernel mean embeddings `μ_p`, `μ_q` and the derivative
//! gramian `D` of the source, the optimal witness coefficients are
//! `u = (D + λI)⁻¹ (μ_p − μ_q)` and the squared discrepancy is
//! `(μ_p − μ_q)ᵀ u`.
//!
//! Modules:
//! - [`feature_map`]: Gaussian-enveloped random Fourier features Φ and JΦ.
//! - [`embeddings`]: mean embeddings and derivative gramians from samples or
//!   1-D quadrature.
//! - [`discrepancy`]: the closed-form regularized witness and its value,
//!   kinetic energy, and velocity field.
//! - [`transport`]: eigen-analysis of the gramian into principal transport
//!   directions and the spectrally filtered velocity.
//! - [`oracle1d`]: exact 1-D discrepancy and Wasserstein-2 from tabulated
//!   densities, used to validate the kernelized estimates.
//! - [`cli`]: batch commands with machine-readable JSON/CSV outputs.

pub mod cli;
pub mod config;
pub mod discrepancy;
pub mod embeddings;
pub mod error;
pub mod feature_map;
pub mod io;
pub mod oracle1d;
pub mod transport;
pub mod validation;

mod util;

pub use config::{FeatureMapConfig, RunConfig};
pub use discrepancy::{
    discrepancy_value, evaluate_witness, objective, solve_witness, velocity_field,
    WitnessSolution, RANK_TOL_FACTOR,
};
pub use embeddings::{
    derivative_gramian, mean_difference, mean_embedding, DensitySide, DistributionEmbedding,
    SampleSet,
};
pub use error::{Error, Result};
pub use feature_map::{AssumptionReport, FeatureMap, ProbeBox};
pub use oracle1d::{check_bounds, pde_residual, sobolev_1d, wasserstein2_1d, BoundsCheck, GridDensity};
pub use transport::{
    filtered_velocity, principal_direction, spectral_decomposition, transport_coefficients,
    Spectrum, TransportDecomposition,
};
pub use validation::{CheckResult, ValidationReport};
