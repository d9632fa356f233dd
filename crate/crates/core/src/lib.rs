//! Exact computations for the quantization of strongly minimal real
//! nilpotent orbits: the case registry, half-form bundle classification,
//! ladder spectra, hypergeometric coefficients and explicit operator models.

pub mod bundles;
pub mod cli;
pub mod error;
pub mod exactalg;
pub mod hyperg;
pub mod jordan;
pub mod ladder;
pub mod models;
pub mod opcalc;
pub mod rational;

pub use bundles::{alpha_of, classify_bundles, pi1_component_order, BundleModel, Twist};
pub use error::{Error, Result};
pub use exactalg::{Ctx, Monomial, Polynomial, VariableContext};
pub use jordan::{derived_vectors, lookup_case, validate_case, JordanBlock, JordanCase};
pub use ladder::{evaluate_bundles, extract_ab, ladder_norms, LadderPoint};
pub use models::{build_model, solve_gram, verify_brackets, ModelKind, ModelSpec};
pub use opcalc::{commutator, matrix_on_basis, span_structure, OperatorExpr};
pub use rational::{q, Rational};
