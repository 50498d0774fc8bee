//! Exact polynomial verification that projected quadratic interactions
//! vanish on their space-resonant sets.
//!
//! Frequencies enter through 18 normalised variables ([`layout`]); the
//! resonance condition becomes a 12-generator ideal ([`ideal`]) whose
//! normal form is computed by a two-stage rewrite ([`reduce`]).

pub mod certify;
pub mod ideal;
pub mod layout;
pub mod oracle;
pub mod poly;
pub mod reduce;
pub mod tensor;

pub use certify::{certify, certify_tensor, mutate_entry, preflight, Certificate, PreflightReport};
pub use ideal::{build_ideal_generators, Generators};
pub use layout::{VariableLayout, LAYOUT};
pub use poly::{parse_polynomial, IntPolynomial, NVARS};
pub use reduce::{extract_cofactors, reduce};
pub use tensor::{build_interaction_tensor, InteractionTensor, TensorKind, CHAPLYGIN_COMPONENTS};
