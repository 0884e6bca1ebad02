//! Differential elimination and structural identifiability for rational
//! ODE models.
//!
//! The crate is organized bottom-up: exact arithmetic (`coeff`, `mono`,
//! `poly`), model representation (`model`), power series solving
//! (`series`), the probabilistic ideal membership oracle (`oracle`),
//! projection-based elimination (`elim`), zero-dimensional algebra
//! (`algeo`), field-of-definition computation (`fielddef`), and the
//! identifiability assessment pipeline (`ident`).

pub mod algeo;
pub mod coeff;
pub mod elim;
pub mod error;
pub mod fielddef;
pub mod model;
pub mod mono;
pub mod oracle;
pub mod poly;
pub mod ratfun;
pub mod rngutil;
pub mod series;
pub mod vartable;

pub use algeo::{
    char_poly, field_membership, field_membership_with, groebner, quotient_data, saturate,
    unique_top_dim_component, GroebnerBasis, MembershipOptions, MonomialOrder, QuotientData,
};
pub use coeff::{FieldCtx, PrimeField, QField};
pub use elim::{project_model, ElimConfig, EliminationState, ModelProjection};
pub use error::{Error, Result};
pub use fielddef::{
    compute_field_of_definition, FieldDefConfig, FieldGenerators, GeneratorSource,
};
pub use model::{parse_model, Model, Profile, ProfileEntry, Representation};
pub use mono::Mono;
pub use poly::{MultiPoly, QPoly};
pub use ratfun::RatFun;
pub use vartable::{VarKind, VarTable};
