//! Codimensions, normal-form recognition, caustic geometry and orbit-tangency
//! checks for function germs on the corner `H^r x R^k`.

pub mod caustic;
pub mod classify;
pub mod error;
pub mod eval;
pub mod germ;
pub mod linalg;
pub mod localalg;
pub mod orbit;
pub mod parse;
pub mod poly;
pub mod render;

pub use error::{Error, GermError, ParseError, ParseErrorKind, PolyError};
pub use germ::{parse_family, parse_germ, GeneratingFamily, Germ};
pub use parse::parse_expression;
pub use poly::{Monomial, Poly, Rational, VarSpace};
pub use localalg::{CodimResult, CodimValue, JetSubspace, Relation};
pub use classify::{catalog, classify_germ, ClassificationReport, Group, NormalFormEntry, Regime, Sign};
pub use caustic::{full_caustic, residual_check, CausticGeometry, CausticOptions, Component, ComponentKind, Stratum, Window};
pub use orbit::{catalog_case, is_tangent, CaseId, LinearSystem, SymplecticJet, TangencyCase};
