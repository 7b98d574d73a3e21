//! Symbolic workbench for easy intersection type theories and their filter
//! models.

pub mod assignment;
pub mod easiness;
pub mod error;
pub mod filter;
pub mod jtheory;
pub mod lambda;
pub mod oracle;
pub mod sampling;
pub mod subtype;
pub mod theory;
pub mod types;

pub use error::{Error, Result};
pub use theory::{parse_theory, parse_theory_unchecked, Judgement, Theory, ValidationReport};
pub use types::{normalize, parse_type, subterm_closure, Atom, Type, TypeUniverse};
