//! Higher-order pi-calculus: terms, substitution, structural congruence and
//! reduction.

mod canon;
mod env;
mod error;
mod free;
mod name;
mod normal;
mod redex;
mod subst;
mod term;

pub use canon::canonical_key;
pub use env::{visit_calls, Definition, DefinitionEnv};
pub use error::CalcError;
pub use free::{free_names, free_names_of_values, free_vars, free_vars_of_values, occurs_free};
pub use name::{Name, NameSupply, ProcVar};
pub use normal::{collect_garbage, congruent, digest_key, normalize};
pub use redex::{enumerate_redexes, reduce_step, Engine, Redex, Site};
pub use subst::{apply_abstraction, substitute};
pub use term::{Abstraction, Branch, DefId, Formal, Prefix, Process, Value};
