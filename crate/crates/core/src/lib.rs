//! Executable model of grid resource assignment on top of a higher-order
//! pi-calculus engine.

pub mod calculus;
pub mod grid;
pub mod sim;
pub mod syntax;

pub use calculus::{
    canonical_key, congruent, enumerate_redexes, normalize, reduce_step, substitute, CalcError, DefinitionEnv,
    Engine, Name, NameSupply, ProcVar, Process, Redex, Value,
};
