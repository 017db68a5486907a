use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalcError {
    #[error("arity mismatch: {expected} formals but {found} arguments")]
    ArityMismatch { expected: usize, found: usize },
    #[error("kind mismatch at position {position}: formal and argument disagree on name/process")]
    KindMismatch { position: usize },
    #[error("unbound definition `{0}`")]
    UnboundDefinition(String),
    #[error("redex does not match the current term: {0}")]
    StaleRedex(String),
    #[error("definition `{0}` is already defined")]
    DuplicateDefinition(String),
    #[error("definition `{def}`: free symbol `{symbol}` is not a formal or declared constant")]
    FreeSymbolInBody { def: String, symbol: String },
    #[error("unguarded recursion through `{0}`")]
    UnguardedRecursion(String),
    #[error("duplicate formal `{0}`")]
    DuplicateFormal(String),
}
