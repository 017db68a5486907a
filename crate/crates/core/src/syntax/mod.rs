//! Concrete `.hopi` syntax: parser and pretty-printer.
//!
//! ```text
//! program  ::= item*
//! item     ::= "const" IDENT ("," IDENT)*
//!            | "def" IDENT "(" formals? ")" "=" par
//!            | "main" "=" par
//! par      ::= sum ("|" sum)*
//! sum      ::= unary ("+" unary)*          every summand prefixed
//! unary    ::= "0" | "(" par ")"
//!            | "new" IDENT ("," IDENT)* "." unary
//!            | "if" IDENT "=" IDENT "then" unary "else" unary
//!            | IDENT "(" formals? ")" ("." unary)?      input
//!            | IDENT "<" values? ">" ("." unary)?       output, call or X<..>
//! formals  ::= formal ("," formal)*
//! formal   ::= IDENT | "@" IDENT
//! values   ::= value ("," value)*
//! value    ::= IDENT | "{" ("(" formals? ")")? par "}"
//! ```

mod lexer;
mod parser;
mod pretty;

use thiserror::Error;

use crate::calculus::CalcError;

pub use lexer::KEYWORDS;
pub use parser::{parse_process, parse_program, Program, Scope};
pub use pretty::{pretty, pretty_program, pretty_program_annotated, pretty_value, pretty_with_scope};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn at(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Self {
            line,
            col,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{line}:{col}: unbound identifier `{name}`")]
    UnboundIdentifier { name: String, line: usize, col: usize },
    #[error("{line}:{col}: duplicate formal `{name}`")]
    DuplicateFormal { name: String, line: usize, col: usize },
    #[error(transparent)]
    Calc(#[from] CalcError),
}

/// Parses bytes that may not be UTF-8.
pub fn parse_program_bytes(
    bytes: &[u8],
    supply: &mut crate::calculus::NameSupply,
) -> Result<Program, ParseError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| SyntaxError::at(1, e.valid_up_to() + 1, "input is not UTF-8"))?;
    parse_program(text, supply)
}
