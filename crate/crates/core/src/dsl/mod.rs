//! The `.kws` language for weight families, weights and symbols.

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod ast;
mod compile;
pub mod eval;
mod format;
mod lexer;
mod parser;
pub mod random;

pub use ast::SpecAst;
pub use compile::{compile, HINTS, PROBE_WINDOW, SYMBOL_BUILTINS};
pub use format::{format, format_expr};
pub use parser::{parse, parse_expr};

use crate::classifier::SpaceSpec;
use crate::error::Result;

/// Parses and compiles `.kws` source.
pub fn load(src: &str) -> Result<SpaceSpec> {
    compile(&parse(src)?)
}

/// Source span, 1-based line and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

/// A parse or compile diagnostic with its source location.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { span, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.message)
    }
}

impl std::error::Error for Diagnostic {}
