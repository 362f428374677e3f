//! Frontend: lexing, parsing, static checking and pretty-printing of
//! Hybrid Rebeca sources.
//!
//! Sources use the `.hrebeca` extension, UTF-8 encoding, `//` line comments
//! and `/* */` block comments.

pub mod ast;
pub mod check;
mod lexer;
mod parser;
mod pretty;
pub mod token;

pub use ast::ModelAST;
pub use check::{check, CheckedModel};
pub use lexer::tokenize;
pub use pretty::pretty_print;

use crate::diag::Diagnostic;
use crate::expr::Expr;

/// Tokenize and parse a model source.
pub fn parse_model(source: &str) -> Result<ModelAST, Diagnostic> {
    let tokens = tokenize(source)?;
    parser::Parser::new(tokens).parse_model()
}

/// Parse and check in one step.
pub fn load_model(source: &str) -> Result<CheckedModel, Vec<Diagnostic>> {
    let ast = parse_model(source).map_err(|d| vec![d])?;
    check(&ast)
}

/// Parse a standalone expression (used by the JSON loader and the
/// `--forbidden` option).
pub fn parse_expr_text(text: &str) -> Result<Expr, Diagnostic> {
    let tokens = tokenize(text)?;
    let mut p = parser::Parser::new(tokens);
    p.parse_expr_complete()
}
