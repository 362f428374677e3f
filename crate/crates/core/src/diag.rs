//! Diagnostics shared by every pipeline stage.
//!
//! Diagnostics render as `file:line:col: severity: message`, matching the
//! format the CLI prints on stderr.

use std::fmt;

/// A source position, 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// One reported problem. Stages that can produce several problems return a
/// `Vec<Diagnostic>` instead of stopping at the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Option<Span>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: impl Into<Option<Span>>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            span: span.into(),
            message: message.into(),
        }
    }

    pub fn warning(span: impl Into<Option<Span>>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            span: span.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Render as `file:line:col: severity: message`; the span segment is
    /// dropped for diagnostics that have no source position.
    pub fn render(&self, file: &str) -> String {
        match self.span {
            Some(span) => format!("{}:{}: {}: {}", file, span, self.severity, self.message),
            None => format!("{}: {}: {}", file, self.severity, self.message),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(span) => write!(f, "{}: {}: {}", span, self.severity, self.message),
            None => write!(f, "{}: {}", self.severity, self.message),
        }
    }
}

/// True when any diagnostic in the list is an error.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_with_span() {
        let d = Diagnostic::error(Span::new(3, 14), "illegal character '%'");
        assert_eq!(
            d.render("model.hrebeca"),
            "model.hrebeca:3:14: error: illegal character '%'"
        );
    }

    #[test]
    fn render_without_span() {
        let d = Diagnostic::warning(None, "nonlinear expression");
        assert_eq!(d.render("m.hrebeca"), "m.hrebeca: warning: nonlinear expression");
    }
}
