//! Lexer for `.hrebeca` sources.
//!
//! Supports `//` line comments and `/* */` block comments. Numeric literals
//! are decimal and lex to exact rationals.

use super::token::{Token, TokenKind};
use crate::diag::{Diagnostic, Span};
use crate::expr::parse_decimal;

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(source: &'a str) -> Self {
        Lexer {
            chars: source.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

fn keyword(text: &str) -> Option<TokenKind> {
    Some(match text {
        "softwareclass" => TokenKind::KwSoftwareClass,
        "physicalclass" => TokenKind::KwPhysicalClass,
        "knownrebecs" => TokenKind::KwKnownRebecs,
        "statevars" => TokenKind::KwStateVars,
        "msgsrv" => TokenKind::KwMsgSrv,
        "mode" => TokenKind::KwMode,
        "inv" => TokenKind::KwInv,
        "guard" => TokenKind::KwGuard,
        "delay" => TokenKind::KwDelay,
        "setmode" => TokenKind::KwSetMode,
        "main" => TokenKind::KwMain,
        "CAN" => TokenKind::KwCan,
        "priorities" => TokenKind::KwPriorities,
        "delays" => TokenKind::KwDelays,
        "self" => TokenKind::KwSelf,
        "if" => TokenKind::KwIf,
        "else" => TokenKind::KwElse,
        _ => return None,
    })
}

/// Tokenize a source text. Tokens carry 1-based line/column spans; the
/// stream never includes an `Eof` token (the parser synthesizes one).
pub fn tokenize(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lx = Lexer::new(source);
    let mut tokens = Vec::new();
    loop {
        // Skip whitespace and comments.
        loop {
            match lx.peek() {
                Some(c) if c.is_whitespace() => {
                    lx.bump();
                }
                Some('/') => {
                    let mut look = lx.chars.clone();
                    look.next();
                    match look.peek() {
                        Some('/') => {
                            while let Some(c) = lx.peek() {
                                if c == '\n' {
                                    break;
                                }
                                lx.bump();
                            }
                        }
                        Some('*') => {
                            let open = lx.span();
                            lx.bump();
                            lx.bump();
                            let mut closed = false;
                            while let Some(c) = lx.bump() {
                                if c == '*' && lx.eat('/') {
                                    closed = true;
                                    break;
                                }
                            }
                            if !closed {
                                return Err(Diagnostic::error(open, "unterminated block comment"));
                            }
                        }
                        _ => break,
                    }
                }
                _ => break,
            }
        }

        let span = lx.span();
        let c = match lx.peek() {
            Some(c) => c,
            None => break,
        };

        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let mut text = String::new();
            while let Some(c) = lx.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    text.push(c);
                    lx.bump();
                } else {
                    break;
                }
            }
            keyword(&text).unwrap_or(TokenKind::Ident(text))
        } else if c.is_ascii_digit() {
            let mut text = String::new();
            while let Some(c) = lx.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    lx.bump();
                } else {
                    break;
                }
            }
            if lx.peek() == Some('.') {
                // A digit must follow for this to be a fractional part;
                // `1.x` would otherwise swallow a member access.
                let mut look = lx.chars.clone();
                look.next();
                if look.peek().is_some_and(|c| c.is_ascii_digit()) {
                    text.push('.');
                    lx.bump();
                    while let Some(c) = lx.peek() {
                        if c.is_ascii_digit() {
                            text.push(c);
                            lx.bump();
                        } else {
                            break;
                        }
                    }
                }
            }
            match parse_decimal(&text) {
                Some(r) => TokenKind::Num(r),
                None => return Err(Diagnostic::error(span, format!("bad numeric literal '{}'", text))),
            }
        } else {
            lx.bump();
            match c {
                '{' => TokenKind::LBrace,
                '}' => TokenKind::RBrace,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                ',' => TokenKind::Comma,
                ';' => TokenKind::Semi,
                ':' => TokenKind::Colon,
                '.' => TokenKind::Dot,
                '@' => TokenKind::At,
                '\'' => TokenKind::Prime,
                '+' => TokenKind::Plus,
                '*' => TokenKind::Star,
                '/' => TokenKind::Slash,
                '-' => {
                    if lx.eat('>') {
                        TokenKind::Arrow
                    } else {
                        TokenKind::Minus
                    }
                }
                '=' => {
                    if lx.eat('=') {
                        TokenKind::EqEq
                    } else {
                        TokenKind::Eq
                    }
                }
                '!' => {
                    if lx.eat('=') {
                        TokenKind::Neq
                    } else {
                        TokenKind::Bang
                    }
                }
                '<' => {
                    if lx.eat('=') {
                        TokenKind::Le
                    } else {
                        TokenKind::Lt
                    }
                }
                '>' => {
                    if lx.eat('=') {
                        TokenKind::Ge
                    } else {
                        TokenKind::Gt
                    }
                }
                '&' => {
                    if lx.eat('&') {
                        TokenKind::AndAnd
                    } else {
                        return Err(Diagnostic::error(span, "illegal character '&' (did you mean '&&'?)"));
                    }
                }
                '|' => {
                    if lx.eat('|') {
                        TokenKind::OrOr
                    } else {
                        return Err(Diagnostic::error(span, "illegal character '|' (did you mean '||'?)"));
                    }
                }
                other => {
                    return Err(Diagnostic::error(
                        span,
                        format!("illegal character '{}'", other),
                    ))
                }
            }
        };
        tokens.push(Token { kind, span });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Rational;
    use num::FromPrimitive;

    #[test]
    fn mode_header() {
        let toks = tokenize("mode Rolling {").unwrap();
        let kinds: Vec<_> = toks.into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::KwMode,
                TokenKind::Ident("Rolling".into()),
                TokenKind::LBrace
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert_eq!(tokenize("").unwrap(), vec![]);
    }

    #[test]
    fn flow_lhs_prime() {
        let toks = tokenize("t' = 1").unwrap();
        let kinds: Vec<_> = toks.into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Ident("t".into()),
                TokenKind::Prime,
                TokenKind::Eq,
                TokenKind::Num(Rational::from_i64(1).unwrap()),
            ]
        );
    }

    #[test]
    fn spans_and_comments() {
        let toks = tokenize("// c\n  x /* y\nz */ 0.05").unwrap();
        assert_eq!(toks[0].span, crate::diag::Span::new(2, 3));
        assert_eq!(toks[1].span, crate::diag::Span::new(3, 6));
        assert_eq!(toks[1].kind, TokenKind::Num(parse_decimal("0.05").unwrap()));
    }

    #[test]
    fn illegal_character() {
        let err = tokenize("a % b").unwrap_err();
        assert!(err.message.contains("illegal character '%'"));
        assert_eq!(err.span, Some(crate::diag::Span::new(1, 3)));
    }
}
