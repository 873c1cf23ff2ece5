//! Tokenizer shared by the program, assertion and proof-file grammars.
//!
//! `#` starts a comment that runs to the end of the line. Input is UTF-8;
//! identifiers admit alphanumerics, `_` and `'` after a letter.

use std::fmt;

use thiserror::Error;

/// Byte-oriented source position, 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Identifier or keyword.
    Ident(String),
    /// Decimal numeral, used as a constant symbol.
    Number(String),
    /// Reserved fresh variable `$<digits>`.
    FreshVar(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Assign, // :=
    Eq,
    Le,
    Plus,
    Minus,
    Star,
    Amp,
    Pipe,
    Bang,
    Arrow, // ->
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "`{s}`"),
            TokenKind::Number(s) => write!(f, "`{s}`"),
            TokenKind::FreshVar(s) => write!(f, "`{s}`"),
            TokenKind::LParen => write!(f, "`(`"),
            TokenKind::RParen => write!(f, "`)`"),
            TokenKind::LBrace => write!(f, "`{{`"),
            TokenKind::RBrace => write!(f, "`}}`"),
            TokenKind::LBracket => write!(f, "`[`"),
            TokenKind::RBracket => write!(f, "`]`"),
            TokenKind::Comma => write!(f, "`,`"),
            TokenKind::Semi => write!(f, "`;`"),
            TokenKind::Colon => write!(f, "`:`"),
            TokenKind::ColonColon => write!(f, "`::`"),
            TokenKind::Assign => write!(f, "`:=`"),
            TokenKind::Eq => write!(f, "`=`"),
            TokenKind::Le => write!(f, "`<=`"),
            TokenKind::Plus => write!(f, "`+`"),
            TokenKind::Minus => write!(f, "`-`"),
            TokenKind::Star => write!(f, "`*`"),
            TokenKind::Amp => write!(f, "`&`"),
            TokenKind::Pipe => write!(f, "`|`"),
            TokenKind::Bang => write!(f, "`!`"),
            TokenKind::Arrow => write!(f, "`->`"),
            TokenKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("{pos}: unexpected character `{ch}`")]
    UnexpectedChar { ch: char, pos: Pos },
    #[error("{pos}: `$` must be followed by digits")]
    BadFreshVar { pos: Pos },
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Tokenizes `input`, ending with a single `Eof` token.
pub fn tokenize(input: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(ch) = c {
                if ch == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let c = match chars.peek().copied() {
            None => break,
            Some(c) => c,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '(' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    pos,
                });
            }
            ')' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    pos,
                });
            }
            '{' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::LBrace,
                    pos,
                });
            }
            '}' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::RBrace,
                    pos,
                });
            }
            '[' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::LBracket,
                    pos,
                });
            }
            ']' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::RBracket,
                    pos,
                });
            }
            ',' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Comma,
                    pos,
                });
            }
            ';' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Semi,
                    pos,
                });
            }
            ':' => {
                bump!();
                match chars.peek() {
                    Some('=') => {
                        bump!();
                        tokens.push(Token {
                            kind: TokenKind::Assign,
                            pos,
                        });
                    }
                    Some(':') => {
                        bump!();
                        tokens.push(Token {
                            kind: TokenKind::ColonColon,
                            pos,
                        });
                    }
                    _ => tokens.push(Token {
                        kind: TokenKind::Colon,
                        pos,
                    }),
                }
            }
            '=' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Eq,
                    pos,
                });
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    tokens.push(Token {
                        kind: TokenKind::Le,
                        pos,
                    });
                } else {
                    return Err(LexError::UnexpectedChar { ch: '<', pos });
                }
            }
            '+' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Plus,
                    pos,
                });
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    tokens.push(Token {
                        kind: TokenKind::Arrow,
                        pos,
                    });
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Minus,
                        pos,
                    });
                }
            }
            '*' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Star,
                    pos,
                });
            }
            '&' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Amp,
                    pos,
                });
            }
            '|' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Pipe,
                    pos,
                });
            }
            '!' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Bang,
                    pos,
                });
            }
            '$' => {
                bump!();
                let mut digits = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                if digits.is_empty() {
                    return Err(LexError::BadFreshVar { pos });
                }
                tokens.push(Token {
                    kind: TokenKind::FreshVar(format!("${digits}")),
                    pos,
                });
            }
            c if c.is_ascii_digit() => {
                let mut num = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        num.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Number(num),
                    pos,
                });
            }
            c if is_ident_start(c) => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if is_ident_continue(c) {
                        name.push(c);
                        bump!();
                    } else if c == '-' {
                        // Rule names such as RECURSION-I appear in proof files.
                        // Only continue when the name so far is all-uppercase
                        // and the dash is followed by an uppercase letter.
                        let all_upper = name.chars().all(|c| c.is_ascii_uppercase());
                        let mut ahead = chars.clone();
                        ahead.next();
                        let next_upper = matches!(ahead.peek(), Some(c) if c.is_ascii_uppercase());
                        if all_upper && next_upper {
                            name.push('-');
                            bump!();
                        } else {
                            break;
                        }
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(name),
                    pos,
                });
            }
            other => {
                return Err(LexError::UnexpectedChar { ch: other, pos });
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        pos: Pos { line, col },
    });
    Ok(tokens)
}
