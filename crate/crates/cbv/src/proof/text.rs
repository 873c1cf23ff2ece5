//! The `.cbvproof` file format: a nested parenthesized derivation tree.
//!
//! ```text
//! node    := "(" RULE triple rdata* node* ")"
//! triple  := "{" assertion "}" stmt "{" assertion "}"
//! rdata   := "[" x1,..,xk ":=" y1,..,yk "]"     # SUBSTITUTION renaming
//! RULE    := SKIP | ASSIGN | COMP | IF | WHILE | BLOCK | CALL | SUBST
//!          | INVARIANCE | EXISTS-INTRO | CONSEQ | RECURSION | RECURSION-I
//!          | ASSUME
//! ```
//!
//! Whitespace and newlines are insignificant and `#` starts a line comment.
//! Assertions and statements may use machine-generated `$k` variables.
//! Rendering followed by parsing returns the original tree.

use thiserror::Error;

use crate::semantics::Triple;
use crate::syntax::lexer::TokenKind;
use crate::syntax::parser::{ParseOptions, Parser};
use crate::syntax::{render_assertion, render_stmt, ParseError, VarName};

use super::derivation::{Derivation, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofParseError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown rule name `{0}`")]
    UnknownRule(String),
    #[error("rule {0} does not carry rule data")]
    UnexpectedRuleData(String),
}

/// Parses one derivation tree from the text.
pub fn parse_derivation(input: &str) -> Result<Derivation, ProofParseError> {
    let opts = ParseOptions {
        allow_empty_block: true,
        allow_fresh_vars: true,
    };
    let mut p = Parser::new(input, opts)?;
    let d = node(&mut p)?;
    if !p.at_eof() {
        return Err(expected(&mut p, "end of input"));
    }
    Ok(d)
}

fn expected(p: &mut Parser, what: &str) -> ProofParseError {
    ProofParseError::Parse(p.unexpected(what))
}

fn node(p: &mut Parser) -> Result<Derivation, ProofParseError> {
    p.expect(TokenKind::LParen, "`(`")?;
    let name = match p.peek().clone() {
        TokenKind::Ident(s) => {
            p.bump();
            s
        }
        _ => return Err(expected(p, "rule name")),
    };
    let rule = Rule::from_name(&name).ok_or(ProofParseError::UnknownRule(name.clone()))?;

    p.expect(TokenKind::LBrace, "`{`")?;
    let pre = p.assertion()?;
    p.expect(TokenKind::RBrace, "`}`")?;
    let stmt = p.stmt()?;
    p.expect(TokenKind::LBrace, "`{`")?;
    let post = p.assertion()?;
    p.expect(TokenKind::RBrace, "`}`")?;

    let mut renaming = None;
    while p.peek() == &TokenKind::LBracket {
        if rule != Rule::Substitution || renaming.is_some() {
            return Err(ProofParseError::UnexpectedRuleData(name));
        }
        p.bump();
        let xs = rename_vars(p)?;
        p.expect(TokenKind::Assign, "`:=`")?;
        let ys = rename_vars(p)?;
        p.expect(TokenKind::RBracket, "`]`")?;
        renaming = Some((xs, ys));
    }

    let mut children = Vec::new();
    while p.peek() == &TokenKind::LParen {
        children.push(node(p)?);
    }
    p.expect(TokenKind::RParen, "`)`")?;

    Ok(Derivation {
        rule,
        conclusion: Triple::new(pre, stmt, post),
        renaming,
        children,
    })
}

fn rename_vars(p: &mut Parser) -> Result<Vec<VarName>, ProofParseError> {
    let mut out = vec![var(p)?];
    while p.peek() == &TokenKind::Comma {
        p.bump();
        out.push(var(p)?);
    }
    Ok(out)
}

fn var(p: &mut Parser) -> Result<VarName, ProofParseError> {
    match p.peek().clone() {
        TokenKind::Ident(s) => {
            p.bump();
            Ok(s)
        }
        TokenKind::FreshVar(s) => {
            p.bump();
            Ok(s)
        }
        _ => Err(expected(p, "variable name")),
    }
}

/// Renders a derivation in the canonical indented layout.
pub fn render_derivation(d: &Derivation) -> String {
    let mut out = String::new();
    render_node(d, 0, &mut out);
    out.push('\n');
    out
}

fn render_node(d: &Derivation, depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push('(');
    out.push_str(d.rule.name());
    out.push_str(" {");
    out.push_str(&render_assertion(&d.conclusion.pre));
    out.push_str("} ");
    out.push_str(&render_stmt(&d.conclusion.stmt));
    out.push_str(" {");
    out.push_str(&render_assertion(&d.conclusion.post));
    out.push('}');
    if let Some((xs, ys)) = &d.renaming {
        out.push_str(" [");
        out.push_str(&xs.join(", "));
        out.push_str(" := ");
        out.push_str(&ys.join(", "));
        out.push(']');
    }
    for c in &d.children {
        out.push('\n');
        render_node(c, depth + 1, out);
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_render_round_trip() {
        let text = r#"
# a tiny proof
(CONSEQ {true} x := 0 {x = 0}
  (ASSIGN {0 = 0} x := 0 {x = 0}))
"#;
        let d = parse_derivation(text).unwrap();
        assert_eq!(d.rule, Rule::Consequence);
        assert_eq!(d.children.len(), 1);
        let rendered = render_derivation(&d);
        let again = parse_derivation(&rendered).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn substitution_rule_data() {
        let text = "(SUBST {x = u} skip {u = u} [u0, v0 := u, v] (SKIP {x = u0} skip {x = u0}))";
        let d = parse_derivation(text).unwrap();
        assert_eq!(
            d.renaming,
            Some((
                vec!["u0".to_string(), "v0".to_string()],
                vec!["u".to_string(), "v".to_string()]
            ))
        );
        let again = parse_derivation(&render_derivation(&d)).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn fresh_vars_allowed_in_proofs() {
        let d = parse_derivation("(SKIP {$0 = x} skip {$0 = x})").unwrap();
        assert_eq!(d.rule, Rule::Skip);
    }

    #[test]
    fn unknown_rule_rejected() {
        assert!(matches!(
            parse_derivation("(FROBNICATE {true} skip {true})"),
            Err(ProofParseError::UnknownRule(_))
        ));
    }

    #[test]
    fn rule_data_only_on_subst() {
        assert!(matches!(
            parse_derivation("(SKIP {true} skip {true} [x := y])"),
            Err(ProofParseError::UnexpectedRuleData(_))
        ));
    }
}
