//! Recursive descent parser for program files and assertions.
//!
//! Program grammar (newlines are insignificant, `#` comments):
//!
//! ```text
//! program  := decl* "main" ":" stmt
//! decl     := ["proc"] NAME "(" [names] ")" "::" stmt [";"]
//! stmt     := basic (";" basic)*                      # ";" associates right
//! basic    := "skip"
//!           | names ":=" exprs
//!           | NAME "(" [exprs] ")"
//!           | "if" bool "then" stmt "else" stmt "fi"
//!           | "while" bool "do" stmt "od"
//!           | "begin" "local" locals ";" stmt "end"
//! locals   := "skip" | names ":=" exprs               # "skip" declares none
//! ```
//!
//! Assertions extend quantifier-free guards with `->`, `exists` and `forall`;
//! `exists x, y: p` binds as far right as possible.

use std::iter::Peekable;
use std::vec::IntoIter;

use thiserror::Error;

use super::ast::*;
use super::lexer::{self, LexError, Pos, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{pos}: expected {expected}, found {found}")]
    Unexpected {
        expected: String,
        found: TokenKind,
        pos: Pos,
    },
    #[error("{pos}: variable `{name}` uses the reserved fresh namespace")]
    ReservedName { name: String, pos: Pos },
    #[error("{pos}: empty-local block is not allowed (pass --allow-empty-block)")]
    EmptyBlockForbidden { pos: Pos },
    #[error("{pos}: {source}")]
    Invalid {
        #[source]
        source: ProgramError,
        pos: Pos,
    },
}

/// Parser configuration.
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Accept `begin local skip ; S end`, the block declaring no locals.
    pub allow_empty_block: bool,
    /// Accept `$k` variables; enabled for proof files, never for sources.
    pub allow_fresh_vars: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            allow_empty_block: true,
            allow_fresh_vars: false,
        }
    }
}

pub(crate) struct Parser {
    tokens: Peekable<IntoIter<Token>>,
    opts: ParseOptions,
    last_pos: Pos,
}

impl Parser {
    pub(crate) fn new(input: &str, opts: ParseOptions) -> Result<Parser, ParseError> {
        let tokens = lexer::tokenize(input)?;
        Ok(Parser {
            tokens: tokens.into_iter().peekable(),
            opts,
            last_pos: Pos { line: 1, col: 1 },
        })
    }

    pub(crate) fn peek(&mut self) -> &TokenKind {
        &self.tokens.peek().expect("lexer always emits Eof").kind
    }

    fn peek_pos(&mut self) -> Pos {
        self.tokens.peek().expect("lexer always emits Eof").pos
    }

    pub(crate) fn bump(&mut self) -> Token {
        let t = self.tokens.next().expect("lexer always emits Eof");
        self.last_pos = t.pos;
        t
    }

    /// An "expected X, found current token" error at the current position.
    pub(crate) fn unexpected(&mut self, expected: &str) -> ParseError {
        let pos = self.peek_pos();
        ParseError::Unexpected {
            expected: expected.to_string(),
            found: self.peek().clone(),
            pos,
        }
    }

    fn error<T>(&mut self, expected: &str) -> Result<T, ParseError> {
        Err(self.unexpected(expected))
    }

    pub(crate) fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Pos, ParseError> {
        if self.peek() == &kind {
            Ok(self.bump().pos)
        } else {
            self.error(what)
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), TokenKind::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn at_keyword(&mut self, kw: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == kw)
    }

    pub(crate) fn at_eof(&mut self) -> bool {
        self.peek() == &TokenKind::Eof
    }

    /// Identifier usable as a variable name, honoring the fresh-namespace rule.
    fn var_name(&mut self) -> Result<VarName, ParseError> {
        let pos = self.peek_pos();
        match self.peek().clone() {
            TokenKind::Ident(name) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return self.error("variable name");
                }
                self.bump();
                Ok(name)
            }
            TokenKind::FreshVar(name) => {
                if !self.opts.allow_fresh_vars {
                    return Err(ParseError::ReservedName { name, pos });
                }
                self.bump();
                Ok(name)
            }
            _ => self.error("variable name"),
        }
    }

    fn var_list(&mut self) -> Result<Vec<VarName>, ParseError> {
        let mut vars = vec![self.var_name()?];
        while self.peek() == &TokenKind::Comma {
            self.bump();
            vars.push(self.var_name()?);
        }
        Ok(vars)
    }

    // ----- expressions -----

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_factor()?;
        loop {
            let op = match self.peek() {
                TokenKind::Plus => "+",
                TokenKind::Minus => "-",
                _ => break,
            };
            self.bump();
            let rhs = self.expr_factor()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn expr_factor(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_atom()?;
        while self.peek() == &TokenKind::Star {
            self.bump();
            let rhs = self.expr_atom()?;
            lhs = Expr::bin("*", lhs, rhs);
        }
        Ok(lhs)
    }

    fn expr_atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            TokenKind::Number(n) => {
                self.bump();
                Ok(Expr::Const(n))
            }
            TokenKind::Ident(name) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return self.error("expression");
                }
                self.bump();
                if self.peek() == &TokenKind::LParen {
                    self.bump();
                    let args = self.expr_args()?;
                    self.expect(TokenKind::RParen, "`)`")?;
                    Ok(Expr::App(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            TokenKind::FreshVar(name) => {
                let pos = self.peek_pos();
                if !self.opts.allow_fresh_vars {
                    return Err(ParseError::ReservedName { name, pos });
                }
                self.bump();
                Ok(Expr::Var(name))
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.error("expression"),
        }
    }

    fn expr_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        if self.peek() == &TokenKind::RParen {
            return Ok(Vec::new());
        }
        let mut args = vec![self.expr()?];
        while self.peek() == &TokenKind::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        Ok(args)
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut es = vec![self.expr()?];
        while self.peek() == &TokenKind::Comma {
            self.bump();
            es.push(self.expr()?);
        }
        Ok(es)
    }

    // ----- quantifier-free guards -----

    pub(crate) fn bool_expr(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.bool_conj()?;
        while self.peek() == &TokenKind::Pipe {
            self.bump();
            let rhs = self.bool_conj()?;
            lhs = BoolExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn bool_conj(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.bool_neg()?;
        while self.peek() == &TokenKind::Amp {
            self.bump();
            let rhs = self.bool_neg()?;
            lhs = BoolExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn bool_neg(&mut self) -> Result<BoolExpr, ParseError> {
        if self.peek() == &TokenKind::Bang {
            self.bump();
            Ok(BoolExpr::not(self.bool_neg()?))
        } else {
            self.bool_atom()
        }
    }

    fn bool_atom(&mut self) -> Result<BoolExpr, ParseError> {
        if self.at_keyword("true") {
            self.bump();
            return Ok(BoolExpr::True);
        }
        if self.at_keyword("false") {
            self.bump();
            return Ok(BoolExpr::False);
        }
        if self.peek() == &TokenKind::LParen {
            // `(` may open a parenthesized formula or an expression like
            // `(x + y) * z = w`; try the relational reading first
            let save = (self.tokens.clone(), self.last_pos);
            if let Ok(atom) = self.relational() {
                return Ok(BoolExpr::from_atom(atom));
            }
            (self.tokens, self.last_pos) = save;
            self.bump();
            let b = self.bool_expr()?;
            self.expect(TokenKind::RParen, "`)`")?;
            return Ok(b);
        }
        Ok(BoolExpr::from_atom(self.relational()?))
    }

    /// A relational atom: `t1 = t2`, `t1 <= t2`, or a bare relation
    /// application `r(..)` (never one of the arithmetic symbols).
    fn relational(&mut self) -> Result<RelAtom, ParseError> {
        let lhs = self.expr()?;
        match self.peek() {
            TokenKind::Eq => {
                self.bump();
                let rhs = self.expr()?;
                Ok(RelAtom::Eq(lhs, rhs))
            }
            TokenKind::Le => {
                self.bump();
                let rhs = self.expr()?;
                Ok(RelAtom::Rel("<=".into(), vec![lhs, rhs]))
            }
            _ => match lhs {
                Expr::App(name, args) if !matches!(name.as_str(), "+" | "-" | "*") => {
                    Ok(RelAtom::Rel(name, args))
                }
                _ => self.error("relational operator"),
            },
        }
    }

    // ----- assertions -----

    pub(crate) fn assertion(&mut self) -> Result<Assertion, ParseError> {
        if self.at_keyword("exists") || self.at_keyword("forall") {
            let existential = self.at_keyword("exists");
            self.bump();
            let pos = self.last_pos;
            let vars = self.var_list()?;
            let mut seen = std::collections::BTreeSet::new();
            for v in &vars {
                if !seen.insert(v.clone()) {
                    return Err(ParseError::Invalid {
                        source: ProgramError::DuplicateVariable {
                            var: v.clone(),
                            kind: "quantifier",
                        },
                        pos,
                    });
                }
            }
            self.expect(TokenKind::Colon, "`:`")?;
            let body = self.assertion()?;
            return Ok(if existential {
                Assertion::Exists(vars, Box::new(body))
            } else {
                Assertion::Forall(vars, Box::new(body))
            });
        }
        let lhs = self.assert_or()?;
        if self.peek() == &TokenKind::Arrow {
            self.bump();
            let rhs = self.assertion()?;
            Ok(Assertion::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn assert_or(&mut self) -> Result<Assertion, ParseError> {
        let mut lhs = self.assert_and()?;
        while self.peek() == &TokenKind::Pipe {
            self.bump();
            let rhs = self.assert_and()?;
            lhs = Assertion::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn assert_and(&mut self) -> Result<Assertion, ParseError> {
        let mut lhs = self.assert_neg()?;
        while self.peek() == &TokenKind::Amp {
            self.bump();
            let rhs = self.assert_neg()?;
            lhs = Assertion::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn assert_neg(&mut self) -> Result<Assertion, ParseError> {
        if self.peek() == &TokenKind::Bang {
            self.bump();
            Ok(Assertion::not(self.assert_neg()?))
        } else {
            self.assert_atom()
        }
    }

    fn assert_atom(&mut self) -> Result<Assertion, ParseError> {
        if self.at_keyword("true") {
            self.bump();
            return Ok(Assertion::True);
        }
        if self.at_keyword("false") {
            self.bump();
            return Ok(Assertion::False);
        }
        if self.peek() == &TokenKind::LParen {
            let save = (self.tokens.clone(), self.last_pos);
            if let Ok(atom) = self.relational() {
                return Ok(Assertion::from_atom(atom));
            }
            (self.tokens, self.last_pos) = save;
            self.bump();
            let p = self.assertion()?;
            self.expect(TokenKind::RParen, "`)`")?;
            return Ok(p);
        }
        Ok(Assertion::from_atom(self.relational()?))
    }

    // ----- statements -----

    pub(crate) fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let mut parts = vec![self.basic_stmt()?];
        loop {
            if self.peek() != &TokenKind::Semi {
                break;
            }
            // `;` also separates a declaration body from the next top-level
            // item, so only continue when a statement can follow.
            let mut ahead = self.tokens.clone();
            ahead.next();
            let next = ahead.peek().map(|t| t.kind.clone());
            let continues = match next {
                Some(TokenKind::Ident(s)) => {
                    !KEYWORDS.contains(&s.as_str())
                        || s == "skip"
                        || s == "if"
                        || s == "while"
                        || s == "begin"
                }
                Some(TokenKind::FreshVar(_)) => true,
                _ => false,
            };
            if !continues {
                break;
            }
            self.bump();
            parts.push(self.basic_stmt()?);
        }
        let mut stmt = parts.pop().expect("at least one statement");
        while let Some(s) = parts.pop() {
            stmt = Stmt::seq(s, stmt);
        }
        Ok(stmt)
    }

    fn basic_stmt(&mut self) -> Result<Stmt, ParseError> {
        if self.at_keyword("skip") {
            self.bump();
            return Ok(Stmt::Skip);
        }
        if self.at_keyword("if") {
            self.bump();
            let guard = self.bool_expr()?;
            self.expect_keyword("then")?;
            let then_s = self.stmt()?;
            self.expect_keyword("else")?;
            let else_s = self.stmt()?;
            self.expect_keyword("fi")?;
            return Ok(Stmt::if_then_else(guard, then_s, else_s));
        }
        if self.at_keyword("while") {
            self.bump();
            let guard = self.bool_expr()?;
            self.expect_keyword("do")?;
            let body = self.stmt()?;
            self.expect_keyword("od")?;
            return Ok(Stmt::while_do(guard, body));
        }
        if self.at_keyword("begin") {
            let pos = self.peek_pos();
            self.bump();
            self.expect_keyword("local")?;
            let (locals, inits) = if self.at_keyword("skip") {
                if !self.opts.allow_empty_block {
                    return Err(ParseError::EmptyBlockForbidden { pos });
                }
                self.bump();
                (Vec::new(), Vec::new())
            } else {
                let locals = self.var_list()?;
                self.expect(TokenKind::Assign, "`:=`")?;
                let inits = self.expr_list()?;
                if locals.len() != inits.len() {
                    return Err(ParseError::Invalid {
                        source: ProgramError::LengthMismatch {
                            targets: locals.len(),
                            sources: inits.len(),
                        },
                        pos,
                    });
                }
                (locals, inits)
            };
            self.expect(TokenKind::Semi, "`;`")?;
            let body = self.stmt()?;
            self.expect_keyword("end")?;
            return self.validated_block(locals, inits, body, pos);
        }
        // assignment or call, both begin with a variable/procedure name
        let pos = self.peek_pos();
        let first = self.var_name()?;
        if self.peek() == &TokenKind::LParen {
            self.bump();
            let args = self.expr_args()?;
            self.expect(TokenKind::RParen, "`)`")?;
            return Ok(Stmt::Call(first, args));
        }
        let mut targets = vec![first];
        while self.peek() == &TokenKind::Comma {
            self.bump();
            targets.push(self.var_name()?);
        }
        self.expect(TokenKind::Assign, "`:=`")?;
        let sources = self.expr_list()?;
        if targets.len() != sources.len() {
            return Err(ParseError::Invalid {
                source: ProgramError::LengthMismatch {
                    targets: targets.len(),
                    sources: sources.len(),
                },
                pos,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &targets {
            if !seen.insert(v.clone()) {
                return Err(ParseError::Invalid {
                    source: ProgramError::DuplicateVariable {
                        var: v.clone(),
                        kind: "assignment target",
                    },
                    pos,
                });
            }
        }
        Ok(Stmt::assign(targets, sources))
    }

    fn validated_block(
        &mut self,
        locals: Vec<VarName>,
        inits: Vec<Expr>,
        body: Stmt,
        pos: Pos,
    ) -> Result<Stmt, ParseError> {
        let mut seen = std::collections::BTreeSet::new();
        for v in &locals {
            if !seen.insert(v.clone()) {
                return Err(ParseError::Invalid {
                    source: ProgramError::DuplicateVariable {
                        var: v.clone(),
                        kind: "block local",
                    },
                    pos,
                });
            }
        }
        Ok(Stmt::block(locals, inits, body))
    }

    // ----- programs -----

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut decls: Vec<ProcDecl> = Vec::new();
        loop {
            while self.peek() == &TokenKind::Semi {
                self.bump();
            }
            if self.at_keyword("main") {
                break;
            }
            if self.at_eof() {
                return self.error("`main:` section");
            }
            self.eat_keyword("proc");
            let pos = self.peek_pos();
            let name = match self.peek().clone() {
                TokenKind::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                    self.bump();
                    s
                }
                _ => return self.error("procedure name"),
            };
            self.expect(TokenKind::LParen, "`(`")?;
            let formals = if self.peek() == &TokenKind::RParen {
                Vec::new()
            } else {
                self.var_list()?
            };
            self.expect(TokenKind::RParen, "`)`")?;
            self.expect(TokenKind::ColonColon, "`::`")?;
            let body = self.stmt()?;
            if decls.iter().any(|d| d.name == name) {
                return Err(ParseError::Invalid {
                    source: ProgramError::DuplicateDeclaration(name),
                    pos,
                });
            }
            decls.push(ProcDecl {
                name,
                formals,
                body,
            });
        }
        self.expect_keyword("main")?;
        let pos = self.last_pos;
        self.expect(TokenKind::Colon, "`:`")?;
        let main = self.stmt()?;
        while self.peek() == &TokenKind::Semi {
            self.bump();
        }
        if !self.at_eof() {
            return self.error("end of input");
        }
        Program::new(decls, main).map_err(|source| ParseError::Invalid { source, pos })
    }
}

/// A parsed relational atom, shared by the guard and assertion grammars.
pub(crate) enum RelAtom {
    Eq(Expr, Expr),
    Rel(String, Vec<Expr>),
}

impl BoolExpr {
    fn from_atom(atom: RelAtom) -> BoolExpr {
        match atom {
            RelAtom::Eq(l, r) => BoolExpr::Eq(l, r),
            RelAtom::Rel(s, args) => BoolExpr::Rel(s, args),
        }
    }
}

impl Assertion {
    fn from_atom(atom: RelAtom) -> Assertion {
        match atom {
            RelAtom::Eq(l, r) => Assertion::Eq(l, r),
            RelAtom::Rel(s, args) => Assertion::Rel(s, args),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "skip", "if", "then", "else", "fi", "while", "do", "od", "begin", "local", "end", "main",
    "proc", "true", "false", "exists", "forall",
];

/// Parses a complete program file.
pub fn parse_program(input: &str) -> Result<Program, ParseError> {
    parse_program_with(input, ParseOptions::default())
}

/// Parses a program file under explicit options.
pub fn parse_program_with(input: &str, opts: ParseOptions) -> Result<Program, ParseError> {
    Parser::new(input, opts)?.program()
}

/// Parses a single assertion (source namespace only).
pub fn parse_assertion(input: &str) -> Result<Assertion, ParseError> {
    let mut p = Parser::new(input, ParseOptions::default())?;
    let a = p.assertion()?;
    if !p.at_eof() {
        return p.error("end of input");
    }
    Ok(a)
}

/// Parses a single statement against default options; used by tests and the
/// command-line harness.
pub fn parse_stmt(input: &str) -> Result<Stmt, ParseError> {
    let mut p = Parser::new(input, ParseOptions::default())?;
    let s = p.stmt()?;
    if !p.at_eof() {
        return p.error("end of input");
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decl_and_block_main() {
        // the `proc` keyword is optional
        let p = parse_program("P() :: y := x ; main: x := 0 ; begin local x := 1 ; P() end")
            .unwrap();
        assert_eq!(p.decls().len(), 1);
        assert_eq!(p.decls()[0].name, "P");
        assert!(p.decls()[0].formals.is_empty());
        let expected = Stmt::seq(
            Stmt::assign(vec!["x".into()], vec![Expr::constant("0")]),
            Stmt::block(
                vec!["x".into()],
                vec![Expr::constant("1")],
                Stmt::Call("P".into(), vec![]),
            ),
        );
        assert_eq!(p.main(), &expected);
    }

    #[test]
    fn parses_proc_keyword_form() {
        let p = parse_program("proc add(u) :: sum := sum + u\nmain: add(sum)").unwrap();
        assert_eq!(p.decls()[0].formals, vec!["u".to_string()]);
        assert_eq!(p.main(), &Stmt::Call("add".into(), vec![Expr::var("sum")]));
    }

    #[test]
    fn malformed_input_is_a_syntax_error() {
        assert!(matches!(
            parse_program("main: :="),
            Err(ParseError::Unexpected { .. })
        ));
    }

    #[test]
    fn undeclared_procedure_is_reported() {
        assert!(matches!(
            parse_program("main: Q(1)"),
            Err(ParseError::Invalid {
                source: ProgramError::UndeclaredProcedure(_),
                ..
            })
        ));
    }

    #[test]
    fn fresh_namespace_rejected_in_source() {
        assert!(matches!(
            parse_program("main: $0 := 1"),
            Err(ParseError::ReservedName { .. })
        ));
    }

    #[test]
    fn empty_block_flag() {
        let src = "main: begin local skip ; x := 1 end";
        assert!(parse_program(src).is_ok());
        let opts = ParseOptions {
            allow_empty_block: false,
            ..Default::default()
        };
        assert!(matches!(
            parse_program_with(src, opts),
            Err(ParseError::EmptyBlockForbidden { .. })
        ));
    }

    #[test]
    fn seq_associates_right() {
        let s = parse_stmt("x := 0 ; y := 1 ; z := 2").unwrap();
        match s {
            Stmt::Seq(_, rest) => assert!(matches!(*rest, Stmt::Seq(..))),
            other => panic!("expected seq, got {other:?}"),
        }
    }

    #[test]
    fn assertion_precedence() {
        let a = parse_assertion("x = 0 & y = 1 -> exists w: w = x").unwrap();
        match a {
            Assertion::Implies(lhs, rhs) => {
                assert!(matches!(*lhs, Assertion::And(..)));
                assert!(matches!(*rhs, Assertion::Exists(..)));
            }
            other => panic!("expected implication, got {other:?}"),
        }
    }

    #[test]
    fn guard_has_no_quantifiers() {
        assert!(parse_program("main: while exists do skip od").is_err());
        let p = parse_program("main: if !(x = 1) & 0 <= y then skip else x := 1 fi").unwrap();
        match p.main() {
            Stmt::If(b, _, _) => assert!(matches!(b, BoolExpr::And(..))),
            other => panic!("unexpected {other:?}"),
        }
    }
}
