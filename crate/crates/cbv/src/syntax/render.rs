//! Canonical text rendering of expressions, assertions, statements and
//! programs. Parsing the rendered text yields the original tree back.

use std::fmt::Write;

use super::ast::*;

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Var(_) | Expr::Const(_) => 3,
        Expr::App(op, args) if args.len() == 2 && op == "*" => 2,
        Expr::App(op, args) if args.len() == 2 && (op == "+" || op == "-") => 1,
        Expr::App(..) => 3,
    }
}

fn render_expr_prec(e: &Expr, min: u8, out: &mut String) {
    let prec = expr_prec(e);
    let parens = prec < min;
    if parens {
        out.push('(');
    }
    match e {
        Expr::Var(x) => out.push_str(x),
        Expr::Const(c) => out.push_str(c),
        Expr::App(op, args) if args.len() == 2 && (op == "+" || op == "-" || op == "*") => {
            // left-associative: the right operand needs strictly higher binding
            render_expr_prec(&args[0], prec, out);
            let _ = write!(out, " {op} ");
            render_expr_prec(&args[1], prec + 1, out);
        }
        Expr::App(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                render_expr_prec(a, 0, out);
            }
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn render_expr(e: &Expr) -> String {
    let mut s = String::new();
    render_expr_prec(e, 0, &mut s);
    s
}

fn render_expr_list(es: &[Expr], out: &mut String) {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        render_expr_prec(e, 0, out);
    }
}

fn render_var_list(vs: &[VarName], out: &mut String) {
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(v);
    }
}

// Precedence levels: implication 1 (right), or 2, and 3, not 4, atom 5.
// Quantifiers bind weakest and are parenthesized inside any operator.

fn bool_prec(b: &BoolExpr) -> u8 {
    match b {
        BoolExpr::Or(..) => 2,
        BoolExpr::And(..) => 3,
        BoolExpr::Not(_) => 4,
        _ => 5,
    }
}

fn render_bool_prec(b: &BoolExpr, min: u8, out: &mut String) {
    let prec = bool_prec(b);
    let parens = prec < min;
    if parens {
        out.push('(');
    }
    match b {
        BoolExpr::True => out.push_str("true"),
        BoolExpr::False => out.push_str("false"),
        BoolExpr::Eq(l, r) => {
            render_expr_prec(l, 0, out);
            out.push_str(" = ");
            render_expr_prec(r, 0, out);
        }
        BoolExpr::Rel(r, args) if r == "<=" && args.len() == 2 => {
            render_expr_prec(&args[0], 0, out);
            out.push_str(" <= ");
            render_expr_prec(&args[1], 0, out);
        }
        BoolExpr::Rel(r, args) => {
            out.push_str(r);
            out.push('(');
            render_expr_list(args, out);
            out.push(')');
        }
        BoolExpr::Not(x) => {
            out.push('!');
            render_bool_prec(x, 5, out);
        }
        BoolExpr::And(l, r) => {
            render_bool_prec(l, 3, out);
            out.push_str(" & ");
            render_bool_prec(r, 4, out);
        }
        BoolExpr::Or(l, r) => {
            render_bool_prec(l, 2, out);
            out.push_str(" | ");
            render_bool_prec(r, 3, out);
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn render_bool(b: &BoolExpr) -> String {
    let mut s = String::new();
    render_bool_prec(b, 0, &mut s);
    s
}

fn assert_prec(p: &Assertion) -> u8 {
    match p {
        Assertion::Exists(..) | Assertion::Forall(..) => 0,
        Assertion::Implies(..) => 1,
        Assertion::Or(..) => 2,
        Assertion::And(..) => 3,
        Assertion::Not(_) => 4,
        _ => 5,
    }
}

fn render_assert_prec(p: &Assertion, min: u8, out: &mut String) {
    let prec = assert_prec(p);
    let parens = prec < min;
    if parens {
        out.push('(');
    }
    match p {
        Assertion::True => out.push_str("true"),
        Assertion::False => out.push_str("false"),
        Assertion::Eq(l, r) => {
            render_expr_prec(l, 0, out);
            out.push_str(" = ");
            render_expr_prec(r, 0, out);
        }
        Assertion::Rel(r, args) if r == "<=" && args.len() == 2 => {
            render_expr_prec(&args[0], 0, out);
            out.push_str(" <= ");
            render_expr_prec(&args[1], 0, out);
        }
        Assertion::Rel(r, args) => {
            out.push_str(r);
            out.push('(');
            render_expr_list(args, out);
            out.push(')');
        }
        Assertion::Not(x) => {
            out.push('!');
            render_assert_prec(x, 5, out);
        }
        Assertion::And(l, r) => {
            render_assert_prec(l, 3, out);
            out.push_str(" & ");
            render_assert_prec(r, 4, out);
        }
        Assertion::Or(l, r) => {
            render_assert_prec(l, 2, out);
            out.push_str(" | ");
            render_assert_prec(r, 3, out);
        }
        Assertion::Implies(l, r) => {
            render_assert_prec(l, 2, out);
            out.push_str(" -> ");
            render_assert_prec(r, 1, out);
        }
        Assertion::Exists(vs, body) => {
            out.push_str("exists ");
            render_var_list(vs, out);
            out.push_str(": ");
            render_assert_prec(body, 0, out);
        }
        Assertion::Forall(vs, body) => {
            out.push_str("forall ");
            render_var_list(vs, out);
            out.push_str(": ");
            render_assert_prec(body, 0, out);
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn render_assertion(p: &Assertion) -> String {
    let mut s = String::new();
    render_assert_prec(p, 0, &mut s);
    s
}

pub fn render_stmt(s: &Stmt) -> String {
    let mut out = String::new();
    render_stmt_into(s, &mut out);
    out
}

fn render_stmt_into(s: &Stmt, out: &mut String) {
    match s {
        Stmt::Skip => out.push_str("skip"),
        Stmt::Assign(xs, ts) => {
            render_var_list(xs, out);
            out.push_str(" := ");
            render_expr_list(ts, out);
        }
        Stmt::Call(p, args) => {
            out.push_str(p);
            out.push('(');
            render_expr_list(args, out);
            out.push(')');
        }
        Stmt::Seq(a, b) => {
            render_stmt_into(a, out);
            out.push_str(" ; ");
            render_stmt_into(b, out);
        }
        Stmt::If(g, s1, s2) => {
            out.push_str("if ");
            render_bool_prec(g, 0, out);
            out.push_str(" then ");
            render_stmt_into(s1, out);
            out.push_str(" else ");
            render_stmt_into(s2, out);
            out.push_str(" fi");
        }
        Stmt::While(g, body) => {
            out.push_str("while ");
            render_bool_prec(g, 0, out);
            out.push_str(" do ");
            render_stmt_into(body, out);
            out.push_str(" od");
        }
        Stmt::Block(xs, ts, body) => {
            out.push_str("begin local ");
            if xs.is_empty() {
                out.push_str("skip");
            } else {
                render_var_list(xs, out);
                out.push_str(" := ");
                render_expr_list(ts, out);
            }
            out.push_str(" ; ");
            render_stmt_into(body, out);
            out.push_str(" end");
        }
    }
}

/// Renders a program in the canonical one-declaration-per-line layout.
pub fn render_program(p: &Program) -> String {
    let mut out = String::new();
    for d in p.decls() {
        out.push_str("proc ");
        out.push_str(&d.name);
        out.push('(');
        render_var_list(&d.formals, &mut out);
        out.push_str(") :: ");
        render_stmt_into(&d.body, &mut out);
        out.push('\n');
    }
    out.push_str("main: ");
    render_stmt_into(p.main(), &mut out);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::{parse_assertion, parse_program, parse_stmt};

    #[test]
    fn expr_parens_minimal() {
        let e = parse_stmt("x := a * (b + c) - d").unwrap();
        assert_eq!(render_stmt(&e), "x := a * (b + c) - d");
        let e = parse_stmt("x := a - (b - c)").unwrap();
        assert_eq!(render_stmt(&e), "x := a - (b - c)");
        let e = parse_stmt("x := a - b - c").unwrap();
        assert_eq!(render_stmt(&e), "x := a - b - c");
    }

    #[test]
    fn assertion_round_trip() {
        for src in [
            "x = 0 & y = 1 | !(z = 2)",
            "exists u, v: u = v -> false",
            "(exists u: u = x) & y <= z",
            "x = 0 -> y = 0 -> z = 0",
        ] {
            let a = parse_assertion(src).unwrap();
            let rendered = render_assertion(&a);
            assert_eq!(parse_assertion(&rendered).unwrap(), a, "src: {src}");
        }
    }

    #[test]
    fn program_round_trip() {
        let src = "proc P() :: y := x\nmain: x := 0 ; begin local x := 1 ; P() end\n";
        let p = parse_program(src).unwrap();
        assert_eq!(render_program(&p), src);
        let again = parse_program(&render_program(&p)).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn empty_block_renders_as_local_skip() {
        let s = Stmt::block(vec![], vec![], Stmt::assign(vec!["y".into()], vec![crate::syntax::ast::Expr::var("x")]));
        assert_eq!(render_stmt(&s), "begin local skip ; y := x end");
        assert_eq!(parse_stmt(&render_stmt(&s)).unwrap(), s);
    }
}
