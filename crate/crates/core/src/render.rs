//! Text renderers. Terms use minimal parentheses for the parser's
//! precedence (`\` over `*` over `+`, all left-associative), so
//! `parse_term(&render_term(t)) == t`.

use std::fmt::Write;

use crate::model::PowersetModel;
use crate::sysnf::NormalInequality;
use crate::terms::{Clause, CnfTerm, DifferenceAtom, DnfTerm, EqSystem, Equation, Operand, Term};

fn precedence(t: &Term) -> u8 {
    match t {
        Term::Join(..) => 1,
        Term::Meet(..) => 2,
        Term::Diff(..) => 3,
        _ => 4,
    }
}

fn write_term(out: &mut String, t: &Term) {
    let (l, r, op) = match t {
        Term::Zero => return out.push('0'),
        Term::Var(i) => return write!(out, "x{i}").unwrap(),
        Term::Const(c) => return out.push_str(c),
        Term::Join(l, r) => (l, r, " + "),
        Term::Meet(l, r) => (l, r, " * "),
        Term::Diff(l, r) => (l, r, " \\ "),
    };
    let p = precedence(t);
    write_child(out, l, precedence(l) < p);
    out.push_str(op);
    write_child(out, r, precedence(r) <= p);
}

fn write_child(out: &mut String, t: &Term, parens: bool) {
    if parens {
        out.push('(');
        write_term(out, t);
        out.push(')');
    } else {
        write_term(out, t);
    }
}

pub fn render_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t);
    out
}

pub fn render_equation(e: &Equation) -> String {
    format!("{} {} {}", render_term(&e.lhs), e.relation, render_term(&e.rhs))
}

pub fn render_system(s: &EqSystem) -> String {
    let mut out = String::new();
    for e in &s.equations {
        out.push_str(&render_equation(e));
        out.push('\n');
    }
    out
}

pub fn render_operand(o: &Operand) -> String {
    match o {
        Operand::Var(i) => format!("x{i}"),
        Operand::Const(c) => c.to_string(),
        Operand::Zero => "0".into(),
    }
}

pub fn render_atom(a: &DifferenceAtom) -> String {
    if a.is_zero() {
        return "0".into();
    }
    format!("{}\\{}", render_operand(a.base()), render_operand(a.minus()))
}

fn render_clause(c: &Clause, sep: &str) -> String {
    if c.len() == 1 {
        return render_atom(c.atoms().next().unwrap());
    }
    c.atoms().map(|a| format!("({})", render_atom(a))).collect::<Vec<_>>().join(sep)
}

fn render_clauses<'a, I: Iterator<Item = &'a Clause>>(clauses: I, n: usize, inner: &str, outer: &str) -> String {
    let parts: Vec<String> = clauses
        .map(|c| {
            let s = render_clause(c, inner);
            if n > 1 {
                format!("({s})")
            } else {
                s
            }
        })
        .collect();
    parts.join(outer)
}

/// `x1\0`, `(x1\c)+(x2\c)`, `(x1\c1)+((x1\0)*(c1\0))`; `0` for the zero form.
pub fn render_dnf(d: &DnfTerm) -> String {
    if d.is_zero() {
        return "0".into();
    }
    render_clauses(d.clauses(), d.len(), "*", "+")
}

pub fn render_cnf(c: &CnfTerm) -> String {
    if c.is_zero() {
        return "0".into();
    }
    render_clauses(c.clauses(), c.len(), "+", "*")
}

/// `x1*x2*{1,2} <= x3+x4`; a right side denoting `0` renders as `= 0`.
pub fn render_normal(ni: &NormalInequality, m: &PowersetModel) -> String {
    let mut left: Vec<String> = ni.left_vars().iter().map(|i| format!("x{i}")).collect();
    if let Some(c) = ni.left_const() {
        left.push(m.format_elem(c));
    }
    let mut right: Vec<String> = ni.right_vars().iter().map(|i| format!("x{i}")).collect();
    if let Some(c) = ni.right_const() {
        right.push(m.format_elem(c));
    }
    if right.is_empty() {
        format!("{} = 0", left.join("*"))
    } else {
        format!("{} <= {}", left.join("*"), right.join("+"))
    }
}
