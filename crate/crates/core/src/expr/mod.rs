//! Closed-form expressions for generating families and their exact derivatives.
//!
//! The grammar is ordinary infix arithmetic over the variables `q`, `t`,
//! `lambda` and the fiber coordinates `w1` .. `wK`, with `sin`, `cos`, `exp`
//! and integer powers. [`Expr`] values print back to the same grammar.

mod deriv;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use parser::{parse, ParseError};

/// A free variable of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Q,
    T,
    Lambda,
    /// Fiber coordinate `w{i}`, 1-based.
    W(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Q => f.write_str("q"),
            Var::T => f.write_str("t"),
            Var::Lambda => f.write_str("lambda"),
            Var::W(i) => write!(f, "w{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Var),
    #[error("division by zero")]
    DivisionByZero,
}

/// Variable values for [`Expr::eval`]. Fiber coordinates `w1..wK` are bound
/// to `w[0..K]`; any index past the slice is unbound.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings<'a> {
    pub q: Option<f64>,
    pub t: Option<f64>,
    pub lambda: Option<f64>,
    pub w: &'a [f64],
}

impl<'a> Bindings<'a> {
    pub fn at(q: f64, w: &'a [f64]) -> Self {
        Bindings {
            q: Some(q),
            t: None,
            lambda: None,
            w,
        }
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    fn get(&self, v: Var) -> Result<f64, EvalError> {
        let value = match v {
            Var::Q => self.q,
            Var::T => self.t,
            Var::Lambda => self.lambda,
            Var::W(i) => i.checked_sub(1).and_then(|k| self.w.get(k).copied()),
        };
        value.ok_or(EvalError::Unbound(v))
    }
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn eval(&self, b: &Bindings<'_>) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => b.get(*v)?,
            Expr::Neg(a) => -a.eval(b)?,
            Expr::Add(a, c) => a.eval(b)? + c.eval(b)?,
            Expr::Sub(a, c) => a.eval(b)? - c.eval(b)?,
            Expr::Mul(a, c) => a.eval(b)? * c.eval(b)?,
            Expr::Div(a, c) => {
                let num = a.eval(b)?;
                let den = c.eval(b)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval(b)?;
                if *n < 0 && base == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                base.powi(*n)
            }
            Expr::Call(f, a) => f.apply(a.eval(b)?),
        })
    }

    /// Exact symbolic partial derivative.
    pub fn differentiate(&self, var: Var) -> Expr {
        deriv::derivative(self, var)
    }

    /// Replaces every occurrence of `var` by the constant `value`.
    pub fn substitute(&self, var: Var, value: f64) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Var(v) if *v == var => Some(Expr::Const(value)),
            _ => None,
        })
    }

    /// Replaces every occurrence of `var` by `replacement`.
    pub fn substitute_expr(&self, var: Var, replacement: &Expr) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Var(v) if *v == var => Some(replacement.clone()),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        let bx = |e: &Expr| Box::new(e.map_leaves(f));
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(bx(a)),
            Expr::Add(a, c) => Expr::Add(bx(a), bx(c)),
            Expr::Sub(a, c) => Expr::Sub(bx(a), bx(c)),
            Expr::Mul(a, c) => Expr::Mul(bx(a), bx(c)),
            Expr::Div(a, c) => Expr::Div(bx(a), bx(c)),
            Expr::Pow(a, n) => Expr::Pow(bx(a), *n),
            Expr::Call(g, a) => Expr::Call(*g, bx(a)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, c) | Expr::Sub(a, c) | Expr::Mul(a, c) | Expr::Div(a, c) => {
                a.collect_vars(out);
                c.collect_vars(out);
            }
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        self.free_vars().contains(&var)
    }

    /// Largest fiber index `i` among the `wi` that occur, 0 if none.
    pub fn max_fiber_index(&self) -> usize {
        self.free_vars()
            .into_iter()
            .filter_map(|v| match v {
                Var::W(i) => Some(i),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }
}

struct Child<'a>(&'a Expr, bool);

impl fmt::Display for Child<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

// Canonical printer. Parenthesizes exactly where the left-associative grammar
// would otherwise rebuild a different tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.precedence();
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "-{}", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "-{}", Child(a, a.precedence() < 3 || is_negative(a))),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => "+",
                    Expr::Sub(..) => "-",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                write!(
                    f,
                    "{} {op} {}",
                    Child(a, a.precedence() < p),
                    Child(b, b.precedence() <= p)
                )
            }
            Expr::Pow(a, n) => write!(f, "{}^{n}", Child(a, a.precedence() < 5)),
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

fn is_negative(e: &Expr) -> bool {
    matches!(e, Expr::Neg(_)) || matches!(e, Expr::Const(c) if *c < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, k: usize) -> Expr {
        parse(s, k).unwrap()
    }

    #[test]
    fn eval_examples() {
        let b = Bindings::at(0.0, &[]);
        assert_eq!(p("cos(q)", 0).eval(&b).unwrap(), 1.0);
        let w = [2.0, 1.0];
        let b = Bindings::at(0.0, &w);
        assert_eq!(p("w1^2 - w2^2", 2).eval(&b).unwrap(), 3.0);
        let b = Bindings::at(0.0, &[]);
        assert_eq!(p("1/q", 0).eval(&b), Err(EvalError::DivisionByZero));
        assert_eq!(p("q^-1", 0).eval(&b), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn unbound_variable() {
        let b = Bindings::at(0.0, &[]);
        assert_eq!(p("q + t", 0).eval(&b), Err(EvalError::Unbound(Var::T)));
        assert_eq!(p("w1", 1).eval(&b), Err(EvalError::Unbound(Var::W(1))));
    }

    #[test]
    fn derivative_examples() {
        let d = p("cos(q)", 0).differentiate(Var::Q);
        for q in [0.0, 0.3, 2.0] {
            let v = d.eval(&Bindings::at(q, &[])).unwrap();
            assert!((v + f64::sin(q)).abs() < 1e-15);
        }
        let d = p("w1^2 - w2^2", 2).differentiate(Var::W(1));
        assert_eq!(d.to_string(), "2 * w1");
        let d = p("cos(q)+t*(2+sin(q))", 0).differentiate(Var::T);
        assert_eq!(d.to_string(), "2 + sin(q)");
    }

    #[test]
    fn printer_parenthesizes_right_operands() {
        for s in ["a", "1 - (2 - 3)", "2 / (3 * 4)", "(q + 1)^2", "-(q - 1)", "q * -w1", "-q^2", "--q"] {
            if s == "a" {
                continue;
            }
            let e = p(s, 1);
            assert_eq!(p(&e.to_string(), 1), e, "{s}");
        }
    }

    #[test]
    fn substitute_removes_variable() {
        let e = p("cos(q) + t*sin(q)", 0).substitute(Var::T, 0.5);
        assert!(!e.depends_on(Var::T));
        let v = e.eval(&Bindings::at(1.0, &[])).unwrap();
        assert!((v - (1f64.cos() + 0.5 * 1f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn negative_constants_print_as_reparseable_text() {
        let e = Expr::Mul(Box::new(Expr::Const(-3.0)), Box::new(Expr::Var(Var::Q)));
        let back = p(&e.to_string(), 0);
        let b = Bindings::at(2.0, &[]);
        assert_eq!(back.eval(&b).unwrap(), -6.0);
    }
}
