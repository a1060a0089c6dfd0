#![allow(dead_code)]

use jetspectra::expr::{Expr, Func, Var};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn leaf(r: &mut ChaCha8Rng, vars: &[Var]) -> Expr {
    if r.gen_bool(0.3) {
        Expr::Const((r.gen_range(-3.0..3.0f64) * 100.0).round() / 100.0)
    } else {
        Expr::Var(vars[r.gen_range(0..vars.len())])
    }
}

/// A random expression that is smooth and of moderate size on `[-2, 2]^n`:
/// denominators are kept away from zero and `exp` only sees bounded
/// arguments.
pub fn random_expr(r: &mut ChaCha8Rng, depth: u32, vars: &[Var]) -> Expr {
    if depth == 0 {
        return leaf(r, vars);
    }
    let sub = |r: &mut ChaCha8Rng| random_expr(r, depth - 1, vars);
    match r.gen_range(0..9) {
        0 => Expr::Add(b(sub(r)), b(sub(r))),
        1 => Expr::Sub(b(sub(r)), b(sub(r))),
        2 | 3 => Expr::Mul(b(sub(r)), b(sub(r))),
        4 => {
            let den = Expr::Add(b(Expr::Const(2.5)), b(Expr::Call(Func::Cos, b(sub(r)))));
            Expr::Div(b(sub(r)), b(den))
        }
        5 => {
            let n = r.gen_range(-2..=3);
            let base = if n < 0 {
                Expr::Add(b(Expr::Const(1.5)), b(Expr::Call(Func::Sin, b(sub(r)))))
            } else {
                sub(r)
            };
            Expr::Pow(b(base), n)
        }
        6 => Expr::Call(Func::Sin, b(sub(r))),
        7 => Expr::Call(Func::Cos, b(sub(r))),
        _ => Expr::Call(Func::Exp, b(Expr::Call(Func::Sin, b(sub(r))))),
    }
}

/// `a_0 + Σ_{k ≤ degree} a_k cos kq + b_k sin kq` with coefficients damped
/// by `1/k^damping`, and the same as an expression.
pub fn random_trig(r: &mut ChaCha8Rng, degree: usize, damping: i32) -> (Vec<(f64, f64)>, Expr) {
    let mut coeffs = Vec::new();
    let mut e = Expr::Const((r.gen_range(-1.0..1.0f64) * 1000.0).round() / 1000.0);
    for k in 1..=degree {
        let s = (k as f64).powi(damping);
        let a = (r.gen_range(-1.0..1.0f64) * 1000.0).round() / 1000.0 / s;
        let c = (r.gen_range(-1.0..1.0f64) * 1000.0).round() / 1000.0 / s;
        coeffs.push((a, c));
        let kq = Expr::Mul(b(Expr::Const(k as f64)), b(Expr::Var(Var::Q)));
        let term = |coef: f64, f: Func| Expr::Mul(b(Expr::Const(coef)), b(Expr::Call(f, b(kq.clone()))));
        e = Expr::Add(b(e), b(term(a, Func::Cos)));
        e = Expr::Add(b(e), b(term(c, Func::Sin)));
    }
    (coeffs, e)
}
