//! Partial differentiation and substitution.
//!
//! `diff` treats every declared symbol — including each jet coordinate — as
//! an independent coordinate; contrast with the total derivative operators
//! in [`crate::jet`].

use std::collections::HashMap;
use std::sync::Arc;

use num::One;

use super::build::{mk_add, mk_fun, mk_mul, mk_pow};
use super::{Elem, Expr, Node, Rat, Sym};

/// Partial derivative of `e` with respect to the symbol `s`. Symbols absent
/// from `e` differentiate to zero; opaque kernels produce formal partial
/// tags via the chain rule.
pub fn diff(e: &Expr, s: &Arc<Sym>) -> Expr {
    match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(t) => {
            if t == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(ts) => mk_add(ts.iter().map(|t| diff(t, s)).collect()),
        Node::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (i, f) in fs.iter().enumerate() {
                let df = diff(f, s);
                if df.is_zero_const() {
                    continue;
                }
                let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                factors.push(df);
                for (j, g) in fs.iter().enumerate() {
                    if j != i {
                        factors.push(g.clone());
                    }
                }
                terms.push(mk_mul(factors));
            }
            mk_add(terms)
        }
        Node::Pow(b, r) => {
            let db = diff(b, s);
            if db.is_zero_const() {
                return Expr::zero();
            }
            let rm1 = r - Rat::one();
            mk_mul(vec![Expr::num(r.clone()), mk_pow(b.clone(), rm1), db])
        }
        Node::Fun(f, a) => {
            let da = diff(a, s);
            if da.is_zero_const() {
                return Expr::zero();
            }
            let outer = match f {
                Elem::Exp => mk_fun(Elem::Exp, a.clone()),
                Elem::Log => a.recip(),
                Elem::Sin => mk_fun(Elem::Cos, a.clone()),
                Elem::Cos => mk_fun(Elem::Sin, a.clone()).neg(),
                Elem::Tan => Expr::one() + mk_fun(Elem::Tan, a.clone()).pow_i(2),
            };
            mk_mul(vec![outer, da])
        }
        Node::Ker(k) => {
            let mut terms = Vec::new();
            for (i, a) in k.args.iter().enumerate() {
                let da = diff(a, s);
                if da.is_zero_const() {
                    continue;
                }
                let mut tags = k.tags.clone();
                tags.push(i + 1);
                let partial = Expr::kernel(&k.kernel, tags, k.args.clone());
                terms.push(mk_mul(vec![partial, da]));
            }
            mk_add(terms)
        }
    }
}

/// Simultaneous, non-recursive substitution of symbols by expressions,
/// followed by canonicalization.
pub fn substitute(e: &Expr, map: &HashMap<Arc<Sym>, Expr>) -> Expr {
    if map.is_empty() {
        return e.clone();
    }
    match e.node() {
        Node::Num(_) => e.clone(),
        Node::Sym(s) => map.get(s).cloned().unwrap_or_else(|| e.clone()),
        Node::Add(ts) => mk_add(ts.iter().map(|t| substitute(t, map)).collect()),
        Node::Mul(fs) => mk_mul(fs.iter().map(|f| substitute(f, map)).collect()),
        Node::Pow(b, r) => mk_pow(substitute(b, map), r.clone()),
        Node::Fun(f, a) => mk_fun(*f, substitute(a, map)),
        Node::Ker(k) => Expr::kernel(
            &k.kernel,
            k.tags.clone(),
            k.args.iter().map(|a| substitute(a, map)).collect(),
        ),
    }
}

/// Substitution of a single symbol.
pub fn substitute_one(e: &Expr, s: &Arc<Sym>, value: &Expr) -> Expr {
    let mut map = HashMap::new();
    map.insert(s.clone(), value.clone());
    substitute(e, &map)
}
