//! Canonicalizing constructors and operator overloads.

use std::collections::BTreeMap;
use std::ops;
use std::sync::Arc;

use num::{BigInt, One, Signed, Zero};

use super::{Elem, Expr, KernelApp, KernelSym, Node, Rat, Sym};

impl Expr {
    pub fn num(r: Rat) -> Expr {
        Expr::raw(Node::Num(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(Rat::from_integer(BigInt::from(n)))
    }

    pub fn rat(n: i64, d: i64) -> Expr {
        assert!(d != 0, "zero denominator");
        Expr::num(Rat::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(s: &Arc<Sym>) -> Expr {
        Expr::raw(Node::Sym(s.clone()))
    }

    /// Canonical sum of arbitrarily many terms.
    pub fn add_all<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        mk_add(terms.into_iter().collect())
    }

    /// Canonical product of arbitrarily many factors.
    pub fn mul_all<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        mk_mul(factors.into_iter().collect())
    }

    /// Canonical power with rational exponent.
    pub fn pow(&self, r: Rat) -> Expr {
        mk_pow(self.clone(), r)
    }

    pub fn pow_i(&self, n: i64) -> Expr {
        self.pow(Rat::from_integer(BigInt::from(n)))
    }

    /// Reciprocal `e^(-1)`.
    pub fn recip(&self) -> Expr {
        self.pow_i(-1)
    }

    pub fn func(f: Elem, arg: Expr) -> Expr {
        mk_fun(f, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        mk_fun(Elem::Exp, arg)
    }

    pub fn kernel(k: &Arc<KernelSym>, tags: Vec<usize>, args: Vec<Expr>) -> Expr {
        assert_eq!(k.arity, args.len(), "kernel arity mismatch");
        let mut tags = tags;
        tags.sort_unstable();
        Expr::raw(Node::Ker(KernelApp {
            kernel: k.clone(),
            tags,
            args,
        }))
    }

    pub fn neg(&self) -> Expr {
        mk_mul(vec![Expr::int(-1), self.clone()])
    }
}

fn rat_zero() -> Rat {
    Rat::zero()
}

fn rat_one() -> Rat {
    Rat::one()
}

/// Split a canonical term into (coefficient, monomial part).
fn split_coeff(e: &Expr) -> (Rat, Expr) {
    match e.node() {
        Node::Num(r) => (r.clone(), Expr::one()),
        Node::Mul(fs) => {
            if let Node::Num(r) = fs[0].node() {
                let rest = &fs[1..];
                let mono = if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    Expr::raw(Node::Mul(rest.to_vec()))
                };
                (r.clone(), mono)
            } else {
                (rat_one(), e.clone())
            }
        }
        _ => (rat_one(), e.clone()),
    }
}

/// Reattach a coefficient to a canonical monomial (which carries none).
fn recombine(c: Rat, mono: Expr) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    if mono.is_one() {
        return Expr::num(c);
    }
    if c.is_one() {
        return mono;
    }
    match mono.node() {
        Node::Mul(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::num(c));
            v.extend(fs.iter().cloned());
            Expr::raw(Node::Mul(v))
        }
        _ => Expr::raw(Node::Mul(vec![Expr::num(c), mono])),
    }
}

pub(crate) fn mk_add(terms: Vec<Expr>) -> Expr {
    let mut constant = rat_zero();
    let mut coeffs: BTreeMap<Expr, Rat> = BTreeMap::new();
    let absorb = |t: &Expr, constant: &mut Rat, coeffs: &mut BTreeMap<Expr, Rat>| {
        if let Node::Num(r) = t.node() {
            *constant += r;
        } else {
            let (c, mono) = split_coeff(t);
            let slot = coeffs.entry(mono).or_insert_with(rat_zero);
            *slot += c;
        }
    };
    for t in &terms {
        if let Node::Add(ts) = t.node() {
            for s in ts {
                absorb(s, &mut constant, &mut coeffs);
            }
        } else {
            absorb(t, &mut constant, &mut coeffs);
        }
    }
    let mut out: Vec<Expr> = Vec::with_capacity(coeffs.len() + 1);
    for (mono, c) in coeffs {
        if c.is_zero() {
            continue;
        }
        out.push(recombine(c, mono));
    }
    if !constant.is_zero() {
        out.push(Expr::num(constant));
    }
    out.sort();
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::raw(Node::Add(out)),
    }
}

pub(crate) fn mk_mul(factors: Vec<Expr>) -> Expr {
    let mut coeff = rat_one();
    // base -> accumulated exponent
    let mut pows: BTreeMap<Expr, Rat> = BTreeMap::new();
    // accumulated exponential arguments (exp(a)*exp(b) -> exp(a+b))
    let mut exp_args: Vec<Expr> = Vec::new();

    let absorb = |f: &Expr, coeff: &mut Rat, pows: &mut BTreeMap<Expr, Rat>, exp_args: &mut Vec<Expr>| {
        match f.node() {
            Node::Num(r) => *coeff *= r,
            Node::Pow(b, r) => {
                let slot = pows.entry(b.clone()).or_insert_with(rat_zero);
                *slot += r;
            }
            Node::Fun(Elem::Exp, a) => exp_args.push(a.clone()),
            _ => {
                let slot = pows.entry(f.clone()).or_insert_with(rat_zero);
                *slot += rat_one();
            }
        }
    };
    for f in &factors {
        if let Node::Mul(fs) = f.node() {
            for g in fs {
                absorb(g, &mut coeff, &mut pows, &mut exp_args);
            }
        } else {
            absorb(f, &mut coeff, &mut pows, &mut exp_args);
        }
    }
    if coeff.is_zero() {
        return Expr::zero();
    }

    let mut out: Vec<Expr> = Vec::new();
    let mut pending: Vec<Expr> = Vec::new();
    for (b, r) in pows {
        if r.is_zero() {
            continue;
        }
        let p = mk_pow(b, r);
        match p.node() {
            Node::Num(r2) => coeff *= r2,
            // A fold changed the node shape (e.g. distributed integer power
            // over a product, or turned into an exponential); reflatten.
            Node::Mul(_) | Node::Fun(Elem::Exp, _) => pending.push(p.clone()),
            _ => out.push(p),
        }
    }
    if !exp_args.is_empty() {
        let e = mk_fun(Elem::Exp, mk_add(exp_args));
        match e.node() {
            Node::Num(r2) => coeff *= r2,
            _ => out.push(e),
        }
    }
    if !pending.is_empty() {
        pending.push(Expr::num(coeff));
        pending.extend(out);
        return mk_mul(pending);
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    out.sort();
    if out.is_empty() {
        return Expr::num(coeff);
    }
    if coeff.is_one() {
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        return Expr::raw(Node::Mul(out));
    }
    // A numeric coefficient on a bare sum distributes, so that terms of
    // opposite sign can cancel across substitutions: -(u + v) + u -> -v.
    if out.len() == 1 {
        if let Node::Add(ts) = out[0].node() {
            return mk_add(
                ts.iter()
                    .map(|t| mk_mul(vec![Expr::num(coeff.clone()), t.clone()]))
                    .collect(),
            );
        }
    }
    let mut v = Vec::with_capacity(out.len() + 1);
    v.push(Expr::num(coeff));
    v.extend(out);
    Expr::raw(Node::Mul(v))
}

/// Exact integer nth root, if it exists.
fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if k == 1 {
        return Some(n.clone());
    }
    if n.is_negative() {
        if k.is_multiple_of(2) {
            return None;
        }
        return exact_root(&-n, k).map(|r| -r);
    }
    let r = num::integer::Roots::nth_root(n, k);
    if num::pow::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

fn fold_num_pow(n: &Rat, r: &Rat) -> Option<Expr> {
    if n.is_one() {
        return Some(Expr::one());
    }
    if n.is_zero() {
        // 0^r folds only for positive exponents; 0^negative is left
        // unevaluated (a pole, surfaced at numeric evaluation).
        if r.is_positive() {
            return Some(Expr::zero());
        }
        return None;
    }
    if r.is_integer() {
        let k = r.to_integer();
        let mag: u32 = k.magnitude().try_into().ok().filter(|&m| m <= 4096)?;
        let p = Rat::new(
            num::pow::pow(n.numer().clone(), mag as usize),
            num::pow::pow(n.denom().clone(), mag as usize),
        );
        return Some(Expr::num(if k.is_negative() { p.recip() } else { p }));
    }
    // Fractional exponent p/q: exact only when both parts have exact q-th
    // roots (and the sign admits one).
    let q: u32 = r.denom().magnitude().try_into().ok().filter(|&m| m <= 64)?;
    let base = fold_num_pow(n, &Rat::from_integer(r.numer().clone()))?;
    let m = base.as_rat()?.clone();
    let rn = exact_root(m.numer(), q)?;
    let rd = exact_root(m.denom(), q)?;
    Some(Expr::num(Rat::new(rn, rd)))
}

pub(crate) fn mk_pow(b: Expr, r: Rat) -> Expr {
    if r.is_zero() {
        return Expr::one();
    }
    if r.is_one() {
        return b;
    }
    match b.node() {
        Node::Num(n) => {
            if let Some(e) = fold_num_pow(n, &r) {
                return e;
            }
            Expr::raw(Node::Pow(b.clone(), r))
        }
        Node::Pow(b2, r2) if r.is_integer() => mk_pow(b2.clone(), r2 * &r),
        Node::Mul(fs) if r.is_integer() => {
            mk_mul(fs.iter().map(|f| mk_pow(f.clone(), r.clone())).collect())
        }
        Node::Fun(Elem::Exp, a) => mk_fun(Elem::Exp, mk_mul(vec![Expr::num(r), a.clone()])),
        _ => Expr::raw(Node::Pow(b, r)),
    }
}

pub(crate) fn mk_fun(f: Elem, a: Expr) -> Expr {
    match (f, a.node()) {
        (Elem::Exp, Node::Num(r)) if r.is_zero() => return Expr::one(),
        (Elem::Exp, Node::Fun(Elem::Log, x)) => return x.clone(),
        (Elem::Log, Node::Num(r)) if r.is_one() => return Expr::zero(),
        (Elem::Log, Node::Fun(Elem::Exp, x)) => return x.clone(),
        (Elem::Sin, Node::Num(r)) if r.is_zero() => return Expr::zero(),
        (Elem::Cos, Node::Num(r)) if r.is_zero() => return Expr::one(),
        (Elem::Tan, Node::Num(r)) if r.is_zero() => return Expr::zero(),
        _ => {}
    }
    Expr::raw(Node::Fun(f, a))
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $ctor:expr) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $ctor;
                f(self, rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $ctor;
                f(self, rhs.clone())
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $ctor;
                f(self.clone(), rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $ctor;
                f(self.clone(), rhs.clone())
            }
        }
    };
}

impl_binop!(Add, add, |a, b| mk_add(vec![a, b]));
impl_binop!(Sub, sub, |a, b| mk_add(vec![a, b.neg()]));
impl_binop!(Mul, mul, |a, b| mk_mul(vec![a, b]));
impl_binop!(Div, div, |a, b| mk_mul(vec![a, b.pow_i(-1)]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}
