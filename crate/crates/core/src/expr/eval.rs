//! Numeric (f64) and exact rational evaluation.

use std::sync::Arc;

use num::{ToPrimitive, Zero};
use thiserror::Error;

use super::{Elem, Expr, Node, Rat, Sym};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("symbol `{0}` has no value")]
    Unbound(String),
    #[error("opaque kernel `{0}` is not evaluable")]
    OpaqueKernel(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("expression is not rational; exact evaluation unavailable")]
    NonRational,
}

/// Evaluate to `f64` with symbol values supplied by `env`.
pub fn eval_f64<F>(e: &Expr, env: &F) -> Result<f64, EvalError>
where
    F: Fn(&Arc<Sym>) -> Option<f64>,
{
    let v = match e.node() {
        Node::Num(r) => rat_to_f64(r),
        Node::Sym(s) => env(s).ok_or_else(|| EvalError::Unbound(s.name.clone()))?,
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_f64(t, env)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_f64(f, env)?;
            }
            acc
        }
        Node::Pow(b, r) => {
            let bv = eval_f64(b, env)?;
            if r.is_integer() {
                let k = r.to_integer().to_i32().ok_or_else(|| {
                    EvalError::Domain("exponent too large".into())
                })?;
                if bv == 0.0 && k < 0 {
                    return Err(EvalError::Domain("division by zero".into()));
                }
                bv.powi(k)
            } else {
                let rv = rat_to_f64(r);
                if bv < 0.0 {
                    return Err(EvalError::Domain(
                        "fractional power of a negative value".into(),
                    ));
                }
                if bv == 0.0 && rv < 0.0 {
                    return Err(EvalError::Domain("division by zero".into()));
                }
                bv.powf(rv)
            }
        }
        Node::Fun(f, a) => {
            let av = eval_f64(a, env)?;
            match f {
                Elem::Exp => av.exp(),
                Elem::Log => {
                    if av <= 0.0 {
                        return Err(EvalError::Domain("log of a non-positive value".into()));
                    }
                    av.ln()
                }
                Elem::Sin => av.sin(),
                Elem::Cos => av.cos(),
                Elem::Tan => av.tan(),
            }
        }
        Node::Ker(k) => return Err(EvalError::OpaqueKernel(k.kernel.name.clone())),
    };
    if v.is_nan() {
        return Err(EvalError::Domain("evaluation produced NaN".into()));
    }
    Ok(v)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a best-effort quotient for extreme magnitudes.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Exact evaluation over the rationals. Fails with `NonRational` whenever an
/// elementary function or fractional power must actually be evaluated.
pub fn eval_rat<F>(e: &Expr, env: &F) -> Result<Rat, EvalError>
where
    F: Fn(&Arc<Sym>) -> Option<Rat>,
{
    match e.node() {
        Node::Num(r) => Ok(r.clone()),
        Node::Sym(s) => env(s).ok_or_else(|| EvalError::Unbound(s.name.clone())),
        Node::Add(ts) => {
            let mut acc = Rat::zero();
            for t in ts {
                acc += eval_rat(t, env)?;
            }
            Ok(acc)
        }
        Node::Mul(fs) => {
            let mut acc = Rat::from_integer(1.into());
            for f in fs {
                acc *= eval_rat(f, env)?;
            }
            Ok(acc)
        }
        Node::Pow(b, r) => {
            if !r.is_integer() {
                return Err(EvalError::NonRational);
            }
            let bv = eval_rat(b, env)?;
            let k = r
                .to_integer()
                .to_i64()
                .ok_or_else(|| EvalError::Domain("exponent too large".into()))?;
            if bv.is_zero() {
                if k < 0 {
                    return Err(EvalError::Domain("division by zero".into()));
                }
                return Ok(Rat::zero());
            }
            let mag = k.unsigned_abs() as usize;
            let p = Rat::new(
                num::pow::pow(bv.numer().clone(), mag),
                num::pow::pow(bv.denom().clone(), mag),
            );
            Ok(if k < 0 { p.recip() } else { p })
        }
        Node::Fun(..) => Err(EvalError::NonRational),
        Node::Ker(k) => Err(EvalError::OpaqueKernel(k.kernel.name.clone())),
    }
}

/// True when exact rational evaluation is possible in principle (no
/// elementary functions, kernels or fractional powers).
pub(crate) fn is_rational_expr(e: &Expr) -> bool {
    match e.node() {
        Node::Num(_) | Node::Sym(_) => true,
        Node::Fun(..) | Node::Ker(_) => false,
        Node::Pow(b, r) => r.is_integer() && is_rational_expr(b),
        Node::Mul(v) | Node::Add(v) => v.iter().all(is_rational_expr),
    }
}
