//! Deterministic pretty-printer. `parse(print(e)) == e` for canonical `e`.

use std::fmt;

use num::{One, Signed};

use super::{Expr, Node, Rat};

#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Prec {
    Sum,
    Product,
    Power,
}

fn write_rat(f: &mut fmt::Formatter<'_>, r: &Rat) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Split a sign off a canonical term for sum rendering.
fn sign_split(e: &Expr) -> (bool, Expr) {
    match e.node() {
        Node::Num(r) if r.is_negative() => (true, Expr::num(-r)),
        Node::Mul(fs) => {
            if let Node::Num(r) = fs[0].node() {
                if r.is_negative() {
                    let c = -r;
                    let rest = &fs[1..];
                    let abs = if c.is_one() {
                        if rest.len() == 1 {
                            rest[0].clone()
                        } else {
                            Expr::raw(Node::Mul(rest.to_vec()))
                        }
                    } else {
                        let mut v = Vec::with_capacity(fs.len());
                        v.push(Expr::num(c));
                        v.extend(rest.iter().cloned());
                        Expr::raw(Node::Mul(v))
                    };
                    return (true, abs);
                }
            }
            (false, e.clone())
        }
        _ => (false, e.clone()),
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, prec: Prec) -> fmt::Result {
    match e.node() {
        Node::Num(r) => {
            let needs_parens = (r.is_negative() || !r.is_integer()) && prec > Prec::Sum;
            if needs_parens {
                f.write_str("(")?;
            }
            write_rat(f, r)?;
            if needs_parens {
                f.write_str(")")?;
            }
            Ok(())
        }
        Node::Sym(s) => f.write_str(&s.name),
        Node::Fun(elem, a) => {
            write!(f, "{}(", elem.name())?;
            write_expr(f, a, Prec::Sum)?;
            f.write_str(")")
        }
        Node::Ker(k) => {
            f.write_str(&k.kernel.name)?;
            if !k.tags.is_empty() {
                f.write_str("_{")?;
                for t in &k.tags {
                    write!(f, ",{t}")?;
                }
                f.write_str("}")?;
            }
            f.write_str("(")?;
            for (i, a) in k.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write_expr(f, a, Prec::Sum)?;
            }
            f.write_str(")")
        }
        Node::Pow(b, r) => {
            let base_atomic = matches!(b.node(), Node::Sym(_) | Node::Fun(..) | Node::Ker(_));
            if base_atomic {
                write_expr(f, b, Prec::Power)?;
            } else {
                f.write_str("(")?;
                write_expr(f, b, Prec::Sum)?;
                f.write_str(")")?;
            }
            f.write_str("^")?;
            if r.is_integer() && !r.is_negative() {
                write!(f, "{}", r.numer())
            } else {
                f.write_str("(")?;
                write_rat(f, r)?;
                f.write_str(")")
            }
        }
        Node::Mul(fs) => {
            if prec > Prec::Product {
                f.write_str("(")?;
                write_expr(f, e, Prec::Sum)?;
                f.write_str(")")?;
                return Ok(());
            }
            if prec == Prec::Sum {
                let (neg, abs) = sign_split(e);
                if neg {
                    f.write_str("-")?;
                    return write_expr(f, &abs, Prec::Product);
                }
            }
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str("*")?;
                }
                write_expr(f, g, Prec::Product)?;
            }
            Ok(())
        }
        Node::Add(ts) => {
            if prec > Prec::Sum {
                f.write_str("(")?;
                write_expr(f, e, Prec::Sum)?;
                f.write_str(")")?;
                return Ok(());
            }
            for (i, t) in ts.iter().enumerate() {
                let (neg, abs) = sign_split(t);
                if i == 0 {
                    if neg {
                        f.write_str("-")?;
                    }
                } else if neg {
                    f.write_str(" - ")?;
                } else {
                    f.write_str(" + ")?;
                }
                write_expr(f, &abs, Prec::Product)?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, Prec::Sum)
    }
}
