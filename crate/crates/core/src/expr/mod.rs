//! Canonical symbolic expressions over jet coordinates.
//!
//! Expressions are immutable values with structural sharing. Every public
//! constructor canonicalizes: sums and products are flattened and sorted by a
//! fixed total order, numeric constants are folded, zero/one absorbed, like
//! terms and like factors collected, and rational constants kept in lowest
//! terms. Equality, hashing and ordering act on the canonical form.

mod ansatz;
mod build;
mod calculus;
mod eval;
mod parser;
mod printer;
mod symbol;
mod zero;

use std::collections::BTreeSet;
use std::sync::Arc;

pub use ansatz::{
    generic_combination, monomials_up_to, nullspace, solve_linear, solve_linear_system,
    unknown_params,
};
pub use calculus::{diff, substitute, substitute_one};
pub use eval::{eval_f64, eval_rat, rat_to_f64, EvalError};
pub use parser::{parse, ParseError};
pub use symbol::{Elem, KernelSym, Resolved, Sym, SymKind, SymbolError, SymbolTable};
pub use zero::{equivalent, expand, is_zero, Trivalent};

/// Exact rational scalar.
pub type Rat = num::BigRational;

/// Opaque kernel application `f_{,tags}(args)`; `tags` is the sorted multiset
/// of 1-based argument positions the kernel has been formally differentiated
/// against.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KernelApp {
    pub kernel: Arc<KernelSym>,
    pub tags: Vec<usize>,
    pub args: Vec<Expr>,
}

/// Expression node. The variant declaration order fixes the node ranking
/// used by the canonical total order: constants < symbols < functions <
/// powers < products < sums.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Num(Rat),
    Sym(Arc<Sym>),
    Fun(Elem, Expr),
    Ker(KernelApp),
    Pow(Expr, Rat),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
}

/// A canonical immutable expression.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Node>);

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub(crate) fn raw(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn is_num(&self) -> bool {
        matches!(self.node(), Node::Num(_))
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self.node() {
            Node::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self.node(), Node::Num(r) if num::Zero::is_zero(r))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Num(r) if num::One::is_one(r))
    }

    /// All symbols occurring in the expression.
    pub fn symbols(&self) -> BTreeSet<Arc<Sym>> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Arc<Sym>>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Fun(_, a) => a.collect_symbols(out),
            Node::Ker(k) => {
                for a in &k.args {
                    a.collect_symbols(out);
                }
            }
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Mul(v) | Node::Add(v) => {
                for e in v {
                    e.collect_symbols(out);
                }
            }
        }
    }

    pub fn contains_sym(&self, s: &Arc<Sym>) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Sym(t) => t == s,
            Node::Fun(_, a) => a.contains_sym(s),
            Node::Ker(k) => k.args.iter().any(|a| a.contains_sym(s)),
            Node::Pow(b, _) => b.contains_sym(s),
            Node::Mul(v) | Node::Add(v) => v.iter().any(|e| e.contains_sym(s)),
        }
    }

    /// Highest jet order among the symbols of the expression (0 when no jet
    /// coordinate occurs).
    pub fn jet_order(&self) -> usize {
        match self.node() {
            Node::Num(_) => 0,
            Node::Sym(s) => s.jet_order(),
            Node::Fun(_, a) => a.jet_order(),
            Node::Ker(k) => k.args.iter().map(|a| a.jet_order()).max().unwrap_or(0),
            Node::Pow(b, _) => b.jet_order(),
            Node::Mul(v) | Node::Add(v) => v.iter().map(|e| e.jet_order()).max().unwrap_or(0),
        }
    }
}
