//! Jet-space bookkeeping: multi-indices, total derivative operators, and
//! restriction of expressions to the solution manifold of a solved-form
//! equation.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{diff, substitute, Expr, Node, Sym, SymKind, SymbolError, SymbolTable};

/// Sorted multiset of independent-variable indices; `|J|` is the order.
/// The canonical sorted representation identifies `u_{xy}` with `u_{yx}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        MultiIndex(indices)
    }

    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn single(i: usize) -> Self {
        MultiIndex(vec![i])
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    /// `J,i` — append one differentiation.
    pub fn appended(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        let pos = v.partition_point(|&x| x <= i);
        v.insert(pos, i);
        MultiIndex(v)
    }

    /// Multiset difference `self - other` when `other` is contained in
    /// `self`.
    pub fn minus(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut v = self.0.clone();
        for &i in other.iter() {
            let pos = v.iter().position(|&x| x == i)?;
            v.remove(pos);
        }
        Some(MultiIndex(v))
    }

    pub fn contains(&self, other: &MultiIndex) -> bool {
        self.minus(other).is_some()
    }

    /// Split off the largest index: `J = (rest, i_max)`.
    pub fn split_max(&self) -> Option<(MultiIndex, usize)> {
        let mut v = self.0.clone();
        let last = v.pop()?;
        Some((MultiIndex(v), last))
    }

    /// Multiplicity of index `i`.
    pub fn count(&self, i: usize) -> usize {
        self.0.iter().filter(|&&x| x == i).count()
    }

    /// All sorted multi-indices over `q` indices of exact order `n`.
    pub fn all_of_order(q: usize, n: usize) -> Vec<MultiIndex> {
        fn rec(q: usize, n: usize, min: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if n == 0 {
                out.push(MultiIndex(prefix.clone()));
                return;
            }
            for i in min..q {
                prefix.push(i);
                rec(q, n - 1, i, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(q, n, 0, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("truncation order must be at least 1")]
    BadOrder,
    #[error("equation is not in solved form: {0}")]
    NotSolved(String),
    #[error("two leading coordinates apply to `{0}`")]
    AmbiguousLeading(String),
    #[error("restriction did not reach a fixed point (non-terminating substitution)")]
    NonTerminating,
}

/// Declaration of independent/dependent variables plus a truncation order.
///
/// The truncation order is advisory: operators climb to whatever order a
/// computation needs (total derivatives raise the order by one), and
/// [`Expr::jet_order`] lets callers assert bounds on results.
#[derive(Debug, Clone)]
pub struct JetContext {
    table: Arc<SymbolTable>,
    order: usize,
}

impl JetContext {
    pub fn new(table: Arc<SymbolTable>, order: usize) -> Result<Self, JetError> {
        if order == 0 {
            return Err(JetError::BadOrder);
        }
        Ok(JetContext { table, order })
    }

    /// Shorthand: build the table and the context in one go.
    pub fn with_vars(
        independents: &[&str],
        dependents: &[&str],
        order: usize,
    ) -> Result<Self, JetError> {
        let table = SymbolTable::with_vars(independents, dependents)?;
        JetContext::new(Arc::new(table), order)
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// A context with a different truncation order, sharing the table.
    pub fn at_order(&self, order: usize) -> Result<Self, JetError> {
        JetContext::new(self.table.clone(), order)
    }

    pub fn q(&self) -> usize {
        self.table.q()
    }

    pub fn p(&self) -> usize {
        self.table.p()
    }

    pub fn x(&self, i: usize) -> Expr {
        Expr::sym(&self.table.independent(i).expect("independent index"))
    }

    pub fn u(&self, a: usize) -> Expr {
        Expr::sym(&self.table.dependent(a).expect("dependent index"))
    }

    pub fn jet_sym(&self, a: usize, index: &MultiIndex) -> Arc<Sym> {
        self.table.jet(a, index).expect("jet coordinate")
    }

    pub fn jet(&self, a: usize, index: &MultiIndex) -> Expr {
        Expr::sym(&self.jet_sym(a, index))
    }

    /// Total derivative `D_i e` (Leibniz/chain recursion; on symbols
    /// `D_i x^j = delta_ij`, `D_i u^a_J = u^a_{J,i}`, parameters are
    /// constants).
    pub fn total_derivative(&self, e: &Expr, i: usize) -> Expr {
        assert!(i < self.q(), "independent index out of range");
        match e.node() {
            Node::Num(_) => Expr::zero(),
            Node::Sym(s) => match &s.kind {
                SymKind::Independent { index } => {
                    if *index == i {
                        Expr::one()
                    } else {
                        Expr::zero()
                    }
                }
                SymKind::Dependent { index } => self.jet(*index, &MultiIndex::single(i)),
                SymKind::Jet { dep, index } => self.jet(*dep, &index.appended(i)),
                SymKind::Parameter => Expr::zero(),
            },
            Node::Add(ts) => Expr::add_all(ts.iter().map(|t| self.total_derivative(t, i))),
            Node::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (k, f) in fs.iter().enumerate() {
                    let df = self.total_derivative(f, i);
                    if df.is_zero_const() {
                        continue;
                    }
                    let mut factors = vec![df];
                    factors.extend(fs.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, g)| g.clone()));
                    terms.push(Expr::mul_all(factors));
                }
                Expr::add_all(terms)
            }
            Node::Pow(b, r) => {
                let db = self.total_derivative(b, i);
                if db.is_zero_const() {
                    return Expr::zero();
                }
                Expr::num(r.clone()) * b.pow(r - num::BigRational::from_integer(1.into())) * db
            }
            Node::Fun(..) | Node::Ker(_) => {
                // Chain rule through the partial derivatives of the head.
                let mut terms = Vec::new();
                for s in e.symbols() {
                    let ds = self.total_derivative(&Expr::sym(&s), i);
                    if ds.is_zero_const() {
                        continue;
                    }
                    let de = diff(e, &s);
                    if de.is_zero_const() {
                        continue;
                    }
                    terms.push(de * ds);
                }
                Expr::add_all(terms)
            }
        }
    }

    /// `D_J e` — composition of total derivatives over a multi-index. The
    /// composition order is irrelevant since total derivatives commute.
    pub fn multi_total_derivative(&self, e: &Expr, index: &MultiIndex) -> Expr {
        let mut acc = e.clone();
        for &i in index.iter() {
            acc = self.total_derivative(&acc, i);
        }
        acc
    }
}

/// A differential equation (or system) in solved form: a list of leading
/// jet coordinates `u^a_K` with right-hand sides in strictly lower or
/// incomparable jets.
#[derive(Debug, Clone)]
pub struct SolvedEquation {
    entries: Vec<(usize, MultiIndex, Expr)>,
}

impl SolvedEquation {
    pub fn new(
        ctx: &JetContext,
        entries: Vec<(usize, MultiIndex, Expr)>,
    ) -> Result<Self, JetError> {
        for (a, k, _) in &entries {
            if k.order() == 0 {
                return Err(JetError::NotSolved(format!(
                    "leading coordinate of `{}` must be a derivative",
                    ctx.u(*a)
                )));
            }
        }
        // No leading coordinate may be a derivative of (or equal to) another.
        for (i, (a1, k1, _)) in entries.iter().enumerate() {
            for (a2, k2, _) in entries.iter().skip(i + 1) {
                if a1 == a2 && (k1.contains(k2) || k2.contains(k1)) {
                    return Err(JetError::NotSolved(format!(
                        "leading coordinates {} and {} overlap",
                        ctx.table().jet_name(*a1, k1),
                        ctx.table().jet_name(*a2, k2)
                    )));
                }
            }
        }
        // No leading coordinate (or a derivative of one) may occur in any
        // right-hand side; this guarantees terminating substitution.
        for (_, _, rhs) in &entries {
            for s in rhs.symbols() {
                if let SymKind::Jet { dep, index } = &s.kind {
                    for (a, k, _) in &entries {
                        if dep == a && index.contains(k) {
                            return Err(JetError::NotSolved(format!(
                                "right-hand side contains `{}`",
                                s.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(SolvedEquation { entries })
    }

    /// Parse-level convenience: leading coordinate named by a jet symbol.
    pub fn from_leading_exprs(
        ctx: &JetContext,
        pairs: Vec<(Expr, Expr)>,
    ) -> Result<Self, JetError> {
        let mut entries = Vec::new();
        for (lhs, rhs) in pairs {
            let Node::Sym(s) = lhs.node() else {
                return Err(JetError::NotSolved(format!(
                    "left-hand side `{lhs}` is not a jet coordinate"
                )));
            };
            let SymKind::Jet { dep, index } = &s.kind else {
                return Err(JetError::NotSolved(format!(
                    "left-hand side `{lhs}` is not a jet coordinate"
                )));
            };
            entries.push((*dep, index.clone(), rhs));
        }
        SolvedEquation::new(ctx, entries)
    }

    pub fn entries(&self) -> &[(usize, MultiIndex, Expr)] {
        &self.entries
    }

    /// Order of the equation: the highest leading-derivative order.
    pub fn order(&self) -> usize {
        self.entries.iter().map(|(_, k, _)| k.order()).max().unwrap_or(0)
    }

    /// Equation expressions `E = u^a_K - f^a`.
    pub fn components(&self, ctx: &JetContext) -> Vec<Expr> {
        self.entries
            .iter()
            .map(|(a, k, rhs)| ctx.jet(*a, k) - rhs)
            .collect()
    }

    /// Restrict `e` to the solution manifold: every occurrence of a leading
    /// coordinate or one of its total-derivative descendants `u^a_{K,J}` is
    /// replaced by `D_J f^a`, to a fixed point.
    pub fn restrict(&self, ctx: &JetContext, e: &Expr) -> Result<Expr, JetError> {
        let mut current = e.clone();
        for _ in 0..256 {
            let mut map: HashMap<Arc<Sym>, Expr> = HashMap::new();
            for s in current.symbols() {
                let SymKind::Jet { dep, index } = &s.kind else {
                    continue;
                };
                let mut replacement = None;
                for (a, k, rhs) in &self.entries {
                    if dep == a {
                        if let Some(rest) = index.minus(k) {
                            if replacement.is_some() {
                                return Err(JetError::AmbiguousLeading(s.name.clone()));
                            }
                            replacement = Some(ctx.multi_total_derivative(rhs, &rest));
                        }
                    }
                }
                if let Some(r) = replacement {
                    map.insert(s.clone(), r);
                }
            }
            if map.is_empty() {
                return Ok(current);
            }
            current = substitute(&current, &map);
        }
        Err(JetError::NonTerminating)
    }
}
