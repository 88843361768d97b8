//! Differential invariants, invariants-by-differentiation, order reduction
//! of scalar ODEs by twisted symmetries, change-of-variables transport of
//! lambda, and the splitting matrices for first-order systems.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{
    diff, is_zero, monomials_up_to, nullspace, substitute, unknown_params, Expr, Sym, SymKind,
    SymbolTable, Trivalent,
};
use crate::jet::{JetContext, JetError, MultiIndex, SolvedEquation};
use crate::matrix::ExprMatrix;
use crate::prolong::{ProlongError, ProlongedField};
use crate::symmetry::{SymmetryError, Verdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("D_x eta vanishes identically; invariants-by-differentiation undefined")]
    EtaDerivativeZero,
    #[error("`{0}` is not an invariant of the field (residual `{1}`)")]
    NotInvariant(String, String),
    #[error("reduction requires a single scalar ODE")]
    NeedsScalarOde,
    #[error("the supplied pair is not verified as a lambda-symmetry of the equation (verdict: {0})")]
    NotASymmetry(String),
    #[error("D_x of the new independent variable vanishes identically")]
    ChangeOfVariablesSingular,
    #[error("elimination failed: {0}")]
    Elimination(String),
    #[error("expected {expected} coordinate function(s), got {got}")]
    Arity { expected: usize, got: usize },
    #[error(transparent)]
    Prolong(#[from] ProlongError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

/// Check `Y(I) = 0`; the field auto-extends to the order of `I`.
pub fn verify_invariant(ctx: &JetContext, y: &ProlongedField, inv: &Expr) -> Trivalent {
    is_zero(&y.apply(ctx, inv))
}

/// Invariants-by-differentiation: `rho = (D_x zeta) / (D_x eta)` is again
/// an invariant of a lambda-prolonged field. The quotient is verified
/// before being returned.
pub fn ibd_next(
    ctx: &JetContext,
    y: &ProlongedField,
    eta: &Expr,
    zeta: &Expr,
) -> Result<Expr, ReduceError> {
    let d_eta = ctx.total_derivative(eta, 0);
    if is_zero(&d_eta) == Trivalent::Yes {
        return Err(ReduceError::EtaDerivativeZero);
    }
    let d_zeta = ctx.total_derivative(zeta, 0);
    let rho = d_zeta * d_eta.recip();
    if verify_invariant(ctx, y, &rho) == Trivalent::No {
        return Err(ReduceError::NotInvariant(
            rho.to_string(),
            y.apply(ctx, &rho).to_string(),
        ));
    }
    Ok(rho)
}

/// An order-0/order-1 invariant pair with its generated tower.
#[derive(Debug, Clone)]
pub struct InvariantPair {
    pub eta: Expr,
    pub zeta: Expr,
    /// `tower[0] = rho_2 = d zeta / d eta`, and so on.
    pub tower: Vec<Expr>,
}

impl InvariantPair {
    /// Verify the pair against the field and build the tower up to jet
    /// order `upto` (the tower has `upto - 1` entries for an order-`upto`
    /// equation).
    pub fn new(
        ctx: &JetContext,
        y: &ProlongedField,
        eta: Expr,
        zeta: Expr,
        upto: usize,
    ) -> Result<Self, ReduceError> {
        for (name, e) in [("eta", &eta), ("zeta", &zeta)] {
            if verify_invariant(ctx, y, e) == Trivalent::No {
                return Err(ReduceError::NotInvariant(
                    format!("{name} = {e}"),
                    y.apply(ctx, e).to_string(),
                ));
            }
        }
        let d_eta = ctx.total_derivative(&eta, 0);
        if is_zero(&d_eta) == Trivalent::Yes {
            return Err(ReduceError::EtaDerivativeZero);
        }
        let mut tower = Vec::new();
        let mut current = zeta.clone();
        for _ in 1..upto {
            let next = ibd_next(ctx, y, &eta, &current)?;
            tower.push(next.clone());
            current = next;
        }
        Ok(InvariantPair { eta, zeta, tower })
    }
}

/// The reduced equation `d^{n-1} zeta / d eta^{n-1} = rhs(eta, zeta, w_2,
/// ..., w_{n-1})`, expressed in fresh symbols for the invariants.
#[derive(Debug, Clone)]
pub struct ReducedEquation {
    /// Order of the reduced equation (`n - 1`).
    pub order: usize,
    /// Fresh symbols standing for `eta`, `zeta`, `w_2`, ...
    pub symbols: Vec<Arc<Sym>>,
    /// Invariant expressions on jet space, parallel to `symbols`.
    pub invariants: Vec<Expr>,
    /// Right-hand side in the fresh symbols.
    pub rhs: Expr,
}

impl std::fmt::Display for ReducedEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.order == 1 {
            write!(f, "d(zeta)/d(eta) = {}", self.rhs)
        } else {
            write!(f, "d^{}(zeta)/d(eta)^{} = {}", self.order, self.order, self.rhs)
        }
    }
}

/// Sequential solved-form elimination: solve each relation `inv_j = s_j`
/// for one jet coordinate it is linear in (highest order first), substitute
/// into `target`, and require that only fresh symbols remain.
fn eliminate(
    ctx: &JetContext,
    target: &Expr,
    relations: &[(Expr, Arc<Sym>)],
) -> Result<Expr, ReduceError> {
    // Coordinates we are allowed to eliminate: x, u, u_x, ..., ordered by
    // descending jet order so lower-order relations stay usable.
    let mut coords: Vec<Arc<Sym>> = Vec::new();
    let max_order = relations
        .iter()
        .map(|(e, _)| e.jet_order())
        .max()
        .unwrap_or(0)
        .max(target.jet_order());
    for ord in (1..=max_order).rev() {
        coords.push(ctx.jet_sym(0, &MultiIndex::new(vec![0; ord])));
    }
    coords.push(ctx.table().dependent(0).expect("dependent"));
    coords.push(ctx.table().independent(0).expect("independent"));

    let mut solved: HashMap<Arc<Sym>, Expr> = HashMap::new();
    let mut pending: Vec<(Expr, Arc<Sym>)> = relations.to_vec();
    // Greedy triangular pass.
    loop {
        let mut progressed = false;
        let mut remaining = Vec::new();
        for (inv, fresh) in pending {
            let inv_now = substitute(&inv, &solved);
            let mut done = false;
            for c in &coords {
                if solved.contains_key(c) || !inv_now.contains_sym(c) {
                    continue;
                }
                // Linear in c? inv = A*c + B with A, B free of c.
                let a = diff(&inv_now, c);
                if a.contains_sym(c) || is_zero(&a) == Trivalent::Yes {
                    continue;
                }
                let b = substitute(&inv_now, &{
                    let mut m = HashMap::new();
                    m.insert(c.clone(), Expr::zero());
                    m
                });
                // c = (fresh - B) / A
                let value = (Expr::sym(&fresh) - b) * a.recip();
                solved.insert(c.clone(), value);
                // Re-substitute into previously solved values.
                let snapshot: Vec<(Arc<Sym>, Expr)> =
                    solved.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                for (k, v) in snapshot {
                    if k != *c {
                        let mut m = HashMap::new();
                        m.insert(c.clone(), solved[c].clone());
                        solved.insert(k, substitute(&v, &m));
                    }
                }
                progressed = true;
                done = true;
                break;
            }
            if !done {
                remaining.push((inv, fresh));
            }
        }
        pending = remaining;
        if pending.is_empty() || !progressed {
            break;
        }
    }
    if !pending.is_empty() {
        return Err(ReduceError::Elimination(format!(
            "could not solve `{}` for a jet coordinate",
            pending[0].0
        )));
    }
    let result = substitute(target, &solved);
    // Only fresh symbols (and parameters) may survive.
    for s in result.symbols() {
        let fresh = relations.iter().any(|(_, f)| f == &s);
        let param = matches!(s.kind, SymKind::Parameter);
        if !fresh && !param {
            return Err(ReduceError::Elimination(format!(
                "residual dependence on `{}` after substitution",
                s.name
            )));
        }
    }
    Ok(result)
}

/// Reduce a scalar ODE of order `n` by a verified lambda-symmetry with
/// invariants `(eta, zeta)` to an order-`(n-1)` relation among the
/// invariants.
pub fn reduce_order(
    ctx: &JetContext,
    eq: &SolvedEquation,
    x: &crate::prolong::PointVectorField,
    lambda: &Expr,
    eta: &Expr,
    zeta: &Expr,
) -> Result<ReducedEquation, ReduceError> {
    if ctx.q() != 1 || ctx.p() != 1 || eq.entries().len() != 1 {
        return Err(ReduceError::NeedsScalarOde);
    }
    let n = eq.order();
    // Preconditions: (x, lambda) is a lambda-symmetry, (eta, zeta) are
    // invariants.
    let verdict = crate::symmetry::check_symmetry(
        ctx,
        eq,
        x,
        &crate::prolong::Twist::Lambda(lambda.clone()),
        n,
    )?;
    if verdict.verdict != Verdict::Symmetry {
        return Err(ReduceError::NotASymmetry(verdict.verdict.to_string()));
    }
    let y = crate::prolong::lambda_prolong_generalized(ctx, x, lambda, n)?;
    let pair = InvariantPair::new(ctx, &y, eta.clone(), zeta.clone(), n)?;

    // The top tower entry, restricted to the solution manifold, is the
    // reduced right-hand side; the lower entries are the new derivative
    // coordinates.
    let top = pair
        .tower
        .last()
        .cloned()
        .unwrap_or_else(|| pair.zeta.clone());
    let restricted = eq.restrict(ctx, &top)?;

    // Fresh symbols for eta, zeta, w_2, ..., w_{n-1}.
    let mut fresh_table = SymbolTable::new();
    let mut names = vec!["eta".to_string(), "zeta".to_string()];
    for j in 2..n {
        names.push(format!("w{j}"));
    }
    let symbols: Vec<Arc<Sym>> = names
        .iter()
        .map(|n| fresh_table.declare_parameter(n).expect("fresh name"))
        .collect();
    let mut invariants = vec![pair.eta.clone(), pair.zeta.clone()];
    invariants.extend(pair.tower.iter().take(n.saturating_sub(2)).cloned());
    let relations: Vec<(Expr, Arc<Sym>)> = invariants
        .iter()
        .cloned()
        .zip(symbols.iter().cloned())
        .collect();

    let rhs = eliminate(ctx, &restricted, &relations)?;
    Ok(ReducedEquation {
        order: n - 1,
        symbols,
        invariants,
        rhs,
    })
}

/// Transport of lambda under a change of the independent variable:
/// `lambda_hat = lambda / (D_x y)`.
pub fn lambda_change_of_variables(
    ctx: &JetContext,
    lambda: &Expr,
    new_independent: &Expr,
) -> Result<Expr, ReduceError> {
    let dy = ctx.total_derivative(new_independent, 0);
    if is_zero(&dy) == Trivalent::Yes {
        return Err(ReduceError::ChangeOfVariablesSingular);
    }
    Ok(lambda * dy.recip())
}

/// Splitting matrices for a first-order system with a mu-symmetry in the
/// adapted coordinates `(y, w^1..w^{n-1}, z)`:
/// `M^(a) = (dw^a/du^b) (Lambda Q)^b`, `M^(n) = (dz/du^b) (Lambda Q)^b`.
#[derive(Debug, Clone)]
pub struct RhoMatrices {
    /// `M^(a)` for the reduced coordinates `w^a`.
    pub m_w: Vec<Expr>,
    /// `M^(n)` for the reconstruction coordinate `z`.
    pub m_z: Expr,
    /// Splits iff every `M^(a)` (a < n) vanishes on the solution manifold.
    pub splits: Trivalent,
}

pub fn rho_matrices(
    ctx: &JetContext,
    eq: &SolvedEquation,
    x: &crate::prolong::PointVectorField,
    lambda_mat: &ExprMatrix,
    ws: &[Expr],
    z: &Expr,
) -> Result<RhoMatrices, ReduceError> {
    if lambda_mat.n() != ctx.p() {
        return Err(ReduceError::Arity {
            expected: ctx.p(),
            got: lambda_mat.n(),
        });
    }
    let q_char = x.characteristic(ctx);
    let lam_q = lambda_mat.mul_vec(&q_char);
    let grad_dot = |w: &Expr| -> Result<Expr, ReduceError> {
        let mut acc = Expr::zero();
        for (b, lq) in lam_q.iter().enumerate() {
            let ub = ctx.table().dependent(b).expect("dependent");
            acc = acc + diff(w, &ub) * lq;
        }
        Ok(acc)
    };
    let mut m_w = Vec::with_capacity(ws.len());
    for w in ws {
        m_w.push(grad_dot(w)?);
    }
    let m_z = grad_dot(z)?;
    let mut splits = Trivalent::Yes;
    for m in &m_w {
        let restricted = eq.restrict(ctx, m)?;
        splits = splits.and(is_zero(&restricted));
    }
    Ok(RhoMatrices { m_w, m_z, splits })
}

/// Ansatz-driven invariant search: polynomials in `(x, u, u_x)` of bounded
/// degree with undetermined coefficients, solved linearly from `Y(I) = 0`.
/// Returns a basis of the solution space (constants excluded).
pub fn search_invariants(
    ctx: &JetContext,
    y: &ProlongedField,
    max_degree: u32,
) -> Vec<Expr> {
    let vars = vec![ctx.x(0), ctx.u(0), ctx.jet(0, &MultiIndex::single(0))];
    let monos = monomials_up_to(&vars, max_degree);
    let coeffs = unknown_params(monos.len(), "c");
    let ansatz = crate::expr::generic_combination(&monos, &coeffs);
    let residual = y.apply(ctx, &ansatz);
    let basis = nullspace(&residual, &coeffs);
    let mut out = Vec::new();
    for sol in basis {
        let map: HashMap<Arc<Sym>, Expr> = sol
            .into_iter()
            .map(|(k, v)| (k, Expr::num(v)))
            .collect();
        let inv = substitute(&ansatz, &map);
        if inv.is_num() {
            continue;
        }
        out.push(inv);
    }
    out
}
