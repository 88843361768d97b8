//! Variational structure: Euler–Lagrange operator, variational lambda/mu
//! symmetries, characteristic factorization, twisted conservation-law
//! residuals, and integrating-factor verification.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::expr::{
    diff, generic_combination, is_zero, monomials_up_to, solve_linear, substitute, unknown_params,
    Expr, SymKind, Trivalent,
};
use crate::jet::{JetContext, JetError, MultiIndex, SolvedEquation};
use crate::prolong::{
    lambda_prolong_generalized, MuForm, PointVectorField, ProlongError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationalError {
    #[error("this operation requires a single independent variable")]
    NeedsOde,
    #[error("the Lagrangian must be first order for this operation (got order {0})")]
    NeedsFirstOrder(usize),
    #[error("expected {expected} current component(s), got {got}")]
    Arity { expected: usize, got: usize },
    #[error("matrix-valued mu is not supported by the conservation residual; supply scalar coefficients")]
    MatrixMu,
    #[error(transparent)]
    Prolong(#[from] ProlongError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// A Lagrangian density with its derived jet order.
#[derive(Debug, Clone, PartialEq)]
pub struct Lagrangian {
    expr: Expr,
    order: usize,
}

impl Lagrangian {
    pub fn new(expr: Expr) -> Self {
        let order = expr.jet_order();
        Lagrangian { expr, order }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// Collect the distinct multi-indices `J` (including the empty one) with
/// `u^a_J` present in `e`, per dependent variable.
fn jet_occurrences(e: &Expr, p: usize) -> Vec<BTreeSet<MultiIndex>> {
    let mut out = vec![BTreeSet::new(); p];
    for s in e.symbols() {
        match &s.kind {
            SymKind::Dependent { index } => {
                out[*index].insert(MultiIndex::empty());
            }
            SymKind::Jet { dep, index } => {
                out[*dep].insert(index.clone());
            }
            _ => {}
        }
    }
    out
}

/// Euler–Lagrange expressions `E_a[L] = sum_J (-1)^{|J|} D_J (dL/du^a_J)`,
/// one per dependent variable.
pub fn euler_lagrange(ctx: &JetContext, lagrangian: &Lagrangian) -> Vec<Expr> {
    let occ = jet_occurrences(&lagrangian.expr, ctx.p());
    (0..ctx.p())
        .map(|a| {
            let mut terms = Vec::new();
            for j in &occ[a] {
                let sym = ctx.jet_sym(a, j);
                let partial = diff(&lagrangian.expr, &sym);
                if partial.is_zero_const() {
                    continue;
                }
                let derived = ctx.multi_total_derivative(&partial, j);
                terms.push(if j.order() % 2 == 0 {
                    derived
                } else {
                    derived.neg()
                });
            }
            Expr::add_all(terms)
        })
        .collect()
}

/// Variational derivative of an arbitrary expression in the scalar case
/// (the Euler–Lagrange operator applied to it).
pub fn variational_derivative(ctx: &JetContext, e: &Expr) -> Vec<Expr> {
    euler_lagrange(ctx, &Lagrangian::new(e.clone()))
}

/// Check the variational lambda-symmetry condition
/// `Y(L) + L (D_x + lambda) xi = (D_x + lambda) B`.
pub fn check_variational_lambda(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    x: &PointVectorField,
    lambda: &Expr,
    b: &Expr,
) -> Result<Trivalent, VariationalError> {
    if ctx.q() != 1 {
        return Err(VariationalError::NeedsOde);
    }
    let order = lagrangian.order.max(1);
    let y = lambda_prolong_generalized(ctx, x, lambda, order)?;
    let xi = x.xi()[0].clone();
    let d_lambda = |e: &Expr| ctx.total_derivative(e, 0) + lambda * e;
    let residual = y.apply(ctx, &lagrangian.expr) + &lagrangian.expr * d_lambda(&xi) - d_lambda(b);
    Ok(is_zero(&residual))
}

/// Check the characteristic factorization `Q E[L] = (D_x + lambda) P`.
pub fn check_characteristic_factorization(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    x: &PointVectorField,
    lambda: &Expr,
    p_expr: &Expr,
) -> Result<Trivalent, VariationalError> {
    if ctx.q() != 1 {
        return Err(VariationalError::NeedsOde);
    }
    let q = x.characteristic(ctx);
    let el = euler_lagrange(ctx, lagrangian);
    let lhs = Expr::add_all(q.iter().zip(&el).map(|(qa, ea)| qa * ea));
    let rhs = ctx.total_derivative(p_expr, 0) + lambda * p_expr;
    Ok(is_zero(&(lhs - rhs)))
}

/// Verdict of a conservation-law residual check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConservedVerdict {
    Conserved,
    NotConserved,
    Undecided,
    /// The Euler–Lagrange equation could not be put in solved form; only
    /// the unrestricted residual is reported.
    UnrestrictedOnly,
}

impl std::fmt::Display for ConservedVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConservedVerdict::Conserved => "conserved",
            ConservedVerdict::NotConserved => "not conserved",
            ConservedVerdict::Undecided => "undecided",
            ConservedVerdict::UnrestrictedOnly => "unrestricted only",
        })
    }
}

/// Candidate current, its residual before and after restriction to the
/// Euler–Lagrange solutions, and the verdict.
#[derive(Debug, Clone)]
pub struct ConservationReport {
    /// The current(s): `Pi` in the single-variable case, `T^i` in general.
    pub current: Vec<Expr>,
    pub residual: Expr,
    pub restricted_residual: Option<Expr>,
    pub verdict: ConservedVerdict,
    /// The solved-form Euler–Lagrange equation used for restriction.
    pub euler_lagrange_solved: Option<SolvedEquation>,
}

fn verdict_of(restricted: &Expr) -> ConservedVerdict {
    match is_zero(restricted) {
        Trivalent::Yes => ConservedVerdict::Conserved,
        Trivalent::No => ConservedVerdict::NotConserved,
        Trivalent::Unknown => ConservedVerdict::Undecided,
    }
}

/// Try to solve `E_a[L] = 0` for the leading second derivatives
/// `u^a_{ii}`: pick, per dependent variable, a coordinate the expression is
/// linear in with a symbolically invertible coefficient.
fn solve_euler_lagrange(
    ctx: &JetContext,
    el: &[Expr],
) -> Option<SolvedEquation> {
    let mut entries = Vec::new();
    for (a, e) in el.iter().enumerate() {
        if e.is_zero_const() {
            continue;
        }
        let mut found = None;
        'outer: for i in 0..ctx.q() {
            let lead = MultiIndex::new(vec![i, i]);
            let sym = ctx.jet_sym(a, &lead);
            let coeff = diff(e, &sym);
            if coeff.is_zero_const() || coeff.contains_sym(&sym) {
                continue;
            }
            if is_zero(&coeff) == Trivalent::Yes {
                continue;
            }
            let mut map = HashMap::new();
            map.insert(sym.clone(), Expr::zero());
            let rest = substitute(e, &map);
            if rest.contains_sym(&sym) {
                continue 'outer;
            }
            let rhs = rest.neg() * coeff.recip();
            found = Some((a, lead, rhs));
            break;
        }
        entries.push(found?);
    }
    if entries.is_empty() {
        return None;
    }
    SolvedEquation::new(ctx, entries).ok()
}

/// Lambda-conservation residual for a first-order Lagrangian in one
/// independent variable: with the Poincaré–Cartan form
/// `Theta = L dx + (dL/du_x) theta`, the current is
/// `Pi = X^{(1)} ⌋ Theta - R = xi L + Q dL/du_x - R` and the residual is
/// `D_x Pi + lambda Pi`, restricted to the Euler–Lagrange solutions.
pub fn lambda_conservation_residual(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    x: &PointVectorField,
    lambda: &Expr,
    r: &Expr,
) -> Result<ConservationReport, VariationalError> {
    if ctx.q() != 1 {
        return Err(VariationalError::NeedsOde);
    }
    if lagrangian.order > 1 {
        return Err(VariationalError::NeedsFirstOrder(lagrangian.order));
    }
    let xi = x.xi()[0].clone();
    let q = x.characteristic(ctx);
    let mut pi = &xi * &lagrangian.expr - r;
    for (a, qa) in q.iter().enumerate() {
        let ux = ctx.jet_sym(a, &MultiIndex::single(0));
        pi = pi + qa * diff(&lagrangian.expr, &ux);
    }
    let residual = ctx.total_derivative(&pi, 0) + lambda * &pi;
    // Identically vanishing residuals are conserved without restriction
    // (covers empty or degenerate Lagrangians).
    if is_zero(&residual) == Trivalent::Yes {
        return Ok(ConservationReport {
            current: vec![pi],
            residual: Expr::zero(),
            restricted_residual: Some(Expr::zero()),
            verdict: ConservedVerdict::Conserved,
            euler_lagrange_solved: None,
        });
    }
    let el = euler_lagrange(ctx, lagrangian);
    match solve_euler_lagrange(ctx, &el) {
        Some(eq) => {
            let restricted = eq.restrict(ctx, &residual)?;
            let verdict = verdict_of(&restricted);
            Ok(ConservationReport {
                current: vec![pi],
                residual,
                restricted_residual: Some(restricted),
                verdict,
                euler_lagrange_solved: Some(eq),
            })
        }
        None => Ok(ConservationReport {
            current: vec![pi],
            residual,
            restricted_residual: None,
            verdict: ConservedVerdict::UnrestrictedOnly,
            euler_lagrange_solved: None,
        }),
    }
}

/// Mu-conservation residual for a first-order Lagrangian:
/// `sum_i (D_i + lambda_i)(dL/du^a_i Q^a + xi^i L - R^i)`, restricted to
/// the Euler–Lagrange solutions when they can be solved. The mu must act by
/// scalars (`Lambda_i = lambda_i I`).
pub fn mu_conservation_residual(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    x: &PointVectorField,
    mu: &MuForm,
    r: &[Expr],
) -> Result<ConservationReport, VariationalError> {
    if lagrangian.order > 1 {
        return Err(VariationalError::NeedsFirstOrder(lagrangian.order));
    }
    if r.len() != ctx.q() {
        return Err(VariationalError::Arity {
            expected: ctx.q(),
            got: r.len(),
        });
    }
    let Some(lambdas) = mu.as_scalars() else {
        return Err(VariationalError::MatrixMu);
    };
    let q_char = x.characteristic(ctx);
    let mut currents = Vec::with_capacity(ctx.q());
    for (i, ri) in r.iter().enumerate() {
        let mut t_i = &x.xi()[i] * &lagrangian.expr - ri;
        for (a, qa) in q_char.iter().enumerate() {
            let ui = ctx.jet_sym(a, &MultiIndex::single(i));
            t_i = t_i + diff(&lagrangian.expr, &ui) * qa;
        }
        currents.push(t_i);
    }
    let residual = Expr::add_all(
        currents
            .iter()
            .enumerate()
            .map(|(i, t)| ctx.total_derivative(t, i) + &lambdas[i] * t),
    );
    if is_zero(&residual) == Trivalent::Yes {
        return Ok(ConservationReport {
            current: currents,
            residual: Expr::zero(),
            restricted_residual: Some(Expr::zero()),
            verdict: ConservedVerdict::Conserved,
            euler_lagrange_solved: None,
        });
    }
    let el = euler_lagrange(ctx, lagrangian);
    match solve_euler_lagrange(ctx, &el) {
        Some(eq) => {
            let restricted = eq.restrict(ctx, &residual)?;
            let verdict = verdict_of(&restricted);
            Ok(ConservationReport {
                current: currents,
                residual,
                restricted_residual: Some(restricted),
                verdict,
                euler_lagrange_solved: Some(eq),
            })
        }
        None => Ok(ConservationReport {
            current: currents,
            residual,
            restricted_residual: None,
            verdict: ConservedVerdict::UnrestrictedOnly,
            euler_lagrange_solved: None,
        }),
    }
}

/// Integrating-factor test for `N u_n + M = 0`: true iff the variational
/// derivative of `rho (M + N u_n)` vanishes identically.
pub fn integrating_factor_check(
    ctx: &JetContext,
    n_coeff: &Expr,
    m_coeff: &Expr,
    order: usize,
    rho: &Expr,
) -> Result<Trivalent, VariationalError> {
    if ctx.q() != 1 || ctx.p() != 1 {
        return Err(VariationalError::NeedsOde);
    }
    let u_n = ctx.jet(0, &MultiIndex::new(vec![0; order]));
    let combined = rho * (m_coeff + n_coeff * u_n);
    let vd = variational_derivative(ctx, &combined);
    Ok(vd
        .iter()
        .map(is_zero)
        .fold(Trivalent::Yes, Trivalent::and))
}

/// Search `B` with `(D_x + lambda) B = Y(L) + L (D_x + lambda) xi` as a
/// polynomial in the jet coordinates of bounded degree. `None` when the
/// ansatz contains no solution ("not found", never "false").
pub fn find_boundary_term(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    x: &PointVectorField,
    lambda: &Expr,
    max_degree: u32,
) -> Result<Option<Expr>, VariationalError> {
    if ctx.q() != 1 {
        return Err(VariationalError::NeedsOde);
    }
    let order = lagrangian.order.max(1);
    let y = lambda_prolong_generalized(ctx, x, lambda, order)?;
    let xi = x.xi()[0].clone();
    let target = y.apply(ctx, &lagrangian.expr)
        + &lagrangian.expr * (ctx.total_derivative(&xi, 0) + lambda * &xi);
    solve_twisted_integral(ctx, lambda, &target, order, max_degree)
}

/// Search `P` with `(D_x + lambda) P = Q E[L]`.
pub fn find_factorization_term(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    x: &PointVectorField,
    lambda: &Expr,
    max_degree: u32,
) -> Result<Option<Expr>, VariationalError> {
    if ctx.q() != 1 {
        return Err(VariationalError::NeedsOde);
    }
    let q = x.characteristic(ctx);
    let el = euler_lagrange(ctx, lagrangian);
    let target = Expr::add_all(q.iter().zip(&el).map(|(qa, ea)| qa * ea));
    let order = target.jet_order().max(1);
    solve_twisted_integral(ctx, lambda, &target, order, max_degree)
}

/// Solve `(D_x + lambda) P = target` linearly over a polynomial ansatz in
/// `(x, u, u_x, ..., u_order)`.
fn solve_twisted_integral(
    ctx: &JetContext,
    lambda: &Expr,
    target: &Expr,
    order: usize,
    max_degree: u32,
) -> Result<Option<Expr>, VariationalError> {
    let mut vars = vec![ctx.x(0)];
    for a in 0..ctx.p() {
        vars.push(ctx.u(a));
        for ord in 1..=order {
            vars.push(ctx.jet(a, &MultiIndex::new(vec![0; ord])));
        }
    }
    let monos = monomials_up_to(&vars, max_degree);
    let coeffs = unknown_params(monos.len(), "c");
    let ansatz = generic_combination(&monos, &coeffs);
    let residual = ctx.total_derivative(&ansatz, 0) + lambda * &ansatz - target;
    let Some(map) = solve_linear(&residual, &coeffs) else {
        return Ok(None);
    };
    Ok(Some(substitute(&ansatz, &map)))
}
