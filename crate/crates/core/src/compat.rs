//! Maurer–Cartan compatibility of mu-forms, potential recovery for exact
//! scalar mu, and gauge-factor verification.

use thiserror::Error;

use crate::expr::{
    generic_combination, is_zero, monomials_up_to, solve_linear_system, substitute,
    unknown_params, Expr, Trivalent,
};
use crate::jet::{JetContext, JetError, MultiIndex, SolvedEquation};
use crate::matrix::{ExprMatrix, MatrixError};
use crate::prolong::MuForm;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompatError {
    #[error("mu is not closed: D_{i} lambda_{j} != D_{j} lambda_{i}")]
    NotClosed { i: usize, j: usize },
    #[error("potential recovery requires a scalar mu (diagonal coefficients)")]
    NotScalar,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Compatibility verdict of a mu-form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compatibility {
    /// Residuals vanish identically on all of jet space.
    Everywhere,
    /// Residuals vanish only after restriction to the solution manifold.
    OnSolutionsOnly,
    /// Some residual is provably nonzero (even on solutions, when an
    /// equation was supplied).
    Incompatible,
    /// The zero test could not decide some residual.
    Undecided,
}

impl std::fmt::Display for Compatibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Compatibility::Everywhere => "compatible everywhere",
            Compatibility::OnSolutionsOnly => "compatible on solutions only",
            Compatibility::Incompatible => "incompatible",
            Compatibility::Undecided => "undecided",
        })
    }
}

/// Pairwise residuals `D_i Lambda_k - D_k Lambda_i + [Lambda_i, Lambda_k]`
/// plus the derived verdict.
#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    /// `((i, k), residual)` for all `i < k`.
    pub residuals: Vec<((usize, usize), ExprMatrix)>,
    /// Residuals restricted to the solution manifold, when an equation was
    /// supplied.
    pub restricted: Option<Vec<((usize, usize), ExprMatrix)>>,
    pub verdict: Compatibility,
}

/// Check the horizontal Maurer–Cartan condition for `mu`. With a single
/// independent variable there are no pairs and the condition holds
/// vacuously. When an equation is supplied, residuals that fail everywhere
/// are retried after restriction to its solution manifold.
pub fn maurer_cartan_check(
    ctx: &JetContext,
    mu: &MuForm,
    eq: Option<&SolvedEquation>,
) -> Result<CompatibilityReport, CompatError> {
    let q = ctx.q();
    let mut residuals = Vec::new();
    for i in 0..q {
        for k in (i + 1)..q {
            let d_i = mu.mat(k).total_derivative(ctx, i);
            let d_k = mu.mat(i).total_derivative(ctx, k);
            let residual = d_i.sub(&d_k).add(&mu.mat(i).commutator(mu.mat(k)));
            residuals.push(((i, k), residual));
        }
    }
    let everywhere = residuals
        .iter()
        .map(|(_, m)| m.all_zero())
        .fold(Trivalent::Yes, Trivalent::and);
    if everywhere == Trivalent::Yes {
        return Ok(CompatibilityReport {
            residuals,
            restricted: eq.map(|_| Vec::new()),
            verdict: Compatibility::Everywhere,
        });
    }
    if let Some(eq) = eq {
        let mut restricted = Vec::new();
        for ((i, k), m) in &residuals {
            let mut rm = ExprMatrix::zero(m.n());
            for r in 0..m.n() {
                for c in 0..m.n() {
                    rm.set(r, c, eq.restrict(ctx, m.get(r, c))?);
                }
            }
            restricted.push(((*i, *k), rm));
        }
        let on_solutions = restricted
            .iter()
            .map(|(_, m)| m.all_zero())
            .fold(Trivalent::Yes, Trivalent::and);
        let verdict = match (everywhere, on_solutions) {
            (_, Trivalent::Yes) => Compatibility::OnSolutionsOnly,
            (_, Trivalent::No) => Compatibility::Incompatible,
            _ => Compatibility::Undecided,
        };
        return Ok(CompatibilityReport {
            residuals,
            restricted: Some(restricted),
            verdict,
        });
    }
    let verdict = match everywhere {
        Trivalent::No => Compatibility::Incompatible,
        _ => Compatibility::Undecided,
    };
    Ok(CompatibilityReport {
        residuals,
        restricted: None,
        verdict,
    })
}

/// Recover a potential `Phi` with `D_i Phi = lambda_i` for an exact scalar
/// mu, by an undetermined-coefficient ansatz over the polynomial/elementary
/// fragment spanned by the coefficients' own building blocks. Returns
/// `Ok(None)` when the fragment contains no solution.
pub fn find_potential(ctx: &JetContext, mu: &MuForm) -> Result<Option<Expr>, CompatError> {
    let Some(lambdas) = mu.as_scalars() else {
        return Err(CompatError::NotScalar);
    };
    // Closedness must hold identically.
    for i in 0..ctx.q() {
        for j in (i + 1)..ctx.q() {
            let r = ctx.total_derivative(&lambdas[j], i) - ctx.total_derivative(&lambdas[i], j);
            if is_zero(&r) == Trivalent::No {
                return Err(CompatError::NotClosed { i, j });
            }
        }
    }
    if lambdas.iter().all(|l| l.is_zero_const()) {
        return Ok(Some(Expr::zero()));
    }

    // Ansatz generators: all coordinates up to the coefficients' jet order,
    // plus any non-polynomial subterms (exp/log/... applications) that show
    // up in the coefficients themselves.
    let max_order = lambdas.iter().map(|l| l.jet_order()).max().unwrap_or(0);
    let mut gens: Vec<Expr> = Vec::new();
    for i in 0..ctx.q() {
        gens.push(ctx.x(i));
    }
    for a in 0..ctx.p() {
        gens.push(ctx.u(a));
        for ord in 1..=max_order {
            for j in MultiIndex::all_of_order(ctx.q(), ord) {
                gens.push(ctx.jet(a, &j));
            }
        }
    }
    for l in &lambdas {
        collect_function_atoms(l, &mut gens);
    }
    let max_degree = lambdas
        .iter()
        .map(polynomial_degree_estimate)
        .max()
        .unwrap_or(1)
        + 1;

    let monos = monomials_up_to(&gens, max_degree.min(5));
    let coeffs = unknown_params(monos.len(), "c");
    let ansatz = generic_combination(&monos, &coeffs);
    let residuals: Vec<Expr> = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| ctx.total_derivative(&ansatz, i) - l)
        .collect();
    let Some(map) = solve_linear_system(&residuals, &coeffs) else {
        return Ok(None);
    };
    let phi = substitute(&ansatz, &map);
    // Verify the recovery.
    for (i, l) in lambdas.iter().enumerate() {
        if is_zero(&(ctx.total_derivative(&phi, i) - l)) != Trivalent::Yes {
            return Ok(None);
        }
    }
    Ok(Some(phi))
}

fn collect_function_atoms(e: &Expr, out: &mut Vec<Expr>) {
    use crate::expr::Node;
    match e.node() {
        Node::Fun(..) => {
            if !out.contains(e) {
                out.push(e.clone());
            }
        }
        Node::Ker(k) => {
            for a in &k.args {
                collect_function_atoms(a, out);
            }
        }
        Node::Pow(b, _) => collect_function_atoms(b, out),
        Node::Mul(v) | Node::Add(v) => {
            for t in v {
                collect_function_atoms(t, out);
            }
        }
        _ => {}
    }
}

/// Crude degree bound used to size the potential ansatz.
fn polynomial_degree_estimate(e: &Expr) -> u32 {
    use crate::expr::Node;
    match e.node() {
        Node::Num(_) => 0,
        Node::Sym(_) => 1,
        Node::Fun(..) | Node::Ker(_) => 1,
        Node::Pow(b, r) => {
            let base = polynomial_degree_estimate(b);
            let k = num::ToPrimitive::to_u32(&r.ceil().to_integer()).unwrap_or(1);
            base.saturating_mul(k.max(1))
        }
        Node::Mul(v) => v.iter().map(polynomial_degree_estimate).sum(),
        Node::Add(v) => v.iter().map(polynomial_degree_estimate).max().unwrap_or(0),
    }
}

/// Verify `D_i K = -Lambda_i K` for all `i`. The gauge factor must be
/// symbolically invertible.
pub fn gauge_factor_check(
    ctx: &JetContext,
    gauge: &ExprMatrix,
    mu: &MuForm,
) -> Result<Trivalent, CompatError> {
    if is_zero(&gauge.det()) == Trivalent::Yes {
        return Err(CompatError::Matrix(MatrixError::Singular));
    }
    let mut overall = Trivalent::Yes;
    for i in 0..ctx.q() {
        let residual = gauge
            .total_derivative(ctx, i)
            .add(&mu.mat(i).matmul(gauge));
        overall = overall.and(residual.all_zero());
    }
    Ok(overall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn exact_scalar_is_compatible() {
        // mu = D_1(Phi) dx1 + D_2(Phi) dx2 for Phi = x1 x2 (names x, y).
        let ctx = JetContext::with_vars(&["x", "y"], &["u"], 2).unwrap();
        let t = ctx.table().clone();
        let mu = MuForm::from_scalars(
            &ctx,
            &[parse("y", &t).unwrap(), parse("x", &t).unwrap()],
        )
        .unwrap();
        let report = maurer_cartan_check(&ctx, &mu, None).unwrap();
        assert_eq!(report.verdict, Compatibility::Everywhere);
    }

    #[test]
    fn constant_pair_incompatible() {
        let ctx = JetContext::with_vars(&["x", "y"], &["u1", "u2"], 1).unwrap();
        let l1 = ExprMatrix::from_rows(vec![
            vec![Expr::zero(), Expr::one()],
            vec![Expr::zero(), Expr::zero()],
        ])
        .unwrap();
        let l2 = ExprMatrix::from_rows(vec![
            vec![Expr::one(), Expr::zero()],
            vec![Expr::zero(), Expr::int(-1)],
        ])
        .unwrap();
        let mu = MuForm::new(&ctx, vec![l1, l2]).unwrap();
        let report = maurer_cartan_check(&ctx, &mu, None).unwrap();
        assert_eq!(report.verdict, Compatibility::Incompatible);
        // residual is [[0,-2],[0,0]]
        let expected = ExprMatrix::from_rows(vec![
            vec![Expr::zero(), Expr::int(-2)],
            vec![Expr::zero(), Expr::zero()],
        ])
        .unwrap();
        assert_eq!(report.residuals[0].1, expected);
    }

    #[test]
    fn single_variable_vacuous() {
        let ctx = JetContext::with_vars(&["x"], &["u"], 1).unwrap();
        let mu = MuForm::from_lambda(&ctx, &parse("u", ctx.table()).unwrap()).unwrap();
        let report = maurer_cartan_check(&ctx, &mu, None).unwrap();
        assert_eq!(report.verdict, Compatibility::Everywhere);
        assert!(report.residuals.is_empty());
    }

    #[test]
    fn potential_recovery() {
        let ctx = JetContext::with_vars(&["x"], &["u"], 1).unwrap();
        let t = ctx.table().clone();
        // mu = 2x dx -> Phi = x^2
        let mu = MuForm::from_lambda(&ctx, &parse("2*x", &t).unwrap()).unwrap();
        let phi = find_potential(&ctx, &mu).unwrap().unwrap();
        assert_eq!(phi, parse("x^2", &t).unwrap());
        // mu = 0 -> Phi = 0
        let mu0 = MuForm::zero(&ctx);
        assert_eq!(find_potential(&ctx, &mu0).unwrap(), Some(Expr::zero()));
        // mu = u_x dx -> Phi = u
        let mux = MuForm::from_lambda(&ctx, &parse("u_x", &t).unwrap()).unwrap();
        let phiu = find_potential(&ctx, &mux).unwrap().unwrap();
        assert_eq!(phiu, parse("u", &t).unwrap());
    }

    #[test]
    fn potential_rejects_nonclosed() {
        // lambda_1 = y-only dependence mismatch: D_y(0) != D_x(x) -> not closed.
        let ctx = JetContext::with_vars(&["x", "y"], &["u"], 1).unwrap();
        let t = ctx.table().clone();
        let mu = MuForm::from_scalars(&ctx, &[parse("y", &t).unwrap(), Expr::zero()]).unwrap();
        assert!(matches!(
            find_potential(&ctx, &mu),
            Err(CompatError::NotClosed { .. })
        ));
    }

    #[test]
    fn gauge_factor_cases() {
        let ctx = JetContext::with_vars(&["x"], &["u"], 1).unwrap();
        let t = ctx.table().clone();
        // K = e^{-x}, mu = 1 dx: D_x K = -K.
        let gauge = ExprMatrix::scalar(Expr::exp(parse("-x", &t).unwrap()));
        let mu = MuForm::from_lambda(&ctx, &Expr::one()).unwrap();
        assert_eq!(gauge_factor_check(&ctx, &gauge, &mu).unwrap(), Trivalent::Yes);
        // K = I, mu = 0.
        let idm = ExprMatrix::identity(1);
        let mu0 = MuForm::zero(&ctx);
        assert_eq!(gauge_factor_check(&ctx, &idm, &mu0).unwrap(), Trivalent::Yes);
        // K = I, mu = dx: residual 1.
        assert_eq!(gauge_factor_check(&ctx, &idm, &mu).unwrap(), Trivalent::No);
        // singular K rejected
        let sing = ExprMatrix::scalar(Expr::zero());
        assert!(gauge_factor_check(&ctx, &sing, &mu).is_err());
    }
}
