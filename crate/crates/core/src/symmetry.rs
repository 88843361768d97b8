//! Symmetry-condition checking: standard, lambda and mu twists, Lie
//! brackets, the contact-structure characterization of twisted
//! prolongations, the exponential-symmetry correspondence, and the
//! lambda-Liouville condition for dynamical systems.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{diff, is_zero, Expr, Trivalent};
use crate::forms::{DifferentialForm, JetVectorField};
use crate::jet::{JetContext, JetError, MultiIndex, SolvedEquation};
use crate::prolong::{
    lambda_prolong_generalized, mu_prolong, standard_prolong, MuForm, PointVectorField,
    ProlongError, ProlongedField, Twist,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("prolongation order {given} does not match the equation order {expected}")]
    OrderMismatch { given: usize, expected: usize },
    #[error("expected {expected} component(s), got {got}")]
    Arity { expected: usize, got: usize },
    #[error("commutation check requires a single independent variable")]
    NeedsOde,
    #[error("the one-form is not closed on the solution manifold: pair ({i},{j}) has residual `{residual}` ({verdict})")]
    NotClosed {
        i: usize,
        j: usize,
        residual: String,
        verdict: Trivalent,
    },
    #[error("no potential with D_i f = P_i was supplied or found")]
    NoPotential,
    #[error(transparent)]
    Prolong(#[from] ProlongError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Outcome of a symmetry check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Symmetry,
    NotSymmetry,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Symmetry => "symmetry",
            Verdict::NotSymmetry => "not symmetry",
            Verdict::Undecided => "undecided",
        })
    }
}

/// Verdict plus the restricted residuals behind it.
#[derive(Debug, Clone)]
pub struct SymmetryVerdict {
    pub verdict: Verdict,
    /// Residual of each equation component after restriction to the
    /// solution manifold.
    pub residuals: Vec<Expr>,
    /// Indices of components whose residual failed the zero test.
    pub failed_components: Vec<usize>,
}

fn verdict_from_residuals(residuals: Vec<Expr>) -> SymmetryVerdict {
    let mut verdict = Verdict::Symmetry;
    let mut failed = Vec::new();
    for (i, r) in residuals.iter().enumerate() {
        match is_zero(r) {
            Trivalent::Yes => {}
            Trivalent::No => {
                failed.push(i);
                verdict = Verdict::NotSymmetry;
            }
            Trivalent::Unknown => {
                failed.push(i);
                if verdict == Verdict::Symmetry {
                    verdict = Verdict::Undecided;
                }
            }
        }
    }
    SymmetryVerdict {
        verdict,
        residuals,
        failed_components: failed,
    }
}

/// Componentwise commutator `[X,Y]^A = X(Y^A) - Y(X^A)` of vector fields on
/// jet space. Components above the stored tables are treated as absent, so
/// the result is exact on every order both inputs carry.
pub fn lie_bracket(x: &JetVectorField, y: &JetVectorField) -> JetVectorField {
    let q = x.xi.len().max(y.xi.len());
    let mut xi = Vec::with_capacity(q);
    for i in 0..q {
        let ax = x.xi.get(i).cloned().unwrap_or_else(Expr::zero);
        let ay = y.xi.get(i).cloned().unwrap_or_else(Expr::zero);
        xi.push(x.apply(&ay) - y.apply(&ax));
    }
    let mut keys: Vec<(usize, MultiIndex)> = x.comps.keys().cloned().collect();
    keys.extend(y.comps.keys().cloned());
    keys.sort();
    keys.dedup();
    let mut comps = BTreeMap::new();
    for key in keys {
        let ax = x.comps.get(&key).cloned().unwrap_or_else(Expr::zero);
        let ay = y.comps.get(&key).cloned().unwrap_or_else(Expr::zero);
        comps.insert(key, x.apply(&ay) - y.apply(&ax));
    }
    JetVectorField::new(xi, comps)
}

/// Check whether `x` (with the requested twist) is a symmetry of the
/// equation: build the prolongation of order `k`, apply it to each equation
/// expression `E^a = u^a_K - f^a`, restrict to the solution manifold and
/// test the residuals.
pub fn check_symmetry(
    ctx: &JetContext,
    eq: &SolvedEquation,
    x: &PointVectorField,
    twist: &Twist,
    k: usize,
) -> Result<SymmetryVerdict, SymmetryError> {
    if k != eq.order() {
        return Err(SymmetryError::OrderMismatch {
            given: k,
            expected: eq.order(),
        });
    }
    let prolonged = match twist {
        Twist::Standard => standard_prolong(ctx, x, k)?,
        Twist::Lambda(l) => lambda_prolong_generalized(ctx, x, l, k)?,
        Twist::Mu(mu) => mu_prolong(ctx, x, mu, k)?,
    };
    check_prolonged_symmetry(ctx, eq, &prolonged)
}

/// Same check for an already-built field on `J^k M` (any provenance).
pub fn check_prolonged_symmetry(
    ctx: &JetContext,
    eq: &SolvedEquation,
    y: &ProlongedField,
) -> Result<SymmetryVerdict, SymmetryError> {
    let mut residuals = Vec::new();
    for e in eq.components(ctx) {
        let applied = y.apply(ctx, &e);
        residuals.push(eq.restrict(ctx, &applied)?);
    }
    Ok(verdict_from_residuals(residuals))
}

/// Contact-structure characterization of twisted prolongations: `y` is
/// mu-prolonged iff for every contact generator `theta^a_J` (`|J| < k`) the
/// one-form `L_Y theta^a_J + sum_i (Lambda_i)^a_b (Y ⌋ theta^b_J) dx^i` has
/// vanishing horizontal part.
pub fn geometric_characterization(ctx: &JetContext, y: &ProlongedField, mu: &MuForm) -> Trivalent {
    let field = y.as_vector_field();
    let mut overall = Trivalent::Yes;
    for a in 0..ctx.p() {
        for ord in 0..y.order() {
            for j in MultiIndex::all_of_order(ctx.q(), ord) {
                let theta_a = DifferentialForm::contact(ctx, a, &j);
                let mut form = theta_a.lie_derivative(&field);
                for i in 0..ctx.q() {
                    for b in 0..ctx.p() {
                        let lam = mu.mat(i).get(a, b);
                        if lam.is_zero_const() {
                            continue;
                        }
                        let theta_b = DifferentialForm::contact(ctx, b, &j);
                        let contracted = theta_b
                            .interior_product(&field)
                            .expect("contact forms have degree 1")
                            .coeff(&crate::forms::WedgeMono::scalar());
                        form = form.add(&DifferentialForm::dx(i).scale(&(lam * contracted)));
                    }
                }
                let split = form
                    .contact_reduce(ctx)
                    .expect("characterization form has degree 1");
                for h in &split.horizontal {
                    overall = overall.and(is_zero(h));
                    if overall == Trivalent::No {
                        return overall;
                    }
                }
            }
        }
    }
    overall
}

/// Commutation characterization for the single-variable case: `y` is
/// lambda-prolonged iff `([D_x, Y] - lambda Y) ⌋ theta^a_j = 0` for every
/// generator of order `j <= k - 1`.
pub fn lambda_commutation_check(
    ctx: &JetContext,
    y: &ProlongedField,
    lambda: &Expr,
) -> Result<Trivalent, SymmetryError> {
    if ctx.q() != 1 {
        return Err(SymmetryError::NeedsOde);
    }
    let xi = y.base().xi()[0].clone();
    let dx_xi = ctx.total_derivative(&xi, 0);
    let mut overall = Trivalent::Yes;
    // With the commutator convention [A,B] = A∘B - B∘A, a field built by
    // the twisted recursion satisfies [Y, D_x] ⌋ theta = lambda (Y ⌋ theta).
    // V = [Y, D_x] - lambda Y has the components
    //   V^x        = -D_x xi - lambda xi
    //   V^{u^a_j}  = Psi^a_{j+1} - D_x Psi^a_j - lambda Psi^a_j
    // and V ⌋ theta^a_j = V^{u^a_j} - u^a_{j+1} V^x.
    let v_x = -(&dx_xi) - lambda * &xi;
    for a in 0..ctx.p() {
        for j in 0..y.order() {
            let mi = MultiIndex::new(vec![0; j]);
            let mi_next = MultiIndex::new(vec![0; j + 1]);
            let psi_j = y.psi(a, &mi);
            let psi_next = y.psi(a, &mi_next);
            let v_uj = &psi_next - ctx.total_derivative(&psi_j, 0) - lambda * &psi_j;
            let contraction = v_uj - ctx.jet(a, &mi_next) * &v_x;
            overall = overall.and(is_zero(&contraction));
            if overall == Trivalent::No {
                return Ok(overall);
            }
        }
    }
    Ok(overall)
}

/// Report of the exponential-symmetry correspondence on the exact case
/// `P_i = D_i f`.
#[derive(Debug, Clone)]
pub struct CorrespondenceReport {
    /// Potential actually used.
    pub potential: Expr,
    /// Verdict of the twisted check of the local field.
    pub twisted: SymmetryVerdict,
    /// Verdict of the standard check of the exponential field with
    /// characteristic `e^f Q`.
    pub standard: SymmetryVerdict,
    /// Whether both verdicts agree (the correspondence statement).
    pub agree: bool,
}

/// Verify the correspondence between twisted symmetries and exponential
/// nonlocal symmetries, on the exact subcase: `x0` is a mu-symmetry with
/// `mu = P_i dx^i` iff the field with characteristic `e^f Q0` is a standard
/// (generalized) symmetry, where `D_i f = P_i`.
///
/// `P` must be closed on the solution manifold; the check rejects it
/// otherwise, naming the failing pair. If no potential is supplied, one is
/// searched with [`crate::compat::find_potential`].
pub fn exponential_correspondence(
    ctx: &JetContext,
    eq: &SolvedEquation,
    x0: &PointVectorField,
    p_coeffs: &[Expr],
    potential: Option<&Expr>,
) -> Result<CorrespondenceReport, SymmetryError> {
    if p_coeffs.len() != ctx.q() {
        return Err(SymmetryError::Arity {
            expected: ctx.q(),
            got: p_coeffs.len(),
        });
    }
    // Closedness on the solution manifold.
    for i in 0..ctx.q() {
        for j in (i + 1)..ctx.q() {
            let r = ctx.total_derivative(&p_coeffs[j], i) - ctx.total_derivative(&p_coeffs[i], j);
            let restricted = eq.restrict(ctx, &r)?;
            let verdict = is_zero(&restricted);
            if verdict != Trivalent::Yes {
                return Err(SymmetryError::NotClosed {
                    i,
                    j,
                    residual: restricted.to_string(),
                    verdict,
                });
            }
        }
    }
    // Exactness: find or verify f with D_i f = P_i.
    let f = match potential {
        Some(f) => {
            for (i, p) in p_coeffs.iter().enumerate() {
                let r = ctx.total_derivative(f, i) - p;
                if is_zero(&r) != Trivalent::Yes {
                    return Err(SymmetryError::NoPotential);
                }
            }
            f.clone()
        }
        None => {
            let mu = MuForm::from_scalars(ctx, p_coeffs)?;
            crate::compat::find_potential(ctx, &mu)
                .ok()
                .flatten()
                .ok_or(SymmetryError::NoPotential)?
        }
    };

    let k = eq.order();
    let mu = MuForm::from_scalars(ctx, p_coeffs)?;
    let twisted = check_symmetry(ctx, eq, x0, &Twist::Mu(mu), k)?;

    // Standard check of the generalized vertical field e^f * Q0.
    let ef = Expr::exp(f.clone());
    let q0 = x0.characteristic(ctx);
    let weighted: Vec<Expr> = q0.iter().map(|q| &ef * q).collect();
    let vertical = PointVectorField::vertical(ctx, weighted)?;
    let standard = check_symmetry(ctx, eq, &vertical, &Twist::Standard, k)?;

    let agree = twisted.verdict == standard.verdict;
    Ok(CorrespondenceReport {
        potential: f,
        twisted,
        standard,
        agree,
    })
}

/// Which condition [`lambda_liouville_check`] verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiouvilleMode {
    /// `(d/dx + L_F + lambda) Z + (div F) Z = 0` — the lambda-Liouville
    /// condition.
    Liouville,
    /// `(d/dx + L_F + lambda) Z = 0` — the companion relation satisfied by
    /// lambda-symmetries of the dynamical system.
    Symmetry,
}

/// Check the lambda-Liouville condition for a dynamical system
/// `u^a_x = f^a(x,u)` and a vertical field `Z = z^a d/du^a`. `L_F` is read
/// as the bracket with `f^a d/du^a`, with `d/dx` applied separately.
pub fn lambda_liouville_check(
    ctx: &JetContext,
    rhs: &[Expr],
    z: &[Expr],
    lambda: &Expr,
    mode: LiouvilleMode,
) -> Result<Trivalent, SymmetryError> {
    let p = ctx.p();
    if rhs.len() != p {
        return Err(SymmetryError::Arity {
            expected: p,
            got: rhs.len(),
        });
    }
    if z.len() != p {
        return Err(SymmetryError::Arity {
            expected: p,
            got: z.len(),
        });
    }
    let x_sym = ctx.table().independent(0).expect("independent variable");
    let u_syms: Vec<_> = (0..p)
        .map(|a| ctx.table().dependent(a).expect("dependent variable"))
        .collect();
    let divergence = Expr::add_all((0..p).map(|b| diff(&rhs[b], &u_syms[b])));
    let mut overall = Trivalent::Yes;
    for a in 0..p {
        // [F, Z]^a = sum_b (f^b dZ^a/du^b - z^b df^a/du^b)
        let bracket = Expr::add_all(
            (0..p).map(|b| &rhs[b] * diff(&z[a], &u_syms[b]) - &z[b] * diff(&rhs[a], &u_syms[b])),
        );
        let mut residual = diff(&z[a], &x_sym) + bracket + lambda * &z[a];
        if mode == LiouvilleMode::Liouville {
            residual = residual + &divergence * &z[a];
        }
        overall = overall.and(is_zero(&residual));
    }
    Ok(overall)
}

/// Best-effort search for a polynomial lambda making `x` a lambda-symmetry:
/// candidates are single monomials in `(x, u, u_x)` of total degree at most
/// `max_degree` with small integer coefficients. Returns the first lambda
/// whose check comes back positive.
pub fn search_lambda(
    ctx: &JetContext,
    eq: &SolvedEquation,
    x: &PointVectorField,
    max_degree: u32,
) -> Result<Option<Expr>, SymmetryError> {
    let mut vars = vec![ctx.x(0), ctx.u(0)];
    vars.push(ctx.jet(0, &MultiIndex::single(0)));
    let monos = crate::expr::monomials_up_to(&vars, max_degree);
    let k = eq.order();
    for mono in &monos {
        for c in [1i64, -1, 2, -2, 3, -3] {
            let lambda = Expr::int(c) * mono;
            let verdict = check_symmetry(ctx, eq, x, &Twist::Lambda(lambda.clone()), k)?;
            if verdict.verdict == Verdict::Symmetry {
                return Ok(Some(lambda));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn ctx() -> JetContext {
        JetContext::with_vars(&["x"], &["u"], 2).unwrap()
    }

    fn du(c: &JetContext) -> PointVectorField {
        PointVectorField::new(c, vec![Expr::zero()], vec![Expr::one()]).unwrap()
    }

    fn osc_eq(c: &JetContext) -> SolvedEquation {
        let t = c.table().clone();
        SolvedEquation::from_leading_exprs(
            c,
            vec![(parse("u_xx", &t).unwrap(), parse("u", &t).unwrap())],
        )
        .unwrap()
    }

    #[test]
    fn bracket_examples() {
        let c = ctx();
        let t = c.table().clone();
        // [dx, x du] = du
        let dx = JetVectorField::new(vec![Expr::one()], BTreeMap::new());
        let mut comps = BTreeMap::new();
        comps.insert((0, MultiIndex::empty()), parse("x", &t).unwrap());
        let xdu = JetVectorField::new(vec![Expr::zero()], comps);
        let b = lie_bracket(&dx, &xdu);
        assert_eq!(b.xi[0], Expr::zero());
        assert_eq!(b.comps[&(0, MultiIndex::empty())], Expr::one());
        // [X, X] = 0
        let self_bracket = lie_bracket(&xdu, &xdu);
        assert!(self_bracket.comps.is_empty());
        // [x dx, u du] = 0
        let mut comps2 = BTreeMap::new();
        comps2.insert((0, MultiIndex::empty()), parse("u", &t).unwrap());
        let xdx = JetVectorField::new(vec![parse("x", &t).unwrap()], BTreeMap::new());
        let udu = JetVectorField::new(vec![Expr::zero()], comps2);
        let b2 = lie_bracket(&xdx, &udu);
        assert!(b2.xi[0].is_zero_const());
        assert!(b2.comps.is_empty());
    }

    #[test]
    fn symmetry_check_worked_example() {
        let c = ctx();
        let eq = osc_eq(&c);
        // u_xx = u, X = du, lambda = 1 -> symmetry
        let v = check_symmetry(&c, &eq, &du(&c), &Twist::Lambda(Expr::one()), 2).unwrap();
        assert_eq!(v.verdict, Verdict::Symmetry);
        // untwisted -> not a symmetry, residual -1
        let v2 = check_symmetry(&c, &eq, &du(&c), &Twist::Standard, 2).unwrap();
        assert_eq!(v2.verdict, Verdict::NotSymmetry);
        assert_eq!(v2.residuals, vec![Expr::int(-1)]);
        // u_xx = 0, X = du, untwisted -> symmetry
        let t = c.table().clone();
        let eq0 =
            SolvedEquation::from_leading_exprs(&c, vec![(parse("u_xx", &t).unwrap(), Expr::zero())])
                .unwrap();
        let v3 = check_symmetry(&c, &eq0, &du(&c), &Twist::Standard, 2).unwrap();
        assert_eq!(v3.verdict, Verdict::Symmetry);
        // order mismatch is rejected
        assert!(check_symmetry(&c, &eq, &du(&c), &Twist::Standard, 1).is_err());
    }

    #[test]
    fn characterization_and_commutation() {
        let c = ctx();
        // Standard prolongation with mu = 0 passes.
        let y = standard_prolong(&c, &du(&c), 2).unwrap();
        assert_eq!(
            geometric_characterization(&c, &y, &MuForm::zero(&c)),
            Trivalent::Yes
        );
        // lambda-prolongation of du with lambda = 1 against mu = dx passes.
        let yl = lambda_prolong_generalized(&c, &du(&c), &Expr::one(), 2).unwrap();
        let mu1 = MuForm::from_lambda(&c, &Expr::one()).unwrap();
        assert_eq!(geometric_characterization(&c, &yl, &mu1), Trivalent::Yes);
        // Standard prolongation against mu = dx fails.
        assert_eq!(geometric_characterization(&c, &y, &mu1), Trivalent::No);
        // Commutation: standard with lambda = 0 holds.
        assert_eq!(
            lambda_commutation_check(&c, &y, &Expr::zero()).unwrap(),
            Trivalent::Yes
        );
        // lambda-prolongation of du with lambda = u holds.
        let t = c.table().clone();
        let yu = lambda_prolong_generalized(&c, &du(&c), &parse("u", &t).unwrap(), 2).unwrap();
        assert_eq!(
            lambda_commutation_check(&c, &yu, &parse("u", &t).unwrap()).unwrap(),
            Trivalent::Yes
        );
        // Standard prolongation of x dx + u du against lambda = 1 fails.
        let scaling = PointVectorField::new(
            &c,
            vec![parse("x", &t).unwrap()],
            vec![parse("u", &t).unwrap()],
        )
        .unwrap();
        let ys = standard_prolong(&c, &scaling, 2).unwrap();
        assert_eq!(
            lambda_commutation_check(&c, &ys, &Expr::one()).unwrap(),
            Trivalent::No
        );
    }

    #[test]
    fn exponential_correspondence_cases() {
        let c = ctx();
        let eq = osc_eq(&c);
        let t = c.table().clone();
        // P = 1, f = x: both verdicts positive and agree (e^x solves u''=u).
        let x_expr = parse("x", &t).unwrap();
        let rep =
            exponential_correspondence(&c, &eq, &du(&c), &[Expr::one()], Some(&x_expr)).unwrap();
        assert_eq!(rep.twisted.verdict, Verdict::Symmetry);
        assert_eq!(rep.standard.verdict, Verdict::Symmetry);
        assert!(rep.agree);
        // P = 0: both reduce to the untwisted check.
        let rep0 =
            exponential_correspondence(&c, &eq, &du(&c), &[Expr::zero()], Some(&Expr::zero()))
                .unwrap();
        assert_eq!(rep0.twisted.verdict, Verdict::NotSymmetry);
        assert!(rep0.agree);
        // P = 2 (f = 2x): e^{2x} does not solve u'' = u; both negative.
        let f2 = parse("2*x", &t).unwrap();
        let rep2 =
            exponential_correspondence(&c, &eq, &du(&c), &[Expr::int(2)], Some(&f2)).unwrap();
        assert_eq!(rep2.twisted.verdict, Verdict::NotSymmetry);
        assert_eq!(rep2.standard.verdict, Verdict::NotSymmetry);
        assert!(rep2.agree);
    }

    #[test]
    fn pde_exponential_correspondence() {
        // u_y = u + u_xx admits e^y; X = du with P = (0, 1), f = y.
        let c = JetContext::with_vars(&["x", "y"], &["u"], 2).unwrap();
        let t = c.table().clone();
        let eq = SolvedEquation::from_leading_exprs(
            &c,
            vec![(
                parse("u_y", &t).unwrap(),
                parse("u + u_xx", &t).unwrap(),
            )],
        )
        .unwrap();
        let x0 = PointVectorField::new(
            &c,
            vec![Expr::zero(), Expr::zero()],
            vec![Expr::one()],
        )
        .unwrap();
        let f = parse("y", &t).unwrap();
        let rep = exponential_correspondence(
            &c,
            &eq,
            &x0,
            &[Expr::zero(), Expr::one()],
            Some(&f),
        )
        .unwrap();
        assert_eq!(rep.twisted.verdict, Verdict::Symmetry);
        assert_eq!(rep.standard.verdict, Verdict::Symmetry);
        assert!(rep.agree);
    }

    #[test]
    fn liouville_companion_mode() {
        // F: u_x = u. The dynamical field itself satisfies the companion
        // relation with lambda = 0 but not with lambda = 1.
        let c = JetContext::with_vars(&["x"], &["u"], 1).unwrap();
        let t = c.table().clone();
        let rhs = vec![parse("u", &t).unwrap()];
        let ok = lambda_liouville_check(&c, &rhs, &rhs, &Expr::zero(), LiouvilleMode::Symmetry)
            .unwrap();
        assert_eq!(ok, Trivalent::Yes);
        let bad = lambda_liouville_check(&c, &rhs, &rhs, &Expr::one(), LiouvilleMode::Symmetry)
            .unwrap();
        assert_eq!(bad, Trivalent::No);
    }

    #[test]
    fn liouville_examples() {
        // F: (u1_x, u2_x) = (u2, u1), Z = F vertical, lambda = 0 -> true.
        let c = JetContext::with_vars(&["x"], &["u1", "u2"], 1).unwrap();
        let t = c.table().clone();
        let rhs = vec![parse("u2", &t).unwrap(), parse("u1", &t).unwrap()];
        let verdict =
            lambda_liouville_check(&c, &rhs, &rhs.clone(), &Expr::zero(), LiouvilleMode::Liouville)
                .unwrap();
        assert_eq!(verdict, Trivalent::Yes);
        // Z = 0 -> true for any lambda.
        let zero = vec![Expr::zero(), Expr::zero()];
        let v0 = lambda_liouville_check(
            &c,
            &rhs,
            &zero,
            &parse("u1", &t).unwrap(),
            LiouvilleMode::Liouville,
        )
        .unwrap();
        assert_eq!(v0, Trivalent::Yes);
        // F: u_x = u, Z = du, lambda = 0 -> -du + (div F) du = 0 -> true.
        let c1 = JetContext::with_vars(&["x"], &["u"], 1).unwrap();
        let t1 = c1.table().clone();
        let v1 = lambda_liouville_check(
            &c1,
            &[parse("u", &t1).unwrap()],
            &[Expr::one()],
            &Expr::zero(),
            LiouvilleMode::Liouville,
        )
        .unwrap();
        assert_eq!(v1, Trivalent::Yes);
    }

    #[test]
    fn lambda_search_finds_constant() {
        let c = ctx();
        let eq = osc_eq(&c);
        let found = search_lambda(&c, &eq, &du(&c), 1).unwrap();
        assert_eq!(found, Some(Expr::one()));
    }
}
