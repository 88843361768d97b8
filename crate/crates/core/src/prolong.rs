//! Prolongation engines.
//!
//! All four prolongations share one recursion
//!
//! ```text
//! Psi^a_{J,i} = (nabla_i)^a_b Psi^b_J - u^b_{J,m} (nabla_i)^a_b xi^m ,
//! nabla_i = I D_i + Lambda_i ,
//! ```
//!
//! with `Lambda = 0` for the standard prolongation, `Lambda_i = lambda * I`
//! (single independent variable) for the lambda-prolongation, and general
//! matrix coefficients for the mu-prolongation. Tables are built level by
//! level; each multi-index is produced from its decomposition `J = (J', i)`
//! with `i` the largest entry, which makes the construction deterministic
//! even when no compatibility condition has been imposed on `mu`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{is_zero, Expr, Trivalent};
use crate::forms::JetVectorField;
use crate::jet::{JetContext, MultiIndex};
use crate::matrix::{ExprMatrix, MatrixError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProlongError {
    #[error("coefficients must depend on order-{0} variables at most")]
    CoefficientOrder(usize),
    #[error("expected {expected} coefficient(s), got {got}")]
    Arity { expected: usize, got: usize },
    #[error("lambda-prolongation requires a single independent variable; use the mu-prolongation instead")]
    LambdaNeedsOde,
    #[error("lambda depends on jets of order {got}, above the declared bound {bound}")]
    LambdaOrder { got: usize, bound: usize },
    #[error("mu-form dimensions do not match the context ({0})")]
    MuDimensions(String),
    #[error("difference terms for vector mu are only available at first order")]
    VectorDifferenceOrder,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("prolongation order must be at least 1")]
    BadOrder,
}

/// Lie-point vector field `X = xi^i d/dx^i + phi^a d/du^a`.
///
/// Coefficients of a general field live on the order-0 bundle; the vertical
/// (evolutionary) representative is allowed first-jet coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointVectorField {
    xi: Vec<Expr>,
    phi: Vec<Expr>,
}

impl PointVectorField {
    pub fn new(ctx: &JetContext, xi: Vec<Expr>, phi: Vec<Expr>) -> Result<Self, ProlongError> {
        if xi.len() != ctx.q() {
            return Err(ProlongError::Arity {
                expected: ctx.q(),
                got: xi.len(),
            });
        }
        if phi.len() != ctx.p() {
            return Err(ProlongError::Arity {
                expected: ctx.p(),
                got: phi.len(),
            });
        }
        for e in xi.iter().chain(&phi) {
            if e.jet_order() > 0 {
                return Err(ProlongError::CoefficientOrder(0));
            }
        }
        Ok(PointVectorField { xi, phi })
    }

    /// Vertical field `Q^a d/du^a`; characteristics may carry first jets.
    pub fn vertical(ctx: &JetContext, q_comps: Vec<Expr>) -> Result<Self, ProlongError> {
        if q_comps.len() != ctx.p() {
            return Err(ProlongError::Arity {
                expected: ctx.p(),
                got: q_comps.len(),
            });
        }
        for e in &q_comps {
            if e.jet_order() > 1 {
                return Err(ProlongError::CoefficientOrder(1));
            }
        }
        Ok(PointVectorField {
            xi: vec![Expr::zero(); ctx.q()],
            phi: q_comps,
        })
    }

    pub fn xi(&self) -> &[Expr] {
        &self.xi
    }

    pub fn phi(&self) -> &[Expr] {
        &self.phi
    }

    pub fn is_vertical(&self) -> bool {
        self.xi.iter().all(|e| e.is_zero_const())
    }

    /// Characteristic `Q^a = phi^a - u^a_i xi^i`.
    pub fn characteristic(&self, ctx: &JetContext) -> Vec<Expr> {
        (0..ctx.p())
            .map(|a| {
                let mut q = self.phi[a].clone();
                for (i, xi) in self.xi.iter().enumerate() {
                    q = q - ctx.jet(a, &MultiIndex::single(i)) * xi;
                }
                q
            })
            .collect()
    }
}

/// Evolutionary (vertical) representative of a point field.
pub fn evolutionary_rep(ctx: &JetContext, x: &PointVectorField) -> PointVectorField {
    PointVectorField {
        xi: vec![Expr::zero(); ctx.q()],
        phi: x.characteristic(ctx),
    }
}

/// Horizontal one-form `mu = Lambda_i dx^i` with matrix coefficients; the
/// scalar lambda of the ODE theory is the 1x1, single-variable case.
#[derive(Debug, Clone, PartialEq)]
pub struct MuForm {
    mats: Vec<ExprMatrix>,
}

impl MuForm {
    pub fn new(ctx: &JetContext, mats: Vec<ExprMatrix>) -> Result<Self, ProlongError> {
        if mats.len() != ctx.q() {
            return Err(ProlongError::MuDimensions(format!(
                "expected {} coefficient matrices, got {}",
                ctx.q(),
                mats.len()
            )));
        }
        if mats.iter().any(|m| m.n() != ctx.p()) {
            return Err(ProlongError::MuDimensions(format!(
                "coefficient matrices must be {p}x{p}",
                p = ctx.p()
            )));
        }
        Ok(MuForm { mats })
    }

    /// Scalar ODE case: `mu = lambda dx`.
    pub fn from_lambda(ctx: &JetContext, lambda: &Expr) -> Result<Self, ProlongError> {
        if ctx.q() != 1 {
            return Err(ProlongError::LambdaNeedsOde);
        }
        let mats = vec![ExprMatrix::identity(ctx.p()).map(|e| e * lambda)];
        MuForm::new(ctx, mats)
    }

    /// Scalar coefficients `lambda_i` acting diagonally.
    pub fn from_scalars(ctx: &JetContext, lambdas: &[Expr]) -> Result<Self, ProlongError> {
        if lambdas.len() != ctx.q() {
            return Err(ProlongError::Arity {
                expected: ctx.q(),
                got: lambdas.len(),
            });
        }
        let mats = lambdas
            .iter()
            .map(|l| ExprMatrix::identity(ctx.p()).map(|e| e * l))
            .collect();
        MuForm::new(ctx, mats)
    }

    pub fn zero(ctx: &JetContext) -> Self {
        MuForm {
            mats: vec![ExprMatrix::zero(ctx.p()); ctx.q()],
        }
    }

    pub fn mats(&self) -> &[ExprMatrix] {
        &self.mats
    }

    pub fn mat(&self, i: usize) -> &ExprMatrix {
        &self.mats[i]
    }

    pub fn q(&self) -> usize {
        self.mats.len()
    }

    pub fn p(&self) -> usize {
        self.mats[0].n()
    }

    pub fn is_zero(&self) -> bool {
        self.mats
            .iter()
            .all(|m| m.rows().iter().flatten().all(|e| e.is_zero_const()))
    }

    /// True when every coefficient matrix is a scalar multiple of the
    /// identity; returns the scalars.
    pub fn as_scalars(&self) -> Option<Vec<Expr>> {
        let p = self.p();
        let mut out = Vec::with_capacity(self.q());
        for m in &self.mats {
            let diag = m.get(0, 0).clone();
            for r in 0..p {
                for c in 0..p {
                    let want = if r == c { diag.clone() } else { Expr::zero() };
                    if m.get(r, c) != &want {
                        return None;
                    }
                }
            }
            out.push(diag);
        }
        Some(out)
    }

    /// Highest jet order among all coefficients.
    pub fn jet_order(&self) -> usize {
        self.mats
            .iter()
            .flat_map(|m| m.rows().into_iter().flatten())
            .map(|e| e.jet_order())
            .max()
            .unwrap_or(0)
    }
}

/// Which prolongation produced a table.
#[derive(Debug, Clone, PartialEq)]
pub enum Twist {
    Standard,
    Lambda(Expr),
    Mu(MuForm),
}

/// A vector field on `J^k M`: base point field plus the complete table
/// `J -> Psi^a_J` for `|J| <= k` (with `Psi^a_0 = phi^a`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongedField {
    base: PointVectorField,
    table: BTreeMap<(usize, MultiIndex), Expr>,
    order: usize,
    twist: Twist,
}

impl ProlongedField {
    pub fn base(&self) -> &PointVectorField {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn twist(&self) -> &Twist {
        &self.twist
    }

    pub fn table(&self) -> &BTreeMap<(usize, MultiIndex), Expr> {
        &self.table
    }

    /// Coefficient `Psi^a_J` (zero when outside the table).
    pub fn psi(&self, a: usize, j: &MultiIndex) -> Expr {
        self.table
            .get(&(a, j.clone()))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    /// Recompute the same prolongation at a (usually higher) order.
    pub fn extended(&self, ctx: &JetContext, order: usize) -> Result<ProlongedField, ProlongError> {
        if order == self.order {
            return Ok(self.clone());
        }
        prolong_with(ctx, &self.base, self.twist.clone(), order)
    }

    /// Apply the field to an expression, extending the table as needed so
    /// every jet coordinate of `e` is covered.
    pub fn apply(&self, ctx: &JetContext, e: &Expr) -> Expr {
        let needed = e.jet_order();
        if needed > self.order {
            let ext = self
                .extended(ctx, needed)
                .expect("extension of an existing prolongation");
            return ext.apply(ctx, e);
        }
        self.as_vector_field().apply(e)
    }

    pub fn as_vector_field(&self) -> JetVectorField {
        JetVectorField::new(self.base.xi.to_vec(), self.table.clone())
    }

    /// Add `delta` to a single coefficient (table perturbation; used to
    /// check that characterizations actually separate prolonged fields).
    pub fn perturbed(&self, a: usize, j: &MultiIndex, delta: Expr) -> ProlongedField {
        let mut out = self.clone();
        let slot = out.table.entry((a, j.clone())).or_insert_with(Expr::zero);
        *slot = &*slot + delta;
        out
    }
}

/// Shared recursion for standard/lambda/mu prolongations.
fn prolong_with(
    ctx: &JetContext,
    x: &PointVectorField,
    twist: Twist,
    k: usize,
) -> Result<ProlongedField, ProlongError> {
    if k == 0 {
        return Err(ProlongError::BadOrder);
    }
    let q = ctx.q();
    let p = ctx.p();
    let mats: Option<Vec<ExprMatrix>> = match &twist {
        Twist::Standard => None,
        Twist::Lambda(l) => Some(vec![ExprMatrix::identity(p).map(|e| e * l)]),
        Twist::Mu(mu) => Some(mu.mats().to_vec()),
    };

    // nabla_i applied to a p-vector.
    let nabla = |i: usize, v: &[Expr]| -> Vec<Expr> {
        let mut out: Vec<Expr> = v.iter().map(|e| ctx.total_derivative(e, i)).collect();
        if let Some(ms) = &mats {
            let lv = ms[i].mul_vec(v);
            for (o, l) in out.iter_mut().zip(lv) {
                *o = &*o + l;
            }
        }
        out
    };
    // (nabla_i)^a_b applied to the scalar xi^m:
    // delta_ab D_i xi^m + (Lambda_i)^a_b xi^m.
    let nabla_scalar = |i: usize, s: &Expr| -> Vec<Vec<Expr>> {
        let d = ctx.total_derivative(s, i);
        (0..p)
            .map(|a| {
                (0..p)
                    .map(|b| {
                        let mut e = if a == b { d.clone() } else { Expr::zero() };
                        if let Some(ms) = &mats {
                            e = e + ms[i].get(a, b) * s;
                        }
                        e
                    })
                    .collect()
            })
            .collect()
    };

    let mut table: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
    for a in 0..p {
        table.insert((a, MultiIndex::empty()), x.phi[a].clone());
    }
    let mut level: Vec<MultiIndex> = vec![MultiIndex::empty()];
    for _ in 0..k {
        let mut next: Vec<MultiIndex> = Vec::new();
        for j in &level {
            let min_i = j.iter().last().copied().unwrap_or(0);
            for i in min_i..q {
                let ji = j.appended(i);
                let prev: Vec<Expr> = (0..p).map(|a| table[&(a, j.clone())].clone()).collect();
                let mut new = nabla(i, &prev);
                for (m, xim) in x.xi.iter().enumerate() {
                    if xim.is_zero_const() {
                        continue;
                    }
                    let action = nabla_scalar(i, xim);
                    for (a, row) in action.iter().enumerate() {
                        for (b, entry) in row.iter().enumerate() {
                            if entry.is_zero_const() {
                                continue;
                            }
                            let ujm = ctx.jet(b, &j.appended(m));
                            new[a] = &new[a] - ujm * entry;
                        }
                    }
                }
                for (a, e) in new.into_iter().enumerate() {
                    table.insert((a, ji.clone()), e);
                }
                next.push(ji);
            }
        }
        level = next;
    }

    Ok(ProlongedField {
        base: x.clone(),
        table,
        order: k,
        twist,
    })
}

/// Standard (untwisted) prolongation to order `k`.
pub fn standard_prolong(
    ctx: &JetContext,
    x: &PointVectorField,
    k: usize,
) -> Result<ProlongedField, ProlongError> {
    prolong_with(ctx, x, Twist::Standard, k)
}

/// Lambda-prolongation `Psi_{j+1} = (D_x + lambda) Psi_j - u_{j+1} (D_x +
/// lambda) xi` for a single independent variable. `lambda` may live on the
/// first jet bundle; higher-jet lambdas (generalized vector fields) must go
/// through [`lambda_prolong_generalized`].
pub fn lambda_prolong(
    ctx: &JetContext,
    x: &PointVectorField,
    lambda: &Expr,
    k: usize,
) -> Result<ProlongedField, ProlongError> {
    if lambda.jet_order() > 1 {
        return Err(ProlongError::LambdaOrder {
            got: lambda.jet_order(),
            bound: 1,
        });
    }
    lambda_prolong_generalized(ctx, x, lambda, k)
}

/// Lambda-prolongation without the first-jet restriction on `lambda`.
pub fn lambda_prolong_generalized(
    ctx: &JetContext,
    x: &PointVectorField,
    lambda: &Expr,
    k: usize,
) -> Result<ProlongedField, ProlongError> {
    if ctx.q() != 1 {
        return Err(ProlongError::LambdaNeedsOde);
    }
    prolong_with(ctx, x, Twist::Lambda(lambda.clone()), k)
}

/// Mu-prolongation. Compatibility of `mu` is not enforced here; check it
/// with [`crate::compat::maurer_cartan_check`].
pub fn mu_prolong(
    ctx: &JetContext,
    x: &PointVectorField,
    mu: &MuForm,
    k: usize,
) -> Result<ProlongedField, ProlongError> {
    if mu.q() != ctx.q() || mu.p() != ctx.p() {
        return Err(ProlongError::MuDimensions(format!(
            "mu is {}x({}x{}), context needs {}x({}x{})",
            mu.q(),
            mu.p(),
            mu.p(),
            ctx.q(),
            ctx.p(),
            ctx.p(),
        )));
    }
    prolong_with(ctx, x, Twist::Mu(mu.clone()), k)
}

/// Difference terms `F^a_J = Psi^a_J - Phi^a_J` between the mu- and the
/// standard prolongation. For matrix-valued `mu` only the first order is
/// computed.
pub fn difference_terms(
    ctx: &JetContext,
    x: &PointVectorField,
    mu: &MuForm,
    k: usize,
) -> Result<BTreeMap<(usize, MultiIndex), Expr>, ProlongError> {
    if mu.as_scalars().is_none() && k > 1 {
        return Err(ProlongError::VectorDifferenceOrder);
    }
    let twisted = mu_prolong(ctx, x, mu, k)?;
    let standard = standard_prolong(ctx, x, k)?;
    let mut out = BTreeMap::new();
    for (key, psi) in twisted.table() {
        let phi = standard.psi(key.0, &key.1);
        out.insert(key.clone(), psi - phi);
    }
    Ok(out)
}

/// Gauge-factored prolongation: `Psi^a_J = [K D_J (K^{-1} Q)]^a` for a
/// vertical characteristic `Q` and an invertible gauge factor `K`. Equals
/// the mu-prolongation with `Lambda_i = -(D_i K) K^{-1}`.
pub fn gauge_factored_prolong(
    ctx: &JetContext,
    q_char: &[Expr],
    gauge: &ExprMatrix,
    k: usize,
) -> Result<ProlongedField, ProlongError> {
    if k == 0 {
        return Err(ProlongError::BadOrder);
    }
    let p = ctx.p();
    if gauge.n() != p || q_char.len() != p {
        return Err(ProlongError::Arity {
            expected: p,
            got: q_char.len(),
        });
    }
    let inv = gauge.inverse()?;
    let base = PointVectorField::vertical(ctx, q_char.to_vec())?;

    // Lambda_i = -(D_i K) K^{-1}; recorded so the field can be extended and
    // cross-checked against the mu-prolongation route.
    let mats: Vec<ExprMatrix> = (0..ctx.q())
        .map(|i| gauge.total_derivative(ctx, i).matmul(&inv).map(|e| -e))
        .collect();
    let mu = MuForm::new(ctx, mats)?;

    let v0 = inv.mul_vec(q_char);
    let mut table: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
    let mut derivs: BTreeMap<MultiIndex, Vec<Expr>> = BTreeMap::new();
    derivs.insert(MultiIndex::empty(), v0);
    let mut level = vec![MultiIndex::empty()];
    for _ in 0..k {
        let mut next = Vec::new();
        for j in &level {
            let min_i = j.iter().last().copied().unwrap_or(0);
            for i in min_i..ctx.q() {
                let ji = j.appended(i);
                let dv: Vec<Expr> = derivs[j]
                    .iter()
                    .map(|e| ctx.total_derivative(e, i))
                    .collect();
                derivs.insert(ji.clone(), dv);
                next.push(ji);
            }
        }
        level = next;
    }
    for (j, dv) in &derivs {
        let psi = gauge.mul_vec(dv);
        for (a, e) in psi.into_iter().enumerate() {
            // K and K^{-1} cancel only after distribution; normalize each
            // entry to the expanded rational form.
            table.insert((a, j.clone()), crate::expr::expand(&e));
        }
    }

    Ok(ProlongedField {
        base,
        table,
        order: k,
        twist: Twist::Mu(mu),
    })
}

/// True when `K` is symbolically invertible (determinant not identically
/// zero).
pub fn gauge_invertible(gauge: &ExprMatrix) -> bool {
    is_zero(&gauge.det()) != Trivalent::Yes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn ctx() -> JetContext {
        JetContext::with_vars(&["x"], &["u"], 2).unwrap()
    }

    fn du(ctx: &JetContext) -> PointVectorField {
        PointVectorField::new(ctx, vec![Expr::zero()], vec![Expr::one()]).unwrap()
    }

    #[test]
    fn evolutionary_representative() {
        let c = ctx();
        let t = c.table().clone();
        // X = du -> Q = 1
        assert_eq!(du(&c).characteristic(&c), vec![Expr::one()]);
        // X = x dx + u du -> Q = u - x u_x
        let x = PointVectorField::new(
            &c,
            vec![parse("x", &t).unwrap()],
            vec![parse("u", &t).unwrap()],
        )
        .unwrap();
        let v = evolutionary_rep(&c, &x);
        assert!(v.is_vertical());
        assert_eq!(v.phi()[0], parse("u - x*u_x", &t).unwrap());
        // vertical fields are fixed points
        let w = evolutionary_rep(&c, &v);
        assert_eq!(w.phi()[0], v.phi()[0]);
    }

    #[test]
    fn standard_prolongation_table() {
        let c = ctx();
        let t = c.table().clone();
        // X = du: psi_x = psi_xx = 0
        let y = standard_prolong(&c, &du(&c), 2).unwrap();
        assert_eq!(y.psi(0, &MultiIndex::single(0)), Expr::zero());
        assert_eq!(y.psi(0, &MultiIndex::new(vec![0, 0])), Expr::zero());
        // X = x dx + u du: psi_x = 0, psi_xx = -u_xx
        let x = PointVectorField::new(
            &c,
            vec![parse("x", &t).unwrap()],
            vec![parse("u", &t).unwrap()],
        )
        .unwrap();
        let y2 = standard_prolong(&c, &x, 2).unwrap();
        assert_eq!(y2.psi(0, &MultiIndex::single(0)), Expr::zero());
        assert_eq!(
            y2.psi(0, &MultiIndex::new(vec![0, 0])),
            parse("-u_xx", &t).unwrap()
        );
        // vertical with Q = u^2: psi_xx = 2 u_x^2 + 2 u u_xx
        let v = PointVectorField::vertical(&c, vec![parse("u^2", &t).unwrap()]).unwrap();
        let y3 = standard_prolong(&c, &v, 2).unwrap();
        assert_eq!(
            y3.psi(0, &MultiIndex::new(vec![0, 0])),
            parse("2*u_x^2 + 2*u*u_xx", &t).unwrap()
        );
    }

    #[test]
    fn lambda_prolongation_recursion() {
        let c = ctx();
        let t = c.table().clone();
        // X = du, lambda = u: Psi_1 = u, Psi_2 = u_x + u^2
        let y = lambda_prolong(&c, &du(&c), &parse("u", &t).unwrap(), 2).unwrap();
        assert_eq!(y.psi(0, &MultiIndex::single(0)), parse("u", &t).unwrap());
        assert_eq!(
            y.psi(0, &MultiIndex::new(vec![0, 0])),
            parse("u_x + u^2", &t).unwrap()
        );
        // lambda = 1: Psi_1 = Psi_2 = 1
        let y2 = lambda_prolong(&c, &du(&c), &Expr::one(), 2).unwrap();
        assert_eq!(y2.psi(0, &MultiIndex::single(0)), Expr::one());
        assert_eq!(y2.psi(0, &MultiIndex::new(vec![0, 0])), Expr::one());
        // lambda = 0 reproduces the standard prolongation
        let y3 = lambda_prolong(&c, &du(&c), &Expr::zero(), 2).unwrap();
        assert_eq!(y3.table(), standard_prolong(&c, &du(&c), 2).unwrap().table());
    }

    #[test]
    fn higher_jet_lambda_needs_the_generalized_entry_point() {
        let c = ctx();
        let t = c.table().clone();
        let lam = parse("u_xx", &t).unwrap();
        assert!(matches!(
            lambda_prolong(&c, &du(&c), &lam, 2),
            Err(ProlongError::LambdaOrder { got: 2, bound: 1 })
        ));
        assert!(lambda_prolong_generalized(&c, &du(&c), &lam, 2).is_ok());
    }

    #[test]
    fn lambda_requires_single_independent() {
        let c = JetContext::with_vars(&["x", "y"], &["u"], 2).unwrap();
        let f = PointVectorField::new(&c, vec![Expr::zero(), Expr::zero()], vec![Expr::one()])
            .unwrap();
        assert!(matches!(
            lambda_prolong(&c, &f, &Expr::one(), 2),
            Err(ProlongError::LambdaNeedsOde)
        ));
    }

    #[test]
    fn scalar_mu_with_constant_coefficients() {
        let mut table = crate::expr::SymbolTable::with_vars(&["x", "y"], &["u"]).unwrap();
        let c1 = Expr::sym(&table.declare_parameter("c1").unwrap());
        let c2 = Expr::sym(&table.declare_parameter("c2").unwrap());
        let c = JetContext::new(std::sync::Arc::new(table), 2).unwrap();
        let f = PointVectorField::new(&c, vec![Expr::zero(), Expr::zero()], vec![Expr::one()])
            .unwrap();
        let mu = MuForm::from_scalars(&c, &[c1.clone(), c2.clone()]).unwrap();
        let y = mu_prolong(&c, &f, &mu, 2).unwrap();
        assert_eq!(y.psi(0, &MultiIndex::single(0)), c1);
        assert_eq!(y.psi(0, &MultiIndex::single(1)), c2);
        assert_eq!(y.psi(0, &MultiIndex::new(vec![0, 1])), &c1 * &c2);
        assert_eq!(y.psi(0, &MultiIndex::new(vec![0, 0])), c1.pow_i(2));
        // mu = 0 degenerates
        let y0 = mu_prolong(&c, &f, &MuForm::zero(&c), 2).unwrap();
        assert_eq!(y0.table(), standard_prolong(&c, &f, 2).unwrap().table());
    }

    #[test]
    fn vector_mu_first_prolongation() {
        // One independent variable, Lambda_x = [[0,1],[0,0]], vertical
        // Q = (0, u1): psi^1 = u1, psi^2 = u1_x.
        let c = JetContext::with_vars(&["x"], &["u1", "u2"], 1).unwrap();
        let t = c.table().clone();
        let lam = ExprMatrix::from_rows(vec![
            vec![Expr::zero(), Expr::one()],
            vec![Expr::zero(), Expr::zero()],
        ])
        .unwrap();
        let mu = MuForm::new(&c, vec![lam]).unwrap();
        let x =
            PointVectorField::vertical(&c, vec![Expr::zero(), parse("u1", &t).unwrap()]).unwrap();
        let y = mu_prolong(&c, &x, &mu, 1).unwrap();
        assert_eq!(y.psi(0, &MultiIndex::single(0)), parse("u1", &t).unwrap());
        assert_eq!(y.psi(1, &MultiIndex::single(0)), parse("u1_x", &t).unwrap());
    }

    #[test]
    fn difference_terms_recursion_cases() {
        let c = ctx();
        let t = c.table().clone();
        // X = du, lambda = 1, k = 2: F_x = 1, F_xx = 1
        let mu = MuForm::from_lambda(&c, &Expr::one()).unwrap();
        let f = difference_terms(&c, &du(&c), &mu, 2).unwrap();
        assert_eq!(f[&(0, MultiIndex::single(0))], Expr::one());
        assert_eq!(f[&(0, MultiIndex::new(vec![0, 0]))], Expr::one());
        // mu = 0: all F vanish
        let f0 = difference_terms(&c, &du(&c), &MuForm::zero(&c), 2).unwrap();
        assert!(f0.values().all(|e| e.is_zero_const()));
        // X = du, lambda = u, k = 1: F_x = u = lambda * Q
        let muu = MuForm::from_lambda(&c, &parse("u", &t).unwrap()).unwrap();
        let fu = difference_terms(&c, &du(&c), &muu, 1).unwrap();
        assert_eq!(fu[&(0, MultiIndex::single(0))], parse("u", &t).unwrap());
    }

    #[test]
    fn gauge_factored_routes_agree() {
        let c = ctx();
        let t = c.table().clone();
        // K = exp(-x), Q = u: Psi_x = u + u_x, i.e. (D_x + 1) u
        let gauge = ExprMatrix::scalar(Expr::exp(parse("-x", &t).unwrap()));
        let y = gauge_factored_prolong(&c, &[parse("u", &t).unwrap()], &gauge, 1).unwrap();
        assert_eq!(
            y.psi(0, &MultiIndex::single(0)),
            parse("u + u_x", &t).unwrap()
        );
        // K = I degenerates to the standard prolongation of Q
        let idm = ExprMatrix::identity(1);
        let q = parse("u^2", &t).unwrap();
        let y2 = gauge_factored_prolong(&c, std::slice::from_ref(&q), &idm, 2).unwrap();
        let v = PointVectorField::vertical(&c, vec![q]).unwrap();
        let std = standard_prolong(&c, &v, 2).unwrap();
        assert_eq!(y2.table(), std.table());
        // K = exp(-f), f = x^2, Q = 1: Psi_x = 2x, matching lambda = D_x f
        let gauge3 = ExprMatrix::scalar(Expr::exp(parse("-x^2", &t).unwrap()));
        let y3 = gauge_factored_prolong(&c, &[Expr::one()], &gauge3, 1).unwrap();
        assert_eq!(y3.psi(0, &MultiIndex::single(0)), parse("2*x", &t).unwrap());
    }

    #[test]
    fn singular_gauge_rejected() {
        let c = ctx();
        let gauge = ExprMatrix::scalar(Expr::zero());
        assert!(matches!(
            gauge_factored_prolong(&c, &[Expr::one()], &gauge, 1),
            Err(ProlongError::Matrix(MatrixError::Singular))
        ));
    }
}
