//! Variational properties: null Lagrangians, the worked consistency chain,
//! the untwisted Noether identity, and the one-variable agreement of the
//! lambda- and mu-conservation residuals.

mod common;

use twistsym_core::expr::{is_zero, parse, Expr, Trivalent};
use twistsym_core::jet::{JetContext, MultiIndex};
use twistsym_core::prolong::{MuForm, PointVectorField};
use twistsym_core::variational::{
    check_characteristic_factorization, check_variational_lambda, euler_lagrange,
    lambda_conservation_residual, mu_conservation_residual, ConservedVerdict, Lagrangian,
};

fn ctx() -> JetContext {
    JetContext::with_vars(&["x"], &["u"], 2).unwrap()
}

fn first_jet_vars(ctx: &JetContext) -> Vec<Expr> {
    let mut vars = common::base_vars(ctx);
    vars.push(ctx.jet(0, &MultiIndex::single(0)));
    vars
}

#[test]
fn total_derivatives_are_null_lagrangians() {
    let c = ctx();
    let vars = first_jet_vars(&c);
    let mut rng = common::rng(0x3001);
    for _ in 0..30 {
        let f = common::random_poly(&mut rng, &vars, 3, 4);
        let null = Lagrangian::new(c.total_derivative(&f, 0));
        for component in euler_lagrange(&c, &null) {
            assert_eq!(
                is_zero(&component),
                Trivalent::Yes,
                "E[D_x {f}] = {component}"
            );
        }
    }
}

#[test]
fn worked_chain_is_consistent() {
    let c = ctx();
    let t = c.table().clone();
    let lagrangian = Lagrangian::new(parse("(u_x^2 + u^2)/2", &t).unwrap());
    let field = PointVectorField::new(&c, vec![Expr::zero()], vec![Expr::one()]).unwrap();
    let lambda = Expr::one();
    // All three statements must pass together.
    assert_eq!(
        check_variational_lambda(&c, &lagrangian, &field, &lambda, &parse("u", &t).unwrap())
            .unwrap(),
        Trivalent::Yes
    );
    assert_eq!(
        check_characteristic_factorization(
            &c,
            &lagrangian,
            &field,
            &lambda,
            &parse("u - u_x", &t).unwrap()
        )
        .unwrap(),
        Trivalent::Yes
    );
    let report =
        lambda_conservation_residual(&c, &lagrangian, &field, &lambda, &parse("u", &t).unwrap())
            .unwrap();
    assert_eq!(report.verdict, ConservedVerdict::Conserved);
}

#[test]
fn untwisted_unrestricted_residual_is_characteristic_times_el() {
    // For lambda = 0 with R the boundary term B, the residual D_x Pi equals
    // -Q E[L] exactly (Pi = X ⌋ Theta - R is the negative of the
    // factorization term P with Q E[L] = D_x P).
    let c = ctx();
    let vars = first_jet_vars(&c);
    let mut rng = common::rng(0x3002);
    let mut checked = 0;
    while checked < 12 {
        // Random first-order Lagrangians and point fields; R is found by the
        // boundary-term search so that X is a variational symmetry w.r.t. R.
        let l = Lagrangian::new(common::random_poly(&mut rng, &vars, 3, 3));
        if l.order() > 1 {
            continue;
        }
        let x = common::random_point_field(&mut rng, &c);
        let Some(b) = twistsym_core::variational::find_boundary_term(&c, &l, &x, &Expr::zero(), 3)
            .unwrap()
        else {
            continue;
        };
        let report = lambda_conservation_residual(&c, &l, &x, &Expr::zero(), &b).unwrap();
        let q = &x.characteristic(&c)[0];
        let el = &euler_lagrange(&c, &l)[0];
        assert_eq!(
            is_zero(&(&report.residual + q * el)),
            Trivalent::Yes,
            "unrestricted residual differs from -Q E[L] for L = {}",
            l.expr()
        );
        checked += 1;
    }
}

#[test]
fn one_variable_mu_agrees_with_lambda() {
    let c = ctx();
    let vars = first_jet_vars(&c);
    let base = common::base_vars(&c);
    let mut rng = common::rng(0x3003);
    let mut checked = 0;
    while checked < 20 {
        let l = Lagrangian::new(common::random_poly(&mut rng, &vars, 2, 3));
        if l.order() > 1 {
            continue;
        }
        let x = common::random_point_field(&mut rng, &c);
        let lambda = common::random_poly(&mut rng, &base, 2, 2);
        let r = common::random_poly(&mut rng, &vars, 2, 2);
        let mu = MuForm::from_lambda(&c, &lambda).unwrap();
        let via_mu =
            mu_conservation_residual(&c, &l, &x, &mu, std::slice::from_ref(&r)).unwrap();
        let via_lambda = lambda_conservation_residual(&c, &l, &x, &lambda, &r).unwrap();
        assert_eq!(
            is_zero(&(&via_mu.residual - &via_lambda.residual)),
            Trivalent::Yes
        );
        assert_eq!(via_mu.verdict, via_lambda.verdict);
        checked += 1;
    }
}
