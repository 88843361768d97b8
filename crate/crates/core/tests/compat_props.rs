//! Compatibility and gauge invariants: pure-gauge flatness, potential
//! recovery as a one-sided inverse of the horizontal differential, the
//! gauge-factor/prolongation equivalence, transport composition for
//! lambda, and numeric confirmation of negative conservation verdicts.

mod common;

use twistsym_core::compat::{find_potential, gauge_factor_check, maurer_cartan_check, Compatibility};
use twistsym_core::expr::{is_zero, parse, Expr, Trivalent};
use twistsym_core::jet::JetContext;
use twistsym_core::matrix::ExprMatrix;
use twistsym_core::numcheck::{rk4_integrate, verify_along, Mode};
use twistsym_core::prolong::{gauge_factored_prolong, mu_prolong, MuForm, PointVectorField};
use twistsym_core::reduce::lambda_change_of_variables;
use twistsym_core::variational::{lambda_conservation_residual, ConservedVerdict, Lagrangian};

#[test]
fn pure_gauge_mu_is_flat() {
    // mu with Lambda_i := -(D_i K) K^{-1} passes the Maurer-Cartan check
    // identically, including a non-diagonal 2x2 gauge factor.
    let ctx = JetContext::with_vars(&["x", "y"], &["u1", "u2"], 2).unwrap();
    let t = ctx.table().clone();
    let gauges = vec![
        ExprMatrix::from_rows(vec![
            vec![Expr::exp(parse("-x", &t).unwrap()), Expr::zero()],
            vec![Expr::zero(), Expr::exp(parse("-y", &t).unwrap())],
        ])
        .unwrap(),
        ExprMatrix::from_rows(vec![
            vec![Expr::one(), parse("x*y", &t).unwrap()],
            vec![Expr::zero(), Expr::one()],
        ])
        .unwrap(),
        ExprMatrix::from_rows(vec![
            vec![Expr::exp(parse("-u1", &t).unwrap()), parse("x", &t).unwrap()],
            vec![Expr::zero(), Expr::one()],
        ])
        .unwrap(),
    ];
    for gauge in gauges {
        let inv = gauge.inverse().unwrap();
        let mats: Vec<ExprMatrix> = (0..ctx.q())
            .map(|i| gauge.total_derivative(&ctx, i).matmul(&inv).map(|e| -e))
            .collect();
        let mu = MuForm::new(&ctx, mats).unwrap();
        let report = maurer_cartan_check(&ctx, &mu, None).unwrap();
        assert_eq!(
            report.verdict,
            Compatibility::Everywhere,
            "gauge {gauge} produced curvature"
        );
        // And the defining relation D_i K = -Lambda_i K holds.
        assert_eq!(gauge_factor_check(&ctx, &gauge, &mu).unwrap(), Trivalent::Yes);
    }
}

#[test]
fn potential_recovery_inverts_the_differential() {
    let ctx = JetContext::with_vars(&["x", "y"], &["u"], 2).unwrap();
    let vars = common::base_vars(&ctx);
    let mut rng = common::rng(0x4001);
    for _ in 0..10 {
        let phi = common::random_poly(&mut rng, &vars, 3, 3);
        let lambdas: Vec<Expr> = (0..ctx.q())
            .map(|i| ctx.total_derivative(&phi, i))
            .collect();
        let mu = MuForm::from_scalars(&ctx, &lambdas).unwrap();
        let recovered = find_potential(&ctx, &mu).unwrap().expect("recoverable");
        // The potential is unique up to a constant; both derivatives match.
        for (i, l) in lambdas.iter().enumerate() {
            assert_eq!(
                is_zero(&(ctx.total_derivative(&recovered, i) - l)),
                Trivalent::Yes
            );
        }
    }
}

#[test]
fn gauge_factor_check_matches_prolongation_equivalence() {
    // When D_i K = -Lambda_i K holds, the gauge-factored prolongation of a
    // sampled characteristic equals the mu-prolongation.
    let ctx = JetContext::with_vars(&["x"], &["u"], 3).unwrap();
    let vars = common::base_vars(&ctx);
    let mut rng = common::rng(0x4002);
    for _ in 0..6 {
        let f_poly = common::random_poly(&mut rng, &vars, 2, 2);
        let gauge = ExprMatrix::scalar(Expr::exp(f_poly.neg()));
        let lambda = ctx.total_derivative(&f_poly, 0);
        let mu = MuForm::from_lambda(&ctx, &lambda).unwrap();
        assert_eq!(gauge_factor_check(&ctx, &gauge, &mu).unwrap(), Trivalent::Yes);
        for _ in 0..2 {
            let q = common::random_poly(&mut rng, &vars, 2, 2);
            let via_gauge = gauge_factored_prolong(&ctx, std::slice::from_ref(&q), &gauge, 3).unwrap();
            let field = PointVectorField::vertical(&ctx, vec![q]).unwrap();
            let via_mu = mu_prolong(&ctx, &field, &mu, 3).unwrap();
            for (key, psi) in via_mu.table() {
                assert_eq!(
                    is_zero(&(psi - via_gauge.psi(key.0, &key.1))),
                    Trivalent::Yes
                );
            }
        }
    }
}

#[test]
fn lambda_transport_composes() {
    let ctx = JetContext::with_vars(&["x"], &["u"], 2).unwrap();
    let t = ctx.table().clone();
    let lambda = parse("u + x", &t).unwrap();
    // y = x^2, then w = y^3 (i.e. w = x^6 as a function on jet space).
    let y = parse("x^2", &t).unwrap();
    let w = parse("x^6", &t).unwrap();
    let step1 = lambda_change_of_variables(&ctx, &lambda, &y).unwrap();
    // Transporting the y-equation by g(y) = y^3 divides by dg/dy = 3y^2,
    // which is 3x^4 on jet space.
    let step2 = step1 * parse("3*x^4", &t).unwrap().recip();
    let direct = lambda_change_of_variables(&ctx, &lambda, &w).unwrap();
    assert_eq!(is_zero(&(step2 - direct)), Trivalent::Yes);
}

#[test]
fn restriction_agrees_with_numeric_differential_consequences() {
    // restrict(e, eq) replaces derivative descendants symbolically; along a
    // trajectory of the same equation the replaced and original expressions
    // must evaluate identically (the trajectory fills the same slots
    // numerically).
    let ctx = JetContext::with_vars(&["x"], &["u"], 2).unwrap();
    let t = ctx.table().clone();
    let eq = twistsym_core::jet::SolvedEquation::from_leading_exprs(
        &ctx,
        vec![(
            parse("u_xx", &t).unwrap(),
            parse("u*u_x - u", &t).unwrap(),
        )],
    )
    .unwrap();
    let traj = rk4_integrate(&ctx, &eq, 0.0, &[0.8, -0.3], 0.01, 2.0).unwrap();
    assert!(traj.diagnostic.is_none());
    for text in ["u_xx + u_x*u", "u_xxx - x*u_xx", "u_xx^2 + u"] {
        let e = parse(text, &t).unwrap();
        let restricted = eq.restrict(&ctx, &e).unwrap();
        let direct = traj.sample(&e).unwrap();
        let replaced = traj.sample(&restricted).unwrap();
        for (a, b) in direct.iter().zip(&replaced) {
            assert!(
                (a - b).abs() <= 1e-9 * (1.0 + a.abs()),
                "`{text}`: {a} vs {b}"
            );
        }
    }
}

#[test]
fn twisted_third_order_reduction_holds_along_trajectories() {
    // u''' = u, lambda = 1, eta = x, zeta = u_x - u reduces to
    // zeta'' = -zeta - zeta'; check it pointwise on RK4 trajectories with
    // fourth-order stencils for the eta-derivatives of sampled zeta.
    let ctx = JetContext::with_vars(&["x"], &["u"], 3).unwrap();
    let t = ctx.table().clone();
    let eq = twistsym_core::jet::SolvedEquation::from_leading_exprs(
        &ctx,
        vec![(parse("u_xxx", &t).unwrap(), parse("u", &t).unwrap())],
    )
    .unwrap();
    let zeta = parse("u_x - u", &t).unwrap();
    for init in [[1.0, 0.0, -0.5], [0.2, 0.7, -0.1]] {
        let traj = rk4_integrate(&ctx, &eq, 0.0, &init, 0.01, 4.0).unwrap();
        assert!(traj.diagnostic.is_none());
        let z = traj.sample(&zeta).unwrap();
        let h = traj.step;
        let mut worst: f64 = 0.0;
        for i in 2..traj.len() - 2 {
            let dz = (z[i - 2] - 8.0 * z[i - 1] + 8.0 * z[i + 1] - z[i + 2]) / (12.0 * h);
            let ddz = (-z[i + 2] + 16.0 * z[i + 1] - 30.0 * z[i] + 16.0 * z[i - 1] - z[i - 2])
                / (12.0 * h * h);
            worst = worst.max((ddz + dz + z[i]).abs());
        }
        assert!(worst <= 1e-6, "reduced relation deviates by {worst:e}");
    }
}

#[test]
fn negative_conservation_verdicts_are_confirmed_numerically() {
    // A wrong R makes the symbolic verdict negative; the numeric residual
    // stays bounded away from zero along a trajectory.
    let ctx = JetContext::with_vars(&["x"], &["u"], 2).unwrap();
    let t = ctx.table().clone();
    let lagrangian = Lagrangian::new(parse("(u_x^2 + u^2)/2", &t).unwrap());
    let field = PointVectorField::new(&ctx, vec![Expr::zero()], vec![Expr::one()]).unwrap();
    let wrong_r = parse("u^2", &t).unwrap();
    let report =
        lambda_conservation_residual(&ctx, &lagrangian, &field, &Expr::one(), &wrong_r).unwrap();
    assert_eq!(report.verdict, ConservedVerdict::NotConserved);

    let eq = report.euler_lagrange_solved.clone().unwrap();
    let pi = &report.current[0];
    let residual = ctx.total_derivative(pi, 0) + pi;
    let traj = rk4_integrate(&ctx, &eq, 0.0, &[1.0, 0.5], 0.01, 3.0).unwrap();
    let zero_check = verify_along(&residual, &traj, Mode::Zero, 1e-6).unwrap();
    assert!(
        !zero_check.pass && zero_check.max_deviation > 1e-2,
        "residual not bounded away from zero: {:e}",
        zero_check.max_deviation
    );
}
