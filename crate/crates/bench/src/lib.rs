//! Benchmark-only crate; see `benches/engine.rs`. Shared fixtures live
//! here so the bench target stays small.

use twistsym_core::expr::{parse, Expr};
use twistsym_core::jet::{JetContext, SolvedEquation};
use twistsym_core::prolong::PointVectorField;

pub fn oscillator() -> (JetContext, SolvedEquation) {
    let ctx = JetContext::with_vars(&["x"], &["u"], 2).unwrap();
    let t = ctx.table().clone();
    let eq = SolvedEquation::from_leading_exprs(
        &ctx,
        vec![(parse("u_xx", &t).unwrap(), parse("-u", &t).unwrap())],
    )
    .unwrap();
    (ctx, eq)
}

pub fn scaling_field(ctx: &JetContext) -> PointVectorField {
    let t = ctx.table().clone();
    PointVectorField::new(
        ctx,
        vec![parse("x", &t).unwrap()],
        vec![parse("u + x^2", &t).unwrap()],
    )
    .unwrap()
}

pub fn dense_identity(ctx: &JetContext) -> Expr {
    let t = ctx.table().clone();
    // (b + 1)^8 against its binomial expansion: structurally distinct, so
    // the zero test has to expand to decide.
    let b = parse("u + u_x + x", &t).unwrap();
    let lhs = (&b + Expr::one()).pow_i(8);
    let binomials = [1i64, 8, 28, 56, 70, 56, 28, 8, 1];
    let rhs = Expr::add_all(
        binomials
            .iter()
            .enumerate()
            .map(|(k, c)| Expr::int(*c) * b.pow_i(k as i64)),
    );
    lhs - rhs
}
