#![allow(dead_code)]

//! Shared generators for the randomized property suites. The RNG seed can
//! be pinned through the `TWISTSYM_SEED` environment variable.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twistsym_core::expr::Expr;
use twistsym_core::jet::JetContext;
use twistsym_core::prolong::PointVectorField;

pub const DEFAULT_SEED: u64 = 0x7315_7359;

pub fn seed() -> u64 {
    std::env::var("TWISTSYM_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed() ^ stream)
}

/// Random sparse polynomial over `vars` with small integer coefficients,
/// total degree at most `degree`.
pub fn random_poly(rng: &mut ChaCha8Rng, vars: &[Expr], degree: u32, terms: usize) -> Expr {
    let mut acc = Vec::new();
    for _ in 0..terms {
        let c: i64 = rng.random_range(-3..=3);
        if c == 0 {
            continue;
        }
        let mut t = Expr::int(c);
        let d = rng.random_range(0..=degree);
        for _ in 0..d {
            let v = &vars[rng.random_range(0..vars.len())];
            t = t * v;
        }
        acc.push(t);
    }
    Expr::add_all(acc)
}

/// Random nonzero polynomial (retries until the constructor keeps a term).
pub fn random_nonzero_poly(
    rng: &mut ChaCha8Rng,
    vars: &[Expr],
    degree: u32,
    terms: usize,
) -> Expr {
    loop {
        let p = random_poly(rng, vars, degree, terms);
        if !p.is_zero_const() {
            return p;
        }
    }
}

/// Random point vector field with polynomial coefficients of degree at most
/// 2 in the order-0 variables.
pub fn random_point_field(rng: &mut ChaCha8Rng, ctx: &JetContext) -> PointVectorField {
    let mut vars = Vec::new();
    for i in 0..ctx.q() {
        vars.push(ctx.x(i));
    }
    for a in 0..ctx.p() {
        vars.push(ctx.u(a));
    }
    let xi = (0..ctx.q())
        .map(|_| random_poly(rng, &vars, 2, 3))
        .collect();
    let phi = (0..ctx.p())
        .map(|_| random_poly(rng, &vars, 2, 3))
        .collect();
    PointVectorField::new(ctx, xi, phi).expect("order-0 coefficients")
}

/// Order-0 variable list `(x^i, u^a)` of a context.
pub fn base_vars(ctx: &JetContext) -> Vec<Expr> {
    let mut vars = Vec::new();
    for i in 0..ctx.q() {
        vars.push(ctx.x(i));
    }
    for a in 0..ctx.p() {
        vars.push(ctx.u(a));
    }
    vars
}
