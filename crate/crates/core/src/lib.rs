//! Symbolic engine for twisted (lambda- and mu-) prolongations and symmetries
//! of ODEs and PDEs, with numeric cross-validation.
//!
//! The crate is organized bottom-up:
//!
//! * [`expr`] — canonical symbolic expressions over jet coordinates, with a
//!   small DSL parser, partial differentiation, substitution and a sound
//!   (but incomplete) zero test;
//! * [`jet`] — multi-indices, total derivative operators and restriction of
//!   expressions to the solution manifold of a solved-form equation;
//! * [`forms`] — exterior calculus on jet space, contact structure, and the
//!   deformed operators used to characterize twisted prolongations;
//! * [`prolong`] — the prolongation engines: standard, lambda (scalar and
//!   systems), scalar-mu and vector-mu, plus gauge-factored prolongation;
//! * [`symmetry`] — symmetry condition checks, Lie brackets, geometric
//!   characterizations and the exponential-symmetry correspondence;
//! * [`reduce`] — differential invariants, invariants-by-differentiation and
//!   order reduction for scalar ODEs;
//! * [`variational`] — Euler–Lagrange operator, variational lambda/mu
//!   symmetries and twisted conservation laws;
//! * [`compat`] — Maurer–Cartan compatibility and gauge-factor checks;
//! * [`numcheck`] — fixed-step RK4 integration and verification of symbolic
//!   claims along numeric trajectories.
//!
//! ```
//! use twistsym_core::expr::{parse, Expr};
//! use twistsym_core::jet::{JetContext, SolvedEquation};
//! use twistsym_core::prolong::{PointVectorField, Twist};
//! use twistsym_core::symmetry::{check_symmetry, Verdict};
//!
//! // u'' = u admits X = d/du as a lambda-symmetry with lambda = 1,
//! // although X is not an ordinary symmetry.
//! let ctx = JetContext::with_vars(&["x"], &["u"], 2)?;
//! let t = ctx.table().clone();
//! let eq = SolvedEquation::from_leading_exprs(
//!     &ctx,
//!     vec![(parse("u_xx", &t)?, parse("u", &t)?)],
//! )?;
//! let x = PointVectorField::new(&ctx, vec![Expr::zero()], vec![Expr::one()])?;
//! let twisted = check_symmetry(&ctx, &eq, &x, &Twist::Lambda(Expr::one()), 2)?;
//! assert_eq!(twisted.verdict, Verdict::Symmetry);
//! let plain = check_symmetry(&ctx, &eq, &x, &Twist::Standard, 2)?;
//! assert_eq!(plain.verdict, Verdict::NotSymmetry);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod expr;
pub mod jet;
pub mod forms;
pub mod matrix;
pub mod prolong;
pub mod symmetry;
pub mod reduce;
pub mod variational;
pub mod compat;
pub mod numcheck;

pub use expr::{Expr, Rat, SymbolTable, Trivalent};
pub use jet::{JetContext, MultiIndex, SolvedEquation};
pub use prolong::{MuForm, PointVectorField, ProlongedField, Twist};
