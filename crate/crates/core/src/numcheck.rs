//! Numeric cross-validation: fixed-step classical RK4 integration of
//! solved-form ODEs, verification of first integrals and residuals along
//! trajectories, and finite-difference validation of total derivatives.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{eval_f64, EvalError, Expr, Sym, SymKind};
use crate::jet::{JetContext, JetError, MultiIndex, SolvedEquation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("step and horizon must be positive")]
    BadStep,
    #[error("equation is not an ODE in solved form suitable for integration: {0}")]
    NotIntegrable(String),
    #[error("initial data has wrong length: expected {expected}, got {got}")]
    InitLength { expected: usize, got: usize },
    #[error("expression needs derivative order {needed}, trajectory provides the equation for order {available}")]
    MissingSlots { needed: usize, available: usize },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("trajectory is empty")]
    Empty,
}

/// Per-dependent layout of the first-order system state vector.
#[derive(Debug, Clone)]
struct StateLayout {
    /// Leading derivative order of each dependent variable.
    orders: Vec<usize>,
    /// Start offset of each dependent variable's block in the state.
    offsets: Vec<usize>,
    len: usize,
}

impl StateLayout {
    fn slot(&self, a: usize, j: usize) -> Option<usize> {
        (j < self.orders[a]).then(|| self.offsets[a] + j)
    }
}

/// A fixed-step trajectory of a solved-form ODE system, carrying enough
/// structure to evaluate arbitrary jet expressions along itself (derivative
/// slots above the state are filled from the equation's differential
/// consequences).
#[derive(Debug, Clone)]
pub struct Trajectory {
    ctx: JetContext,
    eq: SolvedEquation,
    layout: StateLayout,
    /// Grid abscissas (uniform step).
    pub xs: Vec<f64>,
    /// State vectors per grid point.
    pub states: Vec<Vec<f64>>,
    /// Actual step used (the requested step is adjusted so that an integer
    /// number of steps lands exactly on the horizon).
    pub step: f64,
    /// Diagnostic when integration stopped early.
    pub diagnostic: Option<String>,
}

fn ode_layout(ctx: &JetContext, eq: &SolvedEquation) -> Result<StateLayout, NumError> {
    if ctx.q() != 1 {
        return Err(NumError::NotIntegrable(
            "more than one independent variable".into(),
        ));
    }
    let mut orders = vec![None; ctx.p()];
    for (a, k, _) in eq.entries() {
        if orders[*a].is_some() {
            return Err(NumError::NotIntegrable(format!(
                "two leading derivatives for `{}`",
                ctx.u(*a)
            )));
        }
        orders[*a] = Some(k.order());
    }
    let mut resolved = Vec::with_capacity(ctx.p());
    for (a, o) in orders.into_iter().enumerate() {
        match o {
            Some(o) => resolved.push(o),
            None => {
                return Err(NumError::NotIntegrable(format!(
                    "no equation for `{}`",
                    ctx.u(a)
                )))
            }
        }
    }
    let mut offsets = Vec::with_capacity(resolved.len());
    let mut acc = 0;
    for &o in &resolved {
        offsets.push(acc);
        acc += o;
    }
    Ok(StateLayout {
        orders: resolved,
        offsets,
        len: acc,
    })
}

/// Environment mapping jet symbols to values at one trajectory point,
/// including derivative slots above the state (computed from the equation).
struct PointEnv<'a> {
    x: f64,
    state: &'a [f64],
    layout: &'a StateLayout,
    /// Values of restricted higher-derivative expressions, keyed by (a, j).
    derived: &'a HashMap<(usize, usize), f64>,
}

impl PointEnv<'_> {
    fn get(&self, s: &Arc<Sym>) -> Option<f64> {
        match &s.kind {
            SymKind::Independent { index: 0 } => Some(self.x),
            SymKind::Independent { .. } => None,
            SymKind::Dependent { index } => self.layout.slot(*index, 0).map(|i| self.state[i]),
            SymKind::Jet { dep, index } => {
                let j = index.order();
                match self.layout.slot(*dep, j) {
                    Some(i) => Some(self.state[i]),
                    None => self.derived.get(&(*dep, j)).copied(),
                }
            }
            SymKind::Parameter => None,
        }
    }
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn context(&self) -> &JetContext {
        &self.ctx
    }

    /// Symbolic expressions for the derivative slots `(a, j)` with `j`
    /// at or above the leading order, obtained by restriction (so they
    /// depend only on state coordinates and `x`).
    fn derived_exprs(&self, up_to: usize) -> Result<HashMap<(usize, usize), Expr>, NumError> {
        let mut out = HashMap::new();
        for a in 0..self.ctx.p() {
            for j in self.layout.orders[a]..=up_to {
                let jet = self.ctx.jet(a, &MultiIndex::new(vec![0; j]));
                let restricted = self.eq.restrict(&self.ctx, &jet)?;
                out.insert((a, j), restricted);
            }
        }
        Ok(out)
    }

    /// Evaluate `e` at every grid point, filling derivative slots from the
    /// differential consequences of the equation.
    pub fn sample(&self, e: &Expr) -> Result<Vec<f64>, NumError> {
        let needed = e.jet_order();
        let derived = self.derived_exprs(needed)?;
        let mut out = Vec::with_capacity(self.len());
        for (x, state) in self.xs.iter().zip(&self.states) {
            let mut derived_vals = HashMap::new();
            // Derived slots depend only on state coordinates, so a
            // state-only environment suffices for them.
            let base_env = PointEnv {
                x: *x,
                state,
                layout: &self.layout,
                derived: &HashMap::new(),
            };
            for (key, expr) in &derived {
                let v = eval_f64(expr, &|s: &Arc<Sym>| base_env.get(s))?;
                derived_vals.insert(*key, v);
            }
            let env = PointEnv {
                x: *x,
                state,
                layout: &self.layout,
                derived: &derived_vals,
            };
            out.push(eval_f64(e, &|s: &Arc<Sym>| env.get(s))?);
        }
        Ok(out)
    }

    /// Maximum infinity norm of the state over the trajectory.
    pub fn state_scale(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|s| s.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
    }

    /// Write `x, u, derivatives...` rows as CSV up to `max_order`.
    pub fn write_csv<W: std::io::Write>(
        &self,
        w: &mut W,
        max_order: usize,
    ) -> Result<(), std::io::Error> {
        let mut header = vec!["x".to_string()];
        let mut exprs = Vec::new();
        for a in 0..self.ctx.p() {
            for j in 0..=max_order {
                let mi = MultiIndex::new(vec![0; j]);
                header.push(if j == 0 {
                    self.ctx.u(a).to_string()
                } else {
                    self.ctx.table().jet_name(a, &mi)
                });
                exprs.push(self.ctx.jet(a, &mi));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        let mut columns = Vec::new();
        for e in &exprs {
            let col = self
                .sample(e)
                .map_err(|err| std::io::Error::other(err.to_string()))?;
            columns.push(col);
        }
        for (i, x) in self.xs.iter().enumerate() {
            let mut row = vec![format!("{x:.12e}")];
            for col in &columns {
                row.push(format!("{:.12e}", col[i]));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Integrate the solved-form system with classical fixed-step RK4 from
/// `x0` over a horizon `t_end` (so the final abscissa is `x0 + t_end`).
/// The step is adjusted downward so an integer number of steps covers the
/// horizon exactly. Initial data is the concatenation of
/// `u^a, u^a_x, ..., u^a_{n_a - 1}` blocks.
///
/// Evaluation failures (poles, logs of non-positive values) truncate the
/// trajectory and record a diagnostic instead of failing outright.
pub fn rk4_integrate(
    ctx: &JetContext,
    eq: &SolvedEquation,
    x0: f64,
    init: &[f64],
    h: f64,
    t_end: f64,
) -> Result<Trajectory, NumError> {
    if !h.is_finite() || h <= 0.0 || !t_end.is_finite() || t_end <= 0.0 {
        return Err(NumError::BadStep);
    }
    let layout = ode_layout(ctx, eq)?;
    if init.len() != layout.len {
        return Err(NumError::InitLength {
            expected: layout.len,
            got: init.len(),
        });
    }
    let steps = (t_end / h).ceil().max(1.0) as usize;
    let step = t_end / steps as f64;

    // Right-hand sides for the top slot of each dependent variable.
    let mut top_rhs: Vec<Expr> = vec![Expr::zero(); ctx.p()];
    for (a, _, rhs) in eq.entries() {
        top_rhs[*a] = rhs.clone();
    }

    let eval_state_derivative =
        |x: f64, state: &[f64]| -> Result<Vec<f64>, EvalError> {
            let env = PointEnv {
                x,
                state,
                layout: &layout,
                derived: &HashMap::new(),
            };
            let mut out = vec![0.0; layout.len];
            for a in 0..ctx.p() {
                let n = layout.orders[a];
                for j in 0..n {
                    let slot = layout.offsets[a] + j;
                    if j + 1 < n {
                        out[slot] = state[layout.offsets[a] + j + 1];
                    } else {
                        out[slot] = eval_f64(&top_rhs[a], &|s: &Arc<Sym>| env.get(s))?;
                    }
                }
            }
            Ok(out)
        };

    let mut xs = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0;
    let mut state = init.to_vec();
    xs.push(x);
    states.push(state.clone());
    let mut diagnostic = None;
    for _ in 0..steps {
        let result = (|| -> Result<Vec<f64>, EvalError> {
            let k1 = eval_state_derivative(x, &state)?;
            let s2: Vec<f64> = state
                .iter()
                .zip(&k1)
                .map(|(s, k)| s + 0.5 * step * k)
                .collect();
            let k2 = eval_state_derivative(x + 0.5 * step, &s2)?;
            let s3: Vec<f64> = state
                .iter()
                .zip(&k2)
                .map(|(s, k)| s + 0.5 * step * k)
                .collect();
            let k3 = eval_state_derivative(x + 0.5 * step, &s3)?;
            let s4: Vec<f64> = state
                .iter()
                .zip(&k3)
                .map(|(s, k)| s + step * k)
                .collect();
            let k4 = eval_state_derivative(x + step, &s4)?;
            Ok(state
                .iter()
                .enumerate()
                .map(|(i, s)| s + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        })();
        match result {
            Ok(next) => {
                x += step;
                state = next;
                xs.push(x);
                states.push(state.clone());
            }
            Err(e) => {
                diagnostic = Some(format!("integration stopped at x = {x}: {e}"));
                break;
            }
        }
    }
    Ok(Trajectory {
        ctx: ctx.clone(),
        eq: eq.clone(),
        layout,
        xs,
        states,
        step,
        diagnostic,
    })
}

/// What [`verify_along`] asserts about the sampled values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Maximum relative deviation from the initial value stays within
    /// tolerance.
    Constant,
    /// Maximum absolute value stays within `tol * scale`, with `scale`
    /// one plus the trajectory's state norm.
    Zero,
}

/// Result of a trajectory check.
#[derive(Debug, Clone)]
pub struct AlongReport {
    pub max_deviation: f64,
    pub tol: f64,
    pub scale: f64,
    pub pass: bool,
}

/// Verify that `e` is constant (or identically zero) along a trajectory.
pub fn verify_along(
    e: &Expr,
    traj: &Trajectory,
    mode: Mode,
    tol: f64,
) -> Result<AlongReport, NumError> {
    let values = traj.sample(e)?;
    if values.is_empty() {
        return Err(NumError::Empty);
    }
    let (max_deviation, scale) = match mode {
        Mode::Constant => {
            let v0 = values[0];
            let denom = if v0.abs() > 1e-9 { v0.abs() } else { 1.0 };
            let dev = values
                .iter()
                .map(|v| (v - v0).abs() / denom)
                .fold(0.0, f64::max);
            (dev, denom)
        }
        Mode::Zero => {
            let scale = 1.0 + traj.state_scale();
            let dev = values.iter().map(|v| v.abs()).fold(0.0, f64::max) / scale;
            (dev, scale)
        }
    };
    Ok(AlongReport {
        max_deviation,
        tol,
        scale,
        pass: max_deviation <= tol,
    })
}

/// Compare the sampled total derivative of `e` against a five-point
/// central-difference derivative of `e`'s own samples. Validates the chain
/// structure of the total derivative numerically.
pub fn finite_difference_check(
    e: &Expr,
    traj: &Trajectory,
    tol: f64,
) -> Result<AlongReport, NumError> {
    if traj.len() < 5 {
        return Err(NumError::Empty);
    }
    let values = traj.sample(e)?;
    let derivative = traj.sample(&traj.ctx.total_derivative(e, 0))?;
    let h = traj.step;
    let scale = 1.0
        + derivative
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
    let mut max_deviation: f64 = 0.0;
    for i in 2..traj.len() - 2 {
        let fd = (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2])
            / (12.0 * h);
        max_deviation = max_deviation.max((fd - derivative[i]).abs());
    }
    max_deviation /= scale;
    Ok(AlongReport {
        max_deviation,
        tol,
        scale,
        pass: max_deviation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn oscillator() -> (JetContext, SolvedEquation) {
        let ctx = JetContext::with_vars(&["x"], &["u"], 2).unwrap();
        let t = ctx.table().clone();
        let eq = SolvedEquation::from_leading_exprs(
            &ctx,
            vec![(parse("u_xx", &t).unwrap(), parse("-u", &t).unwrap())],
        )
        .unwrap();
        (ctx, eq)
    }

    #[test]
    fn rk4_accuracy_on_cosine() {
        let (ctx, eq) = oscillator();
        let two_pi = std::f64::consts::TAU;
        let traj = rk4_integrate(&ctx, &eq, 0.0, &[1.0, 0.0], 0.01, two_pi).unwrap();
        assert!(traj.diagnostic.is_none());
        let last = traj.states.last().unwrap();
        assert!((last[0] - 1.0).abs() <= 1e-7, "endpoint error {}", (last[0] - 1.0).abs());
    }

    #[test]
    fn constant_equation_is_exact() {
        let ctx = JetContext::with_vars(&["x"], &["u"], 1).unwrap();
        let t = ctx.table().clone();
        let eq =
            SolvedEquation::from_leading_exprs(&ctx, vec![(parse("u_x", &t).unwrap(), Expr::zero())])
                .unwrap();
        let traj = rk4_integrate(&ctx, &eq, 0.0, &[3.5], 0.1, 1.0).unwrap();
        assert!(traj.states.iter().all(|s| s[0] == 3.5));
    }

    #[test]
    fn exponential_growth_accuracy() {
        let ctx = JetContext::with_vars(&["x"], &["u"], 1).unwrap();
        let t = ctx.table().clone();
        let eq = SolvedEquation::from_leading_exprs(
            &ctx,
            vec![(parse("u_x", &t).unwrap(), parse("u", &t).unwrap())],
        )
        .unwrap();
        let traj = rk4_integrate(&ctx, &eq, 0.0, &[1.0], 0.01, 1.0).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last[0] - std::f64::consts::E).abs() <= 1e-8);
    }

    #[test]
    fn energy_is_constant() {
        let (ctx, eq) = oscillator();
        let t = ctx.table().clone();
        let traj = rk4_integrate(&ctx, &eq, 0.0, &[1.0, 0.0], 0.01, std::f64::consts::TAU)
            .unwrap();
        let energy = parse("(u_x^2 + u^2)/2", &t).unwrap();
        let report = verify_along(&energy, &traj, Mode::Constant, 1e-6).unwrap();
        assert!(report.pass, "energy deviation {}", report.max_deviation);
        // The equation residual vanishes along its own trajectory (filled
        // from the derivative slots).
        let residual = parse("u_xx + u", &t).unwrap();
        let zr = verify_along(&residual, &traj, Mode::Zero, 1e-8).unwrap();
        assert!(zr.pass);
    }

    #[test]
    fn finite_differences_match_total_derivative() {
        let (ctx, eq) = oscillator();
        let t = ctx.table().clone();
        let traj = rk4_integrate(&ctx, &eq, 0.0, &[1.0, 0.0], 0.01, 2.0).unwrap();
        for text in ["u^2", "x", "u_x"] {
            let e = parse(text, &t).unwrap();
            let report = finite_difference_check(&e, &traj, 1e-5).unwrap();
            assert!(report.pass, "`{text}` deviation {}", report.max_deviation);
        }
    }

    #[test]
    fn pole_truncates_with_diagnostic() {
        // u' = u^2, u(0) = 1 blows up at x = 1; 1/u hits a pole in
        // evaluation of 1/(1-x)-like growth. Use log to force a domain
        // error instead: u' = log(u), u(0) = 0.5 -> u decreases through 0.
        let ctx = JetContext::with_vars(&["x"], &["u"], 1).unwrap();
        let t = ctx.table().clone();
        let eq = SolvedEquation::from_leading_exprs(
            &ctx,
            vec![(parse("u_x", &t).unwrap(), parse("log(u)", &t).unwrap())],
        )
        .unwrap();
        let traj = rk4_integrate(&ctx, &eq, 0.0, &[0.5], 0.05, 5.0).unwrap();
        assert!(traj.diagnostic.is_some());
        assert!(!traj.is_empty());
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let (ctx, eq) = oscillator();
        let traj = rk4_integrate(&ctx, &eq, 0.0, &[1.0, 0.0], 0.1, 1.0).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,u,u_x,u_xx");
        assert_eq!(lines.count(), traj.len());
    }
}
