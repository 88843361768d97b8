//! Command-line front end for the twisted-symmetry engine.

mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};

use problem::Problem;
use report::{Outcome, Report};
use twistsym_core::compat::{gauge_factor_check, maurer_cartan_check, Compatibility};
use twistsym_core::expr::Expr;
use twistsym_core::numcheck::{rk4_integrate, verify_along, Mode};
use twistsym_core::prolong::{lambda_prolong, mu_prolong, standard_prolong, Twist};
use twistsym_core::reduce::{ibd_next, reduce_order, verify_invariant};
use twistsym_core::symmetry::check_symmetry;
use twistsym_core::variational::{
    check_characteristic_factorization, check_variational_lambda, find_boundary_term,
    find_factorization_term, lambda_conservation_residual, ConservedVerdict, Lagrangian,
};

#[derive(Parser)]
#[command(
    name = "twistsym",
    about = "Twisted (lambda/mu) prolongations and symmetries of ODEs/PDEs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit the machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args)]
struct ProblemArg {
    /// Problem file (JSON).
    problem: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a prolongation coefficient table.
    Prolong {
        #[command(flatten)]
        problem: ProblemArg,
        /// Prolongation order.
        #[arg(long)]
        order: usize,
        /// Scalar lambda expression (overrides the problem file).
        #[arg(long)]
        lambda: Option<String>,
        /// JSON file with mu coefficient matrices (overrides the problem file).
        #[arg(long, conflicts_with = "lambda")]
        mu: Option<PathBuf>,
    },
    /// Check the (twisted) symmetry condition for the declared field.
    Check {
        #[command(flatten)]
        problem: ProblemArg,
        /// Twist to use: none, lambda or mu. Default: inferred from the file.
        #[arg(long)]
        twist: Option<String>,
        /// Best-effort search for a polynomial lambda of this degree when
        /// the problem declares none.
        #[arg(long, conflicts_with = "twist")]
        search_lambda: Option<u32>,
    },
    /// Verify invariants and generate the invariants-by-differentiation tower.
    Invariants {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        eta: Option<String>,
        #[arg(long)]
        zeta: Option<String>,
        /// Generate tower entries up to this jet order.
        #[arg(long)]
        tower: Option<usize>,
    },
    /// Reduce the order of a scalar ODE by a verified lambda-symmetry.
    Reduce {
        #[command(flatten)]
        problem: ProblemArg,
    },
    /// Run the variational chain: boundary term, factorization, conservation.
    Noether {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long = "B")]
        boundary: Option<String>,
        #[arg(long = "P")]
        factor: Option<String>,
        #[arg(long = "R")]
        current: Option<String>,
    },
    /// Check the horizontal Maurer-Cartan compatibility of mu.
    McCheck {
        #[command(flatten)]
        problem: ProblemArg,
        /// Accept compatibility holding only on the solution manifold.
        #[arg(long)]
        on_solutions: bool,
    },
    /// Integrate the equation and verify expressions along the trajectory.
    VerifyNum {
        #[command(flatten)]
        problem: ProblemArg,
        /// Step size.
        #[arg(long)]
        h: f64,
        /// Integration horizon.
        #[arg(long = "T")]
        horizon: f64,
        /// Tolerance for every check.
        #[arg(long)]
        tol: f64,
        /// Write the trajectory (x, u^a, derivatives) as CSV.
        #[arg(long)]
        dump_csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match dispatch(&cli.command) {
        Ok(mut report) => {
            report.timing_ms = start.elapsed().as_millis();
            if cli.json {
                println!("{}", report.render_json());
            } else {
                print!("{}", report.render_human());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(command: &Command) -> Result<Report> {
    match command {
        Command::Prolong {
            problem,
            order,
            lambda,
            mu,
        } => cmd_prolong(problem, *order, lambda.as_deref(), mu.as_deref()),
        Command::Check {
            problem,
            twist,
            search_lambda,
        } => cmd_check(problem, twist.as_deref(), *search_lambda),
        Command::Invariants {
            problem,
            eta,
            zeta,
            tower,
        } => cmd_invariants(problem, eta.as_deref(), zeta.as_deref(), *tower),
        Command::Reduce { problem } => cmd_reduce(problem),
        Command::Noether {
            problem,
            boundary,
            factor,
            current,
        } => cmd_noether(
            problem,
            boundary.as_deref(),
            factor.as_deref(),
            current.as_deref(),
        ),
        Command::McCheck {
            problem,
            on_solutions,
        } => cmd_mc_check(problem, *on_solutions),
        Command::VerifyNum {
            problem,
            h,
            horizon,
            tol,
            dump_csv,
        } => cmd_verify_num(problem, *h, *horizon, *tol, dump_csv.as_deref()),
    }
}

fn echo_common(report: &mut Report, p: &Problem) {
    if let Some(eq) = &p.equation {
        let rendered: Vec<String> = eq
            .entries()
            .iter()
            .map(|(a, k, rhs)| format!("{} = {rhs}", p.table.jet_name(*a, k)))
            .collect();
        report.input("equations", rendered);
    }
    if let Some(f) = &p.field {
        let xi: Vec<String> = f.xi().iter().map(|e| e.to_string()).collect();
        let phi: Vec<String> = f.phi().iter().map(|e| e.to_string()).collect();
        report.input("field.xi", xi);
        report.input("field.phi", phi);
    }
    if let Some(l) = &p.lambda {
        report.input("lambda", l.to_string());
    }
    if let Some(mu) = &p.mu {
        let rendered: Vec<Vec<Vec<String>>> = mu
            .mats()
            .iter()
            .map(|m| {
                m.rows()
                    .iter()
                    .map(|r| r.iter().map(|e| e.to_string()).collect())
                    .collect()
            })
            .collect();
        report.input(
            "mu",
            serde_json::to_value(rendered).expect("mu serialization"),
        );
    }
}

/// Twist selected by explicit request or inferred from the declarations.
fn select_twist(p: &Problem, requested: Option<&str>) -> Result<Twist> {
    match requested {
        Some("none") => Ok(Twist::Standard),
        Some("lambda") => Ok(Twist::Lambda(p.lambda()?.clone())),
        Some("mu") => Ok(Twist::Mu(p.mu()?.clone())),
        Some(other) => bail!("unknown twist `{other}` (expected none, lambda or mu)"),
        None => Ok(match (&p.lambda, &p.mu) {
            (Some(l), None) => Twist::Lambda(l.clone()),
            (None, Some(m)) => Twist::Mu(m.clone()),
            (None, None) => Twist::Standard,
            (Some(_), Some(_)) => unreachable!("rejected at load time"),
        }),
    }
}

fn build_prolongation(
    p: &Problem,
    twist: &Twist,
    order: usize,
) -> Result<twistsym_core::prolong::ProlongedField> {
    let field = p.field()?;
    Ok(match twist {
        Twist::Standard => standard_prolong(&p.ctx, field, order)?,
        Twist::Lambda(l) => lambda_prolong(&p.ctx, field, l, order)?,
        Twist::Mu(m) => mu_prolong(&p.ctx, field, m, order)?,
    })
}

fn cmd_prolong(
    arg: &ProblemArg,
    order: usize,
    lambda_flag: Option<&str>,
    mu_flag: Option<&std::path::Path>,
) -> Result<Report> {
    let mut p = Problem::load(&arg.problem)?;
    if let Some(text) = lambda_flag {
        let l = p.parse(text)?;
        p.lambda = Some(l);
        p.mu = None;
    }
    if let Some(path) = mu_flag {
        let raw = std::fs::read_to_string(path)?;
        let mats: Vec<Vec<Vec<String>>> = serde_json::from_str(&raw)?;
        p.mu = Some(problem::build_mu(&p.ctx, &p.table, &mats)?);
        p.lambda = None;
    }
    let mut report = Report::new("prolong");
    echo_common(&mut report, &p);
    report.input("order", order as i64);
    let twist = select_twist(&p, None)?;
    let prolonged = build_prolongation(&p, &twist, order)?;
    let mut table = serde_json::Map::new();
    for ((a, j), psi) in prolonged.table() {
        if j.order() == 0 {
            continue;
        }
        table.insert(
            p.table.jet_name(*a, j),
            serde_json::Value::String(psi.to_string()),
        );
    }
    report.data("table", serde_json::Value::Object(table));
    Ok(report)
}

fn cmd_check(
    arg: &ProblemArg,
    twist_flag: Option<&str>,
    search_lambda: Option<u32>,
) -> Result<Report> {
    let p = Problem::load(&arg.problem)?;
    let mut report = Report::new("check");
    echo_common(&mut report, &p);
    if let Some(degree) = search_lambda {
        let eq = p.equation()?;
        return match twistsym_core::symmetry::search_lambda(&p.ctx, eq, p.field()?, degree)? {
            Some(lambda) => {
                report.input("lambda", lambda.to_string());
                report.data(
                    "search",
                    serde_json::json!({"found": true, "lambda": lambda.to_string()}),
                );
                report.verdict("lambda-symmetry (searched)", "symmetry", Outcome::Positive);
                Ok(report)
            }
            None => {
                report.data("search", serde_json::json!({"found": false}));
                report.verdict("lambda-symmetry (searched)", "not found", Outcome::Undecided);
                Ok(report)
            }
        };
    }
    let twist = select_twist(&p, twist_flag)?;
    let label = match &twist {
        Twist::Standard => "symmetry",
        Twist::Lambda(_) => "lambda-symmetry",
        Twist::Mu(_) => "mu-symmetry",
    };
    let eq = p.equation()?;
    let verdict = check_symmetry(&p.ctx, eq, p.field()?, &twist, eq.order())?;
    for r in &verdict.residuals {
        report.residual(r);
    }
    report.verdict(label, verdict.verdict, verdict.verdict.into());
    Ok(report)
}

fn cmd_invariants(
    arg: &ProblemArg,
    eta_flag: Option<&str>,
    zeta_flag: Option<&str>,
    tower: Option<usize>,
) -> Result<Report> {
    let p = Problem::load(&arg.problem)?;
    let mut report = Report::new("invariants");
    echo_common(&mut report, &p);
    let eta_text = eta_flag
        .map(str::to_owned)
        .or_else(|| p.file.eta.clone())
        .ok_or_else(|| anyhow!("supply --eta or declare `eta` in the problem file"))?;
    let zeta_text = zeta_flag
        .map(str::to_owned)
        .or_else(|| p.file.zeta.clone())
        .ok_or_else(|| anyhow!("supply --zeta or declare `zeta` in the problem file"))?;
    let eta = p.parse(&eta_text)?;
    let zeta = p.parse(&zeta_text)?;
    report.input("eta", eta.to_string());
    report.input("zeta", zeta.to_string());
    let twist = select_twist(&p, None)?;
    let y = build_prolongation(&p, &twist, p.ctx.order())?;
    for (name, e) in [("eta", &eta), ("zeta", &zeta)] {
        let v = verify_invariant(&p.ctx, &y, e);
        report.residual(y.apply(&p.ctx, e));
        report.verdict(&format!("{name} invariant"), v, v.into());
    }
    if let Some(upto) = tower {
        let mut current = zeta.clone();
        let mut entries = Vec::new();
        for step in 2..=upto {
            let rho = ibd_next(&p.ctx, &y, &eta, &current)?;
            let v = verify_invariant(&p.ctx, &y, &rho);
            report.verdict(&format!("rho_{step} invariant"), v, v.into());
            entries.push(serde_json::Value::String(rho.to_string()));
            current = rho;
        }
        report.data("tower", serde_json::Value::Array(entries));
    }
    Ok(report)
}

fn cmd_reduce(arg: &ProblemArg) -> Result<Report> {
    let p = Problem::load(&arg.problem)?;
    let mut report = Report::new("reduce");
    echo_common(&mut report, &p);
    let eta = p.parse(
        p.file
            .eta
            .as_deref()
            .ok_or_else(|| anyhow!("`eta` missing from the problem file"))?,
    )?;
    let zeta = p.parse(
        p.file
            .zeta
            .as_deref()
            .ok_or_else(|| anyhow!("`zeta` missing from the problem file"))?,
    )?;
    report.input("eta", eta.to_string());
    report.input("zeta", zeta.to_string());
    match reduce_order(&p.ctx, p.equation()?, p.field()?, p.lambda()?, &eta, &zeta) {
        Ok(reduced) => {
            report.data(
                "reduced",
                serde_json::json!({
                    "order": reduced.order,
                    "equation": reduced.to_string(),
                    "rhs": reduced.rhs.to_string(),
                }),
            );
            report.verdict("reduction", "reduced", Outcome::Positive);
        }
        Err(err) => {
            report.verdict("reduction", format!("failed: {err}"), Outcome::Negative);
        }
    }
    Ok(report)
}

fn cmd_noether(
    arg: &ProblemArg,
    b_flag: Option<&str>,
    p_flag: Option<&str>,
    r_flag: Option<&str>,
) -> Result<Report> {
    let p = Problem::load(&arg.problem)?;
    let mut report = Report::new("noether");
    echo_common(&mut report, &p);
    let lagrangian = Lagrangian::new(p.parse(
        p.file
            .lagrangian
            .as_deref()
            .ok_or_else(|| anyhow!("`lagrangian` missing from the problem file"))?,
    )?);
    report.input("lagrangian", lagrangian.expr().to_string());
    let field = p.field()?;
    let lambda = p.lambda.clone().unwrap_or_else(Expr::zero);
    report.input("lambda", lambda.to_string());

    // B: supplied or searched.
    let b = match b_flag
        .map(str::to_owned)
        .or_else(|| p.file.boundary_term.clone())
    {
        Some(text) => Some(p.parse(&text)?),
        None => find_boundary_term(&p.ctx, &lagrangian, field, &lambda, 3)?,
    };
    match &b {
        Some(b) => {
            report.input("B", b.to_string());
            let v = check_variational_lambda(&p.ctx, &lagrangian, field, &lambda, b)?;
            report.verdict("variational lambda-symmetry", v, v.into());
        }
        None => {
            report.verdict(
                "variational lambda-symmetry",
                "B not found",
                Outcome::Undecided,
            );
        }
    }

    // P: supplied or searched.
    let factor = match p_flag
        .map(str::to_owned)
        .or_else(|| p.file.factor_term.clone())
    {
        Some(text) => Some(p.parse(&text)?),
        None => find_factorization_term(&p.ctx, &lagrangian, field, &lambda, 3)?,
    };
    match &factor {
        Some(f) => {
            report.input("P", f.to_string());
            let v = check_characteristic_factorization(&p.ctx, &lagrangian, field, &lambda, f)?;
            report.verdict("characteristic factorization", v, v.into());
        }
        None => {
            report.verdict(
                "characteristic factorization",
                "P not found",
                Outcome::Undecided,
            );
        }
    }

    // R: supplied, declared, or defaulted to the boundary term.
    let r = match r_flag
        .map(str::to_owned)
        .or_else(|| p.file.currents.as_ref().and_then(|c| c.first().cloned()))
    {
        Some(text) => Some(p.parse(&text)?),
        None => b.clone(),
    };
    match r {
        Some(r) => {
            report.input("R", r.to_string());
            let cons = lambda_conservation_residual(&p.ctx, &lagrangian, field, &lambda, &r)?;
            report.residual(&cons.residual);
            if let Some(restricted) = &cons.restricted_residual {
                report.residual(restricted);
            }
            let outcome = match cons.verdict {
                ConservedVerdict::Conserved => Outcome::Positive,
                ConservedVerdict::NotConserved => Outcome::Negative,
                _ => Outcome::Undecided,
            };
            report.verdict("conservation law", cons.verdict, outcome);
        }
        None => {
            report.verdict("conservation law", "R not found", Outcome::Undecided);
        }
    }
    Ok(report)
}

fn cmd_mc_check(arg: &ProblemArg, on_solutions: bool) -> Result<Report> {
    let p = Problem::load(&arg.problem)?;
    let mut report = Report::new("mc-check");
    echo_common(&mut report, &p);
    let mu = p.mu()?;
    let eq = if on_solutions {
        Some(p.equation()?)
    } else {
        None
    };
    let mc = maurer_cartan_check(&p.ctx, mu, eq)?;
    for ((i, k), m) in &mc.residuals {
        report.residual(format!("pair ({},{}): {}", i + 1, k + 1, m));
    }
    let outcome = match mc.verdict {
        Compatibility::Everywhere => Outcome::Positive,
        Compatibility::OnSolutionsOnly if on_solutions => Outcome::Positive,
        Compatibility::Undecided => Outcome::Undecided,
        _ => Outcome::Negative,
    };
    report.verdict("maurer-cartan", mc.verdict, outcome);
    // Verify a declared gauge factor against mu when present.
    if p.file.gauge.is_some() {
        let gauge = p.gauge()?;
        let v = gauge_factor_check(&p.ctx, &gauge, mu)?;
        report.verdict("gauge factor", v, v.into());
    }
    Ok(report)
}

fn cmd_verify_num(
    arg: &ProblemArg,
    h: f64,
    horizon: f64,
    tol: f64,
    dump_csv: Option<&std::path::Path>,
) -> Result<Report> {
    let p = Problem::load(&arg.problem)?;
    let mut report = Report::new("verify-num");
    echo_common(&mut report, &p);
    let init = p
        .file
        .init
        .as_ref()
        .ok_or_else(|| anyhow!("`init` missing from the problem file"))?;
    let eq = p.equation()?;
    let traj = rk4_integrate(&p.ctx, eq, init.x0, &init.values, h, horizon)?;
    if let Some(diag) = &traj.diagnostic {
        report.data("diagnostic", serde_json::Value::String(diag.clone()));
    }
    report.input("h", h);
    report.input("T", horizon);
    report.input("tol", tol);
    let checks = p
        .file
        .numeric
        .as_ref()
        .ok_or_else(|| anyhow!("`numeric.checks` missing from the problem file"))?;
    let mut results = Vec::new();
    for check in &checks.checks {
        let e = p.parse(&check.expr)?;
        let mode = match check.mode.as_str() {
            "constant" => Mode::Constant,
            "zero" => Mode::Zero,
            other => bail!("unknown mode `{other}` (expected constant or zero)"),
        };
        let along = verify_along(&e, &traj, mode, tol)?;
        results.push(serde_json::json!({
            "expr": e.to_string(),
            "mode": check.mode,
            "max_deviation": along.max_deviation,
            "tol": tol,
            "pass": along.pass,
        }));
        report.verdict(
            &format!("{} ({})", e, check.mode),
            if along.pass { "pass" } else { "fail" },
            if along.pass {
                Outcome::Positive
            } else {
                Outcome::Negative
            },
        );
    }
    report.data("numeric", serde_json::Value::Array(results));
    if let Some(path) = dump_csv {
        let mut f = std::fs::File::create(path)?;
        traj.write_csv(&mut f, p.ctx.order())
            .map_err(|e| anyhow!("writing CSV: {e}"))?;
        report.data(
            "csv",
            serde_json::Value::String(path.display().to_string()),
        );
    }
    Ok(report)
}
