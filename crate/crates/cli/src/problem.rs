//! Problem-file schema and construction of engine objects from it.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use twistsym_core::expr::{parse, Expr, SymbolTable};
use twistsym_core::jet::{JetContext, SolvedEquation};
use twistsym_core::matrix::ExprMatrix;
use twistsym_core::prolong::{MuForm, PointVectorField};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub independent: Vec<String>,
    pub dependent: Vec<String>,
    #[serde(default)]
    pub parameters: Vec<String>,
    pub order: usize,
    #[serde(default)]
    pub equations: Vec<EquationEntry>,
    #[serde(default)]
    pub field: Option<FieldEntry>,
    #[serde(default)]
    pub lambda: Option<String>,
    /// `mu[i][row][col]`: one coefficient matrix per independent variable.
    #[serde(default)]
    pub mu: Option<Vec<Vec<Vec<String>>>>,
    #[serde(default)]
    pub gauge: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub lagrangian: Option<String>,
    #[serde(default, rename = "B")]
    pub boundary_term: Option<String>,
    #[serde(default, rename = "P")]
    pub factor_term: Option<String>,
    #[serde(default, rename = "R")]
    pub currents: Option<Vec<String>>,
    #[serde(default)]
    pub eta: Option<String>,
    #[serde(default)]
    pub zeta: Option<String>,
    #[serde(default)]
    pub init: Option<InitEntry>,
    #[serde(default)]
    pub numeric: Option<NumericEntry>,
}

#[derive(Debug, Deserialize)]
pub struct EquationEntry {
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Deserialize)]
pub struct FieldEntry {
    pub xi: Vec<String>,
    pub phi: Vec<String>,
}

#[derive(Debug, Deserialize)]
pub struct InitEntry {
    #[serde(default)]
    pub x0: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct NumericEntry {
    pub checks: Vec<NumericCheck>,
}

#[derive(Debug, Deserialize)]
pub struct NumericCheck {
    pub expr: String,
    /// "constant" or "zero".
    pub mode: String,
}

/// Everything the subcommands need, resolved against the declarations.
pub struct Problem {
    pub ctx: JetContext,
    pub table: Arc<SymbolTable>,
    pub file: ProblemFile,
    pub equation: Option<SolvedEquation>,
    pub field: Option<PointVectorField>,
    pub lambda: Option<Expr>,
    pub mu: Option<MuForm>,
}

fn parse_expr(text: &str, table: &SymbolTable) -> Result<Expr> {
    parse(text, table).map_err(|e| anyhow!("in `{text}`: {e}"))
}

impl Problem {
    pub fn load(path: &std::path::Path) -> Result<Problem> {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let file: ProblemFile =
            serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))?;
        Problem::from_file(file)
    }

    pub fn from_file(file: ProblemFile) -> Result<Problem> {
        let mut table = SymbolTable::new();
        for n in &file.independent {
            table.declare_independent(n)?;
        }
        for n in &file.dependent {
            table.declare_dependent(n)?;
        }
        for n in &file.parameters {
            table.declare_parameter(n)?;
        }
        let table = Arc::new(table);
        let ctx = JetContext::new(table.clone(), file.order.max(1))?;

        let equation = if file.equations.is_empty() {
            None
        } else {
            let mut pairs = Vec::new();
            for e in &file.equations {
                pairs.push((parse_expr(&e.lhs, &table)?, parse_expr(&e.rhs, &table)?));
            }
            Some(SolvedEquation::from_leading_exprs(&ctx, pairs)?)
        };

        let field = match &file.field {
            None => None,
            Some(f) => {
                let xi: Vec<Expr> = f
                    .xi
                    .iter()
                    .map(|s| parse_expr(s, &table))
                    .collect::<Result<_>>()?;
                let phi: Vec<Expr> = f
                    .phi
                    .iter()
                    .map(|s| parse_expr(s, &table))
                    .collect::<Result<_>>()?;
                let vertical = xi.iter().all(|e| e.is_zero_const());
                let field = if vertical {
                    PointVectorField::vertical(&ctx, phi)?
                } else {
                    PointVectorField::new(&ctx, xi, phi)?
                };
                Some(field)
            }
        };

        let lambda = file
            .lambda
            .as_deref()
            .map(|s| parse_expr(s, &table))
            .transpose()?;

        let mu = match &file.mu {
            None => None,
            Some(mats) => Some(build_mu(&ctx, &table, mats)?),
        };
        if lambda.is_some() && mu.is_some() {
            bail!("declare exactly one of `lambda` or `mu`, not both");
        }

        Ok(Problem {
            ctx,
            table,
            file,
            equation,
            field,
            lambda,
            mu,
        })
    }

    pub fn equation(&self) -> Result<&SolvedEquation> {
        self.equation
            .as_ref()
            .ok_or_else(|| anyhow!("problem file declares no equations"))
    }

    pub fn field(&self) -> Result<&PointVectorField> {
        self.field
            .as_ref()
            .ok_or_else(|| anyhow!("problem file declares no vector field"))
    }

    pub fn lambda(&self) -> Result<&Expr> {
        self.lambda
            .as_ref()
            .ok_or_else(|| anyhow!("problem file declares no `lambda`"))
    }

    pub fn mu(&self) -> Result<&MuForm> {
        self.mu
            .as_ref()
            .ok_or_else(|| anyhow!("problem file declares no `mu`"))
    }

    pub fn parse(&self, text: &str) -> Result<Expr> {
        parse_expr(text, &self.table)
    }

    pub fn gauge(&self) -> Result<ExprMatrix> {
        let rows = self
            .file
            .gauge
            .as_ref()
            .ok_or_else(|| anyhow!("problem file declares no `gauge` matrix"))?;
        let parsed: Vec<Vec<Expr>> = rows
            .iter()
            .map(|r| r.iter().map(|s| self.parse(s)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        Ok(ExprMatrix::from_rows(parsed)?)
    }
}

pub fn build_mu(
    ctx: &JetContext,
    table: &SymbolTable,
    mats: &[Vec<Vec<String>>],
) -> Result<MuForm> {
    let parsed: Vec<ExprMatrix> = mats
        .iter()
        .map(|rows| {
            let rows: Vec<Vec<Expr>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|s| parse_expr(s, table))
                        .collect::<Result<_>>()
                })
                .collect::<Result<_>>()?;
            Ok(ExprMatrix::from_rows(rows)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MuForm::new(ctx, parsed)?)
}
