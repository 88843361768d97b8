//! Undetermined-coefficient ansatz machinery: polynomial candidate spaces
//! and exact linear solving of `residual == 0` for unknown parameters.

use std::collections::HashMap;
use std::sync::Arc;

use num::{One, Zero};

use super::build::{mk_add, mk_mul};
use super::calculus::substitute;
use super::zero::{fraction, AtomTable, Mono};
use super::{Expr, Node, Rat, Sym, SymKind};

/// Fresh parameter symbols `c0..c{n-1}` usable as unknowns. They are not
/// registered with any table; structural identity is all the solver needs.
pub fn unknown_params(n: usize, prefix: &str) -> Vec<Arc<Sym>> {
    (0..n)
        .map(|i| {
            Arc::new(Sym {
                name: format!("{prefix}{i}"),
                kind: SymKind::Parameter,
            })
        })
        .collect()
}

/// All monomials in `vars` of total degree <= `max_degree`, including 1.
pub fn monomials_up_to(vars: &[Expr], max_degree: u32) -> Vec<Expr> {
    let mut out = vec![Expr::one()];
    let mut frontier = vec![(Expr::one(), 0usize)];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for (m, start) in &frontier {
            for (vi, v) in vars.iter().enumerate().skip(*start) {
                let nm = mk_mul(vec![m.clone(), v.clone()]);
                out.push(nm.clone());
                next.push((nm, vi));
            }
        }
        frontier = next;
    }
    out
}

/// A linear system `A c = b` over the rationals, extracted from the
/// polynomial normal form of a residual.
struct LinearSystem {
    rows: Vec<(Vec<Rat>, Rat)>,
    n: usize,
}

fn extract_system(residuals: &[Expr], unknowns: &[Arc<Sym>]) -> Option<LinearSystem> {
    let n = unknowns.len();
    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for residual in residuals {
        let mut atoms = AtomTable::default();
        let (num, _den) = fraction(residual, &mut atoms).ok()?;
        let unknown_ids: HashMap<u32, usize> = (0..atoms.len() as u32)
            .filter_map(|i| {
                let e = atoms.get(i);
                if let Node::Sym(s) = e.node() {
                    unknowns.iter().position(|u| u == s).map(|pos| (i, pos))
                } else {
                    None
                }
            })
            .collect();
        // Any unknown hidden inside a compound atom or an exponential
        // argument breaks linearity.
        for i in 0..atoms.len() as u32 {
            if unknown_ids.contains_key(&i) {
                continue;
            }
            let e = atoms.get(i);
            if unknowns.iter().any(|u| e.contains_sym(u)) {
                return None;
            }
        }
        let mut grouped: HashMap<Mono, (Vec<Rat>, Rat)> = HashMap::new();
        for (m, c) in &num.terms {
            if unknowns.iter().any(|u| m.exp_arg.contains_sym(u)) {
                return None;
            }
            let mut carrier = Vec::new();
            let mut unknown: Option<usize> = None;
            for &(a, k) in &m.pows {
                if let Some(&pos) = unknown_ids.get(&a) {
                    if unknown.is_some() || k > 1 {
                        return None; // nonlinear in the unknowns
                    }
                    unknown = Some(pos);
                } else {
                    carrier.push((a, k));
                }
            }
            let key = Mono {
                exp_arg: m.exp_arg.clone(),
                pows: carrier,
            };
            let entry = grouped
                .entry(key)
                .or_insert_with(|| (vec![Rat::zero(); n], Rat::zero()));
            match unknown {
                Some(pos) => entry.0[pos] += c,
                None => entry.1 += c,
            }
        }
        rows.extend(grouped.into_values().map(|(coefs, cst)| (coefs, -cst)));
    }
    Some(LinearSystem { rows, n })
}

/// Exact Gauss–Jordan elimination. Returns a particular solution (free
/// unknowns set to zero), or `None` when inconsistent.
fn gauss_solve(system: &LinearSystem) -> Option<Vec<Rat>> {
    let n = system.n;
    let mut rows: Vec<(Vec<Rat>, Rat)> = system.rows.clone();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i].0[c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = rows[r].0[c].clone().recip();
        for x in rows[r].0.iter_mut() {
            *x *= &inv;
        }
        rows[r].1 *= &inv;
        for i in 0..rows.len() {
            if i != r && !rows[i].0[c].is_zero() {
                let f = rows[i].0[c].clone();
                for j in 0..n {
                    let delta = &f * &rows[r].0[j];
                    rows[i].0[j] -= delta;
                }
                let delta = &f * &rows[r].1;
                rows[i].1 -= delta;
            }
        }
        pivot_cols.push((r, c));
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    // Inconsistency: zero row with nonzero rhs.
    for (coefs, rhs) in rows.iter() {
        if coefs.iter().all(|x| x.is_zero()) && !rhs.is_zero() {
            return None;
        }
    }
    let mut solution = vec![Rat::zero(); n];
    for (row, col) in pivot_cols {
        solution[col] = rows[row].1.clone();
    }
    Some(solution)
}

/// Solve `residual == 0` for the unknown parameters, which must occur
/// linearly (and polynomially) in the residual. Returns the substitution on
/// success; the solution is verified by re-substitution.
pub fn solve_linear(
    residual: &Expr,
    unknowns: &[Arc<Sym>],
) -> Option<HashMap<Arc<Sym>, Expr>> {
    solve_linear_system(std::slice::from_ref(residual), unknowns)
}

/// Solve the stacked system `residuals[i] == 0` jointly.
pub fn solve_linear_system(
    residuals: &[Expr],
    unknowns: &[Arc<Sym>],
) -> Option<HashMap<Arc<Sym>, Expr>> {
    let system = extract_system(residuals, unknowns)?;
    let values = gauss_solve(&system)?;
    let map: HashMap<Arc<Sym>, Expr> = unknowns
        .iter()
        .cloned()
        .zip(values.into_iter().map(Expr::num))
        .collect();
    for residual in residuals {
        let check = substitute(residual, &map);
        if !super::zero::is_zero(&check).is_yes() {
            return None;
        }
    }
    Some(map)
}

/// Basis of the solution space of the homogeneous system `residual == 0`
/// (each basis vector as a substitution map). Used by invariant search.
pub fn nullspace(residual: &Expr, unknowns: &[Arc<Sym>]) -> Vec<HashMap<Arc<Sym>, Rat>> {
    let Some(system) = extract_system(std::slice::from_ref(residual), unknowns) else {
        return Vec::new();
    };
    // Homogeneity check: constant column must vanish, otherwise there is no
    // linear space of solutions.
    if system.rows.iter().any(|(_, b)| !b.is_zero()) {
        return Vec::new();
    }
    let n = system.n;
    let mut rows: Vec<Vec<Rat>> = system.rows.iter().map(|(a, _)| a.clone()).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = rows[r][c].clone().recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot_row = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free_cols {
        let mut v = vec![Rat::zero(); n];
        v[fc] = Rat::one();
        for &(row, col) in &pivots {
            v[col] = -rows[row][fc].clone();
        }
        basis.push(
            unknowns
                .iter()
                .cloned()
                .zip(v)
                .collect::<HashMap<_, _>>(),
        );
    }
    basis
}

/// Build the generic polynomial `sum_i c_i * m_i` over the given monomials.
pub fn generic_combination(monomials: &[Expr], coeffs: &[Arc<Sym>]) -> Expr {
    assert_eq!(monomials.len(), coeffs.len());
    mk_add(
        monomials
            .iter()
            .zip(coeffs)
            .map(|(m, c)| mk_mul(vec![Expr::sym(c), m.clone()]))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::super::{parse, SymbolTable};
    use super::*;

    #[test]
    fn solves_simple_linear_system() {
        let t = SymbolTable::with_vars(&["x"], &["u"]).unwrap();
        let u = parse("u", &t).unwrap();
        let x = parse("x", &t).unwrap();
        let cs = unknown_params(2, "c");
        // (c0 - 2) * u + (c1 + c0) * x == 0  =>  c0 = 2, c1 = -2
        let residual = (Expr::sym(&cs[0]) - Expr::int(2)) * &u
            + (Expr::sym(&cs[1]) + Expr::sym(&cs[0])) * &x;
        let sol = solve_linear(&residual, &cs).unwrap();
        assert_eq!(sol[&cs[0]], Expr::int(2));
        assert_eq!(sol[&cs[1]], Expr::int(-2));
    }

    #[test]
    fn rejects_nonlinear() {
        let t = SymbolTable::with_vars(&["x"], &["u"]).unwrap();
        let u = parse("u", &t).unwrap();
        let cs = unknown_params(1, "c");
        let c = Expr::sym(&cs[0]);
        let residual = &c * &c * &u - Expr::one();
        assert!(solve_linear(&residual, &cs).is_none());
    }

    #[test]
    fn monomial_count() {
        let t = SymbolTable::with_vars(&["x"], &["u"]).unwrap();
        let x = parse("x", &t).unwrap();
        let u = parse("u", &t).unwrap();
        // 1, x, u, x^2, xu, u^2
        assert_eq!(monomials_up_to(&[x, u], 2).len(), 6);
    }
}
