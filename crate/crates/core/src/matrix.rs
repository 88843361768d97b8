//! Small square matrices of expressions (gauge factors, matrix-valued
//! one-form coefficients).

use std::fmt;

use thiserror::Error;

use crate::expr::{is_zero, Expr, Trivalent};
use crate::jet::JetContext;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix rows have unequal lengths or the matrix is not square")]
    Shape,
    #[error("matrix is singular (determinant is identically zero)")]
    Singular,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprMatrix {
    n: usize,
    data: Vec<Expr>,
}

impl ExprMatrix {
    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(MatrixError::Shape);
        }
        Ok(ExprMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExprMatrix::zero(n);
        for i in 0..n {
            m.data[i * n + i] = Expr::one();
        }
        m
    }

    pub fn zero(n: usize) -> Self {
        ExprMatrix {
            n,
            data: vec![Expr::zero(); n * n],
        }
    }

    pub fn scalar(e: Expr) -> Self {
        ExprMatrix { n: 1, data: vec![e] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &Expr {
        &self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, e: Expr) {
        self.data[r * self.n + c] = e;
    }

    pub fn rows(&self) -> Vec<Vec<Expr>> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c).clone()).collect())
            .collect()
    }

    pub fn map<F: Fn(&Expr) -> Expr>(&self, f: F) -> Self {
        ExprMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        ExprMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        ExprMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = ExprMatrix::zero(n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = Vec::with_capacity(n);
                for k in 0..n {
                    acc.push(self.get(r, k) * other.get(k, c));
                }
                out.set(r, c, Expr::add_all(acc));
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Expr]) -> Vec<Expr> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|r| Expr::add_all((0..self.n).map(|c| self.get(r, c) * &v[c])))
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Entry-wise total derivative.
    pub fn total_derivative(&self, ctx: &JetContext, i: usize) -> Self {
        self.map(|e| ctx.total_derivative(e, i))
    }

    pub fn det(&self) -> Expr {
        match self.n {
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            _ => {
                // Cofactor expansion along the first row; fine at the small
                // sizes this engine deals with.
                let mut terms = Vec::new();
                for c in 0..self.n {
                    let minor = self.minor(0, c);
                    let cofactor = minor.det();
                    let signed = if c % 2 == 0 {
                        self.get(0, c) * &cofactor
                    } else {
                        -(self.get(0, c) * &cofactor)
                    };
                    terms.push(signed);
                }
                Expr::add_all(terms)
            }
        }
    }

    fn minor(&self, row: usize, col: usize) -> ExprMatrix {
        let n = self.n - 1;
        let mut data = Vec::with_capacity(n * n);
        for r in 0..self.n {
            if r == row {
                continue;
            }
            for c in 0..self.n {
                if c == col {
                    continue;
                }
                data.push(self.get(r, c).clone());
            }
        }
        ExprMatrix { n, data }
    }

    /// Symbolic inverse via the adjugate. Errors when the determinant is
    /// identically zero (`is_zero == yes`).
    pub fn inverse(&self) -> Result<ExprMatrix, MatrixError> {
        let det = self.det();
        if is_zero(&det) == Trivalent::Yes {
            return Err(MatrixError::Singular);
        }
        let inv_det = det.recip();
        if self.n == 1 {
            return Ok(ExprMatrix::scalar(inv_det));
        }
        let mut out = ExprMatrix::zero(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                let minor = self.minor(r, c);
                let cof = minor.det();
                let signed = if (r + c) % 2 == 0 { cof } else { -cof };
                // Adjugate transposes the cofactor matrix.
                out.set(c, r, signed * &inv_det);
            }
        }
        Ok(out)
    }

    /// Entry-wise zero test aggregated with [`Trivalent::and`].
    pub fn all_zero(&self) -> Trivalent {
        self.data
            .iter()
            .map(is_zero)
            .fold(Trivalent::Yes, Trivalent::and)
    }
}

impl fmt::Display for ExprMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.n {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.n {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "]")
    }
}
