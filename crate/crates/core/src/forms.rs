//! Exterior calculus on jet space: differential forms over the basis
//! `{dx^i, du^a_J}`, the contact module, Cartan-formula Lie derivatives, and
//! the deformed operators `d^mu`, `L^mu` characterizing twisted
//! prolongations.
//!
//! Forms are stored over the raw basis; the contact basis `{dx^i, theta^a_J}`
//! is a view computed on demand by [`DifferentialForm::contact_reduce`].

use std::collections::BTreeMap;
use thiserror::Error;

use crate::expr::{diff, Expr, SymKind};
use crate::jet::{JetContext, MultiIndex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("contraction of a 0-form")]
    ContractZeroForm,
    #[error("operation requires a 1-form")]
    NotOneForm,
}

/// Basis one-form: `dx^i` or `du^a_J`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisForm {
    Dx(usize),
    Du(usize, MultiIndex),
}

impl BasisForm {
    fn display(&self, ctx: &JetContext) -> String {
        match self {
            BasisForm::Dx(i) => format!("dx({})", ctx.x(*i)),
            BasisForm::Du(a, j) => {
                if j.order() == 0 {
                    format!("du({})", ctx.u(*a))
                } else {
                    format!("du({})", ctx.table().jet_name(*a, j))
                }
            }
        }
    }
}

/// Strictly increasing wedge of basis one-forms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct WedgeMono(Vec<BasisForm>);

impl WedgeMono {
    pub fn scalar() -> Self {
        WedgeMono(Vec::new())
    }

    pub fn single(b: BasisForm) -> Self {
        WedgeMono(vec![b])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn factors(&self) -> &[BasisForm] {
        &self.0
    }

    /// Sort a list of basis forms into canonical order, tracking the sign of
    /// the permutation. `None` when a factor repeats.
    fn normalize(mut v: Vec<BasisForm>) -> Option<(WedgeMono, i8)> {
        let mut sign = 1i8;
        // Insertion sort with inversion counting; wedges are tiny.
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        for w in v.windows(2) {
            if w[0] == w[1] {
                return None;
            }
        }
        Some((WedgeMono(v), sign))
    }

    fn wedge(&self, other: &WedgeMono) -> Option<(WedgeMono, i8)> {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        WedgeMono::normalize(v)
    }

    /// Remove the factor at `pos`, returning the contraction sign
    /// `(-1)^pos`.
    fn without(&self, pos: usize) -> (WedgeMono, i8) {
        let mut v = self.0.clone();
        v.remove(pos);
        let sign = if pos.is_multiple_of(2) { 1 } else { -1 };
        (WedgeMono(v), sign)
    }
}

/// Exterior-algebra element with expression coefficients. Mixed degrees are
/// allowed; zero coefficients are pruned.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DifferentialForm {
    terms: BTreeMap<WedgeMono, Expr>,
}

impl DifferentialForm {
    pub fn zero() -> Self {
        DifferentialForm::default()
    }

    /// A 0-form (function).
    pub fn scalar(e: Expr) -> Self {
        let mut f = DifferentialForm::zero();
        f.insert(WedgeMono::scalar(), e);
        f
    }

    pub fn dx(i: usize) -> Self {
        let mut f = DifferentialForm::zero();
        f.insert(WedgeMono::single(BasisForm::Dx(i)), Expr::one());
        f
    }

    pub fn du(a: usize, j: &MultiIndex) -> Self {
        let mut f = DifferentialForm::zero();
        f.insert(WedgeMono::single(BasisForm::Du(a, j.clone())), Expr::one());
        f
    }

    /// Contact form `theta^a_J = du^a_J - u^a_{J,i} dx^i`.
    pub fn contact(ctx: &JetContext, a: usize, j: &MultiIndex) -> Self {
        let mut f = DifferentialForm::du(a, j);
        for i in 0..ctx.q() {
            f = f.add(&DifferentialForm::dx(i).scale(&ctx.jet(a, &j.appended(i)).neg()));
        }
        f
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WedgeMono, &Expr)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &WedgeMono) -> Expr {
        self.terms.get(m).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Aggregated zero test over all coefficients (handles coefficients
    /// that vanish algebraically but not structurally).
    pub fn all_coefficients_zero(&self) -> crate::expr::Trivalent {
        self.terms
            .values()
            .map(crate::expr::is_zero)
            .fold(crate::expr::Trivalent::Yes, crate::expr::Trivalent::and)
    }

    /// Degrees present (sorted, deduplicated).
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|m| m.degree()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    fn insert(&mut self, m: WedgeMono, e: Expr) {
        if e.is_zero_const() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(e);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &e;
                if sum.is_zero_const() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, e) in &other.terms {
            out.insert(m.clone(), e.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Expr::int(-1))
    }

    pub fn scale(&self, e: &Expr) -> Self {
        let mut out = DifferentialForm::zero();
        for (m, c) in &self.terms {
            out.insert(m.clone(), c * e);
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = DifferentialForm::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((m, sign)) = m1.wedge(m2) {
                    let c = if sign >= 0 {
                        c1 * c2
                    } else {
                        -(c1 * c2)
                    };
                    out.insert(m, c);
                }
            }
        }
        out
    }

    /// Exterior derivative. Parameters are constants; `d(dx) = d(du) = 0`.
    pub fn exterior_derivative(&self) -> Self {
        let mut out = DifferentialForm::zero();
        for (m, c) in &self.terms {
            for s in c.symbols() {
                let basis = match &s.kind {
                    SymKind::Independent { index } => BasisForm::Dx(*index),
                    SymKind::Dependent { index } => BasisForm::Du(*index, MultiIndex::empty()),
                    SymKind::Jet { dep, index } => BasisForm::Du(*dep, index.clone()),
                    SymKind::Parameter => continue,
                };
                let dc = diff(c, &s);
                if dc.is_zero_const() {
                    continue;
                }
                if let Some((wm, sign)) = WedgeMono::single(basis).wedge(m) {
                    let coeff = if sign >= 0 { dc } else { -dc };
                    out.insert(wm, coeff);
                }
            }
        }
        out
    }

    /// Interior product `Y ⌋ ω` (contraction on the first slot). Errors when
    /// a 0-form term is present.
    pub fn interior_product(&self, y: &JetVectorField) -> Result<Self, FormsError> {
        let mut out = DifferentialForm::zero();
        for (m, c) in &self.terms {
            if m.degree() == 0 {
                return Err(FormsError::ContractZeroForm);
            }
            for (pos, b) in m.factors().iter().enumerate() {
                let comp = y.component(b);
                if comp.is_zero_const() {
                    continue;
                }
                let (rest, sign) = m.without(pos);
                let val = if sign >= 0 { c * &comp } else { -(c * &comp) };
                out.insert(rest, val);
            }
        }
        Ok(out)
    }

    /// Lie derivative via the Cartan formula `L_Y w = Y ⌋ dw + d(Y ⌋ w)`;
    /// on 0-forms it is `Y(f)`.
    pub fn lie_derivative(&self, y: &JetVectorField) -> Self {
        let mut out = DifferentialForm::zero();
        // Split off the 0-form part, on which L_Y acts as a derivation.
        let mut positive = DifferentialForm::zero();
        for (m, c) in &self.terms {
            if m.degree() == 0 {
                out.insert(WedgeMono::scalar(), y.apply(c));
            } else {
                positive.insert(m.clone(), c.clone());
            }
        }
        if !positive.is_zero() {
            let d = positive.exterior_derivative();
            let t1 = d.interior_product(y).expect("degree >= 1");
            let contracted = positive.interior_product(y).expect("degree >= 1");
            let t2 = contracted.exterior_derivative();
            out = out.add(&t1).add(&t2);
        }
        out
    }

    /// Split a 1-form as `alpha_i dx^i + beta^{a,J} theta^a_J` by the
    /// substitution `du^a_J = theta^a_J + u^a_{J,i} dx^i`. The form lies in
    /// the contact module iff all `alpha_i` vanish.
    pub fn contact_reduce(&self, ctx: &JetContext) -> Result<ContactSplit, FormsError> {
        if self.terms.keys().any(|m| m.degree() != 1) {
            return Err(FormsError::NotOneForm);
        }
        let mut horizontal = vec![Expr::zero(); ctx.q()];
        let mut contact: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
        for (m, c) in &self.terms {
            match &m.factors()[0] {
                BasisForm::Dx(i) => horizontal[*i] = &horizontal[*i] + c,
                BasisForm::Du(a, j) => {
                    for (i, h) in horizontal.iter_mut().enumerate() {
                        *h = &*h + c * ctx.jet(*a, &j.appended(i));
                    }
                    let slot = contact.entry((*a, j.clone())).or_insert_with(Expr::zero);
                    *slot = &*slot + c;
                }
            }
        }
        contact.retain(|_, v| !v.is_zero_const());
        Ok(ContactSplit {
            horizontal,
            contact,
        })
    }

    /// Deformed exterior derivative `d^mu w = dw + mu ∧ w`.
    pub fn deformed_d(&self, mu: &DifferentialForm) -> Self {
        self.exterior_derivative().add(&mu.wedge(self))
    }

    /// Deformed Lie derivative `L^mu_Y w = L_Y w + mu ∧ (Y ⌋ w)`; on
    /// 0-forms it coincides with the ordinary Lie derivative.
    pub fn deformed_lie(&self, y: &JetVectorField, mu: &DifferentialForm) -> Self {
        let mut out = DifferentialForm::zero();
        let mut positive = DifferentialForm::zero();
        for (m, c) in &self.terms {
            if m.degree() == 0 {
                out.insert(WedgeMono::scalar(), y.apply(c));
            } else {
                positive.insert(m.clone(), c.clone());
            }
        }
        if !positive.is_zero() {
            let lie = positive.lie_derivative(y);
            let contracted = positive.interior_product(y).expect("degree >= 1");
            out = out.add(&lie).add(&mu.wedge(&contracted));
        }
        out
    }

    pub fn display(&self, ctx: &JetContext) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let basis: Vec<String> = m.factors().iter().map(|b| b.display(ctx)).collect();
            if basis.is_empty() {
                parts.push(format!("({c})"));
            } else {
                parts.push(format!("({c}) {}", basis.join("^")));
            }
        }
        parts.join(" + ")
    }
}

/// Decomposition of a 1-form over the contact basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactSplit {
    /// Coefficients of `dx^i`.
    pub horizontal: Vec<Expr>,
    /// Coefficients of `theta^a_J`.
    pub contact: BTreeMap<(usize, MultiIndex), Expr>,
}

impl ContactSplit {
    /// Reassemble `alpha_i dx^i + beta theta` into a raw-basis form.
    pub fn reassemble(&self, ctx: &JetContext) -> DifferentialForm {
        let mut out = DifferentialForm::zero();
        for (i, a) in self.horizontal.iter().enumerate() {
            out = out.add(&DifferentialForm::dx(i).scale(a));
        }
        for ((a, j), b) in &self.contact {
            out = out.add(&DifferentialForm::contact(ctx, *a, j).scale(b));
        }
        out
    }
}

/// Vector field on jet space with finitely many nonzero components.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JetVectorField {
    /// Components along `∂/∂x^i`.
    pub xi: Vec<Expr>,
    /// Components along `∂/∂u^a_J` keyed by `(a, J)`.
    pub comps: BTreeMap<(usize, MultiIndex), Expr>,
}

impl JetVectorField {
    pub fn new(xi: Vec<Expr>, comps: BTreeMap<(usize, MultiIndex), Expr>) -> Self {
        let mut comps = comps;
        comps.retain(|_, v| !v.is_zero_const());
        JetVectorField { xi, comps }
    }

    pub fn zero(q: usize) -> Self {
        JetVectorField {
            xi: vec![Expr::zero(); q],
            comps: BTreeMap::new(),
        }
    }

    pub fn component(&self, b: &BasisForm) -> Expr {
        match b {
            BasisForm::Dx(i) => self.xi.get(*i).cloned().unwrap_or_else(Expr::zero),
            BasisForm::Du(a, j) => self
                .comps
                .get(&(*a, j.clone()))
                .cloned()
                .unwrap_or_else(Expr::zero),
        }
    }

    /// Apply the field to a function (first-order derivation).
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut terms = Vec::new();
        for s in f.symbols() {
            let comp = match &s.kind {
                SymKind::Independent { index } => self.xi[*index].clone(),
                SymKind::Dependent { index } => self.component(&BasisForm::Du(*index, MultiIndex::empty())),
                SymKind::Jet { dep, index } => self.component(&BasisForm::Du(*dep, index.clone())),
                SymKind::Parameter => continue,
            };
            if comp.is_zero_const() {
                continue;
            }
            let df = diff(f, &s);
            if df.is_zero_const() {
                continue;
            }
            terms.push(df * comp);
        }
        Expr::add_all(terms)
    }

    pub fn add(&self, other: &Self) -> Self {
        let q = self.xi.len().max(other.xi.len());
        let mut xi = vec![Expr::zero(); q];
        for (i, x) in xi.iter_mut().enumerate() {
            let a = self.xi.get(i).cloned().unwrap_or_else(Expr::zero);
            let b = other.xi.get(i).cloned().unwrap_or_else(Expr::zero);
            *x = a + b;
        }
        let mut comps = self.comps.clone();
        for (k, v) in &other.comps {
            let slot = comps.entry(k.clone()).or_insert_with(Expr::zero);
            *slot = &*slot + v;
        }
        JetVectorField::new(xi, comps)
    }

    pub fn scale(&self, e: &Expr) -> Self {
        JetVectorField::new(
            self.xi.iter().map(|x| x * e).collect(),
            self.comps.iter().map(|(k, v)| (k.clone(), v * e)).collect(),
        )
    }
}
