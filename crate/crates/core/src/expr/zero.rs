//! Sound-but-incomplete zero testing.
//!
//! Polynomials and rational functions in jet coordinates are decided by
//! expansion to a sparse normal form (a fraction of multivariate polynomials
//! over "atoms": symbols, irreducible function applications, kernels and
//! fractional powers). Exponential factors are tracked by their summed
//! arguments so that `exp(-f)*exp(f)` cancels across expanded products.
//! Remaining transcendental identities fall back to sampling, which can
//! prove non-vanishing but never vanishing.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::build::{mk_add, mk_mul, mk_pow};
use super::eval::{eval_f64, eval_rat, is_rational_expr, rat_to_f64};
use super::{Expr, Node, Rat, Sym};

/// Three-valued verdict of the zero test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trivalent {
    Yes,
    No,
    Unknown,
}

impl Trivalent {
    pub fn is_yes(&self) -> bool {
        matches!(self, Trivalent::Yes)
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Trivalent::No)
    }

    /// Conjunction for "all residuals vanish" style aggregation: any `No`
    /// dominates, otherwise any `Unknown` degrades the verdict.
    pub fn and(self, other: Trivalent) -> Trivalent {
        match (self, other) {
            (Trivalent::No, _) | (_, Trivalent::No) => Trivalent::No,
            (Trivalent::Yes, Trivalent::Yes) => Trivalent::Yes,
            _ => Trivalent::Unknown,
        }
    }
}

impl std::fmt::Display for Trivalent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trivalent::Yes => "yes",
            Trivalent::No => "no",
            Trivalent::Unknown => "unknown",
        })
    }
}

const MAX_TERMS: usize = 100_000;

#[derive(Debug)]
pub(crate) struct NormalizeOverflow;

#[derive(Default)]
pub(crate) struct AtomTable {
    atoms: Vec<Expr>,
    index: HashMap<Expr, u32>,
}

impl AtomTable {
    pub(crate) fn intern(&mut self, e: &Expr) -> u32 {
        if let Some(&i) = self.index.get(e) {
            return i;
        }
        let i = self.atoms.len() as u32;
        self.atoms.push(e.clone());
        self.index.insert(e.clone(), i);
        i
    }

    pub(crate) fn get(&self, i: u32) -> &Expr {
        &self.atoms[i as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.atoms.len()
    }
}

/// Monomial: an exponential part `exp(exp_arg)` (with `exp_arg` a canonical
/// expression, zero meaning none) times a product of atom powers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Mono {
    pub exp_arg: Expr,
    pub pows: Vec<(u32, u32)>,
}

impl Mono {
    fn unit() -> Mono {
        Mono {
            exp_arg: Expr::zero(),
            pows: Vec::new(),
        }
    }

    fn atom(i: u32) -> Mono {
        Mono {
            exp_arg: Expr::zero(),
            pows: vec![(i, 1)],
        }
    }

    fn exp(arg: Expr) -> Mono {
        Mono {
            exp_arg: arg,
            pows: Vec::new(),
        }
    }

    fn mul(&self, other: &Mono) -> Mono {
        let exp_arg = if self.exp_arg.is_zero_const() {
            other.exp_arg.clone()
        } else if other.exp_arg.is_zero_const() {
            self.exp_arg.clone()
        } else {
            mk_add(vec![self.exp_arg.clone(), other.exp_arg.clone()])
        };
        let mut pows = Vec::with_capacity(self.pows.len() + other.pows.len());
        let (mut i, mut j) = (0, 0);
        while i < self.pows.len() && j < other.pows.len() {
            match self.pows[i].0.cmp(&other.pows[j].0) {
                std::cmp::Ordering::Less => {
                    pows.push(self.pows[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    pows.push(other.pows[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    pows.push((self.pows[i].0, self.pows[i].1 + other.pows[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        pows.extend_from_slice(&self.pows[i..]);
        pows.extend_from_slice(&other.pows[j..]);
        Mono { exp_arg, pows }
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Poly {
    pub terms: BTreeMap<Mono, Rat>,
}

impl Poly {
    pub(crate) fn zero() -> Poly {
        Poly::default()
    }

    pub(crate) fn constant(r: Rat) -> Poly {
        let mut p = Poly::zero();
        if !r.is_zero() {
            p.terms.insert(Mono::unit(), r);
        }
        p
    }

    pub(crate) fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    fn atom(i: u32) -> Poly {
        let mut p = Poly::zero();
        p.terms.insert(Mono::atom(i), Rat::one());
        p
    }

    fn exp(arg: Expr) -> Poly {
        let mut p = Poly::zero();
        p.terms.insert(Mono::exp(arg), Rat::one());
        p
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Result<Poly, NormalizeOverflow> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        if out.terms.len() > MAX_TERMS {
            return Err(NormalizeOverflow);
        }
        Ok(out)
    }

    pub(crate) fn mul(&self, other: &Poly) -> Result<Poly, NormalizeOverflow> {
        if self.terms.len().saturating_mul(other.terms.len()) > MAX_TERMS {
            return Err(NormalizeOverflow);
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        if out.terms.len() > MAX_TERMS {
            return Err(NormalizeOverflow);
        }
        Ok(out)
    }

    pub(crate) fn pow(&self, k: u32) -> Result<Poly, NormalizeOverflow> {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(out)
    }

    /// True when every atom is a plain symbol and no exponential part occurs.
    fn purely_rational(&self, atoms: &AtomTable) -> bool {
        self.terms.iter().all(|(m, _)| {
            m.exp_arg.is_zero_const()
                && m.pows
                    .iter()
                    .all(|&(a, _)| matches!(atoms.get(a).node(), Node::Sym(_)))
        })
    }
}

/// Expand an expression into a fraction (numerator, denominator) of sparse
/// polynomials over interned atoms.
pub(crate) fn fraction(
    e: &Expr,
    atoms: &mut AtomTable,
) -> Result<(Poly, Poly), NormalizeOverflow> {
    match e.node() {
        Node::Num(r) => Ok((Poly::constant(r.clone()), Poly::one())),
        Node::Sym(_) => Ok((Poly::atom(atoms.intern(e)), Poly::one())),
        Node::Fun(super::Elem::Exp, a) => Ok((Poly::exp(a.clone()), Poly::one())),
        Node::Fun(..) | Node::Ker(_) => Ok((Poly::atom(atoms.intern(e)), Poly::one())),
        Node::Add(ts) => {
            let mut num = Poly::zero();
            let mut den = Poly::one();
            for t in ts {
                let (n2, d2) = fraction(t, atoms)?;
                // num/den + n2/d2 = (num*d2 + n2*den) / (den*d2)
                num = num.mul(&d2)?.add(&n2.mul(&den)?)?;
                den = den.mul(&d2)?;
            }
            Ok((num, den))
        }
        Node::Mul(fs) => {
            let mut num = Poly::one();
            let mut den = Poly::one();
            for f in fs {
                let (n2, d2) = fraction(f, atoms)?;
                num = num.mul(&n2)?;
                den = den.mul(&d2)?;
            }
            Ok((num, den))
        }
        Node::Pow(b, r) => {
            let floor = r.floor();
            let frac = r - &floor;
            let mut num = Poly::one();
            let mut den = Poly::one();
            if !floor.is_zero() {
                let k = floor.to_integer();
                let mag: u32 = k
                    .magnitude()
                    .try_into()
                    .map_err(|_| NormalizeOverflow)?;
                let (bn, bd) = fraction(b, atoms)?;
                if k.is_negative() {
                    num = bd.pow(mag)?;
                    den = bn.pow(mag)?;
                } else {
                    num = bn.pow(mag)?;
                    den = bd.pow(mag)?;
                }
            }
            if !frac.is_zero() {
                // The fractional part stays an opaque atom.
                let atom_expr = mk_pow(b.clone(), frac);
                let (an, ad) = match atom_expr.node() {
                    Node::Pow(..) => (Poly::atom(atoms.intern(&atom_expr)), Poly::one()),
                    _ => fraction(&atom_expr, atoms)?,
                };
                num = num.mul(&an)?;
                den = den.mul(&ad)?;
            }
            Ok((num, den))
        }
    }
}

const SAMPLE_ATTEMPTS: usize = 12;
const FLOAT_THRESHOLD: f64 = 1e-6;

/// Deterministic seed so verdicts are stable across runs.
const SAMPLE_SEED: u64 = 0x7453_7953_5eed_0001;

fn rational_palette(rng: &mut ChaCha8Rng) -> Rat {
    // Small rationals away from zero.
    let numer = loop {
        let n: i64 = rng.random_range(-5..=5);
        if n != 0 {
            break n;
        }
    };
    let denom: i64 = rng.random_range(1..=3);
    Rat::new(numer.into(), denom.into())
}

fn sample_exact(e: &Expr) -> Trivalent {
    let syms: Vec<Arc<Sym>> = e.symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    for _ in 0..SAMPLE_ATTEMPTS {
        let assignment: HashMap<Arc<Sym>, Rat> = syms
            .iter()
            .map(|s| (s.clone(), rational_palette(&mut rng)))
            .collect();
        match eval_rat(e, &|s: &Arc<Sym>| assignment.get(s).cloned()) {
            Ok(v) => {
                if !v.is_zero() {
                    return Trivalent::No;
                }
            }
            Err(_) => continue,
        }
    }
    Trivalent::Unknown
}

fn sample_float(e: &Expr) -> Trivalent {
    let syms: Vec<Arc<Sym>> = e.symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ 0xf10a7);
    for _ in 0..SAMPLE_ATTEMPTS {
        let assignment: HashMap<Arc<Sym>, f64> = syms
            .iter()
            .map(|s| (s.clone(), rng.random_range(0.25..2.5)))
            .collect();
        match eval_f64(e, &|s: &Arc<Sym>| assignment.get(s).copied()) {
            Ok(v) => {
                if v.abs() > FLOAT_THRESHOLD {
                    return Trivalent::No;
                }
            }
            Err(_) => continue,
        }
    }
    Trivalent::Unknown
}

/// Decide whether `e` vanishes identically.
///
/// `Yes` is definitive. `No` means a sample point (exact for rational
/// expressions) evaluates away from zero. `Unknown` covers transcendental
/// identities beyond the fixed rewrite list and the expanded normal form.
pub fn is_zero(e: &Expr) -> Trivalent {
    if e.is_zero_const() {
        return Trivalent::Yes;
    }
    // Constants other than zero are already canonical.
    if e.is_num() {
        return Trivalent::No;
    }
    let mut atoms = AtomTable::default();
    match fraction(e, &mut atoms) {
        Ok((num, den)) => {
            if den.is_zero() {
                return Trivalent::Unknown;
            }
            if num.is_zero() {
                return Trivalent::Yes;
            }
            if num.purely_rational(&atoms) && den.purely_rational(&atoms) {
                return Trivalent::No;
            }
            sample_float(e)
        }
        Err(NormalizeOverflow) => {
            if is_rational_expr(e) {
                sample_exact(e)
            } else {
                sample_float(e)
            }
        }
    }
}

/// Convenience: `is_zero(a - b)`.
pub fn equivalent(a: &Expr, b: &Expr) -> Trivalent {
    is_zero(&(a - b))
}

#[allow(dead_code)]
fn debug_poly(p: &Poly, atoms: &AtomTable) -> String {
    let mut out = String::new();
    for (m, c) in &p.terms {
        out.push_str(&format!("{} * [exp({}) ", rat_to_f64(c), m.exp_arg));
        for &(a, k) in &m.pows {
            out.push_str(&format!("{}^{} ", atoms.get(a), k));
        }
        out.push_str("] + ");
    }
    out
}

/// Rebuild an expression from a fraction of polynomials; used to push
/// expressions into an expanded rational normal form.
pub(crate) fn poly_to_expr(p: &Poly, atoms: &AtomTable) -> Expr {
    let mut terms = Vec::with_capacity(p.terms.len());
    for (m, c) in &p.terms {
        let mut factors = vec![Expr::num(c.clone())];
        if !m.exp_arg.is_zero_const() {
            factors.push(Expr::exp(m.exp_arg.clone()));
        }
        for &(a, k) in &m.pows {
            factors.push(mk_pow(atoms.get(a).clone(), Rat::from_integer(k.into())));
        }
        terms.push(mk_mul(factors));
    }
    mk_add(terms)
}

/// Expand `e` to the rational normal form `num/den` and rebuild it as a
/// canonical expression. Distributes products over sums; useful when two
/// algebraic routes must be compared term by term.
pub fn expand(e: &Expr) -> Expr {
    let mut atoms = AtomTable::default();
    match fraction(e, &mut atoms) {
        Ok((num, den)) => {
            let n = poly_to_expr(&num, &atoms);
            let d = poly_to_expr(&den, &atoms);
            if d.is_one() {
                n
            } else {
                n * d.recip()
            }
        }
        Err(_) => e.clone(),
    }
}
