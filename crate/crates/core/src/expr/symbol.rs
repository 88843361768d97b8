//! Symbols, kernels and the declaration table.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::jet::MultiIndex;

/// What a name stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SymKind {
    /// Independent variable `x^i`.
    Independent { index: usize },
    /// Dependent variable `u^a` (the order-0 jet).
    Dependent { index: usize },
    /// Jet coordinate `u^a_J` with `|J| >= 1`.
    Jet { dep: usize, index: MultiIndex },
    /// Constant parameter.
    Parameter,
}

impl SymKind {
    fn rank(&self) -> u8 {
        match self {
            SymKind::Independent { .. } => 0,
            SymKind::Dependent { .. } => 1,
            SymKind::Jet { .. } => 2,
            SymKind::Parameter => 3,
        }
    }
}

/// An interned symbol. Equality and ordering are structural, so symbols built
/// from equal declarations compare equal across tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sym {
    pub name: String,
    pub kind: SymKind,
}

impl Sym {
    /// Jet order of the symbol: 0 except for jet coordinates.
    pub fn jet_order(&self) -> usize {
        match &self.kind {
            SymKind::Jet { index, .. } => index.order(),
            _ => 0,
        }
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Fixed total order: role rank, then name, then (for jets) dependent index
// and multi-index. Any fixed order works; determinism is what matters.
impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind
            .rank()
            .cmp(&other.kind.rank())
            .then_with(|| match (&self.kind, &other.kind) {
                (SymKind::Jet { dep: d1, index: j1 }, SymKind::Jet { dep: d2, index: j2 }) => {
                    d1.cmp(d2).then_with(|| j1.cmp(j2))
                }
                _ => Ordering::Equal,
            })
            .then_with(|| self.name.cmp(&other.name))
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// An opaque function kernel: a named function of fixed arity whose
/// derivatives stay formal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KernelSym {
    pub name: String,
    pub arity: usize,
}

/// Elementary function heads known to the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
}

impl Elem {
    pub fn name(&self) -> &'static str {
        match self {
            Elem::Exp => "exp",
            Elem::Log => "log",
            Elem::Sin => "sin",
            Elem::Cos => "cos",
            Elem::Tan => "tan",
        }
    }

    pub fn from_name(s: &str) -> Option<Elem> {
        Some(match s {
            "exp" => Elem::Exp,
            "log" => Elem::Log,
            "sin" => Elem::Sin,
            "cos" => Elem::Cos,
            "tan" => Elem::Tan,
            _ => return None,
        })
    }
}

const RESERVED: &[&str] = &["exp", "log", "sin", "cos", "tan", "sqrt"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolError {
    #[error("name `{0}` is already declared")]
    Duplicate(String),
    #[error("name `{0}` is reserved")]
    Reserved(String),
    #[error("invalid name `{0}`: names are a letter followed by letters or digits")]
    InvalidName(String),
    #[error("independent-variable index {0} out of range")]
    BadIndependent(usize),
    #[error("dependent-variable index {0} out of range")]
    BadDependent(usize),
}

#[derive(Debug, Clone, Copy)]
enum Entry {
    Independent(usize),
    Dependent(usize),
    Parameter(usize),
    Kernel(usize),
}

/// Result of resolving a plain name.
#[derive(Debug, Clone)]
pub enum Resolved {
    Independent(Arc<Sym>),
    Dependent(Arc<Sym>),
    Parameter(Arc<Sym>),
    Kernel(Arc<KernelSym>),
}

/// Declaration registry mapping names to roles. Jet-coordinate symbols are
/// derived on demand from (dependent index, multi-index) pairs; their names
/// are rendered deterministically so the pairing is bijective.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    independents: Vec<Arc<Sym>>,
    dependents: Vec<Arc<Sym>>,
    parameters: Vec<Arc<Sym>>,
    kernels: Vec<Arc<KernelSym>>,
    names: HashMap<String, Entry>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric())
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Convenience constructor for the common case.
    pub fn with_vars(independents: &[&str], dependents: &[&str]) -> Result<Self, SymbolError> {
        let mut t = Self::new();
        for n in independents {
            t.declare_independent(n)?;
        }
        for n in dependents {
            t.declare_dependent(n)?;
        }
        Ok(t)
    }

    fn check_name(&self, name: &str) -> Result<(), SymbolError> {
        if !valid_name(name) {
            return Err(SymbolError::InvalidName(name.into()));
        }
        if RESERVED.contains(&name) {
            return Err(SymbolError::Reserved(name.into()));
        }
        if self.names.contains_key(name) {
            return Err(SymbolError::Duplicate(name.into()));
        }
        Ok(())
    }

    pub fn declare_independent(&mut self, name: &str) -> Result<Arc<Sym>, SymbolError> {
        self.check_name(name)?;
        let index = self.independents.len();
        let sym = Arc::new(Sym {
            name: name.into(),
            kind: SymKind::Independent { index },
        });
        self.names.insert(name.into(), Entry::Independent(index));
        self.independents.push(sym.clone());
        Ok(sym)
    }

    pub fn declare_dependent(&mut self, name: &str) -> Result<Arc<Sym>, SymbolError> {
        self.check_name(name)?;
        let index = self.dependents.len();
        let sym = Arc::new(Sym {
            name: name.into(),
            kind: SymKind::Dependent { index },
        });
        self.names.insert(name.into(), Entry::Dependent(index));
        self.dependents.push(sym.clone());
        Ok(sym)
    }

    pub fn declare_parameter(&mut self, name: &str) -> Result<Arc<Sym>, SymbolError> {
        self.check_name(name)?;
        let sym = Arc::new(Sym {
            name: name.into(),
            kind: SymKind::Parameter,
        });
        self.names
            .insert(name.into(), Entry::Parameter(self.parameters.len()));
        self.parameters.push(sym.clone());
        Ok(sym)
    }

    pub fn declare_kernel(&mut self, name: &str, arity: usize) -> Result<Arc<KernelSym>, SymbolError> {
        self.check_name(name)?;
        let k = Arc::new(KernelSym {
            name: name.into(),
            arity,
        });
        self.names.insert(name.into(), Entry::Kernel(self.kernels.len()));
        self.kernels.push(k.clone());
        Ok(k)
    }

    /// Number of independent variables.
    pub fn q(&self) -> usize {
        self.independents.len()
    }

    /// Number of dependent variables.
    pub fn p(&self) -> usize {
        self.dependents.len()
    }

    pub fn independent(&self, i: usize) -> Result<Arc<Sym>, SymbolError> {
        self.independents
            .get(i)
            .cloned()
            .ok_or(SymbolError::BadIndependent(i))
    }

    pub fn dependent(&self, a: usize) -> Result<Arc<Sym>, SymbolError> {
        self.dependents
            .get(a)
            .cloned()
            .ok_or(SymbolError::BadDependent(a))
    }

    pub fn independents(&self) -> &[Arc<Sym>] {
        &self.independents
    }

    pub fn dependents(&self) -> &[Arc<Sym>] {
        &self.dependents
    }

    pub fn lookup(&self, name: &str) -> Option<Resolved> {
        Some(match *self.names.get(name)? {
            Entry::Independent(i) => Resolved::Independent(self.independents[i].clone()),
            Entry::Dependent(a) => Resolved::Dependent(self.dependents[a].clone()),
            Entry::Parameter(i) => Resolved::Parameter(self.parameters[i].clone()),
            Entry::Kernel(i) => Resolved::Kernel(self.kernels[i].clone()),
        })
    }

    /// The jet-coordinate symbol `u^a_J`. An empty multi-index yields the
    /// dependent symbol itself, keeping order-0 representation unique.
    pub fn jet(&self, dep: usize, index: &MultiIndex) -> Result<Arc<Sym>, SymbolError> {
        let base = self
            .dependents
            .get(dep)
            .ok_or(SymbolError::BadDependent(dep))?;
        if index.order() == 0 {
            return Ok(base.clone());
        }
        for &i in index.iter() {
            if i >= self.q() {
                return Err(SymbolError::BadIndependent(i));
            }
        }
        let name = self.jet_name(dep, index);
        Ok(Arc::new(Sym {
            name,
            kind: SymKind::Jet {
                dep,
                index: index.clone(),
            },
        }))
    }

    /// Deterministic rendering of a jet-coordinate name: suffix form
    /// `u_xxy` when every independent name is a single letter, indexed form
    /// `u[1,1,2]` (1-based) otherwise.
    pub fn jet_name(&self, dep: usize, index: &MultiIndex) -> String {
        let base = &self.dependents[dep].name;
        let single = self
            .independents
            .iter()
            .all(|s| s.name.chars().count() == 1 && s.name.chars().all(|c| c.is_ascii_alphabetic()));
        if single {
            let mut s = format!("{base}_");
            for &i in index.iter() {
                s.push_str(&self.independents[i].name);
            }
            s
        } else {
            let parts: Vec<String> = index.iter().map(|&i| (i + 1).to_string()).collect();
            format!("{base}[{}]", parts.join(","))
        }
    }
}
