//! Exact symbolic kernel over jet coordinates.
//!
//! Expressions are multivariate polynomials with arbitrary-precision rational
//! coefficients in the variables of a [`JetSpace`]: independent variables
//! `x^j`, dependent variables `y^σ`, and derivative coordinates
//! `y^σ_{j1…jm}` indexed by sorted multi-indices. Everything is kept in a
//! canonical form so that equality of expressions is equality of the
//! underlying term maps, which makes identities decidable.

mod expr;

pub use expr::{Expr, Monomial};

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Exact rational scalar used for all symbolic coefficients.
///
/// `num-rational` keeps values reduced with a positive denominator, which is
/// exactly the canonical form the rest of the crate relies on.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from an integer pair. Panics on zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}

/// Shorthand for an integer-valued rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JetError {
    #[error("variable {0} is not in the jet space")]
    VariableNotInSpace(String),
    #[error("no value assigned to variable {0}")]
    MissingAssignment(String),
    #[error("{0}")]
    BadSpace(String),
}

/// Sorted multi-index `j1 ≤ j2 ≤ … ≤ jm` of independent-variable indices.
///
/// The empty index denotes the bare dependent variable. Two spellings of the
/// same derivative (`u_xt`, `u_tx`) normalize to one value.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn new(mut indices: Vec<u8>) -> Self {
        indices.sort_unstable();
        MultiIndex(indices)
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    /// The multi-index with `j` merged in (sort preserved).
    pub fn extended(&self, j: u8) -> Self {
        let mut v = self.0.clone();
        let pos = v.partition_point(|&i| i <= j);
        v.insert(pos, j);
        MultiIndex(v)
    }

    /// Multiset union.
    pub fn union(&self, other: &MultiIndex) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        MultiIndex(v)
    }

    /// How many times `j` occurs.
    pub fn multiplicity(&self, j: u8) -> usize {
        self.0.iter().filter(|&&i| i == j).count()
    }
}

impl Ord for MultiIndex {
    // Graded, then lexicographic: the fixed enumeration used for canonical
    // ordering of jet variables.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One coordinate of a jet space: an independent variable `x^j` or a jet
/// variable `y^σ_J` (with `J` empty for the dependent variable itself).
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum JetVar {
    Indep(u8),
    Jet(u8, MultiIndex),
}

impl JetVar {
    pub fn dep(sigma: u8) -> Self {
        JetVar::Jet(sigma, MultiIndex::empty())
    }

    /// Derivative order of the variable (0 for `x^j` and `y^σ`).
    pub fn order(&self) -> usize {
        match self {
            JetVar::Indep(_) => 0,
            JetVar::Jet(_, idx) => idx.order(),
        }
    }

    /// Display name within `space`, e.g. `x`, `u`, `u_tx`.
    pub fn name(&self, space: &JetSpace) -> String {
        match self {
            JetVar::Indep(j) => space.indep_name(*j).to_string(),
            JetVar::Jet(s, idx) => {
                let mut out = space.dep_name(*s).to_string();
                if !idx.is_empty() {
                    out.push('_');
                    for &j in idx.indices() {
                        out.push_str(space.indep_name(j));
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
struct SpaceData {
    indep: Vec<String>,
    dep: Vec<String>,
    order: usize,
}

/// Finite coordinate model of a jet bundle: `n` independent variables, `l`
/// dependent variables, derivatives up to `order`.
///
/// Cheap to clone (shared internals). Equality compares names and order;
/// expressions only require the name families to match, so promoting the
/// order never breaks identities.
#[derive(Clone, Debug)]
pub struct JetSpace(Arc<SpaceData>);

impl JetSpace {
    /// Independent names must be single letters (they double as derivative
    /// suffix characters); all names must be unique and nonempty.
    pub fn new<S: AsRef<str>>(indep: &[S], dep: &[S], order: usize) -> Result<Self, JetError> {
        if dep.is_empty() {
            return Err(JetError::BadSpace(
                "a jet space needs at least one dependent variable".into(),
            ));
        }
        let indep: Vec<String> = indep.iter().map(|s| s.as_ref().to_string()).collect();
        let dep: Vec<String> = dep.iter().map(|s| s.as_ref().to_string()).collect();
        for name in &indep {
            if name.chars().count() != 1 || !name.chars().all(|c| c.is_ascii_alphabetic()) {
                return Err(JetError::BadSpace(format!(
                    "independent variable name '{name}' must be a single letter \
                     (it appears in derivative suffixes)"
                )));
            }
        }
        for name in &dep {
            let mut chars = name.chars();
            let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
            if !head_ok || !name.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(JetError::BadSpace(format!(
                    "dependent variable name '{name}' must be alphanumeric and start with a letter"
                )));
            }
        }
        let mut all: Vec<&String> = indep.iter().chain(dep.iter()).collect();
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(JetError::BadSpace("variable names must be unique".into()));
        }
        if indep.len() > u8::MAX as usize || dep.len() > u8::MAX as usize {
            return Err(JetError::BadSpace("too many variables".into()));
        }
        Ok(JetSpace(Arc::new(SpaceData { indep, dep, order })))
    }

    pub fn num_indep(&self) -> usize {
        self.0.indep.len()
    }

    pub fn num_dep(&self) -> usize {
        self.0.dep.len()
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn indep_name(&self, j: u8) -> &str {
        &self.0.indep[j as usize]
    }

    pub fn dep_name(&self, sigma: u8) -> &str {
        &self.0.dep[sigma as usize]
    }

    pub fn indep_names(&self) -> &[String] {
        &self.0.indep
    }

    pub fn dep_names(&self) -> &[String] {
        &self.0.dep
    }

    pub fn indep_index(&self, name: &str) -> Option<u8> {
        self.0.indep.iter().position(|n| n == name).map(|i| i as u8)
    }

    pub fn dep_index(&self, name: &str) -> Option<u8> {
        self.0.dep.iter().position(|n| n == name).map(|i| i as u8)
    }

    /// Same space with the derivative order raised to at least `order`.
    pub fn with_order(&self, order: usize) -> JetSpace {
        if order == self.0.order {
            return self.clone();
        }
        JetSpace(Arc::new(SpaceData {
            indep: self.0.indep.clone(),
            dep: self.0.dep.clone(),
            order,
        }))
    }

    /// Same variable families (names), any order.
    pub fn same_family(&self, other: &JetSpace) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.indep == other.0.indep && self.0.dep == other.0.dep)
    }

    /// Checks that `v` denotes a coordinate of this space.
    pub fn contains(&self, v: &JetVar) -> bool {
        match v {
            JetVar::Indep(j) => (*j as usize) < self.num_indep(),
            JetVar::Jet(s, idx) => {
                (*s as usize) < self.num_dep()
                    && idx.order() <= self.order()
                    && idx.indices().iter().all(|&j| (j as usize) < self.num_indep())
            }
        }
    }

    /// All jet variables of the space, in canonical order.
    pub fn jet_variables(&self) -> Vec<JetVar> {
        let mut out = Vec::new();
        for j in 0..self.num_indep() {
            out.push(JetVar::Indep(j as u8));
        }
        for s in 0..self.num_dep() {
            for m in 0..=self.order() {
                for idx in multi_indices(self.num_indep() as u8, m) {
                    out.push(JetVar::Jet(s as u8, idx));
                }
            }
        }
        out
    }
}

impl PartialEq for JetSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for JetSpace {}

impl fmt::Display for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "J^{}({}; {})",
            self.order(),
            self.0.indep.join(","),
            self.0.dep.join(",")
        )
    }
}

/// All sorted multi-indices of order `m` over `n` independent variables
/// (combinations with repetition), in canonical order.
pub fn multi_indices(n: u8, m: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if m == 0 {
        out.push(MultiIndex::empty());
        return out;
    }
    if n == 0 {
        return out;
    }
    let mut stack = vec![0u8; m];
    fn rec(n: u8, m: usize, level: usize, min: u8, stack: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
        if level == m {
            out.push(MultiIndex(stack.clone()));
            return;
        }
        for j in min..n {
            stack[level] = j;
            rec(n, m, level + 1, j, stack, out);
        }
    }
    rec(n, m, 0, 0, &mut stack, &mut out);
    out
}
