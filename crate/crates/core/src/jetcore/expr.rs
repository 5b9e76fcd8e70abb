use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{JetError, JetSpace, JetVar, Rational};

/// Product of jet variables with positive integer exponents, kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<(JetVar, u32)>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: JetVar) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Normalizes an arbitrary power list: sorts, merges, drops zero powers.
    pub fn from_powers(powers: impl IntoIterator<Item = (JetVar, u32)>) -> Self {
        let mut merged: BTreeMap<JetVar, u32> = BTreeMap::new();
        for (v, e) in powers {
            if e > 0 {
                *merged.entry(v).or_insert(0) += e;
            }
        }
        Monomial(merged.into_iter().collect())
    }

    pub fn powers(&self) -> &[(JetVar, u32)] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree in all variables.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Total degree in jet (dependent-family) variables only.
    pub fn jet_degree(&self) -> u32 {
        self.0
            .iter()
            .filter(|(v, _)| matches!(v, JetVar::Jet(..)))
            .map(|(_, e)| e)
            .sum()
    }

    pub fn exponent(&self, v: &JetVar) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_powers(self.0.iter().chain(other.0.iter()).cloned())
    }

    /// Divides by `v` once; `None` if `v` does not occur.
    fn divide_once(&self, v: &JetVar) -> Option<Monomial> {
        let pos = self.0.iter().position(|(w, _)| w == v)?;
        let mut out = self.0.clone();
        if out[pos].1 == 1 {
            out.remove(pos);
        } else {
            out[pos].1 -= 1;
        }
        Some(Monomial(out))
    }

    pub fn max_jet_order(&self) -> usize {
        self.0.iter().map(|(v, _)| v.order()).max().unwrap_or(0)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then earlier variables with
    /// higher exponents win. A fixed total order makes canonical form unique.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let mut a = self.0.iter();
            let mut b = other.0.iter();
            loop {
                match (a.next(), b.next()) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some((va, ea)), Some((vb, eb))) => {
                        if va != vb {
                            // Positive exponent on an earlier variable ranks higher.
                            return if va < vb { Ordering::Greater } else { Ordering::Less };
                        }
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                    }
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in jet variables with exact rational coefficients, in canonical
/// form: no zero coefficients, term map keyed by the monomial order.
///
/// Equality requires the same variable families (space names) and identical
/// term maps; the derivative-order bound of the space is bookkeeping and does
/// not participate, so results of order-raising operators still compare equal
/// to their hand-written counterparts.
#[derive(Clone, Debug)]
pub struct Expr {
    space: JetSpace,
    terms: BTreeMap<Monomial, Rational>,
}

impl Expr {
    pub fn zero(space: &JetSpace) -> Expr {
        Expr {
            space: space.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space: &JetSpace, c: Rational) -> Expr {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::unit(), c);
        }
        Expr {
            space: space.clone(),
            terms,
        }
    }

    pub fn one(space: &JetSpace) -> Expr {
        Expr::constant(space, Rational::one())
    }

    pub fn var(space: &JetSpace, v: JetVar) -> Result<Expr, JetError> {
        if !space.contains(&v) {
            return Err(JetError::VariableNotInSpace(v.name(space)));
        }
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(v), Rational::one());
        Ok(Expr {
            space: space.clone(),
            terms,
        })
    }

    /// Builds from an arbitrary term list, merging duplicates and dropping
    /// zeros; the result is canonical whatever the input order.
    pub fn from_terms(
        space: &JetSpace,
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Expr {
        let mut map: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in terms {
            if c.is_zero() {
                continue;
            }
            match map.entry(m) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get() + &c;
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
            }
        }
        Expr {
            space: space.clone(),
            terms: map,
        }
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant part (coefficient of the unit monomial).
    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::unit())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// All variables occurring with nonzero exponent.
    pub fn variables(&self) -> BTreeSet<JetVar> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (v, _) in m.powers() {
                out.insert(v.clone());
            }
        }
        out
    }

    /// Highest derivative order occurring (0 when no jets occur).
    pub fn max_jet_order(&self) -> usize {
        self.terms.keys().map(|m| m.max_jet_order()).max().unwrap_or(0)
    }

    /// Same expression over the space with derivative order at least `k`.
    pub fn with_order(&self, k: usize) -> Expr {
        Expr {
            space: self.space.with_order(k),
            terms: self.terms.clone(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero(&self.space);
        }
        Expr {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Expr {
        let mut acc = Expr::one(&self.space);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to a single jet variable:
    /// linear, Leibniz, and `∂w/∂v = δ_{wv}` on distinct coordinates.
    pub fn partial(&self, v: &JetVar) -> Result<Expr, JetError> {
        if !self.space.contains(v) {
            return Err(JetError::VariableNotInSpace(format!("{v:?}")));
        }
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let reduced = m.divide_once(v).expect("exponent checked above");
            terms.push((reduced, c * Rational::from_integer(e.into())));
        }
        Ok(Expr::from_terms(&self.space, terms))
    }

    /// Exact value at a point; every occurring variable must be assigned.
    pub fn eval(&self, assignment: &BTreeMap<JetVar, Rational>) -> Result<Rational, JetError> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for (v, e) in m.powers() {
                let val = assignment
                    .get(v)
                    .ok_or_else(|| JetError::MissingAssignment(v.name(&self.space)))?;
                for _ in 0..*e {
                    prod *= val;
                }
            }
            total += prod;
        }
        Ok(total)
    }

    /// Splits into homogeneous components by total degree in jet variables;
    /// independent variables do not count. Returns `(degree, component)`
    /// pairs in ascending degree with zero components omitted.
    ///
    /// This realizes scaling of the dependent family by a parameter `t`: the
    /// degree-`d` component is exactly the coefficient of `t^d`.
    pub fn homogeneous_components(&self) -> Vec<(u32, Expr)> {
        let mut by_degree: BTreeMap<u32, Vec<(Monomial, Rational)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            by_degree
                .entry(m.jet_degree())
                .or_default()
                .push((m.clone(), c.clone()));
        }
        by_degree
            .into_iter()
            .map(|(d, terms)| (d, Expr::from_terms(&self.space, terms)))
            .collect()
    }

    fn unified_space(&self, other: &Expr) -> JetSpace {
        assert!(
            self.space.same_family(&other.space),
            "cannot combine expressions over different variable families: {} vs {}",
            self.space,
            other.space
        );
        self.space.with_order(self.space.order().max(other.space.order()))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.space.same_family(&other.space) && self.terms == other.terms
    }
}

impl Eq for Expr {}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let space = self.unified_space(rhs);
        Expr::from_terms(
            &space,
            self.terms
                .iter()
                .chain(rhs.terms.iter())
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let space = self.unified_space(rhs);
        Expr::from_terms(
            &space,
            self.terms
                .iter()
                .map(|(m, c)| (m.clone(), c.clone()))
                .chain(rhs.terms.iter().map(|(m, c)| (m.clone(), -c))),
        )
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let space = self.unified_space(rhs);
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                terms.push((ma.mul(mb), ca * cb));
            }
        }
        Expr::from_terms(&space, terms)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $trait::$method(&self, rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $trait::$method(self, &rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl fmt::Display for Expr {
    /// Canonical text form, parseable by the problem-file grammar: terms in
    /// descending monomial order, rational coefficients as `p/q`, powers as
    /// `^e`, with the sign attached to the coefficient of the leading term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            if m.is_unit() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                let mut sep = "";
                for (v, e) in m.powers() {
                    write!(f, "{sep}{}", v.name(&self.space))?;
                    if *e > 1 {
                        write!(f, "^{e}")?;
                    }
                    sep = "*";
                }
            }
        }
        Ok(())
    }
}
