//! Variational calculus operators on jet expressions: total derivatives,
//! Euler-Lagrange source forms, the Helmholtz variationality test, and the
//! homotopy Lagrangian reconstructed from a variational source form.
//!
//! Conventions: all index sums run over sorted multi-indices (each multiset
//! of derivative slots counted once), matching the formal-partial convention
//! of the expression kernel. The correction sum of the Helmholtz expressions
//! carries per-value binomial multiplicities from the generalized Leibniz
//! rule; with these weights the test is exactly the formal self-adjointness
//! of the linearized operator, so it vanishes identically on Euler-Lagrange
//! expressions.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::jetcore::{multi_indices, Expr, JetSpace, JetVar, MultiIndex, Rational};

/// Equation coefficients `E_σ`, one per dependent variable, regarded as a
/// source form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceForm {
    space: JetSpace,
    components: Vec<Expr>,
}

impl SourceForm {
    /// One component per dependent variable, all over the same families.
    pub fn new(space: JetSpace, components: Vec<Expr>) -> SourceForm {
        assert_eq!(
            components.len(),
            space.num_dep(),
            "a source form needs one component per dependent variable"
        );
        let order = components
            .iter()
            .map(|c| c.max_jet_order())
            .max()
            .unwrap_or(0)
            .max(space.order());
        let space = space.with_order(order);
        let components = components
            .into_iter()
            .map(|c| {
                assert!(
                    c.space().same_family(&space),
                    "source-form component over a different variable family"
                );
                c.with_order(order)
            })
            .collect();
        SourceForm { space, components }
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, sigma: u8) -> &Expr {
        &self.components[sigma as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }
}

/// A Lagrangian density over a jet space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lagrangian {
    space: JetSpace,
    density: Expr,
}

impl Lagrangian {
    pub fn new(density: Expr) -> Lagrangian {
        let space = density.space().with_order(density.space().order().max(density.max_jet_order()));
        Lagrangian {
            density: density.with_order(space.order()),
            space,
        }
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn density(&self) -> &Expr {
        &self.density
    }
}

/// Key of one Helmholtz expression `H_{σμ}^{J}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HelmholtzKey {
    pub sigma: u8,
    pub mu: u8,
    pub index: MultiIndex,
}

impl HelmholtzKey {
    /// Rendered as `H[u,v,(t,x)]` using the space's variable names.
    pub fn display(&self, space: &JetSpace) -> String {
        let letters: Vec<&str> = self
            .index
            .indices()
            .iter()
            .map(|&j| space.indep_name(j))
            .collect();
        format!(
            "H[{},{},({})]",
            space.dep_name(self.sigma),
            space.dep_name(self.mu),
            letters.join(",")
        )
    }
}

/// Full table of Helmholtz expressions with the variationality verdict.
#[derive(Clone, Debug)]
pub struct HelmholtzReport {
    space: JetSpace,
    pub entries: BTreeMap<HelmholtzKey, Expr>,
    pub variational: bool,
    pub witnesses: Vec<HelmholtzKey>,
}

impl HelmholtzReport {
    fn new(space: JetSpace, entries: BTreeMap<HelmholtzKey, Expr>) -> HelmholtzReport {
        let witnesses: Vec<HelmholtzKey> = entries
            .iter()
            .filter(|(_, e)| !e.is_zero())
            .map(|(k, _)| k.clone())
            .collect();
        HelmholtzReport {
            space,
            variational: witnesses.is_empty(),
            entries,
            witnesses,
        }
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    /// Nonzero entries as `(key, expression)` pairs.
    pub fn witness_entries(&self) -> impl Iterator<Item = (&HelmholtzKey, &Expr)> {
        self.entries.iter().filter(|(_, e)| !e.is_zero())
    }
}

impl fmt::Display for HelmholtzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.variational {
            write!(f, "variational")
        } else {
            let mut sep = "";
            write!(f, "NOT variational; ")?;
            for (k, e) in self.witness_entries() {
                write!(f, "{sep}witness {} = {}", k.display(&self.space), e)?;
                sep = "; ";
            }
            Ok(())
        }
    }
}

/// Total derivative `d_j`: the derivation with `d_j x^i = δ^i_j` and
/// `d_j y^σ_J = y^σ_{J ∪ {j}}`. The result lives one derivative order higher.
pub fn total_derivative(e: &Expr, j: u8) -> Expr {
    assert!(
        (j as usize) < e.space().num_indep(),
        "independent index out of range"
    );
    let space = e.space().with_order(e.space().order() + 1);
    let e = e.with_order(space.order());
    let mut acc = e.partial(&JetVar::Indep(j)).expect("x^j is in the space");
    for v in e.variables() {
        if let JetVar::Jet(sigma, idx) = &v {
            let p = e.partial(&v).expect("occurring variable");
            if p.is_zero() {
                continue;
            }
            let promoted = Expr::var(&space, JetVar::Jet(*sigma, idx.extended(j)))
                .expect("promoted space admits order k+1");
            acc = &acc + &(&p * &promoted);
        }
    }
    acc
}

/// Applies total derivatives for every slot of a multi-index in sequence.
/// Total derivatives commute, so the order inside `idx` is immaterial.
pub fn total_derivative_multi(e: &Expr, idx: &MultiIndex) -> Expr {
    let mut acc = e.clone();
    for &j in idx.indices() {
        acc = total_derivative(&acc, j);
    }
    acc
}

/// Euler-Lagrange source form of a Lagrangian:
/// `E_σ = ∂ℒ/∂y^σ + Σ_m (−1)^m d_{j1}…d_{jm} ∂ℒ/∂y^σ_{j1…jm}`
/// with the inner sum over sorted multi-indices.
pub fn euler_lagrange(lagrangian: &Lagrangian) -> SourceForm {
    let density = lagrangian.density();
    let space = lagrangian.space();
    let n = space.num_indep() as u8;
    let k = density.max_jet_order();
    let mut components = Vec::with_capacity(space.num_dep());
    for sigma in 0..space.num_dep() as u8 {
        let mut acc = density
            .partial(&JetVar::dep(sigma))
            .expect("dependent variable in space");
        for m in 1..=k {
            let sign = if m % 2 == 0 { 1 } else { -1 };
            for idx in multi_indices(n, m) {
                let p = density
                    .partial(&JetVar::Jet(sigma, idx.clone()))
                    .expect("variable within space order");
                if p.is_zero() {
                    continue;
                }
                let term = total_derivative_multi(&p, &idx);
                acc = &acc + &term.scale(&Rational::from_integer(sign.into()));
            }
        }
        components.push(acc);
    }
    SourceForm::new(space.clone(), components)
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Multiset binomial `Π_i C(mult_J(i), mult_I(i))` for `I ⊆ J`: the number of
/// ways the slots of `I` embed into `J`, from the generalized Leibniz rule.
fn multiset_binomial(j: &MultiIndex, i: &MultiIndex, n: u8) -> u64 {
    let mut acc = 1u64;
    for v in 0..n {
        acc *= binomial(j.multiplicity(v), i.multiplicity(v));
    }
    acc
}

/// Computes every Helmholtz expression of a source form:
///
/// `H_{σμ}^{I} = ∂E_σ/∂y^μ_I − (−1)^{|I|} ∂E_μ/∂y^σ_I
///             − Σ_{J ⊋ I} (−1)^{|J|} C(J;I) d_{J∖I} ∂E_μ/∂y^σ_J`
///
/// over sorted multi-indices up to the highest derivative order occurring.
/// The source form is variational exactly when all entries vanish.
pub fn helmholtz(source: &SourceForm) -> HelmholtzReport {
    let k = source
        .components()
        .iter()
        .map(|c| c.max_jet_order())
        .max()
        .unwrap_or(0);
    let space = source.space().with_order(k);
    let comps: Vec<Expr> = source
        .components()
        .iter()
        .map(|c| c.with_order(k))
        .collect();
    let n = space.num_indep() as u8;
    let l = space.num_dep() as u8;

    let mut entries = BTreeMap::new();
    for sigma in 0..l {
        for mu in 0..l {
            for m in 0..=k {
                let msign = if m % 2 == 0 { 1 } else { -1 };
                for index in multi_indices(n, m) {
                    let mut h = comps[sigma as usize]
                        .partial(&JetVar::Jet(mu, index.clone()))
                        .expect("within order");
                    let second = comps[mu as usize]
                        .partial(&JetVar::Jet(sigma, index.clone()))
                        .expect("within order");
                    h = &h - &second.scale(&Rational::from_integer(msign.into()));
                    for r in (m + 1)..=k {
                        let rsign: i64 = if r % 2 == 0 { 1 } else { -1 };
                        for p in multi_indices(n, r - m) {
                            let full = index.union(&p);
                            let pd = comps[mu as usize]
                                .partial(&JetVar::Jet(sigma, full.clone()))
                                .expect("within order");
                            if pd.is_zero() {
                                continue;
                            }
                            let weight = multiset_binomial(&full, &index, n) as i64;
                            let term = total_derivative_multi(&pd, &p);
                            h = &h - &term.scale(&Rational::from_integer((rsign * weight).into()));
                        }
                    }
                    entries.insert(HelmholtzKey { sigma, mu, index }, h);
                }
            }
        }
    }
    HelmholtzReport::new(space, entries)
}

/// Homotopy Lagrangian of a source form: `ℒ = y^σ ∫₀¹ E_σ(x, t·y, t·y_J, …) dt`,
/// computed exactly — the jet-degree-`d` homogeneous component of `E_σ`
/// contributes with coefficient `1/(d+1)`.
///
/// For a variational source form, `euler_lagrange` of the result reproduces
/// the input.
pub fn tonti_lagrangian(source: &SourceForm) -> Lagrangian {
    let space = source.space();
    let mut density = Expr::zero(space);
    for sigma in 0..space.num_dep() as u8 {
        let y = Expr::var(space, JetVar::dep(sigma)).expect("dependent in space");
        for (d, comp) in source.component(sigma).homogeneous_components() {
            let weight = Rational::new(Rational::one().numer().clone(), (d as i64 + 1).into());
            density = &density + &(&y * &comp.scale(&weight));
        }
    }
    Lagrangian::new(density)
}
