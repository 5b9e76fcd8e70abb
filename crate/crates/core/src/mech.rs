//! Finite-dimensional inverse problem: Lie derivatives and contractions of
//! symbolic forms on a phase chart, radial-homotopy potentials for closed
//! forms, the Lagrangian construction for first-order flows that preserve a
//! symplectic form, and the tangent-bundle objects used by the second-order
//! checks.
//!
//! A phase chart is an order-0 jet space whose "dependent" variables are the
//! phase coordinates; all coefficients are polynomials with exact rational
//! coefficients, so every identity below is decided symbolically.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::jetcore::{Expr, JetSpace, JetVar, Rational};

#[derive(Debug, Error)]
pub enum MechError {
    #[error("charts do not match: {0} vs {1}")]
    ChartMismatch(String, String),
    #[error("the two-form is not closed; {0} nonzero cyclic sums")]
    FormNotClosed(usize),
    #[error("the one-form is not closed; {0} nonzero antisymmetrized derivatives")]
    OneFormNotClosed(usize),
    #[error("the flow does not preserve the form (Lie derivative is nonzero)")]
    SymplecticNotPreserved(Box<TwoForm>),
    #[error("internal: homotopy potential failed verification")]
    PotentialVerification,
    #[error("a tangent chart needs an even number of coordinates, got {0}")]
    OddTangentChart(usize),
    #[error("{0}")]
    BadChart(String),
}

/// Local coordinates `q^1..q^d` on a phase-space chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseChart {
    space: JetSpace,
}

impl PhaseChart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<PhaseChart, MechError> {
        let space = JetSpace::new::<S>(&[], names, 0)
            .map_err(|e| MechError::BadChart(e.to_string()))?;
        Ok(PhaseChart { space })
    }

    pub fn from_space(space: JetSpace) -> Result<PhaseChart, MechError> {
        if space.num_indep() != 0 || space.order() != 0 {
            return Err(MechError::BadChart(
                "a phase chart is an order-0 jet space with no independent variables".into(),
            ));
        }
        Ok(PhaseChart { space })
    }

    pub fn dim(&self) -> usize {
        self.space.num_dep()
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn name(&self, j: usize) -> &str {
        self.space.dep_name(j as u8)
    }

    pub fn coord(&self, j: usize) -> JetVar {
        JetVar::dep(j as u8)
    }

    pub fn coord_expr(&self, j: usize) -> Expr {
        Expr::var(&self.space, self.coord(j)).expect("coordinate in chart")
    }

    fn check_same(&self, other: &PhaseChart) -> Result<(), MechError> {
        if self != other {
            return Err(MechError::ChartMismatch(
                self.space.to_string(),
                other.space.to_string(),
            ));
        }
        Ok(())
    }
}

/// `Γ = f^j ∂/∂q^j` with polynomial components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    chart: PhaseChart,
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: PhaseChart, components: Vec<Expr>) -> VectorField {
        assert_eq!(components.len(), chart.dim(), "one component per coordinate");
        VectorField { chart, components }
    }

    pub fn chart(&self) -> &PhaseChart {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }
}

/// `α = α_j dq^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneForm {
    chart: PhaseChart,
    coeffs: Vec<Expr>,
}

impl OneForm {
    pub fn new(chart: PhaseChart, coeffs: Vec<Expr>) -> OneForm {
        assert_eq!(coeffs.len(), chart.dim(), "one coefficient per coordinate");
        OneForm { chart, coeffs }
    }

    pub fn zero(chart: &PhaseChart) -> OneForm {
        let coeffs = (0..chart.dim()).map(|_| Expr::zero(chart.space())).collect();
        OneForm::new(chart.clone(), coeffs)
    }

    pub fn chart(&self) -> &PhaseChart {
        &self.chart
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }
}

/// Antisymmetric two-form; only the `j < k` coefficients are stored, so the
/// antisymmetry `ω_{kj} = −ω_{jk}` holds structurally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoForm {
    chart: PhaseChart,
    upper: Vec<Expr>,
}

fn pair_slot(j: usize, k: usize, d: usize) -> usize {
    debug_assert!(j < k && k < d);
    j * d - j * (j + 1) / 2 + (k - j - 1)
}

impl TwoForm {
    pub fn zero(chart: &PhaseChart) -> TwoForm {
        let d = chart.dim();
        let upper = (0..d * (d - 1) / 2)
            .map(|_| Expr::zero(chart.space()))
            .collect();
        TwoForm {
            chart: chart.clone(),
            upper,
        }
    }

    /// Builds from `(j, k, coefficient)` entries; reversed pairs negate, and
    /// repeated unordered pairs accumulate.
    pub fn from_entries(
        chart: &PhaseChart,
        entries: impl IntoIterator<Item = (usize, usize, Expr)>,
    ) -> TwoForm {
        let mut form = TwoForm::zero(chart);
        for (j, k, expr) in entries {
            assert!(j != k, "diagonal coefficients of a two-form vanish");
            assert!(j < chart.dim() && k < chart.dim(), "coordinate out of range");
            let (slot, value) = if j < k {
                (pair_slot(j, k, chart.dim()), expr)
            } else {
                (pair_slot(k, j, chart.dim()), -expr)
            };
            form.upper[slot] = &form.upper[slot] + &value;
        }
        form
    }

    pub fn chart(&self) -> &PhaseChart {
        &self.chart
    }

    /// `ω_{jk}` for any index pair, with the sign from antisymmetry.
    pub fn coeff(&self, j: usize, k: usize) -> Expr {
        if j == k {
            return Expr::zero(self.chart.space());
        }
        if j < k {
            self.upper[pair_slot(j, k, self.chart.dim())].clone()
        } else {
            -&self.upper[pair_slot(k, j, self.chart.dim())]
        }
    }

    /// Stored coefficients as `(j, k, ω_{jk})` with `j < k`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, &Expr)> {
        let d = self.chart.dim();
        (0..d).flat_map(move |j| {
            (j + 1..d).map(move |k| (j, k, &self.upper[pair_slot(j, k, d)]))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(Expr::is_zero)
    }
}

impl fmt::Display for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (j, k, e) in self.upper_entries() {
            if e.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            write!(
                f,
                "({e})*d{}^d{}",
                self.chart.name(j),
                self.chart.name(k)
            )?;
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn partial(e: &Expr, j: usize) -> Expr {
    e.partial(&JetVar::dep(j as u8)).expect("coordinate in chart")
}

/// `df` of a scalar.
pub fn exterior_derivative_scalar(chart: &PhaseChart, f: &Expr) -> OneForm {
    let coeffs = (0..chart.dim()).map(|j| partial(f, j)).collect();
    OneForm::new(chart.clone(), coeffs)
}

/// `dα` of a one-form: `(dα)_{jk} = ∂_j α_k − ∂_k α_j`.
pub fn exterior_derivative_one(alpha: &OneForm) -> TwoForm {
    let chart = alpha.chart();
    let d = chart.dim();
    let mut entries = Vec::new();
    for j in 0..d {
        for k in j + 1..d {
            entries.push((j, k, &partial(&alpha.coeffs[k], j) - &partial(&alpha.coeffs[j], k)));
        }
    }
    TwoForm::from_entries(chart, entries)
}

/// Closedness report for a two-form: the cyclic sums
/// `∂_i ω_{jk} + ∂_j ω_{ki} + ∂_k ω_{ij}` for all `i < j < k`.
#[derive(Clone, Debug)]
pub struct ClosednessReport {
    pub closed: bool,
    /// Nonzero residuals keyed by the index triple.
    pub residuals: Vec<((usize, usize, usize), Expr)>,
}

pub fn exterior_closed(omega: &TwoForm) -> ClosednessReport {
    let d = omega.chart().dim();
    let mut residuals = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                let cyc = &(&partial(&omega.coeff(j, k), i) + &partial(&omega.coeff(k, i), j))
                    + &partial(&omega.coeff(i, j), k);
                if !cyc.is_zero() {
                    residuals.push(((i, j, k), cyc));
                }
            }
        }
    }
    ClosednessReport {
        closed: residuals.is_empty(),
        residuals,
    }
}

/// `(ℒ_Γ ω)_{jk} = f^i ∂_i ω_{jk} + ω_{ik} ∂_j f^i + ω_{ji} ∂_k f^i`.
pub fn lie_derivative(field: &VectorField, omega: &TwoForm) -> Result<TwoForm, MechError> {
    field.chart().check_same(omega.chart())?;
    let chart = field.chart();
    let d = chart.dim();
    let mut entries = Vec::new();
    for j in 0..d {
        for k in j + 1..d {
            let mut acc = Expr::zero(chart.space());
            for i in 0..d {
                acc = &acc + &(&field.components[i] * &partial(&omega.coeff(j, k), i));
                acc = &acc + &(&omega.coeff(i, k) * &partial(&field.components[i], j));
                acc = &acc + &(&omega.coeff(j, i) * &partial(&field.components[i], k));
            }
            entries.push((j, k, acc));
        }
    }
    Ok(TwoForm::from_entries(chart, entries))
}

/// `(i_Γ ω)_k = f^j ω_{jk}`.
pub fn contract(field: &VectorField, omega: &TwoForm) -> Result<OneForm, MechError> {
    field.chart().check_same(omega.chart())?;
    let chart = field.chart();
    let d = chart.dim();
    let coeffs = (0..d)
        .map(|k| {
            let mut acc = Expr::zero(chart.space());
            for j in 0..d {
                acc = &acc + &(&field.components[j] * &omega.coeff(j, k));
            }
            acc
        })
        .collect();
    Ok(OneForm::new(chart.clone(), coeffs))
}

/// Radial-homotopy potential of a closed one-form:
/// `E(q) = ∫₀¹ α_j(tq) q^j dt`, exact on polynomials (a degree-`d`
/// homogeneous coefficient picks up `1/(d+1)`). Verifies `dE = α` before
/// returning.
pub fn potential_for_one_form(alpha: &OneForm) -> Result<Expr, MechError> {
    let chart = alpha.chart();
    let d = chart.dim();
    let mut bad = 0;
    for j in 0..d {
        for k in j + 1..d {
            if partial(&alpha.coeffs[k], j) != partial(&alpha.coeffs[j], k) {
                bad += 1;
            }
        }
    }
    if bad > 0 {
        return Err(MechError::OneFormNotClosed(bad));
    }
    let mut acc = Expr::zero(chart.space());
    for j in 0..d {
        let q = chart.coord_expr(j);
        for (deg, comp) in alpha.coeffs[j].homogeneous_components() {
            let w = Rational::new(Rational::one().numer().clone(), (deg as i64 + 1).into());
            acc = &acc + &(&comp.scale(&w) * &q);
        }
    }
    if exterior_derivative_scalar(chart, &acc) != *alpha {
        return Err(MechError::PotentialVerification);
    }
    Ok(acc)
}

/// Radial-homotopy potential of a closed two-form:
/// `B_k(q) = ∫₀¹ t ω_{jk}(tq) q^j dt` (degree-`d` coefficients pick up
/// `1/(d+2)`). Verifies `dB = ω` before returning.
pub fn potential_for_two_form(omega: &TwoForm) -> Result<OneForm, MechError> {
    let closed = exterior_closed(omega);
    if !closed.closed {
        return Err(MechError::FormNotClosed(closed.residuals.len()));
    }
    let chart = omega.chart();
    let d = chart.dim();
    let coeffs: Vec<Expr> = (0..d)
        .map(|k| {
            let mut acc = Expr::zero(chart.space());
            for j in 0..d {
                let q = chart.coord_expr(j);
                for (deg, comp) in omega.coeff(j, k).homogeneous_components() {
                    let w = Rational::new(Rational::one().numer().clone(), (deg as i64 + 2).into());
                    acc = &acc + &(&comp.scale(&w) * &q);
                }
            }
            acc
        })
        .collect();
    let b = OneForm::new(chart.clone(), coeffs);
    if exterior_derivative_one(&b) != *omega {
        return Err(MechError::PotentialVerification);
    }
    Ok(b)
}

/// Probabilistic non-degeneracy certificate: the determinant of the
/// coefficient matrix evaluated exactly at seeded random rational points.
/// Symbolic rank is not decided; the samples are reported instead.
#[derive(Clone, Debug)]
pub struct NondegeneracyCertificate {
    pub seed: u64,
    /// `(point, det ω(point))` pairs; points are coordinate assignments.
    pub samples: Vec<(Vec<Rational>, Rational)>,
    pub nonzero_at_all_samples: bool,
}

fn exact_determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let d = m.len();
    let mut det = Rational::one();
    for col in 0..d {
        let pivot = (col..d).find(|&r| !m[r][col].is_zero());
        let Some(pivot) = pivot else {
            return Rational::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col].clone();
        for r in col + 1..d {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &m[col][col];
            for c in col..d {
                let sub = &factor * &m[col][c];
                m[r][c] -= sub;
            }
        }
    }
    det
}

pub fn nondegeneracy_certificate(
    omega: &TwoForm,
    seed: u64,
    num_points: usize,
) -> NondegeneracyCertificate {
    let chart = omega.chart();
    let d = chart.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(num_points);
    for _ in 0..num_points {
        let point: Vec<Rational> = (0..d)
            .map(|_| Rational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=4).into()))
            .collect();
        let assignment: BTreeMap<JetVar, Rational> = (0..d)
            .map(|j| (chart.coord(j), point[j].clone()))
            .collect();
        let matrix: Vec<Vec<Rational>> = (0..d)
            .map(|j| {
                (0..d)
                    .map(|k| omega.coeff(j, k).eval(&assignment).expect("point covers chart"))
                    .collect()
            })
            .collect();
        samples.push((point, exact_determinant(matrix)));
    }
    NondegeneracyCertificate {
        seed,
        nonzero_at_all_samples: samples.iter().all(|(_, det)| !det.is_zero()),
        samples,
    }
}

/// Output of the first-order Lagrangian construction: potentials `B` and `E`
/// with `dB = ω` and `dE = i_Γω`, the degenerate Lagrangian `ℒ = B_j v^j − E`,
/// and the Euler-Lagrange residual `(∂_jB_k − ∂_kB_j)f^j − ∂_kE`, which is
/// zero exactly when the construction certifies the flow.
#[derive(Clone, Debug)]
pub struct FodeLagrangian {
    pub b: OneForm,
    pub energy: Expr,
    pub residual: OneForm,
    pub residual_zero: bool,
    pub nondegeneracy: NondegeneracyCertificate,
}

pub const NONDEGENERACY_SEED: u64 = 0x1b07;
pub const NONDEGENERACY_POINTS: usize = 10;

/// Builds the degenerate first-order Lagrangian for a flow preserving a
/// closed two-form. Fails with the witness when `dω ≠ 0` or `ℒ_Γω ≠ 0`.
pub fn fode_lagrangian(field: &VectorField, omega: &TwoForm) -> Result<FodeLagrangian, MechError> {
    field.chart().check_same(omega.chart())?;
    let closed = exterior_closed(omega);
    if !closed.closed {
        return Err(MechError::FormNotClosed(closed.residuals.len()));
    }
    let lie = lie_derivative(field, omega)?;
    if !lie.is_zero() {
        return Err(MechError::SymplecticNotPreserved(Box::new(lie)));
    }
    let b = potential_for_two_form(omega)?;
    // i_Γω is closed here: ℒ_Γω = d i_Γω + i_Γ dω = 0 with both corrections zero.
    let alpha = contract(field, omega)?;
    let energy = potential_for_one_form(&alpha)?;

    let chart = field.chart();
    let d = chart.dim();
    let db = exterior_derivative_one(&b);
    let residual_coeffs: Vec<Expr> = (0..d)
        .map(|k| {
            let mut acc = Expr::zero(chart.space());
            for j in 0..d {
                acc = &acc + &(&field.components[j] * &db.coeff(j, k));
            }
            &acc - &partial(&energy, k)
        })
        .collect();
    let residual = OneForm::new(chart.clone(), residual_coeffs);
    let residual_zero = residual.is_zero();
    let nondegeneracy = nondegeneracy_certificate(omega, NONDEGENERACY_SEED, NONDEGENERACY_POINTS);
    Ok(FodeLagrangian {
        b,
        energy,
        residual,
        residual_zero,
        nondegeneracy,
    })
}

/// Doubled chart `{q^j, v^j}`: the first half of the coordinates are
/// positions, the second half velocities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentChart {
    chart: PhaseChart,
    base_dim: usize,
}

impl TangentChart {
    pub fn from_chart(chart: PhaseChart) -> Result<TangentChart, MechError> {
        let dim = chart.dim();
        if dim % 2 != 0 || dim == 0 {
            return Err(MechError::OddTangentChart(dim));
        }
        Ok(TangentChart {
            chart,
            base_dim: dim / 2,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn chart(&self) -> &PhaseChart {
        &self.chart
    }

    pub fn position(&self, j: usize) -> usize {
        j
    }

    pub fn velocity(&self, j: usize) -> usize {
        self.base_dim + j
    }

    pub fn velocity_expr(&self, j: usize) -> Expr {
        self.chart.coord_expr(self.velocity(j))
    }
}

/// The Lagrangian one-form, two-form, and energy on a tangent chart:
/// `θ_ℒ = (∂ℒ/∂v^j) dq^j`, `ω_ℒ = −dθ_ℒ`, `E_ℒ = Δ(ℒ) − ℒ` with
/// `Δ = v^j ∂/∂v^j`.
#[derive(Clone, Debug)]
pub struct CartanData {
    pub theta: OneForm,
    pub omega: TwoForm,
    pub energy: Expr,
}

pub fn cartan_data(tangent: &TangentChart, lagrangian: &Expr) -> CartanData {
    let chart = tangent.chart();
    let d = tangent.base_dim();
    let mut theta_coeffs = vec![Expr::zero(chart.space()); chart.dim()];
    for j in 0..d {
        theta_coeffs[tangent.position(j)] = partial(lagrangian, tangent.velocity(j));
    }
    let theta = OneForm::new(chart.clone(), theta_coeffs);
    let omega = {
        let d_theta = exterior_derivative_one(&theta);
        TwoForm::from_entries(
            chart,
            d_theta.upper_entries().map(|(j, k, e)| (j, k, -e)),
        )
    };
    let mut dilation = Expr::zero(chart.space());
    for j in 0..d {
        dilation = &dilation + &(&tangent.velocity_expr(j) * &partial(lagrangian, tangent.velocity(j)));
    }
    let energy = &dilation - lagrangian;
    CartanData {
        theta,
        omega,
        energy,
    }
}

/// Report of the second-order hypotheses for `(Γ, ω)` on a tangent chart:
/// the second-order condition on Γ, the Lie derivative `ℒ_Γω`, and the
/// vertical-vertical block `ω(∂/∂v^j, ∂/∂v^k)`. The hypotheses hold iff the
/// latter two vanish.
#[derive(Clone, Debug)]
pub struct SodeReport {
    pub second_order: bool,
    pub lie: TwoForm,
    pub lie_zero: bool,
    /// Nonzero vertical-block coefficients keyed by the velocity pair.
    pub vertical_witnesses: Vec<((usize, usize), Expr)>,
    pub vertical_zero: bool,
    pub hypotheses_hold: bool,
}

pub fn sode_check(
    tangent: &TangentChart,
    field: &VectorField,
    omega: &TwoForm,
) -> Result<SodeReport, MechError> {
    field.chart().check_same(tangent.chart())?;
    field.chart().check_same(omega.chart())?;
    let d = tangent.base_dim();
    let second_order = (0..d).all(|j| field.components()[tangent.position(j)] == tangent.velocity_expr(j));
    let lie = lie_derivative(field, omega)?;
    let lie_zero = lie.is_zero();
    let mut vertical_witnesses = Vec::new();
    for j in 0..d {
        for k in j + 1..d {
            let block = omega.coeff(tangent.velocity(j), tangent.velocity(k));
            if !block.is_zero() {
                vertical_witnesses.push(((j, k), block));
            }
        }
    }
    let vertical_zero = vertical_witnesses.is_empty();
    Ok(SodeReport {
        second_order,
        lie_zero,
        lie,
        vertical_zero,
        hypotheses_hold: second_order && lie_zero && vertical_witnesses.is_empty(),
        vertical_witnesses,
    })
}
