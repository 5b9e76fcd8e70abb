//! Observables: the conserved field energy, the symplectic pairing on the
//! thickened phase space, pairing-drift tracking along the flow, gauge
//! comparison runs, and the time-series record format.
//!
//! Every reduction is a compensated sum in lattice-major order, so repeated
//! runs produce byte-identical numbers.

use std::io::Write;

use crate::grid::{kahan_sum, GridSpec, VecFieldGrid};
use crate::propagate::Propagator;
use crate::spectral::SpectralOps;
use crate::state::{ExtendedState, GaugeChoice, MaxwellState, Perturbation};

/// Field energy `∫ (½|E|² + ½|curl A|²) d³x` as a lattice sum times the cell
/// volume. The gauge sector does not contribute: the curl kills gradient
/// parts, so passing `Ã` or the reconstructed `A` gives the same value up to
/// roundoff.
pub fn energy(ops: &SpectralOps, grid: &GridSpec, a: &VecFieldGrid, e: &VecFieldGrid) -> f64 {
    let b = ops.curl(a);
    let len = e.comps[0].len();
    let total = kahan_sum((0..len).map(|i| {
        let e2 = e.comps[0].data[i] * e.comps[0].data[i]
            + e.comps[1].data[i] * e.comps[1].data[i]
            + e.comps[2].data[i] * e.comps[2].data[i];
        let b2 = b.comps[0].data[i] * b.comps[0].data[i]
            + b.comps[1].data[i] * b.comps[1].data[i]
            + b.comps[2].data[i] * b.comps[2].data[i];
        0.5 * (e2 + b2)
    }));
    total * grid.cell_volume()
}

pub fn energy_extended(ops: &SpectralOps, grid: &GridSpec, s: &ExtendedState) -> f64 {
    energy(ops, grid, &s.a_tilde, &s.e)
}

pub fn energy_maxwell(ops: &SpectralOps, grid: &GridSpec, s: &MaxwellState) -> f64 {
    energy(ops, grid, &s.a, &s.e)
}

/// The base pairing `Σ (δ₁Ã·δ₂E − δ₂Ã·δ₁E) dx³`: the pre-symplectic form on
/// gauge-free perturbations.
pub fn base_pairing(
    grid: &GridSpec,
    d1_a: &VecFieldGrid,
    d1_e: &VecFieldGrid,
    d2_a: &VecFieldGrid,
    d2_e: &VecFieldGrid,
) -> f64 {
    let len = d1_a.comps[0].len();
    let total = kahan_sum((0..len).map(|i| {
        let mut v = 0.0;
        for c in 0..3 {
            v += d1_a.comps[c].data[i] * d2_e.comps[c].data[i]
                - d2_a.comps[c].data[i] * d1_e.comps[c].data[i];
        }
        v
    }));
    total * grid.cell_volume()
}

/// The full pairing on the thickened space:
///
/// `ω̃(δ₁, δ₂) = Σ (δ₁Ã·δ₂E − δ₂Ã·δ₁E) dx³
///            + Σ (∇δ₁μ·∇δ₂ψ − ∇δ₂μ·∇δ₁ψ) dx³`
///
/// The two sums are accumulated separately in the same fixed order, so the
/// restriction to `δψ = δμ = 0` reproduces [`base_pairing`] bit for bit.
pub fn symplectic_product(
    ops: &SpectralOps,
    grid: &GridSpec,
    p1: &Perturbation,
    p2: &Perturbation,
) -> f64 {
    let base = base_pairing(grid, &p1.d_a, &p1.d_e, &p2.d_a, &p2.d_e);
    let g1_mu = ops.grad(&p1.d_mu);
    let g1_psi = ops.grad(&p1.d_psi);
    let g2_mu = ops.grad(&p2.d_mu);
    let g2_psi = ops.grad(&p2.d_psi);
    let len = g1_mu.comps[0].len();
    let gauge = kahan_sum((0..len).map(|i| {
        let mut v = 0.0;
        for c in 0..3 {
            v += g1_mu.comps[c].data[i] * g2_psi.comps[c].data[i]
                - g2_mu.comps[c].data[i] * g1_psi.comps[c].data[i];
        }
        v
    })) * grid.cell_volume();
    base + gauge
}

/// A tangent pair whose pairing value is tracked along the linearized flow.
#[derive(Clone, Debug)]
pub struct TrackedPair {
    pub label: String,
    pub first: Perturbation,
    pub second: Perturbation,
}

#[derive(Clone, Debug)]
pub struct PairDrift {
    pub label: String,
    pub initial: f64,
    pub final_value: f64,
    /// Maximum of |value − initial| / max(|initial|, tiny) over the observed
    /// steps.
    pub max_rel_drift: f64,
}

/// Evolves the base state and all pairs by the same linear stepper and
/// reports the relative drift of every pairing value.
pub fn flow_preserves_form(
    prop: &Propagator,
    state: &mut ExtendedState,
    pairs: &[TrackedPair],
    steps: usize,
    every: usize,
) -> Vec<PairDrift> {
    let grid = *prop.grid();
    let mut perts: Vec<Perturbation> = Vec::with_capacity(pairs.len() * 2);
    for pair in pairs {
        perts.push(pair.first.clone());
        perts.push(pair.second.clone());
    }
    let mut drifts: Vec<PairDrift> = pairs
        .iter()
        .map(|pair| {
            let v = symplectic_product(&prop.ops, &grid, &pair.first, &pair.second);
            PairDrift {
                label: pair.label.clone(),
                initial: v,
                final_value: v,
                max_rel_drift: 0.0,
            }
        })
        .collect();
    prop.evolve_extended(state, &mut perts, steps, every, |_, _, ps| {
        for (i, drift) in drifts.iter_mut().enumerate() {
            let v = symplectic_product(&prop.ops, &grid, &ps[2 * i], &ps[2 * i + 1]);
            let denom = drift.initial.abs().max(f64::MIN_POSITIVE);
            drift.max_rel_drift = drift.max_rel_drift.max((v - drift.initial).abs() / denom);
            drift.final_value = v;
        }
    });
    drifts
}

/// One observation row of a simulation run.
#[derive(Clone, Copy, Debug)]
pub struct RunRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub gauss_residual: f64,
    pub sympl_drift: f64,
}

pub const CSV_HEADER: &str = "step,time,energy,gauss_residual,sympl_drift";

pub fn write_csv<W: Write>(mut w: W, records: &[RunRecord]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.step, r.time, r.energy, r.gauss_residual, r.sympl_drift
        )?;
    }
    Ok(())
}

/// Full observed run: evolves the state while tracking one canonical-pair
/// pairing (for the drift column) and records `step 0` plus every
/// observation.
pub fn run_with_records(
    prop: &Propagator,
    state: &mut ExtendedState,
    pair: &TrackedPair,
    steps: usize,
    every: usize,
) -> Vec<RunRecord> {
    let grid = *prop.grid();
    let mut records = Vec::new();
    let initial_pairing = symplectic_product(&prop.ops, &grid, &pair.first, &pair.second);
    let denom = initial_pairing.abs().max(f64::MIN_POSITIVE);
    records.push(RunRecord {
        step: 0,
        time: 0.0,
        energy: energy_extended(&prop.ops, &grid, state),
        gauss_residual: state.gauss_residual(&prop.ops),
        sympl_drift: 0.0,
    });
    let mut perts = vec![pair.first.clone(), pair.second.clone()];
    prop.evolve_extended(state, &mut perts, steps, every, |step, s, ps| {
        let v = symplectic_product(&prop.ops, &grid, &ps[0], &ps[1]);
        records.push(RunRecord {
            step,
            time: step as f64 * grid.dt,
            energy: energy_extended(&prop.ops, &grid, s),
            gauss_residual: s.gauss_residual(&prop.ops),
            sympl_drift: (v - initial_pairing).abs() / denom,
        });
    });
    records
}

/// Result of evolving the same initial state under two gauge choices.
#[derive(Clone, Debug)]
pub struct GaugeCompareReport {
    pub steps: usize,
    pub e_scale: f64,
    /// maxnorm of the E difference after the run.
    pub e_diff: f64,
    /// maxnorm of the curl A difference after the run.
    pub b_diff: f64,
    /// maxnorm of the divergence-free part of the A difference.
    pub a_diff_divfree: f64,
    /// maxnorm of the A difference itself.
    pub a_diff: f64,
}

/// Evolves `s0` under both gauges and compares the observables. The raw
/// potential is evolved (gradient parts accumulate inside `A`), so the
/// pure-gradient character of the A difference is a measured statement, not
/// one true by construction.
pub fn gauge_compare(
    grid: GridSpec,
    s0: &MaxwellState,
    g1: GaugeChoice,
    g2: GaugeChoice,
    steps: usize,
) -> GaugeCompareReport {
    let prop1 = Propagator::new(grid, g1);
    let prop2 = Propagator::new(grid, g2);
    let mut s1 = s0.clone();
    let mut s2 = s0.clone();
    prop1.evolve_maxwell(&mut s1, steps, steps.max(1), |_, _| {});
    prop2.evolve_maxwell(&mut s2, steps, steps.max(1), |_, _| {});
    let e_diff = s1.e.sub(&s2.e).maxnorm();
    let b_diff = prop1.ops.curl(&s1.a).sub(&prop1.ops.curl(&s2.a)).maxnorm();
    let a_diff_field = s1.a.sub(&s2.a);
    let (divfree, _) = prop1.ops.helmholtz_split(&a_diff_field);
    GaugeCompareReport {
        steps,
        e_scale: s1.e.maxnorm().max(s2.e.maxnorm()),
        e_diff,
        b_diff,
        a_diff_divfree: divfree.maxnorm(),
        a_diff: a_diff_field.maxnorm(),
    }
}

/// The canonical test pair: `δ₁ = (δÃ = w, 0, 0, 0)`, `δ₂ = (0, δE = w, 0, 0)`
/// for a band-limited seeded field `w`, paired value `Σ|w|²·dx³ > 0`.
pub fn canonical_pair(grid: &GridSpec, ops: &SpectralOps, seed: u64, cutoff: u32) -> TrackedPair {
    let w = crate::state::band_limited_vector(grid, seed, cutoff);
    let (w, _) = ops.helmholtz_split(&w);
    let n = grid.n;
    let mut first = Perturbation::zero(n);
    first.d_a = w.clone();
    let mut second = Perturbation::zero(n);
    second.d_e = w;
    TrackedPair {
        label: "canonical".into(),
        first,
        second,
    }
}

/// The gauge-sector pair: `δ₁ = (δψ = f)`, `δ₂ = (δμ = g)`.
pub fn gauge_sector_pair(grid: &GridSpec, seed: u64, cutoff: u32) -> TrackedPair {
    let mut f = crate::state::band_limited_scalar(grid, seed, cutoff);
    f.subtract_mean();
    let mut g = crate::state::band_limited_scalar(grid, seed ^ 0x5555, cutoff);
    g.subtract_mean();
    let n = grid.n;
    let mut first = Perturbation::zero(n);
    first.d_psi = f;
    let mut second = Perturbation::zero(n);
    second.d_mu = g;
    TrackedPair {
        label: "gauge-sector".into(),
        first,
        second,
    }
}

/// A mixed pair with both field and gauge-sector components.
pub fn mixed_pair(grid: &GridSpec, ops: &SpectralOps, seed: u64, cutoff: u32) -> TrackedPair {
    let canonical = canonical_pair(grid, ops, seed, cutoff);
    let gauge = gauge_sector_pair(grid, seed ^ 0xabcd, cutoff);
    TrackedPair {
        label: "mixed".into(),
        first: Perturbation {
            d_a: canonical.first.d_a,
            d_e: canonical.first.d_e,
            d_psi: gauge.first.d_psi,
            d_mu: gauge.first.d_mu,
        },
        second: Perturbation {
            d_a: canonical.second.d_a,
            d_e: canonical.second.d_e,
            d_psi: gauge.second.d_psi,
            d_mu: gauge.second.d_mu,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarGrid;
    use crate::state::{band_limited_scalar, band_limited_vector, standing_wave_potential};

    fn grid() -> GridSpec {
        GridSpec::with_default_box(16, 1e-3).unwrap()
    }

    #[test]
    fn energy_examples() {
        let g = grid();
        let ops = SpectralOps::new(&g);
        // Zero state → 0.
        assert_eq!(
            energy(&ops, &g, &VecFieldGrid::zeros(g.n), &VecFieldGrid::zeros(g.n)),
            0.0
        );
        // Uniform E = e₀·x̂, A = 0 → ½e₀²·L³.
        let e0 = 0.75;
        let mut e = VecFieldGrid::zeros(g.n);
        for v in &mut e.comps[0].data {
            *v = e0;
        }
        let h = energy(&ops, &g, &VecFieldGrid::zeros(g.n), &e);
        let expect = 0.5 * e0 * e0 * g.box_len.powi(3);
        assert!((h - expect).abs() <= 1e-12 * expect);
        // Gauge sector does not contribute: adding grad ψ to A leaves it.
        let a = band_limited_vector(&g, 3, 3);
        let h0 = energy(&ops, &g, &a, &e);
        let mut a_shift = a.clone();
        let mut psi = band_limited_scalar(&g, 9, 3);
        psi.subtract_mean();
        a_shift.add_scaled(1.0, &ops.grad(&psi));
        let h1 = energy(&ops, &g, &a_shift, &e);
        assert!((h0 - h1).abs() <= 1e-10 * h0.abs());
    }

    #[test]
    fn pairing_canonical_and_antisymmetry() {
        let g = grid();
        let ops = SpectralOps::new(&g);
        let pair = canonical_pair(&g, &ops, 5, 3);
        let v = symplectic_product(&ops, &g, &pair.first, &pair.second);
        // + Σ|w|²·dx³ > 0.
        let w = &pair.first.d_a;
        let expect = kahan_sum((0..w.comps[0].len()).map(|i| {
            w.comps[0].data[i] * w.comps[0].data[i]
                + w.comps[1].data[i] * w.comps[1].data[i]
                + w.comps[2].data[i] * w.comps[2].data[i]
        })) * g.cell_volume();
        assert_eq!(v, expect);
        // Swap flips the sign exactly.
        let swapped = symplectic_product(&ops, &g, &pair.second, &pair.first);
        assert_eq!(swapped, -v);
    }

    #[test]
    fn pairing_gauge_sector() {
        let g = grid();
        let ops = SpectralOps::new(&g);
        let pair = gauge_sector_pair(&g, 17, 3);
        let v = symplectic_product(&ops, &g, &pair.first, &pair.second);
        // δ₁ = (δψ = f), δ₂ = (δμ = g) → −Σ ∇g·∇f dx³.
        let gf = ops.grad(&pair.first.d_psi);
        let gg = ops.grad(&pair.second.d_mu);
        let expect = -kahan_sum((0..gf.comps[0].len()).map(|i| {
            gg.comps[0].data[i] * gf.comps[0].data[i]
                + gg.comps[1].data[i] * gf.comps[1].data[i]
                + gg.comps[2].data[i] * gf.comps[2].data[i]
        })) * g.cell_volume();
        assert_eq!(v, expect);
        assert!(v != 0.0);
        // Either side alone pairs to zero against a zero perturbation.
        let zero = Perturbation::zero(g.n);
        assert_eq!(symplectic_product(&ops, &g, &pair.first, &zero), 0.0);
    }

    #[test]
    fn pullback_is_bit_for_bit() {
        let g = grid();
        let ops = SpectralOps::new(&g);
        let pair = canonical_pair(&g, &ops, 23, 3);
        let full = symplectic_product(&ops, &g, &pair.first, &pair.second);
        let base = base_pairing(&g, &pair.first.d_a, &pair.first.d_e, &pair.second.d_a, &pair.second.d_e);
        assert_eq!(full.to_bits(), base.to_bits());
    }

    #[test]
    fn pairings_survive_the_flow() {
        let g = grid();
        let gauge = GaugeChoice::seeded(&g, 2, 2);
        let prop = Propagator::new(g, gauge);
        let (a, e) = crate::state::InitialCondition::Random { seed: 8, cutoff: 2 }
            .build(&g)
            .unwrap();
        let mut state = ExtendedState::from_parts(&prop.ops, &a, &e, ScalarGrid::zeros(g.n));
        let pairs = vec![
            canonical_pair(&g, &prop.ops, 31, 2),
            gauge_sector_pair(&g, 33, 2),
            mixed_pair(&g, &prop.ops, 35, 2),
        ];
        let drifts = flow_preserves_form(&prop, &mut state, &pairs, 200, 100);
        for d in &drifts {
            assert!(
                d.max_rel_drift <= 1e-11,
                "{}: drift {}",
                d.label,
                d.max_rel_drift
            );
        }
        // Gauge-sector deviations are frozen, so that pairing is exactly constant.
        assert_eq!(drifts[1].initial.to_bits(), drifts[1].final_value.to_bits());
    }

    #[test]
    fn gauge_compare_trivial_and_seeded() {
        let g = grid();
        let ops = SpectralOps::new(&g);
        let a0 = standing_wave_potential(&g, [0, 0, 1], 0.4);
        let e0 = band_limited_vector(&g, 12, 2);
        let s0 = MaxwellState::project_gauss(&ops, a0, e0);

        // Identical gauges: all differences exactly zero.
        let r = gauge_compare(g, &s0, GaugeChoice::zero(&g), GaugeChoice::zero(&g), 100);
        assert_eq!(r.e_diff, 0.0);
        assert_eq!(r.b_diff, 0.0);
        assert_eq!(r.a_diff, 0.0);

        // Zero vs seeded: observables agree to roundoff, the A difference is
        // a pure gradient.
        let r = gauge_compare(
            g,
            &s0,
            GaugeChoice::zero(&g),
            GaugeChoice::seeded(&g, 6, 2),
            500,
        );
        assert!(r.a_diff > 1e-6, "gauges did move A: {}", r.a_diff);
        assert!(r.e_diff <= 1e-9 * r.e_scale);
        assert!(r.b_diff <= 1e-9 * r.e_scale.max(1.0));
        assert!(r.a_diff_divfree <= 1e-10 * r.a_diff.max(1.0));
    }

    #[test]
    fn csv_format_is_stable() {
        let records = vec![RunRecord {
            step: 10,
            time: 0.01,
            energy: 1.5,
            gauss_residual: 1e-13,
            sympl_drift: 0.0,
        }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "step,time,energy,gauss_residual,sympl_drift\n10,0.01,1.5,0.0000000000001,0\n"
        );
    }
}
