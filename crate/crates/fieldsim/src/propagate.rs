//! Leapfrog (kick-drift-kick) time integration of the Maxwell flow
//!
//! ```text
//! E ← E + (dt/2)·(ΔA − grad div A)
//! A ← A + dt·(E + grad φ)            (Ã ← Ã + dt·E,  ψ ← ψ + dt·φ)
//! E ← E + (dt/2)·(ΔA − grad div A)
//! ```
//!
//! with `μ` untouched. Between observation points the `(A, E)` fields are
//! held as Fourier coefficients and the kicks apply the per-mode force
//! multiplier `−|k|²I + kkᵀ`; lattices are materialized at every observer
//! call. A fixed single-threaded schedule makes runs bit-reproducible.
//!
//! Tangent perturbations ride along under the same linear update with the
//! gauge term dropped (`δψ`, `δμ` frozen): exactly the linearized flow.

use rustfft::num_complex::Complex;

use crate::grid::GridSpec;
use crate::spectral::{Complex64, SpectralOps};
use crate::grid::VecFieldGrid;
use crate::state::{ExtendedState, GaugeChoice, MaxwellState, Perturbation};

pub struct Propagator {
    grid: GridSpec,
    pub ops: SpectralOps,
    gauge: GaugeChoice,
    grad_phi_hat: [Vec<Complex64>; 3],
}

type SpecVec = [Vec<Complex64>; 3];

fn axpy(dst: &mut SpecVec, alpha: f64, src: &SpecVec) {
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        for (a, b) in d.iter_mut().zip(s.iter()) {
            *a += b * alpha;
        }
    }
}

impl Propagator {
    pub fn new(grid: GridSpec, gauge: GaugeChoice) -> Propagator {
        let ops = SpectralOps::new(&grid);
        let grad_phi_hat = ops.grad_spectral(&gauge.phi);
        Propagator {
            grid,
            ops,
            gauge,
            grad_phi_hat,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn gauge(&self) -> &GaugeChoice {
        &self.gauge
    }

    /// The right-hand side of the flow at a state:
    /// `dA = E + grad φ`, `dE = ΔA − grad div A`.
    pub fn maxwell_rhs(&self, s: &MaxwellState) -> (VecFieldGrid, VecFieldGrid) {
        let mut da = s.e.clone();
        da.add_scaled(1.0, &self.ops.grad(&self.gauge.phi));
        let de = self.ops.vector_force(&s.a);
        (da, de)
    }

    /// Evolves a raw-potential state for `steps` steps, materializing and
    /// calling the observer every `every` steps (and on the last step).
    pub fn evolve_maxwell(
        &self,
        state: &mut MaxwellState,
        steps: usize,
        every: usize,
        mut observer: impl FnMut(usize, &MaxwellState),
    ) {
        let dt = self.grid.dt;
        let mut a_hat = self.ops.forward_vec(&state.a);
        let mut e_hat = self.ops.forward_vec(&state.e);
        let mut force = spec_zeros(self.grid.n);
        self.ops.force_spectral_into(&a_hat, &mut force);
        for step in 1..=steps {
            axpy(&mut e_hat, 0.5 * dt, &force);
            axpy(&mut a_hat, dt, &e_hat);
            axpy(&mut a_hat, dt, &self.grad_phi_hat);
            self.ops.force_spectral_into(&a_hat, &mut force);
            axpy(&mut e_hat, 0.5 * dt, &force);
            if step % every.max(1) == 0 || step == steps {
                state.a = self.ops.inverse_vec(&a_hat);
                state.e = self.ops.inverse_vec(&e_hat);
                observer(step, state);
            }
        }
    }

    /// Evolves a split state (`Ã` divergence-free, `ψ ← ψ + dt·φ`, `μ`
    /// untouched) together with any number of tangent perturbations.
    ///
    /// The observer receives the materialized state and perturbations; the
    /// perturbation gauge scalars are constants of the linearized flow and
    /// are never transformed.
    pub fn evolve_extended(
        &self,
        state: &mut ExtendedState,
        perturbations: &mut [Perturbation],
        steps: usize,
        every: usize,
        mut observer: impl FnMut(usize, &ExtendedState, &[Perturbation]),
    ) {
        let dt = self.grid.dt;
        let phi_dt = self.gauge.phi.scaled(dt);
        let mut a_hat = self.ops.forward_vec(&state.a_tilde);
        let mut e_hat = self.ops.forward_vec(&state.e);
        let mut pert_hat: Vec<(SpecVec, SpecVec)> = perturbations
            .iter()
            .map(|p| (self.ops.forward_vec(&p.d_a), self.ops.forward_vec(&p.d_e)))
            .collect();

        let mut force = spec_zeros(self.grid.n);
        self.ops.force_spectral_into(&a_hat, &mut force);
        let mut pert_force: Vec<SpecVec> = pert_hat
            .iter()
            .map(|(a, _)| {
                let mut f = spec_zeros(self.grid.n);
                self.ops.force_spectral_into(a, &mut f);
                f
            })
            .collect();

        for step in 1..=steps {
            axpy(&mut e_hat, 0.5 * dt, &force);
            axpy(&mut a_hat, dt, &e_hat);
            state.psi.add_scaled(1.0, &phi_dt);
            self.ops.force_spectral_into(&a_hat, &mut force);
            axpy(&mut e_hat, 0.5 * dt, &force);
            for (i, (pa, pe)) in pert_hat.iter_mut().enumerate() {
                axpy(pe, 0.5 * dt, &pert_force[i]);
                axpy(pa, dt, pe);
                self.ops.force_spectral_into(pa, &mut pert_force[i]);
                axpy(pe, 0.5 * dt, &pert_force[i]);
            }
            if step % every.max(1) == 0 || step == steps {
                state.a_tilde = self.ops.inverse_vec(&a_hat);
                state.e = self.ops.inverse_vec(&e_hat);
                for (p, (pa, pe)) in perturbations.iter_mut().zip(&pert_hat) {
                    p.d_a = self.ops.inverse_vec(pa);
                    p.d_e = self.ops.inverse_vec(pe);
                }
                observer(step, state, perturbations);
            }
        }
    }

    /// Convenience wrapper capturing every intermediate state (including the
    /// initial one): `steps + 1` states at spacing `dt`.
    pub fn trajectory(&self, state: &ExtendedState, steps: usize) -> Vec<ExtendedState> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(state.clone());
        let mut s = state.clone();
        self.evolve_extended(&mut s, &mut [], steps, 1, |_, st, _| out.push(st.clone()));
        out
    }
}

/// Zeroes the spectral coefficient storage type (used by tests).
pub fn spec_zeros(n: usize) -> [Vec<Complex64>; 3] {
    let len = n * n * n;
    [
        vec![Complex::default(); len],
        vec![Complex::default(); len],
        vec![Complex::default(); len],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, ScalarGrid};
    use crate::state::{band_limited_vector, standing_wave_potential, InitialCondition};

    fn grid(dt: f64) -> GridSpec {
        GridSpec::with_default_box(16, dt).unwrap()
    }

    #[test]
    fn rhs_trivial_and_pure_gauge() {
        let g = grid(1e-3);
        let prop = Propagator::new(g, GaugeChoice::zero(&g));
        let s = MaxwellState::zero(g.n);
        let (da, de) = prop.maxwell_rhs(&s);
        assert_eq!(da.maxnorm(), 0.0);
        assert_eq!(de.maxnorm(), 0.0);

        // A = 0, E = 0, φ ≠ 0: dA = grad φ, dE = 0.
        let gauge = GaugeChoice::seeded(&g, 5, 2);
        let prop = Propagator::new(g, gauge.clone());
        let (da, de) = prop.maxwell_rhs(&s);
        let expect = prop.ops.grad(&gauge.phi);
        assert!(da.sub(&expect).maxnorm() <= 1e-14);
        assert_eq!(de.maxnorm(), 0.0);
    }

    #[test]
    fn rhs_standing_wave_force() {
        let g = grid(1e-3);
        let prop = Propagator::new(g, GaugeChoice::zero(&g));
        // A_x = a·sin(kz), E = 0 → dE_x = −a·k²·sin(kz), dA = 0.
        let amp = 0.3;
        let a = standing_wave_potential(&g, [0, 0, 1], amp);
        let s = MaxwellState { a: a.clone(), e: VecFieldGrid::zeros(g.n) };
        let (da, de) = prop.maxwell_rhs(&s);
        assert_eq!(da.maxnorm(), 0.0);
        let k = std::f64::consts::TAU / g.box_len;
        let expect = a.scaled(-k * k);
        assert!(de.sub(&expect).maxnorm() <= 1e-11 * expect.maxnorm());
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let g = grid(1e-3);
        let prop = Propagator::new(g, GaugeChoice::zero(&g));
        let mut s = ExtendedState::zero(g.n);
        prop.evolve_extended(&mut s, &mut [], 10, 10, |_, _, _| {});
        assert_eq!(s.a_tilde.maxnorm(), 0.0);
        assert_eq!(s.e.maxnorm(), 0.0);
    }

    #[test]
    fn standing_wave_matches_analytic_solution() {
        // A_x(z, t) = a·sin(kz)·cos(|k|t) for the resolved first mode.
        let dt = 1e-3;
        let g = grid(dt);
        let prop = Propagator::new(g, GaugeChoice::zero(&g));
        let amp = 0.5;
        let a0 = standing_wave_potential(&g, [0, 0, 1], amp);
        let mut s = ExtendedState::from_parts(
            &prop.ops,
            &a0,
            &VecFieldGrid::zeros(g.n),
            ScalarGrid::zeros(g.n),
        );
        let steps = (1.0 / dt).round() as usize;
        prop.evolve_extended(&mut s, &mut [], steps, steps, |_, _, _| {});
        let t = steps as f64 * dt;
        let k = std::f64::consts::TAU / g.box_len;
        let analytic = a0.scaled((k * t).cos());
        let num = &s.a_tilde;
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        for c in 0..3 {
            for (u, v) in num.comps[c].data.iter().zip(&analytic.comps[c].data) {
                err2 += (u - v) * (u - v);
                ref2 += v * v;
            }
        }
        let rel = (err2 / ref2).sqrt();
        assert!(rel <= 1e-3, "relative L2 error {rel}");
    }

    #[test]
    fn mu_is_bitwise_frozen() {
        let g = grid(1e-3);
        let gauge = GaugeChoice::seeded(&g, 3, 2);
        let prop = Propagator::new(g, gauge);
        let (a, e) = InitialCondition::Random { seed: 1, cutoff: 2 }
            .build(&g)
            .unwrap();
        let mut mu = crate::state::band_limited_scalar(&g, 77, 2);
        mu.subtract_mean();
        let mut s = ExtendedState::from_parts(&prop.ops, &a, &e, mu.clone());
        mu = s.mu.clone();
        prop.evolve_extended(&mut s, &mut [], 1000, 1000, |_, _, _| {});
        assert_eq!(s.mu.data, mu.data);
    }

    #[test]
    fn gauss_constraint_is_preserved() {
        let g = grid(1e-3);
        let prop = Propagator::new(g, GaugeChoice::seeded(&g, 9, 2));
        let (a, e) = InitialCondition::Random { seed: 4, cutoff: 3 }
            .build(&g)
            .unwrap();
        let mut s = ExtendedState::from_parts(&prop.ops, &a, &e, ScalarGrid::zeros(g.n));
        prop.evolve_extended(&mut s, &mut [], 2000, 2000, |_, _, _| {});
        assert!(s.gauss_residual(&prop.ops) <= 1e-11);
    }

    #[test]
    fn psi_accumulates_the_gauge() {
        let g = grid(1e-3);
        let gauge = GaugeChoice::seeded(&g, 13, 2);
        let prop = Propagator::new(g, gauge.clone());
        let mut s = ExtendedState::zero(g.n);
        prop.evolve_extended(&mut s, &mut [], 100, 100, |_, _, _| {});
        // ψ ≈ steps·dt·φ up to accumulation roundoff.
        let expect = gauge.phi.scaled(100.0 * g.dt);
        assert!(s.psi.sub(&expect).maxnorm() <= 1e-12);
    }

    #[test]
    fn runs_are_bit_reproducible() {
        let g = grid(1e-3);
        let gauge = GaugeChoice::seeded(&g, 21, 2);
        let run = || {
            let prop = Propagator::new(g, gauge.clone());
            let a = band_limited_vector(&g, 31, 3);
            let e = band_limited_vector(&g, 32, 3);
            let mut s = ExtendedState::from_parts(&prop.ops, &a, &e, ScalarGrid::zeros(g.n));
            prop.evolve_extended(&mut s, &mut [], 50, 50, |_, _, _| {});
            s
        };
        let s1 = run();
        let s2 = run();
        for c in 0..3 {
            assert_eq!(s1.a_tilde.comps[c].data, s2.a_tilde.comps[c].data);
            assert_eq!(s1.e.comps[c].data, s2.e.comps[c].data);
        }
        assert_eq!(s1.psi.data, s2.psi.data);
    }
}
