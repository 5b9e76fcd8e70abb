//! Field states on the periodic grid, gauge functions, and seeded initial
//! data.
//!
//! `MaxwellState` carries a raw vector potential and a divergence-free
//! electric field. `ExtendedState` carries the split representation used by
//! the symplectic-thickening diagnostics: a divergence-free potential `Ã`,
//! the gradient-sector scalar `ψ` (so that `A = Ã + grad ψ`), and the
//! kernel-dual scalar `μ`.

use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{FieldError, GridSpec, ScalarGrid, VecFieldGrid};
use crate::spectral::SpectralOps;

/// Band-limited seeded scalar: a sum of cosine modes with `|m_a| ≤ cutoff`
/// (zero mode excluded, so the mean vanishes analytically). Deterministic in
/// the seed; amplitudes are scaled so the field is O(1).
pub fn band_limited_scalar(grid: &GridSpec, seed: u64, cutoff: u32) -> ScalarGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = cutoff as i32;
    let mut modes: Vec<([i32; 3], f64, f64)> = Vec::new();
    for mx in -c..=c {
        for my in -c..=c {
            for mz in -c..=c {
                let m = [mx, my, mz];
                if m == [0, 0, 0] {
                    continue;
                }
                // One representative per ±m pair (a cosine already covers both).
                if !(mx > 0 || (mx == 0 && (my > 0 || (my == 0 && mz > 0)))) {
                    continue;
                }
                let amp: f64 = rng.gen_range(-1.0..1.0);
                let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                modes.push((m, amp, phase));
            }
        }
    }
    let norm = 1.0 / (modes.len() as f64).sqrt();
    let base = std::f64::consts::TAU / grid.box_len;
    ScalarGrid::from_fn(grid, |x, y, z| {
        let mut acc = 0.0;
        for (m, amp, phase) in &modes {
            let k_dot_x = base * (m[0] as f64 * x + m[1] as f64 * y + m[2] as f64 * z);
            acc += amp * (k_dot_x + phase).cos();
        }
        acc * norm
    })
}

pub fn band_limited_vector(grid: &GridSpec, seed: u64, cutoff: u32) -> VecFieldGrid {
    VecFieldGrid {
        comps: [
            band_limited_scalar(grid, seed.wrapping_mul(3).wrapping_add(1), cutoff),
            band_limited_scalar(grid, seed.wrapping_mul(3).wrapping_add(2), cutoff),
            band_limited_scalar(grid, seed.wrapping_mul(3).wrapping_add(3), cutoff),
        ],
    }
}

/// Grid sample of a point on the Gauss-constrained phase space: a vector
/// potential and a divergence-free electric field.
#[derive(Clone, Debug)]
pub struct MaxwellState {
    pub a: VecFieldGrid,
    pub e: VecFieldGrid,
}

impl MaxwellState {
    /// Builds a state enforcing the discrete Gauss constraint: the electric
    /// field is replaced by its divergence-free part.
    pub fn project_gauss(ops: &SpectralOps, a: VecFieldGrid, e_raw: VecFieldGrid) -> MaxwellState {
        let (e, _) = ops.helmholtz_split(&e_raw);
        MaxwellState { a, e }
    }

    pub fn zero(n: usize) -> MaxwellState {
        MaxwellState {
            a: VecFieldGrid::zeros(n),
            e: VecFieldGrid::zeros(n),
        }
    }

    /// `maxnorm(div E) / maxnorm(E)` (0 for a vanishing field).
    pub fn gauss_residual(&self, ops: &SpectralOps) -> f64 {
        let scale = self.e.maxnorm();
        if scale == 0.0 {
            return 0.0;
        }
        ops.div(&self.e).maxnorm() / scale
    }
}

/// Point of the thickened phase space: divergence-free `Ã` and `E`, the
/// gauge-sector potential `ψ`, and the kernel-dual potential `μ` (both of
/// zero spatial mean).
#[derive(Clone, Debug)]
pub struct ExtendedState {
    pub a_tilde: VecFieldGrid,
    pub e: VecFieldGrid,
    pub psi: ScalarGrid,
    pub mu: ScalarGrid,
}

impl ExtendedState {
    pub fn zero(n: usize) -> ExtendedState {
        ExtendedState {
            a_tilde: VecFieldGrid::zeros(n),
            e: VecFieldGrid::zeros(n),
            psi: ScalarGrid::zeros(n),
            mu: ScalarGrid::zeros(n),
        }
    }

    /// Splits a raw potential into `(Ã, ψ)`, projects the electric field to
    /// its divergence-free part, and installs the kernel-dual scalar.
    pub fn from_parts(
        ops: &SpectralOps,
        a: &VecFieldGrid,
        e_raw: &VecFieldGrid,
        mut mu: ScalarGrid,
    ) -> ExtendedState {
        let (a_tilde, psi) = ops.helmholtz_split(a);
        let (e, _) = ops.helmholtz_split(e_raw);
        mu.subtract_mean();
        ExtendedState {
            a_tilde,
            e,
            psi,
            mu,
        }
    }

    /// The raw potential `A = Ã + grad ψ`.
    pub fn reconstruct_a(&self, ops: &SpectralOps) -> VecFieldGrid {
        let mut a = self.a_tilde.clone();
        a.add_scaled(1.0, &ops.grad(&self.psi));
        a
    }

    pub fn gauss_residual(&self, ops: &SpectralOps) -> f64 {
        let scale = self.e.maxnorm();
        if scale == 0.0 {
            return 0.0;
        }
        ops.div(&self.e).maxnorm() / scale
    }
}

/// Tangent perturbation with the shape of an `ExtendedState` deviation.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub d_a: VecFieldGrid,
    pub d_e: VecFieldGrid,
    pub d_psi: ScalarGrid,
    pub d_mu: ScalarGrid,
}

impl Perturbation {
    pub fn zero(n: usize) -> Perturbation {
        Perturbation {
            d_a: VecFieldGrid::zeros(n),
            d_e: VecFieldGrid::zeros(n),
            d_psi: ScalarGrid::zeros(n),
            d_mu: ScalarGrid::zeros(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GaugeProvenance {
    Zero,
    SeededRandomSmooth { seed: u64, cutoff: u32 },
    File(String),
}

/// The arbitrary gauge function φ entering the potential's evolution;
/// fixed in time, zero spatial mean.
#[derive(Clone, Debug)]
pub struct GaugeChoice {
    pub phi: ScalarGrid,
    pub provenance: GaugeProvenance,
}

impl GaugeChoice {
    pub fn zero(grid: &GridSpec) -> GaugeChoice {
        GaugeChoice {
            phi: ScalarGrid::zeros(grid.n),
            provenance: GaugeProvenance::Zero,
        }
    }

    pub fn seeded(grid: &GridSpec, seed: u64, cutoff: u32) -> GaugeChoice {
        let mut phi = band_limited_scalar(grid, seed ^ 0x9e3779b97f4a7c15, cutoff);
        phi.subtract_mean();
        GaugeChoice {
            phi,
            provenance: GaugeProvenance::SeededRandomSmooth { seed, cutoff },
        }
    }

    pub fn from_grid(phi: ScalarGrid, origin: String) -> GaugeChoice {
        let mut phi = phi;
        phi.subtract_mean();
        GaugeChoice {
            phi,
            provenance: GaugeProvenance::File(origin),
        }
    }

    /// Parses `zero` or `random:<seed>,<cutoff>`.
    pub fn parse(spec: &str, grid: &GridSpec) -> Result<GaugeChoice, FieldError> {
        if spec == "zero" {
            return Ok(GaugeChoice::zero(grid));
        }
        if let Some(rest) = spec.strip_prefix("random:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(FieldError::Spec(
                    spec.to_string(),
                    "expected random:<seed>,<cutoff>".into(),
                ));
            }
            let seed = parts[0]
                .parse()
                .map_err(|e| FieldError::Spec(spec.to_string(), format!("bad seed: {e}")))?;
            let cutoff = parts[1]
                .parse()
                .map_err(|e| FieldError::Spec(spec.to_string(), format!("bad cutoff: {e}")))?;
            return Ok(GaugeChoice::seeded(grid, seed, cutoff));
        }
        Err(FieldError::Spec(
            spec.to_string(),
            "expected 'zero' or 'random:<seed>,<cutoff>'".into(),
        ))
    }
}

/// Initial-condition specifier: `standing-wave:kx,ky,kz,amp`,
/// `random:seed,cutoff`, or `file:<path>` (a state snapshot).
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    StandingWave { mode: [i32; 3], amp: f64 },
    Random { seed: u64, cutoff: u32 },
    File(String),
}

impl FromStr for InitialCondition {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, FieldError> {
        if let Some(rest) = s.strip_prefix("standing-wave:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 4 {
                return Err(FieldError::Spec(
                    s.to_string(),
                    "expected standing-wave:kx,ky,kz,amp".into(),
                ));
            }
            let mut mode = [0i32; 3];
            for (slot, part) in mode.iter_mut().zip(&parts) {
                *slot = part
                    .parse()
                    .map_err(|e| FieldError::Spec(s.to_string(), format!("bad mode: {e}")))?;
            }
            let amp: f64 = parts[3]
                .parse()
                .map_err(|e| FieldError::Spec(s.to_string(), format!("bad amplitude: {e}")))?;
            if mode == [0, 0, 0] {
                return Err(FieldError::Spec(s.to_string(), "zero wavevector".into()));
            }
            Ok(InitialCondition::StandingWave { mode, amp })
        } else if let Some(rest) = s.strip_prefix("random:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(FieldError::Spec(
                    s.to_string(),
                    "expected random:<seed>,<cutoff>".into(),
                ));
            }
            Ok(InitialCondition::Random {
                seed: parts[0]
                    .parse()
                    .map_err(|e| FieldError::Spec(s.to_string(), format!("bad seed: {e}")))?,
                cutoff: parts[1]
                    .parse()
                    .map_err(|e| FieldError::Spec(s.to_string(), format!("bad cutoff: {e}")))?,
            })
        } else if let Some(path) = s.strip_prefix("file:") {
            Ok(InitialCondition::File(path.to_string()))
        } else {
            Err(FieldError::Spec(
                s.to_string(),
                "expected 'standing-wave:…', 'random:…' or 'file:…'".into(),
            ))
        }
    }
}

impl InitialCondition {
    /// Raw `(A, E)` lattices; the electric field still needs the Gauss
    /// projection. `file:` initial data is loaded by the snapshot module.
    pub fn build(&self, grid: &GridSpec) -> Result<(VecFieldGrid, VecFieldGrid), FieldError> {
        match self {
            InitialCondition::StandingWave { mode, amp } => {
                Ok((standing_wave_potential(grid, *mode, *amp), VecFieldGrid::zeros(grid.n)))
            }
            InitialCondition::Random { seed, cutoff } => {
                if *cutoff as usize >= grid.n / 2 {
                    return Err(FieldError::Config(format!(
                        "mode cutoff {cutoff} not resolved by n = {}",
                        grid.n
                    )));
                }
                let a = band_limited_vector(grid, seed.wrapping_add(101), *cutoff);
                let e = band_limited_vector(grid, seed.wrapping_add(202), *cutoff);
                Ok((a, e))
            }
            InitialCondition::File(path) => Err(FieldError::Spec(
                format!("file:{path}"),
                "snapshot initial data is loaded by the caller".into(),
            )),
        }
    }
}

/// `A = amp·sin(k·x)·ê` with `ê ⊥ k`: a single divergence-free mode.
pub fn standing_wave_potential(grid: &GridSpec, mode: [i32; 3], amp: f64) -> VecFieldGrid {
    let base = std::f64::consts::TAU / grid.box_len;
    let k = [
        base * mode[0] as f64,
        base * mode[1] as f64,
        base * mode[2] as f64,
    ];
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    // Pick the axis least aligned with k and project k out of it.
    let axis = (0..3).min_by(|&a, &b| k[a].abs().partial_cmp(&k[b].abs()).unwrap()).unwrap();
    let mut e_dir = [0.0; 3];
    e_dir[axis] = 1.0;
    let dot = e_dir[0] * k[0] + e_dir[1] * k[1] + e_dir[2] * k[2];
    for a in 0..3 {
        e_dir[a] -= dot * k[a] / k2;
    }
    let norm = (e_dir[0] * e_dir[0] + e_dir[1] * e_dir[1] + e_dir[2] * e_dir[2]).sqrt();
    for v in &mut e_dir {
        *v /= norm;
    }
    let comp = |c: f64| {
        ScalarGrid::from_fn(grid, |x, y, z| {
            c * amp * (k[0] * x + k[1] * y + k[2] * z).sin()
        })
    };
    VecFieldGrid {
        comps: [comp(e_dir[0]), comp(e_dir[1]), comp(e_dir[2])],
    }
}
