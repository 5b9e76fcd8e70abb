//! Periodic cubic lattice containers and the grid configuration.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("lattice size mismatch: {0} vs {1}")]
    ShapeMismatch(usize, usize),
    #[error("cannot parse '{0}': {1}")]
    Spec(String, String),
    #[error("snapshot error: {0}")]
    Snapshot(String),
    #[error("a trajectory needs at least 3 states, got {0}")]
    ShortTrajectory(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Cubic periodic grid: `n` points per axis over a box of side `box_len`,
/// stepped with `dt`.
///
/// The stability margin `dt ≤ 0.2·dx` keeps the leapfrog update well inside
/// the spectral limit `dt < 2/ω_max ≈ 0.367·dx`; violations are rejected at
/// construction, not at step time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub box_len: f64,
    pub dt: f64,
}

impl GridSpec {
    pub const DEFAULT_BOX: f64 = std::f64::consts::TAU;

    pub fn new(n: usize, box_len: f64, dt: f64) -> Result<GridSpec, FieldError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(FieldError::Config(format!(
                "grid size must be a power of two ≥ 8, got {n}"
            )));
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(FieldError::Config(format!("bad box length {box_len}")));
        }
        let dx = box_len / n as f64;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(FieldError::Config(format!("bad timestep {dt}")));
        }
        if dt > 0.2 * dx {
            return Err(FieldError::Config(format!(
                "timestep {dt} exceeds the stability bound 0.2·dx = {}",
                0.2 * dx
            )));
        }
        Ok(GridSpec { n, box_len, dt })
    }

    pub fn with_default_box(n: usize, dt: f64) -> Result<GridSpec, FieldError> {
        GridSpec::new(n, Self::DEFAULT_BOX, dt)
    }

    pub fn dx(&self) -> f64 {
        self.box_len / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    pub fn num_points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Flat index of the lattice point `(ix, iy, iz)`.
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    /// Physical coordinate of a lattice index along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }
}

/// Compensated (Kahan) summation in the iteration order given; the fixed
/// order makes every reduction bit-reproducible.
pub fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Scalar lattice of `n³` values, lattice-major (`x` slowest, `z` fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarGrid {
    pub n: usize,
    pub data: Vec<f64>,
}

impl ScalarGrid {
    pub fn zeros(n: usize) -> ScalarGrid {
        ScalarGrid {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(f64, f64, f64) -> f64) -> ScalarGrid {
        let n = grid.n;
        let mut data = Vec::with_capacity(grid.num_points());
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    data.push(f(grid.coord(ix), grid.coord(iy), grid.coord(iz)));
                }
            }
        }
        ScalarGrid { n, data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn maxnorm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        kahan_sum(self.data.iter().copied()) / self.data.len() as f64
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &ScalarGrid) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: f64) -> ScalarGrid {
        ScalarGrid {
            n: self.n,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn sub(&self, other: &ScalarGrid) -> ScalarGrid {
        debug_assert_eq!(self.len(), other.len());
        ScalarGrid {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn subtract_mean(&mut self) {
        let m = self.mean();
        for v in &mut self.data {
            *v -= m;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Three scalar lattices making up a vector field sample.
#[derive(Clone, Debug, PartialEq)]
pub struct VecFieldGrid {
    pub comps: [ScalarGrid; 3],
}

impl VecFieldGrid {
    pub fn zeros(n: usize) -> VecFieldGrid {
        VecFieldGrid {
            comps: [ScalarGrid::zeros(n), ScalarGrid::zeros(n), ScalarGrid::zeros(n)],
        }
    }

    pub fn n(&self) -> usize {
        self.comps[0].n
    }

    pub fn maxnorm(&self) -> f64 {
        self.comps.iter().map(ScalarGrid::maxnorm).fold(0.0, f64::max)
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &VecFieldGrid) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.add_scaled(alpha, b);
        }
    }

    pub fn scaled(&self, alpha: f64) -> VecFieldGrid {
        VecFieldGrid {
            comps: [
                self.comps[0].scaled(alpha),
                self.comps[1].scaled(alpha),
                self.comps[2].scaled(alpha),
            ],
        }
    }

    pub fn sub(&self, other: &VecFieldGrid) -> VecFieldGrid {
        VecFieldGrid {
            comps: [
                self.comps[0].sub(&other.comps[0]),
                self.comps[1].sub(&other.comps[1]),
                self.comps[2].sub(&other.comps[2]),
            ],
        }
    }

    pub fn all_finite(&self) -> bool {
        self.comps.iter().all(ScalarGrid::all_finite)
    }
}
