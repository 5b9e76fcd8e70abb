//! Desk-scale free-field electrodynamics on a periodic spectral grid:
//! constraint-preserving leapfrog integration of the gauge-parametrized
//! Maxwell flow, the symplectic pairing on the thickened phase space with
//! drift tracking, gauge-invariance comparisons, and the discrete action
//! with its stationarity residuals.

pub mod action;
pub mod grid;
pub mod observe;
pub mod propagate;
pub mod snapshot;
pub mod spectral;
pub mod state;

pub use action::{action_stationarity, discrete_action, StationarityReport};
pub use grid::{FieldError, GridSpec, ScalarGrid, VecFieldGrid};
pub use observe::{
    base_pairing, canonical_pair, energy, energy_extended, energy_maxwell, flow_preserves_form,
    gauge_compare, gauge_sector_pair, mixed_pair, run_with_records, symplectic_product, write_csv,
    GaugeCompareReport, PairDrift, RunRecord, TrackedPair, CSV_HEADER,
};
pub use propagate::Propagator;
pub use snapshot::{load_extended, save_extended};
pub use spectral::SpectralOps;
pub use state::{
    band_limited_scalar, band_limited_vector, standing_wave_potential, ExtendedState, GaugeChoice,
    GaugeProvenance, InitialCondition, MaxwellState, Perturbation,
};
