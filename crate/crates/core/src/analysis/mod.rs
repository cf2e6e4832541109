//! Curves, model comparison and wavenumber extraction.

mod compare;
mod curve;
mod fit;
mod spectrum;

pub use compare::{
    event_distribution, statistical_distance, wavelength_curves, ComparisonModel, ComparisonSpec, WavelengthCurves,
    MAX_DISTANCE, MIN_GRID_POINTS, MIN_POINTS_PER_PERIOD,
};
pub use curve::{Curve, CurveMeta};
pub use fit::{extract_wavenumber, WavenumberFit, MAX_RELATIVE_RESIDUAL};
pub use spectrum::{amplitude_spectrum, peak_frequency};
