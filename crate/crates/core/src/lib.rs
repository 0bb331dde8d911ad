//! Numerical tools for exponential frames of measures on the line: densities
//! and self-similar measures, their Fourier transforms, frequency sets, and
//! frame-bound estimates on discretized `L²(μ)`.

pub mod descriptor;
pub mod eigen;
pub mod fourier;
pub mod frame;
pub mod interval;
pub mod measure;
pub mod selfsim;
pub mod spectrum;

use thiserror::Error;

pub use descriptor::ParseError;
pub use eigen::{EigenError, HermitianMatrix};
pub use fourier::{ft, FourierError, FtEvaluation, FtMethod, Transform};
pub use frame::{
    discretize, frame_bounds, frame_matrix, lower_bound_diagnostic, theorem1_verdict, translate_invariance_check,
    upper_bound_diagnostic, DiscretizedL2, FrameBoundsReport, FrameError, Theorem1Verdict,
};
pub use interval::Interval;
pub use measure::{
    essential_bounds, interval_mass, level_set, make_density_measure, DensityFn, DensityMeasure, EssentialBounds,
    EssentialBoundsConfig, LevelSet, Measure1D, MeasureError,
};
pub use selfsim::{IfsError, IfsSystem};
pub use spectrum::{Spectrum, SpectrumError};

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Ifs(#[from] IfsError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}
