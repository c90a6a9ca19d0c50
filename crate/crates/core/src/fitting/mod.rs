//! Least-squares machinery and the model fits built on it.

mod angle;
mod bootstrap;
mod c0;
mod lsq;
mod relaxation;
mod series;
mod simplex;

pub use angle::{fit_angle_model, AngleFit, AngleFitOptions};
pub use bootstrap::BootstrapOptions;
pub use c0::{fit_c0, C0Fit, C0FitOptions};
pub use lsq::{fit_curve, least_squares, FitParameter, FitReport, LeastSquaresOptions};
pub use relaxation::{fit_spin_relaxation, RelaxationFit};
pub use series::{DataSeries, SeriesX};
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};
