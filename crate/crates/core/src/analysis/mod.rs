//! Post-processing and closed-form oracles.

mod closed_form;
mod ecdf;
mod fit;
mod fringe;

pub use closed_form::{friis_db, ris_cascade_closed_form, two_ray_gain_with, two_ray_power};
pub use ecdf::Ecdf;
pub use fringe::{axis_difference_deg, dominant_fringe, fold_axis_deg, Fringe};
pub use fit::{
    db_per_octave, fit_gaussian_cdf, fit_inverse_square_product, fit_loglog, fit_polynomial,
    normal_cdf, FitKind, FitResult,
};
