//! Numerical checks of the bounds and hypotheses behind the limit theorems.

mod assumptions;
mod bernstein;
mod phi;
mod series;
mod summability;

pub use assumptions::{
    assumption_report, assumption_report_with_schedule, AssumptionReport, AssumptionRow,
    DEFAULT_SERIES_C,
};
pub use bernstein::{bernstein_tail, counting_bound};
pub use phi::{log_grid, phi_bounds_check, PhiBoundsReport, PHI_SEARCH_LIMIT};
pub use summability::{
    summability_check, Certificate, SeriesReport, SummabilityReport, CERTIFICATE_HORIZON,
    GEOMETRIC_Q, POWER_P,
};
