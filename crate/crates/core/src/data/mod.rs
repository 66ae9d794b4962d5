//! CSV loaders, design-matrix builders and the returns transform.

mod datasets;
mod returns;
pub mod synthetic;
mod table;

pub use datasets::{
    build_epilepsy_model, build_polypharmacy_model, build_toenail_model, epilepsy_schema, mhv_indicators,
    polypharmacy_schema, toenail_schema, visit_code, EpilepsyVariant, GLMM_PRIOR_VARIANCE,
};
pub use returns::{load_returns, mean_corrected_returns, read_rates, write_returns_csv, ReturnSeries};
pub use table::{load_csv, read_csv, ColumnKind, LongitudinalTable, Schema};
