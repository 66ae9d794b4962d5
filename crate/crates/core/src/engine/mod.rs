//! Stochastic gradient optimizers for the Gaussian variational lower bound.
//!
//! Both the covariance-factor algorithm (mean-field or unrestricted `L`) and
//! the sparse precision-factor algorithm share the same loop: one standard
//! normal draw per iteration, an unbiased gradient estimate from one of two
//! estimator families, a log-diagonal reparameterization of the factor and
//! ADADELTA step sizes. Convergence is judged on window averages of the
//! single-draw lower-bound estimate.

mod adadelta;
mod estimator;
mod fit;
mod result_io;
mod rng;
mod state;
mod stopping;

pub use adadelta::{Adadelta, DEFAULT_EPSILON, DEFAULT_RHO};
pub use estimator::{
    chain_to_tprime, chain_to_tprime_in_place, estimate_gradients, lower_bound_estimate, monte_carlo_lower_bound, Estimator,
    GradientEstimate,
};
pub use fit::{run_fit, Algorithm, FitConfig, FitResult, Termination, DEFAULT_PATIENCE, DEFAULT_WINDOW};
pub use result_io::{read_fit_result, write_fit_result};
pub use rng::{draw_standard_normal, fill_standard_normal, fit_rng, FitRng};
pub use state::{Parameterization, VariationalState};
pub use stopping::{is_diverging, stopping_check, StopDecision, StoppingRule};
