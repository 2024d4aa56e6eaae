//! Special functions, endpoint-singular quadrature and the renewal recursion.

mod quadrature;
mod renewal;
mod special;

pub use quadrature::{integrate_01, integrate_01_split, QuadratureResult, MAX_EVALUATIONS};
pub use renewal::{renewal_sequence, RenewalSequence, RenewalSource};
pub use special::{gamma_q, log_beta, log_gamma, log_gamma_ratio};

pub(crate) use quadrature::{integrate_01_split_mixed, integrate_01_split_rel};
pub(crate) use special::{log_binomial, log_gamma_ratio_unchecked};
