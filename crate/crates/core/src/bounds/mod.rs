//! Analytic bounds on the ordering entropy and the channel capacity.

pub mod capacity;
pub mod deadline;
pub mod iid;

pub use capacity::{
    cq_finite, cq_finite_without_ordering_entropy, cq_series, cq_simple, ct_bound, BoundPoint,
    BoundVariant, SeriesBound,
};
pub use deadline::{
    binom_expect_log_factorial, delta_gamma_deadline, h_omega_binomial_form, h_omega_exponential,
    mi_ordered_lower, unordered_mi, BinomialMixture,
};
pub use iid::{delta_gamma_general, gamma_bar, h_up, theta_bar_iid, IidEmissionBounds};
