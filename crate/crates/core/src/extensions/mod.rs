//! Restrictions on a higher moment or on a quantile of the selection.

pub mod moment;
pub mod quantile;

pub use moment::{moment_restricted_mean_interval, power_image_interval, MomentRestriction};
pub use quantile::{
    mixture_convexity_check, quantile_extremal_selection, quantile_restricted_mean_interval,
    quantile_restriction_feasible, satisfies_quantile, QuantileRestriction,
};
