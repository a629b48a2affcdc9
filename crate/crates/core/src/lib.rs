//! Secrecy performance of a source → energy-harvesting untrusted
//! amplify-and-forward relay → destination link with destination-assisted
//! jamming, under power-splitting (PS) and time-switching (TS) relays.
//!
//! Closed-form and quadrature metrics live behind the [`RelayPolicy`] trait;
//! [`montecarlo`] simulates the same link as an independent check, and
//! [`optimize`] searches the policy's design variable.

pub mod error;
pub mod montecarlo;
pub mod optimize;
pub mod policy;
pub mod quadrature;
pub mod shared;
pub mod special;
pub mod types;
pub mod units;
pub mod validation;

pub use error::{Error, QuadratureError, Result};
pub use montecarlo::{estimate_metrics, estimate_with, sample_channel, Estimate, McConfig, McEstimate, SnrMode};
pub use optimize::{objective_value, optimize_policy, optimize_scalar, Objective, OptimizeSpec, Optimum};
pub use policy::{policy_for, PolicyRegistry, PowerSplitting, RelayPolicy, TimeSwitching};
pub use quadrature::{integrate_finite, integrate_semi_infinite, Integral, QuadSpec};
pub use shared::{power_outage_prob, secrecy_rate, sum_exp_pdf, total_secrecy_outage, SumExpDensity};
pub use special::{cubic_positive_root, euler_constant, exp_integral_ei, lower_incomplete_gamma, scaled_e1, CubicCoeffs};
pub use types::{lambda_from_geometry, ChannelSample, Geometry, MetricReport, PolicyKind, PolicyParam, SystemParams};
pub use units::{db_to_linear, dbm_to_watts, watts_to_dbm};
pub use validation::{validate_grid, validate_point, ValidationRow, ValidationSpec};
