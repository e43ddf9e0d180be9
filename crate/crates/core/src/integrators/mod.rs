//! The four integrals and the equivalence/convergence criteria as
//! executable checks.

pub mod bochner;
pub mod checks;
pub mod mcshane;
pub mod talagrand;
pub mod vitali;

pub use crate::integrand::restrict_integrand;
pub use bochner::{bochner_integrate, BochnerCertificate, BochnerOutcome};
pub use checks::{
    absolute_continuity, indefinite_integral, interval_series_check, lower_norm_integral,
    pettis_check, scalar_integral, uniform_integrability, ModulusTable, PettisReport, SeriesReport,
};
pub use mcshane::{
    generalized_sum, mcshane_integrate, riemann_sum, IntegralEstimate, McShaneOptions, Schedule,
    Status,
};
pub use talagrand::{talagrand_integrate, TalagrandReport};
pub use vitali::{vitali_limit, VitaliOptions, VitaliReport};
