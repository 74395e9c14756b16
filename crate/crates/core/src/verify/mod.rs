//! Verification harness: remainder sampling and scaling fits, exact identity
//! suites, decay-rate fits and JSON reports.

pub mod decay;
pub mod fit;
pub mod identity;
pub mod remainder;
pub mod report;
pub mod sampling;

pub use decay::{run_decay_suite, DecayParams, DecayReport, DecayTarget};
pub use fit::{fit_exponent, ScalingFit};
pub use identity::{build_context, run_identity_suite, IdentityId, IdentityParams, IdentityReport, IDENTITY_TOLERANCE};
pub use remainder::{run_remainder, sample_remainder, Formula, RemainderParams, RemainderRun};
pub use report::{git_describe, Report};
pub use sampling::{RemainderSample, SamplingPlan};
