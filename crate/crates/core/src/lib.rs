//! Drift MLE of the explosive square-root diffusion
//! `dX = (δ + bX) dt + 2√X dB`, `X₀ = 0`: large-deviation rate, cumulant
//! generating function, sharp tail approximations per regime, and Monte
//! Carlo estimators (naive and importance-sampled) to check them against.
//!
//! ```
//! use cir_sldp::{rate_function, ModelParams};
//!
//! let p = ModelParams::explosive(1.0, 1.0, 10.0).unwrap();
//! assert_eq!(rate_function(2.0, &p).unwrap().rate, 1.5);
//! ```

// `!(x > 0.0)` is deliberate throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cgf;
pub mod error;
pub mod montecarlo;
pub mod params;
pub mod rate;
pub mod rng;
pub mod simulate;
pub mod sldp;
pub mod special;
pub mod stats;
pub mod verify;

pub use cgf::{cgf_total, decompose_cgf, riccati_oracle, tilt_interval, CgfDecomposition};
pub use error::{Error, Result};
pub use montecarlo::{compare_report, estimate_tail, Execution, MCEstimate, McConfig, Method, TailReport};
pub use params::{classify_regime, mle_drift, ModelParams, Regime, SufficientStats};
pub use rate::{rate_function, rate_oracle, solve_saddle, RatePoint, SaddleSolution};
pub use rng::RngStream;
pub use simulate::{simulate_path, SamplePath, Scheme};
pub use sldp::{exact_tail_at_zero, tail_approx, TailApprox};
