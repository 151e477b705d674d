//! Finite-blocklength bounds for the noncoherent single-antenna Rayleigh
//! block-fading channel.
//!
//! The crate evaluates the random-coding union bound with parameter `s`
//! (RCUs, achievability) and the meta-converse bound (MC, converse) for
//! unitary space-time modulated inputs, both exactly by Monte-Carlo and
//! through saddlepoint expansions whose cost does not depend on the number
//! of coherence intervals. Normal and error-exponent approximations are
//! provided for comparison.
//!
//! Every numerical module is generic over a [`Real`] scalar (`f32` or
//! `f64`). The aliases at the crate root fix the scalar to `f64`, which is
//! what the CLI and the acceptance suite use.
//!
//! ```
//! use fblb::{ChannelConfig, CgfEvaluator, QuadratureSpec};
//!
//! let cfg = ChannelConfig::new(12, 14, 10f64.powf(0.6)).unwrap();
//! let eval = CgfEvaluator::new(cfg, QuadratureSpec::default());
//! let stats = eval.stats(1.0).unwrap();
//! assert!(stats.i_s > 0.0 && stats.v_s > 0.0);
//! ```

pub mod asymptotics;
pub mod cgf;
pub mod channel;
mod error;
pub mod montecarlo;
pub mod roots;
pub mod saddlepoint;
pub mod selftest;
pub mod settings;
pub mod special;

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Scalar type the numerical core is written against.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or parameter into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    /// Converts an integer count into `Self`.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every Real")
    }

    /// Lossy conversion back to `f64` for reporting and cache keys.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type ChannelConfig = channel::ChannelConfig<f64>;
pub type GammaPair = channel::GammaPair<f64>;
pub type BlockSample = channel::BlockSample<f64>;
pub type CgfEvaluator = cgf::CgfEvaluator<f64>;
pub type CgfBundle = cgf::CgfBundle<f64>;
pub type InfoDensityStats = cgf::InfoDensityStats<f64>;
pub type TiltPoint = cgf::TiltPoint<f64>;
pub type ExpansionTerms = saddlepoint::ExpansionTerms<f64>;

pub use cgf::QuadratureSpec;
pub use montecarlo::McEstimate;
pub use saddlepoint::{BoundKind, BoundPoint, Target};
pub use settings::Settings;
