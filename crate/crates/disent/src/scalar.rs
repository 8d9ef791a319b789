//! Floating-point scalar abstraction.
//!
//! All numeric code in this crate is generic over [`Scalar`] so the same
//! kernels, model, and optimizers run in `f32` or `f64`. The crate root
//! exports `f64` aliases, which is what the CLI and the experiment pipeline
//! use: gradient checks at 1e-4 relative error and the optimizer oracles
//! at 1e-15 need 64-bit arithmetic.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough literal conversion for constants written as `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal converts to any Scalar")
    }

    /// Widen to `f64` (exact for f32/f64), used by logging and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar widens to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
