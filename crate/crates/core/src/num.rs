//! Scalar abstraction for the numeric code paths.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the numeric modules are generic over (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + Debug + Display + std::iter::Sum + Send + Sync + 'static
{
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Real")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to any Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("any Real converts to f64")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + Debug + Display + std::iter::Sum + Send + Sync + 'static
{
}
