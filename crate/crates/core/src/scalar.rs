//! Scalar abstractions.
//!
//! Exact quantities (cluster-size probabilities, joint count tables, box
//! probabilities) only need ring operations and division, so they are generic
//! over [`Scalar`] and can be evaluated in `f32`, `f64` or exactly in
//! [`BigRational`](num_rational::BigRational). Estimators take logarithms and
//! are generic over [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// A number type closed under `+ - * /` that can be compared and converted.
pub trait Scalar:
    Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync
{
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("every count is representable")
    }

    /// Lossy conversion for reporting.
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn powu(&self, exp: usize) -> Self {
        num_traits::pow(self.clone(), exp)
    }

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }
}

impl<T> Scalar for T where
    T: Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync
{
}

/// Floating point scalar: f32 or f64.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits the float type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
