use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the analysis and simulation code is generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Serialize + DeserializeOwned + Send + Sync + 'static
{
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits")
    }

    /// Milliseconds to seconds.
    fn from_ms(ms: u64) -> Self {
        Self::from_u64(ms).expect("ms fits") / Self::lit(1000.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean, `None` for an empty slice.
pub fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
    Some(sum / T::from_count(values.len()))
}
