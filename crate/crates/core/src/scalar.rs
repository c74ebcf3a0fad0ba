//! Scalar abstraction shared by every probabilistic component.
//!
//! Models are generic over [`Real`] so the same code runs in `f32` for
//! compact model files and `f64` for reference runs. The crate root exposes
//! `f64` aliases for the common case.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar usable inside models and metrics.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; used for literals.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal representable in scalar type")
    }

    fn from_count(count: u64) -> Self {
        Self::from_u64(count).expect("count representable in scalar type")
    }

    /// Smallest log-probability kept for a parameter that must stay reachable.
    fn log_floor() -> Self {
        Self::min_positive_value().ln()
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}

/// `ln(exp(a) + exp(b))` without overflow; `-inf` is the additive identity.
pub fn log_add<F: Real>(a: F, b: F) -> F {
    if a == F::neg_infinity() {
        return b;
    }
    if b == F::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log of a sum of exponentials.
pub fn log_sum_exp<F: Real>(values: impl IntoIterator<Item = F>) -> F {
    let values: Vec<F> = values.into_iter().collect();
    let max = values
        .iter()
        .copied()
        .fold(F::neg_infinity(), |acc, v| if v > acc { v } else { acc });
    if max == F::neg_infinity() {
        return max;
    }
    let total: F = values.iter().map(|&v| (v - max).exp()).sum();
    max + total.ln()
}
