//! Scalar abstraction for probabilities and expectations.
//!
//! All inference, policy and metric code is generic over [`Real`]; the crate
//! root re-exports `f64` aliases for everyday use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// floating point probability scalar: f32 or f64
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Normalizes log-domain weights into a probability vector.
///
/// Returns `None` when every weight is `-inf` (total mass zero).
pub fn normalize_log<P: Real>(log_weights: &[P]) -> Option<Vec<P>> {
    let max = log_weights
        .iter()
        .copied()
        .fold(P::neg_infinity(), |a, b| if b > a { b } else { a });
    if max == P::neg_infinity() {
        return None;
    }
    let mut out: Vec<P> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: P = out.iter().copied().sum();
    for w in &mut out {
        *w /= total;
    }
    Some(out)
}

/// ln Σ exp(x); `-inf` for an empty or all-zero input.
pub fn log_sum_exp<P: Real>(xs: &[P]) -> P {
    let max = xs.iter().copied().fold(P::neg_infinity(), |a, b| if b > a { b } else { a });
    if max == P::neg_infinity() {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<P>().ln()
}

/// Shannon entropy in nats.
pub fn entropy<P: Real>(weights: &[P]) -> P {
    weights
        .iter()
        .filter(|w| **w > P::zero())
        .map(|&w| -w * w.ln())
        .sum()
}
