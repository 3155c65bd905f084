//! Binomial and multinomial coefficients, plus the log-space binomial pmf.

use num_traits::PrimInt;

use crate::num::Real;

/// Binomial coefficient C(n, k); zero when k > n.
pub fn binomial<T: PrimInt>(n: T, k: T) -> T {
    if k > n {
        return T::zero();
    }
    let k = if k + k > n { n - k } else { k };
    let mut res = T::one();
    let mut i = T::zero();
    while i < k {
        // exact at every step: res * (n - i) is divisible by (i + 1)
        res = res * (n - i) / (i + T::one());
        i = i + T::one();
    }
    res
}

/// Multinomial coefficient (Σ parts)! / Π parts!.
pub fn multinomial<T: PrimInt>(parts: &[T]) -> T {
    let mut total = T::zero();
    let mut res = T::one();
    for &p in parts {
        total = total + p;
        res = res * binomial(total, p);
    }
    res
}

/// ln C(n, k), summed term by term so no factorial is ever formed.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Binomial probability mass P(X = k) for X ~ Bin(n, p), evaluated in log space.
pub fn binomial_pmf<P: Real>(n: u64, k: u64, p: P) -> P {
    if k > n {
        return P::zero();
    }
    let p = p.as_f64();
    if p <= 0.0 {
        return if k == 0 { P::one() } else { P::zero() };
    }
    if p >= 1.0 {
        return if k == n { P::one() } else { P::zero() };
    }
    let ln = ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
    P::of(ln.exp())
}
