//! Beta values needed by the coefficient form of `D_α`.

use crate::scalar::{from_usize, Real};

/// `B(n, b)` for integer `n ≥ 1` and real `b > 0`, via
/// `B(1, b) = 1/b`, `B(n+1, b) = B(n, b)·n/(n+b)`.
pub fn beta_int<T: Real>(n: usize, b: T) -> T {
    assert!(n >= 1, "beta_int needs n >= 1");
    let mut v = T::one() / b;
    for k in 1..n {
        let k = from_usize::<T>(k);
        v = v * k / (k + b);
    }
    v
}

/// All of `B(1, b), …, B(n, b)` in one pass.
pub fn beta_int_table<T: Real>(n: usize, b: T) -> Vec<T> {
    let mut out = Vec::with_capacity(n);
    let mut v = T::one() / b;
    for k in 1..=n {
        out.push(v);
        let kf = from_usize::<T>(k);
        v = v * kf / (kf + b);
    }
    out
}
