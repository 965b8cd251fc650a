//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All geometry, quadrature and potential-theory code is written against
//! [`Real`], which is implemented for `f32` and `f64`. The FFT entry point
//! lives on the trait so that generic code never has to name a concrete
//! FFT backend.

use std::cell::RefCell;
use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftPlanner;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// In-place unnormalized DFT: forward uses `exp(-2πi jk/n)`, inverse `exp(+2πi jk/n)`.
    fn fft(buffer: &mut [Complex<Self>], inverse: bool);
}

thread_local! {
    static PLANNER_F32: RefCell<FftPlanner<f32>> = RefCell::new(FftPlanner::new());
    static PLANNER_F64: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

impl Real for f32 {
    fn fft(buffer: &mut [Complex<f32>], inverse: bool) {
        PLANNER_F32.with(|p| {
            let mut p = p.borrow_mut();
            let plan = if inverse {
                p.plan_fft_inverse(buffer.len())
            } else {
                p.plan_fft_forward(buffer.len())
            };
            plan.process(buffer);
        })
    }
}

impl Real for f64 {
    fn fft(buffer: &mut [Complex<f64>], inverse: bool) {
        PLANNER_F64.with(|p| {
            let mut p = p.borrow_mut();
            let plan = if inverse {
                p.plan_fft_inverse(buffer.len())
            } else {
                p.plan_fft_forward(buffer.len())
            };
            plan.process(buffer);
        })
    }
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn two_pi<T: Real>() -> T {
    T::TAU()
}

/// Relative tolerance floor that is meaningful for the scalar type.
#[inline]
pub fn eps_floor<T: Real>(requested: f64) -> T {
    let eps = T::epsilon() * lit(64.0);
    let req = lit::<T>(requested);
    if req > eps {
        req
    } else {
        eps
    }
}

/// Ordered (deterministic) sum of a slice.
pub fn ordered_sum<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, &v| acc + v)
}
