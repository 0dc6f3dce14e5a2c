//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All of the linear algebra, separation, feature and metric code is written
//! against [`Real`], which is implemented for `f32` and `f64`. The pipeline and
//! the harness instantiate it at `f64`; see the aliases at the crate root.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::{Fft, FftPlanner};

/// Floating point scalar usable by the pipeline.
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
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Significant decimal digits needed for a lossless text round trip.
    const SIG_DIGITS: usize;

    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }

    /// Forward complex FFT of a real sequence zero-padded to `len`.
    fn fft_real(signal: &[Self], len: usize) -> Vec<Complex<Self>>;

    /// Formats with [`Real::SIG_DIGITS`] significant digits.
    fn to_exact_string(self) -> String {
        format!("{:.*e}", Self::SIG_DIGITS - 1, self)
    }
}

fn fft_with<T>(plan: Arc<dyn Fft<T>>, signal: &[T], len: usize) -> Vec<Complex<T>>
where
    T: rustfft::FftNum + Default,
{
    let mut buf: Vec<Complex<T>> = signal.iter().take(len).map(|&re| Complex::new(re, T::default())).collect();
    buf.resize(len, Complex::new(T::default(), T::default()));
    plan.process(&mut buf);
    buf
}

macro_rules! impl_real {
    ($t:ty, $digits:expr) => {
        impl Real for $t {
            const SIG_DIGITS: usize = $digits;

            fn fft_real(signal: &[Self], len: usize) -> Vec<Complex<Self>> {
                if len == 0 {
                    return Vec::new();
                }
                let plan = FftPlanner::<$t>::new().plan_fft_forward(len);
                fft_with(plan, signal, len)
            }
        }
    };
}

impl_real!(f64, 17);
impl_real!(f32, 9);
