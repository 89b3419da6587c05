//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating point type the library is generic over (`f32` or `f64`).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Send + Sync + std::fmt::LowerExp
{
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;
pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

/// `exp(z)` for a complex argument.
#[inline]
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let m = z.re.exp();
    Complex::new(m * z.im.cos(), m * z.im.sin())
}

/// `exp(-i θ)`.
#[inline]
pub fn phase<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), -theta.sin())
}

/// Machine epsilon of `T` as a plain number.
#[inline]
pub fn eps<T: Real>() -> T {
    T::default_epsilon()
}
