//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};

/// Real scalar the numerical core is generic over.
///
/// Sampling hooks live on the trait so that generic code does not have to
/// carry `StandardNormal: Distribution<T>`-style bounds around.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw on the open interval (0, 1).
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Gamma draw with the given shape and scale. `None` for invalid parameters.
    fn sample_gamma<R: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut R) -> Option<Self>;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            #[inline]
            fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Open01.sample(rng)
            }

            #[inline]
            fn sample_gamma<R: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut R) -> Option<Self> {
                Gamma::new(shape, scale).ok().map(|g| g.sample(rng))
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// `true` when every element is finite.
pub fn all_finite<T: Real>(xs: &[T]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

/// Arithmetic mean, accumulated relative to the first element so that a
/// constant series returns that constant exactly.
pub fn mean<T: Real>(xs: &[T]) -> T {
    match xs.first() {
        None => T::nan(),
        Some(&x0) => x0 + xs.iter().map(|&x| x - x0).sum::<T>() / T::from_usize_lossy(xs.len()),
    }
}

/// Population (1/N) variance.
pub fn population_variance<T: Real>(xs: &[T]) -> T {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_usize_lossy(xs.len())
}

pub fn rms<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    (xs.iter().map(|&x| x * x).sum::<T>() / T::from_usize_lossy(xs.len())).sqrt()
}
