//! Coefficient rings for the power-sum algebra.
//!
//! The algebra and the generator are implemented once over an abstract field
//! so the same code runs in `f64` for production and in exact rationals for
//! the identity tests (and for callers enabling the `exact-rational` feature).

/// Field operations needed by the symbolic layer.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

#[cfg(any(test, feature = "exact-rational"))]
mod rational {
    use super::Coeff;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed, Zero};

    impl Coeff for BigRational {
        fn zero() -> Self {
            <BigRational as Zero>::zero()
        }
        fn one() -> Self {
            <BigRational as One>::one()
        }
        fn from_int(v: i64) -> Self {
            BigRational::from_integer(BigInt::from(v))
        }
        fn add(&self, other: &Self) -> Self {
            self + other
        }
        fn sub(&self, other: &Self) -> Self {
            self - other
        }
        fn mul(&self, other: &Self) -> Self {
            self * other
        }
        fn div(&self, other: &Self) -> Self {
            assert!(!<BigRational as Zero>::is_zero(other), "division by zero");
            self / other
        }
        fn neg(&self) -> Self {
            -self
        }
        fn is_zero(&self) -> bool {
            <BigRational as Zero>::is_zero(self)
        }
    }

    /// Convenience constructor used by the exact tests.
    pub fn ratio(num: i64, den: i64) -> BigRational {
        assert!(den != 0);
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        debug_assert!(r.denom().is_positive());
        r
    }
}

#[cfg(any(test, feature = "exact-rational"))]
pub use rational::ratio;
