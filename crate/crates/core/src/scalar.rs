//! Scalar abstraction shared by every vector-valued computation.
//!
//! Exact pipelines run over [`BigRational`]; Monte Carlo and quick sweeps run
//! over `f64`/`f32`. Gauges, partitions and regions are always dyadic, so
//! only coordinate values vary with the scalar.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::dyadic::Dyadic;

pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// Whether arithmetic is exact.
    const EXACT: bool;

    fn from_dyadic(d: &Dyadic) -> Self;

    fn from_rational(q: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Lower and upper bounds on the square root of a non-negative value.
    /// Certified for exact scalars; `lo == hi` for floats.
    fn sqrt_enclosure(&self) -> (Self, Self);

    /// Exact rational value, when one is available.
    fn to_rational(&self) -> Option<BigRational>;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `Σ a_i·b_i` over the common prefix.
    fn dot(a: &[Self], b: &[Self]) -> Self {
        a.iter()
            .zip(b)
            .fold(Self::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
    }
}

/// `log2 d` when `d` is a power of two.
fn pow2_exponent(d: &BigInt) -> Option<u64> {
    let tz = d.trailing_zeros()?;
    (d.bits() == tz + 1).then_some(tz)
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_dyadic(d: &Dyadic) -> Self {
        d.to_rational()
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn sqrt_enclosure(&self) -> (Self, Self) {
        if !self.is_positive() {
            return (Self::zero(), Self::zero());
        }
        let approx = Scalar::to_f64(self).sqrt();
        if let Some(r) = BigRational::from_f64(approx) {
            if &(&r * &r) == self {
                return (r.clone(), r);
            }
        }
        // Widen a relative band around the float root until it brackets.
        let mut rel = 2f64.powi(-40);
        loop {
            let lo = BigRational::from_f64(approx * (1.0 - rel)).unwrap_or_else(Self::zero);
            let hi =
                BigRational::from_f64(approx * (1.0 + rel)).unwrap_or_else(|| self + Self::one());
            if &(&lo * &lo) <= self && &(&hi * &hi) >= self {
                return (lo, hi);
            }
            rel *= 16.0;
            if rel >= 1.0 {
                let hi = if self > &Self::one() {
                    self.clone()
                } else {
                    Self::one()
                };
                return (Self::zero(), hi);
            }
        }
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    /// Dyadic operands are summed as integers over one power-of-two
    /// denominator, avoiding a gcd per term.
    fn dot(a: &[Self], b: &[Self]) -> Self {
        let mut terms = Vec::with_capacity(a.len().min(b.len()));
        for (x, y) in a.iter().zip(b) {
            if x.is_zero() || y.is_zero() {
                continue;
            }
            match (pow2_exponent(x.denom()), pow2_exponent(y.denom())) {
                (Some(ex), Some(ey)) => terms.push((x.numer() * y.numer(), ex + ey)),
                _ => {
                    return a
                        .iter()
                        .zip(b)
                        .fold(Self::zero(), |acc, (x, y)| acc + x * y)
                }
            }
        }
        let top = terms.iter().map(|t| t.1).max().unwrap_or(0);
        let num = terms
            .into_iter()
            .fold(BigInt::zero(), |acc, (n, e)| acc + (n << (top - e)));
        BigRational::new(num, BigInt::one() << top)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_dyadic(d: &Dyadic) -> Self {
                d.to_f64() as $t
            }

            fn from_rational(q: &BigRational) -> Self {
                Scalar::to_f64(q) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn sqrt_enclosure(&self) -> (Self, Self) {
                let r = self.max(0.0).sqrt();
                (r, r)
            }

            fn to_rational(&self) -> Option<BigRational> {
                BigRational::from_float(*self)
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_sqrt_is_certified() {
        let x = <BigRational as Scalar>::from_int(25);
        let (lo, hi) = x.sqrt_enclosure();
        assert_eq!(lo, <BigRational as Scalar>::from_int(5));
        assert_eq!(hi, lo);

        let two = <BigRational as Scalar>::from_int(2);
        let (lo, hi) = two.sqrt_enclosure();
        assert!(&lo * &lo <= two && &hi * &hi >= two);
        assert!(Scalar::to_f64(&(hi - lo)) < 1e-9);

        let tiny = BigRational::new(BigInt::from(1), BigInt::from(3u64 << 40));
        let (lo, hi) = tiny.sqrt_enclosure();
        assert!(&lo * &lo <= tiny && &hi * &hi >= tiny);
    }

    #[test]
    fn conversions_agree() {
        let d: Dyadic = "3/2^4".parse().unwrap();
        assert_eq!(<f64 as Scalar>::from_dyadic(&d), 0.1875);
        assert_eq!(
            <BigRational as Scalar>::from_dyadic(&d),
            BigRational::new(3.into(), 16.into())
        );
        assert_eq!(<f32 as Scalar>::ratio(1, 4), 0.25);
    }
}
