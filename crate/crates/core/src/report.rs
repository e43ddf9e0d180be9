//! Number rendering for machine-readable reports.
//!
//! Exact dyadic values print as `p/2^k`, other exact rationals as `p/q`, and
//! floating-point values as a decimal with a stated rounding bound.

use num_rational::BigRational;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::dyadic::Dyadic;
use crate::scalar::Scalar;
use crate::values::{NormEnclosure, VectorValue};

pub const SCHEMA: &str = "gauge-lab/1";

pub fn render_rational(q: &BigRational) -> String {
    match Dyadic::from_rational(q) {
        Some(d) => d.to_string(),
        None => format!("{}/{}", q.numer(), q.denom()),
    }
}

/// Decimal with an absolute error bound.
pub fn render_approx(x: f64, err: f64) -> String {
    format!("{x}±{err:.1e}")
}

pub fn render<S: Scalar>(s: &S) -> String {
    if S::EXACT {
        if let Some(q) = s.to_rational() {
            return render_rational(&q);
        }
    }
    let x = s.to_f64();
    render_approx(x, x.abs().max(f64::MIN_POSITIVE) * f64::EPSILON)
}

/// Parses what [`render`] emits for exact values (`p/2^k` or `p/q`).
pub fn parse_exact(s: &str) -> Option<BigRational> {
    if let Ok(d) = s.parse::<Dyadic>() {
        return Some(d.to_rational());
    }
    s.parse::<BigRational>().ok()
}

/// Absolute difference as an `f64`, for tolerance tables.
pub fn abs_f64<S: Scalar>(a: &S, b: &S) -> f64 {
    let diff = a.clone() - b.clone();
    if diff.is_zero() {
        0.0
    } else {
        diff.abs().to_f64()
    }
}

pub fn ser_num<S: Scalar, Z: Serializer>(s: &S, z: Z) -> Result<Z::Ok, Z::Error> {
    z.serialize_str(&render(s))
}

pub fn ser_nums<S: Scalar, Z: Serializer>(v: &[S], z: Z) -> Result<Z::Ok, Z::Error> {
    let mut seq = z.serialize_seq(Some(v.len()))?;
    for s in v {
        seq.serialize_element(&render(s))?;
    }
    seq.end()
}

pub fn ser_opt_num<S: Scalar, Z: Serializer>(s: &Option<S>, z: Z) -> Result<Z::Ok, Z::Error> {
    match s {
        Some(s) => z.serialize_some(&render(s)),
        None => z.serialize_none(),
    }
}

impl<S: Scalar> Serialize for VectorValue<S> {
    fn serialize<Z: Serializer>(&self, z: Z) -> Result<Z::Ok, Z::Error> {
        let data: Vec<String> = self.data().iter().map(render).collect();
        let mut st = z.serialize_struct("VectorValue", 2)?;
        st.serialize_field("space", &self.space().label())?;
        st.serialize_field("data", &data)?;
        st.end()
    }
}

impl<S: Scalar> Serialize for NormEnclosure<S> {
    fn serialize<Z: Serializer>(&self, z: Z) -> Result<Z::Ok, Z::Error> {
        let mut st = z.serialize_struct("NormEnclosure", 2)?;
        st.serialize_field("lo", &render(&self.lo))?;
        st.serialize_field("hi", &render(&self.hi))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_values_render_dyadic_or_fraction() {
        let q = BigRational::new(3.into(), 16.into());
        assert_eq!(render(&q), "3/2^4");
        let third = BigRational::new(1.into(), 3.into());
        assert_eq!(render(&third), "1/3");
        assert_eq!(parse_exact("1/3"), Some(third));
        assert_eq!(parse_exact("3/2^4"), Some(q));
        assert!(render(&0.5f64).starts_with("0.5±"));
    }
}
