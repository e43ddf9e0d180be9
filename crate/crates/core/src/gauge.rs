//! Gauges `δ : [0,1] → (0,∞)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::region::{Interval, Region};

pub type GaugeFn = dyn Fn(&Dyadic) -> BigRational + Send + Sync;

/// Gauge values are exact rationals so that subordination checks against
/// dyadic endpoints are exact.
#[derive(Clone)]
pub enum Gauge {
    Constant(BigRational),
    /// `values[j]` on `[breaks[j-1], breaks[j])`, with `breaks` the sorted
    /// interior breakpoints; the last cell is closed at 1.
    Piecewise {
        breaks: Vec<Dyadic>,
        values: Vec<BigRational>,
    },
    /// Arbitrary positive function, checked at every probe point.
    Evaluator {
        eval: Arc<GaugeFn>,
        floor: Option<BigRational>,
        label: String,
    },
}

impl Gauge {
    pub fn constant(v: BigRational) -> Result<Self> {
        if !v.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "constant gauge must be positive, got {v}"
            )));
        }
        Ok(Gauge::Constant(v))
    }

    /// `δ ≡ 2^-k`.
    pub fn pow2(k: u32) -> Self {
        Gauge::Constant(Dyadic::pow2_neg(k).to_rational())
    }

    pub fn piecewise(breaks: Vec<Dyadic>, values: Vec<BigRational>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter(
                "piecewise gauge needs one more value than breaks".into(),
            ));
        }
        let inside = breaks.iter().all(|b| b.is_positive() && *b < Dyadic::one());
        if !inside || !breaks.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "gauge breaks must increase strictly inside (0,1)".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_positive()) {
            return Err(Error::InvalidParameter(format!(
                "gauge value {v} is not positive"
            )));
        }
        Ok(Gauge::Piecewise { breaks, values })
    }

    pub fn evaluator(
        label: impl Into<String>,
        floor: Option<BigRational>,
        eval: impl Fn(&Dyadic) -> BigRational + Send + Sync + 'static,
    ) -> Self {
        Gauge::Evaluator {
            eval: Arc::new(eval),
            floor,
            label: label.into(),
        }
    }

    pub fn eval(&self, t: &Dyadic) -> Result<BigRational> {
        let v = match self {
            Gauge::Constant(c) => return Ok(c.clone()),
            Gauge::Piecewise { breaks, values } => {
                let j = breaks.partition_point(|b| b <= t);
                return Ok(values[j].clone());
            }
            Gauge::Evaluator { eval, .. } => eval(t),
        };
        if !v.is_positive() {
            return Err(Error::NonPositiveGauge {
                t: t.clone(),
                value: v.to_string(),
            });
        }
        Ok(v)
    }

    /// A known positive lower bound, if any.
    pub fn floor(&self) -> Option<BigRational> {
        match self {
            Gauge::Constant(c) => Some(c.clone()),
            Gauge::Piecewise { values, .. } => values.iter().min().cloned(),
            Gauge::Evaluator { floor, .. } => floor.clone(),
        }
    }

    /// Whether the tagged interval `(iv, t)` sits inside `[t-δ(t), t+δ(t)]`.
    pub fn admits(&self, iv: &Interval, t: &Dyadic) -> Result<bool> {
        let reach = (t - iv.lo()).max(iv.hi() - t);
        if !reach.is_positive() {
            self.eval(t)?;
            return Ok(true);
        }
        Ok(reach.to_rational() <= self.eval(t)?)
    }

    /// Exact `{t ∈ [0,1] : δ(t) ≥ threshold}` for constant and piecewise
    /// gauges; `None` for evaluators.
    pub fn superlevel(&self, threshold: &BigRational) -> Option<Region> {
        match self {
            Gauge::Constant(c) => Some(if c >= threshold {
                Region::unit()
            } else {
                Region::empty()
            }),
            Gauge::Piecewise { breaks, values } => {
                let mut edges = vec![Dyadic::zero()];
                edges.extend(breaks.iter().cloned());
                edges.push(Dyadic::one());
                let cells = edges
                    .windows(2)
                    .zip(values)
                    .filter(|(_, v)| *v >= threshold)
                    .map(|(w, _)| Interval::new(w[0].clone(), w[1].clone()))
                    .collect::<Result<Vec<_>>>()
                    .ok()?;
                Some(Region::normalize(cells))
            }
            Gauge::Evaluator { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Gauge::Constant(c) => format!("const:{c}"),
            Gauge::Piecewise { breaks, values } => {
                let mut s = format!("pw:{}", values[0]);
                for (b, v) in breaks.iter().zip(&values[1..]) {
                    s.push_str(&format!(",{b},{v}"));
                }
                s
            }
            Gauge::Evaluator { label, .. } => label.clone(),
        }
    }
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses a positive rational written `p/q`, `p/2^k`, `2^-k` or `p`.
pub fn parse_positive_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let q = if let Ok(d) = s.parse::<Dyadic>() {
        d.to_rational()
    } else {
        BigRational::from_str(s).map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?
    };
    if q.is_zero() || q.is_negative() {
        return Err(Error::Parse(format!(
            "expected a positive value, got {s:?}"
        )));
    }
    Ok(q)
}

/// `const:<v>` or `pw:<v0>,<x1>,<v1>,...,<xn>,<vn>`.
impl FromStr for Gauge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(v) = s.strip_prefix("const:") {
            return Gauge::constant(parse_positive_rational(v)?);
        }
        if let Some(body) = s.strip_prefix("pw:") {
            let fields: Vec<&str> = body.split(',').collect();
            if fields.len().is_multiple_of(2) {
                return Err(Error::Parse(format!(
                    "piecewise gauge needs v0,x1,v1,...: {s:?}"
                )));
            }
            let mut values = Vec::new();
            let mut breaks = Vec::new();
            for (i, f) in fields.iter().enumerate() {
                if i % 2 == 0 {
                    values.push(parse_positive_rational(f)?);
                } else {
                    breaks.push(f.parse::<Dyadic>()?);
                }
            }
            return Gauge::piecewise(breaks, values);
        }
        Err(Error::Parse(format!(
            "unknown gauge {s:?} (expected const:... or pw:...)"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_positive_rational(s).unwrap()
    }

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_eval() {
        let g: Gauge = "const:1/5".parse().unwrap();
        assert_eq!(g.eval(&d("1/2")).unwrap(), q("1/5"));
        let pw: Gauge = "pw:1/2,1/2,1/100".parse().unwrap();
        assert_eq!(pw.eval(&d("1/4")).unwrap(), q("1/2"));
        assert_eq!(pw.eval(&d("1/2")).unwrap(), q("1/100"));
        assert_eq!(pw.eval(&d("1")).unwrap(), q("1/100"));
        assert!("const:0".parse::<Gauge>().is_err());
        assert!("pw:1/2,1/2".parse::<Gauge>().is_err());
        assert!("sin".parse::<Gauge>().is_err());
    }

    #[test]
    fn evaluator_positivity_is_enforced() {
        let g = Gauge::evaluator("bad", None, |t: &Dyadic| t.to_rational());
        assert!(matches!(
            g.eval(&Dyadic::zero()),
            Err(Error::NonPositiveGauge { .. })
        ));
        assert!(g.eval(&d("1/2")).is_ok());
    }

    #[test]
    fn superlevel_sets() {
        let pw: Gauge = "pw:1/2,1/2,1/100".parse().unwrap();
        assert_eq!(pw.superlevel(&q("1/4")).unwrap().measure(), d("1/2"));
        assert_eq!(pw.superlevel(&q("1/200")).unwrap(), Region::unit());
        let c: Gauge = "const:1/5".parse().unwrap();
        assert!(c.superlevel(&q("1/4")).unwrap().is_empty());
    }

    #[test]
    fn admits_is_the_subordination_inequality() {
        let g = Gauge::pow2(4);
        let iv = Interval::new(d("1/4"), d("3/8")).unwrap();
        assert!(g.admits(&iv, &d("5/16")).unwrap());
        assert!(!g.admits(&iv, &d("1/4")).unwrap());
    }
}
