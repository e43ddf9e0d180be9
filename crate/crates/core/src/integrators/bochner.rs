//! Bochner integration by simple-function approximation.

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::integrators::checks::region_label;
use crate::region::Region;
use crate::report::ser_num;
use crate::scalar::Scalar;
use crate::values::VectorValue;

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct CertificatePart<S: Scalar> {
    pub region: String,
    pub measure: Dyadic,
    pub value: VectorValue<S>,
}

/// `value = Σ μ(E_i) x_i` with `∫ ‖φ − Σ x_i χ(E_i)‖ ≤ dom_bound ≤ epsilon`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct BochnerCertificate<S: Scalar> {
    pub parts: Vec<CertificatePart<S>>,
    #[serde(serialize_with = "ser_num")]
    pub dom_bound: S,
    pub value: VectorValue<S>,
    #[serde(serialize_with = "ser_num")]
    pub epsilon: S,
    pub depth: u32,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum BochnerOutcome<S: Scalar> {
    Certificate(BochnerCertificate<S>),
    /// `∫ ‖φ − ψ‖ ≥ lower_bound` for every simple `ψ` with at most
    /// `piece_budget` pieces.
    NotApproximable {
        #[serde(serialize_with = "ser_num")]
        lower_bound: S,
        separation: Dyadic,
        level_measure: Dyadic,
        piece_budget: usize,
    },
}

pub const MAX_BOCHNER_DEPTH: u32 = 24;

/// Certificate at the coarsest grid whose dominating bound is at most
/// `epsilon`; for pairwise-separated integrands, the separation verdict.
///
/// A piece of a simple function can be within `d/2` of at most one of a
/// family of values at mutual distance `d`. With level sets of measure at
/// most `m`, every simple function with `N` pieces is therefore at least
/// `d/2` away from `φ` outside a set of measure `N·m`.
pub fn bochner_integrate<S: Scalar>(
    phi: &dyn Integrand<S>,
    epsilon: &S,
    piece_budget: usize,
) -> Result<BochnerOutcome<S>> {
    if *epsilon <= S::zero() {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    if let Some(sep) = phi.separation() {
        let covered = Dyadic::from_int(piece_budget as i64) * sep.level_measure.clone();
        let uncovered = (Dyadic::one() - covered).max(Dyadic::zero());
        let lower_bound = S::from_dyadic(&(sep.distance.half() * uncovered));
        return Ok(BochnerOutcome::NotApproximable {
            lower_bound,
            separation: sep.distance,
            level_measure: sep.level_measure,
            piece_budget,
        });
    }
    for depth in 0..=MAX_BOCHNER_DEPTH {
        let approx = phi
            .simple_approximation(depth)
            .ok_or(Error::UnsupportedExactIntegration)?;
        if approx.dominating > *epsilon {
            continue;
        }
        let mut value = VectorValue::zeros(phi.space());
        let mut parts = Vec::with_capacity(approx.parts.len());
        for (r, x) in approx.parts {
            let measure = r.measure();
            value.add_scaled(&S::from_dyadic(&measure), &x)?;
            parts.push(CertificatePart {
                region: region_label(&r),
                measure,
                value: x,
            });
        }
        return Ok(BochnerOutcome::Certificate(BochnerCertificate {
            parts,
            dom_bound: approx.dominating.clone(),
            value,
            epsilon: approx.dominating,
            depth,
        }));
    }
    Err(Error::InvalidParameter(format!(
        "no simple approximation within epsilon up to grid depth {MAX_BOCHNER_DEPTH}"
    )))
}

/// Checks that the certificate's regions are non-overlapping and cover
/// `[0,1]`.
pub fn certificate_covers<S: Scalar>(parts: &[(Region, VectorValue<S>)]) -> bool {
    let total = parts
        .iter()
        .fold(Dyadic::zero(), |acc, (r, _)| acc + r.measure());
    let union = parts
        .iter()
        .fold(Region::empty(), |acc, (r, _)| acc.union(r));
    total == Dyadic::one() && union == Region::unit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::PiecewisePoly;
    use crate::values::{NormKind, ValueSpace};
    use num_rational::BigRational as Q;

    #[test]
    fn step_and_linear_certificates() {
        let sp = ValueSpace::finite(1, NormKind::L1);
        let one = VectorValue::from_data(&sp, vec![Q::from_int(1)]).unwrap();
        let step = PiecewisePoly::right_open_steps(
            &sp,
            vec![Dyadic::zero(), Dyadic::ratio(1, 1), Dyadic::one()],
            vec![one.clone(), VectorValue::zeros(&sp)],
            "step",
        )
        .unwrap();
        let eps = Q::ratio(1, 256);
        match bochner_integrate(&step, &eps, 64).unwrap() {
            BochnerOutcome::Certificate(c) => {
                assert_eq!(c.epsilon, Q::from_int(0));
                assert_eq!(c.value.data()[0], Q::ratio(1, 2));
            }
            other => panic!("expected certificate, got {other:?}"),
        }

        let line = PiecewisePoly::polynomial(&sp, vec![VectorValue::zeros(&sp), one]).unwrap();
        let approx = line.simple_approximation(3).unwrap();
        assert!(certificate_covers(&approx.parts));
        match bochner_integrate(&line, &eps, 64).unwrap() {
            BochnerOutcome::Certificate(c) => {
                assert!(c.dom_bound <= eps);
                assert_eq!(c.value.data()[0], Q::ratio(1, 2));
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }
}
