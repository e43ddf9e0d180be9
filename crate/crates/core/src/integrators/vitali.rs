//! Vitali-type convergence harness.
//!
//! Checks, on finite samples, the two hypotheses of the convergence
//! theorem — pointwise convergence (H1) and Cauchy-ness of `∫_E f∘φ_n` for
//! each sampled `(f, E)` (H2) — and its conclusion (C): the McShane integral
//! of the limit matches the limit of the integrals. C is only claimed when
//! both hypotheses hold on the sample.

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::integrand::IntegrandFn;
use crate::integrators::checks::{region_label, scalar_integral};
use crate::integrators::mcshane::{mcshane_integrate, McShaneOptions, Status};
use crate::region::Region;
use crate::report::ser_num;
use crate::sampling;
use crate::scalar::Scalar;
use crate::values::{DualFunctional, VectorValue};

#[derive(Clone, Debug)]
pub struct VitaliOptions {
    pub tau: Dyadic,
    pub n_max: usize,
    pub sample_points: usize,
    pub seed: u64,
    /// Test H1 only through the functionals (sampled weak convergence).
    /// Experimental: carries no correctness claim.
    pub weak_h1: bool,
    pub mcshane: McShaneOptions,
}

impl Default for VitaliOptions {
    fn default() -> Self {
        VitaliOptions {
            tau: Dyadic::pow2_neg(10),
            n_max: 16,
            sample_points: 64,
            seed: 0,
            weak_h1: false,
            mcshane: McShaneOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct VitaliReport<S: Scalar> {
    pub h1: bool,
    pub h2: bool,
    /// Whether the conclusion's inequality held, regardless of hypotheses.
    pub c_holds: bool,
    /// `c_holds` and both hypotheses held on the sample.
    pub c_claimed: bool,
    pub weak_h1: bool,
    pub verdict: String,
    pub violations: Vec<String>,
    #[serde(serialize_with = "ser_num")]
    pub worst_pointwise: S,
    #[serde(serialize_with = "ser_num")]
    pub worst_cauchy: S,
    pub limit_integral: VectorValue<S>,
    pub sequence_integral: VectorValue<S>,
    #[serde(serialize_with = "ser_num")]
    pub c_distance: S,
    pub limit_status: Status,
}

/// `φ_{n_max}` integrated exactly when possible, else by the McShane engine.
fn integral_of<S: Scalar>(phi: &IntegrandFn<S>, opts: &McShaneOptions) -> Result<VectorValue<S>> {
    match phi.exact_integral(&Region::unit()) {
        Some(v) => Ok(v),
        None => Ok(mcshane_integrate(phi.as_ref(), opts)?.value),
    }
}

pub fn vitali_limit<S: Scalar>(
    seq: &dyn Fn(usize) -> IntegrandFn<S>,
    limit: &IntegrandFn<S>,
    functionals: &[DualFunctional<S>],
    regions: &[Region],
    opts: &VitaliOptions,
) -> Result<VitaliReport<S>> {
    let tau = S::from_dyadic(&opts.tau);
    let mut violations = Vec::new();

    // H1 on seeded uniform points plus the dyadic grid of depth 6.
    let last = seq(opts.n_max);
    let mut rng = sampling::stream(opts.seed, 0x7669_7461);
    let mut points: Vec<Dyadic> = (0..=64).map(|j| Dyadic::ratio(j, 6)).collect();
    points.extend((0..opts.sample_points).map(|_| sampling::unit_dyadic(&mut rng)));
    let mut worst_pointwise = S::zero();
    for t in &points {
        let diff = last.eval(t).sub(&limit.eval(t))?;
        let gap = if opts.weak_h1 {
            functionals
                .iter()
                .map(|f| f.apply(&diff).map(|x| x.abs()))
                .collect::<Result<Vec<S>>>()?
                .into_iter()
                .fold(S::zero(), |m, x| m.max_of(x))
        } else {
            diff.norm().hi
        };
        if gap > tau && worst_pointwise <= tau {
            violations.push(format!(
                "H1: |φ_n(t) − φ(t)| > τ at t = {t} (n = {})",
                opts.n_max
            ));
        }
        worst_pointwise = worst_pointwise.max_of(gap);
    }
    let h1 = worst_pointwise <= tau;

    // H2 over the tail window n_max/2 ..= n_max.
    let window: Vec<IntegrandFn<S>> = (opts.n_max / 2..=opts.n_max).map(seq).collect();
    let mut worst_cauchy = S::zero();
    for e in regions {
        for f in functionals {
            let vals = window
                .iter()
                .map(|phi| scalar_integral(f, phi.as_ref(), e))
                .collect::<Result<Vec<S>>>()?;
            let hi = vals
                .iter()
                .cloned()
                .fold(vals[0].clone(), |m, x| m.max_of(x));
            let lo = vals
                .iter()
                .cloned()
                .fold(vals[0].clone(), |m, x| m.min_of(x));
            let spread = hi - lo;
            if spread > tau {
                violations.push(format!(
                    "H2: ∫_E f∘φ_n spreads by {:.6} over the tail for f = {}, E = {}",
                    spread.to_f64(),
                    f.describe(),
                    region_label(e)
                ));
            }
            worst_cauchy = worst_cauchy.max_of(spread);
        }
    }
    let h2 = worst_cauchy <= tau;

    // C: ∫ limit versus the limit of the integrals.
    let limit_est = mcshane_integrate(limit.as_ref(), &opts.mcshane)?;
    let sequence_integral = integral_of(&last, &opts.mcshane)?;
    let c_distance = limit_est.value.distance(&sequence_integral)?.hi;
    let three_tau = tau.clone() * S::from_int(3);
    let c_holds = c_distance <= three_tau && limit_est.status == Status::Converged;
    if !c_holds {
        violations.push(format!(
            "C: ‖∫φ − ∫φ_n‖ = {:.6} exceeds 3τ (limit status {:?})",
            c_distance.to_f64(),
            limit_est.status
        ));
    }
    let c_claimed = c_holds && h1 && h2;
    let verdict = if c_claimed { "pass" } else { "violation" }.to_string();
    Ok(VitaliReport {
        h1,
        h2,
        c_holds,
        c_claimed,
        weak_h1: opts.weak_h1,
        verdict,
        violations,
        worst_pointwise,
        worst_cauchy,
        limit_integral: limit_est.value,
        sequence_integral,
        c_distance,
        limit_status: limit_est.status,
    })
}
