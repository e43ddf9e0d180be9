//! The indefinite integral `ν(E) = ∫_E φ` and the executable criteria built
//! on it: Pettis consistency, interval series, absolute continuity, uniform
//! integrability, and the lower norm integral.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::integrand::{restrict_integrand, Integrand, IntegrandFn};
use crate::integrators::mcshane::{mcshane_integrate, IntegralEstimate, McShaneOptions, Status};
use crate::region::{Interval, Region};
use crate::report::{ser_num, ser_nums};
use crate::sampling;
use crate::scalar::Scalar;
use crate::values::{DualFunctional, VectorValue};

/// `ν(r)`: McShane integral of `φ·χ(r)`.
pub fn indefinite_integral<S: Scalar>(
    phi: &IntegrandFn<S>,
    r: &Region,
    opts: &McShaneOptions,
) -> Result<IntegralEstimate<S>> {
    if r.measure().is_zero() {
        return Ok(IntegralEstimate {
            value: VectorValue::zeros(phi.space()),
            oscillation: S::zero(),
            status: Status::Converged,
            gauge_trace: Vec::new(),
        });
    }
    let restricted = restrict_integrand(phi, r);
    mcshane_integrate(restricted.as_ref(), opts)
}

/// Exact `∫_r f∘φ`; errors for evaluator integrands.
pub fn scalar_integral<S: Scalar>(
    f: &DualFunctional<S>,
    phi: &dyn Integrand<S>,
    r: &Region,
) -> Result<S> {
    phi.pairing_integral(f, r)
}

/// Lower Darboux sum of `‖φ‖` on the dyadic grid of depth `depth`.
pub fn lower_norm_integral<S: Scalar>(phi: &dyn Integrand<S>, depth: u32) -> S {
    phi.lower_norm_sum(depth)
}

pub fn region_label(r: &Region) -> String {
    if r.is_empty() {
        return "∅".into();
    }
    r.parts()
        .iter()
        .map(|p| format!("{p:?}"))
        .collect::<Vec<_>>()
        .join("∪")
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct PettisRow<S: Scalar> {
    pub functional: String,
    pub region: String,
    #[serde(serialize_with = "ser_num")]
    pub pettis: S,
    #[serde(serialize_with = "ser_num")]
    pub scalar: S,
    #[serde(serialize_with = "ser_num")]
    pub residual: S,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct PettisReport<S: Scalar> {
    pub integrand: String,
    #[serde(serialize_with = "ser_num")]
    pub tolerance: S,
    #[serde(serialize_with = "ser_num")]
    pub max_residual: S,
    pub failures: usize,
    pub rows: Vec<PettisRow<S>>,
    pub pass: bool,
}

/// `|f(ν(E)) − ∫_E f∘φ| ≤ τ` for every pair in `functionals × regions`.
/// `ν(E)` is computed once per region with `opts`.
pub fn pettis_check<S: Scalar>(
    phi: &IntegrandFn<S>,
    functionals: &[DualFunctional<S>],
    regions: &[Region],
    tau: &Dyadic,
    opts: &McShaneOptions,
) -> Result<PettisReport<S>> {
    let tau_s = S::from_dyadic(tau);
    let mut rows = Vec::with_capacity(functionals.len() * regions.len());
    let mut max_residual = S::zero();
    let mut failures = 0;
    for r in regions {
        let nu = indefinite_integral(phi, r, opts)?.value;
        for f in functionals {
            let pettis = f.apply(&nu)?;
            let scalar = scalar_integral(f, phi.as_ref(), r)?;
            let residual = (pettis.clone() - scalar.clone()).abs();
            if residual > tau_s {
                failures += 1;
            }
            max_residual = max_residual.max_of(residual.clone());
            rows.push(PettisRow {
                functional: f.describe(),
                region: region_label(r),
                pettis,
                scalar,
                residual,
            });
        }
    }
    Ok(PettisReport {
        integrand: phi.label(),
        tolerance: tau_s,
        max_residual,
        failures,
        rows,
        pass: failures == 0,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct SeriesReport<S: Scalar> {
    pub integrand: String,
    pub blocks: usize,
    /// `‖ν(block_i)‖` upper bounds.
    #[serde(serialize_with = "ser_nums")]
    pub block_norms: Vec<S>,
    /// `‖S_N − S_j‖` upper bounds for `j = 0..=N`.
    #[serde(serialize_with = "ser_nums")]
    pub tails: Vec<S>,
    /// `max_{N/2 ≤ j < k ≤ N} ‖S_k − S_j‖`.
    #[serde(serialize_with = "ser_num")]
    pub cauchy: S,
    #[serde(serialize_with = "ser_num")]
    pub tolerance: S,
    pub pass: bool,
}

/// Partial sums `S_k = Σ_{i<k} ν(block_i)` over the first `n` blocks.
pub fn interval_series_check<S: Scalar>(
    phi: &IntegrandFn<S>,
    blocks: &[Interval],
    n: usize,
    tau: &Dyadic,
    opts: &McShaneOptions,
) -> Result<SeriesReport<S>> {
    let n = n.min(blocks.len());
    let mut partial = vec![VectorValue::zeros(phi.space())];
    let mut block_norms = Vec::with_capacity(n);
    for b in &blocks[..n] {
        let nu = indefinite_integral(phi, &Region::interval(b.clone()), opts)?.value;
        block_norms.push(nu.norm().hi);
        let next = partial.last().expect("seeded").add(&nu)?;
        partial.push(next);
    }
    let total = &partial[n];
    let tails = partial
        .iter()
        .map(|s| total.distance(s).map(|e| e.hi))
        .collect::<Result<Vec<_>>>()?;
    let mut cauchy = S::zero();
    for j in n / 2..=n {
        for k in j + 1..=n {
            cauchy = cauchy.max_of(partial[k].distance(&partial[j])?.hi);
        }
    }
    let tolerance = S::from_dyadic(tau);
    let pass = cauchy <= tolerance;
    Ok(SeriesReport {
        integrand: phi.label(),
        blocks: n,
        block_norms,
        tails,
        cauchy,
        tolerance,
        pass,
    })
}

/// Seeded regions of measure at most `eta`: `[0,η]`, `[1−η,1]`, and unions
/// of up to three intervals at random dyadic positions.
pub fn sample_small_regions(eta: &Dyadic, count: usize, seed: u64) -> Vec<Region> {
    let eta = eta.clone().min(Dyadic::one()).max(Dyadic::zero());
    let mut out = vec![
        Region::span(Dyadic::zero(), eta.clone()),
        Region::span(&Dyadic::one() - &eta, Dyadic::one()),
    ];
    let mut rng = sampling::stream(seed, 0x7265_6769);
    const BITS: u32 = 16;
    for _ in 0..count {
        let pieces = rng.random_range(1..=3usize);
        let each = if pieces == 1 {
            eta.clone()
        } else {
            eta.shl(-2)
        };
        let room = &Dyadic::one() - &each;
        let parts = (0..pieces)
            .map(|_| {
                let lo = &room * &Dyadic::ratio(rng.random_range(0..=(1i64 << BITS)), BITS);
                let hi = &lo + &each;
                Interval::new(lo, hi).expect("ordered")
            })
            .collect();
        out.push(Region::normalize(parts));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct ModulusRow<S: Scalar> {
    pub eta: Dyadic,
    #[serde(serialize_with = "ser_num")]
    pub modulus: S,
    pub worst_region: String,
    pub regions_checked: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct ModulusTable<S: Scalar> {
    pub rows: Vec<ModulusRow<S>>,
    pub monotone: bool,
}

impl<S: Scalar> ModulusTable<S> {
    /// Pools region values so that row `i` is the sup over every region
    /// sampled for `η_j ≤ η_i`.
    fn pooled(mut etas: Vec<(Dyadic, Vec<(Region, S)>)>) -> Self {
        etas.sort_by(|a, b| a.0.cmp(&b.0));
        let mut rows = Vec::new();
        let mut best: Option<(S, String)> = None;
        let mut checked = 0;
        for (eta, vals) in etas {
            for (r, v) in vals {
                checked += 1;
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, region_label(&r)));
                }
            }
            let (modulus, worst_region) = best.clone().unwrap_or_else(|| (S::zero(), "∅".into()));
            rows.push(ModulusRow {
                eta,
                modulus,
                worst_region,
                regions_checked: checked,
            });
        }
        let monotone = rows.windows(2).all(|w| w[0].modulus <= w[1].modulus);
        ModulusTable { rows, monotone }
    }
}

/// `η ↦ sup { ‖ν(E)‖ : E sampled, μE ≤ η }`.
pub fn absolute_continuity<S: Scalar>(
    phi: &IntegrandFn<S>,
    etas: &[Dyadic],
    regions_per_eta: usize,
    seed: u64,
    opts: &McShaneOptions,
) -> Result<ModulusTable<S>> {
    let mut per_eta = Vec::new();
    for (i, eta) in etas.iter().enumerate() {
        let mut vals = Vec::new();
        for r in sample_small_regions(eta, regions_per_eta, seed.wrapping_add(i as u64)) {
            let v = indefinite_integral(phi, &r, opts)?.value.norm().hi;
            vals.push((r, v));
        }
        per_eta.push((eta.clone(), vals));
    }
    Ok(ModulusTable::pooled(per_eta))
}

/// `η ↦ sup { |∫_E f∘φ| : φ ∈ Φ, f ∈ F, E sampled, μE ≤ η }`, exact.
pub fn uniform_integrability<S: Scalar>(
    family: &[IntegrandFn<S>],
    functionals: &[DualFunctional<S>],
    etas: &[Dyadic],
    regions_per_eta: usize,
    seed: u64,
) -> Result<ModulusTable<S>> {
    let mut per_eta = Vec::new();
    for (i, eta) in etas.iter().enumerate() {
        let mut vals = Vec::new();
        for r in sample_small_regions(eta, regions_per_eta, seed.wrapping_add(i as u64)) {
            let mut sup = S::zero();
            for phi in family {
                for f in functionals {
                    sup = sup.max_of(scalar_integral(f, phi.as_ref(), &r)?.abs());
                }
            }
            vals.push((r, sup));
        }
        per_eta.push((eta.clone(), vals));
    }
    Ok(ModulusTable::pooled(per_eta))
}

/// Convenience: an integrand family from concrete integrands.
pub fn family<S: Scalar, I: Integrand<S> + 'static>(items: Vec<I>) -> Vec<IntegrandFn<S>> {
    items
        .into_iter()
        .map(|i| Arc::new(i) as IntegrandFn<S>)
        .collect()
}
