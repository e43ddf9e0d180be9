//! Talagrand stability sets
//! `Z(A,E,m,n,α,β) = {(t,u) ∈ E^m × E^n : ∃f ∈ A, f(t_i) ≤ α ∀i, f(u_j) ≥ β ∀j}`,
//! their Monte Carlo measure, and finite-sample proper-measurability probes.
//!
//! Families are finite and piecewise, so every `Z` set here is measurable
//! and plain measure stands in for outer measure.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::integrand::{IntegrandClass, IntegrandFn};
use crate::integrators::checks::region_label;
use crate::region::{Interval, Region};
use crate::sampling;
use crate::scalar::Scalar;
use crate::values::DualFunctional;

pub type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Member {
    /// `values[j]` on `[breaks[j], breaks[j+1])`, the last cell closed;
    /// zero outside `[breaks[0], breaks[last]]`.
    Step {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// 1 on a finite union of closed intervals, 0 elsewhere.
    Indicator(Vec<(f64, f64)>),
    Evaluator(Arc<RealFn>),
}

impl Member {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Member::Step { breaks, values } => {
                let last = breaks.len() - 1;
                if t < breaks[0] || t > breaks[last] {
                    return 0.0;
                }
                let j = breaks
                    .partition_point(|b| *b <= t)
                    .saturating_sub(1)
                    .min(values.len() - 1);
                values[j]
            }
            Member::Indicator(parts) => {
                let i = parts.partition_point(|p| p.1 < t);
                f64::from(parts.get(i).is_some_and(|p| p.0 <= t))
            }
            Member::Evaluator(f) => f(t),
        }
    }

    pub fn indicator_of(r: &Region) -> Self {
        Member::Indicator(
            r.parts()
                .iter()
                .map(|p| (p.lo().to_f64(), p.hi().to_f64()))
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyClass {
    PiecewiseStep,
    Evaluator,
}

#[derive(Clone, Default)]
pub struct FunctionFamily {
    members: Vec<(String, Member)>,
}

impl FunctionFamily {
    pub fn new() -> Self {
        FunctionFamily::default()
    }

    pub fn push(&mut self, id: impl Into<String>, m: Member) {
        self.members.push((id.into(), m));
    }

    pub fn with(mut self, id: impl Into<String>, m: Member) -> Self {
        self.push(id, m);
        self
    }

    pub fn members(&self) -> &[(String, Member)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn class(&self) -> FamilyClass {
        if self
            .members
            .iter()
            .any(|(_, m)| matches!(m, Member::Evaluator(_)))
        {
            FamilyClass::Evaluator
        } else {
            FamilyClass::PiecewiseStep
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZQuery {
    pub e: Region,
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl ZQuery {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidParameter("m and n must be positive".into()));
        }
        if self.alpha >= self.beta {
            return Err(Error::InvalidParameter("need alpha < beta".into()));
        }
        if !Region::unit().contains_interval(&self.e.hull().unwrap_or_else(Interval::unit))
            || !self.e.measure().is_positive()
        {
            return Err(Error::InvalidParameter(
                "E must lie in [0,1] with positive measure".into(),
            ));
        }
        Ok(())
    }
}

/// `∃ f ∈ A` with `f(t_i) ≤ α` for all `i` and `f(u_j) ≥ β` for all `j`;
/// stops at the first witness.
pub fn z_member(a: &FunctionFamily, t: &[f64], u: &[f64], alpha: f64, beta: f64) -> bool {
    a.members
        .iter()
        .any(|(_, f)| t.iter().all(|&x| f.eval(x) <= alpha) && u.iter().all(|&x| f.eval(x) >= beta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// Strictly below `(μE)^{m+n}` with the confidence interval.
    Below,
    /// Within the confidence interval of the threshold.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZEstimate {
    pub hits: u64,
    pub samples: u64,
    pub estimate: f64,
    /// 95% normal half-width with continuity correction, in measure units.
    pub half_width: f64,
    /// `(μE)^{m+n}`.
    pub threshold: f64,
    pub comparison: Comparison,
}

const CHUNK: u64 = 4096;

fn f64_parts(e: &Region) -> (Vec<(f64, f64)>, f64) {
    let parts: Vec<(f64, f64)> = e
        .parts()
        .iter()
        .filter(|p| !p.is_degenerate())
        .map(|p| (p.lo().to_f64(), p.hi().to_f64()))
        .collect();
    (parts, e.measure().to_f64())
}

/// Hit fraction of uniform draws from `E^{m+n}`, scaled by `(μE)^{m+n}`.
/// Chunk `c` uses stream `(seed, c)`, so results do not depend on threads.
pub fn z_measure_mc(a: &FunctionFamily, q: &ZQuery, samples: u64, seed: u64) -> Result<ZEstimate> {
    q.validate()?;
    if samples < 100 {
        return Err(Error::InvalidParameter(
            "at least 100 samples required".into(),
        ));
    }
    let (parts, mu) = f64_parts(&q.e);
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = sampling::stream(seed, c);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut t = vec![0.0; q.m];
            let mut u = vec![0.0; q.n];
            let mut hits = 0;
            for _ in 0..count {
                t.iter_mut()
                    .for_each(|x| *x = sampling::uniform_f64_in_region(&mut rng, &parts, mu));
                u.iter_mut()
                    .for_each(|x| *x = sampling::uniform_f64_in_region(&mut rng, &parts, mu));
                hits += z_member(a, &t, &u, q.alpha, q.beta) as u64;
            }
            hits
        })
        .sum();
    let threshold = mu.powi((q.m + q.n) as i32);
    let n = samples as f64;
    let p = hits as f64 / n;
    let half_width = (1.96 * (p * (1.0 - p) / n).sqrt() + 0.5 / n) * threshold;
    let estimate = p * threshold;
    let comparison = if estimate + half_width < threshold {
        Comparison::Below
    } else {
        Comparison::Inconclusive
    };
    Ok(ZEstimate {
        hits,
        samples,
        estimate,
        half_width,
        threshold,
        comparison,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanCell {
    pub m: usize,
    pub n: usize,
    #[serde(flatten)]
    pub z: ZEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub region: String,
    pub alpha: f64,
    pub beta: f64,
    pub witness: Option<(usize, usize)>,
    pub cells: Vec<ScanCell>,
}

#[derive(Clone, Debug)]
pub struct ScanParams {
    pub regions: Vec<Region>,
    pub alpha_beta: Vec<(f64, f64)>,
    pub mn_max: usize,
    pub samples: u64,
    pub seed: u64,
    /// Required gap below the threshold, relative to `(μE)^{m+n}`.
    pub margin: f64,
}

/// `(m, n)` pairs with `1 ≤ m, n ≤ mn_max`, by `m + n` then `m`.
fn mn_order(mn_max: usize) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = (1..=mn_max)
        .flat_map(|m| (1..=mn_max).map(move |n| (m, n)))
        .collect();
    v.sort_by_key(|&(m, n)| (m + n, m));
    v
}

/// For every `(E, α, β)`, the first `(m, n)` with
/// `estimate + half_width < (1 − margin)·(μE)^{m+n}`.
pub fn stability_scan(a: &FunctionFamily, params: &ScanParams) -> Result<Vec<ScanRow>> {
    if params.margin <= 0.0 {
        return Err(Error::InvalidParameter("margin must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut query_index = 0u64;
    for e in &params.regions {
        for &(alpha, beta) in &params.alpha_beta {
            let mut cells = Vec::new();
            let mut witness = None;
            for (m, n) in mn_order(params.mn_max) {
                query_index += 1;
                let q = ZQuery {
                    e: e.clone(),
                    m,
                    n,
                    alpha,
                    beta,
                };
                let seed = params.seed ^ query_index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
                let z = z_measure_mc(a, &q, params.samples, seed)?;
                let found = z.estimate + z.half_width < (1.0 - params.margin) * z.threshold;
                cells.push(ScanCell { m, n, z });
                if found {
                    witness = Some((m, n));
                    break;
                }
            }
            rows.push(ScanRow {
                region: region_label(e),
                alpha,
                beta,
                witness,
                cells,
            });
        }
    }
    Ok(rows)
}

/// `(m, n)` grid of estimates as CSV.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out =
        String::from("region,alpha,beta,m,n,estimate,half_width,threshold,comparison,witness\n");
    for r in rows {
        for c in &r.cells {
            let is_witness = r.witness == Some((c.m, c.n));
            let _ = writeln!(
                out,
                "\"{}\",{},{},{},{},{},{},{},{:?},{}",
                r.region,
                r.alpha,
                r.beta,
                c.m,
                c.n,
                c.z.estimate,
                c.z.half_width,
                c.z.threshold,
                c.z.comparison,
                is_witness
            );
        }
    }
    out
}

/// `F(x) = max(x,0)²/2`.
fn ramp_sq(x: Dyadic) -> Dyadic {
    if x.is_positive() {
        (&x * &x).half()
    } else {
        Dyadic::zero()
    }
}

/// Area of `{(x,y) ∈ [a1,b1]×[a2,b2] : x + y ≤ s}`.
fn below_line(a: &Interval, b: &Interval, s: &Dyadic) -> Dyadic {
    let f = |x: &Dyadic, y: &Dyadic| ramp_sq(s - &(x + y));
    f(a.lo(), b.lo()) - f(a.hi(), b.lo()) - f(a.lo(), b.hi()) + f(a.hi(), b.hi())
}

/// Exact `μ₂{(u₀,u₁) ∈ E² : u₀ + u₁ ∈ H}`.
pub fn pairsum_z_bound(h: &Region, e: &Region) -> Dyadic {
    let mut total = Dyadic::zero();
    for a in e.parts() {
        for b in e.parts() {
            for hp in h.parts() {
                total = total + below_line(a, b, hp.hi()) - below_line(a, b, hp.lo());
            }
        }
    }
    total
}

/// `μE((μE)² − γ)`: the bound on `μ₃ Z(B,E,1,2,α,β)` for families whose
/// members vanish on one of any two points with sum in `H`.
pub fn pairsum_stability_bound(h: &Region, e: &Region) -> Dyadic {
    let mu = e.measure();
    let gamma = pairsum_z_bound(h, e);
    &mu * &(&(&mu * &mu) - &gamma)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub kind: &'static str,
    pub integrand: String,
    pub functionals: Vec<String>,
    pub rows: Vec<ScanRow>,
    pub all_witnessed: bool,
}

/// The scalar family `{f∘φ : f ∈ F}` as step functions when φ is a step
/// function, else through point evaluation.
pub fn scalar_trace<S: Scalar>(
    phi: &IntegrandFn<S>,
    functionals: &[DualFunctional<S>],
) -> Result<FunctionFamily> {
    let mut fam = FunctionFamily::new();
    let breaks = phi.breakpoints();
    for f in functionals {
        if !f.is_compatible(phi.space()) {
            return Err(Error::IncompatibleFunctional(f.describe()));
        }
        let member = if phi.class() == IntegrandClass::PiecewiseStep && breaks.len() >= 2 {
            let values = breaks
                .windows(2)
                .map(|w| {
                    f.apply(&phi.eval(&(&w[0] + &w[1]).half()))
                        .map(|x| x.to_f64())
                })
                .collect::<Result<Vec<f64>>>()?;
            Member::Step {
                breaks: breaks.iter().map(Dyadic::to_f64).collect(),
                values,
            }
        } else {
            let (phi, f) = (phi.clone(), f.clone());
            Member::Evaluator(Arc::new(move |t: f64| {
                let t = Dyadic::from_f64(t.clamp(0.0, 1.0)).unwrap_or_else(Dyadic::zero);
                f.apply(&phi.eval(&t))
                    .map(|x| x.to_f64())
                    .unwrap_or(f64::NAN)
            }))
        };
        fam.push(f.describe(), member);
    }
    Ok(fam)
}

/// Stability scan of `{f∘φ : f ∈ F}`. A finite-sample probe, not a proof.
pub fn properly_measurable_probe<S: Scalar>(
    phi: &IntegrandFn<S>,
    functionals: &[DualFunctional<S>],
    params: &ScanParams,
) -> Result<ProbeReport> {
    let fam = scalar_trace(phi, functionals)?;
    let rows = stability_scan(&fam, params)?;
    let all_witnessed = rows.iter().all(|r| r.witness.is_some());
    Ok(ProbeReport {
        kind: "finite-sample probe (not a proof)",
        integrand: phi.label(),
        functionals: functionals.iter().map(|f| f.describe()).collect(),
        rows,
        all_witnessed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn identity() -> FunctionFamily {
        FunctionFamily::new().with("id", Member::Evaluator(Arc::new(|t| t)))
    }

    #[test]
    fn membership_examples() {
        let a = identity();
        assert!(z_member(&a, &[0.2], &[0.8], 0.3, 0.7));
        assert!(!z_member(&a, &[0.5], &[0.8], 0.3, 0.7));
        let steps = FunctionFamily::new()
            .with("left", Member::Indicator(vec![(0.0, 0.5)]))
            .with("right", Member::Indicator(vec![(0.5, 1.0)]));
        // Brute force: t must avoid a member's support, u must lie in it.
        assert!(z_member(&steps, &[0.75], &[0.25, 0.1], 0.0, 1.0));
        assert!(!z_member(&steps, &[0.75, 0.1], &[0.25], 0.0, 1.0));
    }

    #[test]
    fn identity_z_measure_is_009() {
        let q = ZQuery {
            e: Region::unit(),
            m: 1,
            n: 1,
            alpha: 0.3,
            beta: 0.7,
        };
        let z = z_measure_mc(&identity(), &q, 100_000, 5).unwrap();
        assert!((z.estimate - 0.09).abs() < 0.01, "{z:?}");
        assert!((z.estimate - 0.09).abs() <= 2.0 * z.half_width);
        let empty = z_measure_mc(&FunctionFamily::new(), &q, 1000, 5).unwrap();
        assert_eq!(empty.estimate, 0.0);
    }

    #[test]
    fn pairsum_examples() {
        assert_eq!(
            pairsum_z_bound(&Region::empty(), &Region::unit()),
            Dyadic::zero()
        );
        assert_eq!(
            pairsum_z_bound(&Region::span(d("0"), d("2")), &Region::unit()),
            Dyadic::one()
        );
        assert_eq!(
            pairsum_z_bound(&Region::span(d("1/2"), d("3/4")), &Region::unit()),
            d("5/32")
        );
    }

    #[test]
    fn scan_finds_trivial_witness() {
        let a = FunctionFamily::new().with("half", Member::Evaluator(Arc::new(|_| 0.5)));
        let params = ScanParams {
            regions: vec![Region::unit()],
            alpha_beta: vec![(0.6, 0.8)],
            mn_max: 2,
            samples: 1000,
            seed: 1,
            margin: 0.01,
        };
        let rows = stability_scan(&a, &params).unwrap();
        assert_eq!(rows[0].witness, Some((1, 1)));
        assert!(scan_csv(&rows).lines().count() >= 2);
    }
}
