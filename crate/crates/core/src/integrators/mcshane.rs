//! Riemann sums over tagged partitions and gauge-schedule integration.
//!
//! `mcshane_integrate` never certifies McShane integrability, which
//! quantifies over every gauge. It reports how stable the Riemann sums are
//! over the gauges it actually tried: at each level it draws several
//! subordinate partitions with different tag strategies and measures the
//! largest distance between their sums.

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::integrand::Integrand;
use crate::partition::{cousin_partition, Flavor, TagStrategy, TaggedPartition};
use crate::region::Region;
use crate::report::{render, ser_num};
use crate::scalar::Scalar;
use crate::values::VectorValue;

/// `Σ (b_i − a_i) φ(t_i)`, exact for exact scalars.
pub fn riemann_sum<S: Scalar>(phi: &dyn Integrand<S>, p: &TaggedPartition) -> VectorValue<S> {
    let items: Vec<(Dyadic, Dyadic)> = p
        .items()
        .iter()
        .map(|it| (it.interval.length(), it.tag.clone()))
        .collect();
    phi.tagged_sum(&items)
}

/// `Σ μ(E_i) φ(t_i)` over pairwise disjoint regions.
pub fn generalized_sum<S: Scalar>(
    phi: &dyn Integrand<S>,
    items: &[(Region, Dyadic)],
) -> Result<VectorValue<S>> {
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            if items[i].0.intersect(&items[j].0).measure().is_positive() {
                return Err(Error::Overlap(i, j));
            }
        }
    }
    let weighted: Vec<(Dyadic, Dyadic)> = items
        .iter()
        .map(|(r, t)| (r.measure(), t.clone()))
        .collect();
    Ok(phi.tagged_sum(&weighted))
}

#[derive(Clone, Debug)]
pub enum Schedule {
    /// The integrand's adapted gauges (uniform `2^-k` unless it knows its
    /// jump points).
    Auto,
    /// `δ_k ≡ 2^-k`.
    Uniform,
    /// An explicit list, tried in order.
    Gauges(Vec<Gauge>),
}

#[derive(Clone, Debug)]
pub struct McShaneOptions {
    pub schedule: Schedule,
    pub tol: Dyadic,
    pub trials_per_level: usize,
    pub min_level: u32,
    pub max_level: u32,
    pub max_depth: u32,
    pub flavor: Flavor,
    pub seed: u64,
    /// Levels without any decrease in oscillation before giving up.
    pub floor_window: usize,
}

impl Default for McShaneOptions {
    fn default() -> Self {
        McShaneOptions {
            schedule: Schedule::Auto,
            tol: Dyadic::pow2_neg(10),
            trials_per_level: 3,
            min_level: 0,
            max_level: 18,
            max_depth: 64,
            flavor: Flavor::McShane,
            seed: 0,
            floor_window: 8,
        }
    }
}

impl McShaneOptions {
    pub fn with_tol(mut self, tol: Dyadic) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    OscillationFloor,
    MaxLevel,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelTrace {
    pub level: u32,
    pub gauge: String,
    pub partition_sizes: Vec<usize>,
    pub oscillation: String,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct IntegralEstimate<S: Scalar> {
    pub value: VectorValue<S>,
    #[serde(serialize_with = "ser_num")]
    pub oscillation: S,
    pub status: Status,
    pub gauge_trace: Vec<LevelTrace>,
}

/// Trial 0 uses midpoint tags, trial 1 left endpoints, later trials seeded
/// random candidates.
pub fn trial_strategy(trial: usize, seed: u64) -> TagStrategy {
    match trial {
        0 => TagStrategy::Mid,
        1 => TagStrategy::Left,
        i => TagStrategy::Sampled(seed.wrapping_add(i as u64)),
    }
}

fn max_pairwise<S: Scalar>(sums: &[VectorValue<S>]) -> Result<S> {
    let mut osc = S::zero();
    for i in 0..sums.len() {
        for j in i + 1..sums.len() {
            osc = osc.max_of(sums[i].distance(&sums[j])?.hi);
        }
    }
    Ok(osc)
}

/// Sums of `trials` subordinate partitions for one gauge, in trial order.
pub fn level_sums<S: Scalar>(
    phi: &dyn Integrand<S>,
    gauge: &Gauge,
    opts: &McShaneOptions,
    level: u32,
) -> Result<(Vec<VectorValue<S>>, Vec<usize>)> {
    let seed = opts
        .seed
        .wrapping_mul(0x9e37_79b9)
        .wrapping_add(level as u64);
    let results: Vec<(VectorValue<S>, usize)> = (0..opts.trials_per_level.max(1))
        .into_par_iter()
        .map(|i| {
            let p = cousin_partition(gauge, opts.flavor, trial_strategy(i, seed), opts.max_depth)?;
            Ok((riemann_sum(phi, &p), p.len()))
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().unzip())
}

/// Runs the gauge schedule until the oscillation drops to `tol`.
///
/// For `Auto` and `Uniform` the run stops at the first level at or above
/// `min_level` whose oscillation is within tolerance, or reports
/// `OscillationFloor` once `floor_window` further levels fail to reduce it. An
/// explicit gauge list is always run to its end.
pub fn mcshane_integrate<S: Scalar>(
    phi: &dyn Integrand<S>,
    opts: &McShaneOptions,
) -> Result<IntegralEstimate<S>> {
    if !opts.tol.is_positive() {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let tol = S::from_dyadic(&opts.tol);
    let explicit = match &opts.schedule {
        Schedule::Gauges(list) if list.is_empty() => {
            return Err(Error::InvalidParameter("empty gauge schedule".into()))
        }
        Schedule::Gauges(list) => Some(list.clone()),
        _ => None,
    };
    let levels: Vec<u32> = match &explicit {
        Some(list) => (0..list.len() as u32).collect(),
        None => (opts.min_level..=opts.max_level.max(opts.min_level)).collect(),
    };

    let mut trace = Vec::new();
    let mut history: Vec<S> = Vec::new();
    let mut last: Option<(VectorValue<S>, S)> = None;
    let mut prev: Option<Vec<VectorValue<S>>> = None;
    let mut status = Status::MaxLevel;
    for &level in &levels {
        let gauge = match (&opts.schedule, &explicit) {
            (_, Some(list)) => list[level as usize].clone(),
            (Schedule::Uniform, _) => Gauge::pow2(level),
            _ => phi.adapted_gauge(level),
        };
        let (sums, sizes) = level_sums(phi, &gauge, opts, level)?;
        // Generated gauges shrink with the level, so this level's partitions
        // are also subordinate to the previous gauge and count towards its
        // oscillation; a single level can agree with itself by accident.
        let comparable = explicit.is_some() || prev.is_some();
        let osc = match &prev {
            Some(p) if explicit.is_none() => {
                max_pairwise(&[p.as_slice(), sums.as_slice()].concat())?
            }
            _ => max_pairwise(&sums)?,
        };
        prev = Some(sums.clone());
        trace.push(LevelTrace {
            level,
            gauge: gauge.label(),
            partition_sizes: sizes,
            oscillation: render(&osc),
        });
        if comparable {
            history.push(osc.clone());
        }
        let value = sums.into_iter().next().expect("at least one trial");
        last = Some((value, osc.clone()));
        if explicit.is_some() {
            continue;
        }
        if !comparable {
            continue;
        }
        if osc <= tol && level >= opts.min_level {
            status = Status::Converged;
            break;
        }
        let (n, w) = (history.len(), opts.floor_window.max(1));
        if n > w && history[n - 1] >= history[n - 1 - w] {
            status = Status::OscillationFloor;
            break;
        }
    }
    let (value, oscillation) = last.expect("schedule is non-empty");
    if explicit.is_some() {
        status = if oscillation <= tol {
            Status::Converged
        } else {
            Status::MaxLevel
        };
    }
    Ok(IntegralEstimate {
        value,
        oscillation,
        status,
        gauge_trace: trace,
    })
}
