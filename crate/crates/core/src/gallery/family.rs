//! {0,1}-valued jump functions with the pair constraint
//! `min(f(s), f(t)) = 0` whenever `s < t` and `s + t ∈ H`, the sequence
//! integrand `t ↦ (f_0(t), …, f_{R−1}(t))` built from them, and the
//! two-partition oscillation witness against a given gauge.

use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::gallery::fat::{pair_sum_tags, FatSet, SumMode};
use crate::gauge::Gauge;
use crate::integrand::PiecewisePoly;
use crate::integrators::checks::region_label;
use crate::integrators::mcshane::riemann_sum;
use crate::partition::{
    extend_to_partition, is_partition, is_subordinate, Flavor, TaggedInterval, TaggedPartition,
};
use crate::region::{Interval, Region};
use crate::report::ser_num;
use crate::sampling;
use crate::scalar::Scalar;
use crate::stability::{FunctionFamily, Member};
use crate::values::{ValueSpace, VectorValue};

/// Indicator of a closed region inside `[0,1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpFunction {
    pub label: String,
    pub support: Region,
    pub variation: usize,
}

impl JumpFunction {
    pub fn new(support: Region, label: impl Into<String>) -> Result<Self> {
        if !support.is_empty()
            && !Interval::unit().contains_interval(&support.hull().expect("non-empty"))
        {
            return Err(Error::InvalidParameter(
                "jump-function support must lie in [0,1]".into(),
            ));
        }
        let variation = support
            .parts()
            .iter()
            .map(|p| usize::from(p.lo().is_positive()) + usize::from(*p.hi() < Dyadic::one()))
            .sum();
        Ok(JumpFunction {
            label: label.into(),
            support,
            variation,
        })
    }

    pub fn zero() -> Self {
        JumpFunction::new(Region::empty(), "0").expect("empty support")
    }

    pub fn eval(&self, t: &Dyadic) -> bool {
        self.support.contains(t)
    }

    /// Jump points inside `(0,1)` (a point support jumps twice at one place).
    pub fn jumps(&self) -> Vec<Dyadic> {
        let mut v: Vec<Dyadic> = self
            .support
            .boundary()
            .into_iter()
            .filter(|b| b.is_positive() && *b < Dyadic::one())
            .collect();
        v.dedup();
        v
    }

    /// Exact check: no `s < t` in the support with `s + t ∈ h`.
    pub fn satisfies_pair_constraint(&self, h: &Region) -> bool {
        let parts = self.support.parts();
        parts.iter().enumerate().all(|(i, a)| {
            !h.meets_open(&a.lo().shl(1), &a.hi().shl(1))
                && parts[i + 1..]
                    .iter()
                    .all(|b| !h.meets_closed(&(a.lo() + b.lo()), &(a.hi() + b.hi())))
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AFamily {
    pub level: u32,
    pub jump_grid_depth: u32,
    /// Targeted members first, then canonical ones.
    pub members: Vec<JumpFunction>,
    pub targeted: usize,
    pub diagnostics: Vec<String>,
}

impl AFamily {
    pub fn to_function_family(&self) -> FunctionFamily {
        let mut fam = FunctionFamily::new();
        for m in &self.members {
            fam.push(m.label.clone(), Member::indicator_of(&m.support));
        }
        fam
    }
}

/// Run of grid cells `start..=end` as a closed interval.
fn run_interval(start: i64, end: i64, depth: u32) -> Interval {
    Interval::new(Dyadic::ratio(start, depth), Dyadic::ratio(end + 1, depth)).expect("ordered")
}

struct Enumerator<'a> {
    h: &'a Region,
    depth: u32,
    cells: i64,
    max_variation: usize,
    cap: usize,
    out: Vec<JumpFunction>,
}

impl Enumerator<'_> {
    fn run_ok(&self, runs: &[Interval], next: &Interval) -> bool {
        !self.h.meets_open(&next.lo().shl(1), &next.hi().shl(1))
            && runs.iter().all(|a| {
                !self
                    .h
                    .meets_closed(&(a.lo() + next.lo()), &(a.hi() + next.hi()))
            })
    }

    fn run_variation(&self, start: i64, end: i64) -> usize {
        usize::from(start > 0) + usize::from(end + 1 < self.cells)
    }

    /// Supports with exactly `left` more runs, lexicographic in `(start, end)`.
    fn dfs(&mut self, runs: &mut Vec<Interval>, from: i64, left: usize, variation: usize) {
        if self.out.len() >= self.cap {
            return;
        }
        if left == 0 {
            let support = Region::normalize(runs.clone());
            let label = if runs.is_empty() {
                "0".into()
            } else {
                format!("χ{}", region_label(&support))
            };
            self.out
                .push(JumpFunction::new(support, label).expect("runs lie in [0,1]"));
            return;
        }
        for start in from..self.cells {
            for end in start..self.cells {
                let iv = run_interval(start, end, self.depth);
                // Longer runs contain the self-sums of shorter ones.
                if !self.run_ok(runs, &iv) {
                    break;
                }
                let v = variation + self.run_variation(start, end);
                if v > self.max_variation {
                    continue;
                }
                runs.push(iv);
                self.dfs(runs, end + 2, left - 1, v);
                runs.pop();
                if self.out.len() >= self.cap {
                    return;
                }
            }
        }
    }
}

/// Canonical members: supports made of runs of depth-`jump_grid_depth`
/// grid cells, ordered by number of runs then lexicographically, with
/// variation at most `l` and the pair constraint against `H_l`. Targeted
/// members for the given tag sets are prepended; infeasible ones are
/// reported in `diagnostics`.
pub fn build_a_family(
    fat: &FatSet,
    l: u32,
    jump_grid_depth: u32,
    cap: usize,
    targets: &[Vec<Dyadic>],
) -> Result<AFamily> {
    if l < 2 || cap < 1 {
        return Err(Error::InvalidParameter("need l ≥ 2 and cap ≥ 1".into()));
    }
    if jump_grid_depth > 20 {
        return Err(Error::InvalidParameter(
            "jump grid depth is limited to 20".into(),
        ));
    }
    let h = fat.stage(l);
    let mut members = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        match targeted_member(h, t, format!("f_T{i}")) {
            Ok(f) => members.push(f),
            Err(e) => diagnostics.push(format!("targeted member {i}: {e}")),
        }
    }
    let targeted = members.len();
    let mut en = Enumerator {
        h,
        depth: jump_grid_depth,
        cells: 1i64 << jump_grid_depth,
        max_variation: l as usize,
        cap,
        out: Vec::new(),
    };
    for runs in 0..=(l as usize / 2 + 1) {
        en.dfs(&mut Vec::new(), 0, runs, 0);
    }
    if en.out.len() < cap {
        diagnostics.push(format!(
            "canonical enumeration ended with {} members (cap {cap})",
            en.out.len()
        ));
    }
    members.extend(en.out);
    Ok(AFamily {
        level: l,
        jump_grid_depth,
        members,
        targeted,
        diagnostics,
    })
}

/// Seeded indicators of up to `runs` single grid cells each, grown greedily
/// so that every member keeps the pair constraint against `h`.
pub fn random_b_sample(
    h: &Region,
    depth: u32,
    members: usize,
    runs: usize,
    seed: u64,
) -> Vec<JumpFunction> {
    let cells = 1i64 << depth.min(20);
    (0..members)
        .map(|i| {
            let mut rng = sampling::stream(seed, i as u64);
            let mut parts: Vec<Interval> = Vec::new();
            for _ in 0..4 * runs {
                if parts.len() >= runs {
                    break;
                }
                let j = rng.random_range(0..cells);
                let iv = run_interval(j, j, depth);
                let mut trial = parts.clone();
                trial.push(iv);
                let cand = JumpFunction::new(Region::normalize(trial.clone()), "")
                    .expect("cells lie in [0,1]");
                if cand.support.parts().len() == trial.len() && cand.satisfies_pair_constraint(h) {
                    parts = trial;
                }
            }
            let support = Region::normalize(parts);
            let label = format!("b{i}:{}", region_label(&support));
            JumpFunction::new(support, label).expect("cells lie in [0,1]")
        })
        .collect()
}

/// Largest `2^-k` strictly below `bound`.
fn pow2_below(bound: &Dyadic) -> Dyadic {
    let mut eps = Dyadic::one();
    while eps >= *bound {
        eps = eps.half();
    }
    eps
}

/// `χ` of `ε`-neighborhoods of the tags (single points where a tag's
/// double is too close to `h`), with `ε` a power of two below half the
/// distance from the cross sums to `h` and below half the tag gaps.
pub fn targeted_member(
    h: &Region,
    tags: &[Dyadic],
    label: impl Into<String>,
) -> Result<JumpFunction> {
    let mut sorted = tags.to_vec();
    sorted.sort();
    sorted.dedup();
    if let Some(t) = sorted
        .iter()
        .find(|t| t.is_negative() || **t > Dyadic::one())
    {
        return Err(Error::InvalidParameter(format!("tag {t} outside [0,1]")));
    }
    let mut bound = Dyadic::one();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            let s = a + b;
            let d = h.distance_to(&s).unwrap_or_else(Dyadic::one);
            if d.is_zero() {
                return Err(Error::InvalidParameter(format!(
                    "tag sum {a} + {b} lies in H"
                )));
            }
            bound = bound.min(d.half()).min((b - a).half());
        }
    }
    let eps = pow2_below(&bound);
    let parts = sorted
        .iter()
        .map(|t| {
            let self_gap = h.distance_to(&t.shl(1)).unwrap_or_else(Dyadic::one);
            let r = if self_gap > eps.shl(1) {
                eps.clone()
            } else {
                Dyadic::zero()
            };
            let lo = (t - &r).max(Dyadic::zero());
            let hi = (t + &r).min(Dyadic::one());
            Interval::new(lo, hi).expect("ordered")
        })
        .collect();
    let f = JumpFunction::new(Region::normalize(parts), label)?;
    if !f.satisfies_pair_constraint(h) {
        return Err(Error::InvalidParameter(
            "targeted member violates the pair constraint".into(),
        ));
    }
    Ok(f)
}

/// `φ(t) = (f_0(t), …, f_{R−1}(t))` in the sup-normed sequence space.
pub fn jump_sequence_integrand<S: Scalar>(
    family: &[JumpFunction],
    r_len: usize,
) -> Result<PiecewisePoly<S>> {
    if r_len == 0 || r_len > family.len() {
        return Err(Error::InvalidParameter(format!(
            "need 1 ≤ R ≤ {} (family size), got {r_len}",
            family.len()
        )));
    }
    let members = &family[..r_len];
    let space = ValueSpace::seq_sup(r_len);
    let breaks: Vec<Dyadic> = members.iter().flat_map(|f| f.support.boundary()).collect();
    let eval = |t: &Dyadic| {
        let data = members
            .iter()
            .map(|f| if f.eval(t) { S::one() } else { S::zero() })
            .collect();
        VectorValue::from_data(&space, data).expect("R coordinates")
    };
    PiecewisePoly::from_step_evaluator(&space, breaks, eval, format!("jumps(R={r_len})"))
}

#[derive(Clone, Debug)]
pub struct WitnessOptions {
    /// Stage `l` of the fat set used for both the family and the tag search.
    pub level: u32,
    pub r_len: usize,
    pub jump_grid_depth: u32,
    pub seed: u64,
    pub max_attempts: usize,
    pub max_depth: u32,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            level: 4,
            r_len: 64,
            jump_grid_depth: 10,
            seed: 0,
            max_attempts: 64,
            max_depth: 40,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationWitness {
    pub k: u64,
    pub m: usize,
    pub level: u32,
    /// `μ{t : δ(t) ≥ 1/k}` (a grid proxy for evaluator gauges).
    pub d_measure: Dyadic,
    pub d_exact: bool,
    pub tags_t: Vec<Dyadic>,
    pub tags_u: Vec<Dyadic>,
    pub p1: Vec<TaggedInterval>,
    pub p2: Vec<TaggedInterval>,
    pub p1_partition: bool,
    pub p2_partition: bool,
    pub p1_subordinate: bool,
    pub p2_subordinate: bool,
    #[serde(serialize_with = "ser_num")]
    pub gap: BigRational,
    /// `(m − 1)/k`.
    #[serde(serialize_with = "ser_num")]
    pub bound: BigRational,
    pub targeted: JumpFunction,
    pub family_size: usize,
    pub diagnostics: Vec<String>,
}

impl OscillationWitness {
    pub fn certified(&self) -> bool {
        self.p1_partition
            && self.p2_partition
            && self.p1_subordinate
            && self.p2_subordinate
            && self.gap >= self.bound
    }
}

pub const PROXY_DEPTH: u32 = 12;

/// `{t : δ(t) ≥ 1/k}`: exact for constant and piecewise gauges, otherwise
/// the union of depth-12 cells whose midpoint and endpoints all qualify.
fn superlevel(g: &Gauge, k: u64) -> Result<(Region, bool)> {
    let thr = BigRational::new(1.into(), (k as i64).into());
    if let Some(r) = g.superlevel(&thr) {
        return Ok((r, true));
    }
    let mut cells = Vec::new();
    for j in 0..(1i64 << PROXY_DEPTH) {
        let iv = run_interval(j, j, PROXY_DEPTH);
        let probes = [iv.lo().clone(), iv.midpoint(), iv.hi().clone()];
        let mut ok = true;
        for p in &probes {
            ok &= g.eval(p)? >= thr;
        }
        if ok {
            cells.push(iv);
        }
    }
    Ok((Region::normalize(cells), false))
}

/// Two McShane partitions subordinate to `gauge` whose Riemann sums for
/// `φ` differ by at least `(m − 1)/k` in the first coordinate:
///
/// 1. `k` is the least power of two `≥ 8` with `μ{δ ≥ 1/k} ≥ 4/5`;
/// 2. the `m` cells of width `1/k` meeting that set become windows;
/// 3. tags `T` have pairwise sums outside `H_l`, tags `U` inside it;
/// 4. the family's first member is `1` on all of `T`, while every member
///    vanishes on all but one point of `U`;
/// 5. both tag sets sit on the same cells and share the remaining items.
pub fn oscillation_witness(
    fat: &FatSet,
    gauge: &Gauge,
    opts: &WitnessOptions,
) -> Result<OscillationWitness> {
    let mut chosen = None;
    let mut k = 8u64;
    while k <= 1 << PROXY_DEPTH {
        let (d, exact) = superlevel(gauge, k)?;
        // μ(D) ≥ 4/5, compared exactly.
        if d.measure().to_rational() * BigRational::from_integer(5.into())
            >= BigRational::from_integer(4.into())
        {
            chosen = Some((k, d, exact));
            break;
        }
        k *= 2;
    }
    let Some((k, d, d_exact)) = chosen else {
        return Err(Error::ResolutionExceeded { k });
    };
    let kexp = k.trailing_zeros();
    let mut cells = Vec::new();
    let mut windows = Vec::new();
    for j in 0..k as i64 {
        let cell = run_interval(j, j, kexp);
        let w = d.intersect_interval(&cell);
        if w.measure().is_positive() {
            cells.push(cell);
            windows.push(w);
        }
    }
    let m = cells.len();
    let h = fat.stage(opts.level);
    let tags_t = pair_sum_tags(h, &windows, SumMode::SumsOut, opts.seed, opts.max_attempts)?;
    let tags_u = pair_sum_tags(
        h,
        &windows,
        SumMode::SumsIn,
        opts.seed ^ 0x5eed0u64,
        opts.max_attempts,
    )?;

    let family = build_a_family(
        fat,
        opts.level.max(2),
        opts.jump_grid_depth,
        opts.r_len.saturating_sub(1).max(1),
        std::slice::from_ref(&tags_t),
    )?;
    if family.targeted != 1 {
        return Err(Error::InvalidParameter(format!(
            "no targeted member: {}",
            family.diagnostics.join("; ")
        )));
    }
    let r_len = opts.r_len.min(family.members.len());
    let phi = jump_sequence_integrand::<BigRational>(&family.members, r_len)?;

    let partial1: Vec<TaggedInterval> = cells
        .iter()
        .zip(&tags_t)
        .map(|(c, t)| TaggedInterval::new(c.clone(), t.clone()))
        .collect();
    let partial2: Vec<TaggedInterval> = cells
        .iter()
        .zip(&tags_u)
        .map(|(c, t)| TaggedInterval::new(c.clone(), t.clone()))
        .collect();
    let full1 = extend_to_partition(&partial1, gauge, opts.max_depth)?;
    let shared: Vec<TaggedInterval> = full1
        .items()
        .iter()
        .filter(|it| !partial1.contains(it))
        .cloned()
        .collect();
    let mut items2 = partial2;
    items2.extend(shared);
    items2.sort_by(|a, b| a.interval.lo().cmp(b.interval.lo()));
    let full2 = TaggedPartition::new(items2, Flavor::McShane);

    let s1 = riemann_sum(&phi, &full1);
    let s2 = riemann_sum(&phi, &full2);
    let gap = s1.distance(&s2)?.hi;
    let bound = BigRational::new(((m as i64) - 1).into(), (k as i64).into());
    Ok(OscillationWitness {
        k,
        m,
        level: opts.level,
        d_measure: d.measure(),
        d_exact,
        p1_partition: is_partition(&full1),
        p2_partition: is_partition(&full2),
        p1_subordinate: is_subordinate(&full1, gauge)?,
        p2_subordinate: is_subordinate(&full2, gauge)?,
        p1: full1.into_items(),
        p2: full2.into_items(),
        tags_t,
        tags_u,
        gap,
        bound,
        targeted: family.members[0].clone(),
        family_size: r_len,
        diagnostics: family.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::fat::build_fat_h;

    #[test]
    fn constants_and_constraint() {
        let fat = build_fat_h(2, 3, 0).unwrap();
        let h = fat.top();
        assert!(JumpFunction::zero().satisfies_pair_constraint(h));
        let one = JumpFunction::new(Region::unit(), "1").unwrap();
        assert_eq!(one.variation, 0);
        assert!(!one.satisfies_pair_constraint(h));
    }

    #[test]
    fn canonical_members_pass_exact_check() {
        let fat = build_fat_h(3, 3, 0).unwrap();
        let fam = build_a_family(&fat, 3, 9, 40, &[]).unwrap();
        assert_eq!(fam.members[0], JumpFunction::zero());
        assert_eq!(fam.members.len(), 40, "{:?}", fam.diagnostics);
        for f in &fam.members {
            assert!(f.variation <= 3);
            assert!(f.satisfies_pair_constraint(fat.stage(3)), "{}", f.label);
        }
    }

    #[test]
    fn targeted_member_covers_tags() {
        let fat = build_fat_h(3, 3, 0).unwrap();
        let windows: Vec<Region> = (0..4)
            .map(|j| Region::span(Dyadic::ratio(j, 2), Dyadic::ratio(j + 1, 2)))
            .collect();
        let t = pair_sum_tags(fat.top(), &windows, SumMode::SumsOut, 2, 20).unwrap();
        let f = targeted_member(fat.top(), &t, "f").unwrap();
        assert!(t.iter().all(|x| f.eval(x)));
        assert!(f.satisfies_pair_constraint(fat.top()));
    }

    #[test]
    fn sequence_integrand_breaks() {
        let a =
            JumpFunction::new(Region::span(Dyadic::ratio(1, 3), Dyadic::ratio(1, 2)), "a").unwrap();
        let phi = jump_sequence_integrand::<BigRational>(&[JumpFunction::zero(), a], 2).unwrap();
        let b = [
            Dyadic::zero(),
            Dyadic::ratio(1, 3),
            Dyadic::ratio(1, 2),
            Dyadic::one(),
        ];
        assert_eq!(phi.breaks(), b);
        assert!(jump_sequence_integrand::<BigRational>(&[JumpFunction::zero()], 2).is_err());
    }

    #[test]
    fn b_samples_respect_constraint() {
        let fat = build_fat_h(4, 4, 0).unwrap();
        let b = random_b_sample(fat.top(), 10, 8, 3, 5);
        assert_eq!(b.len(), 8);
        assert!(b.iter().all(|f| f.satisfies_pair_constraint(fat.top())));
        assert!(b.iter().any(|f| !f.support.is_empty()));
    }
}
