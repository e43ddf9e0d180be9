//! Fat closed sets `H_0 ⊆ … ⊆ H_L ⊆ [0,2]` that meet every dyadic cell and
//! its complement in positive measure, and the randomized tag search that
//! picks points whose pairwise sums all land in (or all avoid) such a set.

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::region::{Interval, Region};
use crate::sampling;

#[derive(Clone, Debug, Serialize)]
pub struct FatSet {
    /// `stages[s] = H_s`, with `H_0 = ∅`.
    stages: Vec<Region>,
    resolution: u32,
    seed: u64,
}

const MAX_FINEST_SCALE: u32 = 16;

/// `[0,2]`.
pub fn doubled_unit() -> Interval {
    Interval::new(Dyadic::zero(), Dyadic::from_int(2)).expect("ordered")
}

/// Stage `s` adds, in every cell of `[0,2]` at scale `2^-(r+s-1)`, the
/// centered closed interval of length `2^-(r+2s+1)`.
///
/// The construction is deterministic; `seed` is only recorded.
pub fn build_fat_h(levels: u32, r: u32, seed: u64) -> Result<FatSet> {
    if levels < 1 || r < 2 {
        return Err(Error::InvalidParameter(format!(
            "need L ≥ 1 and r ≥ 2, got L = {levels}, r = {r}"
        )));
    }
    if r + levels > MAX_FINEST_SCALE {
        return Err(Error::InvalidParameter(format!(
            "r + L = {} exceeds the supported finest scale {MAX_FINEST_SCALE}",
            r + levels
        )));
    }
    let mut stages = vec![Region::empty()];
    for s in 1..=levels {
        let e = r + s - 1;
        let half = Dyadic::pow2_neg(r + 2 * s + 2);
        let cells = 1i64 << (e + 1);
        let placed = (0..cells)
            .map(|i| {
                let c = Dyadic::ratio(2 * i + 1, e + 1);
                Interval::new(&c - &half, &c + &half).expect("ordered")
            })
            .collect();
        let next = stages
            .last()
            .expect("seeded")
            .union(&Region::normalize(placed));
        stages.push(next);
    }
    let fat = FatSet {
        stages,
        resolution: r,
        seed,
    };
    if let Some(bad) = fat.invariant_violation() {
        return Err(Error::InvalidParameter(format!(
            "fat-set invariant fails on {bad:?}"
        )));
    }
    Ok(fat)
}

impl FatSet {
    pub fn levels(&self) -> u32 {
        (self.stages.len() - 1) as u32
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stages(&self) -> &[Region] {
        &self.stages
    }

    /// `H_l`, saturating at `H_L`.
    pub fn stage(&self, l: u32) -> &Region {
        &self.stages[(l as usize).min(self.stages.len() - 1)]
    }

    pub fn top(&self) -> &Region {
        self.stages.last().expect("non-empty")
    }

    /// First dyadic cell `I ⊆ [0,2]` with `|I| ≥ 2^-r` on which
    /// `0 < μ(H_L ∩ I) < |I|` fails; checks all of them.
    pub fn invariant_violation(&self) -> Option<Interval> {
        if !self
            .stages
            .windows(2)
            .all(|w| w[1].intersect(&w[0]) == w[0])
        {
            return Some(doubled_unit());
        }
        let h = self.top();
        // Scale 2^-j for j = -1 (the whole of [0,2]) up to r.
        for j in -1..=self.resolution as i64 {
            let width = Dyadic::one().shl(-j);
            let count = 1i64 << (j + 1);
            for i in 0..count {
                let lo = &width * &Dyadic::from_int(i);
                let cell = Interval::new(lo.clone(), &lo + &width).expect("ordered");
                let mu = h.intersect_interval(&cell).measure();
                if !mu.is_positive() || mu >= width {
                    return Some(cell);
                }
            }
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumMode {
    /// Every pairwise sum lies in `H`.
    SumsIn,
    /// No pairwise sum lies in `H`.
    SumsOut,
}

impl std::str::FromStr for SumMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sums-in" => Ok(SumMode::SumsIn),
            "sums-out" => Ok(SumMode::SumsOut),
            _ => Err(Error::Parse(format!(
                "unknown mode {s:?} (sums-in | sums-out)"
            ))),
        }
    }
}

/// `target − d`: the points `a` with `a + b ∈ target` for some `b ∈ d`.
fn reach(target: &Region, d: &Region) -> Region {
    let mut parts = Vec::new();
    for h in target.parts().iter().filter(|p| !p.is_degenerate()) {
        for w in d.parts().iter().filter(|p| !p.is_degenerate()) {
            parts.push(Interval::new(h.lo() - w.hi(), h.hi() - w.lo()).expect("ordered"));
        }
    }
    Region::normalize(parts)
}

const TAG_BITS: u32 = 40;

/// One tag per window with every pairwise sum in (or outside) `h`, by the
/// inductive shrink-and-choose procedure: `t_m` is drawn from the part of
/// window `m` that still reaches every later window, and each later window
/// is then cut down to the points compatible with `t_m`.
pub fn pair_sum_tags(
    h: &Region,
    windows: &[Region],
    mode: SumMode,
    seed: u64,
    max_attempts: usize,
) -> Result<Vec<Dyadic>> {
    if windows.is_empty() {
        return Err(Error::InvalidParameter("no windows".into()));
    }
    if let Some(i) = windows.iter().position(|w| !w.measure().is_positive()) {
        return Err(Error::InvalidParameter(format!(
            "window {i} has measure zero"
        )));
    }
    let target = match mode {
        SumMode::SumsIn => h.clone(),
        SumMode::SumsOut => h.complement_within(&doubled_unit()),
    };
    let ok = |s: &Dyadic| h.contains(s) == (mode == SumMode::SumsIn);
    let mut trace = Vec::new();
    let mut furthest = 0;
    for attempt in 0..max_attempts.max(1) {
        let mut rng = sampling::stream(seed, attempt as u64);
        let mut d: Vec<Region> = windows.iter().map(Region::without_points).collect();
        let mut tags: Vec<Dyadic> = Vec::with_capacity(windows.len());
        let mut failed = None;
        for m in 0..windows.len() {
            let mut good = d[m].clone();
            for later in &d[m + 1..] {
                good = good.intersect(&reach(&target, later)).without_points();
            }
            let Some(t) = sampling::uniform_in_region(&mut rng, &good, TAG_BITS)
                .filter(|_| good.measure().is_positive())
            else {
                failed = Some((
                    m,
                    format!(
                        "attempt {attempt}: window {m} collapsed (μD = {})",
                        d[m].measure()
                    ),
                ));
                break;
            };
            if let Some(p) = tags.iter().find(|p| !ok(&(*p + &t))) {
                failed = Some((
                    m,
                    format!("attempt {attempt}: tag {m} = {t} violates the mode with {p}"),
                ));
                break;
            }
            let shifted = target.translate(&-&t);
            for later in &mut d[m + 1..] {
                *later = later.intersect(&shifted).without_points();
            }
            tags.push(t);
        }
        match failed {
            None => return Ok(tags),
            Some((m, line)) => {
                furthest = furthest.max(m);
                trace.push(line);
            }
        }
    }
    Err(Error::SearchExhausted {
        index: furthest,
        attempts: max_attempts.max(1),
        trace,
    })
}

/// Exact check of a tag list against its mode.
pub fn verify_tags(h: &Region, tags: &[Dyadic], mode: SumMode) -> bool {
    tags.iter().enumerate().all(|(i, a)| {
        tags[i + 1..]
            .iter()
            .all(|b| h.contains(&(a + b)) == (mode == SumMode::SumsIn))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_stage_measure() {
        let fat = build_fat_h(1, 2, 0).unwrap();
        assert_eq!(fat.top().measure(), Dyadic::pow2_neg(2));
        assert_eq!(fat.top().parts().len(), 8);
        assert!(fat.invariant_violation().is_none());
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(build_fat_h(0, 2, 0).is_err());
        assert!(build_fat_h(1, 1, 0).is_err());
    }

    #[test]
    fn single_window_and_forced_failure() {
        let w = vec![Region::span(Dyadic::zero(), Dyadic::ratio(1, 3))];
        let t = pair_sum_tags(&Region::empty(), &w, SumMode::SumsIn, 1, 1).unwrap();
        assert!(w[0].contains(&t[0]));

        let whole = Region::interval(doubled_unit());
        let two = vec![
            w[0].clone(),
            Region::span(Dyadic::ratio(1, 1), Dyadic::one()),
        ];
        match pair_sum_tags(&whole, &two, SumMode::SumsOut, 1, 3) {
            Err(Error::SearchExhausted { trace, .. }) => assert_eq!(trace.len(), 3),
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn five_cells_sums_in() {
        let fat = build_fat_h(3, 3, 0).unwrap();
        let windows: Vec<Region> = (0..5)
            .map(|j| Region::span(Dyadic::ratio(j, 3), Dyadic::ratio(j + 1, 3)))
            .collect();
        let tags = pair_sum_tags(fat.top(), &windows, SumMode::SumsIn, 4, 20).unwrap();
        assert!(verify_tags(fat.top(), &tags, SumMode::SumsIn));
        assert!(tags.iter().zip(&windows).all(|(t, w)| w.contains(t)));
    }
}
