//! Tagged McShane/Henstock partitions of `[0,1]`, subordination, and the
//! partition surgery (restriction, extension) used by the integrators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::region::{Interval, Region};
use crate::sampling;

/// `([lo, hi], tag)`. Serialized flat as `{lo, hi, tag}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawItem", into = "RawItem")]
pub struct TaggedInterval {
    pub interval: Interval,
    pub tag: Dyadic,
}

#[derive(Serialize, Deserialize)]
struct RawItem {
    lo: Dyadic,
    hi: Dyadic,
    tag: Dyadic,
}

impl TryFrom<RawItem> for TaggedInterval {
    type Error = Error;
    fn try_from(raw: RawItem) -> Result<Self> {
        Ok(TaggedInterval {
            interval: Interval::new(raw.lo, raw.hi)?,
            tag: raw.tag,
        })
    }
}

impl From<TaggedInterval> for RawItem {
    fn from(item: TaggedInterval) -> Self {
        let TaggedInterval { interval, tag } = item;
        RawItem {
            lo: interval.lo().clone(),
            hi: interval.hi().clone(),
            tag,
        }
    }
}

impl TaggedInterval {
    pub fn new(interval: Interval, tag: Dyadic) -> Self {
        TaggedInterval { interval, tag }
    }
}

/// McShane tags may lie anywhere in `[0,1]`; Henstock tags lie in their interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    McShane,
    Henstock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TagStrategy {
    /// Left endpoints, refining cells as needed.
    Left,
    Mid,
    /// A few seeded random candidates first, then midpoint and endpoints.
    Sampled(u64),
}

const SAMPLED_CANDIDATES: usize = 4;
const SAMPLE_BITS: u32 = 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedPartition {
    items: Vec<TaggedInterval>,
    flavor: Flavor,
}

impl TaggedPartition {
    /// Wraps items without checking; see [`is_partition`].
    pub fn new(items: Vec<TaggedInterval>, flavor: Flavor) -> Self {
        TaggedPartition { items, flavor }
    }

    pub fn items(&self) -> &[TaggedInterval] {
        &self.items
    }

    pub fn into_items(self) -> Vec<TaggedInterval> {
        self.items
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// JSON array of `{lo, hi, tag}` with `p/2^k` strings.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.items).expect("tagged intervals serialize")
    }

    pub fn from_json(s: &str, flavor: Flavor) -> Result<Self> {
        let items: Vec<TaggedInterval> =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(TaggedPartition { items, flavor })
    }
}

fn tags_ok(items: &[TaggedInterval], flavor: Flavor) -> bool {
    let unit = Interval::unit();
    items.iter().all(|it| {
        unit.contains(&it.tag) && (flavor == Flavor::McShane || it.interval.contains(&it.tag))
    })
}

/// True iff the intervals are non-overlapping and cover `[0,1]` exactly,
/// and every tag is admissible for the flavor.
pub fn is_partition(p: &TaggedPartition) -> bool {
    if !tags_ok(&p.items, p.flavor) {
        return false;
    }
    let union = Region::normalize(p.items.iter().map(|it| it.interval.clone()).collect());
    let total = p
        .items
        .iter()
        .fold(Dyadic::zero(), |acc, it| acc + it.interval.length());
    union == Region::unit() && total == Dyadic::one()
}

/// `t_i - δ(t_i) ≤ a_i ≤ b_i ≤ t_i + δ(t_i)` for every item.
pub fn is_subordinate(p: &TaggedPartition, g: &Gauge) -> Result<bool> {
    all_subordinate(&p.items, g)
}

pub fn all_subordinate(items: &[TaggedInterval], g: &Gauge) -> Result<bool> {
    for it in items {
        if !g.admits(&it.interval, &it.tag)? {
            return Ok(false);
        }
    }
    Ok(true)
}

struct Fitter<'a, R> {
    gauge: &'a Gauge,
    flavor: Flavor,
    strategy: TagStrategy,
    max_depth: u32,
    rng: R,
}

impl<R: Rng> Fitter<'_, R> {
    fn candidates(&mut self, iv: &Interval, depth: u32) -> Vec<Dyadic> {
        let (lo, mid, hi) = (iv.lo().clone(), iv.midpoint(), iv.hi().clone());
        match self.strategy {
            TagStrategy::Mid => vec![mid, lo, hi],
            // Strictly left tags: bisect until the left endpoint admits the
            // cell. Falling back to the midpoint would reproduce the `Mid`
            // partition whenever cells are exactly `2δ` long.
            TagStrategy::Left if depth < self.max_depth => vec![lo],
            TagStrategy::Left => vec![lo, mid, hi],
            TagStrategy::Sampled(_) => {
                let window = match self.flavor {
                    Flavor::Henstock => iv.clone(),
                    Flavor::McShane => {
                        let len = iv.length();
                        let a = (&lo - &len).max(Dyadic::zero());
                        let b = (&hi + &len).min(Dyadic::one());
                        Interval::new(a, b).expect("window inside [0,1]")
                    }
                };
                let mut c: Vec<Dyadic> = (0..SAMPLED_CANDIDATES)
                    .map(|_| sampling::uniform_in_interval(&mut self.rng, &window, SAMPLE_BITS))
                    .collect();
                c.extend([mid, lo, hi]);
                c
            }
        }
    }

    fn fit(&mut self, iv: Interval, depth: u32, out: &mut Vec<TaggedInterval>) -> Result<()> {
        for t in self.candidates(&iv, depth) {
            if self.flavor == Flavor::Henstock && !iv.contains(&t) {
                continue;
            }
            if self.gauge.admits(&iv, &t)? {
                out.push(TaggedInterval::new(iv, t));
                return Ok(());
            }
        }
        if depth >= self.max_depth {
            return Err(Error::MaxDepthExceeded {
                lo: iv.lo().clone(),
                hi: iv.hi().clone(),
                max_depth: self.max_depth,
            });
        }
        let (left, right) = iv.bisect();
        self.fit(left, depth + 1, out)?;
        self.fit(right, depth + 1, out)
    }
}

/// Subordinate tagged cover of `iv` by recursive dyadic bisection.
pub fn cousin_cover(
    iv: &Interval,
    g: &Gauge,
    flavor: Flavor,
    strategy: TagStrategy,
    max_depth: u32,
) -> Result<Vec<TaggedInterval>> {
    let seed = match strategy {
        TagStrategy::Sampled(s) => s,
        _ => 0,
    };
    let mut fitter = Fitter {
        gauge: g,
        flavor,
        strategy,
        max_depth,
        rng: sampling::stream(seed, 0x636f_7573),
    };
    let mut out = Vec::new();
    fitter.fit(iv.clone(), 0, &mut out)?;
    Ok(out)
}

/// A partition of `[0,1]` subordinate to `g`, found by bisection.
pub fn cousin_partition(
    g: &Gauge,
    flavor: Flavor,
    strategy: TagStrategy,
    max_depth: u32,
) -> Result<TaggedPartition> {
    if max_depth < 1 {
        return Err(Error::InvalidParameter(
            "max_depth must be at least 1".into(),
        ));
    }
    let items = cousin_cover(&Interval::unit(), g, flavor, strategy, max_depth)?;
    Ok(TaggedPartition { items, flavor })
}

/// Intersects each item with `r`, splitting along `r`'s boundary and
/// keeping the original tag. Measure-zero pieces are dropped.
pub fn restrict_partition(p: &TaggedPartition, r: &Region) -> Vec<TaggedInterval> {
    let mut out = Vec::new();
    for it in &p.items {
        for piece in r.intersect_interval(&it.interval).parts() {
            if !piece.is_degenerate() {
                out.push(TaggedInterval::new(piece.clone(), it.tag.clone()));
            }
        }
    }
    out
}

/// Completes a non-overlapping subordinate family to a full partition by
/// bisection on each gap component (McShane flavor, midpoint tags).
pub fn extend_to_partition(
    partial: &[TaggedInterval],
    g: &Gauge,
    max_depth: u32,
) -> Result<TaggedPartition> {
    extend_with(partial, g, Flavor::McShane, TagStrategy::Mid, max_depth)
}

pub fn extend_with(
    partial: &[TaggedInterval],
    g: &Gauge,
    flavor: Flavor,
    strategy: TagStrategy,
    max_depth: u32,
) -> Result<TaggedPartition> {
    let mut sorted: Vec<TaggedInterval> = partial.to_vec();
    sorted.sort_by(|a, b| a.interval.lo().cmp(b.interval.lo()));
    for w in sorted.windows(2) {
        if w[0].interval.overlaps(&w[1].interval) {
            return Err(Error::InvalidParameter(format!(
                "partial items overlap: {:?} and {:?}",
                w[0].interval, w[1].interval
            )));
        }
    }
    if !all_subordinate(&sorted, g)? {
        return Err(Error::InvalidParameter(
            "partial items are not subordinate to the gauge".into(),
        ));
    }
    if !tags_ok(&sorted, flavor)
        || !sorted
            .iter()
            .all(|it| Interval::unit().contains_interval(&it.interval))
    {
        return Err(Error::InvalidParameter(
            "partial items must lie in [0,1] with admissible tags".into(),
        ));
    }
    let covered = Region::normalize(sorted.iter().map(|it| it.interval.clone()).collect());
    let gaps = covered.complement_within(&Interval::unit());
    let mut items = sorted;
    for gap in gaps.parts().iter().filter(|p| !p.is_degenerate()) {
        items.extend(cousin_cover(gap, g, flavor, strategy, max_depth)?);
    }
    items.sort_by(|a, b| a.interval.lo().cmp(b.interval.lo()));
    Ok(TaggedPartition { items, flavor })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn item(lo: &str, hi: &str, t: &str) -> TaggedInterval {
        TaggedInterval::new(Interval::new(d(lo), d(hi)).unwrap(), d(t))
    }

    fn mcs(items: Vec<TaggedInterval>) -> TaggedPartition {
        TaggedPartition::new(items, Flavor::McShane)
    }

    #[test]
    fn partition_checks() {
        assert!(is_partition(&mcs(vec![
            item("0", "1/2", "0"),
            item("1/2", "1", "1")
        ])));
        assert!(!is_partition(&mcs(vec![item("0", "1/2", "0")])));
        // Region intersection oracle: [0,5/8] ∩ [1/2,1] has measure 1/8 > 0.
        let overlapping = mcs(vec![item("0", "5/8", "0"), item("1/2", "1", "1")]);
        let a = Region::span(d("0"), d("5/8"));
        let b = Region::span(d("1/2"), d("1"));
        assert!(a.intersect(&b).measure().is_positive());
        assert!(!is_partition(&overlapping));
    }

    #[test]
    fn henstock_requires_tag_inside() {
        let p = TaggedPartition::new(
            vec![item("0", "1/2", "3/4"), item("1/2", "1", "1")],
            Flavor::Henstock,
        );
        assert!(!is_partition(&p));
        let p = TaggedPartition::new(
            vec![item("0", "1/2", "1/4"), item("1/2", "1", "1")],
            Flavor::Henstock,
        );
        assert!(is_partition(&p));
    }

    #[test]
    fn subordination_examples() {
        let p = mcs(vec![item("0", "1/2", "0"), item("1/2", "1", "1")]);
        assert!(is_subordinate(&p, &Gauge::pow2(0)).unwrap());
        assert!(!is_subordinate(&p, &Gauge::pow2(3)).unwrap());
        let tight = mcs(vec![item("1/4", "3/8", "5/16")]);
        assert!(is_subordinate(&tight, &Gauge::pow2(4)).unwrap());
    }

    #[test]
    fn cousin_examples() {
        let g = Gauge::pow2(2);
        let p = cousin_partition(&g, Flavor::McShane, TagStrategy::Mid, 8).unwrap();
        assert!(is_partition(&p) && is_subordinate(&p, &g).unwrap());
        assert!(p.items().iter().all(|it| it.interval.length() <= d("1/2")));

        let step: Gauge = "pw:1/2,1/2,1/100".parse().unwrap();
        for s in [TagStrategy::Mid, TagStrategy::Left, TagStrategy::Sampled(3)] {
            let p = cousin_partition(&step, Flavor::McShane, s, 16).unwrap();
            assert!(is_partition(&p) && is_subordinate(&p, &step).unwrap());
        }

        let tiny: Gauge = "const:1/100".parse().unwrap();
        let err = cousin_partition(&tiny, Flavor::McShane, TagStrategy::Mid, 1).unwrap_err();
        assert!(matches!(err, Error::MaxDepthExceeded { .. }));
    }

    #[test]
    fn restrict_examples() {
        let p = mcs(vec![item("0", "1/2", "1/8"), item("1/2", "1", "7/8")]);
        assert_eq!(restrict_partition(&p, &Region::unit()), p.items().to_vec());
        assert!(restrict_partition(&p, &Region::empty()).is_empty());
        let r = Region::span(d("1/4"), d("3/4"));
        assert_eq!(
            restrict_partition(&p, &r),
            vec![item("1/4", "1/2", "1/8"), item("1/2", "3/4", "7/8")]
        );
    }

    #[test]
    fn extend_examples() {
        let g = Gauge::pow2(2);
        let full = extend_to_partition(&[], &g, 10).unwrap();
        assert!(is_partition(&full) && is_subordinate(&full, &g).unwrap());

        let seed = item("1/4", "1/2", "3/8");
        let full = extend_to_partition(std::slice::from_ref(&seed), &g, 10).unwrap();
        assert!(is_partition(&full) && is_subordinate(&full, &g).unwrap());
        assert!(full.items().contains(&seed));

        let whole = item("0", "1", "0");
        let same = extend_to_partition(std::slice::from_ref(&whole), &Gauge::pow2(0), 4).unwrap();
        assert_eq!(same.items(), &[whole]);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let g: Gauge = "pw:1/2,1/2,1/100".parse().unwrap();
        let p = cousin_partition(&g, Flavor::McShane, TagStrategy::Sampled(9), 16).unwrap();
        let s = p.to_json();
        assert!(s.contains("\"lo\":\"0/2^0\""));
        let back = TaggedPartition::from_json(&s, Flavor::McShane).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), s);
        assert!(TaggedPartition::from_json(
            r#"[{"lo":"1/2^0","hi":"0/2^0","tag":"0/2^0"}]"#,
            Flavor::McShane
        )
        .is_err());
    }
}
