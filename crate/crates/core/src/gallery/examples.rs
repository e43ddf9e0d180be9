//! Closed-form gallery integrands: initial-segment indicators in a step
//! `L^∞` space, the weighted dyadic-block sequence in `ℓ²`, truncations by
//! a cover, and the concentrating counter-sequence.

use std::sync::Arc;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::integrand::{
    restrict_integrand, Integrand, IntegrandClass, IntegrandFn, PiecewisePoly, Separation,
};
use crate::region::{Interval, Region};
use crate::scalar::Scalar;
use crate::values::{DualFunctional, NormKind, ValueSpace, VectorValue};

pub const DEFAULT_SEGMENT_GRID: u32 = 12;

/// `φ(t) = χ_[0,t]` represented on the uniform grid of depth `g`: cell `j`
/// is 1 exactly when its midpoint `m_j = (2j+1)/2^(g+1)` is at most `t`.
/// Distinct values are at sup distance 1.
#[derive(Clone, Debug)]
pub struct InitialSegments<S> {
    space: Arc<ValueSpace>,
    mids: Vec<Dyadic>,
    depth: u32,
    _scalar: std::marker::PhantomData<S>,
}

impl<S: Scalar> InitialSegments<S> {
    pub fn new(depth: u32) -> Result<Self> {
        if !(1..=16).contains(&depth) {
            return Err(Error::InvalidParameter(format!(
                "grid depth must be in 1..=16, got {depth}"
            )));
        }
        let mids = (0..(1i64 << depth))
            .map(|j| Dyadic::ratio(2 * j + 1, depth + 1))
            .collect();
        Ok(InitialSegments {
            space: ValueSpace::uniform_steps(depth),
            mids,
            depth,
            _scalar: Default::default(),
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of cells switched on at `t`.
    fn count(&self, t: &Dyadic) -> usize {
        self.mids.partition_point(|m| m <= t)
    }

    /// `μ(r ∩ [m_j, 1])` for every cell `j`.
    /// `μ(r ∩ [m_j, 1])` for every midpoint, by one sweep over `r`'s parts.
    fn tail_measures(&self, r: &Region) -> Vec<Dyadic> {
        let total = r.measure();
        let parts = r.parts();
        let mut k = 0;
        let mut below = Dyadic::zero();
        self.mids
            .iter()
            .map(|m| {
                while k < parts.len() && parts[k].hi() <= m {
                    below = &below + &parts[k].length();
                    k += 1;
                }
                let partial = match parts.get(k) {
                    Some(p) if p.lo() < m => m - p.lo(),
                    _ => Dyadic::zero(),
                };
                &total - &below - partial
            })
            .collect()
    }

    /// The discretized ramp `1 − m_j`: the exact integral over `[0,1]`.
    pub fn ramp(&self) -> VectorValue<S> {
        let data = self
            .mids
            .iter()
            .map(|m| S::from_dyadic(&(Dyadic::one() - m)))
            .collect();
        VectorValue::from_data(&self.space, data).expect("grid dimension")
    }
}

impl<S: Scalar> Integrand<S> for InitialSegments<S> {
    fn space(&self) -> &Arc<ValueSpace> {
        &self.space
    }

    fn eval(&self, t: &Dyadic) -> VectorValue<S> {
        let c = self.count(t);
        let data = (0..self.mids.len())
            .map(|j| if j < c { S::one() } else { S::zero() })
            .collect();
        VectorValue::from_data(&self.space, data).expect("grid dimension")
    }

    fn class(&self) -> IntegrandClass {
        IntegrandClass::PiecewiseStep
    }

    fn label(&self) -> String {
        format!("segments(g={})", self.depth)
    }

    fn breakpoints(&self) -> Vec<Dyadic> {
        let mut b = vec![Dyadic::zero()];
        b.extend(self.mids.iter().cloned());
        b.push(Dyadic::one());
        b
    }

    /// Bucket by switched-on count, then suffix sums.
    fn tagged_sum(&self, items: &[(Dyadic, Dyadic)]) -> VectorValue<S> {
        let n = self.mids.len();
        let mut bucket = vec![Dyadic::zero(); n + 1];
        for (w, t) in items {
            let c = self.count(t);
            bucket[c] = &bucket[c] + w;
        }
        let mut data = vec![S::zero(); n];
        let mut acc = Dyadic::zero();
        for j in (0..n).rev() {
            acc = acc + &bucket[j + 1];
            data[j] = S::from_dyadic(&acc);
        }
        VectorValue::from_data(&self.space, data).expect("grid dimension")
    }

    fn exact_integral(&self, r: &Region) -> Option<VectorValue<S>> {
        let data = self.tail_measures(r).iter().map(S::from_dyadic).collect();
        Some(VectorValue::from_data(&self.space, data).expect("grid dimension"))
    }

    fn pairing_integral(&self, f: &DualFunctional<S>, r: &Region) -> Result<S> {
        let w = f.weights(&self.space)?;
        let mu: Vec<S> = self.tail_measures(r).iter().map(S::from_dyadic).collect();
        Ok(S::dot(&mu, &w))
    }

    fn norm_bound(&self) -> Option<S> {
        Some(S::one())
    }

    /// `‖φ(t)‖ = 1` exactly when `t ≥ m_0`.
    fn lower_norm_sum(&self, depth: u32) -> S {
        S::from_dyadic(&(Dyadic::one() - self.mids[0].ceil_to(depth)).max(Dyadic::zero()))
    }

    fn separation(&self) -> Option<Separation> {
        Some(Separation {
            distance: Dyadic::one(),
            level_measure: Dyadic::pow2_neg(self.depth),
        })
    }
}

pub fn initial_segments<S: Scalar>(grid_depth: u32) -> Result<InitialSegments<S>> {
    InitialSegments::new(grid_depth)
}

/// `[0, 2^-R, 2^-(R-1), …, 1/2, 1]`.
fn block_breaks(r_len: usize) -> Vec<Dyadic> {
    let mut b = vec![Dyadic::zero()];
    b.extend((0..=r_len as u32).rev().map(Dyadic::pow2_neg));
    b
}

/// `φ(t) = 2ⁿ/(n+1)·e_n` on `[2^-(n+1), 2^-n)` for `n < R`, zero on
/// `[0, 2^-R)`.
pub fn harmonic_blocks<S: Scalar>(r_len: usize) -> Result<PiecewisePoly<S>> {
    if !(1..=1000).contains(&r_len) {
        return Err(Error::InvalidParameter(format!(
            "R must be in 1..=1000, got {r_len}"
        )));
    }
    let space = ValueSpace::seq_l2(r_len);
    let mut values = vec![VectorValue::zeros(&space)];
    for n in (0..r_len).rev() {
        let c = S::from_dyadic(&Dyadic::one().shl(n as i64)) / S::from_int(n as i64 + 1);
        values.push(VectorValue::unit(&space, n)?.scale(&c));
    }
    Ok(
        PiecewisePoly::right_open_steps(&space, block_breaks(r_len), values, "")?
            .with_label(format!("blocks(R={r_len})")),
    )
}

/// `∫φ = Σ_n e_n/(2(n+1))`.
pub fn harmonic_blocks_integral<S: Scalar>(r_len: usize) -> VectorValue<S> {
    let space = ValueSpace::seq_l2(r_len);
    let data = (0..r_len)
        .map(|n| S::ratio(1, 2 * (n as i64 + 1)))
        .collect();
    VectorValue::from_data(&space, data).expect("R coordinates")
}

/// `[2^-(n+1), 2^-n]`.
pub fn harmonic_block(n: usize) -> Interval {
    Interval::new(Dyadic::pow2_neg(n as u32 + 1), Dyadic::pow2_neg(n as u32)).expect("ordered")
}

/// `H_N/2 = Σ_{n<N} 1/(2(n+1))`.
pub fn half_harmonic<S: Scalar>(n: usize) -> S {
    (0..n).fold(S::zero(), |acc, i| acc + S::ratio(1, 2 * (i as i64 + 1)))
}

/// `sqrt(Σ_{N ≤ n < R} 1/(4(n+1)²))`, the ℓ² norm of `ν([0, 2^-N])`.
pub fn harmonic_tail_norm(n: usize, r_len: usize) -> f64 {
    (n..r_len)
        .map(|i| 1.0 / (4.0 * ((i + 1) as f64).powi(2)))
        .sum::<f64>()
        .sqrt()
}

/// `cover_i = [2^-(i+1), 1]` for `i < len − 1`, then `[0,1]`.
pub fn harmonic_cover(len: usize) -> Vec<Region> {
    let mut v: Vec<Region> = (0..len.saturating_sub(1))
        .map(|i| Region::span(Dyadic::pow2_neg(i as u32 + 1), Dyadic::one()))
        .collect();
    v.push(Region::unit());
    v
}

/// `φ_n = φ·χ(cover_0 ∪ … ∪ cover_n)`; indices past the cover repeat the
/// last member.
#[derive(Clone)]
pub struct TruncationSequence<S: Scalar> {
    phi: IntegrandFn<S>,
    unions: Vec<Region>,
}

impl<S: Scalar> TruncationSequence<S> {
    pub fn member(&self, n: usize) -> IntegrandFn<S> {
        let u = &self.unions[n.min(self.unions.len() - 1)];
        if *u == Region::unit() {
            self.phi.clone()
        } else {
            restrict_integrand(&self.phi, u)
        }
    }

    pub fn len(&self) -> usize {
        self.unions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unions.is_empty()
    }

    pub fn limit(&self) -> &IntegrandFn<S> {
        &self.phi
    }
}

pub fn truncation_sequence<S: Scalar>(
    phi: IntegrandFn<S>,
    cover: &[Region],
) -> Result<TruncationSequence<S>> {
    let mut unions = Vec::with_capacity(cover.len());
    let mut acc = Region::empty();
    for c in cover {
        acc = acc.union(c);
        unions.push(acc.clone());
    }
    if acc.intersect(&Region::unit()) != Region::unit() {
        return Err(Error::InvalidParameter(
            "cover does not exhaust [0,1]".into(),
        ));
    }
    Ok(TruncationSequence { phi, unions })
}

/// `φ_k = 2^k·χ_(0, 2^-k]` in the real line.
pub fn counter_sequence<S: Scalar>(k: u32) -> Result<PiecewisePoly<S>> {
    let space = ValueSpace::finite(1, NormKind::L1);
    let height =
        VectorValue::from_data(&space, vec![S::from_dyadic(&Dyadic::one().shl(k as i64))])?;
    let zero = VectorValue::zeros(&space);
    let label = format!("2^{k}·χ(0,2^-{k}]");
    if k == 0 {
        return PiecewisePoly::new(
            &space,
            vec![Dyadic::zero(), Dyadic::one()],
            vec![vec![height.clone()]],
            vec![zero, height],
            label,
        );
    }
    PiecewisePoly::new(
        &space,
        vec![Dyadic::zero(), Dyadic::pow2_neg(k), Dyadic::one()],
        vec![vec![height.clone()], vec![zero.clone()]],
        vec![zero.clone(), height, zero],
        label,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::Gauge;
    use crate::integrators::mcshane::riemann_sum;
    use crate::partition::{cousin_partition, Flavor, TagStrategy};
    use num_rational::BigRational as Q;

    #[test]
    fn harmonic_block_values_and_integral() {
        let phi = harmonic_blocks::<Q>(4).unwrap();
        let v = phi.eval(&Dyadic::ratio(3, 3)); // 3/8 in block n = 1
        assert_eq!(
            v.data(),
            [
                Q::from_int(0),
                Q::from_int(1),
                Q::from_int(0),
                Q::from_int(0)
            ]
        );
        assert!(phi.eval(&Dyadic::pow2_neg(5)).is_zero());
        assert_eq!(
            phi.exact_integral(&Region::unit()).unwrap(),
            harmonic_blocks_integral::<Q>(4)
        );
        assert_eq!(phi.lower_norm_sum(5), half_harmonic::<Q>(4));
    }

    #[test]
    fn segment_sums_are_fast_and_exact() {
        let phi = initial_segments::<Q>(6).unwrap();
        let p = cousin_partition(
            &Gauge::pow2(5),
            Flavor::McShane,
            TagStrategy::Sampled(3),
            30,
        )
        .unwrap();
        let items: Vec<(Dyadic, Dyadic)> = p
            .items()
            .iter()
            .map(|it| (it.interval.length(), it.tag.clone()))
            .collect();
        let mut slow = VectorValue::zeros(phi.space());
        for (w, t) in &items {
            slow.add_scaled(&Q::from_dyadic(w), &phi.eval(t)).unwrap();
        }
        assert_eq!(riemann_sum(&phi, &p), slow);
        assert_eq!(phi.exact_integral(&Region::unit()).unwrap(), phi.ramp());
        let a = phi.eval(&Dyadic::ratio(1, 2));
        let b = phi.eval(&Dyadic::ratio(3, 2));
        assert_eq!(a.distance(&b).unwrap().hi, Q::from_int(1));
    }

    #[test]
    fn counter_sequence_has_unit_mass() {
        for k in 0..6 {
            let phi = counter_sequence::<Q>(k).unwrap();
            assert_eq!(
                phi.exact_integral(&Region::unit()).unwrap().data()[0],
                Q::from_int(1)
            );
            assert!(phi.eval(&Dyadic::zero()).is_zero());
        }
    }

    #[test]
    fn truncations() {
        let phi: IntegrandFn<Q> = Arc::new(harmonic_blocks::<Q>(6).unwrap());
        let seq = truncation_sequence(phi.clone(), &harmonic_cover(7)).unwrap();
        let first = seq.member(0);
        assert!(first.eval(&Dyadic::ratio(1, 3)).is_zero());
        assert!(!first.eval(&Dyadic::ratio(3, 2)).is_zero());
        assert!(Arc::ptr_eq(&seq.member(10), &phi));
        assert!(
            truncation_sequence(phi, &[Region::span(Dyadic::zero(), Dyadic::ratio(1, 1))]).is_err()
        );
    }
}
