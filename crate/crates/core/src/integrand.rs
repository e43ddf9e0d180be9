//! Vector-valued integrands `φ : [0,1] → X`.
//!
//! Piecewise integrands carry enough structure for exact closed-form
//! integrals of `f∘φ`, certified lower Darboux sums of `‖φ‖`, and gauges
//! adapted to their jump points. Evaluator integrands only support
//! sampling-based operations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::region::{Interval, Region};
use crate::scalar::Scalar;
use crate::values::{DualFunctional, ValueSpace, VectorValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrandClass {
    PiecewiseStep,
    PiecewisePolynomial,
    Evaluator,
}

/// Values pairwise at distance `distance` across level sets of measure at
/// most `level_measure` (the obstruction to Bochner approximation).
#[derive(Clone, Debug, PartialEq)]
pub struct Separation {
    pub distance: Dyadic,
    pub level_measure: Dyadic,
}

/// A simple function `Σ x_i χ(E_i)` with `∫ sup_{E_i} ‖φ − x_i‖ ≤ dominating`.
#[derive(Clone, Debug)]
pub struct SimpleApprox<S> {
    pub parts: Vec<(Region, VectorValue<S>)>,
    pub dominating: S,
}

pub trait Integrand<S: Scalar>: Send + Sync {
    fn space(&self) -> &Arc<ValueSpace>;

    fn eval(&self, t: &Dyadic) -> VectorValue<S>;

    fn class(&self) -> IntegrandClass;

    fn label(&self) -> String;

    /// Points where the piecewise structure may change.
    fn breakpoints(&self) -> Vec<Dyadic> {
        Vec::new()
    }

    /// Exact `∫_r f∘φ`.
    fn pairing_integral(&self, _f: &DualFunctional<S>, _r: &Region) -> Result<S> {
        Err(Error::UnsupportedExactIntegration)
    }

    /// Exact `∫_r φ` when a closed form exists.
    fn exact_integral(&self, _r: &Region) -> Option<VectorValue<S>> {
        None
    }

    /// `Σ w_i φ(t_i)`.
    fn tagged_sum(&self, items: &[(Dyadic, Dyadic)]) -> VectorValue<S> {
        let mut acc = VectorValue::zeros(self.space());
        for (w, t) in items {
            let v = self.eval(t);
            acc.add_scaled(&S::from_dyadic(w), &v)
                .expect("integrand values share its space");
        }
        acc
    }

    /// Gauge for refinement level `level`; `δ ≡ 2^-level` unless the
    /// integrand knows where it jumps.
    fn adapted_gauge(&self, level: u32) -> Gauge {
        Gauge::pow2(level)
    }

    /// Upper bound on `sup_t ‖φ(t)‖`.
    fn norm_bound(&self) -> Option<S> {
        None
    }

    /// Lower Darboux sum of `‖φ‖` over the half-open dyadic cells of depth
    /// `depth`. The default samples five points per cell and is therefore
    /// only an estimate.
    fn lower_norm_sum(&self, depth: u32) -> S {
        let depth = depth.min(12);
        let w = Dyadic::pow2_neg(depth);
        let mut total = S::zero();
        for j in 0..(1i64 << depth) {
            let c = Dyadic::ratio(j, depth);
            let inf = (0..5)
                .map(|k| self.eval(&(&c + &(&w * &Dyadic::ratio(k, 3)))).norm().lo)
                .fold(None::<S>, |m, x| Some(m.map_or(x.clone(), |m| m.min_of(x))))
                .unwrap_or_else(S::zero);
            total = total + S::from_dyadic(&w) * inf;
        }
        total
    }

    fn separation(&self) -> Option<Separation> {
        None
    }

    /// Simple-function approximation on the dyadic grid of depth `depth`.
    fn simple_approximation(&self, _depth: u32) -> Option<SimpleApprox<S>> {
        None
    }

    /// Native restriction `φ·χ(E)`, if the representation supports one.
    fn restricted(&self, _e: &Region) -> Option<IntegrandFn<S>> {
        None
    }
}

pub type IntegrandFn<S> = Arc<dyn Integrand<S>>;

// ---------------------------------------------------------------------------
// Piecewise polynomials

/// `φ(t) = Σ_k c_k t^k` on each open piece `(x_j, x_{j+1})`, with explicit
/// values at the breakpoints `0 = x_0 < … < x_p = 1`.
#[derive(Clone, Debug)]
pub struct PiecewisePoly<S> {
    space: Arc<ValueSpace>,
    breaks: Vec<Dyadic>,
    pieces: Vec<Vec<VectorValue<S>>>,
    points: Vec<VectorValue<S>>,
    label: String,
}

fn pow(t: &Dyadic, k: u32) -> Dyadic {
    (0..k).fold(Dyadic::one(), |acc, _| acc * t)
}

fn poly_eval<S: Scalar>(coeffs: &[VectorValue<S>], t: &S) -> VectorValue<S> {
    let mut acc = coeffs.last().expect("non-empty polynomial").clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.scale(t);
        acc.add_scaled(&S::one(), c)
            .expect("coefficients share a space");
    }
    acc
}

/// `(b^{k+1} - a^{k+1}) / (k+1)` for each power.
fn monomial_integrals<S: Scalar>(a: &Dyadic, b: &Dyadic, degree: usize) -> Vec<S> {
    (0..=degree as u32)
        .map(|k| S::from_dyadic(&(pow(b, k + 1) - pow(a, k + 1))) / S::from_int(k as i64 + 1))
        .collect()
}

impl<S: Scalar> PiecewisePoly<S> {
    pub fn new(
        space: &Arc<ValueSpace>,
        breaks: Vec<Dyadic>,
        pieces: Vec<Vec<VectorValue<S>>>,
        points: Vec<VectorValue<S>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        space.validate()?;
        let ok = breaks.len() >= 2
            && breaks[0].is_zero()
            && breaks[breaks.len() - 1] == Dyadic::one()
            && breaks.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::InvalidParameter(
                "breakpoints must increase from 0 to 1".into(),
            ));
        }
        if pieces.len() + 1 != breaks.len() || points.len() != breaks.len() {
            return Err(Error::InvalidParameter(
                "piece/point counts do not match breakpoints".into(),
            ));
        }
        for v in pieces.iter().flatten().chain(points.iter()) {
            if v.space().as_ref() != space.as_ref() {
                return Err(Error::SpaceMismatch(
                    "piece value outside the integrand's space".into(),
                ));
            }
        }
        if pieces.iter().any(|p| p.is_empty()) {
            return Err(Error::InvalidParameter(
                "every piece needs at least one coefficient".into(),
            ));
        }
        Ok(PiecewisePoly {
            space: space.clone(),
            breaks,
            pieces,
            points,
            label: label.into(),
        })
    }

    pub fn constant(space: &Arc<ValueSpace>, v: VectorValue<S>) -> Result<Self> {
        Self::new(
            space,
            vec![Dyadic::zero(), Dyadic::one()],
            vec![vec![v.clone()]],
            vec![v.clone(), v],
            "constant",
        )
    }

    /// One polynomial on all of `[0,1]`.
    pub fn polynomial(space: &Arc<ValueSpace>, coeffs: Vec<VectorValue<S>>) -> Result<Self> {
        let at0 = coeffs.first().cloned().ok_or_else(|| {
            Error::InvalidParameter("polynomial needs at least one coefficient".into())
        })?;
        let at1 = poly_eval(&coeffs, &S::one());
        Self::new(
            space,
            vec![Dyadic::zero(), Dyadic::one()],
            vec![coeffs],
            vec![at0, at1],
            "polynomial",
        )
    }

    /// Step function with value `values[j]` on `[breaks[j], breaks[j+1])`,
    /// the last step closed at 1.
    pub fn right_open_steps(
        space: &Arc<ValueSpace>,
        breaks: Vec<Dyadic>,
        values: Vec<VectorValue<S>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if values.len() + 1 != breaks.len() {
            return Err(Error::InvalidParameter("need one value per step".into()));
        }
        let mut points = values.clone();
        points.push(
            values
                .last()
                .cloned()
                .ok_or_else(|| Error::InvalidParameter("no steps".into()))?,
        );
        let pieces = values.into_iter().map(|v| vec![v]).collect();
        Self::new(space, breaks, pieces, points, label)
    }

    /// Piecewise-constant integrand from an exact evaluator and a
    /// breakpoint set: piece values are read at midpoints, point values at
    /// the breakpoints themselves.
    pub fn from_step_evaluator(
        space: &Arc<ValueSpace>,
        mut breaks: Vec<Dyadic>,
        eval: impl Fn(&Dyadic) -> VectorValue<S>,
        label: impl Into<String>,
    ) -> Result<Self> {
        breaks.retain(|b| !b.is_negative() && *b <= Dyadic::one());
        breaks.push(Dyadic::zero());
        breaks.push(Dyadic::one());
        breaks.sort();
        breaks.dedup();
        let pieces = breaks
            .windows(2)
            .map(|w| vec![eval(&(&w[0] + &w[1]).half())])
            .collect();
        let points = breaks.iter().map(&eval).collect();
        Self::new(space, breaks, pieces, points, label)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn breaks(&self) -> &[Dyadic] {
        &self.breaks
    }

    pub fn is_step(&self) -> bool {
        self.pieces.iter().all(|p| p.len() == 1)
    }

    /// Index of the open piece containing `t`, or `Err(j)` for breakpoint `j`.
    fn locate(&self, t: &Dyadic) -> std::result::Result<usize, usize> {
        match self.breaks.binary_search(t) {
            Ok(j) => Err(j),
            Err(j) => Ok(j.saturating_sub(1).min(self.pieces.len() - 1)),
        }
    }

    fn piece_at(&self, j: usize, t: &Dyadic) -> VectorValue<S> {
        let p = &self.pieces[j];
        if p.len() == 1 {
            p[0].clone()
        } else {
            poly_eval(p, &S::from_dyadic(t))
        }
    }

    /// Upper bound on the piece's Lipschitz constant over `[0,1]`.
    fn lipschitz(&self, j: usize) -> S {
        self.pieces[j]
            .iter()
            .enumerate()
            .skip(1)
            .fold(S::zero(), |acc, (k, c)| {
                acc + S::from_int(k as i64) * c.norm().hi
            })
    }

    /// `(breakpoint, jump size)` for every breakpoint where φ is discontinuous.
    pub fn jumps(&self) -> Vec<(Dyadic, S)> {
        let mut out = Vec::new();
        for (j, x) in self.breaks.iter().enumerate() {
            let mut around = vec![self.points[j].clone()];
            if j > 0 {
                around.push(self.piece_at(j - 1, x));
            }
            if j + 1 < self.breaks.len() {
                around.push(self.piece_at(j, x));
            }
            let mut size = S::zero();
            for a in &around {
                for b in &around {
                    size = size.max_of(a.distance(b).expect("same space").hi);
                }
            }
            if size > S::zero() {
                out.push((x.clone(), size));
            }
        }
        out
    }

    fn exact_integral_over(&self, r: &Region, weights: Option<&[S]>) -> Vec<S> {
        let dim = if weights.is_some() {
            1
        } else {
            self.space.dim()
        };
        let mut acc = vec![S::zero(); dim];
        for (j, coeffs) in self.pieces.iter().enumerate() {
            let piece =
                Interval::new(self.breaks[j].clone(), self.breaks[j + 1].clone()).expect("sorted");
            for sub in r.intersect_interval(&piece).parts() {
                if sub.is_degenerate() {
                    continue;
                }
                let mono = monomial_integrals::<S>(sub.lo(), sub.hi(), coeffs.len() - 1);
                for (c, m) in coeffs.iter().zip(&mono) {
                    match weights {
                        Some(w) => {
                            let fc = w
                                .iter()
                                .zip(c.data())
                                .fold(S::zero(), |s, (a, b)| s + a.clone() * b.clone());
                            acc[0] = acc[0].clone() + fc * m.clone();
                        }
                        None => {
                            for (slot, x) in acc.iter_mut().zip(c.data()) {
                                if !x.is_zero() {
                                    *slot = slot.clone() + x.clone() * m.clone();
                                }
                            }
                        }
                    }
                }
            }
        }
        acc
    }

    /// Certified lower bound for `inf ‖φ‖` over `[a,b]` inside piece `j`.
    fn piece_inf(&self, j: usize, a: &Dyadic, b: &Dyadic) -> S {
        let p = &self.pieces[j];
        if p.len() == 1 {
            return p[0].norm().lo;
        }
        let mid = (a + b).half();
        let half = S::from_dyadic(&(b - a).half());
        let v = self.piece_at(j, &mid).norm().lo - self.lipschitz(j) * half;
        v.max_of(S::zero())
    }

    fn lower_cell(&self, c: &Dyadic, level: u32, depth: u32, poly_depth: u32) -> S {
        let w = Dyadic::pow2_neg(level);
        let end = c + &w;
        let closed_end = end == Dyadic::one();
        let i0 = self.breaks.partition_point(|x| x < c);
        let i1 = if closed_end {
            self.breaks.len()
        } else {
            self.breaks.partition_point(|x| x < &end)
        };
        let wv = S::from_dyadic(&w);
        if i0 == i1 {
            // Cell strictly inside piece i0-1.
            let j = i0 - 1;
            if self.pieces[j].len() == 1 {
                return wv * self.pieces[j][0].norm().lo;
            }
            if level >= depth.min(poly_depth) {
                return wv * self.piece_inf(j, c, &end);
            }
        } else if level >= depth {
            let mut inf: Option<S> = None;
            let mut take = |x: S| {
                inf = Some(match inf.take() {
                    Some(m) => m.min_of(x),
                    None => x,
                })
            };
            for i in i0..i1 {
                take(self.points[i].norm().lo);
            }
            // Open pieces meeting the cell.
            let first_piece = i0.saturating_sub(1);
            let last_piece = (i1.min(self.pieces.len())).max(first_piece + 1);
            for j in first_piece..last_piece {
                let a = self.breaks[j].clone().max(c.clone());
                let b = self.breaks[j + 1].clone().min(end.clone());
                if a < b {
                    take(self.piece_inf(j, &a, &b));
                }
            }
            return wv * inf.unwrap_or_else(S::zero);
        }
        let half = Dyadic::pow2_neg(level + 1);
        self.lower_cell(c, level + 1, depth, poly_depth)
            + self.lower_cell(&(c + &half), level + 1, depth, poly_depth)
    }

    /// Restriction `φ·χ(E)` as another piecewise polynomial.
    pub fn restrict_to(&self, e: &Region) -> PiecewisePoly<S> {
        let mut breaks = self.breaks.clone();
        breaks.extend(
            e.boundary()
                .into_iter()
                .filter(|x| !x.is_negative() && *x <= Dyadic::one()),
        );
        breaks.sort();
        breaks.dedup();
        let zero = VectorValue::zeros(&self.space);
        let pieces = breaks
            .windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]).half();
                if e.contains(&mid) {
                    match self.locate(&mid) {
                        Ok(j) => self.pieces[j].clone(),
                        Err(_) => unreachable!("midpoint of refined piece is not a breakpoint"),
                    }
                } else {
                    vec![zero.clone()]
                }
            })
            .collect();
        let points = breaks
            .iter()
            .map(|x| {
                if e.contains(x) {
                    self.eval(x)
                } else {
                    zero.clone()
                }
            })
            .collect();
        PiecewisePoly {
            space: self.space.clone(),
            breaks,
            pieces,
            points,
            label: format!("{}|E", self.label),
        }
    }

    fn adapted_profile(&self, level: u32) -> AdaptedProfile {
        let jumps: Vec<(Dyadic, S)> = self.jumps();
        let mut jump_at = Vec::new();
        let mut jump_delta = Vec::new();
        for (x, size) in &jumps {
            let j = self.breaks.binary_search(x).expect("jump at a breakpoint");
            let left = if j > 0 {
                &self.breaks[j] - &self.breaks[j - 1]
            } else {
                Dyadic::one()
            };
            let right = if j + 1 < self.breaks.len() {
                &self.breaks[j + 1] - &self.breaks[j]
            } else {
                Dyadic::one()
            };
            let span = left.min(right).to_f64();
            let ratio = size.to_f64().max(1.0) / span;
            let extra = ratio.log2().ceil().max(0.0) as u32 + 1;
            jump_at.push(x.clone());
            jump_delta.push(Dyadic::pow2_neg(level + extra));
        }
        let caps = (0..self.pieces.len())
            .map(|j| {
                let lip = self.lipschitz(j).to_f64();
                if lip == 0.0 {
                    Dyadic::one()
                } else {
                    let extra = lip.max(1.0).log2().ceil() as u32;
                    Dyadic::pow2_neg(level + extra)
                }
            })
            .collect();
        AdaptedProfile {
            jump_at,
            jump_delta,
            breaks: self.breaks.clone(),
            caps,
        }
    }
}

/// Gauge data for a piecewise integrand: tiny at jumps, half the distance
/// to the nearest jump elsewhere, capped on non-constant pieces.
#[derive(Debug)]
struct AdaptedProfile {
    jump_at: Vec<Dyadic>,
    jump_delta: Vec<Dyadic>,
    breaks: Vec<Dyadic>,
    caps: Vec<Dyadic>,
}

impl AdaptedProfile {
    fn delta(&self, t: &Dyadic) -> Dyadic {
        if let Ok(i) = self.jump_at.binary_search(t) {
            return self.jump_delta[i].clone();
        }
        let cap = match self.breaks.binary_search(t) {
            Ok(j) => {
                let l = if j > 0 {
                    self.caps[j - 1].clone()
                } else {
                    Dyadic::one()
                };
                let r = if j < self.caps.len() {
                    self.caps[j].clone()
                } else {
                    Dyadic::one()
                };
                l.min(r)
            }
            Err(j) => self.caps[j.saturating_sub(1).min(self.caps.len() - 1)].clone(),
        };
        let k = self.jump_at.partition_point(|x| x < t);
        let mut dist: Option<Dyadic> = None;
        for i in [k.wrapping_sub(1), k] {
            if let Some(x) = self.jump_at.get(i) {
                let d = (x - t).abs();
                dist = Some(match dist {
                    Some(m) => m.min(d),
                    None => d,
                });
            }
        }
        match dist {
            Some(d) => cap.min(d.half()),
            None => cap,
        }
    }
}

impl<S: Scalar> Integrand<S> for PiecewisePoly<S> {
    fn space(&self) -> &Arc<ValueSpace> {
        &self.space
    }

    fn eval(&self, t: &Dyadic) -> VectorValue<S> {
        if t.is_negative() || *t > Dyadic::one() {
            return VectorValue::zeros(&self.space);
        }
        match self.locate(t) {
            Ok(j) => self.piece_at(j, t),
            Err(j) => self.points[j].clone(),
        }
    }

    fn class(&self) -> IntegrandClass {
        if self.is_step() {
            IntegrandClass::PiecewiseStep
        } else {
            IntegrandClass::PiecewisePolynomial
        }
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn breakpoints(&self) -> Vec<Dyadic> {
        self.breaks.clone()
    }

    fn pairing_integral(&self, f: &DualFunctional<S>, r: &Region) -> Result<S> {
        let w = f.weights(&self.space)?;
        Ok(self
            .exact_integral_over(r, Some(&w))
            .pop()
            .expect("one slot"))
    }

    fn exact_integral(&self, r: &Region) -> Option<VectorValue<S>> {
        Some(
            VectorValue::from_data(&self.space, self.exact_integral_over(r, None))
                .expect("dims match"),
        )
    }

    fn adapted_gauge(&self, level: u32) -> Gauge {
        let profile = Arc::new(self.adapted_profile(level));
        Gauge::evaluator(
            format!("adapted:{}:{level}", self.label),
            None,
            move |t: &Dyadic| profile.delta(t).to_rational(),
        )
    }

    fn norm_bound(&self) -> Option<S> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| p.iter().fold(S::zero(), |acc, c| acc + c.norm().hi));
        let points = self.points.iter().map(|v| v.norm().hi);
        Some(pieces.chain(points).fold(S::zero(), |m, x| m.max_of(x)))
    }

    fn lower_norm_sum(&self, depth: u32) -> S {
        // Non-constant pieces are resolved to at most 2^20 cells.
        self.lower_cell(&Dyadic::zero(), 0, depth, 20)
    }

    fn simple_approximation(&self, depth: u32) -> Option<SimpleApprox<S>> {
        let mut parts = Vec::new();
        let mut dominating = S::zero();
        for (j, coeffs) in self.pieces.iter().enumerate() {
            let piece =
                Interval::new(self.breaks[j].clone(), self.breaks[j + 1].clone()).expect("sorted");
            if coeffs.len() == 1 {
                parts.push((Region::interval(piece), coeffs[0].clone()));
                continue;
            }
            let lip = self.lipschitz(j);
            let lo = piece.lo().floor_to(depth);
            let w = Dyadic::pow2_neg(depth);
            let mut c = lo;
            while &c < piece.hi() {
                let a = c.clone().max(piece.lo().clone());
                let b = (&c + &w).min(piece.hi().clone());
                if a < b {
                    let cell = Interval::new(a, b).expect("ordered");
                    let len = S::from_dyadic(&cell.length());
                    parts.push((
                        Region::interval(cell.clone()),
                        self.piece_at(j, &cell.midpoint()),
                    ));
                    dominating = dominating + len.clone() * len * lip.clone() / S::from_int(2);
                }
                c = c + &w;
            }
        }
        Some(SimpleApprox { parts, dominating })
    }

    fn restricted(&self, e: &Region) -> Option<IntegrandFn<S>> {
        Some(Arc::new(self.restrict_to(e)))
    }
}

// ---------------------------------------------------------------------------
// Restriction wrapper and evaluator integrands

/// `φ·χ(E)` for integrands without a native restriction.
pub struct Restricted<S: Scalar> {
    inner: IntegrandFn<S>,
    region: Region,
}

impl<S: Scalar> Restricted<S> {
    pub fn new(inner: IntegrandFn<S>, region: Region) -> Self {
        Restricted { inner, region }
    }
}

impl<S: Scalar> Integrand<S> for Restricted<S> {
    fn space(&self) -> &Arc<ValueSpace> {
        self.inner.space()
    }

    fn eval(&self, t: &Dyadic) -> VectorValue<S> {
        if self.region.contains(t) {
            self.inner.eval(t)
        } else {
            VectorValue::zeros(self.inner.space())
        }
    }

    fn class(&self) -> IntegrandClass {
        self.inner.class()
    }

    fn label(&self) -> String {
        format!("{}|E", self.inner.label())
    }

    fn breakpoints(&self) -> Vec<Dyadic> {
        let mut b = self.inner.breakpoints();
        b.extend(self.region.boundary());
        b.sort();
        b.dedup();
        b
    }

    fn pairing_integral(&self, f: &DualFunctional<S>, r: &Region) -> Result<S> {
        self.inner.pairing_integral(f, &r.intersect(&self.region))
    }

    fn exact_integral(&self, r: &Region) -> Option<VectorValue<S>> {
        self.inner.exact_integral(&r.intersect(&self.region))
    }

    fn tagged_sum(&self, items: &[(Dyadic, Dyadic)]) -> VectorValue<S> {
        let kept: Vec<(Dyadic, Dyadic)> = items
            .iter()
            .filter(|(_, t)| self.region.contains(t))
            .cloned()
            .collect();
        self.inner.tagged_sum(&kept)
    }

    /// The inner gauge, additionally capped by half the distance to `∂E`
    /// (but never below a level-dependent floor at the scale of `E`'s
    /// pieces). Intervals tagged outside `E` then cannot reach into its
    /// interior, so coarse levels cannot all miss a small region; the factor
    /// one half leaves tags room to move, so trials do not coincide.
    fn adapted_gauge(&self, level: u32) -> Gauge {
        let inner = self.inner.adapted_gauge(level);
        let edges = self.region.boundary();
        let mut marks = edges.clone();
        marks.extend([Dyadic::zero(), Dyadic::one()]);
        marks.sort();
        marks.dedup();
        let spacing = marks
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .min()
            .unwrap_or_else(Dyadic::one);
        let mut scale = 1;
        while Dyadic::pow2_neg(scale) > spacing {
            scale += 1;
        }
        let fine = Dyadic::pow2_neg(level + scale);
        let floor = inner.floor().map(|f| f.min(fine.to_rational()));
        Gauge::evaluator(format!("{}|E", inner.label()), floor, move |t: &Dyadic| {
            let j = edges.partition_point(|b| b < t);
            let gap = [j.checked_sub(1), Some(j)]
                .into_iter()
                .flatten()
                .filter_map(|i| edges.get(i))
                .map(|b| (b - t).abs())
                .min()
                .unwrap_or_else(Dyadic::one);
            let near = gap.shl(-1).max(fine.clone()).to_rational();
            match inner.eval(t) {
                Ok(own) => own.min(near),
                Err(_) => near,
            }
        })
    }

    fn norm_bound(&self) -> Option<S> {
        self.inner.norm_bound()
    }
}

pub type EvalFn<S> = dyn Fn(&Dyadic) -> VectorValue<S> + Send + Sync;

/// An integrand known only through point evaluation.
pub struct FnIntegrand<S: Scalar> {
    space: Arc<ValueSpace>,
    eval: Arc<EvalFn<S>>,
    label: String,
}

impl<S: Scalar> FnIntegrand<S> {
    pub fn new(
        space: &Arc<ValueSpace>,
        label: impl Into<String>,
        eval: impl Fn(&Dyadic) -> VectorValue<S> + Send + Sync + 'static,
    ) -> Self {
        FnIntegrand {
            space: space.clone(),
            eval: Arc::new(eval),
            label: label.into(),
        }
    }
}

impl<S: Scalar> Integrand<S> for FnIntegrand<S> {
    fn space(&self) -> &Arc<ValueSpace> {
        &self.space
    }

    fn eval(&self, t: &Dyadic) -> VectorValue<S> {
        (self.eval)(t)
    }

    fn class(&self) -> IntegrandClass {
        IntegrandClass::Evaluator
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `φ·χ(E)`, native when the integrand supports it.
pub fn restrict_integrand<S: Scalar>(phi: &IntegrandFn<S>, e: &Region) -> IntegrandFn<S> {
    if *e == Region::unit() {
        return phi.clone();
    }
    phi.restricted(e)
        .unwrap_or_else(|| Arc::new(Restricted::new(phi.clone(), e.clone())))
}
