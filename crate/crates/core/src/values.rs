//! Target spaces, their vectors, and finite norming families of functionals.

use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    LInf,
}

/// The Banach space a vector-valued integrand takes values in, truncated to
/// finitely many coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ValueSpace {
    FiniteDim {
        dim: usize,
        norm: NormKind,
    },
    /// First `len` coordinates of ℓ².
    SeqL2 {
        len: usize,
    },
    /// First `len` coordinates of ℓ^∞.
    SeqSup {
        len: usize,
    },
    /// Step functions on `[0,1]` constant on the cells of `grid`
    /// (breakpoints including 0 and 1), with the essential-sup norm.
    StepLInf {
        grid: Vec<Dyadic>,
    },
}

impl ValueSpace {
    pub fn finite(dim: usize, norm: NormKind) -> Arc<Self> {
        Arc::new(ValueSpace::FiniteDim { dim, norm })
    }

    pub fn seq_l2(len: usize) -> Arc<Self> {
        Arc::new(ValueSpace::SeqL2 { len })
    }

    pub fn seq_sup(len: usize) -> Arc<Self> {
        Arc::new(ValueSpace::SeqSup { len })
    }

    /// Uniform step grid with `2^depth` cells.
    pub fn uniform_steps(depth: u32) -> Arc<Self> {
        let grid = (0..=(1i64 << depth))
            .map(|j| Dyadic::ratio(j, depth))
            .collect();
        Arc::new(ValueSpace::StepLInf { grid })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ValueSpace::FiniteDim { dim, .. } if *dim == 0 => Err(Error::InvalidParameter(
                "finite-dimensional space needs dim >= 1".into(),
            )),
            ValueSpace::SeqL2 { len } | ValueSpace::SeqSup { len } if *len == 0 => Err(
                Error::InvalidParameter("sequence truncation needs R >= 1".into()),
            ),
            ValueSpace::StepLInf { grid } => {
                let ok = grid.len() >= 2
                    && grid[0].is_zero()
                    && grid[grid.len() - 1] == Dyadic::one()
                    && grid.windows(2).all(|w| w[0] < w[1]);
                if ok {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(
                        "step grid must increase from 0 to 1".into(),
                    ))
                }
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ValueSpace::FiniteDim { dim, .. } => *dim,
            ValueSpace::SeqL2 { len } | ValueSpace::SeqSup { len } => *len,
            ValueSpace::StepLInf { grid } => grid.len() - 1,
        }
    }

    pub fn norm_kind(&self) -> NormKind {
        match self {
            ValueSpace::FiniteDim { norm, .. } => *norm,
            ValueSpace::SeqL2 { .. } => NormKind::L2,
            ValueSpace::SeqSup { .. } | ValueSpace::StepLInf { .. } => NormKind::LInf,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ValueSpace::FiniteDim { dim, norm } => format!("R^{dim} ({norm:?})"),
            ValueSpace::SeqL2 { len } => format!("l2[{len}]"),
            ValueSpace::SeqSup { len } => format!("linf[{len}]"),
            ValueSpace::StepLInf { grid } => format!("Linf-steps[{}]", grid.len() - 1),
        }
    }
}

fn same_space(a: &Arc<ValueSpace>, b: &Arc<ValueSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Lower and upper bounds on a norm. Exact norms have `lo == hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormEnclosure<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> NormEnclosure<S> {
    pub fn exact(v: S) -> Self {
        NormEnclosure {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

#[derive(Clone, PartialEq)]
pub struct VectorValue<S> {
    space: Arc<ValueSpace>,
    data: Vec<S>,
}

impl<S: Scalar> VectorValue<S> {
    pub fn zeros(space: &Arc<ValueSpace>) -> Self {
        VectorValue {
            space: space.clone(),
            data: vec![S::zero(); space.dim()],
        }
    }

    pub fn from_data(space: &Arc<ValueSpace>, data: Vec<S>) -> Result<Self> {
        if data.len() != space.dim() {
            return Err(Error::SpaceMismatch(format!(
                "{} coordinates given for {}",
                data.len(),
                space.label()
            )));
        }
        Ok(VectorValue {
            space: space.clone(),
            data,
        })
    }

    /// The `n`-th unit vector.
    pub fn unit(space: &Arc<ValueSpace>, n: usize) -> Result<Self> {
        let mut v = Self::zeros(space);
        let slot = v
            .data
            .get_mut(n)
            .ok_or_else(|| Error::SpaceMismatch(format!("coordinate {n} out of range")))?;
        *slot = S::one();
        Ok(v)
    }

    pub fn space(&self) -> &Arc<ValueSpace> {
        &self.space
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space.label(),
                other.space.label()
            )))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(VectorValue {
            space: self.space.clone(),
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(VectorValue {
            space: self.space.clone(),
            data,
        })
    }

    pub fn scale(&self, k: &S) -> Self {
        VectorValue {
            space: self.space.clone(),
            data: self.data.iter().map(|a| a.clone() * k.clone()).collect(),
        }
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, k: &S, other: &Self) -> Result<()> {
        self.check(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a = a.clone() + k.clone() * b.clone();
            }
        }
        Ok(())
    }

    /// `α·self + β·other`.
    pub fn lin_comb(&self, alpha: &S, other: &Self, beta: &S) -> Result<Self> {
        let mut out = self.scale(alpha);
        out.add_scaled(beta, other)?;
        Ok(out)
    }

    pub fn norm(&self) -> NormEnclosure<S> {
        match self.space.norm_kind() {
            NormKind::L1 => {
                NormEnclosure::exact(self.data.iter().fold(S::zero(), |acc, x| acc + x.abs()))
            }
            NormKind::LInf => NormEnclosure::exact(
                self.data
                    .iter()
                    .fold(S::zero(), |acc, x| acc.max_of(x.abs())),
            ),
            NormKind::L2 => {
                // A single non-zero coordinate has an exact norm.
                let mut nz = self.data.iter().filter(|x| !x.is_zero());
                if let (Some(x), None) = (nz.next(), nz.next()) {
                    return NormEnclosure::exact(x.abs());
                }
                let sq = self
                    .data
                    .iter()
                    .fold(S::zero(), |acc, x| acc + x.clone() * x.clone());
                let (lo, hi) = sq.sqrt_enclosure();
                NormEnclosure { lo, hi }
            }
        }
    }

    pub fn distance(&self, other: &Self) -> Result<NormEnclosure<S>> {
        Ok(self.sub(other)?.norm())
    }

    pub fn convert<T: Scalar>(&self) -> VectorValue<T> {
        VectorValue {
            space: self.space.clone(),
            data: self
                .data
                .iter()
                .map(|x| match x.to_rational() {
                    Some(q) => T::from_rational(&q),
                    None => T::zero(),
                })
                .collect(),
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for VectorValue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.space.label(), self.data)
    }
}

/// A step density on `[0,1]`: `values[j]` on `[breaks[j], breaks[j+1]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDensity<S> {
    pub breaks: Vec<Dyadic>,
    pub values: Vec<S>,
}

impl<S: Scalar> StepDensity<S> {
    pub fn constant(v: S) -> Self {
        StepDensity {
            breaks: vec![Dyadic::zero(), Dyadic::one()],
            values: vec![v],
        }
    }

    pub fn l1_norm(&self) -> S {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .fold(S::zero(), |acc, (w, v)| {
                acc + S::from_dyadic(&(&w[1] - &w[0])) * v.abs()
            })
    }

    /// `∫ g` over each consecutive cell of a sorted grid, in one sweep.
    pub fn cell_integrals(&self, grid: &[Dyadic]) -> Vec<S> {
        let mut out = Vec::with_capacity(grid.len().saturating_sub(1));
        let mut k = 0;
        for cell in grid.windows(2) {
            while k + 1 < self.breaks.len() && self.breaks[k + 1] <= cell[0] {
                k += 1;
            }
            let mut acc = S::zero();
            let mut j = k;
            while j + 1 < self.breaks.len() && self.breaks[j] < cell[1] {
                let a = (&self.breaks[j]).max(&cell[0]);
                let b = (&self.breaks[j + 1]).min(&cell[1]);
                if a < b {
                    acc = acc + S::from_dyadic(&(b - a)) * self.values[j].clone();
                }
                j += 1;
            }
            out.push(acc);
        }
        out
    }

    /// `∫_{[lo,hi]} g`.
    pub fn integral_over(&self, lo: &Dyadic, hi: &Dyadic) -> S {
        let mut acc = S::zero();
        for (w, v) in self.breaks.windows(2).zip(&self.values) {
            let a = w[0].clone().max(lo.clone());
            let b = w[1].clone().min(hi.clone());
            if a < b {
                acc = acc + S::from_dyadic(&(b - a)) * v.clone();
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionalKind<S> {
    Coordinate(usize),
    Combination(Vec<S>),
    StepPairing(StepDensity<S>),
}

/// Step-pairing weights for the last space they were computed on.
type WeightCache<S> = Arc<Mutex<Option<(ValueSpace, Arc<Vec<S>>)>>>;

/// An element of the dual unit ball, given explicitly.
#[derive(Clone, Debug)]
pub struct DualFunctional<S> {
    kind: FunctionalKind<S>,
    norm_bound: S,
    cache: WeightCache<S>,
}

impl<S: PartialEq> PartialEq for DualFunctional<S> {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.norm_bound == other.norm_bound
    }
}

impl<S: Scalar> DualFunctional<S> {
    pub fn coordinate(n: usize) -> Self {
        DualFunctional {
            kind: FunctionalKind::Coordinate(n),
            norm_bound: S::one(),
            cache: WeightCache::default(),
        }
    }

    /// `v ↦ Σ c_i v_i`; rejected when its dual norm exceeds 1.
    pub fn combination(space: &ValueSpace, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::IncompatibleFunctional(format!(
                "{} coefficients for {}",
                coeffs.len(),
                space.label()
            )));
        }
        if matches!(space, ValueSpace::StepLInf { .. }) {
            // Coefficients act on cell levels; the dual norm is the weighted l1 norm.
            return Err(Error::IncompatibleFunctional(
                "use a step pairing for step-function spaces".into(),
            ));
        }
        let dual = match space.norm_kind() {
            NormKind::L1 => coeffs.iter().fold(S::zero(), |acc, c| acc.max_of(c.abs())),
            NormKind::LInf => coeffs.iter().fold(S::zero(), |acc, c| acc + c.abs()),
            NormKind::L2 => {
                let sq = coeffs
                    .iter()
                    .fold(S::zero(), |acc, c| acc + c.clone() * c.clone());
                sq.sqrt_enclosure().1
            }
        };
        if dual > S::one() {
            return Err(Error::IncompatibleFunctional(format!(
                "dual norm {:.6} exceeds 1",
                dual.to_f64()
            )));
        }
        Ok(DualFunctional {
            kind: FunctionalKind::Combination(coeffs),
            norm_bound: dual,
            cache: WeightCache::default(),
        })
    }

    pub fn zero(space: &ValueSpace) -> Self {
        DualFunctional {
            kind: FunctionalKind::Combination(vec![S::zero(); space.dim()]),
            norm_bound: S::zero(),
            cache: WeightCache::default(),
        }
    }

    /// `u ↦ ∫ g·u` on a step-function space; requires `‖g‖₁ ≤ 1`.
    pub fn step_pairing(density: StepDensity<S>) -> Result<Self> {
        let ok_breaks = density.breaks.len() == density.values.len() + 1
            && density.breaks.first().is_some_and(|b| b.is_zero())
            && density.breaks.last().is_some_and(|b| *b == Dyadic::one())
            && density.breaks.windows(2).all(|w| w[0] < w[1]);
        if !ok_breaks {
            return Err(Error::IncompatibleFunctional(
                "malformed step density".into(),
            ));
        }
        let l1 = density.l1_norm();
        if l1 > S::one() {
            return Err(Error::IncompatibleFunctional(format!(
                "density L1 norm {:.6} exceeds 1",
                l1.to_f64()
            )));
        }
        Ok(DualFunctional {
            kind: FunctionalKind::StepPairing(density),
            norm_bound: l1,
            cache: WeightCache::default(),
        })
    }

    pub fn kind(&self) -> &FunctionalKind<S> {
        &self.kind
    }

    pub fn norm_bound(&self) -> &S {
        &self.norm_bound
    }

    pub fn is_compatible(&self, space: &ValueSpace) -> bool {
        match &self.kind {
            FunctionalKind::Coordinate(n) => *n < space.dim(),
            FunctionalKind::Combination(c) => c.len() == space.dim(),
            FunctionalKind::StepPairing(_) => matches!(space, ValueSpace::StepLInf { .. }),
        }
    }

    /// Linear weights `w` with `f(v) = Σ w_i v_i` on the given space.
    pub fn weights(&self, space: &ValueSpace) -> Result<Vec<S>> {
        if !self.is_compatible(space) {
            return Err(Error::IncompatibleFunctional(format!(
                "{} on {}",
                self.describe(),
                space.label()
            )));
        }
        Ok(match (&self.kind, space) {
            (FunctionalKind::Coordinate(n), _) => {
                let mut w = vec![S::zero(); space.dim()];
                w[*n] = S::one();
                w
            }
            (FunctionalKind::Combination(c), _) => c.clone(),
            (FunctionalKind::StepPairing(g), ValueSpace::StepLInf { grid }) => {
                let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
                match cache.as_ref() {
                    Some((sp, w)) if sp == space => w.as_ref().clone(),
                    _ => {
                        let w = Arc::new(g.cell_integrals(grid));
                        *cache = Some((space.clone(), w.clone()));
                        w.as_ref().clone()
                    }
                }
            }
            (FunctionalKind::StepPairing(_), _) => unreachable!("checked by is_compatible"),
        })
    }

    pub fn apply(&self, v: &VectorValue<S>) -> Result<S> {
        match &self.kind {
            FunctionalKind::Coordinate(n) => v.data().get(*n).cloned().ok_or_else(|| {
                Error::IncompatibleFunctional(format!("coordinate {n} on {}", v.space().label()))
            }),
            _ => {
                let w = self.weights(v.space())?;
                Ok(S::dot(&w, v.data()))
            }
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            FunctionalKind::Coordinate(n) => format!("coord({n})"),
            FunctionalKind::Combination(c) => format!("comb[{}]", c.len()),
            FunctionalKind::StepPairing(g) => format!("pairing[{}]", g.values.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    #[test]
    fn sup_norm_of_two_units() {
        let sp = ValueSpace::seq_sup(4);
        let v = VectorValue::<Q>::unit(&sp, 0)
            .unwrap()
            .add(&VectorValue::unit(&sp, 1).unwrap())
            .unwrap();
        assert_eq!(v.norm(), NormEnclosure::exact(q(1, 1)));
        assert_eq!(
            VectorValue::<Q>::zeros(&sp).norm(),
            NormEnclosure::exact(q(0, 1))
        );
    }

    #[test]
    fn pythagorean_enclosure() {
        let sp = ValueSpace::finite(2, NormKind::L2);
        let v = VectorValue::from_data(&sp, vec![q(3, 1), q(4, 1)]).unwrap();
        assert_eq!(v.norm(), NormEnclosure::exact(q(5, 1)));
    }

    #[test]
    fn space_mismatch_is_an_error() {
        let a = VectorValue::<Q>::zeros(&ValueSpace::seq_sup(3));
        let b = VectorValue::<Q>::zeros(&ValueSpace::seq_l2(3));
        assert!(matches!(a.add(&b), Err(Error::SpaceMismatch(_))));
        assert!(VectorValue::<Q>::from_data(&ValueSpace::seq_l2(2), vec![q(1, 1)]).is_err());
    }

    #[test]
    fn apply_examples() {
        let sp = ValueSpace::seq_l2(4);
        let e2 = VectorValue::<Q>::unit(&sp, 2).unwrap();
        assert_eq!(DualFunctional::coordinate(2).apply(&e2).unwrap(), q(1, 1));
        let f = DualFunctional::combination(&sp, vec![q(1, 2), q(1, 2), q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(f.apply(&VectorValue::zeros(&sp)).unwrap(), q(0, 1));

        let steps = ValueSpace::uniform_steps(1);
        let chi_left = VectorValue::from_data(&steps, vec![q(1, 1), q(0, 1)]).unwrap();
        let pairing = DualFunctional::step_pairing(StepDensity::constant(q(1, 1))).unwrap();
        assert_eq!(pairing.apply(&chi_left).unwrap(), q(1, 2));
    }

    #[test]
    fn functional_norm_checks() {
        let l2 = ValueSpace::SeqL2 { len: 2 };
        assert!(DualFunctional::combination(&l2, vec![q(1, 1), q(1, 1)]).is_err());
        assert!(DualFunctional::combination(&l2, vec![q(3, 5), q(4, 5)]).is_ok());
        let sup = ValueSpace::SeqSup { len: 2 };
        assert!(DualFunctional::combination(&sup, vec![q(1, 2), q(1, 2)]).is_ok());
        assert!(DualFunctional::combination(&sup, vec![q(1, 2), q(3, 4)]).is_err());
        assert!(DualFunctional::step_pairing(StepDensity::constant(q(2, 1))).is_err());
        assert!(!DualFunctional::<Q>::coordinate(5).is_compatible(&sup));
    }
}
