//! Integrands, functionals and regions named on the command line.

use std::str::FromStr;
use std::sync::Arc;

use gauge_lab::gallery::{
    build_a_family, build_fat_h, counter_sequence, harmonic_blocks, initial_segments,
    jump_sequence_integrand,
};
use gauge_lab::integrand::{IntegrandFn, PiecewisePoly};
use gauge_lab::integrators::checks::sample_small_regions;
use gauge_lab::sampling;
use gauge_lab::values::{DualFunctional, NormKind, StepDensity, ValueSpace, VectorValue};
use gauge_lab::{Dyadic, Error, Interval, Region, Result, Scalar};
use rand::Rng;

use crate::config::Resolved;

#[derive(Clone, Debug, PartialEq)]
pub enum FnSpec {
    Blocks,
    Segments,
    Jumps,
    Identity,
    /// Real polynomial with dyadic coefficients `c_0, c_1, …`.
    Poly(Vec<Dyadic>),
    /// `2^k·χ_(0,2^-k]`.
    Counter(u32),
}

impl FromStr for FnSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3g" => return Ok(FnSpec::Blocks),
            "3f" => return Ok(FnSpec::Segments),
            "3e" => return Ok(FnSpec::Jumps),
            "identity" => return Ok(FnSpec::Identity),
            "counter" => return Ok(FnSpec::Counter(0)),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("poly:") {
            let coeffs = rest
                .split(',')
                .map(|c| c.trim().parse())
                .collect::<Result<Vec<Dyadic>>>()?;
            if coeffs.is_empty() {
                return Err(Error::Parse("poly needs coefficients".into()));
            }
            return Ok(FnSpec::Poly(coeffs));
        }
        if let Some(k) = s.strip_prefix("counter:") {
            return k
                .parse()
                .map(FnSpec::Counter)
                .map_err(|_| Error::Parse(format!("bad counter index {k:?}")));
        }
        Err(Error::Parse(format!(
            "unknown integrand {s:?} (3g | 3f | 3e | identity | poly:c0,c1,… | counter:k)"
        )))
    }
}

fn real_line() -> Arc<ValueSpace> {
    ValueSpace::finite(1, NormKind::L1)
}

fn poly<S: Scalar>(coeffs: &[Dyadic]) -> Result<PiecewisePoly<S>> {
    let sp = real_line();
    let cs = coeffs
        .iter()
        .map(|c| VectorValue::from_data(&sp, vec![S::from_dyadic(c)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(PiecewisePoly::polynomial(&sp, cs)?.with_label(format!("poly:{}", join(coeffs))))
}

fn join(coeffs: &[Dyadic]) -> String {
    coeffs
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn build<S: Scalar>(spec: &FnSpec, cfg: &Resolved) -> Result<IntegrandFn<S>> {
    Ok(match spec {
        FnSpec::Blocks => Arc::new(harmonic_blocks::<S>(cfg.r_len)?),
        FnSpec::Segments => Arc::new(initial_segments::<S>(cfg.grid)?),
        FnSpec::Jumps => {
            let fat = build_fat_h(cfg.levels, cfg.resolution, cfg.seed)?;
            let fam = build_a_family(&fat, cfg.levels.max(2), cfg.jump_depth, cfg.r_len, &[])?;
            let r = cfg.r_len.min(fam.members.len());
            Arc::new(jump_sequence_integrand::<S>(&fam.members, r)?)
        }
        FnSpec::Identity => {
            Arc::new(poly::<S>(&[Dyadic::zero(), Dyadic::one()])?.with_label("identity"))
        }
        FnSpec::Poly(c) => Arc::new(poly::<S>(c)?),
        FnSpec::Counter(k) => Arc::new(counter_sequence::<S>(*k)?),
    })
}

/// Zero integrand on the real line.
pub fn zero_real<S: Scalar>() -> Result<IntegrandFn<S>> {
    let sp = real_line();
    Ok(Arc::new(
        PiecewisePoly::constant(&sp, VectorValue::zeros(&sp))?.with_label("0"),
    ))
}

const COEFF_BITS: u32 = 8;

fn random_unit<R: Rng>(rng: &mut R) -> Dyadic {
    Dyadic::ratio(
        rng.random_range(-(1i64 << COEFF_BITS)..=(1i64 << COEFF_BITS)),
        COEFF_BITS,
    )
}

/// Coordinates first, then seeded combinations scaled so that the dual norm
/// is at most 1; step pairings for step-function spaces.
pub fn functionals<S: Scalar>(
    space: &ValueSpace,
    count: usize,
    seed: u64,
) -> Result<Vec<DualFunctional<S>>> {
    let mut rng = sampling::stream(seed, 0x6675_6e63);
    let mut out = Vec::with_capacity(count);
    if matches!(space, ValueSpace::StepLInf { .. }) {
        out.push(DualFunctional::step_pairing(StepDensity::constant(
            S::one(),
        ))?);
        while out.len() < count {
            let pieces = rng.random_range(1..=6usize);
            let mut breaks: Vec<Dyadic> = (0..pieces - 1)
                .map(|_| random_unit(&mut rng).abs())
                .collect();
            breaks.push(Dyadic::zero());
            breaks.push(Dyadic::one());
            breaks.sort();
            breaks.dedup();
            let values = (1..breaks.len())
                .map(|_| S::from_dyadic(&random_unit(&mut rng)))
                .collect();
            out.push(DualFunctional::step_pairing(StepDensity {
                breaks,
                values,
            })?);
        }
        return Ok(out);
    }
    let dim = space.dim();
    for n in 0..dim.min(count.div_ceil(2)) {
        out.push(DualFunctional::coordinate(n));
    }
    let scale_exp = usize::BITS - (dim.max(1) - 1).leading_zeros();
    let scale = Dyadic::pow2_neg(scale_exp);
    while out.len() < count {
        let coeffs = (0..dim)
            .map(|_| S::from_dyadic(&(&random_unit(&mut rng) * &scale)))
            .collect();
        out.push(DualFunctional::combination(space, coeffs)?);
    }
    Ok(out)
}

/// `[0,1]`, `[0,1/2]`, `[1/4,3/4]`, then seeded unions of small intervals.
pub fn regions(count: usize, seed: u64) -> Vec<Region> {
    let half = Dyadic::ratio(1, 1);
    let mut out = vec![
        Region::unit(),
        Region::span(Dyadic::zero(), half),
        Region::span(Dyadic::ratio(1, 2), Dyadic::ratio(3, 2)),
    ];
    let mut i = 0u32;
    while out.len() < count {
        let eta = Dyadic::pow2_neg(1 + i % 4);
        for r in sample_small_regions(&eta, 1, seed.wrapping_add(i as u64))
            .into_iter()
            .skip(2)
        {
            out.push(r);
        }
        i += 1;
    }
    out.truncate(count.max(1));
    out
}

/// `[2^-(n+1), 2^-n]` for `n < count`.
pub fn dyadic_blocks(count: usize) -> Vec<Interval> {
    (0..count).map(gauge_lab::gallery::harmonic_block).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_parse() {
        assert_eq!("3g".parse::<FnSpec>().unwrap(), FnSpec::Blocks);
        assert_eq!("counter:5".parse::<FnSpec>().unwrap(), FnSpec::Counter(5));
        assert!(
            matches!("poly:1,1/2^1".parse::<FnSpec>().unwrap(), FnSpec::Poly(c) if c.len() == 2)
        );
        assert!("nosuch".parse::<FnSpec>().is_err());
    }

    #[test]
    fn functional_families_are_admissible() {
        let l2 = ValueSpace::seq_l2(7);
        let fs = functionals::<f64>(&l2, 20, 1).unwrap();
        assert_eq!(fs.len(), 20);
        let steps = ValueSpace::uniform_steps(4);
        assert_eq!(functionals::<f64>(&steps, 20, 1).unwrap().len(), 20);
        assert_eq!(regions(20, 3).len(), 20);
    }
}
