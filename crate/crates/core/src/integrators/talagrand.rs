//! Empirical-mean integration: batch means of `φ` at i.i.d. uniform points.

use rayon::prelude::*;
use serde::Serialize;

use crate::integrand::Integrand;
use crate::report::ser_num;
use crate::sampling;
use crate::scalar::Scalar;
use crate::values::VectorValue;

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct BatchMean<S: Scalar> {
    pub batch: u64,
    pub mean: VectorValue<S>,
    /// Sample standard deviation of `‖φ(s_i) − mean‖₂` (Euclidean norm of
    /// the coordinates), in `f64`.
    pub sigma: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct TalagrandReport<S: Scalar> {
    pub seed: u64,
    pub n: usize,
    pub batches: Vec<BatchMean<S>>,
    pub pooled: VectorValue<S>,
    /// Largest distance between two batch means.
    #[serde(serialize_with = "ser_num")]
    pub spread: S,
}

fn euclid_sq<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.to_f64() * x.to_f64()).sum()
}

/// Batch `b` draws its `n` points from stream `(seed, b)`; batches run in
/// parallel and are reduced in index order.
pub fn talagrand_integrate<S: Scalar>(
    phi: &dyn Integrand<S>,
    seed: u64,
    n: usize,
    batches: usize,
) -> TalagrandReport<S> {
    let n = n.max(1);
    let inv_n = S::one() / S::from_int(n as i64);
    let means: Vec<BatchMean<S>> = (0..batches as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = sampling::stream(seed, b);
            let mut sum = VectorValue::zeros(phi.space());
            let mut sq = 0.0;
            for _ in 0..n {
                let v = phi.eval(&sampling::unit_dyadic(&mut rng));
                sq += euclid_sq(v.data());
                sum.add_scaled(&S::one(), &v)
                    .expect("values share the integrand's space");
            }
            let mean = sum.scale(&inv_n);
            let var = if n > 1 {
                ((sq - n as f64 * euclid_sq(mean.data())) / (n as f64 - 1.0)).max(0.0)
            } else {
                0.0
            };
            BatchMean {
                batch: b,
                mean,
                sigma: var.sqrt(),
            }
        })
        .collect();

    let mut pooled = VectorValue::zeros(phi.space());
    for m in &means {
        pooled.add_scaled(&S::one(), &m.mean).expect("same space");
    }
    if !means.is_empty() {
        pooled = pooled.scale(&(S::one() / S::from_int(means.len() as i64)));
    }
    let mut spread = S::zero();
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            spread = spread.max_of(
                means[i]
                    .mean
                    .distance(&means[j].mean)
                    .expect("same space")
                    .hi,
            );
        }
    }
    TalagrandReport {
        seed,
        n,
        batches: means,
        pooled,
        spread,
    }
}
