use std::sync::Arc;
use std::time::Instant;

use gauge_lab::gallery::{half_harmonic, harmonic_blocks, harmonic_blocks_integral};
use gauge_lab::integrand::{Integrand, IntegrandFn};
use gauge_lab::integrators::{lower_norm_integral, mcshane_integrate, McShaneOptions, Status};
use gauge_lab::{Dyadic, Rational};

#[test]
fn harmonic_blocks_match_closed_form() {
    let start = Instant::now();
    let phi: IntegrandFn<Rational> = Arc::new(harmonic_blocks(16).unwrap());
    let opts = McShaneOptions::default().with_tol(Dyadic::pow2_neg(12));
    let est = mcshane_integrate(phi.as_ref(), &opts).unwrap();
    assert_eq!(est.status, Status::Converged);
    let err = est
        .value
        .distance(&harmonic_blocks_integral(16))
        .unwrap()
        .hi;
    assert!(err <= Rational::new(1.into(), 4096.into()), "err {err}");
    eprintln!(
        "R=16 in {:?}, levels {}",
        start.elapsed(),
        est.gauge_trace.len()
    );
}

#[test]
fn harmonic_lower_norm_grows_like_half_harmonic() {
    let mut prev = Rational::from_integer(0.into());
    for n in [5usize, 15, 35, 55] {
        let phi = harmonic_blocks::<Rational>(n).unwrap();
        let v = lower_norm_integral(&phi, n as u32 + 1);
        let exact = half_harmonic::<Rational>(n);
        assert!(v <= exact && &exact - &v < Rational::new(1.into(), (1i64 << 30).into()));
        assert!(v > prev);
        prev = v;
    }
    assert!(prev > Rational::from_integer(2.into()));
    let _ = harmonic_blocks::<f64>(55).unwrap().label();
}
