use std::time::Instant;

use gauge_lab::gallery::{build_fat_h, oscillation_witness, verify_tags, SumMode, WitnessOptions};
use gauge_lab::gauge::Gauge;
use num_rational::BigRational;

#[test]
fn desk_witness_for_three_seeds() {
    let fat = build_fat_h(4, 4, 0).unwrap();
    let gauge = Gauge::constant(BigRational::new(1.into(), 5.into())).unwrap();
    for seed in [11, 12, 13] {
        let start = Instant::now();
        let opts = WitnessOptions {
            seed,
            ..WitnessOptions::default()
        };
        let w = oscillation_witness(&fat, &gauge, &opts).unwrap();
        assert!(w.certified(), "seed {seed}: {w:?}");
        assert_eq!((w.k, w.m), (8, 8));
        assert!(verify_tags(fat.top(), &w.tags_t, SumMode::SumsOut));
        assert!(verify_tags(fat.top(), &w.tags_u, SumMode::SumsIn));
        assert!(w.gap >= BigRational::new(7.into(), 8.into()));
        eprintln!("seed {seed}: gap {} in {:?}", w.gap, start.elapsed());
    }
}
