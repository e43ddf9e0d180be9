//! Constructive examples: fat sets and tag searches, jump-function
//! families, and the closed-form integrands used by the harnesses.

pub mod examples;
pub mod family;
pub mod fat;

pub use examples::{
    counter_sequence, half_harmonic, harmonic_block, harmonic_blocks, harmonic_blocks_integral,
    harmonic_cover, harmonic_tail_norm, initial_segments, truncation_sequence, InitialSegments,
    TruncationSequence, DEFAULT_SEGMENT_GRID,
};
pub use family::{
    build_a_family, jump_sequence_integrand, oscillation_witness, random_b_sample, targeted_member,
    AFamily, JumpFunction, OscillationWitness, WitnessOptions,
};
pub use fat::{build_fat_h, doubled_unit, pair_sum_tags, verify_tags, FatSet, SumMode};
