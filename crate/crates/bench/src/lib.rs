//! Shared fixtures for the benchmarks under `benches/`.

use jointtrack::synth::synth_sequence;
use jointtrack::{default_topology, FieldStack, SceneConfig, SequenceAnnotation, SynthConfig};

/// A seeded, well-separated scene and its synthesized fields.
pub fn scene(people: u32, frames: u32) -> (SequenceAnnotation, Vec<FieldStack>) {
    let cfg = SceneConfig {
        seed: 11,
        num_people: (people, people),
        distance_range: (4.0, 12.0),
        speed_range: (4.0, 10.0),
        duration: frames,
        min_gap: 80.0,
        keep_in_frame: true,
        ..Default::default()
    };
    let seq = jointtrack::simgen::generate(&cfg);
    let stacks = synth_sequence(&seq, &default_topology(), &SynthConfig::default())
        .expect("generated scenes synthesize");
    (seq, stacks)
}
