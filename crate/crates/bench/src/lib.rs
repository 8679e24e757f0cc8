//! Benchmark-only crate; the measurements live in `benches/`. Shared
//! input builders sit here so a future profiling harness can reuse them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ceat_core::stats::{EffectSizeSample, EmbeddingVector, StimulusEmbeddings};
use ceat_core::Document;

/// A seeded set of stimulus embeddings: `n` vectors per target side,
/// `n` per attribute side, `dim` components each.
pub fn random_stimuli(n: usize, dim: usize, seed: u64) -> StimulusEmbeddings {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = |rng: &mut ChaCha8Rng| -> Vec<EmbeddingVector> {
        (0..n)
            .map(|_| {
                EmbeddingVector::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .expect("finite non-empty vector")
            })
            .collect()
    };
    let (x, y, a, b) = (set(&mut rng), set(&mut rng), set(&mut rng), set(&mut rng));
    StimulusEmbeddings::new(x, y, a, b).expect("balanced sets")
}

/// `n` seeded per-sample effect sizes with plausible variances.
pub fn random_samples(n: usize, seed: u64) -> Vec<EffectSizeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            EffectSizeSample::new(rng.random_range(-2.0..2.0), rng.random_range(0.05..2.0), i)
                .expect("positive variance")
        })
        .collect()
}

/// A synthetic document of `paragraphs` four-sentence paragraphs, with a
/// few recurring names and traits for occurrence scanning to find.
pub fn synthetic_document(paragraphs: usize) -> Document {
    let mut text = String::new();
    for i in 0..paragraphs {
        text.push_str(&format!(
            "Paragraph {i} opens with Carlos Ramirez greeting the class. \
             Sarah Thompson answers with an ambitious plan of her own. \
             Everyone agrees the hardworking pair make the project move. \
             The narrator calls the whole exchange independent and warm.\n\n"
        ));
    }
    Document {
        id: "synthetic".to_string(),
        source_path: "synthetic://bench".to_string(),
        text,
    }
}
