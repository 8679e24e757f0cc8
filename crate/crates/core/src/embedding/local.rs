//! Deterministic local embedding provider.
//!
//! Vectors are a pure function of (text, seed): the pair is hashed with
//! SHA-256, the digest seeds a ChaCha stream, components are drawn
//! uniformly from [-1, 1], and the vector is normalized to unit length.
//! No floating-point behavior here depends on platform, so the same inputs
//! give bit-identical vectors everywhere — which is what makes fully
//! offline, golden-file audit runs possible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{EmbeddingError, EmbeddingProvider};
use crate::stats::EmbeddingVector;

/// Embeds `text` deterministically. `dimension` must be at least 2 (a
/// 1-dimensional space makes every cosine ±1).
pub fn deterministic_local_embed(text: &str, dimension: usize, seed: u64) -> EmbeddingVector {
    assert!(dimension >= 2, "local embedding dimension must be >= 2");
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher.update([0x00]);
    hasher.update(seed.to_le_bytes());
    let digest = hasher.finalize();
    let mut rng_seed = [0u8; 32];
    rng_seed.copy_from_slice(&digest);
    let mut rng = ChaCha8Rng::from_seed(rng_seed);

    loop {
        let components: Vec<f64> = (0..dimension)
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        let vector = EmbeddingVector::new(components).expect("uniform draws are finite");
        // an (astronomically unlikely) near-zero draw is redrawn rather
        // than amplified into a garbage direction
        if vector.norm() > 1e-9 {
            return vector.normalized().expect("norm checked above");
        }
    }
}

/// Provider wrapper around [`deterministic_local_embed`] with a fixed
/// dimension and seed.
#[derive(Debug, Clone, Copy)]
pub struct LocalProvider {
    dimension: usize,
    seed: u64,
}

impl LocalProvider {
    pub fn new(dimension: usize, seed: u64) -> Self {
        assert!(dimension >= 2, "local embedding dimension must be >= 2");
        Self { dimension, seed }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

impl EmbeddingProvider for LocalProvider {
    fn embed(&self, inputs: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        Ok(inputs
            .iter()
            .map(|text| deterministic_local_embed(text, self.dimension, self.seed))
            .collect())
    }
}
