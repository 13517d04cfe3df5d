//! Labelled, splittable random streams.
//!
//! A stream is identified by a 256-bit key. The root key is derived from a
//! 64-bit seed; child keys are `SHA-256(parent_key || label)`. Deriving a
//! child never touches the parent's generator state, so concurrent workers
//! can each take a child by label and draw without coordination, and the
//! draws are identical to any sequential execution.

use rand::distr::{Distribution, Open01, StandardUniform};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::Scalar;

#[derive(Clone, Debug)]
pub struct RngStream {
    key: [u8; 32],
    label: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"tbo-root");
        hasher.update(seed.to_le_bytes());
        Self::from_key(hasher.finalize().into(), String::new())
    }

    fn from_key(key: [u8; 32], label: String) -> Self {
        Self {
            key,
            label,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Independent stream derived from this stream's key and `label`.
    pub fn child(&self, label: impl AsRef<str>) -> Self {
        let label = label.as_ref();
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        let path = if self.label.is_empty() {
            label.to_owned()
        } else {
            format!("{}/{}", self.label, label)
        };
        Self::from_key(hasher.finalize().into(), path)
    }

    /// Slash-separated path of labels from the root.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform<S: Scalar>(&mut self) -> S {
        let u: f64 = StandardUniform.sample(&mut self.rng);
        S::of(u)
    }

    /// Uniform draw in the open interval `(0, 1)`.
    pub fn uniform_open<S: Scalar>(&mut self) -> S {
        let u: f64 = Open01.sample(&mut self.rng);
        S::of(u)
    }

    /// Uniform draw in `[low, high]`.
    pub fn uniform_between<S: Scalar>(&mut self, low: S, high: S) -> S {
        let value = low + (high - low) * self.uniform::<S>();
        value.max(low).min(high)
    }

    pub fn index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        (self.rng.next_u64() % len as u64) as usize
    }

    pub fn sample<T, D: Distribution<T>>(&mut self, dist: &D) -> T {
        dist.sample(&mut self.rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
