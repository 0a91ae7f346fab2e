use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A reproducible Gaussian stream addressed by `(seed, stream_id)`.
///
/// Streams with distinct ids are independent ChaCha8 streams over the same key, so
/// every replica can own one regardless of how replicas are scheduled on threads.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A standard normal draw.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// A uniform draw on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    /// Fills `out` with i.i.d. `N(0, dt)` entries.
    pub fn fill_increments(&mut self, out: &mut [f64], dt: f64) {
        let scale = dt.sqrt();
        for o in out.iter_mut() {
            *o = scale * self.normal();
        }
    }
}

/// `J × d` Brownian increments `ΔW ~ N(0, dt·I)`, row-major.
pub fn gaussian_increments(stream: &mut RngStream, count: usize, dim: usize, dt: f64) -> Vec<f64> {
    let mut out = vec![0.0; count * dim];
    stream.fill_increments(&mut out, dt);
    out
}
