//! Splittable counter-based random number generation.
//!
//! Monte Carlo here must be reproducible under arbitrary parallel scheduling,
//! so instead of a stateful generator shared across threads, every draw is a
//! pure function `mix(key, counter)` of a stream key and a counter. Streams
//! are derived by hashing (parent key, child id), giving a tree of
//! statistically independent streams: one per ensemble member, one per
//! rejection attempt, and so on. Two properties the experiments lean on:
//!
//! * order independence — results depend only on (master seed, index), never
//!   on thread interleaving;
//! * mode-keyed coupling — Gaussian field draws are indexed by the mode
//!   itself, so the same ω populates every truncation level of a scan.
//!
//! The mixer is the SplitMix64 finalizer, which is bijective per key and
//! passes standard statistical batteries when driven by a golden-ratio
//! counter walk. Cross-language bit-compatibility is a non-goal; determinism
//! within this implementation is the contract.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const CHILD_SALT: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An immutable stream key; draws are addressed by counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

impl Stream {
    /// Root stream of a run.
    pub fn from_seed(master_seed: u64) -> Self {
        Stream {
            key: mix(master_seed ^ GOLDEN),
        }
    }

    /// Derived child stream; children with distinct ids are independent, and
    /// none collides with the parent's own counter space.
    pub fn child(&self, id: u64) -> Self {
        Stream {
            key: mix(self.key ^ mix(id.wrapping_add(1).wrapping_mul(CHILD_SALT))),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// The raw draw: uniform u64 at a counter position.
    #[inline]
    pub fn gen_u64(&self, counter: u64) -> u64 {
        mix(self.key.wrapping_add(counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in [0, 1), 53-bit resolution.
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        (self.gen_u64(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a logarithm argument.
    #[inline]
    pub fn uniform_open(&self, counter: u64) -> f64 {
        ((self.gen_u64(counter) >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Pair of independent standard normals from counters (c, c+1)
    /// (Box–Muller).
    #[inline]
    pub fn normal_pair(&self, counter: u64) -> (f64, f64) {
        let u1 = self.uniform_open(counter);
        let u2 = self.uniform(counter + 1);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Stateful cursor over this stream for sequential consumption.
    pub fn walker(&self) -> Walker {
        Walker {
            stream: *self,
            counter: 0,
        }
    }
}

/// Sequential view of a stream: an ordinary RNG interface that remembers its
/// counter position.
#[derive(Clone, Debug)]
pub struct Walker {
    stream: Stream,
    counter: u64,
}

impl Walker {
    pub fn next_u64(&mut self) -> u64 {
        let x = self.stream.gen_u64(self.counter);
        self.counter += 1;
        x
    }

    pub fn uniform(&mut self) -> f64 {
        let x = self.stream.uniform(self.counter);
        self.counter += 1;
        x
    }

    pub fn normal_pair(&mut self) -> (f64, f64) {
        let p = self.stream.normal_pair(self.counter);
        self.counter += 2;
        p
    }

    /// Uniform integer in [lo, hi] (modulo reduction; the ≤ 2⁻⁵³ bias is
    /// irrelevant for query sampling and keeps the draw one word).
    pub fn uniform_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }
}

/// Injective map Z → N used to key per-mode draws: 0, 1, −1, 2, −2, … ↦
/// 0, 2, 1, 4, 3, … so a mode's draws do not depend on the truncation level.
#[inline]
pub fn zigzag(n: i64) -> u64 {
    if n >= 0 {
        2 * n as u64
    } else {
        (-2 * n - 1) as u64
    }
}
