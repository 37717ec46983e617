//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, stream, replica, particle, step, lane)`,
//! computed with the Philox4x32-10 bijection. There is no generator state, so
//! replicas can be stepped in any order or on any number of threads and still
//! see the same increments, and two systems (the particle system and its
//! independent projection) can be driven by exactly the same Brownian noise.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Stream tags keep unrelated uses of one seed apart.
pub mod stream {
    pub const DYNAMICS: u16 = 0;
    pub const INITIAL: u16 = 1;
    pub const BERNOULLI: u16 = 2;
    pub const CUT_SEARCH: u16 = 3;
    pub const SAMPLING: u16 = 4;
}

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with ten rounds.
#[inline]
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

#[inline]
fn unit_open(hi: u32, lo: u32) -> f64 {
    let bits = (((hi as u64) << 32) | lo as u64) >> 11;
    (bits as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Stateless generator keyed by a 64-bit seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: [u32; 2],
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: [seed as u32, (seed >> 32) as u32],
        }
    }

    #[inline]
    fn block(&self, stream: u16, replica: u32, particle: u32, step: u32, lane: u16) -> [u32; 4] {
        let tag = ((stream as u32) << 16) | lane as u32;
        philox4x32_10([step, tag, particle, replica], self.key)
    }

    /// Two independent uniforms on the open interval (0, 1).
    #[inline]
    pub fn uniforms(&self, stream: u16, replica: u32, particle: u32, step: u32, lane: u16) -> [f64; 2] {
        let b = self.block(stream, replica, particle, step, lane);
        [unit_open(b[0], b[1]), unit_open(b[2], b[3])]
    }

    /// Two independent standard normals (Box-Muller on one Philox block).
    #[inline]
    pub fn normals(&self, stream: u16, replica: u32, particle: u32, step: u32, lane: u16) -> [f64; 2] {
        let [u1, u2] = self.uniforms(stream, replica, particle, step, lane);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        [r * c, r * s]
    }

    /// Standard normal for one coordinate; coordinates `2l` and `2l + 1` share lane `l`.
    #[inline]
    pub fn normal(&self, stream: u16, replica: u32, particle: u32, step: u32, coord: usize) -> f64 {
        self.normals(stream, replica, particle, step, (coord / 2) as u16)[coord % 2]
    }

    #[inline]
    pub fn uniform(&self, stream: u16, replica: u32, particle: u32, step: u32) -> f64 {
        self.uniforms(stream, replica, particle, step, 0)[0]
    }
}
