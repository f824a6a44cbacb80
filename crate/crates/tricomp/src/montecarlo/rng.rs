//! Deterministic stream derivation.
//!
//! Every random quantity in a simulation is keyed by (master seed, purpose
//! tag, index path). Streams for bulk draws are ChaCha8 generators whose
//! keys come from a SplitMix64 absorb chain; scalar draws (per-station
//! fading, per-group marks) are pure functions of their key path, which
//! makes them common random numbers across schemes and interference models
//! and makes every estimate independent of worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn absorb(state: u64, value: u64) -> u64 {
    let mut s = state ^ value.wrapping_mul(0xD1B5_4A32_D192_ED03);
    splitmix_next(&mut s);
    s
}

/// Purpose of a derived stream; distinct tags give unrelated streams even
/// for identical index paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    /// Station process realization, path [realization].
    Ppp = 1,
    /// Per-drop placement and auxiliary choices, path [realization, drop].
    Drop = 2,
    /// Per-station serving-link fading, path [realization, drop, station, antenna].
    Gain = 3,
    /// Interference marks, path [realization, drop, station-or-group].
    Mark = 4,
}

fn chain_state(master: u64, tag: StreamTag, path: &[u64]) -> u64 {
    let mut s = absorb(master, tag as u64);
    for &v in path {
        s = absorb(s, v);
    }
    s
}

/// Bulk generator for the given key path.
pub fn stream(master: u64, tag: StreamTag, path: &[u64]) -> ChaCha8Rng {
    let mut s = chain_state(master, tag, path);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix_next(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw in the open interval (0, 1), a pure function of the path.
pub fn keyed_uniform(master: u64, tag: StreamTag, path: &[u64]) -> f64 {
    let mut s = chain_state(master, tag, path);
    ((splitmix_next(&mut s) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Unit-mean exponential draw, a pure function of the path.
pub fn keyed_exp(master: u64, tag: StreamTag, path: &[u64]) -> f64 {
    -(-keyed_uniform(master, tag, path)).ln_1p()
}

/// Serving-link power gain of one station: the sum of `antennas` unit
/// exponentials, shared by every scheme that serves from this station in
/// this drop.
pub fn keyed_station_gain(master: u64, r: u64, k: u64, station: u32, antennas: u32) -> f64 {
    let mut g = 0.0;
    for j in 0..antennas {
        g += keyed_exp(master, StreamTag::Gain, &[r, k, station as u64, j as u64]);
    }
    g
}
