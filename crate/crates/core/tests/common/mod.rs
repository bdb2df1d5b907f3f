#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selection_bounds::{DiscreteInstance, TargetSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Endpoints on a quarter grid so ties and shared atoms show up often.
pub fn grid_value(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.gen_range(lo * 4..=hi * 4) as f64 / 4.0
}

pub fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> DiscreteInstance {
    random_instance_in(rng, n, -3, 3)
}

pub fn random_instance_in(rng: &mut ChaCha8Rng, n: usize, lo: i32, hi: i32) -> DiscreteInstance {
    let triples: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            let a = grid_value(rng, lo, hi);
            let b = grid_value(rng, lo, hi);
            let w = rng.gen_range(1..=5) as f64;
            (a.min(b), a.max(b), w)
        })
        .collect();
    DiscreteInstance::from_triples(&triples).unwrap()
}

/// One or two disjoint pieces, occasionally a single point.
pub fn random_target(rng: &mut ChaCha8Rng) -> TargetSet {
    let pieces = rng.gen_range(1..=2);
    let mut pairs = Vec::new();
    for _ in 0..pieces {
        let a = grid_value(rng, -3, 3);
        let len = if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(1..=8) as f64 / 4.0 };
        pairs.push((a, a + len));
    }
    TargetSet::new(&pairs).unwrap()
}

/// `k` evenly spread points strictly inside `[lo, hi]`, or `lo` repeated when
/// the interval is a point.
pub fn interior_points(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (1..=k).map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64).collect()
}
