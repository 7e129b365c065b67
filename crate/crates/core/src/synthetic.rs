//! Deterministic synthetic fixtures: a noisy circle and two labeled blobs.
//!
//! The generator is a self-contained SplitMix64 so fixtures are bit-stable
//! across platforms and toolchain upgrades.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::vector::{l2_normalize, PointCloud, Vector};

/// SplitMix64; passes through the full 64-bit state space, period 2^64.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller (one value per call; the sine branch
    /// is discarded to keep the stream simple).
    pub fn next_normal(&mut self) -> f64 {
        let mut u1 = self.next_f64();
        while u1 == 0.0 {
            u1 = self.next_f64();
        }
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// `n` points on the unit circle (equally spaced angles) with Gaussian
/// radial noise. Ids are `p00000`, `p00001`, ... in generation order.
pub fn circle_cloud(n: usize, noise: f64, seed: u64) -> Result<PointCloud> {
    let mut rng = SplitMix64::new(seed);
    let mut cloud = PointCloud::new();
    for i in 0..n {
        let theta = std::f64::consts::TAU * i as f64 / n as f64;
        let r = 1.0 + noise * rng.next_normal();
        cloud.insert(
            format!("p{i:05}"),
            Vector::new(vec![r * theta.cos(), r * theta.sin()])?,
        )?;
    }
    Ok(cloud)
}

/// Two Gaussian blobs with unit per-coordinate sigma, centered at
/// `±separation` along a random unit axis.
#[derive(Debug, Clone)]
pub struct TwoBlob {
    pub cloud: PointCloud,
    /// `+1` for the blob on the positive side of the axis, `-1` opposite.
    pub labels: BTreeMap<String, i8>,
    /// The unit separation axis (also the natural lens direction).
    pub axis: Vector,
}

/// Ids are `a00000..` (label +1) and `b00000..` (label -1).
pub fn two_blob_cloud(per_blob: usize, dim: usize, separation: f64, seed: u64) -> Result<TwoBlob> {
    let mut rng = SplitMix64::new(seed);
    let axis = l2_normalize(&Vector::new((0..dim).map(|_| rng.next_normal()).collect())?)?;
    let mut cloud = PointCloud::new();
    let mut labels = BTreeMap::new();
    for (prefix, sign) in [("a", 1.0f64), ("b", -1.0f64)] {
        for i in 0..per_blob {
            let values: Vec<f64> = axis
                .values()
                .iter()
                .map(|&c| sign * separation * c + rng.next_normal())
                .collect();
            let id = format!("{prefix}{i:05}");
            cloud.insert(id.clone(), Vector::new(values)?)?;
            labels.insert(id, if sign > 0.0 { 1 } else { -1 });
        }
    }
    Ok(TwoBlob {
        cloud,
        labels,
        axis,
    })
}
