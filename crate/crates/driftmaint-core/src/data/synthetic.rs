//! Synthetic drift streams.
//!
//! Each window draws class-conditional Gaussian clusters with unit isotropic
//! covariance. Both class means translate by a fixed drift velocity every
//! window and jump (persistently) at flagged windows, so drift magnitude is
//! known exactly. The drift direction mixes the class-separation axis with an
//! orthogonal axis, which makes sustained drift degrade a frozen decision
//! boundary while each individual window stays separable.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{ChronologicalStream, Sample, Window};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Feature dimension d.
    pub dim: usize,
    /// Total window count T (init + deployment).
    pub windows: usize,
    pub samples_per_window: usize,
    /// Distance between class means, in units of the per-feature sigma.
    pub class_separation: f64,
    /// Per-window translation of both class means, in sigma units.
    pub drift_velocity: f64,
    /// Windows at which the means additionally jump by `abrupt_magnitude`.
    pub abrupt_windows: Vec<usize>,
    pub abrupt_magnitude: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            dim: 100,
            windows: 13,
            samples_per_window: 5000,
            class_separation: 4.0,
            drift_velocity: 0.5,
            abrupt_windows: Vec::new(),
            abrupt_magnitude: 0.0,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.samples_per_window == 0 {
            return Err(Error::config("synthetic dim and sample count must be > 0"));
        }
        if self.windows < 2 {
            return Err(Error::config("synthetic stream needs at least 2 windows"));
        }
        if let Some(&w) = self
            .abrupt_windows
            .iter()
            .find(|&&w| w < 1 || w > self.windows)
        {
            return Err(Error::config(format!(
                "abrupt window {w} outside 1..={}",
                self.windows
            )));
        }
        Ok(())
    }
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn orthogonal_unit<R: Rng>(rng: &mut R, dim: usize, against: &[f64]) -> Vec<f64> {
    loop {
        let mut v = random_unit(rng, dim);
        let dot: f64 = v.iter().zip(against).map(|(a, b)| a * b).sum();
        for (x, &a) in v.iter_mut().zip(against) {
            *x -= dot * a;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Generates a stream with `init_count` initialization windows. Deterministic
/// per (config, seed).
pub fn generate_synthetic(
    cfg: &SyntheticConfig,
    init_count: usize,
    seed: u64,
) -> Result<ChronologicalStream> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u_sep = random_unit(&mut rng, cfg.dim);
    let u_orth = orthogonal_unit(&mut rng, cfg.dim, &u_sep);
    let u_jump = random_unit(&mut rng, cfg.dim);

    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    let drift_dir: Vec<f64> = u_sep
        .iter()
        .zip(&u_orth)
        .map(|(a, b)| (a + b) * inv_sqrt2)
        .collect();

    let half_sep = cfg.class_separation / 2.0;
    let mut windows = Vec::with_capacity(cfg.windows);
    let mut next_id = 0u64;
    let mut offset = vec![0.0; cfg.dim];

    for t in 1..=cfg.windows {
        if t > 1 {
            for (o, &d) in offset.iter_mut().zip(&drift_dir) {
                *o += cfg.drift_velocity * d;
            }
        }
        if cfg.abrupt_windows.contains(&t) {
            for (o, &j) in offset.iter_mut().zip(&u_jump) {
                *o += cfg.abrupt_magnitude * j;
            }
        }
        let n0 = cfg.samples_per_window / 2;
        let n1 = cfg.samples_per_window - n0;
        let mut samples = Vec::with_capacity(cfg.samples_per_window);
        for (label, count, sign) in [(0u8, n0, -1.0), (1u8, n1, 1.0)] {
            for _ in 0..count {
                let features: Vec<f64> = (0..cfg.dim)
                    .map(|j| {
                        let noise: f64 = rng.sample(StandardNormal);
                        offset[j] + sign * half_sep * u_sep[j] + noise
                    })
                    .collect();
                samples.push(Sample {
                    id: next_id,
                    features,
                    label,
                });
                next_id += 1;
            }
        }
        windows.push(Window { index: t, samples });
    }
    ChronologicalStream::new(windows, init_count)
}
