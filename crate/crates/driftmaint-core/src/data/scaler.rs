//! Causal z-score scaler, fit on the initialization period only and reused
//! unchanged for every later window.

use serde::{Deserialize, Serialize};

use crate::data::ChronologicalStream;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::nn::param_hash;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl ScalerParams {
    /// Fits per-feature mean and population standard deviation over the union
    /// of the first `k` windows. A constant feature gets `sigma = 1` so its
    /// scaled value is exactly 0.
    pub fn fit(stream: &ChronologicalStream, k: usize) -> Result<Self> {
        if k < 1 || k > stream.total_windows() {
            return Err(Error::config(format!("invalid init period K={k}")));
        }
        let d = stream.feature_dim;
        let mut count = 0usize;
        let mut mean = vec![0.0; d];
        for w in &stream.windows[..k] {
            for s in &w.samples {
                count += 1;
                for (m, &x) in mean.iter_mut().zip(&s.features) {
                    *m += x;
                }
            }
        }
        if count == 0 {
            return Err(Error::config("initialization period has no samples"));
        }
        for m in &mut mean {
            *m /= count as f64;
        }
        let mut var = vec![0.0; d];
        for w in &stream.windows[..k] {
            for s in &w.samples {
                for (v, (&x, &m)) in var.iter_mut().zip(s.features.iter().zip(&mean)) {
                    let diff = x - m;
                    *v += diff * diff;
                }
            }
        }
        let sigma = var
            .into_iter()
            .map(|v| {
                let s = (v / count as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(ScalerParams { mu: mean, sigma })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn transform_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.mu.len(), "feature width mismatch");
        x.iter()
            .zip(self.mu.iter().zip(&self.sigma))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    /// Scales a batch of raw feature rows into a matrix.
    pub fn transform_rows<'a>(&self, rows: impl Iterator<Item = &'a [f64]>) -> Mat {
        let scaled: Vec<Vec<f64>> = rows.map(|r| self.transform_vec(r)).collect();
        Mat::from_rows(&scaled)
    }

    pub fn hash(&self) -> String {
        param_hash(&[&self.mu, &self.sigma])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Sample, Window};

    fn stream_of(rows: &[(usize, Vec<f64>)]) -> ChronologicalStream {
        let mut windows: Vec<Window> = Vec::new();
        for (i, (w, features)) in rows.iter().enumerate() {
            let s = Sample {
                id: i as u64,
                features: features.clone(),
                label: (i % 2) as u8,
            };
            match windows.iter_mut().find(|win| win.index == *w) {
                Some(win) => win.samples.push(s),
                None => windows.push(Window {
                    index: *w,
                    samples: vec![s],
                }),
            }
        }
        windows.sort_by_key(|w| w.index);
        ChronologicalStream::new(windows, 1).unwrap()
    }

    #[test]
    fn two_point_statistics() {
        let stream = stream_of(&[
            (1, vec![1.0, 2.0]),
            (1, vec![3.0, 4.0]),
            (2, vec![100.0, 100.0]),
        ]);
        let scaler = ScalerParams::fit(&stream, 1).unwrap();
        assert_eq!(scaler.mu, vec![2.0, 3.0]);
        assert_eq!(scaler.sigma, vec![1.0, 1.0]);
    }

    #[test]
    fn constant_feature_scales_to_zero() {
        let stream = stream_of(&[
            (1, vec![5.0, 1.0]),
            (1, vec![5.0, 3.0]),
            (2, vec![9.0, 9.0]),
        ]);
        let scaler = ScalerParams::fit(&stream, 1).unwrap();
        assert_eq!(scaler.sigma[0], 1.0);
        let t = scaler.transform_vec(&[5.0, 2.0]);
        assert_eq!(t[0], 0.0);
    }

    #[test]
    fn transform_of_mean_is_zero() {
        let stream = stream_of(&[
            (1, vec![1.0, 2.0]),
            (1, vec![3.0, 6.0]),
            (2, vec![0.0, 0.0]),
        ]);
        let scaler = ScalerParams::fit(&stream, 1).unwrap();
        let t = scaler.transform_vec(&scaler.mu.clone());
        assert!(t.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scaler_is_causal_in_k() {
        let mut a = stream_of(&[
            (1, vec![1.0, 2.0]),
            (1, vec![3.0, 4.0]),
            (2, vec![10.0, 20.0]),
        ]);
        let fit_a = ScalerParams::fit(&a, 1).unwrap();
        // Perturb a later window; the fit must be bitwise unchanged.
        a.windows[1].samples[0].features = vec![-999.0, 999.0];
        let fit_b = ScalerParams::fit(&a, 1).unwrap();
        assert_eq!(fit_a.hash(), fit_b.hash());
    }
}
