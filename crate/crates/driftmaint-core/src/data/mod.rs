//! Chronologically windowed labeled data: ingestion, synthesis, causal
//! scaling, window splits, and the fixed memory set.

mod ingest;
mod scaler;
mod split;
mod synthetic;

pub use ingest::ingest_csv;
pub use scaler::ScalerParams;
pub use split::{build_memory_set, split_window, Budgets, MemorySet, WindowSplit};
pub use synthetic::{generate_synthetic, SyntheticConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LABEL_BENIGN: u8 = 0;
pub const LABEL_MALWARE: u8 = 1;

/// One labeled observation. Ids are unique within a stream and exist so that
/// split disjointness and evaluation hygiene can be checked directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: u64,
    pub features: Vec<f64>,
    pub label: u8,
}

/// All samples collected in one time period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    /// 1-based chronological index.
    pub index: usize,
    pub samples: Vec<Sample>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.samples.iter().filter(|s| s.label == 1).count();
        (self.samples.len() - pos, pos)
    }
}

/// An ordered sequence of labeled windows. The first `init_count` windows form
/// the initialization period; everything after them is deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChronologicalStream {
    pub windows: Vec<Window>,
    pub init_count: usize,
    pub feature_dim: usize,
}

impl ChronologicalStream {
    pub fn new(windows: Vec<Window>, init_count: usize) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::config("stream has no windows"));
        }
        if init_count < 1 || init_count >= windows.len() {
            return Err(Error::config(format!(
                "init window count {} must satisfy 1 <= K < T = {}",
                init_count,
                windows.len()
            )));
        }
        if windows.windows(2).any(|w| w[0].index >= w[1].index) {
            return Err(Error::config("window indices must be strictly increasing"));
        }
        let feature_dim = windows
            .iter()
            .flat_map(|w| w.samples.first())
            .map(|s| s.features.len())
            .next()
            .ok_or_else(|| Error::config("stream has no samples"))?;
        for w in &windows {
            if w.samples.iter().any(|s| s.features.len() != feature_dim) {
                return Err(Error::config(format!(
                    "window {} mixes feature widths",
                    w.index
                )));
            }
        }
        Ok(ChronologicalStream {
            windows,
            init_count,
            feature_dim,
        })
    }

    pub fn total_windows(&self) -> usize {
        self.windows.len()
    }

    pub fn deployment_count(&self) -> usize {
        self.windows.len() - self.init_count
    }

    pub fn init_windows(&self) -> &[Window] {
        &self.windows[..self.init_count]
    }

    pub fn deployment_windows(&self) -> &[Window] {
        &self.windows[self.init_count..]
    }

    pub fn init_samples(&self) -> impl Iterator<Item = &Sample> {
        self.init_windows().iter().flat_map(|w| w.samples.iter())
    }
}
