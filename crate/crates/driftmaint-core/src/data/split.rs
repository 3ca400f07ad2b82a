//! Disjoint adaptation/evaluation splits and the fixed class-balanced memory
//! set.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{ChronologicalStream, Sample, ScalerParams, Window};
use crate::error::{Error, Result};
use crate::nn::param_hash;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub train: usize,
    pub eval: usize,
    pub memory: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            train: 2000,
            eval: 2000,
            memory: 2000,
        }
    }
}

/// Disjoint halves of one deployment window, each capped to its budget.
#[derive(Debug, Clone)]
pub struct WindowSplit {
    pub train: Vec<Sample>,
    pub eval: Vec<Sample>,
    /// Set when the window contained only one class; metrics downstream are
    /// then computed over the present class only.
    pub missing_class: Option<u8>,
}

/// Largest-remainder allocation of `target` slots across class pools of the
/// given sizes, proportional to pool size and capped by it.
fn proportional_allocation(pool_sizes: &[usize], target: usize) -> Vec<usize> {
    let total: usize = pool_sizes.iter().sum();
    if total == 0 || target == 0 {
        return vec![0; pool_sizes.len()];
    }
    let target = target.min(total);
    let mut alloc: Vec<usize> = Vec::with_capacity(pool_sizes.len());
    let mut fracs: Vec<(usize, f64)> = Vec::with_capacity(pool_sizes.len());
    let mut assigned = 0usize;
    for (i, &n) in pool_sizes.iter().enumerate() {
        let quota = n as f64 * target as f64 / total as f64;
        let base = quota.floor() as usize;
        alloc.push(base.min(n));
        assigned += alloc[i];
        fracs.push((i, quota - base as f64));
    }
    // Hand out the remainder by descending fractional part, index as the tie
    // break, skipping exhausted pools.
    fracs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut remaining = target.saturating_sub(assigned);
    while remaining > 0 {
        let mut gave = false;
        for &(i, _) in &fracs {
            if remaining == 0 {
                break;
            }
            if alloc[i] < pool_sizes[i] {
                alloc[i] += 1;
                remaining -= 1;
                gave = true;
            }
        }
        if !gave {
            break;
        }
    }
    alloc
}

/// Splits a window 50/50 into class-stratified, disjoint adaptation and
/// evaluation sides, then subsamples each side to its budget (still
/// stratified). A window with a single class is split over that class alone
/// and flagged.
pub fn split_window(window: &Window, budgets: Budgets, seed: u64) -> Result<WindowSplit> {
    if window.is_empty() {
        return Err(Error::config(format!("window {} is empty", window.index)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, s) in window.samples.iter().enumerate() {
        by_class[s.label as usize].push(i);
    }
    let missing_class = if by_class[0].is_empty() {
        Some(0)
    } else if by_class[1].is_empty() {
        Some(1)
    } else {
        None
    };
    if let Some(c) = missing_class {
        log::warn!(
            "window {}: class {} absent; splitting over the present class only",
            window.index,
            c
        );
    }

    for pool in by_class.iter_mut() {
        pool.shuffle(&mut rng);
    }

    let sizes = [by_class[0].len(), by_class[1].len()];
    let n = sizes[0] + sizes[1];
    let train_half = proportional_allocation(&sizes, n / 2);

    let mut train_pool: [&[usize]; 2] = [&[], &[]];
    let mut eval_pool: [&[usize]; 2] = [&[], &[]];
    for c in 0..2 {
        let (tr, ev) = by_class[c].split_at(train_half[c]);
        train_pool[c] = tr;
        eval_pool[c] = ev;
    }

    let take = |pools: [&[usize]; 2], budget: usize| -> Vec<Sample> {
        let sizes = [pools[0].len(), pools[1].len()];
        let alloc = proportional_allocation(&sizes, budget);
        let mut out = Vec::with_capacity(alloc.iter().sum());
        for c in 0..2 {
            for &i in &pools[c][..alloc[c]] {
                out.push(window.samples[i].clone());
            }
        }
        out
    };

    Ok(WindowSplit {
        train: take(train_pool, budgets.train),
        eval: take(eval_pool, budgets.eval),
        missing_class,
    })
}

/// A frozen, class-balanced sample of the initialization period, stored with
/// features already scaled. Contents never change after construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemorySet {
    pub samples: Vec<Sample>,
    /// True when a class had fewer samples than its half-budget share.
    pub capped: bool,
}

impl MemorySet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn hash(&self) -> String {
        let feats: Vec<f64> = self
            .samples
            .iter()
            .flat_map(|s| s.features.iter().copied())
            .collect();
        let labels: Vec<f64> = self.samples.iter().map(|s| s.label as f64).collect();
        param_hash(&[&feats, &labels])
    }
}

/// Draws `budget/2` samples per class (capped by availability) from the
/// initialization windows, scales them, and freezes the result.
pub fn build_memory_set(
    stream: &ChronologicalStream,
    k: usize,
    budget: usize,
    scaler: &ScalerParams,
    seed: u64,
) -> Result<MemorySet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: [Vec<&Sample>; 2] = [Vec::new(), Vec::new()];
    for w in &stream.windows[..k.min(stream.total_windows())] {
        for s in &w.samples {
            by_class[s.label as usize].push(s);
        }
    }
    if by_class[0].is_empty() || by_class[1].is_empty() {
        return Err(Error::config(
            "memory set needs both classes in the initialization period",
        ));
    }
    let per_class = budget / 2;
    let mut capped = false;
    let mut samples = Vec::new();
    for pool in by_class.iter_mut() {
        pool.shuffle(&mut rng);
        let take = per_class.min(pool.len());
        if take < per_class {
            capped = true;
            log::warn!(
                "memory set: class pool of {} is below the per-class budget {}",
                pool.len(),
                per_class
            );
        }
        for s in &pool[..take] {
            samples.push(Sample {
                id: s.id,
                features: scaler.transform_vec(&s.features),
                label: s.label,
            });
        }
    }
    Ok(MemorySet { samples, capped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Window;
    use std::collections::HashSet;

    fn window_with(counts: (usize, usize)) -> Window {
        let mut samples = Vec::new();
        let mut id = 0u64;
        for _ in 0..counts.0 {
            samples.push(Sample {
                id,
                features: vec![id as f64, 0.0],
                label: 0,
            });
            id += 1;
        }
        for _ in 0..counts.1 {
            samples.push(Sample {
                id,
                features: vec![id as f64, 1.0],
                label: 1,
            });
            id += 1;
        }
        Window { index: 1, samples }
    }

    fn ids(samples: &[Sample]) -> HashSet<u64> {
        samples.iter().map(|s| s.id).collect()
    }

    #[test]
    fn full_budget_split_is_disjoint_and_exact() {
        let w = window_with((2000, 2000));
        let split = split_window(&w, Budgets::default(), 42).unwrap();
        assert_eq!(split.train.len(), 2000);
        assert_eq!(split.eval.len(), 2000);
        assert!(ids(&split.train).is_disjoint(&ids(&split.eval)));
    }

    #[test]
    fn tiny_balanced_window_splits_five_five() {
        let w = window_with((5, 5));
        let split = split_window(&w, Budgets::default(), 0).unwrap();
        assert_eq!(split.train.len(), 5);
        assert_eq!(split.eval.len(), 5);
        let train_pos = split.train.iter().filter(|s| s.label == 1).count();
        let eval_pos = split.eval.iter().filter(|s| s.label == 1).count();
        assert!(train_pos >= 2 && train_pos <= 3);
        assert!(eval_pos >= 2 && eval_pos <= 3);
        assert!(ids(&split.train).is_disjoint(&ids(&split.eval)));
    }

    #[test]
    fn same_seed_same_split() {
        let w = window_with((40, 60));
        let a = split_window(&w, Budgets::default(), 9).unwrap();
        let b = split_window(&w, Budgets::default(), 9).unwrap();
        assert_eq!(ids(&a.train), ids(&b.train));
        assert_eq!(ids(&a.eval), ids(&b.eval));
        let c = split_window(&w, Budgets::default(), 10).unwrap();
        assert_ne!(ids(&a.train), ids(&c.train));
    }

    #[test]
    fn single_class_window_is_flagged_not_fatal() {
        let w = window_with((8, 0));
        let split = split_window(&w, Budgets::default(), 3).unwrap();
        assert_eq!(split.missing_class, Some(1));
        assert_eq!(split.train.len() + split.eval.len(), 8);
    }

    #[test]
    fn budget_subsampling_respects_proportions() {
        let w = window_with((600, 200));
        let split = split_window(
            &w,
            Budgets {
                train: 100,
                eval: 100,
                memory: 0,
            },
            5,
        )
        .unwrap();
        assert_eq!(split.train.len(), 100);
        let pos = split.train.iter().filter(|s| s.label == 1).count();
        assert_eq!(pos, 25, "expected 200/800 of the budget");
    }

    fn stream_with_init_counts(neg: usize, pos: usize) -> ChronologicalStream {
        let init = window_with((neg, pos));
        let later = Window {
            index: 2,
            samples: window_with((4, 4)).samples,
        };
        ChronologicalStream::new(
            vec![
                Window {
                    index: 1,
                    samples: init.samples,
                },
                later,
            ],
            1,
        )
        .unwrap()
    }

    fn unit_scaler(d: usize) -> ScalerParams {
        ScalerParams {
            mu: vec![0.0; d],
            sigma: vec![1.0; d],
        }
    }

    #[test]
    fn memory_set_is_balanced_under_full_pools() {
        let stream = stream_with_init_counts(3000, 3000);
        let m = build_memory_set(&stream, 1, 2000, &unit_scaler(2), 0).unwrap();
        assert_eq!(m.len(), 2000);
        assert_eq!(m.samples.iter().filter(|s| s.label == 1).count(), 1000);
        assert!(!m.capped);
    }

    #[test]
    fn memory_set_caps_scarce_class() {
        let stream = stream_with_init_counts(400, 3000);
        let m = build_memory_set(&stream, 1, 2000, &unit_scaler(2), 0).unwrap();
        assert_eq!(m.samples.iter().filter(|s| s.label == 0).count(), 400);
        assert_eq!(m.samples.iter().filter(|s| s.label == 1).count(), 1000);
        assert!(m.capped);
    }

    #[test]
    fn memory_set_is_deterministic_per_seed() {
        let stream = stream_with_init_counts(50, 50);
        let a = build_memory_set(&stream, 1, 40, &unit_scaler(2), 7).unwrap();
        let b = build_memory_set(&stream, 1, 40, &unit_scaler(2), 7).unwrap();
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn memory_set_requires_both_classes() {
        let stream = stream_with_init_counts(10, 0);
        assert!(build_memory_set(&stream, 1, 4, &unit_scaler(2), 0).is_err());
    }
}
