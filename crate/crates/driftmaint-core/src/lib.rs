//! Drift-aware maintenance of a streaming binary classifier.
//!
//! The pipeline has three stages. Stage 1 fits a causal feature scaler on the
//! first `K` windows of a chronological stream and pretrains an encoder by
//! masked feature reconstruction, then freezes it. Stage 2 measures latent
//! drift of every deployment window against the previous window and a fixed
//! initialization reference pool (per-dimension Kolmogorov-Smirnov and
//! 1-Wasserstein distances, averaged over dimensions). Stage 3 walks the
//! deployment windows as a sequential decision problem: at each window a
//! policy (a PPO controller or one of six deterministic baselines) picks a
//! maintenance action over the trainable adapter and classification head,
//! the detector is updated on the window's adaptation split, and post-update
//! utility, retention on a fixed memory set, and action cost feed the reward
//! and the run log.
//!
//! All heavy inner loops (batched matrix kernels, per-dimension drift) are
//! data-parallel via rayon behind the `parallel` feature (on by default);
//! disabling it yields a sequential build with bit-identical results.

pub mod baselines;
pub mod config;
pub mod data;
pub mod detector;
pub mod drift;
pub mod env;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod nn;
pub mod ppo;
pub mod runner;
pub mod seeds;
pub mod ssl;

pub use error::{Error, Result};
