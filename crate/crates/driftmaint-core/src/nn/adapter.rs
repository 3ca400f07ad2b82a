//! Residual bottleneck adapter: `A(z) = z + relu(z W_down + b_down) W_up + b_up`.
//!
//! `W_up` and `b_up` start at zero, so a freshly built (or reset) adapter is
//! exactly the identity on any input. Resetting the adapter is therefore a
//! clean rollback to that identity behavior.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{add, add_row_vec, col_sums, matmul, matmul_a_bt, matmul_at_b, Mat};
use crate::seeds::{self, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterParams {
    pub w_down: Mat,
    pub b_down: Vec<f64>,
    pub w_up: Mat,
    pub b_up: Vec<f64>,
}

/// Batch values recorded by `forward_cached`.
pub struct AdapterTrace {
    input: Mat,
    hidden: Mat,
}

#[derive(Debug, Clone)]
pub struct AdapterGrads {
    pub d_w_down: Mat,
    pub d_b_down: Vec<f64>,
    pub d_w_up: Mat,
    pub d_b_up: Vec<f64>,
}

impl AdapterParams {
    /// `bottleneck` must be strictly smaller than `latent_dim`.
    pub fn new(latent_dim: usize, bottleneck: usize, seed: u64) -> Result<Self> {
        if bottleneck == 0 || bottleneck >= latent_dim {
            return Err(Error::config(format!(
                "adapter bottleneck {bottleneck} must be in 1..{latent_dim}"
            )));
        }
        let mut rng = seeds::rng(seed, Domain::AdapterInit, 0);
        let limit = (6.0 / latent_dim as f64).sqrt();
        let w_down = Mat::from_vec(
            latent_dim,
            bottleneck,
            (0..latent_dim * bottleneck)
                .map(|_| rand::Rng::gen_range(&mut rng, -limit..limit))
                .collect(),
        );
        Ok(AdapterParams {
            w_down,
            b_down: vec![0.0; bottleneck],
            w_up: Mat::zeros(bottleneck, latent_dim),
            b_up: vec![0.0; latent_dim],
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.w_down.rows()
    }

    pub fn bottleneck(&self) -> usize {
        self.w_down.cols()
    }

    fn check_input(&self, z: &Mat) -> Result<()> {
        if z.cols() != self.latent_dim() {
            return Err(Error::config(format!(
                "latent width {} does not match adapter dim {}",
                z.cols(),
                self.latent_dim()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, z: &Mat) -> Result<Mat> {
        Ok(self.forward_cached(z)?.1)
    }

    pub fn forward_cached(&self, z: &Mat) -> Result<(AdapterTrace, Mat)> {
        self.check_input(z)?;
        let mut hidden = matmul(z, &self.w_down);
        add_row_vec(&mut hidden, &self.b_down);
        for v in hidden.data_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let mut delta = matmul(&hidden, &self.w_up);
        add_row_vec(&mut delta, &self.b_up);
        let out = add(z, &delta);
        Ok((
            AdapterTrace {
                input: z.clone(),
                hidden,
            },
            out,
        ))
    }

    /// Backward through the residual branch; returns the gradient at the
    /// adapter input (which includes the residual pass-through).
    pub fn backward(&self, trace: &AdapterTrace, d_out: &Mat, grads: &mut AdapterGrads) -> Mat {
        let d_w_up = matmul_at_b(&trace.hidden, d_out);
        let d_b_up = col_sums(d_out);
        let mut d_hidden = matmul_a_bt(d_out, &self.w_up);
        for r in 0..d_hidden.rows() {
            let h = trace.hidden.row(r);
            for (c, g) in d_hidden.row_mut(r).iter_mut().enumerate() {
                if h[c] <= 0.0 {
                    *g = 0.0;
                }
            }
        }
        let d_w_down = matmul_at_b(&trace.input, &d_hidden);
        let d_b_down = col_sums(&d_hidden);
        let d_input = add(d_out, &matmul_a_bt(&d_hidden, &self.w_down));

        for (g, x) in grads.d_w_up.data_mut().iter_mut().zip(d_w_up.data()) {
            *g += x;
        }
        for (g, x) in grads.d_b_up.iter_mut().zip(&d_b_up) {
            *g += x;
        }
        for (g, x) in grads.d_w_down.data_mut().iter_mut().zip(d_w_down.data()) {
            *g += x;
        }
        for (g, x) in grads.d_b_down.iter_mut().zip(&d_b_down) {
            *g += x;
        }
        d_input
    }

    pub fn param_lens(&self) -> Vec<usize> {
        vec![
            self.w_down.data().len(),
            self.b_down.len(),
            self.w_up.data().len(),
            self.b_up.len(),
        ]
    }

    pub fn param_slices(&self) -> Vec<&[f64]> {
        vec![
            self.w_down.data(),
            self.b_down.as_slice(),
            self.w_up.data(),
            self.b_up.as_slice(),
        ]
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_down.data_mut(),
            self.b_down.as_mut_slice(),
            self.w_up.data_mut(),
            self.b_up.as_mut_slice(),
        ]
    }
}

impl AdapterGrads {
    pub fn zeros_like(a: &AdapterParams) -> Self {
        AdapterGrads {
            d_w_down: Mat::zeros(a.w_down.rows(), a.w_down.cols()),
            d_b_down: vec![0.0; a.b_down.len()],
            d_w_up: Mat::zeros(a.w_up.rows(), a.w_up.cols()),
            d_b_up: vec![0.0; a.b_up.len()],
        }
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        vec![
            self.d_w_down.data(),
            self.d_b_down.as_slice(),
            self.d_w_up.data(),
            self.d_b_up.as_slice(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_adapter_is_identity() {
        let a = AdapterParams::new(4, 2, 3).unwrap();
        let z = Mat::from_vec(2, 4, vec![1.0, -2.0, 0.5, 3.0, 0.0, 0.0, 7.0, -1.0]);
        let out = a.forward(&z).unwrap();
        assert_eq!(out.data(), z.data());
    }

    #[test]
    fn hand_evaluated_residual() {
        // d_z=2, b=1, w_down=(1,0)^T, w_up=(0,1), biases 0, z=(3,4) -> (3,7)
        let a = AdapterParams {
            w_down: Mat::from_vec(2, 1, vec![1.0, 0.0]),
            b_down: vec![0.0],
            w_up: Mat::from_vec(1, 2, vec![0.0, 1.0]),
            b_up: vec![0.0, 0.0],
        };
        let out = a.forward(&Mat::from_vec(1, 2, vec![3.0, 4.0])).unwrap();
        assert_eq!(out.data(), &[3.0, 7.0]);
    }

    #[test]
    fn zero_input_zero_bias_maps_to_zero() {
        let a = AdapterParams::new(3, 1, 11).unwrap();
        let out = a.forward(&Mat::zeros(1, 3)).unwrap();
        assert_eq!(out.data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn bottleneck_must_be_smaller_than_latent() {
        assert!(AdapterParams::new(4, 4, 0).is_err());
        assert!(AdapterParams::new(4, 0, 0).is_err());
    }

    #[test]
    fn width_mismatch_is_config_error() {
        let a = AdapterParams::new(4, 2, 0).unwrap();
        assert!(a.forward(&Mat::zeros(1, 3)).is_err());
    }
}
