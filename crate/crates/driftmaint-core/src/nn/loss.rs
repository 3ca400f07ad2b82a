//! Loss functions and their gradients with respect to the network output.
//!
//! Both losses return the mean per-sample loss over the batch and a gradient
//! matrix shaped like the network output (already divided by the batch size).

use crate::matrix::Mat;

/// Row-wise softmax via log-sum-exp.
pub fn softmax_rows(logits: &Mat) -> Mat {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Softmax cross-entropy, fused for stability. `labels[i]` indexes the target
/// class of row `i`. Gradient is `(softmax - onehot) / n`.
pub fn cross_entropy_loss_grad(logits: &Mat, labels: &[u8]) -> (f64, Mat) {
    assert_eq!(logits.rows(), labels.len(), "label count mismatch");
    let n = logits.rows();
    let mut grad = Mat::zeros(n, logits.cols());
    let mut loss = 0.0;
    for r in 0..n {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let target = labels[r] as usize;
        loss += lse - row[target];
        let g = grad.row_mut(r);
        for (c, &v) in row.iter().enumerate() {
            g[c] = (v - lse).exp() / n as f64;
        }
        g[target] -= 1.0 / n as f64;
    }
    (loss / n as f64, grad)
}

/// Masked mean-squared reconstruction loss.
///
/// Per sample: `sum_j m_j (x_j - xhat_j)^2 / (sum_j m_j + eps)`, then averaged
/// over the batch. Only masked positions contribute; an all-zero mask row
/// contributes ~0 through the `eps` guard.
pub fn masked_mse_loss_grad(recon: &Mat, target: &Mat, mask: &Mat, eps: f64) -> (f64, Mat) {
    assert_eq!(recon.rows(), target.rows(), "shape mismatch");
    assert_eq!(recon.cols(), target.cols(), "shape mismatch");
    assert_eq!(recon.rows(), mask.rows(), "mask shape mismatch");
    assert_eq!(recon.cols(), mask.cols(), "mask shape mismatch");
    let n = recon.rows();
    let mut grad = Mat::zeros(n, recon.cols());
    let mut loss = 0.0;
    for r in 0..n {
        let m_row = mask.row(r);
        let denom: f64 = m_row.iter().sum::<f64>() + eps;
        let x = target.row(r);
        let xh = recon.row(r);
        let mut num = 0.0;
        let g = grad.row_mut(r);
        for j in 0..x.len() {
            let diff = xh[j] - x[j];
            num += m_row[j] * diff * diff;
            g[j] = 2.0 * m_row[j] * diff / denom / n as f64;
        }
        loss += num / denom;
    }
    (loss / n as f64, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_rows_sum_to_one() {
        let logits = Mat::from_vec(2, 3, vec![1.0, 2.0, 3.0, -5.0, 0.0, 5.0]);
        let p = softmax_rows(&logits);
        for r in 0..2 {
            let s: f64 = p.row(r).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_entropy_of_confident_correct_prediction_is_small() {
        let logits = Mat::from_vec(1, 2, vec![0.0, 20.0]);
        let (loss, _) = cross_entropy_loss_grad(&logits, &[1]);
        assert!(loss < 1e-8, "loss={loss}");
    }

    #[test]
    fn cross_entropy_uniform_logits_is_ln_c() {
        let logits = Mat::zeros(1, 2);
        let (loss, grad) = cross_entropy_loss_grad(&logits, &[0]);
        assert!((loss - (2.0f64).ln()).abs() < 1e-12);
        // grad = softmax - onehot = (0.5-1, 0.5)
        assert!((grad.get(0, 0) + 0.5).abs() < 1e-12);
        assert!((grad.get(0, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn masked_mse_hand_value() {
        // x=(1,0,-1), xhat=(0,0,0), m=(1,0,1): (1 + 1) / (2 + eps) ~= 1.0
        let target = Mat::from_vec(1, 3, vec![1.0, 0.0, -1.0]);
        let recon = Mat::zeros(1, 3);
        let mask = Mat::from_vec(1, 3, vec![1.0, 0.0, 1.0]);
        let (loss, _) = masked_mse_loss_grad(&recon, &target, &mask, 1e-8);
        assert!((loss - 1.0).abs() < 1e-8, "loss={loss}");
    }

    #[test]
    fn masked_mse_perfect_reconstruction_is_zero() {
        let x = Mat::from_vec(2, 2, vec![0.3, -0.7, 2.0, 0.0]);
        let mask = Mat::from_vec(2, 2, vec![1.0, 1.0, 0.0, 1.0]);
        let (loss, _) = masked_mse_loss_grad(&x, &x, &mask, 1e-8);
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn masked_mse_empty_mask_is_guarded() {
        let target = Mat::from_vec(1, 2, vec![5.0, -5.0]);
        let recon = Mat::zeros(1, 2);
        let mask = Mat::zeros(1, 2);
        let (loss, _) = masked_mse_loss_grad(&recon, &target, &mask, 1e-8);
        assert!(loss.abs() < 1e-12);
    }

    #[test]
    fn unmasked_positions_do_not_affect_loss() {
        let target = Mat::from_vec(1, 3, vec![1.0, 2.0, 3.0]);
        let mask = Mat::from_vec(1, 3, vec![1.0, 0.0, 1.0]);
        let a = Mat::from_vec(1, 3, vec![0.5, 100.0, 2.0]);
        let b = Mat::from_vec(1, 3, vec![0.5, -77.0, 2.0]);
        let (la, _) = masked_mse_loss_grad(&a, &target, &mask, 1e-8);
        let (lb, _) = masked_mse_loss_grad(&b, &target, &mask, 1e-8);
        assert_eq!(la, lb);
    }
}
