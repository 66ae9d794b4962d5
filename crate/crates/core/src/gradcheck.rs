//! Central finite-difference checks of [`TargetModel::grad_log_h`].

use rand::Rng;

use crate::engine::fill_standard_normal;
use crate::models::TargetModel;

pub const DEFAULT_STEP: f64 = 1e-5;

/// Largest error observed within one parameter block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockError {
    pub name: String,
    pub max_rel_error: f64,
    /// Coordinate (0-based, global) where the maximum occurred.
    pub worst_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradcheckReport {
    pub points: usize,
    pub step: f64,
    pub blocks: Vec<BlockError>,
}

impl GradcheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max)
    }

    /// True when every block is below `tol`. NaN errors fail.
    pub fn passes(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| b.max_rel_error < tol)
    }
}

/// `|a - b| / max(|a|, |b|, 1)`. The unit floor keeps near-zero components
/// from turning round-off into large relative errors.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// `(f(theta + h e_i) - f(theta - h e_i)) / 2h` for every coordinate.
pub fn central_difference<M: TargetModel + ?Sized>(model: &M, theta: &[f64], step: f64) -> Vec<f64> {
    let mut x = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            x[i] = theta[i] + step;
            let up = model.log_h(&x);
            x[i] = theta[i] - step;
            let down = model.log_h(&x);
            x[i] = theta[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// `count` points with independent `N(0, scale^2)` coordinates.
pub fn random_points<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let mut p = vec![0.0; dim];
            fill_standard_normal(rng, &mut p);
            p.iter_mut().for_each(|v| *v *= scale);
            p
        })
        .collect()
}

/// Compares analytic and finite-difference gradients at each point and keeps
/// the worst error per block.
pub fn check_gradient<M: TargetModel + ?Sized>(model: &M, points: &[Vec<f64>], step: f64) -> GradcheckReport {
    let blocks = model.blocks();
    let mut worst: Vec<BlockError> = blocks
        .iter()
        .map(|b| BlockError { name: b.name.clone(), max_rel_error: 0.0, worst_index: b.range.start })
        .collect();
    let mut grad = vec![0.0; model.dim()];
    for theta in points {
        model.grad_log_h(theta, &mut grad);
        let fd = central_difference(model, theta, step);
        for (block, w) in blocks.iter().zip(worst.iter_mut()) {
            for i in block.range.clone() {
                let e = relative_error(grad[i], fd[i]);
                if e > w.max_rel_error || e.is_nan() {
                    w.max_rel_error = if e.is_nan() { f64::INFINITY } else { e };
                    w.worst_index = i;
                }
            }
        }
    }
    GradcheckReport { points: points.len(), step, blocks: worst }
}
