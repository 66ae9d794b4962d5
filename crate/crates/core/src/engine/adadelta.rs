/// Decay of the running averages.
pub const DEFAULT_RHO: f64 = 0.95;
/// Floor added under both square roots.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Per-coordinate ADADELTA accumulator.
///
/// Each call to [`step`](Adadelta::step) updates the squared-gradient average,
/// forms the change `sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g` and then
/// folds the change into the squared-update average.
#[derive(Clone, Debug, PartialEq)]
pub struct Adadelta {
    rho: f64,
    epsilon: f64,
    mean_sq_grad: Vec<f64>,
    mean_sq_delta: Vec<f64>,
}

impl Adadelta {
    pub fn new(len: usize) -> Self {
        Self::with_constants(len, DEFAULT_RHO, DEFAULT_EPSILON)
    }

    pub fn with_constants(len: usize, rho: f64, epsilon: f64) -> Self {
        Self { rho, epsilon, mean_sq_grad: vec![0.0; len], mean_sq_delta: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.mean_sq_grad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_sq_grad.is_empty()
    }

    pub fn mean_sq_grad(&self) -> &[f64] {
        &self.mean_sq_grad
    }

    pub fn mean_sq_delta(&self) -> &[f64] {
        &self.mean_sq_delta
    }

    /// Returns the change to add to the parameters for gradient `g`.
    pub fn step(&mut self, g: &[f64]) -> Vec<f64> {
        let mut delta = vec![0.0; g.len()];
        self.step_into(g, &mut delta);
        delta
    }

    pub fn step_into(&mut self, g: &[f64], delta: &mut [f64]) {
        assert_eq!(g.len(), self.len(), "gradient length");
        assert_eq!(delta.len(), self.len(), "delta length");
        let (rho, eps) = (self.rho, self.epsilon);
        for (((eg2, edx2), &gi), di) in self
            .mean_sq_grad
            .iter_mut()
            .zip(self.mean_sq_delta.iter_mut())
            .zip(g)
            .zip(delta.iter_mut())
        {
            *eg2 = rho * *eg2 + (1.0 - rho) * gi * gi;
            let d = ((*edx2 + eps).sqrt() / (*eg2 + eps).sqrt()) * gi;
            *edx2 = rho * *edx2 + (1.0 - rho) * d * d;
            *di = d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_unit_gradient() {
        let mut acc = Adadelta::new(1);
        let d = acc.step(&[1.0])[0];
        let exact = (1e-6f64).sqrt() / (0.05f64 + 1e-6).sqrt();
        assert!((d - exact).abs() < 1e-15, "{d}");
        // 4.4718e-3 agrees with the exact 4.47209e-3 to four significant figures.
        assert!((d - 4.4718e-3).abs() / 4.4718e-3 < 1e-4, "{d}");
        assert!((acc.mean_sq_grad()[0] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_only_decays() {
        let mut acc = Adadelta::new(2);
        acc.step(&[1.0, -2.0]);
        let before = (acc.mean_sq_grad().to_vec(), acc.mean_sq_delta().to_vec());
        assert_eq!(acc.step(&[0.0, 0.0]), vec![0.0, 0.0]);
        for i in 0..2 {
            assert_eq!(acc.mean_sq_grad()[i], 0.95 * before.0[i]);
            assert_eq!(acc.mean_sq_delta()[i], 0.95 * before.1[i]);
        }
    }

    #[test]
    fn constant_gradient_steps_grow_then_stay_bounded() {
        for g in [3.0, -0.5] {
            let mut acc = Adadelta::new(1);
            let steps: Vec<f64> = (0..1000).map(|_| acc.step(&[g])[0]).collect();
            assert!(steps.iter().all(|d| d.signum() == g.signum()));
            assert!(steps[..50].windows(2).all(|w| w[1].abs() >= w[0].abs()));
            assert!(steps.iter().all(|d| d.is_finite() && d.abs() < 10.0 * g.abs()));
        }
    }
}
