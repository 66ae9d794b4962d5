/// Outcome of feeding one window average to the stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop,
}

/// Tracks the running maximum of the window-averaged lower bound and stops
/// once `patience` consecutive windows fall below it. A window that reaches
/// a new maximum resets the count.
#[derive(Clone, Debug)]
pub struct StoppingRule {
    patience: usize,
    best: f64,
    below: usize,
}

impl StoppingRule {
    pub fn new(patience: usize) -> Self {
        assert!(patience >= 1, "patience must be positive");
        Self { patience, best: f64::NEG_INFINITY, below: 0 }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    /// Consecutive windows below the running maximum so far.
    pub fn below_count(&self) -> usize {
        self.below
    }

    pub fn observe(&mut self, lbar: f64) -> StopDecision {
        // NaN never becomes the maximum and counts as a drop.
        if lbar >= self.best {
            self.best = lbar;
            self.below = 0;
        } else {
            self.below += 1;
        }
        if self.below >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }
}

/// Replays the rule over a whole trace; the decision after the last element.
pub fn stopping_check(trace: &[f64], patience: usize) -> StopDecision {
    let mut rule = StoppingRule::new(patience);
    let mut decision = StopDecision::Continue;
    for &v in trace {
        decision = rule.observe(v);
        if decision == StopDecision::Stop {
            break;
        }
    }
    decision
}

/// Whether a trace that just triggered the stopping rule is heading to minus
/// infinity rather than fluctuating around its maximum: each of the last
/// `patience` window-to-window changes is a drop larger than ten times the
/// standard deviation of the changes that came before them.
pub fn is_diverging(trace: &[f64], patience: usize) -> bool {
    if trace.iter().any(|v| !v.is_finite()) {
        return true;
    }
    let diffs: Vec<f64> = trace.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.len() < patience + 2 {
        return false;
    }
    let (reference, recent) = diffs.split_at(diffs.len() - patience);
    let n = reference.len() as f64;
    let mean = reference.iter().sum::<f64>() / n;
    let sd = (reference.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    recent.iter().all(|&d| d < -10.0 * sd)
}
