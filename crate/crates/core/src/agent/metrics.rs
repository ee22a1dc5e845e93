use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::rate::{RateReport, TxConfig};

/// Minimum instantaneous user rate under one realization.
pub fn reward(real: &ChannelRealization, tx: &TxConfig, sigma2: f64) -> Result<f64> {
    Ok(RateReport::evaluate(real, tx, sigma2)?.min_rate)
}

/// Minimum over users of the time-averaged rate; `history[l][k]` is user
/// `k`'s rate at step `l`.
pub fn evaluation_reward(history: &[Vec<f64>]) -> Result<f64> {
    let mut running = RunningEvaluation::default();
    for rates in history {
        running.push(rates)?;
    }
    running.value().ok_or(Error::Empty("evaluation reward over an empty history"))
}

/// Incremental form of [`evaluation_reward`].
#[derive(Debug, Clone, Default)]
pub struct RunningEvaluation {
    sums: Vec<f64>,
    steps: usize,
}

impl RunningEvaluation {
    pub fn push(&mut self, rates: &[f64]) -> Result<()> {
        if self.steps == 0 {
            if rates.is_empty() {
                return Err(Error::Empty("rate vector without users"));
            }
            self.sums = vec![0.0; rates.len()];
        } else if rates.len() != self.sums.len() {
            return Err(Error::DimensionMismatch {
                what: "per-user rates",
                expected: self.sums.len(),
                actual: rates.len(),
            });
        }
        for (s, r) in self.sums.iter_mut().zip(rates) {
            *s += r;
        }
        self.steps += 1;
        Ok(())
    }

    pub fn value(&self) -> Option<f64> {
        (self.steps > 0).then(|| {
            let t = self.steps as f64;
            self.sums.iter().map(|s| s / t).fold(f64::INFINITY, f64::min)
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Exponential smoothing `s_t = w s_{t-1} + (1 - w) r_t`, started at `s_0 = r_1`.
pub fn smooth(series: &[f64], weight: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&weight) {
        return Err(Error::Domain(format!("smoothing weight must lie in [0, 1), got {weight}")));
    }
    let Some(&first) = series.first() else {
        return Ok(Vec::new());
    };
    let mut prev = first;
    Ok(series
        .iter()
        .map(|&r| {
            prev = weight * prev + (1.0 - weight) * r;
            prev
        })
        .collect())
}

/// Evaluation reward of one fixed configuration over a whole dataset.
pub fn evaluate_fixed_config(dataset: &[ChannelRealization], tx: &TxConfig, sigma2: f64) -> Result<f64> {
    let history = dataset
        .iter()
        .map(|real| Ok(RateReport::evaluate(real, tx, sigma2)?.per_user_rate))
        .collect::<Result<Vec<_>>>()?;
    evaluation_reward(&history)
}
