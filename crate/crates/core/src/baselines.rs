//! Reference strategies: random configurations and a per-interval local
//! search that uses instantaneous CSI, plus the scheme comparison that
//! charges the instantaneous scheme its pilot overhead.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::agent::evaluation_reward;
use crate::channel::{complex_normal, ChannelRealization};
use crate::cmat::{vec_norm, CMatrix, C64};
use crate::error::{Error, Result};
use crate::rate::{
    effective_channel, net_rate_instantaneous, net_rate_longterm, pilot_overhead_factor, OverheadParams, RateReport,
    TxConfig,
};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecoderRule {
    /// `w_k` proportional to `conj(v_k)`, equal power per user.
    MatchedFilter,
    /// Gaussian perturbation of the current precoder, renormalized.
    RandomRefine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    pub iterations: usize,
    pub candidates_per_iter: usize,
    /// Standard deviation of the phase perturbations, radians.
    pub phase_step: f64,
    pub precoder_rule: PrecoderRule,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            iterations: 200,
            candidates_per_iter: 4,
            phase_step: 0.3,
            precoder_rule: PrecoderRule::MatchedFilter,
        }
    }
}

impl LocalSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.candidates_per_iter == 0 {
            return Err(Error::Config("local search needs at least one candidate per iteration".into()));
        }
        if !(self.phase_step > 0.0) || !self.phase_step.is_finite() {
            return Err(Error::Config(format!("phase step must be positive, got {}", self.phase_step)));
        }
        Ok(())
    }
}

fn normalized(mut w: CMatrix, max_power: f64) -> Option<CMatrix> {
    let norm = w.frobenius_norm();
    if norm < 1e-300 || !norm.is_finite() {
        return None;
    }
    w.scale(max_power.sqrt() / norm);
    Some(w)
}

/// Uniform phases and a complex Gaussian precoder scaled to full power.
pub fn random_tx<R: Rng + ?Sized>(m: usize, n: usize, k: usize, max_power: f64, rng: &mut R) -> Result<TxConfig> {
    if m == 0 || n == 0 || k == 0 {
        return Err(Error::InvalidDimension("random configuration needs positive M, N, K".into()));
    }
    let phase_angles = (0..n).map(|_| TAU * rng.random::<f64>()).collect();
    let precoder = loop {
        let raw = CMatrix::from_fn(m, k, |_, _| complex_normal(rng));
        if let Some(w) = normalized(raw, max_power) {
            break w;
        }
    };
    TxConfig::new(precoder, phase_angles, max_power)
}

/// Matched-filter precoder for the given phases, equal power per user.
pub fn matched_filter(real: &ChannelRealization, phase_angles: &[f64], max_power: f64) -> Result<CMatrix> {
    let v = effective_channel(real, phase_angles)?;
    let (m, k) = (real.m(), real.k());
    let per_user = (max_power / k as f64).sqrt();
    let mut w = CMatrix::zeros(m, k);
    for (u, vu) in v.iter().enumerate() {
        let norm = vec_norm(vu);
        for (row, z) in vu.iter().enumerate() {
            let entry = if norm > 0.0 {
                z.conj() * (per_user / norm)
            } else {
                C64::new(per_user / (m as f64).sqrt(), 0.0)
            };
            w.set(row, u, entry);
        }
    }
    Ok(normalized(w.clone(), max_power).unwrap_or(w))
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub tx: TxConfig,
    pub objective: f64,
    /// Best objective after the initial candidates and after every iteration.
    pub trace: Vec<f64>,
}

fn objective(real: &ChannelRealization, tx: &TxConfig, sigma2: f64) -> Result<f64> {
    Ok(RateReport::evaluate(real, tx, sigma2)?.min_rate)
}

/// Greedy random local search maximizing the minimum instantaneous rate of
/// one realization. Only improving proposals are accepted.
pub fn instantaneous_solve<R: Rng + ?Sized>(
    real: &ChannelRealization,
    sigma2: f64,
    max_power: f64,
    config: &LocalSearchConfig,
    rng: &mut R,
) -> Result<SearchResult> {
    config.validate()?;
    let (m, n, k) = (real.m(), real.n(), real.k());
    let mut best: Option<(TxConfig, f64)> = None;
    for _ in 0..config.candidates_per_iter {
        let tx = random_tx(m, n, k, max_power, rng)?;
        let value = objective(real, &tx, sigma2)?;
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((tx, value));
        }
    }
    let (mut tx, mut value) = best.expect("at least one candidate");
    let mut trace = vec![value];
    let phase_noise = Normal::new(0.0, config.phase_step).map_err(|e| Error::Domain(e.to_string()))?;
    for _ in 0..config.iterations {
        let mut round_best: Option<(TxConfig, f64)> = None;
        for _ in 0..config.candidates_per_iter {
            let phase_angles: Vec<f64> = tx
                .phase_angles
                .iter()
                .map(|a| (a + phase_noise.sample(rng)).rem_euclid(TAU))
                .collect();
            let precoder = match config.precoder_rule {
                PrecoderRule::MatchedFilter => matched_filter(real, &phase_angles, max_power)?,
                PrecoderRule::RandomRefine => {
                    let scale = config.phase_step * (max_power / (m * k) as f64).sqrt();
                    let mut w = tx.precoder.clone();
                    for z in w.as_mut_slice() {
                        *z += complex_normal(rng) * scale;
                    }
                    normalized(w, max_power).unwrap_or_else(|| tx.precoder.clone())
                }
            };
            let candidate = TxConfig {
                precoder,
                phase_angles,
                max_power,
            };
            let v = objective(real, &candidate, sigma2)?;
            if round_best.as_ref().is_none_or(|(_, b)| v > *b) {
                round_best = Some((candidate, v));
            }
        }
        if let Some((candidate, v)) = round_best {
            if v > value {
                tx = candidate;
                value = v;
            }
        }
        trace.push(value);
    }
    Ok(SearchResult {
        tx,
        objective: value,
        trace,
    })
}

/// Produces the single configuration of the long-term scheme.
pub trait LongTermDesigner {
    fn design(&mut self, dataset: &[ChannelRealization]) -> Result<TxConfig>;
}

/// Produces a configuration for one coherence interval from its channels.
pub trait InstantaneousDesigner {
    fn design(&mut self, real: &ChannelRealization) -> Result<TxConfig>;
}

/// A configuration computed beforehand.
#[derive(Debug, Clone)]
pub struct FixedConfig(pub TxConfig);

impl LongTermDesigner for FixedConfig {
    fn design(&mut self, _dataset: &[ChannelRealization]) -> Result<TxConfig> {
        Ok(self.0.clone())
    }
}

/// [`instantaneous_solve`] with a per-interval random substream.
#[derive(Debug, Clone)]
pub struct LocalSearchDesigner {
    pub config: LocalSearchConfig,
    pub sigma2: f64,
    pub max_power: f64,
    pub seed: u64,
}

impl InstantaneousDesigner for LocalSearchDesigner {
    fn design(&mut self, real: &ChannelRealization) -> Result<TxConfig> {
        let mut rng = substream(self.seed, real.index as u64);
        Ok(instantaneous_solve(real, self.sigma2, self.max_power, &self.config, &mut rng)?.tx)
    }
}

/// Per-scheme minimum average user rate (MAUR) and cost counters.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeComparison {
    pub pilot_factor: f64,
    pub pilot_factor_clamped: bool,
    pub maur_longterm: f64,
    pub maur_instantaneous: f64,
    /// MAUR of the per-interval solutions without the pilot penalty.
    pub maur_instantaneous_unpenalized: f64,
    pub solver_calls_longterm: usize,
    pub solver_calls_instantaneous: usize,
    pub wallclock_longterm: Duration,
    pub wallclock_instantaneous: Duration,
}

pub fn compare_schemes(
    dataset: &[ChannelRealization],
    sigma2: f64,
    overhead: &OverheadParams,
    longterm: &mut dyn LongTermDesigner,
    instantaneous: &mut dyn InstantaneousDesigner,
) -> Result<SchemeComparison> {
    if dataset.is_empty() {
        return Err(Error::Empty("scheme comparison needs a nonempty dataset"));
    }
    let started = Instant::now();
    let fixed = longterm.design(dataset)?;
    let solver_calls_longterm = 1;
    let wallclock_longterm = started.elapsed();

    let longterm_rates = dataset
        .iter()
        .map(|real| net_rate_longterm(real, &fixed, sigma2))
        .collect::<Result<Vec<_>>>()?;

    let mut wallclock_instantaneous = Duration::ZERO;
    let mut solver_calls_instantaneous = 0;
    let mut penalized = Vec::with_capacity(dataset.len());
    let mut unpenalized = Vec::with_capacity(dataset.len());
    for real in dataset {
        let started = Instant::now();
        let tx = instantaneous.design(real)?;
        wallclock_instantaneous += started.elapsed();
        solver_calls_instantaneous += 1;
        penalized.push(net_rate_instantaneous(real, &tx, sigma2, overhead)?);
        unpenalized.push(net_rate_longterm(real, &tx, sigma2)?);
    }

    Ok(SchemeComparison {
        pilot_factor: pilot_overhead_factor(overhead),
        pilot_factor_clamped: overhead.is_clamped(),
        maur_longterm: evaluation_reward(&longterm_rates)?,
        maur_instantaneous: evaluation_reward(&penalized)?,
        maur_instantaneous_unpenalized: evaluation_reward(&unpenalized)?,
        solver_calls_longterm,
        solver_calls_instantaneous,
        wallclock_longterm,
        wallclock_instantaneous,
    })
}
