//! Effective channels, SINR, achievable rates and pilot-overhead accounting.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, LongTermCsi};
use crate::cmat::{dot, CMatrix, C64};
use crate::error::{ensure_len, Error, Result};
use crate::rng::substream;

/// Slack allowed on the transmit-power constraint.
pub const POWER_TOLERANCE: f64 = 1e-9;

/// Precoder and RIS phase configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TxConfig {
    /// `M x K`, column `k` is the beamformer of user `k`.
    pub precoder: CMatrix,
    /// One angle per RIS element, radians.
    pub phase_angles: Vec<f64>,
    /// Transmit power budget, watts.
    pub max_power: f64,
}

impl TxConfig {
    pub fn new(precoder: CMatrix, phase_angles: Vec<f64>, max_power: f64) -> Result<Self> {
        if !(max_power > 0.0) {
            return Err(Error::Domain(format!("power budget must be positive, got {max_power}")));
        }
        let tx = Self {
            precoder,
            phase_angles,
            max_power,
        };
        if !tx.satisfies_power_budget() {
            return Err(Error::Domain(format!(
                "precoder power {} exceeds budget {}",
                tx.transmit_power(),
                max_power
            )));
        }
        Ok(tx)
    }

    pub fn m(&self) -> usize {
        self.precoder.rows()
    }

    pub fn k(&self) -> usize {
        self.precoder.cols()
    }

    pub fn n(&self) -> usize {
        self.phase_angles.len()
    }

    /// Unit-modulus reflection coefficients `cos(a) + j sin(a)`.
    pub fn phase_shifts(&self) -> Vec<C64> {
        self.phase_angles.iter().map(|&a| C64::new(a.cos(), a.sin())).collect()
    }

    /// `tr(W W^H)`.
    pub fn transmit_power(&self) -> f64 {
        self.precoder.frobenius_norm_sqr()
    }

    pub fn satisfies_power_budget(&self) -> bool {
        self.transmit_power() <= self.max_power + POWER_TOLERANCE
    }
}

/// `v_k = ris_user[k]^T diag(phi) bs_ris + bs_user[k]^T`, one `M`-vector per user.
pub fn effective_channel(real: &ChannelRealization, phase_angles: &[f64]) -> Result<Vec<Vec<C64>>> {
    let (m, n) = (real.m(), real.n());
    ensure_len("phase angles", n, phase_angles.len())?;
    real.check_dims(m, n, real.k())?;
    let phi: Vec<C64> = phase_angles.iter().map(|&a| C64::new(a.cos(), a.sin())).collect();
    Ok(real
        .ris_user
        .iter()
        .zip(&real.bs_user)
        .map(|(g, h)| {
            let mut v = h.clone();
            for (row, (gn, pn)) in g.iter().zip(&phi).enumerate() {
                let c = gn * pn;
                for (vm, gm) in v.iter_mut().zip(real.bs_ris.row(row)) {
                    *vm += c * gm;
                }
            }
            v
        })
        .collect())
}

/// Per-user SINR with equal noise power `sigma2` at every user.
pub fn sinr(real: &ChannelRealization, tx: &TxConfig, sigma2: f64) -> Result<Vec<f64>> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain(format!("noise power must be positive, got {sigma2}")));
    }
    ensure_len("precoder rows", real.m(), tx.m())?;
    ensure_len("precoder columns", real.k(), tx.k())?;
    let v = effective_channel(real, &tx.phase_angles)?;
    let columns: Vec<Vec<C64>> = (0..tx.k()).map(|j| tx.precoder.column(j)).collect();
    Ok(v.iter()
        .enumerate()
        .map(|(k, vk)| {
            let mut signal = 0.0;
            let mut interference = 0.0;
            for (j, wj) in columns.iter().enumerate() {
                let p = dot(vk, wj).norm_sqr();
                if j == k {
                    signal = p;
                } else {
                    interference += p;
                }
            }
            signal / (interference + sigma2)
        })
        .collect())
}

/// `log2(1 + sinr)`.
pub fn rate(sinr: f64) -> Result<f64> {
    if !(sinr >= 0.0) {
        return Err(Error::Domain(format!("SINR must be nonnegative, got {sinr}")));
    }
    Ok(sinr.ln_1p() / std::f64::consts::LN_2)
}

pub fn min_rate(rates: &[f64]) -> Result<f64> {
    rates
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(Error::Empty("minimum rate over an empty user set"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub per_user_sinr: Vec<f64>,
    pub per_user_rate: Vec<f64>,
    pub min_rate: f64,
}

impl RateReport {
    pub fn from_sinr(per_user_sinr: Vec<f64>) -> Result<Self> {
        let per_user_rate = per_user_sinr.iter().map(|&s| rate(s)).collect::<Result<Vec<_>>>()?;
        let min_rate = min_rate(&per_user_rate)?;
        Ok(Self {
            per_user_sinr,
            per_user_rate,
            min_rate,
        })
    }

    pub fn evaluate(real: &ChannelRealization, tx: &TxConfig, sigma2: f64) -> Result<Self> {
        Self::from_sinr(sinr(real, tx, sigma2)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverheadParams {
    /// Time slots per coherence interval.
    pub tau_c: usize,
    pub k: usize,
    pub n: usize,
}

impl OverheadParams {
    /// Minimum number of pilot slots, `2K + N - 1`.
    pub fn pilot_slots(&self) -> usize {
        (2 * self.k + self.n).saturating_sub(1)
    }

    /// True when the pilots consume the whole interval and the factor is clamped.
    pub fn is_clamped(&self) -> bool {
        self.pilot_slots() >= self.tau_c
    }
}

/// `max(0, 1 - (2K + N - 1) / tau_c)`.
pub fn pilot_overhead_factor(ov: &OverheadParams) -> f64 {
    if ov.tau_c == 0 {
        return 0.0;
    }
    (1.0 - ov.pilot_slots() as f64 / ov.tau_c as f64).max(0.0)
}

/// Net rates of the instantaneous-CSI scheme, which pays the pilot overhead.
pub fn net_rate_instantaneous(
    real: &ChannelRealization,
    tx: &TxConfig,
    sigma2: f64,
    ov: &OverheadParams,
) -> Result<Vec<f64>> {
    let factor = pilot_overhead_factor(ov);
    Ok(net_rate_longterm(real, tx, sigma2)?
        .into_iter()
        .map(|r| factor * r)
        .collect())
}

/// Net rates of the long-term scheme: every slot carries data.
pub fn net_rate_longterm(real: &ChannelRealization, tx: &TxConfig, sigma2: f64) -> Result<Vec<f64>> {
    sinr(real, tx, sigma2)?.into_iter().map(rate).collect()
}

/// Monte-Carlo estimate of per-user ergodic rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicEstimate {
    pub mean_rate: Vec<f64>,
    /// Standard error of each user's sample mean.
    pub std_error: Vec<f64>,
    pub samples: usize,
}

impl ErgodicEstimate {
    /// Minimum over users of the mean rates.
    pub fn min_rate(&self) -> f64 {
        self.mean_rate.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Averages rates over `n_mc` fresh realizations drawn from substreams of `seed`.
pub fn ergodic_rates(csi: &LongTermCsi, tx: &TxConfig, sigma2: f64, n_mc: usize, seed: u64) -> Result<ErgodicEstimate> {
    if n_mc == 0 {
        return Err(Error::Empty("Monte-Carlo estimate needs at least one sample"));
    }
    let k = csi.dims().k;
    let mut sum = vec![0.0; k];
    let mut sum_sq = vec![0.0; k];
    for i in 0..n_mc {
        let real = csi.sample_realization(&mut substream(seed, i as u64), i);
        for (u, r) in net_rate_longterm(&real, tx, sigma2)?.into_iter().enumerate() {
            sum[u] += r;
            sum_sq[u] += r * r;
        }
    }
    let n = n_mc as f64;
    let mean_rate: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_error = mean_rate
        .iter()
        .zip(&sum_sq)
        .map(|(mean, sq)| {
            if n_mc < 2 {
                return f64::INFINITY;
            }
            let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    Ok(ErgodicEstimate {
        mean_rate,
        std_error,
        samples: n_mc,
    })
}

/// `min_k` of the Monte-Carlo mean of `R_k`; the minimum is taken after averaging.
pub fn ergodic_min_rate(csi: &LongTermCsi, tx: &TxConfig, sigma2: f64, n_mc: usize, seed: u64) -> Result<f64> {
    Ok(ergodic_rates(csi, tx, sigma2, n_mc, seed)?.min_rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Angles, Dims, LargeScaleGains, RicianFactors};
    use crate::channel::complex_normal;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn random_real(m: usize, n: usize, k: usize, seed: u64) -> ChannelRealization {
        let mut rng = seeded(seed);
        ChannelRealization {
            bs_ris: CMatrix::from_fn(n, m, |_, _| complex_normal(&mut rng)),
            ris_user: (0..k).map(|_| (0..n).map(|_| complex_normal(&mut rng)).collect()).collect(),
            bs_user: (0..k).map(|_| (0..m).map(|_| complex_normal(&mut rng)).collect()).collect(),
            index: 1,
        }
    }

    fn random_tx(m: usize, n: usize, k: usize, seed: u64) -> TxConfig {
        let mut rng = seeded(seed ^ 0xABCD);
        let mut w = CMatrix::from_fn(m, k, |_, _| complex_normal(&mut rng));
        let norm = w.frobenius_norm();
        w.scale(1.0 / norm);
        TxConfig::new(w, (0..n).map(|_| rng.random::<f64>() * 2.0 * PI).collect(), 1.0).unwrap()
    }

    // Triple loop, written without any of the helpers above.
    fn sinr_oracle(real: &ChannelRealization, tx: &TxConfig, sigma2: f64) -> Vec<f64> {
        let (m, n, k) = (real.m(), real.n(), real.k());
        let mut v = vec![vec![C64::new(0.0, 0.0); m]; k];
        for u in 0..k {
            for col in 0..m {
                let mut acc = real.bs_user[u][col];
                for e in 0..n {
                    let phi = C64::from_polar(1.0, tx.phase_angles[e]);
                    acc += real.ris_user[u][e] * phi * real.bs_ris.get(e, col);
                }
                v[u][col] = acc;
            }
        }
        let mut gains = vec![vec![0.0; k]; k];
        for u in 0..k {
            for j in 0..k {
                let mut acc = C64::new(0.0, 0.0);
                for col in 0..m {
                    acc += v[u][col] * tx.precoder.get(col, j);
                }
                gains[u][j] = acc.re * acc.re + acc.im * acc.im;
            }
        }
        (0..k)
            .map(|u| {
                let interference: f64 = (0..k).filter(|&j| j != u).map(|j| gains[u][j]).sum();
                gains[u][u] / (interference + sigma2)
            })
            .collect()
    }

    #[test]
    fn zero_bs_ris_leaves_direct_channel() {
        let mut real = random_real(3, 4, 2, 1);
        real.bs_ris = CMatrix::zeros(4, 3);
        let v = effective_channel(&real, &[0.0; 4]).unwrap();
        assert_eq!(v, real.bs_user);
    }

    #[test]
    fn scalar_effective_channel() {
        let real = ChannelRealization {
            bs_ris: CMatrix::from_row_major(1, 1, vec![C64::new(0.5, -1.0)]),
            ris_user: vec![vec![C64::new(2.0, 1.0)]],
            bs_user: vec![vec![C64::new(0.0, 0.0)]],
            index: 1,
        };
        let v = effective_channel(&real, &[0.3]).unwrap();
        let expected = C64::new(2.0, 1.0) * C64::new(0.3f64.cos(), 0.3f64.sin()) * C64::new(0.5, -1.0);
        assert!((v[0][0] - expected).norm() < 1e-15);
    }

    #[test]
    fn effective_channel_matches_loops() {
        let real = random_real(2, 4, 2, 3);
        let angles = [0.1, 1.7, 3.0, 5.5];
        let v = effective_channel(&real, &angles).unwrap();
        for k in 0..2 {
            for m in 0..2 {
                let mut acc = real.bs_user[k][m];
                for n in 0..4 {
                    acc += real.ris_user[k][n] * C64::from_polar(1.0, angles[n]) * real.bs_ris.get(n, m);
                }
                assert!((v[k][m] - acc).norm() < 1e-13);
            }
        }
        assert!(effective_channel(&real, &angles[..3]).is_err());
    }

    #[test]
    fn single_user_sinr_is_snr() {
        let real = ChannelRealization {
            bs_ris: CMatrix::zeros(1, 1),
            ris_user: vec![vec![C64::new(0.0, 0.0)]],
            bs_user: vec![vec![C64::new(2.0, 0.0)]],
            index: 1,
        };
        let tx = TxConfig::new(CMatrix::from_row_major(1, 1, vec![C64::new(1.0, 0.0)]), vec![0.0], 1.0).unwrap();
        let s = sinr(&real, &tx, 2.0).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-15);
        assert!(sinr(&real, &tx, 0.0).is_err());
    }

    #[test]
    fn zero_precoder_gives_zero_sinr() {
        let real = random_real(2, 3, 3, 4);
        let tx = TxConfig::new(CMatrix::zeros(2, 3), vec![0.0; 3], 1.0).unwrap();
        assert!(sinr(&real, &tx, 1e-3).unwrap().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn three_user_sinr_matches_oracle() {
        let real = random_real(3, 4, 3, 8);
        let tx = random_tx(3, 4, 3, 8);
        let got = sinr(&real, &tx, 0.05).unwrap();
        for (a, b) in got.iter().zip(sinr_oracle(&real, &tx, 0.05)) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn rate_values() {
        assert_eq!(rate(0.0).unwrap(), 0.0);
        assert!((rate(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((rate(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(rate(-0.1).is_err());
    }

    #[test]
    fn min_rate_values() {
        assert_eq!(min_rate(&[1.2, 0.8, 2.0]).unwrap(), 0.8);
        assert_eq!(min_rate(&[1.585]).unwrap(), 1.585);
        assert_eq!(min_rate(&[0.7; 4]).unwrap(), 0.7);
        assert!(min_rate(&[]).is_err());
    }

    #[test]
    fn pilot_factor_values() {
        let f = |k, n, tau_c| pilot_overhead_factor(&OverheadParams { tau_c, k, n });
        assert!((f(10, 80, 150) - 0.34).abs() < 1e-12);
        assert_eq!(f(4, 143, 150), 0.0);
        assert_eq!(f(4, 200, 150), 0.0);
        assert!(OverheadParams { tau_c: 150, k: 4, n: 200 }.is_clamped());
        assert!(!OverheadParams { tau_c: 150, k: 4, n: 100 }.is_clamped());
    }

    #[test]
    fn net_rates() {
        let real = ChannelRealization {
            bs_ris: CMatrix::zeros(1, 1),
            ris_user: vec![vec![C64::new(0.0, 0.0)]],
            bs_user: vec![vec![C64::new(3f64.sqrt(), 0.0)]],
            index: 1,
        };
        let tx = TxConfig::new(CMatrix::from_row_major(1, 1, vec![C64::new(1.0, 0.0)]), vec![0.0], 1.0).unwrap();
        // SINR = 3 and factor = 1 - 99/150 = 0.34.
        let ov = OverheadParams { tau_c: 150, k: 10, n: 80 };
        let net = net_rate_instantaneous(&real, &tx, 1.0, &ov).unwrap();
        assert!((net[0] - 0.68).abs() < 1e-12);
        let clamped = OverheadParams { tau_c: 10, k: 10, n: 80 };
        assert_eq!(net_rate_instantaneous(&real, &tx, 1.0, &clamped).unwrap(), vec![0.0]);
        assert!((net_rate_longterm(&real, &tx, 1.0).unwrap()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn net_rate_composition_and_limit() {
        let real = random_real(3, 5, 2, 12);
        let tx = random_tx(3, 5, 2, 12);
        let ov = OverheadParams { tau_c: 40, k: 2, n: 5 };
        let f = pilot_overhead_factor(&ov);
        let rates: Vec<f64> = sinr(&real, &tx, 0.1).unwrap().into_iter().map(|s| rate(s).unwrap()).collect();
        let net = net_rate_instantaneous(&real, &tx, 0.1, &ov).unwrap();
        for (a, b) in net.iter().zip(&rates) {
            assert!((a - f * b).abs() < 1e-14);
        }
        let huge = OverheadParams { tau_c: usize::MAX / 2, k: 2, n: 5 };
        let lt = net_rate_longterm(&real, &tx, 0.1).unwrap();
        for (a, b) in net_rate_instantaneous(&real, &tx, 0.1, &huge).unwrap().iter().zip(&lt) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(lt, rates);
    }

    fn deterministic_csi() -> LongTermCsi {
        LongTermCsi::new(
            Dims { m: 2, n: 3, k: 2, paths: 1 },
            LargeScaleGains::unit(2),
            RicianFactors::uniform(2, f64::INFINITY, f64::INFINITY, f64::INFINITY),
            Angles::sample(1, 2, &mut seeded(4)),
        )
        .unwrap()
    }

    #[test]
    fn ergodic_rate_of_deterministic_channel() {
        let csi = deterministic_csi();
        let tx = random_tx(2, 3, 2, 1);
        let single = RateReport::evaluate(&csi.sample_realization(&mut seeded(0), 0), &tx, 0.1).unwrap();
        let est = ergodic_min_rate(&csi, &tx, 0.1, 50, 3).unwrap();
        assert!((est - single.min_rate).abs() < 1e-12);
        assert!(ergodic_min_rate(&csi, &tx, 0.1, 0, 3).is_err());
    }

    #[test]
    fn ergodic_single_sample_is_one_realization() {
        let csi = LongTermCsi::new(
            Dims { m: 2, n: 3, k: 2, paths: 1 },
            LargeScaleGains::unit(2),
            RicianFactors::uniform(2, 1.0, 1.0, 1.0),
            Angles::sample(1, 2, &mut seeded(4)),
        )
        .unwrap();
        let tx = random_tx(2, 3, 2, 1);
        let real = csi.sample_realization(&mut substream(77, 0), 0);
        let expected = RateReport::evaluate(&real, &tx, 0.1).unwrap().min_rate;
        assert_eq!(ergodic_min_rate(&csi, &tx, 0.1, 1, 77).unwrap(), expected);
    }

    #[test]
    fn ergodic_estimates_are_self_consistent() {
        let csi = LongTermCsi::new(
            Dims { m: 2, n: 4, k: 2, paths: 1 },
            LargeScaleGains::unit(2),
            RicianFactors::uniform(2, 2.2, 3.75, 2.2),
            Angles::sample(1, 2, &mut seeded(6)),
        )
        .unwrap();
        let tx = random_tx(2, 4, 2, 6);
        let small = ergodic_rates(&csi, &tx, 0.5, 10_000, 1).unwrap();
        let large = ergodic_rates(&csi, &tx, 0.5, 100_000, 2).unwrap();
        for u in 0..2 {
            let se = (small.std_error[u].powi(2) + large.std_error[u].powi(2)).sqrt();
            assert!((small.mean_rate[u] - large.mean_rate[u]).abs() < 3.0 * se, "user {u}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sinr_matches_oracle(m in 1usize..=4, n in 1usize..=4, k in 1usize..=4, seed in any::<u64>()) {
            let real = random_real(m, n, k, seed);
            let tx = random_tx(m, n, k, seed);
            let got = sinr(&real, &tx, 0.3).unwrap();
            for (a, b) in got.iter().zip(sinr_oracle(&real, &tx, 0.3)) {
                prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300));
            }
        }

        #[test]
        fn sinr_ignores_common_phase_of_a_beam(seed in any::<u64>(), user in 0usize..3, theta in 0.0..6.28f64) {
            let real = random_real(3, 4, 3, seed);
            let tx = random_tx(3, 4, 3, seed);
            let mut rotated = tx.clone();
            let rot = C64::from_polar(1.0, theta);
            for r in 0..3 {
                rotated.precoder.set(r, user, tx.precoder.get(r, user) * rot);
            }
            let a = sinr(&real, &tx, 0.2).unwrap();
            let b = sinr(&real, &rotated, 0.2).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-12));
            }
        }

        #[test]
        fn boosting_a_beam_helps_its_user_only(seed in any::<u64>(), user in 0usize..3, c in 1.01..3.0f64) {
            let real = random_real(3, 4, 3, seed);
            let tx = random_tx(3, 4, 3, seed);
            let mut boosted = tx.clone();
            boosted.max_power = f64::MAX;
            for r in 0..3 {
                boosted.precoder.set(r, user, tx.precoder.get(r, user) * c);
            }
            let a = sinr(&real, &tx, 0.2).unwrap();
            let b = sinr(&real, &boosted, 0.2).unwrap();
            for j in 0..3 {
                if j == user {
                    prop_assert!(b[j] > a[j] || a[j] == 0.0);
                } else {
                    prop_assert!(b[j] <= a[j] * (1.0 + 1e-12));
                }
            }
        }

        #[test]
        fn sinr_decreases_with_noise(seed in any::<u64>(), s1 in 1e-3..1.0f64, ds in 1e-3..1.0f64) {
            let real = random_real(2, 3, 2, seed);
            let tx = random_tx(2, 3, 2, seed);
            let a = sinr(&real, &tx, s1).unwrap();
            let b = sinr(&real, &tx, s1 + ds).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(y < x || *x == 0.0);
            }
        }

        #[test]
        fn min_rate_at_most_mean(rates in proptest::collection::vec(0.0..10.0f64, 1..8)) {
            let lo = min_rate(&rates).unwrap();
            let mean = rates.iter().sum::<f64>() / rates.len() as f64;
            prop_assert!(lo <= mean + 1e-12);
            let all_equal = rates.iter().all(|&r| r == rates[0]);
            if !all_equal {
                prop_assert!(lo < mean);
            }
        }

        #[test]
        fn pilot_factor_monotone(k in 1usize..20, n in 1usize..200, tau_c in 1usize..400) {
            let f = |k, n| pilot_overhead_factor(&OverheadParams { tau_c, k, n });
            prop_assert!(f(k, n) < 1.0);
            prop_assert!(f(k, n + 1) <= f(k, n));
            prop_assert!(f(k + 1, n) <= f(k, n));
            prop_assert!((0.0..=1.0).contains(&f(k, n)));
        }
    }
}
