#![allow(dead_code)]

use rand::Rng;
use ris_ddpg::channel::complex_normal;
use ris_ddpg::{ChannelRealization, CMatrix, TxConfig, C64};

pub fn random_realization<R: Rng>(m: usize, n: usize, k: usize, rng: &mut R) -> ChannelRealization {
    ChannelRealization {
        bs_ris: CMatrix::from_fn(n, m, |_, _| complex_normal(rng)),
        ris_user: (0..k).map(|_| (0..n).map(|_| complex_normal(rng)).collect()).collect(),
        bs_user: (0..k).map(|_| (0..m).map(|_| complex_normal(rng)).collect()).collect(),
        index: 1,
    }
}

/// SINR written out with explicit index loops.
pub fn oracle_sinr(real: &ChannelRealization, tx: &TxConfig, sigma2: f64) -> Vec<f64> {
    let (m, n, k) = (real.m(), real.n(), real.k());
    let mut out = Vec::with_capacity(k);
    for user in 0..k {
        let mut v = vec![C64::new(0.0, 0.0); m];
        for a in 0..m {
            let mut acc = real.bs_user[user][a];
            for e in 0..n {
                let phi = C64::from_polar(1.0, tx.phase_angles[e]);
                acc += real.ris_user[user][e] * phi * real.bs_ris.get(e, a);
            }
            v[a] = acc;
        }
        let mut signal = 0.0;
        let mut interference = 0.0;
        for stream in 0..k {
            let mut y = C64::new(0.0, 0.0);
            for a in 0..m {
                y += v[a] * tx.precoder.get(a, stream);
            }
            if stream == user {
                signal = y.norm_sqr();
            } else {
                interference += y.norm_sqr();
            }
        }
        out.push(signal / (interference + sigma2));
    }
    out
}

pub fn power_ok(tx: &TxConfig, tol: f64) -> bool {
    (tx.transmit_power() / tx.max_power - 1.0).abs() <= tol
}

pub fn unit_modulus_ok(tx: &TxConfig, tol: f64) -> bool {
    tx.phase_shifts().iter().all(|p| (p.norm() - 1.0).abs() <= tol)
}
