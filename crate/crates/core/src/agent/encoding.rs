//! Flat real encodings of states and actions.
//!
//! State layout (every complex value stored as `re, im`):
//!
//! | segment      | entries            | order                       |
//! |--------------|--------------------|-----------------------------|
//! | precoder     | `2 M K`            | `W` row-major (`m`, `k`)    |
//! | phase shifts | `2 N`              | `phi_1 .. phi_N`            |
//! | BS-RIS       | `2 N M`            | row-major (`n`, `m`)        |
//! | RIS-user     | `2 K N`            | user-major                  |
//! | BS-user      | `2 K M`            | user-major                  |
//!
//! Action layout: `2 M K` raw precoder entries (same order as the state
//! segment) followed by `N` phase increments, all in `[-1, 1]`.

use std::f64::consts::{PI, TAU};

use crate::channel::ChannelRealization;
use crate::cmat::{CMatrix, C64};
use crate::error::{ensure_len, Error, Result};
use crate::rate::TxConfig;

/// Frobenius norm below which a raw precoder is treated as degenerate.
pub const PRECODER_FLOOR: f64 = 1e-12;

/// Array sizes that fix the encoding lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

impl Layout {
    pub fn state_dim(&self) -> usize {
        state_dim(self.m, self.n, self.k)
    }

    pub fn action_dim(&self) -> usize {
        action_dim(self.m, self.n, self.k)
    }

    pub fn precoder_len(&self) -> usize {
        2 * self.m * self.k
    }

    /// Range of the channel segment inside a state vector.
    pub fn channel_segment(&self) -> std::ops::Range<usize> {
        self.precoder_len() + 2 * self.n..self.state_dim()
    }
}

pub fn state_dim(m: usize, n: usize, k: usize) -> usize {
    2 * m * k + 2 * n + 2 * (n * m + m * k + n * k)
}

/// `2 M K + N`.
pub fn action_dim(m: usize, n: usize, k: usize) -> usize {
    2 * m * k + n
}

fn push_complex<'a>(out: &mut Vec<f64>, values: impl IntoIterator<Item = &'a C64>) {
    for z in values {
        out.push(z.re);
        out.push(z.im);
    }
}

pub fn encode_state(tx: &TxConfig, real: &ChannelRealization) -> Result<Vec<f64>> {
    let (m, n, k) = (real.m(), real.n(), real.k());
    real.check_dims(m, n, k)?;
    ensure_len("precoder rows", m, tx.m())?;
    ensure_len("precoder columns", k, tx.k())?;
    ensure_len("phase angles", n, tx.n())?;
    let mut s = Vec::with_capacity(state_dim(m, n, k));
    push_complex(&mut s, tx.precoder.as_slice());
    push_complex(&mut s, &tx.phase_shifts());
    push_complex(&mut s, real.bs_ris.as_slice());
    push_complex(&mut s, real.ris_user.iter().flatten());
    push_complex(&mut s, real.bs_user.iter().flatten());
    Ok(s)
}

/// Inverse of [`encode_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedState {
    pub precoder: CMatrix,
    pub phase_shifts: Vec<C64>,
    pub realization: ChannelRealization,
}

impl DecodedState {
    pub fn decode(layout: Layout, state: &[f64]) -> Result<Self> {
        ensure_len("state vector", layout.state_dim(), state.len())?;
        let Layout { m, n, k } = layout;
        let mut values = state.chunks_exact(2).map(|p| C64::new(p[0], p[1]));
        let mut take = |count: usize| values.by_ref().take(count).collect::<Vec<_>>();
        let precoder = CMatrix::from_row_major(m, k, take(m * k));
        let phase_shifts = take(n);
        let bs_ris = CMatrix::from_row_major(n, m, take(n * m));
        let ris_user = (0..k).map(|_| take(n)).collect();
        let bs_user = (0..k).map(|_| take(m)).collect();
        Ok(Self {
            precoder,
            phase_shifts,
            realization: ChannelRealization {
                bs_ris,
                ris_user,
                bs_user,
                index: 0,
            },
        })
    }
}

/// Wraps an angle into `[0, 2 pi)`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2 pi for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Applies an action: the precoder is rebuilt from the raw entries and
/// scaled to the full power budget, every phase angle is advanced by
/// `a_i * pi` and wrapped. A degenerate raw precoder keeps the previous one.
pub fn apply_action(tx: &TxConfig, action: &[f64]) -> Result<TxConfig> {
    let layout = Layout {
        m: tx.m(),
        n: tx.n(),
        k: tx.k(),
    };
    ensure_len("action vector", layout.action_dim(), action.len())?;
    if action.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("action vector".into()));
    }
    let (raw, increments) = action.split_at(layout.precoder_len());
    let raw = CMatrix::from_row_major(
        layout.m,
        layout.k,
        raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect(),
    );
    let norm = raw.frobenius_norm();
    let precoder = if norm < PRECODER_FLOOR {
        tx.precoder.clone()
    } else {
        raw.scaled(tx.max_power.sqrt() / norm)
    };
    let phase_angles = tx
        .phase_angles
        .iter()
        .zip(increments)
        .map(|(a, inc)| wrap_angle(a + inc * PI))
        .collect();
    Ok(TxConfig {
        precoder,
        phase_angles,
        max_power: tx.max_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_normal;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::FRAC_PI_2;

    fn random_real(m: usize, n: usize, k: usize, seed: u64) -> ChannelRealization {
        let mut rng = seeded(seed);
        ChannelRealization {
            bs_ris: CMatrix::from_fn(n, m, |_, _| complex_normal(&mut rng)),
            ris_user: (0..k).map(|_| (0..n).map(|_| complex_normal(&mut rng)).collect()).collect(),
            bs_user: (0..k).map(|_| (0..m).map(|_| complex_normal(&mut rng)).collect()).collect(),
            index: 0,
        }
    }

    fn uniform_tx(m: usize, n: usize, k: usize, power: f64) -> TxConfig {
        let amp = (power / (m * k) as f64).sqrt();
        TxConfig::new(CMatrix::from_fn(m, k, |_, _| C64::new(amp, 0.0)), vec![0.5; n], power).unwrap()
    }

    #[test]
    fn action_dims() {
        assert_eq!(action_dim(2, 4, 2), 12);
        assert_eq!(action_dim(8, 80, 10), 240);
        assert_eq!(action_dim(1, 1, 1), 3);
    }

    #[test]
    fn smallest_state_length() {
        assert_eq!(state_dim(1, 1, 1), 10);
        let s = encode_state(&uniform_tx(1, 1, 1, 1.0), &random_real(1, 1, 1, 0)).unwrap();
        assert_eq!(s.len(), 10);
    }

    #[test]
    fn encode_decode_round_trip() {
        let real = random_real(3, 5, 2, 4);
        let tx = uniform_tx(3, 5, 2, 2.0);
        let layout = Layout { m: 3, n: 5, k: 2 };
        let s = encode_state(&tx, &real).unwrap();
        let d = DecodedState::decode(layout, &s).unwrap();
        assert_eq!(d.precoder, tx.precoder);
        assert_eq!(d.phase_shifts, tx.phase_shifts());
        assert_eq!(d.realization, real);
        assert!(DecodedState::decode(layout, &s[1..]).is_err());
    }

    #[test]
    fn different_channels_touch_only_channel_segment() {
        let tx = uniform_tx(2, 4, 2, 1.0);
        let layout = Layout { m: 2, n: 4, k: 2 };
        let a = encode_state(&tx, &random_real(2, 4, 2, 1)).unwrap();
        let b = encode_state(&tx, &random_real(2, 4, 2, 2)).unwrap();
        let channel = layout.channel_segment();
        for i in 0..a.len() {
            if channel.contains(&i) {
                assert_ne!(a[i], b[i], "entry {i}");
            } else {
                assert_eq!(a[i], b[i], "entry {i}");
            }
        }
    }

    #[test]
    fn zero_increments_keep_phases() {
        let tx = uniform_tx(2, 3, 2, 1.0);
        let mut a = vec![0.3; action_dim(2, 3, 2)];
        a[8..].iter_mut().for_each(|x| *x = 0.0);
        assert_eq!(apply_action(&tx, &a).unwrap().phase_angles, tx.phase_angles);
    }

    #[test]
    fn half_increment_from_quarter_turn_reaches_pi() {
        let mut tx = uniform_tx(1, 1, 1, 1.0);
        tx.phase_angles = vec![FRAC_PI_2];
        let out = apply_action(&tx, &[0.5, 0.1, 0.5]).unwrap();
        assert!((out.phase_angles[0] - PI).abs() < 1e-15);
        let phi = out.phase_shifts()[0];
        assert!((phi - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn precoder_is_normalized_with_direction_kept() {
        // Raw precoder with Frobenius norm 4.
        let tx = uniform_tx(2, 1, 2, 1.0);
        let raw = [2.0, 0.0, 0.0, 2.0, 0.0, -2.0, 2.0, 0.0, 0.0];
        let scaled: Vec<f64> = raw.iter().map(|x| x / 4.0).collect();
        let out = apply_action(&tx, &scaled).unwrap();
        assert!((out.precoder.frobenius_norm() - 1.0).abs() < 1e-15);
        let expected = [C64::new(0.5, 0.0), C64::new(0.0, 0.5), C64::new(0.0, -0.5), C64::new(0.5, 0.0)];
        for (a, b) in out.precoder.as_slice().iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn degenerate_precoder_falls_back() {
        let tx = uniform_tx(2, 2, 2, 3.0);
        let out = apply_action(&tx, &[0.0; 10]).unwrap();
        assert_eq!(out.precoder, tx.precoder);
        assert!(apply_action(&tx, &[0.0; 9]).is_err());
    }

    #[test]
    fn wrap_handles_edges() {
        assert_eq!(wrap_angle(TAU), 0.0);
        assert_eq!(wrap_angle(-1e-300), 0.0);
        assert!((wrap_angle(-FRAC_PI_2) - 1.5 * PI).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn actions_preserve_constraints(seed in any::<u64>(), power in 1e-3..10.0f64, steps in 1usize..20) {
            let mut rng = seeded(seed);
            let mut tx = uniform_tx(3, 5, 2, power);
            for _ in 0..steps {
                let a: Vec<f64> = (0..action_dim(3, 5, 2)).map(|_| rng.random_range(-1.0..=1.0)).collect();
                tx = apply_action(&tx, &a).unwrap();
                prop_assert!((tx.transmit_power() / power - 1.0).abs() < 1e-9);
                for phi in tx.phase_shifts() {
                    prop_assert!((phi.norm() - 1.0).abs() < 1e-12);
                }
                for &a in &tx.phase_angles {
                    prop_assert!((0.0..TAU).contains(&a));
                }
            }
        }
    }
}
