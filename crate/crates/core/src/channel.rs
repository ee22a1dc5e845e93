//! Long-term channel statistics and Rician fading realizations.
//!
//! Naming convention: the RIS-to-user vector of user `k` (length `N`) is
//! `ris_user[k]`, the direct BS-to-user vector (length `M`) is `bs_user[k]`
//! and the BS-to-RIS matrix (`N x M`) is `bs_ris`. User `k` sees the
//! effective channel `ris_user[k]^T diag(phi) bs_ris + bs_user[k]^T`.

use std::f64::consts::TAU;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cmat::{CMatrix, C64};
use crate::error::{ensure_len, Error, Result};
use crate::rng::substream;

pub type Point3 = [f64; 3];

fn distance(a: &Point3, b: &Point3) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Array sizes of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    /// BS antennas.
    pub m: usize,
    /// RIS elements.
    pub n: usize,
    /// Single-antenna users.
    pub k: usize,
    /// Number of BS-RIS propagation paths.
    pub paths: usize,
}

impl Dims {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.k == 0 || self.paths == 0 {
            return Err(Error::InvalidDimension(format!(
                "all of M, N, K, I must be positive (got {self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGeometry {
    pub bs_position: Point3,
    pub ris_position: Point3,
    pub user_positions: Vec<Point3>,
    pub user_disk_center: Point3,
    pub user_disk_radius: f64,
}

impl ScenarioGeometry {
    /// Places `users` users uniformly at random on the horizontal disk.
    pub fn generate<R: Rng + ?Sized>(
        bs_position: Point3,
        ris_position: Point3,
        user_disk_center: Point3,
        user_disk_radius: f64,
        users: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if user_disk_radius < 0.0 || !user_disk_radius.is_finite() {
            return Err(Error::Domain(format!(
                "user disk radius must be finite and nonnegative, got {user_disk_radius}"
            )));
        }
        let user_positions = (0..users)
            .map(|_| {
                let r = user_disk_radius * rng.random::<f64>().sqrt();
                let theta = TAU * rng.random::<f64>();
                [
                    user_disk_center[0] + r * theta.cos(),
                    user_disk_center[1] + r * theta.sin(),
                    user_disk_center[2],
                ]
            })
            .collect();
        let geometry = Self {
            bs_position,
            ris_position,
            user_positions,
            user_disk_center,
            user_disk_radius,
        };
        geometry.validate()?;
        Ok(geometry)
    }

    /// Checks that all link distances used for path loss are strictly positive.
    pub fn validate(&self) -> Result<()> {
        let check = |a: &Point3, b: &Point3, what: &str| {
            let d = distance(a, b);
            if d > 0.0 && d.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{what} distance must be positive, got {d}")))
            }
        };
        check(&self.bs_position, &self.ris_position, "BS-RIS")?;
        for u in &self.user_positions {
            check(&self.bs_position, u, "BS-user")?;
            check(&self.ris_position, u, "RIS-user")?;
        }
        Ok(())
    }

    pub fn users_within_disk(&self) -> bool {
        self.user_positions
            .iter()
            .all(|u| distance(u, &self.user_disk_center) <= self.user_disk_radius + 1e-9)
    }

    pub fn bs_ris_distance(&self) -> f64 {
        distance(&self.bs_position, &self.ris_position)
    }

    pub fn ris_user_distance(&self, k: usize) -> f64 {
        distance(&self.ris_position, &self.user_positions[k])
    }

    pub fn bs_user_distance(&self, k: usize) -> f64 {
        distance(&self.bs_position, &self.user_positions[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub pl0_db: f64,
    pub d0: f64,
    pub alpha_bs_ris: f64,
    pub alpha_ris_user: f64,
    pub alpha_bs_user: f64,
    pub noise_density_dbm_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self {
            pl0_db: -30.0,
            d0: 1.0,
            alpha_bs_ris: 2.2,
            alpha_ris_user: 2.2,
            alpha_bs_user: 3.5,
            noise_density_dbm_hz: -174.0,
            bandwidth_hz: 1e6,
        }
    }
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0) {
            return Err(Error::Domain(format!("d0 must be positive, got {}", self.d0)));
        }
        for (name, a) in [
            ("alpha_bs_ris", self.alpha_bs_ris),
            ("alpha_ris_user", self.alpha_ris_user),
            ("alpha_bs_user", self.alpha_bs_user),
        ] {
            if !(a >= 1.0) {
                return Err(Error::Domain(format!("{name} must be >= 1, got {a}")));
            }
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::Domain(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        Ok(())
    }
}

/// `10^((PL0 - 10 alpha log10(d / d0)) / 10)`.
pub fn path_loss_linear(params: &PathLossParams, d: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    let db = params.pl0_db - 10.0 * alpha * (d / params.d0).log10();
    Ok(10f64.powf(db / 10.0))
}

/// Receiver noise power in watts over the configured bandwidth.
pub fn noise_power(params: &PathLossParams) -> f64 {
    let dbm = params.noise_density_dbm_hz + 10.0 * params.bandwidth_hz.log10();
    10f64.powf((dbm - 30.0) / 10.0)
}

/// `[1, e^{j theta}, ..., e^{j (x-1) theta}]`.
pub fn steering_vector(x: usize, theta: f64) -> Result<Vec<C64>> {
    if x == 0 {
        return Err(Error::InvalidDimension(
            "steering vector length must be at least 1".into(),
        ));
    }
    Ok((0..x).map(|i| C64::from_polar(1.0, i as f64 * theta)).collect())
}

/// Angles that, together with the array sizes, fix every LoS component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    /// Per BS-RIS path, arrival angle at the RIS.
    pub aoa_bs_ris: Vec<f64>,
    /// Per BS-RIS path, departure angle at the BS.
    pub aod_bs_ris: Vec<f64>,
    /// Per user, departure angle at the RIS.
    pub aod_ris_user: Vec<f64>,
    /// Per user, departure angle at the BS.
    pub aod_bs_user: Vec<f64>,
}

impl Angles {
    /// All angles i.i.d. uniform on `[0, 2 pi)`.
    pub fn sample<R: Rng + ?Sized>(paths: usize, users: usize, rng: &mut R) -> Self {
        let mut draw = |count: usize| (0..count).map(|_| TAU * rng.random::<f64>()).collect();
        let aoa_bs_ris = draw(paths);
        let aod_bs_ris = draw(paths);
        let aod_ris_user = draw(users);
        let aod_bs_user = draw(users);
        Self {
            aoa_bs_ris,
            aod_bs_ris,
            aod_ris_user,
            aod_bs_user,
        }
    }
}

/// Deterministic LoS parts of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct LosComponents {
    pub bs_ris: CMatrix,
    pub ris_user: Vec<Vec<C64>>,
    pub bs_user: Vec<Vec<C64>>,
}

/// Sum over paths of `a_N(aoa_i) a_M(aod_i)^T`, plus per-user steering vectors.
pub fn los_components(m: usize, n: usize, angles: &Angles) -> Result<LosComponents> {
    ensure_len(
        "BS-RIS departure angles",
        angles.aoa_bs_ris.len(),
        angles.aod_bs_ris.len(),
    )?;
    ensure_len(
        "BS-user departure angles",
        angles.aod_ris_user.len(),
        angles.aod_bs_user.len(),
    )?;
    let mut bs_ris = CMatrix::zeros(n, m);
    for (&aoa, &aod) in angles.aoa_bs_ris.iter().zip(&angles.aod_bs_ris) {
        let arrive = steering_vector(n, aoa)?;
        let depart = steering_vector(m, aod)?;
        bs_ris.add_assign(&CMatrix::outer(&arrive, &depart));
    }
    let ris_user = angles
        .aod_ris_user
        .iter()
        .map(|&t| steering_vector(n, t))
        .collect::<Result<_>>()?;
    let bs_user = angles
        .aod_bs_user
        .iter()
        .map(|&t| steering_vector(m, t))
        .collect::<Result<_>>()?;
    Ok(LosComponents {
        bs_ris,
        ris_user,
        bs_user,
    })
}

/// Linear large-scale power gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleGains {
    /// BS-RIS.
    pub kappa: f64,
    /// RIS-user, one per user.
    pub beta: Vec<f64>,
    /// BS-user, one per user.
    pub gamma: Vec<f64>,
}

impl LargeScaleGains {
    pub fn from_geometry(geometry: &ScenarioGeometry, params: &PathLossParams) -> Result<Self> {
        geometry.validate()?;
        params.validate()?;
        let users = geometry.user_positions.len();
        Ok(Self {
            kappa: path_loss_linear(params, geometry.bs_ris_distance(), params.alpha_bs_ris)?,
            beta: (0..users)
                .map(|k| path_loss_linear(params, geometry.ris_user_distance(k), params.alpha_ris_user))
                .collect::<Result<_>>()?,
            gamma: (0..users)
                .map(|k| path_loss_linear(params, geometry.bs_user_distance(k), params.alpha_bs_user))
                .collect::<Result<_>>()?,
        })
    }

    pub fn unit(users: usize) -> Self {
        Self {
            kappa: 1.0,
            beta: vec![1.0; users],
            gamma: vec![1.0; users],
        }
    }
}

/// Rician factors: `delta` for BS-RIS, `epsilon[k]` RIS-user, `eta[k]` BS-user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicianFactors {
    pub delta: f64,
    pub epsilon: Vec<f64>,
    pub eta: Vec<f64>,
}

impl RicianFactors {
    pub fn uniform(users: usize, delta: f64, epsilon: f64, eta: f64) -> Self {
        Self {
            delta,
            epsilon: vec![epsilon; users],
            eta: vec![eta; users],
        }
    }
}

/// Slowly varying channel statistics: sizes, large-scale gains, Rician
/// factors, angles and the LoS components they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct LongTermCsi {
    dims: Dims,
    gains: LargeScaleGains,
    rician: RicianFactors,
    angles: Angles,
    los: LosComponents,
}

impl LongTermCsi {
    pub fn new(dims: Dims, gains: LargeScaleGains, rician: RicianFactors, angles: Angles) -> Result<Self> {
        dims.validate()?;
        ensure_len("RIS-user gains", dims.k, gains.beta.len())?;
        ensure_len("BS-user gains", dims.k, gains.gamma.len())?;
        ensure_len("RIS-user Rician factors", dims.k, rician.epsilon.len())?;
        ensure_len("BS-user Rician factors", dims.k, rician.eta.len())?;
        ensure_len("BS-RIS arrival angles", dims.paths, angles.aoa_bs_ris.len())?;
        ensure_len("BS-RIS departure angles", dims.paths, angles.aod_bs_ris.len())?;
        ensure_len("RIS-user angles", dims.k, angles.aod_ris_user.len())?;
        ensure_len("BS-user angles", dims.k, angles.aod_bs_user.len())?;
        let nonneg = |x: f64| x >= 0.0 && x.is_finite();
        let gains_ok = nonneg(gains.kappa)
            && gains.beta.iter().copied().all(nonneg)
            && gains.gamma.iter().copied().all(nonneg);
        if !gains_ok {
            return Err(Error::Domain("large-scale gains must be finite and nonnegative".into()));
        }
        // Infinite Rician factors are allowed: they denote a pure LoS link.
        let factor_ok = |x: f64| x >= 0.0;
        let factors_ok = factor_ok(rician.delta)
            && rician.epsilon.iter().copied().all(factor_ok)
            && rician.eta.iter().copied().all(factor_ok);
        if !factors_ok {
            return Err(Error::Domain("Rician factors must be nonnegative".into()));
        }
        let los = los_components(dims.m, dims.n, &angles)?;
        Ok(Self {
            dims,
            gains,
            rician,
            angles,
            los,
        })
    }

    /// Builds the statistics of a physical scenario; angles come from `rng`.
    pub fn from_geometry<R: Rng + ?Sized>(
        dims: Dims,
        geometry: &ScenarioGeometry,
        path_loss: &PathLossParams,
        rician: RicianFactors,
        rng: &mut R,
    ) -> Result<Self> {
        ensure_len("user positions", dims.k, geometry.user_positions.len())?;
        let gains = LargeScaleGains::from_geometry(geometry, path_loss)?;
        let angles = Angles::sample(dims.paths, dims.k, rng);
        Self::new(dims, gains, rician, angles)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn gains(&self) -> &LargeScaleGains {
        &self.gains
    }

    pub fn rician(&self) -> &RicianFactors {
        &self.rician
    }

    pub fn angles(&self) -> &Angles {
        &self.angles
    }

    pub fn los(&self) -> &LosComponents {
        &self.los
    }

    /// Draws one instantaneous realization with fresh NLoS components.
    pub fn sample_realization<R: Rng + ?Sized>(&self, rng: &mut R, index: usize) -> ChannelRealization {
        let Dims { m, n, k, .. } = self.dims;
        let mut bs_ris = CMatrix::zeros(n, m);
        let (los_w, nlos_w) = rician_weights(self.gains.kappa, self.rician.delta);
        for (z, los) in bs_ris.as_mut_slice().iter_mut().zip(self.los.bs_ris.as_slice()) {
            *z = los * los_w + complex_normal(rng) * nlos_w;
        }
        let ris_user = (0..k)
            .map(|u| {
                let (los_w, nlos_w) = rician_weights(self.gains.beta[u], self.rician.epsilon[u]);
                mix(&self.los.ris_user[u], los_w, nlos_w, rng)
            })
            .collect();
        let bs_user = (0..k)
            .map(|u| {
                let (los_w, nlos_w) = rician_weights(self.gains.gamma[u], self.rician.eta[u]);
                mix(&self.los.bs_user[u], los_w, nlos_w, rng)
            })
            .collect();
        ChannelRealization {
            bs_ris,
            ris_user,
            bs_user,
            index,
        }
    }
}

/// `(sqrt(g f / (f + 1)), sqrt(g / (f + 1)))`, with the `f = inf` limit handled.
fn rician_weights(gain: f64, factor: f64) -> (f64, f64) {
    if factor.is_infinite() {
        (gain.sqrt(), 0.0)
    } else {
        ((gain * factor / (factor + 1.0)).sqrt(), (gain / (factor + 1.0)).sqrt())
    }
}

fn mix<R: Rng + ?Sized>(los: &[C64], los_w: f64, nlos_w: f64, rng: &mut R) -> Vec<C64> {
    los.iter()
        .map(|z| z * los_w + complex_normal(rng) * nlos_w)
        .collect()
}

/// Circularly symmetric complex Gaussian with unit total variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// One coherence interval's channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `N x M`.
    pub bs_ris: CMatrix,
    /// `K` vectors of length `N`.
    pub ris_user: Vec<Vec<C64>>,
    /// `K` vectors of length `M`.
    pub bs_user: Vec<Vec<C64>>,
    /// Coherence-interval counter, starting at 1 inside datasets.
    pub index: usize,
}

impl ChannelRealization {
    pub fn m(&self) -> usize {
        self.bs_ris.cols()
    }

    pub fn n(&self) -> usize {
        self.bs_ris.rows()
    }

    pub fn k(&self) -> usize {
        self.ris_user.len()
    }

    pub fn check_dims(&self, m: usize, n: usize, k: usize) -> Result<()> {
        ensure_len("BS-RIS rows", n, self.bs_ris.rows())?;
        ensure_len("BS-RIS columns", m, self.bs_ris.cols())?;
        ensure_len("RIS-user channels", k, self.ris_user.len())?;
        ensure_len("BS-user channels", k, self.bs_user.len())?;
        for (g, h) in self.ris_user.iter().zip(&self.bs_user) {
            ensure_len("RIS-user channel length", n, g.len())?;
            ensure_len("BS-user channel length", m, h.len())?;
        }
        Ok(())
    }
}

/// `t` realizations; realization `i` (1-based) is drawn from substream `i`
/// of `seed`, so the set is independent of generation order.
pub fn generate_offline_dataset(csi: &LongTermCsi, t: usize, seed: u64) -> Result<Vec<ChannelRealization>> {
    if t == 0 {
        return Err(Error::Empty("offline dataset needs at least one realization"));
    }
    Ok((1..=t)
        .map(|i| csi.sample_realization(&mut substream(seed, i as u64), i))
        .collect())
}

/// Writes a dataset as little-endian binary.
///
/// Layout: `M, N, K, T` as `u64`, then for each realization the entries of
/// `bs_ris` in row-major order, each `ris_user[k]`, each `bs_user[k]`, every
/// complex value as `(re, im)` `f64` pairs.
pub fn write_dataset<W: Write>(mut out: W, dataset: &[ChannelRealization]) -> Result<()> {
    let first = dataset
        .first()
        .ok_or(Error::Empty("cannot persist an empty dataset"))?;
    let (m, n, k) = (first.m(), first.n(), first.k());
    for v in [m, n, k, dataset.len()] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    let mut put = |z: &C64| -> std::io::Result<()> {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())
    };
    for real in dataset {
        real.check_dims(m, n, k)?;
        for z in real.bs_ris.as_slice() {
            put(z)?;
        }
        for z in real.ris_user.iter().flatten() {
            put(z)?;
        }
        for z in real.bs_user.iter().flatten() {
            put(z)?;
        }
    }
    Ok(())
}

pub fn read_dataset<R: Read>(mut input: R) -> Result<Vec<ChannelRealization>> {
    let mut word = [0u8; 8];
    let mut header = [0usize; 4];
    for h in &mut header {
        input.read_exact(&mut word)?;
        *h = usize::try_from(u64::from_le_bytes(word))
            .map_err(|_| Error::Format("header value does not fit in usize".into()))?;
    }
    let [m, n, k, t] = header;
    if m == 0 || n == 0 || k == 0 {
        return Err(Error::Format(format!("invalid dataset dimensions {m}x{n}x{k}")));
    }
    let mut get = || -> Result<C64> {
        input.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        input.read_exact(&mut word)?;
        Ok(C64::new(re, f64::from_le_bytes(word)))
    };
    let mut dataset = Vec::with_capacity(t);
    for index in 1..=t {
        let bs_ris = CMatrix::from_row_major(n, m, (0..n * m).map(|_| get()).collect::<Result<_>>()?);
        let ris_user = (0..k)
            .map(|_| (0..n).map(|_| get()).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let bs_user = (0..k)
            .map(|_| (0..m).map(|_| get()).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        dataset.push(ChannelRealization {
            bs_ris,
            ris_user,
            bs_user,
            index,
        });
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn test_csi(m: usize, n: usize, k: usize, paths: usize, kappa: f64, delta: f64) -> LongTermCsi {
        let mut rng = seeded(11);
        let dims = Dims { m, n, k, paths };
        let mut gains = LargeScaleGains::unit(k);
        gains.kappa = kappa;
        LongTermCsi::new(
            dims,
            gains,
            RicianFactors::uniform(k, delta, 3.75, 2.2),
            Angles::sample(paths, k, &mut rng),
        )
        .unwrap()
    }

    #[test]
    fn steering_vector_quarter_turn() {
        let v = steering_vector(4, FRAC_PI_2).unwrap();
        let expected = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
        for (a, b) in v.iter().zip(expected) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn steering_vector_single_element() {
        assert_eq!(steering_vector(1, 2.7).unwrap(), vec![C64::new(1.0, 0.0)]);
    }

    #[test]
    fn steering_vector_matches_scalar_trig() {
        let v = steering_vector(8, 0.3).unwrap();
        for (i, z) in v.iter().enumerate() {
            let arg = 0.3 * i as f64;
            assert!((z.re - arg.cos()).abs() < 1e-14);
            assert!((z.im - arg.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn steering_vector_rejects_empty() {
        assert!(matches!(steering_vector(0, 1.0), Err(Error::InvalidDimension(_))));
    }

    fn angles(pairs: &[(f64, f64)]) -> Angles {
        Angles {
            aoa_bs_ris: pairs.iter().map(|p| p.0).collect(),
            aod_bs_ris: pairs.iter().map(|p| p.1).collect(),
            aod_ris_user: vec![0.4],
            aod_bs_user: vec![1.1],
        }
    }

    #[test]
    fn single_path_at_zero_is_all_ones() {
        let los = los_components(3, 5, &angles(&[(0.0, 0.0)])).unwrap();
        assert!(los.bs_ris.as_slice().iter().all(|z| close(*z, C64::new(1.0, 0.0), 1e-15)));
    }

    #[test]
    fn duplicated_path_doubles_los() {
        let one = los_components(3, 4, &angles(&[(0.7, 1.9)])).unwrap();
        let two = los_components(3, 4, &angles(&[(0.7, 1.9), (0.7, 1.9)])).unwrap();
        for (a, b) in one.bs_ris.as_slice().iter().zip(two.bs_ris.as_slice()) {
            assert!(close(*a * 2.0, *b, 1e-14));
        }
    }

    #[test]
    fn two_path_outer_products_by_hand() {
        // Path 1: a_2(pi/2) a_2(0)^T = [1, j]^T [1, 1]; path 2: a_2(0) a_2(pi/2)^T = [1, 1]^T [1, j].
        let los = los_components(2, 2, &angles(&[(FRAC_PI_2, 0.0), (0.0, FRAC_PI_2)])).unwrap();
        let j = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let expected = [[one + one, one + j], [j + one, j + j]];
        for r in 0..2 {
            for c in 0..2 {
                assert!(close(los.bs_ris.get(r, c), expected[r][c], 1e-15), "({r},{c})");
            }
        }
    }

    #[test]
    fn los_is_pure_and_unit_modulus() {
        let csi = test_csi(4, 6, 3, 2, 1.0, 2.2);
        let again = los_components(4, 6, csi.angles()).unwrap();
        assert_eq!(&again, csi.los());
        for v in csi.los().ris_user.iter().chain(&csi.los().bs_user) {
            assert!(v.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn path_loss_reference_values() {
        let p = PathLossParams::default();
        let v = path_loss_linear(&p, 100.0, 2.2).unwrap();
        assert!((v / 10f64.powf(-7.4) - 1.0).abs() < 1e-12);
        assert!((path_loss_linear(&p, 1.0, 2.2).unwrap() - 1e-3).abs() < 1e-18);
        // Independent dB-domain evaluation.
        let d: f64 = 50.99;
        let db = -30.0 - 35.0 * d.log10();
        let expected = (db * std::f64::consts::LN_10 / 10.0).exp();
        let got = path_loss_linear(&p, d, 3.5).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-12);
        assert!(path_loss_linear(&p, 0.0, 2.0).is_err());
        assert!(path_loss_linear(&p, -3.0, 2.0).is_err());
    }

    #[test]
    fn noise_power_reference_values() {
        let mut p = PathLossParams::default();
        assert!((noise_power(&p) / 10f64.powf(-14.4) - 1.0).abs() < 1e-12);
        p.bandwidth_hz = 1.0;
        assert!((noise_power(&p) / 10f64.powf(-20.4) - 1.0).abs() < 1e-12);
        p.noise_density_dbm_hz = -170.0;
        p.bandwidth_hz = 1e7;
        assert!((noise_power(&p) / 1e-13 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn huge_rician_factor_gives_los_channel() {
        let csi = test_csi(3, 4, 2, 1, 1.0, 1e12);
        let real = csi.sample_realization(&mut seeded(3), 1);
        for (a, b) in real.bs_ris.as_slice().iter().zip(csi.los().bs_ris.as_slice()) {
            assert!(close(*a, *b, 1e-5));
        }
    }

    #[test]
    fn infinite_rician_factor_is_exactly_los() {
        let csi = test_csi(2, 3, 1, 1, 4.0, f64::INFINITY);
        let real = csi.sample_realization(&mut seeded(3), 1);
        assert_eq!(real.bs_ris, csi.los().bs_ris.scaled(2.0));
    }

    #[test]
    fn pure_nlos_has_zero_mean() {
        let csi = test_csi(2, 2, 1, 1, 1.0, 0.0);
        let n = 100_000;
        let mut rng = seeded(5);
        let mut sum = C64::new(0.0, 0.0);
        for i in 0..n {
            sum += csi.sample_realization(&mut rng, i).bs_ris.get(1, 0);
        }
        assert!((sum / n as f64).norm() < 0.02);
    }

    #[test]
    fn dataset_is_seed_deterministic() {
        let csi = test_csi(2, 3, 2, 2, 1.0, 2.2);
        let a = generate_offline_dataset(&csi, 150, 9).unwrap();
        let b = generate_offline_dataset(&csi, 150, 9).unwrap();
        let c = generate_offline_dataset(&csi, 150, 10).unwrap();
        assert_eq!(a.len(), 150);
        assert_eq!(a, b);
        assert_ne!(a[0], c[0]);
        assert_eq!(a.first().unwrap().index, 1);
        assert_eq!(generate_offline_dataset(&csi, 1, 9).unwrap().len(), 1);
        assert!(generate_offline_dataset(&csi, 0, 9).is_err());
    }

    #[test]
    fn dataset_binary_round_trip() {
        let csi = test_csi(2, 3, 2, 1, 1.0, 2.2);
        let data = generate_offline_dataset(&csi, 4, 1).unwrap();
        let mut bytes = Vec::new();
        write_dataset(&mut bytes, &data).unwrap();
        assert_eq!(bytes.len(), 32 + 4 * 16 * (6 + 2 * 3 + 2 * 2));
        assert_eq!(read_dataset(bytes.as_slice()).unwrap(), data);
        assert!(read_dataset(&bytes[..40]).is_err());
    }

    #[test]
    fn generated_users_lie_on_disk() {
        let g = ScenarioGeometry::generate([0.0, 0.0, 30.0], [100.0, 20.0, 10.0], [150.0, 0.0, 1.5], 20.0, 50, &mut seeded(2))
            .unwrap();
        assert!(g.users_within_disk());
        assert!(g.user_positions.iter().all(|u| u[2] == 1.5));
    }

    #[test]
    fn coincident_nodes_are_rejected() {
        let g = ScenarioGeometry {
            bs_position: [0.0; 3],
            ris_position: [0.0; 3],
            user_positions: vec![[1.0, 0.0, 0.0]],
            user_disk_center: [1.0, 0.0, 0.0],
            user_disk_radius: 1.0,
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn mismatched_angle_counts_are_rejected() {
        let dims = Dims { m: 2, n: 2, k: 1, paths: 2 };
        let r = LongTermCsi::new(
            dims,
            LargeScaleGains::unit(1),
            RicianFactors::uniform(1, 1.0, 1.0, 1.0),
            angles(&[(PI, 0.0)]),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
