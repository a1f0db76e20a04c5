//! Statistical OFDMA channel model.
//!
//! Each user sees an `L`-tap multipath channel whose taps are independent
//! circularly-symmetric complex Gaussians. The frequency response is evaluated
//! directly on the subcarrier centre frequencies, scaled by a distance power
//! law and normalized by the per-subchannel noise power to give the gains
//! `δ = |h|² / (N₀·B)` consumed by the allocators.
//!
//! Indices are zero-based: subcarrier `0..N`, user `0..K`.

use std::ops::Range;

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// How the tap powers `σ²ᵢ` are assigned before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum PowerDelayProfile {
    /// Every tap gets `1/L`.
    #[default]
    Equal,
    /// `σ²ᵢ ∝ exp(-τᵢ / time_constant_s)`.
    Exponential { time_constant_s: f64 },
}

/// Multipath taps of one user's channel impulse response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapSet<T> {
    amplitudes: Vec<Complex<T>>,
    delays: Vec<T>,
    powers: Vec<T>,
}

impl<T: Real> TapSet<T> {
    /// Builds a tap set, checking lengths, nonnegative delays and powers
    /// summing to one.
    pub fn new(amplitudes: Vec<Complex<T>>, delays: Vec<T>, powers: Vec<T>) -> Result<Self> {
        let l = amplitudes.len();
        if l == 0 {
            return Err(Error::invalid("tap set needs at least one tap"));
        }
        if delays.len() != l || powers.len() != l {
            return Err(Error::invalid(format!(
                "tap set lengths differ: {} amplitudes, {} delays, {} powers",
                l,
                delays.len(),
                powers.len()
            )));
        }
        if delays.iter().any(|d| !(*d >= T::zero())) {
            return Err(Error::invalid("tap delays must be nonnegative"));
        }
        if powers.iter().any(|p| !(*p >= T::zero())) {
            return Err(Error::invalid("tap powers must be nonnegative"));
        }
        let total: T = powers.iter().copied().sum();
        let tol = T::lit(1e-9).max(T::epsilon() * T::from_count(4 * l));
        if (total - T::one()).abs() > tol {
            return Err(Error::invalid(format!(
                "tap powers must sum to 1, got {total}"
            )));
        }
        Ok(Self {
            amplitudes,
            delays,
            powers,
        })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn delays(&self) -> &[T] {
        &self.delays
    }

    pub fn powers(&self) -> &[T] {
        &self.powers
    }

    /// Largest tap delay.
    pub fn max_delay(&self) -> T {
        self.delays.iter().copied().fold(T::zero(), T::max)
    }

    /// Correlation between two subchannels `freq_gap` hertz apart under this
    /// tap set's power-delay profile.
    pub fn correlation(&self, freq_gap: T) -> Complex<T> {
        subchannel_correlation(&self.powers, &self.delays, freq_gap)
    }
}

/// Draws `num_taps` taps with delays uniform on `[0, tau_max]` (sorted
/// ascending), powers from `profile` and complex Gaussian amplitudes with
/// per-tap variance `σ²ᵢ`.
pub fn draw_taps<T, R>(
    rng: &mut R,
    num_taps: usize,
    tau_max: T,
    profile: PowerDelayProfile,
) -> Result<TapSet<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
    StandardUniform: Distribution<T>,
{
    if num_taps == 0 {
        return Err(Error::invalid("number of taps must be at least 1"));
    }
    if !(tau_max > T::zero()) {
        return Err(Error::invalid(format!(
            "maximum delay spread must be positive, got {tau_max}"
        )));
    }

    // Delays are drawn as unit uniforms and scaled, so a fixed random stream
    // gives the same relative delay geometry for every tau_max.
    let mut unit: Vec<T> = (0..num_taps).map(|_| rng.sample(StandardUniform)).collect();
    unit.sort_by(|a, b| a.partial_cmp(b).expect("uniform draws are finite"));
    let delays: Vec<T> = unit.into_iter().map(|u| u * tau_max).collect();

    let raw: Vec<T> = match profile {
        PowerDelayProfile::Equal => vec![T::one(); num_taps],
        PowerDelayProfile::Exponential { time_constant_s } => {
            if !(time_constant_s > 0.0) {
                return Err(Error::invalid(
                    "exponential profile needs a positive time constant",
                ));
            }
            let tc = T::lit(time_constant_s);
            delays.iter().map(|&d| (-d / tc).exp()).collect()
        }
    };
    let total: T = raw.iter().copied().sum();
    let powers: Vec<T> = raw.into_iter().map(|p| p / total).collect();

    let half = T::lit(0.5);
    let amplitudes = powers
        .iter()
        .map(|&p| {
            let scale = (p * half).sqrt();
            let re: T = rng.sample(StandardNormal);
            let im: T = rng.sample(StandardNormal);
            Complex::new(re * scale, im * scale)
        })
        .collect();

    TapSet::new(amplitudes, delays, powers)
}

/// Evaluates `Rₙ = Σᵢ aᵢ·exp(-j2π fₙ τᵢ)` at each frequency.
pub fn freq_response<T: Real>(taps: &TapSet<T>, frequencies: &[T]) -> Result<Vec<Complex<T>>> {
    if frequencies.is_empty() {
        return Err(Error::invalid("frequency list is empty"));
    }
    let two_pi = T::TAU();
    Ok(frequencies
        .iter()
        .map(|&f| {
            taps.amplitudes
                .iter()
                .zip(&taps.delays)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &tau)| {
                    acc + a * Complex::from_polar(T::one(), -two_pi * f * tau)
                })
        })
        .collect())
}

/// Correlation coefficient `ρ = Σᵢ σ²ᵢ·exp(j2π τᵢ Δf)` between subchannels
/// `freq_gap` apart, assuming uncorrelated taps.
///
/// The sum is divided by `Σσ²`, which is one for a normalized profile; this
/// makes `ρ(0) = 1` exact in floating point.
pub fn subchannel_correlation<T: Real>(powers: &[T], delays: &[T], freq_gap: T) -> Complex<T> {
    let two_pi = T::TAU();
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut norm = T::zero();
    for (&p, &tau) in powers.iter().zip(delays) {
        acc = acc + Complex::from_polar(p, two_pi * tau * freq_gap);
        norm = norm + p;
    }
    if norm > T::zero() {
        acc / norm
    } else {
        acc
    }
}

/// Contiguous equal-block assignment of subcarriers to users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    n_subcarriers: usize,
    n_users: usize,
}

impl Assignment {
    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn block_len(&self) -> usize {
        self.n_subcarriers / self.n_users
    }

    /// Subcarriers owned by `user`.
    pub fn block(&self, user: usize) -> Range<usize> {
        let len = self.block_len();
        user * len..(user + 1) * len
    }

    pub fn user_of(&self, subcarrier: usize) -> usize {
        subcarrier / self.block_len()
    }

    /// Owner of every subcarrier, in subcarrier order.
    pub fn to_map(&self) -> Vec<usize> {
        (0..self.n_subcarriers).map(|i| self.user_of(i)).collect()
    }
}

/// Splits `n` subcarriers into `k` contiguous blocks of `n/k`.
pub fn assign_subcarriers(n: usize, k: usize) -> Result<Assignment> {
    if k == 0 || n < k {
        return Err(Error::invalid(format!(
            "need 1 <= users <= subcarriers, got {k} users for {n} subcarriers"
        )));
    }
    if !n.is_multiple_of(k) {
        return Err(Error::invalid(format!(
            "{k} users do not divide {n} subcarriers"
        )));
    }
    Ok(Assignment {
        n_subcarriers: n,
        n_users: k,
    })
}

/// Cell, band and multipath configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    pub n_subcarriers: usize,
    pub n_users: usize,
    pub total_bandwidth_hz: T,
    /// Noise spectral density N₀ in W/Hz.
    pub noise_density_w_hz: T,
    pub cell_radius_m: T,
    pub pathloss_exponent: T,
    pub tau_max_s: T,
    pub num_taps: usize,
    pub profile: PowerDelayProfile,
    /// Users are never placed closer than this to the base station.
    pub min_distance_m: T,
}

/// Thermal noise floor, -174 dBm/Hz, in W/Hz.
pub fn thermal_noise_density() -> f64 {
    10f64.powf(-174.0 / 10.0) * 1e-3
}

pub const DEFAULT_MIN_DISTANCE_M: f64 = 10.0;

impl<T: Real> Default for SystemParams<T> {
    fn default() -> Self {
        Self {
            n_subcarriers: 1024,
            n_users: 8,
            total_bandwidth_hz: T::lit(2e6),
            noise_density_w_hz: T::lit(thermal_noise_density()),
            cell_radius_m: T::lit(1000.0),
            pathloss_exponent: T::lit(4.0),
            tau_max_s: T::lit(2.5e-6),
            num_taps: 10,
            profile: PowerDelayProfile::Equal,
            min_distance_m: T::lit(DEFAULT_MIN_DISTANCE_M),
        }
    }
}

impl<T: Real> SystemParams<T> {
    /// Returns every violated constraint, empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n_users == 0 {
            v.push("n_users must be at least 1".to_string());
        }
        if self.n_subcarriers < self.n_users {
            v.push(format!(
                "n_subcarriers ({}) must be at least n_users ({})",
                self.n_subcarriers, self.n_users
            ));
        } else if self.n_users > 0 && !self.n_subcarriers.is_multiple_of(self.n_users) {
            v.push(format!(
                "n_users ({}) must divide n_subcarriers ({})",
                self.n_users, self.n_subcarriers
            ));
        }
        if !(self.total_bandwidth_hz > T::zero()) {
            v.push("bandwidth_hz must be positive".to_string());
        }
        if !(self.noise_density_w_hz > T::zero()) {
            v.push("noise_density_w_hz must be positive".to_string());
        }
        if !(self.cell_radius_m > self.min_distance_m) {
            v.push(format!(
                "cell_radius_m must exceed the minimum user distance {}",
                self.min_distance_m
            ));
        }
        if !(self.min_distance_m > T::zero()) {
            v.push("minimum user distance must be positive".to_string());
        }
        if !(self.pathloss_exponent >= T::zero()) {
            v.push("pathloss_exp must be nonnegative".to_string());
        }
        if !(self.tau_max_s > T::zero()) {
            v.push("tau_max_s must be positive".to_string());
        }
        if self.num_taps == 0 {
            v.push("n_taps must be at least 1".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }

    /// Per-subchannel bandwidth `B = total_bandwidth / N`.
    pub fn subchannel_bandwidth(&self) -> T {
        self.total_bandwidth_hz / T::from_count(self.n_subcarriers)
    }

    /// Baseband centre frequency `n·B` of subcarrier `n`.
    pub fn subcarrier_frequency(&self, n: usize) -> T {
        T::from_count(n) * self.subchannel_bandwidth()
    }

    pub fn frequencies(&self, range: Range<usize>) -> Vec<T> {
        range.map(|n| self.subcarrier_frequency(n)).collect()
    }
}

/// One draw of every user's channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization<T> {
    pub taps: Vec<TapSet<T>>,
    /// `coefficients[k][i]` is user `k`'s path-loss-scaled response on the
    /// `i`-th subcarrier of its block.
    pub coefficients: Vec<Vec<Complex<T>>>,
    /// `gains[k][i] = |coefficients[k][i]|² / (N₀·B)`.
    pub gains: Vec<Vec<T>>,
    pub user_distances: Vec<T>,
    pub assignment: Assignment,
    pub subchannel_bandwidth: T,
}

impl<T: Real> ChannelRealization<T> {
    pub fn n_users(&self) -> usize {
        self.gains.len()
    }

    pub fn user_gains(&self, user: usize) -> &[T] {
        &self.gains[user]
    }
}

const MAX_REDRAWS: usize = 64;

/// Draws a full channel realization: per-user taps, a user distance uniform
/// over the annulus `[min_distance, radius]`, `d^-ξ` path loss and
/// noise-normalized gains.
pub fn realize_channel<T, R>(params: &SystemParams<T>, rng: &mut R) -> Result<ChannelRealization<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
    StandardUniform: Distribution<T>,
{
    params.validate()?;
    let assignment = assign_subcarriers(params.n_subcarriers, params.n_users)?;
    let bandwidth = params.subchannel_bandwidth();
    let noise = params.noise_density_w_hz * bandwidth;
    let r0 = params.min_distance_m;
    let r1 = params.cell_radius_m;

    let mut taps = Vec::with_capacity(params.n_users);
    let mut coefficients = Vec::with_capacity(params.n_users);
    let mut gains = Vec::with_capacity(params.n_users);
    let mut distances = Vec::with_capacity(params.n_users);

    for user in 0..params.n_users {
        let freqs = params.frequencies(assignment.block(user));
        let mut attempt = 0;
        let (tapset, response) = loop {
            let t = draw_taps(rng, params.num_taps, params.tau_max_s, params.profile)?;
            let r = freq_response(&t, &freqs)?;
            if r.iter().all(|h| h.norm_sqr() > T::zero()) {
                break (t, r);
            }
            attempt += 1;
            if attempt >= MAX_REDRAWS {
                return Err(Error::invalid(
                    "channel draw kept producing zero-gain subcarriers",
                ));
            }
        };

        // Area-uniform radius on the annulus: r² uniform on [r0², r1²].
        let u: T = rng.sample(StandardUniform);
        let d = (u * (r1 * r1 - r0 * r0) + r0 * r0).sqrt();
        let amp_loss = d.powf(-params.pathloss_exponent / T::lit(2.0));

        let h: Vec<Complex<T>> = response.into_iter().map(|r| r * amp_loss).collect();
        let g: Vec<T> = h.iter().map(|c| c.norm_sqr() / noise).collect();
        if g.iter().any(|x| !(*x > T::zero()) || !x.is_finite()) {
            return Err(Error::invalid(
                "path loss underflowed to a zero or non-finite gain",
            ));
        }

        taps.push(tapset);
        coefficients.push(h);
        gains.push(g);
        distances.push(d);
    }

    Ok(ChannelRealization {
        taps,
        coefficients,
        gains,
        user_distances: distances,
        assignment,
        subchannel_bandwidth: bandwidth,
    })
}
