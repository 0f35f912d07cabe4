//! Polarization statistics of n-photon states: circular and rotated-linear
//! photon-number-difference distributions, Stokes expectations, and the
//! rotation-symmetry check.
//!
//! Linear basis convention: for an angle φ the measured pair is
//!
//! ```text
//! a†_φ = (e^{+iφ} a†_R + e^{−iφ} a†_L)/√2
//! a†_⊥ = (e^{+iφ} a†_R − e^{−iφ} a†_L)/√2
//! ```
//!
//! so φ = 0 is horizontal and `a†_⊥` is the φ+π/2 polarization up to a
//! phase of i. With this choice ⟨Δn=+2|4R⟩ = e^{−i4φ}/2 and
//! ⟨Δn=+2|4L⟩ = −e^{+i4φ}/2. Δn(φ) counts `n_φ − n_⊥`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId};
use crate::optics::ModeMap;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Basis {
    Circular,
    Linear { phi: f64 },
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Circular => write!(f, "circular"),
            Basis::Linear { .. } => write!(f, "linear"),
        }
    }
}

/// Probability mass over Δn ∈ {n, n−2, …, −n}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarDistribution {
    pub n: usize,
    pub basis: Basis,
    /// `probs[k]` is the probability of Δn = n − 2k.
    probs: Vec<f64>,
}

impl PolarDistribution {
    pub fn from_probs(n: usize, basis: Basis, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n + 1 {
            return Err(Error::DimensionMismatch(format!("{} probabilities for n = {n}", probs.len())));
        }
        Ok(PolarDistribution { n, basis, probs })
    }

    fn index(&self, delta: i64) -> Option<usize> {
        let n = self.n as i64;
        if delta.abs() > n || (n - delta) % 2 != 0 {
            return None;
        }
        Some(((n - delta) / 2) as usize)
    }

    /// Probability of a given Δn; zero for values of the wrong parity.
    pub fn get(&self, delta: i64) -> f64 {
        self.index(delta).map(|i| self.probs[i]).unwrap_or(0.0)
    }

    /// (Δn, probability) from Δn = +n down to −n.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n as i64;
        self.probs.iter().enumerate().map(move |(k, &p)| (n - 2 * k as i64, p))
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(d, p)| d as f64 * p).sum()
    }

    pub fn max_difference(&self, other: &PolarDistribution) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn accumulate(n: usize, basis: Basis, s: &FockState, delta: impl Fn(&crate::fock::OccupationVector) -> i64) -> Result<Self> {
        let norm = s.norm_sq();
        if s.is_zero() || norm == 0.0 {
            return Err(Error::EmptyState);
        }
        let mut probs = vec![0.0; n + 1];
        for (occ, a) in s.terms() {
            let d = delta(occ);
            let k = ((n as i64 - d) / 2) as usize;
            probs[k] += a.norm_sqr() / norm;
        }
        Ok(PolarDistribution { n, basis, probs })
    }
}

/// Per-spatial-mode rotation into the linear basis at angle `phi`.
/// Output slot R holds the φ polarization, slot L the orthogonal one.
pub fn linear_basis_map_on(phi: f64, spatials: &[usize]) -> ModeMap {
    let modes: Vec<ModeId> = spatials.iter().flat_map(|&s| [ModeId::r(s), ModeId::l(s)]).collect();
    let d = modes.len();
    let minus = Complex64::from_polar(FRAC_1_SQRT_2, -phi);
    let plus = Complex64::from_polar(FRAC_1_SQRT_2, phi);
    let mut matrix = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..spatials.len() {
        let (r, l) = (2 * i, 2 * i + 1);
        matrix[r * d + r] = minus;
        matrix[l * d + r] = minus;
        matrix[r * d + l] = plus;
        matrix[l * d + l] = -plus;
    }
    ModeMap::new(modes.clone(), modes, matrix).expect("square block map")
}

/// Linear-basis rotation of the single spatial mode 0.
pub fn linear_basis_map(phi: f64) -> ModeMap {
    linear_basis_map_on(phi, &[0])
}

/// Δn distribution after transforming `s` with `map`; Δn is read as
/// n_R − n_L of the output slots summed over all modes.
pub fn distribution_in_basis(s: &FockState, map: &ModeMap, basis: Basis) -> Result<PolarDistribution> {
    if s.is_zero() {
        return Err(Error::EmptyState);
    }
    let rotated = map.apply_to_fock(s)?;
    PolarDistribution::accumulate(s.photon_number(), basis, &rotated, |o| o.circular_difference())
}

/// n_R − n_L statistics summed over every mode of the state.
pub fn circular_distribution(s: &FockState) -> Result<PolarDistribution> {
    PolarDistribution::accumulate(s.photon_number(), Basis::Circular, s, |o| o.circular_difference())
}

/// Circular statistics of one channel; every photon must lie in `spatials`.
pub fn circular_distribution_on(s: &FockState, spatials: &[usize]) -> Result<PolarDistribution> {
    if s.spatial_modes().iter().any(|m| !spatials.contains(m)) {
        return Err(Error::ChannelMismatch);
    }
    circular_distribution(s)
}

/// Δn(φ) statistics, summed over every spatial mode of the state.
pub fn linear_distribution(s: &FockState, phi: f64) -> Result<PolarDistribution> {
    let spatials: Vec<usize> = s.spatial_modes().into_iter().collect();
    distribution_in_basis(s, &linear_basis_map_on(phi, &spatials), Basis::Linear { phi })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stokes {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

/// S1 = ⟨Δn(0)⟩, S2 = ⟨Δn(π/4)⟩, S3 = ⟨n_R − n_L⟩.
pub fn stokes_expectations(s: &FockState) -> Result<Stokes> {
    Ok(Stokes {
        s1: linear_distribution(s, 0.0)?.mean(),
        s2: linear_distribution(s, PI / 4.0)?.mean(),
        s3: circular_distribution(s)?.mean(),
    })
}

/// 1 − |⟨s|R_k|s⟩|²/‖s‖⁴, where R_k advances every L photon by e^{−i2π/k}
/// relative to R (a 2π/k turn of the Stokes vector about the circular axis).
/// Zero means `s` is invariant up to a global phase.
pub fn rotation_symmetry_defect(s: &FockState, k: u32) -> f64 {
    let norm = s.norm_sq();
    if norm == 0.0 || k == 0 {
        return 0.0;
    }
    let step = -2.0 * PI / k as f64;
    let expectation: Complex64 = s
        .terms()
        .map(|(occ, a)| {
            let n_l: u32 = occ.iter().filter(|(m, _)| m.pol == crate::fock::Polarization::L).map(|(_, c)| c).sum();
            Complex64::from_polar(a.norm_sqr(), step * n_l as f64)
        })
        .sum();
    (1.0 - expectation.norm_sqr() / (norm * norm)).max(0.0)
}

/// The five Δn(φ) fringe probabilities of the four-photon cat, from Δn = +4
/// down to −4.
pub fn four_photon_fringes(phi: f64) -> [f64; 5] {
    let c = (8.0 * phi).cos();
    [
        (1.0 - c) / 16.0,
        4.0 * (1.0 + c) / 16.0,
        6.0 * (1.0 - c) / 16.0,
        4.0 * (1.0 + c) / 16.0,
        (1.0 - c) / 16.0,
    ]
}
