//! One-photon mode-mismatch errors.
//!
//! A photon that fails to mode-match at the beam splitters is modeled as
//! living in an orthogonal copy of every spatial mode (a different temporal
//! mode). Spatial index `s + n` is the copy of port `s` for an `n`-port
//! cascade. The copy sees the same optics and the same vacuum detectors, so
//! it never interferes with the matched photons but is still post-selected.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId, PhotonVector, ProductPhotonState};
use crate::optics::{build_input, linear_photon, merge_cascade};
use crate::polarization::{circular_distribution, linear_distribution, PolarDistribution};
use crate::postselect::{bottleneck_output, project_product, Constraint, PostSelectionRule, RuleEntry, Target};

#[derive(Clone, Debug, PartialEq)]
pub struct MismatchScenario {
    pub n: usize,
    /// Input port whose photon is distinguishable.
    pub bad_port: usize,
    /// Probability that the designated photon is mismatched.
    pub epsilon: f64,
    /// Linear polarization angle of the mismatched photon; `None` keeps the
    /// angle π·bad_port/n of the regular input.
    pub bad_angle: Option<f64>,
}

impl MismatchScenario {
    pub fn new(n: usize, bad_port: usize, epsilon: f64) -> Result<Self> {
        let sc = MismatchScenario { n, bad_port, epsilon, bad_angle: None };
        sc.validate()?;
        Ok(sc)
    }

    pub fn with_angle(mut self, angle: f64) -> Self {
        self.bad_angle = Some(angle);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidScenario("no photons".into()));
        }
        if self.bad_port >= self.n {
            return Err(Error::InvalidScenario(format!(
                "bad port {} is not one of {} inputs",
                self.bad_port, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidScenario(format!("epsilon {} outside [0, 1]", self.epsilon)));
        }
        if matches!(self.bad_angle, Some(a) if !a.is_finite()) {
            return Err(Error::InvalidScenario("non-finite polarization angle".into()));
        }
        Ok(())
    }

    /// The four-photon, port-0 case with the given mixture weight.
    pub fn four_photon(epsilon: f64) -> Result<Self> {
        MismatchScenario::new(4, 0, epsilon)
    }

    fn ghost_photon(&self) -> PhotonVector {
        let angle = self.bad_angle.unwrap_or(PI * self.bad_port as f64 / self.n as f64);
        linear_photon(self.bad_port, angle)
            .into_iter()
            .map(|(m, a)| (ModeId::new(m.spatial + self.n, m.pol), a))
            .collect()
    }

    /// Vacuum on every side port of both copies.
    fn rule(&self) -> Result<PostSelectionRule> {
        let n = self.n;
        if n == 1 {
            return PostSelectionRule::new(vec![RuleEntry {
                target: Target::port(0),
                constraint: Constraint::Unconstrained,
            }]);
        }
        PostSelectionRule::vacuum_ports((1..n).chain(n + 1..2 * n))
    }
}

/// Post-selected output when the photon in `bad_port` is distinguishable.
///
/// The result lives on the line (spatial 0) and its copy (spatial n); its
/// norm² is the post-selection probability.
pub fn mismatch_output(sc: &MismatchScenario) -> Result<FockState> {
    sc.validate()?;
    let n = sc.n;
    let regular = build_input(n)?;
    let photons: Vec<PhotonVector> = regular
        .photons()
        .iter()
        .enumerate()
        .map(|(l, v)| if l == sc.bad_port { sc.ghost_photon() } else { v.clone() })
        .collect();
    let input = ProductPhotonState::new(photons, regular.scale())?;
    let optics = merge_cascade(n)?.replicated(2, n)?;
    Ok(project_product(&optics.apply(&input)?, &sc.rule()?))
}

/// The bunched state of the n−1 matched photons alone, on the line.
pub fn matched_factor(sc: &MismatchScenario) -> Result<FockState> {
    sc.validate()?;
    let regular = build_input(sc.n)?;
    let photons: Vec<PhotonVector> = regular
        .photons()
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != sc.bad_port)
        .map(|(_, v)| v.clone())
        .collect();
    let input = ProductPhotonState::new(photons, Complex64::new(1.0, 0.0))?;
    let propagated = merge_cascade(sc.n)?.apply(&input)?;
    let rule = match sc.n {
        1 => return Ok(FockState::vacuum(Complex64::new(1.0, 0.0))),
        n => PostSelectionRule::vacuum_ports(1..n)?,
    };
    Ok(project_product(&propagated, &rule))
}

/// Circular statistics of the default four-photon error state, polarizations
/// summed over the line and its copy.
pub fn error_circular_distribution() -> Result<PolarDistribution> {
    circular_distribution(&mismatch_output(&MismatchScenario::four_photon(1.0)?)?)
}

/// φ = 0 (horizontal/vertical) statistics of a mismatch scenario's output.
pub fn error_hv_distribution(sc: &MismatchScenario) -> Result<PolarDistribution> {
    linear_distribution(&mismatch_output(sc)?, 0.0)
}

/// Post-selection-weighted mixture of ideal and error circular statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedDistribution {
    pub n: usize,
    pub epsilon: f64,
    /// Ideal-case probability p(n) (norm² of the ideal output).
    pub ideal_norm: f64,
    /// Error-case post-selection probability.
    pub error_norm: f64,
    pub ideal: PolarDistribution,
    pub error: PolarDistribution,
    /// Unnormalized weights (Δn, w) from Δn = +n down to −n.
    pub weights: Vec<(i64, f64)>,
    pub total_probability: f64,
}

impl MixedDistribution {
    /// Weights divided by the total probability.
    pub fn normalized(&self) -> Vec<(i64, f64)> {
        self.weights.iter().map(|&(d, w)| (d, w / self.total_probability)).collect()
    }
}

/// (1−ε)·p_ideal·P_ideal(Δn) + ε·p_error·P_error(Δn) together with its sum.
pub fn mixed_circular_distribution(sc: &MismatchScenario) -> Result<MixedDistribution> {
    sc.validate()?;
    let (ideal_state, ideal_norm) = bottleneck_output(sc.n)?;
    let error_state = mismatch_output(sc)?;
    let error_norm = error_state.norm_sq();
    let ideal = circular_distribution(&ideal_state)?;
    let error = circular_distribution(&error_state)?;
    let eps = sc.epsilon;
    let weights: Vec<(i64, f64)> = ideal
        .iter()
        .zip(error.iter())
        .map(|((d, pi), (_, pe))| (d, (1.0 - eps) * ideal_norm * pi + eps * error_norm * pe))
        .collect();
    let total_probability = weights.iter().map(|&(_, w)| w).sum();
    Ok(MixedDistribution {
        n: sc.n,
        epsilon: eps,
        ideal_norm,
        error_norm,
        ideal,
        error,
        weights,
        total_probability,
    })
}
