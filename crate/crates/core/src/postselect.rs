//! Detector-conditioned projections and the bottleneck success probability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId, OccupationVector, ProductPhotonState};
use crate::optics::{build_input, merge_cascade};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Zero,
    /// n_R + n_L = 1 summed over every mode of the target.
    ExactlyOnePhotonInChannel,
    Unconstrained,
}

/// What a constraint counts photons in: one mode, or every polarization mode
/// of a group of spatial indices (a port together with its temporal copies).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Mode(ModeId),
    Channel(Vec<usize>),
}

impl Target {
    pub fn port(spatial: usize) -> Self {
        Target::Channel(vec![spatial])
    }

    fn count(&self, occ: &OccupationVector) -> u32 {
        match self {
            Target::Mode(m) => occ.count(*m),
            Target::Channel(spatials) => spatials.iter().map(|&s| occ.spatial_count(s)).sum(),
        }
    }

    fn contains(&self, mode: ModeId) -> bool {
        match self {
            Target::Mode(m) => *m == mode,
            Target::Channel(spatials) => spatials.contains(&mode.spatial),
        }
    }

    fn max_spatial(&self) -> usize {
        match self {
            Target::Mode(m) => m.spatial,
            Target::Channel(spatials) => spatials.iter().copied().max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEntry {
    pub target: Target,
    pub constraint: Constraint,
}

/// A conjunction of per-target occupation constraints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostSelectionRule {
    constraints: Vec<RuleEntry>,
}

impl PostSelectionRule {
    pub fn new(constraints: Vec<RuleEntry>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::DimensionMismatch("post-selection rule needs at least one constraint".into()));
        }
        if constraints.iter().any(|e| matches!(&e.target, Target::Channel(s) if s.is_empty())) {
            return Err(Error::DimensionMismatch("empty channel in post-selection rule".into()));
        }
        Ok(PostSelectionRule { constraints })
    }

    pub fn entries(&self) -> &[RuleEntry] {
        &self.constraints
    }

    /// Zero photons in every listed port.
    pub fn vacuum_ports<I: IntoIterator<Item = usize>>(ports: I) -> Result<Self> {
        PostSelectionRule::new(
            ports
                .into_iter()
                .map(|p| RuleEntry { target: Target::port(p), constraint: Constraint::Zero })
                .collect(),
        )
    }

    /// Exactly one photon in each listed channel.
    pub fn one_per_channel<I: IntoIterator<Item = Vec<usize>>>(channels: I) -> Result<Self> {
        PostSelectionRule::new(
            channels
                .into_iter()
                .map(|c| RuleEntry { target: Target::Channel(c), constraint: Constraint::ExactlyOnePhotonInChannel })
                .collect(),
        )
    }

    /// Checks that every target lies within `total_spatial` spatial modes.
    pub fn check_range(&self, total_spatial: usize) -> Result<()> {
        for e in &self.constraints {
            let port = e.target.max_spatial();
            if port >= total_spatial {
                return Err(Error::PortOutOfRange { port, total: total_spatial });
            }
        }
        Ok(())
    }

    pub fn accepts(&self, occ: &OccupationVector) -> bool {
        self.constraints.iter().all(|e| match e.constraint {
            Constraint::Zero => e.target.count(occ) == 0,
            Constraint::ExactlyOnePhotonInChannel => e.target.count(occ) == 1,
            Constraint::Unconstrained => true,
        })
    }

    /// Whether a partially built occupation can still be completed into an
    /// accepted one. Monotone in the photon counts.
    pub fn admits_partial(&self, occ: &OccupationVector) -> bool {
        self.constraints.iter().all(|e| match e.constraint {
            Constraint::Zero => e.target.count(occ) == 0,
            Constraint::ExactlyOnePhotonInChannel => e.target.count(occ) <= 1,
            Constraint::Unconstrained => true,
        })
    }

    fn forces_vacuum(&self, mode: ModeId) -> bool {
        self.constraints
            .iter()
            .any(|e| e.constraint == Constraint::Zero && e.target.contains(mode))
    }
}

/// Keeps the amplitudes whose occupations satisfy every constraint. The
/// result is unnormalized; its norm² is the success probability.
pub fn project(s: &FockState, rule: &PostSelectionRule) -> FockState {
    s.filter(|occ| rule.accepts(occ))
}

/// Projects a product state without expanding the rejected part.
///
/// Zero-photon constraints on a product state simply drop the vetoed modes
/// from every photon vector; the remaining constraints prune the expansion.
pub fn project_product(p: &ProductPhotonState, rule: &PostSelectionRule) -> FockState {
    match p.restrict(|m| !rule.forces_vacuum(m)) {
        Some(kept) => project(&kept.expand_pruned(|o| rule.admits_partial(o)), rule),
        None => FockState::zero(p.photon_count()),
    }
}

/// Vacuum on every merge-cascade port other than the line (port 0).
pub fn bottleneck_rule(n: usize) -> Result<PostSelectionRule> {
    if n == 0 {
        return Err(Error::NoPhotons);
    }
    if n == 1 {
        return PostSelectionRule::new(vec![RuleEntry {
            target: Target::port(0),
            constraint: Constraint::Unconstrained,
        }]);
    }
    PostSelectionRule::vacuum_ports(1..n)
}

/// Runs input → merge cascade → vacuum post-selection on the side ports.
/// Returns the unnormalized line state and its success probability.
pub fn bottleneck_output(n: usize) -> Result<(FockState, f64)> {
    let propagated = merge_cascade(n)?.apply(&build_input(n)?)?;
    let out = project_product(&propagated, &bottleneck_rule(n)?);
    let p = out.norm_sq();
    Ok((out, p))
}

/// n!/(2n)^n, accumulated as a product of ratios to stay in range.
fn bunching_weight(n: usize) -> f64 {
    let two_n = 2.0 * n as f64;
    (1..=n).map(|k| k as f64 / two_n).product()
}

/// 2·n!/(2n)^n.
pub fn closed_form_probability(n: usize) -> f64 {
    2.0 * bunching_weight(n)
}

/// √(n!/(2n)^n) (|n;0⟩ − (−1)^n |0;n⟩) on spatial mode 0.
pub fn closed_form_output(n: usize) -> Result<FockState> {
    if n == 0 {
        return Err(Error::NoPhotons);
    }
    let a = bunching_weight(n).sqrt();
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    FockState::from_terms(
        n,
        [
            (OccupationVector::from_counts([(ModeId::r(0), n as u32)]), Complex64::new(a, 0.0)),
            (OccupationVector::from_counts([(ModeId::l(0), n as u32)]), Complex64::new(sign * a, 0.0)),
        ],
    )
}
