//! Redistribution of the single-line cat into n channels and the GHZ-fraction
//! entanglement witness.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId, OccupationVector};
use crate::mismatch::{mismatch_output, MismatchScenario};
use crate::optics::split_cascade;
use crate::postselect::{bottleneck_output, project, PostSelectionRule};

/// The witness certifies genuine n-particle entanglement at or above this.
pub const WITNESS_THRESHOLD: f64 = 0.5;

/// A weighted set of unnormalized pure states, ρ = Σ w_i |ψ_i⟩⟨ψ_i|.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PureEnsemble {
    components: Vec<(f64, FockState)>,
}

impl PureEnsemble {
    pub fn new() -> Self {
        PureEnsemble::default()
    }

    pub fn single(state: FockState) -> Self {
        PureEnsemble { components: vec![(1.0, state)] }
    }

    pub fn push(&mut self, weight: f64, state: FockState) -> Result<()> {
        if weight < 0.0 || !weight.is_finite() {
            return Err(Error::DimensionMismatch(format!("ensemble weight {weight} must be finite and non-negative")));
        }
        self.components.push((weight, state));
        Ok(())
    }

    pub fn components(&self) -> &[(f64, FockState)] {
        &self.components
    }

    /// Tr ρ = Σ w_i ⟨ψ_i|ψ_i⟩.
    pub fn trace(&self) -> f64 {
        self.components.iter().map(|(w, s)| w * s.norm_sq()).sum()
    }

    pub fn scaled(&self, factor: f64) -> PureEnsemble {
        PureEnsemble { components: self.components.iter().map(|(w, s)| (w * factor, s.clone())).collect() }
    }
}

/// Channel j of an n-channel layout together with its temporal copies j + c·n.
fn channels(n: usize, copies: usize) -> Vec<Vec<usize>> {
    (0..n).map(|j| (0..copies).map(|c| j + c * n).collect()).collect()
}

/// Spreads an n-photon line state (spatial 0 and its copies 0 + c·n) over n
/// channels with the split cascade, keeping exactly one photon per channel.
/// The result is unnormalized.
pub fn redistribute(s: &FockState, n: usize) -> Result<FockState> {
    if n == 0 {
        return Err(Error::NoPhotons);
    }
    if s.photon_number() != n {
        return Err(Error::PhotonCountMismatch { expected: n, found: s.photon_number() });
    }
    let spatials = s.spatial_modes();
    if spatials.iter().any(|sp| sp % n != 0) {
        return Err(Error::ChannelMismatch);
    }
    let copies = spatials.iter().max().map(|m| m / n + 1).unwrap_or(1);
    let optics = split_cascade(n)?.replicated(copies, n)?;
    let rule = PostSelectionRule::one_per_channel(channels(n, copies))?;
    let spread = optics.apply_to_fock_pruned(s, |o| rule.admits_partial(o))?;
    Ok(project(&spread, &rule))
}

/// (|R…R⟩ − (−1)^n |L…L⟩)/√2 with one photon in each of channels 0..n.
///
/// The relative sign follows the cat state on the line; for n = 4 this is
/// (|RRRR⟩ − |LLLL⟩)/√2.
pub fn ghz_state(n: usize) -> Result<FockState> {
    if n == 0 {
        return Err(Error::NoPhotons);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    let all = |pol: fn(usize) -> ModeId| OccupationVector::from_counts((0..n).map(|j| (pol(j), 1)));
    FockState::from_terms(
        n,
        [(all(ModeId::r), Complex64::new(h, 0.0)), (all(ModeId::l), Complex64::new(sign * h, 0.0))],
    )
}

/// Σ_h |⟨target|ψ_h⟩|², where ψ_h collects the terms of `s` with the same
/// temporal-copy pattern h and is folded back onto channels 0..n. Summing
/// over h is the partial trace over the (orthogonal) temporal label.
fn folded_overlap_sq(target: &FockState, s: &FockState, n: usize) -> f64 {
    let mut groups: BTreeMap<Vec<(usize, u32)>, Complex64> = BTreeMap::new();
    for (occ, a) in s.terms() {
        let pattern: Vec<(usize, u32)> = {
            let mut per_spatial: BTreeMap<usize, u32> = BTreeMap::new();
            for (m, c) in occ.iter() {
                *per_spatial.entry(m.spatial).or_default() += c;
            }
            per_spatial.into_iter().collect()
        };
        let folded = occ.map_modes(|m| ModeId::new(m.spatial % n, m.pol));
        *groups.entry(pattern).or_insert(Complex64::new(0.0, 0.0)) += target.amplitude(&folded).conj() * a;
    }
    groups.values().map(|z| z.norm_sqr()).sum()
}

/// ⟨GHZ|ρ|GHZ⟩ / Tr ρ for an ensemble of redistributed states.
pub fn ghz_fraction(e: &PureEnsemble, n: usize) -> Result<f64> {
    let target = ghz_state(n)?;
    let trace = e.trace();
    if trace.is_nan() || trace <= 0.0 {
        return Err(Error::ZeroTrace);
    }
    let overlap: f64 = e
        .components()
        .iter()
        .map(|(w, s)| w * folded_overlap_sq(&target, s, n))
        .sum();
    Ok((overlap / trace).clamp(0.0, 1.0))
}

pub fn witness_passes(fraction: f64) -> bool {
    fraction >= WITNESS_THRESHOLD
}

/// Ideal and one-photon-mismatch outputs, redistributed and weighted by
/// (1−ε) and ε.
pub fn mixture_ensemble(sc: &MismatchScenario) -> Result<PureEnsemble> {
    sc.validate()?;
    let (ideal, _) = bottleneck_output(sc.n)?;
    let error = mismatch_output(sc)?;
    let mut e = PureEnsemble::new();
    e.push(1.0 - sc.epsilon, redistribute(&ideal, sc.n)?)?;
    e.push(sc.epsilon, redistribute(&error, sc.n)?)?;
    Ok(e)
}

pub fn mixture_fraction(sc: &MismatchScenario) -> Result<f64> {
    ghz_fraction(&mixture_ensemble(sc)?, sc.n)
}

/// Four-photon GHZ fraction of the ε-mixture, (12−9ε)/(12−4ε).
pub fn four_photon_fraction_closed_form(epsilon: f64) -> f64 {
    (12.0 - 9.0 * epsilon) / (12.0 - 4.0 * epsilon)
}

/// First-order expansion 1 − (5/12)ε of the closed form.
pub fn four_photon_fraction_first_order(epsilon: f64) -> f64 {
    1.0 - 5.0 / 12.0 * epsilon
}

/// The ε at which the four-photon mixture reaches the witness threshold.
pub fn four_photon_witness_epsilon() -> f64 {
    6.0 / 7.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::circular_ket;
    use crate::postselect::closed_form_output;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cat_redistributes_to_ghz() {
        for n in 2..=5 {
            let cat = closed_form_output(n).unwrap();
            let spread = redistribute(&cat, n).unwrap();
            assert!(spread.same_ray(&ghz_state(n).unwrap(), 1e-10), "n={n}");
            // only the all-R and all-L patterns survive
            assert_eq!(spread.len(), 2);
        }
    }

    #[test]
    fn single_photon_redistribution_is_identity() {
        let s = circular_ket(0, 1, 0).add(&circular_ket(0, 0, 1).scaled(Complex64::new(0.0, 1.0))).unwrap();
        let out = redistribute(&s, 1).unwrap();
        let diff = out.add(&s.scaled(Complex64::new(-1.0, 0.0))).unwrap();
        assert!(diff.norm_sq() < 1e-28);
    }

    #[test]
    fn redistribution_rejects_bad_inputs() {
        assert!(matches!(redistribute(&circular_ket(0, 2, 1), 4), Err(Error::PhotonCountMismatch { .. })));
        assert!(matches!(redistribute(&circular_ket(1, 2, 0), 2), Err(Error::ChannelMismatch)));
    }

    #[test]
    fn ghz_basics() {
        let g4 = ghz_state(4).unwrap();
        assert_abs_diff_eq!(g4.norm_sq(), 1.0, epsilon = 1e-15);
        let rrll = FockState::basis(OccupationVector::from_counts([
            (ModeId::r(0), 1),
            (ModeId::r(1), 1),
            (ModeId::l(2), 1),
            (ModeId::l(3), 1),
        ]));
        assert_eq!(g4.inner(&rrll), Complex64::new(0.0, 0.0));
        let g1 = ghz_state(1).unwrap();
        assert_abs_diff_eq!(g1.norm_sq(), 1.0, epsilon = 1e-15);
        assert_eq!(g1.len(), 2);
        assert!(ghz_state(0).is_err());
    }

    #[test]
    fn ideal_fraction_is_one() {
        let (cat, _) = bottleneck_output(4).unwrap();
        let f = ghz_fraction(&PureEnsemble::single(redistribute(&cat, 4).unwrap()), 4).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn error_fraction_is_three_eighths() {
        let err = mismatch_output(&MismatchScenario::four_photon(1.0).unwrap()).unwrap();
        let f = ghz_fraction(&PureEnsemble::single(redistribute(&err, 4).unwrap()), 4).unwrap();
        assert_abs_diff_eq!(f, 3.0 / 8.0, epsilon = 1e-12);
        assert!(!witness_passes(f));
    }

    #[test]
    fn redistribution_keeps_same_success_factor_for_both_components() {
        let (cat, p) = bottleneck_output(4).unwrap();
        let err = mismatch_output(&MismatchScenario::four_photon(1.0).unwrap()).unwrap();
        let q_ideal = redistribute(&cat, 4).unwrap().norm_sq() / p;
        let q_err = redistribute(&err, 4).unwrap().norm_sq() / err.norm_sq();
        assert_abs_diff_eq!(q_ideal, 3.0 / 32.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q_err, 3.0 / 32.0, epsilon = 1e-14);
    }

    #[test]
    fn mixture_matches_closed_form() {
        for eps in [0.0, 0.2, 0.5, 1.0] {
            let f = mixture_fraction(&MismatchScenario::four_photon(eps).unwrap()).unwrap();
            assert_abs_diff_eq!(f, four_photon_fraction_closed_form(eps), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(four_photon_fraction_closed_form(0.2), 10.2 / 11.2, epsilon = 1e-15);
    }

    #[test]
    fn fraction_is_scale_invariant() {
        let e = mixture_ensemble(&MismatchScenario::four_photon(0.3).unwrap()).unwrap();
        let a = ghz_fraction(&e, 4).unwrap();
        let b = ghz_fraction(&e.scaled(17.5), 4).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
    }

    #[test]
    fn zero_trace_is_an_error() {
        assert!(matches!(ghz_fraction(&PureEnsemble::new(), 4), Err(Error::ZeroTrace)));
        let mut e = PureEnsemble::new();
        e.push(0.0, ghz_state(4).unwrap()).unwrap();
        assert!(matches!(ghz_fraction(&e, 4), Err(Error::ZeroTrace)));
        assert!(e.push(-1.0, ghz_state(4).unwrap()).is_err());
    }

    #[test]
    fn witness_threshold() {
        assert!(witness_passes(1.0));
        assert!(!witness_passes(3.0 / 8.0));
        let eps = four_photon_witness_epsilon();
        assert_abs_diff_eq!(four_photon_fraction_closed_form(eps), 0.5, epsilon = 1e-15);
        assert!(witness_passes(four_photon_fraction_closed_form(eps - 1e-6)));
        assert!(!witness_passes(four_photon_fraction_closed_form(eps + 1e-6)));
    }
}
