//! Multimode bosonic number states with circular-polarization mode labels.
//!
//! Every mode is a pair (spatial index, circular polarization). States are
//! stored sparsely as a map from canonical occupation vectors to complex
//! amplitudes. Post-selected states are usually unnormalized; their squared
//! norm is the success probability of the post-selection.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes with modulus below this are dropped after every operation.
pub const PRUNE_TOLERANCE: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    /// Right circular.
    R,
    /// Left circular.
    L,
}

impl Polarization {
    pub fn flipped(self) -> Self {
        match self {
            Polarization::R => Polarization::L,
            Polarization::L => Polarization::R,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarization::R => "R",
            Polarization::L => "L",
        }
    }
}

/// A single optical mode. Ordered by spatial index first, then R before L.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeId {
    pub spatial: usize,
    pub pol: Polarization,
}

impl ModeId {
    pub const fn new(spatial: usize, pol: Polarization) -> Self {
        ModeId { spatial, pol }
    }

    pub const fn r(spatial: usize) -> Self {
        ModeId::new(spatial, Polarization::R)
    }

    pub const fn l(spatial: usize) -> Self {
        ModeId::new(spatial, Polarization::L)
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.spatial, self.pol.as_str())
    }
}

/// Photon counts per mode, kept sorted by mode and free of zero entries so
/// that equal occupations compare (and hash) equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector(Vec<(ModeId, u32)>);

impl OccupationVector {
    pub fn vacuum() -> Self {
        OccupationVector(Vec::new())
    }

    /// Builds a canonical occupation from arbitrary (mode, count) pairs.
    /// Repeated modes are summed and zero counts dropped.
    pub fn from_counts<I: IntoIterator<Item = (ModeId, u32)>>(counts: I) -> Self {
        let mut acc: BTreeMap<ModeId, u32> = BTreeMap::new();
        for (mode, count) in counts {
            *acc.entry(mode).or_default() += count;
        }
        OccupationVector(acc.into_iter().filter(|&(_, c)| c > 0).collect())
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&(_, c)| c as usize).sum()
    }

    pub fn count(&self, mode: ModeId) -> u32 {
        self.0
            .binary_search_by(|(m, _)| m.cmp(&mode))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    /// Photons summed over both polarizations of a spatial mode.
    pub fn spatial_count(&self, spatial: usize) -> u32 {
        self.count(ModeId::r(spatial)) + self.count(ModeId::l(spatial))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeId, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    /// The occupation with one extra photon in `mode`.
    pub fn with_added(&self, mode: ModeId) -> Self {
        let mut counts = self.0.clone();
        match counts.binary_search_by(|(m, _)| m.cmp(&mode)) {
            Ok(i) => counts[i].1 += 1,
            Err(i) => counts.insert(i, (mode, 1)),
        }
        OccupationVector(counts)
    }

    /// Π n_m! over all modes.
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&(_, c)| factorial(c as usize)).product()
    }

    pub fn map_modes(&self, f: impl Fn(ModeId) -> ModeId) -> Self {
        OccupationVector::from_counts(self.0.iter().map(|&(m, c)| (f(m), c)))
    }

    /// Total Δn = n_R − n_L summed over every mode.
    pub fn circular_difference(&self) -> i64 {
        self.0
            .iter()
            .map(|&(m, c)| match m.pol {
                Polarization::R => c as i64,
                Polarization::L => -(c as i64),
            })
            .sum()
    }

    pub(crate) fn merged(&self, other: &OccupationVector) -> Self {
        OccupationVector::from_counts(self.iter().chain(other.iter()))
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, (m, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}:{c}")?;
        }
        write!(f, "⟩")
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// A fixed-photon-number pure state, possibly unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    photons: usize,
    terms: BTreeMap<OccupationVector, Complex64>,
}

impl FockState {
    /// The zero vector in the `photons`-photon sector.
    pub fn zero(photons: usize) -> Self {
        FockState { photons, terms: BTreeMap::new() }
    }

    pub fn vacuum(scale: Complex64) -> Self {
        FockState::from_terms(0, [(OccupationVector::vacuum(), scale)])
            .expect("vacuum has zero photons")
    }

    pub fn basis(occ: OccupationVector) -> Self {
        let photons = occ.total();
        FockState::from_terms(photons, [(occ, Complex64::new(1.0, 0.0))])
            .expect("basis ket photon number is its own total")
    }

    /// Sums the given terms. Fails if any occupation has the wrong photon count.
    pub fn from_terms<I>(photons: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationVector, Complex64)>,
    {
        let mut map: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.total() != photons {
                return Err(Error::PhotonCountMismatch { expected: photons, found: occ.total() });
            }
            *map.entry(occ).or_insert(ZERO) += amp;
        }
        let mut state = FockState { photons, terms: map };
        state.prune();
        Ok(state)
    }

    fn from_hash_terms(photons: usize, terms: HashMap<OccupationVector, Complex64>) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(_, a)| a.norm() >= PRUNE_TOLERANCE)
            .collect();
        FockState { photons, terms }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_TOLERANCE);
    }

    pub fn photon_number(&self) -> usize {
        self.photons
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or(ZERO)
    }

    /// Terms in canonical occupation order.
    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, Complex64)> + '_ {
        self.terms.iter().map(|(o, &a)| (o, a))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn modes(&self) -> BTreeSet<ModeId> {
        self.terms.keys().flat_map(|o| o.iter().map(|(m, _)| m)).collect()
    }

    pub fn spatial_modes(&self) -> BTreeSet<usize> {
        self.modes().into_iter().map(|m| m.spatial).collect()
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩; zero when the photon numbers differ.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        if self.photons != other.photons {
            return ZERO;
        }
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = ZERO;
        for (occ, a) in &small.terms {
            if let Some(b) = large.terms.get(occ) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        acc
    }

    /// Returns the unit-norm state together with the original norm².
    pub fn normalize(&self) -> Result<(FockState, f64)> {
        let n2 = self.norm_sq();
        if self.is_zero() || n2 == 0.0 {
            return Err(Error::EmptyState);
        }
        Ok((self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)), n2))
    }

    pub fn scaled(&self, c: Complex64) -> FockState {
        let mut out = FockState {
            photons: self.photons,
            terms: self.terms.iter().map(|(o, &a)| (o.clone(), a * c)).collect(),
        };
        out.prune();
        out
    }

    /// self + other, both in the same photon-number sector.
    pub fn add(&self, other: &FockState) -> Result<FockState> {
        if self.photons != other.photons && !self.is_zero() && !other.is_zero() {
            return Err(Error::PhotonCountMismatch { expected: self.photons, found: other.photons });
        }
        let photons = if self.is_zero() { other.photons } else { self.photons };
        FockState::from_terms(
            photons,
            self.terms().chain(other.terms()).map(|(o, a)| (o.clone(), a)),
        )
    }

    /// |a⟩ ⊗ |b⟩ over disjoint mode sets.
    pub fn tensor(&self, other: &FockState) -> Result<FockState> {
        let mine = self.modes();
        if let Some(m) = other.modes().into_iter().find(|m| mine.contains(m)) {
            return Err(Error::OverlappingModes(m));
        }
        let photons = self.photons + other.photons;
        let mut terms = BTreeMap::new();
        for (oa, a) in &self.terms {
            for (ob, b) in &other.terms {
                terms.insert(oa.merged(ob), a * b);
            }
        }
        let mut out = FockState { photons, terms };
        out.prune();
        Ok(out)
    }

    /// Keeps the terms whose occupation satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&OccupationVector) -> bool) -> FockState {
        FockState {
            photons: self.photons,
            terms: self
                .terms
                .iter()
                .filter(|(o, _)| keep(o))
                .map(|(o, &a)| (o.clone(), a))
                .collect(),
        }
    }

    /// Relabels modes. The relabeling must be injective on the modes present.
    pub fn relabel(&self, f: impl Fn(ModeId) -> ModeId) -> FockState {
        FockState::from_terms(self.photons, self.terms().map(|(o, a)| (o.map_modes(&f), a)))
            .expect("relabeling preserves photon number")
    }

    /// Multiplies each term by a phase depending on its occupation.
    pub fn map_amplitudes(&self, f: impl Fn(&OccupationVector, Complex64) -> Complex64) -> FockState {
        let mut out = FockState {
            photons: self.photons,
            terms: self.terms.iter().map(|(o, &a)| (o.clone(), f(o, a))).collect(),
        };
        out.prune();
        out
    }

    /// Equality up to a global phase: |⟨a|b⟩|² = ‖a‖²‖b‖², compared relative
    /// to ‖a‖²‖b‖² with tolerance `tol`. Does not compare norms.
    pub fn same_ray(&self, other: &FockState, tol: f64) -> bool {
        let prod = self.norm_sq() * other.norm_sq();
        if prod == 0.0 {
            return self.is_zero() && other.is_zero();
        }
        let ov = self.inner(other).norm_sqr();
        (prod - ov).abs() <= tol * prod
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("state serializes")
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (o, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, o)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    occ: Vec<(usize, Polarization, u32)>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    photons: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for FockState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateRepr {
            photons: self.photons,
            terms: self
                .terms
                .iter()
                .map(|(o, a)| TermRepr {
                    occ: o.iter().map(|(m, c)| (m.spatial, m.pol, c)).collect(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FockState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = StateRepr::deserialize(d)?;
        let terms = repr.terms.into_iter().map(|t| {
            let occ = OccupationVector::from_counts(
                t.occ.into_iter().map(|(s, p, c)| (ModeId::new(s, p), c)),
            );
            (occ, Complex64::new(t.re, t.im))
        });
        FockState::from_terms(repr.photons, terms).map_err(serde::de::Error::custom)
    }
}

/// Single-photon mode amplitudes: the photon Σ_m v[m] a†_m.
pub type PhotonVector = BTreeMap<ModeId, Complex64>;

/// An unentangled multi-photon state `scale · Π_l (Σ_m v_l[m] a†_m) |vac⟩`.
///
/// Linear optics acts photon by photon on this form, so propagation stays
/// linear in the photon count; expansion into the Fock basis is deferred.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPhotonState {
    photons: Vec<PhotonVector>,
    scale: Complex64,
}

impl ProductPhotonState {
    pub fn new(photons: Vec<PhotonVector>, scale: Complex64) -> Result<Self> {
        for (i, v) in photons.iter().enumerate() {
            if v.values().all(|a| a.norm() == 0.0) {
                return Err(Error::EmptyPhoton(i));
            }
        }
        Ok(ProductPhotonState { photons, scale })
    }

    pub fn photons(&self) -> &[PhotonVector] {
        &self.photons
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn photon_count(&self) -> usize {
        self.photons.len()
    }

    pub fn modes(&self) -> BTreeSet<ModeId> {
        self.photons.iter().flat_map(|v| v.keys().copied()).collect()
    }

    /// Expands into the occupation basis.
    pub fn expand(&self) -> FockState {
        self.expand_pruned(|_| true)
    }

    /// Expands while discarding partial occupations rejected by `admits`.
    ///
    /// Creation operators only ever add photons, so `admits` must be monotone:
    /// once it rejects a partial occupation it must reject every extension of
    /// it. Zero and at-most-k occupation constraints satisfy this.
    pub fn expand_pruned(&self, admits: impl Fn(&OccupationVector) -> bool) -> FockState {
        let mut terms: HashMap<OccupationVector, Complex64> = HashMap::new();
        terms.insert(OccupationVector::vacuum(), self.scale);
        for photon in &self.photons {
            let mut next: HashMap<OccupationVector, Complex64> =
                HashMap::with_capacity(terms.len() * photon.len());
            for (occ, amp) in &terms {
                for (&mode, &v) in photon {
                    if v == ZERO {
                        continue;
                    }
                    let raised = occ.with_added(mode);
                    if !admits(&raised) {
                        continue;
                    }
                    // a† |n⟩ = √(n+1) |n+1⟩
                    let boost = (raised.count(mode) as f64).sqrt();
                    *next.entry(raised).or_insert(ZERO) += amp * v * boost;
                }
            }
            next.retain(|_, a| a.norm() >= PRUNE_TOLERANCE);
            terms = next;
        }
        FockState::from_hash_terms(self.photons.len(), terms)
    }

    /// The state with every photon vector restricted to the modes accepted by
    /// `keep`; `None` when some photon has no amplitude left (zero state).
    pub fn restrict(&self, keep: impl Fn(ModeId) -> bool) -> Option<ProductPhotonState> {
        let photons: Vec<PhotonVector> = self
            .photons
            .iter()
            .map(|v| v.iter().filter(|(m, _)| keep(**m)).map(|(m, a)| (*m, *a)).collect())
            .collect();
        ProductPhotonState::new(photons, self.scale).ok()
    }

    pub(crate) fn from_parts_unchecked(photons: Vec<PhotonVector>, scale: Complex64) -> Self {
        ProductPhotonState { photons, scale }
    }
}

/// Builds a photon vector from (mode, amplitude) pairs.
pub fn photon<I: IntoIterator<Item = (ModeId, Complex64)>>(entries: I) -> PhotonVector {
    let mut v = PhotonVector::new();
    for (m, a) in entries {
        *v.entry(m).or_insert(ZERO) += a;
    }
    v
}

/// |n_R; n_L⟩ on a single spatial mode.
pub fn circular_ket(spatial: usize, n_r: u32, n_l: u32) -> FockState {
    FockState::basis(OccupationVector::from_counts([
        (ModeId::r(spatial), n_r),
        (ModeId::l(spatial), n_l),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn occupation_is_canonical() {
        let a = OccupationVector::from_counts([(ModeId::l(1), 1), (ModeId::r(0), 2), (ModeId::r(3), 0)]);
        let b = OccupationVector::from_counts([(ModeId::r(0), 1), (ModeId::l(1), 1), (ModeId::r(0), 1)]);
        assert_eq!(a, b);
        assert_eq!(a.total(), 3);
        assert_eq!(a.count(ModeId::r(3)), 0);
        assert_eq!(a.iter().count(), 2);
    }

    #[test]
    fn mode_order_is_spatial_then_r_before_l() {
        let mut v = vec![ModeId::l(0), ModeId::r(1), ModeId::r(0), ModeId::l(1)];
        v.sort();
        assert_eq!(v, vec![ModeId::r(0), ModeId::l(0), ModeId::r(1), ModeId::l(1)]);
    }

    #[test]
    fn single_photon_expands_to_one_ket() {
        let p = ProductPhotonState::new(vec![photon([(ModeId::r(0), c(1.0, 0.0))])], c(1.0, 0.0)).unwrap();
        let s = p.expand();
        assert_eq!(s.len(), 1);
        let occ = OccupationVector::from_counts([(ModeId::r(0), 1)]);
        assert_abs_diff_eq!(s.amplitude(&occ).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_product_is_vacuum_with_scale() {
        let p = ProductPhotonState::new(vec![], c(0.0, 2.0)).unwrap();
        let s = p.expand();
        assert_eq!(s.photon_number(), 0);
        assert_eq!(s.amplitude(&OccupationVector::vacuum()), c(0.0, 2.0));
    }

    #[test]
    fn two_diagonal_photons_in_one_mode() {
        let h = 0.5f64.sqrt();
        let v = photon([(ModeId::r(0), c(h, 0.0)), (ModeId::l(0), c(h, 0.0))]);
        let s = ProductPhotonState::new(vec![v.clone(), v], c(1.0, 0.0)).unwrap().expand();
        // identical photons bunch: norm² = 2!
        assert_abs_diff_eq!(s.norm_sq(), 2.0, epsilon = 1e-14);
        // (a_R + a_L)²/2 |0⟩ = (√2|2,0⟩ + 2|1,1⟩ + √2|0,2⟩)/2
        let rr = OccupationVector::from_counts([(ModeId::r(0), 2)]);
        let rl = OccupationVector::from_counts([(ModeId::r(0), 1), (ModeId::l(0), 1)]);
        assert_abs_diff_eq!(s.amplitude(&rr).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(&rl).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn photon_with_no_amplitude_is_rejected() {
        let err = ProductPhotonState::new(vec![PhotonVector::new()], c(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::EmptyPhoton(0)));
    }

    #[test]
    fn normalize_scaled_ket() {
        let ket = circular_ket(0, 2, 1);
        let (n, p) = ket.scaled(c(0.0, 3.0)).normalize().unwrap();
        assert_abs_diff_eq!(p, 9.0, epsilon = 1e-14);
        assert!(n.same_ray(&ket, 1e-12));
        assert_abs_diff_eq!(n.norm_sq(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn normalize_zero_state_errors() {
        let err = FockState::zero(3).normalize().unwrap_err();
        assert_eq!(err.to_string(), "empty post-selected state");
    }

    #[test]
    fn orthogonal_kets_have_zero_overlap() {
        assert_eq!(circular_ket(0, 3, 1).inner(&circular_ket(0, 2, 2)), ZERO);
        assert_eq!(circular_ket(0, 3, 1).inner(&circular_ket(0, 2, 1)), ZERO);
    }

    #[test]
    fn tensor_requires_disjoint_modes() {
        let a = circular_ket(0, 1, 0);
        assert!(matches!(a.tensor(&a), Err(Error::OverlappingModes(_))));
        let b = circular_ket(1, 0, 1).scaled(c(0.5, 0.0));
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.photon_number(), 2);
        assert_abs_diff_eq!(t.norm_sq(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn from_terms_rejects_wrong_photon_count() {
        let occ = OccupationVector::from_counts([(ModeId::r(0), 2)]);
        assert!(FockState::from_terms(3, [(occ, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn pruning_drops_tiny_amplitudes() {
        let s = circular_ket(0, 1, 0).scaled(c(1e-15, 0.0));
        assert!(s.is_zero());
    }

    #[test]
    fn json_layout() {
        let s = circular_ket(0, 2, 0)
            .add(&circular_ket(0, 0, 2).scaled(c(-1.0, 0.0)))
            .unwrap()
            .scaled(c(0.5, 0.0));
        let v = s.to_json();
        assert_eq!(v["photons"], 2);
        assert_eq!(v["terms"][0]["occ"], serde_json::json!([[0, "R", 2]]));
        assert_eq!(v["terms"][1]["occ"], serde_json::json!([[0, "L", 2]]));
        assert_eq!(v["terms"][1]["re"], -0.5);
        let back: FockState = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
