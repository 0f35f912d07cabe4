//! Linear-optical mode maps, beam-splitter cascades and the bottleneck input.
//!
//! A [`ModeMap`] stores `U[out][in]` with the convention that the output
//! annihilation operators are `b_out = Σ_in U[out][in] a_in`. A photon created
//! by `Σ_m v[m] a†_m` therefore leaves the network as `Σ_j (Uv)[j] b†_j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId, OccupationVector, Polarization, PhotonVector, ProductPhotonState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Both polarization modes of spatial modes `0..total_spatial`, canonical order.
pub fn spatial_modes(total_spatial: usize) -> Vec<ModeId> {
    (0..total_spatial).flat_map(|s| [ModeId::r(s), ModeId::l(s)]).collect()
}

/// A linear map between two ordered mode lists.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeMap {
    in_modes: Vec<ModeId>,
    out_modes: Vec<ModeId>,
    /// Row-major, `out_modes.len()` rows by `in_modes.len()` columns.
    matrix: Vec<Complex64>,
    in_index: BTreeMap<ModeId, usize>,
}

impl ModeMap {
    pub fn new(in_modes: Vec<ModeId>, out_modes: Vec<ModeId>, matrix: Vec<Complex64>) -> Result<Self> {
        if matrix.len() != in_modes.len() * out_modes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} map",
                matrix.len(),
                out_modes.len(),
                in_modes.len()
            )));
        }
        let in_index: BTreeMap<ModeId, usize> =
            in_modes.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        if in_index.len() != in_modes.len() {
            return Err(Error::DimensionMismatch("repeated input mode".into()));
        }
        Ok(ModeMap { in_modes, out_modes, matrix, in_index })
    }

    pub fn identity(modes: Vec<ModeId>) -> Self {
        let d = modes.len();
        let mut matrix = vec![ZERO; d * d];
        for i in 0..d {
            matrix[i * d + i] = ONE;
        }
        ModeMap::new(modes.clone(), modes, matrix).expect("square identity")
    }

    pub fn in_modes(&self) -> &[ModeId] {
        &self.in_modes
    }

    pub fn out_modes(&self) -> &[ModeId] {
        &self.out_modes
    }

    pub fn rows(&self) -> usize {
        self.out_modes.len()
    }

    pub fn cols(&self) -> usize {
        self.in_modes.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.cols() + col]
    }

    /// `U[out][in]` looked up by mode labels; zero if either label is absent.
    pub fn coefficient(&self, out: ModeId, input: ModeId) -> Complex64 {
        let Some(&col) = self.in_index.get(&input) else { return ZERO };
        match self.out_modes.iter().position(|&m| m == out) {
            Some(row) => self.entry(row, col),
            None => ZERO,
        }
    }

    pub fn adjoint(&self) -> ModeMap {
        let (r, c) = (self.rows(), self.cols());
        let mut matrix = vec![ZERO; r * c];
        for i in 0..r {
            for j in 0..c {
                matrix[j * r + i] = self.entry(i, j).conj();
            }
        }
        ModeMap::new(self.out_modes.clone(), self.in_modes.clone(), matrix).expect("transposed dims")
    }

    /// Applies `self` first, then `next`.
    pub fn then(&self, next: &ModeMap) -> Result<ModeMap> {
        compose(self, next)
    }

    /// Largest entrywise deviation of U†U from the identity.
    pub fn isometry_defect(&self) -> f64 {
        let (r, c) = (self.rows(), self.cols());
        let mut worst = 0.0f64;
        for i in 0..c {
            for j in 0..c {
                let mut acc = ZERO;
                for k in 0..r {
                    acc += self.entry(k, i).conj() * self.entry(k, j);
                }
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    pub fn is_isometry(&self, tol: f64) -> bool {
        self.isometry_defect() <= tol
    }

    /// Largest entrywise difference between two maps with identical mode lists.
    pub fn max_difference(&self, other: &ModeMap) -> Option<f64> {
        if self.in_modes != other.in_modes || self.out_modes != other.out_modes {
            return None;
        }
        Some(
            self.matrix
                .iter()
                .zip(&other.matrix)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        )
    }

    /// Checks that the map acts identically on the R and L blocks and never
    /// mixes them, i.e. commutes with the global R↔L swap.
    pub fn is_polarization_neutral(&self, tol: f64) -> bool {
        for (row, &out) in self.out_modes.iter().enumerate() {
            for (col, &input) in self.in_modes.iter().enumerate() {
                let swapped = self.coefficient(
                    ModeId::new(out.spatial, out.pol.flipped()),
                    ModeId::new(input.spatial, input.pol.flipped()),
                );
                let here = self.entry(row, col);
                if (here - swapped).norm() > tol {
                    return false;
                }
                if out.pol != input.pol && here.norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Transforms a single-photon amplitude vector: v ↦ Uv.
    pub fn apply_to_photon(&self, v: &PhotonVector) -> Result<PhotonVector> {
        let mut out = vec![ZERO; self.rows()];
        for (&mode, &amp) in v {
            let &col = self.in_index.get(&mode).ok_or(Error::ModeMismatch(mode))?;
            for (row, o) in out.iter_mut().enumerate() {
                *o += self.entry(row, col) * amp;
            }
        }
        Ok(self
            .out_modes
            .iter()
            .zip(out)
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(&m, a)| (m, a))
            .collect())
    }

    /// Propagates a product state photon by photon.
    pub fn apply(&self, p: &ProductPhotonState) -> Result<ProductPhotonState> {
        let photons = p
            .photons()
            .iter()
            .map(|v| self.apply_to_photon(v))
            .collect::<Result<Vec<_>>>()?;
        // A photon can only vanish under a non-isometric map; keep the zero
        // vector so that expansion yields the zero state.
        Ok(ProductPhotonState::from_parts_unchecked(photons, p.scale()))
    }

    /// Transforms an arbitrary Fock state.
    pub fn apply_to_fock(&self, s: &FockState) -> Result<FockState> {
        self.apply_to_fock_pruned(s, |_| true)
    }

    /// Like [`ModeMap::apply_to_fock`], discarding output occupations rejected
    /// by the monotone predicate `admits` while they are being built.
    pub fn apply_to_fock_pruned(
        &self,
        s: &FockState,
        admits: impl Fn(&OccupationVector) -> bool,
    ) -> Result<FockState> {
        let mut terms: Vec<(OccupationVector, Complex64)> = Vec::new();
        for (occ, amp) in s.terms() {
            // |occ⟩ = Π_m (a†_m)^{n_m} / √(n_m!) |vac⟩
            let mut photons = Vec::with_capacity(occ.total());
            for (mode, count) in occ.iter() {
                let col = PhotonVector::from([(mode, ONE)]);
                let image = self.apply_to_photon(&col)?;
                photons.extend(std::iter::repeat_n(image, count as usize));
            }
            let scale = amp / occ.factorial_product().sqrt();
            let image = ProductPhotonState::from_parts_unchecked(photons, scale).expand_pruned(&admits);
            terms.extend(image.terms().map(|(o, a)| (o.clone(), a)));
        }
        FockState::from_terms(s.photon_number(), terms)
    }

    /// Block-diagonal copy of the map on `copies` disjoint spatial blocks;
    /// mode (s, p) of copy c is relabeled (s + c·stride, p).
    pub fn replicated(&self, copies: usize, stride: usize) -> Result<ModeMap> {
        let max_spatial = self
            .in_modes
            .iter()
            .chain(&self.out_modes)
            .map(|m| m.spatial)
            .max()
            .unwrap_or(0);
        if max_spatial >= stride {
            return Err(Error::DimensionMismatch(format!(
                "stride {stride} does not exceed spatial index {max_spatial}"
            )));
        }
        let shift = |m: ModeId, c: usize| ModeId::new(m.spatial + c * stride, m.pol);
        let in_modes: Vec<ModeId> =
            (0..copies).flat_map(|c| self.in_modes.iter().map(move |&m| shift(m, c))).collect();
        let out_modes: Vec<ModeId> =
            (0..copies).flat_map(|c| self.out_modes.iter().map(move |&m| shift(m, c))).collect();
        let (r, cc) = (self.rows(), self.cols());
        let total_cols = cc * copies;
        let mut matrix = vec![ZERO; r * copies * total_cols];
        for c in 0..copies {
            for i in 0..r {
                for j in 0..cc {
                    matrix[(c * r + i) * total_cols + c * cc + j] = self.entry(i, j);
                }
            }
        }
        ModeMap::new(in_modes, out_modes, matrix)
    }
}

/// Matrix product: `u1` acts first, then `u2`. Requires `u1.out == u2.in`.
pub fn compose(u1: &ModeMap, u2: &ModeMap) -> Result<ModeMap> {
    if u1.out_modes != u2.in_modes {
        return Err(Error::DimensionMismatch(format!(
            "cannot feed {} outputs into {} inputs",
            u1.rows(),
            u2.cols()
        )));
    }
    let (r, k, c) = (u2.rows(), u2.cols(), u1.cols());
    let mut matrix = vec![ZERO; r * c];
    for i in 0..r {
        for l in 0..k {
            let a = u2.entry(i, l);
            if a == ZERO {
                continue;
            }
            for j in 0..c {
                matrix[i * c + j] += a * u1.entry(l, j);
            }
        }
    }
    ModeMap::new(u1.in_modes.clone(), u2.out_modes.clone(), matrix)
}

/// A polarization-insensitive two-port beam splitter.
///
/// The per-polarization block is `[[t, r], [r, −t]]` on `(port_a, port_b)`
/// with `t = √(1−R)` and `r = √R`. In the cascades `port_a` is the line and
/// `port_b` the side port, so the sign flip lands on the side-port row and
/// every contribution to the line keeps the same phase.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitter {
    pub port_a: usize,
    pub port_b: usize,
    pub reflectivity: f64,
}

pub fn beam_splitter_map(bs: &BeamSplitter, total_spatial: usize) -> Result<ModeMap> {
    if !(0.0..=1.0).contains(&bs.reflectivity) {
        return Err(Error::InvalidReflectivity(bs.reflectivity));
    }
    for port in [bs.port_a, bs.port_b] {
        if port >= total_spatial {
            return Err(Error::PortOutOfRange { port, total: total_spatial });
        }
    }
    if bs.port_a == bs.port_b {
        return Err(Error::SamePorts(bs.port_a));
    }
    let modes = spatial_modes(total_spatial);
    let d = modes.len();
    let mut u = ModeMap::identity(modes);
    let t = Complex64::new((1.0 - bs.reflectivity).sqrt(), 0.0);
    let r = Complex64::new(bs.reflectivity.sqrt(), 0.0);
    for pol in [0, 1] {
        let a = 2 * bs.port_a + pol;
        let b = 2 * bs.port_b + pol;
        u.matrix[a * d + a] = t;
        u.matrix[a * d + b] = r;
        u.matrix[b * d + a] = r;
        u.matrix[b * d + b] = -t;
    }
    Ok(u)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CascadeDirection {
    Merge,
    Split,
}

/// The beam-splitter line joining `n` ports into port 0 (merge) or fanning
/// port 0 out to `n` ports (split).
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeSpec {
    pub n: usize,
    pub direction: CascadeDirection,
}

impl CascadeSpec {
    pub fn new(n: usize, direction: CascadeDirection) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoPhotons);
        }
        Ok(CascadeSpec { n, direction })
    }

    /// Splitters in evaluation order. Merge stage k (1-based) joins port k to
    /// the line with R = 1/(k+1); split runs the same stages backwards.
    pub fn splitters(&self) -> Vec<BeamSplitter> {
        let mut stages: Vec<BeamSplitter> = (1..self.n)
            .map(|k| BeamSplitter { port_a: 0, port_b: k, reflectivity: 1.0 / (k as f64 + 1.0) })
            .collect();
        if self.direction == CascadeDirection::Split {
            stages.reverse();
        }
        stages
    }

    pub fn mode_map(&self) -> ModeMap {
        let mut u = ModeMap::identity(spatial_modes(self.n));
        for bs in self.splitters() {
            let stage = beam_splitter_map(&bs, self.n).expect("cascade ports are in range");
            u = compose(&u, &stage).expect("cascade stages share modes");
        }
        u
    }
}

/// Merge cascade on `n` ports with port 0 as the output line.
pub fn merge_cascade(n: usize) -> Result<ModeMap> {
    Ok(CascadeSpec::new(n, CascadeDirection::Merge)?.mode_map())
}

/// Split cascade from port 0 to `n` output channels; the adjoint of the merge.
pub fn split_cascade(n: usize) -> Result<ModeMap> {
    Ok(CascadeSpec::new(n, CascadeDirection::Split)?.mode_map())
}

/// A photon linearly polarized at `angle` (radians from horizontal):
/// amplitudes (1, e^{−2i·angle})/√2 on (R, L).
pub fn linear_photon(spatial: usize, angle: f64) -> PhotonVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PhotonVector::from([
        (ModeId::r(spatial), Complex64::new(h, 0.0)),
        (ModeId::l(spatial), Complex64::from_polar(h, -2.0 * angle)),
    ])
}

/// The `n`-photon bottleneck input: photon l sits in port l with relative
/// phase e^{−i2πl/n} on L, a linear polarization at angle πl/n.
pub fn build_input(n: usize) -> Result<ProductPhotonState> {
    if n == 0 {
        return Err(Error::NoPhotons);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let photons = (0..n)
        .map(|l| {
            PhotonVector::from([
                (ModeId::r(l), Complex64::new(h, 0.0)),
                (ModeId::l(l), Complex64::from_polar(h, -2.0 * PI * l as f64 / n as f64)),
            ])
        })
        .collect();
    ProductPhotonState::new(photons, ONE)
}

#[derive(Serialize, Deserialize)]
struct ModeMapRepr {
    in_modes: Vec<(usize, Polarization)>,
    out_modes: Vec<(usize, Polarization)>,
    matrix: Vec<Vec<(f64, f64)>>,
}

impl Serialize for ModeMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs = |v: &[ModeId]| v.iter().map(|m| (m.spatial, m.pol)).collect();
        ModeMapRepr {
            in_modes: pairs(&self.in_modes),
            out_modes: pairs(&self.out_modes),
            matrix: (0..self.rows())
                .map(|i| (0..self.cols()).map(|j| (self.entry(i, j).re, self.entry(i, j).im)).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModeMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ModeMapRepr::deserialize(d)?;
        let modes = |v: Vec<(usize, Polarization)>| v.into_iter().map(|(s, p)| ModeId::new(s, p)).collect();
        let matrix = repr.matrix.into_iter().flatten().map(|(re, im)| Complex64::new(re, im)).collect();
        ModeMap::new(modes(repr.in_modes), modes(repr.out_modes), matrix).map_err(serde::de::Error::custom)
    }
}
