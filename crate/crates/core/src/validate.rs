//! End-to-end self-checks reported by `pbsim validate`.
//!
//! Each check recomputes a published value through the full simulation path
//! and compares it to an independent closed form or brute-force result.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::circuit::{builtin_circuit, parse_circuit, serialize, BuiltinKind};
use crate::entanglement::{
    four_photon_fraction_closed_form, four_photon_fraction_first_order, ghz_fraction, mixture_fraction, redistribute,
    PureEnsemble,
};
use crate::fock::{circular_ket, FockState, ModeId, OccupationVector, PhotonVector, ProductPhotonState};
use crate::mismatch::{error_hv_distribution, mismatch_output, MismatchScenario};
use crate::polarization::{circular_distribution, four_photon_fringes, linear_distribution, rotation_symmetry_defect};
use crate::postselect::{bottleneck_output, closed_form_output, closed_form_probability};
use crate::reference::brute_force_expand;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub number: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {}: {} {} ({})", self.number, verdict, self.title, self.detail)
    }
}

type Check = (u32, &'static str, fn() -> crate::Result<(bool, String)>);

const CHECKS: [Check; 10] = [
    (1, "success probability 2·n!/(2n)^n", success_probability),
    (2, "cat-state identity", cat_identity),
    (3, "circular super-bunching", circular_bunching),
    (4, "linear fringe law", fringe_law),
    (5, "mode-mismatch error state", error_state),
    (6, "error universality", error_universality),
    (7, "GHZ pipeline and witness", ghz_pipeline),
    (8, "expansion oracle equivalence", oracle_equivalence),
    (9, "rotation symmetry", rotation_symmetry),
    (10, "circuit text round trip and fuzzing", parser_checks),
];

pub fn run_all() -> Vec<CriterionResult> {
    CHECKS
        .iter()
        .map(|&(number, title, check)| {
            let (passed, detail) = match check() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CriterionResult { number, title, passed, detail }
        })
        .collect()
}

/// Formats `x` with `digits` significant digits in plain decimal notation.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn success_probability() -> crate::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 1..=7 {
        let (_, p) = bottleneck_output(n)?;
        worst = worst.max((p - closed_form_probability(n)).abs());
    }
    let p3 = bottleneck_output(3)?.1;
    let p4 = bottleneck_output(4)?.1;
    let spots = significant(p3, 12) == significant(1.0 / 18.0, 12) && significant(p4, 12) == significant(3.0 / 256.0, 12);
    Ok((
        worst <= 1e-12 && spots,
        format!("max |Δp| = {worst:.2e}; p(3) = {}, p(4) = {}", significant(p3, 12), significant(p4, 12)),
    ))
}

fn cat_identity() -> crate::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 2..=5 {
        let (s, _) = bottleneck_output(n)?;
        let c = closed_form_output(n)?;
        let prod = s.norm_sq() * c.norm_sq();
        worst = worst.max((prod - s.inner(&c).norm_sqr()).abs() / prod);
    }
    Ok((worst <= 1e-10, format!("max overlap defect {worst:.2e}")))
}

fn circular_bunching() -> crate::Result<(bool, String)> {
    let d = circular_distribution(&bottleneck_output(4)?.0)?;
    let expected = [0.5, 0.0, 0.0, 0.0, 0.5];
    let worst = d.probs().iter().zip(expected).map(|(p, e)| (p - e).abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e}")))
}

fn fringe_law() -> crate::Result<(bool, String)> {
    let cat = bottleneck_output(4)?.0;
    let mut fringe = 0.0f64;
    let mut period = 0.0f64;
    for j in 0..64 {
        let phi = PI * j as f64 / 64.0;
        let d = linear_distribution(&cat, phi)?;
        let shifted = linear_distribution(&cat, phi + PI / 4.0)?;
        for (p, e) in d.probs().iter().zip(four_photon_fringes(phi)) {
            fringe = fringe.max((p - e).abs());
        }
        period = period.max(d.max_difference(&shifted));
    }
    let eighth = linear_distribution(&cat, PI / 8.0)?.get(0);
    let sixteenth = linear_distribution(&cat, PI / 16.0)?;
    let binomial = sixteenth
        .probs()
        .iter()
        .zip([1.0, 4.0, 6.0, 4.0, 1.0])
        .map(|(p, e)| (p - e / 16.0).abs())
        .fold(0.0, f64::max);
    let ok = fringe <= 1e-10 && period <= 1e-10 && (eighth - 0.75).abs() <= 1e-10 && binomial <= 1e-10;
    Ok((
        ok,
        format!("fringe {fringe:.2e}, period {period:.2e}, p_π/8(0) = {eighth:.12}, binomial {binomial:.2e}"),
    ))
}

fn error_state() -> crate::Result<(bool, String)> {
    let sc = MismatchScenario::four_photon(1.0)?;
    let s = mismatch_output(&sc)?;
    let norm = s.norm_sq();
    let norm_ok = (norm - 1.0 / 128.0).abs() <= 1e-12 && (norm - 2.0 / 3.0 * closed_form_probability(4)).abs() <= 1e-12;
    let circ = circular_distribution(&s)?;
    let circ_dev = circ
        .probs()
        .iter()
        .zip([3.0, 4.0, 2.0, 4.0, 3.0])
        .map(|(p, e)| (p - e / 16.0).abs())
        .fold(0.0, f64::max);
    let hv = error_hv_distribution(&sc)?;
    let off = [4, 0, -4].iter().map(|&d| hv.get(d)).fold(0.0, f64::max);
    let ratio = hv.get(-2) / hv.get(2);
    let ok = norm_ok && circ_dev <= 1e-12 && off <= 1e-12 && (ratio - 3.0).abs() <= 1e-10;
    Ok((ok, format!("norm² = {norm:.15}, circular dev {circ_dev:.2e}, V:H ratio {ratio:.12}")))
}

fn error_universality() -> crate::Result<(bool, String)> {
    let reference = circular_distribution(&mismatch_output(&MismatchScenario::four_photon(1.0)?)?)?;
    let mut worst = 0.0f64;
    for port in 0..4 {
        for k in 0..8 {
            let sc = MismatchScenario::new(4, port, 1.0)?.with_angle(PI * k as f64 / 8.0);
            let d = circular_distribution(&mismatch_output(&sc)?)?;
            worst = worst.max(d.max_difference(&reference));
        }
    }
    Ok((worst <= 1e-10, format!("max deviation over 4 ports × 8 angles {worst:.2e}")))
}

fn ghz_pipeline() -> crate::Result<(bool, String)> {
    let (cat, _) = bottleneck_output(4)?;
    let spread = redistribute(&cat, 4)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let all = |pol: fn(usize) -> ModeId| OccupationVector::from_counts((0..4).map(|j| (pol(j), 1)));
    let ghz = FockState::from_terms(4, [(all(ModeId::r), Complex64::new(h, 0.0)), (all(ModeId::l), Complex64::new(-h, 0.0))])?;
    let same = spread.same_ray(&ghz, 1e-10);

    let err = mismatch_output(&MismatchScenario::four_photon(1.0)?)?;
    let f_err = ghz_fraction(&PureEnsemble::single(redistribute(&err, 4)?), 4)?;

    let mut curve = 0.0f64;
    for k in 0..=10 {
        let eps = k as f64 / 10.0;
        let f = mixture_fraction(&MismatchScenario::four_photon(eps)?)?;
        curve = curve.max((f - four_photon_fraction_closed_form(eps)).abs());
    }
    let h_eps = 1e-4;
    let slope = (mixture_fraction(&MismatchScenario::four_photon(h_eps)?)? - 1.0) / h_eps;
    let first_order_slope = (four_photon_fraction_first_order(h_eps) - 1.0) / h_eps;
    let ok = same && (f_err - 0.375).abs() <= 1e-12 && curve <= 1e-10 && (slope - first_order_slope).abs() <= 1e-3;
    Ok((
        ok,
        format!("GHZ match {same}, F(ψ3⊗1) = {f_err:.12}, curve dev {curve:.2e}, slope {slope:.6}"),
    ))
}

/// A random product state with `n` photons spread over `modes` modes.
pub fn random_product_state(rng: &mut StdRng, n: usize, modes: usize) -> ProductPhotonState {
    let all: Vec<ModeId> = (0..modes).map(|i| if i % 2 == 0 { ModeId::r(i / 2) } else { ModeId::l(i / 2) }).collect();
    let photons = (0..n)
        .map(|_| {
            let mut v = PhotonVector::new();
            while v.is_empty() {
                for &m in &all {
                    if rng.gen_bool(0.6) {
                        v.insert(m, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                    }
                }
            }
            v
        })
        .collect();
    let scale = Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5));
    ProductPhotonState::new(photons, scale).expect("photons are nonempty")
}

fn oracle_equivalence() -> crate::Result<(bool, String)> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let modes = rng.gen_range(1..=8);
        let p = random_product_state(&mut rng, n, modes);
        let fast = p.expand();
        let slow = brute_force_expand(&p);
        for (occ, _) in fast.terms().chain(slow.terms()) {
            worst = worst.max((fast.amplitude(occ) - slow.amplitude(occ)).norm());
        }
    }
    Ok((worst <= 1e-12, format!("max amplitude error over 100 states {worst:.2e}")))
}

fn rotation_symmetry() -> crate::Result<(bool, String)> {
    let mut cat_worst = 0.0f64;
    let mut broken_min = f64::INFINITY;
    for n in 2..=6u32 {
        let cat = bottleneck_output(n as usize)?.0;
        cat_worst = cat_worst.max(rotation_symmetry_defect(&cat, n));
        broken_min = broken_min.min(rotation_symmetry_defect(&circular_ket(0, n - 1, 1), n));
    }
    let ok = cat_worst < 1e-12 && broken_min > 0.01;
    Ok((ok, format!("cat defect max {cat_worst:.2e}, |n−1;1⟩ defect min {broken_min:.2e}")))
}

const FUZZ_WORDS: [&str; 22] = [
    "format", "modes", "source", "bs", "detect", "output", "linear", "amps", "zero", "one", "R=1/2", "R=3/2",
    "R=1/0", "R=", "45deg", "deg", "0", "1", "7", "-1", "1e400", "#",
];

const FUZZ_CHARS: [char; 12] = [' ', '\t', '\n', '#', '/', '=', '-', '.', 'é', '∞', '\u{0}', '9'];

/// One fuzz input: either a mutated builtin circuit or a random token soup.
pub fn fuzz_case(rng: &mut StdRng) -> String {
    if rng.gen_bool(0.5) {
        let kind = if rng.gen_bool(0.5) { BuiltinKind::Merge } else { BuiltinKind::Ghz };
        let spec = builtin_circuit(kind, rng.gen_range(1..=5)).expect("n ≥ 1");
        let mut chars: Vec<char> = serialize(&spec).chars().collect();
        for _ in 0..rng.gen_range(1..=6) {
            let at = rng.gen_range(0..=chars.len());
            let c = FUZZ_CHARS[rng.gen_range(0..FUZZ_CHARS.len())];
            match rng.gen_range(0..3) {
                0 => chars.insert(at, c),
                1 if at < chars.len() => {
                    chars.remove(at);
                }
                _ if at < chars.len() => chars[at] = c,
                _ => chars.push(c),
            }
        }
        chars.into_iter().collect()
    } else {
        let mut text = String::new();
        for _ in 0..rng.gen_range(0..=8) {
            for _ in 0..rng.gen_range(1..=5) {
                text.push_str(FUZZ_WORDS[rng.gen_range(0..FUZZ_WORDS.len())]);
                text.push(' ');
            }
            text.push('\n');
        }
        text
    }
}

fn parser_checks() -> crate::Result<(bool, String)> {
    let mut round_trips = 0;
    let mut broken = Vec::new();
    for kind in [BuiltinKind::Merge, BuiltinKind::Ghz] {
        for n in 1..=6 {
            let spec = builtin_circuit(kind, n)?;
            match parse_circuit(&serialize(&spec)) {
                Ok(back) if back == spec => round_trips += 1,
                _ => broken.push(format!("{kind:?}({n})")),
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0010);
    let mut diagnostics = 0;
    let mut bad_positions = 0;
    let mut panics = 0;
    for _ in 0..1000 {
        let text = fuzz_case(&mut rng);
        match std::panic::catch_unwind(|| parse_circuit(&text)) {
            Ok(Ok(_)) => {}
            Ok(Err(e)) => {
                diagnostics += 1;
                if e.line == 0 || e.column == 0 || e.message.is_empty() {
                    bad_positions += 1;
                }
            }
            Err(_) => panics += 1,
        }
    }
    let ok = broken.is_empty() && panics == 0 && bad_positions == 0;
    Ok((
        ok,
        format!(
            "{round_trips} builtin round trips, broken {broken:?}; fuzz: {diagnostics} diagnostics, {panics} panics, {bad_positions} unlocated"
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(1.0 / 18.0, 12), "0.0555555555556");
        assert_eq!(significant(3.0 / 256.0, 12), "0.0117187500000");
        assert_eq!(significant(1.0, 12), "1.00000000000");
        assert_eq!(significant(0.0, 12), "0");
        assert_eq!(significant(-12.5, 4), "-12.50");
    }
}
