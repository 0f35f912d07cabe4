//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here shares code with the production expansion or transformation
//! routines: expansion enumerates every photon-to-mode assignment, and Fock
//! transformation goes through matrix permanents.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::fock::{factorial, FockState, ModeId, OccupationVector, ProductPhotonState};
use crate::optics::ModeMap;

/// Expands a product state by summing over all assignments of photons to
/// modes. Cost is Π_l |support(v_l)|.
pub fn brute_force_expand(p: &ProductPhotonState) -> FockState {
    let supports: Vec<Vec<(ModeId, Complex64)>> =
        p.photons().iter().map(|v| v.iter().map(|(m, a)| (*m, *a)).collect()).collect();
    let mut monomials: BTreeMap<Vec<ModeId>, Complex64> = BTreeMap::new();
    let mut choice = vec![0usize; supports.len()];
    loop {
        let mut coef = p.scale();
        let mut modes = Vec::with_capacity(supports.len());
        for (l, &c) in choice.iter().enumerate() {
            let (m, a) = supports[l][c];
            coef *= a;
            modes.push(m);
        }
        modes.sort();
        *monomials.entry(modes).or_insert(Complex64::new(0.0, 0.0)) += coef;

        // odometer increment
        let mut l = 0;
        loop {
            if l == choice.len() {
                return finish(p.photon_count(), monomials);
            }
            choice[l] += 1;
            if choice[l] < supports[l].len() {
                break;
            }
            choice[l] = 0;
            l += 1;
        }
    }
}

/// Π_m (a†_m)^{k_m} |vac⟩ = Π_m √(k_m!) |k⟩.
fn finish(photons: usize, monomials: BTreeMap<Vec<ModeId>, Complex64>) -> FockState {
    let terms = monomials.into_iter().map(|(modes, coef)| {
        let occ = OccupationVector::from_counts(modes.into_iter().map(|m| (m, 1)));
        let boost = occ.factorial_product().sqrt();
        (occ, coef * boost)
    });
    FockState::from_terms(photons, terms).expect("assignments preserve photon number")
}

/// Permanent of a square matrix (Ryser's formula).
pub fn permanent(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for subset in 1u64..(1u64 << n) {
        let mut prod = Complex64::new(1.0, 0.0);
        for row in m {
            let s: Complex64 = (0..n).filter(|j| subset & (1 << j) != 0).map(|j| row[j]).sum();
            prod *= s;
        }
        let sign = if (n - subset.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += prod * sign;
    }
    total
}

/// All multisets of size `k` drawn from `0..d`, as sorted index lists.
fn multisets(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, k, &mut Vec::new(), &mut out);
    out
}

/// ⟨T|U|S⟩ = perm(U[T,S]) / √(Π S! Π T!) for every output occupation T.
pub fn permanent_transform(s: &FockState, u: &ModeMap) -> FockState {
    let n = s.photon_number();
    let outs = multisets(u.rows(), n);
    let mut terms = Vec::new();
    for (occ, amp) in s.terms() {
        let cols: Vec<usize> = occ
            .iter()
            .flat_map(|(m, c)| {
                let j = u.in_modes().iter().position(|&x| x == m).expect("state mode is a map input");
                std::iter::repeat_n(j, c as usize)
            })
            .collect();
        let s_fact = occ.factorial_product();
        for rows in &outs {
            let sub: Vec<Vec<Complex64>> =
                rows.iter().map(|&i| cols.iter().map(|&j| u.entry(i, j)).collect()).collect();
            let out_occ = OccupationVector::from_counts(rows.iter().map(|&i| (u.out_modes()[i], 1)));
            let t_fact = out_occ.factorial_product();
            let a = permanent(&sub) / (s_fact * t_fact).sqrt();
            terms.push((out_occ, amp * a));
        }
    }
    FockState::from_terms(n, terms).expect("transform preserves photon number")
}

/// Number of Fock basis states of `n` photons in `d` modes.
pub fn sector_dimension(n: usize, d: usize) -> f64 {
    if d == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    factorial(n + d - 1) / (factorial(n) * factorial(d - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permanent_of_small_matrices() {
        let one = Complex64::new(1.0, 0.0);
        let m = vec![vec![one, one * 2.0], vec![one * 3.0, one * 4.0]];
        assert_eq!(permanent(&m), one * 10.0);
        let ones = vec![vec![one; 3]; 3];
        assert_eq!(permanent(&ones), one * 6.0);
    }

    #[test]
    fn multiset_count() {
        assert_eq!(multisets(4, 2).len() as f64, sector_dimension(2, 4));
    }
}
