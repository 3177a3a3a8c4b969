//! Exact statevector simulation of the depth-p QAOA circuit for MaxCut.
//!
//! Convention: phase separator `U_C(gamma) = exp(-i gamma H_C)` with `H_C`
//! the cut-count diagonal, mixer `U_B(beta) = exp(-i beta X_j)` on every
//! qubit. Under this convention the expectation is 2pi-periodic in gamma
//! and pi-periodic in beta, matching the optimization domains
//! `gamma in [0, 2pi]`, `beta in [0, pi]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::{CutTable, MAX_QUBITS};

/// Box bounds of the optimization domain.
pub const GAMMA_MAX: f64 = 2.0 * PI;
pub const BETA_MAX: f64 = PI;

/// Depth-p pair of gate-parameter sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ParameterVector {
    pub fn new(gamma: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if gamma.len() != beta.len() || gamma.is_empty() {
            return Err(Error::Domain(format!(
                "parameter vector needs equal nonempty gamma/beta (got {}/{})",
                gamma.len(),
                beta.len()
            )));
        }
        Ok(ParameterVector { gamma, beta })
    }

    pub fn depth(&self) -> usize {
        self.gamma.len()
    }

    /// Flattens to the optimizer layout [gamma_1..gamma_p, beta_1..beta_p].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut x = self.gamma.clone();
        x.extend_from_slice(&self.beta);
        x
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 0 || x.is_empty() {
            return Err(Error::Domain("flat parameter layout must be 2p values".into()));
        }
        let p = x.len() / 2;
        ParameterVector::new(x[..p].to_vec(), x[p..].to_vec())
    }

    pub fn in_bounds(&self) -> bool {
        self.gamma.iter().all(|&g| (0.0..=GAMMA_MAX).contains(&g))
            && self.beta.iter().all(|&b| (0.0..=BETA_MAX).contains(&b))
    }

    /// Maps to the canonical representative under the exact symmetries of the
    /// expectation, so that stored optima from independent restarts fall on
    /// one branch and cross-instance parameter trends are comparable.
    ///
    /// Two symmetries are quotiented out. First, shifting any single beta_i
    /// by pi/2 leaves F unchanged: exp(-i pi/2 X) = -iX per qubit, and the
    /// X^n bit-flip commutes with every later layer because cut values are
    /// complement-symmetric. Each beta_i is therefore reduced mod pi/2.
    /// Second, the mirror F(gamma, beta) = F(2pi - gamma, pi - beta)
    /// (conjugation plus periodicity), which on the reduced betas reads
    /// (gamma, beta) -> (2pi - gamma, pi/2 - beta); the branch with mean
    /// gamma <= pi is kept.
    pub fn canonicalize(&self) -> ParameterVector {
        let quarter = BETA_MAX / 2.0;
        let mut gamma = self.gamma.clone();
        let mut beta: Vec<f64> = self.beta.iter().map(|&b| b.rem_euclid(quarter)).collect();
        let mean_gamma = gamma.iter().sum::<f64>() / gamma.len() as f64;
        if mean_gamma > GAMMA_MAX / 2.0 {
            for g in &mut gamma {
                *g = (GAMMA_MAX - *g).rem_euclid(GAMMA_MAX);
            }
            for b in &mut beta {
                *b = quarter - *b;
            }
        }
        ParameterVector { gamma, beta }
    }
}

/// 2^n complex amplitudes; basis state z at index z, node i at bit i.
#[derive(Debug, Clone)]
pub struct Statevector {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl Statevector {
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Uniform superposition |+>^n, the Hadamard layer on |0...0>.
pub fn initial_state(n: usize) -> Result<Statevector> {
    if n < 1 || n > MAX_QUBITS {
        return Err(Error::Resource(format!("n={n} outside 1..={MAX_QUBITS}")));
    }
    let size = 1usize << n;
    let amp = Complex64::new(1.0 / (size as f64).sqrt(), 0.0);
    Ok(Statevector {
        n,
        amps: vec![amp; size],
    })
}

/// Applies exp(-i gamma H_C): amplitude z picks up phase exp(-i gamma c_z).
pub fn apply_phase_separator(state: &mut Statevector, table: &CutTable, gamma: f64) -> Result<()> {
    if state.amps.len() != table.len() {
        return Err(Error::Domain(format!(
            "state length {} != table length {}",
            state.amps.len(),
            table.len()
        )));
    }
    // Cut values are small integers; memoize the phases per distinct value.
    let mut phases = vec![Complex64::new(1.0, 0.0); table.max_cut as usize + 1];
    for (c, ph) in phases.iter_mut().enumerate() {
        *ph = Complex64::from_polar(1.0, -gamma * c as f64);
    }
    for (amp, &c) in state.amps.iter_mut().zip(table.values.iter()) {
        *amp *= phases[c as usize];
    }
    Ok(())
}

/// Applies exp(-i beta X_j) on every qubit j.
pub fn apply_mixer(state: &mut Statevector, beta: f64) {
    let (c, s) = (beta.cos(), beta.sin());
    let mis = Complex64::new(0.0, -s);
    for j in 0..state.n {
        let bit = 1usize << j;
        for z in 0..state.amps.len() {
            if z & bit == 0 {
                let a0 = state.amps[z];
                let a1 = state.amps[z | bit];
                state.amps[z] = c * a0 + mis * a1;
                state.amps[z | bit] = mis * a0 + c * a1;
            }
        }
    }
}

/// Evolves |+>^n through p alternating (phase separator, mixer) stages.
pub fn evolve(table: &CutTable, params: &ParameterVector) -> Result<Statevector> {
    let n = table.len().trailing_zeros() as usize;
    let mut state = initial_state(n)?;
    for i in 0..params.depth() {
        apply_phase_separator(&mut state, table, params.gamma[i])?;
        apply_mixer(&mut state, params.beta[i]);
    }
    Ok(state)
}

/// Cost expectation <psi(gamma,beta)| H_C |psi(gamma,beta)>.
pub fn expectation(table: &CutTable, params: &ParameterVector) -> Result<f64> {
    let state = evolve(table, params)?;
    Ok(state
        .amps
        .iter()
        .zip(table.values.iter())
        .map(|(a, &c)| a.norm_sqr() * c as f64)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cut_table, Graph};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn k2_table() -> CutTable {
        cut_table(&Graph::new("k2", 2, &[(0, 1)]).unwrap()).unwrap()
    }

    fn c4_table() -> CutTable {
        cut_table(&Graph::new("c4", 4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap()).unwrap()
    }

    #[test]
    fn initial_state_amplitudes() {
        let s = initial_state(1).unwrap();
        assert_abs_diff_eq!(s.amps[0].re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        let s = initial_state(2).unwrap();
        for a in &s.amps {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
        for n in 1..=10 {
            assert_abs_diff_eq!(initial_state(n).unwrap().norm_sq(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn initial_state_rejects_oversized() {
        assert!(initial_state(MAX_QUBITS + 1).is_err());
        assert!(initial_state(0).is_err());
    }

    #[test]
    fn phase_separator_identity_at_zero_and_two_pi() {
        let t = k2_table();
        for gamma in [0.0, 2.0 * PI] {
            let mut s = initial_state(2).unwrap();
            apply_phase_separator(&mut s, &t, gamma).unwrap();
            for a in &s.amps {
                assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-12);
                assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn phase_separator_k2_quarter_turn() {
        let t = k2_table();
        let mut s = initial_state(2).unwrap();
        apply_phase_separator(&mut s, &t, PI / 2.0).unwrap();
        let expect = [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -0.5),
            Complex64::new(0.0, -0.5),
            Complex64::new(0.5, 0.0),
        ];
        for (a, e) in s.amps.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(a.re, e.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, e.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn phase_separator_length_mismatch() {
        let t = k2_table();
        let mut s = initial_state(3).unwrap();
        assert!(apply_phase_separator(&mut s, &t, 0.1).is_err());
    }

    #[test]
    fn mixer_identity_and_full_flip() {
        let mut s = initial_state(2).unwrap();
        let before = s.amps.clone();
        apply_mixer(&mut s, 0.0);
        assert_eq!(s.amps, before);

        // beta = pi/2 on |0> flips to -i|1>.
        let mut s = Statevector {
            n: 1,
            amps: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        };
        apply_mixer(&mut s, PI / 2.0);
        assert_abs_diff_eq!(s.amps[0].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amps[1].im, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn mixer_beta_pi_preserves_probabilities() {
        let t = c4_table();
        let mut s = evolve(&t, &ParameterVector::new(vec![0.7], vec![0.3]).unwrap()).unwrap();
        let probs: Vec<f64> = s.amps.iter().map(|a| a.norm_sqr()).collect();
        apply_mixer(&mut s, PI);
        for (a, p) in s.amps.iter().zip(probs.iter()) {
            assert_abs_diff_eq!(a.norm_sqr(), *p, epsilon = 1e-12);
        }
    }

    #[test]
    fn expectation_uniform_is_half_edges() {
        let t = c4_table();
        let params = ParameterVector::new(vec![0.0, 0.0], vec![0.4, 1.1]).unwrap();
        assert_abs_diff_eq!(expectation(&t, &params).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn expectation_k2_closed_form_point() {
        let t = k2_table();
        let params = ParameterVector::new(vec![PI / 2.0], vec![PI / 8.0]).unwrap();
        assert_abs_diff_eq!(expectation(&t, &params).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn expectation_c4_grid_maximum() {
        // 200x200 grid search at p=1; max F1 = 3.0 (AR 0.75).
        let t = c4_table();
        let mut best = f64::NEG_INFINITY;
        for i in 0..200 {
            for j in 0..200 {
                let g = GAMMA_MAX * i as f64 / 199.0;
                let b = BETA_MAX * j as f64 / 199.0;
                let f =
                    expectation(&t, &ParameterVector::new(vec![g], vec![b]).unwrap()).unwrap();
                best = best.max(f);
            }
        }
        assert_abs_diff_eq!(best, 3.0, epsilon = 1e-3);
    }

    #[test]
    fn canonicalize_preserves_expectation() {
        let t = c4_table();
        let params = ParameterVector::new(vec![1.2, 5.0], vec![2.8, 0.4]).unwrap();
        let canon = params.canonicalize();
        assert!(canon.beta.iter().all(|&b| b <= BETA_MAX / 2.0));
        assert!(canon.gamma.iter().sum::<f64>() / 2.0 <= GAMMA_MAX / 2.0);
        assert!(canon.in_bounds());
        assert_abs_diff_eq!(
            expectation(&t, &params).unwrap(),
            expectation(&t, &canon).unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let params = ParameterVector::new(vec![5.9, 6.1], vec![2.9, 1.7]).unwrap();
        let once = params.canonicalize();
        let twice = once.canonicalize();
        for (a, b) in once.to_flat().iter().zip(twice.to_flat()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn normalization_preserved(seed in 0u64..200, g1 in 0.0..GAMMA_MAX, b1 in 0.0..BETA_MAX,
                                   g2 in 0.0..GAMMA_MAX, b2 in 0.0..BETA_MAX) {
            let graph = crate::graph::erdos_renyi(5, 0.5, seed).unwrap();
            let t = cut_table(&graph).unwrap();
            let params = ParameterVector::new(vec![g1, g2], vec![b1, b2]).unwrap();
            let s = evolve(&t, &params).unwrap();
            prop_assert!((s.norm_sq() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn periodicity_and_conjugation(seed in 0u64..100, g in 0.0..GAMMA_MAX, b in 0.0..BETA_MAX) {
            let graph = crate::graph::erdos_renyi(4, 0.6, seed).unwrap();
            let t = cut_table(&graph).unwrap();
            let f = |gg: f64, bb: f64| {
                expectation(&t, &ParameterVector::new(vec![gg], vec![bb]).unwrap()).unwrap()
            };
            let base = f(g, b);
            prop_assert!((f(g + 2.0 * PI, b) - base).abs() < 1e-9);
            prop_assert!((f(g, b + PI) - base).abs() < 1e-9);
            prop_assert!((f(-g, -b) - base).abs() < 1e-9);
            prop_assert!(base >= -1e-12 && base <= t.max_cut as f64 + 1e-12);
        }

        #[test]
        fn canonicalize_invariance(seed in 0u64..100, g1 in 0.0..GAMMA_MAX, b1 in 0.0..BETA_MAX,
                                   g2 in 0.0..GAMMA_MAX, b2 in 0.0..BETA_MAX) {
            let graph = crate::graph::erdos_renyi(5, 0.5, seed).unwrap();
            let t = cut_table(&graph).unwrap();
            let params = ParameterVector::new(vec![g1, g2], vec![b1, b2]).unwrap();
            let canon = params.canonicalize();
            prop_assert!(canon.in_bounds());
            let base = expectation(&t, &params).unwrap();
            prop_assert!((expectation(&t, &canon).unwrap() - base).abs() < 1e-9);
        }
    }
}
