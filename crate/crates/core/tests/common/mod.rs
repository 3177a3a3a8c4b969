//! Independent reference implementations used by the integration suites.
//!
//! The dense oracle rebuilds each circuit layer as an explicit 2^n x 2^n
//! unitary and applies it by matrix-vector multiplication, sharing nothing
//! with the fast diagonal simulator beyond the graph itself.

use num_complex::Complex64;
use qaoa_warmstart::graph::Graph;
use qaoa_warmstart::sim::ParameterVector;

type Matrix = Vec<Vec<Complex64>>;

fn zeros(dim: usize) -> Matrix {
    vec![vec![Complex64::new(0.0, 0.0); dim]; dim]
}

fn matvec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// kron(a, b) with `a` acting on the high bits.
fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = zeros(ra * rb);
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn identity(dim: usize) -> Matrix {
    let mut m = zeros(dim);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

/// exp(-i beta X) as a dense 2x2 block.
fn rx_block(beta: f64) -> Matrix {
    let c = Complex64::new(beta.cos(), 0.0);
    let s = Complex64::new(0.0, -beta.sin());
    vec![vec![c, s], vec![s, c]]
}

/// Full-register mixer exp(-i beta X_j) for a single qubit j (bit j is the
/// low-order end of the index).
fn single_qubit_mixer(n: usize, j: usize, beta: f64) -> Matrix {
    let mut m = identity(1);
    for q in (0..n).rev() {
        let block = if q == j { rx_block(beta) } else { identity(2) };
        m = kron(&m, &block);
    }
    m
}

/// Expectation of the cut count computed through dense unitaries only.
pub fn dense_expectation(graph: &Graph, params: &ParameterVector) -> f64 {
    let dim = 1usize << graph.n;
    let cuts: Vec<f64> = (0..dim).map(|z| graph.cut_value_bits(z as u64) as f64).collect();
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut state = vec![amp; dim];
    for layer in 0..params.depth() {
        let mut phase = zeros(dim);
        for (z, row) in phase.iter_mut().enumerate() {
            row[z] = Complex64::from_polar(1.0, -params.gamma[layer] * cuts[z]);
        }
        state = matvec(&phase, &state);
        for j in 0..graph.n {
            let m = single_qubit_mixer(graph.n, j, params.beta[layer]);
            state = matvec(&m, &state);
        }
    }
    state
        .iter()
        .zip(&cuts)
        .map(|(a, c)| a.norm_sqr() * c)
        .sum()
}

/// Best expectation over a `steps` x `steps` (gamma, beta) grid at p = 1.
pub fn grid_search_max(table: &qaoa_warmstart::graph::CutTable, steps: usize) -> f64 {
    use qaoa_warmstart::sim::{expectation, BETA_MAX, GAMMA_MAX};
    let mut best = f64::NEG_INFINITY;
    for i in 0..steps {
        for j in 0..steps {
            let g = GAMMA_MAX * i as f64 / (steps - 1) as f64;
            let b = BETA_MAX * j as f64 / (steps - 1) as f64;
            let pv = ParameterVector::new(vec![g], vec![b]).unwrap();
            best = best.max(expectation(table, &pv).unwrap());
        }
    }
    best
}
