//! Dense-matrix reference oracle.
//!
//! Everything here is built from explicit operator matrices and dense
//! matrix-vector products, independent of the fast kernels under test:
//! the cost Hamiltonian comes from its Pauli-operator definition
//! `H_C = -1/2 sum_(i,j) (I - Z_i Z_j)`, the mixer from embedded 2x2
//! rotations, and the feedback operators from literal nested commutators.
//! Only usable at toy sizes; that is the point.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use falqon::Graph;

pub type Matrix = Vec<Vec<Complex64>>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn zeros(dim: usize) -> Matrix {
    vec![vec![ZERO; dim]; dim]
}

pub fn identity(dim: usize) -> Matrix {
    let mut m = zeros(dim);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn pauli_x() -> Matrix {
    vec![vec![ZERO, ONE], vec![ONE, ZERO]]
}

pub fn pauli_z() -> Matrix {
    vec![
        vec![ONE, ZERO],
        vec![ZERO, Complex64::new(-1.0, 0.0)],
    ]
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let dim = a.len();
    let mut out = zeros(dim);
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..dim {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn matvec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
        .collect()
}

pub fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn sub(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn scale(a: &Matrix, s: Complex64) -> Matrix {
    a.iter()
        .map(|row| row.iter().map(|x| x * s).collect())
        .collect()
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    sub(&matmul(a, b), &matmul(b, a))
}

/// Embed a 2x2 operator on qubit `q` of an `n`-qubit register
/// (least-significant bit of the basis index is qubit 0).
pub fn op_on_qubit(op: &Matrix, q: usize, n: usize) -> Matrix {
    let dim = 1usize << n;
    let bit = 1usize << q;
    let mut m = zeros(dim);
    for row in 0..dim {
        for col in 0..dim {
            if (row & !bit) == (col & !bit) {
                let r = usize::from(row & bit != 0);
                let c = usize::from(col & bit != 0);
                m[row][col] = op[r][c];
            }
        }
    }
    m
}

/// `H_C = -1/2 sum_(i,j) (I - Z_i Z_j)` from explicit Pauli matrices.
pub fn dense_hc(g: &Graph) -> Matrix {
    let n = g.node_count();
    let dim = 1usize << n;
    let z = pauli_z();
    let mut h = zeros(dim);
    for &(i, j) in g.edges() {
        let zizj = matmul(
            &op_on_qubit(&z, i as usize, n),
            &op_on_qubit(&z, j as usize, n),
        );
        let term = scale(&sub(&identity(dim), &zizj), Complex64::new(-0.5, 0.0));
        h = add(&h, &term);
    }
    h
}

/// `H_M = sum_i X_i`.
pub fn dense_hm(n: usize) -> Matrix {
    let dim = 1usize << n;
    let x = pauli_x();
    let mut h = zeros(dim);
    for q in 0..n {
        h = add(&h, &op_on_qubit(&x, q, n));
    }
    h
}

/// The three feedback operators as literal nested commutators:
/// `A = i[H_M, H_C]`, `B = [[H_M, H_C], H_M] / 2`, `C = [[H_M, H_C], H_C]`.
pub fn dense_feedback_operators(g: &Graph) -> (Matrix, Matrix, Matrix) {
    let hc = dense_hc(g);
    let hm = dense_hm(g.node_count());
    let k = commutator(&hm, &hc);
    let a = scale(&k, Complex64::new(0.0, 1.0));
    let b = scale(&commutator(&k, &hm), Complex64::new(0.5, 0.0));
    let c = commutator(&k, &hc);
    (a, b, c)
}

/// `<psi| M |psi>`.
pub fn expectation(m: &Matrix, psi: &[Complex64]) -> Complex64 {
    let mv = matvec(m, psi);
    psi.iter().zip(&mv).map(|(p, v)| p.conj() * v).sum()
}

/// `exp(-i dt H_C)` as a dense matrix. `H_C` is diagonal, which the builder
/// asserts before exponentiating the diagonal entries.
pub fn dense_cost_phase(g: &Graph, dt: f64) -> Matrix {
    let hc = dense_hc(g);
    let dim = hc.len();
    let mut m = zeros(dim);
    for (i, row) in hc.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            if i != j {
                assert!(
                    entry.norm() < 1e-12,
                    "H_C must be diagonal, found {entry} at ({i}, {j})"
                );
            }
        }
        assert!(row[i].im.abs() < 1e-12);
        m[i][i] = Complex64::from_polar(1.0, -dt * row[i].re);
    }
    m
}

/// `exp(-i angle H_M)` as the product of embedded single-qubit rotations
/// `[[cos a, -i sin a], [-i sin a, cos a]]`, one per qubit.
pub fn dense_mixer(n: usize, angle: f64) -> Matrix {
    let c = Complex64::new(angle.cos(), 0.0);
    let ms = Complex64::new(0.0, -angle.sin());
    let rot = vec![vec![c, ms], vec![ms, c]];
    let mut m = identity(1 << n);
    for q in 0..n {
        m = matmul(&op_on_qubit(&rot, q, n), &m);
    }
    m
}

pub fn uniform_vector(n: usize) -> Vec<Complex64> {
    let dim = 1usize << n;
    vec![Complex64::new((dim as f64).sqrt().recip(), 0.0); dim]
}

pub fn random_normalized_state(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let dim = 1usize << n;
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A full dense-matrix feedback run: betas from the dense commutator
/// expectations (with the same fallback and clamp rules as the engine),
/// evolution by dense matrix-vector products. Returns the beta sequence and
/// the per-layer energy record (initial energy first).
pub struct DenseRun {
    pub betas: Vec<f64>,
    pub energies: Vec<f64>,
}

pub fn dense_feedback_run(
    g: &Graph,
    dt: f64,
    layers: usize,
    order: u8,
    epsilon_b: f64,
    beta_max: f64,
) -> DenseRun {
    let n = g.node_count();
    let hc = dense_hc(g);
    let (a_op, b_op, c_op) = dense_feedback_operators(g);
    let phase = dense_cost_phase(g, dt);

    let mut psi = uniform_vector(n);
    let mut betas = Vec::with_capacity(layers);
    let mut energies = Vec::with_capacity(layers + 1);
    energies.push(expectation(&hc, &psi).re);

    for _ in 0..layers {
        let a = expectation(&a_op, &psi).re;
        let b = expectation(&b_op, &psi).re;
        let c = expectation(&c_op, &psi).re;
        let mut beta = match order {
            1 => -a,
            2 => {
                if b.abs() < epsilon_b {
                    -a
                } else {
                    -(a + dt * c) / (2.0 * dt * b)
                }
            }
            _ => panic!("order must be 1 or 2"),
        };
        if beta.abs() > beta_max {
            beta = beta.signum() * beta_max;
        }
        psi = matvec(&phase, &psi);
        psi = matvec(&dense_mixer(n, dt * beta), &psi);
        betas.push(beta);
        energies.push(expectation(&hc, &psi).re);
    }

    DenseRun { betas, energies }
}

/// Replay a fixed beta sequence on a target graph with dense products.
pub fn dense_replay(g: &Graph, dt: f64, betas: &[f64]) -> Vec<f64> {
    let n = g.node_count();
    let hc = dense_hc(g);
    let phase = dense_cost_phase(g, dt);
    let mut psi = uniform_vector(n);
    let mut energies = vec![expectation(&hc, &psi).re];
    for &beta in betas {
        psi = matvec(&phase, &psi);
        psi = matvec(&dense_mixer(n, dt * beta), &psi);
        energies.push(expectation(&hc, &psi).re);
    }
    energies
}

pub fn k4() -> Graph {
    Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
}

pub fn k33() -> Graph {
    Graph::from_edges(
        6,
        &[
            (0, 3),
            (0, 4),
            (0, 5),
            (1, 3),
            (1, 4),
            (1, 5),
            (2, 3),
            (2, 4),
            (2, 5),
        ],
    )
    .unwrap()
}

pub fn triangle() -> Graph {
    Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
}
