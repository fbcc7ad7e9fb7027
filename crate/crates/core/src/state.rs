//! Dense statevector kernel.
//!
//! Holds 2^n complex amplitudes with bit `i` of the basis index addressing
//! qubit/vertex `i` (least-significant bit = qubit 0). Provides the four
//! operations the feedback loop needs: uniform-state preparation, diagonal
//! cost-phase application, product-mixer application, and measurement-free
//! evaluation of the cost and nested-commutator expectations.

use std::io::Write;

use num_complex::Complex64;

use crate::cost::CostDiagonal;
use crate::error::{Error, Result};
use crate::graph::DEFAULT_QUBIT_LIMIT;

/// 2^n complex amplitudes; least-significant bit of the index is qubit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The uniform superposition |+>^n: every amplitude is 2^(-n/2).
    pub fn uniform(n: usize) -> Result<Self> {
        Self::uniform_with_limit(n, DEFAULT_QUBIT_LIMIT)
    }

    pub fn uniform_with_limit(n: usize, limit: usize) -> Result<Self> {
        if n < 1 || n > limit {
            return Err(Error::SizeLimitExceeded { n, limit });
        }
        let len = 1usize << n;
        let amp = Complex64::new((len as f64).sqrt().recip(), 0.0);
        Ok(StateVector {
            n,
            amps: vec![amp; len],
        })
    }

    /// Computational basis state |index>.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n < 1 || n > DEFAULT_QUBIT_LIMIT {
            return Err(Error::SizeLimitExceeded {
                n,
                limit: DEFAULT_QUBIT_LIMIT,
            });
        }
        let len = 1usize << n;
        if index >= len {
            return Err(Error::InvalidParameters(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wrap raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameters(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let n = amps.len().trailing_zeros() as usize;
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// Full-precision dump, one `index real imaginary` line per amplitude.
    /// Used for oracle comparison against external simulators.
    pub fn write_debug_dump<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (index, amp) in self.amps.iter().enumerate() {
            writeln!(w, "{index} {:?} {:?}", amp.re, amp.im)?;
        }
        Ok(())
    }
}

pub fn uniform_state(n: usize) -> Result<StateVector> {
    StateVector::uniform(n)
}

fn check_dims(psi: &StateVector, d: &CostDiagonal) -> Result<()> {
    if psi.n != d.n() {
        return Err(Error::DimensionMismatch {
            state: psi.n,
            diagonal: d.n(),
        });
    }
    Ok(())
}

/// Multiply amplitude `x` by `exp(-i * dt * energies[x])`.
///
/// Energies are small integers, so the distinct phase factors are tabulated
/// once per call instead of evaluating sin/cos per amplitude.
pub fn apply_cost_phase(psi: &mut StateVector, d: &CostDiagonal, dt: f64) -> Result<()> {
    check_dims(psi, d)?;
    if !dt.is_finite() {
        return Err(Error::InvalidParameters(format!("dt {dt} is not finite")));
    }
    let max_cut = (-d.min_energy()) as usize;
    let table: Vec<Complex64> = (0..=max_cut)
        .map(|c| {
            let energy = -(c as f64);
            Complex64::from_polar(1.0, -dt * energy)
        })
        .collect();
    for (amp, &e) in psi.amps.iter_mut().zip(d.energies()) {
        *amp *= table[(-e) as usize];
    }
    Ok(())
}

/// Apply `exp(-i * angle * X)` to every qubit: the product mixer
/// `exp(-i * angle * H_M)` with `H_M = sum_i X_i`, which factorizes because
/// the X_i commute. Each qubit sees the 2x2 unitary
/// `[[cos a, -i sin a], [-i sin a, cos a]]`.
pub fn apply_mixer(psi: &mut StateVector, angle: f64) -> Result<()> {
    if !angle.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "mixer angle {angle} is not finite"
        )));
    }
    let c = angle.cos();
    let ms = Complex64::new(0.0, -angle.sin());
    let len = psi.amps.len();
    let amps = &mut psi.amps;
    for q in 0..psi.n {
        let bit = 1usize << q;
        let mut base = 0usize;
        while base < len {
            for low in base..base + bit {
                let high = low | bit;
                let a = amps[low];
                let b = amps[high];
                amps[low] = c * a + ms * b;
                amps[high] = ms * a + c * b;
            }
            base += bit << 1;
        }
    }
    Ok(())
}

/// `<psi| H_C |psi>` evaluated as a probability-weighted energy sum.
pub fn expect_cost(psi: &StateVector, d: &CostDiagonal) -> Result<f64> {
    check_dims(psi, d)?;
    Ok(psi
        .amps
        .iter()
        .zip(d.energies())
        .map(|(a, &e)| a.norm_sqr() * e as f64)
        .sum())
}

/// The four expectation values the feedback laws consume.
///
/// `a_val`, `b_val`, `c_val` are the expectations of the gradient operator
/// `i[H_M, H_C]` and the curvature operators `[[H_M, H_C], H_M] / 2` and
/// `[[H_M, H_C], H_C]`; `cost` is `<H_C>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackExpectations {
    pub a_val: f64,
    pub b_val: f64,
    pub c_val: f64,
    pub cost: f64,
}

/// Reusable scratch vectors for [`feedback_expectations_in`]; one allocation
/// per run instead of three per layer. Peak memory for a run is then the
/// state plus these three buffers.
#[derive(Debug, Clone)]
pub struct FeedbackWorkspace {
    phi_c: Vec<Complex64>,
    phi_m: Vec<Complex64>,
    phi_mm: Vec<Complex64>,
}

impl FeedbackWorkspace {
    pub fn new(n: usize) -> Self {
        let len = 1usize << n;
        let zero = Complex64::new(0.0, 0.0);
        FeedbackWorkspace {
            phi_c: vec![zero; len],
            phi_m: vec![zero; len],
            phi_mm: vec![zero; len],
        }
    }

    fn ensure(&mut self, len: usize) {
        if self.phi_c.len() != len {
            let zero = Complex64::new(0.0, 0.0);
            self.phi_c = vec![zero; len];
            self.phi_m = vec![zero; len];
            self.phi_mm = vec![zero; len];
        }
    }
}

/// Evaluate the feedback expectations with a freshly allocated workspace.
pub fn feedback_expectations(
    psi: &StateVector,
    d: &CostDiagonal,
) -> Result<FeedbackExpectations> {
    let mut ws = FeedbackWorkspace::new(psi.n());
    feedback_expectations_in(psi, d, &mut ws)
}

/// Evaluate `<A>`, `<B>`, `<C>`, and `<H_C>` through auxiliary-vector inner
/// products rather than operator construction:
///
/// with `phi_C = H_C psi`, `phi_M = H_M psi`, `phi_MM = H_M phi_M`,
///
/// ```text
/// <A> = -2 Im <phi_M, phi_C>
/// <B> = <phi_M, H_C phi_M> - Re <phi_MM, phi_C>
/// <C> = 2 Re <phi_M, H_C phi_C> - 2 <phi_C, H_M phi_C>
/// ```
///
/// Each evaluation costs O(n * 2^n). The identities are validated against a
/// dense-matrix commutator oracle in the test suite.
pub fn feedback_expectations_in(
    psi: &StateVector,
    d: &CostDiagonal,
    ws: &mut FeedbackWorkspace,
) -> Result<FeedbackExpectations> {
    let (e, residue) = expectations_with_residue(psi, d, ws)?;
    debug_assert!(
        residue < 1e-9,
        "hermiticity residue {residue} above tolerance"
    );
    if !(e.a_val.is_finite() && e.b_val.is_finite() && e.c_val.is_finite() && e.cost.is_finite())
    {
        return Err(Error::NonFiniteResult(format!(
            "feedback expectations a={} b={} c={} cost={}",
            e.a_val, e.b_val, e.c_val, e.cost
        )));
    }
    Ok(e)
}

/// Core computation, also reporting the largest imaginary residue discarded
/// from a mathematically real quantity.
fn expectations_with_residue(
    psi: &StateVector,
    d: &CostDiagonal,
    ws: &mut FeedbackWorkspace,
) -> Result<(FeedbackExpectations, f64)> {
    check_dims(psi, d)?;
    let len = psi.amps.len();
    ws.ensure(len);
    let n = psi.n;
    let amps = &psi.amps;
    let energies = d.energies();

    // phi_C = H_C psi (elementwise diagonal product)
    for x in 0..len {
        ws.phi_c[x] = amps[x] * energies[x] as f64;
    }
    // phi_M = H_M psi: phi_M[y] = sum_i psi[y ^ (1 << i)]
    apply_hm(amps, &mut ws.phi_m, n);
    // phi_MM = H_M phi_M
    apply_hm(&ws.phi_m, &mut ws.phi_mm, n);

    // cost = <psi, phi_C> = sum E[x] |psi[x]|^2
    let cost: f64 = amps
        .iter()
        .zip(energies)
        .map(|(a, &e)| a.norm_sqr() * e as f64)
        .sum();

    // <phi_M, phi_C>; A-expectation is -2 Im of it.
    let m_dot_c: Complex64 = ws
        .phi_m
        .iter()
        .zip(&ws.phi_c)
        .map(|(m, c)| m.conj() * c)
        .sum();
    let a_val = -2.0 * m_dot_c.im;

    // <phi_M, H_C phi_M> is real by construction.
    let m_hc_m: f64 = ws
        .phi_m
        .iter()
        .zip(energies)
        .map(|(m, &e)| m.norm_sqr() * e as f64)
        .sum();
    // Re <phi_MM, phi_C>; the Re comes from the identity, not a numerical discard.
    let mm_dot_c: Complex64 = ws
        .phi_mm
        .iter()
        .zip(&ws.phi_c)
        .map(|(m, c)| m.conj() * c)
        .sum();
    let b_val = m_hc_m - mm_dot_c.re;

    // Re <phi_M, H_C phi_C>
    let m_hc_c: Complex64 = ws
        .phi_m
        .iter()
        .zip(&ws.phi_c)
        .zip(energies)
        .map(|((m, c), &e)| m.conj() * c * e as f64)
        .sum();
    // <phi_C, H_M phi_C> is an expectation of the Hermitian H_M, hence real
    // up to rounding; the imaginary residue is checked before discarding.
    apply_hm(&ws.phi_c, &mut ws.phi_mm, n); // reuse phi_mm as H_M phi_C
    let c_hm_c: Complex64 = ws
        .phi_c
        .iter()
        .zip(&ws.phi_mm)
        .map(|(c, h)| c.conj() * h)
        .sum();
    let c_val = 2.0 * m_hc_c.re - 2.0 * c_hm_c.re;

    let residue = c_hm_c.im.abs();
    Ok((
        FeedbackExpectations {
            a_val,
            b_val,
            c_val,
            cost,
        },
        residue,
    ))
}

/// out[y] = sum_i inp[y ^ (1 << i)]
fn apply_hm(inp: &[Complex64], out: &mut [Complex64], n: usize) {
    out.fill(Complex64::new(0.0, 0.0));
    for q in 0..n {
        let bit = 1usize << q;
        for (y, o) in out.iter_mut().enumerate() {
            *o += inp[y ^ bit];
        }
    }
}
