//! Dense-matrix oracles for the closed forms.
//!
//! Single-particle families are assembled as one `2 N_k x 2 N_k` block-diagonal
//! density matrix. Many-body families are built per momentum on the four-state
//! Fock space of two fermionic modes and multiplied over k. Fidelities are
//! computed as the trace norm of `sqrt(rho) sqrt(rho')`, i.e. the sum of its
//! singular values, which equals `Tr sqrt(sqrt(rho) rho' sqrt(rho))`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{GibbsFamily, ThermalPoint};
use crate::bloch::{pauli_dot, C64};
use crate::error::{Error, Result};

/// Largest grid the oracles accept.
pub const ORACLE_MAX_NK: usize = 16;

type CMat = DMatrix<C64>;

/// `exp(-scale K)` for Hermitian `K`.
fn hermitian_exp(k: &CMat, scale: f64) -> CMat {
    let eig = SymmetricEigen::new(k.clone());
    let v = &eig.eigenvectors;
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|l| C64::from((-scale * l).exp())));
    v * d * v.adjoint()
}

/// `ln Tr exp(-K)` for Hermitian `K`, without forming the exponential.
fn log_trace_exp(k: &CMat) -> f64 {
    let eig = SymmetricEigen::new(k.clone());
    let m = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    eig.eigenvalues
        .iter()
        .map(|l| (m - l).exp())
        .sum::<f64>()
        .ln()
        - m
}

fn trace_norm(a: &CMat) -> f64 {
    a.clone().singular_values().iter().sum()
}

fn check(p: &ThermalPoint<'_>, q: &ThermalPoint<'_>) -> Result<usize> {
    super::check_pair(p, q)?;
    let n = p.band.n_k();
    if n > ORACLE_MAX_NK {
        return Err(Error::invalid(format!(
            "dense oracle is capped at N_k = {ORACLE_MAX_NK}, got {n}"
        )));
    }
    Ok(n)
}

/// Per-k single-particle generator `u_k n_k.sigma` with `u_k = E_k / 2T`.
fn generators(p: &ThermalPoint<'_>) -> Vec<CMat> {
    p.band
        .samples
        .iter()
        .zip(p.band.directions())
        .map(|(s, n)| {
            let h = pauli_dot(&n) * C64::from(s.energy / (2.0 * p.temperature));
            CMat::from_fn(2, 2, |i, j| h[(i, j)])
        })
        .collect()
}

/// Normalised `sqrt(rho)` for a single-particle family.
fn single_particle_sqrt(p: &ThermalPoint<'_>, family: GibbsFamily) -> CMat {
    let blocks = generators(p);
    let n = blocks.len();
    let mut k = CMat::zeros(2 * n, 2 * n);
    for (i, b) in blocks.iter().enumerate() {
        k.view_mut((2 * i, 2 * i), (2, 2)).copy_from(b);
    }
    // Normalise in the exponent so the square root never sees tiny eigenvalues.
    match family {
        GibbsFamily::Sp0 => {
            let lz = C64::from(log_trace_exp(&k));
            for i in 0..2 * n {
                k[(i, i)] += lz;
            }
        }
        GibbsFamily::Sp1 => {
            let omega = n as f64;
            for (i, b) in blocks.iter().enumerate() {
                let shift = C64::from(omega.ln() + log_trace_exp(b));
                k[(2 * i, 2 * i)] += shift;
                k[(2 * i + 1, 2 * i + 1)] += shift;
            }
        }
        _ => unreachable!("many-body family in single-particle oracle"),
    }
    hermitian_exp(&k, 0.5)
}

/// Normalised `sqrt(rho_k)` on the Fock space `{|0>, |up>, |down>, |up down>}` for every k.
fn many_body_sqrts(p: &ThermalPoint<'_>, family: GibbsFamily) -> Vec<CMat> {
    generators(p)
        .into_iter()
        .map(|h| {
            // Psi^+ h Psi acts as diag(0, h, Tr h) on the four Fock states.
            let mut k = CMat::zeros(4, 4);
            k.view_mut((1, 1), (2, 2)).copy_from(&h);
            k[(3, 3)] = h.trace();
            if family == GibbsFamily::Mb1 {
                // -mu_k / T = ln Z_k, times the number operator diag(0, 1, 1, 2).
                let lz = C64::from(log_trace_exp(&h));
                k[(1, 1)] += lz;
                k[(2, 2)] += lz;
                k[(3, 3)] += lz * 2.0;
            }
            let lz = C64::from(log_trace_exp(&k));
            for i in 0..4 {
                k[(i, i)] += lz;
            }
            hermitian_exp(&k, 0.5)
        })
        .collect()
}

/// `(F, Tr(sqrt(rho) sqrt(rho')))` by dense linear algebra.
fn oracle_pair(
    p: &ThermalPoint<'_>,
    q: &ThermalPoint<'_>,
    family: GibbsFamily,
) -> Result<(f64, f64)> {
    check(p, q)?;
    if family.is_many_body() {
        let (mut f, mut t) = (1.0, 1.0);
        for (a, b) in many_body_sqrts(p, family)
            .iter()
            .zip(&many_body_sqrts(q, family))
        {
            let m = a * b;
            f *= trace_norm(&m);
            t *= m.trace().re;
        }
        Ok((f, t))
    } else {
        let m = single_particle_sqrt(p, family) * single_particle_sqrt(q, family);
        Ok((trace_norm(&m), m.trace().re))
    }
}

/// Fidelity between two Gibbs states from their dense density matrices.
pub fn oracle_fidelity(
    p: &ThermalPoint<'_>,
    q: &ThermalPoint<'_>,
    family: GibbsFamily,
) -> Result<f64> {
    oracle_pair(p, q, family).map(|(f, _)| f)
}

/// `Tr(sqrt(rho) sqrt(rho'))` from the dense density matrices.
pub fn oracle_trace_sqrt(
    p: &ThermalPoint<'_>,
    q: &ThermalPoint<'_>,
    family: GibbsFamily,
) -> Result<f64> {
    oracle_pair(p, q, family).map(|(_, t)| t)
}

/// `Delta` from the dense density matrices.
pub fn oracle_delta(
    p: &ThermalPoint<'_>,
    q: &ThermalPoint<'_>,
    family: GibbsFamily,
) -> Result<f64> {
    oracle_pair(p, q, family).map(|(f, t)| f - t)
}
