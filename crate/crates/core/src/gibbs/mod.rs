//! Boltzmann-Gibbs states of the walk and closed-form fidelities between them.
//!
//! Every family is block diagonal in momentum. Per k the state is built from
//! `exp(-u n.sigma)` with the reduced variable `u = E_k / 2T`, so the per-k
//! partition function is `Z_k = 2 cosh u`. Two per-k traces drive everything:
//!
//! * `G = Tr sqrt(e^{-B/2} e^{-B'} e^{-B/2})`, the cross term of the fidelity;
//! * `S = Tr(e^{-B/2} e^{-B'/2})`, the cross term of `Tr(sqrt(rho) sqrt(rho'))`.
//!
//! The four families differ only in how the per-k terms are normalised and
//! aggregated. `S <= G` per k, which makes `Delta = F - Tr(sqrt(rho) sqrt(rho'))`
//! non-negative.

mod limit;
pub mod oracle;

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::bloch::BlochBand;
use crate::error::{Error, Result};

pub use limit::{zero_t_limit, zero_t_support, ZeroTemperatureState, ZERO_T_ENERGY_TOL};

/// Below this temperature the log-domain path is used regardless of the requested precision.
pub const EXTENDED_PRECISION_BELOW_T: f64 = 0.003;

/// Above this value of `u + u'` the standard path switches to log-domain hyperbolics.
const OVERFLOW_GUARD: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GibbsFamily {
    /// Single-particle thermal state `e^{-beta H} / Z`.
    Sp0,
    /// Single-particle mixture of per-momentum thermal states, `(1/Omega) sum_k rho_k`.
    Sp1,
    /// Many-body canonical ensemble.
    Mb0,
    /// Many-body generalised Gibbs ensemble with momentum-dependent chemical potential.
    Mb1,
}

impl GibbsFamily {
    pub const ALL: [GibbsFamily; 4] = [
        GibbsFamily::Sp0,
        GibbsFamily::Sp1,
        GibbsFamily::Mb0,
        GibbsFamily::Mb1,
    ];

    pub fn is_many_body(self) -> bool {
        matches!(self, GibbsFamily::Mb0 | GibbsFamily::Mb1)
    }
}

impl fmt::Display for GibbsFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GibbsFamily::Sp0 => "sp0",
            GibbsFamily::Sp1 => "sp1",
            GibbsFamily::Mb0 => "mb0",
            GibbsFamily::Mb1 => "mb1",
        })
    }
}

impl FromStr for GibbsFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sp0" => Ok(GibbsFamily::Sp0),
            "sp1" => Ok(GibbsFamily::Sp1),
            "mb0" => Ok(GibbsFamily::Mb0),
            "mb1" => Ok(GibbsFamily::Mb1),
            other => Err(Error::invalid(format!(
                "unknown state family {other:?} (expected sp0, sp1, mb0 or mb1)"
            ))),
        }
    }
}

/// Evaluation strategy for the per-k hyperbolic combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    /// Direct hyperbolic formulas in `n.n'`, log-domain only past the overflow guard.
    #[default]
    Standard,
    /// Everything in log domain, with `1 +- n.n'` taken from `|n +- n'|^2 / 2`.
    ExtendedLowT,
}

impl Precision {
    /// The path actually used for a pair of temperatures.
    pub fn resolve(self, t: f64, t_prime: f64) -> Precision {
        if t.min(t_prime) < EXTENDED_PRECISION_BELOW_T {
            Precision::ExtendedLowT
        } else {
            self
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Standard => "standard",
            Precision::ExtendedLowT => "extended-low-t",
        })
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Precision::Standard),
            "extended-low-t" | "extended" => Ok(Precision::ExtendedLowT),
            other => Err(Error::invalid(format!(
                "unknown precision {other:?} (expected standard or extended-low-t)"
            ))),
        }
    }
}

/// A band held at temperature `T` (with `k_B = 1`).
#[derive(Debug, Clone, Copy)]
pub struct ThermalPoint<'a> {
    pub band: &'a BlochBand,
    pub temperature: f64,
}

impl<'a> ThermalPoint<'a> {
    pub fn new(band: &'a BlochBand, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::Domain(format!(
                "temperature must be positive and finite, got {temperature}"
            )));
        }
        Ok(ThermalPoint { band, temperature })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }
}

/// Per-momentum ingredients of every closed form. Traces are stored as logarithms
/// so that arbitrarily low temperatures stay finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerKCore {
    pub u: f64,
    pub u_prime: f64,
    pub ndot: f64,
    pub log_g: f64,
    pub log_s: f64,
    pub log_z: f64,
    pub log_z_prime: f64,
}

impl PerKCore {
    pub fn g(&self) -> f64 {
        self.log_g.exp()
    }

    pub fn s(&self) -> f64 {
        self.log_s.exp()
    }

    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn z_prime(&self) -> f64 {
        self.log_z_prime.exp()
    }
}

fn clamp_ndot(ndot: f64) -> f64 {
    ndot.clamp(-1.0, 1.0)
}

/// `G = 2 sqrt[(1 + cosh u cosh u' + sinh u sinh u' n.n') / 2]`.
pub fn cross_term(u: f64, u_prime: f64, ndot: f64) -> f64 {
    let d = clamp_ndot(ndot);
    if u + u_prime > OVERFLOW_GUARD {
        return log_cross_term(u, u_prime, 1.0 + d, 1.0 - d).exp();
    }
    let x = u.cosh() * u_prime.cosh() + u.sinh() * u_prime.sinh() * d;
    2.0 * ((1.0 + x) / 2.0).max(0.0).sqrt()
}

/// `S = 2 [cosh(u/2) cosh(u'/2) + sinh(u/2) sinh(u'/2) n.n']`.
pub fn sqrt_cross_term(u: f64, u_prime: f64, ndot: f64) -> f64 {
    let d = clamp_ndot(ndot);
    if u + u_prime > OVERFLOW_GUARD {
        return log_sqrt_cross_term(u, u_prime, 1.0 + d, 1.0 - d).exp();
    }
    let (h, hp) = (u / 2.0, u_prime / 2.0);
    2.0 * (h.cosh() * hp.cosh() + h.sinh() * hp.sinh() * d).max(0.0)
}

/// `ln(sum_i e^{a_i})`, ignoring `-inf` terms.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|&a| (a - m).exp()).sum::<f64>().ln()
}

/// `ln G` from `1 + n.n'` and `1 - n.n'`, via
/// `cosh u cosh u' + sinh u sinh u' d = [(1+d) cosh(u+u') + (1-d) cosh(u-u')] / 2`.
fn log_cross_term(u: f64, u_prime: f64, one_plus: f64, one_minus: f64) -> f64 {
    let sum = u + u_prime;
    let diff = (u - u_prime).abs();
    let lp = one_plus.ln();
    let lm = one_minus.ln();
    // ln of cosh u cosh u' + sinh u sinh u' d
    let log_x = log_sum_exp(&[lp + sum, lp - sum, lm + diff, lm - diff]) - 2.0 * LN_2;
    // G = 2 sqrt((1 + X)/2)  =>  ln G = ln 2 + (ln(1 + X) - ln 2) / 2
    let log_one_plus_x = log_x + (-log_x).exp().ln_1p();
    LN_2 + 0.5 * (log_one_plus_x - LN_2)
}

/// `ln S` with `S = (1+d) cosh((u+u')/2) + (1-d) cosh((u-u')/2)`.
fn log_sqrt_cross_term(u: f64, u_prime: f64, one_plus: f64, one_minus: f64) -> f64 {
    let half_sum = 0.5 * (u + u_prime);
    let half_diff = 0.5 * (u - u_prime).abs();
    let lp = one_plus.ln();
    let lm = one_minus.ln();
    log_sum_exp(&[lp + half_sum, lp - half_sum, lm + half_diff, lm - half_diff]) - LN_2
}

/// `ln(2 cosh u)`.
fn log_partition(u: f64) -> f64 {
    u.abs() + (-2.0 * u.abs()).exp().ln_1p()
}

fn check_pair(p: &ThermalPoint<'_>, q: &ThermalPoint<'_>) -> Result<()> {
    for t in [p.temperature, q.temperature] {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!(
                "temperature must be positive and finite, got {t}"
            )));
        }
    }
    let (a, b) = (&p.band.samples, &q.band.samples);
    if a.is_empty() {
        return Err(Error::invalid("empty k-grid"));
    }
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| (x.k - y.k).abs() > 1e-12) {
        return Err(Error::invalid(format!(
            "k-grids differ ({} vs {} points)",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Per-k cores for a pair of points. Degenerate Bloch vectors enter through their
/// directional limit (see [`BlochBand::directions`]).
pub fn per_k_cores(
    p: &ThermalPoint<'_>,
    q: &ThermalPoint<'_>,
    precision: Precision,
) -> Result<Vec<PerKCore>> {
    check_pair(p, q)?;
    let precision = precision.resolve(p.temperature, q.temperature);
    let dirs = p.band.directions();
    let dirs_q = q.band.directions();
    let cores = p
        .band
        .samples
        .iter()
        .zip(&q.band.samples)
        .zip(dirs.iter().zip(&dirs_q))
        .map(|((a, b), (n, m))| {
            let u = a.energy / (2.0 * p.temperature);
            let u_prime = b.energy / (2.0 * q.temperature);
            let ndot = clamp_ndot(n.dot(m));
            let (log_g, log_s) = match precision {
                Precision::Standard => (
                    cross_term(u, u_prime, ndot).ln(),
                    sqrt_cross_term(u, u_prime, ndot).ln(),
                ),
                Precision::ExtendedLowT => {
                    let one_plus = (n + m).norm_squared() / 2.0;
                    let one_minus = (n - m).norm_squared() / 2.0;
                    (
                        log_cross_term(u, u_prime, one_plus, one_minus),
                        log_sqrt_cross_term(u, u_prime, one_plus, one_minus),
                    )
                }
            };
            PerKCore {
                u,
                u_prime,
                ndot,
                log_g,
                log_s,
                log_z: log_partition(u),
                log_z_prime: log_partition(u_prime),
            }
        })
        .collect();
    Ok(cores)
}

/// Fidelity and Uhlmann departure between two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityDelta {
    pub fidelity: f64,
    /// `Tr(sqrt(rho) sqrt(rho'))`.
    pub trace_sqrt: f64,
    pub delta: f64,
}

/// Aggregates per-k cores into the fidelity and `Tr(sqrt(rho) sqrt(rho'))` of one family.
/// The reduction runs sequentially in k order.
pub fn aggregate(cores: &[PerKCore], family: GibbsFamily) -> FidelityDelta {
    match family {
        GibbsFamily::Sp0 => {
            let lz: Vec<f64> = cores.iter().map(|c| c.log_z).collect();
            let lzp: Vec<f64> = cores.iter().map(|c| c.log_z_prime).collect();
            let norm = 0.5 * (log_sum_exp(&lz) + log_sum_exp(&lzp));
            let (mut f, mut delta) = (0.0, 0.0);
            for c in cores {
                let g = (c.log_g - norm).exp();
                let s = (c.log_s - norm).exp();
                f += g;
                delta += g - s;
            }
            FidelityDelta {
                fidelity: f,
                trace_sqrt: f - delta,
                delta,
            }
        }
        GibbsFamily::Sp1 => {
            let (mut f, mut delta) = (0.0, 0.0);
            for c in cores {
                let norm = 0.5 * (c.log_z + c.log_z_prime);
                let g = (c.log_g - norm).exp();
                let s = (c.log_s - norm).exp();
                f += g;
                delta += g - s;
            }
            let omega = cores.len() as f64;
            FidelityDelta {
                fidelity: f / omega,
                trace_sqrt: (f - delta) / omega,
                delta: delta / omega,
            }
        }
        GibbsFamily::Mb0 => {
            // per k: (2 + X) / sqrt[(2 + Z)(2 + Z')] with X = G or S
            let (mut log_f, mut log_t) = (0.0, 0.0);
            for c in cores {
                let norm =
                    0.5 * (log_sum_exp(&[LN_2, c.log_z]) + log_sum_exp(&[LN_2, c.log_z_prime]));
                log_f += log_sum_exp(&[LN_2, c.log_g]) - norm;
                log_t += log_sum_exp(&[LN_2, c.log_s]) - norm;
            }
            product_pair(log_f, log_t)
        }
        GibbsFamily::Mb1 => {
            // per k: [1 + X / sqrt(Z Z') + 1/(Z Z')] / sqrt[(2 + Z^-2)(2 + Z'^-2)]
            let (mut log_f, mut log_t) = (0.0, 0.0);
            for c in cores {
                let half = 0.5 * (c.log_z + c.log_z_prime);
                let inv_zz = (-2.0 * half).exp();
                let norm = 0.5
                    * ((2.0 + (-2.0 * c.log_z).exp()).ln()
                        + (2.0 + (-2.0 * c.log_z_prime).exp()).ln());
                log_f += (1.0 + (c.log_g - half).exp() + inv_zz).ln() - norm;
                log_t += (1.0 + (c.log_s - half).exp() + inv_zz).ln() - norm;
            }
            product_pair(log_f, log_t)
        }
    }
}

fn product_pair(log_f: f64, log_t: f64) -> FidelityDelta {
    let fidelity = log_f.exp();
    let trace_sqrt = log_t.exp();
    // F - T = F (1 - e^{log_t - log_f})
    let delta = -fidelity * (log_t - log_f).exp_m1();
    FidelityDelta {
        fidelity,
        trace_sqrt,
        delta,
    }
}

/// Fidelity, `Tr(sqrt(rho) sqrt(rho'))` and `Delta` with an explicit precision.
pub fn fidelity_and_delta(
    p: &ThermalPoint<'_>,
    q: &ThermalPoint<'_>,
    family: GibbsFamily,
    precision: Precision,
) -> Result<FidelityDelta> {
    let cores = per_k_cores(p, q, precision)?;
    Ok(aggregate(&cores, family))
}

/// Closed-form fidelity `Tr sqrt(sqrt(rho) rho' sqrt(rho))`.
pub fn fidelity(p: &ThermalPoint<'_>, q: &ThermalPoint<'_>, family: GibbsFamily) -> Result<f64> {
    Ok(fidelity_and_delta(p, q, family, Precision::Standard)?.fidelity)
}

/// Closed-form `Tr(sqrt(rho) sqrt(rho'))`.
pub fn trace_sqrt_product(
    p: &ThermalPoint<'_>,
    q: &ThermalPoint<'_>,
    family: GibbsFamily,
) -> Result<f64> {
    Ok(fidelity_and_delta(p, q, family, Precision::Standard)?.trace_sqrt)
}

/// `Delta = F - Tr(sqrt(rho) sqrt(rho'))`, the departure of the Uhlmann factor from identity.
pub fn delta(p: &ThermalPoint<'_>, q: &ThermalPoint<'_>, family: GibbsFamily) -> Result<f64> {
    Ok(fidelity_and_delta(p, q, family, Precision::Standard)?.delta)
}
