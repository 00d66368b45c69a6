//! Zero-temperature limits of the single-particle states.

use nalgebra::Vector3;

use super::GibbsFamily;
use crate::bloch::BlochBand;
use crate::error::{Error, Result};

/// Energies within this distance of the band maximum belong to the ground-state set.
pub const ZERO_T_ENERGY_TOL: f64 = 1e-6;

/// Uniform mixture of lower-band states `|-n_k> (x) |k>` over a set of momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTemperatureState {
    pub family: GibbsFamily,
    /// Indices into the band's k-grid.
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    /// Bloch vector of the occupied spinor at each support point (`-n_k`).
    pub spinors: Vec<Vector3<f64>>,
}

/// Momenta carrying weight as `T -> 0`: those maximising `E_k` for `Sp0`, the whole grid for `Sp1`.
pub fn zero_t_support(band: &BlochBand, family: GibbsFamily) -> Result<Vec<usize>> {
    match family {
        GibbsFamily::Sp0 => {
            let e_max = band
                .samples
                .iter()
                .map(|s| s.energy)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(band
                .samples
                .iter()
                .enumerate()
                .filter(|(_, s)| s.energy >= e_max - ZERO_T_ENERGY_TOL)
                .map(|(i, _)| i)
                .collect())
        }
        GibbsFamily::Sp1 => Ok((0..band.n_k()).collect()),
        other => Err(Error::invalid(format!(
            "zero-temperature limit is defined for sp0 and sp1 only, got {other}"
        ))),
    }
}

pub fn zero_t_limit(band: &BlochBand, family: GibbsFamily) -> Result<ZeroTemperatureState> {
    let support = zero_t_support(band, family)?;
    if support.is_empty() {
        return Err(Error::invalid("empty band"));
    }
    if let Some(&i) = support.iter().find(|&&i| band.samples[i].degenerate) {
        let s = &band.samples[i];
        return Err(Error::IllDefinedLimit(format!(
            "Bloch vector undefined at k = {:.6} (E = {:.6})",
            s.k, s.energy
        )));
    }
    let w = 1.0 / support.len() as f64;
    Ok(ZeroTemperatureState {
        family,
        weights: vec![w; support.len()],
        spinors: support.iter().map(|&i| -band.samples[i].n).collect(),
        support,
    })
}
