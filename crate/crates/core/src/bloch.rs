//! Momentum-space split-step walk.
//!
//! A single step is `U(k) = T1(k) R(theta2) T0(k) R(theta1)` with coin rotations
//! `R(theta) = exp(i theta/2 axis.sigma)` and shifts diagonal in the coin basis.
//! Every `U(k)` is special unitary, so it can be written as
//! `cos(E) I - i sin(E) n.sigma` with the quasienergy `E` in `[0, pi]`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

/// Below this value of `sin E` the Bloch vector is declared ill-defined.
pub const DEFAULT_TOL_GAP: f64 = 1e-7;

const UNIT_AXIS_TOL: f64 = 1e-12;
const SPECIAL_UNITARY_TOL: f64 = 1e-10;

/// Pauli matrices `[sigma_x, sigma_y, sigma_z]`.
pub fn pauli() -> [Mat2; 3] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        Mat2::new(o, l, l, o),
        Mat2::new(o, -i, i, o),
        Mat2::new(l, o, o, -l),
    ]
}

/// `v.sigma` for a real 3-vector.
pub fn pauli_dot(v: &Vector3<f64>) -> Mat2 {
    let [sx, sy, sz] = pauli();
    sx * C64::from(v.x) + sy * C64::from(v.y) + sz * C64::from(v.z)
}

/// Chiral symmetry classes realised by the split-step protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    Bdi,
    Aiii,
}

impl SymmetryClass {
    /// Conventional first coin angle: `-pi/2` for BDI, `+pi/2` for AIII.
    pub fn default_theta1(self) -> f64 {
        match self {
            SymmetryClass::Bdi => -PI / 2.0,
            SymmetryClass::Aiii => PI / 2.0,
        }
    }

    /// Coin rotation axis: `y` for BDI, `(0, 1, 1)/sqrt(2)` for AIII.
    pub fn rotation_axis(self) -> Vector3<f64> {
        match self {
            SymmetryClass::Bdi => Vector3::new(0.0, 1.0, 0.0),
            SymmetryClass::Aiii => Vector3::new(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryClass::Bdi => "bdi",
            SymmetryClass::Aiii => "aiii",
        })
    }
}

impl FromStr for SymmetryClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bdi" => Ok(SymmetryClass::Bdi),
            "aiii" => Ok(SymmetryClass::Aiii),
            other => Err(Error::invalid(format!(
                "unknown symmetry class {other:?} (expected bdi or aiii)"
            ))),
        }
    }
}

/// One walk protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkParameters {
    pub class: SymmetryClass,
    pub theta1: f64,
    pub theta2: f64,
    pub axis: Vector3<f64>,
    /// Set when `theta1` departs from the class convention.
    pub theta1_overridden: bool,
}

impl WalkParameters {
    /// Class-conventional protocol with second coin angle `theta2`.
    pub fn new(class: SymmetryClass, theta2: f64) -> Self {
        WalkParameters {
            class,
            theta1: class.default_theta1(),
            theta2,
            axis: class.rotation_axis(),
            theta1_overridden: false,
        }
    }

    /// Fully explicit protocol; the axis must be a unit vector.
    pub fn custom(
        class: SymmetryClass,
        theta1: f64,
        theta2: f64,
        axis: Vector3<f64>,
    ) -> Result<Self> {
        check_unit(&axis)?;
        Ok(WalkParameters {
            class,
            theta1,
            theta2,
            axis,
            theta1_overridden: theta1 != class.default_theta1(),
        })
    }

    pub fn with_theta1(mut self, theta1: f64) -> Self {
        self.theta1_overridden = theta1 != self.class.default_theta1();
        self.theta1 = theta1;
        self
    }

    pub fn with_theta2(mut self, theta2: f64) -> Self {
        self.theta2 = theta2;
        self
    }

    pub fn chiral_axis(&self) -> Vector3<f64> {
        chiral_axis(self.class, self.theta1)
    }
}

fn check_unit(axis: &Vector3<f64>) -> Result<()> {
    let norm = axis.norm();
    if (norm - 1.0).abs() > UNIT_AXIS_TOL || !norm.is_finite() {
        return Err(Error::invalid(format!(
            "rotation axis must be a unit vector, |axis| = {norm}"
        )));
    }
    Ok(())
}

fn rotation(theta: f64, axis: &Vector3<f64>) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2::identity() * C64::from(c) + pauli_dot(axis) * C64::new(0.0, s)
}

/// Coin rotation `cos(theta/2) I + i sin(theta/2) axis.sigma`.
pub fn coin_matrix(theta: f64, axis: &Vector3<f64>) -> Result<Mat2> {
    check_unit(axis)?;
    Ok(rotation(theta, axis))
}

/// Which half-step shift: `T0` moves coin state 0, `T1` moves coin state 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    T0,
    T1,
}

/// Momentum representation of a shift with `|k> = N^{-1/2} sum_x e^{ikx} |x>`:
/// `T0(k) = diag(e^{-ik}, 1)`, `T1(k) = diag(1, e^{ik})`.
pub fn shift_matrix(k: f64, shift: Shift) -> Mat2 {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    match shift {
        Shift::T0 => Mat2::new(C64::from_polar(1.0, -k), o, o, l),
        Shift::T1 => Mat2::new(l, o, o, C64::from_polar(1.0, k)),
    }
}

/// Coin rotations of a protocol, hoisted out of k loops.
#[derive(Debug, Clone, Copy)]
struct Coins {
    first: Mat2,
    second: Mat2,
}

impl Coins {
    fn new(params: &WalkParameters) -> Self {
        Coins {
            first: rotation(params.theta1, &params.axis),
            second: rotation(params.theta2, &params.axis),
        }
    }

    fn step(&self, k: f64) -> Mat2 {
        shift_matrix(k, Shift::T1) * self.second * shift_matrix(k, Shift::T0) * self.first
    }
}

/// `U(k) = T1(k) R(theta2) T0(k) R(theta1)`.
pub fn bloch_step_unitary(params: &WalkParameters, k: f64) -> Mat2 {
    Coins::new(params).step(k)
}

/// Quasienergy and Bloch vector of one special-unitary step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub energy: f64,
    pub n: Vector3<f64>,
    pub degenerate: bool,
}

/// Writes `U = cos(E) I - i sin(E) n.sigma` with `E` in `[0, pi]`.
///
/// `sin E` is taken as the norm of the traceless part, so `E = atan2(sin E, cos E)`
/// coincides with `arccos(Re Tr U / 2)` but keeps full precision near `0` and `pi`.
/// When `sin E < tol_gap`, `n` is the zero vector and `degenerate` is set.
pub fn bloch_decompose(u: &Mat2, tol_gap: f64) -> Result<Decomposition> {
    let unitarity = (u * u.adjoint() - Mat2::identity())
        .iter()
        .fold(0.0_f64, |m, z| m.max(z.norm()));
    let det_err = (u.determinant() - C64::from(1.0)).norm();
    if !(unitarity < SPECIAL_UNITARY_TOL && det_err < SPECIAL_UNITARY_TOL) {
        return Err(Error::invalid(format!(
            "step operator is not special unitary (|UU^+ - I| = {unitarity:.2e}, |det U - 1| = {det_err:.2e})"
        )));
    }

    let cos_e = 0.5 * u.trace().re;
    let [sx, sy, sz] = pauli();
    let v = Vector3::new(
        -0.5 * (sx * u).trace().im,
        -0.5 * (sy * u).trace().im,
        -0.5 * (sz * u).trace().im,
    );
    let sin_e = v.norm();
    let energy = sin_e.atan2(cos_e);
    if sin_e < tol_gap {
        Ok(Decomposition {
            energy,
            n: Vector3::zeros(),
            degenerate: true,
        })
    } else {
        Ok(Decomposition {
            energy,
            n: v / sin_e,
            degenerate: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSample {
    pub k: f64,
    pub energy: f64,
    pub n: Vector3<f64>,
    pub degenerate: bool,
}

/// Uniform half-open grid `k_j = -pi + 2 pi (j + 1) / n_k`, which contains `+pi` but not `-pi`.
pub fn k_grid(n_k: usize) -> impl ExactSizeIterator<Item = f64> {
    (0..n_k).map(move |j| -PI + TAU * (j + 1) as f64 / n_k as f64)
}

/// Sampled Brillouin zone of one protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochBand {
    pub params: WalkParameters,
    pub samples: Vec<BlochSample>,
}

/// Samples the band on the uniform `n_k` grid.
pub fn band_structure(params: &WalkParameters, n_k: usize) -> Result<BlochBand> {
    band_structure_with_tol(params, n_k, DEFAULT_TOL_GAP)
}

/// [`band_structure`] with an explicit degeneracy tolerance on `sin E`.
pub fn band_structure_with_tol(
    params: &WalkParameters,
    n_k: usize,
    tol_gap: f64,
) -> Result<BlochBand> {
    if n_k < 8 || !n_k.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "N_k must be even and at least 8, got {n_k}"
        )));
    }
    sample_band(params, n_k, tol_gap)
}

/// Same as [`band_structure`] without the size precondition (small oracle grids).
pub fn band_on_grid(params: &WalkParameters, n_k: usize) -> Result<BlochBand> {
    sample_band(params, n_k, DEFAULT_TOL_GAP)
}

fn sample_band(params: &WalkParameters, n_k: usize, tol_gap: f64) -> Result<BlochBand> {
    if n_k == 0 {
        return Err(Error::invalid("empty k-grid"));
    }
    if !(0.0..1.0).contains(&tol_gap) {
        return Err(Error::invalid(format!(
            "tol_gap must lie in [0, 1), got {tol_gap}"
        )));
    }
    check_unit(&params.axis)?;
    let coins = Coins::new(params);
    let samples = k_grid(n_k)
        .map(|k| {
            let d = bloch_decompose(&coins.step(k), tol_gap)?;
            Ok(BlochSample {
                k,
                energy: d.energy,
                n: d.n,
                degenerate: d.degenerate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlochBand {
        params: params.clone(),
        samples,
    })
}

impl BlochBand {
    pub fn n_k(&self) -> usize {
        self.samples.len()
    }

    pub fn degenerate_count(&self) -> usize {
        self.samples.iter().filter(|s| s.degenerate).count()
    }

    /// Bloch vectors with every degenerate sample replaced by its directional limit:
    /// the vector of the nearest non-degenerate sample at smaller k (cyclically).
    /// A band with no regular sample at all falls back to `+z`.
    pub fn directions(&self) -> Vec<Vector3<f64>> {
        let n = self.samples.len();
        let Some(anchor) = self.samples.iter().rposition(|s| !s.degenerate) else {
            return vec![Vector3::z(); n];
        };
        let mut out = Vec::with_capacity(n);
        let mut last = self.samples[anchor].n;
        for s in &self.samples {
            if !s.degenerate {
                last = s.n;
            }
            out.push(last);
        }
        out
    }
}

/// Axis of the chiral operator; every Bloch vector of the protocol is orthogonal to it.
pub fn chiral_axis(class: SymmetryClass, theta1: f64) -> Vector3<f64> {
    let (s, c) = (theta1 / 2.0).sin_cos();
    match class {
        SymmetryClass::Bdi => Vector3::new(c, 0.0, -s),
        SymmetryClass::Aiii => Vector3::new(c, FRAC_1_SQRT_2 * s, -FRAC_1_SQRT_2 * s),
    }
}

/// Chiral operator `exp(-i pi A.sigma / 2) = -i A.sigma`.
pub fn chiral_operator(axis: &Vector3<f64>) -> Mat2 {
    pauli_dot(axis) * C64::new(0.0, -1.0)
}

/// Orthonormal pair spanning the plane orthogonal to `axis`, with `e2 = axis x e1`.
fn chiral_plane_basis(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = axis.normalize();
    let project = |v: Vector3<f64>| v - a * a.dot(&v);
    let mut e1 = project(Vector3::z());
    if e1.norm() < 1e-8 {
        e1 = project(Vector3::x());
    }
    let e1 = e1.normalize();
    (e1, a.cross(&e1))
}

/// Signed number of turns of `n_k` around `axis` as k traverses the zone.
pub fn winding_number(band: &BlochBand, axis: &Vector3<f64>) -> Result<i64> {
    if let Some(s) = band.samples.iter().find(|s| s.degenerate) {
        return Err(Error::GapClosed {
            k: s.k,
            energy: s.energy,
        });
    }
    if band.samples.is_empty() {
        return Err(Error::invalid("empty band"));
    }
    let (e1, e2) = chiral_plane_basis(axis);
    let phases: Vec<f64> = band
        .samples
        .iter()
        .map(|s| s.n.dot(&e2).atan2(s.n.dot(&e1)))
        .collect();
    let total: f64 = phases
        .iter()
        .zip(phases.iter().cycle().skip(1))
        .map(|(a, b)| wrap_angle(b - a))
        .sum();
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.01 {
        return Err(Error::Resolution { sum: turns });
    }
    Ok(rounded as i64)
}

/// Maps an angle difference into `(-pi, pi]`.
fn wrap_angle(d: f64) -> f64 {
    let w = d - TAU * (d / TAU).round();
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Distances of the quasienergy band from the two gap-closing energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapDiagnostics {
    /// `min_k E_k`.
    pub gap0: f64,
    /// `min_k (pi - E_k)`.
    pub gap_pi: f64,
}

impl GapDiagnostics {
    pub fn is_transition(&self, threshold: f64) -> bool {
        self.gap0 < threshold || self.gap_pi < threshold
    }
}

pub fn gap_diagnostics(band: &BlochBand) -> GapDiagnostics {
    let (gap0, gap_pi) = band
        .samples
        .iter()
        .fold((f64::INFINITY, f64::INFINITY), |(g0, gp), s| {
            (g0.min(s.energy), gp.min(PI - s.energy))
        });
    GapDiagnostics { gap0, gap_pi }
}

/// Worst-case `|n_k . A|` over the regular samples; zero for a chiral band.
pub fn check_chiral_symmetry(band: &BlochBand, axis: &Vector3<f64>) -> f64 {
    band.samples
        .iter()
        .filter(|s| !s.degenerate)
        .map(|s| s.n.dot(axis).abs())
        .fold(0.0, f64::max)
}

/// Matrix form of the chiral check: `max_k |Gamma H_k Gamma^+ + H_k|_max` with `H_k = E_k n_k.sigma`.
pub fn chiral_violation_matrix_form(band: &BlochBand, axis: &Vector3<f64>) -> f64 {
    let gamma = chiral_operator(axis);
    band.samples
        .iter()
        .filter(|s| !s.degenerate)
        .map(|s| {
            let h = pauli_dot(&s.n) * C64::from(s.energy);
            (gamma * h * gamma.adjoint() + h)
                .iter()
                .fold(0.0_f64, |m, z| m.max(z.norm()))
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn max_abs(m: &Mat2) -> f64 {
        m.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
    }

    /// Power-series matrix exponential, summed until terms vanish.
    fn expm_series(a: &Mat2) -> Mat2 {
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for n in 1..60 {
            term = term * a / C64::from(n as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn coin_zero_angle_is_identity() {
        let c = coin_matrix(
            0.0,
            &Vector3::new(0.3, 0.4, 0.866_025_403_784_438_6).normalize(),
        )
        .unwrap();
        assert!(max_abs(&(c - Mat2::identity())) < 1e-15);
    }

    #[test]
    fn coin_pi_about_y() {
        let c = coin_matrix(PI, &Vector3::y()).unwrap();
        let expected = Mat2::new(
            C64::from(0.0),
            C64::from(1.0),
            C64::from(-1.0),
            C64::from(0.0),
        );
        assert!(max_abs(&(c - expected)) < 1e-15);
    }

    #[test]
    fn coin_matches_series_exponential() {
        let axis = SymmetryClass::Aiii.rotation_axis();
        let theta = PI / 4.0;
        let generator = pauli_dot(&axis) * C64::new(0.0, theta / 2.0);
        let c = coin_matrix(theta, &axis).unwrap();
        assert!(max_abs(&(c - expm_series(&generator))) < 1e-12);
        assert!((c.determinant() - C64::from(1.0)).norm() < 1e-12);
    }

    #[test]
    fn coin_rejects_non_unit_axis() {
        assert!(matches!(
            coin_matrix(0.3, &Vector3::new(0.0, 2.0, 0.0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn shift_examples() {
        assert!(max_abs(&(shift_matrix(0.0, Shift::T0) - Mat2::identity())) < 1e-15);
        let t = shift_matrix(PI / 2.0, Shift::T0);
        assert!((t[(0, 0)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((t[(1, 1)] - C64::from(1.0)).norm() < 1e-15);
    }

    #[test]
    fn shift_t1_matches_real_space_plane_wave() {
        // Real-space T1 moves coin-1 amplitude from x to x-1 on a ring of 12 sites.
        let n = 12usize;
        let k = PI / 3.0;
        // Plane wave in coin state 1: psi(x) = e^{ikx}.
        let psi: Vec<C64> = (0..n).map(|x| C64::from_polar(1.0, k * x as f64)).collect();
        let mut shifted = vec![C64::from(0.0); n];
        for x in 0..n {
            shifted[(x + n - 1) % n] += psi[x];
        }
        let t = shift_matrix(k, Shift::T1);
        for x in 0..n {
            assert!((shifted[x] - t[(1, 1)] * psi[x]).norm() < 1e-12);
        }
        assert!((t[(0, 0)] - C64::from(1.0)).norm() < 1e-15);
        assert!((t[(1, 1)] - C64::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn trivial_coins_give_diagonal_step() {
        let p = WalkParameters::custom(SymmetryClass::Bdi, 0.0, 0.0, Vector3::y()).unwrap();
        for k in [-2.0, 0.3, PI] {
            let u = bloch_step_unitary(&p, k);
            let expected = Mat2::new(
                C64::from_polar(1.0, -k),
                C64::from(0.0),
                C64::from(0.0),
                C64::from_polar(1.0, k),
            );
            assert!(max_abs(&(u - expected)) < 1e-14);
        }
    }

    #[test]
    fn bdi_step_matches_explicit_factor_product() {
        let p = WalkParameters::new(SymmetryClass::Bdi, FRAC_PI_4);
        let u = bloch_step_unitary(&p, 0.0);
        // At k = 0 both shifts are the identity, leaving R_y(pi/4) R_y(-pi/2) = R_y(-pi/4).
        let (s, c) = (-PI / 8.0).sin_cos();
        let expected = Mat2::new(C64::from(c), C64::from(s), C64::from(-s), C64::from(c));
        assert!(max_abs(&(u - expected)) < 1e-14);
    }

    #[test]
    fn decompose_identity_is_degenerate() {
        let d = bloch_decompose(&Mat2::identity(), DEFAULT_TOL_GAP).unwrap();
        assert_eq!(d.energy, 0.0);
        assert!(d.degenerate);
    }

    #[test]
    fn decompose_diagonal() {
        let u = Mat2::new(
            C64::new(0.0, -1.0),
            C64::from(0.0),
            C64::from(0.0),
            C64::new(0.0, 1.0),
        );
        let d = bloch_decompose(&u, DEFAULT_TOL_GAP).unwrap();
        assert!((d.energy - PI / 2.0).abs() < 1e-15);
        assert!((d.n - Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn decompose_reconstructs_trivial_walk() {
        let p = WalkParameters::custom(SymmetryClass::Bdi, 0.0, 0.0, Vector3::y()).unwrap();
        let u = bloch_step_unitary(&p, PI / 3.0);
        let d = bloch_decompose(&u, DEFAULT_TOL_GAP).unwrap();
        assert!((d.energy - PI / 3.0).abs() < 1e-14);
        assert!((d.n - Vector3::z()).norm() < 1e-14);
        let rebuilt = Mat2::identity() * C64::from(d.energy.cos())
            - pauli_dot(&d.n) * C64::new(0.0, d.energy.sin());
        assert!(max_abs(&(rebuilt - u)) < 1e-12);
    }

    #[test]
    fn decompose_rejects_non_special_unitary() {
        let u = Mat2::identity() * C64::new(0.0, 1.0);
        assert!(bloch_decompose(&u, DEFAULT_TOL_GAP).is_err());
        let u = Mat2::identity() * C64::from(2.0);
        assert!(bloch_decompose(&u, DEFAULT_TOL_GAP).is_err());
    }

    #[test]
    fn band_rejects_bad_grid() {
        let p = WalkParameters::new(SymmetryClass::Bdi, 0.4);
        assert!(band_structure(&p, 6).is_err());
        assert!(band_structure(&p, 9).is_err());
    }

    #[test]
    fn grid_is_half_open() {
        let ks: Vec<f64> = k_grid(8).collect();
        assert_eq!(ks.len(), 8);
        assert!((ks[7] - PI).abs() < 1e-15);
        assert!(ks.iter().all(|&k| k > -PI));
    }

    #[test]
    fn trivial_band_energies_are_abs_k() {
        let p = WalkParameters::custom(SymmetryClass::Bdi, 0.0, 0.0, Vector3::y()).unwrap();
        let band = band_structure(&p, 8).unwrap();
        for s in &band.samples {
            assert!((s.energy - s.k.abs()).abs() < 1e-14);
        }
        let g = gap_diagnostics(&band);
        // k = 0 and k = pi are both on the grid
        assert!(g.gap0 < 1e-14);
        assert!(g.gap_pi < 1e-14);
    }

    #[test]
    fn bdi_transition_has_degenerate_sample() {
        let band = band_structure(&WalkParameters::new(SymmetryClass::Bdi, PI / 2.0), 256).unwrap();
        assert!(band.degenerate_count() >= 1);
        let g = gap_diagnostics(&band);
        assert!(g.gap0 < 0.02);
        assert!(g.is_transition(0.02));
    }

    #[test]
    fn bdi_gapped_band_gaps() {
        let band =
            band_structure(&WalkParameters::new(SymmetryClass::Bdi, FRAC_PI_4), 512).unwrap();
        let g = gap_diagnostics(&band);
        assert!(g.gap0 > 0.3 && g.gap_pi > 0.3, "{g:?}");
    }

    #[test]
    fn chiral_axis_values() {
        assert!((chiral_axis(SymmetryClass::Bdi, 0.0) - Vector3::x()).norm() < 1e-15);
        let a = chiral_axis(SymmetryClass::Bdi, -PI / 2.0);
        let h = 2f64.sqrt() / 2.0;
        assert!((a - Vector3::new(h, 0.0, h)).norm() < 1e-15);
        let a = chiral_axis(SymmetryClass::Aiii, PI / 2.0);
        let s = (PI / 4.0).sin();
        assert!((a - Vector3::new(h, s * FRAC_1_SQRT_2, -s * FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chiral_plane_holds_for_both_classes_and_overrides() {
        let cases = [
            WalkParameters::new(SymmetryClass::Bdi, FRAC_PI_4),
            WalkParameters::new(SymmetryClass::Aiii, 3.0 * FRAC_PI_4),
            WalkParameters::new(SymmetryClass::Bdi, FRAC_PI_4).with_theta1(0.3),
        ];
        for p in cases {
            let band = band_structure(&p, 256).unwrap();
            let a = p.chiral_axis();
            assert!(check_chiral_symmetry(&band, &a) < 1e-8, "{p:?}");
            assert!(chiral_violation_matrix_form(&band, &a) < 1e-8, "{p:?}");
        }
        assert!(
            WalkParameters::new(SymmetryClass::Bdi, 0.1)
                .with_theta1(0.3)
                .theta1_overridden
        );
    }

    #[test]
    fn chiral_check_detects_wrong_axis() {
        let p = WalkParameters::new(SymmetryClass::Bdi, FRAC_PI_4);
        let band = band_structure(&p, 64).unwrap();
        assert!(check_chiral_symmetry(&band, &Vector3::z()) > 0.1);
    }

    #[test]
    fn table_one_windings() {
        for (class, theta2, expected) in [
            (SymmetryClass::Bdi, FRAC_PI_4, 1),
            (SymmetryClass::Bdi, 3.0 * FRAC_PI_4, 0),
            (SymmetryClass::Aiii, FRAC_PI_4, 1),
            (SymmetryClass::Aiii, 3.0 * FRAC_PI_4, 0),
        ] {
            let p = WalkParameters::new(class, theta2);
            let band = band_structure(&p, 512).unwrap();
            let nu = winding_number(&band, &p.chiral_axis()).unwrap();
            assert_eq!(nu.abs(), expected, "{class} theta2={theta2}");
        }
    }

    #[test]
    fn winding_rejects_closed_gap() {
        let p = WalkParameters::new(SymmetryClass::Bdi, PI / 2.0);
        let band = band_structure(&p, 512).unwrap();
        assert!(matches!(
            winding_number(&band, &p.chiral_axis()),
            Err(Error::GapClosed { .. })
        ));
    }

    #[test]
    fn directions_fill_degenerate_from_below() {
        let p = WalkParameters::custom(SymmetryClass::Bdi, 0.0, 0.0, Vector3::y()).unwrap();
        let band = band_structure(&p, 8).unwrap();
        // Only k = pi (the last sample) is degenerate; it inherits the previous vector.
        assert!(band.samples[7].degenerate);
        let dirs = band.directions();
        assert_eq!(dirs[7], band.samples[6].n);
    }

    #[test]
    fn wrap_angle_range() {
        for d in [-7.0, -PI, -0.1, 0.0, PI, 3.5, 12.0] {
            let w = wrap_angle(d);
            assert!(w > -PI - 1e-15 && w <= PI + 1e-15);
            assert!(((d - w) / TAU - ((d - w) / TAU).round()).abs() < 1e-12);
        }
    }
}
