//! Position-space walk on a ring with a domain wall in the second coin angle.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};

use crate::bloch::{coin_matrix, Mat2, SymmetryClass, C64};
use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;

/// Smallest ring the builder accepts.
pub const MIN_SITES: usize = 16;

/// Residual above which the unitary eigendecomposition is reported as failed.
const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
/// Hermitian eigenvalues closer than this are refined as one cluster.
const CLUSTER_TOL: f64 = 1e-9;

/// Coin angles along a ring of `n_sites` sites. Sites `x <= wall` use `theta2_left`,
/// sites `x > wall` use `theta2_right`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinProfile {
    pub n_sites: usize,
    pub theta1: f64,
    pub theta2_left: f64,
    pub theta2_right: f64,
    pub wall: usize,
    pub axis: Vector3<f64>,
}

impl CoinProfile {
    /// Translation-invariant profile with the class conventions.
    pub fn uniform(class: SymmetryClass, theta2: f64, n_sites: usize) -> Self {
        Self::domain_wall(class, theta2, theta2, n_sites)
    }

    /// Wall centred at `n_sites / 2`.
    pub fn domain_wall(class: SymmetryClass, left: f64, right: f64, n_sites: usize) -> Self {
        CoinProfile {
            n_sites,
            theta1: class.default_theta1(),
            theta2_left: left,
            theta2_right: right,
            wall: n_sites / 2,
            axis: class.rotation_axis(),
        }
    }

    pub fn theta2_at(&self, x: usize) -> f64 {
        if x <= self.wall {
            self.theta2_left
        } else {
            self.theta2_right
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < MIN_SITES {
            return Err(Error::invalid(format!(
                "ring needs at least {MIN_SITES} sites, got {}",
                self.n_sites
            )));
        }
        if self.wall >= self.n_sites {
            return Err(Error::invalid(format!(
                "wall position {} outside ring of {} sites",
                self.wall, self.n_sites
            )));
        }
        for (name, v) in [
            ("theta1", self.theta1),
            ("theta2_left", self.theta2_left),
            ("theta2_right", self.theta2_right),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} is not finite")));
            }
        }
        coin_matrix(0.0, &self.axis).map(|_| ())
    }
}

/// Per-site coins of a validated profile.
struct SiteCoins {
    first: Mat2,
    second: Vec<Mat2>,
}

impl SiteCoins {
    fn new(profile: &CoinProfile) -> Result<Self> {
        profile.validate()?;
        let first = coin_matrix(profile.theta1, &profile.axis)?;
        let second = (0..profile.n_sites)
            .map(|x| coin_matrix(profile.theta2_at(x), &profile.axis))
            .collect::<Result<Vec<_>>>()?;
        Ok(SiteCoins { first, second })
    }
}

fn apply_coin(coin: &Mat2, psi: &mut [C64], x: usize) {
    let (a, b) = (psi[2 * x], psi[2 * x + 1]);
    psi[2 * x] = coin[(0, 0)] * a + coin[(0, 1)] * b;
    psi[2 * x + 1] = coin[(1, 0)] * a + coin[(1, 1)] * b;
}

/// One walk step `T1 R2 T0 R1` on a state with amplitude index `2x + c`.
fn step(coins: &SiteCoins, psi: &mut [C64]) {
    let n = coins.second.len();
    for x in 0..n {
        apply_coin(&coins.first, psi, x);
    }
    // T0: coin 0 hops x -> x + 1
    let last = psi[2 * (n - 1)];
    for x in (1..n).rev() {
        psi[2 * x] = psi[2 * (x - 1)];
    }
    psi[0] = last;
    for (x, coin) in coins.second.iter().enumerate() {
        apply_coin(coin, psi, x);
    }
    // T1: coin 1 hops x -> x - 1
    let first = psi[1];
    for x in 0..n - 1 {
        psi[2 * x + 1] = psi[2 * (x + 1) + 1];
    }
    psi[2 * (n - 1) + 1] = first;
}

/// Dense `2N x 2N` Floquet operator with periodic boundaries.
pub fn build_floquet(profile: &CoinProfile) -> Result<CMat> {
    let coins = SiteCoins::new(profile)?;
    let dim = 2 * profile.n_sites;
    let mut u = CMat::zeros(dim, dim);
    let mut psi = vec![C64::from(0.0); dim];
    for j in 0..dim {
        psi.fill(C64::from(0.0));
        psi[j] = C64::from(1.0);
        step(&coins, &mut psi);
        u.column_mut(j).copy_from_slice(&psi);
    }
    Ok(u)
}

/// Eigensystem of a Floquet operator.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// `epsilon_j = -arg(lambda_j)` in `(-pi, pi]`.
    pub quasienergies: Vec<f64>,
    /// Orthonormal eigenvectors, one per column.
    pub eigenvectors: CMat,
    /// Inverse participation ratio of each eigenvector over sites.
    pub ipr: Vec<f64>,
    /// Largest `|U v - lambda v|` over the eigenpairs.
    pub residual: f64,
}

impl SpectralData {
    pub fn n_sites(&self) -> usize {
        self.eigenvectors.nrows() / 2
    }

    /// `p_j(x) = |psi_j(x, 0)|^2 + |psi_j(x, 1)|^2`.
    pub fn site_probabilities(&self, j: usize) -> Vec<f64> {
        site_probabilities(&self.eigenvectors.column(j).into_owned())
    }
}

fn site_probabilities(v: &DVector<C64>) -> Vec<f64> {
    v.as_slice()
        .chunks_exact(2)
        .map(|c| c[0].norm_sqr() + c[1].norm_sqr())
        .collect()
}

fn hermitian_parts(u: &CMat) -> (CMat, CMat) {
    let ud = u.adjoint();
    let re = (u + &ud) * C64::from(0.5);
    let im = (u - &ud) * C64::new(0.0, -0.5);
    (re, im)
}

/// Rotates the columns of `basis` so that `basis^+ op basis` becomes diagonal,
/// returning the diagonal values.
fn diagonalize_within(basis: &CMat, op: &CMat) -> (CMat, Vec<f64>) {
    let reduced = basis.adjoint() * op * basis;
    let reduced = (&reduced + reduced.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(reduced);
    (
        basis * eig.eigenvectors,
        eig.eigenvalues.iter().copied().collect(),
    )
}

/// Splits sorted-by-value indices into runs whose neighbours are closer than `CLUSTER_TOL`.
fn clusters(values: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match out.last_mut() {
            Some(run) if (values[i] - values[*run.last().unwrap()]).abs() < CLUSTER_TOL => {
                run.push(i)
            }
            _ => out.push(vec![i]),
        }
    }
    out
}

fn gather(v: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(v.nrows(), idx.len(), |r, c| v[(r, idx[c])])
}

/// Refines one cluster: first by the anti-Hermitian part (separates `+-epsilon`),
/// then, inside exact degeneracies, by a position operator so each vector is localised.
fn refine_cluster(basis: CMat, anti: &CMat, position: &CMat) -> CMat {
    let (rotated, values) = diagonalize_within(&basis, anti);
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(rotated.ncols());
    for run in clusters(&values) {
        let sub = gather(&rotated, &run);
        let sub = if run.len() > 1 {
            diagonalize_within(&sub, position).0
        } else {
            sub
        };
        cols.extend(sub.column_iter().map(|c| c.into_owned()));
    }
    CMat::from_columns(&cols)
}

/// Diagonal Hermitian operator `cos(2 pi x / N) + 0.37 sin(2 pi x / N)` on the ring.
fn ring_position(n_sites: usize) -> CMat {
    let diag = DVector::from_fn(2 * n_sites, |i, _| {
        let phase = TAU * (i / 2) as f64 / n_sites as f64;
        C64::from(phase.cos() + 0.37 * phase.sin())
    });
    CMat::from_diagonal(&diag)
}

/// Diagonalises a unitary through a Hermitian combination of its Hermitian and
/// anti-Hermitian parts, resolving near-degenerate clusters afterwards.
pub fn quasienergy_spectrum(u: &CMat) -> Result<SpectralData> {
    let dim = u.nrows();
    if dim == 0 || dim != u.ncols() || !dim.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "expected an even square matrix, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let unitarity = (u * u.adjoint() - CMat::identity(dim, dim)).camax();
    if unitarity.is_nan() || unitarity >= 1e-8 {
        return Err(Error::invalid(format!(
            "Floquet operator is not unitary (|UU^+ - I| = {unitarity:.2e})"
        )));
    }

    let (re, im) = hermitian_parts(u);
    // cos(eps) - c sin(eps) only coincides for eps, -eps - 2 atan(c); clusters catch the rest.
    let mixed = &re + &im * C64::from(0.577_350_269_189_625_8);
    let eig = SymmetricEigen::new(mixed);
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let position = ring_position(dim / 2);

    let mut columns: Vec<DVector<C64>> = Vec::with_capacity(dim);
    for run in clusters(&values) {
        let block = gather(&eig.eigenvectors, &run);
        let block = if run.len() > 1 {
            refine_cluster(block, &im, &position)
        } else {
            block
        };
        columns.extend(block.column_iter().map(|c| c.into_owned()));
    }

    let mut residual = 0.0_f64;
    let mut pairs: Vec<(f64, DVector<C64>)> = columns
        .into_iter()
        .map(|v| {
            let uv = u * &v;
            let lambda = v.dotc(&uv);
            residual = residual.max((uv - &v * lambda).camax());
            let mut eps = -lambda.arg();
            if eps <= -PI {
                eps += TAU;
            }
            (eps, v)
        })
        .collect();
    if residual.is_nan() || residual >= EIGEN_RESIDUAL_TOL {
        return Err(Error::Numerical {
            what: "unitary eigendecomposition",
            residual,
        });
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let quasienergies = pairs.iter().map(|(e, _)| *e).collect();
    let ipr = pairs
        .iter()
        .map(|(_, v)| site_probabilities(v).iter().map(|p| p * p).sum())
        .collect();
    let vectors: Vec<DVector<C64>> = pairs.into_iter().map(|(_, v)| v).collect();
    Ok(SpectralData {
        quasienergies,
        eigenvectors: CMat::from_columns(&vectors),
        ipr,
        residual,
    })
}

/// A localised eigenstate pinned to quasienergy `0` or `pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeState {
    pub index: usize,
    pub quasienergy: f64,
    pub ipr: f64,
    pub peak_site: usize,
}

/// Eigenstates with `min(|eps|, pi - |eps|) < e_tol` and `IPR > ipr_factor / N`.
pub fn find_edge_states(spectrum: &SpectralData, e_tol: f64, ipr_factor: f64) -> Vec<EdgeState> {
    let n = spectrum.n_sites() as f64;
    spectrum
        .quasienergies
        .iter()
        .zip(&spectrum.ipr)
        .enumerate()
        .filter(|(_, (&eps, &ipr))| fold_energy(eps) < e_tol && ipr > ipr_factor / n)
        .map(|(j, (&eps, &ipr))| {
            let p = spectrum.site_probabilities(j);
            let peak_site = p
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(x, _)| x)
                .unwrap_or(0);
            EdgeState {
                index: j,
                quasienergy: eps,
                ipr,
                peak_site,
            }
        })
        .collect()
}

fn fold_energy(eps: f64) -> f64 {
    let a = eps.abs();
    a.min(PI - a)
}

/// Reordered energies `min(|eps|, pi - |eps|)`: both `0` and `pi` states become ground states.
pub fn effective_gibbs_energies(quasienergies: &[f64]) -> Vec<f64> {
    quasienergies.iter().map(|&e| fold_energy(e)).collect()
}

/// `p(x) = Tr(e^{-H/T} |x><x|) / Z` over the folded spectrum.
pub fn thermal_position_distribution(
    spectrum: &SpectralData,
    temperature: f64,
) -> Result<Vec<f64>> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Domain(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    let energies = effective_gibbs_energies(&spectrum.quasienergies);
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies
        .iter()
        .map(|e| (-(e - e_min) / temperature).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let mut p = vec![0.0; spectrum.n_sites()];
    for (j, w) in weights.iter().enumerate() {
        let w = w / z;
        if w == 0.0 {
            continue;
        }
        for (px, q) in p.iter_mut().zip(spectrum.site_probabilities(j)) {
            *px += w * q;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{band_structure, WalkParameters};
    use std::f64::consts::FRAC_PI_4;

    fn wall_profile(n: usize) -> CoinProfile {
        CoinProfile::domain_wall(SymmetryClass::Bdi, 3.0 * FRAC_PI_4, FRAC_PI_4, n)
    }

    #[test]
    fn profile_assigns_wall_site_to_left() {
        let p = wall_profile(32);
        assert_eq!(p.wall, 16);
        assert_eq!(p.theta2_at(16), p.theta2_left);
        assert_eq!(p.theta2_at(17), p.theta2_right);
    }

    #[test]
    fn profile_validation() {
        let mut p = wall_profile(32);
        p.wall = 32;
        assert!(build_floquet(&p).is_err());
        assert!(build_floquet(&wall_profile(8)).is_err());
        let mut p = wall_profile(32);
        p.axis = Vector3::new(0.0, 0.5, 0.0);
        assert!(build_floquet(&p).is_err());
    }

    #[test]
    fn identity_coins_shift_coin_states_apart() {
        let mut p = CoinProfile::uniform(SymmetryClass::Bdi, 0.0, 16);
        p.theta1 = 0.0;
        let u = build_floquet(&p).unwrap();
        for x in 0..16 {
            let right = 2 * ((x + 1) % 16);
            let left = 2 * ((x + 15) % 16) + 1;
            assert_eq!(u[(right, 2 * x)], C64::from(1.0));
            assert_eq!(u[(left, 2 * x + 1)], C64::from(1.0));
            assert!((u.column(2 * x).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn floquet_is_unitary() {
        let u = build_floquet(&wall_profile(64)).unwrap();
        let err = (&u * u.adjoint() - CMat::identity(128, 128)).camax();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn identity_spectrum() {
        let spectrum = quasienergy_spectrum(&CMat::identity(32, 32)).unwrap();
        assert!(spectrum.quasienergies.iter().all(|e| e.abs() < 1e-15));
    }

    #[test]
    fn uniform_spectrum_matches_bands() {
        let n = 32;
        let spectrum = quasienergy_spectrum(
            &build_floquet(&CoinProfile::uniform(SymmetryClass::Bdi, 0.6, n)).unwrap(),
        )
        .unwrap();
        let band = band_structure(&WalkParameters::new(SymmetryClass::Bdi, 0.6), n).unwrap();
        let mut expected: Vec<f64> = band
            .samples
            .iter()
            .flat_map(|s| [s.energy, -s.energy])
            .map(|e| if e <= -PI { e + TAU } else { e })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in spectrum.quasienergies.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        // eigenvectors stay orthonormal
        let v = &spectrum.eigenvectors;
        let err = (v.adjoint() * v - CMat::identity(2 * n, 2 * n)).camax();
        assert!(err < 1e-8);
    }

    #[test]
    fn gapped_uniform_walk_has_no_edge_states() {
        let spectrum = quasienergy_spectrum(
            &build_floquet(&CoinProfile::uniform(SymmetryClass::Bdi, FRAC_PI_4, 64)).unwrap(),
        )
        .unwrap();
        assert!(spectrum
            .quasienergies
            .iter()
            .all(|e| fold_energy(*e) > 0.05));
        assert!(find_edge_states(&spectrum, 1e-4, 5.0).is_empty());
    }

    #[test]
    fn wall_binds_zero_modes() {
        let n = 128;
        let spectrum = quasienergy_spectrum(&build_floquet(&wall_profile(n)).unwrap()).unwrap();
        let edges = find_edge_states(&spectrum, 1e-4, 5.0);
        assert!(edges.len() >= 2, "{edges:?}");
        for e in &edges {
            let near_wall = e.peak_site.abs_diff(n / 2) <= 2;
            let near_seam = e.peak_site <= 2 || e.peak_site >= n - 3;
            assert!(near_wall || near_seam, "{e:?}");
        }
        let normalisation: f64 = spectrum.site_probabilities(edges[0].index).iter().sum();
        assert!((normalisation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn folded_energies() {
        let e = effective_gibbs_energies(&[0.0, PI, -PI / 2.0, PI / 2.0, -3.0]);
        assert_eq!(e[0], 0.0);
        assert!(e[1].abs() < 1e-15);
        assert!((e[2] - PI / 2.0).abs() < 1e-15);
        assert!((e[3] - PI / 2.0).abs() < 1e-15);
        assert!((e[4] - (PI - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn thermal_distribution_normalised_and_flat_at_high_t() {
        let spectrum = quasienergy_spectrum(&build_floquet(&wall_profile(64)).unwrap()).unwrap();
        for t in [0.05, 1.0, 1e6] {
            let p = thermal_position_distribution(&spectrum, t).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        let p = thermal_position_distribution(&spectrum, 1e6).unwrap();
        assert!(p.iter().all(|x| (x - 1.0 / 64.0).abs() < 1e-4));
        assert!(matches!(
            thermal_position_distribution(&spectrum, 0.0),
            Err(Error::Domain(_))
        ));
    }
}
