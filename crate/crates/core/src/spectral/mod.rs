//! Stationary states of H(λ) = p²/2 + V(x; λ) on a uniform grid and the
//! matrix elements of dH/dλ that drive the adiabaticity integrands.
//!
//! Eigenpairs are seeded by the second-order finite-difference tridiagonal
//! Hamiltonian (bisection + inverse iteration) and then refined on the
//! Fourier-grid Hamiltonian, which is the operator the split-operator
//! propagator in [`crate::dynamics`] actually evolves with.

pub mod cache;
mod refine;
mod sweep;
pub mod tridiag;

pub use sweep::{sweep, SpectralSweep, SweepNode};

use crate::error::{Error, Result};
use crate::fourier::{FourierKinetic, GridHamiltonian};
use crate::grid::SpatialGrid;
use crate::model::{potential_on_grid, DeformationPath, PotentialParams};
use refine::{refine, RefineOptions};
use tridiag::SymTridiagonal;

/// Probability allowed in the boundary strips of a stationary state.
pub const CONFINEMENT_TOL: f64 = 1e-8;
/// Gaps below this are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;
const SIGN_THRESHOLD: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-10;

/// Lowest eigenpairs of H at one value of the control parameter.
#[derive(Debug, Clone)]
pub struct EigenSet {
    pub lambda: f64,
    pub grid: SpatialGrid,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Real grid functions with Σ ψ² dx = 1, first significant node positive.
    pub states: Vec<Vec<f64>>,
}

impl EigenSet {
    pub fn k(&self) -> usize {
        self.energies.len()
    }

    /// Signed ⟨n|op|m⟩ for a diagonal (position-space) operator.
    pub fn matrix_element(&self, op: &[f64], n: usize, m: usize) -> f64 {
        let (a, b) = (&self.states[n], &self.states[m]);
        a.iter().zip(op).zip(b).map(|((x, o), y)| x * o * y).sum::<f64>() * self.grid.dx()
    }

    pub fn overlap(&self, n: usize, m: usize) -> f64 {
        self.states[n].iter().zip(&self.states[m]).map(|(x, y)| x * y).sum::<f64>() * self.grid.dx()
    }
}

/// Grid, positions and kinetic operator reused across many eigensolves.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: SpatialGrid,
    positions: Vec<f64>,
    kinetic: FourierKinetic,
}

impl Discretization {
    pub fn new(grid: SpatialGrid) -> Self {
        Self { positions: grid.positions(), kinetic: FourierKinetic::new(&grid), grid }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn eigensolve(&self, p: &PotentialParams, k: usize) -> Result<EigenSet> {
        let n = self.grid.n_points;
        if k == 0 || k > n / 4 {
            return Err(Error::InvalidParameter(format!("need 1 <= k <= n_points/4 = {}, got {k}", n / 4)));
        }
        if !(p.a.is_finite() && p.b.is_finite() && p.c.is_finite()) {
            return Err(Error::NonFinite("potential coefficients"));
        }
        let dx = self.grid.dx();
        let potential = potential_on_grid(p, &self.grid);
        let fd = SymTridiagonal::finite_difference(&potential, dx);
        let block = (k + 3).min(n);
        let seed_values = fd.lowest_eigenvalues(block);
        let seed = fd.eigenvectors(&seed_values);
        let h = GridHamiltonian::new(self.kinetic.clone(), potential);
        let refined = refine(&h, &fd, &seed_values, seed, &RefineOptions { wanted: k, tol: RESIDUAL_TOL, max_iter: 500 })?;

        let scale = 1.0 / dx.sqrt();
        let mut states = refined.vectors;
        for (j, s) in states.iter_mut().enumerate() {
            for v in s.iter_mut() {
                *v *= scale;
            }
            if let Some(first) = s.iter().find(|v| v.abs() > SIGN_THRESHOLD) {
                if *first < 0.0 {
                    s.iter_mut().for_each(|v| *v = -*v);
                }
            }
            let mass = self.grid.boundary_mass(|i| s[i] * s[i]);
            if mass > CONFINEMENT_TOL {
                return Err(Error::GridTooSmall { state: j, mass });
            }
        }
        Ok(EigenSet { lambda: p.a, grid: self.grid, energies: refined.values, states })
    }

    /// Couplings of state `n` to its (up to four) nearest neighbors through
    /// dH/dA = x² + β′(A)·x⁴.
    pub fn neighbor_coupling(&self, eig: &EigenSet, path: &DeformationPath, n: usize) -> Result<NeighborCoupling> {
        let k = eig.k();
        if n >= k {
            return Err(Error::InvalidParameter(format!("target index {n} outside k = {k}")));
        }
        if n + 2 >= k {
            return Err(Error::InvalidParameter(format!("need k >= n + 3 = {}, got {k}", n + 3)));
        }
        let neighbors = neighbor_indices(n, k);
        let bp = path.beta_prime(eig.lambda);
        let op: Vec<f64> = self
            .positions
            .iter()
            .map(|&x| {
                let x2 = x * x;
                x2 + bp * x2 * x2
            })
            .collect();
        let mut couplings = Vec::with_capacity(neighbors.len());
        let mut gaps = Vec::with_capacity(neighbors.len());
        for &m in &neighbors {
            let gap = eig.energies[n] - eig.energies[m];
            if gap.abs() < DEGENERACY_TOL {
                return Err(Error::Degenerate { n, m, lambda: eig.lambda, gap });
            }
            couplings.push(eig.matrix_element(&op, n, m).abs());
            gaps.push(gap);
        }
        Ok(NeighborCoupling { n, neighbors, couplings, gaps })
    }
}

/// {n−2, n−1, n+1, n+2} ∩ [0, k−1].
pub fn neighbor_indices(n: usize, k: usize) -> Vec<usize> {
    [n.checked_sub(2), n.checked_sub(1), Some(n + 1), Some(n + 2)]
        .into_iter()
        .flatten()
        .filter(|&m| m < k)
        .collect()
}

/// Lowest `k` eigenpairs of H = −½ d²/dx² + V(x) on `grid`.
pub fn eigensolve(p: &PotentialParams, grid: &SpatialGrid, k: usize) -> Result<EigenSet> {
    Discretization::new(*grid).eigensolve(p, k)
}

/// |⟨n|dH/dλ|m⟩| and E_n − E_m for the nearest neighbors m of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborCoupling {
    pub n: usize,
    pub neighbors: Vec<usize>,
    pub couplings: Vec<f64>,
    pub gaps: Vec<f64>,
}

pub fn dh_dlambda_elements(eig: &EigenSet, path: &DeformationPath, n: usize) -> Result<NeighborCoupling> {
    Discretization::new(eig.grid).neighbor_coupling(eig, path, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    pub mean_x: f64,
    pub prob_right: f64,
}

pub fn localization(eig: &EigenSet, n: usize) -> Localization {
    let dx = eig.grid.dx();
    let mut mean_x = 0.0;
    let mut prob_right = 0.0;
    for (x, &v) in eig.grid.nodes().zip(&eig.states[n]) {
        let d = v * v;
        mean_x += x * d;
        if x > 0.0 {
            prob_right += d;
        }
    }
    Localization { mean_x: mean_x * dx, prob_right: prob_right * dx }
}
