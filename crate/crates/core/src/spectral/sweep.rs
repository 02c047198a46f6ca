use rayon::prelude::*;

use super::{Discretization, NeighborCoupling};
use crate::error::Result;
use crate::model::DeformationPath;

/// Spectral data needed by the adiabaticity integrands at one λ.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepNode {
    pub lambda: f64,
    pub energies: Vec<f64>,
    pub coupling: NeighborCoupling,
}

/// Nodes of a λ-sweep for one target state, ascending in λ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSweep {
    pub n_target: usize,
    pub k: usize,
    pub nodes: Vec<SweepNode>,
}

/// Eigensolves `path` at every λ in `lambdas` (parallel map, input order kept).
pub fn sweep(disc: &Discretization, path: &DeformationPath, k: usize, n: usize, lambdas: &[f64]) -> Result<Vec<SweepNode>> {
    lambdas
        .par_iter()
        .map(|&lambda| {
            let eig = disc.eigensolve(&path.params_at(lambda), k)?;
            let coupling = disc.neighbor_coupling(&eig, path, n)?;
            Ok(SweepNode { lambda, energies: eig.energies, coupling })
        })
        .collect()
}
