//! Fourier-grid kinetic operator T = −½ d²/dx², shared by the eigensolver and
//! the split-operator propagator.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::SpatialGrid;

#[derive(Clone)]
pub struct FourierKinetic {
    n: usize,
    /// k²/2 in FFT order.
    energies: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierKinetic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierKinetic").field("n", &self.n).finish()
    }
}

/// Angular wavenumbers of the FFT bins for `n` samples spaced `dx`.
pub fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * dx);
    (0..n)
        .map(|j| if j < n.div_ceil(2) { j as f64 * dk } else { (j as f64 - n as f64) * dk })
        .collect()
}

impl FourierKinetic {
    pub fn new(grid: &SpatialGrid) -> Self {
        let n = grid.n_points;
        let mut planner = FftPlanner::new();
        let energies = wavenumbers(n, grid.dx()).into_iter().map(|k| 0.5 * k * k).collect();
        Self { n, energies, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Kinetic energy k²/2 of each FFT bin.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Unnormalized inverse transform; callers divide by `len()`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    /// Applies T to two real vectors at once (packed as real and imaginary
    /// parts; the multiplier is real and even in k, so they do not mix).
    pub fn apply_pair(&self, u: &[f64], v: Option<&[f64]>, tu: &mut [f64], tv: Option<&mut [f64]>, buf: &mut Vec<Complex64>) {
        buf.clear();
        match v {
            Some(v) => buf.extend(u.iter().zip(v).map(|(&a, &b)| Complex64::new(a, b))),
            None => buf.extend(u.iter().map(|&a| Complex64::new(a, 0.0))),
        }
        self.forward.process(buf);
        let scale = 1.0 / self.n as f64;
        for (z, &e) in buf.iter_mut().zip(&self.energies) {
            *z *= e * scale;
        }
        self.inverse.process(buf);
        for (o, z) in tu.iter_mut().zip(buf.iter()) {
            *o = z.re;
        }
        if let Some(tv) = tv {
            for (o, z) in tv.iter_mut().zip(buf.iter()) {
                *o = z.im;
            }
        }
    }
}

/// Fourier-grid Hamiltonian H = T + V on real vectors.
#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    pub kinetic: FourierKinetic,
    pub potential: Vec<f64>,
}

impl GridHamiltonian {
    pub fn new(kinetic: FourierKinetic, potential: Vec<f64>) -> Self {
        assert_eq!(kinetic.len(), potential.len());
        Self { kinetic, potential }
    }

    /// out[j] = H·inputs[j].
    pub fn apply_block(&self, inputs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.potential.len();
        let mut out: Vec<Vec<f64>> = (0..inputs.len()).map(|_| vec![0.0; n]).collect();
        let mut buf = Vec::with_capacity(n);
        for (ins, outs) in inputs.chunks(2).zip(out.chunks_mut(2)) {
            match outs {
                [a, b] => self.kinetic.apply_pair(&ins[0], Some(&ins[1]), a, Some(b), &mut buf),
                [a] => self.kinetic.apply_pair(&ins[0], None, a, None, &mut buf),
                _ => unreachable!(),
            }
        }
        for (x, hx) in inputs.iter().zip(out.iter_mut()) {
            for ((h, &xi), &vi) in hx.iter_mut().zip(x).zip(&self.potential) {
                *h += vi * xi;
            }
        }
        out
    }
}
