//! Time-dependent Schrödinger propagation under a [`Schedule`] by Strang
//! splitting, and fidelities F = |⟨target|ψ⟩|.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::FourierKinetic;
use crate::grid::SpatialGrid;
use crate::schedule::Schedule;
use crate::spectral::EigenSet;

/// Norm drift tolerated at construction and during accepted runs.
pub const NORM_TOL: f64 = 1e-8;
/// Probability allowed in the boundary strips during propagation.
pub const REFLECTION_TOL: f64 = 1e-6;
/// Stability limit: dt ≤ DT_FACTOR / max(1, ω_max).
pub const DT_FACTOR: f64 = 0.02;
const CHECK_EVERY: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub grid: SpatialGrid,
    pub amplitudes: Vec<Complex64>,
}

impl Wavefunction {
    /// Wraps amplitudes that must already be normalized (Σ|ψ|²dx = 1 ± 1e−10).
    pub fn new(grid: SpatialGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points {
            return Err(Error::GridMismatch);
        }
        let psi = Self { grid, amplitudes };
        let norm = psi.norm();
        if !((norm - 1.0).abs() <= 1e-10) {
            return Err(Error::InvalidParameter(format!("wavefunction norm {norm} differs from 1")));
        }
        Ok(psi)
    }

    /// Normalizes arbitrary amplitudes.
    pub fn normalized(grid: SpatialGrid, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points {
            return Err(Error::GridMismatch);
        }
        let n = (amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter("cannot normalize a null wavefunction".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= n);
        Ok(Self { grid, amplitudes })
    }

    pub fn from_eigenstate(eig: &EigenSet, n: usize) -> Result<Self> {
        let s = eig.states.get(n).ok_or_else(|| Error::InvalidParameter(format!("eigenstate {n} not computed")))?;
        Self::new(eig.grid, s.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn mean_x(&self) -> f64 {
        self.grid.nodes().zip(&self.amplitudes).map(|(x, z)| x * z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn boundary_mass(&self) -> f64 {
        self.grid.boundary_mass(|i| self.amplitudes[i].norm_sqr())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Wavefunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: Complex64 = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.dx())
    }
}

/// |⟨target|ψ⟩|.
pub fn fidelity(psi: &Wavefunction, target: &Wavefunction) -> Result<f64> {
    Ok(target.inner(psi)?.norm().min(1.0))
}

/// Best fidelity to (|0⟩ + e^{iφ}|n⟩)/√2 over φ, from the two component fidelities.
pub fn superposition_fidelity(f0: f64, fn_: f64) -> f64 {
    0.5 * (f0 + fn_)
}

#[derive(Debug, Clone)]
pub struct PropagationReport {
    pub final_state: Wavefunction,
    /// max |1 − norm| over checkpoints.
    pub norm_drift: f64,
    pub steps: usize,
    /// Step actually used: t_f / steps ≤ requested dt.
    pub dt: f64,
}

/// One trajectory sample handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub norm: f64,
    pub mean_x: f64,
    pub fidelity: Option<f64>,
}

/// CSV trajectory writer: `t,norm,mean_x,fidelity` every `every` steps.
pub struct TrajectoryDump<'a, W: Write> {
    pub every: usize,
    pub target: Option<&'a Wavefunction>,
    pub out: W,
}

impl<W: Write> TrajectoryDump<'_, W> {
    fn header(&mut self) -> Result<()> {
        writeln!(self.out, "t,norm,mean_x,fidelity")?;
        Ok(())
    }

    fn record(&mut self, p: &TrajectoryPoint) -> Result<()> {
        match p.fidelity {
            Some(f) => writeln!(self.out, "{:.12e},{:.12e},{:.12e},{:.12e}", p.t, p.norm, p.mean_x, f)?,
            None => writeln!(self.out, "{:.12e},{:.12e},{:.12e},", p.t, p.norm, p.mean_x)?,
        }
        Ok(())
    }
}

/// Largest step allowed for a schedule.
pub fn max_step(s: &Schedule) -> f64 {
    DT_FACTOR / s.max_frequency().max(1.0)
}

/// Propagates `psi0` over [0, t_f] of `s` with steps of at most `dt`.
///
/// Each step is K(h/2)·exp(−i·h·V(t + h/2))·K(h/2) with the kinetic factor
/// applied in momentum space. The run uses ⌈t_f/dt⌉ equal steps, so the step
/// sequence of a reversed schedule is the exact mirror image.
pub fn propagate(psi0: &Wavefunction, s: &Schedule, dt: f64) -> Result<PropagationReport> {
    run(psi0, s, dt, 0, |_, _| Ok(()))
}

/// [`propagate`] with a CSV trajectory dump.
pub fn propagate_with_dump<W: Write>(psi0: &Wavefunction, s: &Schedule, dt: f64, dump: &mut TrajectoryDump<'_, W>) -> Result<PropagationReport> {
    if dump.every == 0 {
        return Err(Error::InvalidParameter("trajectory interval must be >= 1".into()));
    }
    dump.header()?;
    let target = dump.target;
    let every = dump.every;
    run(psi0, s, dt, every, |t, psi| {
        let point = TrajectoryPoint {
            t,
            norm: psi.norm(),
            mean_x: psi.mean_x(),
            fidelity: target.map(|tg| fidelity(psi, tg)).transpose()?,
        };
        dump.record(&point)
    })
}

fn run(psi0: &Wavefunction, s: &Schedule, dt: f64, every: usize, mut observe: impl FnMut(f64, &Wavefunction) -> Result<()>) -> Result<PropagationReport> {
    let limit = max_step(s);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let grid = psi0.grid;
    let n = grid.n_points;
    let steps = (s.t_f / dt).ceil().max(1.0) as usize;
    let h = s.t_f / steps as f64;

    let kinetic = FourierKinetic::new(&grid);
    let half: Vec<Complex64> = kinetic.energies().iter().map(|e| Complex64::cis(-0.5 * h * e)).collect();
    let full: Vec<Complex64> = half.iter().map(|z| z * z).collect();
    let xs = grid.positions();
    let x2: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let inv_n = 1.0 / n as f64;
    let dx = grid.dx();

    // `buf` holds the state in momentum space between steps, already advanced
    // by the leading half kinetic factor.
    let mut buf = psi0.amplitudes.clone();
    kinetic.forward(&mut buf);
    for (z, k) in buf.iter_mut().zip(&half) {
        *z *= k * inv_n;
    }
    let mut snapshot = psi0.clone();
    let mut norm_drift = (psi0.norm() - 1.0).abs();

    for j in 0..steps {
        let t_mid = (j as f64 + 0.5) * h;
        let p = s.params_at(t_mid);
        kinetic.inverse(&mut buf);
        for ((z, &x), &xx) in buf.iter_mut().zip(&xs).zip(&x2) {
            let v = xx * (p.a + p.b * xx) + p.c * x;
            *z *= Complex64::cis(-h * v);
        }
        kinetic.forward(&mut buf);
        let last = j + 1 == steps;
        let check = last || (j + 1) % CHECK_EVERY == 0 || (every > 0 && (j + 1) % every == 0);
        if check {
            // Completed state at t = (j+1)h.
            snapshot.amplitudes.clear();
            snapshot.amplitudes.extend(buf.iter().zip(&half).map(|(z, k)| z * k));
            kinetic.inverse(&mut snapshot.amplitudes);
            snapshot.amplitudes.iter_mut().for_each(|z| *z *= inv_n);
            let t = if last { s.t_f } else { (j + 1) as f64 * h };
            let norm = snapshot.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
            norm_drift = norm_drift.max((norm - 1.0).abs());
            if norm_drift > NORM_TOL {
                return Err(Error::Unstable(norm_drift));
            }
            let mass = snapshot.boundary_mass();
            if mass > REFLECTION_TOL {
                return Err(Error::Reflection { t, mass });
            }
            if every > 0 && ((j + 1) % every == 0 || last) {
                observe(t, &snapshot)?;
            }
        }
        if !last {
            for (z, k) in buf.iter_mut().zip(&full) {
                *z *= k * inv_n;
            }
        }
    }
    Ok(PropagationReport { final_state: snapshot, norm_drift, steps, dt: h })
}
