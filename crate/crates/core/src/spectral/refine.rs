//! Block preconditioned Rayleigh–Ritz refinement (LOBPCG-style) of the lowest
//! eigenpairs of the Fourier-grid Hamiltonian, seeded and preconditioned by the
//! finite-difference tridiagonal Hamiltonian.

use nalgebra::{DMatrix, SymmetricEigen};

use super::tridiag::{axpy, dot, SymTridiagonal};
use crate::error::{Error, Result};
use crate::fourier::GridHamiltonian;

pub struct Refined {
    pub values: Vec<f64>,
    /// Unit Euclidean norm.
    pub vectors: Vec<Vec<f64>>,
}

pub struct RefineOptions {
    pub wanted: usize,
    pub tol: f64,
    pub max_iter: usize,
}

/// Orthonormalizes `cands` against `basis` (already orthonormal) and each
/// other, dropping vectors that become numerically dependent.
fn extend_orthonormal(basis: &mut Vec<Vec<f64>>, cands: Vec<Vec<f64>>) {
    for mut v in cands {
        let norm0 = dot(&v, &v).sqrt();
        if norm0 == 0.0 || !norm0.is_finite() {
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm0;
        }
        for _ in 0..2 {
            for b in basis.iter() {
                let d = dot(b, &v);
                axpy(-d, b, &mut v);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm < 1e-8 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        basis.push(v);
    }
}

fn combine(basis: &[Vec<f64>], coeffs: &DMatrix<f64>, col: usize, rows: std::ops::Range<usize>) -> Vec<f64> {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for r in rows {
        let c = coeffs[(r, col)];
        if c != 0.0 {
            axpy(c, &basis[r], &mut out);
        }
    }
    out
}

fn rayleigh_ritz(basis: &[Vec<f64>], hbasis: &[Vec<f64>]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let s = basis.len();
    let mut g = DMatrix::<f64>::zeros(s, s);
    for i in 0..s {
        for j in 0..=i {
            let v = 0.5 * (dot(&basis[i], &hbasis[j]) + dot(&basis[j], &hbasis[i]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g.symmetric_eigen()
}

fn sorted_order(values: &nalgebra::DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

pub fn refine(
    h: &GridHamiltonian,
    fd: &SymTridiagonal,
    seed_values: &[f64],
    seed: Vec<Vec<f64>>,
    opts: &RefineOptions,
) -> Result<Refined> {
    let m = seed.len();
    assert!(opts.wanted <= m);
    let spread = seed_values[m - 1] - seed_values[0];
    let shift = seed_values[0] - spread.max(1e-3) - 1e-6 * (1.0 + seed_values[0].abs());

    let mut x: Vec<Vec<f64>> = Vec::with_capacity(m);
    extend_orthonormal(&mut x, seed);
    if x.len() < m {
        return Err(Error::NoConvergence("seed vectors are linearly dependent".into()));
    }
    let mut hx = h.apply_block(&x);
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut theta = vec![0.0; m];

    // Rotate the seed into Ritz vectors of the target operator.
    {
        let eig = rayleigh_ritz(&x, &hx);
        let order = sorted_order(&eig.eigenvalues);
        let nx: Vec<Vec<f64>> = order.iter().map(|&c| combine(&x, &eig.eigenvectors, c, 0..m)).collect();
        let nhx: Vec<Vec<f64>> = order.iter().map(|&c| combine(&hx, &eig.eigenvectors, c, 0..m)).collect();
        for (t, &c) in theta.iter_mut().zip(&order) {
            *t = eig.eigenvalues[c];
        }
        x = nx;
        hx = nhx;
    }

    for _ in 0..opts.max_iter {
        let residuals: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut r = hx[i].clone();
                axpy(-theta[i], &x[i], &mut r);
                r
            })
            .collect();
        let worst = (0..opts.wanted)
            .map(|i| dot(&residuals[i], &residuals[i]).sqrt() / theta[i].abs().max(1.0))
            .fold(0.0, f64::max);
        if worst <= opts.tol {
            return Ok(Refined { values: theta[..opts.wanted].to_vec(), vectors: x[..opts.wanted].to_vec() });
        }

        let w: Vec<Vec<f64>> = residuals
            .into_iter()
            .map(|r| fd.solve_spd_shifted(shift, &r).unwrap_or(r))
            .collect();

        let mut basis = x.clone();
        extend_orthonormal(&mut basis, w.into_iter().chain(p.drain(..)).collect());
        let mut hbasis = hx.clone();
        hbasis.extend(h.apply_block(&basis[m..]));

        let eig = rayleigh_ritz(&basis, &hbasis);
        let order = sorted_order(&eig.eigenvalues);
        let s = basis.len();
        let mut nx = Vec::with_capacity(m);
        let mut nhx = Vec::with_capacity(m);
        let mut np = Vec::with_capacity(m);
        // X lies in the search space, so Ritz values cannot rise; a rise
        // means the projected eigenproblem was solved inaccurately.
        for (i, &c) in order.iter().take(opts.wanted).enumerate() {
            let rise = eig.eigenvalues[c] - theta[i];
            if rise > 1e-8 * theta[i].abs().max(1.0) {
                return Err(Error::NoConvergence(format!("Ritz value {i} rose by {rise:.3e} during refinement")));
            }
        }
        for (i, &c) in order.iter().take(m).enumerate() {
            theta[i] = eig.eigenvalues[c];
            nx.push(combine(&basis, &eig.eigenvectors, c, 0..s));
            nhx.push(combine(&hbasis, &eig.eigenvectors, c, 0..s));
            if s > m {
                np.push(combine(&basis, &eig.eigenvectors, c, m..s));
            }
        }
        x = nx;
        hx = nhx;
        p = np;
    }
    Err(Error::NoConvergence(format!("eigenpair refinement exceeded {} iterations", opts.max_iter)))
}
