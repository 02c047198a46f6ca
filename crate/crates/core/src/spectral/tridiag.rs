//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! lowest eigenvalues, inverse iteration for their vectors.

#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// off[i] couples rows i and i+1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    /// Second-order central-difference Hamiltonian −½ d²/dx² + V.
    pub fn finite_difference(potential: &[f64], dx: f64) -> Self {
        let k = 1.0 / (dx * dx);
        Self {
            diag: potential.iter().map(|v| v + k).collect(),
            off: vec![-0.5 * k; potential.len().saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            let r = left + right;
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = 0.0;
        for i in 0..self.len() {
            q = if i == 0 {
                self.diag[0] - x
            } else {
                let e = self.off[i - 1];
                self.diag[i] - x - e * e / q
            };
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `m` smallest eigenvalues, ascending, by bisection.
    pub fn lowest_eigenvalues(&self, m: usize) -> Vec<f64> {
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(1.0);
        let tol = 4.0 * f64::EPSILON * scale;
        let mut out = Vec::with_capacity(m);
        let mut lo_prev = glo;
        for j in 0..m.min(self.len()) {
            let (mut lo, mut hi) = (lo_prev, ghi);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let ev = 0.5 * (lo + hi);
            out.push(ev);
            lo_prev = lo;
        }
        out
    }

    /// Solves (T − shift·I) x = rhs by Gaussian elimination with partial
    /// pivoting. Returns `None` if the system is exactly singular.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        if n == 1 {
            let d = self.diag[0] - shift;
            return (d != 0.0).then(|| vec![rhs[0] / d]);
        }
        // Row i of U holds (u0, u1, u2) at columns i, i+1, i+2.
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut b = rhs.to_vec();
        let mut cur0 = self.diag[0] - shift;
        let mut cur1 = self.off[0];
        let mut cur2 = 0.0;
        for i in 0..n - 1 {
            let sub = self.off[i];
            let nd = self.diag[i + 1] - shift;
            let nu = if i + 1 < n - 1 { self.off[i + 1] } else { 0.0 };
            if cur0.abs() >= sub.abs() {
                if cur0 == 0.0 {
                    return None;
                }
                let l = sub / cur0;
                u0[i] = cur0;
                u1[i] = cur1;
                u2[i] = cur2;
                b[i + 1] -= l * b[i];
                cur0 = nd - l * cur1;
                cur1 = nu - l * cur2;
                cur2 = 0.0;
            } else {
                let l = cur0 / sub;
                u0[i] = sub;
                u1[i] = nd;
                u2[i] = nu;
                b.swap(i, i + 1);
                b[i + 1] -= l * b[i];
                cur0 = cur1 - l * nd;
                cur1 = cur2 - l * nu;
                cur2 = 0.0;
            }
        }
        if cur0 == 0.0 {
            return None;
        }
        u0[n - 1] = cur0;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * x[i + 2];
            }
            x[i] = s / u0[i];
        }
        Some(x)
    }

    /// Eigenvectors for ascending eigenvalues by inverse iteration, with
    /// reorthogonalization inside clusters of close eigenvalues.
    pub fn eigenvectors(&self, eigenvalues: &[f64]) -> Vec<Vec<f64>> {
        let n = self.len();
        let (glo, ghi) = self.gershgorin();
        let scale = (ghi - glo).max(1.0);
        let cluster_gap = 1e-7 * scale;
        let nudge = 16.0 * f64::EPSILON * scale;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
        let mut cluster_start = 0;
        for (j, &ev) in eigenvalues.iter().enumerate() {
            if j > 0 && ev - eigenvalues[j - 1] > cluster_gap {
                cluster_start = j;
            }
            // Deterministic, non-symmetric start vector with a different
            // pattern per index inside a cluster.
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 * 0.618_033_988_75 + j as f64 * 0.414_213_562_37).fract() - 0.5))
                .collect();
            normalize(&mut x);
            for _ in 0..4 {
                let mut y = match self.solve_shifted(ev + nudge, &x) {
                    Some(y) => y,
                    None => self.solve_shifted(ev + 2.0 * nudge, &x).expect("shift avoids exact singularity"),
                };
                for prev in &vectors[cluster_start..j] {
                    let d = dot(prev, &y);
                    axpy(-d, prev, &mut y);
                }
                normalize(&mut y);
                x = y;
            }
            vectors.push(x);
        }
        vectors
    }

    /// Solves (T − shift·I) x = rhs for a shift below the spectrum (SPD) by
    /// Cholesky. Returns `None` if the factorization breaks down.
    pub fn solve_spd_shifted(&self, shift: f64, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        let mut l = vec![0.0; n];
        let mut m = vec![0.0; n.saturating_sub(1)];
        let d0 = self.diag[0] - shift;
        if !(d0 > 0.0) {
            return None;
        }
        l[0] = d0.sqrt();
        for i in 0..n - 1 {
            m[i] = self.off[i] / l[i];
            let d = self.diag[i + 1] - shift - m[i] * m[i];
            if !(d > 0.0) {
                return None;
            }
            l[i + 1] = d.sqrt();
        }
        let mut y = vec![0.0; n];
        y[0] = rhs[0] / l[0];
        for i in 1..n {
            y[i] = (rhs[i] - m[i - 1] * y[i - 1]) / l[i];
        }
        for i in (0..n).rev() {
            let next = if i + 1 < n { m[i] * y[i + 1] } else { 0.0 };
            y[i] = (y[i] - next) / l[i];
        }
        Some(y)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        for xi in x.iter_mut() {
            *xi /= n;
        }
    }
    n
}
