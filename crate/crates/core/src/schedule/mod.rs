//! Time courses A(t) for the master control parameter.
//!
//! FAQUAD keeps the multilevel adiabaticity parameter
//! c = λ̇ · Σ_m |⟨n|∂H/∂λ|m⟩| / (E_n − E_m)² constant, the local adiabatic (LA)
//! variant drops the matrix elements and keeps only the gaps. Both reduce to
//! an integrand g(λ) with λ̇ = c/g, so t(λ) = (1/c)∫g dλ and c = ∫g dλ / t_f.

mod interp;
mod io;

pub use interp::MonotoneCubic;
pub use io::{read_schedule, write_schedule};

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::model::{DeformationPath, PotentialParams};
use crate::spectral::cache::{KeyHasher, SweepCache};
use crate::spectral::{sweep, Discretization, SpectralSweep, SweepNode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    Faquad,
    La,
    Linear,
    Reversed(Box<Method>),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Faquad => f.write_str("faquad"),
            Method::La => f.write_str("la"),
            Method::Linear => f.write_str("linear"),
            Method::Reversed(inner) => write!(f, "reversed({inner})"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "faquad" => Ok(Method::Faquad),
            "la" => Ok(Method::La),
            "linear" => Ok(Method::Linear),
            other => other
                .strip_prefix("reversed(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("unknown method '{s}'")))
                .and_then(|inner| Ok(Method::Reversed(Box::new(inner.parse()?)))),
        }
    }
}

/// Which integrand an [`AdiabaticityProfile`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Faquad,
    La,
}

impl ProfileKind {
    pub fn method(self) -> Method {
        match self {
            ProfileKind::Faquad => Method::Faquad,
            ProfileKind::La => Method::La,
        }
    }

    /// g(λ) at one sweep node.
    pub fn integrand(self, node: &SweepNode) -> f64 {
        let c = &node.coupling;
        match self {
            ProfileKind::Faquad => c.couplings.iter().zip(&c.gaps).map(|(m, g)| m / (g * g)).sum(),
            ProfileKind::La => c.gaps.iter().map(|g| 1.0 / (g * g)).sum(),
        }
    }
}

/// The integrand g(λ) on a λ-grid running from A₀ to A_f.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticityProfile {
    pub path: DeformationPath,
    pub kind: ProfileKind,
    pub lambda_grid: Vec<f64>,
    pub g_values: Vec<f64>,
}

impl AdiabaticityProfile {
    pub fn from_sweep(path: DeformationPath, kind: ProfileKind, nodes: &[SweepNode]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter("profile needs at least two nodes".into()));
        }
        let lambda_grid: Vec<f64> = nodes.iter().map(|n| n.lambda).collect();
        let g_values: Vec<f64> = nodes.iter().map(|n| kind.integrand(n)).collect();
        for (l, g) in lambda_grid.iter().zip(&g_values) {
            if !(g.is_finite() && *g > 0.0) {
                return Err(Error::FlatDirection(*l));
            }
        }
        Ok(Self { path, kind, lambda_grid, g_values })
    }

    /// ∫ g |dλ| by the trapezoid rule.
    pub fn integral(&self) -> f64 {
        self.cumulative().last().copied().unwrap_or(0.0)
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.g_values.len());
        let mut s = 0.0;
        acc.push(0.0);
        for j in 1..self.g_values.len() {
            s += 0.5 * (self.g_values[j] + self.g_values[j - 1]) * (self.lambda_grid[j] - self.lambda_grid[j - 1]).abs();
            acc.push(s);
        }
        acc
    }

    /// Index of the largest g (the slowest point of the ramp).
    pub fn argmax(&self) -> usize {
        (0..self.g_values.len()).max_by(|&a, &b| self.g_values[a].total_cmp(&self.g_values[b])).unwrap_or(0)
    }
}

/// λ_j uniform in [A₀, A_f] with exact endpoints.
pub fn uniform_lambda_grid(a0: f64, af: f64, nodes: usize) -> Vec<f64> {
    let last = nodes - 1;
    (0..nodes)
        .map(|j| match j {
            0 => a0,
            j if j == last => af,
            j => a0 + (af - a0) * j as f64 / last as f64,
        })
        .collect()
}

fn check_lambda_grid(path: &DeformationPath, lambda_grid: &[f64]) -> Result<()> {
    if lambda_grid.len() < 128 {
        return Err(Error::InvalidParameter(format!("lambda grid needs >= 128 nodes, got {}", lambda_grid.len())));
    }
    let asc = path.af > path.a0;
    let monotone = lambda_grid.windows(2).all(|w| if asc { w[1] > w[0] } else { w[1] < w[0] });
    if !monotone || lambda_grid[0] != path.a0 || *lambda_grid.last().unwrap() != path.af {
        return Err(Error::InvalidParameter("lambda grid must run monotonically from A0 to Af".into()));
    }
    Ok(())
}

fn profile_on_grid(path: &DeformationPath, grid: &SpatialGrid, n: usize, lambda_grid: &[f64], kind: ProfileKind) -> Result<AdiabaticityProfile> {
    check_lambda_grid(path, lambda_grid)?;
    let disc = Discretization::new(*grid);
    let nodes = sweep(&disc, path, n + 3, n, lambda_grid)?;
    AdiabaticityProfile::from_sweep(*path, kind, &nodes)
}

/// FAQUAD integrand Σ_m |⟨n|∂H/∂A|m⟩|/(E_n − E_m)² over the four nearest
/// neighbors of `n`, at every node of `lambda_grid`.
pub fn faquad_profile(path: &DeformationPath, grid: &SpatialGrid, n: usize, lambda_grid: &[f64]) -> Result<AdiabaticityProfile> {
    profile_on_grid(path, grid, n, lambda_grid, ProfileKind::Faquad)
}

/// Local-adiabatic integrand Σ_m (E_n − E_m)⁻².
pub fn la_profile(path: &DeformationPath, grid: &SpatialGrid, n: usize, lambda_grid: &[f64]) -> Result<AdiabaticityProfile> {
    profile_on_grid(path, grid, n, lambda_grid, ProfileKind::La)
}

/// Controls for the adaptive λ-grid used by [`design_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub initial_nodes: usize,
    /// Allowed relative deviation of the midpoint integrand from the
    /// trapezoid average on every interval.
    pub tolerance: f64,
    pub max_rounds: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { initial_nodes: 1024, tolerance: 0.005, max_rounds: 12 }
    }
}

/// Relative deviation 2·g_mid/(g_l + g_r) − 1 of one interval.
pub fn midpoint_deviation(g_left: f64, g_mid: f64, g_right: f64) -> f64 {
    2.0 * g_mid / (g_left + g_right) - 1.0
}

fn sweep_key(path: &DeformationPath, grid: &SpatialGrid, k: usize, opts: &DesignOptions) -> u64 {
    let mut h = KeyHasher::default();
    h.bytes(b"design-sweep");
    h.bytes(env!("CARGO_PKG_VERSION").as_bytes());
    for v in [path.a0, path.af, path.b0, path.kappa, path.eps, path.c, grid.x_min, grid.x_max, opts.tolerance] {
        h.f64(v);
    }
    for v in [path.n_target, grid.n_points, k, opts.initial_nodes, opts.max_rounds] {
        h.u64(v as u64);
    }
    h.finish()
}

/// Spectral sweep for `path.n_target` on an adaptively refined λ-grid: an
/// interval is accepted once the integrand at its midpoint (FAQUAD and LA
/// alike) matches the trapezoid average within `opts.tolerance`; otherwise
/// the midpoint is inserted and both halves are checked again.
pub fn design_sweep(path: &DeformationPath, grid: &SpatialGrid, opts: &DesignOptions, cache: Option<&SweepCache>) -> Result<SpectralSweep> {
    let n = path.n_target;
    let k = n + 3;
    let key = sweep_key(path, grid, k, opts);
    if let Some(cache) = cache {
        if let Some(hit) = cache.load(key)? {
            return Ok(hit);
        }
    }
    if opts.initial_nodes < 2 {
        return Err(Error::InvalidParameter("need at least two initial nodes".into()));
    }
    let disc = Discretization::new(*grid);
    let lambdas = uniform_lambda_grid(path.a0, path.af, opts.initial_nodes);
    let mut nodes = sweep(&disc, path, k, n, &lambdas)?;
    // Intervals (by left node index into `nodes`) awaiting a midpoint check.
    let mut pending: Vec<usize> = (0..nodes.len() - 1).collect();
    let mut round = 0;
    while !pending.is_empty() {
        if round == opts.max_rounds {
            return Err(Error::NoConvergence(format!(
                "lambda grid still fails the {:.1}% integrand check on {} intervals after {} refinements",
                100.0 * opts.tolerance,
                pending.len(),
                opts.max_rounds
            )));
        }
        round += 1;
        let mids: Vec<f64> = pending.iter().map(|&i| 0.5 * (nodes[i].lambda + nodes[i + 1].lambda)).collect();
        let mid_nodes = sweep(&disc, path, k, n, &mids)?;
        let mut inserted = Vec::new();
        for (&i, mid) in pending.iter().zip(mid_nodes) {
            let bad = [ProfileKind::Faquad, ProfileKind::La].iter().any(|&kind| {
                let d = midpoint_deviation(kind.integrand(&nodes[i]), kind.integrand(&mid), kind.integrand(&nodes[i + 1]));
                !(d.abs() <= opts.tolerance)
            });
            if bad {
                inserted.push((i, mid));
            }
        }
        // Splice inserted midpoints in, tracking the new indices of both halves.
        let mut merged = Vec::with_capacity(nodes.len() + inserted.len());
        let mut next_pending = Vec::with_capacity(2 * inserted.len());
        let mut ins = inserted.into_iter().peekable();
        for (i, node) in nodes.into_iter().enumerate() {
            merged.push(node);
            if ins.peek().is_some_and(|(j, _)| *j == i) {
                let (_, mid) = ins.next().unwrap();
                next_pending.push(merged.len() - 1);
                merged.push(mid);
                next_pending.push(merged.len() - 1);
            }
        }
        nodes = merged;
        pending = next_pending;
    }
    let sweep = SpectralSweep { n_target: n, k, nodes };
    if let Some(cache) = cache {
        cache.store(key, &sweep)?;
    }
    Ok(sweep)
}

/// A designed time course A(t) on [0, t_f].
///
/// Samples are stored in forward orientation; a reversed schedule keeps the
/// same samples and reads them mirrored, so reversal is an exact involution.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub path: DeformationPath,
    pub t_f: f64,
    pub method: Method,
    /// Realized adiabaticity constant (FAQUAD/LA only).
    pub c_value: Option<f64>,
    curve: MonotoneCubic,
    reversed: bool,
}

impl Schedule {
    /// Builds a schedule from (t, A) samples with t strictly increasing from
    /// 0 to t_f and A monotone.
    pub fn from_samples(path: DeformationPath, method: Method, c_value: Option<f64>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let t_f = *times.last().ok_or_else(|| Error::InvalidParameter("empty schedule".into()))?;
        if times[0] != 0.0 || !(t_f > 0.0) {
            return Err(Error::InvalidParameter("schedule must start at t = 0 and end at t_f > 0".into()));
        }
        let up = values.windows(2).all(|w| w[1] >= w[0]);
        let down = values.windows(2).all(|w| w[1] <= w[0]);
        if !(up || down) {
            return Err(Error::InvalidParameter("schedule values must be monotone".into()));
        }
        let curve = MonotoneCubic::new(times, values)?;
        Ok(Self { path, t_f, method, c_value, curve, reversed: false })
    }

    /// Control parameter at time `t` (clamped to [0, t_f]).
    pub fn a_at(&self, t: f64) -> f64 {
        if self.reversed {
            self.curve.eval(self.t_f - t)
        } else {
            self.curve.eval(t)
        }
    }

    /// dA/dt of the interpolant.
    pub fn rate_at(&self, t: f64) -> f64 {
        if self.reversed {
            -self.curve.derivative(self.t_f - t)
        } else {
            self.curve.derivative(t)
        }
    }

    pub fn params_at(&self, t: f64) -> PotentialParams {
        self.path.params_at(self.a_at(t))
    }

    pub fn start_a(&self) -> f64 {
        self.a_at(0.0)
    }

    pub fn end_a(&self) -> f64 {
        self.a_at(self.t_f)
    }

    /// (t, A) samples in time order.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        let pts = self.curve.xs().iter().copied().zip(self.curve.ys().iter().copied());
        if self.reversed {
            pts.rev().map(|(t, a)| (self.t_f - t, a)).collect()
        } else {
            pts.collect()
        }
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Largest small-oscillation frequency met by the schedule.
    pub fn max_frequency(&self) -> f64 {
        let w = |a: f64| if a < 0.0 { 2.0 * (-a).sqrt() } else { (2.0 * a).sqrt() };
        self.curve.ys().iter().map(|&a| w(a)).fold(0.0, f64::max)
    }
}

/// FAQUAD/LA schedule of duration `t_f`: t(λ_j) = t_f·G(λ_j)/G(A_f) with
/// G the cumulative trapezoid integral of g, and c = G(A_f)/t_f.
pub fn invert_profile(profile: &AdiabaticityProfile, t_f: f64) -> Result<Schedule> {
    if !(t_f > 0.0 && t_f.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_f must be positive, got {t_f}")));
    }
    let cum = profile.cumulative();
    let total = *cum.last().unwrap();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::FlatDirection(profile.lambda_grid[0]));
    }
    let last = cum.len() - 1;
    let times: Vec<f64> = cum.iter().enumerate().map(|(j, g)| if j == last { t_f } else { t_f * (g / total) }).collect();
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Interpolation("non-monotone t(lambda)".into()));
    }
    Schedule::from_samples(profile.path, profile.kind.method(), Some(total / t_f), times, profile.lambda_grid.clone())
}

/// A(t) = A₀ + (A_f − A₀)·t/t_f, β following the path.
pub fn linear_schedule(path: &DeformationPath, t_f: f64, n_samples: usize) -> Result<Schedule> {
    if !(t_f > 0.0 && t_f.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_f must be positive, got {t_f}")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("linear schedule needs >= 2 samples".into()));
    }
    let last = n_samples - 1;
    let times = (0..n_samples).map(|j| if j == last { t_f } else { t_f * j as f64 / last as f64 }).collect();
    let values = uniform_lambda_grid(path.a0, path.af, n_samples);
    Schedule::from_samples(*path, Method::Linear, None, times, values)
}

/// The time-reversed protocol A'(t) = A(t_f − t).
pub fn reverse(s: &Schedule) -> Schedule {
    let method = match &s.method {
        Method::Reversed(inner) => (**inner).clone(),
        other => Method::Reversed(Box::new(other.clone())),
    };
    Schedule { method, reversed: !s.reversed, ..s.clone() }
}
