//! The quartic trapping potential V(x) = A x² + B x⁴ + C x, its double-well
//! geometry, and the closed-form bias/deformation-path design formulas.
//!
//! All quantities are dimensionless (ħ = M = 1, see [`crate::units`]).

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

/// Coefficients of the trapping potential at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    /// Quadratic coefficient.
    pub a: f64,
    /// Quartic coefficient.
    pub b: f64,
    /// Linear bias coefficient.
    pub c: f64,
}

impl PotentialParams {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.a * x2 + self.b * x2 * x2 + self.c * x
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        2.0 * self.a * x + 4.0 * self.b * x * x * x + self.c
    }

    pub fn is_double_well(&self) -> bool {
        self.a < 0.0 && self.b > 0.0
    }

    pub fn is_harmonic(&self) -> bool {
        self.a > 0.0 && self.b == 0.0
    }

    fn ensure_finite(&self) -> Result<()> {
        if self.a.is_finite() && self.b.is_finite() && self.c.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("potential coefficients"))
        }
    }

    fn require_double_well(&self) -> Result<()> {
        self.ensure_finite()?;
        if self.is_double_well() {
            Ok(())
        } else {
            Err(Error::Regime(format!(
                "double well requires A < 0 < B, got A = {}, B = {}",
                self.a, self.b
            )))
        }
    }
}

/// Closed-form small-bias geometry of a double well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellGeometry {
    pub x_minus: f64,
    pub x_plus: f64,
    /// Distance D between the minima.
    pub separation: f64,
    /// Effective frequency Ω of both wells.
    pub omega: f64,
    /// Energy offset ΔV = C·D between the wells.
    pub delta_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    DoubleWell(WellGeometry),
    /// A > 0, B = 0: a displaced harmonic trap.
    Harmonic { x_eq: f64, omega: f64 },
}

impl Geometry {
    pub fn double_well(&self) -> Option<&WellGeometry> {
        match self {
            Geometry::DoubleWell(g) => Some(g),
            Geometry::Harmonic { .. } => None,
        }
    }
}

pub fn geometry(p: &PotentialParams) -> Result<Geometry> {
    p.ensure_finite()?;
    if p.is_harmonic() {
        return Ok(Geometry::Harmonic { x_eq: -p.c / (2.0 * p.a), omega: (2.0 * p.a).sqrt() });
    }
    if p.b < 0.0 || (p.b == 0.0 && p.a <= 0.0) {
        return Err(Error::Regime(format!("unbounded potential: A = {}, B = {}", p.a, p.b)));
    }
    p.require_double_well()?;
    let half = (-p.a / (2.0 * p.b)).sqrt();
    let shift = p.c / (4.0 * p.a);
    let separation = (-2.0 * p.a / p.b).sqrt();
    Ok(Geometry::DoubleWell(WellGeometry {
        x_minus: -half + shift,
        x_plus: half + shift,
        separation,
        omega: 2.0 * (-p.a).sqrt(),
        delta_v: p.c * separation,
    }))
}

/// Outcome of the small-bias test |C| ≤ ratio_max · (4√2/3)·sqrt(−A³/B).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallBias {
    pub ratio: f64,
    pub pass: bool,
}

/// Default cutoff used to make "≪" concrete.
pub const DEFAULT_RATIO_MAX: f64 = 0.1;

pub fn small_bias_bound(p: &PotentialParams) -> Result<f64> {
    p.require_double_well()?;
    Ok(4.0 * std::f64::consts::SQRT_2 / 3.0 * (-p.a.powi(3) / p.b).sqrt())
}

pub fn small_bias_check(p: &PotentialParams, ratio_max: f64) -> Result<SmallBias> {
    let ratio = p.c.abs() / small_bias_bound(p)?;
    Ok(SmallBias { ratio, pass: ratio <= ratio_max })
}

/// Bias placing the upper-well ground state at global index `n`:
/// C = (n − 1/2)·Ω₀/D₀.
pub fn bias_for_target(n: usize, a0: f64, b0: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "target n = 0 needs no bias: the ground state is already the target".into(),
        ));
    }
    let g = geometry(&PotentialParams::new(a0, b0, 0.0))?;
    let g = g.double_well().expect("double-well regime checked");
    Ok((n as f64 - 0.5) * g.omega / g.separation)
}

/// Upper bound (4/3)·sqrt(−A₀³/B₀²) on the reachable Fock index.
pub fn max_target_bound(a0: f64, b0: f64) -> Result<f64> {
    PotentialParams::new(a0, b0, 0.0).require_double_well()?;
    Ok(4.0 / 3.0 * (-a0.powi(3) / (b0 * b0)).sqrt())
}

/// Inter-well energy offset in units of the local quantum, N_q = C·sqrt(1/(2B)).
pub fn quanta_number(p: &PotentialParams) -> Result<f64> {
    p.ensure_finite()?;
    if p.b <= 0.0 {
        return Err(Error::Regime(format!("quanta number needs B > 0, got {}", p.b)));
    }
    Ok(p.c * (0.5 / p.b).sqrt())
}

pub fn potential_on_grid(p: &PotentialParams, grid: &SpatialGrid) -> Vec<f64> {
    grid.nodes().map(|x| p.value(x)).collect()
}

/// Logistic function S(x) = 1/(1 + e^{−x}), evaluated without overflow.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// The one-parameter curve A ↦ (A, β(A), C) followed by a protocol.
///
/// β(A) = B₀·S[κ(A − ε)] with κ < 0, so β ≈ B₀ on the double-well side and
/// β → 0 once the quadratic term dominates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationPath {
    pub a0: f64,
    pub af: f64,
    pub b0: f64,
    pub kappa: f64,
    pub eps: f64,
    pub c: f64,
    pub n_target: usize,
}

impl DeformationPath {
    /// Multiplexing path: double well at `a0`, harmonic trap of the same
    /// frequency at `af`, sigmoid fully saturated at both ends.
    pub fn new(a0: f64, af: f64, b0: f64, kappa: f64, eps: f64, c: f64, n_target: usize) -> Result<Self> {
        let path = Self::custom(a0, af, b0, kappa, eps, c, n_target)?;
        if !(a0 < 0.0 && af > 0.0) {
            return Err(Error::InvalidParameter(format!("need A0 < 0 < Af, got {a0}, {af}")));
        }
        if ((af - 2.0 * a0.abs()) / af).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("need Af = 2|A0|, got A0 = {a0}, Af = {af}")));
        }
        if b0 <= 0.0 {
            return Err(Error::InvalidParameter(format!("need B0 > 0, got {b0}")));
        }
        let start = path.beta(a0);
        let end = path.beta(af);
        if !(start >= b0 * (1.0 - 1e-6) && start <= b0 && end <= b0 * 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "sigmoid not saturated at the boundaries: beta(A0) = {start:e}, beta(Af) = {end:e}"
            )));
        }
        Ok(path)
    }

    /// Any finite path with B₀ ≥ 0; no multiplexing boundary conditions.
    pub fn custom(a0: f64, af: f64, b0: f64, kappa: f64, eps: f64, c: f64, n_target: usize) -> Result<Self> {
        if ![a0, af, b0, kappa, eps, c].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("deformation path"));
        }
        if a0 == af {
            return Err(Error::InvalidParameter("path endpoints coincide".into()));
        }
        if b0 < 0.0 {
            return Err(Error::InvalidParameter(format!("B0 must be non-negative, got {b0}")));
        }
        Ok(Self { a0, af, b0, kappa, eps, c, n_target })
    }

    /// κ = 100/(A₀ − A_f), the steepness used by the reference presets.
    pub fn reference_kappa(a0: f64, af: f64) -> f64 {
        100.0 / (a0 - af)
    }

    #[inline]
    pub fn beta(&self, a: f64) -> f64 {
        self.b0 * logistic(self.kappa * (a - self.eps))
    }

    /// dβ/dA.
    #[inline]
    pub fn beta_prime(&self, a: f64) -> f64 {
        let s = logistic(self.kappa * (a - self.eps));
        self.b0 * self.kappa * s * (1.0 - s)
    }

    pub fn params_at(&self, a: f64) -> PotentialParams {
        PotentialParams::new(a, self.beta(a), self.c)
    }

    pub fn initial(&self) -> PotentialParams {
        self.params_at(self.a0)
    }

    pub fn final_params(&self) -> PotentialParams {
        self.params_at(self.af)
    }

    /// Largest small-oscillation frequency met along the path (at its ends
    /// for the quartic family).
    pub fn max_frequency(&self) -> f64 {
        let w = |a: f64| if a < 0.0 { 2.0 * (-a).sqrt() } else { (2.0 * a).sqrt() };
        w(self.a0).max(w(self.af))
    }
}
