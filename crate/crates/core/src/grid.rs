use crate::error::{Error, Result};

/// Uniform spatial grid with nodes x_i = x_min + i·dx, i = 0..n_points−1,
/// dx = (x_max − x_min)/n_points (periodic convention, x_max itself excluded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

/// Fraction of the grid, at each end, treated as the boundary region.
pub const BOUNDARY_FRACTION: f64 = 0.05;

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::NonFinite("grid bounds"));
        }
        if x_min >= x_max {
            return Err(Error::InvalidParameter(format!("grid needs x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < 16 {
            return Err(Error::InvalidParameter(format!("grid needs at least 16 points, got {n_points}")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let dx = self.dx();
        (0..self.n_points).map(move |i| self.x_min + i as f64 * dx)
    }

    pub fn positions(&self) -> Vec<f64> {
        self.nodes().collect()
    }

    /// Number of nodes in each boundary strip.
    pub fn boundary_width(&self) -> usize {
        ((self.n_points as f64 * BOUNDARY_FRACTION).ceil() as usize).max(1)
    }

    /// Σ density_i · dx over both boundary strips.
    pub fn boundary_mass(&self, density: impl Fn(usize) -> f64) -> f64 {
        let w = self.boundary_width();
        let n = self.n_points;
        let s: f64 = (0..w).chain(n - w..n).map(density).sum();
        s * self.dx()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_spacing() {
        let g = SpatialGrid::new(-20.0, 20.0, 512).unwrap();
        assert_eq!(g.dx(), 40.0 / 512.0);
        assert_eq!(g.x(0), -20.0);
        assert_eq!(g.x(256), 0.0);
        assert_eq!(g.nodes().len(), 512);
        assert_eq!(g.boundary_width(), 26);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpatialGrid::new(1.0, 1.0, 64).is_err());
        assert!(SpatialGrid::new(-1.0, 1.0, 8).is_err());
        assert!(SpatialGrid::new(f64::NAN, 1.0, 64).is_err());
    }
}
