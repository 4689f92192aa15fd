//! Truncated cell-centered grids.
//!
//! All fields live on boxes `[-L, L]` per axis with `n` cells of width
//! `h = 2L/n` and nodes at cell centers `x_i = -L + (i + 1/2) h`. There
//! is deliberately no node on the box boundary: integrals are midpoint
//! sums and the profiles of interest decay like Gaussians well inside
//! the default half-width.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One cell-centered axis: `n` nodes at `-L + (i + 1/2) h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis1D {
    half_width: f64,
    n: usize,
    h: f64,
}

impl Axis1D {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid("half_width", "must be finite and positive"));
        }
        if n == 0 {
            return Err(Error::invalid("n", "need at least one node"));
        }
        let h = 2.0 * half_width / n as f64;
        Ok(Axis1D { half_width, n, h })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Fractional node index of a point; node `i` sits at index `i`.
    pub fn frac_index(&self, x: f64) -> f64 {
        (x + self.half_width) / self.h - 0.5
    }
}

/// Square transverse grid for the `(x1, x2)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    axis: Axis1D,
}

impl Grid2D {
    pub fn new(l_perp: f64, n_perp: usize) -> Result<Self> {
        if n_perp < 16 || n_perp % 2 != 0 {
            return Err(Error::invalid(
                "n_perp",
                format!("must be even and >= 16, got {n_perp}"),
            ));
        }
        Ok(Grid2D {
            axis: Axis1D::new(l_perp, n_perp)?,
        })
    }

    pub fn axis(&self) -> &Axis1D {
        &self.axis
    }

    pub fn half_width(&self) -> f64 {
        self.axis.half_width()
    }

    pub fn n(&self) -> usize {
        self.axis.len()
    }

    pub fn spacing(&self) -> f64 {
        self.axis.spacing()
    }

    /// Midpoint-rule cell area.
    pub fn cell_area(&self) -> f64 {
        self.axis.spacing() * self.axis.spacing()
    }

    pub fn node(&self, i1: usize, i2: usize) -> (f64, f64) {
        (self.axis.node(i1), self.axis.node(i2))
    }
}

/// Transverse grid plus an axial `x3` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3D {
    transverse: Grid2D,
    axial: Axis1D,
}

impl Grid3D {
    pub fn new(transverse: Grid2D, l_3: f64, n_3: usize) -> Result<Self> {
        Ok(Grid3D {
            transverse,
            axial: Axis1D::new(l_3, n_3)?,
        })
    }

    pub fn transverse(&self) -> &Grid2D {
        &self.transverse
    }

    pub fn axial(&self) -> &Axis1D {
        &self.axial
    }

    pub fn n_slices(&self) -> usize {
        self.axial.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.transverse.cell_area() * self.axial.spacing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_centered_nodes() {
        let ax = Axis1D::new(12.0, 128).unwrap();
        assert_eq!(ax.spacing(), 24.0 / 128.0);
        assert!((ax.node(0) - (-12.0 + 0.5 * ax.spacing())).abs() < 1e-15);
        assert!((ax.node(127) - (12.0 - 0.5 * ax.spacing())).abs() < 1e-15);
        // no node on the boundary
        for x in ax.nodes() {
            assert!(x.abs() < 12.0);
        }
        // symmetry about the origin
        assert!((ax.node(0) + ax.node(127)).abs() < 1e-14);
    }

    #[test]
    fn frac_index_roundtrip() {
        let ax = Axis1D::new(8.0, 64).unwrap();
        for i in [0usize, 1, 31, 63] {
            let x = ax.node(i);
            assert!((ax.frac_index(x) - i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Axis1D::new(8.0, 0).is_err());
        assert!(Axis1D::new(-1.0, 16).is_err());
        assert!(Grid2D::new(12.0, 8).is_err());
        assert!(Grid2D::new(12.0, 17).is_err());
        // a single axial slice is allowed: it models x3-independent data
        assert!(Axis1D::new(8.0, 1).is_ok());
    }
}
