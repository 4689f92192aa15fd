//! Weighted fields on truncated grids.
//!
//! `Field2D` models elements of the algebraically weighted space `L²(m)`
//! with weight `b(x)^m`, `b(x) = (1+x1²)^{1/2}(1+x2²)^{1/2}`; the norm is
//! a midpoint sum over the grid. `SlicedField3D` stacks transverse slices
//! over the axial axis and carries the `X²(m)` norm, i.e. the maximum of
//! the slice norms. Values are validated finite at construction and all
//! operations are pure.

use crate::error::{Error, Result};
use crate::grid::{Axis1D, Grid2D, Grid3D};
use ndarray::{Array2, Array3, ArrayView2, Zip};
use ndarray::parallel::prelude::*;

/// Weight `b(x⊥) = (1+x1²)^{1/2} (1+x2²)^{1/2} >= 1`.
pub fn weight_b(x1: f64, x2: f64) -> f64 {
    ((1.0 + x1 * x1) * (1.0 + x2 * x2)).sqrt()
}

/// Weight exponent `m` and integrability index `p` for the weighted norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub m: f64,
    pub p: f64,
}

impl WeightParams {
    pub fn new(m: f64, p: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::invalid("m", "weight exponent must be finite and >= 0"));
        }
        if !(p >= 1.0) {
            return Err(Error::invalid("p", "integrability index must be >= 1"));
        }
        Ok(WeightParams { m, p })
    }

    /// `m > 1/2`, needed for the embedding `L²(m) ⊂ L¹`.
    pub fn embeds_into_l1(&self) -> bool {
        self.m > 0.5
    }

    /// `m > 3/2`, needed for the exponential decay estimates.
    pub fn supports_decay_rates(&self) -> bool {
        self.m > 1.5
    }
}

fn axis_weight_pows(axis: &Axis1D, exponent: f64) -> Vec<f64> {
    axis.nodes().map(|x| (1.0 + x * x).powf(exponent)).collect()
}

/// Scalar field sampled on a transverse grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    values: Array2<f64>,
}

impl Field2D {
    pub fn zeros(grid: Grid2D) -> Self {
        let n = grid.n();
        Field2D {
            grid,
            values: Array2::zeros((n, n)),
        }
    }

    /// Sample `f(x1, x2)` at the cell centers.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let ax = *grid.axis();
        let values = Array2::from_shape_fn((n, n), |(i, j)| f(ax.node(i), ax.node(j)));
        Field2D { grid, values }
    }

    pub fn from_values(grid: Grid2D, values: Array2<f64>) -> Result<Self> {
        let n = grid.n();
        if values.dim() != (n, n) {
            return Err(Error::GridMismatch(format!(
                "expected {n}x{n} values, got {:?}",
                values.dim()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Field2D { grid, values })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub(crate) fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub(crate) fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Wrap raw values that are already known to be finite.
    pub(crate) fn from_values_unchecked(grid: Grid2D, values: Array2<f64>) -> Self {
        debug_assert_eq!(values.dim(), (grid.n(), grid.n()));
        Field2D { grid, values }
    }

    /// Midpoint transverse integral `h² Σ f`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.grid.cell_area()
    }

    /// `‖f‖_{L²(m)} = (Σ b^{2m} f² h²)^{1/2}`.
    pub fn norm_l2m(&self, m: f64) -> f64 {
        assert!(m >= 0.0, "weight exponent must be >= 0");
        let w = axis_weight_pows(self.grid.axis(), m);
        let mut sum = 0.0;
        for (i, row) in self.values.outer_iter().enumerate() {
            let wi = w[i] * w[i];
            let mut row_sum = 0.0;
            for (j, v) in row.iter().enumerate() {
                let bw = w[j] * v;
                row_sum += bw * bw;
            }
            sum += wi * row_sum;
        }
        (sum * self.grid.cell_area()).sqrt()
    }

    /// `‖f‖_{Lᵖ(m)} = (Σ (b^m |f|)^p h²)^{1/p}` for finite `p >= 1`.
    pub fn norm_lpm(&self, m: f64, p: f64) -> f64 {
        assert!(m >= 0.0, "weight exponent must be >= 0");
        assert!(p >= 1.0 && p.is_finite(), "p must be finite and >= 1");
        let w = axis_weight_pows(self.grid.axis(), m);
        let mut sum = 0.0;
        for (i, row) in self.values.outer_iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                sum += (w[i] * w[j] * v.abs()).powf(p);
            }
        }
        (sum * self.grid.cell_area()).powf(1.0 / p)
    }

    /// Grid analogue of the sup norm `‖b^m f‖_∞`.
    pub fn norm_linf_m(&self, m: f64) -> f64 {
        let w = axis_weight_pows(self.grid.axis(), m);
        let mut max = 0.0f64;
        for (i, row) in self.values.outer_iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                max = max.max((w[i] * w[j] * v).abs());
            }
        }
        max
    }

    /// Remove the mean along a caller-supplied unit-mass profile:
    /// `f - (∫f / ∫ref) ref`. The result has zero integral to round-off.
    pub fn project_zero_mean(&self, reference: &Field2D) -> Result<Field2D> {
        if self.grid != reference.grid {
            return Err(Error::GridMismatch(
                "projection reference lives on a different grid".into(),
            ));
        }
        let ref_mass = reference.integral();
        if ref_mass.abs() < 1e-12 {
            return Err(Error::invalid(
                "reference",
                format!("profile must have nonzero integral, got {ref_mass:.3e}"),
            ));
        }
        let c = self.integral() / ref_mass;
        let mut values = self.values.clone();
        Zip::from(&mut values)
            .and(&reference.values)
            .for_each(|v, &r| *v -= c * r);
        Ok(Field2D {
            grid: self.grid,
            values,
        })
    }

    pub fn scaled(&self, c: f64) -> Field2D {
        Field2D {
            grid: self.grid,
            values: &self.values * c,
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Field2D, c: f64) {
        assert_eq!(self.grid, other.grid, "field grids must match");
        Zip::from(&mut self.values)
            .and(&other.values)
            .for_each(|a, &b| *a += c * b);
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Add for &Field2D {
    type Output = Field2D;
    fn add(self, rhs: &Field2D) -> Field2D {
        assert_eq!(self.grid, rhs.grid, "field grids must match");
        Field2D {
            grid: self.grid,
            values: &self.values + &rhs.values,
        }
    }
}

impl std::ops::Sub for &Field2D {
    type Output = Field2D;
    fn sub(self, rhs: &Field2D) -> Field2D {
        assert_eq!(self.grid, rhs.grid, "field grids must match");
        Field2D {
            grid: self.grid,
            values: &self.values - &rhs.values,
        }
    }
}

/// Stack of transverse slices over the axial grid; the discrete model of
/// `X²(m) = C⁰_b(ℝ, L²(m))`. Slice `k` lives at the axial node `x3_k`;
/// beyond the axial box the field is understood as clamped to its end
/// slices (bounded, not decaying, in `x3`).
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedField3D {
    grid: Grid3D,
    /// Layout `(x3, x1, x2)`, row-major within a slice, slice-major overall.
    data: Array3<f64>,
}

impl SlicedField3D {
    pub fn zeros(grid: Grid3D) -> Self {
        let n = grid.transverse().n();
        SlicedField3D {
            grid,
            data: Array3::zeros((grid.n_slices(), n, n)),
        }
    }

    pub fn from_fn(grid: Grid3D, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Self {
        let n = grid.transverse().n();
        let ax = *grid.transverse().axis();
        let axial = *grid.axial();
        let mut data = Array3::zeros((grid.n_slices(), n, n));
        data.outer_iter_mut()
            .into_par_iter()
            .enumerate()
            .for_each(|(k, mut slice)| {
                let x3 = axial.node(k);
                for i in 0..n {
                    for j in 0..n {
                        slice[[i, j]] = f(ax.node(i), ax.node(j), x3);
                    }
                }
            });
        SlicedField3D { grid, data }
    }

    /// Stack explicit slices; all must share one transverse grid.
    pub fn from_slices(grid: Grid3D, slices: Vec<Field2D>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::invalid("slices", "slice list must not be empty"));
        }
        if slices.len() != grid.n_slices() {
            return Err(Error::GridMismatch(format!(
                "expected {} slices, got {}",
                grid.n_slices(),
                slices.len()
            )));
        }
        if slices.iter().any(|s| s.grid() != grid.transverse()) {
            return Err(Error::GridMismatch(
                "all slices must share the transverse grid".into(),
            ));
        }
        let n = grid.transverse().n();
        let mut data = Array3::zeros((slices.len(), n, n));
        for (k, s) in slices.iter().enumerate() {
            data.index_axis_mut(ndarray::Axis(0), k).assign(s.values());
        }
        Ok(SlicedField3D { grid, data })
    }

    pub fn from_data(grid: Grid3D, data: Array3<f64>) -> Result<Self> {
        let n = grid.transverse().n();
        if data.dim() != (grid.n_slices(), n, n) {
            return Err(Error::GridMismatch(format!(
                "expected ({}, {n}, {n}) data, got {:?}",
                grid.n_slices(),
                data.dim()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SlicedField3D { grid, data })
    }

    pub(crate) fn from_data_unchecked(grid: Grid3D, data: Array3<f64>) -> Self {
        debug_assert_eq!(
            data.dim(),
            (grid.n_slices(), grid.transverse().n(), grid.transverse().n())
        );
        SlicedField3D { grid, data }
    }

    pub fn grid(&self) -> &Grid3D {
        &self.grid
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn slice_view(&self, k: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(ndarray::Axis(0), k)
    }

    pub fn slice_field(&self, k: usize) -> Field2D {
        Field2D {
            grid: *self.grid.transverse(),
            values: self.slice_view(k).to_owned(),
        }
    }

    /// Transverse integral of every slice.
    pub fn slice_integrals(&self) -> Vec<f64> {
        let area = self.grid.transverse().cell_area();
        self.data
            .outer_iter()
            .map(|slice| slice.sum() * area)
            .collect()
    }

    /// `‖w‖_{X²(m)}`: maximum of the slice `L²(m)` norms.
    pub fn norm_x2m(&self, m: f64) -> f64 {
        self.slice_norms_l2m(m).into_iter().fold(0.0, f64::max)
    }

    /// Slice `L²(m)` norms, in axial order.
    pub fn slice_norms_l2m(&self, m: f64) -> Vec<f64> {
        assert!(m >= 0.0, "weight exponent must be >= 0");
        let w = axis_weight_pows(self.grid.transverse().axis(), m);
        let area = self.grid.transverse().cell_area();
        let norms: Vec<f64> = self
            .data
            .outer_iter()
            .into_par_iter()
            .map(|slice| {
                let mut sum = 0.0;
                for (i, row) in slice.outer_iter().enumerate() {
                    let wi = w[i] * w[i];
                    let mut row_sum = 0.0;
                    for (j, v) in row.iter().enumerate() {
                        let bw = w[j] * v;
                        row_sum += bw * bw;
                    }
                    sum += wi * row_sum;
                }
                (sum * area).sqrt()
            })
            .collect();
        norms
    }

    /// Project every slice onto zero transverse mean along `reference`.
    pub fn project_slices_zero_mean(&self, reference: &Field2D) -> Result<SlicedField3D> {
        if reference.grid() != self.grid.transverse() {
            return Err(Error::GridMismatch(
                "projection reference lives on a different grid".into(),
            ));
        }
        let ref_mass = reference.integral();
        if ref_mass.abs() < 1e-12 {
            return Err(Error::invalid(
                "reference",
                format!("profile must have nonzero integral, got {ref_mass:.3e}"),
            ));
        }
        let area = self.grid.transverse().cell_area();
        let mut data = self.data.clone();
        data.outer_iter_mut().into_par_iter().for_each(|mut slice| {
            let c = slice.sum() * area / ref_mass;
            Zip::from(&mut slice)
                .and(reference.values())
                .for_each(|v, &r| *v -= c * r);
        });
        Ok(SlicedField3D {
            grid: self.grid,
            data,
        })
    }

    pub fn scaled(&self, c: f64) -> SlicedField3D {
        SlicedField3D {
            grid: self.grid,
            data: &self.data * c,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vortex::GaussianProfile;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid() -> Grid2D {
        Grid2D::new(12.0, 128).unwrap()
    }

    fn gaussian_g0(grid: Grid2D) -> Field2D {
        let g = GaussianProfile::new(0.0).unwrap();
        Field2D::from_fn(grid, |x1, x2| g.eval(x1, x2))
    }

    #[test]
    fn weight_values() {
        assert_eq!(weight_b(0.0, 0.0), 1.0);
        assert_relative_eq!(weight_b(1.0, 0.0), 2.0f64.sqrt(), max_relative = 1e-14);
        // b(3,4) = sqrt(10 * 17) = sqrt(170)
        assert_relative_eq!(weight_b(3.0, 4.0), 170.0f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(weight_b(3.0, 4.0), 13.038404810405297, max_relative = 1e-12);
    }

    #[test]
    fn zero_field_norms() {
        let f = Field2D::zeros(grid());
        assert_eq!(f.norm_l2m(0.0), 0.0);
        assert_eq!(f.norm_l2m(2.0), 0.0);
        assert_eq!(f.norm_lpm(2.0, 1.0), 0.0);
        assert_eq!(f.integral(), 0.0);
    }

    #[test]
    fn gaussian_l2_norm_matches_closed_form() {
        // ∫ G_0² dx⊥ = 1/(8π), so ‖G_0‖_{L²} = 1/sqrt(8π) ≈ 0.199471
        let f = gaussian_g0(grid());
        let expected = 1.0 / (8.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(f.norm_l2m(0.0), expected, max_relative = 1e-10);
    }

    #[test]
    fn gaussian_weighted_norms_match_closed_form() {
        let f = gaussian_g0(grid());
        // ∫ b² G_0 dx⊥ = 9 exactly (Gaussian moments, verified symbolically)
        assert_relative_eq!(f.norm_lpm(2.0, 1.0), 9.0, max_relative = 1e-10);
        // ‖G_0‖_{L²(2)} = 3 sqrt(2) / (2 sqrt(π))
        let expected = 3.0 * 2.0f64.sqrt() / (2.0 * std::f64::consts::PI.sqrt());
        assert_relative_eq!(f.norm_l2m(2.0), expected, max_relative = 1e-10);
        // p = 2 path agrees with the dedicated L²(m) implementation
        assert_relative_eq!(f.norm_lpm(2.0, 2.0), f.norm_l2m(2.0), max_relative = 1e-12);
    }

    #[test]
    fn gaussian_mass_is_one() {
        let f = gaussian_g0(grid());
        assert_relative_eq!(f.integral(), 1.0, max_relative = 1e-12);
        // G_λ keeps unit mass for λ > 0
        let g = GaussianProfile::new(0.5).unwrap();
        let f = Field2D::from_fn(grid(), |x1, x2| g.eval(x1, x2));
        assert_relative_eq!(f.integral(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn odd_field_integrates_to_zero() {
        let f = Field2D::from_fn(grid(), |x1, x2| x1 * (-(x1 * x1 + x2 * x2)).exp());
        assert!(f.integral().abs() < 1e-14);
    }

    #[test]
    fn bump_outside_grid_truncates_to_zero() {
        let f = Field2D::from_fn(grid(), |x1, x2| {
            let r2 = (x1 - 40.0).powi(2) + x2 * x2;
            (-r2).exp()
        });
        assert!(f.norm_l2m(0.0) < 1e-200);
    }

    #[test]
    fn projection_removes_mean_and_is_idempotent() {
        let g0 = gaussian_g0(grid());
        let f = Field2D::from_fn(grid(), |x1, x2| (-(x1 * x1 + x2 * x2) / 3.0).exp());
        let p = f.project_zero_mean(&g0).unwrap();
        assert!(p.integral().abs() < 1e-13);
        let pp = p.project_zero_mean(&g0).unwrap();
        let diff = (&pp - &p).norm_l2m(0.0);
        assert!(diff < 1e-14 * p.norm_l2m(0.0).max(1.0));
        // projecting the reference itself gives zero
        let z = g0.project_zero_mean(&g0).unwrap();
        assert!(z.norm_l2m(2.0) < 1e-13);
        // linearity: project(2 G_0 + g) = g for mean-free g
        let mut h = p.scaled(1.0);
        h.add_scaled(&g0, 2.0);
        let back = h.project_zero_mean(&g0).unwrap();
        assert!((&back - &p).norm_l2m(0.0) < 1e-12);
    }

    #[test]
    fn projection_rejects_zero_mass_reference() {
        let odd = Field2D::from_fn(grid(), |x1, x2| x1 * (-(x1 * x1 + x2 * x2)).exp());
        let f = gaussian_g0(grid());
        assert!(f.project_zero_mean(&odd).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let n = grid().n();
        let mut values = Array2::zeros((n, n));
        values[[3, 4]] = f64::NAN;
        assert!(Field2D::from_values(grid(), values).is_err());
    }

    #[test]
    fn x2m_norm_is_max_over_slices() {
        let g2 = grid();
        let g3 = Grid3D::new(g2, 8.0, 16).unwrap();
        let g0 = gaussian_g0(g2);
        let mut slices = vec![Field2D::zeros(g2); 16];
        slices[3] = g0.scaled(1.0);
        slices[9] = g0.scaled(3.0);
        slices[12] = g0.scaled(2.0);
        let w = SlicedField3D::from_slices(g3, slices).unwrap();
        assert_relative_eq!(w.norm_x2m(0.0), 3.0 * g0.norm_l2m(0.0), max_relative = 1e-13);
        // all-zero stack
        let z = SlicedField3D::zeros(g3);
        assert_eq!(z.norm_x2m(2.0), 0.0);
    }

    #[test]
    fn norm_refinement_is_second_order() {
        // cell-centered midpoint rule: halving h changes the norm by O(h²)
        let exact = 1.0 / (8.0 * std::f64::consts::PI).sqrt();
        let mut errs = Vec::new();
        for n in [32usize, 64, 128] {
            let g = Grid2D::new(12.0, n).unwrap();
            let f = gaussian_g0(g);
            errs.push((f.norm_l2m(0.0) - exact).abs());
        }
        // error ratio approaches 4 per refinement until round-off takes over
        assert!(errs[0] / errs[1].max(1e-16) > 3.0);
    }

    proptest! {
        #[test]
        fn norm_monotone_in_weight(m1 in 0.0..3.0f64, dm in 0.0..2.0f64, cx in -4.0..4.0f64, s in 0.5..2.0f64) {
            let g = Grid2D::new(12.0, 32).unwrap();
            let f = Field2D::from_fn(g, |x1, x2| (-(s * (x1 - cx).powi(2) + x2 * x2) / 2.0).exp());
            let n1 = f.norm_l2m(m1);
            let n2 = f.norm_l2m(m1 + dm);
            prop_assert!(n2 >= n1 * (1.0 - 1e-12));
        }

        #[test]
        fn l1_embedding_constant(m in 0.6..2.5f64, cx in -3.0..3.0f64, cy in -3.0..3.0f64) {
            // ‖f‖_{L¹} <= C ‖f‖_{L²(m)} with C = discrete ‖b^{-m}‖_{L²}
            let g = Grid2D::new(12.0, 64).unwrap();
            let f = Field2D::from_fn(g, |x1, x2| {
                (-((x1 - cx).powi(2) + (x2 - cy).powi(2))).exp()
            });
            let b_minus_m = Field2D::from_fn(g, |x1, x2| weight_b(x1, x2).powf(-m));
            let c = b_minus_m.norm_l2m(0.0);
            let l1 = f.norm_lpm(0.0, 1.0);
            prop_assert!(l1 <= c * f.norm_l2m(m) * (1.0 + 1e-12));
        }
    }
}
