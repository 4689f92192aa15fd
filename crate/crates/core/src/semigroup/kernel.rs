//! 1D and 2D kernel matrices and their applications.

use super::{a_of, require_positive_time, Alpha1D, AlphaPair};
use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::grid::Axis1D;
use ndarray::{Array1, Array2};

/// Midpoint-rule matrix of `e^{t𝓛_α}` on a cell-centered axis:
/// `M[i, j] = h (4πa)^{-1/2} exp(-(x_i - x_j e^{-αt/2})² / (4a))`.
pub(crate) fn propagator_matrix(axis: &Axis1D, alpha: f64, t: f64) -> Array2<f64> {
    let a = a_of(alpha, t);
    let dil = (-alpha * t / 2.0).exp();
    let norm = axis.spacing() / (4.0 * std::f64::consts::PI * a).sqrt();
    let nodes: Vec<f64> = axis.nodes().collect();
    Array2::from_shape_fn((axis.len(), axis.len()), |(i, j)| {
        let d = nodes[i] - nodes[j] * dil;
        norm * (-d * d / (4.0 * a)).exp()
    })
}

/// Matrix of `e^{t𝓛_α} ∂_x`, with the derivative moved onto the kernel
/// by parts (fields decay inside the transverse box).
pub(crate) fn propagator_deriv_matrix(axis: &Axis1D, alpha: f64, t: f64) -> Array2<f64> {
    let a = a_of(alpha, t);
    let dil = (-alpha * t / 2.0).exp();
    let norm = axis.spacing() / (4.0 * std::f64::consts::PI * a).sqrt();
    let nodes: Vec<f64> = axis.nodes().collect();
    Array2::from_shape_fn((axis.len(), axis.len()), |(i, j)| {
        let d = nodes[i] - nodes[j] * dil;
        -norm * dil * d / (2.0 * a) * (-d * d / (4.0 * a)).exp()
    })
}

/// Apply the 1D propagator to a sampled profile.
pub fn apply_sg_1d(alpha: Alpha1D, t: f64, axis: &Axis1D, profile: &[f64]) -> Result<Vec<f64>> {
    require_positive_time(t)?;
    if profile.len() != axis.len() {
        return Err(Error::GridMismatch(format!(
            "profile has {} samples, axis has {}",
            profile.len(),
            axis.len()
        )));
    }
    if !profile.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let m = propagator_matrix(axis, alpha.get(), t);
    let f = Array1::from_iter(profile.iter().copied());
    Ok(m.dot(&f).to_vec())
}

/// Cached pair of 1D kernel matrices for one `(α₁, α₂, t)`.
#[derive(Debug, Clone)]
pub struct Propagator2D {
    m1: Array2<f64>,
    m2: Array2<f64>,
}

impl Propagator2D {
    pub fn new(axis: &Axis1D, pair: AlphaPair, t: f64) -> Result<Self> {
        require_positive_time(t)?;
        Ok(Propagator2D {
            m1: propagator_matrix(axis, pair.alpha1(), t),
            m2: propagator_matrix(axis, pair.alpha2(), t),
        })
    }

    /// Tensor-product application along both transverse axes.
    pub fn apply(&self, f: &Field2D) -> Field2D {
        let out = self.apply_values(f.values().view());
        Field2D::from_values_unchecked(*f.grid(), out)
    }

    pub(crate) fn apply_values(&self, v: ndarray::ArrayView2<'_, f64>) -> Array2<f64> {
        self.m1.dot(&v).dot(&self.m2.t())
    }
}

/// `e^{t L_{α₁,α₂}} f` by tensor-product kernel application.
pub fn apply_sg_2d(pair: AlphaPair, t: f64, f: &Field2D) -> Result<Field2D> {
    Ok(Propagator2D::new(f.grid().axis(), pair, t)?.apply(f))
}

/// `e^{t L_{α₁,α₂}} (∂₁ g1 + ∂₂ g2)` with the derivatives acting on the
/// analytic kernel; the output is mean-free in the continuum.
pub fn apply_sg_2d_div(pair: AlphaPair, t: f64, g1: &Field2D, g2: &Field2D) -> Result<Field2D> {
    require_positive_time(t)?;
    if g1.grid() != g2.grid() {
        return Err(Error::GridMismatch(
            "divergence components live on different grids".into(),
        ));
    }
    let axis = g1.grid().axis();
    let m1 = propagator_matrix(axis, pair.alpha1(), t);
    let m2 = propagator_matrix(axis, pair.alpha2(), t);
    let m1d = propagator_deriv_matrix(axis, pair.alpha1(), t);
    let m2d = propagator_deriv_matrix(axis, pair.alpha2(), t);
    let out = m1d.dot(g1.values()).dot(&m2.t()) + m1.dot(g2.values()).dot(&m2d.t());
    Ok(Field2D::from_values_unchecked(*g1.grid(), out))
}

/// Weighted 1D norm `(Σ (1+x²)^m f² h)^{1/2}`.
pub fn weighted_norm_1d(axis: &Axis1D, f: &[f64], m: f64) -> f64 {
    let mut sum = 0.0;
    for (x, v) in axis.nodes().zip(f.iter()) {
        sum += (1.0 + x * x).powf(m) * v * v;
    }
    (sum * axis.spacing()).sqrt()
}

/// `n`-th eigenprofile of the 1D operator: `∂ⁿ_x e^{-αx²/4}`, the
/// Fokker-Planck-frame Hermite function with eigenvalue `-nα/2`.
pub fn hermite_profile(alpha: f64, n: usize, axis: &Axis1D) -> Vec<f64> {
    axis.nodes()
        .map(|x| {
            let g = (-alpha * x * x / 4.0).exp();
            match n {
                0 => g,
                1 => -(alpha * x / 2.0) * g,
                2 => (alpha * alpha * x * x / 4.0 - alpha / 2.0) * g,
                3 => (3.0 * alpha * alpha * x / 4.0 - alpha.powi(3) * x.powi(3) / 8.0) * g,
                _ => panic!("hermite_profile supports n <= 3"),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumCheck {
    pub n: usize,
    pub alpha: f64,
    pub fitted_rate: f64,
    pub expected_rate: f64,
}

impl SpectrumCheck {
    pub fn rel_error(&self) -> f64 {
        if self.expected_rate == 0.0 {
            self.fitted_rate.abs()
        } else {
            ((self.fitted_rate - self.expected_rate) / self.expected_rate).abs()
        }
    }
}

/// Propagate the `n`-th eigenprofile over a unit time and fit the decay
/// rate of its weighted norm; the contract is `rate ≈ nα/2`.
pub fn spectrum_check(alpha: Alpha1D, n: usize, axis: &Axis1D) -> Result<SpectrumCheck> {
    if n > 3 {
        return Err(Error::invalid("n", "spectrum check supports n in 0..=3"));
    }
    let f0 = hermite_profile(alpha.get(), n, axis);
    let norm0 = weighted_norm_1d(axis, &f0, 2.0);
    let times = [0.25, 0.5, 0.75, 1.0];
    // least-squares slope of ln ‖f(t)‖ against t, through the t = 0 point
    let mut pts = vec![(0.0, norm0.ln())];
    for &t in &times {
        let ft = apply_sg_1d(alpha, t, axis, &f0)?;
        pts.push((t, weighted_norm_1d(axis, &ft, 2.0).ln()));
    }
    let k = pts.len() as f64;
    let (st, sl): (f64, f64) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (stt, stl) = pts
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0 * p.0, acc.1 + p.0 * p.1));
    let slope = (k * stl - st * sl) / (k * stt - st * st);
    Ok(SpectrumCheck {
        n,
        alpha: alpha.get(),
        fitted_rate: -slope,
        expected_rate: n as f64 * alpha.get() / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use crate::vortex::GaussianProfile;
    use approx::assert_relative_eq;

    fn axis() -> Axis1D {
        Axis1D::new(12.0, 128).unwrap()
    }

    #[test]
    fn invariant_gaussian_is_fixed() {
        let ax = axis();
        let alpha = Alpha1D::new(1.3).unwrap();
        let f0: Vec<f64> = ax.nodes().map(|x| (-1.3 * x * x / 4.0).exp()).collect();
        for t in [0.05, 0.7, 3.0] {
            let ft = apply_sg_1d(alpha, t, &ax, &f0).unwrap();
            let err = ft
                .iter()
                .zip(&f0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "t = {t}: max deviation {err}");
        }
    }

    #[test]
    fn first_eigenmode_decays_at_half_alpha() {
        let ax = axis();
        let alpha = Alpha1D::new(1.0).unwrap();
        let f0 = hermite_profile(1.0, 1, &ax);
        let t = 0.8;
        let ft = apply_sg_1d(alpha, t, &ax, &f0).unwrap();
        let decay = (-t / 2.0).exp();
        for (a, b) in ft.iter().zip(&f0) {
            assert!((a - b * decay).abs() < 1e-10);
        }
    }

    #[test]
    fn mass_preserved_for_localized_profiles() {
        let ax = axis();
        let alpha = Alpha1D::new(0.5).unwrap();
        let f0: Vec<f64> = ax.nodes().map(|x| (-(x - 2.0) * (x - 2.0)).exp()).collect();
        let mass0: f64 = f0.iter().sum::<f64>() * ax.spacing();
        for t in [0.3, 1.0, 4.0] {
            let ft = apply_sg_1d(alpha, t, &ax, &f0).unwrap();
            let mass: f64 = ft.iter().sum::<f64>() * ax.spacing();
            assert_relative_eq!(mass, mass0, max_relative = 1e-11);
        }
    }

    #[test]
    fn zero_stays_zero_and_bad_time_rejected() {
        let ax = axis();
        let alpha = Alpha1D::new(1.0).unwrap();
        let z = vec![0.0; ax.len()];
        let out = apply_sg_1d(alpha, 1.0, &ax, &z).unwrap();
        assert!(out.iter().all(|v| *v == 0.0));
        assert!(apply_sg_1d(alpha, 0.0, &ax, &z).is_err());
        assert!(apply_sg_1d(alpha, -1.0, &ax, &z).is_err());
    }

    #[test]
    fn gaussian_profile_invariant_under_2d_semigroup() {
        let grid = Grid2D::new(12.0, 128).unwrap();
        let lambda = 0.5;
        let pair = AlphaPair::from_lambda(lambda).unwrap();
        let g = GaussianProfile::new(lambda).unwrap();
        let f = Field2D::from_fn(grid, |x1, x2| g.eval(x1, x2));
        for t in [0.2, 1.0, 5.0] {
            let ft = apply_sg_2d(pair, t, &f).unwrap();
            let drift = (&ft - &f).norm_l2m(2.0) / f.norm_l2m(2.0);
            assert!(drift < 1e-11, "t = {t}: relative drift {drift}");
        }
    }

    #[test]
    fn semigroup_law_2d() {
        let grid = Grid2D::new(12.0, 96).unwrap();
        let pair = AlphaPair::from_lambda(0.3).unwrap();
        let f = Field2D::from_fn(grid, |x1, x2| {
            (x1 - 0.7) * (-(x1 * x1 + 1.3 * x2 * x2) / 3.0).exp()
        });
        let one = apply_sg_2d(pair, 1.1, &f).unwrap();
        let two = apply_sg_2d(pair, 0.4, &apply_sg_2d(pair, 0.7, &f).unwrap()).unwrap();
        let err = (&one - &two).norm_l2m(2.0) / one.norm_l2m(2.0).max(1e-300);
        assert!(err < 1e-10, "semigroup law violated: {err}");
    }

    #[test]
    fn div_form_output_is_mean_free() {
        let grid = Grid2D::new(12.0, 96).unwrap();
        let pair = AlphaPair::from_lambda(0.5).unwrap();
        let g1 = Field2D::from_fn(grid, |x1, x2| (-(x1 * x1 + x2 * x2) / 2.0).exp());
        let g2 = Field2D::from_fn(grid, |x1, x2| x2 * (-(x1 * x1 + x2 * x2) / 3.0).exp());
        for t in [0.01, 0.1, 1.0] {
            let out = apply_sg_2d_div(pair, t, &g1, &g2).unwrap();
            assert!(
                out.integral().abs() < 1e-11 * out.norm_l2m(0.0).max(1e-300),
                "t = {t}"
            );
        }
        // zero in, zero out
        let z = Field2D::zeros(grid);
        let out = apply_sg_2d_div(pair, 0.5, &z, &z).unwrap();
        assert_eq!(out.norm_l2m(0.0), 0.0);
    }

    #[test]
    fn div_form_matches_differenced_data_at_moderate_time() {
        // for smooth data and t not too small, e^{tL}(∂₁g) computed via the
        // derivative kernel must agree with propagating a high-order FD of g
        let grid = Grid2D::new(12.0, 128).unwrap();
        let pair = AlphaPair::from_lambda(0.0).unwrap();
        let g = Field2D::from_fn(grid, |x1, x2| (-(x1 * x1 + x2 * x2) / 2.0).exp());
        let dg = crate::fd::diff4_2d(g.view(), 0, grid.spacing(), crate::fd::Ghost::Zero);
        let dg = Field2D::from_values(grid, dg).unwrap();
        let z = Field2D::zeros(grid);
        let a = apply_sg_2d_div(pair, 0.5, &g, &z).unwrap();
        let b = apply_sg_2d(pair, 0.5, &dg).unwrap();
        let rel = (&a - &b).norm_l2m(0.0) / a.norm_l2m(0.0);
        assert!(rel < 1e-6, "kernel-derivative vs data-derivative: {rel}");
    }

    #[test]
    fn spectrum_rates_match_eigenvalues() {
        let ax = axis();
        for (alpha, tol) in [(1.0, 1e-6), (1.5, 1e-6)] {
            let a = Alpha1D::new(alpha).unwrap();
            for n in 0..=3 {
                let chk = spectrum_check(a, n, &ax).unwrap();
                if n == 0 {
                    assert!(chk.fitted_rate.abs() < 1e-9);
                } else {
                    assert!(
                        chk.rel_error() < tol,
                        "alpha {alpha} n {n}: fitted {} expected {}",
                        chk.fitted_rate,
                        chk.expected_rate
                    );
                }
            }
        }
    }
}
