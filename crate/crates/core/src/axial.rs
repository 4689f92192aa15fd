//! The scalar axial mode: per-slice circulation excess `φ(x3, t)`.
//!
//! `φ` obeys the decoupled linear equation `∂_t φ + x3 ∂₃ φ = ∂₃² φ`
//! whose solution is an exact contracted Gaussian average; the same
//! operator is the axial factor of the 3D semigroup, so the closed
//! form reuses [`AxialPropagator`]. A finite-difference integrator
//! serves as an independent cross-check, and the Gauss-weighted axial
//! average of the initial profile gives the limiting circulation shift.

use crate::error::{Error, Result};
use crate::field::SlicedField3D;
use crate::grid::Axis1D;
use crate::semigroup::AxialPropagator;

/// Function of `x3` alone, clamped to its end values beyond the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialProfile {
    axis: Axis1D,
    values: Vec<f64>,
}

impl AxialProfile {
    pub fn new(axis: Axis1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != axis.len() {
            return Err(Error::GridMismatch(format!(
                "profile has {} samples, axis has {}",
                values.len(),
                axis.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(AxialProfile { axis, values })
    }

    pub fn from_fn(axis: Axis1D, f: impl Fn(f64) -> f64) -> Self {
        let values = axis.nodes().map(f).collect();
        AxialProfile { axis, values }
    }

    /// Per-slice circulation of an axial vorticity component:
    /// `φ(x3) = ∫ ω3(x⊥, x3) dx⊥`.
    pub fn from_slice_integrals(w3: &SlicedField3D) -> Self {
        AxialProfile {
            axis: *w3.grid().axial(),
            values: w3.slice_integrals(),
        }
    }

    pub fn axis(&self) -> &Axis1D {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `∂₃ φ` by fourth-order differences with clamped ghosts.
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.values.len();
        let h = self.axis.spacing();
        let at = |i: isize| -> f64 {
            let i = i.clamp(0, n as isize - 1) as usize;
            self.values[i]
        };
        (0..n as isize)
            .map(|i| (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h))
            .collect()
    }

    pub fn sup_derivative(&self) -> f64 {
        self.derivative().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Closed-form evolution `φ(x3, t) = (G_t * φ⁰)(x3 e^{-t})`, `G_t` the
/// Gaussian of variance `1 - e^{-2t}`; `t <= 0` returns the profile
/// unchanged.
pub fn phi_evolve_exact(phi0: &AxialProfile, t: f64) -> AxialProfile {
    if t <= 0.0 {
        return phi0.clone();
    }
    let prop = AxialPropagator::with_parameters(&phi0.axis, t, -(-2.0 * t).exp_m1());
    AxialProfile {
        axis: phi0.axis,
        values: prop.apply_profile(&phi0.values),
    }
}

/// Largest stable step of the explicit finite-difference integrator.
pub fn fd_stable_dt(axis: &Axis1D) -> f64 {
    let h = axis.spacing();
    0.4 * (h * h / 2.0).min(h / axis.half_width())
}

/// Independent finite-difference integration of
/// `∂_t φ + x3 ∂₃ φ = ∂₃² φ`: third-order upwind-biased advection,
/// fourth-order diffusion, Heun time stepping.
pub fn phi_evolve_fd(phi0: &AxialProfile, t: f64, dt: f64) -> Result<AxialProfile> {
    if t <= 0.0 {
        return Ok(phi0.clone());
    }
    let max_dt = fd_stable_dt(&phi0.axis) / 0.4;
    if !(dt > 0.0 && dt <= max_dt) {
        return Err(Error::invalid(
            "dt",
            format!("step {dt:.3e} violates the stability bound {max_dt:.3e}"),
        ));
    }
    let axis = phi0.axis;
    let n = axis.len();
    let h = axis.spacing();
    let nodes: Vec<f64> = axis.nodes().collect();
    let rhs = |phi: &[f64], out: &mut [f64]| {
        let at = |i: isize| -> f64 {
            let i = i.clamp(0, n as isize - 1) as usize;
            phi[i]
        };
        for i in 0..n as isize {
            let x = nodes[i as usize];
            // upwind side of the outflow advection field x3
            let adv = if x >= 0.0 {
                (2.0 * at(i + 1) + 3.0 * at(i) - 6.0 * at(i - 1) + at(i - 2)) / (6.0 * h)
            } else {
                (-2.0 * at(i - 1) - 3.0 * at(i) + 6.0 * at(i + 1) - at(i + 2)) / (6.0 * h)
            };
            let diff = (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1)
                - at(i + 2))
                / (12.0 * h * h);
            out[i as usize] = -x * adv + diff;
        }
    };
    let mut phi = phi0.values.clone();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let steps = (t / dt).ceil() as usize;
    let mut remaining = t;
    for _ in 0..steps {
        let step = dt.min(remaining);
        rhs(&phi, &mut k1);
        for i in 0..n {
            stage[i] = phi[i] + step * k1[i];
        }
        rhs(&stage, &mut k2);
        for i in 0..n {
            phi[i] += 0.5 * step * (k1[i] + k2[i]);
        }
        remaining -= step;
    }
    AxialProfile::new(axis, phi)
}

/// Sup norms of the evolved mode and the three closed-form bounds they
/// must satisfy.
#[derive(Debug, Clone, Copy)]
pub struct SupEstimates {
    pub sup_phi: f64,
    pub sup_dphi: f64,
    /// `‖φ(t)‖_∞ <= ‖φ⁰‖_∞`
    pub max_principle: bool,
    /// `‖∂₃φ(t)‖_∞ <= e^{-t} ‖∂₃φ⁰‖_∞`
    pub derivative_decay: bool,
    /// `‖∂₃φ(t)‖_∞ <= e^{-t} (1-e^{-2t})^{-1/2} ‖φ⁰‖_∞`
    pub smoothing_bound: bool,
}

pub fn sup_estimates(phi0: &AxialProfile, t: f64) -> Result<SupEstimates> {
    if !(t > 0.0) {
        return Err(Error::invalid("t", "estimates need positive time"));
    }
    let phi_t = phi_evolve_exact(phi0, t);
    let sup_phi = phi_t.sup();
    let sup_dphi = phi_t.sup_derivative();
    let slack = 1.0 + 1e-10;
    let c = -(-2.0 * t).exp_m1();
    Ok(SupEstimates {
        sup_phi,
        sup_dphi,
        max_principle: sup_phi <= phi0.sup() * slack + 1e-14,
        derivative_decay: sup_dphi <= (-t).exp() * phi0.sup_derivative() * slack + 1e-14,
        smoothing_bound: sup_dphi <= (-t).exp() / c.sqrt() * phi0.sup() * slack + 1e-14,
    })
}

/// Limiting circulation shift and whether the axial box certifies it.
#[derive(Debug, Clone, Copy)]
pub struct ShiftEstimate {
    pub delta_rho: f64,
    /// The Gauss weight needs `L3 >= 8` for the tails to be negligible.
    pub certified: bool,
}

/// `δρ = (2π)^{-1/2} ∫ e^{-x3²/2} φ⁰(x3) dx3`, midpoint quadrature plus
/// analytic clamped tails.
pub fn shift_delta_rho(phi0: &AxialProfile) -> ShiftEstimate {
    let axis = phi0.axis;
    let inv = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = 0.0;
    for (x, v) in axis.nodes().zip(phi0.values.iter()) {
        sum += (-x * x / 2.0).exp() * v;
    }
    sum *= axis.spacing() * inv;
    // clamped tails beyond the box: φ(±L) Φ(-L)
    let l = axis.half_width();
    let tail_mass = 0.5 * libm::erfc(l / std::f64::consts::SQRT_2);
    sum += tail_mass * (phi0.values[0] + phi0.values[axis.len() - 1]);
    ShiftEstimate {
        delta_rho: sum,
        certified: l >= 8.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn axis() -> Axis1D {
        Axis1D::new(8.0, 256).unwrap()
    }

    #[test]
    fn constants_are_invariant() {
        let phi = AxialProfile::from_fn(axis(), |_| 0.7);
        for t in [0.1, 1.0, 5.0] {
            let out = phi_evolve_exact(&phi, t);
            for v in out.values() {
                assert_relative_eq!(*v, 0.7, max_relative = 1e-12);
            }
        }
        // t <= 0 is the identity
        let out = phi_evolve_exact(&phi, 0.0);
        assert_eq!(out, phi);
    }

    #[test]
    fn linear_profile_contracts() {
        // φ⁰(x) = x evolves to x e^{-t}: the Gaussian average of an affine
        // profile is exact, up to clamping at the box ends
        let phi = AxialProfile::from_fn(axis(), |x| x);
        let t = 0.8;
        let out = phi_evolve_exact(&phi, t);
        let decay = (-t as f64).exp();
        for (x, v) in axis().nodes().zip(out.values()) {
            if x.abs() < 4.0 {
                assert_relative_eq!(*v, x * decay, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn odd_profiles_stay_odd() {
        let phi = AxialProfile::from_fn(axis(), |x| (x / 2.0).sin());
        let out = phi_evolve_exact(&phi, 0.6);
        let n = axis().len();
        for i in 0..n / 2 {
            let a = out.values()[i];
            let b = out.values()[n - 1 - i];
            assert!((a + b).abs() < 1e-11, "odd symmetry broken at {i}: {a} vs {b}");
        }
    }

    #[test]
    fn exact_semigroup_law() {
        let phi = AxialProfile::from_fn(axis(), |x| (-x * x / 3.0).exp() + 0.1 * x.tanh());
        let a = phi_evolve_exact(&phi_evolve_exact(&phi, 0.5), 0.7);
        let b = phi_evolve_exact(&phi, 1.2);
        let err = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "semigroup law error {err:.3e}");
    }

    #[test]
    fn fd_oracle_agrees_with_closed_form() {
        let ax = Axis1D::new(8.0, 1024).unwrap();
        let phi = AxialProfile::from_fn(ax, |x| (-x * x).exp());
        let t = 1.0;
        let exact = phi_evolve_exact(&phi, t);
        let fd = phi_evolve_fd(&phi, t, fd_stable_dt(&ax)).unwrap();
        let err = exact
            .values()
            .iter()
            .zip(fd.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "oracle disagreement {err:.3e}");
    }

    #[test]
    fn fd_rejects_unstable_step() {
        let phi = AxialProfile::from_fn(axis(), |x| x.cos());
        assert!(phi_evolve_fd(&phi, 1.0, 1.0).is_err());
    }

    #[test]
    fn maximum_principle_and_derivative_bounds() {
        let phi = AxialProfile::from_fn(axis(), |x| x.sin());
        for t in [0.5, 1.0, 2.0] {
            let est = sup_estimates(&phi, t).unwrap();
            assert!(est.max_principle, "max principle failed at t = {t}");
            assert!(est.derivative_decay, "derivative decay failed at t = {t}");
            assert!(est.smoothing_bound, "smoothing bound failed at t = {t}");
        }
        // constants: sup φ = |c|, sup ∂₃φ = 0
        let c = AxialProfile::from_fn(axis(), |_| -0.3);
        let est = sup_estimates(&c, 1.0).unwrap();
        assert_relative_eq!(est.sup_phi, 0.3, max_relative = 1e-12);
        assert!(est.sup_dphi < 1e-12);
    }

    #[test]
    fn derivative_sup_decays_monotonically_late() {
        let phi = AxialProfile::from_fn(axis(), |x| (-x * x / 2.0).exp());
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let t = 1.0 + k as f64 * 0.5;
            let est = sup_estimates(&phi, t).unwrap();
            assert!(est.sup_dphi <= last * (1.0 + 1e-9), "not monotone at t = {t}");
            last = est.sup_dphi;
        }
    }

    #[test]
    fn shift_of_simple_profiles() {
        // constant → itself
        let c = AxialProfile::from_fn(axis(), |_| 0.42);
        assert_relative_eq!(shift_delta_rho(&c).delta_rho, 0.42, max_relative = 1e-12);
        // odd → zero
        let odd = AxialProfile::from_fn(axis(), |x| x.powi(3) * (-x * x / 4.0).exp());
        assert!(shift_delta_rho(&odd).delta_rho.abs() < 1e-14);
        // x² → second moment of the standard Gaussian = 1 (the clamped
        // extension of x² differs from x² only beyond |x| = 8, where the
        // weight is ~1e-15)
        let sq = AxialProfile::from_fn(axis(), |x| x * x);
        assert_relative_eq!(shift_delta_rho(&sq).delta_rho, 1.0, max_relative = 1e-9);
        // Gaussian bump: 0.02 e^{-x²} → 0.02/√3
        let bump = AxialProfile::from_fn(axis(), |x| 0.02 * (-x * x).exp());
        assert_relative_eq!(
            shift_delta_rho(&bump).delta_rho,
            0.02 / 3.0f64.sqrt(),
            max_relative = 1e-12
        );
        // short axis is flagged uncertified
        let short = AxialProfile::from_fn(Axis1D::new(4.0, 64).unwrap(), |_| 1.0);
        assert!(!shift_delta_rho(&short).certified);
    }

    #[test]
    fn pointwise_limit_is_the_shift_at_rate_one() {
        let phi = AxialProfile::from_fn(axis(), |x| 0.5 * (-(x - 0.5) * (x - 0.5)).exp());
        let shift = shift_delta_rho(&phi).delta_rho;
        // sup over |x3| <= 2 of |φ(t) - δρ| ~ e^{-t}; fit the rate on [2, 6]
        let mut pts = Vec::new();
        for k in 0..9 {
            let t = 2.0 + 0.5 * k as f64;
            let out = phi_evolve_exact(&phi, t);
            let dev = axis()
                .nodes()
                .zip(out.values())
                .filter(|(x, _)| x.abs() <= 2.0)
                .map(|(_, v)| (v - shift).abs())
                .fold(0.0, f64::max);
            pts.push((t, dev.ln()));
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(
            -slope >= 0.95,
            "fitted convergence rate {:.3} below 0.95",
            -slope
        );
    }
}
