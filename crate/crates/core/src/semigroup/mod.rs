//! Exact propagators of the drift-diffusion (Fokker-Planck) operators.
//!
//! The 1D operator `𝓛_α = ∂²_x + (α/2) x ∂_x + α/2` has the explicit
//! kernel representation
//!
//! ```text
//! (e^{t𝓛_α} f)(x) = (4π a)^{-1/2} ∫ exp(-(x - u e^{-αt/2})² / (4a)) f(u) du,
//! a(t) = (1 - e^{-αt}) / α,
//! ```
//!
//! obtained from the textbook form by substituting away the dilation of
//! the argument of `f`. The 2D propagator is the tensor product of two
//! 1D kernels with rates `(α₁, α₂)`; for the vortex problem
//! `(α₁, α₂) = (1 + λ, 1 - λ)`. The 3D propagator adds an axial
//! Gaussian average with contraction `x3 → x3 e^{-t}` and variance
//! `c(t) = 1 - e^{-2t}`.
//!
//! Derivative variants move the derivative onto the analytic kernel, so
//! their small-time operator norms follow the continuum estimates
//! instead of degrading with grid resolution. `t = 0` is the identity
//! and is never passed to kernel code.

mod axial;
mod kernel;
mod resolvent;

pub use axial::{apply_sg_3d, apply_sg_3d_div, AxialPropagator, Propagator3D};
pub use kernel::{
    apply_sg_1d, apply_sg_2d, apply_sg_2d_div, hermite_profile, spectrum_check, weighted_norm_1d,
    Propagator2D, SpectrumCheck,
};
pub use resolvent::{generator_2d, ResolventOutput, ResolventPlan};

use crate::error::{Error, Result};

/// Decay rate of the 1D operator; `alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha1D {
    alpha: f64,
}

impl Alpha1D {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be finite and positive"));
        }
        Ok(Alpha1D { alpha })
    }

    pub fn get(&self) -> f64 {
        self.alpha
    }
}

/// Rate pair of the 2D operator, `alpha1 >= alpha2 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPair {
    alpha1: f64,
    alpha2: f64,
}

impl AlphaPair {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha1.is_finite() && alpha2.is_finite() && alpha2 > 0.0 && alpha1 >= alpha2) {
            return Err(Error::invalid(
                "alpha",
                format!("need alpha1 >= alpha2 > 0, got ({alpha1}, {alpha2})"),
            ));
        }
        Ok(AlphaPair { alpha1, alpha2 })
    }

    /// Rates of the vortex problem: `(1 + λ, 1 - λ)`.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::invalid("lambda", "must lie in [0, 1)"));
        }
        AlphaPair::new(1.0 + lambda, 1.0 - lambda)
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }
}

/// Time-derived kernel quantities `a_i(t) = (1 - e^{-α_i t})/α_i` and
/// `c(t) = 1 - e^{-2t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupTime {
    pub t: f64,
    pub a1: f64,
    pub a2: f64,
    pub c: f64,
}

impl SemigroupTime {
    pub fn new(pair: AlphaPair, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid("t", "must be finite and non-negative"));
        }
        Ok(SemigroupTime {
            t,
            a1: a_of(pair.alpha1, t),
            a2: a_of(pair.alpha2, t),
            c: -(-2.0 * t).exp_m1(),
        })
    }
}

pub(crate) fn a_of(alpha: f64, t: f64) -> f64 {
    -(-alpha * t).exp_m1() / alpha
}

pub(crate) fn require_positive_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(
            "t",
            format!("propagator time must be positive, got {t}; use the identity at t = 0"),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_pair_validation() {
        assert!(AlphaPair::new(0.5, 1.0).is_err());
        assert!(AlphaPair::new(1.0, 0.0).is_err());
        assert!(AlphaPair::from_lambda(1.0).is_err());
        assert!(AlphaPair::from_lambda(-0.1).is_err());
        let p = AlphaPair::from_lambda(0.5).unwrap();
        assert_eq!((p.alpha1(), p.alpha2()), (1.5, 0.5));
    }

    #[test]
    fn time_quantities() {
        let p = AlphaPair::from_lambda(0.0).unwrap();
        let st = SemigroupTime::new(p, 1.0).unwrap();
        assert!((st.a1 - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((st.c - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        // a_i(t) ∈ [0, 1/alpha_i), c ∈ [0, 1)
        for t in [0.0, 0.1, 1.0, 10.0, 100.0] {
            let st = SemigroupTime::new(p, t).unwrap();
            assert!(st.a1 >= 0.0 && st.a1 < 1.0 / p.alpha1() + 1e-15);
            assert!(st.c >= 0.0 && st.c < 1.0 + 1e-15);
        }
    }
}
