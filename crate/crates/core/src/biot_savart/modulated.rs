//! Velocity of a vortex whose circulation varies along the axis.

use super::{BiotSavart3D, Velocity3D};
use crate::error::{Error, Result};
use crate::field::SlicedField3D;
use crate::vortex::VortexFamily;
use ndarray::Array3;

/// Velocity of the modulated vortex `Ω(x⊥; rho + φ(x3))` together with
/// the slice-wise planar velocities it is compared against.
#[derive(Debug, Clone)]
pub struct ModulatedVelocity {
    /// The modulated vorticity profile the velocities belong to.
    pub vorticity: SlicedField3D,
    /// Velocity by the 3D law (the axial component vanishes).
    pub velocity: Velocity3D,
    /// Stack of planar vortex velocities at the per-slice circulation.
    pub slice_velocity: Velocity3D,
    /// Sup of the pointwise gap over the interior two-thirds of the box.
    pub sup_gap_interior: f64,
}

impl ModulatedVelocity {
    /// Pointwise magnitude of the gap between the two laws.
    pub fn gap_field(&self) -> Array3<f64> {
        let mut out = Array3::zeros(self.velocity.u[0].raw_dim());
        for comp in 0..3 {
            ndarray::Zip::from(&mut out)
                .and(&self.velocity.u[comp])
                .and(&self.slice_velocity.u[comp])
                .for_each(|o, &a, &b| {
                    let d = a - b;
                    *o += d * d;
                });
        }
        out.mapv_inplace(f64::sqrt);
        out
    }
}

/// Apply the 3D Biot-Savart law to the modulated vortex
/// `Ω(x⊥; rho + φ(x3))` built from the family's quadratic model, and
/// compare against the slice-frozen planar law. For constant `φ` the two
/// coincide identically (the axial kernel integral collapses).
pub fn modulated_vortex_velocity(
    bs: &mut BiotSavart3D,
    family: &VortexFamily,
    phi: &[f64],
) -> Result<ModulatedVelocity> {
    let grid = *bs.grid();
    if phi.len() != grid.n_slices() {
        return Err(Error::GridMismatch(format!(
            "phi has {} samples, grid has {} slices",
            phi.len(),
            grid.n_slices()
        )));
    }
    if family.grid() != grid.transverse() {
        return Err(Error::GridMismatch(
            "vortex family lives on a different transverse grid".into(),
        ));
    }
    let max_phi = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    family.check_shift(max_phi)?;

    let rho = family.rho();
    let n = grid.transverse().n();
    let n3 = grid.n_slices();
    let mut modulated = Array3::zeros((n3, n, n));
    let mut slice_vel = Velocity3D::zeros(grid);
    for (k, &p) in phi.iter().enumerate() {
        let omega_k = family.omega_at(rho + p);
        modulated
            .index_axis_mut(ndarray::Axis(0), k)
            .assign(omega_k.values());
        let v_k = family.velocity_at(rho + p);
        slice_vel.u[0]
            .index_axis_mut(ndarray::Axis(0), k)
            .assign(&v_k.u1);
        slice_vel.u[1]
            .index_axis_mut(ndarray::Axis(0), k)
            .assign(&v_k.u2);
    }
    let modulated = SlicedField3D::from_data_unchecked(grid, modulated);
    let velocity = bs.velocity_from_axial_vorticity(&modulated)?;

    // interior two-thirds sup of the gap
    let skip = n / 6;
    let skip3 = n3 / 6;
    let mut sup = 0.0f64;
    for k in skip3..n3 - skip3 {
        for i in skip..n - skip {
            for j in skip..n - skip {
                let d1 = velocity.u[0][[k, i, j]] - slice_vel.u[0][[k, i, j]];
                let d2 = velocity.u[1][[k, i, j]] - slice_vel.u[1][[k, i, j]];
                let d3 = velocity.u[2][[k, i, j]];
                sup = sup.max((d1 * d1 + d2 * d2 + d3 * d3).sqrt());
            }
        }
    }
    Ok(ModulatedVelocity {
        vorticity: modulated,
        velocity,
        slice_velocity: slice_vel,
        sup_gap_interior: sup,
    })
}
