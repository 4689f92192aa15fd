//! Right-hand-side terms of the perturbation equation.
//!
//! With `Ω̃ = Ω(x⊥; rho + φ(x3))` the modulated vortex, `Ũ` its 3D
//! velocity, `U` the slice-frozen planar vortex velocity, and `u` the
//! velocity of the perturbation `ω`:
//!
//! - the linear interaction couples `ω` to the modulated vortex,
//! - the nonlinear term is quadratic in `ω`,
//! - the inhomogeneous term is driven purely by the axial variation of
//!   `φ` and vanishes for constant `φ`.
//!
//! All terms are in divergence form in their third component, so the
//! per-slice transverse integrals of component 3 vanish and the axial
//! mode stays decoupled.

use crate::biot_savart::{ModulatedVelocity, Velocity3D};
use crate::fd::{diff4_3d, Ghost};
use crate::field::{Field2D, SlicedField3D};
use crate::grid::Grid3D;
use ndarray::{Array3, Zip};

pub struct TermInputs<'a> {
    pub grid: &'a Grid3D,
    pub omega: &'a [SlicedField3D; 3],
    /// Velocity of `ω` by the 3D law.
    pub u: &'a Velocity3D,
    /// Modulated vortex velocity bundle (`Ω̃`, `Ũ`, slice-wise `U`).
    pub modulated: &'a ModulatedVelocity,
    /// `∂₃φ` per slice.
    pub dphi: &'a [f64],
    /// `∂²_ρ Ω` of the vortex family.
    pub d2_omega: &'a Field2D,
}

fn d1(f: &Array3<f64>, grid: &Grid3D) -> Array3<f64> {
    diff4_3d(f.view(), 1, grid.transverse().spacing(), Ghost::Zero)
}

fn d2(f: &Array3<f64>, grid: &Grid3D) -> Array3<f64> {
    diff4_3d(f.view(), 2, grid.transverse().spacing(), Ghost::Zero)
}

fn d3(f: &Array3<f64>, grid: &Grid3D) -> Array3<f64> {
    diff4_3d(f.view(), 0, grid.axial().spacing(), Ghost::Clamp)
}

fn product(a: &Array3<f64>, b: &Array3<f64>) -> Array3<f64> {
    let mut out = Array3::zeros(a.raw_dim());
    Zip::from(&mut out).and(a).and(b).par_for_each(|o, &x, &y| *o = x * y);
    out
}

fn product_diff(a1: &Array3<f64>, b1: &Array3<f64>, a2: &Array3<f64>, b2: &Array3<f64>) -> Array3<f64> {
    // a1 b1 - a2 b2
    let mut out = Array3::zeros(a1.raw_dim());
    Zip::from(&mut out)
        .and(a1)
        .and(b1)
        .and(a2)
        .and(b2)
        .par_for_each(|o, &x, &y, &p, &q| *o = x * y - p * q);
    out
}

/// Linear interaction of the perturbation with the modulated vortex.
pub fn term_p(inputs: &TermInputs<'_>) -> [Array3<f64>; 3] {
    let g = inputs.grid;
    let ut = &inputs.modulated.velocity.u;
    let ob = inputs.modulated.vorticity.data();
    let u = &inputs.u.u;
    let w: Vec<&Array3<f64>> = inputs.omega.iter().map(|f| f.data()).collect();

    // shared product fields
    let a1 = {
        // Ũ1 ω3 + u1 Ω̃
        let mut f = product(&ut[0], w[2]);
        Zip::from(&mut f).and(&u[0]).and(ob).par_for_each(|o, &x, &y| *o += x * y);
        f
    };
    let a2 = {
        let mut f = product(&ut[1], w[2]);
        Zip::from(&mut f).and(&u[1]).and(ob).par_for_each(|o, &x, &y| *o += x * y);
        f
    };
    let cross = product_diff(&ut[0], w[1], &ut[1], w[0]); // Ũ1 ω2 - Ũ2 ω1

    let mut p1 = d2(&cross, g);
    p1 += &d3(&a1, g);
    let mut p2 = d1(&cross, g);
    p2.mapv_inplace(|v| -v);
    p2 += &d3(&a2, g);
    let mut p3 = d1(&a1, g);
    p3 += &d2(&a2, g);
    p3.mapv_inplace(|v| -v);
    [p1, p2, p3]
}

/// Quadratic self-interaction of the perturbation.
pub fn term_n(grid: &Grid3D, omega: &[SlicedField3D; 3], u: &Velocity3D) -> [Array3<f64>; 3] {
    let w: Vec<&Array3<f64>> = omega.iter().map(|f| f.data()).collect();
    let uu = &u.u;
    let c12 = product_diff(&uu[0], w[1], &uu[1], w[0]); // u1 ω2 - u2 ω1
    let c13 = product_diff(&uu[0], w[2], &uu[2], w[0]); // u1 ω3 - u3 ω1
    let c23 = product_diff(&uu[1], w[2], &uu[2], w[1]); // u2 ω3 - u3 ω2

    let mut n1 = d2(&c12, grid);
    n1 += &d3(&c13, grid);
    let mut n2 = d1(&c12, grid);
    n2.mapv_inplace(|v| -v);
    n2 += &d3(&c23, grid);
    let mut n3 = d1(&c13, grid);
    n3 += &d2(&c23, grid);
    n3.mapv_inplace(|v| -v);
    [n1, n2, n3]
}

/// Inhomogeneous vortex-modulation term; zero for constant `φ`.
pub fn term_h(
    grid: &Grid3D,
    modulated: &ModulatedVelocity,
    dphi: &[f64],
    d2_omega: &Field2D,
) -> [Array3<f64>; 3] {
    let ut = &modulated.velocity.u;
    let us = &modulated.slice_velocity.u;
    let ob = modulated.vorticity.data();

    let t1 = product(&ut[0], ob);
    let t2 = product(&ut[1], ob);
    let h1 = d3(&t1, grid);
    let h2 = d3(&t2, grid);

    // ∇⊥·((U - Ũ)Ω̃) + (∂²ρΩ)(∂₃φ)²
    let g1 = product_diff(&us[0], ob, &ut[0], ob);
    let g2 = product_diff(&us[1], ob, &ut[1], ob);
    let mut h3 = d1(&g1, grid);
    h3 += &d2(&g2, grid);
    for (k, mut slice) in h3.outer_iter_mut().enumerate() {
        let c = dphi[k] * dphi[k];
        if c != 0.0 {
            slice.scaled_add(c, d2_omega.values());
        }
    }
    [h1, h2, h3]
}

/// Full forcing `P + N + H` with fused product assembly; equals the sum
/// of the individual terms (checked in tests) at lower cost.
pub(crate) fn assemble_forcing(inputs: &TermInputs<'_>) -> [Array3<f64>; 3] {
    let g = inputs.grid;
    let ut = &inputs.modulated.velocity.u;
    let us = &inputs.modulated.slice_velocity.u;
    let ob = inputs.modulated.vorticity.data();
    let u = &inputs.u.u;
    let w: Vec<&Array3<f64>> = inputs.omega.iter().map(|f| f.data()).collect();
    let dim = w[0].raw_dim();

    // axial-derivative groups of components 1, 2:
    //   A_i = Ũ_i(ω3 + Ω̃) + u_i(Ω̃ + ω3) - u3 ω_i
    let mut a1 = Array3::zeros(dim.clone());
    Zip::from(&mut a1)
        .and(&ut[0])
        .and(&u[0])
        .and(w[2])
        .and(ob)
        .par_for_each(|o, &utv, &uv, &w3, &obv| *o = (utv + uv) * (w3 + obv));
    Zip::from(&mut a1).and(&u[2]).and(w[0]).par_for_each(|o, &u3, &w1| *o -= u3 * w1);
    let mut a2 = Array3::zeros(dim.clone());
    Zip::from(&mut a2)
        .and(&ut[1])
        .and(&u[1])
        .and(w[2])
        .and(ob)
        .par_for_each(|o, &utv, &uv, &w3, &obv| *o = (utv + uv) * (w3 + obv));
    Zip::from(&mut a2).and(&u[2]).and(w[1]).par_for_each(|o, &u3, &w2| *o -= u3 * w2);

    // transverse cross term of components 1, 2:
    //   C = (Ũ1 + u1) ω2 - (Ũ2 + u2) ω1
    let mut cross = Array3::zeros(dim.clone());
    Zip::from(&mut cross)
        .and(&ut[0])
        .and(&u[0])
        .and(w[1])
        .par_for_each(|o, &a, &b, &w2| *o = (a + b) * w2);
    Zip::from(&mut cross)
        .and(&ut[1])
        .and(&u[1])
        .and(w[0])
        .par_for_each(|o, &a, &b, &w1| *o -= (a + b) * w1);

    // component 3 divergence groups:
    //   B_i = -(Ũ_i + u_i) ω3 - u_i Ω̃ + u3 ω_i + (U_i - Ũ_i) Ω̃
    let mut b1 = Array3::zeros(dim.clone());
    Zip::from(&mut b1)
        .and(&ut[0])
        .and(&u[0])
        .and(w[2])
        .and(&us[0])
        .and(ob)
        .par_for_each(|o, &utv, &uv, &w3, &usv, &obv| {
            *o = -(utv + uv) * w3 + (usv - utv - uv) * obv;
        });
    Zip::from(&mut b1).and(&u[2]).and(w[0]).par_for_each(|o, &u3, &w1| *o += u3 * w1);
    let mut b2 = Array3::zeros(dim);
    Zip::from(&mut b2)
        .and(&ut[1])
        .and(&u[1])
        .and(w[2])
        .and(&us[1])
        .and(ob)
        .par_for_each(|o, &utv, &uv, &w3, &usv, &obv| {
            *o = -(utv + uv) * w3 + (usv - utv - uv) * obv;
        });
    Zip::from(&mut b2).and(&u[2]).and(w[1]).par_for_each(|o, &u3, &w2| *o += u3 * w2);

    let mut f1 = d2(&cross, g);
    f1 += &d3(&a1, g);
    let mut f2 = d1(&cross, g);
    f2.mapv_inplace(|v| -v);
    f2 += &d3(&a2, g);
    let mut f3 = d1(&b1, g);
    f3 += &d2(&b2, g);
    for (k, mut slice) in f3.outer_iter_mut().enumerate() {
        let c = inputs.dphi[k] * inputs.dphi[k];
        if c != 0.0 {
            slice.scaled_add(c, inputs.d2_omega.values());
        }
    }
    [f1, f2, f3]
}
