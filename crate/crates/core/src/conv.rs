//! Free-space convolution machinery: zero-padded real FFTs on doubled
//! boxes, with hand-rolled transpose passes so the strided axes stay
//! cache-friendly. Transforms are unnormalized; the `1/N` factor and the
//! quadrature cell volume are folded into the kernel spectra at plan
//! build time.

use ndarray::{Array2, Array3, ArrayView2, ArrayViewMut2, Zip};
use ndarray::parallel::prelude::*;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{num_complex::Complex, Fft, FftPlanner};
use std::sync::Arc;

pub(crate) type C64 = Complex<f64>;

const TILE: usize = 32;

fn transpose_into(src: ArrayView2<'_, C64>, mut dst: ArrayViewMut2<'_, C64>) {
    let (r, c) = src.dim();
    debug_assert_eq!(dst.dim(), (c, r));
    for i0 in (0..r).step_by(TILE) {
        for j0 in (0..c).step_by(TILE) {
            for i in i0..(i0 + TILE).min(r) {
                for j in j0..(j0 + TILE).min(c) {
                    dst[[j, i]] = src[[i, j]];
                }
            }
        }
    }
}

/// 2D real convolution plan on a padded `(p0, p1)` box.
pub(crate) struct Fft2Plan {
    p0: usize,
    p1: usize,
    pc1: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd0: Arc<dyn Fft<f64>>,
    inv0: Arc<dyn Fft<f64>>,
}

impl Fft2Plan {
    pub fn new(p0: usize, p1: usize) -> Self {
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Fft2Plan {
            p0,
            p1,
            pc1: p1 / 2 + 1,
            r2c: rp.plan_fft_forward(p1),
            c2r: rp.plan_fft_inverse(p1),
            fwd0: cp.plan_fft_forward(p0),
            inv0: cp.plan_fft_inverse(p0),
        }
    }

    pub fn spec_dim(&self) -> (usize, usize) {
        (self.p0, self.pc1)
    }

    /// Unnormalized forward transform of a real padded array.
    pub fn forward(&self, real: &Array2<f64>, spec: &mut Array2<C64>) {
        debug_assert_eq!(real.dim(), (self.p0, self.p1));
        debug_assert_eq!(spec.dim(), (self.p0, self.pc1));
        // r2c along axis 1 (contiguous)
        let rs = real.as_slice().expect("padded buffers are standard layout");
        let ss = spec.as_slice_mut().expect("padded buffers are standard layout");
        ss.par_chunks_mut(self.pc1)
            .zip(rs.par_chunks(self.p1))
            .for_each_init(
                || (vec![0.0; self.p1], self.r2c.make_scratch_vec()),
                |(line, scratch), (out, inp)| {
                    line.copy_from_slice(inp);
                    self.r2c
                        .process_with_scratch(line, out, scratch)
                        .expect("r2c lengths match");
                },
            );
        // c2c along axis 0 via a full transpose
        let mut t = Array2::<C64>::zeros((self.pc1, self.p0));
        transpose_into(spec.view(), t.view_mut());
        t.as_slice_mut()
            .unwrap()
            .par_chunks_mut(self.p0)
            .for_each(|line| self.fwd0.process(line));
        transpose_into(t.view(), spec.view_mut());
    }

    /// Unnormalized inverse; `spec` is consumed as scratch.
    pub fn inverse(&self, spec: &mut Array2<C64>, real: &mut Array2<f64>) {
        debug_assert_eq!(real.dim(), (self.p0, self.p1));
        let mut t = Array2::<C64>::zeros((self.pc1, self.p0));
        transpose_into(spec.view(), t.view_mut());
        t.as_slice_mut()
            .unwrap()
            .par_chunks_mut(self.p0)
            .for_each(|line| self.inv0.process(line));
        transpose_into(t.view(), spec.view_mut());
        let ss = spec.as_slice_mut().unwrap();
        let rs = real.as_slice_mut().unwrap();
        rs.par_chunks_mut(self.p1)
            .zip(ss.par_chunks_mut(self.pc1))
            .for_each_init(
                || self.c2r.make_scratch_vec(),
                |scratch, (out, inp)| {
                    self.c2r
                        .process_with_scratch(inp, out, scratch)
                        .expect("c2r lengths match");
                },
            );
    }
}

/// 3D real convolution plan on a padded `(p0, p1, p2)` box, layout
/// `(x3, x1, x2)` with `x2` contiguous.
pub(crate) struct Fft3Plan {
    p0: usize,
    p1: usize,
    p2: usize,
    pc2: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd0: Arc<dyn Fft<f64>>,
    inv0: Arc<dyn Fft<f64>>,
}

impl Fft3Plan {
    pub fn new(p0: usize, p1: usize, p2: usize) -> Self {
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Fft3Plan {
            p0,
            p1,
            p2,
            pc2: p2 / 2 + 1,
            r2c: rp.plan_fft_forward(p2),
            c2r: rp.plan_fft_inverse(p2),
            fwd1: cp.plan_fft_forward(p1),
            inv1: cp.plan_fft_inverse(p1),
            fwd0: cp.plan_fft_forward(p0),
            inv0: cp.plan_fft_inverse(p0),
        }
    }

    pub fn spec_dim(&self) -> (usize, usize, usize) {
        (self.p0, self.p1, self.pc2)
    }

    fn pass_axis1(&self, spec: &mut Array3<C64>, forward: bool) {
        let fft = if forward { &self.fwd1 } else { &self.inv1 };
        spec.outer_iter_mut().into_par_iter().for_each_init(
            || Array2::<C64>::zeros((self.pc2, self.p1)),
            |t, mut plane| {
                transpose_into(plane.view(), t.view_mut());
                t.as_slice_mut()
                    .unwrap()
                    .chunks_mut(self.p1)
                    .for_each(|line| fft.process(line));
                transpose_into(t.view(), plane.view_mut());
            },
        );
    }

    fn pass_axis0(&self, spec: &mut Array3<C64>, forward: bool) {
        let fft = if forward { &self.fwd0 } else { &self.inv0 };
        let cols = self.p1 * self.pc2;
        let p0 = self.p0;
        // flat (p0, cols) view of the standard-layout spectrum
        let flat = spec.as_slice_mut().unwrap();
        let block = 512;
        let starts: Vec<usize> = (0..cols).step_by(block).collect();
        // Gather column blocks into contiguous tiles, transform, scatter.
        // Blocks are disjoint in the column index, so the unsafe shared
        // pointer never aliases across rayon tasks.
        struct Ptr(*mut C64);
        unsafe impl Send for Ptr {}
        unsafe impl Sync for Ptr {}
        let base = Ptr(flat.as_mut_ptr());
        starts.par_iter().for_each_init(
            || Array2::<C64>::zeros((block, p0)),
            |tile, &c0| {
                let w = block.min(cols - c0);
                let base = &base;
                unsafe {
                    for i in 0..p0 {
                        let row = base.0.add(i * cols + c0);
                        for j in 0..w {
                            *tile.uget_mut([j, i]) = *row.add(j);
                        }
                    }
                }
                tile.as_slice_mut()
                    .unwrap()
                    .chunks_mut(p0)
                    .take(w)
                    .for_each(|line| fft.process(line));
                unsafe {
                    for i in 0..p0 {
                        let row = base.0.add(i * cols + c0);
                        for j in 0..w {
                            *row.add(j) = *tile.uget([j, i]);
                        }
                    }
                }
            },
        );
    }

    /// Unnormalized forward transform of a real padded array.
    pub fn forward(&self, real: &Array3<f64>, spec: &mut Array3<C64>) {
        debug_assert_eq!(real.dim(), (self.p0, self.p1, self.p2));
        debug_assert_eq!(spec.dim(), (self.p0, self.p1, self.pc2));
        let rs = real.as_slice().expect("padded buffers are standard layout");
        let ss = spec.as_slice_mut().expect("padded buffers are standard layout");
        ss.par_chunks_mut(self.pc2)
            .zip(rs.par_chunks(self.p2))
            .for_each_init(
                || (vec![0.0; self.p2], self.r2c.make_scratch_vec()),
                |(line, scratch), (out, inp)| {
                    line.copy_from_slice(inp);
                    self.r2c
                        .process_with_scratch(line, out, scratch)
                        .expect("r2c lengths match");
                },
            );
        self.pass_axis1(spec, true);
        self.pass_axis0(spec, true);
    }

    /// Unnormalized inverse; `spec` is consumed as scratch.
    pub fn inverse(&self, spec: &mut Array3<C64>, real: &mut Array3<f64>) {
        debug_assert_eq!(real.dim(), (self.p0, self.p1, self.p2));
        self.pass_axis0(spec, false);
        self.pass_axis1(spec, false);
        let ss = spec.as_slice_mut().unwrap();
        let rs = real.as_slice_mut().unwrap();
        rs.par_chunks_mut(self.p2)
            .zip(ss.par_chunks_mut(self.pc2))
            .for_each_init(
                || self.c2r.make_scratch_vec(),
                |scratch, (out, inp)| {
                    self.c2r
                        .process_with_scratch(inp, out, scratch)
                        .expect("c2r lengths match");
                },
            );
    }
}

/// Pointwise `out += c * a ∘ b` over spectra.
pub(crate) fn spec_mul_add(out: &mut Array3<C64>, a: &Array3<C64>, b: &Array3<C64>, c: f64) {
    Zip::from(out).and(a).and(b).par_for_each(|o, &x, &y| {
        *o += c * x * y;
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn fft2_roundtrip() {
        let plan = Fft2Plan::new(16, 12);
        let real = Array2::from_shape_fn((16, 12), |(i, j)| ((3 * i + j) % 5) as f64 - 1.7);
        let mut spec = Array2::<C64>::zeros(plan.spec_dim());
        plan.forward(&real, &mut spec);
        let mut back = Array2::<f64>::zeros((16, 12));
        plan.inverse(&mut spec, &mut back);
        let scale = 1.0 / (16.0 * 12.0);
        let err = back
            .iter()
            .zip(real.iter())
            .map(|(b, r)| (b * scale - r).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "roundtrip error {err}");
    }

    #[test]
    fn fft3_roundtrip_and_convolution() {
        let (p0, p1, p2) = (8usize, 16, 12);
        let plan = Fft3Plan::new(p0, p1, p2);
        let real = Array3::from_shape_fn((p0, p1, p2), |(k, i, j)| {
            ((k * 31 + i * 7 + j * 3) % 11) as f64 - 4.2
        });
        let mut spec = Array3::<C64>::zeros(plan.spec_dim());
        plan.forward(&real, &mut spec);
        let mut back = Array3::<f64>::zeros((p0, p1, p2));
        plan.inverse(&mut spec, &mut back);
        let scale = 1.0 / (p0 * p1 * p2) as f64;
        let err = back
            .iter()
            .zip(real.iter())
            .map(|(b, r)| (b * scale - r).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "roundtrip error {err}");

        // spectral product equals cyclic convolution (inverse consumed spec)
        plan.forward(&real, &mut spec);
        let mut ka = Array3::<f64>::zeros((p0, p1, p2));
        ka[[0, 0, 0]] = 1.0;
        ka[[1, 0, 2]] = -0.5; // shift by (1, 0, 2)
        let mut kspec = Array3::<C64>::zeros(plan.spec_dim());
        plan.forward(&ka, &mut kspec);
        let mut prod = Array3::<C64>::zeros(plan.spec_dim());
        spec_mul_add(&mut prod, &kspec, &spec, scale);
        let mut conv = Array3::<f64>::zeros((p0, p1, p2));
        plan.inverse(&mut prod, &mut conv);
        for k in 0..p0 {
            for i in 0..p1 {
                for j in 0..p2 {
                    let expect = real[[k, i, j]]
                        - 0.5 * real[[(k + p0 - 1) % p0, i, (j + p2 - 2) % p2]];
                    assert!((conv[[k, i, j]] - expect).abs() < 1e-11);
                }
            }
        }
    }
}
