//! Stride-1 3D correlation with zero "same" padding.
//!
//! Layouts: input `[B, Cin, T, H, W]`, weight `[Cout, Cin, kT, kH, kW]`,
//! bias `[Cout]`. Frames are lowered to column buffers a few time slices
//! at a time and multiplied with a blocked GEMM.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{dims5, gemm, Element, MatView, Tensor};

#[derive(Clone, Copy, Debug)]
struct Geometry {
    batch: usize,
    cin: usize,
    cout: usize,
    t: usize,
    h: usize,
    w: usize,
    k: [usize; 3],
}

impl Geometry {
    fn plane(&self) -> usize {
        self.t * self.h * self.w
    }

    fn kernel_volume(&self) -> usize {
        self.k[0] * self.k[1] * self.k[2]
    }
}

/// Output range `[lo, hi)` along one axis for which `o + d - pad` stays in `[0, n)`.
#[inline]
fn valid_range(n: usize, d: usize, pad: usize) -> (usize, usize) {
    let lo = pad.saturating_sub(d);
    let hi = (n + pad).saturating_sub(d).min(n);
    (lo, hi.max(lo))
}

fn geometry<T: Element>(input: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Result<Geometry> {
    let [batch, cin, t, h, w] = dims5(input.shape(), "conv3d input")?;
    let [cout, wcin, kt, kh, kw] = dims5(weight.shape(), "conv3d weight")?;
    if wcin != cin {
        return Err(Error::dim(format!(
            "conv3d: input has {cin} channels but weight expects {wcin}"
        )));
    }
    if bias.shape() != [cout] {
        return Err(Error::dim(format!(
            "conv3d: bias shape {:?} does not match {cout} output channels",
            bias.shape()
        )));
    }
    if [kt, kh, kw].iter().any(|k| k % 2 == 0) {
        return Err(Error::dim(format!(
            "conv3d: kernel ({kt},{kh},{kw}) must be odd along every axis"
        )));
    }
    Ok(Geometry {
        batch,
        cin,
        cout,
        t,
        h,
        w,
        k: [kt, kh, kw],
    })
}

/// Column-buffer budget (elements) per im2col chunk.
const COL_BUDGET: usize = 1 << 22;

/// Number of output time slices lowered per chunk.
fn chunk_frames(g: &Geometry) -> usize {
    let rows = g.cin * g.kernel_volume();
    let per_frame = (rows * g.h * g.w).max(1);
    (COL_BUDGET / per_frame).clamp(1, g.t.max(1))
}

/// Lowers output frames `[t0, t1)` of one sample into `col` (row-major,
/// `cin·kvol` rows by `(t1−t0)·h·w` columns), zero outside the input.
fn im2col<T: Element>(x: &[T], g: &Geometry, t0: usize, t1: usize, col: &mut [T]) {
    let [kt, kh, kw] = g.k;
    let (pt, ph, pw) = (kt / 2, kh / 2, kw / 2);
    let plane = g.plane();
    let ncols = (t1 - t0) * g.h * g.w;
    col.fill(T::zero());
    for ic in 0..g.cin {
        let xin = &x[ic * plane..(ic + 1) * plane];
        for dt in 0..kt {
            let (lo, hi) = valid_range(g.t, dt, pt);
            let (ta, tb) = (lo.max(t0), hi.min(t1));
            for dh in 0..kh {
                let (h0, h1) = valid_range(g.h, dh, ph);
                for dw in 0..kw {
                    let (w0, w1) = valid_range(g.w, dw, pw);
                    if w0 >= w1 {
                        continue;
                    }
                    let r = (ic * kt + dt) * kh * kw + dh * kw + dw;
                    let crow = &mut col[r * ncols..(r + 1) * ncols];
                    for ot in ta..tb {
                        let it = ot + dt - pt;
                        for oh in h0..h1 {
                            let ih = oh + dh - ph;
                            let dst = ((ot - t0) * g.h + oh) * g.w;
                            let src = (it * g.h + ih) * g.w + w0 + dw - pw;
                            crow[dst + w0..dst + w1].copy_from_slice(&xin[src..src + (w1 - w0)]);
                        }
                    }
                }
            }
        }
    }
}

/// Scatter-adds a column buffer back onto one sample's input gradient.
fn col2im<T: Element>(col: &[T], g: &Geometry, t0: usize, t1: usize, gx: &mut [T]) {
    let [kt, kh, kw] = g.k;
    let (pt, ph, pw) = (kt / 2, kh / 2, kw / 2);
    let plane = g.plane();
    let ncols = (t1 - t0) * g.h * g.w;
    for ic in 0..g.cin {
        let gin = &mut gx[ic * plane..(ic + 1) * plane];
        for dt in 0..kt {
            let (lo, hi) = valid_range(g.t, dt, pt);
            let (ta, tb) = (lo.max(t0), hi.min(t1));
            for dh in 0..kh {
                let (h0, h1) = valid_range(g.h, dh, ph);
                for dw in 0..kw {
                    let (w0, w1) = valid_range(g.w, dw, pw);
                    if w0 >= w1 {
                        continue;
                    }
                    let r = (ic * kt + dt) * kh * kw + dh * kw + dw;
                    let crow = &col[r * ncols..(r + 1) * ncols];
                    for ot in ta..tb {
                        let it = ot + dt - pt;
                        for oh in h0..h1 {
                            let ih = oh + dh - ph;
                            let src = ((ot - t0) * g.h + oh) * g.w;
                            let dst = (it * g.h + ih) * g.w + w0 + dw - pw;
                            for (a, &v) in gin[dst..dst + (w1 - w0)].iter_mut().zip(&crow[src + w0..src + w1]) {
                                *a = *a + v;
                            }
                        }
                    }
                }
            }
        }
    }
}

pub fn conv3d<T: Element>(input: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let g = geometry(input, weight, bias)?;
    let plane = g.plane();
    let hw = g.h * g.w;
    let krows = g.cin * g.kernel_volume();
    let chunk = chunk_frames(&g);
    let x = input.data();
    let wt = weight.data();
    let b = bias.data();

    let mut out = vec![T::zero(); g.batch * g.cout * plane];
    out.par_chunks_mut((g.cout * plane).max(1)).enumerate().for_each(|(bi, o)| {
        let xb = &x[bi * g.cin * plane..(bi + 1) * g.cin * plane];
        let mut col = vec![T::zero(); krows * chunk * hw];
        for t0 in (0..g.t).step_by(chunk) {
            let t1 = (t0 + chunk).min(g.t);
            let ncols = (t1 - t0) * hw;
            let col = &mut col[..krows * ncols];
            im2col(xb, &g, t0, t1, col);
            gemm(
                g.cout,
                krows,
                ncols,
                T::one(),
                MatView { data: wt, rs: krows, cs: 1 },
                MatView { data: col, rs: ncols, cs: 1 },
                T::zero(),
                &mut o[t0 * hw..],
                (plane, 1),
            );
        }
        for (oc, row) in o.chunks_mut(plane.max(1)).enumerate() {
            for v in row.iter_mut() {
                *v = *v + b[oc];
            }
        }
    });
    Tensor::new(vec![g.batch, g.cout, g.t, g.h, g.w], out)
}

/// Gradients of [`conv3d`]. The input gradient is skipped when
/// `need_input_grad` is false (network inputs never need one).
pub fn conv3d_backward<T: Element>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
    grad_out: &Tensor<T>,
    need_input_grad: bool,
) -> Result<(Option<Tensor<T>>, Tensor<T>, Tensor<T>)> {
    let g = geometry(input, weight, bias)?;
    grad_out.expect_shape(&[g.batch, g.cout, g.t, g.h, g.w])?;
    let plane = g.plane();
    let hw = g.h * g.w;
    let krows = g.cin * g.kernel_volume();
    let chunk = chunk_frames(&g);
    let x = input.data();
    let wt = weight.data();
    let go = grad_out.data();

    // Per-sample partial weight gradients, reduced in sample order below.
    let mut gin = if need_input_grad { vec![T::zero(); x.len()] } else { Vec::new() };
    let in_chunk = if need_input_grad { g.cin * plane } else { 0 };
    let mut partial_gw = vec![T::zero(); g.batch * wt.len()];
    let work: Vec<(usize, &mut [T], &mut [T])> = partial_gw
        .chunks_mut(wt.len().max(1))
        .zip(if need_input_grad {
            gin.chunks_mut(in_chunk.max(1)).map(Some).collect::<Vec<_>>()
        } else {
            (0..g.batch).map(|_| None).collect()
        })
        .enumerate()
        .map(|(bi, (gw, gx))| (bi, gw, gx.unwrap_or(&mut [])))
        .collect();
    work.into_par_iter().for_each(|(bi, gw, gx)| {
        let xb = &x[bi * g.cin * plane..(bi + 1) * g.cin * plane];
        let gob = &go[bi * g.cout * plane..(bi + 1) * g.cout * plane];
        let mut col = vec![T::zero(); krows * chunk * hw];
        let mut gcol = if need_input_grad { vec![T::zero(); krows * chunk * hw] } else { Vec::new() };
        for t0 in (0..g.t).step_by(chunk) {
            let t1 = (t0 + chunk).min(g.t);
            let ncols = (t1 - t0) * hw;
            let col = &mut col[..krows * ncols];
            im2col(xb, &g, t0, t1, col);
            let gview = MatView { data: &gob[t0 * hw..], rs: plane, cs: 1 };
            // gW[cout, krows] += gout[cout, ncols] · colᵀ[ncols, krows]
            gemm(
                g.cout,
                ncols,
                krows,
                T::one(),
                gview,
                MatView { data: col, rs: 1, cs: ncols },
                T::one(),
                gw,
                (krows, 1),
            );
            if need_input_grad {
                let gcol = &mut gcol[..krows * ncols];
                // gcol[krows, ncols] = Wᵀ[krows, cout] · gout[cout, ncols]
                gemm(
                    krows,
                    g.cout,
                    ncols,
                    T::one(),
                    MatView { data: wt, rs: 1, cs: krows },
                    gview,
                    T::zero(),
                    gcol,
                    (ncols, 1),
                );
                col2im(gcol, &g, t0, t1, gx);
            }
        }
    });

    let mut gw = vec![T::zero(); wt.len()];
    for part in partial_gw.chunks(wt.len().max(1)) {
        for (a, &v) in gw.iter_mut().zip(part) {
            *a = *a + v;
        }
    }
    let mut gb = vec![T::zero(); g.cout];
    for bi in 0..g.batch {
        for (oc, slot) in gb.iter_mut().enumerate() {
            let s: T = go[(bi * g.cout + oc) * plane..][..plane].iter().copied().sum();
            *slot = *slot + s;
        }
    }

    let grad_input = if need_input_grad {
        Some(Tensor::new(input.shape().to_vec(), gin)?)
    } else {
        None
    };
    Ok((
        grad_input,
        Tensor::new(weight.shape().to_vec(), gw)?,
        Tensor::new(vec![g.cout], gb)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct summation over the receptive field.
    fn naive(input: &Tensor<f64>, weight: &Tensor<f64>, bias: &Tensor<f64>) -> Tensor<f64> {
        let [b, ci, t, h, w] = dims5(input.shape(), "").unwrap();
        let [co, _, kt, kh, kw] = dims5(weight.shape(), "").unwrap();
        let mut out = Tensor::zeros(vec![b, co, t, h, w]);
        for n in 0..b {
            for o in 0..co {
                for z in 0..t {
                    for y in 0..h {
                        for x in 0..w {
                            let mut s = bias.data()[o];
                            for c in 0..ci {
                                for dz in 0..kt {
                                    for dy in 0..kh {
                                        for dx in 0..kw {
                                            let iz = z as isize + dz as isize - (kt / 2) as isize;
                                            let iy = y as isize + dy as isize - (kh / 2) as isize;
                                            let ix = x as isize + dx as isize - (kw / 2) as isize;
                                            if iz < 0 || iy < 0 || ix < 0 {
                                                continue;
                                            }
                                            let (iz, iy, ix) = (iz as usize, iy as usize, ix as usize);
                                            if iz >= t || iy >= h || ix >= w {
                                                continue;
                                            }
                                            s += weight.get(&[o, c, dz, dy, dx]).unwrap()
                                                * input.get(&[n, c, iz, iy, ix]).unwrap();
                                        }
                                    }
                                }
                            }
                            out.set(&[n, o, z, y, x], s).unwrap();
                        }
                    }
                }
            }
        }
        out
    }

    fn pseudo_random(shape: Vec<usize>, seed: u64) -> Tensor<f64> {
        let mut s = seed;
        Tensor::from_fn(shape, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn identity_kernel_returns_input() {
        let x = pseudo_random(vec![1, 1, 3, 4, 5], 1);
        let w = Tensor::ones(vec![1, 1, 1, 1, 1]);
        let b = Tensor::zeros(vec![1]);
        assert_eq!(conv3d(&x, &w, &b).unwrap(), x);
    }

    #[test]
    fn constant_input_interior_and_corner() {
        let v = 0.75;
        let x = Tensor::full(vec![1, 1, 5, 5, 5], v);
        let w = Tensor::ones(vec![1, 1, 3, 3, 3]);
        let b = Tensor::zeros(vec![1]);
        let y = conv3d(&x, &w, &b).unwrap();
        assert_eq!(y.get(&[0, 0, 2, 2, 2]).unwrap(), 27.0 * v);
        assert_eq!(y.get(&[0, 0, 0, 0, 0]).unwrap(), 8.0 * v);
        assert_eq!(y.get(&[0, 0, 4, 4, 4]).unwrap(), 8.0 * v);
        assert_eq!(y.get(&[0, 0, 0, 2, 2]).unwrap(), 18.0 * v);
    }

    #[test]
    fn matches_direct_summation_with_anisotropic_kernel() {
        let x = pseudo_random(vec![2, 2, 4, 6, 9], 7);
        let w = pseudo_random(vec![3, 2, 3, 5, 7], 8);
        let b = pseudo_random(vec![3], 9);
        let fast = conv3d(&x, &w, &b).unwrap();
        let slow = naive(&x, &w, &b);
        for (a, e) in fast.data().iter().zip(slow.data()) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
    }

    #[test]
    fn rejects_channel_mismatch_and_even_kernels() {
        let x = Tensor::<f32>::zeros(vec![1, 2, 3, 3, 3]);
        let w = Tensor::<f32>::zeros(vec![1, 3, 3, 3, 3]);
        let b = Tensor::<f32>::zeros(vec![1]);
        assert!(matches!(conv3d(&x, &w, &b), Err(Error::Dimension(_))));
        let w = Tensor::<f32>::zeros(vec![1, 2, 2, 3, 3]);
        assert!(matches!(conv3d(&x, &w, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn full_resolution_v2_kernel_preserves_shape() {
        let x = Tensor::<f32>::zeros(vec![1, 3, 96, 180, 320]);
        let w = Tensor::<f32>::zeros(vec![1, 3, 3, 5, 7]);
        let b = Tensor::<f32>::zeros(vec![1]);
        assert_eq!(conv3d(&x, &w, &b).unwrap().shape(), &[1, 1, 96, 180, 320]);
    }
}
