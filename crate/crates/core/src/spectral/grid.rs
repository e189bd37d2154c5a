use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic box `[0, 2π)^dim` sampled with `n` points per axis.
///
/// Physical arrays are row-major with axis 0 (x) slowest. Spectral arrays use
/// the same flat layout with FFT ordering of wavenumbers on each axis, and the
/// convention `u(x) = Σ_k û_k e^{ik·x}`: forward transforms carry the `1/N`.
pub struct Grid {
    dim: usize,
    n: usize,
    len: usize,
    wave: [Vec<f64>; 3],
    dwave: [Vec<f64>; 3],
    k2: Vec<f64>,
    kd2: Vec<f64>,
    kabs: Vec<f64>,
    mask: Vec<bool>,
    neg: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("dim", &self.dim).field("n", &self.n).finish()
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::config(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::config(format!(
                "n must be even power of two and at least 8, got {n}"
            )));
        }
        let len = n.pow(dim as u32);
        let axis_k: Vec<f64> = (0..n)
            .map(|i| if i < n / 2 { i as f64 } else { i as f64 - n as f64 })
            .collect();
        let axis_kd: Vec<f64> = (0..n).map(|i| if i == n / 2 { 0.0 } else { axis_k[i] }).collect();
        let cutoff = n as f64 / 3.0;

        let mut wave = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        let mut dwave = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        let mut k2 = vec![0.0; len];
        let mut kd2 = vec![0.0; len];
        let mut kabs = vec![0.0; len];
        let mut mask = vec![false; len];
        let mut neg = vec![0usize; len];
        for idx in 0..len {
            let ijk = unravel(idx, dim, n);
            let mut nidx = 0;
            let mut inside = true;
            for a in 0..dim {
                wave[a][idx] = axis_k[ijk[a]];
                dwave[a][idx] = axis_kd[ijk[a]];
                k2[idx] += axis_k[ijk[a]] * axis_k[ijk[a]];
                kd2[idx] += axis_kd[ijk[a]] * axis_kd[ijk[a]];
                inside &= axis_k[ijk[a]].abs() <= cutoff;
                nidx = nidx * n + (n - ijk[a]) % n;
            }
            kabs[idx] = k2[idx].sqrt();
            mask[idx] = inside;
            neg[idx] = nidx;
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            n,
            len,
            wave,
            dwave,
            k2,
            kd2,
            kabs,
            mask,
            neg,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points (and of lattice modes).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Grid spacing `2π / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Box volume `(2π)^dim`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Quadrature weight of one grid point.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len as f64
    }

    /// Signed integer wavenumber of mode `idx` along `axis` (Nyquist negative).
    pub fn wavenumber(&self, axis: usize, idx: usize) -> f64 {
        self.wave[axis][idx]
    }

    /// Multiplier used for first derivatives: equal to the wavenumber except at
    /// the Nyquist index, where it is zero so odd derivatives stay real.
    pub fn deriv_wavenumber(&self, axis: usize, idx: usize) -> f64 {
        self.dwave[axis][idx]
    }

    pub(crate) fn dwave(&self, axis: usize) -> &[f64] {
        &self.dwave[axis]
    }

    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    /// `|k_d|²` built from the derivative multipliers.
    pub(crate) fn kd2(&self) -> &[f64] {
        &self.kd2
    }

    pub fn kabs(&self) -> &[f64] {
        &self.kabs
    }

    /// Two-thirds dealiasing mask: `max_i |k_i| ≤ n/3`.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Flat index of the mode `-k`.
    pub fn neg_index(&self) -> &[usize] {
        &self.neg
    }

    /// Largest `|k|` on the lattice.
    pub fn kmax(&self) -> f64 {
        (self.dim as f64).sqrt() * (self.n / 2) as f64
    }

    /// Largest `|k|` among retained (dealiased) modes.
    pub fn kmax_masked(&self) -> f64 {
        (self.dim as f64).sqrt() * (self.n as f64 / 3.0).floor()
    }

    /// Physical coordinate of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let ijk = unravel(idx, self.dim, self.n);
        let h = self.spacing();
        [ijk[0] as f64 * h, ijk[1] as f64 * h, ijk[2] as f64 * h]
    }

    /// Flat index of the point / mode with per-axis indices `ijk`.
    pub fn index(&self, ijk: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, a| acc * self.n + ijk[a] % self.n)
    }

    /// Flat index of the integer wavevector `k` (components reduced mod n).
    pub fn mode_index(&self, k: [i64; 3]) -> usize {
        let n = self.n as i64;
        (0..self.dim).fold(0, |acc, a| acc * self.n + k[a].rem_euclid(n) as usize)
    }

    /// Samples `f` on every grid point.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64 + Sync) -> Vec<f64> {
        (0..self.len).into_par_iter().map(|i| f(self.point(i))).collect()
    }

    /// Inverse transform of a batch of conjugate-symmetric spectra.
    ///
    /// Spectra are packed in pairs `F + iG` so each complex FFT yields two
    /// real fields.
    pub fn inverse_many(&self, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
        for s in spectra {
            assert_eq!(s.len(), self.len, "spectrum length does not match grid");
        }
        let pairs: Vec<(usize, Option<usize>)> = (0..spectra.len())
            .step_by(2)
            .map(|i| (i, if i + 1 < spectra.len() { Some(i + 1) } else { None }))
            .collect();
        let results: Vec<(Vec<f64>, Option<Vec<f64>>)> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let mut buf: Vec<Complex64> = match b {
                    Some(b) => spectra[a]
                        .iter()
                        .zip(spectra[b].iter())
                        .map(|(f, g)| Complex64::new(f.re - g.im, f.im + g.re))
                        .collect(),
                    None => spectra[a].to_vec(),
                };
                self.transform(&mut buf, &self.inverse);
                let re = buf.iter().map(|z| z.re).collect();
                let im = b.map(|_| buf.iter().map(|z| z.im).collect());
                (re, im)
            })
            .collect();
        let mut out = Vec::with_capacity(spectra.len());
        for (re, im) in results {
            out.push(re);
            if let Some(im) = im {
                out.push(im);
            }
        }
        out
    }

    /// Forward transform of a batch of real arrays (normalized by `1/N`).
    ///
    /// The output spectra are exactly conjugate-symmetric.
    pub fn forward_many(&self, arrays: &[&[f64]]) -> Vec<Vec<Complex64>> {
        for a in arrays {
            assert_eq!(a.len(), self.len, "array length does not match grid");
        }
        let pairs: Vec<(usize, Option<usize>)> = (0..arrays.len())
            .step_by(2)
            .map(|i| (i, if i + 1 < arrays.len() { Some(i + 1) } else { None }))
            .collect();
        let scale = 1.0 / self.len as f64;
        let results: Vec<(Vec<Complex64>, Option<Vec<Complex64>>)> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let mut buf: Vec<Complex64> = match b {
                    Some(b) => arrays[a]
                        .iter()
                        .zip(arrays[b].iter())
                        .map(|(&f, &g)| Complex64::new(f, g))
                        .collect(),
                    None => arrays[a].iter().map(|&f| Complex64::new(f, 0.0)).collect(),
                };
                self.transform(&mut buf, &self.forward);
                let mut fa = vec![Complex64::new(0.0, 0.0); self.len];
                let mut fb = b.map(|_| vec![Complex64::new(0.0, 0.0); self.len]);
                for k in 0..self.len {
                    let z = buf[k];
                    let zc = buf[self.neg[k]].conj();
                    fa[k] = (z + zc) * (0.5 * scale);
                    if let Some(fb) = fb.as_mut() {
                        // (z - zc) / 2i
                        let d = (z - zc) * (0.5 * scale);
                        fb[k] = Complex64::new(d.im, -d.re);
                    }
                }
                (fa, fb)
            })
            .collect();
        let mut out = Vec::with_capacity(arrays.len());
        for (fa, fb) in results {
            out.push(fa);
            if let Some(fb) = fb {
                out.push(fb);
            }
        }
        out
    }

    /// Unnormalized multi-dimensional complex FFT in place.
    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // contiguous last axis
        plan.process_with_scratch(buf, &mut scratch);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.dim - 1 {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            for chunk in buf.chunks_mut(block) {
                for inner in 0..stride {
                    for j in 0..n {
                        line[j] = chunk[inner + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for j in 0..n {
                        chunk[inner + j * stride] = line[j];
                    }
                }
            }
        }
    }
}

pub(crate) fn unravel(mut idx: usize, dim: usize, n: usize) -> [usize; 3] {
    let mut ijk = [0usize; 3];
    for a in (0..dim).rev() {
        ijk[a] = idx % n;
        idx /= n;
    }
    ijk
}
