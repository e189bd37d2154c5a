//! Transforms and exact spectral differential operators.

use num_complex::Complex64;

use super::{Field, Grid, PhysicalField, Rank};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

impl Grid {
    pub fn to_spectral(&self, f: &PhysicalField) -> Result<Field> {
        f.check(self)?;
        let refs: Vec<&[f64]> = f.comps().iter().map(Vec::as_slice).collect();
        Ok(Field::from_parts(f.rank(), self.forward_many(&refs)))
    }

    pub fn to_physical(&self, f: &Field) -> Result<PhysicalField> {
        f.check(self)?;
        let refs: Vec<&[Complex64]> = f.comps().iter().map(Vec::as_slice).collect();
        Ok(PhysicalField::from_parts(f.rank(), self.inverse_many(&refs)))
    }

    /// Spectral array of `∂_axis f`.
    pub fn deriv(&self, f: &[Complex64], axis: usize) -> Vec<Complex64> {
        let kd = self.dwave(axis);
        f.iter().zip(kd).map(|(z, &k)| I * k * z).collect()
    }

    /// Spectral array of `∂_a ∂_b f`.
    pub fn deriv2(&self, f: &[Complex64], a: usize, b: usize) -> Vec<Complex64> {
        let (ka, kb) = (self.dwave(a), self.dwave(b));
        if a == b {
            // even derivative: keep the Nyquist wavenumber
            return f
                .iter()
                .enumerate()
                .map(|(i, z)| {
                    let k = self.wavenumber(a, i);
                    -k * k * z
                })
                .collect();
        }
        f.iter().enumerate().map(|(i, z)| -ka[i] * kb[i] * z).collect()
    }

    /// Scalar → vector gradient, vector → tensor (`∂_j v_i` at `i*dim+j`).
    pub fn gradient(&self, f: &Field) -> Result<Field> {
        f.check(self)?;
        let d = self.dim();
        let rank = match f.rank() {
            Rank::Scalar => Rank::Vector,
            Rank::Vector => Rank::Tensor,
            Rank::Tensor => return Err(Error::Rank("gradient of a tensor field".into())),
        };
        let mut comps = Vec::with_capacity(f.comps().len() * d);
        for c in f.comps() {
            for j in 0..d {
                comps.push(self.deriv(c, j));
            }
        }
        Ok(Field::from_parts(rank, comps))
    }

    pub fn divergence(&self, v: &Field) -> Result<Field> {
        v.check(self)?;
        if v.rank() != Rank::Vector {
            return Err(Error::Rank("divergence needs a vector field".into()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for (a, c) in v.comps().iter().enumerate() {
            let kd = self.dwave(a);
            for k in 0..self.len() {
                out[k] += I * kd[k] * c[k];
            }
        }
        Ok(Field::from_parts(Rank::Scalar, vec![out]))
    }

    /// Curl: vector in 3-d, the scalar `∂₁v₂ − ∂₂v₁` in 2-d.
    pub fn curl(&self, v: &Field) -> Result<Field> {
        v.check(self)?;
        if v.rank() != Rank::Vector {
            return Err(Error::Rank("curl needs a vector field".into()));
        }
        let c = v.comps();
        let kx = self.dwave(0);
        let ky = self.dwave(1);
        if self.dim() == 2 {
            let w = (0..self.len()).map(|k| I * (kx[k] * c[1][k] - ky[k] * c[0][k])).collect();
            return Ok(Field::from_parts(Rank::Scalar, vec![w]));
        }
        let kz = self.dwave(2);
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.len()]; 3];
        for k in 0..self.len() {
            out[0][k] = I * (ky[k] * c[2][k] - kz[k] * c[1][k]);
            out[1][k] = I * (kz[k] * c[0][k] - kx[k] * c[2][k]);
            out[2][k] = I * (kx[k] * c[1][k] - ky[k] * c[0][k]);
        }
        Ok(Field::from_parts(Rank::Vector, out))
    }

    /// Componentwise Laplacian, multiplier `−|k|²`.
    pub fn laplacian(&self, f: &Field) -> Result<Field> {
        f.check(self)?;
        let k2 = self.k2();
        let comps = f.comps().iter().map(|c| c.iter().zip(k2).map(|(z, &q)| -q * z).collect()).collect();
        Ok(Field::from_parts(f.rank(), comps))
    }

    /// Leray–Hodge projection `I − k kᵀ/|k|²` per mode; the mean is untouched.
    pub fn leray_project(&self, v: &Field) -> Result<Field> {
        v.check(self)?;
        if v.rank() != Rank::Vector {
            return Err(Error::Rank("leray projection needs a vector field".into()));
        }
        let d = self.dim();
        let mut out = v.comps().to_vec();
        let kd2 = self.kd2();
        for k in 0..self.len() {
            if kd2[k] == 0.0 {
                continue;
            }
            let mut dot = Complex64::new(0.0, 0.0);
            for a in 0..d {
                dot += self.dwave(a)[k] * out[a][k];
            }
            let s = dot / kd2[k];
            for a in 0..d {
                out[a][k] -= s * self.dwave(a)[k];
            }
        }
        Ok(Field::from_parts(Rank::Vector, out))
    }

    /// Velocity from vorticity: solve `−Δψ = ω`, take the curl.
    ///
    /// In 3-d this is `û = i k × ω̂ / |k|²`; in 2-d `ω` is a scalar and
    /// `u = (∂₂ψ, −∂₁ψ)`.
    pub fn biot_savart(&self, omega: &Field) -> Result<Field> {
        omega.check(self)?;
        let want = if self.dim() == 2 { Rank::Scalar } else { Rank::Vector };
        if omega.rank() != want {
            return Err(Error::Rank(format!("biot_savart on a {}-d grid expects {want:?}", self.dim())));
        }
        let mean = omega.comps().iter().map(|c| c[0].norm()).fold(0.0, f64::max);
        if mean > 1e-12 * omega.max_abs().max(1e-300) && mean > 1e-300 {
            return Err(Error::NonZeroMean(mean));
        }
        let kd2 = self.kd2();
        let inv = |k: usize| if kd2[k] == 0.0 { 0.0 } else { 1.0 / kd2[k] };
        let c = omega.comps();
        let kx = self.dwave(0);
        let ky = self.dwave(1);
        if self.dim() == 2 {
            let mut ux = vec![Complex64::new(0.0, 0.0); self.len()];
            let mut uy = ux.clone();
            for k in 0..self.len() {
                let psi = c[0][k] * inv(k);
                ux[k] = I * ky[k] * psi;
                uy[k] = -I * kx[k] * psi;
            }
            return Ok(Field::from_parts(Rank::Vector, vec![ux, uy]));
        }
        let kz = self.dwave(2);
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.len()]; 3];
        for k in 0..self.len() {
            let s = inv(k);
            let (p0, p1, p2) = (c[0][k] * s, c[1][k] * s, c[2][k] * s);
            out[0][k] = I * (ky[k] * p2 - kz[k] * p1);
            out[1][k] = I * (kz[k] * p0 - kx[k] * p2);
            out[2][k] = I * (kx[k] * p1 - ky[k] * p0);
        }
        Ok(Field::from_parts(Rank::Vector, out))
    }

    /// Zeroes every mode outside the two-thirds mask.
    pub fn dealias(&self, f: &Field) -> Field {
        let mut out = f.clone();
        self.dealias_in_place(&mut out);
        out
    }

    pub fn dealias_in_place(&self, f: &mut Field) {
        let mask = self.mask();
        for c in f.comps_mut() {
            for (z, &keep) in c.iter_mut().zip(mask) {
                if !keep {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Forward transform + dealias of physical arrays, as a field of `rank`.
    pub(crate) fn project_products(&self, rank: Rank, arrays: &[Vec<f64>]) -> Field {
        let refs: Vec<&[f64]> = arrays.iter().map(Vec::as_slice).collect();
        let mut f = Field::from_parts(rank, self.forward_many(&refs));
        self.dealias_in_place(&mut f);
        f
    }

    /// Builds a field from a closure over modes: `f(idx, component)`.
    pub fn field_from_modes(
        &self,
        rank: Rank,
        f: impl Fn(usize, usize) -> Complex64,
    ) -> Field {
        let comps = (0..rank.components(self.dim()))
            .map(|c| (0..self.len()).map(|k| f(k, c)).collect())
            .collect();
        Field::from_parts(rank, comps)
    }

    /// Samples a closure at every grid point and transforms.
    pub fn field_from_fn(&self, rank: Rank, f: impl Fn([f64; 3]) -> Vec<f64> + Sync) -> Field {
        let ncomp = rank.components(self.dim());
        let pts: Vec<Vec<f64>> = (0..self.len()).map(|i| f(self.point(i))).collect();
        let comps: Vec<Vec<f64>> = (0..ncomp).map(|c| pts.iter().map(|p| p[c]).collect()).collect();
        let refs: Vec<&[f64]> = comps.iter().map(Vec::as_slice).collect();
        Field::from_parts(rank, self.forward_many(&refs))
    }

    /// Physical arrays of the spatial gradient of each component, in the
    /// tensor layout `comp * dim + axis`.
    pub(crate) fn physical_gradient(&self, f: &Field) -> Vec<Vec<f64>> {
        let d = self.dim();
        let specs: Vec<Vec<Complex64>> =
            f.comps().iter().flat_map(|c| (0..d).map(move |j| (c, j))).map(|(c, j)| self.deriv(c, j)).collect();
        let refs: Vec<&[Complex64]> = specs.iter().map(Vec::as_slice).collect();
        self.inverse_many(&refs)
    }
}
