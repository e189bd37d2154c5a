//! Periodic grids, spectral transforms and differential operators.

mod field;
mod grid;
mod ops;

pub use field::{Field, PhysicalField, Rank};
pub use grid::Grid;

#[cfg(test)]
pub(crate) mod test_support {
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::{Field, Grid, Rank};

    pub fn random_array(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    /// Random real vector field with zero mean, band-limited to the mask.
    pub fn random_vector_field(g: &Grid, seed: u64) -> Field {
        let comps: Vec<Vec<f64>> = (0..g.dim()).map(|c| random_array(g.len(), seed * 31 + c as u64)).collect();
        let refs: Vec<&[f64]> = comps.iter().map(Vec::as_slice).collect();
        let mut f = Field::new(g, Rank::Vector, g.forward_many(&refs)).unwrap();
        g.dealias_in_place(&mut f);
        f.remove_mean();
        f
    }

    pub fn random_scalar_field(g: &Grid, seed: u64) -> Field {
        let a = random_array(g.len(), seed);
        let mut f = Field::new(g, Rank::Scalar, g.forward_many(&[&a])).unwrap();
        g.dealias_in_place(&mut f);
        f.remove_mean();
        f
    }

    /// Direct `O(N²)` DFT with the `1/N` convention.
    pub fn naive_dft(g: &Grid, vals: &[f64]) -> Vec<Complex64> {
        (0..g.len())
            .map(|k| {
                let mut s = Complex64::new(0.0, 0.0);
                for (p, &v) in vals.iter().enumerate() {
                    let x = g.point(p);
                    let phase: f64 = (0..g.dim()).map(|a| g.wavenumber(a, k) * x[a]).sum();
                    s += v * Complex64::from_polar(1.0, -phase);
                }
                s / g.len() as f64
            })
            .collect()
    }

    /// Direct lattice convolution `c_k = Σ_{p+q=k} a_p b_q` over integer wavevectors.
    pub fn naive_convolution(g: &Grid, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
        let half = (g.n() / 2) as i64;
        for p in 0..g.len() {
            for q in 0..g.len() {
                let mut k = [0i64; 3];
                let mut inside = true;
                for ax in 0..g.dim() {
                    let s = g.wavenumber(ax, p) as i64 + g.wavenumber(ax, q) as i64;
                    inside &= s >= -half && s < half;
                    k[ax] = s;
                }
                if inside {
                    out[g.mode_index(k)] += a[p] * b[q];
                }
            }
        }
        out
    }
}
