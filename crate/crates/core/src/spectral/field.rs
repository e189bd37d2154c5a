use num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    Vector,
    /// Component `i * dim + j` holds `∂_j v_i`.
    Tensor,
}

impl Rank {
    pub fn components(self, dim: usize) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => dim,
            Rank::Tensor => dim * dim,
        }
    }
}

/// Spectral coefficients of a real periodic field, one array per component.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    rank: Rank,
    comps: Vec<Vec<Complex64>>,
}

/// Point values of a real periodic field, one array per component.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    rank: Rank,
    comps: Vec<Vec<f64>>,
}

fn check_shape<T>(grid: &Grid, rank: Rank, comps: &[Vec<T>]) -> Result<()> {
    let want = rank.components(grid.dim());
    if comps.len() != want {
        return Err(Error::Rank(format!(
            "{rank:?} field on a {}-d grid needs {want} components, got {}",
            grid.dim(),
            comps.len()
        )));
    }
    for c in comps {
        if c.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), got: c.len() });
        }
    }
    Ok(())
}

impl Field {
    pub fn new(grid: &Grid, rank: Rank, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        check_shape(grid, rank, &comps)?;
        Ok(Self { rank, comps })
    }

    pub(crate) fn from_parts(rank: Rank, comps: Vec<Vec<Complex64>>) -> Self {
        Self { rank, comps }
    }

    pub fn zeros(grid: &Grid, rank: Rank) -> Self {
        let comps = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; rank.components(grid.dim())];
        Self { rank, comps }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn comps(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    pub fn comp(&self, i: usize) -> &[Complex64] {
        &self.comps[i]
    }

    pub fn into_comps(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    pub fn len(&self) -> usize {
        self.comps.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Verifies the field lives on `grid`.
    pub fn check(&self, grid: &Grid) -> Result<()> {
        check_shape(grid, self.rank, &self.comps)
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let comps = self.comps.iter().map(|c| c.iter().map(|&z| f(z)).collect()).collect();
        Self { rank: self.rank, comps }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Self {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * s).collect())
            .collect();
        Self { rank: self.rank, comps }
    }

    pub fn sub(&self, other: &Field) -> Self {
        self.axpy(-1.0, other)
    }

    /// `Σ_k |f̂_k|²` summed over components (no volume factor).
    pub fn spectral_sum_sq(&self) -> f64 {
        self.comps.iter().flat_map(|c| c.iter()).map(|z| z.norm_sqr()).sum()
    }

    /// `∫ |f|² dx` via Parseval.
    pub fn l2_sq(&self, grid: &Grid) -> f64 {
        grid.volume() * self.spectral_sum_sq()
    }

    pub fn l2(&self, grid: &Grid) -> f64 {
        self.l2_sq(grid).sqrt()
    }

    /// Largest coefficient modulus over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flat_map(|c| c.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flat_map(|c| c.iter()).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Zero-mean coefficient of each component.
    pub fn mean(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c[0].re).collect()
    }

    pub fn remove_mean(&mut self) {
        for c in &mut self.comps {
            c[0] = Complex64::new(0.0, 0.0);
        }
    }
}

impl PhysicalField {
    pub fn new(grid: &Grid, rank: Rank, comps: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(grid, rank, &comps)?;
        Ok(Self { rank, comps })
    }

    pub(crate) fn from_parts(rank: Rank, comps: Vec<Vec<f64>>) -> Self {
        Self { rank, comps }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn comps(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &[f64] {
        &self.comps[i]
    }

    pub fn into_comps(self) -> Vec<Vec<f64>> {
        self.comps
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        check_shape(grid, self.rank, &self.comps)
    }

    /// Pointwise Euclidean norm over components.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        let len = self.comps[0].len();
        (0..len)
            .map(|p| self.comps.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
            .collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.pointwise_norm().into_iter().fold(0.0, f64::max)
    }

    /// `∫ |f|² dx` by grid quadrature.
    pub fn l2_sq(&self, grid: &Grid) -> f64 {
        grid.cell_volume() * self.comps.iter().flat_map(|c| c.iter()).map(|x| x * x).sum::<f64>()
    }
}
