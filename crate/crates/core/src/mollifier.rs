//! Smoothing filters acting as Fourier multipliers `Ĵ(δ|k|)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// Largest admissible `δ|k|` (and largest exponent of the inverse square root).
pub const INVERSE_SQRT_GUARD: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MollifierKind {
    /// `Ĵ(ξ) = e^{−|ξ|}`.
    Poisson,
    /// `Ĵ(ξ) = e^{−|ξ|²/2}`.
    Gaussian,
    /// Indicator of `|ξ| ≤ 1`: Galerkin truncation at `|k| ≤ 1/δ`.
    SharpTruncation,
}

impl FromStr for MollifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "poisson" => Ok(Self::Poisson),
            "gaussian" => Ok(Self::Gaussian),
            "sharp" | "sharptruncation" | "sharp_truncation" | "galerkin" => Ok(Self::SharpTruncation),
            other => Err(Error::config(format!("unknown mollifier kind `{other}`"))),
        }
    }
}

impl fmt::Display for MollifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Poisson => "poisson",
            Self::Gaussian => "gaussian",
            Self::SharpTruncation => "sharp",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mollifier {
    kind: MollifierKind,
    delta: f64,
}

impl Mollifier {
    pub fn new(kind: MollifierKind, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::config(format!("mollifier delta must be finite and >= 0, got {delta}")));
        }
        Ok(Self { kind, delta })
    }

    pub fn kind(&self) -> MollifierKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `Ĵ(δ|k|)` for a wavevector of length `kabs`.
    pub fn symbol(&self, kabs: f64) -> f64 {
        let xi = self.delta * kabs;
        match self.kind {
            MollifierKind::Poisson => (-xi).exp(),
            MollifierKind::Gaussian => (-0.5 * xi * xi).exp(),
            MollifierKind::SharpTruncation => {
                if self.delta == 0.0 || xi <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Multiplier per lattice mode.
    pub fn multipliers(&self, grid: &Grid) -> Vec<f64> {
        grid.kabs().iter().map(|&k| self.symbol(k)).collect()
    }

    /// `[f]_δ`, acting componentwise.
    pub fn apply(&self, grid: &Grid, f: &Field) -> Result<Field> {
        f.check(grid)?;
        if self.delta == 0.0 {
            return Ok(f.clone());
        }
        Ok(multiply(f, &self.multipliers(grid)))
    }

    /// Exponent `x` with `Ĵ(δ|k|)^{−1/2} = e^{x}`, or `None` for the sharp
    /// filter outside its band.
    fn inverse_sqrt_exponent(&self, kabs: f64) -> Option<f64> {
        let xi = self.delta * kabs;
        match self.kind {
            MollifierKind::Poisson => Some(0.5 * xi),
            MollifierKind::Gaussian => Some(0.25 * xi * xi),
            MollifierKind::SharpTruncation => (self.delta == 0.0 || xi <= 1.0).then_some(0.0),
        }
    }

    /// Multipliers `Ĵ(δ|k|)^{−1/2}` on the modes where `f` is non-zero.
    ///
    /// Fails if a needed mode lies outside the sharp band or past the
    /// overflow guard.
    pub fn inverse_sqrt_multipliers(&self, grid: &Grid, f: &Field) -> Result<Vec<f64>> {
        f.check(grid)?;
        let kabs = grid.kabs();
        let mut out = vec![1.0; grid.len()];
        for k in 0..grid.len() {
            if f.comps().iter().all(|c| c[k].re == 0.0 && c[k].im == 0.0) {
                continue;
            }
            let guard_hit = self.delta * kabs[k] > INVERSE_SQRT_GUARD;
            match self.inverse_sqrt_exponent(kabs[k]) {
                None => {
                    return Err(Error::config(format!(
                        "sharp mollifier has no inverse at |k| = {} (band |k| <= {})",
                        kabs[k],
                        1.0 / self.delta
                    )))
                }
                Some(x) if guard_hit || x > 0.5 * INVERSE_SQRT_GUARD => {
                    let max_admissible = match self.kind {
                        MollifierKind::Gaussian => (2.0 * INVERSE_SQRT_GUARD).sqrt(),
                        _ => INVERSE_SQRT_GUARD,
                    };
                    return Err(Error::Overflow {
                        what: format!("inverse square root of {} filter at delta*|k| = {}", self.kind, self.delta * kabs[k]),
                        max_admissible,
                    });
                }
                Some(x) => out[k] = x.exp(),
            }
        }
        Ok(out)
    }

    /// `Ĵ(δ|k|)^{−1/2} f`, the operator behind the analytic energy control.
    pub fn apply_inverse_sqrt(&self, grid: &Grid, f: &Field) -> Result<Field> {
        if self.delta == 0.0 {
            f.check(grid)?;
            return Ok(f.clone());
        }
        let m = self.inverse_sqrt_multipliers(grid, f)?;
        Ok(multiply(f, &m))
    }
}

fn multiply(f: &Field, m: &[f64]) -> Field {
    let comps = f.comps().iter().map(|c| c.iter().zip(m).map(|(z, &s)| z * s).collect()).collect();
    Field::from_parts(f.rank(), comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::test_support::random_vector_field;
    use crate::spectral::Rank;

    #[test]
    fn rejects_negative_delta() {
        assert!(Mollifier::new(MollifierKind::Poisson, -1.0).is_err());
        assert!(Mollifier::new(MollifierKind::Poisson, f64::NAN).is_err());
    }

    #[test]
    fn poisson_on_cosine() {
        let g = Grid::new(2, 16).unwrap();
        let f = g.field_from_fn(Rank::Scalar, |x| vec![x[0].cos()]);
        let m = Mollifier::new(MollifierKind::Poisson, 0.5).unwrap();
        let out = m.apply(&g, &f).unwrap();
        let want = f.scaled(0.606_530_659_712_633_4);
        assert!(out.sub(&want).max_abs() < 1e-15);
    }

    #[test]
    fn gaussian_factor_at_two() {
        let m = Mollifier::new(MollifierKind::Gaussian, 1.0).unwrap();
        assert!((m.symbol(2.0) - 0.135_335_283_236_612_7).abs() < 1e-15);
        let p = Mollifier::new(MollifierKind::Poisson, 0.5).unwrap();
        let g = Grid::new(2, 8).unwrap();
        let f = g.field_from_modes(Rank::Scalar, |k, _| {
            if k == g.mode_index([1, 0, 0]) {
                num_complex::Complex64::new(1.0, 0.0)
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        });
        let out = p.apply_inverse_sqrt(&g, &f).unwrap();
        assert!((out.comp(0)[g.mode_index([1, 0, 0])].re - 1.284_025_416_687_741_5).abs() < 1e-15);
    }

    #[test]
    fn zero_delta_is_identity() {
        let g = Grid::new(2, 16).unwrap();
        let f = random_vector_field(&g, 3);
        for kind in [MollifierKind::Poisson, MollifierKind::Gaussian, MollifierKind::SharpTruncation] {
            let m = Mollifier::new(kind, 0.0).unwrap();
            assert_eq!(m.apply(&g, &f).unwrap(), f);
            assert_eq!(m.apply_inverse_sqrt(&g, &f).unwrap(), f);
        }
    }

    #[test]
    fn inverse_sqrt_round_trip() {
        let g = Grid::new(3, 16).unwrap();
        let f = random_vector_field(&g, 5);
        for kind in [MollifierKind::Poisson, MollifierKind::Gaussian] {
            let m = Mollifier::new(kind, 0.3).unwrap();
            let h = m.apply_inverse_sqrt(&g, &f).unwrap();
            let back = m.apply(&g, &m.apply_inverse_sqrt(&g, &h).unwrap()).unwrap();
            assert!(back.sub(&f).max_abs() <= 1e-12 * f.max_abs());
        }
    }

    #[test]
    fn sharp_inverse_outside_band_is_rejected() {
        let g = Grid::new(2, 16).unwrap();
        let f = random_vector_field(&g, 1);
        let m = Mollifier::new(MollifierKind::SharpTruncation, 0.5).unwrap();
        assert!(m.apply_inverse_sqrt(&g, &f).is_err());
        let banded = m.apply(&g, &f).unwrap();
        assert_eq!(m.apply_inverse_sqrt(&g, &banded).unwrap(), banded);
    }

    #[test]
    fn overflow_guard() {
        let g = Grid::new(2, 64).unwrap();
        let f = random_vector_field(&g, 2);
        let m = Mollifier::new(MollifierKind::Poisson, 3.0).unwrap();
        assert!(matches!(m.apply_inverse_sqrt(&g, &f), Err(Error::Overflow { .. })));
    }

    #[test]
    fn commutes_with_differentiation() {
        let g = Grid::new(3, 16).unwrap();
        let f = random_vector_field(&g, 9);
        let m = Mollifier::new(MollifierKind::Gaussian, 0.2).unwrap();
        let a = g.curl(&m.apply(&g, &f).unwrap()).unwrap();
        let b = m.apply(&g, &g.curl(&f).unwrap()).unwrap();
        assert!(a.sub(&b).max_abs() < 1e-15);
        let a = g.divergence(&m.apply(&g, &f).unwrap()).unwrap();
        let b = m.apply(&g, &g.divergence(&f).unwrap()).unwrap();
        assert!(a.sub(&b).max_abs() < 1e-15);
    }
}
