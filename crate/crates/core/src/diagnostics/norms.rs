use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// Largest admissible exponent `λ|k|` in an analytic weight.
pub const ANALYTIC_GUARD: f64 = 300.0;

/// `{Σ_k e^{pλ|k|} |f̂_k|^p}^{1/p}` as a bare spectral sum, `|f̂_k|` the
/// Euclidean norm over components.
pub fn analytic_norm(grid: &Grid, f: &Field, lambda: f64, p: u32) -> Result<f64> {
    f.check(grid)?;
    if p != 1 && p != 2 {
        return Err(Error::config(format!("analytic norm exponent must be 1 or 2, got {p}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::config(format!("analytic radius must be finite and >= 0, got {lambda}")));
    }
    let kabs = grid.kabs();
    let mut kmax: f64 = 0.0;
    let mut sum = 0.0;
    for k in 0..grid.len() {
        let a2: f64 = f.comps().iter().map(|c| c[k].norm_sqr()).sum();
        if a2 == 0.0 {
            continue;
        }
        kmax = kmax.max(kabs[k]);
        let w = (p as f64 * lambda * kabs[k]).exp();
        sum += if p == 1 { w * a2.sqrt() } else { w * a2 };
    }
    if lambda * kmax > ANALYTIC_GUARD {
        return Err(Error::Overflow {
            what: format!("analytic weight with lambda = {lambda} at |k| = {kmax}"),
            max_admissible: ANALYTIC_GUARD / kmax,
        });
    }
    Ok(if p == 1 { sum } else { sum.sqrt() })
}

/// `y(t) = Σ_k e^{2v(t−s)|k|} |ω̂_k|²` with `v = √(ν/T)`.
pub fn gevrey_y(grid: &Grid, omega: &Field, nu: f64, horizon: f64, s: f64, t: f64) -> Result<f64> {
    if t < s {
        return Err(Error::config(format!("Gevrey window starts at s = {s} after t = {t}")));
    }
    if !(horizon > 0.0) || !(nu >= 0.0) {
        return Err(Error::config("Gevrey monitor needs T > 0 and nu >= 0"));
    }
    let lambda = (nu / horizon).sqrt() * (t - s);
    Ok(analytic_norm(grid, omega, lambda, 2)?.powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::test_support::random_vector_field;
    use crate::spectral::Rank;
    use std::f64::consts::E;

    #[test]
    fn zero_radius_is_plain_sum() {
        let g = Grid::new(3, 16).unwrap();
        let f = random_vector_field(&g, 1);
        let a = analytic_norm(&g, &f, 0.0, 2).unwrap();
        assert!((a * a - f.spectral_sum_sq()).abs() < 1e-14 * a * a);
    }

    #[test]
    fn cosine_values() {
        let g = Grid::new(2, 16).unwrap();
        let f = g.dealias(&g.field_from_fn(Rank::Scalar, |x| vec![x[0].cos()]));
        // two modes of 1/2: √(2 · e² / 4) = e/√2
        let a = analytic_norm(&g, &f, 1.0, 2).unwrap();
        assert!((a - E / 2f64.sqrt()).abs() < 1e-14);
        assert!((a - 1.9221155140795583).abs() < 1e-14);
        let a1 = analytic_norm(&g, &f, 1.0, 1).unwrap();
        assert!((a1 - E).abs() < 1e-12);
    }

    #[test]
    fn guard_reports_admissible_radius() {
        let g = Grid::new(2, 16).unwrap();
        let k = g.mode_index([3, 0, 0]);
        let f = g.field_from_modes(Rank::Scalar, |i, _| if i == k { 1.0.into() } else { 0.0.into() });
        match analytic_norm(&g, &f, 101.0, 1) {
            Err(Error::Overflow { max_admissible, .. }) => assert_eq!(max_admissible, 100.0),
            other => panic!("{other:?}"),
        }
        assert!(analytic_norm(&g, &f, 1.0, 3).is_err());
    }

    #[test]
    fn gevrey_window() {
        let g = Grid::new(3, 8).unwrap();
        let f = g.field_from_fn(Rank::Vector, |x| vec![0.0, 0.0, x[0].sin()]);
        let base = f.spectral_sum_sq();
        assert!((gevrey_y(&g, &f, 0.3, 2.0, 0.4, 0.4).unwrap() - base).abs() < 1e-15);
        let y = gevrey_y(&g, &f, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((y - E * E * base).abs() < 1e-13 * y);
        assert!(gevrey_y(&g, &f, 1.0, 1.0, 0.5, 0.4).is_err());
    }
}
