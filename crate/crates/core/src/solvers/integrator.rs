use num_complex::Complex64;

use super::Scheme;
use crate::error::{Error, Result};
use crate::spectral::Grid;

/// A stack of spectral arrays advanced together; every array diffuses with `νΔ`.
pub type Spectra = Vec<Vec<Complex64>>;

/// Lawson (integrating-factor) Runge–Kutta stepper.
///
/// The linear part `νΔ` is integrated exactly by the heat multiplier
/// `E(h) = e^{−ν|k|²h}`; the nonlinear right-hand side is explicit.
#[derive(Clone, Copy, Debug)]
pub struct Integrator<'g> {
    grid: &'g Grid,
    nu: f64,
    scheme: Scheme,
}

impl<'g> Integrator<'g> {
    pub fn new(grid: &'g Grid, nu: f64, scheme: Scheme) -> Self {
        Self { grid, nu, scheme }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Heat multiplier `e^{−ν|k|²h}` per mode.
    pub fn heat_factor(&self, h: f64) -> Vec<f64> {
        self.grid.k2().iter().map(|&q| (-self.nu * q * h).exp()).collect()
    }

    /// Advances `y` from `t` to `t + dt`.
    pub fn step<F>(&self, y: &Spectra, t: f64, dt: f64, mut rhs: F) -> Result<Spectra>
    where
        F: FnMut(&Spectra, f64) -> Result<Spectra>,
    {
        let out = match self.scheme {
            Scheme::Rk2 => {
                let e = self.heat_factor(dt);
                let k1 = rhs(y, t)?;
                let pred = combine(&[(1.0, y), (dt, &k1)], Some(&e));
                let k2 = rhs(&pred, t + dt)?;
                let mut next = combine(&[(1.0, y), (0.5 * dt, &k1)], Some(&e));
                add_scaled(&mut next, 0.5 * dt, &k2, None);
                next
            }
            Scheme::Rk4 => {
                let e = self.heat_factor(dt);
                let eh = self.heat_factor(0.5 * dt);
                let k1 = rhs(y, t)?;
                let y2 = combine(&[(1.0, y), (0.5 * dt, &k1)], Some(&eh));
                let k2 = rhs(&y2, t + 0.5 * dt)?;
                let mut y3 = combine(&[(1.0, y)], Some(&eh));
                add_scaled(&mut y3, 0.5 * dt, &k2, None);
                let k3 = rhs(&y3, t + 0.5 * dt)?;
                let mut y4 = combine(&[(1.0, y)], Some(&e));
                add_scaled(&mut y4, dt, &k3, Some(&eh));
                let k4 = rhs(&y4, t + dt)?;

                let mut next = combine(&[(1.0, y), (dt / 6.0, &k1)], Some(&e));
                let mid = combine(&[(dt / 3.0, &k2), (dt / 3.0, &k3)], Some(&eh));
                add_scaled(&mut next, 1.0, &mid, None);
                add_scaled(&mut next, dt / 6.0, &k4, None);
                next
            }
        };
        if !out.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::BlowUp { t: t + dt, reason: "non-finite spectral coefficient".into() });
        }
        Ok(out)
    }
}

/// `mult ⊙ Σ s_i y_i`.
fn combine(terms: &[(f64, &Spectra)], mult: Option<&[f64]>) -> Spectra {
    let (s0, y0) = terms[0];
    let mut out: Spectra = y0.iter().map(|c| c.iter().map(|z| z * s0).collect()).collect();
    for &(s, y) in &terms[1..] {
        add_scaled(&mut out, s, y, None);
    }
    if let Some(m) = mult {
        for c in &mut out {
            for (z, &f) in c.iter_mut().zip(m) {
                *z *= f;
            }
        }
    }
    out
}

/// `acc += s · (mult ⊙ y)`.
fn add_scaled(acc: &mut Spectra, s: f64, y: &Spectra, mult: Option<&[f64]>) {
    for (a, b) in acc.iter_mut().zip(y) {
        match mult {
            Some(m) => {
                for ((x, z), &f) in a.iter_mut().zip(b).zip(m) {
                    *x += z * (s * f);
                }
            }
            None => {
                for (x, z) in a.iter_mut().zip(b) {
                    *x += z * s;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_mode(g: &Grid, k: [i64; 3]) -> Spectra {
        let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
        c[g.mode_index(k)] = Complex64::new(1.0, 0.0);
        c[g.mode_index([-k[0], -k[1], -k[2]])] = Complex64::new(1.0, 0.0);
        vec![c]
    }

    #[test]
    fn heat_kernel_is_exact() {
        let g = Grid::new(2, 16).unwrap();
        let y = single_mode(&g, [2, 1, 0]);
        for scheme in [Scheme::Rk2, Scheme::Rk4] {
            let it = Integrator::new(&g, 0.3, scheme);
            let out = it.step(&y, 0.0, 0.01, |y, _| Ok(vec![vec![Complex64::new(0.0, 0.0); y[0].len()]])).unwrap();
            let want = (-0.3f64 * 5.0 * 0.01).exp();
            assert!((out[0][g.mode_index([2, 1, 0])].re - want).abs() < 1e-15);
        }
    }

    #[test]
    fn inviscid_zero_rhs_is_identity() {
        let g = Grid::new(2, 8).unwrap();
        let y = single_mode(&g, [1, 3, 0]);
        let it = Integrator::new(&g, 0.0, Scheme::Rk4);
        let out = it.step(&y, 0.0, 0.1, |y, _| Ok(vec![vec![Complex64::new(0.0, 0.0); y[0].len()]])).unwrap();
        assert_eq!(out, y);
    }

    #[test]
    fn orders_on_linear_forcing() {
        // y' = -νk²y + i a y, exact e^{(-νk² + ia)t}
        let g = Grid::new(2, 8).unwrap();
        let y0 = single_mode(&g, [1, 1, 0]);
        let a = 1.3;
        let idx = g.mode_index([1, 1, 0]);
        for (scheme, order) in [(Scheme::Rk2, 2.0), (Scheme::Rk4, 4.0)] {
            let it = Integrator::new(&g, 0.2, scheme);
            let mut errs = Vec::new();
            for steps in [20, 40] {
                let dt = 1.0 / steps as f64;
                let mut y = y0.clone();
                for s in 0..steps {
                    y = it
                        .step(&y, s as f64 * dt, dt, |y, _| {
                            Ok(y.iter().map(|c| c.iter().map(|z| z * Complex64::new(0.0, a)).collect()).collect())
                        })
                        .unwrap();
                }
                let exact = (Complex64::new(-0.4, a)).exp();
                errs.push((y[0][idx] - exact).norm());
            }
            let observed = (errs[0] / errs[1]).log2();
            assert!(observed > order - 0.2, "{scheme:?}: {observed}");
        }
    }

    #[test]
    fn non_finite_is_blow_up() {
        let g = Grid::new(2, 8).unwrap();
        let y = single_mode(&g, [1, 0, 0]);
        let it = Integrator::new(&g, 0.0, Scheme::Rk2);
        let r = it.step(&y, 1.0, 0.5, |y, _| Ok(vec![vec![Complex64::new(f64::NAN, 0.0); y[0].len()]]));
        match r {
            Err(Error::BlowUp { t, .. }) => assert_eq!(t, 1.5),
            other => panic!("{other:?}"),
        }
    }
}
