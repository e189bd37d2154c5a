//! Binary snapshots: a fixed little-endian header followed by physical arrays.
//!
//! Layout: `NITNS001`, version `u32`, dim `u32`, n `u32`, formulation tag `u32`,
//! array count `u32`, then ν, δ, g, t, t₁ as `f64`, then each array row-major.
//! The arrays are `u` (direct, mollified), `ω` (vortex), `w` (cotangent), or
//! `ℓ` then `v`, optionally followed by `ζ` (Eulerian-Lagrangian).

use std::fs;
use std::path::Path;

use crate::el::{grad_map, inverse_grad, ElState};
use crate::error::{Error, Result};
use crate::solvers::{FlowState, FlowVariable, Formulation, State};
use crate::spectral::{Grid, PhysicalField, Rank};

pub const MAGIC: &[u8; 8] = b"NITNS001";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 5 * 4 + 5 * 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dim: usize,
    pub n: usize,
    pub nu: f64,
    pub delta: f64,
    pub g: f64,
    pub t: f64,
    pub t1: f64,
    pub formulation: Formulation,
    pub fields: Vec<PhysicalField>,
}

impl Snapshot {
    pub fn from_state(
        grid: &Grid,
        state: &State,
        formulation: Formulation,
        nu: f64,
        delta: f64,
        g: f64,
    ) -> Result<Self> {
        let (t1, spectral) = match state {
            State::Flow(s) => (s.t, vec![s.field()]),
            State::El(s) => {
                let mut v = vec![&s.ell, &s.v];
                v.extend(s.zeta.as_ref());
                (s.t1, v)
            }
        };
        let matches = match (state, formulation) {
            (State::El(_), Formulation::EulerianLagrangian) => true,
            (State::Flow(s), f) => matches!(
                (&s.var, f),
                (FlowVariable::Velocity(_), Formulation::Direct | Formulation::Mollified)
                    | (FlowVariable::Vorticity(_), Formulation::Vortex)
                    | (FlowVariable::Cotangent(_), Formulation::Cotangent)
            ),
            _ => false,
        };
        if !matches {
            return Err(Error::Snapshot(format!("state does not belong to formulation {formulation}")));
        }
        let fields = spectral.into_iter().map(|f| grid.to_physical(f)).collect::<Result<_>>()?;
        Ok(Self { dim: grid.dim(), n: grid.n(), nu, delta, g, t: state.t(), t1, formulation, fields })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n)
    }

    /// Rebuilds the solver state; an Eulerian-Lagrangian `log det` is recomputed from `ℓ`.
    pub fn to_state(&self, grid: &Grid) -> Result<State> {
        if grid.dim() != self.dim || grid.n() != self.n {
            return Err(Error::Snapshot(format!(
                "snapshot grid {}^{} does not match {}^{}",
                self.n,
                self.dim,
                grid.n(),
                grid.dim()
            )));
        }
        let spec = self.fields.iter().map(|f| grid.to_spectral(f)).collect::<Result<Vec<_>>>()?;
        let mut it = spec.into_iter();
        let mut next = || it.next().ok_or_else(|| Error::Snapshot("missing payload array".into()));
        let state = match self.formulation {
            Formulation::Direct | Formulation::Mollified => {
                State::Flow(FlowState { t: self.t, var: FlowVariable::Velocity(next()?) })
            }
            Formulation::Vortex => State::Flow(FlowState { t: self.t, var: FlowVariable::Vorticity(next()?) }),
            Formulation::Cotangent => State::Flow(FlowState { t: self.t, var: FlowVariable::Cotangent(next()?) }),
            Formulation::EulerianLagrangian => {
                let ell = next()?;
                let v = next()?;
                let zeta = next().ok();
                let (_, det) = inverse_grad(grid.dim(), &grad_map(grid, &ell)?, f64::MIN_POSITIVE)?;
                let log: Vec<f64> = det.iter().map(|d| d.abs().ln()).collect();
                let logdet = grid.to_spectral(&PhysicalField::new(grid, Rank::Scalar, vec![log])?)?;
                State::El(ElState { ell, v, logdet, zeta, t: self.t, t1: self.t1, restart_count: 0 })
            }
        };
        Ok(state)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let arrays: usize = self.fields.iter().map(|f| f.comps().len()).sum();
        let len = self.n.pow(self.dim as u32);
        let mut out = Vec::with_capacity(HEADER_LEN + arrays * len * 8);
        out.extend_from_slice(MAGIC);
        for v in [VERSION, self.dim as u32, self.n as u32, self.formulation.tag(), arrays as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [self.nu, self.delta, self.g, self.t, self.t1] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for f in &self.fields {
            for c in f.comps() {
                for x in c {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        out
    }

    /// Parses a snapshot, optionally insisting on a formulation.
    pub fn from_bytes(bytes: &[u8], expected: Option<Formulation>) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Snapshot(format!("truncated header ({} bytes)", bytes.len())));
        }
        if &bytes[..8] != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let u = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap());
        let f = |i: usize| f64::from_le_bytes(bytes[28 + 8 * i..36 + 8 * i].try_into().unwrap());
        if u(0) != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {} (expected {VERSION})", u(0))));
        }
        let (dim, n, tag, arrays) = (u(1) as usize, u(2) as usize, u(3), u(4) as usize);
        let grid = Grid::new(dim, n).map_err(|e| Error::Snapshot(format!("bad grid in header: {e}")))?;
        let formulation =
            Formulation::from_tag(tag).ok_or_else(|| Error::Snapshot(format!("unknown formulation tag {tag}")))?;
        if let Some(want) = expected {
            let compatible = want == formulation
                || matches!((want, formulation), (Formulation::Direct | Formulation::Mollified, Formulation::Direct | Formulation::Mollified));
            if !compatible {
                return Err(Error::Snapshot(format!("formulation tag mismatch: file holds {formulation}, expected {want}")));
            }
        }
        let need = HEADER_LEN + arrays * grid.len() * 8;
        if bytes.len() != need {
            return Err(Error::Snapshot(format!("payload is {} bytes, header declares {need}", bytes.len())));
        }
        let ranks = payload_ranks(formulation, dim, arrays);
        let declared: usize = ranks.iter().map(|r| r.components(dim)).sum();
        if declared != arrays {
            return Err(Error::Snapshot(format!("{arrays} arrays do not fit formulation {formulation}")));
        }
        let mut values = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let fields = ranks
            .into_iter()
            .map(|r| {
                let comps = (0..r.components(dim)).map(|_| values.by_ref().take(grid.len()).collect()).collect();
                PhysicalField::new(&grid, r, comps)
            })
            .collect::<Result<_>>()?;
        Ok(Self { dim, n, nu: f(0), delta: f(1), g: f(2), t: f(3), t1: f(4), formulation, fields })
    }
}

fn payload_ranks(formulation: Formulation, dim: usize, arrays: usize) -> Vec<Rank> {
    match formulation {
        Formulation::Vortex if dim == 2 => vec![Rank::Scalar],
        Formulation::EulerianLagrangian if arrays == 3 * dim => vec![Rank::Vector; 3],
        Formulation::EulerianLagrangian => vec![Rank::Vector; 2],
        _ => vec![Rank::Vector],
    }
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<()> {
    fs::write(path, snap.to_bytes())?;
    Ok(())
}

pub fn read_snapshot(path: &Path, expected: Option<Formulation>) -> Result<Snapshot> {
    Snapshot::from_bytes(&fs::read(path)?, expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::test_support::random_vector_field;

    #[test]
    fn header_size_and_magic() {
        let g = Grid::new(2, 8).unwrap();
        let s = State::from_velocity(&g, Formulation::Vortex, random_vector_field(&g, 1), 0.5, false).unwrap();
        let snap = Snapshot::from_state(&g, &s, Formulation::Vortex, 0.1, 0.2, 0.1).unwrap();
        let b = snap.to_bytes();
        assert_eq!(&b[..8], b"NITNS001");
        assert_eq!(b.len(), HEADER_LEN + 64 * 8);
        assert_eq!(Snapshot::from_bytes(&b, None).unwrap(), snap);
    }

    #[test]
    fn version_and_shape_checks() {
        let g = Grid::new(2, 8).unwrap();
        let s = State::from_velocity(&g, Formulation::Direct, random_vector_field(&g, 2), 0.0, false).unwrap();
        let mut b = Snapshot::from_state(&g, &s, Formulation::Direct, 0.1, 0.0, 0.1).unwrap().to_bytes();
        b[8] = 2;
        assert!(Snapshot::from_bytes(&b, None).unwrap_err().to_string().contains("version"));
        b[8] = 1;
        b[24] = 3;
        assert!(Snapshot::from_bytes(&b, None).is_err());
    }

    #[test]
    fn el_state_round_trip() {
        let g = Grid::new(2, 16).unwrap();
        let mut s = ElState::new(&g, random_vector_field(&g, 3), 0.2, false).unwrap();
        s.ell = random_vector_field(&g, 4).scaled(0.01);
        s.t = 0.3;
        let snap = Snapshot::from_state(&g, &State::El(s.clone()), Formulation::EulerianLagrangian, 0.1, 0.0, 0.1).unwrap();
        let back = Snapshot::from_bytes(&snap.to_bytes(), Some(Formulation::EulerianLagrangian)).unwrap();
        assert_eq!(back, snap);
        let State::El(r) = back.to_state(&g).unwrap() else { panic!() };
        assert_eq!((r.t, r.t1), (0.3, 0.2));
        assert!(r.ell.sub(&s.ell).max_abs() < 1e-15);
        assert!(r.logdet.max_abs() > 0.0);
    }
}
