use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::el::ElParams;
use crate::error::{Error, Result};
use crate::mollifier::{Mollifier, MollifierKind};
use crate::solvers::{Formulation, Scheme, SolverConfig};
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcKind {
    TaylorGreen,
    Abc,
    RandomBand,
}

impl FromStr for IcKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "taylor_green" | "tg" => Ok(Self::TaylorGreen),
            "abc" => Ok(Self::Abc),
            "random_band" | "random" => Ok(Self::RandomBand),
            other => Err(Error::config(format!("unknown initial condition `{other}`"))),
        }
    }
}

impl std::fmt::Display for IcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TaylorGreen => "taylor_green",
            Self::Abc => "abc",
            Self::RandomBand => "random_band",
        })
    }
}

/// Initial velocity recipe.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialCondition {
    pub kind: IcKind,
    pub seed: u64,
    /// Velocity scale; the target kinetic energy for `random_band`.
    pub amplitude: f64,
    pub kmin: f64,
    pub kmax: f64,
    /// Relative L² size of a seeded random-band perturbation added on top.
    pub perturb: f64,
    /// Rescale the final field to this initial Reynolds number.
    pub r0: Option<f64>,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self { kind: IcKind::TaylorGreen, seed: 0, amplitude: 1.0, kmin: 1.0, kmax: 4.0, perturb: 0.0, r0: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub every: usize,
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), every: 1, snapshots: true }
    }
}

/// A full experiment, as read from a `key = value` file.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub n: usize,
    pub solver: SolverConfig,
    pub ic: InitialCondition,
    pub output: OutputConfig,
    /// Formulations run side by side by `compare`.
    pub compare_formulations: Vec<Formulation>,
    /// Mollifier scales swept by `compare`.
    pub compare_deltas: Vec<f64>,
    /// Restart thresholds swept by `restart-study`.
    pub study_g: Vec<f64>,
    /// Initial conditions swept by `restart-study`.
    pub study_ics: Vec<IcKind>,
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n)
    }
}

const KEYS: &[&str] = &[
    "grid.dim",
    "grid.n",
    "nu",
    "dt",
    "cfl",
    "t_end",
    "formulation",
    "scheme",
    "mollifier.kind",
    "mollifier.delta",
    "el.g",
    "el.s0",
    "el.det_guard",
    "el.max_retries",
    "el.evolve_zeta",
    "ic.kind",
    "ic.seed",
    "ic.amplitude",
    "ic.kmin",
    "ic.kmax",
    "ic.perturb",
    "ic.r0",
    "output.dir",
    "output.every",
    "output.snapshots",
    "diag.lambda",
    "diag.p",
    "diag.horizon",
    "diag.gevrey_start",
    "compare.formulations",
    "compare.deltas",
    "study.g",
    "study.ic",
];

const REQUIRED: &[&str] = &["grid.dim", "grid.n", "nu", "t_end", "formulation", "ic.kind"];

/// Raw entries with the line each came from (0 for command-line overrides).
struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn insert(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::ConfigKey { line, key: key.into(), msg: "unknown key".into() });
        }
        self.0.insert(key.to_string(), (line, value.to_string()));
        Ok(())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::ConfigKey { line: *line, key: key.into(), msg: format!("cannot parse `{v}`: {e}") }),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>().map_err(|e| Error::ConfigKey {
                        line: *line,
                        key: key.into(),
                        msg: format!("cannot parse list item `{s}`: {e}"),
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn invalid(&self, key: &str, msg: impl Into<String>) -> Error {
        let line = self.0.get(key).map_or(0, |e| e.0);
        Error::ConfigKey { line, key: key.into(), msg: msg.into() }
    }
}

fn split_line(raw: &str) -> Option<(&str, &str)> {
    let text = raw.split('#').next().unwrap_or("").trim();
    if text.is_empty() {
        return None;
    }
    Some(match text.split_once('=') {
        Some((k, v)) => (k.trim(), v.trim()),
        None => (text, ""),
    })
}

/// Parses `key = value` lines (with `#` comments) and applies `key=value` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut e = Entries(BTreeMap::new());
    for (i, raw) in text.lines().enumerate() {
        let Some((key, value)) = split_line(raw) else { continue };
        if value.is_empty() {
            return Err(Error::ConfigKey { line: i + 1, key: key.into(), msg: "expected `key = value`".into() });
        }
        e.insert(i + 1, key, value)?;
    }
    for o in overrides {
        match o.split_once('=') {
            Some((k, v)) if !v.trim().is_empty() => e.insert(0, k.trim(), v.trim())?,
            _ => return Err(Error::ConfigKey { line: 0, key: o.clone(), msg: "override must be key=value".into() }),
        }
    }
    for key in REQUIRED {
        if !e.0.contains_key(*key) {
            return Err(Error::ConfigKey { line: 0, key: key.to_string(), msg: "missing required key".into() });
        }
    }
    build(&e)
}

fn build(e: &Entries) -> Result<ExperimentConfig> {
    let dim: usize = e.or("grid.dim", 0)?;
    let n: usize = e.or("grid.n", 0)?;
    if dim != 2 && dim != 3 {
        return Err(e.invalid("grid.dim", format!("dim must be 2 or 3, got {dim}")));
    }
    if n < 8 || !n.is_power_of_two() {
        return Err(e.invalid("grid.n", format!("n must be even power of two (>= 8), got {n}")));
    }

    let nu: f64 = e.or("nu", 0.0)?;
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(e.invalid("nu", "must be finite and >= 0"));
    }
    let t_end: f64 = e.or("t_end", 0.0)?;
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(e.invalid("t_end", "must be finite and >= 0"));
    }
    let dt: Option<f64> = e.get("dt")?;
    if let Some(dt) = dt {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(e.invalid("dt", "must be positive"));
        }
    }
    let cfl: f64 = e.or("cfl", 0.5)?;
    if !(cfl > 0.0) {
        return Err(e.invalid("cfl", "must be positive"));
    }
    let formulation: Formulation = e.or("formulation", Formulation::Direct)?;
    let scheme: Scheme = e.or("scheme", Scheme::Rk4)?;

    let mollifier = match e.get::<f64>("mollifier.delta")? {
        Some(delta) => {
            if !(delta >= 0.0) || !delta.is_finite() {
                return Err(e.invalid("mollifier.delta", format!("must be finite and >= 0, got {delta}")));
            }
            let kind: MollifierKind = e.or("mollifier.kind", MollifierKind::Poisson)?;
            Some(Mollifier::new(kind, delta)?)
        }
        None => {
            if formulation.needs_mollifier() {
                return Err(Error::ConfigKey {
                    line: 0,
                    key: "mollifier.delta".into(),
                    msg: format!("required by formulation {formulation}"),
                });
            }
            None
        }
    };

    let d = ElParams::default();
    let el = ElParams {
        g: e.or("el.g", d.g)?,
        det_guard: e.or("el.det_guard", d.det_guard)?,
        max_retries: e.or("el.max_retries", d.max_retries)?,
        evolve_zeta: e.or("el.evolve_zeta", d.evolve_zeta)?,
        s0: e.or("el.s0", d.s0)?,
    };
    if !(el.g > 0.0 && el.g < 1.0) {
        return Err(e.invalid("el.g", format!("must lie in (0, 1), got {}", el.g)));
    }
    if !(el.s0 > 0.0 && el.s0 < 1.0) {
        return Err(e.invalid("el.s0", format!("must lie in (0, 1), got {}", el.s0)));
    }
    if !(el.det_guard > 0.0 && el.det_guard < 1.0) {
        return Err(e.invalid("el.det_guard", "must lie in (0, 1)"));
    }
    if el.evolve_zeta && dim != 3 {
        return Err(e.invalid("el.evolve_zeta", "evolved virtual vorticity needs grid.dim = 3"));
    }

    let ic = InitialCondition {
        kind: e.or("ic.kind", IcKind::TaylorGreen)?,
        seed: e.or("ic.seed", 0)?,
        amplitude: e.or("ic.amplitude", 1.0)?,
        kmin: e.or("ic.kmin", 1.0)?,
        kmax: e.or("ic.kmax", 4.0)?,
        perturb: e.or("ic.perturb", 0.0)?,
        r0: e.get("ic.r0")?,
    };
    if !(ic.amplitude >= 0.0) || !ic.amplitude.is_finite() {
        return Err(e.invalid("ic.amplitude", "must be finite and >= 0"));
    }
    let band_used = ic.kind == IcKind::RandomBand || ic.perturb != 0.0;
    if band_used {
        if !(ic.kmin >= 0.0 && ic.kmin <= ic.kmax) {
            return Err(e.invalid("ic.kmin", format!("empty shell {}..{}", ic.kmin, ic.kmax)));
        }
        if ic.kmax > (n / 3) as f64 {
            return Err(e.invalid("ic.kmax", format!("must lie inside the dealiasing mask (<= {})", n / 3)));
        }
    }
    if !(ic.perturb >= 0.0) {
        return Err(e.invalid("ic.perturb", "must be >= 0"));
    }
    if let Some(r0) = ic.r0 {
        if !(r0 > 0.0) || nu == 0.0 {
            return Err(e.invalid("ic.r0", "needs r0 > 0 and nu > 0"));
        }
    }
    if ic.kind == IcKind::Abc && dim != 3 {
        return Err(e.invalid("ic.kind", "abc flow needs grid.dim = 3"));
    }

    let output = OutputConfig {
        dir: e.or("output.dir", PathBuf::from("out"))?,
        every: e.or("output.every", 1)?,
        snapshots: e.or("output.snapshots", true)?,
    };
    if output.every == 0 {
        return Err(e.invalid("output.every", "must be at least 1"));
    }

    let p: u32 = e.or("diag.p", 2)?;
    if p != 1 && p != 2 {
        return Err(e.invalid("diag.p", "must be 1 or 2"));
    }
    let horizon: Option<f64> = e.get("diag.horizon")?;
    if let Some(h) = horizon {
        if !(h > 0.0) {
            return Err(e.invalid("diag.horizon", "must be positive"));
        }
    }

    let solver = SolverConfig {
        nu,
        dt,
        cfl,
        t_end,
        formulation,
        mollifier,
        scheme,
        output_every: output.every,
        el,
        horizon,
        gevrey_start: e.or("diag.gevrey_start", 0.05)?,
        analytic: e.get::<f64>("diag.lambda")?.map(|l| (l, p)),
    };
    solver.validate()?;

    let compare_formulations =
        e.list("compare.formulations")?.unwrap_or_else(|| vec![Formulation::Direct, formulation]);
    let compare_deltas = e.list("compare.deltas")?.unwrap_or_else(|| vec![0.4, 0.2, 0.1]);
    if compare_deltas.iter().any(|d: &f64| !(*d >= 0.0)) {
        return Err(e.invalid("compare.deltas", "deltas must be >= 0"));
    }
    let study_g = e.list("study.g")?.unwrap_or_else(|| vec![0.05, 0.1, 0.2]);
    if study_g.iter().any(|g: &f64| !(*g > 0.0 && *g < 1.0)) {
        return Err(e.invalid("study.g", "thresholds must lie in (0, 1)"));
    }
    let study_ics = e.list("study.ic")?.unwrap_or_else(|| vec![ic.kind]);

    Ok(ExperimentConfig {
        dim,
        n,
        solver,
        ic,
        output,
        compare_formulations,
        compare_deltas,
        study_g,
        study_ics,
    })
}
