//! Two-axis parameter sweeps with deterministic CSV output.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::HilbertSpec;
use crate::model::SystemParams;
use crate::optimal::{dual_drive_asymptotic_values, single_drive_optimum, Branch};
use crate::solver::{evaluate, ModeAStats, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Sample points of one axis: an evenly spaced range or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisGrid {
    Range {
        min: f64,
        max: f64,
        count: usize,
        #[serde(default)]
        scale: Scale,
    },
    Values {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: ParamName,
    #[serde(flatten)]
    pub grid: AxisGrid,
}

impl Axis {
    pub fn range(name: ParamName, min: f64, max: f64, count: usize, scale: Scale) -> Self {
        Self { name, grid: AxisGrid::Range { min, max, count, scale } }
    }

    pub fn values(name: ParamName, values: Vec<f64>) -> Self {
        Self { name, grid: AxisGrid::Values { values } }
    }

    pub fn len(&self) -> usize {
        match &self.grid {
            AxisGrid::Range { count, .. } => *count,
            AxisGrid::Values { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        match &self.grid {
            AxisGrid::Range { min, max, count, scale } => {
                if *count < 2 {
                    return Err(Error::Config(format!("axis '{}' needs count >= 2, got {count}", self.name)));
                }
                if !min.is_finite() || !max.is_finite() {
                    return Err(Error::Config(format!("axis '{}' has a non-finite bound", self.name)));
                }
                if *scale == Scale::Log && (*min <= 0.0 || *max <= 0.0) {
                    return Err(Error::Config(format!("log axis '{}' needs positive bounds", self.name)));
                }
            }
            AxisGrid::Values { values } => {
                if values.is_empty() {
                    return Err(Error::Config(format!("axis '{}' has no values", self.name)));
                }
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        match &self.grid {
            AxisGrid::Values { values } => values.clone(),
            AxisGrid::Range { min, max, count, scale } => {
                let n = (*count - 1) as f64;
                (0..*count)
                    .map(|i| {
                        let t = i as f64 / n;
                        match scale {
                            Scale::Linear => min + (max - min) * t,
                            Scale::Log => 10f64.powf(min.log10() + (max.log10() - min.log10()) * t),
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Sweepable quantity: a raw parameter field or a derived combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ParamName {
    DeltaA,
    DeltaB,
    CouplingJ,
    UA,
    UB,
    EpsA,
    EpsB,
    PhiA,
    PhiB,
    KappaA,
    KappaB,
    /// Both detunings.
    Delta,
    /// Both Kerr strengths.
    U,
    /// Both linewidths.
    Kappa,
    /// `eps_a / eps_b`, realized by setting `eps_b`.
    Eta,
    /// `eps_b / eps_a`, realized by setting `eps_b`.
    EtaInv,
    /// `phi_a - phi_b`, realized by setting `phi_a`.
    Phi,
}

impl ParamName {
    const TABLE: [(&'static str, ParamName); 18] = [
        ("delta_a", ParamName::DeltaA),
        ("delta_b", ParamName::DeltaB),
        ("coupling_j", ParamName::CouplingJ),
        ("j", ParamName::CouplingJ),
        ("u_a", ParamName::UA),
        ("u_b", ParamName::UB),
        ("eps_a", ParamName::EpsA),
        ("eps_b", ParamName::EpsB),
        ("phi_a", ParamName::PhiA),
        ("phi_b", ParamName::PhiB),
        ("kappa_a", ParamName::KappaA),
        ("kappa_b", ParamName::KappaB),
        ("delta", ParamName::Delta),
        ("u", ParamName::U),
        ("kappa", ParamName::Kappa),
        ("eta", ParamName::Eta),
        ("eta_inv", ParamName::EtaInv),
        ("phi", ParamName::Phi),
    ];

    pub fn as_str(self) -> &'static str {
        Self::TABLE.iter().find(|(_, p)| *p == self).map(|(s, _)| *s).expect("every name is tabulated")
    }

    pub fn apply(self, p: &mut SystemParams, v: f64) {
        match self {
            ParamName::DeltaA => p.delta_a = v,
            ParamName::DeltaB => p.delta_b = v,
            ParamName::CouplingJ => p.coupling_j = v,
            ParamName::UA => p.u_a = v,
            ParamName::UB => p.u_b = v,
            ParamName::EpsA => p.eps_a = v,
            ParamName::EpsB => p.eps_b = v,
            ParamName::PhiA => p.phi_a = v,
            ParamName::PhiB => p.phi_b = v,
            ParamName::KappaA => p.kappa_a = v,
            ParamName::KappaB => p.kappa_b = v,
            ParamName::Delta => {
                p.delta_a = v;
                p.delta_b = v;
            }
            ParamName::U => {
                p.u_a = v;
                p.u_b = v;
            }
            ParamName::Kappa => {
                p.kappa_a = v;
                p.kappa_b = v;
            }
            ParamName::Eta => p.eps_b = if v.is_infinite() { 0.0 } else { p.eps_a / v },
            ParamName::EtaInv => p.eps_b = p.eps_a * v,
            ParamName::Phi => p.phi_a = p.phi_b + v,
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Self::TABLE.iter().find(|(n, _)| *n == key).map(|(_, p)| *p).ok_or_else(|| {
            let names: Vec<_> = Self::TABLE.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("unknown parameter '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

impl TryFrom<String> for ParamName {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ParamName> for String {
    fn from(p: ParamName) -> String {
        p.as_str().to_string()
    }
}

/// Closed-form optimum used to derive a parameter from the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `κ/(2√3)`
    SingleDriveDelta,
    /// `2κ³/(3√3 J²)`
    SingleDriveU,
    /// `J/η`
    DualDriveDelta,
    /// `κ²η/(2J(η²-1))`
    DualDriveU,
}

impl Formula {
    const TABLE: [(&'static str, Formula); 4] = [
        ("single_drive_delta", Formula::SingleDriveDelta),
        ("single_drive_u", Formula::SingleDriveU),
        ("dual_drive_delta", Formula::DualDriveDelta),
        ("dual_drive_u", Formula::DualDriveU),
    ];

    pub fn as_str(self) -> &'static str {
        Self::TABLE.iter().find(|(_, f)| *f == self).map(|(s, _)| *s).expect("every formula is tabulated")
    }

    /// Evaluate at the current parameters (`κ` from the shared linewidth,
    /// `η = eps_a/eps_b`).
    pub fn evaluate(self, p: &SystemParams) -> Result<f64> {
        if p.kappa_a != p.kappa_b {
            return Err(Error::Asymmetric("kappa_a != kappa_b"));
        }
        let (kappa, j) = (p.kappa_a, p.coupling_j);
        let eta = if p.eps_b == 0.0 { f64::INFINITY } else { p.eps_a / p.eps_b };
        match self {
            Formula::SingleDriveDelta => Ok(single_drive_optimum(kappa, j, Branch::Plus)?.delta_opt),
            Formula::SingleDriveU => Ok(single_drive_optimum(kappa, j, Branch::Plus)?.u_opt),
            Formula::DualDriveDelta | Formula::DualDriveU => {
                if !(eta > 1.0) {
                    return Err(Error::InvalidParameter(format!("{} requires eta > 1, got {eta}", self.as_str())));
                }
                if !(j > 0.0) {
                    return Err(Error::InvalidParameter(format!("{} requires J > 0", self.as_str())));
                }
                let (d, u) = dual_drive_asymptotic_values(kappa, j, eta);
                Ok(if self == Formula::DualDriveDelta { d } else { u })
            }
        }
    }
}

/// Derived-parameter rule written as `"<target> := <formula>"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Constraint {
    pub target: ParamName,
    pub formula: Formula,
}

impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lhs, rhs) = s
            .split_once(":=")
            .ok_or_else(|| Error::Config(format!("constraint '{s}' must look like '<param> := <formula>'")))?;
        let target: ParamName = lhs.parse()?;
        let name = rhs.trim().trim_end_matches("()").to_ascii_lowercase();
        let formula = Formula::TABLE.iter().find(|(n, _)| *n == name).map(|(_, f)| *f).ok_or_else(|| {
            let names: Vec<_> = Formula::TABLE.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("unknown formula '{}' (expected one of {})", rhs.trim(), names.join(", ")))
        })?;
        Ok(Self { target, formula })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} := {}", self.target, self.formula.as_str())
    }
}

impl TryFrom<String> for Constraint {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Constraint> for String {
    fn from(c: Constraint) -> String {
        c.to_string()
    }
}

fn default_n_max() -> usize {
    HilbertSpec::default().n_max_a
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub base: SystemParams,
    pub axis1: Axis,
    pub axis2: Axis,
    pub solver: Solver,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    /// Fock cutoff per mode for the master equation.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        self.axis2.validate()?;
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parameters at one grid point: base, then both axes, then constraints in order.
    pub fn params_at(&self, v1: f64, v2: f64) -> Result<SystemParams> {
        let mut p = self.base;
        self.axis1.name.apply(&mut p, v1);
        self.axis2.name.apply(&mut p, v2);
        for c in &self.constraints {
            let v = c.formula.evaluate(&p)?;
            c.target.apply(&mut p, v);
        }
        Ok(p)
    }

    pub fn spec(&self) -> HilbertSpec {
        HilbertSpec::symmetric(self.n_max)
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub axis1: f64,
    pub axis2: f64,
    pub g2_a: Option<f64>,
    pub mean_n_a: Option<f64>,
    pub solver: Solver,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn g2_undefined(&self) -> bool {
        self.error.is_none() && self.g2_a.is_none()
    }
}

/// Evaluate a single point, attaching the parameters to any solver error.
pub fn run_point(params: &SystemParams, solver: Solver, spec: HilbertSpec) -> Result<ModeAStats> {
    evaluate(params, solver, spec).map_err(|e| match e {
        Error::Singular(m) if m.contains(" at SystemParams") => Error::Singular(m),
        Error::Singular(m) => Error::Singular(format!("{m} at {params:?}")),
        other => Error::InvalidParameter(format!("{other} at {params:?}")),
    })
}

fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Run `f` inside a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(build_pool(threads)?.install(f))
}

/// Evaluate every grid point (axis1 outer, axis2 inner) on `threads` workers.
/// Point failures are recorded in the row and do not stop the sweep.
pub fn run_sweep(config: &SweepConfig, threads: usize) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let (xs, ys) = (config.axis1.points(), config.axis2.points());
    let grid: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let spec = config.spec();
    with_threads(threads, || {
        grid.par_iter()
            .map(|&(x, y)| {
                let outcome = config.params_at(x, y).and_then(|p| run_point(&p, config.solver, spec));
                match outcome {
                    Ok(s) => ResultRow {
                        axis1: x,
                        axis2: y,
                        g2_a: s.g2_a,
                        mean_n_a: Some(s.mean_n_a),
                        solver: config.solver,
                        error: None,
                    },
                    Err(e) => ResultRow {
                        axis1: x,
                        axis2: y,
                        g2_a: None,
                        mean_n_a: None,
                        solver: config.solver,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    })
}

/// Shortest exact-round-trip formatting is not fixed-width; use 17
/// significant digits in scientific notation instead.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv<W: Write>(config: &SweepConfig, rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        config.axis1.name.as_str(),
        config.axis2.name.as_str(),
        "g2_a",
        "g2_a_undefined",
        "mean_n_a",
        "solver",
        "error",
    ])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.axis1),
            fmt_f64(r.axis2),
            opt_cell(r.g2_a),
            r.g2_undefined().to_string(),
            opt_cell(r.mean_n_a),
            r.solver.id().to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar written next to every dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata<C> {
    pub config: C,
    pub version: String,
    pub timestamp: u64,
    pub rows: usize,
}

impl<C: Serialize> Metadata<C> {
    pub fn new(config: C, rows: usize) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self { config, version: env!("CARGO_PKG_VERSION").to_string(), timestamp, rows }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }
}

/// `<name>.meta.json` next to `csv_path`.
pub fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta.json");
    s.into()
}

/// Run a sweep and write the CSV plus its metadata sidecar.
pub fn run_sweep_to_file(config: &SweepConfig, out: &Path, threads: usize) -> Result<Vec<ResultRow>> {
    let rows = run_sweep(config, threads)?;
    write_csv(config, &rows, std::fs::File::create(out)?)?;
    Metadata::new(config, rows.len()).write(&sidecar_path(out))?;
    Ok(rows)
}
