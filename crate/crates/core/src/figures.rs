//! Frozen recipes regenerating the figure datasets, with matching plot scripts.
//!
//! Axis ranges of the heatmaps are estimates read off the published plots
//! and can be overridden through [`FigureOptions`].

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::optimal::{
    c10_zero_condition, dual_drive_asymptotic_values, numeric_optimum, single_drive_optimum, Branch,
    WEAK_DRIVE,
};
use crate::solver::Solver;
use crate::sweep::{
    fmt_f64, run_sweep, sidecar_path, with_threads, write_csv, Axis, Constraint, Metadata, ParamName, Scale,
    SweepConfig,
};

const KAPPA: f64 = 1.0;
const J: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureName {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
    Fig5a,
    Fig5b,
}

impl FigureName {
    pub const ALL: [FigureName; 12] = [
        FigureName::Fig1a,
        FigureName::Fig1b,
        FigureName::Fig2a,
        FigureName::Fig2b,
        FigureName::Fig3a,
        FigureName::Fig3b,
        FigureName::Fig4a,
        FigureName::Fig4b,
        FigureName::Fig4c,
        FigureName::Fig4d,
        FigureName::Fig5a,
        FigureName::Fig5b,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::Fig1a => "fig1a",
            FigureName::Fig1b => "fig1b",
            FigureName::Fig2a => "fig2a",
            FigureName::Fig2b => "fig2b",
            FigureName::Fig3a => "fig3a",
            FigureName::Fig3b => "fig3b",
            FigureName::Fig4a => "fig4a",
            FigureName::Fig4b => "fig4b",
            FigureName::Fig4c => "fig4c",
            FigureName::Fig4d => "fig4d",
            FigureName::Fig5a => "fig5a",
            FigureName::Fig5b => "fig5b",
        }
    }
}

impl fmt::Display for FigureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|n| n.as_str() == key).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|n| n.as_str()).collect();
            Error::Config(format!("unknown figure '{s}' (valid names: {})", names.join(", ")))
        })
    }
}

/// Resolution and solver overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureOptions {
    /// Points per heatmap axis (and per optimizer curve).
    pub resolution: usize,
    /// Points along the horizontal axis of line cuts.
    pub line_points: usize,
    /// Solver override; `None` keeps the recipe's own choice.
    pub solver: Option<Solver>,
    pub threads: usize,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self { resolution: 101, line_points: 501, solver: None, threads: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumQuantity {
    Delta,
    U,
}

/// Numerically optimized `(Δ, U)` along an `η` axis, next to the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumCurve {
    pub kappa: f64,
    pub j: f64,
    pub phi: f64,
    pub eta: Axis,
    pub quantity: OptimumQuantity,
    pub solver: Solver,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureData {
    Sweep(SweepConfig),
    Optimum(OptimumCurve),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// x from axis1, y from axis2.
    Heatmap,
    /// One line per axis1 value, x from axis2.
    Lines,
    /// Numeric column against reference columns, x from the first column.
    Curves,
}

/// Reference curve drawn on top of the data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overlay {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// A single marker instead of a dashed line.
    pub marker: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRecipe {
    pub name: FigureName,
    pub title: String,
    pub data: FigureData,
    pub plot: PlotKind,
    /// Column plotted on a log10 scale.
    pub value: String,
    pub log_x: bool,
    pub log_y: bool,
    pub overlays: Vec<Overlay>,
}

fn base(phi: f64) -> SystemParams {
    SystemParams { coupling_j: J, eps_a: WEAK_DRIVE * KAPPA, phi_a: phi, ..SystemParams::default() }
}

fn constraints(rules: &[&str]) -> Vec<Constraint> {
    rules.iter().map(|r| r.parse().expect("built-in constraint")).collect()
}

const DUAL: [&str; 2] = ["delta := dual_drive_delta", "u := dual_drive_u"];
const SINGLE: [&str; 2] = ["delta := single_drive_delta", "u := single_drive_u"];

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.log10(), b.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect()
}

fn curve(label: &str, x: Vec<f64>, f: impl Fn(f64) -> f64) -> Overlay {
    let y = x.iter().map(|&v| f(v)).collect();
    Overlay { label: label.into(), x, y, marker: false }
}

fn hline(label: &str, x0: f64, x1: f64, y: f64) -> Overlay {
    Overlay { label: label.into(), x: vec![x0, x1], y: vec![y, y], marker: false }
}

/// Build the recipe for `name`.
pub fn recipe(name: FigureName, opts: &FigureOptions) -> FigureRecipe {
    let n = opts.resolution.max(2);
    let nl = opts.line_points.max(2);
    let solver = opts.solver.unwrap_or(Solver::MasterEquation);
    let single = single_drive_optimum(KAPPA, J, Branch::Plus).expect("positive J");
    let sweep = |axis1: Axis, axis2: Axis, phi: f64, rules: &[&str]| {
        FigureData::Sweep(SweepConfig {
            base: base(phi),
            axis1,
            axis2,
            solver,
            constraints: constraints(rules),
            n_max: 3,
        })
    };
    let optimum = |quantity| {
        FigureData::Optimum(OptimumCurve {
            kappa: KAPPA,
            j: J,
            phi: 0.0,
            eta: Axis::range(ParamName::Eta, 1.1, 1000.0, n, Scale::Log),
            quantity,
            solver: opts.solver.unwrap_or(Solver::FullTruncated),
        })
    };
    let heat = |title: &str, data, log_x, log_y, overlays| FigureRecipe {
        name,
        title: title.into(),
        data,
        plot: PlotKind::Heatmap,
        value: "g2_a".into(),
        log_x,
        log_y,
        overlays,
    };
    let lines = |title: &str, data, value: &str| FigureRecipe {
        name,
        title: title.into(),
        data,
        plot: PlotKind::Lines,
        value: value.into(),
        log_x: false,
        log_y: false,
        overlays: vec![],
    };
    let eta_dense = |lo: f64, hi: f64| logspace(lo, hi, 200);

    match name {
        FigureName::Fig1a => heat(
            "g2_a(0) vs eta and Delta, U at the dual-drive optimum",
            sweep(
                Axis::range(ParamName::Eta, 1.0, 20.0, n, Scale::Linear),
                Axis::range(ParamName::Delta, 0.0, 5.0, n, Scale::Linear),
                0.0,
                &["u := dual_drive_u"],
            ),
            false,
            false,
            vec![curve("Delta = J/eta", linspace(2.0, 20.0, 200), |eta| J / eta)],
        ),
        FigureName::Fig1b => heat(
            "g2_a(0) vs eta and Delta, U at the single-drive optimum",
            sweep(
                Axis::range(ParamName::Eta, 1.0, 1000.0, n, Scale::Log),
                Axis::range(ParamName::Delta, 0.0, 1.0, n, Scale::Linear),
                0.0,
                &["u := single_drive_u"],
            ),
            true,
            false,
            vec![hline("Delta = kappa/(2 sqrt 3)", 1.0, 1000.0, single.delta_opt)],
        ),
        FigureName::Fig2a => heat(
            "g2_a(0) vs eta and U, Delta at the dual-drive optimum",
            sweep(
                Axis::range(ParamName::Eta, 1.0, 20.0, n, Scale::Linear),
                Axis::range(ParamName::U, 1e-4, 1.0, n, Scale::Log),
                0.0,
                &["delta := dual_drive_delta"],
            ),
            false,
            true,
            vec![curve("U = kappa^2 eta/(2J(eta^2-1))", linspace(1.05, 20.0, 200), |eta| {
                dual_drive_asymptotic_values(KAPPA, J, eta).1
            })],
        ),
        FigureName::Fig2b => heat(
            "g2_a(0) vs eta and U, Delta at the single-drive optimum",
            sweep(
                Axis::range(ParamName::Eta, 1.0, 1000.0, n, Scale::Log),
                Axis::range(ParamName::U, 1e-4, 1.0, n, Scale::Log),
                0.0,
                &["delta := single_drive_delta"],
            ),
            true,
            true,
            vec![hline("U = 2 kappa^3/(3 sqrt 3 J^2)", 1.0, 1000.0, single.u_opt)],
        ),
        FigureName::Fig3a | FigureName::Fig3b => {
            let (quantity, value) = if name == FigureName::Fig3a {
                (OptimumQuantity::Delta, "delta_opt")
            } else {
                (OptimumQuantity::U, "u_opt")
            };
            let dual = eta_dense(1.05, 1000.0);
            let idx = usize::from(quantity == OptimumQuantity::U);
            FigureRecipe {
                name,
                title: format!("numerically optimal {value} vs eta"),
                data: optimum(quantity),
                plot: PlotKind::Curves,
                value: value.into(),
                log_x: true,
                log_y: true,
                overlays: vec![
                    curve("dual-drive formula", dual, |eta| {
                        let (d, u) = dual_drive_asymptotic_values(KAPPA, J, eta);
                        [d, u][idx]
                    }),
                    hline("single-drive formula", 1.05, 1000.0, [single.delta_opt, single.u_opt][idx]),
                ],
            }
        }
        FigureName::Fig4a | FigureName::Fig4b => {
            let (rules, overlays, title) = if name == FigureName::Fig4a {
                let xs = linspace(0.002, 0.2, 200);
                let ys = xs.iter().map(|&x| crate::optimal::bunching_phase_curve(KAPPA, J, 1.0 / x)).collect();
                (
                    &DUAL,
                    vec![Overlay { label: "phi = atan(eta kappa/2J)".into(), x: xs, y: ys, marker: false }],
                    "g2_a(0) vs phi and 1/eta at the dual-drive optimum",
                )
            } else {
                let c = c10_zero_condition(KAPPA, J, single.delta_opt).expect("positive J");
                (
                    &SINGLE,
                    vec![Overlay {
                        label: "one-photon interference zero".into(),
                        x: vec![c.eta_inv_star],
                        y: vec![c.phi_star],
                        marker: true,
                    }],
                    "g2_a(0) vs phi and 1/eta at the single-drive optimum",
                )
            };
            heat(
                title,
                sweep(
                    Axis::range(ParamName::EtaInv, 0.0, 0.2, n, Scale::Linear),
                    Axis::range(ParamName::Phi, 0.0, PI, n, Scale::Linear),
                    0.0,
                    rules,
                ),
                false,
                false,
                overlays,
            )
        }
        FigureName::Fig4c => lines(
            "g2_a(0) vs phi, dual-drive optimum",
            sweep(
                Axis::values(ParamName::EtaInv, vec![0.024, 0.16]),
                Axis::range(ParamName::Phi, 0.0, PI, nl, Scale::Linear),
                0.0,
                &DUAL,
            ),
            "g2_a",
        ),
        FigureName::Fig4d => lines(
            "g2_a(0) vs phi, single-drive optimum",
            sweep(
                Axis::values(ParamName::EtaInv, vec![0.058, 0.116]),
                Axis::range(ParamName::Phi, 0.0, PI, nl, Scale::Linear),
                0.0,
                &SINGLE,
            ),
            "g2_a",
        ),
        FigureName::Fig5a | FigureName::Fig5b => {
            let (value, title) = if name == FigureName::Fig5a {
                ("g2_a", "g2_a(0) vs 1/eta at phi = pi/3 (J values are illustrative)")
            } else {
                ("mean_n_a", "<n_a> vs 1/eta at phi = pi/3 (J values are illustrative)")
            };
            lines(
                title,
                sweep(
                    Axis::values(ParamName::CouplingJ, vec![10.0, 20.0, 50.0]),
                    Axis::range(ParamName::EtaInv, 0.0, 0.1, nl, Scale::Linear),
                    PI / 3.0,
                    &SINGLE,
                ),
                value,
            )
        }
    }
}

/// Files written by [`render`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FigureOutput {
    pub csv: PathBuf,
    pub metadata: PathBuf,
    pub script: PathBuf,
}

/// One row of an optimizer curve.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimumRow {
    pub eta: f64,
    pub numeric: Option<f64>,
    pub g2_min: Option<f64>,
    pub dual_drive: Option<f64>,
    pub single_drive: f64,
    pub error: Option<String>,
}

pub fn run_optimum_curve(curve: &OptimumCurve, threads: usize) -> Result<Vec<OptimumRow>> {
    curve.eta.validate()?;
    let single = single_drive_optimum(curve.kappa, curve.j, Branch::Plus)?;
    let pick = |d: f64, u: f64| match curve.quantity {
        OptimumQuantity::Delta => d,
        OptimumQuantity::U => u,
    };
    let etas = curve.eta.points();
    with_threads(threads, || {
        etas.par_iter()
            .map(|&eta| {
                let dual = (eta > 1.0).then(|| {
                    let (d, u) = dual_drive_asymptotic_values(curve.kappa, curve.j, eta);
                    pick(d, u)
                });
                let (numeric, g2_min, error) = match numeric_optimum(curve.kappa, curve.j, eta, curve.phi, curve.solver)
                {
                    Ok(p) => (Some(pick(p.delta_opt, p.u_opt)), p.g2_min, None),
                    Err(e) => (None, None, Some(e.to_string())),
                };
                OptimumRow {
                    eta,
                    numeric,
                    g2_min,
                    dual_drive: dual,
                    single_drive: pick(single.delta_opt, single.u_opt),
                    error,
                }
            })
            .collect()
    })
}

fn write_optimum_csv(recipe: &FigureRecipe, rows: &[OptimumRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let q = recipe.value.trim_end_matches("_opt");
    w.write_record([
        "eta".to_string(),
        recipe.value.clone(),
        "g2_min".to_string(),
        format!("{q}_dual_drive"),
        format!("{q}_single_drive"),
        "error".to_string(),
    ])?;
    let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in rows {
        w.write_record([
            fmt_f64(r.eta),
            cell(r.numeric),
            cell(r.g2_min),
            cell(r.dual_drive),
            fmt_f64(r.single_drive),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn py_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

fn py_str(s: &str) -> String {
    format!("{s:?}")
}

/// Matplotlib script rendering the dataset at `csv_name` (relative to the script).
pub fn plot_script(recipe: &FigureRecipe, csv_name: &str, x_col: &str, y_col: &str) -> String {
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str(&format!("# {}: {}\n", recipe.name, recipe.title));
    s.push_str("import csv\nimport math\nimport os\n\nimport matplotlib.pyplot as plt\nimport numpy as np\n\n");
    s.push_str("HERE = os.path.dirname(os.path.abspath(__file__))\n");
    s.push_str(&format!("CSV = os.path.join(HERE, {})\n", py_str(csv_name)));
    s.push_str(&format!("PNG = os.path.join(HERE, {})\n", py_str(&format!("{}.png", recipe.name))));
    s.push_str(&format!("X, Y, VALUE = {}, {}, {}\n\n", py_str(x_col), py_str(y_col), py_str(&recipe.value)));
    s.push_str(
        "def num(cell):\n    return float(cell) if cell not in (\"\", None) else math.nan\n\n\
         with open(CSV, newline=\"\") as f:\n    rows = list(csv.DictReader(f))\n\n\
         fig, ax = plt.subplots(figsize=(6, 4.5))\n",
    );
    match recipe.plot {
        PlotKind::Heatmap => s.push_str(
            "xs = sorted({num(r[X]) for r in rows})\n\
             ys = sorted({num(r[Y]) for r in rows})\n\
             z = np.full((len(ys), len(xs)), np.nan)\n\
             ix = {v: i for i, v in enumerate(xs)}\n\
             iy = {v: i for i, v in enumerate(ys)}\n\
             for r in rows:\n    v = num(r[VALUE])\n    if v > 0:\n        z[iy[num(r[Y])], ix[num(r[X])]] = math.log10(v)\n\
             mesh = ax.pcolormesh(xs, ys, z, shading=\"nearest\", cmap=\"viridis\")\n\
             fig.colorbar(mesh, ax=ax, label=\"log10 \" + VALUE)\n",
        ),
        PlotKind::Lines => s.push_str(
            "groups = {}\n\
             for r in rows:\n    groups.setdefault(num(r[Y]), []).append((num(r[X]), num(r[VALUE])))\n\
             for key, pts in groups.items():\n    x, v = zip(*pts)\n    v = [math.log10(t) if t > 0 else math.nan for t in v]\n    ax.plot(x, v, label=f\"{Y} = {key:g}\")\n\
             ax.set_ylabel(\"log10 \" + VALUE)\n",
        ),
        PlotKind::Curves => s.push_str(
            "x = [num(r[X]) for r in rows]\n\
             v = [num(r[VALUE]) for r in rows]\n\
             ax.plot(x, v, \"o\", ms=3, label=\"numeric\")\n\
             ax.set_ylabel(VALUE)\n",
        ),
    }
    for o in &recipe.overlays {
        let style = if o.marker { "\"w*\", ms=12" } else { "\"--\", color=\"k\", lw=1" };
        s.push_str(&format!(
            "ax.plot({}, {}, {style}, label={})\n",
            py_list(&o.x),
            py_list(&o.y),
            py_str(&o.label)
        ));
    }
    if recipe.log_x {
        s.push_str("ax.set_xscale(\"log\")\n");
    }
    if recipe.log_y {
        s.push_str("ax.set_yscale(\"log\")\n");
    }
    s.push_str(&format!(
        "ax.set_xlabel(X)\n{}ax.set_title({})\nax.legend(fontsize=\"small\")\nfig.tight_layout()\nfig.savefig(PNG, dpi=150)\n",
        if recipe.plot == PlotKind::Heatmap { "ax.set_ylabel(Y)\n" } else { "" },
        py_str(&format!("{}: {}", recipe.name, recipe.title)),
    ));
    s
}

/// Compute the dataset for `name` and write `<name>.csv`, its metadata
/// sidecar and `plot_<name>.py` into `out_dir`.
pub fn render(name: FigureName, out_dir: &Path, opts: &FigureOptions) -> Result<FigureOutput> {
    std::fs::create_dir_all(out_dir)?;
    let recipe = recipe(name, opts);
    let csv = out_dir.join(format!("{name}.csv"));
    let metadata = sidecar_path(&csv);
    let script = out_dir.join(format!("plot_{name}.py"));
    let csv_name = format!("{name}.csv");
    let (x_col, y_col, rows) = match &recipe.data {
        FigureData::Sweep(cfg) => {
            let rows = run_sweep(cfg, opts.threads)?;
            write_csv(cfg, &rows, std::fs::File::create(&csv)?)?;
            let (a1, a2) = (cfg.axis1.name.as_str(), cfg.axis2.name.as_str());
            match recipe.plot {
                PlotKind::Heatmap => (a1, a2, rows.len()),
                _ => (a2, a1, rows.len()),
            }
        }
        FigureData::Optimum(curve) => {
            let rows = run_optimum_curve(curve, opts.threads)?;
            write_optimum_csv(&recipe, &rows, &csv)?;
            ("eta", "eta", rows.len())
        }
    };
    Metadata::new(&recipe, rows).write(&metadata)?;
    std::fs::write(&script, plot_script(&recipe, &csv_name, x_col, y_col))?;
    Ok(FigureOutput { csv, metadata, script })
}
