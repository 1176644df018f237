//! Antibunching optima and bunching conditions.
//!
//! Closed-form optima for single- and dual-drive configurations, the exact
//! zero-phase optimality conditions solved as a one-dimensional root problem,
//! a grid-plus-simplex numeric minimizer of g2, and the interference
//! conditions behind strong bunching.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::HilbertSpec;
use crate::minimize::{nelder_mead, Tol};
use crate::model::{wrap_phase, SystemParams};
use crate::solver::{evaluate, Solver};

/// Drive strength on mode A used by every optimizer objective, in units of kappa.
pub const WEAK_DRIVE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    SingleDriveAsymptotic,
    DualDriveAsymptotic,
    DualDriveExact,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPoint {
    pub delta_opt: f64,
    pub u_opt: f64,
    /// Hierarchy (or numeric-objective) g2 at the point; `None` if undefined.
    pub g2_min: Option<f64>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Phase and inverse strength ratio at which the one-photon amplitude of
/// mode A vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BunchingCondition {
    pub phi_star: f64,
    pub eta_inv_star: f64,
}

/// Symmetric weak-drive parameters at strength ratio `eta` (infinite means
/// mode B undriven) and relative phase `phi`, with `U_a = U_b = u`.
pub fn weak_drive_params(kappa: f64, j: f64, eta: f64, phi: f64, delta: f64, u: f64) -> SystemParams {
    let eps_a = WEAK_DRIVE * kappa;
    let eps_b = if eta.is_infinite() { 0.0 } else { eps_a / eta };
    SystemParams {
        delta_a: delta,
        delta_b: delta,
        coupling_j: j,
        u_a: u,
        u_b: u,
        eps_a,
        eps_b,
        phi_a: phi,
        phi_b: 0.0,
        kappa_a: kappa,
        kappa_b: kappa,
    }
}

fn hierarchy_g2(kappa: f64, j: f64, eta: f64, phi: f64, delta: f64, u: f64) -> Option<f64> {
    let p = weak_drive_params(kappa, j, eta, phi, delta, u);
    evaluate(&p, Solver::Hierarchy, HilbertSpec::default()).ok().and_then(|s| s.g2_a)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
    }
    Ok(())
}

/// Single-drive optimum: `Δ = ±κ/(2√3)`, `U = ±2κ³/(3√3 J²)`.
pub fn single_drive_optimum(kappa: f64, j: f64, branch: Branch) -> Result<OptimalPoint> {
    check_positive("kappa", kappa)?;
    check_positive("j", j)?;
    let s = branch.sign();
    let sqrt3 = 3f64.sqrt();
    let delta_opt = s * kappa / (2.0 * sqrt3);
    let u_opt = s * 2.0 / (3.0 * sqrt3) * kappa.powi(3) / (j * j);
    let warning = (j < 5.0 * kappa).then(|| format!("J = {j} is not much larger than kappa = {kappa}"));
    Ok(OptimalPoint {
        delta_opt,
        u_opt,
        g2_min: hierarchy_g2(kappa, j, f64::INFINITY, 0.0, delta_opt, u_opt),
        method: Method::SingleDriveAsymptotic,
        warning,
    })
}

/// Dual-drive zero-phase optimum for strong coupling: `Δ = J/η`,
/// `U = κ²η / (2J(η² - 1))`.
pub fn dual_drive_optimum_asymptotic(kappa: f64, j: f64, eta: f64) -> Result<OptimalPoint> {
    check_positive("kappa", kappa)?;
    check_positive("j", j)?;
    if !(eta > 1.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must exceed 1")));
    }
    let (delta_opt, u_opt) = dual_drive_asymptotic_values(kappa, j, eta);
    let warning = (eta >= (j / kappa).powi(2))
        .then(|| format!("eta = {eta} is not much smaller than (J/kappa)^2 = {}", (j / kappa).powi(2)));
    Ok(OptimalPoint {
        delta_opt,
        u_opt,
        g2_min: hierarchy_g2(kappa, j, eta, 0.0, delta_opt, u_opt),
        method: Method::DualDriveAsymptotic,
        warning,
    })
}

/// `(J/η, κ²η/(2J(η²-1)))`; tends to `(0, 0)` as `η → ∞`.
pub fn dual_drive_asymptotic_values(kappa: f64, j: f64, eta: f64) -> (f64, f64) {
    if eta.is_infinite() {
        return (0.0, 0.0);
    }
    (j / eta, kappa * kappa / (2.0 * j) * eta / (eta * eta - 1.0))
}

/// Coefficients of the zero-phase optimality conditions, each affine in `U`:
/// `first = a + b U`, `second = n + m U`.
#[derive(Debug, Clone, Copy)]
struct ConditionCoeffs {
    a: f64,
    b: f64,
    n: f64,
    m: f64,
    da: f64,
    db: f64,
    dn: f64,
    dm: f64,
}

fn condition_coeffs(kappa: f64, j: f64, eta: f64, delta: f64) -> ConditionCoeffs {
    let (k2, j2, d2) = (kappa * kappa, j * j, delta * delta);
    ConditionCoeffs {
        a: 16.0 * j * d2 - 4.0 * j * k2 + 6.0 * delta * k2 * eta - 8.0 * d2 * delta * eta - 8.0 * delta * j2 / eta,
        b: 16.0 * j * delta - 4.0 * j2 / eta - 4.0 * j2 * eta - 8.0 * d2 * eta + 2.0 * k2 * eta,
        n: 4.0 * j2 * kappa / eta + 12.0 * kappa * d2 * eta - kappa.powi(3) * eta - 16.0 * j * kappa * delta,
        m: 8.0 * kappa * delta * eta - 8.0 * j * kappa,
        da: 32.0 * j * delta + 6.0 * k2 * eta - 24.0 * d2 * eta - 8.0 * j2 / eta,
        db: 16.0 * j - 16.0 * delta * eta,
        dn: 24.0 * kappa * delta * eta - 16.0 * j * kappa,
        dm: 8.0 * kappa * eta,
    }
}

/// Residuals of the two zero-phase optimality conditions at `(Δ, U)`.
pub fn exact_condition_residuals(kappa: f64, j: f64, eta: f64, delta: f64, u: f64) -> (f64, f64) {
    let c = condition_coeffs(kappa, j, eta, delta);
    (c.a + c.b * u, c.n + c.m * u)
}

/// The first condition with `U` eliminated via the second, multiplied
/// through by the second's `U` coefficient so it has no poles.
fn eliminated(kappa: f64, j: f64, eta: f64, delta: f64) -> f64 {
    let c = condition_coeffs(kappa, j, eta, delta);
    c.a * c.m - c.b * c.n
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Newton iterations on the two conditions jointly.
fn polish(kappa: f64, j: f64, eta: f64, mut delta: f64, mut u: f64) -> (f64, f64) {
    for _ in 0..8 {
        let c = condition_coeffs(kappa, j, eta, delta);
        let (r1, r2) = (c.a + c.b * u, c.n + c.m * u);
        let (j11, j12) = (c.da + c.db * u, c.b);
        let (j21, j22) = (c.dn + c.dm * u, c.m);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dd = (r1 * j22 - j12 * r2) / det;
        let du = (j11 * r2 - j21 * r1) / det;
        let (nd, nu) = (delta - dd, u - du);
        let (s1, s2) = exact_condition_residuals(kappa, j, eta, nd, nu);
        if s1.abs().max(s2.abs()) >= r1.abs().max(r2.abs()) {
            break;
        }
        delta = nd;
        u = nu;
    }
    (delta, u)
}

/// Samples used to bracket roots of the eliminated condition on `(0, 2J]`.
const ROOT_SCAN_SAMPLES: usize = 4096;

/// All simultaneous roots `(Δ, U)` of the zero-phase conditions with
/// `Δ ∈ (0, 2J]`, in increasing `Δ`.
pub fn exact_phi0_roots(kappa: f64, j: f64, eta: f64) -> Vec<(f64, f64)> {
    let f = |d: f64| eliminated(kappa, j, eta, d);
    let h = 2.0 * j / ROOT_SCAN_SAMPLES as f64;
    let mut roots = Vec::new();
    let mut prev = (h * 1e-9, f(h * 1e-9));
    for k in 1..=ROOT_SCAN_SAMPLES {
        let d = h * k as f64;
        let fd = f(d);
        let root = if fd == 0.0 {
            Some(d)
        } else if prev.1 != 0.0 && (fd < 0.0) != (prev.1 < 0.0) {
            Some(bisect(f, prev.0, d))
        } else {
            None
        };
        if let Some(delta) = root {
            let c = condition_coeffs(kappa, j, eta, delta);
            if c.m != 0.0 {
                let u = -c.n / c.m;
                roots.push(polish(kappa, j, eta, delta, u));
            }
        }
        prev = (d, fd);
    }
    roots
}

/// Exact zero-phase optimum nearest to the strong-coupling estimate.
pub fn dual_drive_optimum_exact_phi0(kappa: f64, j: f64, eta: f64) -> Result<OptimalPoint> {
    let seed = dual_drive_optimum_asymptotic(kappa, j, eta)?;
    let roots = exact_phi0_roots(kappa, j, eta);
    let dist = |(d, u): (f64, f64)| {
        ((d - seed.delta_opt) / seed.delta_opt).abs() + ((u - seed.u_opt) / seed.u_opt).abs()
    };
    let (delta_opt, u_opt) = roots
        .into_iter()
        .min_by(|x, y| dist(*x).total_cmp(&dist(*y)))
        .ok_or_else(|| Error::NoRoot(format!("zero-phase conditions at J = {j}, eta = {eta} on (0, {}]", 2.0 * j)))?;
    Ok(OptimalPoint {
        delta_opt,
        u_opt,
        g2_min: hierarchy_g2(kappa, j, eta, 0.0, delta_opt, u_opt),
        method: Method::DualDriveExact,
        warning: seed.warning,
    })
}

/// Search box and resolution of the numeric optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub delta_min: f64,
    /// Upper bound of the detuning axis as a multiple of `J`.
    pub delta_max_over_j: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub delta_points: usize,
    pub u_points: usize,
    pub rel_tol: f64,
    /// Also refine from the closed-form optima when they beat the grid.
    pub analytic_seeds: bool,
    /// Fock cutoff when the objective is the master equation.
    pub n_max: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            delta_min: 0.05,
            delta_max_over_j: 1.2,
            u_min: 1e-4,
            u_max: 1.0,
            delta_points: 64,
            u_points: 64,
            rel_tol: 1e-4,
            analytic_seeds: true,
            n_max: 3,
        }
    }
}

/// Numerically minimize mode-A g2 over `(Δ, U)` at fixed `J`, `η`, `φ`.
///
/// `eta = f64::INFINITY` means mode B is undriven. Drive strengths are
/// `ε_a = 0.01κ`, `ε_b = ε_a/η`, and `U_a = U_b = U`.
pub fn numeric_optimum(kappa: f64, j: f64, eta: f64, phi: f64, solver: Solver) -> Result<OptimalPoint> {
    numeric_optimum_with(kappa, j, eta, phi, solver, &SearchOptions::default())
}

pub fn numeric_optimum_with(
    kappa: f64,
    j: f64,
    eta: f64,
    phi: f64,
    solver: Solver,
    opts: &SearchOptions,
) -> Result<OptimalPoint> {
    check_positive("kappa", kappa)?;
    check_positive("j", j)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must be positive")));
    }
    if opts.delta_points < 2 || opts.u_points < 2 {
        return Err(Error::InvalidParameter("search grid needs at least 2 points per axis".into()));
    }
    let spec = HilbertSpec::symmetric(opts.n_max);
    let delta_max = opts.delta_max_over_j * j;
    let (log_u_min, log_u_max) = (opts.u_min.log10(), opts.u_max.log10());
    let in_box = |d: f64, lu: f64| d >= opts.delta_min && d <= delta_max && lu >= log_u_min && lu <= log_u_max;

    let objective = |delta: f64, u: f64| -> Option<f64> {
        let p = weak_drive_params(kappa, j, eta, phi, delta, u);
        evaluate(&p, solver, spec).ok().and_then(|s| s.g2_a).filter(|g| g.is_finite())
    };

    let deltas: Vec<f64> = (0..opts.delta_points)
        .map(|i| opts.delta_min + (delta_max - opts.delta_min) * i as f64 / (opts.delta_points - 1) as f64)
        .collect();
    let log_us: Vec<f64> = (0..opts.u_points)
        .map(|i| log_u_min + (log_u_max - log_u_min) * i as f64 / (opts.u_points - 1) as f64)
        .collect();

    let cells: Vec<(usize, usize)> =
        (0..deltas.len()).flat_map(|i| (0..log_us.len()).map(move |k| (i, k))).collect();
    let values: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(i, k)| objective(deltas[i], 10f64.powf(log_us[k])))
        .collect();

    // lowest g2; ties within 1e-12 go to the smaller U
    let mut best: Option<(f64, f64, f64)> = None;
    for (&(i, k), v) in cells.iter().zip(&values) {
        let Some(g) = *v else { continue };
        let (d, lu) = (deltas[i], log_us[k]);
        best = match best {
            None => Some((g, d, lu)),
            Some((bg, bd, blu)) => {
                if g < bg - 1e-12 || ((g - bg).abs() <= 1e-12 && lu < blu) {
                    Some((g, d, lu))
                } else {
                    Some((bg, bd, blu))
                }
            }
        };
    }
    let (grid_g2, d0, lu0) = best.ok_or_else(|| {
        Error::Optimizer(format!("g2 is undefined over the whole search grid (J = {j}, eta = {eta}, phi = {phi})"))
    })?;

    let mut seeds = vec![(d0, lu0, grid_g2)];
    if opts.analytic_seeds {
        let mut candidates = Vec::new();
        if let Ok(p) = single_drive_optimum(kappa, j, Branch::Plus) {
            candidates.push((p.delta_opt, p.u_opt));
        }
        if eta > 1.0 && eta.is_finite() {
            let (d, u) = dual_drive_asymptotic_values(kappa, j, eta);
            candidates.push((d, u));
        }
        for (d, u) in candidates {
            if u > 0.0 && in_box(d, u.log10()) {
                if let Some(g) = objective(d, u) {
                    if g < grid_g2 {
                        seeds.push((d, u.log10(), g));
                    }
                }
            }
        }
    }

    let step_d = (delta_max - opts.delta_min) / (opts.delta_points - 1) as f64;
    let step_lu = (log_u_max - log_u_min) / (opts.u_points - 1) as f64;
    let f = |x: &[f64; 2]| {
        if !in_box(x[0], x[1]) {
            return f64::INFINITY;
        }
        objective(x[0], 10f64.powf(x[1])).unwrap_or(f64::INFINITY)
    };
    // relative tolerance on U expressed in log10 units
    let tol = [Tol::Relative(opts.rel_tol), Tol::Absolute(opts.rel_tol / std::f64::consts::LN_10)];

    let mut refined: Option<(f64, f64, f64, bool)> = None;
    for (d, lu, _) in seeds {
        let r = nelder_mead(f, [d, lu], [0.5 * step_d, 0.5 * step_lu], tol, 5000);
        if refined.is_none_or(|(g, ..)| r.f < g) {
            refined = Some((r.f, r.x[0], r.x[1], r.converged));
        }
    }
    let (_, delta_opt, log_u, converged) = refined.expect("at least one seed");
    let u_opt = 10f64.powf(log_u);
    let g2_min = objective(delta_opt, u_opt);
    let warning = (!converged).then(|| "simplex refinement hit its iteration limit".to_string());
    Ok(OptimalPoint { delta_opt, u_opt, g2_min, method: Method::Numeric, warning })
}

/// `(φ*, 1/η*)` solving `J = η e^{iφ} (Δ - iκ/2)`, where mode A's one-photon
/// amplitude vanishes.
pub fn c10_zero_condition(kappa: f64, j: f64, delta: f64) -> Result<BunchingCondition> {
    check_positive("j", j)?;
    let z = Complex64::new(delta, -kappa / 2.0);
    if z.norm() == 0.0 {
        return Err(Error::InvalidParameter("delta and kappa are both zero".into()));
    }
    Ok(BunchingCondition { phi_star: wrap_phase(-z.arg()), eta_inv_star: z.norm() / j })
}

/// Relative phase along which strong bunching appears at the dual-drive
/// optimum, `φ = atan(ηκ/2J)`; meaningful for `ηκ/2J ≪ 1`.
pub fn bunching_phase_curve(kappa: f64, j: f64, eta: f64) -> f64 {
    (eta * kappa / (2.0 * j)).atan()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::one_photon_amplitudes;
    use std::f64::consts::PI;

    #[test]
    fn single_drive_values() {
        let p = single_drive_optimum(1.0, 10.0, Branch::Plus).unwrap();
        assert!((p.delta_opt - 0.28868).abs() < 1e-5);
        assert!((p.u_opt - 0.0038490).abs() < 1e-7);
        assert!(p.warning.is_none());
        let m = single_drive_optimum(1.0, 10.0, Branch::Minus).unwrap();
        assert_eq!((m.delta_opt, m.u_opt), (-p.delta_opt, -p.u_opt));
        let p20 = single_drive_optimum(1.0, 20.0, Branch::Plus).unwrap();
        assert_eq!(p20.delta_opt, p.delta_opt);
        assert!((p20.u_opt - p.u_opt / 4.0).abs() < 1e-18);
        assert!(single_drive_optimum(1.0, 0.0, Branch::Plus).is_err());
        assert!(single_drive_optimum(1.0, 3.0, Branch::Plus).unwrap().warning.is_some());
    }

    #[test]
    fn dual_drive_asymptotic_values_match() {
        let p = dual_drive_optimum_asymptotic(1.0, 10.0, 2.0).unwrap();
        assert!((p.delta_opt - 5.0).abs() < 1e-14);
        assert!((p.u_opt - 1.0 / 30.0).abs() < 1e-15);
        let p = dual_drive_optimum_asymptotic(1.0, 10.0, 3.0).unwrap();
        assert!((p.delta_opt - 10.0 / 3.0).abs() < 1e-14);
        assert!((p.u_opt - 0.01875).abs() < 1e-15);
        assert!(dual_drive_optimum_asymptotic(1.0, 10.0, 1.0).is_err());
        assert!(dual_drive_optimum_asymptotic(1.0, 10.0, 0.5).is_err());
        assert!(dual_drive_optimum_asymptotic(1.0, 10.0, 1.0 + 1e-9).unwrap().u_opt > 1e6);
        assert!(dual_drive_optimum_asymptotic(1.0, 10.0, 150.0).unwrap().warning.is_some());
    }

    #[test]
    fn exact_root_close_to_asymptotic() {
        let p = dual_drive_optimum_exact_phi0(1.0, 10.0, 3.0).unwrap();
        assert!(((p.delta_opt - 10.0 / 3.0) / (10.0 / 3.0)).abs() < 0.05, "{p:?}");
        assert!(((p.u_opt - 0.01875) / 0.01875).abs() < 0.05, "{p:?}");
        let (r1, r2) = exact_condition_residuals(1.0, 10.0, 3.0, p.delta_opt, p.u_opt);
        assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10, "{r1:e} {r2:e}");
    }

    #[test]
    fn exact_root_sharpens_with_coupling() {
        let p = dual_drive_optimum_exact_phi0(1.0, 100.0, 3.0).unwrap();
        let (d, u) = dual_drive_asymptotic_values(1.0, 100.0, 3.0);
        assert!(((p.delta_opt - d) / d).abs() < 1e-3, "{p:?}");
        assert!(((p.u_opt - u) / u).abs() < 1e-3, "{p:?}");
    }

    /// At the exact zero-phase optimum the hierarchy g2 sits at least two
    /// decades below its value one linewidth away in detuning.
    #[test]
    fn exact_root_is_antibunching_dip() {
        let (j, eta) = (10.0, 3.0);
        let p = dual_drive_optimum_exact_phi0(1.0, j, eta).unwrap();
        let g2_at = |delta: f64| {
            let mut sp = weak_drive_params(1.0, j, eta, 0.0, delta, p.u_opt);
            sp.u_a = 0.37;
            crate::amplitude::g2_approx(&crate::amplitude::hierarchy(&sp).unwrap()).unwrap()
        };
        assert!(g2_at(p.delta_opt) * 100.0 <= g2_at(p.delta_opt + 1.0));
    }

    #[test]
    fn c10_zero_point() {
        let b = c10_zero_condition(1.0, 10.0, 1.0 / (2.0 * 3f64.sqrt())).unwrap();
        assert!((b.phi_star - PI / 3.0).abs() < 1e-14);
        assert!((b.eta_inv_star - 1.0 / (3f64.sqrt() * 10.0)).abs() < 1e-15);
        assert!((b.eta_inv_star - 0.057735).abs() < 1e-6);

        let b = c10_zero_condition(1.0, 10.0, 0.0).unwrap();
        assert!((b.phi_star - PI / 2.0).abs() < 1e-15);
        assert!((b.eta_inv_star - 0.05).abs() < 1e-15);

        assert!(c10_zero_condition(1.0, 0.0, 0.3).is_err());
        assert!(c10_zero_condition(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn c10_zero_cancels_amplitude() {
        let (j, delta) = (10.0, 0.8);
        let b = c10_zero_condition(1.0, j, delta).unwrap();
        let p = weak_drive_params(1.0, j, 1.0 / b.eta_inv_star, b.phi_star, delta, 0.01);
        let (c10, c01) = one_photon_amplitudes(&p).unwrap();
        assert!(c10.norm() < 1e-12 * c01.norm().max(1e-300), "{c10}");
    }

    #[test]
    fn bunching_curve_values() {
        assert_eq!(bunching_phase_curve(1.0, 10.0, 0.0), 0.0);
        assert!((bunching_phase_curve(1.0, 10.0, 20.0) - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn bunching_curve_is_bunching() {
        let (j, eta) = (10.0, 5.0);
        let (d, u) = dual_drive_asymptotic_values(1.0, j, eta);
        let phi = bunching_phase_curve(1.0, j, eta);
        let on = hierarchy_g2(1.0, j, eta, phi, d, u).unwrap();
        let at_zero = hierarchy_g2(1.0, j, eta, 0.0, d, u).unwrap();
        assert!(on >= 10.0 * at_zero, "{on} vs {at_zero}");
    }
}
