//! Steady states and time evolution of the master equation, and the photon
//! statistics derived from them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::HilbertSpec;
use crate::model::{liouvillian, SystemParams, SuperoperatorMatrix};

/// Pivot-ratio bound above which the trace-replaced system is rejected.
const MAX_CONDITION: f64 = 1e13;
/// Below this mean photon number g2 is reported as undefined.
const MIN_MEAN_PHOTONS: f64 = 1e-300;
const REFINEMENT_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    spec: HilbertSpec,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(spec: HilbertSpec, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = spec.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: matrix.nrows() });
        }
        Ok(Self { spec, matrix })
    }

    /// Projector onto the Fock state `|n_a, n_b>`.
    pub fn fock(spec: HilbertSpec, n_a: usize, n_b: usize) -> Self {
        let d = spec.dim();
        let mut matrix = DMatrix::zeros(d, d);
        let i = spec.index(n_a, n_b);
        matrix[(i, i)] = Complex64::new(1.0, 0.0);
        Self { spec, matrix }
    }

    pub fn vacuum(spec: HilbertSpec) -> Self {
        Self::fock(spec, 0, 0)
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Probability of the basis state `|n_a, n_b>`.
    pub fn population(&self, n_a: usize, n_b: usize) -> f64 {
        let i = self.spec.index(n_a, n_b);
        self.matrix[(i, i)].re
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn vec(&self) -> DVector<Complex64> {
        DVector::from_column_slice(self.matrix.as_slice())
    }

    fn from_vec(spec: HilbertSpec, v: &DVector<Complex64>) -> Self {
        let d = spec.dim();
        Self { spec, matrix: DMatrix::from_column_slice(d, d, v.as_slice()) }
    }

    fn hermitize(&mut self) {
        self.matrix = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
    }
}

/// Mean photon numbers and equal-time second-order correlations of both modes.
///
/// `g2_a`/`g2_b` are `None` when the corresponding mode is (numerically) empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub mean_n_a: f64,
    pub mean_n_b: f64,
    pub g2_a: Option<f64>,
    pub g2_b: Option<f64>,
}

/// Solve `L vec(ρ) = 0` with `tr ρ = 1` substituted for the first row.
///
/// The solve is followed by iterative refinement with residuals accumulated in
/// double-double arithmetic. Steady states of weakly driven cavities hold
/// populations many orders of magnitude below `ρ_00`, and plain elimination
/// only resolves them to `eps * ‖ρ‖`.
pub fn steady_state(l: &SuperoperatorMatrix) -> Result<DensityMatrix> {
    let spec = l.spec();
    let d = spec.dim();
    let n = d * d;

    let mut a = l.matrix().clone();
    for col in 0..n {
        a[(0, col)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i + i * d)] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = DVector::zeros(n);
    rhs[0] = Complex64::new(1.0, 0.0);

    let lu = a.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = u.diagonal().iter().map(|z| z.norm()).collect();
    let max_pivot = diag.iter().copied().fold(0.0, f64::max);
    let min_pivot = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_pivot > 0.0) || max_pivot / min_pivot > MAX_CONDITION {
        return Err(Error::Singular(format!(
            "steady-state system has pivot ratio {:.3e} (limit {MAX_CONDITION:.0e})",
            max_pivot / min_pivot
        )));
    }
    let mut x = lu.solve(&rhs).ok_or_else(|| Error::Singular("steady-state LU solve failed".into()))?;

    for _ in 0..REFINEMENT_STEPS {
        let r = residual_dd(&a, &x, &rhs);
        let Some(dx) = lu.solve(&r) else { break };
        x += dx;
    }

    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular("steady-state solution is not finite".into()));
    }

    let mut rho = DensityMatrix::from_vec(spec, &x);
    rho.hermitize();
    let tr = rho.trace().re;
    rho.matrix /= Complex64::new(tr, 0.0);
    Ok(rho)
}

/// Steady state of the system described by `params`, with the parameter point
/// attached to any solver error.
pub fn solve(params: &SystemParams, spec: HilbertSpec) -> Result<DensityMatrix> {
    params.validate()?;
    steady_state(&liouvillian(params, spec)).map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!("{msg} at {params:?}")),
        other => other,
    })
}

// Error-free transformations for the refinement residual.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Clone, Copy, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    #[inline]
    fn add(self, x: f64) -> Self {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = two_sum(s, e + self.lo);
        Self { hi, lo }
    }

    #[inline]
    fn add_prod(self, a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        self.add(p).add(e)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// `b - A x` with every product and sum carried in double-double.
fn residual_dd(a: &DMatrix<Complex64>, x: &DVector<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
    let n = a.nrows();
    let mut re = vec![DoubleDouble::default(); n];
    let mut im = vec![DoubleDouble::default(); n];
    for i in 0..n {
        re[i] = re[i].add(b[i].re);
        im[i] = im[i].add(b[i].im);
    }
    for (j, xj) in x.iter().enumerate() {
        if *xj == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (i, aij) in a.column(j).iter().enumerate() {
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            re[i] = re[i].add_prod(-aij.re, xj.re).add_prod(aij.im, xj.im);
            im[i] = im[i].add_prod(-aij.re, xj.im).add_prod(-aij.im, xj.re);
        }
    }
    DVector::from_iterator(n, re.iter().zip(&im).map(|(r, i)| Complex64::new(r.value(), i.value())))
}

/// Compressed sparse rows of a superoperator, for repeated products.
struct SparseRows {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseRows {
    fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        Self { offsets, cols, vals }
    }

    fn mul_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
            *o = self.cols[lo..hi].iter().zip(&self.vals[lo..hi]).map(|(&j, v)| v * x[j]).sum();
        }
    }
}

/// Classical fourth-order Runge-Kutta integration of `d vec(ρ)/dt = L vec(ρ)`.
///
/// The trace is renormalized after every step; a step that moves the trace by
/// more than `1e-6` (or lets the state blow up) is reported as unstable.
pub fn evolve(l: &SuperoperatorMatrix, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidParameter(format!("t_final = {t_final} must be non-negative")));
    }
    if rho0.spec() != l.spec() {
        return Err(Error::DimensionMismatch { expected: l.spec().dim(), actual: rho0.spec().dim() });
    }
    let spec = l.spec();
    let d = spec.dim();
    let n = d * d;
    let sparse = SparseRows::from_dense(l.matrix());
    let diag: Vec<usize> = (0..d).map(|i| i + i * d).collect();

    let mut y: Vec<Complex64> = rho0.vec().as_slice().to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n]);

    let steps = (t_final / dt).round() as usize;
    let steps = if (steps as f64 * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        (t_final / dt).ceil() as usize
    } else {
        steps
    };
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };

    for step in 0..steps {
        let before: f64 = diag.iter().map(|&i| y[i].re).sum();
        sparse.mul_into(&y, &mut k1);
        axpy(&y, h / 2.0, &k1, &mut tmp);
        sparse.mul_into(&tmp, &mut k2);
        axpy(&y, h / 2.0, &k2, &mut tmp);
        sparse.mul_into(&tmp, &mut k3);
        axpy(&y, h, &k3, &mut tmp);
        sparse.mul_into(&tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        let trace: f64 = diag.iter().map(|&i| y[i].re).sum();
        let norm2: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        let drift = (trace - before).abs();
        if drift > 1e-6 || !norm2.is_finite() || norm2 > 4.0 {
            return Err(Error::Unstable { drift, time: (step + 1) as f64 * h });
        }
        let scale = 1.0 / trace;
        y.iter_mut().for_each(|z| *z *= scale);
    }
    Ok(DensityMatrix::from_vec(spec, &DVector::from_vec(y)))
}

fn axpy(y: &[Complex64], alpha: f64, x: &[Complex64], out: &mut [Complex64]) {
    for ((o, yi), xi) in out.iter_mut().zip(y).zip(x) {
        *o = yi + xi * alpha;
    }
}

/// `<x†x>` and `<x†x†xx>/<x†x>²` for both modes, read off the diagonal.
pub fn observables(rho: &DensityMatrix) -> Observables {
    let spec = rho.spec();
    let (mut n_a, mut n_b, mut nn_a, mut nn_b) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..spec.dim() {
        let (a, b) = spec.occupation(i);
        let p = rho.matrix[(i, i)].re;
        let (a, b) = (a as f64, b as f64);
        n_a += a * p;
        n_b += b * p;
        nn_a += a * (a - 1.0) * p;
        nn_b += b * (b - 1.0) * p;
    }
    let g2 = |nn: f64, n: f64| (n >= MIN_MEAN_PHOTONS).then(|| (nn / (n * n)).max(0.0));
    let (n_a, n_b) = (n_a.max(0.0), n_b.max(0.0));
    Observables { mean_n_a: n_a, mean_n_b: n_b, g2_a: g2(nn_a, n_a), g2_b: g2(nn_b, n_b) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_single(delta: f64, eps: f64) -> SystemParams {
        SystemParams { delta_a: delta, eps_a: eps, ..SystemParams::default() }
    }

    #[test]
    fn undriven_steady_state_is_vacuum() {
        let spec = HilbertSpec::symmetric(2);
        let p = SystemParams { coupling_j: 3.0, delta_a: 1.0, u_b: 0.2, ..SystemParams::default() };
        let rho = solve(&p, spec).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::vacuum(spec)) < 1e-12);
    }

    #[test]
    fn coherent_state_of_linear_cavity() {
        let (delta, eps) = (0.4, 0.3);
        let spec = HilbertSpec::new(12, 0);
        let rho = solve(&linear_single(delta, eps), spec).unwrap();
        let obs = observables(&rho);
        let expect = eps * eps / (delta * delta + 0.25);
        assert!((obs.mean_n_a - expect).abs() < 1e-8, "{} vs {expect}", obs.mean_n_a);
        assert!((obs.g2_a.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn residual_small() {
        let p = SystemParams::symmetric(0.3, 5.0, 0.05, 0.01, 0.004, 0.7);
        let l = liouvillian(&p, HilbertSpec::default());
        let rho = steady_state(&l).unwrap();
        let res = l.apply(rho.matrix()).iter().fold(0.0, |m: f64, z| m.max(z.norm()));
        assert!(res <= 1e-10 * l.norm_inf());
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolve_with_zero_generator_is_identity() {
        let spec = HilbertSpec::symmetric(1);
        let l = SuperoperatorMatrix::zeros(spec);
        let rho = DensityMatrix::fock(spec, 1, 0);
        assert_eq!(evolve(&l, &rho, 2.0, 0.1).unwrap(), rho);
    }

    #[test]
    fn evolve_exponential_decay() {
        let spec = HilbertSpec::symmetric(2);
        let l = liouvillian(&SystemParams::default(), spec);
        let rho = evolve(&l, &DensityMatrix::fock(spec, 1, 0), 1.0, 1e-3).unwrap();
        let n_a = observables(&rho).mean_n_a;
        assert!((n_a - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn evolve_rejects_bad_step() {
        let spec = HilbertSpec::symmetric(1);
        let l = SuperoperatorMatrix::zeros(spec);
        let rho = DensityMatrix::vacuum(spec);
        assert!(matches!(evolve(&l, &rho, 1.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(evolve(&l, &rho, -1.0, 0.1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn evolve_detects_instability() {
        let spec = HilbertSpec::symmetric(3);
        let p = SystemParams::symmetric(0.0, 50.0, 1.0, 1.0, 0.0, 0.0);
        let l = liouvillian(&p, spec);
        let r = evolve(&l, &DensityMatrix::vacuum(spec), 10.0, 0.5);
        assert!(matches!(r, Err(Error::Unstable { .. })), "{r:?}");
    }

    #[test]
    fn vacuum_g2_undefined() {
        let obs = observables(&DensityMatrix::vacuum(HilbertSpec::symmetric(2)));
        assert_eq!(obs.mean_n_a, 0.0);
        assert!(obs.g2_a.is_none() && obs.g2_b.is_none());
    }

    #[test]
    fn single_photon_antibunched() {
        let obs = observables(&DensityMatrix::fock(HilbertSpec::symmetric(2), 1, 0));
        assert_eq!(obs.mean_n_a, 1.0);
        assert_eq!(obs.g2_a, Some(0.0));
    }
}
