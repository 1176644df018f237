//! Weak-drive amplitude hierarchy on the two-photon manifold.
//!
//! The state is expanded as `|ψ> = Σ c_{na nb} |na, nb>` with `na + nb ≤ 2`
//! and `c00 = 1`. The hierarchy solver drops back-action of the two-photon
//! amplitudes on the one-photon ones, which gives closed forms for `c10`,
//! `c01` and a 3x3 system for the rest; the full truncated solver keeps those
//! terms and solves the 5x5 system directly.

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, SVector, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;

const SQRT2: f64 = std::f64::consts::SQRT_2;
/// Relative residual every returned amplitude set must satisfy.
const RESIDUAL_TOL: f64 = 1e-12;

/// Amplitudes of `|0,0>, |1,0>, |0,1>, |2,0>, |1,1>, |0,2>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSet {
    pub c00: Complex64,
    pub c10: Complex64,
    pub c01: Complex64,
    pub c20: Complex64,
    pub c11: Complex64,
    pub c02: Complex64,
}

impl AmplitudeSet {
    pub fn vacuum() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self { c00: Complex64::new(1.0, 0.0), c10: zero, c01: zero, c20: zero, c11: zero, c02: zero }
    }

    /// Mode-exchanged amplitudes (`c10 <-> c01`, `c20 <-> c02`).
    pub fn swapped(&self) -> Self {
        Self { c10: self.c01, c01: self.c10, c20: self.c02, c02: self.c20, ..*self }
    }

    pub fn g2_a(&self) -> Option<f64> {
        g2_approx(self)
    }

    pub fn mean_n_a(&self) -> f64 {
        mean_photon_approx(self)
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `Δ - iκ/2` for the symmetric model.
fn detuning_pole(params: &SystemParams) -> Result<(Complex64, f64)> {
    let (delta, kappa) = params.symmetric_parts()?;
    Ok((Complex64::new(delta, -kappa / 2.0), delta))
}

/// Closed-form one-photon amplitudes (with `c00 = 1`).
pub fn one_photon_amplitudes(params: &SystemParams) -> Result<(Complex64, Complex64)> {
    let (z, _) = detuning_pole(params)?;
    let j = c(params.coupling_j);
    let (ea, eb) = (params.drive_a(), params.drive_b());
    let den = z * z - j * j;
    Ok(((eb * j - ea * z) / den, (ea * j - eb * z) / den))
}

fn two_photon_system(params: &SystemParams, c10: Complex64, c01: Complex64) -> (Matrix3<Complex64>, Vector3<Complex64>) {
    let (delta, kappa) = (params.delta_a, params.kappa_a);
    let (ea, eb) = (params.drive_a(), params.drive_b());
    let sj = c(SQRT2 * params.coupling_j);
    let zero = c(0.0);
    let d20 = Complex64::new(2.0 * delta + 2.0 * params.u_a, -kappa);
    let d02 = Complex64::new(2.0 * delta + 2.0 * params.u_b, -kappa);
    let d11 = Complex64::new(2.0 * delta, -kappa);
    // unknowns ordered (c20, c11, c02)
    #[rustfmt::skip]
    let m = Matrix3::new(
        d20,  sj,   zero,
        zero, sj,   d02,
        sj,   d11,  sj,
    );
    let rhs = Vector3::new(-c(SQRT2) * ea * c10, -c(SQRT2) * eb * c01, -eb * c10 - ea * c01);
    (m, rhs)
}

/// Two-photon amplitudes `(c20, c11, c02)` driven by the given one-photon amplitudes.
pub fn two_photon_amplitudes(
    params: &SystemParams,
    c10: Complex64,
    c01: Complex64,
) -> Result<(Complex64, Complex64, Complex64)> {
    params.symmetric_parts()?;
    let (m, rhs) = two_photon_system(params, c10, c01);
    let norm = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m.determinant().norm() < 1e-14 * norm.powi(3) {
        return Err(Error::Singular(format!("two-photon system at {params:?}")));
    }
    let x = solve_checked(m, &rhs, "two-photon system", params)?;
    Ok((x[0], x[1], x[2]))
}

/// Hierarchy solution: closed-form one-photon amplitudes feeding the
/// two-photon system. An undriven system returns the vacuum set.
pub fn hierarchy(params: &SystemParams) -> Result<AmplitudeSet> {
    params.validate()?;
    params.symmetric_parts()?;
    if params.is_undriven() {
        return Ok(AmplitudeSet::vacuum());
    }
    let (c10, c01) = one_photon_amplitudes(params)?;
    let (c20, c11, c02) = two_photon_amplitudes(params, c10, c01)?;
    Ok(AmplitudeSet { c00: c(1.0), c10, c01, c20, c11, c02 })
}

type Mat5 = SMatrix<Complex64, 5, 5>;
type Vec5 = SVector<Complex64, 5>;

fn full_system(params: &SystemParams) -> (Mat5, Vec5) {
    let za = Complex64::new(params.delta_a, -params.kappa_a / 2.0);
    let zb = Complex64::new(params.delta_b, -params.kappa_b / 2.0);
    let j = c(params.coupling_j);
    let sj = c(SQRT2) * j;
    let (ea, eb) = (params.drive_a(), params.drive_b());
    let s2 = c(SQRT2);
    let zero = c(0.0);
    // unknowns ordered (c10, c01, c20, c11, c02)
    #[rustfmt::skip]
    let m = Mat5::from_row_slice(&[
        za,      j,       s2 * ea.conj(), eb.conj(), zero,
        j,       zb,      zero,           ea.conj(), s2 * eb.conj(),
        s2 * ea, zero,    za * 2.0 + c(2.0 * params.u_a), sj, zero,
        eb,      ea,      sj,             za + zb,   sj,
        zero,    s2 * eb, zero,           sj,        zb * 2.0 + c(2.0 * params.u_b),
    ]);
    let rhs = Vec5::new(-ea, -eb, zero, zero, zero);
    (m, rhs)
}

/// Steady state of the full two-photon-manifold equations, including the
/// two-photon back-action on the one-photon amplitudes. Handles unequal
/// linewidths and detunings.
pub fn full_truncated_steady(params: &SystemParams) -> Result<AmplitudeSet> {
    params.validate()?;
    if params.is_undriven() {
        return Ok(AmplitudeSet::vacuum());
    }
    let (m, rhs) = full_system(params);
    let x = solve_checked(m, &rhs, "truncated amplitude system", params)?;
    Ok(AmplitudeSet { c00: c(1.0), c10: x[0], c01: x[1], c20: x[2], c11: x[3], c02: x[4] })
}

fn solve_checked<const N: usize>(
    m: SMatrix<Complex64, N, N>,
    rhs: &SVector<Complex64, N>,
    what: &str,
    params: &SystemParams,
) -> Result<DVector<Complex64>> {
    let m = DMatrix::from_column_slice(N, N, m.as_slice());
    let rhs = DVector::from_column_slice(rhs.as_slice());
    let x = m
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("{what} at {params:?}")))?;
    let rhs_norm = rhs.norm();
    let res = (&m * &x - &rhs).norm();
    if !res.is_finite() || res > RESIDUAL_TOL * rhs_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Singular(format!("{what}: residual {res:.3e} at {params:?}")));
    }
    Ok(x)
}

/// `g2(0) ≈ 2|c20|² / |c10|⁴`, or `None` when mode A is empty.
pub fn g2_approx(amps: &AmplitudeSet) -> Option<f64> {
    let n = amps.c10.norm_sqr();
    if n == 0.0 {
        return None;
    }
    Some(2.0 * amps.c20.norm_sqr() / (n * n))
}

/// `<n_a> ≈ |c10|²`.
pub fn mean_photon_approx(amps: &AmplitudeSet) -> f64 {
    amps.c10.norm_sqr()
}
