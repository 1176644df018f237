//! Physical parameters, the rotating-frame Hamiltonian and the Lindblad
//! superoperator of two coupled, coherently driven Kerr cavities.
//!
//! All rates and energies are expressed in units of the cavity linewidth.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation, HilbertSpec, Mode, OperatorMatrix};

/// Parameters of the driven photonic molecule.
///
/// Serializes as a flat JSON object; missing fields take their defaults
/// (zero everywhere except unit dissipation rates).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub delta_a: f64,
    pub delta_b: f64,
    pub coupling_j: f64,
    pub u_a: f64,
    pub u_b: f64,
    pub eps_a: f64,
    pub eps_b: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            delta_a: 0.0,
            delta_b: 0.0,
            coupling_j: 0.0,
            u_a: 0.0,
            u_b: 0.0,
            eps_a: 0.0,
            eps_b: 0.0,
            phi_a: 0.0,
            phi_b: 0.0,
            kappa_a: 1.0,
            kappa_b: 1.0,
        }
    }
}

impl SystemParams {
    /// Equal detunings, Kerr strengths and linewidths (`kappa = 1`), drive
    /// phase `phi` carried entirely by mode A.
    pub fn symmetric(delta: f64, j: f64, u: f64, eps_a: f64, eps_b: f64, phi: f64) -> Self {
        Self {
            delta_a: delta,
            delta_b: delta,
            coupling_j: j,
            u_a: u,
            u_b: u,
            eps_a,
            eps_b,
            phi_a: phi,
            phi_b: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("delta_a", self.delta_a),
            ("delta_b", self.delta_b),
            ("coupling_j", self.coupling_j),
            ("u_a", self.u_a),
            ("u_b", self.u_b),
            ("eps_a", self.eps_a),
            ("eps_b", self.eps_b),
            ("phi_a", self.phi_a),
            ("phi_b", self.phi_b),
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} = {v} is not finite")));
        }
        if self.kappa_a <= 0.0 || self.kappa_b <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dissipation rates must be positive (kappa_a = {}, kappa_b = {})",
                self.kappa_a, self.kappa_b
            )));
        }
        if self.eps_a < 0.0 || self.eps_b < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "drive strengths must be non-negative (eps_a = {}, eps_b = {})",
                self.eps_a, self.eps_b
            )));
        }
        if self.coupling_j < 0.0 {
            return Err(Error::InvalidParameter(format!("coupling_j = {} is negative", self.coupling_j)));
        }
        Ok(())
    }

    /// Exchange the roles of the two modes.
    pub fn swapped(&self) -> Self {
        Self {
            delta_a: self.delta_b,
            delta_b: self.delta_a,
            u_a: self.u_b,
            u_b: self.u_a,
            eps_a: self.eps_b,
            eps_b: self.eps_a,
            phi_a: self.phi_b,
            phi_b: self.phi_a,
            kappa_a: self.kappa_b,
            kappa_b: self.kappa_a,
            ..*self
        }
    }

    /// Common detuning and linewidth, if the two modes share them exactly.
    pub fn symmetric_parts(&self) -> Result<(f64, f64)> {
        if self.kappa_a != self.kappa_b {
            return Err(Error::Asymmetric("kappa_a != kappa_b"));
        }
        if self.delta_a != self.delta_b {
            return Err(Error::Asymmetric("delta_a != delta_b"));
        }
        Ok((self.delta_a, self.kappa_a))
    }

    pub fn drive_a(&self) -> Complex64 {
        Complex64::from_polar(self.eps_a, self.phi_a)
    }

    pub fn drive_b(&self) -> Complex64 {
        Complex64::from_polar(self.eps_b, self.phi_b)
    }

    pub fn is_undriven(&self) -> bool {
        self.eps_a == 0.0 && self.eps_b == 0.0
    }
}

/// Strength ratio and relative phase of the two drives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveRatios {
    /// `eps_a / eps_b`; `f64::INFINITY` when mode B is undriven.
    pub eta: f64,
    /// `phi_a - phi_b` wrapped to `(-pi, pi]`.
    pub phi: f64,
}

impl DriveRatios {
    pub fn eta_is_infinite(&self) -> bool {
        self.eta.is_infinite()
    }

    pub fn eta_inv(&self) -> f64 {
        1.0 / self.eta
    }
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut x = phi.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

pub fn drive_ratios(params: &SystemParams) -> Result<DriveRatios> {
    if params.is_undriven() {
        return Err(Error::UndefinedDriveRatio);
    }
    let eta = if params.eps_b == 0.0 { f64::INFINITY } else { params.eps_a / params.eps_b };
    Ok(DriveRatios { eta, phi: wrap_phase(params.phi_a - params.phi_b) })
}

/// `H = Δa a†a + Δb b†b + J(ab† + a†b) + Ua a†a†aa + Ub b†b†bb + (εa e^{iφa} a† + εb e^{iφb} b† + h.c.)`
pub fn hamiltonian(params: &SystemParams, spec: HilbertSpec) -> OperatorMatrix {
    let a = annihilation(spec, Mode::A);
    let b = annihilation(spec, Mode::B);
    let (a_dag, b_dag) = (a.adjoint(), b.adjoint());
    let re = |x: f64| Complex64::new(x, 0.0);

    let n_a = &a_dag * &a;
    let n_b = &b_dag * &b;
    let kerr_a = &(&a_dag * &a_dag) * &(&a * &a);
    let kerr_b = &(&b_dag * &b_dag) * &(&b * &b);
    let hop = &(&a * &b_dag) + &(&a_dag * &b);
    let drive = &a_dag.scale(params.drive_a()) + &b_dag.scale(params.drive_b());

    let mut h = n_a.scale(re(params.delta_a)).into_matrix();
    h += n_b.scale(re(params.delta_b)).matrix();
    h += hop.scale(re(params.coupling_j)).matrix();
    h += kerr_a.scale(re(params.u_a)).matrix();
    h += kerr_b.scale(re(params.u_b)).matrix();
    h += drive.matrix();
    h += drive.matrix().adjoint();
    OperatorMatrix::from_matrix(h).expect("square")
}

/// Linear map on column-stacked density matrices: `vec(ρ)[i + j*dim] = ρ[i, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperoperatorMatrix {
    spec: HilbertSpec,
    matrix: DMatrix<Complex64>,
}

impl SuperoperatorMatrix {
    pub fn new(spec: HilbertSpec, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = spec.dim() * spec.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { spec, matrix })
    }

    pub fn zeros(spec: HilbertSpec) -> Self {
        let n = spec.dim() * spec.dim();
        Self { spec, matrix: DMatrix::zeros(n, n) }
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Apply to a density matrix given as a `dim x dim` matrix.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.spec.dim();
        let v = nalgebra::DVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        DMatrix::from_column_slice(d, d, out.as_slice())
    }
}

/// `dρ/dt = -i[H, ρ] + κa D[a]ρ + κb D[b]ρ` with `D[c]ρ = cρc† - ½{c†c, ρ}`.
pub fn liouvillian(params: &SystemParams, spec: HilbertSpec) -> SuperoperatorMatrix {
    let d = spec.dim();
    let id = DMatrix::<Complex64>::identity(d, d);
    let h = hamiltonian(params, spec).into_matrix();
    let minus_i = Complex64::new(0.0, -1.0);

    // vec(XρY) = (Yᵀ ⊗ X) vec(ρ)
    let mut l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * minus_i;
    for (mode, rate) in [(Mode::A, params.kappa_a), (Mode::B, params.kappa_b)] {
        if rate == 0.0 {
            continue;
        }
        let c = annihilation(spec, mode).into_matrix();
        let cdc = c.adjoint() * &c;
        let jump = c.conjugate().kronecker(&c);
        let anti = id.kronecker(&cdc) + cdc.transpose().kronecker(&id);
        l += (jump - anti * Complex64::new(0.5, 0.0)) * Complex64::new(rate, 0.0);
    }
    SuperoperatorMatrix { spec, matrix: l }
}
