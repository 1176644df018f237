#![allow(dead_code)]

use num_complex::Complex64;
use photmol::model::SystemParams;
use photmol::optimal::weak_drive_params;
use rand::Rng;

/// Coherent amplitudes of the linear (U = 0) system from the classical
/// field equations `0 = -i(Δ - iκ/2)α - iJβ - iE_a` (and a ↔ b), by Cramer's rule.
pub fn linear_response(p: &SystemParams) -> (Complex64, Complex64) {
    let za = Complex64::new(p.delta_a, -p.kappa_a / 2.0);
    let zb = Complex64::new(p.delta_b, -p.kappa_b / 2.0);
    let j = Complex64::new(p.coupling_j, 0.0);
    let ea = Complex64::from_polar(p.eps_a, p.phi_a);
    let eb = Complex64::from_polar(p.eps_b, p.phi_b);
    let det = za * zb - j * j;
    let alpha = -(ea * zb - j * eb) / det;
    let beta = -(za * eb - j * ea) / det;
    (alpha, beta)
}

/// The two zero-phase optimality conditions, written term by term from the
/// published polynomials. Returns each residual divided by the sum of the
/// magnitudes of its terms.
pub fn exact_conditions_relative(kappa: f64, j: f64, eta: f64, d: f64, u: f64) -> (f64, f64) {
    let first = [
        16.0 * j * d * d,
        -4.0 * j * kappa * kappa,
        6.0 * d * kappa * kappa * eta,
        -8.0 * d.powi(3) * eta,
        -8.0 * d * j * j / eta,
        16.0 * j * d * u,
        -4.0 * j * j * u / eta,
        -4.0 * j * j * eta * u,
        -8.0 * d * d * eta * u,
        2.0 * kappa * kappa * eta * u,
    ];
    let second = [
        4.0 * j * j * kappa / eta,
        12.0 * kappa * d * d * eta,
        -kappa.powi(3) * eta,
        -16.0 * j * kappa * d,
        8.0 * kappa * d * eta * u,
        -8.0 * j * kappa * u,
    ];
    let rel = |t: &[f64]| t.iter().sum::<f64>().abs() / t.iter().map(|x| x.abs()).sum::<f64>();
    (rel(&first), rel(&second))
}

/// Generic weak-drive point: J = 10κ, ε_a = 0.01κ, away from the deep
/// antibunching manifold.
pub fn generic_weak_drive(rng: &mut impl Rng) -> SystemParams {
    let delta = rng.gen_range(-5.0..5.0);
    let u = rng.gen_range(0.0..0.1);
    let eta = rng.gen_range(1.5..8.0);
    let phi = rng.gen_range(0.0..std::f64::consts::PI);
    weak_drive_params(1.0, 10.0, eta, phi, delta, u)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}
