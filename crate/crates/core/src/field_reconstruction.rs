//! Classical fields as coherent-state expectation values.
//!
//! With `P = xi(k, t) exp(-i c k t)` and `Q = conj(xi(-k, t)) exp(i c k t)`:
//!
//! ```text
//! A     = sqrt(hbar mu0 c / (2 pi)^3)   \int d^3k (P + Q) exp(i k.x) / sqrt(2k)
//! B     = sqrt(hbar mu0 c / (2 pi)^3)   \int d^3k i k x (P + Q) exp(i k.x) / sqrt(2k)
//! E_perp = i sqrt(hbar mu0 c^3 / (2 pi)^3) \int d^3k sqrt(k / 2) (P - Q) exp(i k.x)
//! ```
//!
//! The `-k` partner of each node is its antipode on the grid. The integrals
//! are real when `xi` is hermitian, so their imaginary parts measure the
//! asymmetry of the discretization.

use num_complex::Complex64;
use serde::Serialize;

use crate::coherent_state::PhotonAmplitude;
use crate::constants::{C_LIGHT, HBAR, MU0};
use crate::current_model::{spectral_transform, CurrentSource};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_parts, KGrid, Node};
use crate::vector::{cconj, dot, im, norm, rcross, re, Vec3};

/// Denominator floor of the imaginary residue, relative to the integral of
/// the integrand's magnitude. Fields that vanish by symmetry (such as `A` on
/// a loop axis) would otherwise report pure rounding noise as order one.
pub const RESIDUE_FLOOR: f64 = 1e-6;

/// Fields at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub position: Vec3,
    pub time: f64,
    /// Vector potential (V s/m).
    #[serde(rename = "A")]
    pub a: Vec3,
    /// Magnetic field (T).
    #[serde(rename = "B")]
    pub b: Vec3,
    /// Transverse electric field (V/m).
    pub e_perp: Vec3,
    /// Largest `|Im F| / max(|F|, RESIDUE_FLOOR \int |integrand|)` over the
    /// fields (see [`reconstruct_fields`]).
    pub imaginary_residue: f64,
    /// Quadrature error estimates for `A`, `B`, `E_perp`.
    pub estimated_error: [f64; 3],
}

/// Checks that the polar rule resolves `exp(i k.x)` at `x`.
pub fn check_resolution(grid: &KGrid, x: &Vec3) -> Result<()> {
    let spec = grid.spec();
    let phase = spec.k_max * norm(x);
    if phase > spec.n_theta as f64 / 2.0 {
        let required = (2.0 * phase).ceil() as usize;
        return Err(Error::Resolution(format!(
            "k_max |x| = {phase:.3} exceeds n_theta / 2 = {}; n_theta >= {required} is required at |x| = {:e} m",
            spec.n_theta as f64 / 2.0,
            norm(x)
        )));
    }
    if spec.n_phi < 4 || !spec.n_phi.is_multiple_of(2) {
        return Err(Error::Validation(format!(
            "field reconstruction needs an even n_phi >= 4, got {}",
            spec.n_phi
        )));
    }
    Ok(())
}

/// `A`, `B` and `E_perp` at `(x, t)` from the amplitude `xi` on its grid.
///
/// The amplitude is taken as given at `t`; pass an amplitude computed for
/// the same time. The residue ignores `E_perp` when
/// `|E_perp| < 1e-6 c |B|` (a static field has no electric part to test).
pub fn reconstruct_fields(xi: &PhotonAmplitude, x: &Vec3, t: f64) -> Result<FieldSample> {
    let grid = &**xi.grid();
    check_resolution(grid, x)?;
    let values = xi.values();
    let parts = integrate_parts(
        |node: &Node| {
            let partner = grid.antipode(node.index).expect("even n_phi");
            let rot = Complex64::new(0.0, -C_LIGHT * node.k * t).exp();
            let here = values[node.index];
            let there = cconj(&values[partner]);
            let k = node.kvec();
            let wave = Complex64::new(0.0, dot(&k, x)).exp();
            let mut out = [Complex64::new(0.0, 0.0); 12];
            let inv = 1.0 / (2.0 * node.k).sqrt();
            let root = (0.5 * node.k).sqrt();
            let mut sum = [Complex64::new(0.0, 0.0); 3];
            for c in 0..3 {
                let p = here[c] * rot;
                let q = there[c] * rot.conj();
                sum[c] = (p + q) * wave;
                out[c] = sum[c] * inv;
                out[6 + c] = Complex64::new(0.0, root) * (p - q) * wave;
            }
            let curl = rcross(&k, &sum);
            for c in 0..3 {
                out[3 + c] = Complex64::new(0.0, inv) * curl[c];
            }
            // magnitude scales of the three integrands
            for f in 0..3 {
                let m = out[3 * f..3 * f + 3].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                out[9 + f] = Complex64::new(m, 0.0);
            }
            out
        },
        grid,
    )?;
    let pref = (HBAR * MU0 * C_LIGHT / (2.0 * std::f64::consts::PI).powi(3)).sqrt();
    let pref_e = pref * C_LIGHT;
    let full = parts.full;
    let log_n = (grid.len().max(2) as f64).log2();
    let pick = |o: usize, s: f64| -> [Complex64; 3] {
        [full[o] * s, full[o + 1] * s, full[o + 2] * s]
    };
    let error = |o: usize, s: f64| -> f64 {
        let h = parts.half.expect("even n_phi");
        let d = (0..3).map(|c| (full[o + c] - h[o + c]).norm_sqr()).sum::<f64>().sqrt();
        s * (d + full[9 + o / 3].re * f64::EPSILON * log_n)
    };
    let a = pick(0, pref);
    let b = pick(3, pref);
    let e = pick(6, pref_e);
    let ratio = |f: &[Complex64; 3], scale: f64| {
        let m = f
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            .max(RESIDUE_FLOOR * scale);
        if m == 0.0 {
            0.0
        } else {
            norm(&im(f)) / m
        }
    };
    let mut residue = ratio(&a, pref * full[9].re).max(ratio(&b, pref * full[10].re));
    let e_mag = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let b_mag = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if e_mag >= 1e-6 * C_LIGHT * b_mag {
        residue = residue.max(ratio(&e, pref_e * full[11].re));
    }
    Ok(FieldSample {
        position: *x,
        time: t,
        a: re(&a),
        b: re(&b),
        e_perp: re(&e),
        imaginary_residue: residue,
        estimated_error: [error(0, pref), error(3, pref), error(6, pref_e)],
    })
}

/// Coulomb-gauge vector potential `(2 pi)^(-3/2) \int d^3k mu0 j_perp(k) exp(i k.x) / k^2`
/// (V s/m) of a static source, evaluated without photon amplitudes.
pub fn static_potential_identity(source: &CurrentSource, x: &Vec3, grid: &KGrid) -> Result<Vec3> {
    if !source.profile.is_static() {
        return Err(Error::Validation("static_potential_identity needs a static source".into()));
    }
    check_resolution(grid, x)?;
    let spectral = spectral_transform(source)?.transverse();
    let report = integrate(
        |node: &Node| {
            let k = node.kvec();
            match spectral.eval(&k) {
                Ok(j) => {
                    let f = Complex64::new(0.0, dot(&k, x)).exp() * (MU0 / (node.k * node.k));
                    [j[0] * f, j[1] * f, j[2] * f]
                }
                Err(_) => [Complex64::new(f64::NAN, 0.0); 3],
            }
        },
        grid,
    )?;
    let s = (2.0 * std::f64::consts::PI).powf(-1.5);
    Ok([report.value[0].re * s, report.value[1].re * s, report.value[2].re * s])
}
