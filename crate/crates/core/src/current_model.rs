//! Current sources, their Fourier transforms and temporal spectra.
//!
//! Fourier convention: `j(k) = (2 pi)^(-3/2) \int d^3x exp(-i k.x) j(x)`.
//! With it a thin loop of current `I` and radius `R` about the z axis has
//! `j(k) = -i (I R / sqrt(2 pi)) J1(k R sin(theta)) e_phi`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use errorfunctions::ComplexErrorFunctions;
use crate::quadrature::bessel_j1;
use crate::vector::{
    add, cross, dot, norm, normalized, real_times, scale, sub, CVec3, Vec3,
    CZERO3,
};

const INV_TWO_PI_3_2: f64 = 0.063_493_635_934_240_97; // (2 pi)^(-3/2)

/// Time dependence `f(t)` of a separable current `j(x, t) = j(x) f(t)`, with `|f| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TemporalProfile {
    Static,
    /// `f(t) = exp(-(t - t0)^2 / (2 sigma^2))`.
    GaussianPulse { t0: f64, sigma: f64 },
    /// `f(t) = g(t) cos(omega (t - t_on))` with `g = 1` after `t_on` and a
    /// Gaussian ramp of width `ramp_sigma` before it.
    TruncatedHarmonic { omega: f64, t_on: f64, ramp_sigma: f64 },
}

impl TemporalProfile {
    pub fn is_static(&self) -> bool {
        matches!(self, TemporalProfile::Static)
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TemporalProfile::Static => 1.0,
            TemporalProfile::GaussianPulse { t0, sigma } => {
                let s = (t - t0) / sigma;
                (-0.5 * s * s).exp()
            }
            TemporalProfile::TruncatedHarmonic { omega, t_on, ramp_sigma } => {
                let s = t - t_on;
                let envelope = if s >= 0.0 {
                    1.0
                } else {
                    (-0.5 * (s / ramp_sigma).powi(2)).exp()
                };
                envelope * (omega * s).cos()
            }
        }
    }

    /// Natural start of the time window: where the drive is negligible.
    pub fn default_start(&self) -> Option<f64> {
        match *self {
            TemporalProfile::Static => None,
            TemporalProfile::GaussianPulse { t0, sigma } => Some(t0 - 8.0 * sigma),
            TemporalProfile::TruncatedHarmonic { t_on, ramp_sigma, .. } => {
                Some(t_on - 8.0 * ramp_sigma)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TemporalProfile::Static => true,
            TemporalProfile::GaussianPulse { t0, sigma } => {
                t0.is_finite() && sigma.is_finite() && sigma > 0.0
            }
            TemporalProfile::TruncatedHarmonic { omega, t_on, ramp_sigma } => {
                omega.is_finite()
                    && omega > 0.0
                    && t_on.is_finite()
                    && ramp_sigma.is_finite()
                    && ramp_sigma > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid temporal profile {self:?}")))
        }
    }
}

/// Real current density samples on a uniform cubic grid (A/m^2).
///
/// Sample `(ix, iy, iz)` sits at `origin + spacing * (ix, iy, iz)` and is
/// stored at `ix + shape[0] * (iy + shape[1] * iz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurrent {
    origin: Vec3,
    spacing: f64,
    shape: [usize; 3],
    values: Vec<Vec3>,
    support: Vec<(Vec3, Vec3)>,
}

impl SampledCurrent {
    pub fn new(origin: Vec3, spacing: f64, shape: [usize; 3], values: Vec<Vec3>) -> Result<Self> {
        let mut problems = Vec::new();
        if !(spacing.is_finite() && spacing > 0.0) {
            problems.push(format!("spacing must be finite and > 0, got {spacing}"));
        }
        if shape.iter().any(|&n| n < 2) {
            problems.push(format!("grid needs >= 2 points per axis, got {shape:?}"));
        }
        if !origin.iter().all(|v| v.is_finite()) {
            problems.push("origin must be finite".into());
        }
        let expected = shape.iter().product::<usize>();
        if values.len() != expected {
            problems.push(format!("expected {expected} samples, got {}", values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            problems.push(format!("sample {i} is not finite"));
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems.join("; ")));
        }
        let mut support = Vec::new();
        for iz in 0..shape[2] {
            for iy in 0..shape[1] {
                for ix in 0..shape[0] {
                    let v = values[ix + shape[0] * (iy + shape[1] * iz)];
                    if v != [0.0; 3] {
                        let x = add(&origin, &scale(&[ix as f64, iy as f64, iz as f64], spacing));
                        support.push((x, v));
                    }
                }
            }
        }
        Ok(Self { origin, spacing, shape, values, support })
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    /// Nonzero samples as `(position, value)` pairs.
    pub fn support(&self) -> &[(Vec3, Vec3)] {
        &self.support
    }

    fn scaled(&self, alpha: f64) -> Self {
        let values = self.values.iter().map(|v| scale(v, alpha)).collect();
        Self::new(self.origin, self.spacing, self.shape, values).expect("scaling keeps samples valid")
    }
}

/// Discretized thin loop in the `z = 0` plane, centered at the origin.
///
/// The wire is a top-hat of width two cells in both `rho` and `z`, carrying
/// `I / (2h)^2` along `e_phi`. The cube has `cells` samples per axis spanning
/// `[-half_extent, half_extent]` at cell centers.
pub fn sampled_loop(current: f64, radius: f64, cells: usize, half_extent: f64) -> Result<SampledCurrent> {
    if !(radius > 0.0 && half_extent > radius && cells >= 8) {
        return Err(Error::Validation(format!(
            "sampled loop needs radius > 0, half_extent > radius and >= 8 cells (got R = {radius}, L = {half_extent}, n = {cells})"
        )));
    }
    let h = 2.0 * half_extent / cells as f64;
    let width = 2.0 * h;
    let density = current / (width * width);
    let origin = [-half_extent + 0.5 * h; 3];
    let mut values = vec![[0.0; 3]; cells * cells * cells];
    for iz in 0..cells {
        let z = origin[2] + iz as f64 * h;
        if z.abs() >= 0.5 * width {
            continue;
        }
        for iy in 0..cells {
            let y = origin[1] + iy as f64 * h;
            for ix in 0..cells {
                let x = origin[0] + ix as f64 * h;
                let rho = x.hypot(y);
                if (rho - radius).abs() < 0.5 * width {
                    values[ix + cells * (iy + cells * iz)] = [-density * y / rho, density * x / rho, 0.0];
                }
            }
        }
    }
    SampledCurrent::new(origin, h, [cells; 3], values)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Loop of current `current` (A) and radius `radius` (m) around `axis`.
    /// `wire_radius > 0` smears the wire with an isotropic Gaussian of that
    /// standard deviation (m); zero is the ideal thin wire.
    CircularLoop {
        current: f64,
        radius: f64,
        center: Vec3,
        axis: Vec3,
        wire_radius: f64,
    },
    /// Point current element `moment` (A m) at `position`.
    HertzianDipole { moment: Vec3, position: Vec3 },
    Sampled(Arc<SampledCurrent>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentSource {
    pub geometry: Geometry,
    pub profile: TemporalProfile,
}

impl CurrentSource {
    pub fn circular_loop(current: f64, radius: f64) -> Self {
        Self {
            geometry: Geometry::CircularLoop {
                current,
                radius,
                center: [0.0; 3],
                axis: [0.0, 0.0, 1.0],
                wire_radius: 0.0,
            },
            profile: TemporalProfile::Static,
        }
    }

    pub fn hertzian_dipole(moment: Vec3, position: Vec3) -> Self {
        Self {
            geometry: Geometry::HertzianDipole { moment, position },
            profile: TemporalProfile::Static,
        }
    }

    pub fn sampled(samples: SampledCurrent) -> Self {
        Self {
            geometry: Geometry::Sampled(Arc::new(samples)),
            profile: TemporalProfile::Static,
        }
    }

    pub fn with_profile(mut self, profile: TemporalProfile) -> Self {
        self.profile = profile;
        self
    }

    /// Sets the Gaussian wire radius of a loop; other geometries are unchanged.
    pub fn with_wire_radius(mut self, a: f64) -> Self {
        if let Geometry::CircularLoop { wire_radius, .. } = &mut self.geometry {
            *wire_radius = a;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        match &self.geometry {
            Geometry::CircularLoop { current, radius, center, axis, wire_radius } => {
                let mut problems = Vec::new();
                if !(current.is_finite() && *current != 0.0) {
                    problems.push(format!("loop current must be finite and nonzero, got {current}"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    problems.push(format!("loop radius must be finite and > 0, got {radius}"));
                }
                if !center.iter().all(|c| c.is_finite()) {
                    problems.push("loop center must be finite".into());
                }
                if normalized(axis).is_none() {
                    problems.push(format!("loop axis must be a finite nonzero vector, got {axis:?}"));
                }
                if !(wire_radius.is_finite() && *wire_radius >= 0.0) {
                    problems.push(format!("wire_radius must be finite and >= 0, got {wire_radius}"));
                }
                if problems.is_empty() {
                    Ok(())
                } else {
                    Err(Error::Validation(problems.join("; ")))
                }
            }
            Geometry::HertzianDipole { moment, position } => {
                if moment.iter().chain(position).all(|c| c.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::Validation("dipole moment and position must be finite".into()))
                }
            }
            Geometry::Sampled(_) => Ok(()),
        }
    }

    /// A characteristic size (m) used for default cutoffs.
    pub fn length_scale(&self) -> f64 {
        match &self.geometry {
            Geometry::CircularLoop { radius, .. } => *radius,
            Geometry::HertzianDipole { .. } => 1.0,
            Geometry::Sampled(s) => {
                let n = *s.shape.iter().max().unwrap_or(&2) as f64;
                0.5 * s.spacing * n
            }
        }
    }

    /// The same source with its current multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let geometry = match &self.geometry {
            Geometry::CircularLoop { current, radius, center, axis, wire_radius } => {
                Geometry::CircularLoop {
                    current: current * alpha,
                    radius: *radius,
                    center: *center,
                    axis: *axis,
                    wire_radius: *wire_radius,
                }
            }
            Geometry::HertzianDipole { moment, position } => Geometry::HertzianDipole {
                moment: scale(moment, alpha),
                position: *position,
            },
            Geometry::Sampled(s) => Geometry::Sampled(Arc::new(s.scaled(alpha))),
        };
        Self { geometry, profile: self.profile }
    }

    pub fn describe(&self) -> String {
        let geometry = match &self.geometry {
            Geometry::CircularLoop { current, radius, wire_radius, .. } => {
                format!("circular_loop(I={current} A, R={radius} m, wire_radius={wire_radius} m)")
            }
            Geometry::HertzianDipole { moment, position } => {
                format!("hertzian_dipole(moment={moment:?} A m, position={position:?} m)")
            }
            Geometry::Sampled(s) => format!(
                "sampled_current({:?} samples, spacing={} m, {} nonzero)",
                s.shape,
                s.spacing,
                s.support.len()
            ),
        };
        format!("{geometry}, profile={:?}", self.profile)
    }
}

/// Evaluation rule for the spectral current `j(k)` (A m) of a source.
#[derive(Debug, Clone)]
pub struct SpectralCurrent {
    geometry: Geometry,
    frame: Option<LoopFrame>,
    transverse: bool,
}

#[derive(Debug, Clone, Copy)]
struct LoopFrame {
    axis: Vec3,
}

/// Fourier transform of the spatial part of `source`.
pub fn spectral_transform(source: &CurrentSource) -> Result<SpectralCurrent> {
    source.validate()?;
    let (frame, transverse) = match &source.geometry {
        Geometry::CircularLoop { axis, .. } => (
            Some(LoopFrame {
                axis: normalized(axis).expect("validated"),
            }),
            true,
        ),
        _ => (None, false),
    };
    Ok(SpectralCurrent {
        geometry: source.geometry.clone(),
        frame,
        transverse,
    })
}

impl SpectralCurrent {
    /// Whether `k . j(k) = 0` holds for every `k != 0`.
    pub fn is_transverse(&self) -> bool {
        self.transverse
    }

    /// The transverse part `j_perp(k)`.
    pub fn transverse(&self) -> SpectralCurrent {
        SpectralCurrent { transverse: true, ..self.clone() }
    }

    /// `j(k)` (or `j_perp(k)` for a transverse rule). `k = 0` yields zero for
    /// a transverse rule, since the projector is undefined there.
    pub fn eval(&self, k: &Vec3) -> Result<CVec3> {
        let raw = self.eval_raw(k)?;
        match &self.geometry {
            Geometry::CircularLoop { .. } => Ok(raw),
            _ if self.transverse => {
                if *k == [0.0; 3] {
                    Ok(CZERO3)
                } else {
                    transverse_project(&raw, k)
                }
            }
            _ => Ok(raw),
        }
    }

    fn eval_raw(&self, k: &Vec3) -> Result<CVec3> {
        match &self.geometry {
            Geometry::CircularLoop { current, radius, center, wire_radius, .. } => {
                let axis = self.frame.expect("loop frame").axis;
                let k_par = dot(k, &axis);
                let k_perp = sub(k, &scale(&axis, k_par));
                let k_rho = norm(&k_perp);
                if k_rho == 0.0 {
                    return Ok(CZERO3);
                }
                let e_phi = scale(&cross(&axis, &k_perp), 1.0 / k_rho);
                let k2 = dot(k, k);
                let amplitude = current * radius * INV_TWO_PI_3_2 * 2.0 * PI
                    * bessel_j1(k_rho * radius)
                    * (-0.5 * k2 * wire_radius * wire_radius).exp();
                // -i exp(-i k.c)
                let phase = Complex64::new(0.0, -dot(k, center)).exp() * Complex64::new(0.0, -1.0);
                Ok(real_times(&e_phi, phase * amplitude))
            }
            Geometry::HertzianDipole { moment, position } => {
                let phase = Complex64::new(0.0, -dot(k, position)).exp() * INV_TWO_PI_3_2;
                Ok(real_times(moment, phase))
            }
            Geometry::Sampled(s) => {
                let kn = norm(k);
                if kn * s.spacing > PI {
                    return Err(Error::Resolution(format!(
                        "|k| = {kn:e} rad/m exceeds the sampling limit pi/spacing = {:e} rad/m",
                        PI / s.spacing
                    )));
                }
                let cell = s.spacing.powi(3) * INV_TWO_PI_3_2;
                let mut acc = CZERO3;
                for (x, v) in &s.support {
                    let ph = Complex64::new(0.0, -dot(k, x)).exp();
                    for c in 0..3 {
                        acc[c] += ph * v[c];
                    }
                }
                Ok(acc.map(|z| z * cell))
            }
        }
    }
}

/// `(1 - khat khat) . j`.
pub fn transverse_project(j: &CVec3, k: &Vec3) -> Result<CVec3> {
    let khat = normalized(k)
        .ok_or_else(|| Error::Validation("transverse projector is undefined at k = 0".into()))?;
    let along = j[0] * khat[0] + j[1] * khat[1] + j[2] * khat[2];
    Ok([
        j[0] - along * khat[0],
        j[1] - along * khat[1],
        j[2] - along * khat[2],
    ])
}

/// `(exp(x s) - 1) / x`, accurate for small `|x s|`.
fn exp_ratio(x: Complex64, s: f64) -> Complex64 {
    let xs = x * s;
    if xs.norm() < 1e-3 {
        s * (1.0 + xs / 2.0 + xs * xs / 6.0 + xs * xs * xs / 24.0)
    } else {
        (xs.exp() - 1.0) / x
    }
}

/// `\int_{-inf}^t dt' exp(i c k t') exp(eps t') f(t')`, the time factor of the
/// photon amplitude. `k` in rad/m, `eps` in 1/s.
///
/// Every profile has a closed form. Gaussian pulses use the `eps -> 0` limit;
/// static and truncated harmonic profiles keep `eps` exactly. Gaussian
/// partial integrals go through the Faddeeva function `w(z)`.
pub fn temporal_spectrum(profile: &TemporalProfile, k: f64, t: f64, eps: f64) -> Result<Complex64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Validation(format!("temporal spectrum needs k > 0, got {k}")));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::Validation(format!("eps must be finite and >= 0, got {eps}")));
    }
    if !t.is_finite() {
        return Err(Error::Validation(format!("time must be finite, got {t}")));
    }
    let ck = crate::constants::C_LIGHT * k;
    match *profile {
        TemporalProfile::Static => {
            let alpha = Complex64::new(eps, ck);
            Ok((alpha * t).exp() / alpha)
        }
        TemporalProfile::GaussianPulse { t0, sigma } => gaussian_spectrum(ck, t, t0, sigma),
        TemporalProfile::TruncatedHarmonic { omega, t_on, ramp_sigma } => {
            if eps == 0.0 && (ck - omega).abs() <= 1e-12 * omega {
                return Err(Error::Resonance { omega });
            }
            harmonic_spectrum(ck, eps, t, omega, t_on, ramp_sigma)
        }
    }
}

/// Full-time Gaussian transform `sigma sqrt(2 pi) exp(i w t0) exp(-w^2 sigma^2 / 2)`.
pub fn gaussian_spectrum_asymptotic(ck: f64, t0: f64, sigma: f64) -> Complex64 {
    let b = ck * sigma;
    Complex64::new(0.0, ck * t0).exp() * (sigma * (2.0 * PI).sqrt() * (-0.5 * b * b).exp())
}

/// `\int_{-inf}^{s_end} exp(i b s - s^2 / 2) ds` through the Faddeeva function.
///
/// Valid for real `b`, or for complex `b` with `Im b <= 0` when `s_end <= 0`;
/// both keep the Faddeeva argument in the closed upper half plane.
fn gaussian_partial(b: Complex64, s_end: f64) -> Complex64 {
    let root_half_pi = (0.5 * PI).sqrt();
    let i = Complex64::new(0.0, 1.0);
    if s_end <= 0.0 {
        let z = (-b - i * s_end) / std::f64::consts::SQRT_2;
        root_half_pi * (i * b * s_end - 0.5 * s_end * s_end).exp() * z.w()
    } else {
        // complement of the upper tail, b real
        let full = (2.0 * PI).sqrt() * (-0.5 * b * b).exp();
        let z = (b + i * s_end) / std::f64::consts::SQRT_2;
        full - root_half_pi * (i * b * s_end - 0.5 * s_end * s_end).exp() * z.w()
    }
}

fn gaussian_spectrum(ck: f64, t: f64, t0: f64, sigma: f64) -> Result<Complex64> {
    let s_end = (t - t0) / sigma;
    let b = Complex64::new(ck * sigma, 0.0);
    Ok(Complex64::new(0.0, ck * t0).exp() * gaussian_partial(b, s_end) * sigma)
}

fn harmonic_spectrum(
    ck: f64,
    eps: f64,
    t: f64,
    omega: f64,
    t_on: f64,
    ramp: f64,
) -> Result<Complex64> {
    let alpha = Complex64::new(eps, ck);
    let s_end = t - t_on;
    // ramp, s < 0: cos(w s) exp(alpha s) = (exp((alpha + i w) s) + exp((alpha - i w) s)) / 2
    let u_end = s_end.min(0.0) / ramp;
    let i = Complex64::new(0.0, 1.0);
    let ramp_part = 0.5
        * ramp
        * (gaussian_partial(-i * (alpha + i * omega) * ramp, u_end)
            + gaussian_partial(-i * (alpha - i * omega) * ramp, u_end));
    // steady part, 0 <= s <= s_end
    let steady = if s_end > 0.0 {
        let up = alpha + Complex64::new(0.0, omega);
        let down = alpha - Complex64::new(0.0, omega);
        0.5 * (exp_ratio(up, s_end) + exp_ratio(down, s_end))
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok((alpha * t_on).exp() * (ramp_part + steady))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::C_LIGHT;
    use crate::vector::{cnorm, im, re};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn loop_closed_form_at_first_maximum() {
        let s = spectral_transform(&CurrentSource::circular_loop(1.0, 0.1)).unwrap();
        // k in the loop plane along x: kR sin(theta) = 1.8412
        let k = [18.412, 0.0, 0.0];
        let j = s.eval(&k).unwrap();
        // |j| = (I R / sqrt(2 pi)) J1(1.8412), frozen from a 40-digit evaluation
        assert!((cnorm(&j) - 0.023_213_063_943_966_69).abs() < 1e-13);
        // direction e_phi = z x khat = +y, with factor -i
        assert!(re(&j).iter().all(|v| v.abs() < 1e-18));
        assert!((im(&j)[1] + 0.023_213_063_943_966_69).abs() < 1e-13);
    }

    #[test]
    fn loop_vanishes_on_axis() {
        let s = spectral_transform(&CurrentSource::circular_loop(1.0, 0.1)).unwrap();
        assert_eq!(s.eval(&[0.0, 0.0, 37.0]).unwrap(), CZERO3);
    }

    #[test]
    fn dipole_at_origin_is_constant() {
        let s = spectral_transform(&CurrentSource::hertzian_dipole([0.0, 0.0, 1.0], [0.0; 3])).unwrap();
        for k in [[1.0, 2.0, 3.0], [-40.0, 0.1, 0.0]] {
            let j = s.eval(&k).unwrap();
            assert_eq!(j[0], c(0.0, 0.0));
            assert!((j[2] - c((2.0 * PI).powf(-1.5), 0.0)).norm() < 1e-17);
        }
    }

    #[test]
    fn projector_examples() {
        let z = c(0.0, 0.0);
        let p = transverse_project(&[z, z, c(2.0, 1.0)], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p, [z, z, z]);
        let p = transverse_project(&[c(2.0, 1.0), z, z], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p, [c(2.0, 1.0), z, z]);
        let one = c(1.0, 0.0);
        let p = transverse_project(&[one, one, z], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p, [z, one, z]);
        assert!(matches!(transverse_project(&[one, one, z], &[0.0; 3]), Err(Error::Validation(_))));
    }

    #[test]
    fn sampled_current_rejects_unresolved_k() {
        let samples = sampled_loop(1.0, 0.1, 16, 0.15).unwrap();
        let s = spectral_transform(&CurrentSource::sampled(samples.clone())).unwrap();
        let limit = PI / samples.spacing();
        assert!(s.eval(&[0.9 * limit, 0.0, 0.0]).is_ok());
        assert!(matches!(s.eval(&[1.1 * limit, 0.0, 0.0]), Err(Error::Resolution(_))));
    }

    #[test]
    fn sampled_current_validation() {
        assert!(SampledCurrent::new([0.0; 3], 0.1, [1, 2, 2], vec![[0.0; 3]; 4]).is_err());
        assert!(SampledCurrent::new([0.0; 3], 0.1, [2, 2, 2], vec![[0.0; 3]; 7]).is_err());
        let mut v = vec![[0.0; 3]; 8];
        v[3][1] = f64::NAN;
        assert!(SampledCurrent::new([0.0; 3], 0.1, [2, 2, 2], v).is_err());
    }

    #[test]
    fn loop_validation() {
        assert!(CurrentSource::circular_loop(0.0, 0.1).validate().is_err());
        assert!(CurrentSource::circular_loop(1.0, -1.0).validate().is_err());
        assert!(CurrentSource::circular_loop(-2.0, 0.1).validate().is_ok());
    }

    #[test]
    fn static_spectrum_closed_form() {
        let v = temporal_spectrum(&TemporalProfile::Static, 1.0, 0.0, 0.0).unwrap();
        assert!((v - c(0.0, -1.0 / C_LIGHT)).norm() < 1e-15 / C_LIGHT);
        // rotation with t
        let t = 3.3e-9;
        let v = temporal_spectrum(&TemporalProfile::Static, 2.0, t, 0.0).unwrap();
        let want = c(0.0, 2.0 * C_LIGHT * t).exp() / c(0.0, 2.0 * C_LIGHT);
        assert!((v - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn spectrum_rejects_bad_inputs() {
        assert!(temporal_spectrum(&TemporalProfile::Static, 0.0, 0.0, 0.0).is_err());
        assert!(temporal_spectrum(&TemporalProfile::Static, 1.0, 0.0, -1.0).is_err());
        let omega = 2.0 * C_LIGHT;
        let h = TemporalProfile::TruncatedHarmonic { omega, t_on: 0.0, ramp_sigma: 1e-9 };
        assert!(matches!(temporal_spectrum(&h, 2.0, 1e-8, 0.0), Err(Error::Resonance { .. })));
        assert!(temporal_spectrum(&h, 2.0, 1e-8, 1e3).is_ok());
    }

    #[test]
    fn gaussian_approaches_its_asymptote() {
        let sigma = 1e-9;
        let p = TemporalProfile::GaussianPulse { t0: 2e-9, sigma };
        for k in [0.1, 2.0, 30.0] {
            let late = temporal_spectrum(&p, k, 2e-9 + 12.0 * sigma, 0.0).unwrap();
            let limit = gaussian_spectrum_asymptotic(C_LIGHT * k, 2e-9, sigma);
            assert!((late - limit).norm() <= 1e-15 * sigma);
        }
    }

    #[test]
    fn gaussian_partial_known_values() {
        // b = 0: sqrt(pi/2) erfc(-S / sqrt 2), reference values from scipy.special.erfc
        let z = Complex64::new(0.0, 0.0);
        assert!((gaussian_partial(z, 0.0).re - (0.5 * PI).sqrt()).abs() < 1e-15);
        assert!((gaussian_partial(z, 1.0).re - 2.1089385292076486).abs() < 1e-14);
        assert!((gaussian_partial(z, -1.0).re - 0.39768974542335145).abs() < 1e-14);
    }

    #[test]
    fn very_fast_oscillation_is_finite() {
        let sigma = 3.3e-7;
        let p = TemporalProfile::GaussianPulse { t0: 0.0, sigma };
        let v = temporal_spectrum(&p, 200.0, 0.0, 0.0).unwrap();
        // near the peak the integral is dominated by exp(-s^2/2) / (i b)
        let b = C_LIGHT * 200.0 * sigma;
        assert!((v.norm() * b / sigma - 1.0).abs() < 1e-6, "{v}");
    }

    /// Composite Simpson rule, written out here as an independent oracle.
    fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(a + i as f64 * h) * w;
        }
        acc * (h / 3.0)
    }

    #[test]
    fn gaussian_asymptote_matches_brute_force() {
        let sigma = 2e-10;
        let t0 = 1e-9;
        let p = TemporalProfile::GaussianPulse { t0, sigma };
        for k in [0.5, 3.0, 15.0] {
            let ck = C_LIGHT * k;
            let brute = simpson(
                |t| c(0.0, ck * t).exp() * p.value(t),
                t0 - 14.0 * sigma,
                t0 + 14.0 * sigma,
                20_000,
            );
            let late = temporal_spectrum(&p, k, t0 + 20.0 * sigma, 0.0).unwrap();
            assert!((late - brute).norm() <= 1e-9 * sigma, "k = {k}: {late} vs {brute}");
            // mid-pulse goes through the numerical branch
            let mid = temporal_spectrum(&p, k, t0 + 0.3 * sigma, 0.0).unwrap();
            let brute_mid = simpson(
                |t| c(0.0, ck * t).exp() * p.value(t),
                t0 - 14.0 * sigma,
                t0 + 0.3 * sigma,
                20_000,
            );
            assert!((mid - brute_mid).norm() <= 1e-9 * sigma, "k = {k}: {mid} vs {brute_mid}");
        }
    }

    #[test]
    fn truncated_harmonic_matches_brute_force() {
        let omega = 2.0 * PI * 1e8;
        let ramp = 4e-9;
        let p = TemporalProfile::TruncatedHarmonic { omega, t_on: 0.0, ramp_sigma: ramp };
        let t = 40.0 * 2.0 * PI / omega;
        for (factor, eps) in [(10.0, 0.0), (0.3, 0.0), (1.0, 1e7)] {
            let k = factor * omega / C_LIGHT;
            let alpha = c(eps, C_LIGHT * k);
            let got = temporal_spectrum(&p, k, t, eps).unwrap();
            let brute = simpson(|s| (alpha * s).exp() * p.value(s), -14.0 * ramp, t, 400_000);
            assert!((got - brute).norm() <= 1e-7 * brute.norm().max(1.0 / omega), "{factor}: {got} vs {brute}");
        }
        // far off resonance the magnitude stays below 2 / (ck - omega) plus the ramp
        let k = 10.0 * omega / C_LIGHT;
        let bound = 2.0 / (C_LIGHT * k - omega) + ramp * (2.0 * PI).sqrt();
        assert!(temporal_spectrum(&p, k, t, 0.0).unwrap().norm() <= bound);
    }

    #[test]
    fn near_resonance_is_continuous() {
        let omega = 1e9;
        let p = TemporalProfile::TruncatedHarmonic { omega, t_on: 0.0, ramp_sigma: 1e-9 };
        let k = omega / C_LIGHT;
        let a = temporal_spectrum(&p, k * (1.0 + 1e-9), 5e-8, 0.0).unwrap();
        let b = temporal_spectrum(&p, k * (1.0 - 1e-9), 5e-8, 0.0).unwrap();
        assert!((a - b).norm() <= 1e-6 * a.norm());
    }
}
