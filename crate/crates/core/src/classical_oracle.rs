//! Real-space classical reference solutions: no k-space, no amplitudes.
//!
//! Loops are treated as ideal thin wires here regardless of `wire_radius`.
//! Outside a Gaussian-smeared wire the two fields differ only by terms of
//! order `exp(-d^2 / (2 a^2))` at distance `d` from the wire.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{C_LIGHT, MU0};
use crate::current_model::{CurrentSource, Geometry, TemporalProfile};
use crate::error::{Error, Result};
use crate::vector::{add, cross, dot, norm, normalized, orthonormal_frame, scale, sub, Vec3, ZERO3};

const START_PANELS: usize = 64;
const MAX_PANELS: usize = 1 << 20;
const SELF_CONSISTENCY: f64 = 1e-8;
/// Closest allowed approach to a thin wire, in loop radii.
pub const PROXIMITY_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    ClosedForm,
    LineQuadrature,
    RetardedQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    /// Tesla for magnetic fields, V s/m for vector potentials.
    pub value: Vec3,
    pub method: OracleMethod,
    pub estimated_error: f64,
}

/// On-axis field `mu0 I R^2 / (2 (R^2 + z^2)^(3/2))` (T) of a loop centred at
/// `z = 0`, directed along the axis.
pub fn loop_axis_field(current: f64, radius: f64, z: f64) -> f64 {
    let s = radius * radius + z * z;
    MU0 * current * radius * radius / (2.0 * s * s.sqrt())
}

struct LoopGeometry {
    current: f64,
    radius: f64,
    center: Vec3,
    axis: Vec3,
    u: Vec3,
    v: Vec3,
}

impl LoopGeometry {
    fn from(source: &CurrentSource) -> Option<Self> {
        match source.geometry {
            Geometry::CircularLoop { current, radius, center, axis, .. } => {
                let axis = normalized(&axis)?;
                let (u, v) = orthonormal_frame(&axis);
                Some(Self { current, radius, center, axis, u, v })
            }
            _ => None,
        }
    }

    fn point(&self, phi: f64) -> (Vec3, Vec3) {
        let (s, c) = phi.sin_cos();
        let x = add(&self.center, &add(&scale(&self.u, self.radius * c), &scale(&self.v, self.radius * s)));
        let tangent = add(&scale(&self.u, -self.radius * s), &scale(&self.v, self.radius * c));
        (x, tangent)
    }

    fn check_proximity(&self, x: &Vec3) -> Result<()> {
        let d = sub(x, &self.center);
        let z = dot(&d, &self.axis);
        let rho = norm(&sub(&d, &scale(&self.axis, z)));
        let distance = (rho - self.radius).hypot(z);
        let minimum = PROXIMITY_LIMIT * self.radius;
        if distance < minimum {
            Err(Error::Proximity { distance, minimum })
        } else {
            Ok(())
        }
    }
}

/// Periodic trapezoid rule over `[0, 2 pi)` with panel doubling until two
/// successive results agree to `SELF_CONSISTENCY`, or to within rounding of
/// `\int |integrand|` when the result vanishes by symmetry.
fn periodic_line_integral<F>(integrand: F) -> Result<(Vec3, f64)>
where
    F: Fn(f64) -> Vec3,
{
    let rule = |n: usize, offset: f64| {
        let h = 2.0 * PI / n as f64;
        let mut acc = ZERO3;
        let mut abs = 0.0;
        for i in 0..n {
            let v = integrand(offset + i as f64 * h);
            abs += norm(&v);
            acc = add(&acc, &v);
        }
        (acc, abs)
    };
    let mut n = START_PANELS;
    let (mut sum, mut abs) = rule(n, 0.0);
    let mut value = scale(&sum, 2.0 * PI / n as f64);
    while n < MAX_PANELS {
        // the doubled rule reuses the previous nodes and adds the midpoints
        let (mid, mid_abs) = rule(n, PI / n as f64);
        sum = add(&sum, &mid);
        abs += mid_abs;
        n *= 2;
        let h = 2.0 * PI / n as f64;
        let next = scale(&sum, h);
        let diff = norm(&sub(&next, &value));
        value = next;
        let floor = 1e3 * f64::EPSILON * abs * h;
        if diff <= SELF_CONSISTENCY * norm(&value) || diff <= floor {
            return Ok((value, diff.max(floor)));
        }
    }
    Err(Error::NoConvergence(format!(
        "line quadrature did not reach {SELF_CONSISTENCY:e} relative within {MAX_PANELS} panels"
    )))
}

/// Magnetostatic field (T) at `x` by real-space quadrature.
pub fn biot_savart(source: &CurrentSource, x: &Vec3) -> Result<OracleResult> {
    if !source.profile.is_static() {
        return Err(Error::Validation("biot_savart needs a static source".into()));
    }
    source.validate()?;
    let k = MU0 / (4.0 * PI);
    match &source.geometry {
        Geometry::CircularLoop { .. } => {
            let lp = LoopGeometry::from(source).expect("loop");
            lp.check_proximity(x)?;
            let (value, err) = periodic_line_integral(|phi| {
                let (xp, dl) = lp.point(phi);
                let r = sub(x, &xp);
                let d = norm(&r);
                scale(&cross(&dl, &r), k * lp.current / (d * d * d))
            })?;
            Ok(OracleResult { value, method: OracleMethod::LineQuadrature, estimated_error: err })
        }
        Geometry::HertzianDipole { moment, position } => {
            let r = sub(x, position);
            let d = norm(&r);
            if d == 0.0 {
                return Err(Error::Proximity { distance: 0.0, minimum: f64::MIN_POSITIVE });
            }
            let value = scale(&cross(moment, &r), k / (d * d * d));
            Ok(OracleResult { value, method: OracleMethod::ClosedForm, estimated_error: 0.0 })
        }
        Geometry::Sampled(s) => {
            let cell = s.spacing().powi(3);
            let mut value = ZERO3;
            for (xp, j) in s.support() {
                let r = sub(x, xp);
                let d = norm(&r);
                if d < 0.5 * s.spacing() {
                    return Err(Error::Proximity { distance: d, minimum: 0.5 * s.spacing() });
                }
                value = add(&value, &scale(&cross(j, &r), k * cell / (d * d * d)));
            }
            Ok(OracleResult { value, method: OracleMethod::LineQuadrature, estimated_error: 0.0 })
        }
    }
}

/// Retarded vector potential (V s/m) at `x` and time `t` (s):
/// `(mu0 / 4 pi) \int j(x') f(t - |x - x'| / c) / |x - x'| d^3x'`.
pub fn retarded_vector_potential(source: &CurrentSource, x: &Vec3, t: f64) -> Result<OracleResult> {
    source.validate()?;
    let profile: TemporalProfile = source.profile;
    let k = MU0 / (4.0 * PI);
    match &source.geometry {
        Geometry::CircularLoop { .. } => {
            let lp = LoopGeometry::from(source).expect("loop");
            lp.check_proximity(x)?;
            let (value, err) = periodic_line_integral(|phi| {
                let (xp, dl) = lp.point(phi);
                let d = norm(&sub(x, &xp));
                scale(&dl, k * lp.current * profile.value(t - d / C_LIGHT) / d)
            })?;
            Ok(OracleResult { value, method: OracleMethod::RetardedQuadrature, estimated_error: err })
        }
        Geometry::HertzianDipole { moment, position } => {
            let d = norm(&sub(x, position));
            if d == 0.0 {
                return Err(Error::Proximity { distance: 0.0, minimum: f64::MIN_POSITIVE });
            }
            let value = scale(moment, k * profile.value(t - d / C_LIGHT) / d);
            Ok(OracleResult { value, method: OracleMethod::ClosedForm, estimated_error: 0.0 })
        }
        Geometry::Sampled(s) => {
            let cell = s.spacing().powi(3);
            let mut value = ZERO3;
            for (xp, j) in s.support() {
                let d = norm(&sub(x, xp));
                if d < 0.5 * s.spacing() {
                    return Err(Error::Proximity { distance: d, minimum: 0.5 * s.spacing() });
                }
                value = add(&value, &scale(j, k * cell * profile.value(t - d / C_LIGHT) / d));
            }
            Ok(OracleResult { value, method: OracleMethod::RetardedQuadrature, estimated_error: 0.0 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn axis_closed_form_examples() {
        assert!(rel(loop_axis_field(1.0, 0.1, 0.0), MU0 / 0.2) < 1e-15);
        // 40-digit reference values
        assert!(rel(loop_axis_field(1.0, 0.1, 0.0), 6.2831853106e-6) < 1e-10);
        assert!(rel(loop_axis_field(1.0, 0.1, 0.1), 2.221_441_470_288_482e-6) < 1e-12);
        let z = 1e4;
        assert!(rel(loop_axis_field(1.0, 0.1, z), MU0 * 0.01 / (2.0 * z * z * z)) < 1e-9);
    }

    #[test]
    fn biot_savart_matches_axis_formula() {
        let src = CurrentSource::circular_loop(1.0, 0.1);
        for z in [0.0, 0.03, 0.1, -0.17, 0.4] {
            let b = biot_savart(&src, &[0.0, 0.0, z]).unwrap();
            assert!(rel(b.value[2], loop_axis_field(1.0, 0.1, z)) < 1e-8);
            assert!(b.value[0].abs() < 1e-12 * b.value[2].abs());
            assert!(b.estimated_error >= 0.0);
        }
    }

    #[test]
    fn field_flips_outside_the_loop() {
        let src = CurrentSource::circular_loop(1.0, 0.1);
        let inside = biot_savart(&src, &[0.0; 3]).unwrap().value[2];
        let outside = biot_savart(&src, &[0.15, 0.0, 0.0]).unwrap().value[2];
        assert!(inside > 0.0 && outside < 0.0);
    }

    #[test]
    fn linear_in_current() {
        let x = [0.05, 0.02, 0.03];
        let a = biot_savart(&CurrentSource::circular_loop(1.0, 0.1), &x).unwrap().value;
        let b = biot_savart(&CurrentSource::circular_loop(2.0, 0.1), &x).unwrap().value;
        for c in 0..3 {
            assert_eq!(b[c], 2.0 * a[c]);
        }
    }

    #[test]
    fn proximity_is_reported() {
        let src = CurrentSource::circular_loop(1.0, 0.1);
        let r = biot_savart(&src, &[0.1 + 1e-5, 0.0, 0.0]);
        assert!(matches!(r, Err(Error::Proximity { .. })));
    }

    #[test]
    fn tilted_loop_axis() {
        let mut src = CurrentSource::circular_loop(1.0, 0.1);
        let n = [1.0 / 3f64.sqrt(); 3];
        if let Geometry::CircularLoop { axis, center, .. } = &mut src.geometry {
            *axis = n;
            *center = [0.2, -0.1, 0.05];
        }
        let x = add(&[0.2, -0.1, 0.05], &scale(&n, 0.07));
        let b = biot_savart(&src, &x).unwrap().value;
        let along = dot(&b, &n);
        assert!(rel(along, loop_axis_field(1.0, 0.1, 0.07)) < 1e-8);
    }

    #[test]
    fn curl_of_static_potential_is_biot_savart() {
        let src = CurrentSource::circular_loop(1.0, 0.1);
        let x = [0.04, 0.03, 0.06];
        let h = 1e-4;
        let a = |p: Vec3| retarded_vector_potential(&src, &p, 0.0).unwrap().value;
        let d = |axis: usize, comp: usize| {
            let mut p = x;
            let mut m = x;
            p[axis] += h;
            m[axis] -= h;
            (a(p)[comp] - a(m)[comp]) / (2.0 * h)
        };
        let curl = [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)];
        let b = biot_savart(&src, &x).unwrap().value;
        assert!(norm(&sub(&curl, &b)) < 1e-6 * norm(&b));
    }

    #[test]
    fn retarded_potential_is_causal() {
        let sigma = 1e-10;
        let t0 = 0.0;
        let src = CurrentSource::circular_loop(1.0, 0.1)
            .with_profile(TemporalProfile::GaussianPulse { t0, sigma });
        let x = [0.3, 0.0, 0.2];
        let d_min = (0.2f64).hypot(0.2);
        let early = t0 + d_min / C_LIGHT - 7.0 * sigma;
        let peak = (0..200)
            .map(|i| {
                let t = t0 + i as f64 * 0.05 * sigma;
                norm(&retarded_vector_potential(&src, &x, t).unwrap().value)
            })
            .fold(0.0, f64::max);
        let a = norm(&retarded_vector_potential(&src, &x, early).unwrap().value);
        assert!(a <= 1e-10 * peak, "{a} vs {peak}");
    }
}
