//! Coherent-state amplitudes, photon densities, energies and phases.
//!
//! A separable current `j(x) f(t)` produces the amplitude
//! `xi(k, t) = i sqrt(mu0 c / (2 hbar k)) T(k, t) j_perp(k)`, where `T` is the
//! [`temporal_spectrum`]. For a stationary current this reduces to
//! `xi = sqrt(mu0 / (2 hbar c k)) exp(i c k t) j_perp(k) / k`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{PhysicalConstants, C_LIGHT, HBAR, MU0};
use crate::current_model::{spectral_transform, temporal_spectrum, CurrentSource, TemporalProfile};
use crate::error::{Error, Result};
use crate::quadrature::adaptive::{integrate_real, AdaptiveOptions};
use crate::quadrature::{bessel_j1, integrate, Cutoffs, GridMetadata, KGrid, Node};
use crate::vector::{cdotc, cnorm_sqr, cscale, CVec3};

/// `xi(k, t)` on every node of a grid.
#[derive(Debug, Clone)]
pub struct PhotonAmplitude {
    grid: Arc<KGrid>,
    source: Arc<CurrentSource>,
    time: f64,
    eps: f64,
    values: Vec<CVec3>,
}

impl PhotonAmplitude {
    /// An amplitude with explicit node values, e.g. `xi = 0` for tests.
    pub fn from_values(
        grid: Arc<KGrid>,
        source: Arc<CurrentSource>,
        time: f64,
        values: Vec<CVec3>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "expected {} amplitude values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, source, time, eps: 0.0, values })
    }

    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn source(&self) -> &Arc<CurrentSource> {
        &self.source
    }

    /// Time stamp (s).
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Convergence parameter used in the time integral (1/s).
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Node values in grid index order (m^(3/2)).
    pub fn values(&self) -> &[CVec3] {
        &self.values
    }

    pub fn at(&self, index: usize) -> CVec3 {
        self.values[index]
    }
}

fn static_prefactor(k: f64) -> f64 {
    (MU0 / (2.0 * HBAR * C_LIGHT * k)).sqrt() / k
}

/// Stationary amplitude at `t = 0`.
pub fn amplitude_static(source: &CurrentSource, grid: &Arc<KGrid>) -> Result<PhotonAmplitude> {
    if !source.profile.is_static() {
        return Err(Error::Validation(
            "amplitude_static needs a static profile; use amplitude_time_dependent".into(),
        ));
    }
    let spectral = spectral_transform(source)?.transverse();
    let values = grid
        .map_nodes(|node| {
            spectral
                .eval(&node.kvec())
                .map(|j| cscale(&j, static_prefactor(node.k).into()))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(PhotonAmplitude {
        grid: grid.clone(),
        source: Arc::new(source.clone()),
        time: 0.0,
        eps: 0.0,
        values,
    })
}

/// Amplitude at time `t` (s) with convergence parameter `eps` (1/s).
pub fn amplitude_time_dependent(
    source: &CurrentSource,
    t: f64,
    grid: &Arc<KGrid>,
    eps: f64,
) -> Result<PhotonAmplitude> {
    let spectral = spectral_transform(source)?.transverse();
    let factors: Vec<Complex64> = grid
        .radial_nodes()
        .par_iter()
        .map(|&k| {
            temporal_spectrum(&source.profile, k, t, eps)
                .map(|s| Complex64::new(0.0, (MU0 * C_LIGHT / (2.0 * HBAR * k)).sqrt()) * s)
        })
        .collect::<Result<_>>()?;
    let values = grid
        .map_nodes(|node| {
            let f = factors[grid.radial_index(node.index)];
            spectral.eval(&node.kvec()).map(|j| cscale(&j, f))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(PhotonAmplitude {
        grid: grid.clone(),
        source: Arc::new(source.clone()),
        time: t,
        eps,
        values,
    })
}

/// `xi(k, t)` at a single wave vector `k` (rad/m).
pub fn amplitude_at(source: &CurrentSource, k: &[f64; 3], t: f64, eps: f64) -> Result<CVec3> {
    let spectral = spectral_transform(source)?.transverse();
    let kn = crate::vector::norm(k);
    let j = spectral.eval(k)?;
    let s = temporal_spectrum(&source.profile, kn, t, eps)?;
    Ok(cscale(&j, Complex64::new(0.0, (MU0 * C_LIGHT / (2.0 * HBAR * kn)).sqrt()) * s))
}

/// Photon density `n(k) = |xi(k, t)|^2` (m^3) per node.
pub fn photon_density(xi: &PhotonAmplitude) -> Vec<f64> {
    xi.values.iter().map(cnorm_sqr).collect()
}

/// Closed-form thin-loop photon density (m^3) at wave number `k` and polar
/// angle `sin_theta` relative to the loop axis.
pub fn loop_photon_density(current: f64, radius: f64, k: f64, sin_theta: f64) -> f64 {
    let j1 = bessel_j1(k * radius * sin_theta);
    MU0 * current * current * radius * radius * j1 * j1
        / (4.0 * std::f64::consts::PI * HBAR * C_LIGHT * k.powi(3))
}

/// Closed-form photon number `mu0 I^2 R^2 / (2 hbar c)` of a thin loop.
pub fn loop_photon_number(current: f64, radius: f64) -> f64 {
    MU0 * current * current * radius * radius / (2.0 * HBAR * C_LIGHT)
}

/// A value with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub estimated_error: f64,
}

/// Photon number and energies of one coherent state.
///
/// The energies of a thin loop grow logarithmically with `k_max`; they are
/// meaningful only together with `cutoffs`.
#[derive(Debug, Clone, Serialize)]
pub struct StateSummary {
    #[serde(rename = "N")]
    pub n: Estimate,
    /// Field energy `\int d^3k hbar c k n(k)` (J).
    #[serde(rename = "H_gamma")]
    pub h_gamma: Estimate,
    /// Interaction energy (J).
    #[serde(rename = "V")]
    pub v: Estimate,
    /// `H_gamma + V` (J).
    #[serde(rename = "E")]
    pub e: Estimate,
    /// `d Phi / dt` (J), evaluated from `|j_perp|^2` independently of `xi`.
    pub phase_slope: Estimate,
    pub energies_cutoff_regulated: bool,
    pub stationary: bool,
    pub time: f64,
    pub eps: f64,
    pub cutoffs: Cutoffs,
    pub grid: GridMetadata,
    pub constants: PhysicalConstants,
}

/// Photon number, energies and phase slope for `xi` on its grid.
pub fn summarize(xi: &PhotonAmplitude) -> Result<StateSummary> {
    let grid = &*xi.grid;
    let source = &*xi.source;
    let spectral = spectral_transform(source)?.transverse();
    let stationary = source.profile.is_static();
    let f_t = source.profile.value(xi.time);
    let t = xi.time;

    let n = integrate(|node: &Node| cnorm_sqr(&xi.values[node.index]), grid)?;
    let h = integrate(
        |node: &Node| HBAR * C_LIGHT * node.k * cnorm_sqr(&xi.values[node.index]),
        grid,
    )?;
    // V = -\int sqrt(hbar mu0 c / 2k) 2 Re[exp(ickt) conj(xi) . j_perp] f(t)
    let v = integrate(
        |node: &Node| match spectral.eval(&node.kvec()) {
            Ok(j) => {
                let rot = Complex64::new(0.0, C_LIGHT * node.k * t).exp();
                let overlap = cdotc(&xi.values[node.index], &j) * rot;
                -(HBAR * MU0 * C_LIGHT / (2.0 * node.k)).sqrt() * 2.0 * overlap.re * f_t
            }
            Err(_) => f64::NAN,
        },
        grid,
    )?;
    let phase_slope = if stationary {
        static_phase_slope(source, grid)?
    } else {
        phase_rate(source, grid, t, xi.eps)?
    };
    let e_value = h.value + v.value;
    Ok(StateSummary {
        n: Estimate { value: n.value, estimated_error: n.estimated_error },
        h_gamma: Estimate { value: h.value, estimated_error: h.estimated_error },
        v: Estimate { value: v.value, estimated_error: v.estimated_error },
        e: Estimate {
            value: e_value,
            estimated_error: h.estimated_error + v.estimated_error,
        },
        phase_slope,
        energies_cutoff_regulated: true,
        stationary,
        time: t,
        eps: xi.eps,
        cutoffs: grid.cutoffs(),
        grid: grid.metadata(),
        constants: PhysicalConstants::CODATA_2018,
    })
}

/// `-\int d^3k mu0 |j_perp(k)|^2 / (2 k^2)` (J).
pub fn static_phase_slope(source: &CurrentSource, grid: &KGrid) -> Result<Estimate> {
    let spectral = spectral_transform(source)?.transverse();
    let r = integrate(
        |node: &Node| match spectral.eval(&node.kvec()) {
            Ok(j) => -MU0 * cnorm_sqr(&j) / (2.0 * node.k * node.k),
            Err(_) => f64::NAN,
        },
        grid,
    )?;
    Ok(Estimate { value: r.value, estimated_error: r.estimated_error })
}

/// Per-shell angular sums `S_i = \int dOmega k^2 w_k mu0 c |j_perp|^2 / (2k)`.
fn shell_weights(source: &CurrentSource, grid: &KGrid) -> Result<Vec<f64>> {
    let spectral = spectral_transform(source)?.transverse();
    let per_node = grid
        .map_nodes(|node| {
            spectral
                .eval(&node.kvec())
                .map(|j| node.weight * MU0 * C_LIGHT * cnorm_sqr(&j) / (2.0 * node.k))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let per_shell = grid.len() / grid.radial_nodes().len();
    Ok(per_node
        .chunks(per_shell)
        .map(crate::quadrature::pairwise_sum)
        .collect())
}

fn rate_from_shells(
    profile: &TemporalProfile,
    grid: &KGrid,
    shells: &[f64],
    t: f64,
    eps: f64,
) -> Result<f64> {
    let f = profile.value(t);
    if f == 0.0 {
        return Ok(0.0);
    }
    let terms = grid
        .radial_nodes()
        .par_iter()
        .zip(shells)
        .map(|(&k, &s)| {
            let spectrum = temporal_spectrum(profile, k, t, eps)?;
            let im = (Complex64::new(0.0, -C_LIGHT * k * t).exp() * spectrum).im;
            Ok(s * im)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((eps * t).exp() * f * crate::quadrature::pairwise_sum(&terms))
}

/// Instantaneous `d Phi / dt` (J) of a possibly time-dependent source.
pub fn phase_rate(source: &CurrentSource, grid: &KGrid, t: f64, eps: f64) -> Result<Estimate> {
    if source.profile.is_static() {
        return static_phase_slope(source, grid);
    }
    let shells = shell_weights(source, grid)?;
    let value = rate_from_shells(&source.profile, grid, &shells, t, eps)?;
    Ok(Estimate { value, estimated_error: value.abs() * 1e-10 })
}

/// Accumulated phase `Phi(t)` (J s) with its slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseResult {
    /// `Phi(t)` in joule-seconds.
    pub phi: f64,
    /// `Phi(t) / hbar` in radians (may be astronomically large).
    pub radians: f64,
    /// `d Phi / dt` at `t` (J).
    pub slope: f64,
    pub t_start: f64,
    pub t: f64,
    pub estimated_error: f64,
}

/// `Phi(t)`. Static sources give `E t`; otherwise the rate is integrated from
/// `t_start` (defaulting to where the drive becomes negligible).
pub fn phase(
    source: &CurrentSource,
    t: f64,
    grid: &KGrid,
    eps: f64,
    t_start: Option<f64>,
) -> Result<PhaseResult> {
    if source.profile.is_static() {
        let slope = static_phase_slope(source, grid)?;
        let phi = slope.value * t;
        return Ok(PhaseResult {
            phi,
            radians: phi / HBAR,
            slope: slope.value,
            t_start: 0.0,
            t,
            estimated_error: slope.estimated_error * t.abs(),
        });
    }
    let t_start = t_start
        .or_else(|| source.profile.default_start())
        .expect("time-dependent profiles have a start");
    let shells = shell_weights(source, grid)?;
    let profile = source.profile;
    let rate = |s: f64| rate_from_shells(&profile, grid, &shells, s, eps);
    let slope = rate(t)?;
    if t <= t_start {
        return Ok(PhaseResult { phi: 0.0, radians: 0.0, slope, t_start, t, estimated_error: 0.0 });
    }
    // the adaptive integrator takes an infallible integrand
    let failure = std::sync::Mutex::new(None);
    let (phi, err) = integrate_real(
        |s| match rate(s) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().expect("phase error slot").get_or_insert(e);
                0.0
            }
        },
        t_start,
        t,
        AdaptiveOptions {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_intervals: 2000,
            initial_intervals: 8,
        },
    )?;
    if let Some(e) = failure.into_inner().expect("phase error slot") {
        return Err(e);
    }
    Ok(PhaseResult { phi, radians: phi / HBAR, slope, t_start, t, estimated_error: err })
}
