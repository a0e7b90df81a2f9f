//! The invariant suite run by `photon-ledger validate`.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::classical_oracle::biot_savart;
use crate::coherent_state::{
    amplitude_static, amplitude_time_dependent, photon_density, summarize, PhotonAmplitude,
};
use crate::config::{FieldConfig, RunConfig};
use crate::constants::C_LIGHT;
use crate::current_model::{spectral_transform, transverse_project, CurrentSource, Geometry, TemporalProfile};
use crate::error::{Error, Result};
use crate::field_reconstruction::{reconstruct_fields, FieldSample};
use crate::quadrature::{build_kgrid, integrate, KGrid, KGridSpec, Node};
use crate::vector::{add, cnorm, dot, norm, normalized, rdot, scale, sub, CVec3, Vec3};

/// Outcome of one invariant check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The measured quantity compared against `threshold`.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Amplitude of `source` at time `t` on `grid`, static or not.
pub fn amplitude_for(source: &CurrentSource, grid: &Arc<KGrid>, t: f64, eps: f64) -> Result<PhotonAmplitude> {
    if source.profile.is_static() && t == 0.0 {
        amplitude_static(source, grid)
    } else {
        amplitude_time_dependent(source, t, grid, eps)
    }
}

/// Runs every check that applies to the configured source.
pub fn run_suite(config: &RunConfig) -> Result<ValidationReport> {
    let tol = &config.tolerances;
    let source = &config.source;
    let grid = Arc::new(build_kgrid(config.grid)?);
    let xi = amplitude_for(source, &grid, config.time, config.eps)?;
    let mut checks = vec![
        transversality(&xi, tol.transversality),
        hermiticity(source, &grid, tol.hermiticity)?,
        projector(tol.projector),
        linearity(source, &grid, &xi, config, tol.linearity)?,
        determinism(&xi)?,
        cutoff_monotonicity(source, &config.grid)?,
    ];
    if source.profile.is_static() {
        let s = summarize(&xi)?;
        let h = s.h_gamma.value;
        checks.push(Check::at_most(
            "virial_ratio",
            (s.v.value / h + 2.0).abs(),
            tol.virial,
            format!("V / H_gamma = {:.17e}", s.v.value / h),
        ));
        checks.push(Check::at_most(
            "energy_eigenvalue",
            (s.e.value / h + 1.0).abs(),
            tol.virial,
            format!("E / H_gamma = {:.17e}", s.e.value / h),
        ));
        checks.push(Check::at_most(
            "phase_slope",
            (s.phase_slope.value / s.e.value - 1.0).abs(),
            tol.phase_slope,
            format!("dPhi/dt = {:e} J, E = {:e} J", s.phase_slope.value, s.e.value),
        ));
    }
    if let TemporalProfile::GaussianPulse { t0, sigma } = source.profile {
        checks.push(causality(source, &grid, t0, sigma, config.eps, tol.causality)?);
    }
    if let Some(field) = &config.field {
        checks.extend(field_checks(config, field)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { passed, checks })
}

fn transversality(xi: &PhotonAmplitude, tol: f64) -> Check {
    let grid = xi.grid();
    let worst = (0..grid.len())
        .map(|i| {
            let v = xi.at(i);
            let m = cnorm(&v);
            if m == 0.0 {
                0.0
            } else {
                rdot(&grid.node(i).khat(), &v).norm() / m
            }
        })
        .fold(0.0, f64::max);
    Check::at_most("transversality", worst, tol, "max |khat . xi| / |xi| over nodes")
}

fn sample_nodes(grid: &KGrid, count: usize) -> impl Iterator<Item = Node> + '_ {
    let stride = (grid.len() / count).max(1);
    (0..grid.len()).step_by(stride).map(|i| grid.node(i))
}

fn hermiticity(source: &CurrentSource, grid: &KGrid, tol: f64) -> Result<Check> {
    let spectral = spectral_transform(source)?;
    let mut worst: f64 = 0.0;
    for node in sample_nodes(grid, 2000) {
        let k = node.kvec();
        let a = spectral.eval(&k)?;
        let b = spectral.eval(&scale(&k, -1.0))?;
        let m = cnorm(&a);
        if m > 0.0 {
            let d = (0..3).map(|c| (b[c] - a[c].conj()).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(d / m);
        }
    }
    Ok(Check::at_most("hermiticity", worst, tol, "max |j(-k) - conj j(k)| / |j(k)| over sampled nodes"))
}

fn projector(tol: f64) -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k: Vec3 = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
        let j: CVec3 = [0, 1, 2].map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let Some(khat) = normalized(&k) else { continue };
        let p = transverse_project(&j, &k).expect("k != 0");
        let pp = transverse_project(&p, &k).expect("k != 0");
        let m = cnorm(&j);
        let along = rdot(&khat, &p).norm() / m;
        let idem = (0..3).map(|c| (pp[c] - p[c]).norm_sqr()).sum::<f64>().sqrt() / m;
        worst = worst.max(along).max(idem);
    }
    Check::at_most("projector", worst, tol, "1000 random (j, k): max of |khat . P j| / |j| and |P P j - P j| / |j|")
}

fn linearity(
    source: &CurrentSource,
    grid: &Arc<KGrid>,
    xi: &PhotonAmplitude,
    config: &RunConfig,
    tol: f64,
) -> Result<Check> {
    let doubled = amplitude_for(&source.scaled(2.0), grid, config.time, config.eps)?;
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let a = xi.at(i);
        let m = cnorm(&a);
        if m > 0.0 {
            let b = doubled.at(i);
            let d = (0..3).map(|c| (b[c] - 2.0 * a[c]).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(d / (2.0 * m));
        }
    }
    Ok(Check::at_most("linearity", worst, tol, "max |xi[2j] - 2 xi[j]| / |2 xi[j]| over nodes"))
}

fn determinism(xi: &PhotonAmplitude) -> Result<Check> {
    let density = photon_density(xi);
    let grid = xi.grid().clone();
    let run = |threads: usize| -> Result<f64> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
        pool.install(|| integrate(|n: &Node| density[n.index], &grid).map(|r| r.value))
    };
    let reference = run(1)?;
    let mut mismatches = 0;
    for threads in [2, 3, 5] {
        if run(threads)?.to_bits() != reference.to_bits() {
            mismatches += 1;
        }
    }
    Ok(Check::at_most(
        "determinism",
        mismatches as f64,
        0.0,
        format!("N with 1, 2, 3 and 5 threads; reference {reference:e}"),
    ))
}

fn cutoff_monotonicity(source: &CurrentSource, spec: &KGridSpec) -> Result<Check> {
    let number = |k_max: f64| -> Result<f64> {
        let grid = Arc::new(build_kgrid(KGridSpec { k_max, ..*spec })?);
        let xi = amplitude_static(&CurrentSource { profile: TemporalProfile::Static, ..source.clone() }, &grid)?;
        Ok(integrate(|n: &Node| crate::vector::cnorm_sqr(&xi.at(n.index)), &grid)?.value)
    };
    let wide = number(spec.k_max)?;
    let narrow = number(0.5 * spec.k_max)?;
    Ok(Check {
        name: "cutoff_monotonicity".into(),
        passed: narrow <= wide,
        value: wide - narrow,
        threshold: 0.0,
        detail: format!("N(k_max / 2) = {narrow:e}, N(k_max) = {wide:e} (static spatial part)"),
    })
}

fn causality(source: &CurrentSource, grid: &Arc<KGrid>, t0: f64, sigma: f64, eps: f64, tol: f64) -> Result<Check> {
    let early = amplitude_time_dependent(source, t0 - 6.0 * sigma, grid, eps)?;
    let late = amplitude_time_dependent(source, t0 + 12.0 * sigma, grid, eps)?;
    let peak = late.values().iter().map(cnorm).fold(0.0, f64::max);
    let worst = early.values().iter().map(cnorm).fold(0.0, f64::max);
    let ratio = if peak > 0.0 { worst / peak } else { 0.0 };
    Ok(Check::at_most(
        "causality",
        ratio,
        tol,
        "max |xi(t0 - 6 sigma)| / max |xi(t -> inf)| over nodes",
    ))
}

/// Distance from `x` to a loop's wire, if the source is a loop.
fn wire_distance(source: &CurrentSource, x: &Vec3) -> Option<(f64, f64)> {
    if let Geometry::CircularLoop { radius, center, axis, .. } = source.geometry {
        let n = normalized(&axis)?;
        let d = sub(x, &center);
        let z = dot(&d, &n);
        let rho = norm(&sub(&d, &scale(&n, z)));
        Some(((rho - radius).hypot(z), radius))
    } else {
        None
    }
}

fn field_checks(config: &RunConfig, field: &FieldConfig) -> Result<Vec<Check>> {
    let tol = &config.tolerances;
    let source = &config.source;
    let grid = Arc::new(build_kgrid(field.grid)?);
    let length = source.length_scale();
    let h = length / 50.0;
    let mut checks = Vec::new();
    let mut residue: f64 = 0.0;
    let mut samples: Vec<(usize, FieldSample)> = Vec::new();
    let mut amplitudes = Vec::new();
    for &t in &field.times {
        let xi = amplitude_for(source, &grid, t, config.eps)?;
        for (p, x) in field.points.iter().enumerate() {
            let s = reconstruct_fields(&xi, x, t)?;
            residue = residue.max(s.imaginary_residue);
            samples.push((p, s));
        }
        amplitudes.push((t, xi));
    }
    checks.push(Check::at_most("reality", residue, tol.reality, "max imaginary residue over field samples"));

    // points far enough from a thin wire for smooth finite differences
    let usable = |x: &Vec3| wire_distance(source, x).is_none_or(|(d, r)| d >= 0.1 * r);
    let b_max = samples.iter().map(|(_, s)| norm(&s.b)).fold(0.0, f64::max);

    let mut div_worst: f64 = 0.0;
    let mut div_count = 0;
    for (t, xi) in &amplitudes {
        for x in field.points.iter().filter(|x| usable(x)) {
            let b = |dx: Vec3| reconstruct_fields(xi, &add(x, &dx), *t).map(|s| s.b);
            let mut div = 0.0;
            for c in 0..3 {
                let mut e = [0.0; 3];
                e[c] = h;
                div += (b(e)?[c] - b(scale(&e, -1.0))?[c]) / (2.0 * h);
            }
            let here = norm(&reconstruct_fields(xi, x, *t)?.b);
            if here > 1e-3 * b_max {
                div_worst = div_worst.max(div.abs() * length / here);
                div_count += 1;
            }
        }
    }
    checks.push(Check::at_most(
        "divergence_b",
        div_worst,
        tol.divergence,
        format!("max |div B| L / |B| at {div_count} samples, central differences with spacing L/50, L = {length:e} m"),
    ));

    if source.profile.is_static() {
        let e_worst = samples.iter().map(|(_, s)| norm(&s.e_perp)).fold(0.0, f64::max);
        let scale_e = C_LIGHT * b_max.max(f64::MIN_POSITIVE);
        checks.push(Check::at_most(
            "static_e_perp",
            e_worst / scale_e,
            tol.static_e,
            "max |E_perp| / (c max |B|) for a static source",
        ));
        if field.times.len() > 1 {
            let n = field.points.len();
            let mut worst: f64 = 0.0;
            for (i, (_, s)) in samples.iter().enumerate().skip(n) {
                let first = &samples[i % n].1;
                let m = norm(&first.b).max(f64::MIN_POSITIVE);
                worst = worst.max(norm(&sub(&s.b, &first.b)) / m);
            }
            checks.push(Check::at_most(
                "static_time_independence",
                worst,
                tol.reality,
                "max |B(t) - B(t_0)| / |B(t_0)| across configured times",
            ));
        }
        if matches!(source.geometry, Geometry::CircularLoop { .. }) {
            let mut worst: f64 = 0.0;
            let mut count = 0;
            let thin = CurrentSource { geometry: source.geometry.clone(), profile: TemporalProfile::Static };
            for (p, s) in &samples {
                let x = &field.points[*p];
                if !usable(x) {
                    continue;
                }
                let oracle = biot_savart(&thin, x)?.value;
                worst = worst.max(norm(&sub(&s.b, &oracle)) / norm(&oracle));
                count += 1;
            }
            checks.push(Check::at_most(
                "oracle_b",
                worst,
                tol.oracle_b,
                format!("max |B - B_biot_savart| / |B_biot_savart| at {count} samples at least 0.1 R off the wire"),
            ));
        }
    } else {
        checks.push(faraday(config, field, &grid, b_max, h)?);
    }
    Ok(checks)
}

fn time_step(profile: &TemporalProfile) -> f64 {
    match *profile {
        TemporalProfile::Static => 0.0,
        TemporalProfile::GaussianPulse { sigma, .. } => sigma / 50.0,
        TemporalProfile::TruncatedHarmonic { omega, ramp_sigma, .. } => (0.02 / omega).min(ramp_sigma / 50.0),
    }
}

fn faraday(config: &RunConfig, field: &FieldConfig, grid: &Arc<KGrid>, b_max: f64, h: f64) -> Result<Check> {
    let source = &config.source;
    let dt = time_step(&source.profile);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &t in &field.times {
        let now = amplitude_for(source, grid, t, config.eps)?;
        let after = amplitude_for(source, grid, t + dt, config.eps)?;
        let before = amplitude_for(source, grid, t - dt, config.eps)?;
        for x in &field.points {
            let b_here = reconstruct_fields(&now, x, t)?.b;
            if norm(&b_here) < 1e-3 * b_max {
                continue;
            }
            let db = scale(
                &sub(&reconstruct_fields(&after, x, t + dt)?.b, &reconstruct_fields(&before, x, t - dt)?.b),
                0.5 / dt,
            );
            let e = |c: usize, sign: f64| {
                let mut d = [0.0; 3];
                d[c] = sign * h;
                reconstruct_fields(&now, &add(x, &d), t).map(|s| s.e_perp)
            };
            let mut grad = [[0.0; 3]; 3]; // grad[a][b] = d E_b / d x_a
            for a in 0..3 {
                let (p, m) = (e(a, 1.0)?, e(a, -1.0)?);
                for b in 0..3 {
                    grad[a][b] = (p[b] - m[b]) / (2.0 * h);
                }
            }
            let curl = [grad[1][2] - grad[2][1], grad[2][0] - grad[0][2], grad[0][1] - grad[1][0]];
            let scale_db = norm(&db).max(f64::MIN_POSITIVE);
            worst = worst.max(norm(&add(&curl, &db)) / scale_db);
            count += 1;
        }
    }
    Ok(Check::at_most(
        "faraday",
        worst,
        config.tolerances.faraday,
        format!("max |curl E + dB/dt| / |dB/dt| at {count} samples with |B| >= 1e-3 max |B|"),
    ))
}
