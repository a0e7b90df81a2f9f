//! End-to-end acceptance run. Prints one `PASS`/`FAIL` line per criterion and a
//! closing tally. A failing criterion is reported, not raised; errors from the
//! library still abort the run.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use photon_ledger::classical_oracle::{biot_savart, loop_axis_field, retarded_vector_potential};
use photon_ledger::coherent_state::{
    amplitude_static, amplitude_time_dependent, loop_photon_density, loop_photon_number, phase, photon_density,
    summarize,
};
use photon_ledger::config::load_config;
use photon_ledger::constants::C_LIGHT;
use photon_ledger::current_model::{CurrentSource, TemporalProfile};
use photon_ledger::field_reconstruction::reconstruct_fields;
use photon_ledger::quadrature::{bessel_j0, bessel_j1, build_kgrid, KGrid, KGridSpec, RadialMap};
use photon_ledger::validate::run_suite;
use photon_ledger::vector::{norm, sub, Vec3};

const CURRENT: f64 = 1.0;
const RADIUS: f64 = 0.1;

/// `N(k_min, k_max) / N_closed` for `[1e-3/R, 200/R]`, from an independent
/// adaptive nested quadrature (scipy) of the closed-form density.
const TRUNCATED_FRACTION: f64 = 0.994_999_514;

struct Outcome {
    passed: bool,
    detail: String,
    info: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
            info: Vec::new(),
        }
    }
}

fn grid(spec: KGridSpec) -> Arc<KGrid> {
    Arc::new(build_kgrid(spec).expect("grid"))
}

fn thin_loop() -> CurrentSource {
    CurrentSource::circular_loop(CURRENT, RADIUS)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn criterion_1() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let n = pool.install(|| {
        let g = grid(KGridSpec::with_cutoffs(1e-3 / RADIUS, 200.0 / RADIUS));
        let xi = amplitude_static(&thin_loop(), &g).unwrap();
        summarize(&xi).unwrap().n.value
    });
    let elapsed = start.elapsed().as_secs_f64();
    let closed = loop_photon_number(CURRENT, RADIUS);
    let dev = rel(n, closed);
    let mut out = Outcome::new(
        dev <= 5e-3 && elapsed <= 60.0,
        format!("N = {n:.6e}, closed form {closed:.6e}, deviation {:.4}% (<= 0.5%), {elapsed:.1} s single-threaded (<= 60 s)", dev * 100.0),
    );
    let fine = {
        let mut spec = KGridSpec::with_cutoffs(1e-3 / RADIUS, 200.0 / RADIUS);
        spec.n_k = 512;
        spec.n_theta = 512;
        spec.n_phi = 4;
        let g = grid(spec);
        summarize(&amplitude_static(&thin_loop(), &g).unwrap()).unwrap().n.value
    };
    out.info.push(format!(
        "converged grid (512 x 512) gives N / N_closed = {:.7}; exact truncated fraction {TRUNCATED_FRACTION}; \
         the default grid lands inside the band through its own quadrature error",
        fine / closed
    ));
    out
}

/// Condition number of `J1(x)^2` with respect to a relative change in `x`.
fn j1_squared_condition(x: f64) -> f64 {
    let j1 = bessel_j1(x);
    2.0 * (x * (bessel_j0(x) - j1 / x) / j1).abs()
}

fn criterion_2() -> Outcome {
    let g = grid(KGridSpec::with_cutoffs(1e-3 / RADIUS, 200.0 / RADIUS));
    let xi = amplitude_static(&thin_loop(), &g).unwrap();
    let n = photon_density(&xi);
    let mut worst: f64 = 0.0;
    let mut worst_conditioned: f64 = 0.0;
    let mut worst_scaled: f64 = 0.0;
    let mut over = 0usize;
    let mut compared = 0usize;
    for (i, &value) in n.iter().enumerate() {
        let node = g.node(i);
        let expected = loop_photon_density(CURRENT, RADIUS, node.k, node.sin_theta);
        if expected > 0.0 {
            let d = rel(value, expected);
            let kappa = j1_squared_condition(node.k * RADIUS * node.sin_theta);
            worst = worst.max(d);
            if kappa <= 1e3 {
                worst_conditioned = worst_conditioned.max(d);
            }
            worst_scaled = worst_scaled.max(d / (kappa.max(1.0) * f64::EPSILON));
            over += usize::from(d > 1e-12);
            compared += 1;
        }
    }
    let mut out = Outcome::new(
        worst <= 1e-12 && compared == n.len(),
        format!("max node-wise relative deviation {worst:.3e} over {compared} nodes (<= 1e-12); {over} nodes above"),
    );
    out.info.push(format!(
        "nodes above the limit lie next to zeros of J1, where one ulp in k R sin(theta) is amplified by the \
         condition number kappa = 2 |x J1'/J1|; at nodes with kappa <= 1e3 the worst deviation is \
         {worst_conditioned:.3e}, and everywhere deviation <= {worst_scaled:.1} kappa eps"
    ));
    out
}

fn criterion_3() -> Outcome {
    let pairs = [(1e-3, 200.0), (1e-2, 50.0), (1.0, 400.0), (1e-4, 10.0)];
    let mut worst_virial: f64 = 0.0;
    let mut worst_energy: f64 = 0.0;
    for (lo, hi) in pairs {
        let g = grid(KGridSpec::with_cutoffs(lo / RADIUS, hi / RADIUS));
        let s = summarize(&amplitude_static(&thin_loop(), &g).unwrap()).unwrap();
        worst_virial = worst_virial.max(rel(s.v.value / s.h_gamma.value, -2.0));
        worst_energy = worst_energy.max(rel(s.e.value, -s.h_gamma.value));
    }
    Outcome::new(
        worst_virial <= 1e-12 && worst_energy <= 1e-12,
        format!(
            "V/H_gamma vs -2: {worst_virial:.3e}; E vs -H_gamma: {worst_energy:.3e} over {} cutoff pairs (<= 1e-12)",
            pairs.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let g = grid(KGridSpec::with_cutoffs(1e-3 / RADIUS, 200.0 / RADIUS));
    let s = summarize(&amplitude_static(&thin_loop(), &g).unwrap()).unwrap();
    let slope_dev = rel(s.phase_slope.value, s.e.value);
    let times = [0.0, 1e-9, 1e-6, 3.7e-6, 1.0];
    let mut linear_dev: f64 = 0.0;
    for t in times {
        let p = phase(&thin_loop(), t, &g, 0.0, None).unwrap();
        let expected = s.phase_slope.value * t;
        let d = if t == 0.0 { p.phi.abs() } else { rel(p.phi, expected) };
        linear_dev = linear_dev.max(d);
    }
    Outcome::new(
        slope_dev <= 1e-10 && linear_dev <= 1e-14,
        format!("dPhi/dt vs E: {slope_dev:.3e} (<= 1e-10); Phi(t) vs slope * t: {linear_dev:.3e}"),
    )
}

fn field_grid(n_theta: usize) -> Arc<KGrid> {
    grid(KGridSpec {
        k_min: 1e-3 / RADIUS,
        k_max: 80.0 / RADIUS,
        n_k: 160,
        n_theta,
        n_phi: 192,
        radial_map: RadialMap::Linear,
    })
}

fn wire_distance(x: &Vec3) -> f64 {
    let rho = x[0].hypot(x[1]);
    (rho - RADIUS).hypot(x[2])
}

fn criterion_5() -> Outcome {
    let r = RADIUS;
    let probes: Vec<Vec3> = vec![
        [0.0, 0.0, 0.0],
        [0.0, 0.0, r],
        [0.0, 0.0, 0.5 * r],
        [0.0, 0.0, 1.5 * r],
        [0.0, 0.0, -r],
        [0.0, 0.0, 2.0 * r],
        [0.25 * r, 0.0, 0.0],
        [0.0, 0.5 * r, 0.0],
        [0.53 * r, -0.53 * r, 0.0],
        [1.25 * r, 0.0, 0.0],
        [-1.5 * r, 0.0, 0.0],
        [1.2 * r, 1.2 * r, 0.0],
        [0.5 * r, 0.0, 0.5 * r],
        [0.3 * r, 0.4 * r, -0.6 * r],
        [r, 0.0, 0.5 * r],
        [0.0, 1.2 * r, 0.6 * r],
        [1.5 * r, 0.0, 0.5 * r],
        [-0.7 * r, -0.7 * r, 0.3 * r],
        [0.2 * r, -0.3 * r, 1.2 * r],
        [1.1 * r, 1.1 * r, 0.2 * r],
        [0.0, -0.6 * r, -0.9 * r],
    ];
    let start = Instant::now();
    let source = thin_loop().with_wire_radius(0.05 * r);
    let g = field_grid(320);
    let xi = amplitude_static(&source, &g).unwrap();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for x in &probes {
        assert!(norm(x) <= 2.0 * r + 1e-15 && wire_distance(x) >= 0.1 * r);
        let b = reconstruct_fields(&xi, x, 0.0).unwrap().b;
        let oracle = biot_savart(&thin_loop(), x).unwrap().value;
        let d = norm(&sub(&b, &oracle)) / norm(&oracle);
        ok &= d <= 1e-2;
        worst = worst.max(d);
    }
    let center = reconstruct_fields(&xi, &[0.0, 0.0, 0.0], 0.0).unwrap().b[2];
    let top = reconstruct_fields(&xi, &[0.0, 0.0, r], 0.0).unwrap().b[2];
    let elapsed = start.elapsed().as_secs_f64();
    let axis_ok = rel(center, 6.2832e-6) <= 1e-2
        && rel(top, 2.2214e-6) <= 1e-2
        && rel(loop_axis_field(CURRENT, r, 0.0), 6.2832e-6) <= 1e-4
        && rel(loop_axis_field(CURRENT, r, r), 2.2214e-6) <= 1e-4;
    let mut out = Outcome::new(
        ok && axis_ok && probes.len() >= 20 && elapsed <= 300.0,
        format!(
            "{} probes, max |B - B_BiotSavart| / |B_BiotSavart| = {worst:.3e} (<= 1e-2); B(0) = {center:.5e} T, \
             B(z=R) = {top:.5e} T; {elapsed:.1} s (<= 300 s)",
            probes.len()
        ),
    );
    let near = [0.88 * r, 0.0, 0.0];
    let b = reconstruct_fields(&xi, &near, 0.0).unwrap().b;
    let oracle = biot_savart(&thin_loop(), &near).unwrap().value;
    out.info.push(format!(
        "wire radius {:.3} m; probes kept >= 0.25 R off the wire; at 0.12 R off the wire the smeared-wire \
         deviation is {:.2}%",
        0.05 * r,
        100.0 * norm(&sub(&b, &oracle)) / norm(&oracle)
    ));
    out
}

fn criterion_6() -> Outcome {
    let r = RADIUS;
    let sigma = r / C_LIGHT;
    let source = thin_loop()
        .with_wire_radius(0.05 * r)
        .with_profile(TemporalProfile::GaussianPulse { t0: 0.0, sigma });
    let oracle_source = thin_loop().with_profile(TemporalProfile::GaussianPulse { t0: 0.0, sigma });
    let g = field_grid(320);
    let probes: Vec<(f64, Vec<Vec3>)> = vec![
        (-sigma, vec![[0.3 * r, 0.4 * r, -0.6 * r]]),
        (0.0, vec![[0.5 * r, 0.0, 0.0]]),
        (sigma, vec![[1.5 * r, 0.0, 0.5 * r], [0.5 * r, 0.0, 0.0]]),
        (3.0 * sigma, vec![[2.0 * r, 0.0, 0.0]]),
    ];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (t, points) in &probes {
        let xi = amplitude_time_dependent(&source, *t, &g, 0.0).unwrap();
        for x in points {
            let a = reconstruct_fields(&xi, x, *t).unwrap().a;
            let oracle = retarded_vector_potential(&oracle_source, x, *t).unwrap().value;
            worst = worst.max(norm(&sub(&a, &oracle)) / norm(&oracle));
            count += 1;
        }
    }

    let t_early = -6.5 * sigma;
    let early_points: [Vec3; 2] = [[2.0 * r, 0.0, 0.0], [1.5 * r, 0.0, 0.5 * r]];
    let xi = amplitude_time_dependent(&source, t_early, &g, 0.0).unwrap();
    let mut causality: f64 = 0.0;
    for x in &early_points {
        let early = norm(&reconstruct_fields(&xi, x, t_early).unwrap().a);
        let peak = (0..=40)
            .map(|i| {
                let t = -sigma + 0.15 * sigma * i as f64;
                norm(&retarded_vector_potential(&oracle_source, x, t).unwrap().value)
            })
            .fold(0.0, f64::max);
        causality = causality.max(early / peak);
    }
    Outcome::new(
        worst <= 2e-2 && count >= 5 && causality <= 1e-8,
        format!(
            "{count} space-time probes, max |A - A_retarded| / |A_retarded| = {worst:.3e} (<= 2e-2); \
             |A| at t0 - 6.5 sigma outside the light cone = {causality:.3e} of peak (<= 1e-8)"
        ),
    )
}

fn criterion_7() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    names.sort();
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut seen = std::collections::BTreeSet::new();
    for path in &names {
        let config = load_config(path).unwrap();
        let report = run_suite(&config).unwrap();
        checks += report.checks.len();
        for c in report.checks {
            if !c.passed {
                failures.push(format!("{}: {} = {:.3e}", path.display(), c.name, c.value));
            }
            seen.insert(c.name);
        }
    }
    let required = [
        "transversality",
        "hermiticity",
        "reality",
        "divergence_b",
        "projector",
        "linearity",
        "determinism",
    ];
    let missing: Vec<_> = required.iter().filter(|n| !seen.contains(**n)).collect();
    Outcome::new(
        failures.is_empty() && missing.is_empty(),
        format!(
            "{checks} checks over {} shipped configs; failures: {:?}; missing checks: {:?}",
            names.len(),
            failures,
            missing
        ),
    )
}

fn criterion_8() -> Outcome {
    let cutoffs = [50.0, 100.0, 200.0, 400.0];
    let mut energies = Vec::new();
    let mut carries_cutoffs = true;
    for hi in cutoffs {
        let g = grid(KGridSpec {
            k_min: 1e-3 / RADIUS,
            k_max: hi / RADIUS,
            n_k: 256,
            n_theta: 256,
            n_phi: 4,
            radial_map: RadialMap::Log,
        });
        let s = summarize(&amplitude_static(&thin_loop(), &g).unwrap()).unwrap();
        let json = serde_json::to_value(&s).unwrap();
        carries_cutoffs &= json["cutoffs"]["k_max"].as_f64() == Some(hi / RADIUS)
            && json["cutoffs"]["k_min"].is_number()
            && json["energies_cutoff_regulated"] == serde_json::Value::Bool(true);
        energies.push(s.e.value);
    }
    let slopes: Vec<f64> = energies.windows(2).map(|w| (w[1] - w[0]) / 2f64.ln()).collect();
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let spread = slopes.iter().map(|s| ((s - mean) / mean).abs()).fold(0.0, f64::max);
    Outcome::new(
        spread <= 0.1 && carries_cutoffs && mean < 0.0,
        format!(
            "dE/dln k_max over 50,100,200,400 /R: {:?} J, max spread {:.2}% (<= 10%); summaries carry cutoffs: {carries_cutoffs}",
            slopes.iter().map(|s| format!("{s:.4e}")).collect::<Vec<_>>(),
            spread * 100.0
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("total photon number", criterion_1),
        ("photon density closed form", criterion_2),
        ("virial theorem", criterion_3),
        ("stationary phase", criterion_4),
        ("static field vs Biot-Savart", criterion_5),
        ("pulsed field vs retarded potential", criterion_6),
        ("property suite", criterion_7),
        ("divergence honesty", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        if !outcome.passed {
            failed.push(i + 1);
        }
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {} ({name}): {verdict}: {}", i + 1, outcome.detail);
        for line in &outcome.info {
            println!("    info: {line}");
        }
    }
    let passed = criteria.len() - failed.len();
    println!("acceptance: {passed}/{} criteria pass; failing: {failed:?}", criteria.len());
}
