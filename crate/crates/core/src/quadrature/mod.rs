//! Spherical k-space grids, deterministic integration and special functions.
//!
//! A [`KGrid`] is a product rule: composite Gauss–Legendre in `k` (on a
//! linear or logarithmic map), Gauss–Legendre in `cos(theta)` and the
//! periodic trapezoid rule in `phi`. Nodes are addressed by a flat index
//! `(i_k * n_theta + i_theta) * n_phi + i_phi`.
//!
//! [`integrate`] evaluates an integrand on every node and reduces the weighted
//! values pairwise, chunk by chunk, in index order. Chunk boundaries do not
//! depend on the thread count, so results are bit-identical however many
//! workers run.

pub mod adaptive;
mod bessel;
mod gauss;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vector::{CVec3, Vec3};

pub use bessel::{bessel_j0, bessel_j1, bessel_j2};
pub use gauss::gauss_legendre;

/// Nodes per reduction chunk. Part of the reproducibility contract.
pub const REDUCTION_CHUNK: usize = 4096;

const PANEL_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialMap {
    Linear,
    Log,
}

/// Construction parameters for a [`KGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGridSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub radial_map: RadialMap,
}

impl KGridSpec {
    /// Default resolution (log map, 128 x 64 x 16) with the given cutoffs.
    pub fn with_cutoffs(k_min: f64, k_max: f64) -> Self {
        Self {
            k_min,
            k_max,
            n_k: 128,
            n_theta: 64,
            n_phi: 16,
            radial_map: RadialMap::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.k_min.is_finite() && self.k_min > 0.0) {
            problems.push(format!("k_min must be finite and > 0, got {}", self.k_min));
        }
        if !(self.k_max.is_finite() && self.k_max > self.k_min) {
            problems.push(format!(
                "k_max must be finite and > k_min, got k_min = {}, k_max = {}",
                self.k_min, self.k_max
            ));
        }
        if self.n_k < 8 {
            problems.push(format!("n_k must be >= 8, got {}", self.n_k));
        }
        if self.n_theta < 4 {
            problems.push(format!("n_theta must be >= 4, got {}", self.n_theta));
        }
        if self.n_phi != 1 && self.n_phi < 4 {
            problems.push(format!("n_phi must be 1 (meridian) or >= 4, got {}", self.n_phi));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems.join("; ")))
        }
    }
}

/// Cutoffs attached to every reported integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoffs {
    pub k_min: f64,
    pub k_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMetadata {
    pub n_k: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub radial_map: RadialMap,
    pub nodes: usize,
}

/// One quadrature node with its full `d^3k` weight.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub index: usize,
    pub k: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub phi: f64,
    pub cos_phi: f64,
    pub sin_phi: f64,
    pub weight: f64,
}

impl Node {
    #[inline]
    pub fn khat(&self) -> Vec3 {
        [
            self.sin_theta * self.cos_phi,
            self.sin_theta * self.sin_phi,
            self.cos_theta,
        ]
    }

    #[inline]
    pub fn kvec(&self) -> Vec3 {
        let h = self.khat();
        [self.k * h[0], self.k * h[1], self.k * h[2]]
    }
}

#[derive(Debug, Clone)]
pub struct KGrid {
    spec: KGridSpec,
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    polar_weights: Vec<f64>,
    phi: Vec<f64>,
    cos_phi: Vec<f64>,
    sin_phi: Vec<f64>,
    phi_weight: f64,
}

/// Builds the product grid described by `spec`.
///
/// The radial rule is composite Gauss–Legendre with 16-node panels when
/// `n_k` is a multiple of 16 (and at least 32), otherwise a single
/// `n_k`-point rule. The log map places panels uniformly in `ln k`.
pub fn build_kgrid(spec: KGridSpec) -> Result<KGrid> {
    spec.validate()?;
    let (radial_nodes, radial_weights) = radial_rule(&spec);
    let (cos_theta, polar_weights) = gauss_legendre(spec.n_theta);
    let sin_theta = cos_theta.iter().map(|c| (1.0 - c * c).max(0.0).sqrt()).collect();
    let phi: Vec<f64> = (0..spec.n_phi)
        .map(|l| 2.0 * PI * l as f64 / spec.n_phi as f64)
        .collect();
    let cos_phi = phi.iter().map(|p| p.cos()).collect();
    let sin_phi = phi.iter().map(|p| p.sin()).collect();
    Ok(KGrid {
        spec,
        radial_nodes,
        radial_weights,
        cos_theta,
        sin_theta,
        polar_weights,
        phi,
        cos_phi,
        sin_phi,
        phi_weight: 2.0 * PI / spec.n_phi as f64,
    })
}

fn radial_rule(spec: &KGridSpec) -> (Vec<f64>, Vec<f64>) {
    let (panels, per_panel) = if spec.n_k >= 2 * PANEL_NODES && spec.n_k.is_multiple_of(PANEL_NODES) {
        (spec.n_k / PANEL_NODES, PANEL_NODES)
    } else {
        (1, spec.n_k)
    };
    let (x, w) = gauss_legendre(per_panel);
    let (lo, hi) = match spec.radial_map {
        RadialMap::Linear => (spec.k_min, spec.k_max),
        RadialMap::Log => (spec.k_min.ln(), spec.k_max.ln()),
    };
    let width = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(spec.n_k);
    let mut weights = Vec::with_capacity(spec.n_k);
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let half = 0.5 * width;
        let mid = a + half;
        for (xi, wi) in x.iter().zip(&w) {
            let u = mid + half * xi;
            match spec.radial_map {
                RadialMap::Linear => {
                    nodes.push(u);
                    weights.push(half * wi);
                }
                RadialMap::Log => {
                    let k = u.exp();
                    nodes.push(k);
                    weights.push(half * wi * k);
                }
            }
        }
    }
    (nodes, weights)
}

impl KGrid {
    pub fn spec(&self) -> &KGridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.n_k * self.spec.n_theta * self.spec.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cutoffs(&self) -> Cutoffs {
        Cutoffs {
            k_min: self.spec.k_min,
            k_max: self.spec.k_max,
        }
    }

    pub fn metadata(&self) -> GridMetadata {
        GridMetadata {
            n_k: self.spec.n_k,
            n_theta: self.spec.n_theta,
            n_phi: self.spec.n_phi,
            radial_map: self.spec.radial_map,
            nodes: self.len(),
        }
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    /// Radial `dk` weights (without the `k^2` Jacobian).
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn cos_theta_nodes(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn polar_weights(&self) -> &[f64] {
        &self.polar_weights
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi
    }

    /// Radial index of a flat node index.
    #[inline]
    pub fn radial_index(&self, index: usize) -> usize {
        index / (self.spec.n_theta * self.spec.n_phi)
    }

    #[inline]
    pub fn node(&self, index: usize) -> Node {
        let n_phi = self.spec.n_phi;
        let n_theta = self.spec.n_theta;
        let l = index % n_phi;
        let j = (index / n_phi) % n_theta;
        let i = index / (n_phi * n_theta);
        let k = self.radial_nodes[i];
        Node {
            index,
            k,
            cos_theta: self.cos_theta[j],
            sin_theta: self.sin_theta[j],
            phi: self.phi[l],
            cos_phi: self.cos_phi[l],
            sin_phi: self.sin_phi[l],
            weight: self.radial_weights[i] * k * k * self.polar_weights[j] * self.phi_weight,
        }
    }

    /// Index of the node at `-k`, when the grid contains it (even `n_phi`).
    #[inline]
    pub fn antipode(&self, index: usize) -> Option<usize> {
        let n_phi = self.spec.n_phi;
        if !n_phi.is_multiple_of(2) {
            return None;
        }
        let n_theta = self.spec.n_theta;
        let l = index % n_phi;
        let j = (index / n_phi) % n_theta;
        let i = index / (n_phi * n_theta);
        let l2 = (l + n_phi / 2) % n_phi;
        let j2 = n_theta - 1 - j;
        Some((i * n_theta + j2) * n_phi + l2)
    }

    /// Evaluates `f` at every node, in index order.
    pub fn map_nodes<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&Node) -> T + Sync + Send,
    {
        (0..self.len())
            .into_par_iter()
            .map(|i| f(&self.node(i)))
            .collect()
    }
}

/// Values that can be accumulated by [`integrate`].
pub trait Accumulate: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    /// Euclidean magnitude, for error estimates.
    fn magnitude(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl Accumulate for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Accumulate for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<T: Accumulate, const N: usize> Accumulate for [T; N] {
    fn zero() -> Self {
        [T::zero(); N]
    }
    fn add(self, other: Self) -> Self {
        let mut out = self;
        for (o, b) in out.iter_mut().zip(other) {
            *o = o.add(b);
        }
        out
    }
    fn scale(self, s: f64) -> Self {
        self.map(|v| v.scale(s))
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(|v| v.magnitude().powi(2)).sum::<f64>().sqrt()
    }
    fn is_finite(&self) -> bool {
        self.iter().all(Accumulate::is_finite)
    }
}

/// Result of a grid integration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegrationReport<T> {
    pub value: T,
    /// Azimuthal-halving difference plus a rounding bound; zero-free and `>= 0`.
    pub estimated_error: f64,
    pub grid: GridMetadata,
    pub cutoffs: Cutoffs,
}

/// Pairwise (cascade) sum in index order.
pub fn pairwise_sum<T: Accumulate>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        2 => values[0].add(values[1]),
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]).add(pairwise_sum(&values[mid..]))
        }
    }
}

struct ChunkSum<T> {
    full: T,
    half: T,
    abs: f64,
}

/// Weighted sums behind [`integrate`].
pub(crate) struct Parts<T> {
    pub full: T,
    /// Sum over even azimuthal nodes with doubled weights, when `n_phi` is even.
    pub half: Option<T>,
    /// Sum of `|w f|`, for rounding bounds.
    pub abs: f64,
}

impl<T: Accumulate> Parts<T> {
    /// Rounding bound for a result built from `nodes` terms.
    pub fn rounding(&self, nodes: usize) -> f64 {
        self.abs * f64::EPSILON * (nodes.max(2) as f64).log2()
    }
}

pub(crate) fn integrate_parts<T, F>(f: F, grid: &KGrid) -> Result<Parts<T>>
where
    T: Accumulate,
    F: Fn(&Node) -> T + Sync + Send,
{
    let n = grid.len();
    let chunks = n.div_ceil(REDUCTION_CHUNK);
    let n_phi = grid.spec.n_phi;
    let halving = n_phi >= 2 && n_phi.is_multiple_of(2);
    let partials: Vec<Result<ChunkSum<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * REDUCTION_CHUNK;
            let end = (start + REDUCTION_CHUNK).min(n);
            let mut full = Vec::with_capacity(end - start);
            let mut half = Vec::with_capacity(if halving { (end - start) / 2 + 1 } else { 0 });
            let mut abs = 0.0;
            for index in start..end {
                let node = grid.node(index);
                let v = f(&node);
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        index,
                        k: node.k,
                        cos_theta: node.cos_theta,
                        phi: node.phi,
                    });
                }
                let wv = v.scale(node.weight);
                abs += wv.magnitude();
                if halving && (index % n_phi).is_multiple_of(2) {
                    half.push(wv.scale(2.0));
                }
                full.push(wv);
            }
            Ok(ChunkSum {
                full: pairwise_sum(&full),
                half: pairwise_sum(&half),
                abs,
            })
        })
        .collect();
    let mut fulls = Vec::with_capacity(chunks);
    let mut halves = Vec::with_capacity(chunks);
    let mut abs = 0.0;
    for p in partials {
        let p = p?;
        fulls.push(p.full);
        halves.push(p.half);
        abs += p.abs;
    }
    Ok(Parts {
        full: pairwise_sum(&fulls),
        half: halving.then(|| pairwise_sum(&halves)),
        abs,
    })
}

/// Integrates `f` over the grid: `sum_n w_n f(node_n)`.
///
/// Aborts with [`Error::NonFinite`] naming the first offending node.
pub fn integrate<T, F>(f: F, grid: &KGrid) -> Result<IntegrationReport<T>>
where
    T: Accumulate,
    F: Fn(&Node) -> T + Sync + Send,
{
    let parts = integrate_parts(f, grid)?;
    let rounding = parts.rounding(grid.len());
    let estimated_error = match parts.half {
        Some(h) => parts.full.add(h.scale(-1.0)).magnitude() + rounding,
        None => rounding,
    };
    Ok(IntegrationReport {
        value: parts.full,
        estimated_error,
        grid: grid.metadata(),
        cutoffs: grid.cutoffs(),
    })
}

/// Convenience alias for vector-valued integrands.
pub type CVecReport = IntegrationReport<CVec3>;
