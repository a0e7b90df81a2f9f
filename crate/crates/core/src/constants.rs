//! CODATA-2018 physical constants (SI).

use serde::Serialize;

pub const HBAR: f64 = 1.054571817e-34;
pub const C_LIGHT: f64 = 2.99792458e8;
pub const MU0: f64 = 1.25663706212e-6;
pub const EPS0: f64 = 1.0 / (MU0 * C_LIGHT * C_LIGHT);

/// The constant set used by a computation, echoed into run manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub mu0: f64,
    pub eps0: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: Self = Self {
        hbar: HBAR,
        c: C_LIGHT,
        mu0: MU0,
        eps0: EPS0,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_relation_holds() {
        let k = PhysicalConstants::default();
        assert!((k.eps0 * k.mu0 * k.c * k.c - 1.0).abs() < 1e-10);
        assert!((k.eps0 - 8.8541878128e-12).abs() / k.eps0 < 1e-9);
    }
}
