//! Small fixed-size vector helpers for real and complex 3-vectors.

use num_complex::Complex64;

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

pub const ZERO3: Vec3 = [0.0; 3];
pub const CZERO3: CVec3 = [Complex64::new(0.0, 0.0); 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Returns `None` for the zero vector.
pub fn normalized(a: &Vec3) -> Option<Vec3> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

/// Two unit vectors completing `axis` (assumed unit) to a right-handed frame `(u, v, axis)`.
pub fn orthonormal_frame(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let u = normalized(&cross(&helper, axis)).expect("helper is never parallel to axis");
    let v = cross(axis, &u);
    (u, v)
}

#[inline]
pub fn cscale(a: &CVec3, s: Complex64) -> CVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cscale_re(a: &CVec3, s: f64) -> CVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cadd(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn csub(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn cconj(a: &CVec3) -> CVec3 {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

/// Real vector times complex scalar.
#[inline]
pub fn real_times(a: &Vec3, s: Complex64) -> CVec3 {
    [s * a[0], s * a[1], s * a[2]]
}

/// Bilinear (non-conjugating) product of a real and a complex vector.
#[inline]
pub fn rdot(a: &Vec3, b: &CVec3) -> Complex64 {
    b[0] * a[0] + b[1] * a[1] + b[2] * a[2]
}

/// Hermitian product `conj(a) . b`.
#[inline]
pub fn cdotc(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

#[inline]
pub fn cnorm_sqr(a: &CVec3) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()
}

#[inline]
pub fn cnorm(a: &CVec3) -> f64 {
    cnorm_sqr(a).sqrt()
}

/// `a x b` with `a` real and `b` complex.
#[inline]
pub fn rcross(a: &Vec3, b: &CVec3) -> CVec3 {
    [
        b[2] * a[1] - b[1] * a[2],
        b[0] * a[2] - b[2] * a[0],
        b[1] * a[0] - b[0] * a[1],
    ]
}

pub fn re(a: &CVec3) -> Vec3 {
    [a[0].re, a[1].re, a[2].re]
}

pub fn im(a: &CVec3) -> Vec3 {
    [a[0].im, a[1].im, a[2].im]
}

pub fn is_finite_c(a: &CVec3) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
