//! Fixed single-qubit matrices, row-major `[[u00, u01], [u10, u11]]`.

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn y() -> Mat2 {
    [[ZERO, -I], [I, ZERO]]
}

pub fn z() -> Mat2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

pub fn h() -> Mat2 {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

pub fn s() -> Mat2 {
    [[ONE, ZERO], [ZERO, I]]
}

pub fn sdg() -> Mat2 {
    [[ONE, ZERO], [ZERO, -I]]
}

/// `exp(-i θ X / 2)`
pub fn rx(theta: f64) -> Mat2 {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(theta / 2.0).sin());
    [[c, s], [s, c]]
}

/// `exp(-i θ Z / 2)`
pub fn rz(theta: f64) -> Mat2 {
    [
        [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
        [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

/// `diag(1, e^{iλ})`
pub fn phase(lambda: f64) -> Mat2 {
    [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, lambda)]]
}

pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn dagger(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

/// Largest element-wise deviation of `u† u` from the identity.
pub fn unitarity_deviation(u: &Mat2) -> f64 {
    let p = matmul(&dagger(u), u);
    let id = identity();
    let mut worst = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            worst = worst.max((p[r][c] - id[r][c]).norm());
        }
    }
    worst
}
