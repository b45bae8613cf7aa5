//! Naive index-loop oracles, deliberately free of matrix-library products.

#![allow(dead_code)]

use weakqp::{AlphaParam, CMatrix, Complex64, StateVector};

pub type Dense = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn dense(m: &CMatrix) -> Dense {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn amps(psi: &StateVector) -> Vec<Complex64> {
    psi.amplitudes().iter().copied().collect()
}

pub fn matmul(x: &Dense, y: &Dense) -> Dense {
    let n = x.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j] += x[i][k] * y[k][j];
            }
        }
    }
    out
}

pub fn kron(x: &Dense, y: &Dense) -> Dense {
    let (n, m) = (x.len(), y.len());
    let mut out = vec![vec![c(0.0, 0.0); n * m]; n * m];
    for i1 in 0..n {
        for j1 in 0..n {
            for i2 in 0..m {
                for j2 in 0..m {
                    out[i1 * m + i2][j1 * m + j2] = x[i1][j1] * y[i2][j2];
                }
            }
        }
    }
    out
}

/// `⟨u|M|v⟩`
pub fn sandwich(u: &[Complex64], m: &Dense, v: &[Complex64]) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for i in 0..u.len() {
        for j in 0..v.len() {
            s += u[i].conj() * m[i][j] * v[j];
        }
    }
    s
}

pub fn braket(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn alpha_mix(x: &Dense, y: &Dense, alpha: AlphaParam) -> Dense {
    let xy = matmul(x, y);
    let yx = matmul(y, x);
    let (a, b) = (alpha.value(), c(1.0, 0.0) - alpha.value());
    (0..x.len()).map(|i| (0..x.len()).map(|j| a * xy[i][j] + b * yx[i][j]).collect()).collect()
}

pub fn conditional(p: &Dense, psi: &[Complex64], phi: &[Complex64], alpha: AlphaParam) -> Complex64 {
    let fwd = sandwich(phi, p, psi) / braket(phi, psi);
    let rev = sandwich(psi, p, phi) / braket(psi, phi);
    alpha.value() * fwd + (c(1.0, 0.0) - alpha.value()) * rev
}

pub fn joint(pb: &Dense, pa: &Dense, psi: &[Complex64], alpha: AlphaParam) -> Complex64 {
    sandwich(psi, &alpha_mix(pb, pa, alpha), psi)
}

pub fn diag_projector(dim: usize, x: usize) -> Dense {
    let mut p = vec![vec![c(0.0, 0.0); dim]; dim];
    p[x][x] = c(1.0, 0.0);
    p
}

pub fn max_dev(x: &[Complex64], y: &[Complex64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}
