#![allow(clippy::needless_range_loop)]

//! Dense complex matrices and the spectral routines built on them.
//!
//! Unitary eigendecomposition goes through the commuting Hermitian pair
//! (U+U^dag)/2 and (U-U^dag)/(2i): diagonalize the first by cyclic Jacobi,
//! then split any cos-degenerate cluster with the second. For a normal
//! matrix this always yields an orthonormal eigenbasis, which the spectral
//! reconstruction tests require; a general-purpose EVD does not.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{QsaError, Result};
use crate::qsim::circuit::{apply_circuit, Circuit};
use crate::qsim::state::StateVector;
use crate::rng::SeedStream;

/// Largest qubit count for which dense 2^n x 2^n conversion is allowed.
pub const DEFAULT_DENSE_LIMIT: usize = 12;

const Z0: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Z0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == Z0 {
                    continue;
                }
                let row = &other.data[k * d..(k + 1) * d];
                let dst = &mut out.data[r * d..(r + 1) * d];
                for c in 0..d {
                    dst[c] += a * row[c];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len());
        let d = self.dim;
        let mut out = vec![Z0; d];
        for r in 0..d {
            let row = &self.data[r * d..(r + 1) * d];
            let mut acc = Z0;
            for c in 0..d {
                acc += row[c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Column `c` as a vector.
    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.get(r, c)).collect()
    }

    /// max_ij |A_ij - B_ij|
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max-entry deviation of U U^dag from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        self.mul(&self.adjoint()).max_abs_diff(&Self::identity(self.dim))
    }

    /// Matrix power by repeated squaring.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

/// Dense matrix of a circuit, built by simulating all basis states.
pub fn circuit_to_matrix(c: &Circuit) -> Result<CMat> {
    circuit_to_matrix_limited(c, DEFAULT_DENSE_LIMIT)
}

pub fn circuit_to_matrix_limited(c: &Circuit, dense_limit: usize) -> Result<CMat> {
    if c.n > dense_limit {
        return Err(QsaError::CapacityExceeded(c.n, dense_limit));
    }
    let dim = 1usize << c.n;
    let mut m = CMat::zeros(dim);
    for col in 0..dim {
        let out = apply_circuit(&StateVector::basis(c.n, col), c)?;
        for (row, amp) in out.amps().iter().enumerate() {
            m.set(row, col, *amp);
        }
    }
    Ok(m)
}

/// Eigendecomposition of a unitary: phases in [0, 2pi) sorted ascending and
/// the matching orthonormal eigenvectors as columns of `basis`.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    pub phases: Vec<f64>,
    pub basis: CMat,
}

impl UnitaryEigen {
    /// Overlap weights |<v_j|state>|^2 in phase order.
    pub fn overlaps(&self, state: &StateVector) -> Vec<f64> {
        let d = self.basis.dim;
        assert_eq!(d, state.amps().len());
        let mut out = Vec::with_capacity(d);
        for j in 0..d {
            let mut acc = Z0;
            for r in 0..d {
                acc += self.basis.get(r, j).conj() * state.amps()[r];
            }
            out.push(acc.norm_sqr());
        }
        out
    }

    /// Index of the maximal-overlap eigenvector; ties go to the smallest
    /// phase, which is the first index at that overlap in sorted order.
    pub fn argmax_overlap(&self, state: &StateVector) -> usize {
        let ov = self.overlaps(state);
        let mut best = 0;
        for (j, &w) in ov.iter().enumerate() {
            if w > ov[best] {
                best = j;
            }
        }
        best
    }
}

const UNITARY_TOL: f64 = 1e-8;

/// Eigendecompose a unitary matrix. Errors if the input deviates from
/// unitarity by more than 1e-8 in max-entry norm.
pub fn eig_unitary(u: &CMat) -> Result<UnitaryEigen> {
    let dev = u.unitarity_deviation();
    if dev > UNITARY_TOL {
        return Err(QsaError::NotUnitary {
            deviation: dev,
            tolerance: UNITARY_TOL,
        });
    }
    let d = u.dim;
    let udag = u.adjoint();
    let mut h_cos = CMat::zeros(d);
    let mut h_sin = CMat::zeros(d);
    let half = Complex64::new(0.5, 0.0);
    let ihalf = Complex64::new(0.0, -0.5); // 1/(2i)
    for i in 0..d * d {
        h_cos.data[i] = (u.data[i] + udag.data[i]) * half;
        h_sin.data[i] = (u.data[i] - udag.data[i]) * ihalf;
    }
    let (cos_vals, q) = eigh(&h_cos);

    // Sort by cos eigenvalue, then resolve clusters with the sin part.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| cos_vals[a].partial_cmp(&cos_vals[b]).unwrap());

    let mut basis = CMat::zeros(d);
    let mut filled = 0usize;
    let cluster_tol = 1e-6;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (cos_vals[order[end]] - cos_vals[order[end - 1]]).abs() <= cluster_tol {
            end += 1;
        }
        let group = &order[start..end];
        if group.len() == 1 {
            let col = q.column(group[0]);
            for r in 0..d {
                basis.set(r, filled, col[r]);
            }
            filled += 1;
        } else {
            // Restrict h_sin to the cluster subspace and diagonalize there.
            let g = group.len();
            let cols: Vec<Vec<Complex64>> = group.iter().map(|&j| q.column(j)).collect();
            let sin_cols: Vec<Vec<Complex64>> = cols.iter().map(|c| h_sin.matvec(c)).collect();
            let mut b = CMat::zeros(g);
            for (r, cr) in cols.iter().enumerate() {
                for (c, sc) in sin_cols.iter().enumerate() {
                    let mut acc = Z0;
                    for i in 0..d {
                        acc += cr[i].conj() * sc[i];
                    }
                    b.set(r, c, acc);
                }
            }
            let (_, rot) = eigh(&b);
            for k in 0..g {
                for r in 0..d {
                    let mut acc = Z0;
                    for (j, cj) in cols.iter().enumerate() {
                        acc += cj[r] * rot.get(j, k);
                    }
                    basis.set(r, filled + k, acc);
                }
            }
            filled += g;
        }
        start = end;
    }

    // Phases from Rayleigh quotients, then a final sort by phase.
    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..d)
        .map(|j| {
            let v = basis.column(j);
            let uv = u.matvec(&v);
            let mut lambda = Z0;
            for i in 0..d {
                lambda += v[i].conj() * uv[i];
            }
            (lambda.arg().rem_euclid(TAU), v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut out = UnitaryEigen {
        phases: Vec::with_capacity(d),
        basis: CMat::zeros(d),
    };
    for (j, (phase, v)) in pairs.into_iter().enumerate() {
        out.phases.push(phase);
        for r in 0..d {
            out.basis.set(r, j, v[r]);
        }
    }
    Ok(out)
}

/// Cyclic Jacobi diagonalization of a complex Hermitian matrix.
/// Returns (eigenvalues, Q) with A = Q diag(vals) Q^dag, Q unitary.
///
/// For the pivot block [[a, b], [conj(b), d]] with b = B e^{i phi}, the
/// rotation U = [[c, -s e^{i phi}], [s e^{-i phi}, c]] zeroes the
/// off-diagonal when t = s/c solves t^2 - 2 tau t - 1 = 0, tau = (d-a)/(2B);
/// the smaller-magnitude root keeps the rotation close to the identity.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let d = a.dim;
    let mut m = a.clone();
    let mut q = CMat::identity(d);
    if d == 1 {
        return (vec![m.get(0, 0).re], q);
    }
    let fro: f64 = m.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if fro == 0.0 {
        return (vec![0.0; d], q);
    }
    let stop_tol = fro * 5e-15;
    let rotate_tol = stop_tol * 0.01;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..d {
            for c in p + 1..d {
                off = off.max(m.get(p, c).norm());
            }
        }
        if off <= stop_tol {
            break;
        }
        for p in 0..d {
            for r in p + 1..d {
                let apr = m.get(p, r);
                let b = apr.norm();
                if b <= rotate_tol {
                    continue;
                }
                let phase = apr / b;
                let app = m.get(p, p).re;
                let arr = m.get(r, r).re;
                let tau = (arr - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let se_pos = phase * s; // s e^{i phi}
                let se_neg = phase.conj() * s; // s e^{-i phi}

                // M <- U^dag M U, applied as column then row updates.
                for k in 0..d {
                    let mkp = m.get(k, p);
                    let mkr = m.get(k, r);
                    m.set(k, p, mkp * c + mkr * se_neg);
                    m.set(k, r, mkr * c - mkp * se_pos);
                }
                for k in 0..d {
                    let mpk = m.get(p, k);
                    let mrk = m.get(r, k);
                    m.set(p, k, mpk * c + mrk * se_pos);
                    m.set(r, k, mrk * c - mpk * se_neg);
                }
                // Clean the pivot block against rounding drift.
                let mpp = m.get(p, p);
                let mrr = m.get(r, r);
                m.set(p, p, Complex64::new(mpp.re, 0.0));
                m.set(r, r, Complex64::new(mrr.re, 0.0));
                m.set(p, r, Z0);
                m.set(r, p, Z0);

                // Q <- Q U.
                for k in 0..d {
                    let qkp = q.get(k, p);
                    let qkr = q.get(k, r);
                    q.set(k, p, qkp * c + qkr * se_neg);
                    q.set(k, r, qkr * c - qkp * se_pos);
                }
            }
        }
    }
    let vals = (0..d).map(|i| m.get(i, i).re).collect();
    (vals, q)
}

/// QR-based Haar-random unitary. Modified Gram-Schmidt with positive real
/// diagonal normalization fixes the R gauge, so the resulting Q is Haar
/// distributed; a second orthogonalization pass keeps the columns
/// orthonormal to ~1e-14.
pub fn haar_unitary(n: usize, seed: &[u8]) -> Result<CMat> {
    haar_unitary_limited(n, seed, DEFAULT_DENSE_LIMIT)
}

pub fn haar_unitary_limited(n: usize, seed: &[u8], dense_limit: usize) -> Result<CMat> {
    if n > dense_limit {
        return Err(QsaError::CapacityExceeded(n, dense_limit));
    }
    let d = 1usize << n;
    let mut rng = SeedStream::new(seed, "haar-unitary");
    let mut cols: Vec<Vec<Complex64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| Complex64::new(rng.next_normal(), rng.next_normal()))
                .collect()
        })
        .collect();
    for j in 0..d {
        for _pass in 0..2 {
            for i in 0..j {
                let mut proj = Z0;
                for r in 0..d {
                    proj += cols[i][r].conj() * cols[j][r];
                }
                for r in 0..d {
                    let v = cols[i][r];
                    cols[j][r] -= proj * v;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let inv = 1.0 / norm;
        for v in &mut cols[j] {
            *v *= inv;
        }
    }
    let mut m = CMat::zeros(d);
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            m.set(r, c, *v);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gate::Gate;

    fn random_hermitian(d: usize, seed: u64) -> CMat {
        let mut rng = SeedStream::from_u64(seed, "herm");
        let mut m = CMat::zeros(d);
        for r in 0..d {
            for c in r..d {
                if r == c {
                    m.set(r, c, Complex64::new(rng.next_normal(), 0.0));
                } else {
                    let v = Complex64::new(rng.next_normal(), rng.next_normal());
                    m.set(r, c, v);
                    m.set(c, r, v.conj());
                }
            }
        }
        m
    }

    #[test]
    fn eigh_reconstructs() {
        for seed in [1u64, 2, 3] {
            let a = random_hermitian(24, seed);
            let (vals, q) = eigh(&a);
            // A Q = Q diag(vals)
            let aq = a.mul(&q);
            for c in 0..a.dim {
                for r in 0..a.dim {
                    let expect = q.get(r, c) * vals[c];
                    assert!((aq.get(r, c) - expect).norm() < 1e-9);
                }
            }
            assert!(q.unitarity_deviation() < 1e-10);
        }
    }

    #[test]
    fn eig_unitary_identity() {
        let eig = eig_unitary(&CMat::identity(8)).unwrap();
        for p in &eig.phases {
            assert!(*p < 1e-9 || (TAU - p) < 1e-9);
        }
    }

    #[test]
    fn eig_unitary_diagonal_phases() {
        let mut u = CMat::identity(2);
        u.set(1, 1, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2));
        let eig = eig_unitary(&u).unwrap();
        assert!(eig.phases[0].abs() < 1e-10);
        assert!((eig.phases[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        // basis eigenvectors
        assert!((eig.basis.get(0, 0).norm() - 1.0).abs() < 1e-10);
        assert!((eig.basis.get(1, 1).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eig_unitary_reconstruction_haar() {
        // sum_j e^{i theta_j} v_j v_j^dag == U
        let u = haar_unitary(3, b"recon").unwrap();
        let eig = eig_unitary(&u).unwrap();
        let d = u.dim;
        let mut rebuilt = CMat::zeros(d);
        for j in 0..d {
            let lam = Complex64::from_polar(1.0, eig.phases[j]);
            let v = eig.basis.column(j);
            for r in 0..d {
                for c in 0..d {
                    let add = lam * v[r] * v[c].conj();
                    let cur = rebuilt.get(r, c);
                    rebuilt.set(r, c, cur + add);
                }
            }
        }
        assert!(rebuilt.max_abs_diff(&u) < 1e-7);
        assert!(eig.basis.unitarity_deviation() < 1e-7);
    }

    #[test]
    fn eig_unitary_rejects_nonunitary() {
        let mut m = CMat::identity(4);
        m.set(0, 0, Complex64::new(1.4, 0.0));
        assert!(matches!(eig_unitary(&m), Err(QsaError::NotUnitary { .. })));
    }

    #[test]
    fn haar_deterministic_and_unitary() {
        let a = haar_unitary(3, b"seed-x").unwrap();
        let b = haar_unitary(3, b"seed-x").unwrap();
        assert_eq!(a, b);
        assert!(a.unitarity_deviation() < 1e-10);
        assert!(haar_unitary(2, b"seed-y").unwrap() != haar_unitary(2, b"seed-z").unwrap());
    }

    #[test]
    fn haar_first_entry_moment() {
        // E |U_00|^2 = 1/d for Haar; n=3 -> 1/8 within +-0.01 over 2000 draws
        let mut acc = 0.0;
        for i in 0..2000u32 {
            let u = haar_unitary(3, &i.to_be_bytes()).unwrap();
            acc += u.get(0, 0).norm_sqr();
        }
        let mean = acc / 2000.0;
        assert!((mean - 0.125).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn circuit_matrix_of_x() {
        let mut c = Circuit::new(1);
        c.push(Gate::x(0));
        let m = circuit_to_matrix(&c).unwrap();
        assert!((m.get(0, 1).re - 1.0).abs() < 1e-12);
        assert!((m.get(1, 0).re - 1.0).abs() < 1e-12);
        assert!(m.get(0, 0).norm() < 1e-12);
    }

    #[test]
    fn circuit_matrix_of_rz_pi() {
        let mut c = Circuit::new(1);
        c.push(Gate::rz(0, std::f64::consts::PI));
        let m = circuit_to_matrix(&c).unwrap();
        assert!((m.get(0, 0) - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((m.get(1, 1) - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn dense_limit_enforced() {
        let c = Circuit::new(13);
        assert!(matches!(
            circuit_to_matrix(&c),
            Err(QsaError::CapacityExceeded(13, _))
        ));
    }
}
