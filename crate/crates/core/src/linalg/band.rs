//! Banded hermitian matrices and their near-zero spectral windows.
//!
//! Discretized junction operators have a few thousand to a few tens of
//! thousands of rows but only `O(N)` bandwidth. The eigenpairs inside a small
//! energy window are obtained by shift-invert subspace iteration on a banded
//! LU factorization followed by Rayleigh-Ritz; small matrices fall back to a
//! dense hermitian eigendecomposition.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{hermitian_eig_unchecked, CMatrix, ZERO};
use crate::error::{Error, Result};

/// Hermitian matrix with `H[i][j] = 0` for `|i − j| > kd`, lower band stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedHermitian {
    n: usize,
    kd: usize,
    // lower[i * (kd + 1) + (i - j)] = H[i][j] for i - kd <= j <= i
    lower: Vec<Complex64>,
}

impl BandedHermitian {
    pub fn zeros(n: usize, kd: usize) -> Self {
        BandedHermitian { n, kd, lower: vec![ZERO; n * (kd + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    fn slot(&self, i: usize, j: usize) -> Option<(usize, bool)> {
        let (r, c, conj) = if i >= j { (i, j, false) } else { (j, i, true) };
        (r < self.n && r - c <= self.kd).then_some((r * (self.kd + 1) + (r - c), conj))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.slot(i, j) {
            Some((k, false)) => self.lower[k],
            Some((k, true)) => self.lower[k].conj(),
            None => ZERO,
        }
    }

    /// Adds `v` at `(i, j)` and `conj(v)` at `(j, i)`. On the diagonal only the
    /// real part is kept.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) -> Result<()> {
        let (k, conj) = self
            .slot(i, j)
            .ok_or_else(|| Error::BadSpec(format!("entry ({i}, {j}) outside band {}", self.kd)))?;
        if i == j {
            self.lower[k] += Complex64::new(v.re, 0.0);
        } else if conj {
            self.lower[k] += v.conj();
        } else {
            self.lower[k] += v;
        }
        Ok(())
    }

    /// `H X` for a dense block of column vectors.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut y = CMatrix::zeros(self.n, x.ncols());
        for col in 0..x.ncols() {
            for i in 0..self.n {
                let base = i * (self.kd + 1);
                let xi = x[(i, col)];
                y[(i, col)] += self.lower[base] * xi;
                for d in 1..=self.kd.min(i) {
                    let j = i - d;
                    let h = self.lower[base + d];
                    y[(i, col)] += h * x[(j, col)];
                    y[(j, col)] += h.conj() * xi;
                }
            }
        }
        y
    }

    pub fn to_dense(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Upper bound on the spectral radius (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kd);
                let hi = (i + self.kd).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).norm()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// LU factorization with partial pivoting of `H − σ I` in general band storage.
struct BandLu {
    n: usize,
    kl: usize,
    kv: usize,
    // ab[(kv + i - j) + j * ldab] = A[i][j]
    ab: Vec<Complex64>,
    ldab: usize,
    piv: Vec<usize>,
}

impl BandLu {
    fn factor(h: &BandedHermitian, sigma: f64) -> Result<Self> {
        let n = h.n;
        let kl = h.kd;
        let ku = h.kd;
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut lu = BandLu { n, kl, kv, ab: vec![ZERO; ldab * n], ldab, piv: vec![0; n] };
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                let mut v = h.get(i, j);
                if i == j {
                    v -= sigma;
                }
                *lu.at(i, j) = v;
            }
        }
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = lu.get(j, j).norm();
            for r in 1..=km {
                let v = lu.get(j + r, j).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            lu.piv[j] = j + p;
            if best == 0.0 {
                return Err(Error::Singular(format!("zero pivot at column {j}")));
            }
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let a = lu.get(j, c);
                    let b = lu.get(j + p, c);
                    *lu.at(j, c) = b;
                    *lu.at(j + p, c) = a;
                }
            }
            let d = lu.get(j, j);
            for r in 1..=km {
                *lu.at(j + r, j) /= d;
            }
            for c in (j + 1)..=ju {
                let f = lu.get(j, c);
                if f != ZERO {
                    for r in 1..=km {
                        let l = lu.get(j + r, j);
                        *lu.at(j + r, c) -= l * f;
                    }
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (self.kv + i - j) + j * self.ldab
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Complex64 {
        self.ab[self.idx(i, j)]
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut Complex64 {
        let k = self.idx(i, j);
        &mut self.ab[k]
    }

    fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            for r in 1..=km {
                b[j + r] -= self.get(j + r, j) * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.get(j, j);
            let bj = b[j];
            for i in j.saturating_sub(self.kv)..j {
                b[i] -= self.get(i, j) * bj;
            }
        }
    }

    fn solve(&self, x: &CMatrix) -> CMatrix {
        let mut y = x.clone();
        for mut col in y.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        y
    }
}

/// Eigenpairs of `H` with `|λ| ≤ window`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct WindowSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: CMatrix,
}

/// Size below which the window is extracted from a dense eigendecomposition.
pub const DENSE_CUTOFF: usize = 400;

/// All eigenpairs of `h` in `[−window, window]`.
pub fn window_eigenpairs(h: &BandedHermitian, window: f64, seed: u64) -> Result<WindowSpectrum> {
    if !(window > 0.0) {
        return Err(Error::BadSpec(format!("energy window must be positive, got {window}")));
    }
    if h.n <= DENSE_CUTOFF {
        return Ok(dense_window(&h.to_dense(), window));
    }
    shift_invert_window(h, window, seed)
}

/// Dense reference path: full diagonalization, then selection.
pub fn dense_window(h: &CMatrix, window: f64) -> WindowSpectrum {
    let (vals, vecs) = hermitian_eig_unchecked(h);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k].abs() <= window).collect();
    let cols: Vec<DVector<Complex64>> = keep.iter().map(|&k| vecs.columns().column(k).into_owned()).collect();
    let eigenvectors = if cols.is_empty() { CMatrix::zeros(h.nrows(), 0) } else { CMatrix::from_columns(&cols) };
    WindowSpectrum { eigenvalues: keep.iter().map(|&k| vals[k]).collect(), eigenvectors }
}

fn random_block(n: usize, p: usize, rng: &mut StdRng) -> CMatrix {
    CMatrix::from_fn(n, p, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn orthonormal_columns(y: &CMatrix) -> CMatrix {
    let q = y.clone().qr().q();
    // A second pass restores orthogonality lost to strongly graded columns.
    q.qr().q()
}

fn shift_invert_window(h: &BandedHermitian, window: f64, seed: u64) -> Result<WindowSpectrum> {
    let n = h.n;
    let hnorm = h.norm_bound().max(1.0);
    let res_tol = 1e-10 * hnorm;
    // Off-centre shift keeps H − σ nonsingular when H has an exact zero mode.
    let sigma = 0.0137 * window;
    let lu = BandLu::factor(h, sigma).or_else(|_| BandLu::factor(h, -0.0291 * window))?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut p = 12.min(n);
    let mut x = random_block(n, p, &mut rng);
    const MAX_ITER: usize = 400;
    const MIN_ITER: usize = 4;
    for iter in 0..MAX_ITER {
        let y = orthonormal_columns(&lu.solve(&x));
        let hy = h.apply(&y);
        let small = y.adjoint() * &hy;
        let (theta, z) = hermitian_eig_unchecked(&small);
        let z = z.into_columns();
        let ritz = &y * &z;
        let hritz = &hy * &z;
        let mut inside = Vec::new();
        let mut outside = 0usize;
        let mut converged = true;
        for k in 0..theta.len() {
            let r = (hritz.column(k) - ritz.column(k) * Complex64::new(theta[k], 0.0)).norm();
            if theta[k].abs() <= window {
                inside.push(k);
                converged &= r <= res_tol;
            } else if theta[k].abs() - r > window {
                outside += 1;
            }
        }
        if inside.len() + 2 > p {
            if p == n {
                return Ok(dense_window(&h.to_dense(), window));
            }
            let extra = p.min(n - p);
            let mut grown = CMatrix::zeros(n, p + extra);
            grown.columns_mut(0, p).copy_from(&ritz);
            grown.columns_mut(p, extra).copy_from(&random_block(n, extra, &mut rng));
            p += extra;
            x = grown;
            continue;
        }
        if converged && outside >= 2 && iter + 1 >= MIN_ITER {
            let cols: Vec<DVector<Complex64>> = inside.iter().map(|&k| ritz.column(k).into_owned()).collect();
            let eigenvectors = if cols.is_empty() { CMatrix::zeros(n, 0) } else { CMatrix::from_columns(&cols) };
            return Ok(WindowSpectrum { eigenvalues: inside.iter().map(|&k| theta[k]).collect(), eigenvectors });
        }
        x = ritz;
    }
    Err(Error::NotConverged(format!("window eigenpairs after {MAX_ITER} iterations (block {p})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, ONE};

    fn chain(n: usize, hop: &dyn Fn(usize) -> f64) -> BandedHermitian {
        let mut h = BandedHermitian::zeros(n, 1);
        for i in 0..n - 1 {
            h.add(i, i + 1, Complex64::new(hop(i), 0.0)).unwrap();
        }
        h
    }

    #[test]
    fn storage_is_hermitian() {
        let mut h = BandedHermitian::zeros(4, 2);
        h.add(0, 2, Complex64::new(1.0, 2.0)).unwrap();
        h.add(3, 3, Complex64::new(5.0, 7.0)).unwrap();
        let d = h.to_dense();
        assert_eq!(d[(0, 2)], Complex64::new(1.0, 2.0));
        assert_eq!(d[(2, 0)], Complex64::new(1.0, -2.0));
        assert_eq!(d[(3, 3)], Complex64::new(5.0, 0.0));
        assert!(h.add(0, 3, ONE).is_err());
    }

    #[test]
    fn apply_matches_dense() {
        let mut rng = StdRng::seed_from_u64(1);
        let mut h = BandedHermitian::zeros(30, 3);
        for i in 0..30 {
            for j in i..(i + 4).min(30) {
                h.add(j, i, Complex64::new(rng.random::<f64>(), rng.random::<f64>())).unwrap();
            }
        }
        let x = random_block(30, 3, &mut rng);
        assert!(max_abs(&(h.apply(&x) - h.to_dense() * &x)) < 1e-13);
    }

    #[test]
    fn band_lu_solves() {
        let mut rng = StdRng::seed_from_u64(2);
        let mut h = BandedHermitian::zeros(50, 2);
        for i in 0..50 {
            for j in i..(i + 3).min(50) {
                h.add(j, i, Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).unwrap();
            }
        }
        let lu = BandLu::factor(&h, 0.3).unwrap();
        let b = random_block(50, 2, &mut rng);
        let x = lu.solve(&b);
        let a = h.to_dense() - CMatrix::identity(50, 50) * Complex64::new(0.3, 0.0);
        assert!(max_abs(&(a * x - b)) < 1e-10);
    }

    #[test]
    fn shift_invert_agrees_with_dense() {
        // SSH chain with an odd number of sites has one exact zero mode; the
        // uniform part contributes states near the window edge.
        let n = 601;
        let h = chain(n, &|i| if i % 2 == 0 { 1.0 } else { 1.6 });
        let w = 0.3;
        let fast = shift_invert_window(&h, w, 7).unwrap();
        let slow = dense_window(&h.to_dense(), w);
        assert_eq!(fast.eigenvalues.len(), slow.eigenvalues.len());
        for (a, b) in fast.eigenvalues.iter().zip(&slow.eigenvalues) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn shift_invert_grows_block() {
        // Uniform chain: many states inside a wide window.
        let n = 500;
        let h = chain(n, &|_| 1.0);
        let w = 0.2;
        let fast = shift_invert_window(&h, w, 3).unwrap();
        let slow = dense_window(&h.to_dense(), w);
        assert_eq!(fast.eigenvalues.len(), slow.eigenvalues.len());
        assert!(fast.eigenvalues.len() > 20);
    }
}
