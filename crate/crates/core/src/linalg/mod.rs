//! Dense complex and real matrix primitives.
//!
//! Hermitian eigendecomposition, SVD and complex Schur come from `nalgebra`;
//! the Schur reordering, the Parlett-Reid Pfaffian and the principal-branch
//! log-trace are implemented here. Rank and kernel decisions are all
//! threshold based, driven by [`Tolerances`].

pub mod band;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Numerical thresholds shared by every rank, kernel and subspace decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative singular-value threshold for numerical rank.
    pub rank_tol: f64,
    /// Distance at which an eigenvalue counts as equal to a target value.
    pub eig_tol: f64,
    /// Orthonormality, symmetry and subspace-equality threshold.
    pub frame_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank_tol: 1e-9, eig_tol: 1e-8, frame_tol: 1e-10 }
    }
}

impl Tolerances {
    pub fn new(rank_tol: f64, eig_tol: f64, frame_tol: f64) -> Result<Self> {
        for (name, v) in [("rank_tol", rank_tol), ("eig_tol", eig_tol), ("frame_tol", frame_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::BadInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Tolerances { rank_tol, eig_tol, frame_tol })
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Entrywise complex conjugate.
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

/// Real part, provided the imaginary part is below `tol` (absolute).
pub fn real_part(m: &CMatrix, tol: f64) -> Option<RMatrix> {
    let im = m.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    (im <= tol).then(|| m.map(|z| z.re))
}

/// `‖U*U − I‖_max`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

/// `‖A − A*‖_max`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(a - a.adjoint()))
}

/// Block diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = CMatrix::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

/// `[[a, b], [c, d]]` from four equally sized square blocks.
pub fn blocks2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Orthonormal set of columns spanning a subspace of `C^ambient_dim`.
/// Rank zero is allowed.
#[derive(Debug, Clone)]
pub struct Frame {
    columns: CMatrix,
}

impl Frame {
    /// Wraps `columns` after checking orthonormality within `tol.frame_tol`.
    pub fn new(columns: CMatrix, tol: &Tolerances) -> Result<Self> {
        let f = Frame { columns };
        let d = f.orthonormality_defect();
        if d >= tol.frame_tol {
            return Err(Error::BadInput(format!("frame columns not orthonormal (defect {d:.3e})")));
        }
        Ok(f)
    }

    pub(crate) fn from_orthonormal(columns: CMatrix) -> Self {
        Frame { columns }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Frame { columns: CMatrix::zeros(ambient_dim, 0) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &CMatrix {
        &self.columns
    }

    pub fn into_columns(self) -> CMatrix {
        self.columns
    }

    pub fn orthonormality_defect(&self) -> f64 {
        if self.rank() == 0 {
            return 0.0;
        }
        max_abs(&(self.columns.adjoint() * &self.columns - identity(self.rank())))
    }

    /// Orthogonal projector `F F*`.
    pub fn projector(&self) -> CMatrix {
        &self.columns * self.columns.adjoint()
    }
}

/// Max-entry distance between the orthogonal projectors of two frames.
pub fn projector_distance(a: &Frame, b: &Frame) -> Result<f64> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    Ok(max_abs(&(a.projector() - b.projector())))
}

/// Eigenvalues ascending with an orthonormal eigenvector frame.
pub fn hermitian_eig(a: &CMatrix, tol: &Tolerances) -> Result<(Vec<f64>, Frame)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", a.nrows(), a.ncols())));
    }
    let defect = hermiticity_defect(a);
    if defect >= tol.frame_tol * max_abs(a).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(hermitian_eig_unchecked(a))
}

pub(crate) fn hermitian_eig_unchecked(a: &CMatrix) -> (Vec<f64>, Frame) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), Frame::empty(0));
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, Frame::from_orthonormal(vecs))
}

/// Applies `f` to the spectrum of a hermitian matrix.
pub(crate) fn hermitian_function(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eig_unchecked(a);
    let v = vecs.columns();
    let mut scaled = v.clone();
    for (k, &lam) in vals.iter().enumerate() {
        let s = f(lam);
        scaled.column_mut(k).scale_mut(s);
    }
    scaled * v.adjoint()
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Smallest singular value of a square matrix (0 for the empty matrix).
pub fn min_singular_value(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Orthonormal frame of the numerically significant column space.
///
/// Columns are processed in order with two passes of classical Gram-Schmidt,
/// so well-conditioned inputs keep their column order (identity stays the
/// identity). If Gram-Schmidt disagrees with the SVD rank, the left singular
/// vectors are used instead.
pub fn orthonormalize(vectors: &CMatrix, tol: &Tolerances) -> Result<Frame> {
    let (n, p) = vectors.shape();
    if n == 0 || p == 0 {
        return Err(Error::ZeroRank);
    }
    let svd = vectors.clone().svd(true, false);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(Error::ZeroRank);
    }
    let threshold = tol.rank_tol * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > threshold).count();
    if rank == 0 {
        return Err(Error::ZeroRank);
    }

    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(rank);
    for j in 0..p {
        let mut w = vectors.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w.axpy(-c, b, ONE);
            }
        }
        let nw = w.norm();
        if nw > threshold.max(1e-3 * vectors.column(j).norm()) && basis.len() < n {
            basis.push(w.unscale(nw));
        }
    }
    if basis.len() == rank {
        let cols = CMatrix::from_columns(&basis);
        return Ok(Frame::from_orthonormal(cols));
    }
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let cols: Vec<_> = order[..rank].iter().map(|&k| u.column(k).into_owned()).collect();
    Ok(Frame::from_orthonormal(CMatrix::from_columns(&cols)))
}

/// Number of principal angles between the two subspaces that vanish, i.e.
/// singular values of `F1* F2` within `eig_tol` of 1.
pub fn subspace_intersection_dim(f1: &Frame, f2: &Frame, tol: &Tolerances) -> Result<usize> {
    if f1.ambient_dim() != f2.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            f1.ambient_dim(),
            f2.ambient_dim()
        )));
    }
    if f1.rank() == 0 || f2.rank() == 0 {
        return Ok(0);
    }
    let m = f1.columns().adjoint() * f2.columns();
    Ok(singular_values(&m).iter().filter(|&&s| (s - 1.0).abs() <= tol.eig_tol).count())
}

/// Complex Schur form `M = Q T Q*`.
///
/// With the deflation threshold at one ulp the shifted QR iteration stalls on
/// nearly scalar blocks (unitaries with a repeated eigenvalue are typical), so
/// a few ulps are used. Each attempt is capped; a stalled one is retried with
/// a looser threshold on a seeded random unitary similarity of `M`.
pub fn schur(m: &CMatrix) -> (CMatrix, CMatrix) {
    use nalgebra::Schur;
    use rand::{Rng, SeedableRng};
    let n = m.nrows();
    let cap = 200 * n.max(1);
    if let Some(s) = Schur::try_new(m.clone(), 4.0 * f64::EPSILON, cap) {
        return s.unpack();
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5c4u64);
    for attempt in 0..16 {
        let eps = 1e-14 * 10f64.powi(attempt / 4);
        let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let z = g.qr().q();
        if let Some(s) = Schur::try_new(z.adjoint() * m * &z, eps, cap) {
            let (q, t) = s.unpack();
            return (z * q, t);
        }
    }
    panic!("complex Schur iteration failed to converge on a {n}x{n} matrix");
}

/// Eigenvalues of a general square matrix from the diagonal of its complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let t = schur(m).1;
    (0..m.nrows()).map(|i| t[(i, i)]).collect()
}

/// Complex Schur form `M = Q T Q*` whose leading diagonal entries are the
/// ones satisfying `select`, in their original relative order. Returns
/// `(Q, T, number_selected)`.
pub fn ordered_schur(m: &CMatrix, select: impl Fn(Complex64) -> bool) -> (CMatrix, CMatrix, usize) {
    let (mut q, mut t) = schur(m);
    let n = t.nrows();
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = ZERO;
        }
    }
    let mut placed = 0;
    for k in 0..n {
        if select(t[(k, k)]) {
            let mut pos = k;
            while pos > placed {
                swap_schur(&mut q, &mut t, pos - 1);
                pos -= 1;
            }
            placed += 1;
        }
    }
    (q, t, placed)
}

/// Exchanges the adjacent diagonal entries `k`, `k+1` of the upper triangular `T`
/// with a unitary rotation, updating the Schur vectors.
fn swap_schur(q: &mut CMatrix, t: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let x1 = t[(k, k + 1)];
    let x2 = b - a;
    let nx = (x1.norm_sqr() + x2.norm_sqr()).sqrt();
    if nx == 0.0 {
        return;
    }
    let (x1, x2) = (x1 / nx, x2 / nx);
    // G = [[x1, -conj x2], [x2, conj x1]]; its first column is the eigenvector for b.
    let g = [[x1, -x2.conj()], [x2, x1.conj()]];
    for c in k..n {
        let r0 = t[(k, c)];
        let r1 = t[(k + 1, c)];
        t[(k, c)] = g[0][0].conj() * r0 + g[1][0].conj() * r1;
        t[(k + 1, c)] = g[0][1].conj() * r0 + g[1][1].conj() * r1;
    }
    for r in 0..(k + 2) {
        let c0 = t[(r, k)];
        let c1 = t[(r, k + 1)];
        t[(r, k)] = c0 * g[0][0] + c1 * g[1][0];
        t[(r, k + 1)] = c0 * g[0][1] + c1 * g[1][1];
    }
    for r in 0..n {
        let c0 = q[(r, k)];
        let c1 = q[(r, k + 1)];
        q[(r, k)] = c0 * g[0][0] + c1 * g[1][0];
        q[(r, k + 1)] = c0 * g[0][1] + c1 * g[1][1];
    }
    t[(k + 1, k)] = ZERO;
    t[(k, k)] = b;
    t[(k + 1, k + 1)] = a;
}

/// Invariant subspaces of `M` for eigenvalues inside and outside the unit circle.
#[derive(Debug, Clone)]
pub struct StableSplit {
    pub stable: Frame,
    pub unstable: Frame,
    pub unit_circle_count: usize,
    /// Smallest `| |λ| − 1 |` over the spectrum.
    pub circle_distance: f64,
}

/// Stable/unstable invariant subspaces through ordered Schur decompositions,
/// so non-diagonalizable `M` is handled.
pub fn stable_unstable_split(m: &CMatrix, tol: &Tolerances) -> Result<StableSplit> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch("monodromy must be square and non-empty".into()));
    }
    let sv = singular_values(m);
    let smax = sv[0];
    let smin = *sv.last().unwrap();
    if !(smin > tol.rank_tol * smax) {
        return Err(Error::Singular(format!("smallest singular value {smin:.3e}")));
    }
    let n = m.nrows();
    let inside = |z: Complex64| z.norm() < 1.0 - tol.eig_tol;
    let outside = |z: Complex64| z.norm() > 1.0 + tol.eig_tol;

    let (qs, ts, ns) = ordered_schur(m, inside);
    let (qu, _, nu) = ordered_schur(m, outside);
    let circle_distance = (0..n).map(|i| (ts[(i, i)].norm() - 1.0).abs()).fold(f64::INFINITY, f64::min);
    Ok(StableSplit {
        stable: Frame::from_orthonormal(qs.columns(0, ns).into_owned()),
        unstable: Frame::from_orthonormal(qu.columns(0, nu).into_owned()),
        unit_circle_count: n - ns - nu,
        circle_distance,
    })
}

/// Pfaffian of a real antisymmetric matrix by Parlett-Reid elimination with
/// partial pivoting. `Pf([[0, 1], [-1, 0]]) = 1`.
pub fn pfaffian(a: &RMatrix, tol: &Tolerances) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let defect = max_abs_real(&(a + a.transpose()));
    if defect >= tol.frame_tol * max_abs_real(a).max(1.0) {
        return Err(Error::NotAntisymmetric(defect));
    }
    let mut m = (a - a.transpose()).scale(0.5);
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = m[(k + 1, k)].abs();
        for i in (k + 2)..n {
            if m[(i, k)].abs() > best {
                best = m[(i, k)].abs();
                kp = i;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = m[(k, k + 1)];
        if pivot == 0.0 {
            return Ok(0.0);
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = ((k + 2)..n).map(|j| m[(k, j)] / pivot).collect();
            let col: Vec<f64> = ((k + 2)..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}

/// `Tr log O` for a real orthogonal matrix, principal branch.
pub fn principal_log_trace(o: &RMatrix, tol: &Tolerances) -> Result<Complex64> {
    if !o.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", o.nrows(), o.ncols())));
    }
    let n = o.nrows();
    let defect = max_abs_real(&(o.transpose() * o - RMatrix::identity(n, n)));
    if defect >= tol.frame_tol * 10.0 {
        return Err(Error::NotUnitary(defect));
    }
    let mut sum = ZERO;
    for lam in eigenvalues(&to_complex(o)) {
        let d = (lam + ONE).norm();
        if d <= tol.eig_tol {
            return Err(Error::BranchCutHit(d));
        }
        sum += lam.ln();
    }
    Ok(sum)
}

/// Principal square root of a normal matrix via its (diagonal) Schur form.
pub(crate) fn normal_sqrt(m: &CMatrix) -> CMatrix {
    let (q, t) = schur(m);
    let n = m.nrows();
    let mut d = CMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = t[(i, i)].sqrt();
    }
    &q * d * q.adjoint()
}

/// Principal square root of a symmetric unitary matrix `X`, itself symmetric
/// and unitary, so that `X = R Rᵀ` with `R = √X`.
pub(crate) fn symmetric_unitary_sqrt(x: &CMatrix) -> CMatrix {
    let r = normal_sqrt(x);
    (&r + r.transpose()).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_eigenvalues() {
        let (vals, vecs) = hermitian_eig(&identity(3), &Tolerances::default()).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
        assert!(vecs.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let (vals, _) = hermitian_eig(&m, &Tolerances::default()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(hermitian_eig(&m, &Tolerances::default()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = StdRng::seed_from_u64(11);
        let h = sampling::random_hermitian(6, &mut rng);
        let (vals, vecs) = hermitian_eig(&h, &Tolerances::default()).unwrap();
        let v = vecs.columns();
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(6, vals.iter().map(|&x| c(x, 0.0))));
        assert!(max_abs(&(v * d * v.adjoint() - &h)) < 1e-10);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn collinear_columns_rank_one() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, c(2.0, 0.0), ZERO, ZERO]);
        let f = orthonormalize(&m, &Tolerances::default()).unwrap();
        assert_eq!(f.rank(), 1);
        assert!((f.columns()[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_columns_give_identity_frame() {
        let f = orthonormalize(&identity(4), &Tolerances::default()).unwrap();
        assert!(max_abs(&(f.columns() - identity(4))) < 1e-15);
    }

    #[test]
    fn zero_columns_rejected() {
        assert_eq!(orthonormalize(&CMatrix::zeros(3, 2), &Tolerances::default()).unwrap_err(), Error::ZeroRank);
    }

    #[test]
    fn random_full_rank_gram() {
        let mut rng = StdRng::seed_from_u64(5);
        let m = sampling::random_complex(8, 5, &mut rng);
        let f = orthonormalize(&m, &Tolerances::default()).unwrap();
        assert_eq!(f.rank(), 5);
        assert!(f.orthonormality_defect() < 1e-12);
        // Same span: projecting the input onto the frame loses nothing.
        assert!(max_abs(&(f.projector() * &m - &m)) < 1e-12);
    }

    fn unit(n: usize, k: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, 1);
        m[(k, 0)] = ONE;
        m
    }

    #[test]
    fn intersection_of_simple_subspaces() {
        let tol = Tolerances::default();
        let f = Frame::from_orthonormal(identity(4).columns(0, 2).into_owned());
        assert_eq!(subspace_intersection_dim(&f, &f, &tol).unwrap(), 2);
        let e1 = Frame::from_orthonormal(unit(4, 0));
        let e2 = Frame::from_orthonormal(unit(4, 1));
        assert_eq!(subspace_intersection_dim(&e1, &e2, &tol).unwrap(), 0);
        let e1_3 = Frame::from_orthonormal(unit(3, 0));
        assert!(matches!(subspace_intersection_dim(&e1, &e1_3, &tol), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn split_diagonal() {
        let tol = Tolerances::default();
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), ZERO, ZERO, c(2.0, 0.0)]);
        let s = stable_unstable_split(&m, &tol).unwrap();
        assert_eq!((s.stable.rank(), s.unstable.rank(), s.unit_circle_count), (1, 1, 0));
        assert!(s.stable.columns()[(0, 0)].norm() > 1.0 - 1e-14);
        assert!(s.unstable.columns()[(1, 0)].norm() > 1.0 - 1e-14);
    }

    #[test]
    fn split_ssh_shape() {
        let tol = Tolerances::default();
        let m = CMatrix::from_row_slice(2, 2, &[c(-0.5, 0.0), ZERO, ZERO, c(-2.0, 0.0)]);
        let s = stable_unstable_split(&m, &tol).unwrap();
        assert!(s.stable.columns()[(0, 0)].norm() > 1.0 - 1e-14);
        assert!(s.unstable.columns()[(1, 0)].norm() > 1.0 - 1e-14);
    }

    #[test]
    fn split_rotation_on_circle() {
        let tol = Tolerances::default();
        let th: f64 = 0.7;
        let m = CMatrix::from_row_slice(2, 2, &[c(th.cos(), 0.0), c(-th.sin(), 0.0), c(th.sin(), 0.0), c(th.cos(), 0.0)]);
        let s = stable_unstable_split(&m, &tol).unwrap();
        assert_eq!((s.stable.rank(), s.unstable.rank(), s.unit_circle_count), (0, 0, 2));
    }

    #[test]
    fn split_jordan_block() {
        // Non-diagonalizable: eigenvalue 1/2 with a Jordan block, plus 3.
        let tol = Tolerances::default();
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(3.0, 0.0), ONE, ZERO, ZERO, c(0.5, 0.0), ONE, ZERO, ZERO, c(0.5, 0.0)],
        );
        let s = stable_unstable_split(&m, &tol).unwrap();
        assert_eq!((s.stable.rank(), s.unstable.rank()), (2, 1));
        // Invariance: M maps the stable frame into its own span.
        let f = s.stable.columns();
        let mf = &m * f;
        assert!(max_abs(&(s.stable.projector() * &mf - &mf)) < 1e-12);
    }

    #[test]
    fn split_rejects_singular() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        assert!(matches!(stable_unstable_split(&m, &Tolerances::default()), Err(Error::Singular(_))));
    }

    #[test]
    fn pfaffian_small_cases() {
        let tol = Tolerances::default();
        let a = RMatrix::from_row_slice(2, 2, &[0.0, 2.5, -2.5, 0.0]);
        assert_eq!(pfaffian(&a, &tol).unwrap(), 2.5);
        let mut b = RMatrix::zeros(4, 4);
        b[(0, 1)] = 3.0;
        b[(1, 0)] = -3.0;
        b[(2, 3)] = -0.5;
        b[(3, 2)] = 0.5;
        assert!((pfaffian(&b, &tol).unwrap() + 1.5).abs() < 1e-15);
        assert_eq!(pfaffian(&RMatrix::zeros(3, 3), &tol).unwrap_err(), Error::OddDimension(3));
        let c = RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(pfaffian(&c, &tol), Err(Error::NotAntisymmetric(_))));
    }

    #[test]
    fn pfaffian_pivot_sign() {
        // Pf of [[0,0,1,0],[0,0,0,1],[-1,0,0,0],[0,-1,0,0]] is -1 (one transposition).
        let tol = Tolerances::default();
        let mut a = RMatrix::zeros(4, 4);
        a[(0, 2)] = 1.0;
        a[(2, 0)] = -1.0;
        a[(1, 3)] = 1.0;
        a[(3, 1)] = -1.0;
        assert!((pfaffian(&a, &tol).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pfaffian_squared_is_det() {
        let tol = Tolerances::default();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let g = sampling::random_real(6, 6, &mut rng);
            let a = &g - g.transpose();
            let pf = pfaffian(&a, &tol).unwrap();
            let det = a.determinant();
            assert!((pf * pf - det).abs() <= 1e-8 * det.abs().max(1e-300));
        }
    }

    #[test]
    fn log_trace_basic() {
        let tol = Tolerances::default();
        let z = principal_log_trace(&RMatrix::identity(4, 4), &tol).unwrap();
        assert!(z.norm() < 1e-14);
        let th: f64 = 2.9;
        let r = RMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!(principal_log_trace(&r, &tol).unwrap().norm() < 1e-12);
        let flip = RMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(principal_log_trace(&flip, &tol), Err(Error::BranchCutHit(_))));
    }

    #[test]
    fn log_trace_matches_pfaffian_product() {
        let tol = Tolerances::default();
        let mut rng = StdRng::seed_from_u64(21);
        let mut checked = 0;
        while checked < 10 {
            let a = sampling::random_antisymmetric_orthogonal(4, &mut rng);
            let b = sampling::random_antisymmetric_orthogonal(4, &mut rng);
            let Ok(lt) = principal_log_trace(&(a.transpose() * &b), &tol) else { continue };
            let lhs = pfaffian(&a, &tol).unwrap() * pfaffian(&b, &tol).unwrap();
            let rhs = (lt * 0.5).exp();
            assert!((rhs - Complex64::new(lhs, 0.0)).norm() < 1e-8);
            checked += 1;
        }
    }

    #[test]
    fn schur_of_nearly_scalar_unitary() {
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..50 {
            let v = crate::sampling::random_unitary(8, &mut rng);
            let u = &v * v.adjoint();
            let (q, t) = schur(&u);
            assert!(max_abs(&(&q * &t * q.adjoint() - &u)) < 1e-12);
        }
    }

    #[test]
    fn schur_of_cyclic_permutation() {
        let n = 5;
        let p = CMatrix::from_fn(n, n, |i, j| if i == (j + 1) % n { ONE } else { ZERO });
        let (q, t) = schur(&p);
        assert!(max_abs(&(&q * &t * q.adjoint() - &p)) < 1e-12);
        for k in 0..n {
            assert!((t[(k, k)].powi(n as i32) - ONE).norm() < 1e-10);
        }
    }

    #[test]
    fn ordered_schur_keeps_factorization() {
        let mut rng = StdRng::seed_from_u64(3);
        let m = sampling::random_complex(6, 6, &mut rng);
        let (q, t, k) = ordered_schur(&m, |z| z.re < 0.0);
        assert!(max_abs(&(&q * &t * q.adjoint() - &m)) < 1e-12);
        for i in 0..6 {
            assert_eq!(t[(i, i)].re < 0.0, i < k);
            for j in 0..i {
                assert_eq!(t[(i, j)], ZERO);
            }
        }
    }
}
