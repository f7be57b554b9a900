//! Boundary symplectic spaces `(C^{2N}, ω)` with `ω(x, y) = ⟨x, J y⟩`, their
//! Lagrangian planes, and the Leray correspondence between Lagrangian planes
//! and unitaries `U ∈ U(N)`.
//!
//! In the canonical coordinates of a [`CanonicalSplit`], `J` is
//! `diag(i A₊, −i A₋)` and every Lagrangian plane is the graph
//! `ℓ_U = {(x, √A₋⁻¹ U √A₊ x)}` of a unique unitary.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, hermitian_eig, hermitian_function, max_abs, min_singular_value, orthonormalize, singular_values,
    unitarity_defect, CMatrix, Frame, Tolerances, I, ONE,
};

/// Matrix `J` of a symplectic form, with `J* = −J` and `J` invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    j: CMatrix,
}

impl SymplecticForm {
    /// Validates `J* = −J` (relative to `‖J‖`) and invertibility.
    pub fn new(j: CMatrix, tol: &Tolerances) -> Result<Self> {
        if !j.is_square() || j.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!("J is {}x{}", j.nrows(), j.ncols())));
        }
        let scale = max_abs(&j);
        if scale == 0.0 {
            return Err(Error::Singular("J = 0".into()));
        }
        let defect = max_abs(&(&j + j.adjoint()));
        if defect >= tol.frame_tol * scale {
            return Err(Error::BadInput(format!("J is not anti-hermitian (residual {defect:.3e})")));
        }
        let sv = singular_values(&j);
        let smin = *sv.last().unwrap();
        if !(smin > tol.rank_tol * sv[0]) {
            return Err(Error::Singular(format!("J has smallest singular value {smin:.3e}")));
        }
        Ok(SymplecticForm { j })
    }

    /// `J₀ = diag(i I_N, −i I_N)`.
    pub fn standard(n: usize) -> Self {
        let mut j = CMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            j[(k, k)] = I;
            j[(n + k, n + k)] = -I;
        }
        SymplecticForm { j }
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.j
    }

    pub fn norm(&self) -> f64 {
        max_abs(&self.j)
    }

    /// `ω(x, y) = ⟨x, J y⟩` for single vectors stored as columns.
    pub fn omega(&self, x: &CMatrix, y: &CMatrix) -> Complex64 {
        (x.adjoint() * &self.j * y)[(0, 0)]
    }

    /// True if the two forms agree within `frame_tol` relative to `‖J‖`.
    pub fn approx_eq(&self, other: &SymplecticForm, tol: &Tolerances) -> bool {
        self.dim() == other.dim() && max_abs(&(&self.j - &other.j)) < tol.frame_tol * self.norm().max(other.norm())
    }
}

/// Unitary change of basis `Q` with `Q* J Q = diag(i A₊, −i A₋)`.
#[derive(Debug, Clone)]
pub struct CanonicalSplit {
    form: SymplecticForm,
    n: usize,
    q: CMatrix,
    a_plus: CMatrix,
    a_minus: CMatrix,
    sqrt_a_plus: CMatrix,
    inv_sqrt_a_plus: CMatrix,
    sqrt_a_minus: CMatrix,
    inv_sqrt_a_minus: CMatrix,
}

impl CanonicalSplit {
    pub fn form(&self) -> &SymplecticForm {
        &self.form
    }

    /// `N = dim K₊ = dim K₋`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_plus(&self) -> usize {
        self.n
    }

    pub fn n_minus(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn a_plus(&self) -> &CMatrix {
        &self.a_plus
    }

    pub fn a_minus(&self) -> &CMatrix {
        &self.a_minus
    }

    /// `‖Q*JQ − diag(iA₊, −iA₋)‖_max`.
    pub fn block_residual(&self) -> f64 {
        let n = self.n;
        let mut target = CMatrix::zeros(2 * n, 2 * n);
        target.view_mut((0, 0), (n, n)).copy_from(&(&self.a_plus * I));
        target.view_mut((n, n), (n, n)).copy_from(&(&self.a_minus * (-I)));
        max_abs(&(self.q.adjoint() * self.form.matrix() * &self.q - target))
    }

    /// True if both splits describe the same coordinates.
    pub fn same_as(&self, other: &CanonicalSplit, tol: &Tolerances) -> bool {
        self.n == other.n
            && self.form.approx_eq(&other.form, tol)
            && max_abs(&(&self.q - &other.q)) < tol.frame_tol.sqrt()
    }
}

/// Eigendecomposes `−iJ`; `K₊` (positive eigenvalues) comes first, each block
/// ordered by ascending `|λ|`. Inside a cluster of (numerically) equal
/// eigenvalues the basis is fixed by Gram-Schmidt on the projected standard
/// basis vectors, which gives `Q = I` whenever `−iJ` is already diagonal.
pub fn canonical_split(form: &SymplecticForm, tol: &Tolerances) -> Result<Arc<CanonicalSplit>> {
    let dim = form.dim();
    let h = form.matrix() * (-I);
    let (vals, vecs) = hermitian_eig(&h, tol)?;
    let n_minus = vals.iter().filter(|&&v| v < 0.0).count();
    let n_plus = dim - n_minus;
    if n_plus != n_minus {
        return Err(Error::NoLagrangianPlanes { n_plus, n_minus });
    }
    let n = n_plus;
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cluster_tol = tol.eig_tol * scale;

    // Positive block ascending; negative block by ascending |λ|, i.e. reversed.
    let plus_idx: Vec<usize> = (n_minus..dim).collect();
    let minus_idx: Vec<usize> = (0..n_minus).rev().collect();
    let mut columns = Vec::with_capacity(dim);
    for idx in [plus_idx, minus_idx] {
        let mut start = 0;
        while start < idx.len() {
            let mut end = start + 1;
            while end < idx.len() && (vals[idx[end]] - vals[idx[end - 1]]).abs() <= cluster_tol {
                end += 1;
            }
            let cluster: Vec<_> = idx[start..end].iter().map(|&k| vecs.columns().column(k).into_owned()).collect();
            columns.extend(cluster_basis(&CMatrix::from_columns(&cluster)));
            start = end;
        }
    }
    let q = CMatrix::from_columns(&columns);
    let qp = q.columns(0, n).into_owned();
    let qm = q.columns(n, n).into_owned();
    let herm = |m: CMatrix| (&m + m.adjoint()).scale(0.5);
    let a_plus = herm(qp.adjoint() * &h * &qp);
    let a_minus = herm(qm.adjoint() * &h * &qm * Complex64::new(-1.0, 0.0));
    Ok(Arc::new(CanonicalSplit {
        form: form.clone(),
        n,
        sqrt_a_plus: hermitian_function(&a_plus, f64::sqrt),
        inv_sqrt_a_plus: hermitian_function(&a_plus, |x| 1.0 / x.sqrt()),
        sqrt_a_minus: hermitian_function(&a_minus, f64::sqrt),
        inv_sqrt_a_minus: hermitian_function(&a_minus, |x| 1.0 / x.sqrt()),
        q,
        a_plus,
        a_minus,
    }))
}

/// Canonical orthonormal basis of the column span of `v` (orthonormal input):
/// greedy Gram-Schmidt on `P e_i` picking the largest residual, ties to the
/// lowest index.
fn cluster_basis(v: &CMatrix) -> Vec<nalgebra::DVector<Complex64>> {
    let (dim, d) = v.shape();
    let mut chosen: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(d);
    // Candidate i is P e_i = V (row i of V)*.
    let mut candidates: Vec<nalgebra::DVector<Complex64>> =
        (0..dim).map(|i| v * v.row(i).adjoint()).collect();
    while chosen.len() < d {
        for c in candidates.iter_mut() {
            if let Some(last) = chosen.last() {
                let p = last.dotc(c);
                c.axpy(-p, last, ONE);
            }
        }
        let norms: Vec<f64> = candidates.iter().map(|c| c.norm()).collect();
        let best = norms.iter().cloned().fold(0.0, f64::max);
        let pick = norms.iter().position(|&x| x >= best * (1.0 - 1e-8)).unwrap();
        let mut w = candidates[pick].clone();
        for b in &chosen {
            let p = b.dotc(&w);
            w.axpy(-p, b, ONE);
        }
        let nw = w.norm();
        chosen.push(w.unscale(nw));
    }
    chosen
}

/// Result of [`is_lagrangian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianCheck {
    /// `‖F* J F‖_max / ‖J‖_max`.
    pub isotropy_defect: f64,
    pub lagrangian: bool,
}

pub fn is_lagrangian(frame: &Frame, form: &SymplecticForm, tol: &Tolerances) -> Result<LagrangianCheck> {
    if frame.ambient_dim() != form.dim() {
        return Err(Error::DimensionMismatch(format!(
            "frame in C^{} but form on C^{}",
            frame.ambient_dim(),
            form.dim()
        )));
    }
    let f = frame.columns();
    let defect = if frame.rank() == 0 { 0.0 } else { max_abs(&(f.adjoint() * form.matrix() * f)) / form.norm() };
    Ok(LagrangianCheck {
        isotropy_defect: defect,
        lagrangian: defect < tol.frame_tol && 2 * frame.rank() == form.dim(),
    })
}

/// Orthonormal frame of a half-dimensional isotropic subspace.
#[derive(Debug, Clone)]
pub struct LagrangianPlane {
    form: SymplecticForm,
    frame: Frame,
}

impl LagrangianPlane {
    pub fn new(frame: Frame, form: &SymplecticForm, tol: &Tolerances) -> Result<Self> {
        let check = is_lagrangian(&frame, form, tol)?;
        if !check.lagrangian {
            return Err(Error::NotLagrangian(format!(
                "rank {} in dimension {}, isotropy defect {:.3e}",
                frame.rank(),
                form.dim(),
                check.isotropy_defect
            )));
        }
        Ok(LagrangianPlane { form: form.clone(), frame })
    }

    /// Orthonormalizes the spanning columns first.
    pub fn from_span(vectors: &CMatrix, form: &SymplecticForm, tol: &Tolerances) -> Result<Self> {
        Self::new(orthonormalize(vectors, tol)?, form, tol)
    }

    pub fn form(&self) -> &SymplecticForm {
        &self.form
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn isotropy_defect(&self) -> f64 {
        let f = self.frame.columns();
        max_abs(&(f.adjoint() * self.form.matrix() * f)) / self.form.norm()
    }
}

/// Unitary `U` attached to a Lagrangian plane in the coordinates of `split`.
#[derive(Debug, Clone)]
pub struct LerayUnitary {
    split: Arc<CanonicalSplit>,
    u: CMatrix,
}

impl LerayUnitary {
    pub fn new(split: Arc<CanonicalSplit>, u: CMatrix, tol: &Tolerances) -> Result<Self> {
        if u.nrows() != split.n || u.ncols() != split.n {
            return Err(Error::DimensionMismatch(format!("U is {}x{}, split has N = {}", u.nrows(), u.ncols(), split.n)));
        }
        let d = unitarity_defect(&u);
        if d >= tol.frame_tol {
            return Err(Error::NotUnitary(d));
        }
        Ok(LerayUnitary { split, u })
    }

    pub fn split(&self) -> &Arc<CanonicalSplit> {
        &self.split
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn n(&self) -> usize {
        self.split.n
    }
}

/// Reads off the unitary of a Lagrangian plane: in canonical coordinates the
/// frame is `(y₊, y₋)`, the graph map is `V = y₋ y₊⁻¹` and `U = √A₋ V √A₊⁻¹`.
pub fn plane_to_unitary(plane: &LagrangianPlane, split: &Arc<CanonicalSplit>, tol: &Tolerances) -> Result<LerayUnitary> {
    if !plane.form.approx_eq(&split.form, tol) {
        return Err(Error::SplitMismatch);
    }
    let check = is_lagrangian(&plane.frame, &split.form, tol)?;
    if !check.lagrangian {
        return Err(Error::NotLagrangian(format!("isotropy defect {:.3e}", check.isotropy_defect)));
    }
    let n = split.n;
    let y = split.q.adjoint() * plane.frame.columns();
    let y_plus = y.rows(0, n).into_owned();
    let y_minus = y.rows(n, n).into_owned();
    let smin = min_singular_value(&y_plus);
    if !(smin > tol.rank_tol) {
        return Err(Error::ProjectionSingular(smin));
    }
    // V = y₋ y₊⁻¹ via the transposed solve y₊ᵀ Vᵀ = y₋ᵀ.
    let lu = y_plus.transpose().lu();
    let v = lu
        .solve(&y_minus.transpose())
        .ok_or_else(|| Error::ProjectionSingular(smin))?
        .transpose();
    let u = &split.sqrt_a_minus * v * &split.inv_sqrt_a_plus;
    Ok(LerayUnitary { split: split.clone(), u })
}

/// The Lagrangian plane `ℓ_U = {(x, √A₋⁻¹ U √A₊ x)}` mapped back through `Q`.
pub fn unitary_to_plane(u: &LerayUnitary, tol: &Tolerances) -> Result<LagrangianPlane> {
    let d = unitarity_defect(&u.u);
    if d >= tol.frame_tol {
        return Err(Error::NotUnitary(d));
    }
    let split = &u.split;
    let n = split.n;
    let mut canon = CMatrix::zeros(2 * n, n);
    canon.view_mut((0, 0), (n, n)).copy_from(&CMatrix::identity(n, n));
    canon.view_mut((n, 0), (n, n)).copy_from(&(&split.inv_sqrt_a_minus * &u.u * &split.sqrt_a_plus));
    let frame = orthonormalize(&(&split.q * canon), tol)?;
    LagrangianPlane::new(frame, &split.form, tol)
}

/// Frame of the Lagrangian plane nearest to the span of a nearly isotropic
/// `frame`: its graph map is read off as in [`plane_to_unitary`] and replaced
/// by the polar factor, which is unitary, before mapping back.
pub(crate) fn restore_lagrangian(frame: &CMatrix, split: &Arc<CanonicalSplit>, tol: &Tolerances) -> Result<CMatrix> {
    let n = split.n;
    let y = split.q.adjoint() * frame;
    let y_plus = y.rows(0, n).into_owned();
    let smin = min_singular_value(&y_plus);
    if !(smin > tol.rank_tol) {
        return Err(Error::ProjectionSingular(smin));
    }
    let v = y_plus
        .transpose()
        .lu()
        .solve(&y.rows(n, n).transpose())
        .ok_or(Error::ProjectionSingular(smin))?
        .transpose();
    let svd = (&split.sqrt_a_minus * v * &split.inv_sqrt_a_plus).svd(true, true);
    let u = svd.u.expect("requested") * svd.v_t.expect("requested");
    let mut canon = CMatrix::zeros(2 * n, n);
    canon.view_mut((0, 0), (n, n)).fill_with_identity();
    canon.view_mut((n, 0), (n, n)).copy_from(&(&split.inv_sqrt_a_minus * u * &split.sqrt_a_plus));
    Ok(orthonormalize(&(&split.q * canon), tol)?.into_columns())
}

/// `dim ker(U_A U_B* − 1)`: eigenvalues of `U_A U_B*` within `eig_tol` of 1.
pub fn crossing_dim(ua: &LerayUnitary, ub: &LerayUnitary, tol: &Tolerances) -> Result<usize> {
    if !(Arc::ptr_eq(&ua.split, &ub.split) || ua.split.same_as(&ub.split, tol)) {
        return Err(Error::SplitMismatch);
    }
    Ok(count_unit_eigenvalues(&(&ua.u * ub.u.adjoint()), tol))
}

/// Number of eigenvalues of a unitary within `eig_tol` of 1.
pub fn count_unit_eigenvalues(m: &CMatrix, tol: &Tolerances) -> usize {
    eigenvalues(m).iter().filter(|z| (*z - ONE).norm() <= tol.eig_tol).count()
}
