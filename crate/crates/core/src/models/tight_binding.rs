//! Periodic tight-binding chains
//! `(hψ)_n = a*_{n−1} ψ_{n−1} + b_n ψ_n + a_n ψ_{n+1}` with period `q`.
//!
//! Boundary data are `(ψ_0, ψ_1)` with `J = [[0, −a_0], [a_0*, 0]]`; the
//! planes are the stable and unstable subspaces of the monodromy.

use crate::error::{Error, Result};
use crate::linalg::{
    hermiticity_defect, max_abs, min_singular_value, stable_unstable_split, CMatrix, Tolerances,
};
use crate::symplectic::{LagrangianPlane, SymplecticForm};

use super::{BulkData, GapCertificate};

#[derive(Debug, Clone, PartialEq)]
pub struct TightBindingModel {
    a: Vec<CMatrix>,
    b: Vec<CMatrix>,
}

impl TightBindingModel {
    /// Hoppings `a_0..a_{q−1}` (invertible) and onsite terms `b_0..b_{q−1}`
    /// (hermitian), all `N × N`.
    pub fn new(a: Vec<CMatrix>, b: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!("{} hoppings for {} onsite terms", a.len(), b.len())));
        }
        let n = a[0].nrows();
        for m in a.iter().chain(b.iter()) {
            if m.nrows() != n || m.ncols() != n || n == 0 {
                return Err(Error::DimensionMismatch(format!("expected {n}x{n} blocks, got {}x{}", m.nrows(), m.ncols())));
            }
        }
        for (k, bk) in b.iter().enumerate() {
            let d = hermiticity_defect(bk);
            if d >= tol.frame_tol * max_abs(bk).max(1.0) {
                return Err(Error::BadInput(format!("b_{k} is not hermitian (residual {d:.3e})")));
            }
        }
        for (k, ak) in a.iter().enumerate() {
            let s = min_singular_value(ak);
            if s <= tol.rank_tol {
                return Err(Error::NotInvertible(format!("a_{k} has smallest singular value {s:.3e}")));
            }
        }
        Ok(TightBindingModel { a, b })
    }

    pub fn period(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.a[0].nrows()
    }

    /// `a_n` with the index taken modulo the period.
    pub fn hopping(&self, n: i64) -> &CMatrix {
        &self.a[n.rem_euclid(self.period() as i64) as usize]
    }

    pub fn onsite(&self, n: i64) -> &CMatrix {
        &self.b[n.rem_euclid(self.period() as i64) as usize]
    }

    pub fn boundary_form(&self, tol: &Tolerances) -> Result<SymplecticForm> {
        let n = self.n();
        let a0 = &self.a[0];
        let mut j = CMatrix::zeros(2 * n, 2 * n);
        j.view_mut((0, n), (n, n)).copy_from(&-a0);
        j.view_mut((n, 0), (n, n)).copy_from(&a0.adjoint());
        SymplecticForm::new(j, tol)
    }

    /// `T_n` mapping `(ψ_{n−1}, ψ_n)` to `(ψ_n, ψ_{n+1})`.
    pub fn transfer(&self, n: i64, energy: f64) -> Result<CMatrix> {
        let dim = self.n();
        let lu = self.hopping(n).clone().lu();
        let mut shifted = self.onsite(n).clone();
        for k in 0..dim {
            shifted[(k, k)] -= energy;
        }
        let not_inv = || Error::NotInvertible(format!("a_{n}"));
        let c = -lu.solve(&self.hopping(n - 1).adjoint()).ok_or_else(not_inv)?;
        let d = -lu.solve(&shifted).ok_or_else(not_inv)?;
        let mut t = CMatrix::zeros(2 * dim, 2 * dim);
        t.view_mut((0, dim), (dim, dim)).fill_with_identity();
        t.view_mut((dim, 0), (dim, dim)).copy_from(&c);
        t.view_mut((dim, dim), (dim, dim)).copy_from(&d);
        Ok(t)
    }

    /// `M(E) = T_q ⋯ T_1` acting on `(ψ_0, ψ_1)`.
    pub fn monodromy(&self, energy: f64) -> Result<CMatrix> {
        let mut m = CMatrix::identity(2 * self.n(), 2 * self.n());
        for n in 1..=self.period() as i64 {
            m = self.transfer(n, energy)? * m;
        }
        Ok(m)
    }
}

pub fn tb_bulk(model: &TightBindingModel, energy: f64, tol: &Tolerances) -> Result<BulkData> {
    let m = model.monodromy(energy)?;
    let split = stable_unstable_split(&m, tol)?;
    if split.unit_circle_count > 0 {
        return Err(Error::GapClosed(format!(
            "{} monodromy eigenvalues on the unit circle at E = {energy}",
            split.unit_circle_count
        )));
    }
    let n = model.n();
    if split.stable.rank() != n {
        return Err(Error::GapClosed(format!("stable subspace has dimension {} instead of {n}", split.stable.rank())));
    }
    let form = model.boundary_form(tol)?;
    let plane_plus = LagrangianPlane::new(split.stable, &form, tol)?;
    let plane_minus = LagrangianPlane::new(split.unstable, &form, tol)?;
    let gap = GapCertificate::Monodromy { circle_distance: split.circle_distance };
    BulkData::assemble(form, plane_plus, plane_minus, gap, tol)
}
