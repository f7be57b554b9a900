//! Constant matrix Schrödinger operators `−∂² + V` on `L²(R, C^M)` below
//! the bottom of their spectrum. Boundary data are `(ψ(0), ψ'(0))` with the
//! Wronskian form `J = [[0, I], [−I, 0]]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, Tolerances, ONE};
use crate::symplectic::{LagrangianPlane, SymplecticForm};

use super::{BulkData, GapCertificate};

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSchrodingerModel {
    pub v: CMatrix,
    pub energy: f64,
}

impl ConstantSchrodingerModel {
    pub fn new(v: CMatrix, energy: f64) -> Result<Self> {
        if !v.is_square() || v.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!("V is {}x{}", v.nrows(), v.ncols())));
        }
        Ok(ConstantSchrodingerModel { v, energy })
    }

    pub fn m(&self) -> usize {
        self.v.nrows()
    }

    pub fn boundary_form(&self) -> SymplecticForm {
        let m = self.m();
        let mut j = CMatrix::zeros(2 * m, 2 * m);
        for k in 0..m {
            j[(k, m + k)] = ONE;
            j[(m + k, k)] = -ONE;
        }
        SymplecticForm::new(j, &Tolerances::default()).expect("Wronskian form is valid")
    }
}

/// With `V − E = Σ μ_j v_j v_j*`, the decaying solutions at `+∞` are
/// `e^{−√μ_j t} v_j`, so `ℓ₊` is spanned by `(v_j, −√μ_j v_j)` and `ℓ₋` by
/// `(v_j, +√μ_j v_j)`.
pub fn schrodinger_bulk(model: &ConstantSchrodingerModel, tol: &Tolerances) -> Result<BulkData> {
    let m = model.m();
    let (lambda, vecs) = hermitian_eig(&model.v, tol)?;
    let bottom = lambda[0];
    if model.energy >= bottom - tol.rank_tol {
        return Err(Error::NotInGap { energy: model.energy, bottom });
    }
    let v = vecs.columns();
    let mut plus = CMatrix::zeros(2 * m, m);
    let mut minus = CMatrix::zeros(2 * m, m);
    for j in 0..m {
        let root = Complex64::new((lambda[j] - model.energy).sqrt(), 0.0);
        let col = v.column(j);
        plus.view_mut((0, j), (m, 1)).copy_from(&col);
        minus.view_mut((0, j), (m, 1)).copy_from(&col);
        plus.view_mut((m, j), (m, 1)).copy_from(&(col * -root));
        minus.view_mut((m, j), (m, 1)).copy_from(&(col * root));
    }
    let form = model.boundary_form();
    let plane_plus = LagrangianPlane::from_span(&plus, &form, tol)?;
    let plane_minus = LagrangianPlane::from_span(&minus, &form, tol)?;
    BulkData::assemble(form, plane_plus, plane_minus, GapCertificate::Schrodinger { distance: bottom - model.energy }, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, projector_distance, Frame};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn free(e: f64) -> BulkData {
        schrodinger_bulk(&ConstantSchrodingerModel::new(CMatrix::zeros(1, 1), e).unwrap(), &tol()).unwrap()
    }

    #[test]
    fn free_particle_unitaries() {
        assert!((free(-1.0).u_plus.matrix()[(0, 0)] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        let expected = Complex64::new(1.0, -2.0) / Complex64::new(1.0, 2.0);
        assert!((free(-4.0).u_plus.matrix()[(0, 0)] - expected).norm() < 1e-12);
    }

    #[test]
    fn diagonal_potential_plane() {
        let v = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, Complex64::new(4.0, 0.0)]));
        let b = schrodinger_bulk(&ConstantSchrodingerModel::new(v, 0.0).unwrap(), &tol()).unwrap();
        // Columns (e1, −e1) and (e2, −2 e2).
        let raw = CMatrix::from_row_slice(4, 2, &[
            ONE, 0.0.into(),
            0.0.into(), ONE,
            -ONE, 0.0.into(),
            0.0.into(), Complex64::new(-2.0, 0.0),
        ]);
        let expected = crate::linalg::orthonormalize(&raw, &tol()).unwrap();
        assert!(projector_distance(b.plane_plus.frame(), &expected).unwrap() < 1e-14);
        let _: &Frame = b.plane_minus.frame();
        assert!(max_abs(&(b.u_plus.matrix() * b.u_plus.matrix().adjoint() - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn energy_above_bottom_rejected() {
        let m = ConstantSchrodingerModel::new(CMatrix::from_element(1, 1, ONE), 1.0).unwrap();
        assert_eq!(schrodinger_bulk(&m, &tol()).unwrap_err(), Error::NotInGap { energy: 1.0, bottom: 1.0 });
    }
}
