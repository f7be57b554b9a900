//! Constant Dirac operators `D = [[−i∂, −iW], [iW*, i∂]]` on `L²(R, C^{2N})`.
//!
//! Solutions of `Dψ = Eψ` obey `ψ' = Gψ` with `G = iEσ₃ − A`,
//! `A = [[0, W], [W*, 0]]`. The boundary form is `J₀ = diag(iI, −iI)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    blocks2, hermitian_eig, hermitian_function, max_abs, min_singular_value, ordered_schur, orthonormalize,
    singular_values, CMatrix, Tolerances, I,
};
use crate::symplectic::{LagrangianPlane, SymplecticForm};

use super::{BulkData, GapCertificate};

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantDiracModel {
    w: CMatrix,
}

impl ConstantDiracModel {
    pub fn new(w: CMatrix) -> Result<Self> {
        if !w.is_square() || w.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!("W is {}x{}", w.nrows(), w.ncols())));
        }
        Ok(ConstantDiracModel { w })
    }

    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    /// `m₀`, the smallest singular value of `W`; the spectrum is
    /// `(−∞, −m₀] ∪ [m₀, ∞)`.
    pub fn gap(&self) -> f64 {
        min_singular_value(&self.w)
    }

    /// `A = [[0, W], [W*, 0]]`.
    pub fn coupling(&self) -> CMatrix {
        let z = CMatrix::zeros(self.n(), self.n());
        blocks2(&z, &self.w, &self.w.adjoint(), &z)
    }

    /// Generator `G` of `ψ' = Gψ` at energy `E`.
    pub fn generator(&self, energy: f64) -> CMatrix {
        let n = self.n();
        let mut g = -self.coupling();
        for k in 0..n {
            g[(k, k)] += I * energy;
            g[(n + k, n + k)] -= I * energy;
        }
        g
    }

    fn check_gap(&self, energy: f64, tol: &Tolerances) -> Result<f64> {
        let m0 = self.gap();
        if m0 <= tol.rank_tol {
            return Err(Error::GapClosed(format!("W is singular (smallest singular value {m0:.3e})")));
        }
        let distance = m0 - energy.abs();
        if distance <= tol.rank_tol * m0.max(1.0) {
            return Err(Error::GapClosed(format!("energy {energy} outside the gap (-{m0}, {m0})")));
        }
        Ok(m0)
    }
}

/// `U₀⁺ = W* |W|⁻¹` with `|W| = (W W*)^{1/2}`.
pub fn dirac_closed_form_unitary(w: &CMatrix) -> CMatrix {
    let inv_abs = hermitian_function(&(w * w.adjoint()), |x| 1.0 / x.sqrt());
    w.adjoint() * inv_abs
}

/// Planes at `E = 0` from the spectral projectors of `A`, cross-checked
/// against the closed form `U₀^± = ±W*|W|⁻¹`.
pub fn dirac_bulk(model: &ConstantDiracModel, tol: &Tolerances) -> Result<BulkData> {
    let m0 = model.check_gap(0.0, tol)?;
    let n = model.n();
    let (vals, vecs) = hermitian_eig(&model.coupling(), tol)?;
    // A has spectrum ±σ_k(W): exactly N negative eigenvalues first.
    if !(vals[n - 1] < 0.0 && vals[n] > 0.0) {
        return Err(Error::GapClosed(format!("A has eigenvalues {} and {} around 0", vals[n - 1], vals[n])));
    }
    let cols = vecs.columns();
    let form = SymplecticForm::standard(n);
    let plane_plus = LagrangianPlane::from_span(&cols.columns(n, n).into_owned(), &form, tol)?;
    let plane_minus = LagrangianPlane::from_span(&cols.columns(0, n).into_owned(), &form, tol)?;
    let bulk = BulkData::assemble(form, plane_plus, plane_minus, GapCertificate::Dirac { m0, distance: m0 }, tol)?;

    let closed = dirac_closed_form_unitary(model.w());
    let sv = singular_values(model.w());
    let allowed = tol.frame_tol * (sv[0] / m0).max(1.0);
    let dev_plus = max_abs(&(bulk.u_plus.matrix() - &closed));
    let dev_minus = max_abs(&(bulk.u_minus.matrix() + &closed));
    if dev_plus >= allowed || dev_minus >= allowed {
        return Err(Error::CrossCheck(format!(
            "Leray unitaries deviate from the closed form by {dev_plus:.3e} / {dev_minus:.3e}"
        )));
    }
    Ok(bulk)
}

/// Planes at an energy inside the gap `|E| < m₀`, from the invariant
/// subspaces of `G` with negative (`ℓ₊`) and positive (`ℓ₋`) real part.
pub fn dirac_bulk_at(model: &ConstantDiracModel, energy: f64, tol: &Tolerances) -> Result<BulkData> {
    if energy == 0.0 {
        return dirac_bulk(model, tol);
    }
    let m0 = model.check_gap(energy, tol)?;
    let n = model.n();
    let form = SymplecticForm::standard(n);
    let (plus, minus) = generator_planes(&model.generator(energy), n, tol)?;
    let plane_plus = LagrangianPlane::from_span(&plus, &form, tol)?;
    let plane_minus = LagrangianPlane::from_span(&minus, &form, tol)?;
    BulkData::assemble(form, plane_plus, plane_minus, GapCertificate::Dirac { m0, distance: m0 - energy.abs() }, tol)
}

/// Stable (`Re λ < 0`) and unstable invariant subspaces of a generator with no
/// imaginary-axis spectrum, each of dimension `n`.
pub(crate) fn generator_planes(g: &CMatrix, n: usize, tol: &Tolerances) -> Result<(CMatrix, CMatrix)> {
    let scale = max_abs(g).max(1.0);
    let cut = tol.eig_tol * scale;
    let (q1, _, k1) = ordered_schur(g, |z: Complex64| z.re < -cut);
    let (q2, _, k2) = ordered_schur(g, |z: Complex64| z.re > cut);
    if k1 != n || k2 != n {
        return Err(Error::GapClosed(format!("generator has {} decaying and {} growing modes, expected {n}", k1, k2)));
    }
    Ok((q1.columns(0, n).into_owned(), q2.columns(0, n).into_owned()))
}

/// Orthonormal frame of `ℓ` after applying the linear map `m`.
pub(crate) fn transport(m: &CMatrix, frame: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    Ok(orthonormalize(&(m * frame), tol)?.into_columns())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{topological_index, IndexValue};
    use crate::linalg::ONE;
    use crate::sampling;
    use crate::symmetry::{omega, CartanClass};
    use crate::symplectic::is_lagrangian;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, Complex64::new(x, 0.0))
    }

    #[test]
    fn scalar_mass() {
        let b = dirac_bulk(&ConstantDiracModel::new(scalar(2.0)).unwrap(), &tol()).unwrap();
        assert!((b.u_plus.matrix()[(0, 0)] - ONE).norm() < 1e-14);
        assert!((b.u_minus.matrix()[(0, 0)] + ONE).norm() < 1e-14);
        assert!((b.gap.margin() - 2.0).abs() < 1e-14);
        let b = dirac_bulk(&ConstantDiracModel::new(scalar(-1.0)).unwrap(), &tol()).unwrap();
        assert!((b.u_plus.matrix()[(0, 0)] + ONE).norm() < 1e-14);
        assert_eq!(topological_index(&b.u_plus, CartanClass::D, &tol()).unwrap(), IndexValue::Sign(-1));
    }

    #[test]
    fn omega_potential_diii_index() {
        let b = dirac_bulk(&ConstantDiracModel::new(omega(2)).unwrap(), &tol()).unwrap();
        assert!((b.u_plus.matrix() - omega(2).transpose()).norm() < 1e-14);
        assert_eq!(topological_index(&b.u_plus, CartanClass::DIII, &tol()).unwrap(), IndexValue::Sign(-1));
    }

    #[test]
    fn singular_w_closes_gap() {
        let m = ConstantDiracModel::new(CMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(dirac_bulk(&m, &tol()), Err(Error::GapClosed(_))));
        let m = ConstantDiracModel::new(scalar(1.0)).unwrap();
        assert!(matches!(dirac_bulk_at(&m, 1.5, &tol()), Err(Error::GapClosed(_))));
    }

    #[test]
    fn nonzero_energy_planes_decay() {
        let mut rng = StdRng::seed_from_u64(41);
        let w = sampling::dirac_potential(CartanClass::A, 3, 0.8, 2.0, None, &mut rng).unwrap();
        let m = ConstantDiracModel::new(w).unwrap();
        let e = 0.5 * m.gap();
        let b = dirac_bulk_at(&m, e, &tol()).unwrap();
        let g = m.generator(e);
        // ℓ₊ is G-invariant: G F stays in span F.
        let f = b.plane_plus.frame().columns();
        let gf = &g * f;
        let resid = &gf - f * (f.adjoint() * &gf);
        assert!(max_abs(&resid) < 1e-10);
        assert!(is_lagrangian(b.plane_plus.frame(), &b.form, &tol()).unwrap().lagrangian);
    }

    #[test]
    fn energy_continuity_at_zero() {
        let mut rng = StdRng::seed_from_u64(42);
        let w = sampling::dirac_potential(CartanClass::A, 2, 1.0, 2.0, None, &mut rng).unwrap();
        let m = ConstantDiracModel::new(w).unwrap();
        let b0 = dirac_bulk(&m, &tol()).unwrap();
        let b1 = dirac_bulk_at(&m, 1e-7, &tol()).unwrap();
        assert!(max_abs(&(b0.u_plus.matrix() - b1.u_plus.matrix())) < 1e-5);
    }
}
