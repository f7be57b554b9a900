//! Piecewise-constant Dirac potentials `W(t)` and transport of the decaying
//! planes through them.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_unchecked, max_abs, CMatrix, Frame, Tolerances};
use crate::symplectic::{canonical_split, restore_lagrangian, CanonicalSplit, LagrangianPlane, SymplecticForm};

use super::dirac::{dirac_bulk_at, transport, ConstantDiracModel};

/// `W` equals `w[0]` on `(−∞, t_0)`, `w[j]` on `[t_{j−1}, t_j)` and
/// `w[k+1]` on `[t_k, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDiracProfile {
    breakpoints: Vec<f64>,
    w: Vec<CMatrix>,
}

/// Which decaying plane to transport: `Plus` comes from `+∞`, `Minus` from `−∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl PiecewiseDiracProfile {
    pub fn new(breakpoints: Vec<f64>, w: Vec<CMatrix>) -> Result<Self> {
        if w.len() != breakpoints.len() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} breakpoints need {} potentials, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                w.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || breakpoints.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::BadInput(format!("breakpoints must be finite and increasing: {breakpoints:?}")));
        }
        let n = w[0].nrows();
        if n == 0 || w.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch("potentials must all be N x N".into()));
        }
        Ok(PiecewiseDiracProfile { breakpoints, w })
    }

    /// A junction `W_L` for `t < 0`, `W_R` for `t ≥ 0`.
    pub fn hard_wall(left: CMatrix, right: CMatrix) -> Result<Self> {
        Self::new(vec![0.0], vec![left, right])
    }

    pub fn constant(w: CMatrix) -> Result<Self> {
        Self::new(Vec::new(), vec![w])
    }

    pub fn n(&self) -> usize {
        self.w[0].nrows()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn potentials(&self) -> &[CMatrix] {
        &self.w
    }

    pub fn interval_of(&self, t: f64) -> usize {
        self.breakpoints.iter().filter(|&&b| b <= t).count()
    }

    pub fn w_at(&self, t: f64) -> &CMatrix {
        &self.w[self.interval_of(t)]
    }

    pub fn left(&self) -> ConstantDiracModel {
        ConstantDiracModel::new(self.w[0].clone()).expect("validated")
    }

    pub fn right(&self) -> ConstantDiracModel {
        ConstantDiracModel::new(self.w[self.w.len() - 1].clone()).expect("validated")
    }

    /// Smallest singular value over both end potentials.
    pub fn end_gap(&self) -> f64 {
        self.left().gap().min(self.right().gap())
    }
}

/// Largest step for which the propagator's dynamic range stays near `e²`.
const STEP_EXPONENT: f64 = 2.0;

/// Propagator `exp(G δ)` of `ψ' = Gψ`, with `G = −A` at `E = 0`.
fn propagator(model: &ConstantDiracModel, energy: f64, delta: f64) -> CMatrix {
    if energy == 0.0 {
        let (vals, vecs) = hermitian_eig_unchecked(&model.coupling());
        let v = vecs.columns();
        let d = DVector::from_iterator(vals.len(), vals.iter().map(|&l| Complex64::new((-l * delta).exp(), 0.0)));
        v * CMatrix::from_diagonal(&d) * v.adjoint()
    } else {
        (model.generator(energy) * Complex64::new(delta, 0.0)).exp()
    }
}

/// Moves a frame along `W = model` by a signed distance `span`, in sub-steps
/// short enough to keep the frame well conditioned.
///
/// Decaying directions carried into a region where they grow pick up rounding
/// errors amplified like `e^{2σ|t|}`; projecting back onto the Lagrangian
/// Grassmannian after every step keeps those errors from breaking isotropy.
fn carry(
    frame: CMatrix,
    model: &ConstantDiracModel,
    energy: f64,
    span: f64,
    split: &Arc<CanonicalSplit>,
    tol: &Tolerances,
) -> Result<CMatrix> {
    if span == 0.0 {
        return Ok(frame);
    }
    let rate = max_abs(&model.coupling()).max(energy.abs()) * 2.0 * model.n() as f64;
    let steps = ((span.abs() * rate / STEP_EXPONENT).ceil() as usize).max(1);
    let step = propagator(model, energy, span / steps as f64);
    let mut f = frame;
    for _ in 0..steps {
        f = restore_lagrangian(&transport(&step, &f, tol)?, split, tol)?;
    }
    Ok(f)
}

/// Plane of boundary values at `t` of solutions of `Dψ = Eψ` decaying at
/// `+∞` (`Side::Plus`) or `−∞` (`Side::Minus`).
pub fn propagate_plane(
    profile: &PiecewiseDiracProfile,
    energy: f64,
    side: Side,
    t: f64,
    tol: &Tolerances,
) -> Result<LagrangianPlane> {
    let form = SymplecticForm::standard(profile.n());
    let split = canonical_split(&form, tol)?;
    let bp = &profile.breakpoints;
    let mut frame = match side {
        Side::Plus => dirac_bulk_at(&profile.right(), energy, tol)?.plane_plus.frame().columns().clone(),
        Side::Minus => dirac_bulk_at(&profile.left(), energy, tol)?.plane_minus.frame().columns().clone(),
    };
    if bp.is_empty() {
        return LagrangianPlane::new(Frame::from_orthonormal(frame), &form, tol);
    }
    match side {
        Side::Plus => {
            // Walk from the last breakpoint down to t.
            let mut pos = bp[bp.len() - 1];
            let mut idx = bp.len();
            while t < pos {
                let lower = if idx >= 2 { bp[idx - 2].max(t) } else { t };
                let model = ConstantDiracModel::new(profile.w[idx - 1].clone())?;
                frame = carry(frame, &model, energy, lower - pos, &split, tol)?;
                pos = lower;
                idx -= 1;
            }
        }
        Side::Minus => {
            let mut pos = bp[0];
            let mut idx = 1;
            while t > pos {
                let upper = if idx < bp.len() { bp[idx].min(t) } else { t };
                let model = ConstantDiracModel::new(profile.w[idx].clone())?;
                frame = carry(frame, &model, energy, upper - pos, &split, tol)?;
                pos = upper;
                idx += 1;
            }
        }
    }
    LagrangianPlane::new(Frame::from_orthonormal(frame), &form, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::projector_distance;
    use crate::models::dirac_bulk;
    use crate::sampling;
    use crate::symmetry::CartanClass;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn s(x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, Complex64::new(x, 0.0))
    }

    #[test]
    fn constant_profile_keeps_bulk_plane() {
        let mut rng = StdRng::seed_from_u64(51);
        let w = sampling::dirac_potential(CartanClass::A, 3, 0.5, 2.0, None, &mut rng).unwrap();
        let bulk = dirac_bulk(&ConstantDiracModel::new(w.clone()).unwrap(), &tol()).unwrap();
        let prof = PiecewiseDiracProfile::new(vec![-1.0, 1.0], vec![w.clone(), w.clone(), w]).unwrap();
        for t in [-4.0, 0.0, 3.0] {
            let p = propagate_plane(&prof, 0.0, Side::Plus, t, &tol()).unwrap();
            assert!(projector_distance(p.frame(), bulk.plane_plus.frame()).unwrap() < 1e-10);
            let m = propagate_plane(&prof, 0.0, Side::Minus, t, &tol()).unwrap();
            assert!(projector_distance(m.frame(), bulk.plane_minus.frame()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn mass_wall_transport_stays_lagrangian() {
        let prof = PiecewiseDiracProfile::hard_wall(s(-1.0), s(1.0)).unwrap();
        let p = propagate_plane(&prof, 0.0, Side::Plus, -5.0, &tol()).unwrap();
        assert!(p.isotropy_defect() < 1e-10);
        // Here the right plane is the zero mode and never moves.
        let wall = dirac_bulk(&prof.left(), &tol()).unwrap();
        let p = propagate_plane(&prof, 0.0, Side::Plus, -40.0, &tol()).unwrap();
        assert!(projector_distance(p.frame(), wall.plane_minus.frame()).unwrap() < 1e-10);
        // Without a crossing it relaxes to the left bulk plane instead.
        let prof = PiecewiseDiracProfile::hard_wall(CMatrix::from_element(1, 1, Complex64::new(0.0, 1.0)), s(1.0)).unwrap();
        let left = dirac_bulk(&prof.left(), &tol()).unwrap();
        let p = propagate_plane(&prof, 0.0, Side::Plus, -40.0, &tol()).unwrap();
        assert!(projector_distance(p.frame(), left.plane_plus.frame()).unwrap() < 1e-10);
    }

    #[test]
    fn exact_scalar_transport() {
        // Right plane span(1, 1) carried back across W = ic over a length d:
        // exp(A d) with A = −c σ₂ gives (cosh cd + i sinh cd, cosh cd − i sinh cd).
        let (c, d) = (0.4f64, 0.7f64);
        let wc = CMatrix::from_element(1, 1, Complex64::new(0.0, c));
        let prof = PiecewiseDiracProfile::new(vec![-d, 0.0], vec![wc.clone(), wc, s(1.0)]).unwrap();
        let p = propagate_plane(&prof, 0.0, Side::Plus, -d, &tol()).unwrap();
        let (ch, sh) = ((c * d).cosh(), (c * d).sinh());
        let expected = CMatrix::from_column_slice(2, 1, &[Complex64::new(ch, sh), Complex64::new(ch, -sh)]);
        let expected = crate::linalg::orthonormalize(&expected, &tol()).unwrap();
        assert!(projector_distance(p.frame(), &expected).unwrap() < 1e-12);
    }

    #[test]
    fn nonzero_energy_transport() {
        let prof = PiecewiseDiracProfile::new(vec![-1.0, 1.0], vec![s(-1.0), s(0.3), s(1.0)]).unwrap();
        let p = propagate_plane(&prof, 0.2, Side::Plus, -3.0, &tol()).unwrap();
        assert!(p.isotropy_defect() < 1e-10);
        let m = propagate_plane(&prof, 0.2, Side::Minus, 3.0, &tol()).unwrap();
        assert!(m.isotropy_defect() < 1e-10);
    }

    #[test]
    fn interval_lookup() {
        let prof = PiecewiseDiracProfile::new(vec![-1.0, 1.0], vec![s(1.0), s(2.0), s(3.0)]).unwrap();
        assert_eq!(prof.interval_of(-2.0), 0);
        assert_eq!(prof.interval_of(-1.0), 1);
        assert_eq!(prof.interval_of(0.99), 1);
        assert_eq!(prof.interval_of(1.0), 2);
        assert!(PiecewiseDiracProfile::new(vec![1.0, 0.0], vec![s(1.0), s(1.0), s(1.0)]).is_err());
    }
}
