//! Junctions of two bulks: boundary compatibility, the exact crossing
//! prediction `dim(ℓ^{R,+} ∩ ℓ^{L,−})` for the number of zero modes and the
//! protected lower bound given by the relative index.

use crate::error::{Error, Result};
use crate::index::{bulk_consistency_check, relative_index, topological_index, IndexValue};
use crate::linalg::{max_abs, Tolerances};
use crate::models::{dirac_bulk_at, propagate_plane, BulkData, PiecewiseDiracProfile, Side};
use crate::symmetry::CartanClass;
use crate::symplectic::{canonical_split, crossing_dim, plane_to_unitary, SymplecticForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JunctionReport {
    pub class: CartanClass,
    /// Index of `ℓ^{L,+}`, the left bulk.
    pub index_left: IndexValue,
    /// Index of `ℓ^{R,+}`, the right bulk.
    pub index_right: IndexValue,
    pub protected_bound: usize,
    pub predicted_kernel_dim: usize,
    /// Hard junctions: both bulks satisfy their index relation.
    /// Continuous junctions: transported planes carry the far-side indices.
    pub consistency: bool,
}

impl JunctionReport {
    pub fn bound_holds(&self) -> bool {
        self.predicted_kernel_dim >= self.protected_bound
    }
}

/// Two bulks sharing a boundary form.
#[derive(Debug, Clone, Copy)]
pub struct HardJunction<'a> {
    pub left: &'a BulkData,
    pub right: &'a BulkData,
}

/// Checks `‖J_L − J_R‖ < frame_tol ‖J_L‖`.
pub fn hard_junction<'a>(left: &'a BulkData, right: &'a BulkData, tol: &Tolerances) -> Result<HardJunction<'a>> {
    check_forms(&left.form, &right.form, tol)?;
    Ok(HardJunction { left, right })
}

fn check_forms(l: &SymplecticForm, r: &SymplecticForm, tol: &Tolerances) -> Result<()> {
    if l.dim() != r.dim() {
        return Err(Error::IncompatibleBoundary(format!("boundary dimensions {} and {}", l.dim(), r.dim())));
    }
    let diff = max_abs(&(l.matrix() - r.matrix()));
    if diff >= tol.frame_tol * l.norm() {
        return Err(Error::IncompatibleBoundary(format!("boundary forms differ by {diff:.3e}")));
    }
    Ok(())
}

/// `dim ker(U^{R,+} (U^{L,−})* − 1)`, with both unitaries taken in the left
/// bulk's canonical coordinates.
pub fn predicted_zero_modes(left: &BulkData, right: &BulkData, tol: &Tolerances) -> Result<usize> {
    let j = hard_junction(left, right, tol)?;
    let ur = plane_to_unitary(&j.right.plane_plus, &j.left.split, tol)?;
    crossing_dim(&ur, &j.left.u_minus, tol)
}

/// Lower bound on the number of protected zero modes.
pub fn protected_bound(class: CartanClass, left: IndexValue, right: IndexValue) -> Result<usize> {
    relative_index(class, left, right)
}

pub fn junction_report(left: &BulkData, right: &BulkData, class: CartanClass, tol: &Tolerances) -> Result<JunctionReport> {
    let predicted = predicted_zero_modes(left, right, tol)?;
    let index_left = topological_index(&left.u_plus, class, tol)?;
    let index_right = topological_index(&right.u_plus, class, tol)?;
    let consistent = |b: &BulkData| -> Result<bool> {
        let minus = topological_index(&b.u_minus, class, tol)?;
        let plus = topological_index(&b.u_plus, class, tol)?;
        bulk_consistency_check(class, plus, minus, b.n())
    };
    let consistency = consistent(left)? && consistent(right)?;
    Ok(JunctionReport {
        class,
        index_left,
        index_right,
        protected_bound: protected_bound(class, index_left, index_right)?,
        predicted_kernel_dim: predicted,
        consistency,
    })
}

/// Transports `ℓ^{R,+}` and `ℓ^{L,−}` through the profile to `t = 0`,
/// predicts the kernel from their crossing and checks that the transported
/// planes keep the indices of the bulks they come from.
pub fn continuous_junction_report(
    profile: &PiecewiseDiracProfile,
    energy: f64,
    class: CartanClass,
    tol: &Tolerances,
) -> Result<JunctionReport> {
    let left = dirac_bulk_at(&profile.left(), energy, tol)?;
    let right = dirac_bulk_at(&profile.right(), energy, tol)?;
    let split = canonical_split(&SymplecticForm::standard(profile.n()), tol)?;
    let plus = plane_to_unitary(&propagate_plane(profile, energy, Side::Plus, 0.0, tol)?, &split, tol)?;
    let minus = plane_to_unitary(&propagate_plane(profile, energy, Side::Minus, 0.0, tol)?, &split, tol)?;
    let predicted = crossing_dim(&plus, &minus, tol)?;
    let index_left = topological_index(&left.u_plus, class, tol)?;
    let index_right = topological_index(&right.u_plus, class, tol)?;
    let consistency = topological_index(&plus, class, tol)? == index_right
        && topological_index(&minus, class, tol)? == topological_index(&left.u_minus, class, tol)?;
    Ok(JunctionReport {
        class,
        index_left,
        index_right,
        protected_bound: protected_bound(class, index_left, index_right)?,
        predicted_kernel_dim: predicted,
        consistency,
    })
}
