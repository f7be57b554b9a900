//! Bulk model families and their boundary data: the form `J`, the planes
//! `ℓ_E^±` of boundary values of solutions decaying at `±∞`, and their Leray
//! unitaries.
//!
//! Trace conventions: Dirac `ψ(0)`, Schrödinger `(ψ(0), ψ'(0))`, tight binding
//! `(ψ_0, ψ_1)`.

mod dirac;
mod profile;
mod schrodinger;
mod tight_binding;

use std::sync::Arc;

pub use dirac::{dirac_bulk, dirac_bulk_at, dirac_closed_form_unitary, ConstantDiracModel};
pub use profile::{propagate_plane, PiecewiseDiracProfile, Side};
pub use schrodinger::{schrodinger_bulk, ConstantSchrodingerModel};
pub use tight_binding::{tb_bulk, TightBindingModel};

use crate::error::{Error, Result};
use crate::linalg::Tolerances;
use crate::symplectic::{
    canonical_split, crossing_dim, plane_to_unitary, CanonicalSplit, LagrangianPlane, LerayUnitary, SymplecticForm,
};

/// Evidence that the bulk is gapped at the reference energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapCertificate {
    /// Distance from `E` to the Dirac spectrum `(−∞, −m₀] ∪ [m₀, ∞)`, with `m₀`.
    Dirac { m0: f64, distance: f64 },
    /// `λ_min(V) − E`.
    Schrodinger { distance: f64 },
    /// Smallest distance of the monodromy spectrum to the unit circle.
    Monodromy { circle_distance: f64 },
}

impl GapCertificate {
    /// The scalar margin; positive for a gapped bulk.
    pub fn margin(&self) -> f64 {
        match *self {
            GapCertificate::Dirac { distance, .. } => distance,
            GapCertificate::Schrodinger { distance } => distance,
            GapCertificate::Monodromy { circle_distance } => circle_distance,
        }
    }
}

/// Boundary data of a gapped bulk operator.
#[derive(Debug, Clone)]
pub struct BulkData {
    pub form: SymplecticForm,
    pub split: Arc<CanonicalSplit>,
    pub plane_plus: LagrangianPlane,
    pub plane_minus: LagrangianPlane,
    pub u_plus: LerayUnitary,
    pub u_minus: LerayUnitary,
    pub gap: GapCertificate,
}

impl BulkData {
    /// Computes the Leray unitaries of both planes and checks `ℓ₊ ∩ ℓ₋ = 0`.
    pub fn assemble(
        form: SymplecticForm,
        plane_plus: LagrangianPlane,
        plane_minus: LagrangianPlane,
        gap: GapCertificate,
        tol: &Tolerances,
    ) -> Result<Self> {
        let split = canonical_split(&form, tol)?;
        Self::assemble_with_split(split, plane_plus, plane_minus, gap, tol)
    }

    pub fn assemble_with_split(
        split: Arc<CanonicalSplit>,
        plane_plus: LagrangianPlane,
        plane_minus: LagrangianPlane,
        gap: GapCertificate,
        tol: &Tolerances,
    ) -> Result<Self> {
        let u_plus = plane_to_unitary(&plane_plus, &split, tol)?;
        let u_minus = plane_to_unitary(&plane_minus, &split, tol)?;
        let crossing = crossing_dim(&u_plus, &u_minus, tol)?;
        if crossing != 0 {
            return Err(Error::GapClosed(format!("decaying planes intersect in dimension {crossing}")));
        }
        Ok(BulkData { form: split.form().clone(), split, plane_plus, plane_minus, u_plus, u_minus, gap })
    }

    /// `N`, half the boundary dimension.
    pub fn n(&self) -> usize {
        self.split.n()
    }
}
