//! Per-class topological index of a Leray unitary, relative indices across a
//! junction and the consistency relations between the two planes of a bulk.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_unchecked, pfaffian, CMatrix, Tolerances};
use crate::symmetry::{membership_residual, CartanClass, IndexKind};
use crate::symplectic::LerayUnitary;

/// Label of a connected component of a classifying space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexValue {
    Zero,
    KernelDim(usize),
    Sign(i8),
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexValue::Zero => write!(f, "0"),
            IndexValue::KernelDim(k) => write!(f, "dim ker = {k}"),
            IndexValue::Sign(s) => write!(f, "{}", if *s > 0 { "+1" } else { "-1" }),
        }
    }
}

/// Distance within which a determinant or Pfaffian is snapped to ±1.
const SIGN_SNAP: f64 = 1e-6;

pub fn topological_index(u: &LerayUnitary, class: CartanClass, tol: &Tolerances) -> Result<IndexValue> {
    topological_index_matrix(u.matrix(), class, tol)
}

/// Index of a bare unitary assumed to be written in the canonical basis.
pub fn topological_index_matrix(u: &CMatrix, class: CartanClass, tol: &Tolerances) -> Result<IndexValue> {
    let residual = membership_residual(u, class)?;
    if residual >= tol.frame_tol {
        return Err(Error::NotInClass { class: class.label().into(), reason: format!("residual {residual:.3e}") });
    }
    match class.index_kind() {
        IndexKind::None => Ok(IndexValue::Zero),
        IndexKind::KernelDim => {
            // Members are hermitian, so the spectrum is read off the hermitian part.
            let (vals, _) = hermitian_eig_unchecked(&(u + u.adjoint()).scale(0.5));
            let mut k = 0;
            for l in vals {
                let d = (l - 1.0).abs();
                if d <= tol.eig_tol {
                    k += 1;
                } else if d <= 10.0 * tol.eig_tol {
                    return Err(Error::AmbiguousKernel(d));
                }
            }
            Ok(IndexValue::KernelDim(k))
        }
        IndexKind::Determinant => snap(u.map(|z| z.re).determinant(), "det"),
        IndexKind::Pfaffian => snap(pfaffian(&u.map(|z| z.re), tol)?, "Pf"),
    }
}

fn snap(x: f64, what: &str) -> Result<IndexValue> {
    if (x - 1.0).abs() < SIGN_SNAP {
        Ok(IndexValue::Sign(1))
    } else if (x + 1.0).abs() < SIGN_SNAP {
        Ok(IndexValue::Sign(-1))
    } else {
        Err(Error::NotInClass { class: what.into(), reason: format!("{what} = {x} is not within {SIGN_SNAP:e} of +-1") })
    }
}

fn kind_matches(class: CartanClass, v: IndexValue) -> bool {
    matches!(
        (class.index_kind(), v),
        (IndexKind::None, IndexValue::Zero)
            | (IndexKind::KernelDim, IndexValue::KernelDim(_))
            | (IndexKind::Determinant | IndexKind::Pfaffian, IndexValue::Sign(_))
    )
}

fn check_kinds(class: CartanClass, values: &[IndexValue]) -> Result<()> {
    for v in values {
        if !kind_matches(class, *v) {
            return Err(Error::KindMismatch(format!("{v:?} for class {class}")));
        }
    }
    Ok(())
}

/// `|k_R − k_L|` for kernel classes, `[s_L ≠ s_R]` for sign classes, else 0.
pub fn relative_index(class: CartanClass, left: IndexValue, right: IndexValue) -> Result<usize> {
    check_kinds(class, &[left, right])?;
    Ok(match (left, right) {
        (IndexValue::KernelDim(a), IndexValue::KernelDim(b)) => a.abs_diff(b),
        (IndexValue::Sign(a), IndexValue::Sign(b)) => usize::from(a != b),
        _ => 0,
    })
}

/// Relation between the indices of `ℓ₊` and `ℓ₋` of one gapped bulk of size `N`.
pub fn bulk_consistency_check(class: CartanClass, idx_plus: IndexValue, idx_minus: IndexValue, n: usize) -> Result<bool> {
    check_kinds(class, &[idx_plus, idx_minus])?;
    let parity = |m: usize| if m % 2 == 0 { 1 } else { -1 };
    Ok(match (class.index_kind(), idx_plus, idx_minus) {
        (IndexKind::KernelDim, IndexValue::KernelDim(a), IndexValue::KernelDim(b)) => a + b == n,
        (IndexKind::Determinant, IndexValue::Sign(a), IndexValue::Sign(b)) => a == parity(n) * b,
        (IndexKind::Pfaffian, IndexValue::Sign(a), IndexValue::Sign(b)) => a == parity(n / 2) * b,
        _ => true,
    })
}
