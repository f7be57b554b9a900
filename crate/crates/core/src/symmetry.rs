//! Time-reversal `T`, charge-conjugation `C` and chiral `S` symmetries, the
//! ten Cartan classes, their canonical bases and the algebraic membership
//! tests for the classifying spaces of Leray unitaries.
//!
//! An antiunitary acts as `x ↦ V conj(x)` and is stored as the unitary `V`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    block_diag, blocks2, conj, eigenvalues, hermitian_eig_unchecked, hermiticity_defect, identity, max_abs,
    projector_distance, symmetric_unitary_sqrt, unitarity_defect, CMatrix, Frame, Tolerances, I, ONE,
};
use crate::symplectic::{canonical_split, LagrangianPlane, LerayUnitary, SymplecticForm};

/// `Ω = [[0, I_n], [−I_n, 0]]` of size `n2 = 2n`.
pub fn omega(n2: usize) -> CMatrix {
    let n = n2 / 2;
    let mut m = CMatrix::zeros(n2, n2);
    for k in 0..n {
        m[(k, n + k)] = ONE;
        m[(n + k, k)] = -ONE;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CartanClass {
    A,
    AIII,
    AI,
    BDI,
    D,
    DIII,
    AII,
    CII,
    C,
    CI,
}

/// Kind of index labelling the connected components of a classifying space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    None,
    KernelDim,
    Determinant,
    Pfaffian,
}

impl CartanClass {
    pub const ALL: [CartanClass; 10] = [
        CartanClass::A,
        CartanClass::AIII,
        CartanClass::AI,
        CartanClass::BDI,
        CartanClass::D,
        CartanClass::DIII,
        CartanClass::AII,
        CartanClass::CII,
        CartanClass::C,
        CartanClass::CI,
    ];

    pub fn label(self) -> &'static str {
        use CartanClass::*;
        match self {
            A => "A",
            AIII => "AIII",
            AI => "AI",
            BDI => "BDI",
            D => "D",
            DIII => "DIII",
            AII => "AII",
            CII => "CII",
            C => "C",
            CI => "CI",
        }
    }

    /// `(ε_T, ε_C, S)` with 0 for an absent antiunitary.
    pub fn signature(self) -> (i8, i8, bool) {
        use CartanClass::*;
        match self {
            A => (0, 0, false),
            AIII => (0, 0, true),
            AI => (1, 0, false),
            BDI => (1, 1, true),
            D => (0, 1, false),
            DIII => (-1, 1, true),
            AII => (-1, 0, false),
            CII => (-1, -1, true),
            C => (0, -1, false),
            CI => (1, -1, true),
        }
    }

    pub fn from_signature(t: i8, c: i8, s: bool) -> Option<CartanClass> {
        CartanClass::ALL.into_iter().find(|cl| cl.signature() == (t, c, s))
    }

    /// Classes whose classifying space lives in `U(2n)`.
    pub fn requires_even(self) -> bool {
        use CartanClass::*;
        matches!(self, DIII | AII | CII | C | CI)
    }

    pub fn index_kind(self) -> IndexKind {
        use CartanClass::*;
        match self {
            AIII | BDI | CII => IndexKind::KernelDim,
            D => IndexKind::Determinant,
            DIII => IndexKind::Pfaffian,
            A | AI | AII | C | CI => IndexKind::None,
        }
    }

    pub fn has_index(self) -> bool {
        self.index_kind() != IndexKind::None
    }

    pub fn classifying_space(self) -> &'static str {
        use CartanClass::*;
        match self {
            A => "U(N)",
            AIII => "U_k U(N)/(U(k) x U(N-k))",
            AI => "U(N)/O(N)",
            BDI => "U_k O(N)/(O(k) x O(N-k))",
            D => "O(N)",
            DIII => "O(2n)/U(n)",
            AII => "U(2n)/Sp(n)",
            CII => "U_k Sp(n)/(Sp(k) x Sp(n-k))",
            C => "Sp(n)",
            CI => "Sp(n)/U(n)",
        }
    }

    pub fn index_description(self) -> &'static str {
        match self.index_kind() {
            IndexKind::None => "0",
            IndexKind::KernelDim => "dim ker(U-1) in {0,...,N}",
            IndexKind::Determinant => "det(U) in {+1,-1}",
            IndexKind::Pfaffian => "Pf(U) in {+1,-1}",
        }
    }
}

impl fmt::Display for CartanClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CartanClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CartanClass::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::BadInput(format!("unknown Cartan class '{s}'")))
    }
}

/// Antiunitary `x ↦ V conj(x)` squaring to `sign`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiUnitary {
    v: CMatrix,
    sign: i8,
}

impl AntiUnitary {
    /// Validates unitarity of `V` and reads the sign off `V conj(V) = ±I`.
    pub fn new(v: CMatrix, tol: &Tolerances) -> Result<Self> {
        let d = unitarity_defect(&v);
        if d >= tol.frame_tol {
            return Err(Error::NotUnitary(d));
        }
        let sq = &v * conj(&v);
        let id = identity(v.nrows());
        let sign = if max_abs(&(&sq - &id)) < tol.frame_tol {
            1
        } else if max_abs(&(&sq + &id)) < tol.frame_tol {
            -1
        } else {
            return Err(Error::InconsistentSymmetries("antiunitary does not square to +1 or -1".into()));
        };
        Ok(AntiUnitary { v, sign })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    /// Action on the columns of `x`.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        &self.v * conj(x)
    }

    /// Linear operator `self ∘ other`, i.e. `V₁ conj(V₂)`.
    pub fn compose(&self, other: &AntiUnitary) -> CMatrix {
        &self.v * conj(&other.v)
    }
}

/// Declared symmetries of an operator, as they act on its boundary space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymmetrySet {
    t: Option<AntiUnitary>,
    c: Option<AntiUnitary>,
    s: Option<CMatrix>,
}

impl SymmetrySet {
    pub fn empty() -> Self {
        SymmetrySet::default()
    }

    /// Validates the set. When `T` and `C` are both present, `S` defaults to
    /// `TC` and a given `S` must agree with `TC` up to a phase; `S` together
    /// with a single antiunitary is rejected.
    pub fn new(
        t: Option<AntiUnitary>,
        c: Option<AntiUnitary>,
        s: Option<CMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dims: Vec<usize> = t
            .iter()
            .map(|a| a.dim())
            .chain(c.iter().map(|a| a.dim()))
            .chain(s.iter().map(|m| m.nrows()))
            .collect();
        if dims.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::DimensionMismatch(format!("symmetry sizes {dims:?}")));
        }
        if let Some(s) = &s {
            let d = unitarity_defect(s);
            if d >= tol.frame_tol {
                return Err(Error::NotUnitary(d));
            }
            if max_abs(&(s * s - identity(s.nrows()))) >= tol.frame_tol {
                return Err(Error::InconsistentSymmetries("S^2 != 1".into()));
            }
        }
        let s = match (&t, &c, s) {
            (Some(tt), Some(cc), s) => {
                let tc = tt.compose(cc);
                let ct = cc.compose(tt);
                let eps = (tt.sign * cc.sign) as f64;
                if max_abs(&(&tc - &ct * Complex64::new(eps, 0.0))) >= tol.frame_tol {
                    return Err(Error::InconsistentSymmetries("TC != eps_T eps_C CT".into()));
                }
                match s {
                    None => Some(chiral_from_product(&tc, tol)?),
                    Some(s) => {
                        // S = φ TC for a unimodular φ.
                        let phase = (s.adjoint() * &tc).trace() / Complex64::new(s.nrows() as f64, 0.0);
                        if (phase.norm() - 1.0).abs() >= tol.frame_tol.sqrt()
                            || max_abs(&(&tc - &s * phase)) >= tol.frame_tol
                        {
                            return Err(Error::InconsistentSymmetries("S is not proportional to TC".into()));
                        }
                        Some(s)
                    }
                }
            }
            (None, None, s) => s,
            (_, _, Some(_)) => {
                return Err(Error::InconsistentSymmetries(
                    "S with a single antiunitary implies the third symmetry; declare T and C".into(),
                ))
            }
            (_, _, None) => None,
        };
        Ok(SymmetrySet { t, c, s })
    }

    pub fn t(&self) -> Option<&AntiUnitary> {
        self.t.as_ref()
    }

    pub fn c(&self) -> Option<&AntiUnitary> {
        self.c.as_ref()
    }

    pub fn s(&self) -> Option<&CMatrix> {
        self.s.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_none() && self.c.is_none() && self.s.is_none()
    }
}

/// Rescales `TC` by a phase so that it squares to the identity.
fn chiral_from_product(tc: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let sq = tc * tc;
    let lambda = sq.trace() / Complex64::new(tc.nrows() as f64, 0.0);
    if max_abs(&(&sq - identity(tc.nrows()) * lambda)) >= tol.frame_tol {
        return Err(Error::InconsistentSymmetries("(TC)^2 is not scalar".into()));
    }
    Ok(tc / lambda.sqrt())
}

/// Cartan class of a consistent symmetry set.
pub fn cartan_class(sym: &SymmetrySet) -> Result<CartanClass> {
    let t = sym.t.as_ref().map_or(0, |a| a.sign);
    let c = sym.c.as_ref().map_or(0, |a| a.sign);
    CartanClass::from_signature(t, c, sym.s.is_some())
        .ok_or_else(|| Error::InconsistentSymmetries(format!("no class with signature ({t}, {c}, {})", sym.s.is_some())))
}

/// Residuals of `TJ = JT`, `CJ = −JC`, `SJ = −JS`, relative to `‖J‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityReport {
    pub t_residual: Option<f64>,
    pub c_residual: Option<f64>,
    pub s_residual: Option<f64>,
    pub pass: bool,
}

pub fn check_j_compatibility(sym: &SymmetrySet, form: &SymplecticForm, tol: &Tolerances) -> Result<CompatibilityReport> {
    let j = form.matrix();
    let dim = form.dim();
    for d in [sym.t.as_ref().map(|a| a.dim()), sym.c.as_ref().map(|a| a.dim()), sym.s.as_ref().map(|m| m.nrows())]
        .into_iter()
        .flatten()
    {
        if d != dim {
            return Err(Error::DimensionMismatch(format!("symmetry of size {d} on a form of size {dim}")));
        }
    }
    let scale = form.norm();
    // T J x = V conj(J) conj(x), J T x = J V conj(x).
    let t_residual = sym.t.as_ref().map(|a| max_abs(&(&a.v * conj(j) - j * &a.v)) / scale);
    let c_residual = sym.c.as_ref().map(|a| max_abs(&(&a.v * conj(j) + j * &a.v)) / scale);
    let s_residual = sym.s.as_ref().map(|s| max_abs(&(s * j + j * s)) / scale);
    let pass = [t_residual, c_residual, s_residual].into_iter().flatten().all(|r| r < tol.frame_tol);
    Ok(CompatibilityReport { t_residual, c_residual, s_residual, pass })
}

/// Projector distances between `O(ℓ)` and `ℓ` for each present symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSymmetryReport {
    pub t_distance: Option<f64>,
    pub c_distance: Option<f64>,
    pub s_distance: Option<f64>,
    pub pass: bool,
}

pub fn plane_respects(plane: &LagrangianPlane, sym: &SymmetrySet, tol: &Tolerances) -> Result<PlaneSymmetryReport> {
    let f = plane.frame();
    let image = |m: CMatrix| -> Result<f64> { projector_distance(&Frame::from_orthonormal(m), f) };
    let t_distance = sym.t.as_ref().map(|a| image(a.apply(f.columns()))).transpose()?;
    let c_distance = sym.c.as_ref().map(|a| image(a.apply(f.columns()))).transpose()?;
    let s_distance = sym.s.as_ref().map(|s| image(s * f.columns())).transpose()?;
    let pass = [t_distance, c_distance, s_distance].into_iter().flatten().all(|d| d < tol.frame_tol);
    Ok(PlaneSymmetryReport { t_distance, c_distance, s_distance, pass })
}

/// Largest residual among the defining relations of the classifying space
/// (unitarity included).
pub fn membership_residual(u: &CMatrix, class: CartanClass) -> Result<f64> {
    use CartanClass::*;
    let n = u.nrows();
    if !u.is_square() {
        return Err(Error::DimensionMismatch(format!("U is {}x{}", u.nrows(), u.ncols())));
    }
    if class.requires_even() && n % 2 == 1 {
        return Err(Error::BadParity { class: class.label().into(), n });
    }
    let hermitian = || hermiticity_defect(u);
    let symmetric = || max_abs(&(u - u.transpose()));
    let antisymmetric = || max_abs(&(u + u.transpose()));
    let real = || u.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
    let symplectic = || {
        let om = omega(n);
        max_abs(&(u.transpose() * &om * u - &om))
    };
    let r = match class {
        A => 0.0,
        AIII => hermitian(),
        AI => symmetric(),
        BDI => real().max(symmetric()),
        D => real(),
        DIII => real().max(antisymmetric()),
        AII => antisymmetric(),
        CII => hermitian().max(symplectic()),
        C => symplectic(),
        CI => symmetric().max(symplectic()),
    };
    Ok(r.max(unitarity_defect(u)))
}

/// Whether `U` lies in the classifying space of `class` within `frame_tol`.
pub fn membership(u: &LerayUnitary, class: CartanClass, tol: &Tolerances) -> Result<bool> {
    membership_matrix(u.matrix(), class, tol)
}

pub fn membership_matrix(u: &CMatrix, class: CartanClass, tol: &Tolerances) -> Result<bool> {
    Ok(membership_residual(u, class)? < tol.frame_tol)
}

/// Canonical symmetries of `class` on `(C^{2N}, J₀)`, `J₀ = diag(iI, −iI)`.
pub fn canonical_symmetry_basis(class: CartanClass, n: usize, tol: &Tolerances) -> Result<(SymmetrySet, SymplecticForm)> {
    use CartanClass::*;
    if n == 0 {
        return Err(Error::BadInput("N must be positive".into()));
    }
    if class.requires_even() && n % 2 == 1 {
        return Err(Error::BadParity { class: class.label().into(), n });
    }
    let id = identity(n);
    let z = CMatrix::zeros(n, n);
    let swap = blocks2(&z, &id, &id, &z);
    let om = || omega(n);
    let anti = |v: CMatrix| AntiUnitary::new(v, tol);
    let (t, c, s) = match class {
        A => (None, None, None),
        AIII => (None, None, Some(swap.clone())),
        AI => (Some(anti(swap.clone())?), None, None),
        BDI => (Some(anti(swap.clone())?), Some(anti(identity(2 * n))?), Some(swap.clone())),
        D => (None, Some(anti(identity(2 * n))?), None),
        DIII => (
            Some(anti(blocks2(&z, &-&id, &id, &z))?),
            Some(anti(identity(2 * n) * I)?),
            Some(blocks2(&z, &(&id * I), &(&id * -I), &z)),
        ),
        AII => (Some(anti(blocks2(&z, &-&id, &id, &z))?), None, None),
        CII => (
            Some(anti(-blocks2(&z, &om(), &om(), &z))?),
            Some(anti(block_diag(&om(), &om()))?),
            Some(swap.clone()),
        ),
        C => (None, Some(anti(block_diag(&om(), &om()))?), None),
        CI => (
            Some(anti(blocks2(&z, &(&id * I), &(&id * I), &z))?),
            Some(anti(block_diag(&om(), &om()))?),
            Some(blocks2(&z, &(om() * I), &(om() * I), &z)),
        ),
    };
    let sym = SymmetrySet::new(t, c, s, tol)?;
    Ok((sym, SymplecticForm::standard(n)))
}

/// Outcome of the symplectic-Grassmannian test on a class CII unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrassmannianReport {
    pub kernel_dim: usize,
    /// `‖PᵀΩ − ΩP‖_max` for the projector `P` onto `ker(A − 1)`.
    pub projector_residual: f64,
    pub even: bool,
    pub pass: bool,
}

/// Checks that the eigenspace of `A` at 1 is a symplectic subspace for the
/// standard `Ω`: its projector satisfies `PᵀΩ = ΩP` and its dimension is even.
pub fn symplectic_grassmannian_check(a: &CMatrix, tol: &Tolerances) -> Result<GrassmannianReport> {
    if a.nrows() % 2 == 1 {
        return Err(Error::NotInClass { class: "CII".into(), reason: format!("odd dimension {}", a.nrows()) });
    }
    symplectic_grassmannian_check_with_omega(a, &omega(a.nrows()), tol)
}

/// Same test for a caller-supplied real antisymmetric orthogonal `Ω`.
pub fn symplectic_grassmannian_check_with_omega(a: &CMatrix, om: &CMatrix, tol: &Tolerances) -> Result<GrassmannianReport> {
    let not = |reason: String| Error::NotInClass { class: "CII".into(), reason };
    if !a.is_square() || om.shape() != a.shape() {
        return Err(not(format!("A is {:?}, Omega is {:?}", a.shape(), om.shape())));
    }
    let h = hermiticity_defect(a);
    let u = unitarity_defect(a);
    let sp = max_abs(&(a.transpose() * om * a - om));
    if h >= tol.frame_tol || u >= tol.frame_tol || sp >= tol.frame_tol {
        return Err(not(format!("hermitian {h:.2e}, unitary {u:.2e}, symplectic {sp:.2e}")));
    }
    // A is a hermitian unitary, so P = (A + 1)/2 exactly.
    let herm = (a + a.adjoint()).scale(0.5);
    let (vals, vecs) = hermitian_eig_unchecked(&herm);
    let kernel_dim = vals.iter().filter(|&&l| (l - 1.0).abs() <= tol.eig_tol).count();
    let cols: Vec<_> = vals
        .iter()
        .enumerate()
        .filter(|(_, &l)| (l - 1.0).abs() <= tol.eig_tol)
        .map(|(k, _)| vecs.columns().column(k).into_owned())
        .collect();
    let p = if cols.is_empty() {
        CMatrix::zeros(a.nrows(), a.nrows())
    } else {
        let f = CMatrix::from_columns(&cols);
        &f * f.adjoint()
    };
    let projector_residual = max_abs(&(p.transpose() * om - om * &p));
    let even = kernel_dim % 2 == 0;
    Ok(GrassmannianReport { kernel_dim, projector_residual, even, pass: even && projector_residual < tol.frame_tol })
}

/// Unitary change of canonical coordinates `diag(R₊, R₋)` bringing declared
/// symmetries to the canonical basis of their class.
#[derive(Debug, Clone)]
pub struct CanonicalFrame {
    pub class: CartanClass,
    pub r_plus: CMatrix,
    pub r_minus: CMatrix,
    /// Largest mismatch between transformed and canonical symmetries.
    pub residual: f64,
}

impl CanonicalFrame {
    /// Leray unitary in the new coordinates, `R₋* U R₊`.
    pub fn transform(&self, u: &CMatrix) -> CMatrix {
        self.r_minus.adjoint() * u * &self.r_plus
    }
}

/// Experimental: finds `R` for classes A, AIII, AI, D and BDI (and any set
/// already in canonical form); other classes return `Unsupported`.
///
/// Symmetries are first expressed in the coordinates `z = Q* x` of the
/// canonical split; the `√A±` rescaling commutes with them and drops out.
pub fn find_canonical_frame(sym: &SymmetrySet, form: &SymplecticForm, tol: &Tolerances) -> Result<CanonicalFrame> {
    use CartanClass::*;
    let class = cartan_class(sym)?;
    let compat = check_j_compatibility(sym, form, tol)?;
    if !compat.pass {
        return Err(Error::InconsistentSymmetries(format!("symmetries incompatible with J: {compat:?}")));
    }
    let split = canonical_split(form, tol)?;
    let n = split.n();
    let q = split.q();
    let to_z_anti = |a: &AntiUnitary| q.adjoint() * a.matrix() * conj(q);
    let tz = sym.t.as_ref().map(to_z_anti);
    let cz = sym.c.as_ref().map(to_z_anti);
    let sz = sym.s.as_ref().map(|s| q.adjoint() * s * q);
    let (canon, _) = canonical_symmetry_basis(class, n, tol)?;

    let residual_for = |rp: &CMatrix, rm: &CMatrix| -> f64 {
        let r = block_diag(rp, rm);
        let mut worst = 0.0f64;
        if let (Some(t), Some(ct)) = (&tz, canon.t()) {
            worst = worst.max(max_abs(&(r.adjoint() * t * conj(&r) - ct.matrix())));
        }
        if let (Some(c), Some(cc)) = (&cz, canon.c()) {
            worst = worst.max(max_abs(&(r.adjoint() * c * conj(&r) - cc.matrix())));
        }
        if let (Some(s), Some(cs)) = (&sz, canon.s()) {
            // S is only fixed up to a sign by TC; accept either.
            let a = r.adjoint() * s * &r;
            worst = worst.max(max_abs(&(&a - cs)).min(max_abs(&(&a + cs))));
        }
        worst
    };
    let finish = |rp: CMatrix, rm: CMatrix| -> Result<CanonicalFrame> {
        let residual = residual_for(&rp, &rm);
        if residual >= tol.frame_tol.sqrt() {
            return Err(Error::NotConverged(format!("canonical frame residual {residual:.3e}")));
        }
        Ok(CanonicalFrame { class, r_plus: rp, r_minus: rm, residual })
    };

    let id = identity(n);
    if residual_for(&id, &id) < tol.frame_tol {
        return finish(id.clone(), id);
    }
    let upper_right = |m: &CMatrix| m.view((0, n), (n, n)).into_owned();
    match class {
        A => finish(id.clone(), id),
        AIII => finish(id.clone(), upper_right(sz.as_ref().unwrap()).adjoint()),
        AI => finish(id.clone(), upper_right(tz.as_ref().unwrap()).transpose()),
        D => {
            let c = cz.as_ref().unwrap();
            let x = c.view((0, 0), (n, n)).into_owned();
            let y = c.view((n, n), (n, n)).into_owned();
            finish(symmetric_unitary_sqrt(&x), symmetric_unitary_sqrt(&y))
        }
        BDI => {
            let s = sz.as_ref().unwrap();
            // Orient S so that its off-diagonal block is the canonical +I after the first step.
            let rm = upper_right(s).adjoint();
            let r1 = block_diag(&id, &rm);
            let t1 = r1.adjoint() * tz.as_ref().unwrap() * conj(&r1);
            let r0 = symmetric_unitary_sqrt(&upper_right(&t1));
            finish(r0.clone(), &rm * r0)
        }
        other => Err(Error::Unsupported(format!("canonical frame search for class {other}"))),
    }
}

/// Eigenvalues of a unitary sorted by phase, for diagnostics.
pub fn unitary_phases(u: &CMatrix) -> Vec<f64> {
    let mut p: Vec<f64> = eigenvalues(u).iter().map(|z| z.arg()).collect();
    p.sort_by(|a, b| a.total_cmp(b));
    p
}
