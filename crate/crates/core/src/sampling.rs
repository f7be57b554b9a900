//! Random matrices: Haar unitaries, members of the ten classifying spaces
//! with a prescribed index, and class-structured Dirac potentials `W`.
//!
//! Used by the property and acceptance suites; deterministic for a seeded RNG.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{to_complex, CMatrix, RMatrix, ONE};
use crate::symmetry::{omega, CartanClass};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_complex<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, p, |_, _| Complex64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn random_real<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> RMatrix {
    RMatrix::from_fn(n, p, |_, _| normal(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_complex(n, n, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = random_complex(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let col = q.column(k) * ph;
        q.set_column(k, &col);
    }
    q
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RMatrix {
    let (mut q, r) = random_real(n, n, rng).qr().unpack();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

/// Orthogonal matrix with the requested determinant sign.
pub fn random_orthogonal_with_det<R: Rng + ?Sized>(n: usize, det: i8, rng: &mut R) -> RMatrix {
    let mut q = random_orthogonal(n, rng);
    if (q.determinant() < 0.0) != (det < 0) {
        q.column_mut(0).neg_mut();
    }
    q
}

/// `Pf(Ω)` for the `2n × 2n` matrix `Ω = [[0, I], [−I, 0]]`.
pub fn pfaffian_of_omega(n: usize) -> i8 {
    if (n * (n.saturating_sub(1)) / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Real antisymmetric orthogonal matrix `O Ω Oᵀ` with Haar `O`.
pub fn random_antisymmetric_orthogonal<R: Rng + ?Sized>(n2: usize, rng: &mut R) -> RMatrix {
    let o = random_orthogonal(n2, rng);
    let om = omega(n2).map(|z| z.re);
    &o * om * o.transpose()
}

/// Same, with the Pfaffian sign prescribed.
pub fn antisymmetric_orthogonal_with_pf<R: Rng + ?Sized>(n2: usize, pf: i8, rng: &mut R) -> RMatrix {
    let target = pf * pfaffian_of_omega(n2 / 2);
    let o = random_orthogonal_with_det(n2, target, rng);
    let om = omega(n2).map(|z| z.re);
    &o * om * o.transpose()
}

/// Unitary symplectic matrix `U ∈ Sp(n)`, `UᵀΩU = Ω`, built column by column
/// from a symplectic frame `(φ, −Ω conj φ)`.
pub fn random_unitary_symplectic<R: Rng + ?Sized>(n2: usize, rng: &mut R) -> CMatrix {
    let n = n2 / 2;
    let om = omega(n2);
    let mut phis: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    let mut partners: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    while phis.len() < n {
        let mut v: DVector<Complex64> = random_complex(n2, 1, rng).column(0).into_owned();
        for _ in 0..2 {
            for b in phis.iter().chain(partners.iter()) {
                let c = b.dotc(&v);
                v.axpy(-c, b, ONE);
            }
        }
        let nv = v.norm();
        if nv < 1e-6 {
            continue;
        }
        let phi = v.unscale(nv);
        let partner = -(&om * phi.map(|z| z.conj()));
        phis.push(phi);
        partners.push(partner);
    }
    let cols: Vec<DVector<Complex64>> = phis.into_iter().chain(partners).collect();
    CMatrix::from_columns(&cols)
}

fn diag_c(d: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| Complex64::new(x, 0.0))))
}

fn signs_with_ones(n: usize, k: usize) -> Vec<f64> {
    (0..n).map(|i| if i < k { 1.0 } else { -1.0 }).collect()
}

fn require_even(class: CartanClass, n: usize) -> Result<()> {
    if class.requires_even() && n % 2 == 1 {
        return Err(Error::BadParity { class: class.label().into(), n });
    }
    Ok(())
}

/// Requested connected component of a classifying space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// Any component, drawn at random.
    Any,
    /// `dim ker(U − 1) = k` (AIII, BDI, CII).
    Kernel(usize),
    /// Determinant or Pfaffian sign (D, DIII).
    Sign(i8),
}

/// Random element of the classifying space of `class` (as a Leray unitary in
/// the canonical basis) in the requested component.
pub fn class_member<R: Rng + ?Sized>(class: CartanClass, n: usize, comp: Component, rng: &mut R) -> Result<CMatrix> {
    use CartanClass::*;
    require_even(class, n)?;
    let bad = |what: &str| Error::BadInput(format!("component {comp:?} is not available in class {}: {what}", class.label()));
    let kernel = |rng: &mut R, step: usize| -> Result<usize> {
        match comp {
            Component::Any => Ok(step * rng.random_range(0..=n / step)),
            Component::Kernel(k) if k <= n && k % step == 0 => Ok(k),
            _ => Err(bad("kernel dimension out of range")),
        }
    };
    let sign = |rng: &mut R| -> Result<i8> {
        match comp {
            Component::Any => Ok(if rng.random::<bool>() { 1 } else { -1 }),
            Component::Sign(s) if s == 1 || s == -1 => Ok(s),
            _ => Err(bad("sign expected")),
        }
    };
    if matches!(comp, Component::Kernel(_) | Component::Sign(_)) && !class.has_index() {
        return Err(bad("class has a single component"));
    }
    Ok(match class {
        A => random_unitary(n, rng),
        AIII => {
            let k = kernel(rng, 1)?;
            let v = random_unitary(n, rng);
            &v * diag_c(&signs_with_ones(n, k)) * v.adjoint()
        }
        AI => {
            let v = random_unitary(n, rng);
            &v * v.transpose()
        }
        BDI => {
            let k = kernel(rng, 1)?;
            let o = to_complex(&random_orthogonal(n, rng));
            &o * diag_c(&signs_with_ones(n, k)) * o.transpose()
        }
        D => to_complex(&random_orthogonal_with_det(n, sign(rng)?, rng)),
        DIII => to_complex(&antisymmetric_orthogonal_with_pf(n, sign(rng)?, rng)),
        AII => {
            let v = random_unitary(n, rng);
            &v * omega(n) * v.transpose()
        }
        CII => {
            let k = kernel(rng, 2)?;
            let s = random_unitary_symplectic(n, rng);
            let half = signs_with_ones(n / 2, k / 2);
            let d: Vec<f64> = half.iter().chain(half.iter()).copied().collect();
            &s * diag_c(&d) * s.adjoint()
        }
        C => random_unitary_symplectic(n, rng),
        CI => {
            let s = random_unitary_symplectic(n, rng);
            &s * s.transpose()
        }
    })
}

fn random_magnitudes<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Constant Dirac potential `W` obeying the symmetry constraints of `class`
/// in the canonical basis, with singular values drawn from `[lo, hi)`.
///
/// For AIII, BDI and CII the number of positive eigenvalues of the hermitian
/// `W` is `positive` when given, random otherwise (even for CII).
pub fn dirac_potential<R: Rng + ?Sized>(
    class: CartanClass,
    n: usize,
    lo: f64,
    hi: f64,
    positive: Option<usize>,
    rng: &mut R,
) -> Result<CMatrix> {
    use CartanClass::*;
    require_even(class, n)?;
    if !(0.0 < lo && lo < hi) {
        return Err(Error::BadInput(format!("singular value range [{lo}, {hi}) must be positive")));
    }
    let pos = |rng: &mut R, step: usize| -> Result<usize> {
        match positive {
            None => Ok(step * rng.random_range(0..=n / step)),
            Some(k) if k <= n && k % step == 0 => Ok(k),
            Some(k) => Err(Error::BadInput(format!("{k} positive eigenvalues impossible in class {}", class.label()))),
        }
    };
    let s = random_magnitudes(n, lo, hi, rng);
    let signed = |k: usize, s: &[f64]| -> Vec<f64> { s.iter().enumerate().map(|(i, &x)| if i < k { x } else { -x }).collect() };
    let pairs = |s: &[f64]| -> Vec<f64> {
        let half = &s[..s.len() / 2];
        half.iter().chain(half.iter()).copied().collect()
    };
    Ok(match class {
        A => {
            let u = random_unitary(n, rng);
            let v = random_unitary(n, rng);
            &u * diag_c(&s) * v.adjoint()
        }
        AIII => {
            let k = pos(rng, 1)?;
            let v = random_unitary(n, rng);
            &v * diag_c(&signed(k, &s)) * v.adjoint()
        }
        AI => {
            let v = random_unitary(n, rng);
            &v * diag_c(&s) * v.transpose()
        }
        BDI => {
            let k = pos(rng, 1)?;
            let o = to_complex(&random_orthogonal(n, rng));
            &o * diag_c(&signed(k, &s)) * o.transpose()
        }
        D => {
            let o1 = to_complex(&random_orthogonal(n, rng));
            let o2 = to_complex(&random_orthogonal(n, rng));
            &o1 * diag_c(&s) * o2.transpose()
        }
        DIII | AII => {
            let mut block = CMatrix::zeros(n, n);
            for k in 0..n / 2 {
                block[(2 * k, 2 * k + 1)] = Complex64::new(s[k], 0.0);
                block[(2 * k + 1, 2 * k)] = Complex64::new(-s[k], 0.0);
            }
            if class == DIII {
                let o = to_complex(&random_orthogonal(n, rng));
                &o * block * o.transpose()
            } else {
                let v = random_unitary(n, rng);
                &v * block * v.transpose()
            }
        }
        CII => {
            let k = pos(rng, 2)?;
            let sp = random_unitary_symplectic(n, rng);
            let d = pairs(&signed(k / 2, &s));
            &sp * diag_c(&d) * sp.adjoint()
        }
        C => {
            let s1 = random_unitary_symplectic(n, rng);
            let s2 = random_unitary_symplectic(n, rng);
            &s1 * diag_c(&pairs(&s)) * s2
        }
        CI => {
            let sp = random_unitary_symplectic(n, rng);
            &sp * diag_c(&pairs(&s)) * sp.transpose()
        }
    })
}
