//! Model files: TOML documents with a `[model]` table, an optional
//! `[symmetry]` declaration and optional `[tolerances]` overrides. Complex
//! entries are written as `[re, im]`; a matrix is an array of rows.
//!
//! ```toml
//! energy = 0.0
//!
//! [model]
//! kind = "dirac"
//! w = [[[1.0, 0.0]]]
//!
//! [symmetry]
//! class = "AIII"
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use tenfold_core::linalg::{identity, max_abs, CMatrix, Tolerances};
use tenfold_core::models::{
    dirac_bulk, dirac_bulk_at, schrodinger_bulk, tb_bulk, BulkData, ConstantDiracModel, ConstantSchrodingerModel,
    PiecewiseDiracProfile, TightBindingModel,
};
use tenfold_core::symmetry::{
    check_j_compatibility, find_canonical_frame, AntiUnitary, CanonicalFrame, CartanClass, SymmetrySet,
};
use tenfold_core::symplectic::SymplecticForm;

use crate::error::{CliError, CliResult};

/// Rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub energy: f64,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawModel")]
pub enum ModelSpec {
    /// `D = [[−i∂, −iW], [iW*, i∂]]` with constant `W`.
    Dirac { w: MatrixSpec },
    /// `−∂² + V` with constant hermitian `V`.
    Schrodinger { v: MatrixSpec },
    /// Periodic chain; `onsite` defaults to zero blocks.
    TightBinding {
        hoppings: Vec<MatrixSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        onsite: Option<Vec<MatrixSpec>>,
    },
    /// `W` piecewise constant with jumps at `breakpoints`.
    PiecewiseDirac { breakpoints: Vec<f64>, potentials: Vec<MatrixSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Dirac,
    Schrodinger,
    TightBinding,
    PiecewiseDirac,
}

/// Flat form of `[model]`. Deserializing a struct (rather than a tagged enum)
/// keeps toml's line information on type errors.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: RawKind,
    w: Option<MatrixSpec>,
    v: Option<MatrixSpec>,
    hoppings: Option<Vec<MatrixSpec>>,
    onsite: Option<Vec<MatrixSpec>>,
    breakpoints: Option<Vec<f64>>,
    potentials: Option<Vec<MatrixSpec>>,
}

impl TryFrom<RawModel> for ModelSpec {
    type Error = String;

    fn try_from(r: RawModel) -> Result<Self, String> {
        let (kind, allowed): (&str, &[&str]) = match r.kind {
            RawKind::Dirac => ("dirac", &["w"]),
            RawKind::Schrodinger => ("schrodinger", &["v"]),
            RawKind::TightBinding => ("tight_binding", &["hoppings", "onsite"]),
            RawKind::PiecewiseDirac => ("piecewise_dirac", &["breakpoints", "potentials"]),
        };
        let present = [
            ("w", r.w.is_some()),
            ("v", r.v.is_some()),
            ("hoppings", r.hoppings.is_some()),
            ("onsite", r.onsite.is_some()),
            ("breakpoints", r.breakpoints.is_some()),
            ("potentials", r.potentials.is_some()),
        ];
        if let Some((name, _)) = present.iter().find(|(name, set)| *set && !allowed.contains(name)) {
            return Err(format!("model.{name} is not a field of kind \"{kind}\""));
        }
        let need = |name: &str| format!("kind \"{kind}\" needs model.{name}");
        Ok(match r.kind {
            RawKind::Dirac => ModelSpec::Dirac { w: r.w.ok_or_else(|| need("w"))? },
            RawKind::Schrodinger => ModelSpec::Schrodinger { v: r.v.ok_or_else(|| need("v"))? },
            RawKind::TightBinding => {
                ModelSpec::TightBinding { hoppings: r.hoppings.ok_or_else(|| need("hoppings"))?, onsite: r.onsite }
            }
            RawKind::PiecewiseDirac => ModelSpec::PiecewiseDirac {
                breakpoints: r.breakpoints.ok_or_else(|| need("breakpoints"))?,
                potentials: r.potentials.ok_or_else(|| need("potentials"))?,
            },
        })
    }
}

/// Either a named class, meaning the model is already written in that
/// class's canonical basis, or explicit `T`, `C`, `S` acting on the boundary
/// space.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<MatrixSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<f64>,
}

impl ToleranceOverrides {
    /// `self` wins over `base` field by field.
    pub fn over(self, base: ToleranceOverrides) -> ToleranceOverrides {
        ToleranceOverrides {
            rank: self.rank.or(base.rank),
            eig: self.eig.or(base.eig),
            frame: self.frame.or(base.frame),
        }
    }

    pub fn resolve(self) -> tenfold_core::Result<Tolerances> {
        let d = Tolerances::default();
        Tolerances::new(self.rank.unwrap_or(d.rank_tol), self.eig.unwrap_or(d.eig_tol), self.frame.unwrap_or(d.frame_tol))
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Dirac(ConstantDiracModel),
    Schrodinger(ConstantSchrodingerModel),
    TightBinding(TightBindingModel),
    Piecewise(PiecewiseDiracProfile),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Dirac(_) => "dirac",
            Model::Schrodinger(_) => "schrodinger",
            Model::TightBinding(_) => "tight_binding",
            Model::Piecewise(_) => "piecewise_dirac",
        }
    }

    /// Half the boundary dimension.
    pub fn n(&self) -> usize {
        match self {
            Model::Dirac(m) => m.n(),
            Model::Schrodinger(m) => m.m(),
            Model::TightBinding(m) => m.n(),
            Model::Piecewise(p) => p.n(),
        }
    }

    pub fn form(&self, tol: &Tolerances) -> tenfold_core::Result<SymplecticForm> {
        match self {
            Model::Dirac(_) | Model::Piecewise(_) => Ok(SymplecticForm::standard(self.n())),
            Model::Schrodinger(m) => Ok(m.boundary_form()),
            Model::TightBinding(m) => m.boundary_form(tol),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Declared {
    Class(CartanClass),
    Explicit(SymmetrySet),
}

/// A validated model file.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    /// How the file was named on the command line.
    pub source: String,
    pub energy: f64,
    pub model: Model,
    pub declared: Declared,
    pub class: CartanClass,
    pub tol: Tolerances,
}

impl LoadedModel {
    pub fn bulk(&self) -> tenfold_core::Result<BulkData> {
        let tol = &self.tol;
        match &self.model {
            Model::Dirac(m) if self.energy == 0.0 => dirac_bulk(m, tol),
            Model::Dirac(m) => dirac_bulk_at(m, self.energy, tol),
            Model::Schrodinger(m) => schrodinger_bulk(m, tol),
            Model::TightBinding(m) => tb_bulk(m, self.energy, tol),
            Model::Piecewise(_) => Err(tenfold_core::Error::Unsupported(
                "a piecewise profile has two bulks; use the junction command".into(),
            )),
        }
    }

    /// Change of Leray coordinates into the canonical basis of the class.
    pub fn canonical_frame(&self) -> tenfold_core::Result<CanonicalFrame> {
        match &self.declared {
            Declared::Class(class) => {
                let id = identity(self.model.n());
                Ok(CanonicalFrame { class: *class, r_plus: id.clone(), r_minus: id, residual: 0.0 })
            }
            Declared::Explicit(sym) => find_canonical_frame(sym, &self.model.form(&self.tol)?, &self.tol),
        }
    }
}

pub fn parse_matrix(field: &str, spec: &MatrixSpec) -> Result<CMatrix, String> {
    let rows = spec.len();
    if rows == 0 {
        return Err(format!("{field}: empty matrix"));
    }
    let cols = spec[0].len();
    for (i, row) in spec.iter().enumerate() {
        if row.len() != cols {
            return Err(format!("{field}: row {i} has {} entries, expected {cols}", row.len()));
        }
        if let Some(j) = row.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
            return Err(format!("{field}: entry ({i}, {j}) is not finite"));
        }
    }
    if cols == 0 {
        return Err(format!("{field}: empty rows"));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| Complex64::new(spec[i][j][0], spec[i][j][1])))
}

pub fn matrix_spec(m: &CMatrix) -> MatrixSpec {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn square(field: &str, spec: &MatrixSpec, n: Option<usize>) -> Result<CMatrix, String> {
    let m = parse_matrix(field, spec)?;
    if !m.is_square() {
        return Err(format!("{field}: expected a square matrix, got {}x{}", m.nrows(), m.ncols()));
    }
    if let Some(n) = n {
        if m.nrows() != n {
            return Err(format!("{field}: expected {n}x{n}, got {}x{}", m.nrows(), m.ncols()));
        }
    }
    Ok(m)
}

fn build_model(spec: &ModelSpec, energy: f64, tol: &Tolerances) -> Result<Model, String> {
    let core = |field: &str, e: tenfold_core::Error| format!("{field}: {e}");
    Ok(match spec {
        ModelSpec::Dirac { w } => Model::Dirac(ConstantDiracModel::new(square("model.w", w, None)?).map_err(|e| core("model.w", e))?),
        ModelSpec::Schrodinger { v } => {
            let v = square("model.v", v, None)?;
            let d = tenfold_core::linalg::hermiticity_defect(&v);
            if d >= tol.frame_tol * max_abs(&v).max(1.0) {
                return Err(format!("model.v: not hermitian (residual {d:.3e})"));
            }
            Model::Schrodinger(ConstantSchrodingerModel::new(v, energy).map_err(|e| core("model.v", e))?)
        }
        ModelSpec::TightBinding { hoppings, onsite } => {
            if hoppings.is_empty() {
                return Err("model.hoppings: at least one hopping matrix is required".into());
            }
            let a = hoppings
                .iter()
                .enumerate()
                .map(|(k, m)| square(&format!("model.hoppings[{k}]"), m, None))
                .collect::<Result<Vec<_>, _>>()?;
            let n = a[0].nrows();
            let b = match onsite {
                None => vec![CMatrix::zeros(n, n); a.len()],
                Some(b) if b.len() != a.len() => {
                    return Err(format!("model.onsite: {} blocks for {} hoppings", b.len(), a.len()));
                }
                Some(b) => b
                    .iter()
                    .enumerate()
                    .map(|(k, m)| square(&format!("model.onsite[{k}]"), m, Some(n)))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            Model::TightBinding(TightBindingModel::new(a, b, tol).map_err(|e| core("model", e))?)
        }
        ModelSpec::PiecewiseDirac { breakpoints, potentials } => {
            let w = potentials
                .iter()
                .enumerate()
                .map(|(k, m)| square(&format!("model.potentials[{k}]"), m, None))
                .collect::<Result<Vec<_>, _>>()?;
            Model::Piecewise(PiecewiseDiracProfile::new(breakpoints.clone(), w).map_err(|e| core("model", e))?)
        }
    })
}

fn build_symmetry(decl: Option<&SymmetryDecl>, model: &Model, tol: &Tolerances) -> Result<(Declared, CartanClass), String> {
    let Some(decl) = decl else {
        return Ok((Declared::Class(CartanClass::A), CartanClass::A));
    };
    let explicit = decl.t.is_some() || decl.c.is_some() || decl.s.is_some();
    match (&decl.class, explicit) {
        (Some(_), true) => Err("symmetry: give either a class name or explicit t/c/s matrices, not both".into()),
        (Some(name), false) => {
            let class: CartanClass = name.parse().map_err(|e| format!("symmetry.class: {e}"))?;
            if class.requires_even() && model.n() % 2 == 1 {
                return Err(format!("symmetry.class: class {class} needs an even N, the model has N = {}", model.n()));
            }
            Ok((Declared::Class(class), class))
        }
        (None, false) => Ok((Declared::Class(CartanClass::A), CartanClass::A)),
        (None, true) => {
            let dim = 2 * model.n();
            let field = |name: &str, m: &Option<MatrixSpec>| -> Result<Option<CMatrix>, String> {
                m.as_ref().map(|m| square(&format!("symmetry.{name}"), m, Some(dim))).transpose()
            };
            let anti = |name: &str, m: Option<CMatrix>| -> Result<Option<AntiUnitary>, String> {
                m.map(|m| AntiUnitary::new(m, tol).map_err(|e| format!("symmetry.{name}: {e}"))).transpose()
            };
            let t = anti("t", field("t", &decl.t)?)?;
            let c = anti("c", field("c", &decl.c)?)?;
            let s = field("s", &decl.s)?;
            let sym = SymmetrySet::new(t, c, s, tol).map_err(|e| format!("symmetry: {e}"))?;
            let form = model.form(tol).map_err(|e| format!("model: {e}"))?;
            let compat = check_j_compatibility(&sym, &form, tol).map_err(|e| format!("symmetry: {e}"))?;
            if !compat.pass {
                return Err(format!(
                    "symmetry: declared symmetries do not preserve the boundary form (residuals T {:?}, C {:?}, S {:?})",
                    compat.t_residual, compat.c_residual, compat.s_residual
                ));
            }
            let class = tenfold_core::symmetry::cartan_class(&sym).map_err(|e| format!("symmetry: {e}"))?;
            Ok((Declared::Explicit(sym), class))
        }
    }
}

impl ModelFile {
    pub fn from_toml(text: &str, source: &str) -> CliResult<ModelFile> {
        toml::from_str(text).map_err(|e| CliError::parse(source, e.to_string().trim_end()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model files always serialize")
    }

    /// Validates the file. `overrides` take precedence over the file's own
    /// `[tolerances]`.
    pub fn load(&self, source: &str, overrides: ToleranceOverrides) -> CliResult<LoadedModel> {
        if !self.energy.is_finite() {
            return Err(CliError::parse(source, "energy: must be finite"));
        }
        let tol = overrides
            .over(self.tolerances.unwrap_or_default())
            .resolve()
            .map_err(|e| CliError::parse(source, format!("tolerances: {e}")))?;
        let model = build_model(&self.model, self.energy, &tol).map_err(|m| CliError::parse(source, m))?;
        let (declared, class) = build_symmetry(self.symmetry.as_ref(), &model, &tol).map_err(|m| CliError::parse(source, m))?;
        Ok(LoadedModel { source: source.to_string(), energy: self.energy, model, declared, class, tol })
    }
}

pub fn read_model(path: &Path, overrides: ToleranceOverrides) -> CliResult<LoadedModel> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(&source, e.to_string()))?;
    ModelFile::from_toml(&text, &source)?.load(&source, overrides)
}
