//! Pipelines behind each subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tenfold_core::index::{bulk_consistency_check, topological_index_matrix};
use tenfold_core::junction::{continuous_junction_report, predicted_zero_modes, protected_bound, JunctionReport};
use tenfold_core::linalg::{identity, max_abs};
use tenfold_core::models::{dirac_bulk_at, BulkData, PiecewiseDiracProfile};
use tenfold_core::symmetry::{membership_residual, CanonicalFrame, CartanClass};
use tenfold_core::verify::{
    count_near_zero_localized, discretize_dirac_junction, finite_chain, oracle_compare, DiscretizationSpec, Discretized,
    OracleReport,
};
use tenfold_core::Error as CoreError;

use crate::error::{CliError, CliResult};
use crate::model_file::{read_model, LoadedModel, Model, ModelFile, ToleranceOverrides};
use crate::report::{BulkSummary, Index, OracleSummary, RunReport};

/// Placeholder marking the swept scalar in a sweep template.
pub const SWEEP_PLACEHOLDER: &str = "@sweep";

/// Oracle settings; unset fields keep the library defaults.
#[derive(Debug, Clone, Default)]
pub struct OracleOptions {
    pub half_length: Option<f64>,
    pub h: Option<f64>,
    pub n_cells: Option<usize>,
    pub energy_window: Option<f64>,
    /// Where to write the window spectrum as CSV.
    pub spectra: Option<PathBuf>,
}

impl OracleOptions {
    fn spec(&self, energy: f64) -> DiscretizationSpec {
        let d = DiscretizationSpec::default();
        DiscretizationSpec {
            half_length: self.half_length.unwrap_or(d.half_length),
            h: self.h.unwrap_or(d.h),
            n_cells: self.n_cells.unwrap_or(d.n_cells),
            energy_window: self.energy_window,
            energy,
            ..d
        }
    }
}

fn summarize(m: &LoadedModel, bulk: &BulkData, frame: &CanonicalFrame) -> CliResult<BulkSummary> {
    let class = m.class;
    let up = frame.transform(bulk.u_plus.matrix());
    let um = frame.transform(bulk.u_minus.matrix());
    let ip = topological_index_matrix(&up, class, &m.tol)?;
    let im = topological_index_matrix(&um, class, &m.tol)?;
    Ok(BulkSummary {
        source: m.source.clone(),
        kind: m.model.kind().into(),
        n: bulk.n(),
        energy: m.energy,
        gap_margin: bulk.gap.margin(),
        membership_residual_plus: membership_residual(&up, class)?,
        membership_residual_minus: membership_residual(&um, class)?,
        index_plus: ip.into(),
        index_minus: im.into(),
        consistent: bulk_consistency_check(class, ip, im, bulk.n())?,
    })
}

fn core_index(i: Index) -> tenfold_core::IndexValue {
    match i {
        Index::Zero => tenfold_core::IndexValue::Zero,
        Index::KernelDim(k) => tenfold_core::IndexValue::KernelDim(k),
        Index::Sign(s) => tenfold_core::IndexValue::Sign(s),
    }
}

pub fn classify(path: &Path, overrides: ToleranceOverrides) -> CliResult<RunReport> {
    let m = read_model(path, overrides)?;
    let bulk = m.bulk()?;
    let summary = summarize(&m, &bulk, &m.canonical_frame()?)?;
    Ok(RunReport {
        command: "classify".into(),
        class: m.class.label().into(),
        consistency: Some(summary.consistent),
        bulks: vec![summary],
        index_left: None,
        index_right: None,
        protected_bound: None,
        predicted_kernel_dim: None,
        oracle: None,
    })
}

/// Everything `junction` and `verify` need from the input files.
struct JunctionInput {
    class: CartanClass,
    energy: f64,
    report: JunctionReport,
    bulks: Vec<BulkSummary>,
    operator: Operator,
}

enum Operator {
    Dirac(PiecewiseDiracProfile),
    Chain(Box<(tenfold_core::models::TightBindingModel, tenfold_core::models::TightBindingModel)>),
    None(&'static str),
}

fn is_identity(frame: &CanonicalFrame, tol: f64) -> bool {
    let id = identity(frame.r_plus.nrows());
    max_abs(&(&frame.r_plus - &id)) < tol && max_abs(&(&frame.r_minus - &id)) < tol
}

fn continuous_input(m: LoadedModel) -> CliResult<JunctionInput> {
    let Model::Piecewise(profile) = &m.model else {
        return Err(CliError::Usage(format!(
            "{}: a single model file must be a piecewise_dirac profile, got {}",
            m.source,
            m.model.kind()
        )));
    };
    let frame = m.canonical_frame()?;
    if !is_identity(&frame, m.tol.frame_tol) {
        return Err(CoreError::Unsupported("piecewise profiles with symmetries outside the canonical basis".into()).into());
    }
    let report = continuous_junction_report(profile, m.energy, m.class, &m.tol)?;
    let end = |model: tenfold_core::models::ConstantDiracModel, side: &str| -> CliResult<BulkSummary> {
        let bulk = dirac_bulk_at(&model, m.energy, &m.tol)?;
        let mut s = summarize(&m, &bulk, &frame)?;
        s.source = format!("{} ({side} end)", m.source);
        Ok(s)
    };
    let bulks = vec![end(profile.left(), "left")?, end(profile.right(), "right")?];
    Ok(JunctionInput { class: m.class, energy: m.energy, report, bulks, operator: Operator::Dirac(profile.clone()) })
}

fn hard_input(l: LoadedModel, r: LoadedModel) -> CliResult<JunctionInput> {
    if l.class != r.class {
        return Err(CliError::Domain(format!("left model is in class {} but right model is in class {}", l.class, r.class)));
    }
    if l.energy != r.energy {
        return Err(CliError::Domain(format!("energies differ: {} and {}", l.energy, r.energy)));
    }
    let (lb, rb) = (l.bulk()?, r.bulk()?);
    let predicted = predicted_zero_modes(&lb, &rb, &l.tol)?;
    let left = summarize(&l, &lb, &l.canonical_frame()?)?;
    let right = summarize(&r, &rb, &r.canonical_frame()?)?;
    let (il, ir) = (core_index(left.index_plus), core_index(right.index_plus));
    let report = JunctionReport {
        class: l.class,
        index_left: il,
        index_right: ir,
        protected_bound: protected_bound(l.class, il, ir)?,
        predicted_kernel_dim: predicted,
        consistency: left.consistent && right.consistent,
    };
    let operator = match (&l.model, &r.model) {
        (Model::Dirac(a), Model::Dirac(b)) => Operator::Dirac(PiecewiseDiracProfile::hard_wall(a.w().clone(), b.w().clone())?),
        (Model::TightBinding(a), Model::TightBinding(b)) => Operator::Chain(Box::new((a.clone(), b.clone()))),
        (Model::Schrodinger(_), _) | (_, Model::Schrodinger(_)) => Operator::None("Schrodinger junctions"),
        _ => Operator::None("junctions between different model kinds"),
    };
    Ok(JunctionInput { class: l.class, energy: l.energy, report, bulks: vec![left, right], operator })
}

fn write_spectrum(path: &Path, oracle: &OracleReport) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["index", "eigenvalue", "central_weight"]).map_err(io)?;
    for (k, e, c) in oracle.spectrum_rows() {
        w.write_record([k.to_string(), format!("{e:e}"), format!("{c:e}")]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

fn run_oracle(input: &JunctionInput, opts: &OracleOptions) -> CliResult<OracleSummary> {
    let spec = opts.spec(input.energy);
    let (disc, warnings): (Discretized, Vec<String>) = match &input.operator {
        Operator::Dirac(profile) => {
            let d = discretize_dirac_junction(profile, &spec)?;
            let w = spec.warnings(d.bulk_gap);
            (d, w)
        }
        Operator::Chain(pair) => (finite_chain(&pair.0, &pair.1, &spec)?, Vec::new()),
        Operator::None(what) => return Err(CoreError::Unsupported(format!("no finite-size oracle for {what}")).into()),
    };
    let mut oracle = count_near_zero_localized(&disc, &spec)?;
    if let Some(path) = &opts.spectra {
        write_spectrum(path, &oracle)?;
        oracle.spectra_file = Some(path.display().to_string());
    }
    Ok(OracleSummary {
        verdict: oracle_compare(&input.report, &oracle).to_string(),
        localized_count: oracle.localized_count,
        localized_energies: oracle.localized_energies,
        eigenvalues_in_window: oracle.eigenvalues_in_window,
        central_weights: oracle.central_weights,
        energy_window: oracle.energy_window,
        matrix_dim: disc.dim(),
        warnings,
        spectra_file: oracle.spectra_file,
    })
}

/// Junction of two bulk files, or of the two ends of one piecewise profile.
/// With `oracle` set the junction is also diagonalized at finite size.
pub fn junction(paths: &[PathBuf], overrides: ToleranceOverrides, oracle: Option<&OracleOptions>) -> CliResult<RunReport> {
    let input = match paths {
        [one] => continuous_input(read_model(one, overrides)?)?,
        [l, r] => hard_input(read_model(l, overrides)?, read_model(r, overrides)?)?,
        _ => return Err(CliError::Usage(format!("expected one or two model files, got {}", paths.len()))),
    };
    let oracle = oracle.map(|o| run_oracle(&input, o)).transpose()?;
    let rep = &input.report;
    Ok(RunReport {
        command: if oracle.is_some() { "verify" } else { "junction" }.into(),
        class: input.class.label().into(),
        index_left: Some(rep.index_left.into()),
        index_right: Some(rep.index_right.into()),
        protected_bound: Some(rep.protected_bound),
        predicted_kernel_dim: Some(rep.predicted_kernel_dim),
        consistency: Some(rep.consistency),
        bulks: input.bulks,
        oracle,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    /// `OK` or `GAP_CLOSED`.
    pub status: String,
    pub gap_margin: Option<f64>,
    pub index: Option<String>,
    pub predicted_modes: Option<usize>,
}

fn placeholders(v: &toml::Value, path: &str, found: &mut Vec<String>) {
    match v {
        toml::Value::String(s) if s == SWEEP_PLACEHOLDER => found.push(path.to_string()),
        toml::Value::Array(items) => {
            for (k, item) in items.iter().enumerate() {
                placeholders(item, &format!("{path}[{k}]"), found);
            }
        }
        toml::Value::Table(t) => {
            for (key, item) in t {
                let p = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                placeholders(item, &p, found);
            }
        }
        _ => {}
    }
}

fn substitute(v: &mut toml::Value, x: f64) {
    match v {
        toml::Value::String(s) if s == SWEEP_PLACEHOLDER => *v = toml::Value::Float(x),
        toml::Value::Array(items) => items.iter_mut().for_each(|i| substitute(i, x)),
        toml::Value::Table(t) => t.iter_mut().for_each(|(_, i)| substitute(i, x)),
        _ => {}
    }
}

/// Grid `from, …, to` with `points` entries; `points = 1` gives `from`.
pub fn sweep_grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![from];
    }
    (0..points).map(|k| from + (to - from) * k as f64 / (points - 1) as f64).collect()
}

/// Instantiates the template at every grid point. Points where the bulk is
/// not gapped give `GAP_CLOSED` rows; `reference`, when given, is the left
/// side of a junction whose predicted mode count is reported.
pub fn sweep(
    template: &Path,
    grid: &[f64],
    reference: Option<&Path>,
    overrides: ToleranceOverrides,
) -> CliResult<Vec<SweepRow>> {
    let source = template.display().to_string();
    let bad = |message: String| CliError::BadTemplate { path: source.clone(), message };
    let text = std::fs::read_to_string(template).map_err(|e| CliError::parse(&source, e.to_string()))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| CliError::parse(&source, e.to_string().trim_end()))?;
    let value = toml::Value::Table(table);
    let mut found = Vec::new();
    placeholders(&value, "", &mut found);
    if found.len() != 1 {
        return Err(bad(format!(
            "expected exactly one \"{SWEEP_PLACEHOLDER}\" value, found {} ({})",
            found.len(),
            found.join(", ")
        )));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage("sweep range must be finite".into()));
    }
    let reference = reference.map(|p| read_model(p, overrides)).transpose()?;
    let reference_bulk = reference.as_ref().map(|r| r.bulk()).transpose()?;
    let mut rows = Vec::with_capacity(grid.len());
    for &x in grid {
        let mut v = value.clone();
        substitute(&mut v, x);
        let file: ModelFile = v.try_into().map_err(|e: toml::de::Error| bad(format!("at {} = {x}: {e}", found[0])))?;
        let m = file.load(&format!("{source} [{} = {x}]", found[0]), overrides)?;
        let bulk = match m.bulk() {
            Ok(b) => b,
            Err(CoreError::GapClosed(_) | CoreError::NotInGap { .. }) => {
                rows.push(SweepRow { parameter: x, status: "GAP_CLOSED".into(), gap_margin: None, index: None, predicted_modes: None });
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let summary = summarize(&m, &bulk, &m.canonical_frame()?)?;
        let predicted = match &reference_bulk {
            Some(rb) => Some(predicted_zero_modes(rb, &bulk, &m.tol)?),
            None => None,
        };
        rows.push(SweepRow {
            parameter: x,
            status: "OK".into(),
            gap_margin: Some(summary.gap_margin),
            index: Some(summary.index_plus.compact()),
            predicted_modes: predicted,
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// The ten symmetry classes with their signatures, classifying spaces and
/// index groups.
pub fn table() -> String {
    let sign = |s: i8| match s {
        0 => "0",
        1 => "+1",
        _ => "-1",
    };
    let mut out = format!("{:<6}{:>4}{:>4}{:>4}  {:<30}{}\n", "class", "T", "C", "S", "classifying space", "index");
    for class in CartanClass::ALL {
        let (t, c, s) = class.signature();
        out.push_str(&format!(
            "{:<6}{:>4}{:>4}{:>4}  {:<30}{}\n",
            class.label(),
            sign(t),
            sign(c),
            if s { "1" } else { "0" },
            class.classifying_space(),
            class.index_description()
        ));
    }
    out
}
