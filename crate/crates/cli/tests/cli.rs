use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tenfold::report::{Index, RunReport};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn tenfold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tenfold")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs a report-producing command with `--out` and parses the payload.
fn report(args: &[&str]) -> RunReport {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", out.to_str().unwrap()]);
    let o = tenfold(&full);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let parsed = RunReport::from_json(&text).unwrap();
    assert_eq!(parsed.to_json() + "\n", text, "payload must round-trip");
    parsed
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_counts_positive_directions_of_w() {
    let pos = report(&["classify", path(&fixture("dirac_positive.toml"))]);
    assert_eq!(pos.class, "AIII");
    assert_eq!(pos.bulks[0].index_plus, Index::KernelDim(1));
    assert_eq!(pos.bulks[0].index_minus, Index::KernelDim(0));
    let neg = report(&["classify", path(&fixture("dirac_negative.toml"))]);
    assert_eq!(neg.bulks[0].index_plus, Index::KernelDim(0));
    assert_eq!(neg.bulks[0].index_minus, Index::KernelDim(1));
    assert_eq!(neg.consistency, Some(true));
}

#[test]
fn explicit_and_named_symmetries_agree() {
    let named = report(&["classify", path(&fixture("dirac_negative.toml"))]);
    let explicit = report(&["classify", path(&fixture("dirac_negative_explicit.toml"))]);
    assert_eq!(named.class, explicit.class);
    assert_eq!(named.bulks[0].index_plus, explicit.bulks[0].index_plus);
}

#[test]
fn band_energy_is_a_domain_error() {
    let o = tenfold(&["classify", path(&fixture("ssh_in_band.toml"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("gap closed"), "{}", stderr(&o));
}

#[test]
fn mass_wall_junction_with_oracle() {
    let r = report(&["junction", "--verify", path(&fixture("dirac_positive.toml")), path(&fixture("dirac_negative.toml"))]);
    assert_eq!((r.protected_bound, r.predicted_kernel_dim), (Some(1), Some(1)));
    let oracle = r.oracle.unwrap();
    assert_eq!(oracle.verdict, "PASS");
    assert_eq!(oracle.localized_count, 1);
}

#[test]
fn identical_bulks_have_no_modes() {
    let f = fixture("dirac_positive.toml");
    let r = report(&["junction", path(&f), path(&f)]);
    assert_eq!((r.protected_bound, r.predicted_kernel_dim), (Some(0), Some(0)));
    assert!(r.oracle.is_none());
}

#[test]
fn chiral_pair_with_index_jump_two() {
    let r = report(&["junction", path(&fixture("aiii_n2_trivial.toml")), path(&fixture("aiii_n2_inverted.toml"))]);
    assert_eq!(r.index_left, Some(Index::KernelDim(2)));
    assert_eq!(r.index_right, Some(Index::KernelDim(0)));
    assert_eq!(r.protected_bound, Some(2));
    assert_eq!(r.predicted_kernel_dim, Some(2));
}

#[test]
fn piecewise_profile_and_spectrum_dump() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("spectrum.csv");
    let r = report(&["verify", path(&fixture("mass_wall.toml")), "--spectra", path(&csv_path)]);
    assert_eq!(r.class, "D");
    assert_eq!(r.protected_bound, Some(1));
    let oracle = r.oracle.unwrap();
    assert_eq!(oracle.verdict, "PASS");
    assert_eq!(oracle.spectra_file.as_deref(), Some(path(&csv_path)));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue,central_weight"));
    assert_eq!(lines.count(), oracle.eigenvalues_in_window.len());
}

#[test]
fn ssh_seam_is_verified() {
    let r = report(&["verify", path(&fixture("ssh_left.toml")), path(&fixture("ssh_right.toml")), "--spec-cells", "60"]);
    assert_eq!((r.protected_bound, r.predicted_kernel_dim), (Some(1), Some(1)));
    assert_eq!(r.oracle.unwrap().localized_count, 1);
}

#[test]
fn mismatched_boundaries_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let other = write(dir.path(), "ssh21.toml", "[model]\nkind = \"tight_binding\"\nhoppings = [[[[2.0, 0.0]]], [[[1.0, 0.0]]]]\n[symmetry]\nclass = \"BDI\"\n");
    let o = tenfold(&["junction", path(&fixture("ssh_left.toml")), path(&other)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("incompatible boundary"), "{}", stderr(&o));
    let o = tenfold(&["junction", path(&fixture("ssh_left.toml")), path(&fixture("dirac_positive.toml"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn parse_errors_name_the_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.toml", "[model]\nkind = \"dirac\"\nw = [[1.0]]\n");
    let o = tenfold(&["classify", path(&broken)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let ragged = write(dir.path(), "ragged.toml", "[model]\nkind = \"dirac\"\nw = [[[1, 0], [0, 0]], [[1, 0]]]\n");
    let o = tenfold(&["classify", path(&ragged)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("model.w: row 1"), "{}", stderr(&o));
    let o = tenfold(&["classify", path(&dir.path().join("missing.toml"))]);
    assert_eq!(code(&o), 3);
    assert_eq!(code(&tenfold(&["classify"])), 3);
}

fn read_csv(p: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(p).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["parameter", "status", "gap_margin", "index", "predicted_modes"]
    );
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn mass_sweep_flips_sign_through_closed_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mass.csv");
    let o = tenfold(&["sweep", path(&fixture("sweep_dirac_mass.toml")), "--from", "-1", "--to", "1", "--points", "41", "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 41);
    for (k, row) in rows.iter().enumerate() {
        let m: f64 = row[0].parse().unwrap();
        match k.cmp(&20) {
            std::cmp::Ordering::Equal => {
                assert_eq!(m, 0.0);
                assert_eq!(row[1], "GAP_CLOSED");
            }
            ord => {
                assert_eq!(row[1], "OK");
                let gap: f64 = row[2].parse().unwrap();
                assert!((gap - m.abs()).abs() < 1e-12, "gap {gap} at m = {m}");
                assert_eq!(row[3], if ord.is_lt() { "-1" } else { "+1" });
            }
        }
    }
}

#[test]
fn ssh_sweep_closes_at_equal_bonds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ssh.csv");
    let o = tenfold(&["sweep", path(&fixture("sweep_ssh.toml")), "--from", "0.5", "--to", "2", "--points", "31", "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&out);
    let closed: Vec<f64> = rows.iter().filter(|r| r[1] == "GAP_CLOSED").map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(closed, vec![1.0]);
    // Below v = 1 the monodromy eigenvalues have moduli v and 1/v.
    for r in rows.iter().filter(|r| r[1] == "OK") {
        let v: f64 = r[0].parse().unwrap();
        let gap: f64 = r[2].parse().unwrap();
        let expected = if v < 1.0 { 1.0 - v } else { 1.0 - 1.0 / v };
        assert!((gap - expected).abs() < 1e-9, "v = {v}: {gap} vs {expected}");
        assert_eq!(r[3], if v < 1.0 { "1" } else { "0" });
    }
}

#[test]
fn sweep_without_topology_change_has_constant_index() {
    let dir = tempfile::tempdir().unwrap();
    let template = write(dir.path(), "phase.toml", "[model]\nkind = \"dirac\"\nw = [[[1.0, \"@sweep\"]]]\n");
    let out = dir.path().join("phase.csv");
    let reference = write(dir.path(), "ref.toml", "[model]\nkind = \"dirac\"\nw = [[[1.0, 0.0]]]\n[symmetry]\nclass = \"D\"\n");
    let o = tenfold(&["sweep", path(&template), "--from", "-1", "--to", "1", "--points", "9", "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&out);
    assert!(rows.iter().all(|r| r[1] == "OK" && r[3] == "0"));
    // With a reference bulk the junction count is reported per point.
    let o = tenfold(&[
        "sweep",
        path(&fixture("sweep_dirac_mass.toml")),
        "--from=-1",
        "--to=1",
        "--points=3",
        "--reference",
        path(&reference),
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&out);
    assert_eq!(rows[0][4], "1");
    assert_eq!(rows[1][1], "GAP_CLOSED");
    assert_eq!(rows[2][4], "0");
}

#[test]
fn templates_need_exactly_one_placeholder() {
    let dir = tempfile::tempdir().unwrap();
    let two = write(dir.path(), "two.toml", "[model]\nkind = \"dirac\"\nw = [[[\"@sweep\", \"@sweep\"]]]\n");
    let out = dir.path().join("x.csv");
    let o = tenfold(&["sweep", path(&two), "--from", "0", "--to", "1", "--out", path(&out)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("bad sweep template"), "{}", stderr(&o));
    let o = tenfold(&["sweep", path(&fixture("dirac_positive.toml")), "--from", "0", "--to", "1", "--out", path(&out)]);
    assert_eq!(code(&o), 3);
}

#[test]
fn table_lists_ten_classes() {
    let o = tenfold(&["table"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    let row = |label: &str| rows.iter().find(|r| r.split_whitespace().next() == Some(label)).unwrap().to_string();
    assert!(row("D").contains("det(U) in {+1,-1}"));
    assert!(row("CI").trim_end().ends_with(" 0"));
}

#[test]
fn classify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["dirac_positive", "dirac_negative", "dirac_negative_explicit", "aiii_n2_inverted", "schrodinger", "ssh_left"] {
        let f = fixture(&format!("{name}.toml"));
        let runs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
            .map(|k| {
                let out = dir.path().join(format!("{name}-{k}.json"));
                let o = tenfold(&["classify", path(&f), "--out", path(&out)]);
                assert_eq!(code(&o), 0, "{}", stderr(&o));
                (o.stdout, std::fs::read(&out).unwrap())
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{name}");
    }
}

#[test]
fn tolerance_flags_are_validated() {
    let f = fixture("dirac_positive.toml");
    assert_eq!(code(&tenfold(&["--tol-eig", "1e-7", "classify", path(&f)])), 0);
    assert_eq!(code(&tenfold(&["classify", path(&f), "--tol-eig", "-1"])), 3);
    assert_eq!(code(&tenfold(&["--help"])), 0);
}
