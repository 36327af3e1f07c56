use std::fs;
use std::path::{Path, PathBuf};

use globlin::cli::config::RunConfig;
use globlin::cli::report::{read_report, Summary, CompareEntry, SweepRow};
use globlin::cli::{self, EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK};
use globlin::iterate::IterationReport;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn run(cmd: &str, config: &Path, out: &Path) -> i32 {
    cli::run(["globlin", cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"])
}

fn table(out: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(out.join("table.csv")).unwrap();
    reader.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}

fn write_variant(dir: &Path, base: &str, from: &str, to: &str) -> PathBuf {
    let text = fs::read_to_string(config(base)).unwrap();
    assert!(text.contains(from), "{base} has no `{from}`");
    let path = dir.join(format!("variant-{base}"));
    fs::write(&path, text.replace(from, to)).unwrap();
    path
}

#[test]
fn every_shipped_config_loads() {
    for entry in fs::read_dir(config("")).unwrap() {
        let path = entry.unwrap().path();
        let cfg = RunConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.build().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn manufactured_elliptic_solve_reaches_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("solve", &config("elliptic_manufactured.toml"), dir.path()), EXIT_OK);
    let rows = table(dir.path());
    assert_eq!(rows[0][1], "");
    let last: f64 = rows.last().unwrap()[2].parse().unwrap();
    assert!(last <= 1e-10, "final residual {last}");
    let raw = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(raw.starts_with("n,step_norm,residual_norm,ratio\n"));
    assert!(!raw.contains('\r'));
}

#[test]
fn zero_datum_needs_no_iterations() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("solve", &config("zero_rhs.toml"), dir.path()), EXIT_OK);
    let report = read_report(&dir.path().join("report.json")).unwrap();
    assert_eq!(report.iterations, 0);
    assert!(report.final_state.iter().all(|&v| v == 0.0));
}

#[test]
fn scalar_cubic_diverges() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("solve", &config("scalar_cubic.toml"), dir.path()), EXIT_DIVERGED);
}

#[test]
fn report_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_path(&config("integral_compare.toml")).unwrap();
    let inst = cfg.build().unwrap();
    let direct = globlin::iterate::run_iteration(inst.problem.as_ref(), &inst.f, &inst.u0, &cfg.iteration_options()).unwrap();

    assert_eq!(run("solve", &config("integral_compare.toml"), dir.path()), EXIT_OK);
    let back = read_report(&dir.path().join("report.json")).unwrap();
    assert_eq!(Summary::of(&back), Summary::of(&direct));
    assert_eq!(back, direct);
}

#[test]
fn tables_are_reproducible_with_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["certify", "solve"] {
        let (a, b) = (dir.path().join(format!("{cmd}-a")), dir.path().join(format!("{cmd}-b")));
        for out in [&a, &b] {
            cli::run(["globlin", cmd, "--config", config("certify_elliptic.toml").to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "11", "--quiet"]);
        }
        assert_eq!(fs::read(a.join("table.csv")).unwrap(), fs::read(b.join("table.csv")).unwrap());
    }
}

#[test]
fn seed_flag_changes_the_certificate_samples() {
    let dir = tempfile::tempdir().unwrap();
    let mut qs = Vec::new();
    for seed in ["1", "2"] {
        let out = dir.path().join(seed);
        cli::run(["globlin", "certify", "--config", config("certify_elliptic.toml").to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed, "--quiet"]);
        let cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        assert_eq!(cert["seed"].as_u64().unwrap(), seed.parse::<u64>().unwrap());
        qs.push(cert["q"].as_f64().unwrap());
    }
    assert_ne!(qs[0], qs[1]);
}

#[test]
fn linear_certificate_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("certify", &config("linear.toml"), dir.path()), EXIT_OK);
    let cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(cert["q"].as_f64(), Some(0.0));
    assert_eq!(cert["s"].as_f64(), Some(0.0));
    assert_eq!(cert["invertibility_verified"].as_bool(), Some(true));
    assert_eq!(cert["contraction_verified"].as_bool(), Some(true));
}

#[test]
fn compare_linear_takes_one_step_per_method() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("compare", &config("linear.toml"), dir.path()), EXIT_OK);
    let rows = table(dir.path());
    assert_eq!(rows.len(), 3);
    for row in &rows[..2] {
        assert_eq!(row[1], "1", "{row:?}");
    }
    assert_eq!(rows[2][0], "picard");
    assert_eq!(rows[2][4], "unsupported");
}

#[test]
fn compare_integral_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("compare", &config("integral_compare.toml"), dir.path()), EXIT_OK);
    let entries: Vec<CompareEntry> = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let states: Vec<&IterationReport> = entries.iter().map(|e| e.report.as_ref().unwrap()).collect();
    assert_eq!(states.len(), 3);
    for r in &states[1..] {
        let gap = r.final_state.iter().zip(&states[0].final_state).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-8, "{} differs by {gap}", r.method.name());
    }
}

#[test]
fn compare_elliptic_marks_picard_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("compare", &config("certify_elliptic.toml"), dir.path()), EXIT_OK);
    let rows = table(dir.path());
    let picard = rows.iter().find(|r| r[0] == "picard").unwrap();
    assert_eq!(picard[4], "unsupported");
    assert!(rows.iter().filter(|r| r[0] != "picard").all(|r| r[4].starts_with("converged")));
}

#[test]
fn empty_sweep_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "sweep_threshold.toml", "values = [", "values = []\nunused = [");
    assert_eq!(run("sweep", &path, dir.path()), EXIT_CONFIG);
}

#[test]
fn single_value_sweep_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("elliptic_manufactured.toml")).unwrap();
    let path = dir.path().join("single.toml");
    fs::write(&path, format!("{text}\n[sweep]\nparameter = \"rhs-amplitude\"\nvalues = [1.0]\n")).unwrap();

    let (sweep_out, solve_out) = (dir.path().join("sweep"), dir.path().join("solve"));
    assert_eq!(run("sweep", &path, &sweep_out), EXIT_OK);
    assert_eq!(run("solve", &path, &solve_out), EXIT_OK);
    let rows: Vec<SweepRow> = serde_json::from_str(&fs::read_to_string(sweep_out.join("report.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(table(&sweep_out).len(), 1);
    let solved = read_report(&solve_out.join("report.json")).unwrap();
    assert_eq!(rows[0].report.as_ref(), Some(&solved));
}

#[test]
fn sweep_rows_are_sorted_by_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "sweep_threshold.toml", "values = [0.5, 0.59,", "values = [3.0, 0.5, 0.59,");
    assert_eq!(run("sweep", &path, dir.path()), EXIT_OK);
    let values: Vec<f64> = table(dir.path()).iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
}

#[test]
fn bad_input_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_variant(dir.path(), "zero_rhs.toml", "nodes = 31", "nodes = 31\nnode_count = 3");
    assert_eq!(run("solve", &unknown, dir.path()), EXIT_CONFIG);
    let bad_expr = write_variant(dir.path(), "elliptic_manufactured.toml", "u + u^3", "u + u^^3");
    assert_eq!(run("solve", &bad_expr, dir.path()), EXIT_CONFIG);
    assert_eq!(run("solve", &dir.path().join("missing.toml"), dir.path()), EXIT_CONFIG);
    assert_eq!(cli::run(["globlin", "solve"]), EXIT_CONFIG);
    assert_eq!(cli::run(["globlin", "--version"]), EXIT_OK);
}

#[test]
fn certify_without_radius_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("certify", &config("zero_rhs.toml"), dir.path()), EXIT_CONFIG);
}
