use std::fs;
use std::path::Path;

use fnls_cli::run_cli_with;

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fnls").chain(args.iter().copied());
    let code = run_cli_with(argv, &mut out, &mut err);
    Output { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn write_config(dir: &Path, name: &str, extra: &str) -> String {
    let text = format!(
        "[model]\nd = 2\nalpha = 0.8\ns = 0.5\na = 1.0\n\n[grid]\nn = 32\nlength = 16.0\n\n[profile]\nkind = \"gaussian\"\n\n{extra}"
    );
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn admissible_boundary_pair_is_reported() {
    let o = run(&["admissible", "--d", "2", "--q", "inf", "--r", "2"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert_eq!(o.out.lines().next(), Some("admissible (boundary)"));

    let o = run(&["admissible", "--d", "2", "--q", "2", "--r", "2"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.out.lines().next(), Some("not admissible"));
}

#[test]
fn admissible_table_covers_the_grid() {
    let o = run(&["admissible", "--d", "3"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.out.lines().count(), 1 + 49);
    assert!(o.out.contains("inf"));
}

#[test]
fn usage_errors_exit_with_two() {
    let o = run(&["bogus"]);
    assert_eq!(o.code, 2);
    assert!(o.err.contains("Usage"), "{}", o.err);

    assert_eq!(run(&["admissible", "--d", "2", "--q", "3"]).code, 2);
    assert_eq!(run(&["admissible", "--d", "2", "--q", "x", "--r", "2"]).code, 2);
    assert_eq!(run(&["admissible", "--d", "2", "--q", "3", "--r", "3", "--threads", "0"]).code, 0);
    assert_eq!(run(&["convergence", "--threads", "0"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn config_errors_name_the_file_and_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "bad.toml", "[stepper]\ndtt = 0.1\n");
    let o = run(&["simulate", "-c", &path]);
    assert_eq!(o.code, 2);
    assert!(o.err.contains("bad.toml"), "{}", o.err);
    assert!(o.err.contains("dtt"), "{}", o.err);

    let path = write_config(dir.path(), "alpha.toml", "");
    fs::write(&path, fs::read_to_string(&path).unwrap().replace("alpha = 0.8", "alpha = -0.5")).unwrap();
    let o = run(&["simulate", "-c", &path]);
    assert_eq!(o.code, 2);
    assert!(o.err.contains("alpha"), "{}", o.err);

    let o = run(&["simulate", "-c", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.code, 2);
    assert!(o.err.contains("missing.toml"));
}

#[test]
fn unmet_hypotheses_warn_but_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "w.toml", "[stepper]\nt_end = 0.05\n");
    fs::write(&path, fs::read_to_string(&path).unwrap().replace("s = 0.5", "s = 0.0")).unwrap();
    let csv = dir.path().join("ts.csv");
    let o = run(&["simulate", "-c", &path, "--out", csv.to_str().unwrap()]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.err.contains("warning:"), "{}", o.err);
}

#[test]
fn verify_default_run_passes_with_second_order_slopes() {
    let o = run(&["verify"]);
    assert_eq!(o.code, 0, "{}\n{}", o.out, o.err);
    for name in ["mass", "energy"] {
        let line = o.out.lines().find(|l| l.starts_with(&format!("{name} identity"))).unwrap();
        let slope: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
        assert!((slope - 2.0).abs() < 0.1, "{line}");
        assert!(line.ends_with("PASS"));
    }
    assert!(o.out.contains("a-priori bounds") && o.out.contains("-> PASS"));
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.toml", "[convergence]\norder_min = 3.0\norder_max = 4.0\n");
    let o = run(&["convergence", "-c", &path]);
    assert_eq!(o.code, 1, "{}", o.err);
    assert!(o.err.contains("check failed"));

    let path = write_config(dir.path(), "k.toml", "[kernel]\ns_values = [0.25]\ntolerance = 1e-30\nmax_levels = 2\n");
    let o = run(&["kernel", "-c", &path]);
    assert_eq!(o.code, 1, "{}\n{}", o.out, o.err);
    assert!(o.out.contains("unstable"));
}

#[test]
fn kernel_table_normalizes_to_one() {
    let o = run(&["kernel", "--s", "0.5,1"]);
    assert_eq!(o.code, 0, "{}", o.err);
    let rows: Vec<&str> = o.out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let norm: f64 = row.split_whitespace().nth(4).unwrap().parse().unwrap();
        assert!((norm - 1.0).abs() < 1e-6, "{row}");
    }
}

fn simulate_to(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name);
    let mut args = vec!["simulate", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.err.contains("status=completed"), "{}", o.err);
    fs::read_to_string(path).unwrap()
}

#[test]
fn default_simulate_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = simulate_to(dir.path(), "ts.csv", &[]);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/default_simulate.csv");
    if std::env::var_os("FNLS_BLESS").is_some() {
        fs::write(&golden, &csv).unwrap();
    }
    let expected = fs::read_to_string(&golden).expect("golden file (regenerate with FNLS_BLESS=1)");
    assert!(csv == expected, "default simulate output differs from {}", golden.display());
}

#[test]
fn simulate_is_bit_identical_across_invocations_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let first = simulate_to(dir.path(), "a.csv", &[]);
    let second = simulate_to(dir.path(), "b.csv", &[]);
    assert_eq!(first, second);
    let single = simulate_to(dir.path(), "c.csv", &["--threads", "1"]);
    let four = simulate_to(dir.path(), "d.csv", &["--threads", "4"]);
    assert_eq!(first, single);
    assert_eq!(first, four);
}

#[test]
fn csv_round_trips_through_a_parser() {
    let dir = tempfile::tempdir().unwrap();
    let csv = simulate_to(dir.path(), "ts.csv", &["--run-id", "trial-7"]);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.first(), Some(&"t"));
    assert_eq!(header.last(), Some(&"config_hash"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 101);
    let mut last_t = -1.0;
    for row in &rows {
        assert_eq!(row.len(), header.len());
        assert_eq!(row[header.len() - 2], "trial-7");
        let t: f64 = row[0].parse().unwrap();
        assert!(t > last_t);
        last_t = t;
        let mass: f64 = row[1].parse().unwrap();
        // `{:.16e}` is enough digits to reproduce the value on re-formatting.
        assert_eq!(fnls_cli::output::format_float(mass), row[1]);
    }
    assert!((last_t - 1.0).abs() < 1e-12);

    let o = run(&["simulate", "--run-id", "a,b", "--out", dir.path().join("x.csv").to_str().unwrap()]);
    assert_eq!(o.code, 2);
}

#[test]
fn simulate_to_stdout_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("p.dat");
    let svg = dir.path().join("p.svg");
    let extra = format!(
        "[stepper]\nt_end = 0.1\n\n[output]\nplot_columns = [\"t\", \"mass_sq\"]\nplot = \"{}\"\nsvg = \"{}\"\n",
        plot.display(),
        svg.display()
    );
    let path = write_config(dir.path(), "p.toml", &extra);
    let o = run(&["simulate", "-c", &path, "--out", "-"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert_eq!(o.out.lines().count(), 1 + 11);
    let data = fs::read_to_string(&plot).unwrap();
    assert_eq!(data.lines().filter(|l| !l.starts_with('#')).count(), 11);
    assert!(fs::read_to_string(&svg).unwrap().contains("<svg"));

    let bad = write_config(dir.path(), "q.toml", "[output]\nplot_columns = [\"t\", \"nope\"]\n");
    let o = run(&["simulate", "-c", &bad, "--out", dir.path().join("y.csv").to_str().unwrap()]);
    assert_eq!(o.code, 2);
    assert!(o.err.contains("nope"), "{}", o.err);
}

#[test]
fn sweep_resume_keeps_finished_points_and_drops_torn_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", "[stepper]\nt_end = 0.2\n");
    let jsonl = dir.path().join("sweep.jsonl");
    let out = jsonl.to_str().unwrap();

    let o = run(&["sweep", "-c", &cfg, "--a", "0.5", "--out", out]);
    assert_eq!(o.code, 0, "{}", o.err);
    let first = fs::read_to_string(&jsonl).unwrap();
    assert_eq!(first.lines().count(), 1);

    // Simulate an interrupted write.
    fs::write(&jsonl, format!("{first}{{\"alpha\":0.8,\"s\"")).unwrap();
    let o = run(&["sweep", "-c", &cfg, "--a", "0.5,1,2", "--out", out, "--resume"]);
    assert_eq!(o.code, 0, "{}", o.err);
    let text = fs::read_to_string(&jsonl).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(text.lines().next().unwrap(), first.trim_end());
    let mut a: Vec<f64> = lines.iter().map(|l| l["a"].as_f64().unwrap()).collect();
    a.sort_by(f64::total_cmp);
    assert_eq!(a, vec![0.5, 1.0, 2.0]);
    assert!(lines.iter().all(|l| l["config_hash"].as_str().unwrap().len() == 64));

    let summary: Vec<&str> = o.out.lines().skip(1).take(3).collect();
    assert!(summary[0].trim_start().starts_with("0.5") && summary[2].trim_start().starts_with('2'));
    assert!(o.out.contains("strictly decreasing in a: true"), "{}", o.out);

    // Without --resume the file is replaced.
    let o = run(&["sweep", "-c", &cfg, "--a", "4", "--out", out]);
    assert_eq!(o.code, 0);
    assert_eq!(fs::read_to_string(&jsonl).unwrap().lines().count(), 1);
}

#[test]
fn gn_estimate_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", "[gn]\nn_widths = 4\n");
    let o = run(&["gn-estimate", "-c", &cfg]);
    assert_eq!(o.code, 0, "{}", o.err);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    let est = v["estimate"].as_f64().unwrap();
    assert!(est > 0.0 && est.is_finite());
    assert!(v["samples"].as_u64().unwrap() > 0);
    let beta = v["coercivity_mass"].as_f64().unwrap();
    let c = v["energy_constant"].as_f64().unwrap();
    assert!(beta > 0.0 && c > 0.0);
}

#[test]
fn scattering_reports_defects() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sc.toml", "[scattering]\nbase_times = [0.25, 0.5]\n");
    let o = run(&["scattering", "-c", &cfg]);
    assert!(o.code == 0 || o.code == 1, "{}", o.err);
    assert_eq!(o.out.lines().skip(1).take_while(|l| !l.starts_with("u_plus")).count(), 2);
    assert!(o.out.contains("defects strictly decreasing"));
}
