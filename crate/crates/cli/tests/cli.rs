use std::path::PathBuf;
use std::process::{Command, Output};

fn framelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framelab"))
        .args(args)
        .env("FRAMELAB_COLOR", "never")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("framelab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn column(text: &str, level: &str, col: usize) -> f64 {
    let line = text.lines().find(|l| l.starts_with(level)).unwrap_or_else(|| panic!("no row {level}"));
    line.split_whitespace().nth(col).unwrap().parse().unwrap()
}

#[test]
fn tripled_bounds_are_three() {
    let out = framelab(&["bounds", "--builtin", "ex-3.6-G", "--ladder", "6:2,30:10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for level in ["(6,2)", "(30,10)"] {
        assert_eq!(column(&text, level, 1), 3.0);
        assert_eq!(column(&text, level, 2), 3.0);
    }
    assert!(text.trim_end().ends_with("PASS"));
}

#[test]
fn lower_bound_decays_for_neighbour_sums() {
    let text = stdout(&framelab(&["bounds", "--builtin", "no-dual-frame"]));
    let a: Vec<f64> = ["(2,3)", "(4,5)", "(8,9)", "(16,17)"].iter().map(|l| column(&text, l, 1)).collect();
    assert!(a.windows(2).all(|w| w[1] < w[0]), "{a:?}");
}

#[test]
fn identity_classifies_as_riesz() {
    let text = stdout(&framelab(&["classify", "--builtin", "identity-4"]));
    assert!(text.lines().any(|l| l.starts_with("Riesz basis") && l.ends_with("yes")));
    assert!(text.lines().any(|l| l.starts_with("condition_number") && l.ends_with("1.000000")));
}

#[test]
fn classify_reads_operator_files() {
    let path = scratch("wide.json");
    std::fs::write(&path, r#"{"dense": [[1, 0, 1], [0, 1, 1]]}"#).unwrap();
    let out = framelab(&["classify", "--op", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("operator 2x3"));
    assert!(text.lines().any(|l| l.starts_with("Riesz basis") && l.ends_with("no")));
    assert!(text.lines().any(|l| l.starts_with("Banach frame") && l.ends_with("yes")));
}

#[test]
fn repeated_first_vector_has_rank_one_kernel() {
    let out = framelab(&["duals", "--builtin", "e1-repeated", "--samples", "2", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("kernel projector rank: 1"));
    assert!(text.contains("f_1 = (1/2, 0"));
}

#[test]
fn reproduce_scripts_pass() {
    let list = stdout(&framelab(&["reproduce", "--list"]));
    let names: Vec<&str> = list.lines().collect();
    assert_eq!(names.len(), 6);
    for name in names {
        let out = framelab(&["reproduce", name, "--seed", "3"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        assert!(!stdout(&out).contains("FAIL"));
    }
}

#[test]
fn json_is_deterministic_and_echoes_seed() {
    let a = scratch("a.json");
    let b = scratch("b.json");
    for path in [&a, &b] {
        let out = framelab(&["duals", "--builtin", "intro-G", "--seed", "42", "--json", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    let doc: serde_json::Value = serde_json::from_str(&ta).unwrap();
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["command"], "duals");
}

#[test]
fn trace_export_writes_csv_per_side() {
    let csv = scratch("trace.csv");
    let out = framelab(&["expand", "--builtin", "ex-3.6-G", "--nmax", "30", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let dual = std::fs::read_to_string(csv.with_file_name("trace-dual.csv")).unwrap();
    let mut lines = dual.lines();
    assert_eq!(lines.next(), Some("N,residual,exact_flag"));
    assert_eq!(lines.count(), 30);
    assert!(stdout(&out).contains("dual: oscillation detected"));
    assert!(csv.with_file_name("trace-primal.csv").exists());
}

#[test]
fn parse_errors_exit_three_with_position() {
    let path = scratch("broken.json");
    std::fs::write(&path, "{\n  \"dense\": [\n    [1, 2],\n    [3 4]\n  ]\n}").unwrap();
    let out = framelab(&["bounds", "--frame", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn exit_codes() {
    assert_eq!(framelab(&["bounds", "--builtin", "no-such-system"]).status.code(), Some(3));
    assert_eq!(framelab(&["bounds", "--bogus"]).status.code(), Some(3));
    assert_eq!(framelab(&["bounds", "--builtin", "identity-4", "--ladder", "4:4,2:2"]).status.code(), Some(3));

    let singular = scratch("singular.json");
    std::fs::write(&singular, r#"{"dense": [[1, 0], [0, 0]]}"#).unwrap();
    let out = framelab(&["duals", "--frame", singular.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn color_setting_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_framelab"))
        .args(["bounds", "--builtin", "identity-4"])
        .env("FRAMELAB_COLOR", "always")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let plain = framelab(&["bounds", "--builtin", "identity-4"]);
    assert!(!stdout(&plain).contains('\x1b'));
}
