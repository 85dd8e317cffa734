use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use framelab::builtins::BuiltinRegistry;
use framelab::duals::{canonical_dual, dual_parametrization, sample_dual};
use framelab::expansion::{dual_expand, find_transform, primal_expand, transform_report, ExpandOptions, ExpansionTrace};
use framelab::frame::{classify, hilbert_frame_bounds, xd_frame_bounds_with, Classification};
use framelab::opnorm::{EstimatorRegistry, StretchEstimator};
use framelab::reproduce::{reproduce, SCRIPTS};
use framelab::sequences::{load_frame, validate_ladder, FrameSystem};
use framelab::{FrameError, Matrix, Scalar, SequenceSpaceSpec, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{num, table, Style};
use crate::{Cli, Command, Common, Failure, SideArg};

type CmdResult = Result<Outcome, Failure>;

/// What a command produced: human-readable text, the machine-readable
/// payload and whether every check passed.
struct Outcome {
    text: String,
    payload: Value,
    passed: bool,
}

/// Block counts used for the default ladder of generated systems.
const DEFAULT_BLOCKS: [usize; 4] = [2, 4, 8, 16];
const DUAL_RESIDUAL_TOL: f64 = 1e-10;

pub fn run(cli: &Cli, style: Style) -> Result<bool, Failure> {
    let c = &cli.common;
    let (name, outcome) = match &cli.command {
        Command::Bounds => ("bounds", bounds(c)?),
        Command::Duals { samples } => ("duals", duals(c, *samples)?),
        Command::Classify { op } => ("classify", classify_cmd(c, op.as_deref())?),
        Command::Expand { partner, partner_frame, probe, side, csv } => (
            "expand",
            expand(c, partner.as_deref(), partner_frame.as_deref(), probe.as_deref(), *side, csv.as_deref())?,
        ),
        Command::Reproduce { name, list } => ("reproduce", reproduce_cmd(c, name.as_deref(), *list, style)?),
        Command::Transform { op, onto } => ("transform", transform(c, op.as_deref(), onto.as_deref())?),
    };
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(outcome.text.as_bytes());
    if let Some(path) = &c.json {
        let doc = json!({
            "command": name,
            "seed": c.seed,
            "passed": outcome.passed,
            "result": outcome.payload,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Input(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    if !matches!(cli.command, Command::Reproduce { .. }) {
        let _ = writeln!(out, "{}", style.status(outcome.passed));
    }
    Ok(outcome.passed)
}

struct Loaded {
    label: String,
    system: FrameSystem,
    partner: Option<String>,
    structure: Option<String>,
}

fn load(c: &Common) -> Result<Loaded, Failure> {
    match (&c.builtin, &c.frame) {
        (Some(name), _) => {
            let registry = BuiltinRegistry::default();
            let system = registry.system(name)?;
            let entry = registry.get(name).ok();
            Ok(Loaded {
                label: name.clone(),
                system,
                partner: entry.and_then(|e| e.partner.map(str::to_string)),
                structure: entry.and_then(|e| e.pseudo_dual_structure.map(str::to_string)),
            })
        }
        (None, Some(path)) => Ok(Loaded {
            label: path.display().to_string(),
            system: load_frame(path).map_err(|e| with_path(path, e))?,
            partner: None,
            structure: None,
        }),
        (None, None) => Err(Failure::Input("pass --builtin NAME or --frame PATH".into())),
    }
}

fn with_path(path: &Path, e: FrameError) -> Failure {
    match Failure::from(e) {
        Failure::Input(msg) => Failure::Input(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn space(c: &Common) -> Result<SequenceSpaceSpec, Failure> {
    Ok(SequenceSpaceSpec::weighted(c.p, c.weights.clone())?)
}

fn ladder(c: &Common, fs: &FrameSystem) -> Result<Vec<(usize, usize)>, Failure> {
    match &c.ladder {
        Some(l) => {
            validate_ladder(l)?;
            if l.is_empty() {
                return Err(Failure::Input("empty ladder".into()));
            }
            Ok(l.clone())
        }
        None => match fs {
            FrameSystem::Dense(m) => Ok(vec![(m.rows(), m.cols())]),
            FrameSystem::Generated(_) => Ok(DEFAULT_BLOCKS.iter().map(|&b| fs.aligned_level(b)).collect()),
        },
    }
}

fn top_level(c: &Common, fs: &FrameSystem) -> Result<(usize, usize), Failure> {
    Ok(*ladder(c, fs)?.last().expect("ladder is nonempty"))
}

fn estimator(c: &Common, cols: usize) -> Result<std::sync::Arc<dyn StretchEstimator>, Failure> {
    let registry = EstimatorRegistry::default();
    Ok(if c.estimator == "auto" { registry.auto(cols)? } else { registry.get(&c.estimator)? })
}

fn bounds(c: &Common) -> CmdResult {
    let loaded = load(c)?;
    let spec = space(c)?;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for (n, m) in ladder(c, &loaded.system)? {
        let hilbert = hilbert_frame_bounds(&loaded.system, n, m)?;
        let xd = xd_frame_bounds_with(&loaded.system, &spec, n, m, &*estimator(c, m)?)?;
        rows.push(vec![
            format!("({n},{m})"),
            num(hilbert.a),
            num(hilbert.b),
            num(xd.a),
            num(xd.b),
            if xd.certified { "yes" } else { "no" }.to_string(),
            xd.method.clone(),
        ]);
        levels.push(json!({ "level": [n, m], "hilbert": hilbert, "xd": xd }));
    }
    let mut text = format!("{} in ℓ^{} (A, B squared in ℓ²; unsquared in X_d)\n", loaded.label, c.p);
    text.push_str(&table(&["level", "A (ℓ², sq)", "B (ℓ², sq)", "A (X_d)", "B (X_d)", "certified", "method"], &rows));
    Ok(Outcome { text, payload: json!({ "system": loaded.label, "p": c.p, "levels": levels }), passed: true })
}

fn rows_of(fs: &FrameSystem) -> &Matrix {
    match fs {
        FrameSystem::Dense(m) => m,
        FrameSystem::Generated(_) => unreachable!("duals are dense"),
    }
}

fn show_rows(m: &Matrix, limit: usize) -> String {
    let mut out = String::new();
    for i in 0..m.rows().min(limit) {
        let coords: Vec<String> = m.row(i).coords().iter().map(short).collect();
        let _ = writeln!(out, "  f_{} = ({})", i + 1, coords.join(", "));
    }
    if m.rows() > limit {
        let _ = writeln!(out, "  ... {} more", m.rows() - limit);
    }
    out
}

fn short(x: &Scalar) -> String {
    if x.is_exact() {
        x.to_string()
    } else {
        format!("{:.4}", x.to_f64())
    }
}

fn duals(c: &Common, samples: usize) -> CmdResult {
    let loaded = load(c)?;
    let (n, m) = top_level(c, &loaded.system)?;
    let param = dual_parametrization(&loaded.system, n, m)?;
    let canonical = canonical_dual(&loaded.system, n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let u = &param.analysis;
    let identity = Matrix::identity(m).map_err(Failure::from)?;

    let mut text = format!("{} at level ({n},{m})\n", loaded.label);
    let _ = writeln!(text, "kernel projector rank: {}", param.kernel_rank());
    if let Some(s) = &loaded.structure {
        let _ = writeln!(text, "pseudo-dual structure: {s}");
    }
    let _ = writeln!(text, "canonical dual:");
    text.push_str(&show_rows(rows_of(&canonical), 6));

    let mut passed = true;
    let mut sampled = Vec::new();
    for k in 0..samples {
        let draws: Vec<f64> = (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z = Matrix::from_fn(m, n, |i, j| Scalar::float(draws[i * n + j])).map_err(Failure::from)?;
        let dual = sample_dual(&param, &z)?;
        let rows = rows_of(&dual);
        let residual = rows.transpose().matmul(u).map_err(Failure::from)?.max_abs_diff(&identity);
        passed &= residual < DUAL_RESIDUAL_TOL;
        let _ = writeln!(text, "sample {} (reconstruction residual {}):", k + 1, num(residual));
        text.push_str(&show_rows(rows, 4));
        sampled.push(json!({ "z": z, "dual": rows, "residual": residual }));
    }
    let payload = json!({
        "system": loaded.label,
        "level": [n, m],
        "kernel_rank": param.kernel_rank(),
        "structure": loaded.structure,
        "canonical_dual": rows_of(&canonical),
        "invariant_residual": param.invariant_residual(),
        "samples": sampled,
    });
    Ok(Outcome { text, payload, passed })
}

fn read_matrix(path: &Path) -> Result<Matrix, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        with_path(path, FrameError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
    })?;
    let rows = value.get("dense").cloned().unwrap_or(value);
    serde_json::from_value(rows).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn flag_rows(class: &Classification) -> Vec<Vec<String>> {
    let mut rows = vec![
        vec!["Bessel".to_string(), class.bessel.to_string()],
        vec!["lower frame condition".to_string(), class.lower_condition.to_string()],
        vec!["X_d-frame".to_string(), class.xd_frame.to_string()],
        vec!["Banach frame".to_string(), class.banach_frame.to_string()],
        vec!["Riesz basis".to_string(), class.riesz_basis.to_string()],
    ];
    for (k, v) in &class.certificates {
        rows.push(vec![k.clone(), num(*v)]);
    }
    rows
}

fn classify_cmd(c: &Common, op: Option<&Path>) -> CmdResult {
    let spec = space(c)?;
    let (label, t) = match op {
        Some(path) => (path.display().to_string(), read_matrix(path)?),
        None => {
            let loaded = load(c)?;
            let (n, m) = top_level(c, &loaded.system)?;
            let u = loaded.system.materialize(n, m)?;
            (format!("{} at level ({n},{m})", loaded.label), u.transpose())
        }
    };
    let class = classify(&t, &spec)?;
    let mut text = format!("{label}: operator {}x{}\n", t.rows(), t.cols());
    text.push_str(&table(&["property", "value"], &flag_rows(&class)));
    Ok(Outcome { text, payload: json!({ "operator": label, "classification": class }), passed: true })
}

fn parse_probe(s: &str) -> Result<Vector, Failure> {
    let coords = s.split(',').map(|x| x.parse::<Scalar>()).collect::<Result<Vec<_>, _>>()?;
    Ok(Vector::new(coords)?)
}

fn write_csv(path: &Path, trace: &ExpansionTrace) -> Result<(), Failure> {
    std::fs::write(path, trace.to_csv()).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn suffixed(path: &Path, side: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}-{side}{ext}"))
}

fn trace_rows(trace: &ExpansionTrace) -> Vec<Vec<String>> {
    let points: Vec<_> = match trace.blocks {
        Some(_) => trace.boundary_residuals(),
        None => trace.points.iter().map(|p| (p.n, &p.residual)).collect(),
    };
    let step = points.len().div_ceil(12).max(1);
    points
        .iter()
        .enumerate()
        .filter(|(k, _)| k % step == 0 || *k + 1 == points.len())
        .map(|(_, (n, r))| vec![n.to_string(), r.to_wire(), if r.is_exact() { "exact" } else { "float" }.to_string()])
        .collect()
}

fn expand(
    c: &Common,
    partner: Option<&str>,
    partner_frame: Option<&Path>,
    probe: Option<&str>,
    side: SideArg,
    csv: Option<&Path>,
) -> CmdResult {
    let loaded = load(c)?;
    let f = match (partner, partner_frame, &loaded.partner) {
        (Some(name), _, _) => BuiltinRegistry::default().system(name)?,
        (None, Some(path), _) => load_frame(path).map_err(|e| with_path(path, e))?,
        (None, None, Some(name)) => BuiltinRegistry::default().system(name)?,
        (None, None, None) => return Err(Failure::Input("no expansion partner: pass --partner or --partner-frame".into())),
    };
    let target = match probe {
        Some(s) => parse_probe(s)?,
        None => Vector::basis(loaded.system.ambient_dim().unwrap_or(1), 1)?,
    };
    let mut opts = ExpandOptions::new(c.nmax).with_p(c.p);
    opts.tol = c.tol;

    let mut traces = Vec::new();
    if side != SideArg::Dual {
        traces.push(("primal", primal_expand(&loaded.system, &f, &target, &opts)?));
    }
    if side != SideArg::Primal {
        traces.push(("dual", dual_expand(&loaded.system, &f, &target, &opts)?));
    }

    let mut text = format!("{} with target {}\n", loaded.label, target);
    let mut payload = serde_json::Map::new();
    for (name, trace) in &traces {
        let _ = writeln!(text, "{name}: {}", trace.verdict);
        text.push_str(&table(&["N", "residual", "kind"], &trace_rows(trace)));
        let mut record = trace.verdict_json();
        record["points"] = serde_json::to_value(&trace.points).map_err(|e| Failure::Input(e.to_string()))?;
        payload.insert(name.to_string(), record);
        if let Some(path) = csv {
            let out = if traces.len() == 1 { path.to_path_buf() } else { suffixed(path, name) };
            write_csv(&out, trace)?;
        }
    }
    Ok(Outcome { text, payload: Value::Object(payload), passed: true })
}

fn reproduce_cmd(c: &Common, name: Option<&str>, list: bool, style: Style) -> CmdResult {
    if list {
        let text = SCRIPTS.iter().map(|s| format!("{s}\n")).collect();
        return Ok(Outcome { text, payload: json!(SCRIPTS), passed: true });
    }
    let name = name.ok_or_else(|| Failure::Input("reproduce needs a script name (see --list)".into()))?;
    let transcript = reproduce(name, c.seed)?;
    let mut text = format!("{name} (seed {})\n", c.seed);
    for check in &transcript.checks {
        let _ = writeln!(text, "{} {}: {}", style.status(check.passed), check.name, check.detail);
    }
    let passed = transcript.passed();
    let _ = writeln!(
        text,
        "{}/{} checks passed",
        transcript.checks.iter().filter(|c| c.passed).count(),
        transcript.checks.len()
    );
    let payload = serde_json::to_value(&transcript).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(Outcome { text, payload, passed })
}

fn transform(c: &Common, op: Option<&Path>, onto: Option<&str>) -> CmdResult {
    let loaded = load(c)?;
    let (n, m) = top_level(c, &loaded.system)?;
    let spec = space(c)?;
    let mut text = format!("{} at level ({n},{m})\n", loaded.label);
    let mut payload = serde_json::Map::new();
    if op.is_none() && onto.is_none() {
        return Err(Failure::Input("transform needs --op PATH or --onto NAME".into()));
    }
    if let Some(path) = op {
        let v = read_matrix(path)?;
        let report = transform_report(&v, &loaded.system, &spec, n, m)?;
        let p = &report.v_properties;
        let _ = writeln!(
            text,
            "V: surjective {}, bijective {}, right inverse norm {}",
            p.surjective,
            p.bijective,
            p.right_inverse_norm.map_or("-".to_string(), num)
        );
        let rows: Vec<Vec<String>> = flag_rows(&report.input_class)
            .into_iter()
            .zip(flag_rows(&report.output_class))
            .map(|(a, b)| vec![a[0].clone(), a[1].clone(), b[1].clone()])
            .collect();
        text.push_str(&table(&["property", "input", "image"], &rows));
        payload.insert("report".into(), serde_json::to_value(&report).map_err(|e| Failure::Input(e.to_string()))?);
    }
    if let Some(name) = onto {
        let target = BuiltinRegistry::default().system(name)?;
        match find_transform(&loaded.system, &target, n, m) {
            Ok(v) => {
                let _ = writeln!(text, "V with V g_i = h_i onto {name}: found ({}x{})", v.rows(), v.cols());
                payload.insert("onto".into(), json!({ "target": name, "feasible": true, "v": v }));
            }
            Err(FrameError::TransformInfeasible { residual }) => {
                let _ = writeln!(text, "no V with V g_i = h_i onto {name} (least-squares residual {})", num(residual));
                payload.insert("onto".into(), json!({ "target": name, "feasible": false, "residual": residual }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Outcome { text, payload: Value::Object(payload), passed: true })
}
