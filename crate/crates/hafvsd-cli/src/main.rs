use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hafvsd::fattening::{
    build_distinguished, check_good_saturations, disjoint_family_report, enumerate_free_doors, extend_support,
    stain_itineraries,
};
use hafvsd::graph::{filtration, lengths};
use hafvsd::marks::{find_resonances, pi_paths, theta_path, theta_path_violations, weight};
use hafvsd::oracle::{transition_sweep, verify_transition, Branch, FlowConfig, OracleError};
use hafvsd::report::ValidationReport;
use hafvsd::scalar::{fmt_q, parse_q, q_int, q_to_f64};
use hafvsd::validate::{consequences, hypotheses, validate_all, HYPOTHESES};
use hafvsd::{parse_scene, ExactModel, ExactTransition, Scene};

const SCHEMA: u32 = 1;

/// Analysis of vector-field singularities presented by a divisor scene.
#[derive(Debug, Parser)]
#[command(name = "hafvsd", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct SceneArgs {
    /// Scene file (JSON).
    scene: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the five hypotheses and their structural consequences.
    Validate(SceneArgs),
    /// Classify points and report lengths, filtration and weights.
    Analyze(SceneArgs),
    /// List s-resonant saddle-connection chains with their quasi-order trace.
    Resonance(SceneArgs),
    /// Compute the saturation paths of every s-component and transversal saddle.
    Theta {
        #[command(flatten)]
        args: SceneArgs,
        /// Only this s-component.
        #[arg(long)]
        s_component: Option<String>,
    },
    /// Build the distinguished fattening and the fitting-domain frontier.
    Fatten {
        #[command(flatten)]
        args: SceneArgs,
        /// Also run the good-saturation and disjoint-family checks.
        #[arg(long)]
        check_ds: bool,
    },
    /// Measure a corner transition numerically on a linear saddle model.
    Oracle {
        /// Eigenvalues `alpha,lambda_i,lambda_j` as rationals.
        #[arg(long, value_name = "A,LI,LJ", allow_hyphen_values = true)]
        model: String,
        /// Incoming quasi-order relative to D_i.
        #[arg(long, value_name = "P/Q")]
        rho: String,
        /// Integrate with RK4 under the perturbation A = B = C = eps*x.
        #[arg(long, value_name = "EPS")]
        perturb: Option<f64>,
        /// RK4 step.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Also sweep rho down to the weight with this many values.
        #[arg(long, value_name = "N")]
        sweep: Option<usize>,
        /// Write the sweep as CSV.
        #[arg(long, value_name = "PATH", requires = "sweep")]
        csv: Option<PathBuf>,
        /// Output format.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Result of one subcommand; `ok == false` maps to exit code 1.
struct Outcome {
    ok: bool,
    body: Value,
    text: String,
}

fn load(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_scene(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn violations_text(r: &ValidationReport, out: &mut String) {
    for v in &r.violations {
        let _ = writeln!(out, "  [{:?}] {} ({}): {}", v.severity, v.rule, v.entities.join(", "), v.message);
    }
}

fn validate(scene: &Scene) -> Outcome {
    let r = validate_all(scene);
    let hs = hypotheses(&r);
    let cs = consequences(&r);
    let held = hs.iter().filter(|h| h.holds).count();
    let mut text = String::new();
    let _ = writeln!(text, "scene {}: {}", scene.name, if r.passed { "valid" } else { "invalid" });
    for h in hs.iter().chain(&cs) {
        let _ = writeln!(text, "  {:<16} {}", h.name, if h.holds { "holds" } else { "FAILS" });
    }
    violations_text(&r, &mut text);
    let _ = writeln!(text, "{held}/{} hypotheses hold", HYPOTHESES.len());
    Outcome {
        ok: r.passed,
        body: json!({ "passed": r.passed, "hypotheses": hs, "consequences": cs, "violations": r.violations }),
        text,
    }
}

fn analyze(scene: &Scene) -> Outcome {
    let r = validate_all(scene);
    let lens = lengths(scene).ok();
    let mut points = Vec::new();
    let mut text = format!("scene {}\n", scene.name);
    for p in &scene.points {
        let class = scene.class(&p.id).ok();
        let len = lens.as_ref().and_then(|l| l.get(&p.id)).copied();
        let mut weights = Vec::new();
        if scene.is_s_prime(&p.id) {
            let axis = class.and_then(|c| c.w1.clone()).and_then(|a| p.direction(&a).cloned());
            for comp in axis.map(|a| a.containment).unwrap_or_default() {
                if let Ok(w) = weight(scene, &p.id, &comp) {
                    weights.push(w);
                }
            }
        }
        let _ = writeln!(
            text,
            "  {:<6} {:<18} dim_w {:<2} length {:<2} {}",
            p.id,
            class.map(|c| serde_json::to_value(c.kind).unwrap().as_str().unwrap_or("").to_string()).unwrap_or_else(|| "?".into()),
            class.and_then(|c| c.dim_w).map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
            len.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            weights.iter().map(|w| format!("w[{}]={}", w.component, fmt_q(&w.value))).collect::<Vec<_>>().join(" "),
        );
        points.push(json!({
            "id": p.id,
            "class": class,
            "s_prime": scene.is_s_prime(&p.id),
            "length": len,
            "s_components": scene.s_components_at(&p.id),
            "weights": weights,
        }));
    }
    let layers: Option<Vec<usize>> = filtration(scene).ok().map(|f| f.iter().map(|g| g.edges.len()).collect());
    let (n, s) = (scene.nodes().len(), scene.transversal_saddles().len());
    let _ = writeln!(text, "#N = {n}, #S_tr = {s}, #N - #S_tr = {}", n as i64 - s as i64);
    if let Some(l) = &layers {
        let _ = writeln!(text, "filtration edge counts: {l:?}");
    }
    let _ = writeln!(text, "{}", if r.passed { "valid" } else { "invalid (run `validate` for details)" });
    Outcome {
        ok: r.passed,
        body: json!({
            "passed": r.passed,
            "points": points,
            "nodes": n,
            "transversal_saddles": s,
            "filtration_edges": layers,
        }),
        text,
    }
}

fn resonance(scene: &Scene) -> Outcome {
    let chains = find_resonances(scene);
    let mut text = format!("scene {}: {} s-resonant chain(s)\n", scene.name, chains.len());
    for c in &chains {
        let trace: Vec<String> = c.rho_trace.iter().map(|q| format!("{}@{}", fmt_q(&q.value), q.component)).collect();
        let _ = writeln!(text, "  path [{}]  rho trace [{}]", c.path.join(", "), trace.join(", "));
    }
    Outcome { ok: chains.is_empty(), body: json!({ "resonant": !chains.is_empty(), "chains": chains }), text }
}

fn theta(scene: &Scene, only: Option<&str>) -> Result<Outcome> {
    let mut ok = true;
    let mut thetas = Vec::new();
    let mut text = format!("scene {}\n", scene.name);
    for nu in scene.all_s_components() {
        if only.is_some_and(|o| o != nu.id) || !scene.class(&nu.point).is_ok_and(|c| c.is_saddle()) {
            continue;
        }
        match theta_path(scene, &nu.id) {
            Ok(t) => {
                let viol = theta_path_violations(scene, &t);
                ok &= viol.passed;
                let _ = writeln!(text, "  Θ({}) = ({}) -> {}{}", nu.id, t.path.join(", "), t.terminal, if t.reversed { " [reversed]" } else { "" });
                violations_text(&viol, &mut text);
                thetas.push(json!({ "theta": t, "violations": viol.violations }));
            }
            Err(e) => {
                ok = false;
                let _ = writeln!(text, "  Θ({}): error: {e}", nu.id);
                thetas.push(json!({ "s_component": nu.id, "error": e.to_string() }));
            }
        }
    }
    if only.is_some() && thetas.is_empty() {
        return Err(anyhow!("no D-saddle s-component `{}`", only.unwrap()));
    }
    let mut pis = Vec::new();
    if only.is_none() {
        for p in scene.transversal_saddles() {
            match pi_paths(scene, p) {
                Ok(pi) => {
                    let _ = writeln!(text, "  Π({p}) = ({}) | ({})", pi.paths[0].join(", "), pi.paths[1].join(", "));
                    pis.push(json!(pi));
                }
                Err(e) => {
                    ok = false;
                    let _ = writeln!(text, "  Π({p}): error: {e}");
                    pis.push(json!({ "point": p, "error": e.to_string() }));
                }
            }
        }
    }
    Ok(Outcome { ok, body: json!({ "thetas": thetas, "pis": pis }), text })
}

fn fatten(scene: &Scene, check_ds: bool) -> Outcome {
    let model = match build_distinguished(scene) {
        Ok(m) => m,
        Err(e) => {
            return Outcome { ok: false, body: json!({ "error": e.to_string() }), text: format!("scene {}: {e}\n", scene.name) }
        }
    };
    let mut ok = model.distinguished;
    let free = enumerate_free_doors(&model).map(|d| d.len()).unwrap_or(0);
    let mut text = format!(
        "scene {}: {} chimneys, {} tubes, {free} free doors, distinguished: {}\n",
        scene.name,
        model.chimneys.len(),
        model.tubes.len(),
        model.distinguished
    );
    let frontier = match extend_support(&model) {
        Ok(f) => {
            let _ = writeln!(text, "frontier: {} transversal discs, {} doors absorbed", f.discs.len(), f.absorbed_doors);
            for d in &f.discs {
                let types: Vec<&str> = d.types().map(|t| t.as_str()).collect();
                let _ = writeln!(text, "  T_{:<6} dim W {} {:?} [{}]", d.point, d.dim_w, d.kind, types.join(" "));
            }
            json!(f)
        }
        Err(e) => {
            ok = false;
            let _ = writeln!(text, "frontier: {e}");
            json!({ "error": e.to_string() })
        }
    };
    let mut body = json!({ "model": model, "frontier": frontier });
    if check_ds {
        let gs = check_good_saturations(&model);
        let dj = disjoint_family_report(&model);
        let its = stain_itineraries(&model);
        match (gs, dj, its) {
            (Ok(gs), Ok(dj), Ok(its)) => {
                ok &= gs.passed && dj.passed;
                let _ = writeln!(text, "good saturations: {}", if gs.passed { "pass" } else { "FAIL" });
                violations_text(&ValidationReport { passed: gs.passed, violations: gs.errors().cloned().collect() }, &mut text);
                let _ = writeln!(text, "disjoint family: {}", if dj.passed { "pass" } else { "FAIL" });
                violations_text(&ValidationReport { passed: dj.passed, violations: dj.errors().cloned().collect() }, &mut text);
                body["good_saturations"] = json!(gs);
                body["disjoint_family"] = json!(dj);
                body["itineraries"] = json!(its);
            }
            (gs, dj, its) => {
                ok = false;
                let err = [gs.err(), dj.err(), its.err()].into_iter().flatten().next().unwrap();
                let _ = writeln!(text, "good saturations: error: {err}");
                body["good_saturations"] = json!({ "error": err.to_string() });
            }
        }
    }
    Outcome { ok, body, text }
}

struct OracleArgs<'a> {
    model: &'a str,
    rho: &'a str,
    perturb: Option<f64>,
    step: f64,
    sweep: Option<usize>,
    csv: Option<&'a Path>,
}

fn oracle(a: OracleArgs) -> Result<Outcome> {
    let parts: Vec<_> = a.model.split(',').map(parse_q).collect();
    let [Some(al), Some(li), Some(lj)] = parts.as_slice() else {
        return Err(anyhow!("--model expects three rationals `a,li,lj`"));
    };
    let model = ExactModel::new(al.clone(), li.clone(), lj.clone()).map_err(|e| anyhow!("{e}"))?;
    let rho = parse_q(a.rho).ok_or_else(|| anyhow!("--rho expects a rational `p/q`"))?;
    let cfg = match a.perturb {
        Some(eps) => FlowConfig::rk4(a.step, eps),
        None => FlowConfig::default(),
    };
    let tol = if a.perturb.is_some() { 1e-3 } else { 1e-6 };
    let rep = verify_transition(&model, &rho, 1.0, &cfg).map_err(|e: OracleError| anyhow!("{e}"))?;
    let exact = match rep.branch {
        Branch::I => ExactTransition::new(al.clone(), li.clone(), lj.clone()).eval(&rho),
        Branch::J => ExactTransition::new(al.clone(), lj.clone(), li.clone()).eval(&(q_int(1) / rho.clone())),
    };
    let ok = rep.report.error <= tol;
    let mut text = format!(
        "ρ̃ = {} (branch {:?}, {:?} flow)\nmeasured {:.12}, error {:.3e} (tolerance {tol:e})\n",
        fmt_q(&exact),
        rep.branch,
        rep.report.integrator,
        rep.report.measured,
        rep.report.error
    );
    let mut body = json!({
        "model": [fmt_q(al), fmt_q(li), fmt_q(lj)],
        "rho": fmt_q(&rho),
        "branch": rep.branch,
        "formula_exact": fmt_q(&exact),
        "formula": q_to_f64(&exact),
        "measured": rep.report.measured,
        "error": rep.report.error,
        "interval": rep.report.interval,
        "integrator": rep.report.integrator,
        "perturb": a.perturb,
        "tolerance": tol,
    });
    if let Some(n) = a.sweep {
        let sweep = transition_sweep(&model, n, &cfg).map_err(|e| anyhow!("{e}"))?;
        let rows: Vec<Value> = sweep.iter().map(|(r, t)| json!({ "rho": r, "measured": t.report.measured, "formula": t.report.formula })).collect();
        let _ = writeln!(text, "sweep toward w = {}:", fmt_q(&(lj.clone() / li.clone())));
        for (r, t) in &sweep {
            let _ = writeln!(text, "  {r:.9} -> {:.9e}", t.report.measured);
        }
        if let Some(path) = a.csv {
            let mut csv = String::from("rho,measured,formula\n");
            for (r, t) in &sweep {
                let _ = writeln!(csv, "{r},{},{}", t.report.measured, t.report.formula);
            }
            std::fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?;
        }
        body["sweep"] = json!(rows);
    }
    Ok(Outcome { ok, body, text })
}

fn emit(command: &str, scene: Option<&Scene>, format: Format, out: Outcome) -> ExitCode {
    match format {
        Format::Text => print!("{}", out.text),
        Format::Json => {
            let mut body = json!({ "schema": SCHEMA, "command": command });
            if let Some(s) = scene {
                body["scene"] = json!(s.name);
            }
            body["ok"] = json!(out.ok);
            if let Value::Object(fields) = out.body {
                for (k, v) in fields {
                    body[k] = v;
                }
            }
            println!("{}", serde_json::to_string_pretty(&body).expect("report serializes"));
        }
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let scene_cmd = |name: &str, args: &SceneArgs, f: &dyn Fn(&Scene) -> Result<Outcome>| -> Result<ExitCode> {
        let scene = load(&args.scene)?;
        let out = f(&scene)?;
        Ok(emit(name, Some(&scene), args.format, out))
    };
    match &cli.command {
        Command::Validate(a) => scene_cmd("validate", a, &|s| Ok(validate(s))),
        Command::Analyze(a) => scene_cmd("analyze", a, &|s| Ok(analyze(s))),
        Command::Resonance(a) => scene_cmd("resonance", a, &|s| Ok(resonance(s))),
        Command::Theta { args, s_component } => scene_cmd("theta", args, &|s| theta(s, s_component.as_deref())),
        Command::Fatten { args, check_ds } => scene_cmd("fatten", args, &|s| Ok(fatten(s, *check_ds))),
        Command::Oracle { model, rho, perturb, step, sweep, csv, format } => {
            let out = oracle(OracleArgs { model, rho, perturb: *perturb, step: *step, sweep: *sweep, csv: csv.as_deref() })?;
            Ok(emit("oracle", None, *format, out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
