use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde_json::json;

use polycap::bench::{run_bench, BenchConfig, BenchRecord, NEAR_SINGULAR_RATIO};
use polycap::geometry::{ellipsoid, intersection_vertices, minkowski_sum, EllipsoidKind, Polytope};
use polycap::io::{to_csv, to_off, PolytopeDoc};
use polycap::kinematics::{gravity_torque, jacobian, residual_limits};
use polycap::loadshare::{simulate, DualArmScenario, Policy};
use polycap::{
    describe, force_polytope_vertices, velocity_polytope_vertices, Error, JointBox, JointConfig, Result,
    RobotModel, SearchOptions, TaskFrame, VertexSet,
};

#[derive(Parser)]
#[command(name = "polycap", version, about = "Task-space force and velocity polytopes of serial robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Kind {
    Force,
    Velocity,
    Residual,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Off,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Op {
    Sum,
    Intersect,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EllKind {
    Force,
    Velocity,
}

#[derive(clap::Args)]
struct SearchFlags {
    /// Evaluate every face family, skipping the bound test.
    #[arg(long)]
    no_prune: bool,
    /// Solve face families on all cores.
    #[arg(long)]
    parallel: bool,
}

impl SearchFlags {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            prune: !self.no_prune,
            parallel: self.parallel,
            ..SearchOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a robot file and print it as normalized JSON.
    Describe { model: PathBuf },

    /// Force, velocity or residual polytope at one configuration.
    Polytope {
        /// Robot description (bundled fixture names work too).
        model: Option<PathBuf>,
        /// Joint configuration, comma separated, rad.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
        /// Task axes, e.g. x,y or x,y,z,rx,ry,rz.
        #[arg(long)]
        task: Option<TaskFrame>,
        #[arg(long, value_enum, default_value = "force")]
        kind: Kind,
        /// Residual: subtract the gravity torque.
        #[arg(long)]
        bias_g: bool,
        /// Residual: nominal task wrench already being applied (task-dim vector).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bias_n: Option<Vec<f64>>,
        /// Residual: dynamic torque to reserve (one value per joint).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        tau_d: Option<Vec<f64>>,
        /// Raw Jacobian instead of a robot: rows separated by ';', entries by ','.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "model")]
        jacobian: Option<String>,
        /// Lower joint limits for --jacobian.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "jacobian")]
        lo: Option<Vec<f64>>,
        /// Upper joint limits for --jacobian.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "jacobian")]
        hi: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
        /// Output file (stdout when omitted).
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[command(flatten)]
        search: SearchFlags,
    },

    /// Manipulability ellipsoid normalized by the joint limits.
    Ellipsoid {
        model: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
        #[arg(long)]
        task: Option<TaskFrame>,
        #[arg(long, value_enum, default_value = "force")]
        kind: EllKind,
        /// Boundary points to include (dimensions 1 to 3).
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },

    /// Face counts and timings over seeded random configurations.
    Bench {
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        task: Option<TaskFrame>,
        /// Also run the unreduced system and require identical vertex sets.
        #[arg(long)]
        baseline: bool,
        #[arg(long)]
        no_prune: bool,
        /// Untimed runs before each timed one.
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        /// Run trials on all cores.
        #[arg(long)]
        parallel: bool,
        /// CSV file for the records (console table always printed).
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },

    /// Minkowski sum or intersection of two robots' force polytopes.
    Combine {
        #[arg(long)]
        robot1: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q1: Vec<f64>,
        #[arg(long)]
        robot2: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q2: Vec<f64>,
        #[arg(long, value_enum)]
        op: Op,
        #[arg(long)]
        task: Option<TaskFrame>,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[command(flatten)]
        search: SearchFlags,
    },

    /// Dual-arm load-share simulation over a scenario trajectory.
    Loadshare {
        scenario: PathBuf,
        /// adaptive or fixed:<lambda>
        #[arg(long, default_value = "adaptive")]
        policy: Policy,
        /// Replace the scenario payload mass, kg.
        #[arg(long)]
        payload: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|r| {
            r.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Input(format!("--jacobian: '{}' is not a number", v.trim())))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input("--jacobian: rows have different lengths".into()));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), n, rows.into_iter().flatten()))
}

fn load_config(model: &RobotModel, q: Vec<f64>, flag: &str) -> Result<JointConfig> {
    if q.len() != model.dof() {
        return Err(Error::Input(format!(
            "{flag} has {} values but '{}' has {} joints",
            q.len(),
            model.name,
            model.dof()
        )));
    }
    Ok(JointConfig::new(q))
}

fn axis_names(frame: &TaskFrame) -> Vec<String> {
    frame.axes().iter().map(|a| a.name().to_string()).collect()
}

fn raw_axes(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("e{i}")).collect()
}

/// Renders a vertex set in the requested format, adding facets when the
/// dimension allows a hull.
fn render(set: &VertexSet, doc: PolytopeDoc, format: Format) -> Result<String> {
    let polytope = if (1..=3).contains(&set.task_dim) {
        Some(Polytope::from_vertex_set(set)?)
    } else {
        None
    };
    match format {
        Format::Json => {
            let doc = match &polytope {
                Some(p) if !p.degenerate => doc.with_facets(p),
                _ => doc,
            };
            Ok(doc.to_json() + "\n")
        }
        Format::Csv => Ok(to_csv(&doc.axes, &set.vertices)),
        Format::Off => match &polytope {
            Some(p) => to_off(p),
            None => Err(Error::Input(format!("OFF export needs a 3-dimensional task, got {}", set.task_dim))),
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_polytope(
    model: Option<PathBuf>,
    q: Vec<f64>,
    task: Option<TaskFrame>,
    kind: Kind,
    bias_g: bool,
    bias_n: Option<Vec<f64>>,
    tau_d: Option<Vec<f64>>,
    raw: (Option<String>, Option<Vec<f64>>, Option<Vec<f64>>),
    out: Format,
    output: Option<PathBuf>,
    search: SearchFlags,
) -> Result<()> {
    let biased = bias_g || bias_n.is_some() || tau_d.is_some();
    if biased && kind != Kind::Residual {
        return Err(Error::Input("--bias-g, --bias-n and --tau-d need --kind residual".into()));
    }
    let mut params = serde_json::Map::new();
    let (jac, lo, hi, axes, model) = match (model, raw) {
        (Some(path), (None, _, _)) => {
            let model = describe(&path)?;
            let frame = task.unwrap_or_else(|| TaskFrame::default_for(&model));
            let cfg = load_config(&model, q.clone(), "--q")?;
            let jac = jacobian(&model, &cfg, &frame)?;
            let (lo, hi) = match kind {
                Kind::Velocity => model.velocity_limits(),
                _ => model.torque_limits(),
            };
            params.insert("robot".into(), json!(model.name));
            params.insert("q".into(), json!(q));
            (jac, lo, hi, axis_names(&frame), Some((model, cfg)))
        }
        (None, (Some(text), lo, hi)) => {
            if kind == Kind::Residual && bias_g {
                return Err(Error::Input("--bias-g needs a robot model".into()));
            }
            let jac = parse_matrix(&text)?;
            let lo = lo.ok_or_else(|| Error::Input("--jacobian needs --lo".into()))?;
            let hi = hi.ok_or_else(|| Error::Input("--jacobian needs --hi".into()))?;
            params.insert("jacobian".into(), json!(text));
            (jac.clone(), lo, hi, raw_axes(jac.nrows()), None)
        }
        _ => return Err(Error::Input("give either a robot file or --jacobian".into())),
    };
    let n = jac.ncols();
    let mut warnings = Vec::new();
    let set = match kind {
        Kind::Velocity => velocity_polytope_vertices(&jac, &JointBox::new(lo, hi)?)?,
        Kind::Force => force_polytope_vertices(&jac, &JointBox::new(lo, hi)?, &search.options())?,
        Kind::Residual => {
            let tau_g = match (&model, bias_g) {
                (Some((m, cfg)), true) => gravity_torque(m, cfg)?.as_slice().to_vec(),
                _ => vec![0.0; n],
            };
            let tau_d = tau_d.unwrap_or_else(|| vec![0.0; n]);
            let tau_n = match &bias_n {
                Some(f) => {
                    if f.len() != jac.nrows() {
                        return Err(Error::Input(format!(
                            "--bias-n has {} values but the task has {} axes",
                            f.len(),
                            jac.nrows()
                        )));
                    }
                    jac.tr_mul(&DVector::from_column_slice(f)).as_slice().to_vec()
                }
                None => vec![0.0; n],
            };
            let res = residual_limits(&lo, &hi, &tau_g, &tau_d, &tau_n)?;
            warnings = res
                .warnings
                .iter()
                .map(|&i| format!("joint {i}: residual interval [{}, {}] excludes zero", res.lo[i], res.hi[i]))
                .collect();
            params.insert("bias_g".into(), json!(bias_g));
            if let Some(f) = &bias_n {
                params.insert("bias_n".into(), json!(f));
            }
            force_polytope_vertices(&jac, &JointBox::new(res.lo, res.hi)?, &search.options())?
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let kind_name = match kind {
        Kind::Force => "force",
        Kind::Velocity => "velocity",
        Kind::Residual => "residual",
    };
    let mut doc = PolytopeDoc::new(&set, axes, kind_name);
    doc.params = params.into_iter().collect();
    doc.warnings = warnings;
    emit(&output, &render(&set, doc, out)?)
}

fn cmd_ellipsoid(
    model: PathBuf,
    q: Vec<f64>,
    task: Option<TaskFrame>,
    kind: EllKind,
    samples: usize,
    output: Option<PathBuf>,
) -> Result<()> {
    let model = describe(&model)?;
    let frame = task.unwrap_or_else(|| TaskFrame::default_for(&model));
    let cfg = load_config(&model, q.clone(), "--q")?;
    let jac = jacobian(&model, &cfg, &frame)?;
    let (lo, hi, kind, name) = match kind {
        EllKind::Force => {
            let (lo, hi) = model.torque_limits();
            (lo, hi, EllipsoidKind::Force, "force")
        }
        EllKind::Velocity => {
            let (lo, hi) = model.velocity_limits();
            (lo, hi, EllipsoidKind::Velocity, "velocity")
        }
    };
    let e = ellipsoid(&jac, &JointBox::new(lo, hi)?, kind)?;
    let shape: Vec<Vec<f64>> = e.shape.row_iter().map(|r| r.iter().copied().collect()).collect();
    let boundary = if samples > 0 { e.sample_boundary(samples)? } else { Vec::new() };
    let doc = json!({
        "task_dim": e.dim(),
        "axes": axis_names(&frame),
        "kind": name,
        "center": e.center.as_slice(),
        "shape": shape,
        "semi_axes": e.semi_axes(),
        "boundary": boundary,
        "params": {"robot": model.name, "q": q},
    });
    emit(&output, &(serde_json::to_string_pretty(&doc).expect("finite values") + "\n"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    model: PathBuf,
    trials: usize,
    seed: u64,
    task: Option<TaskFrame>,
    baseline: bool,
    no_prune: bool,
    warmup: usize,
    parallel: bool,
    output: Option<PathBuf>,
) -> Result<()> {
    let model = describe(&model)?;
    let frame = task.unwrap_or_else(|| {
        if model.is_planar() {
            TaskFrame::planar()
        } else {
            TaskFrame::translational()
        }
    });
    let cfg = BenchConfig {
        trials,
        seed,
        frame,
        baseline,
        prune: !no_prune,
        warmup,
        parallel,
    };
    let report = run_bench(&model, &cfg)?;
    eprintln!(
        "{}: n = {}, m = {}, {} trials, seed {}; samples with σ_min < {:e}·σ_max redrawn ({} rejected)",
        model.name,
        model.dof(),
        cfg.frame.dim(),
        trials,
        seed,
        NEAR_SINGULAR_RATIO,
        report.records[0].rejected_samples
    );
    eprintln!(
        "{:<16} {:>6} {:>26} {:>12} {:>28}",
        "method", "faces", "systems solved mean±sd (max)", "pruned mean", "runtime µs mean±sd (max)"
    );
    for r in &report.records {
        eprintln!(
            "{:<16} {:>6} {:>26} {:>12.2} {:>28}",
            r.method,
            r.faces_total,
            format!("{:.2}±{:.2} ({})", r.systems_solved.mean, r.systems_solved.sd, r.systems_solved.max),
            r.faces_pruned,
            format!("{:.2}±{:.2} ({:.2})", r.runtime_us.mean, r.runtime_us.sd, r.runtime_us.max)
        );
    }
    let mut csv = String::from(BenchRecord::CSV_HEADER);
    csv.push('\n');
    for r in &report.records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    emit(&output, &csv)?;
    if !report.mismatches.is_empty() {
        return Err(Error::Validation(format!(
            "reduced and baseline vertex sets differ on trials {:?}",
            report.mismatches
        )));
    }
    if baseline {
        eprintln!("baseline: vertex sets identical on all {trials} trials");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_combine(
    robot1: PathBuf,
    q1: Vec<f64>,
    robot2: PathBuf,
    q2: Vec<f64>,
    op: Op,
    task: Option<TaskFrame>,
    out: Format,
    output: Option<PathBuf>,
    search: SearchFlags,
) -> Result<()> {
    let m1 = describe(&robot1)?;
    let m2 = describe(&robot2)?;
    let frame = task.unwrap_or_else(|| TaskFrame::default_for(&m1));
    let c1 = load_config(&m1, q1.clone(), "--q1")?;
    let c2 = load_config(&m2, q2.clone(), "--q2")?;
    let j1 = jacobian(&m1, &c1, &frame)?;
    let j2 = jacobian(&m2, &c2, &frame)?;
    let (lo1, hi1) = m1.torque_limits();
    let (lo2, hi2) = m2.torque_limits();
    let (b1, b2) = (JointBox::new(lo1, hi1)?, JointBox::new(lo2, hi2)?);
    let opts = search.options();
    let (set, name) = match op {
        Op::Intersect => (intersection_vertices(&j1, &j2, &b1, &b2, &opts)?, "intersection"),
        Op::Sum => {
            if frame.dim() > 3 {
                return Err(Error::Input("Minkowski sum supports task dimensions 1 to 3".into()));
            }
            let p1 = force_polytope_vertices(&j1, &b1, &opts)?;
            let p2 = force_polytope_vertices(&j2, &b2, &opts)?;
            let sum = minkowski_sum(&Polytope::from_vertex_set(&p1)?, &Polytope::from_vertex_set(&p2)?)?;
            let mut stats = p1.stats;
            stats.faces_total += p2.stats.faces_total;
            stats.faces_pruned_bounds += p2.stats.faces_pruned_bounds;
            stats.faces_singular += p2.stats.faces_singular;
            stats.systems_solved += p2.stats.systems_solved;
            stats.raw_hits += p2.stats.raw_hits;
            stats.runtime_ns += p2.stats.runtime_ns;
            (
                VertexSet {
                    task_dim: frame.dim(),
                    vertices: sum.vertices,
                    stats,
                },
                "minkowski-sum",
            )
        }
    };
    let mut doc = PolytopeDoc::new(&set, axis_names(&frame), name);
    doc.params = [
        ("robot1".to_string(), json!(m1.name)),
        ("q1".to_string(), json!(q1)),
        ("robot2".to_string(), json!(m2.name)),
        ("q2".to_string(), json!(q2)),
    ]
    .into_iter()
    .collect();
    emit(&output, &render(&set, doc, out)?)
}

fn cmd_loadshare(
    scenario: PathBuf,
    policy: Policy,
    payload: Option<f64>,
    out: Format,
    output: Option<PathBuf>,
) -> Result<()> {
    let mut sc = DualArmScenario::load(&scenario)?;
    if let Some(mass) = payload {
        sc = DualArmScenario::new(sc.robot1, sc.robot2, sc.trajectory, mass, sc.gravity_dir.as_slice())?;
    }
    let trace = simulate(&sc, policy)?;
    let text = match out {
        Format::Csv => trace.to_csv(),
        Format::Json => serde_json::to_string_pretty(&trace).expect("finite values") + "\n",
        Format::Off => return Err(Error::Input("load-share traces export as csv or json".into())),
    };
    emit(&output, &text)?;
    eprintln!(
        "{} steps, G = {} N: infeasible steps adaptive {}, fixed:0.5 {} (simulated policy {}: {})",
        trace.steps.len(),
        trace.payload_weight,
        trace.infeasible_adaptive(),
        trace.infeasible_half(),
        trace.policy,
        trace.infeasible_steps()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Describe { model } => {
            let m = describe(&model)?;
            emit(&None, &(m.to_json_string() + "\n"))
        }
        Command::Polytope {
            model,
            q,
            task,
            kind,
            bias_g,
            bias_n,
            tau_d,
            jacobian,
            lo,
            hi,
            out,
            output,
            search,
        } => cmd_polytope(model, q, task, kind, bias_g, bias_n, tau_d, (jacobian, lo, hi), out, output, search),
        Command::Ellipsoid {
            model,
            q,
            task,
            kind,
            samples,
            output,
        } => cmd_ellipsoid(model, q, task, kind, samples, output),
        Command::Bench {
            model,
            trials,
            seed,
            task,
            baseline,
            no_prune,
            warmup,
            parallel,
            output,
        } => cmd_bench(model, trials, seed, task, baseline, no_prune, warmup, parallel, output),
        Command::Combine {
            robot1,
            q1,
            robot2,
            q2,
            op,
            task,
            out,
            output,
            search,
        } => cmd_combine(robot1, q1, robot2, q2, op, task, out, output, search),
        Command::Loadshare {
            scenario,
            policy,
            payload,
            out,
            output,
        } => cmd_loadshare(scenario, policy, payload, out, output),
    }
}

fn main() -> ExitCode {
    // Usage errors share exit code 1 with other input errors; 2 is reserved.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
