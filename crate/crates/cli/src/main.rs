//! Command-line front end for the cascade library.
//!
//! Four subcommands cover the workflow: `simulate` runs the dynamics and
//! writes plot-ready artifacts, `equilibria` reports the equilibrium
//! structure, `signiter` runs the directed sign iterations, and `validate`
//! checks a scenario document without running anything.
//!
//! Every command is deterministic given the scenario file and flags: seeds
//! live in the document, never in system entropy. Reports carry the same
//! numeric content whether rendered as text or as `--json`.
//!
//! Exit codes: 0 success, 2 input error, 3 analysis infeasibility,
//! 4 internal assertion failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crossnet_core::dynamics::{check_positivity_condition, simulate, Trajectory};
use crossnet_core::equilibria::{
    classify_regime, enumerate_equilibria, no_all_fail_certificate, stability_report, translate,
    EquilibriaError, TranslatedSystem, DEFAULT_ENUMERATION_CAP,
};
use crossnet_core::export::{
    topology_dot, topology_json, topology_snapshot, trajectory_csv, trajectory_json,
};
use crossnet_core::scenario::{bundled, parse_spec, resolve_spec, ScenarioFile};
use crossnet_core::sign_iteration::{
    fixed_sign_classification, iterate_best, iterate_worst, psi, NodeSignClass, SignIterationError,
    SignIterationTrace,
};

const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "crossnet",
    version,
    about = "Simulate and analyze failure cascades in cross-holdings networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Emit the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Directory that written artifacts go to.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Replace every seed in the scenario with this value.
    #[arg(long, global = true)]
    seed_override: Option<u64>,

    /// Apply --seed-override even though the scenario pins its seeds.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the dynamics and write trajectory and topology artifacts.
    Simulate {
        /// Path to a scenario document, or the name of a bundled one.
        scenario: String,
        /// Time indices to snapshot the topology at.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0usize, 1, 2, 3])]
        snapshots: Vec<usize>,
    },
    /// Report the equilibrium structure of a scenario's network.
    Equilibria {
        /// Path to a scenario document, or the name of a bundled one.
        scenario: String,
        /// Sweep the orthants and list every consistent equilibrium.
        #[arg(long)]
        enumerate: bool,
        /// Report the regime flags and failure-count bounds (the default
        /// when no section is requested).
        #[arg(long)]
        regime: bool,
        /// Check the no-all-fail certificate on these nodes: a
        /// comma-separated list of node names, or "all".
        #[arg(long, value_name = "NODES")]
        certificate: Option<String>,
    },
    /// Run the directed sign iterations to the worst and best equilibria.
    Signiter {
        /// Path to a scenario document, or the name of a bundled one.
        scenario: String,
        /// Which directed iteration to run.
        #[arg(long, value_enum, default_value_t = Direction::Both)]
        direction: Direction,
        /// Include every visited sign vector in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Parse and validate a scenario document without running anything.
    Validate {
        /// Path to a scenario document, or the name of a bundled one.
        scenario: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Worst,
    Best,
    Both,
}

/// A command failure: what to print and which exit code to leave behind.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INFEASIBLE,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate {
            scenario,
            snapshots,
        } => {
            let file = load_scenario(scenario, cli.seed_override, cli.force)?;
            cmd_simulate(&file, &cli.out, snapshots, cli.json)
        }
        Command::Equilibria {
            scenario,
            enumerate,
            regime,
            certificate,
        } => {
            let file = load_scenario(scenario, cli.seed_override, cli.force)?;
            cmd_equilibria(&file, *enumerate, *regime, certificate.as_deref(), cli.json)
        }
        Command::Signiter {
            scenario,
            direction,
            trace,
        } => {
            let file = load_scenario(scenario, cli.seed_override, cli.force)?;
            cmd_signiter(&file, *direction, *trace, cli.json)
        }
        Command::Validate { scenario } => {
            cmd_validate(scenario, cli.seed_override, cli.force, cli.json)
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario loading
// ---------------------------------------------------------------------------

/// Reads a scenario from a path, falling back to the bundled set when the
/// argument names one of them instead.
fn read_document(path_or_name: &str) -> Result<(String, String), Failure> {
    if Path::new(path_or_name).exists() {
        let text = fs::read_to_string(path_or_name)
            .map_err(|e| Failure::input(format!("{path_or_name}: {e}")))?;
        return Ok((text, path_or_name.to_string()));
    }
    if let Some(text) = bundled::by_name(path_or_name) {
        return Ok((text.to_string(), format!("bundled scenario {path_or_name}")));
    }
    let names: Vec<&str> = bundled::all().iter().map(|(n, _)| *n).collect();
    Err(Failure::input(format!(
        "{path_or_name}: no such file, and no bundled scenario has that name \
         (bundled: {})",
        names.join(", ")
    )))
}

fn load_scenario(
    path_or_name: &str,
    seed_override: Option<u64>,
    force: bool,
) -> Result<ScenarioFile, Failure> {
    let (text, label) = read_document(path_or_name)?;
    let mut spec = parse_spec(&text).map_err(|e| Failure::input(format!("{label}: {e}")))?;
    if let Some(seed) = seed_override {
        if !spec.seeded() {
            eprintln!("warning: scenario has no seeded fields; --seed-override changes nothing");
        } else if force {
            eprintln!("warning: replacing every seed in the scenario with {seed}");
            spec = spec.with_seed(seed);
        } else {
            return Err(Failure::input(
                "the scenario generates data from pinned seeds, so --seed-override \
                 would change its results; pass --force to override them anyway",
            ));
        }
    }
    resolve_spec(spec).map_err(|e| Failure::input(format!("{label}: {e}")))
}

fn translate_or_fail(file: &ScenarioFile) -> Result<TranslatedSystem, Failure> {
    translate(&file.network).map_err(|e| Failure::infeasible(e.to_string()))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EquityRow {
    name: String,
    value: f64,
    failed: bool,
}

#[derive(Serialize)]
struct SimulateReport {
    scenario: String,
    n: usize,
    m: usize,
    horizon: usize,
    converged: bool,
    settle_time: Option<usize>,
    final_failed: Vec<String>,
    final_equity: Vec<EquityRow>,
    artifacts: Vec<String>,
}

fn cmd_simulate(
    file: &ScenarioFile,
    out_dir: &Path,
    snapshots: &[usize],
    json: bool,
) -> Result<(), Failure> {
    let traj = simulate(
        &file.network,
        &file.initial_state,
        &file.prices,
        file.horizon,
        file.conv_tol,
        file.confirm_window,
    )
    .map_err(|e| Failure::input(format!("the scenario data does not simulate: {e}")))?;

    fs::create_dir_all(out_dir)
        .map_err(|e| Failure::input(format!("{}: {e}", out_dir.display())))?;
    let mut artifacts = Vec::new();
    let name = &file.spec.name;

    let csv = trajectory_csv(&traj).map_err(|e| Failure::internal(e.to_string()))?;
    artifacts.push(write_artifact(
        out_dir,
        &format!("{name}_trajectory.csv"),
        &csv,
    )?);
    let traj_json = trajectory_json(&traj).map_err(|e| Failure::internal(e.to_string()))?;
    artifacts.push(write_artifact(
        out_dir,
        &format!("{name}_trajectory.json"),
        &traj_json,
    )?);

    let mut wanted: Vec<usize> = snapshots.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    for t in wanted {
        let Some(state) = traj.states.get(t) else {
            eprintln!(
                "warning: no state at t = {t} (the run ends at t = {}); snapshot skipped",
                traj.horizon()
            );
            continue;
        };
        let snapshot = topology_snapshot(&file.network, state, &file.node_names)
            .map_err(|e| Failure::internal(e.to_string()))?;
        artifacts.push(write_artifact(
            out_dir,
            &format!("{name}_topology_t{t}.dot"),
            &topology_dot(&snapshot),
        )?);
        let snapshot_json =
            topology_json(&snapshot).map_err(|e| Failure::internal(e.to_string()))?;
        artifacts.push(write_artifact(
            out_dir,
            &format!("{name}_topology_t{t}.json"),
            &snapshot_json,
        )?);
    }

    let report = simulate_report(file, &traj, artifacts);
    if json {
        print_json(&report)?;
    } else {
        print!("{}", render_simulate(&report));
    }
    Ok(())
}

fn simulate_report(
    file: &ScenarioFile,
    traj: &Trajectory,
    artifacts: Vec<String>,
) -> SimulateReport {
    let indicator = traj.final_indicator();
    let final_state = traj.final_state();
    SimulateReport {
        scenario: file.spec.name.clone(),
        n: file.network.n(),
        m: file.network.m(),
        horizon: traj.horizon(),
        converged: traj.converged,
        settle_time: traj.settle_time,
        final_failed: names_of(&indicator.failed_indices(), &file.node_names),
        final_equity: (0..file.network.n())
            .map(|i| EquityRow {
                name: file.node_names[i].clone(),
                value: final_state.v[i],
                failed: indicator.phi[i] == 1,
            })
            .collect(),
        artifacts,
    }
}

fn render_simulate(r: &SimulateReport) -> String {
    let mut out = String::new();
    line(
        &mut out,
        format!(
            "scenario {}: n = {}, m = {}, horizon {}",
            r.scenario, r.n, r.m, r.horizon
        ),
    );
    match (r.converged, r.settle_time) {
        (true, Some(t)) => line(&mut out, format!("converged: yes, settled at t = {t}")),
        (true, None) => line(&mut out, "converged: yes"),
        (false, _) => line(
            &mut out,
            "converged: no (ran to the horizon without settling)",
        ),
    }
    line(
        &mut out,
        format!(
            "failed at the end ({} of {}): {}",
            r.final_failed.len(),
            r.n,
            join_or_none(&r.final_failed)
        ),
    );
    line(&mut out, "final equity:");
    for row in &r.final_equity {
        let tag = if row.failed { "  (failed)" } else { "" };
        line(&mut out, format!("  {} = {}{}", row.name, row.value, tag));
    }
    line(&mut out, "artifacts:");
    for path in &r.artifacts {
        line(&mut out, format!("  {path}"));
    }
    out
}

// ---------------------------------------------------------------------------
// equilibria
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RegimeSection {
    pos_eq_exists: bool,
    pos_eq_unique_overall: bool,
    neg_eq_exists: bool,
    neg_eq_unique_overall: bool,
    n_f_lower: usize,
    n_f_upper: usize,
}

#[derive(Serialize)]
struct EquilibriumRow {
    orthant: u64,
    failed: Vec<String>,
    locally_stable: bool,
    fragile: bool,
    equity: Vec<f64>,
}

#[derive(Serialize)]
struct CertificateSection {
    nodes: Vec<String>,
    no_all_fail: bool,
}

#[derive(Serialize)]
struct EquilibriaReport {
    scenario: String,
    n: usize,
    positivity_ok: bool,
    margin: Vec<f64>,
    contraction_norm: f64,
    regime: Option<RegimeSection>,
    equilibria: Option<Vec<EquilibriumRow>>,
    certificate: Option<CertificateSection>,
}

fn cmd_equilibria(
    file: &ScenarioFile,
    enumerate: bool,
    regime: bool,
    certificate: Option<&str>,
    json: bool,
) -> Result<(), Failure> {
    let ts = translate_or_fail(file)?;
    let network = &file.network;
    let dp = network.dp();
    let margin: Vec<f64> = (0..network.n())
        .map(|i| dp[i] - network.beta()[i])
        .collect();

    // With no section requested, the cheap regime summary is the report.
    let want_regime = regime || (!enumerate && certificate.is_none());

    let regime_section = want_regime.then(|| {
        let r = classify_regime(&ts, network);
        RegimeSection {
            pos_eq_exists: r.pos_eq_exists,
            pos_eq_unique_overall: r.pos_eq_unique_overall,
            neg_eq_exists: r.neg_eq_exists,
            neg_eq_unique_overall: r.neg_eq_unique_overall,
            n_f_lower: r.n_f_lower,
            n_f_upper: r.n_f_upper,
        }
    });

    let equilibria_section = if enumerate {
        let found =
            enumerate_equilibria(&ts, network, DEFAULT_ENUMERATION_CAP).map_err(|e| match e {
                EquilibriaError::TooLarge { .. } => Failure::infeasible(format!(
                    "{e}; `signiter` finds the extreme equilibria at any size"
                )),
                other => Failure::infeasible(other.to_string()),
            })?;
        let mut rows = Vec::with_capacity(found.len());
        for eq in &found {
            let stability =
                stability_report(eq, network).map_err(|e| Failure::internal(e.to_string()))?;
            rows.push(EquilibriumRow {
                orthant: eq.k,
                failed: names_of(
                    &(0..network.n())
                        .filter(|&i| eq.phi_k[i] == 1)
                        .collect::<Vec<_>>(),
                    &file.node_names,
                ),
                locally_stable: stability.locally_stable,
                fragile: stability.fragile,
                equity: eq.v_bar.clone(),
            });
        }
        Some(rows)
    } else {
        None
    };

    let certificate_section = match certificate {
        None => None,
        Some(spec_str) => {
            let indices = parse_node_list(spec_str, &file.node_names)?;
            let holds = no_all_fail_certificate(network, &indices)
                .map_err(|e| Failure::infeasible(e.to_string()))?;
            Some(CertificateSection {
                nodes: names_of(&indices, &file.node_names),
                no_all_fail: holds,
            })
        }
    };

    let report = EquilibriaReport {
        scenario: file.spec.name.clone(),
        n: network.n(),
        positivity_ok: check_positivity_condition(network),
        margin,
        contraction_norm: network.c().one_norm(),
        regime: regime_section,
        equilibria: equilibria_section,
        certificate: certificate_section,
    };
    if json {
        print_json(&report)?;
    } else {
        print!("{}", render_equilibria(&report));
    }
    Ok(())
}

/// Parses "all" or a comma-separated list of node names into indices.
fn parse_node_list(spec_str: &str, names: &[String]) -> Result<Vec<usize>, Failure> {
    if spec_str.trim() == "all" {
        return Ok((0..names.len()).collect());
    }
    let mut indices = Vec::new();
    for token in spec_str.split(',') {
        let token = token.trim();
        let i = names.iter().position(|n| n == token).ok_or_else(|| {
            Failure::input(format!(
                "no node named {token:?} (nodes: {})",
                names.join(", ")
            ))
        })?;
        if !indices.contains(&i) {
            indices.push(i);
        }
    }
    if indices.is_empty() {
        return Err(Failure::input("the certificate needs at least one node"));
    }
    Ok(indices)
}

fn render_equilibria(r: &EquilibriaReport) -> String {
    let mut out = String::new();
    line(&mut out, format!("scenario {}: n = {}", r.scenario, r.n));
    line(
        &mut out,
        format!(
            "positivity check (income covers failure costs): {}",
            pass_fail(r.positivity_ok)
        ),
    );
    line(
        &mut out,
        format!("margin (D p - beta): {}", fmt_vec(&r.margin)),
    );
    line(
        &mut out,
        format!("cross-holdings contraction norm: {}", r.contraction_norm),
    );
    if let Some(reg) = &r.regime {
        line(&mut out, "regime:");
        line(
            &mut out,
            format!(
                "  all-healthy equilibrium exists: {}",
                yes_no(reg.pos_eq_exists)
            ),
        );
        line(
            &mut out,
            format!(
                "  all-healthy is the only equilibrium: {}",
                yes_no(reg.pos_eq_unique_overall)
            ),
        );
        line(
            &mut out,
            format!(
                "  all-fail equilibrium exists: {}",
                yes_no(reg.neg_eq_exists)
            ),
        );
        line(
            &mut out,
            format!(
                "  all-fail is the only equilibrium: {}",
                yes_no(reg.neg_eq_unique_overall)
            ),
        );
        line(
            &mut out,
            format!(
                "  failures at any equilibrium: between {} and {}",
                reg.n_f_lower, reg.n_f_upper
            ),
        );
    }
    if let Some(rows) = &r.equilibria {
        line(&mut out, format!("consistent equilibria ({}):", rows.len()));
        for row in rows {
            let stability = if row.fragile {
                "fragile (sits on a failure boundary)"
            } else if row.locally_stable {
                "locally stable"
            } else {
                "unstable"
            };
            line(
                &mut out,
                format!(
                    "  orthant {}: {} failed [{}], {}",
                    row.orthant,
                    row.failed.len(),
                    row.failed.join(", "),
                    stability
                ),
            );
            line(&mut out, format!("    V = {}", fmt_vec(&row.equity)));
        }
    }
    if let Some(cert) = &r.certificate {
        line(
            &mut out,
            format!(
                "certificate on [{}]: all-fail equilibrium ruled out: {}",
                cert.nodes.join(", "),
                yes_no(cert.no_all_fail)
            ),
        );
    }
    out
}

// ---------------------------------------------------------------------------
// signiter
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TraceRow {
    step: usize,
    signs: Vec<i8>,
    safe: Vec<String>,
}

#[derive(Serialize)]
struct DirectionSection {
    iterations: usize,
    signs: Vec<i8>,
    safe: Vec<String>,
    marginal: Vec<String>,
    x_translated: Vec<f64>,
    equity: Vec<f64>,
    trace: Option<Vec<TraceRow>>,
}

#[derive(Serialize)]
struct SignIterReport {
    scenario: String,
    n: usize,
    node_classes: Vec<String>,
    worst: Option<DirectionSection>,
    best: Option<DirectionSection>,
}

fn cmd_signiter(
    file: &ScenarioFile,
    direction: Direction,
    want_trace: bool,
    json: bool,
) -> Result<(), Failure> {
    let ts = translate_or_fail(file)?;
    let classes = fixed_sign_classification(&ts)
        .iter()
        .map(|c| {
            match c {
                NodeSignClass::AlwaysNegative => "always_failed",
                NodeSignClass::AlwaysPositive => "always_healthy",
                NodeSignClass::Undetermined => "undetermined",
            }
            .to_string()
        })
        .collect();

    let worst = if direction != Direction::Best {
        Some(direction_section(
            file,
            &ts,
            iterate_worst(&ts).map_err(map_sign_error)?,
            want_trace,
        ))
    } else {
        None
    };
    let best = if direction != Direction::Worst {
        Some(direction_section(
            file,
            &ts,
            iterate_best(&ts).map_err(map_sign_error)?,
            want_trace,
        ))
    } else {
        None
    };

    // Running both directions gives the bracket a free end-to-end check:
    // the worst fixed point must sit at or below the best one.
    if let (Some(w), Some(b)) = (&worst, &best) {
        let ordered = w.signs.iter().zip(&b.signs).all(|(a, b)| a <= b)
            && w.x_translated
                .iter()
                .zip(&b.x_translated)
                .all(|(a, b)| a <= b);
        if !ordered {
            return Err(Failure::internal(
                "the worst fixed point is not below the best one; \
                 this is an internal defect, not bad input",
            ));
        }
    }

    let report = SignIterReport {
        scenario: file.spec.name.clone(),
        n: ts.n(),
        node_classes: classes,
        worst,
        best,
    };
    if json {
        print_json(&report)?;
    } else {
        print!("{}", render_signiter(&report, &file.node_names));
    }
    Ok(())
}

fn map_sign_error(e: SignIterationError) -> Failure {
    match e {
        SignIterationError::TrajectoryStalled { .. } => Failure::infeasible(e.to_string()),
        _ => Failure::internal(e.to_string()),
    }
}

fn direction_section(
    file: &ScenarioFile,
    ts: &TranslatedSystem,
    trace: SignIterationTrace,
    want_trace: bool,
) -> DirectionSection {
    let x = ts.p.mul_vec(&psi(ts, &trace.fixed_point));
    let equity: Vec<f64> = x
        .iter()
        .zip(file.network.v_threshold())
        .map(|(xi, ti)| xi + ti)
        .collect();
    let rows = want_trace.then(|| {
        trace
            .sequence
            .iter()
            .zip(&trace.safe_sets)
            .enumerate()
            .map(|(step, (sigma, safe))| TraceRow {
                step,
                signs: sigma.signs.clone(),
                safe: names_of(safe, &file.node_names),
            })
            .collect()
    });
    DirectionSection {
        iterations: trace.iterations,
        signs: trace.fixed_point.signs.clone(),
        safe: names_of(&trace.fixed_point.safe_set(), &file.node_names),
        marginal: names_of(&trace.marginal_components, &file.node_names),
        x_translated: x,
        equity,
        trace: rows,
    }
}

fn render_signiter(r: &SignIterReport, names: &[String]) -> String {
    let mut out = String::new();
    line(&mut out, format!("scenario {}: n = {}", r.scenario, r.n));
    line(&mut out, "node classes:");
    for class in ["always_healthy", "always_failed", "undetermined"] {
        let members: Vec<String> = r
            .node_classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.as_str() == class)
            .map(|(i, _)| names[i].clone())
            .collect();
        line(
            &mut out,
            format!(
                "  {class} ({} of {}): {}",
                members.len(),
                r.n,
                join_or_none(&members)
            ),
        );
    }
    if let Some(section) = &r.worst {
        render_direction(&mut out, "worst (from the all-fail side)", section);
    }
    if let Some(section) = &r.best {
        render_direction(&mut out, "best (from the all-healthy side)", section);
    }
    out
}

fn render_direction(out: &mut String, label: &str, s: &DirectionSection) {
    line(
        out,
        format!("{label}: fixed in {} iterations", s.iterations),
    );
    line(out, format!("  signs: {}", fmt_signs(&s.signs)));
    line(
        out,
        format!(
            "  safe set ({} of {}): {}",
            s.safe.len(),
            s.signs.len(),
            join_or_none(&s.safe)
        ),
    );
    if !s.marginal.is_empty() {
        line(
            out,
            format!(
                "  boundary-exact sign calls at: {} (values within 1e-12 of zero)",
                s.marginal.join(", ")
            ),
        );
    }
    line(
        out,
        format!("  x (translated) = {}", fmt_vec(&s.x_translated)),
    );
    line(out, format!("  V (original) = {}", fmt_vec(&s.equity)));
    if let Some(rows) = &s.trace {
        line(out, "  trace:");
        for row in rows {
            line(
                out,
                format!(
                    "    step {}: {} safe [{}]",
                    row.step,
                    fmt_signs(&row.signs),
                    row.safe.join(", ")
                ),
            );
        }
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ValidateReport {
    scenario: String,
    ok: bool,
    n: usize,
    m: usize,
    node_names: Vec<String>,
    horizon: usize,
    conv_tol: f64,
    confirm_window: usize,
    seeded: bool,
    contraction_norm: f64,
    positivity_ok: bool,
}

fn cmd_validate(
    path_or_name: &str,
    seed_override: Option<u64>,
    force: bool,
    json: bool,
) -> Result<(), Failure> {
    let file = load_scenario(path_or_name, seed_override, force)?;
    let report = ValidateReport {
        scenario: file.spec.name.clone(),
        ok: true,
        n: file.network.n(),
        m: file.network.m(),
        node_names: file.node_names.clone(),
        horizon: file.horizon,
        conv_tol: file.conv_tol,
        confirm_window: file.confirm_window,
        seeded: file.spec.seeded(),
        contraction_norm: file.network.c().one_norm(),
        positivity_ok: check_positivity_condition(&file.network),
    };
    if json {
        print_json(&report)?;
    } else {
        let mut out = String::new();
        line(
            &mut out,
            format!(
                "scenario {}: valid (n = {}, m = {}, horizon {})",
                report.scenario, report.n, report.m, report.horizon
            ),
        );
        line(&mut out, format!("nodes: {}", report.node_names.join(", ")));
        line(
            &mut out,
            format!(
                "convergence: tolerance {}, confirm window {}",
                report.conv_tol, report.confirm_window
            ),
        );
        line(
            &mut out,
            format!("seeded fields: {}", yes_no(report.seeded)),
        );
        line(
            &mut out,
            format!(
                "cross-holdings contraction norm: {}",
                report.contraction_norm
            ),
        );
        line(
            &mut out,
            format!(
                "positivity check (income covers failure costs): {}",
                pass_fail(report.positivity_ok)
            ),
        );
        print!("{out}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Small shared helpers
// ---------------------------------------------------------------------------

fn write_artifact(dir: &Path, filename: &str, content: &str) -> Result<String, Failure> {
    let path = dir.join(filename);
    fs::write(&path, content).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(path.display().to_string())
}

fn print_json<T: Serialize>(report: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Failure::internal(format!("report serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

fn names_of(indices: &[usize], names: &[String]) -> Vec<String> {
    indices.iter().map(|&i| names[i].clone()).collect()
}

fn line(out: &mut String, text: impl AsRef<str>) {
    out.push_str(text.as_ref());
    out.push('\n');
}

fn fmt_vec(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_signs(signs: &[i8]) -> String {
    signs
        .iter()
        .map(|&s| if s >= 0 { '+' } else { '-' })
        .collect::<String>()
}

fn join_or_none(names: &[String]) -> String {
    if names.is_empty() {
        "(none)".to_string()
    } else {
        names.join(", ")
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn pass_fail(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}
