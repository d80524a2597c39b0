//! Command-line front end. Every command writes its artifacts into the
//! output directory; failures also leave an `error.json` there.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::network::{read_demand_csv, Conductor, DemandStep, Network};
use crate::nlp::{IpmOptions, IpmStatus};
use crate::opf::{self, ConstraintToggles, ObjectiveKind, ObjectiveSpec, OpfProblem};
use crate::oracle::{self, OracleConfig, Signal};
use crate::phasor::{to_sequence, PhaseTriple};
use crate::power_flow::{self, PowerFlowOptions, PowerFlowResult, ResidualReport};
use crate::vsc::{gamma_locus, ripple_phasor};
use crate::{presets, Error};

#[derive(Debug, Parser)]
#[command(
    name = "ripple-opf",
    version,
    about = "Unbalanced four-wire OPF with converter dc-link ripple constraints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Power flow with all converters idle.
    Pf(PfArgs),
    /// Single optimal power flow.
    Opf(OpfArgs),
    /// Optimal power flow for every step of a demand profile.
    OpfSeries(SeriesArgs),
    /// Time-domain dc-link simulation against the phasor ripple model.
    Oracle(OracleArgs),
    /// Neutral current and ripple along the zero/negative sequence blend.
    GammaSweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Network JSON file.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Bundled network or study case name.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PfArgs {
    #[command(flatten)]
    pub common: Common,
    /// Newton tolerance on the per-unit equations.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    /// Minimize the largest current on the target branch.
    Of1,
    /// Machine derating plus weighted ripple.
    Of2,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub common: Common,
    /// JSON file holding a complete problem (network, objective, toggles).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// Branch monitored by the of1 objective.
    #[arg(long)]
    pub target_branch: Option<String>,
    /// Ripple limit applied to every converter, W.
    #[arg(long)]
    pub ripple_limit_w: Option<f64>,
    /// Ripple weight of the of2 objective, per W.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Derating weight of the of2 objective, per kVA·%.
    #[arg(long)]
    pub weight: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OpfArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Interior-point stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Demand CSV (timestamp,bus,phase,p_kw,q_kvar).
    #[arg(long)]
    pub demand: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Bench case 3a to 3f.
    #[arg(long)]
    pub case: Option<String>,
    /// JSON simulation configuration, used instead of a case.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 11)]
    pub points: usize,
    /// Phase current magnitude, A. Defaults to the smallest phase-leg rating.
    #[arg(long)]
    pub i_mag: Option<f64>,
}

/// Failure with the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl Failure {
    fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            kind: kind.into(),
            message: message.into(),
            exit_code: 1,
        }
    }

    fn solver(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            kind: kind.into(),
            message: message.into(),
            exit_code: 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            kind: e.kind().into(),
            message: e.to_string(),
            exit_code: if e.is_solver_failure() { 2 } else { 1 },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e).into()
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ =
        env_logger::Builder::from_env(env_logger::Env::new().filter("RIPPLE_OPF_LOG")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = out_dir(&cli.command).to_path_buf();
    match run(&cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error ({}): {}", f.kind, f.message);
            if fs::create_dir_all(&out).is_ok() {
                if let Ok(text) = serde_json::to_string_pretty(&f) {
                    let _ = fs::write(out.join("error.json"), text + "\n");
                }
            }
            f.exit_code
        }
    }
}

fn out_dir(cmd: &Command) -> &Path {
    match cmd {
        Command::Pf(a) => &a.common.out,
        Command::Opf(a) => &a.problem.common.out,
        Command::OpfSeries(a) => &a.problem.common.out,
        Command::Oracle(a) => &a.out,
        Command::GammaSweep(a) => &a.common.out,
    }
}

pub fn run(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Pf(a) => run_pf(a),
        Command::Opf(a) => run_opf(a),
        Command::OpfSeries(a) => run_series(a),
        Command::Oracle(a) => run_oracle(a),
        Command::GammaSweep(a) => run_sweep(a),
    }
}

fn prepare(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out)?;
    let stale = out.join("error.json");
    if stale.exists() {
        fs::remove_file(stale)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn finish(mut w: csv::Writer<fs::File>) -> CliResult<()> {
    w.flush()?;
    Ok(())
}

fn load_network(common: &Common) -> CliResult<Network> {
    match (&common.network, &common.preset) {
        (Some(_), Some(_)) => Err(Failure::input(
            "invalid_arguments",
            "give either --network or --preset",
        )),
        (Some(path), None) => {
            let net = Network::load_file(path)?;
            net.ensure_valid()?;
            Ok(net)
        }
        (None, Some(name)) => presets::network(name)
            .or_else(|| presets::case(name).map(|p| p.network))
            .ok_or_else(|| {
                Failure::input(
                    "unknown_preset",
                    format!("no bundled network or case `{name}`"),
                )
            }),
        (None, None) => Err(Failure::input(
            "invalid_arguments",
            "--network or --preset is required",
        )),
    }
}

fn build_problem(a: &ProblemArgs) -> CliResult<OpfProblem> {
    let c = &a.common;
    let mut problem = if let Some(path) = &a.config {
        if c.network.is_some() || c.preset.is_some() {
            return Err(Failure::input(
                "invalid_arguments",
                "--config already holds the network",
            ));
        }
        let text = fs::read_to_string(path)?;
        serde_json::from_str::<OpfProblem>(&text)?
    } else if let Some(p) = c.preset.as_deref().and_then(presets::case) {
        if c.network.is_some() {
            return Err(Failure::input(
                "invalid_arguments",
                "give either --network or --preset",
            ));
        }
        p
    } else {
        let network = load_network(c)?;
        let objective = match a.objective.unwrap_or(ObjectiveArg::Of1) {
            ObjectiveArg::Of1 => ObjectiveSpec {
                target_branch: None,
                ..ObjectiveSpec::min_max_current("")
            },
            ObjectiveArg::Of2 => ObjectiveSpec::derating_plus_ripple(1.0, 1e-4),
        };
        OpfProblem {
            network,
            objective,
            toggles: ConstraintToggles::default(),
        }
    };
    if let Some(kind) = a.objective {
        problem.objective.kind = match kind {
            ObjectiveArg::Of1 => ObjectiveKind::MinMaxPhaseCurrent,
            ObjectiveArg::Of2 => ObjectiveKind::DeratingPlusRipple,
        };
    }
    if let Some(b) = &a.target_branch {
        problem.objective.target_branch = Some(b.clone());
    }
    if let Some(beta) = a.beta {
        problem.objective.ripple_weight = beta;
    }
    if let Some(w) = a.weight {
        problem.objective.derating_weight = w;
    }
    if let Some(lim) = a.ripple_limit_w {
        if !(lim >= 0.0) || !lim.is_finite() {
            return Err(Failure::input(
                "invalid_parameter",
                "--ripple-limit-w must be finite and >= 0",
            ));
        }
        for v in &mut problem.network.vscs {
            v.dc_link.ripple_limit = Some(lim);
        }
    }
    problem.network.ensure_valid()?;
    Ok(problem)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfOutput {
    pub result: PowerFlowResult,
    pub residuals: ResidualReport,
    /// Negative-sequence voltage magnitude per three-phase bus, pu.
    pub vneg: BTreeMap<String, f64>,
}

fn run_pf(a: &PfArgs) -> CliResult<()> {
    let net = load_network(&a.common)?;
    prepare(&a.common.out)?;
    let mut opts = PowerFlowOptions::default();
    if let Some(t) = a.tol {
        opts.tol = t;
    }
    let result = power_flow::solve_with(&net, &power_flow::zero_setpoints(&net), opts)?;
    let residuals = power_flow::residuals(&net, &result.state)?;
    let vneg = opf::vneg_by_bus(&net, &result.state);
    let mut w = csv_writer(&a.common.out.join("summary.csv"))?;
    w.write_record(["bus", "conductor", "magnitude_v", "angle_deg"])?;
    for (bus, pc) in &result.state.voltage {
        for (c, v) in pc.iter() {
            w.write_record([
                bus.clone(),
                c.as_str().to_string(),
                format!("{:.9}", v.norm()),
                format!("{:.9}", v.arg().to_degrees()),
            ])?;
        }
    }
    finish(w)?;
    write_json(
        &a.common.out.join("solution.json"),
        &PfOutput {
            result,
            residuals,
            vneg,
        },
    )
}

fn run_opf(a: &OpfArgs) -> CliResult<()> {
    let problem = build_problem(&a.problem)?;
    let out = &a.problem.common.out;
    prepare(out)?;
    let mut opts = IpmOptions::default();
    if let Some(t) = a.tol {
        if !(t > 0.0) {
            return Err(Failure::input(
                "invalid_parameter",
                "--tol must be positive",
            ));
        }
        opts.tol = t;
    }
    let sol = opf::solve_opf_with(&problem, None, &opts)?;
    write_json(&out.join("solution.json"), &sol)?;

    let mut w = csv_writer(&out.join("summary.csv"))?;
    w.write_record(["metric", "value"])?;
    let mut row = |k: String, v: String| w.write_record([k, v]);
    row("status".into(), format!("{:?}", sol.solver_stats.status))?;
    row(
        "objective_value".into(),
        format!("{:.9}", sol.objective_value),
    )?;
    row("iterations".into(), sol.solver_stats.iterations.to_string())?;
    for (id, r) in &sol.ripple_per_vsc {
        row(format!("ripple_w.{id}"), format!("{r:.9}"))?;
    }
    for (id, n) in &sol.neutral_current_per_vsc {
        row(format!("neutral_current_a.{id}"), format!("{n:.9}"))?;
    }
    for br in &problem.network.branches {
        let m = opf::branch_max_current(&sol.state, &br.id, &Conductor::PHASES);
        row(format!("max_phase_current_a.{}", br.id), format!("{m:.9}"))?;
    }
    finish(w)?;

    if sol.solver_stats.status != IpmStatus::LocalOptimum {
        return Err(Failure::solver(
            "solver_status",
            format!("optimizer stopped with {:?}", sol.solver_stats.status),
        ));
    }
    Ok(())
}

fn load_demand(a: &SeriesArgs) -> CliResult<Vec<DemandStep>> {
    if let Some(path) = &a.demand {
        return Ok(read_demand_csv(path)?);
    }
    let bundled = a.problem.common.preset.as_deref().is_some_and(|name| {
        name == "statcom_toy" || (presets::case(name).is_some() && name.starts_with("case1"))
    });
    if bundled {
        Ok(presets::demand_48())
    } else {
        Err(Failure::input(
            "invalid_arguments",
            "--demand is required for this network",
        ))
    }
}

fn run_series(a: &SeriesArgs) -> CliResult<()> {
    if a.workers == 0 {
        return Err(Failure::input(
            "invalid_parameter",
            "--workers must be at least 1",
        ));
    }
    let problem = build_problem(&a.problem)?;
    let demand = load_demand(a)?;
    let out = &a.problem.common.out;
    prepare(out)?;
    let res = opf::run_timeseries(&problem, &demand, a.workers)?;
    write_json(&out.join("solution.json"), &res)?;

    let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
    let mut w = csv_writer(&out.join("summary.csv"))?;
    w.write_record([
        "index",
        "timestamp",
        "max_current_unmitigated_a",
        "max_current_mitigated_a",
        "objective_value",
        "ripple_w",
        "neutral_current_a",
        "status",
        "error",
    ])?;
    for s in &res.steps {
        w.write_record([
            s.index.to_string(),
            s.timestamp.clone(),
            opt(s.max_current_unmitigated),
            opt(s.max_current_mitigated),
            opt(s.objective_value),
            opt(s.ripple_w),
            opt(s.neutral_current_a),
            s.status.map(|st| format!("{st:?}")).unwrap_or_default(),
            s.error.clone().unwrap_or_default(),
        ])?;
    }
    finish(w)?;

    let mut w = csv_writer(&out.join("duration_curve.csv"))?;
    w.write_record(["rank", "unmitigated_a", "mitigated_a"])?;
    let n = res
        .duration_unmitigated
        .len()
        .max(res.duration_mitigated.len());
    for k in 0..n {
        w.write_record([
            (k + 1).to_string(),
            opt(res.duration_unmitigated.get(k).copied()),
            opt(res.duration_mitigated.get(k).copied()),
        ])?;
    }
    finish(w)?;

    let failed = res.failed_steps();
    if failed > 0 {
        return Err(Failure::solver(
            "failed_steps",
            format!("{failed} of {} steps failed", res.steps.len()),
        ));
    }
    Ok(())
}

fn oracle_config(a: &OracleArgs) -> CliResult<OracleConfig> {
    match (&a.case, &a.config) {
        (Some(name), None) => oracle::case(name)
            .ok_or_else(|| Failure::input("unknown_preset", format!("no oracle case `{name}`"))),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            Ok(serde_json::from_str(&text)?)
        }
        _ => Err(Failure::input(
            "invalid_arguments",
            "give exactly one of --case or --config",
        )),
    }
}

fn run_oracle(a: &OracleArgs) -> CliResult<()> {
    let cfg = oracle_config(a)?;
    prepare(&a.out)?;
    let (report, trace) = oracle::compare_to_bilinear(&cfg)?;
    write_json(&a.out.join("solution.json"), &report)?;

    let mut w = csv_writer(&a.out.join("trace.csv"))?;
    w.write_record([
        "time_s", "p_dc_w", "v_dc_v", "i_cap_a", "i_src_a", "v_a_v", "v_b_v", "v_c_v",
    ])?;
    for k in 0..trace.len() {
        let vt = trace.v_terminal[k];
        w.write_record([
            format!("{:.6}", trace.time[k]),
            format!("{:.6}", trace.p_dc[k]),
            format!("{:.9}", trace.v_dc[k]),
            format!("{:.9}", trace.i_cap[k]),
            format!("{:.9}", trace.i_src[k]),
            format!("{:.6}", vt[0]),
            format!("{:.6}", vt[1]),
            format!("{:.6}", vt[2]),
        ])?;
    }
    finish(w)?;

    let mut w = csv_writer(&a.out.join("spectrum.csv"))?;
    w.write_record(["signal", "harmonic", "magnitude", "phase_deg"])?;
    for (name, sig) in [
        ("p_dc", Signal::PDc),
        ("i_cap", Signal::ICap),
        ("v_dc", Signal::VDc),
        ("i_src", Signal::ISrc),
    ] {
        for (h, x) in oracle::spectrum(&trace, sig, 50)?.into_iter().enumerate() {
            w.write_record([
                name.to_string(),
                h.to_string(),
                format!("{:.9e}", x.norm()),
                format!("{:.6}", x.arg().to_degrees()),
            ])?;
        }
    }
    finish(w)?;

    let mut w = csv_writer(&a.out.join("summary.csv"))?;
    w.write_record(["metric", "value"])?;
    let v = serde_json::to_value(&report)?;
    if let Some(obj) = v.as_object() {
        for (k, val) in obj {
            w.write_record([k.clone(), val.to_string()])?;
        }
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub neutral_current_a: f64,
    pub ripple_w: f64,
    pub phase_a_current_a: f64,
}

fn run_sweep(a: &SweepArgs) -> CliResult<()> {
    if a.points < 2 {
        return Err(Failure::input(
            "invalid_parameter",
            "--points must be at least 2",
        ));
    }
    let mut common = a.common.clone();
    if common.network.is_none() && common.preset.is_none() {
        common.preset = Some("statcom_toy".into());
    }
    let net = load_network(&common)?;
    let vsc = net
        .vscs
        .first()
        .ok_or_else(|| Failure::input("invalid_arguments", "network has no converter"))?;
    let i_mag = match a.i_mag {
        Some(m) if m >= 0.0 && m.is_finite() => m,
        Some(_) => {
            return Err(Failure::input(
                "invalid_parameter",
                "--i-mag must be finite and >= 0",
            ))
        }
        None => vsc
            .legs
            .iter()
            .filter(|l| l.conductor.is_phase())
            .filter_map(|l| l.i_max)
            .fold(f64::INFINITY, f64::min),
    };
    if !i_mag.is_finite() {
        return Err(Failure::input(
            "invalid_arguments",
            "phase legs are unrated; pass --i-mag",
        ));
    }
    let bus = vsc
        .legs
        .iter()
        .find(|l| l.conductor.is_phase())
        .map(|l| l.bus.clone())
        .ok_or_else(|| Failure::input("invalid_arguments", "converter has no phase leg"))?;
    prepare(&common.out)?;
    let pf = power_flow::solve(&net, &power_flow::zero_setpoints(&net))?;
    let v = |c| pf.state.voltage_at(&bus, c);
    let vpos = to_sequence(PhaseTriple::new(
        v(Conductor::A),
        v(Conductor::B),
        v(Conductor::C),
    ))
    .positive;

    let mut points = Vec::with_capacity(a.points);
    for k in 0..a.points {
        let gamma = k as f64 / (a.points - 1) as f64;
        let op = gamma_locus(gamma, i_mag, vpos)?;
        points.push(SweepPoint {
            gamma,
            neutral_current_a: op.leg_currents[3].norm(),
            ripple_w: ripple_phasor(&op)?.norm(),
            phase_a_current_a: op.leg_currents[0].norm(),
        });
    }
    let mut w = csv_writer(&common.out.join("summary.csv"))?;
    w.write_record([
        "gamma",
        "neutral_current_a",
        "ripple_w",
        "phase_a_current_a",
    ])?;
    for p in &points {
        w.write_record([
            format!("{:.6}", p.gamma),
            format!("{:.9}", p.neutral_current_a),
            format!("{:.9}", p.ripple_w),
            format!("{:.9}", p.phase_a_current_a),
        ])?;
    }
    finish(w)?;
    write_json(&common.out.join("solution.json"), &points)
}
