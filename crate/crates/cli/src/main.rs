// Copyright 2026 The esw-core Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `esw`: detector checks, the four-mode demo, detector synthesis and the
//! double-slit Monte Carlo.
//!
//! Standard output always carries exactly one JSON document. Exit codes:
//! 0 when every check passes, 1 when a physics check fails, 2 on bad input.
//! Serialized 2×2 ancilla matrices use index 0 ↔ `|0⟩`, index 1 ↔ `|1⟩`;
//! complex entries are `[re, im]` pairs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use esw_core::linalg::{is_projection, operator_to_pairs, Operator, ProjectionCheck};
use esw_core::model::{
    build_four_mode_model, build_simple_model, default_screen_events, load_config, ModelConfig,
    ModelError, TwoSlitModel,
};
use esw_core::sim::{
    apply_t_dephasing, fringe_visibility, simulate_runs, states, total_variation, DoubleSlit,
    GridSpec, SimParams, SlitGeometry, DEFAULT_VISIBILITY_WINDOW,
};
use esw_core::verify::{
    check_correlation_chain, check_direct_correlation, check_esw_detector, check_incompatibility,
    synthesize_detectors, CorrelationChainReport, DetectorCheckReport, DirectCorrelationReport,
    IncompatibilityReport, VerifyError, DEFAULT_INCOMPATIBILITY_THRESHOLD,
};
use esw_core::DEFAULT_TOL;
use serde::Serialize;
use serde_json::{json, Value};

/// Screen-level total variation allowed between `Ψ` and its `T`-dephased
/// mixture before `simulate` reports a failure.
const DEPHASING_TV_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "esw",
    version,
    about = "Non-disturbing which-slit detector checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check projections, detector conditions and the correlation chain.
    Verify(ModelArgs),
    /// Walk through the four-mode model.
    Demo(DemoArgs),
    /// Sample screen positions with or without measuring T.
    Simulate(SimulateArgs),
    /// List every ancilla detector R with 1 ⊗ R non-disturbing for a target.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model config path, or builtin:simple / builtin:four-mode.
    #[arg(long, default_value = "builtin:four-mode")]
    model: String,
    /// Residual tolerance. Overrides the tolerance in a config file.
    #[arg(long, env = "ESW_DEFAULT_TOL")]
    tol: Option<f64>,
}

#[derive(Args)]
struct DemoArgs {
    /// Skip the human-readable report on stderr.
    #[arg(long)]
    json: bool,
    #[arg(long, env = "ESW_DEFAULT_TOL")]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateChoice {
    /// ½[(ψ₁+ψ₂)|1⟩ + (ψ₃+ψ₄)|0⟩]
    Entangled,
    /// (ψ₁+ψ₃)/√2 ⊗ |1⟩
    Coherent,
    /// (ψ₁+ψ₂+ψ₃+ψ₄)/2 ⊗ |1⟩
    Product,
}

impl StateChoice {
    fn name(self) -> &'static str {
        match self {
            StateChoice::Entangled => "entangled",
            StateChoice::Coherent => "coherent",
            StateChoice::Product => "product",
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
    measure_t: bool,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    bins: usize,
    /// Output prefix; writes <prefix>_hist.csv, <prefix>_exact.csv and
    /// <prefix>_runs.jsonl.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "entangled")]
    state: StateChoice,
    #[arg(long, default_value_t = 2048)]
    n_points: usize,
    #[arg(long, default_value_t = 16.0)]
    extent: f64,
    #[arg(long, default_value_t = 4.0)]
    slit_separation: f64,
    #[arg(long, default_value_t = 1.0)]
    slit_width: f64,
    #[arg(long, default_value_t = 0.4)]
    mode_waist: f64,
    #[arg(long, default_value_t = 1.0)]
    wavelength_scale: f64,
    #[arg(long, default_value_t = 0.5)]
    screen_halfwidth: f64,
    /// Central fraction of bins used for fringe visibility.
    #[arg(long, default_value_t = DEFAULT_VISIBILITY_WINDOW)]
    visibility_window: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    /// Lplus ⊗ 1 from the model.
    #[value(alias = "Eplus", alias = "lplus", alias = "Lplus")]
    Eplus,
    /// L ⊗ 1 from the model.
    #[value(alias = "E", alias = "l", alias = "L")]
    E,
    Identity,
    Zero,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "eplus")]
    target: Target,
}

/// Why a command stopped early.
enum Failure {
    /// Bad flags, unreadable or malformed input, unwritable output.
    Input(String),
    /// A physics check failed before a full report could be built.
    Check(Value),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn model_failure(e: ModelError) -> Failure {
    match e {
        ModelError::InvariantViolation {
            operator,
            residual,
            value,
            tol,
        } => Failure::Check(json!({
            "passed": false,
            "load_error": {
                "operator": operator,
                "residual": residual,
                "value": value,
                "tol": tol,
            },
        })),
        other => Failure::Input(other.to_string()),
    }
}

fn verify_failure(e: VerifyError) -> Failure {
    match e {
        VerifyError::NotAProjection {
            operator,
            residual,
            value,
            tol,
        } => Failure::Check(json!({
            "passed": false,
            "check_error": {
                "operator": operator,
                "residual": residual,
                "value": value,
                "tol": tol,
            },
        })),
        other => Failure::Input(other.to_string()),
    }
}

struct Loaded {
    model: TwoSlitModel,
    /// Named events: those from the config followed by the defaults.
    events: Vec<(String, Operator)>,
    tol: f64,
}

impl Loaded {
    fn event_ops(&self) -> Vec<Operator> {
        self.events.iter().map(|(_, f)| f.clone()).collect()
    }
}

fn load(spec: &str, tol: Option<f64>) -> Result<Loaded, Failure> {
    if let Some(t) = tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Failure::Input(format!("invalid tolerance {}", t)));
        }
    }
    let (model, mut events, tol) = match spec {
        "builtin:simple" | "builtin:four-mode" => {
            let model = if spec == "builtin:simple" {
                build_simple_model()
            } else {
                build_four_mode_model()
            };
            let tol = tol.unwrap_or(DEFAULT_TOL);
            model.verify_invariants(tol).map_err(model_failure)?;
            (model, Vec::new(), tol)
        }
        path if path.starts_with("builtin:") => {
            return Err(Failure::Input(format!("unknown builtin model {:?}", path)))
        }
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("{}: {}", path, e)))?;
            let mut config: ModelConfig = serde_json::from_str(&text)
                .map_err(|e| Failure::Input(format!("{}: {}", path, e)))?;
            if tol.is_some() {
                config.tolerance = tol;
            }
            let loaded = load_config(&config).map_err(model_failure)?;
            (loaded.model, loaded.screen_events, loaded.tolerance)
        }
    };
    let defaults =
        default_screen_events(model.dim_k()).map_err(|e| Failure::Input(e.to_string()))?;
    for (i, f) in defaults.into_iter().enumerate() {
        events.push((format!("F_default_{}", i), f));
    }
    Ok(Loaded { model, events, tol })
}

#[derive(Serialize)]
struct NamedProjection {
    name: String,
    #[serde(flatten)]
    check: ProjectionCheck,
    pass: bool,
}

#[derive(Serialize)]
struct ChainJson {
    #[serde(flatten)]
    report: CorrelationChainReport,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    model: String,
    tolerance: f64,
    projections: Vec<NamedProjection>,
    direct_correlation: DirectCorrelationReport,
    #[serde(rename = "detector_T_E")]
    detector_t_e: DetectorCheckReport,
    #[serde(rename = "detector_T_Eplus")]
    detector_t_eplus: Option<DetectorCheckReport>,
    incompatibility: Option<IncompatibilityReport>,
    chain: Option<ChainJson>,
    passed: bool,
}

fn build_report(name: &str, loaded: &Loaded) -> Result<VerifyReport, Failure> {
    let m = &loaded.model;
    let tol = loaded.tol;
    let fs = loaded.event_ops();

    let projections: Vec<NamedProjection> = m
        .projections()
        .into_iter()
        .map(|(n, p)| (n.to_string(), p))
        .chain(loaded.events.iter().map(|(n, f)| (n.clone(), f)))
        .map(|(name, p)| {
            let check = is_projection(p, tol);
            NamedProjection {
                name,
                pass: check.pass(),
                check,
            }
        })
        .collect();

    let direct = check_direct_correlation(m.t(), m.e(), m.psi(), tol).map_err(verify_failure)?;
    let detector_t_e =
        check_esw_detector(m.t(), m.e(), &fs, m.psi(), tol).map_err(verify_failure)?;
    let (detector_t_eplus, incompatibility, chain) = match m.eplus() {
        Some(eplus) => {
            let det =
                check_esw_detector(m.t(), eplus, &fs, m.psi(), tol).map_err(verify_failure)?;
            let inc = check_incompatibility(eplus, m.e(), DEFAULT_INCOMPATIBILITY_THRESHOLD)
                .map_err(verify_failure)?;
            let chain = check_correlation_chain(m).map_err(verify_failure)?;
            (
                Some(det),
                Some(inc),
                Some(ChainJson {
                    pass: chain.pass(tol),
                    report: chain,
                }),
            )
        }
        None => (None, None, None),
    };

    let passed = projections.iter().all(|p| p.pass)
        && direct.pass()
        && detector_t_e.pass
        && detector_t_eplus.as_ref().is_none_or(|d| d.pass)
        && chain.as_ref().is_none_or(|c| c.pass);
    Ok(VerifyReport {
        model: name.to_string(),
        tolerance: tol,
        projections,
        direct_correlation: direct,
        detector_t_e,
        detector_t_eplus,
        incompatibility,
        chain,
        passed,
    })
}

fn print_json(value: &impl Serialize) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Input(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn exit_for(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_verify(args: &ModelArgs) -> Result<ExitCode, Failure> {
    let loaded = load(&args.model, args.tol)?;
    let report = build_report(&args.model, &loaded)?;
    print_json(&report)?;
    Ok(exit_for(report.passed))
}

fn cmd_demo(args: &DemoArgs) -> Result<ExitCode, Failure> {
    let loaded = load("builtin:four-mode", args.tol)?;
    let report = build_report("builtin:four-mode", &loaded)?;
    let m = &loaded.model;
    let lplus = m.lplus().expect("four-mode model has Lplus");
    let lplus_real: Vec<Vec<f64>> = lplus
        .rows()
        .iter()
        .map(|r| r.iter().map(|z| z.re).collect())
        .collect();
    let comm_l = check_incompatibility(lplus, m.l(), DEFAULT_INCOMPATIBILITY_THRESHOLD)
        .map_err(verify_failure)?
        .commutator_norm;
    let inc = report.incompatibility.expect("four-mode model has Eplus");
    let chain = report.chain.as_ref().expect("four-mode model has Eplus");
    let p1 = chain.report.probability;
    let certified = report.passed;

    if !args.json {
        let labels: Vec<&str> = m.spatial_basis().iter().map(|b| b.label.as_str()).collect();
        let mut err = io::stderr().lock();
        writeln!(err, "L+ in the basis {}:", labels.join(", "))?;
        for row in &lplus_real {
            let cells: Vec<String> = row.iter().map(|v| format!("{:>6.2}", v)).collect();
            writeln!(err, "  [{} ]", cells.join(""))?;
        }
        writeln!(err)?;
        writeln!(err, "projection residuals (hermiticity, idempotence):")?;
        for p in &report.projections {
            writeln!(
                err,
                "  {:<12} {:.3e}  {:.3e}",
                p.name, p.check.hermiticity.value, p.check.idempotence.value
            )?;
        }
        let worst_f = |d: &DetectorCheckReport| {
            d.commutes_with_f
                .iter()
                .map(|r| r.value)
                .fold(0.0, f64::max)
        };
        let tep = report
            .detector_t_eplus
            .as_ref()
            .expect("four-mode model has Eplus");
        writeln!(err)?;
        writeln!(err, "max ‖[T,F]‖ = {:.3e}", worst_f(&report.detector_t_e))?;
        writeln!(
            err,
            "‖[T,E]‖ = {:.3e}",
            report.detector_t_e.commutes_with_target.value
        )?;
        writeln!(err, "‖[T,E+]‖ = {:.3e}", tep.commutes_with_target.value)?;
        writeln!(err, "‖EΨ − TΨ‖ = {:.3e}", chain.report.residual_e_t)?;
        writeln!(err, "‖TΨ − E+Ψ‖ = {:.3e}", chain.report.residual_t_eplus)?;
        writeln!(err, "‖[L+,L]‖ = {:.15}", comm_l)?;
        writeln!(err, "‖[E+,E]‖ = {:.15}", inc.commutator_norm)?;
        writeln!(err)?;
        if certified {
            writeln!(
                err,
                "T is a non-disturbing detector for both E and E+: outcome 1 (0) of T \
                 certifies outcome 1 (0) for both E and E+, although [E+,E] ≠ 0."
            )?;
        } else {
            writeln!(err, "detector checks FAILED at tolerance {:e}", loaded.tol)?;
        }
        writeln!(err, "P(T = 1) = {:.15}", p1)?;
        writeln!(err, "P(T = 0) = {:.15}", 1.0 - p1)?;
    }

    print_json(&json!({
        "lplus": lplus_real,
        "commutator_lplus_l": comm_l,
        "commutator_eplus_e": inc.commutator_norm,
        "branch_probabilities": { "t1": p1, "t0": 1.0 - p1 },
        "certified": certified,
        "report": report,
    }))?;
    Ok(exit_for(certified))
}

fn create(path: PathBuf) -> Result<(BufWriter<File>, String), Failure> {
    let shown = path.display().to_string();
    let file = File::create(&path).map_err(|e| Failure::Input(format!("{}: {}", shown, e)))?;
    Ok((BufWriter::new(file), shown))
}

fn with_suffix(prefix: &std::path::Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode, Failure> {
    let input = |e: esw_core::sim::SimError| Failure::Input(e.to_string());
    let params = SimParams {
        grid: GridSpec::new(args.n_points, args.extent).map_err(input)?,
        geometry: SlitGeometry::new(args.slit_separation, args.slit_width, args.mode_waist)
            .map_err(input)?,
        wavelength_scale: args.wavelength_scale,
        n_bins: args.bins,
        screen_halfwidth: args.screen_halfwidth,
    };
    let sim = DoubleSlit::new(params).map_err(input)?;
    let psi = match args.state {
        StateChoice::Entangled => states::entangled(),
        StateChoice::Coherent => states::coherent(),
        StateChoice::Product => states::product(),
    };

    // open everything before sampling so a bad prefix fails fast
    let (mut hist_out, hist_path) = create(with_suffix(&args.out, "_hist.csv"))?;
    let (mut exact_out, exact_path) = create(with_suffix(&args.out, "_exact.csv"))?;
    let (mut runs_out, runs_path) = create(with_suffix(&args.out, "_runs.jsonl"))?;

    let exact = sim.screen_distribution(&psi).map_err(input)?;
    let dephased = sim
        .mixture_distribution(&apply_t_dephasing(&psi).map_err(|e| Failure::Input(e.to_string()))?)
        .map_err(input)?;
    let dephasing_tv = total_variation(&exact, &dephased);
    let output = simulate_runs(&sim, &psi, args.measure_t, args.runs, args.seed).map_err(input)?;
    let tv = total_variation(&output.empirical, &exact);

    output.empirical.write_csv(&mut hist_out)?;
    exact.write_csv(&mut exact_out)?;
    output.write_jsonl(&mut runs_out)?;
    hist_out.flush()?;
    exact_out.flush()?;
    runs_out.flush()?;

    let visibility = |d| fringe_visibility(d, args.visibility_window).ok();
    let passed = dephasing_tv <= DEPHASING_TV_TOL;
    print_json(&json!({
        "state": args.state.name(),
        "measure_t": args.measure_t,
        "runs": args.runs,
        "seed": args.seed,
        "bins": exact.n_bins(),
        "total_variation": tv,
        "fringe_visibility": {
            "window": args.visibility_window,
            "exact": visibility(&exact),
            "empirical": visibility(&output.empirical),
        },
        "t1_fraction": output.t1_fraction(),
        "dephasing_total_variation": dephasing_tv,
        "files": { "hist": hist_path, "exact": exact_path, "runs": runs_path },
        "passed": passed,
    }))?;
    Ok(exit_for(passed))
}

fn cmd_synth(args: &SynthArgs) -> Result<ExitCode, Failure> {
    let loaded = load(&args.model.model, args.model.tol)?;
    let m = &loaded.model;
    let n = m.composite_dim();
    let target = match args.target {
        Target::Eplus => m
            .eplus()
            .cloned()
            .ok_or_else(|| Failure::Input(format!("{} has no Lplus", args.model.model)))?,
        Target::E => m.e().clone(),
        Target::Identity => Operator::identity(n).map_err(|e| Failure::Input(e.to_string()))?,
        Target::Zero => Operator::zeros(n).map_err(|e| Failure::Input(e.to_string()))?,
    };
    let found = synthesize_detectors(&target, m.psi(), &loaded.event_ops(), loaded.tol)
        .map_err(verify_failure)?;
    let list: Vec<Value> = found
        .iter()
        .map(|d| {
            json!({
                "kind": d.kind,
                "R": operator_to_pairs(&d.r),
                "bloch": d.bloch,
                "report": d.report,
            })
        })
        .collect();
    print_json(&list)?;
    Ok(exit_for(!list.is_empty()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Demo(a) => cmd_demo(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
        Err(Failure::Check(report)) => {
            if let Some(e) = report
                .get("load_error")
                .or_else(|| report.get("check_error"))
            {
                eprintln!(
                    "check failed: {} {} residual {} exceeds {}",
                    e["operator"].as_str().unwrap_or("?"),
                    e["residual"].as_str().unwrap_or("?"),
                    e["value"],
                    e["tol"]
                );
            }
            match print_json(&report) {
                Ok(()) => ExitCode::from(1),
                Err(_) => ExitCode::from(2),
            }
        }
    }
}
