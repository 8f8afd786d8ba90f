//! Command-line frontend: instance generation, validation, model building,
//! solving, model comparison, integrality checking, and oracle runs.
//!
//! Exit codes: 0 success, 1 validation failure, 2 solver failure,
//! 3 enumeration budget refusal, 64 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use ctop_core::analysis::{
    compare_models, solve_to_optimality, CompareOptions, LpBackend, SolverConfig,
};
use ctop_core::error::Error;
use ctop_core::gen;
use ctop_core::instance::{load_instance_file, Instance};
use ctop_core::mip::{
    max_fractionality, relax, solve_external, solve_reference, write_model, ModelFormat,
    SolveStatus, INTEGRALITY_TOL,
};
use ctop_core::modelgen::{build_model, BuildOptions, ModelFamily, StagePolicy};
use ctop_core::oracle;

#[derive(Parser)]
#[command(name = "ctop", version, about = "Stochastic multi-resource traffic flow management toolkit")]
struct Cli {
    /// TOML config file; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Validate an instance file.
    Validate { instance: PathBuf },
    /// Build one model and write it in LP or MPS format.
    Build(BuildArgs),
    /// Solve one model variant to optimality (LP relaxation first).
    Solve(SolveArgs),
    /// Solve every variant plus perfect information and write the CSV report.
    Compare(CompareArgs),
    /// Solve LP relaxations and report integrality per variant.
    CheckIntegrality(CheckArgs),
    /// Exhaustive policy enumeration on a tiny instance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    what: GenCommand,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Seeded synthetic instance.
    Synth {
        #[arg(long, default_value_t = 2)]
        airports: usize,
        #[arg(long, default_value_t = 3)]
        pcas: usize,
        #[arg(long, default_value_t = 50)]
        flights: usize,
        #[arg(long, default_value_t = 1.5)]
        tos_mean: f64,
        #[arg(long, default_value_t = 30)]
        periods: u32,
        #[arg(long, default_value_t = 3)]
        scenarios: usize,
        #[arg(long, default_value_t = 2)]
        branch_points: usize,
        #[arg(long, default_value_t = 0.5)]
        tightness: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// The bundled case study with seeded synthetic demand.
    CaseStudy {
        #[arg(long, default_value_t = 1)]
        demand_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// A named tiny fixture (t1, t2-reroute, t3-three-flights, t5-adaptive,
    /// single-flight).
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BuildArgs {
    instance: PathBuf,
    #[arg(long)]
    family: ModelFamily,
    #[arg(long)]
    policy: StagePolicy,
    #[arg(long, default_value = "mps")]
    format: ModelFormat,
    #[arg(long)]
    out: PathBuf,
    /// Relax integrality before writing.
    #[arg(long)]
    relax: bool,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    family: ModelFamily,
    #[arg(long)]
    policy: StagePolicy,
    /// External solver template with {in} and {out} placeholders.
    #[arg(long)]
    external: Option<String>,
    /// Solve only the LP relaxation.
    #[arg(long)]
    relax: bool,
    /// Write the primal values as `name value` lines.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    instance: PathBuf,
    #[arg(long)]
    external: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for independent variant solves.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    /// Additionally check this many seeded synthetic instances.
    #[arg(long, default_value_t = 0)]
    seeds: u64,
    #[arg(long)]
    external: Option<String>,
    /// Worker threads for independent relaxation solves.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long)]
    policy: StagePolicy,
}

/// Optional TOML configuration. The tolerance block only mirrors the fixed
/// values so that they are visible next to the solver settings; other values
/// are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    tolerances: ToleranceSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    external: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    #[serde(default)]
    literal_static_ground_coefficient: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToleranceSection {
    feasibility: f64,
    reduced_cost: f64,
    integrality: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            feasibility: 1e-7,
            reduced_cost: 1e-9,
            integrality: 1e-6,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::Validation(_) => 1,
            Error::Budget(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(1, format!("cannot read config {}: {e}", path.display())))?;
    let config: Config = toml::from_str(&text).map_err(|e| fail(1, format!("config: {e}")))?;
    let fixed = ToleranceSection::default();
    let t = &config.tolerances;
    if t.feasibility != fixed.feasibility
        || t.reduced_cost != fixed.reduced_cost
        || t.integrality != fixed.integrality
    {
        return Err(fail(
            1,
            "tolerances are fixed at feasibility=1e-7, reduced_cost=1e-9, integrality=1e-6",
        ));
    }
    Ok(config)
}

/// flags > config file > CTOP_SOLVER environment variable
fn solver_config(flag: Option<&str>, config: &Config) -> SolverConfig {
    let external = flag
        .map(str::to_string)
        .or_else(|| config.solver.external.clone())
        .or_else(|| std::env::var("CTOP_SOLVER").ok());
    match external {
        Some(cmd) => SolverConfig::external(cmd),
        None => SolverConfig::default(),
    }
}

fn build_options(config: &Config) -> BuildOptions {
    BuildOptions {
        literal_static_ground_coefficient: config.model.literal_static_ground_coefficient,
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    Ok(load_instance_file(path)?)
}

fn write_out(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| fail(2, format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Gen(args) => {
            let (inst, out) = match args.what {
                GenCommand::Synth {
                    airports,
                    pcas,
                    flights,
                    tos_mean,
                    periods,
                    scenarios,
                    branch_points,
                    tightness,
                    seed,
                    out,
                } => {
                    let params = gen::SynthParams {
                        airports,
                        pcas,
                        flights,
                        tos_mean,
                        periods,
                        scenarios,
                        branch_points,
                        tightness,
                        seed,
                    };
                    (gen::synth_instance(&params)?, out)
                }
                GenCommand::CaseStudy { demand_seed, out } => {
                    (gen::build_case_study(demand_seed), out)
                }
                GenCommand::Preset { name, out } => {
                    let inst = match name.as_str() {
                        "t1" => gen::tiny::t1(),
                        "t2-reroute" => gen::tiny::t2_reroute(),
                        "t3-three-flights" => gen::tiny::t3_three_flights(),
                        "t5-adaptive" => gen::tiny::t5_adaptive(),
                        "single-flight" => gen::tiny::single_flight(),
                        other => return Err(fail(1, format!("unknown preset `{other}`"))),
                    };
                    (inst, out)
                }
            };
            write_out(&out, &inst.to_json())?;
            println!(
                "{}",
                serde_json::json!({
                    "path": out,
                    "flights": inst.flights.len(),
                    "options": inst.flights.iter().map(|f| f.options.len()).sum::<usize>(),
                    "scenarios": inst.num_scenarios(),
                    "horizon": inst.horizon,
                })
            );
        }
        Command::Validate { instance } => {
            let inst = load(&instance)?;
            println!(
                "{}",
                serde_json::json!({
                    "ok": true,
                    "flights": inst.flights.len(),
                    "scenarios": inst.num_scenarios(),
                })
            );
        }
        Command::Build(args) => {
            let inst = load(&args.instance)?;
            let (model, _) = build_model(&inst, args.family, args.policy, &build_options(&config))?;
            let model = if args.relax { relax(&model) } else { model };
            let text = write_model(&model, args.format)?;
            write_out(&args.out, &text)?;
            let (cols, rows, nnz) = model.stats();
            println!(
                "{}",
                serde_json::json!({
                    "path": args.out,
                    "variables": cols,
                    "constraints": rows,
                    "nonzeros": nnz,
                })
            );
        }
        Command::Solve(args) => {
            let inst = load(&args.instance)?;
            let cfg = solver_config(args.external.as_deref(), &config);
            let (model, _) =
                build_model(&inst, args.family, args.policy, &build_options(&config))?;
            let started = std::time::Instant::now();
            let (result, lp_integral, max_frac) = if args.relax {
                let relaxed = relax(&model);
                let r = match &cfg.lp {
                    LpBackend::Reference => solve_reference(&relaxed)?,
                    LpBackend::External(cmd) => {
                        solve_external(&relaxed, cmd, &std::env::temp_dir())?
                    }
                };
                if r.status != SolveStatus::Optimal {
                    return Err(fail(2, format!("LP relaxation status {:?}", r.status)));
                }
                let frac = max_fractionality(&r, &model);
                (r, frac <= INTEGRALITY_TOL, frac)
            } else {
                let s = solve_to_optimality(&model, &cfg)?;
                (s.result, s.lp_integral, s.max_frac)
            };
            if let Some(path) = &args.solution {
                let mut text = String::new();
                for (v, x) in model.variables.iter().zip(&result.values) {
                    text.push_str(&format!("{} {x}\n", v.name));
                }
                write_out(path, &text)?;
            }
            println!(
                "{}",
                serde_json::json!({
                    "family": args.family.name(),
                    "policy": args.policy.name(),
                    "relaxed": args.relax,
                    "status": "optimal",
                    "objective": result.objective,
                    "lp_integral": lp_integral,
                    "max_frac": max_frac,
                    "solver": result.solver_id,
                    "iterations": result.iterations,
                    "wall_ms": started.elapsed().as_millis() as u64,
                })
            );
        }
        Command::Compare(args) => {
            let inst = load(&args.instance)?;
            let cfg = solver_config(args.external.as_deref(), &config);
            let opts = CompareOptions {
                jobs: args.jobs,
                build: build_options(&config),
                ..CompareOptions::default()
            };
            let report = compare_models(&inst, &cfg, &opts);
            write_out(&args.out, &report.to_csv())?;
            print!("{}", report.render_text());
            if report.rows.iter().any(|r| r.error.is_some()) {
                return Err(fail(2, "one or more variants failed; see the report"));
            }
        }
        Command::CheckIntegrality(args) => {
            let cfg = solver_config(args.external.as_deref(), &config);
            let mut cases = vec![("given".to_string(), load(&args.instance)?)];
            for seed in 0..args.seeds {
                let params = gen::SynthParams {
                    seed,
                    ..gen::SynthParams::default()
                };
                cases.push((format!("seed{seed}"), gen::synth_instance(&params)?));
            }
            let mut tasks = Vec::new();
            for (name, inst) in &cases {
                for family in ModelFamily::ALL {
                    for policy in StagePolicy::ALL {
                        tasks.push((name.as_str(), inst, family, policy));
                    }
                }
            }
            let run = |&(name, inst, family, policy): &(
                &str,
                &Instance,
                ModelFamily,
                StagePolicy,
            )|
             -> Result<String, Failure> {
                let (model, _) = build_model(inst, family, policy, &build_options(&config))?;
                let relaxed = relax(&model);
                let r = match &cfg.lp {
                    LpBackend::Reference => solve_reference(&relaxed)?,
                    LpBackend::External(cmd) => {
                        solve_external(&relaxed, cmd, &std::env::temp_dir())?
                    }
                };
                if r.status != SolveStatus::Optimal {
                    return Err(fail(2, format!("{name}: LP status {:?}", r.status)));
                }
                let frac = max_fractionality(&r, &model);
                Ok(format!(
                    "{name},{},{},{:.6},{},{:.3e}",
                    family.name(),
                    policy.name(),
                    r.objective,
                    frac <= INTEGRALITY_TOL,
                    frac
                ))
            };
            let lines: Vec<Result<String, Failure>> = if args.jobs <= 1 {
                tasks.iter().map(run).collect()
            } else {
                let next = std::sync::atomic::AtomicUsize::new(0);
                let slots: Vec<std::sync::Mutex<Option<Result<String, Failure>>>> =
                    tasks.iter().map(|_| std::sync::Mutex::new(None)).collect();
                std::thread::scope(|scope| {
                    for _ in 0..args.jobs.min(tasks.len()) {
                        scope.spawn(|| loop {
                            let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                            if i >= tasks.len() {
                                break;
                            }
                            *slots[i].lock().unwrap() = Some(run(&tasks[i]));
                        });
                    }
                });
                slots
                    .into_iter()
                    .map(|s| s.into_inner().unwrap().expect("worker filled the slot"))
                    .collect()
            };
            println!("instance,family,policy,objective,lp_integral,max_frac");
            let mut total = 0usize;
            let mut integral = 0usize;
            for line in lines {
                let line = line?;
                total += 1;
                if line.contains(",true,") {
                    integral += 1;
                }
                println!("{line}");
            }
            eprintln!(
                "integral: {integral}/{total} ({:.1}%)",
                100.0 * integral as f64 / total.max(1) as f64
            );
        }
        Command::Oracle(args) => {
            let inst = load(&args.instance)?;
            let (cost, policy) = oracle::enumerate_policies(&inst, args.policy)?;
            let eval = oracle::evaluate_policy(&inst, &policy)?;
            println!(
                "{}",
                serde_json::json!({
                    "policy_class": args.policy.name(),
                    "expected_cost": cost,
                    "per_scenario_costs": eval.scenario_costs,
                    "decisions": policy
                        .flights
                        .iter()
                        .enumerate()
                        .map(|(fi, fp)| {
                            serde_json::json!({
                                "flight": inst.flights[fi].id,
                                "per_scenario": fp
                                    .decisions
                                    .iter()
                                    .zip(&fp.admissions)
                                    .map(|(d, adm)| serde_json::json!({
                                        "option": inst.flights[fi].options[d.option].id,
                                        "depart": d.depart,
                                        "admissions": adm,
                                    }))
                                    .collect::<Vec<_>>(),
                            })
                        })
                        .collect::<Vec<_>>(),
                })
            );
        }
    }
    Ok(())
}
