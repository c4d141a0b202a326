//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or engine error, 2 invalid scenario,
//! 3 monitored property breached, 4 depth cap reached.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use monres::blowup::{blowup, BlowupError, Center, Outcome};
use monres::cleaning::clean;
use monres::driver::{choose_center, resolve, Limits};
use monres::invariants::profile;
use monres::io::{chart_point_json, clean_step_json, emit_trace, load_scenario, situation_json, LoadError, Scenario, State};
use monres::singlocus::{support_oracle, support_shape};
use monres::situation::{Axis, Situation};
use monres::tau0::{gamma, gamma_loop};
use monres::tau2::{tau2_chain, Tau2Outcome};

#[derive(Parser)]
#[command(name = "monres", version, about = "Monomial-case resolution engine over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CenterArg {
    Point,
    CurveX,
    CurveY,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario against the schema and the state axioms.
    Validate { file: PathBuf },
    /// Clean and print H, classes, configuration and the termination tuple.
    Invariants { file: PathBuf },
    /// Print the cleaning steps and the cleaned state.
    Clean { file: PathBuf },
    /// Blow up once and list every candidate successor.
    Blowup {
        file: PathBuf,
        /// Defaults to the center the procedure would choose.
        #[arg(long, value_enum)]
        center: Option<CenterArg>,
    },
    /// Run the full procedure over every successor branch.
    Resolve {
        file: PathBuf,
        #[arg(long)]
        max_depth: Option<u32>,
        #[arg(long)]
        extend_field_cap: Option<u32>,
        /// Write a JSON-lines trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Enumerate rational support points over a finite box field.
    OracleSupport {
        file: PathBuf,
        /// Smallest number of field elements the box must exceed.
        #[arg(long = "box", default_value_t = 5)]
        box_size: u32,
    },
    /// Γ of a divisor-only scenario and the full Γ loop.
    Gamma {
        file: PathBuf,
        #[arg(long, default_value_t = 64)]
        max_depth: u32,
    },
}

enum Failure {
    Load(LoadError),
    Engine(String),
    Usage(String),
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Load(e @ (LoadError::Io { .. } | LoadError::Parse(_))) => {
                eprintln!("error: {e}");
                ExitCode::from(if matches!(e, LoadError::Io { .. }) { 1 } else { 2 })
            }
            Failure::Load(e) => {
                eprintln!("invalid scenario: {e}");
                ExitCode::from(2)
            }
            Failure::Engine(m) => {
                eprintln!("error: {m}");
                ExitCode::from(1)
            }
            Failure::Usage(m) => {
                eprintln!("error: {m}");
                ExitCode::from(2)
            }
        }
    }
}

fn engine<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Engine(e.to_string())
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    load_scenario(path).map_err(Failure::Load)
}

fn tau1(sc: &Scenario, what: &str) -> Result<Situation, Failure> {
    match &sc.state {
        State::Tau1(s) => Ok(s.clone()),
        other => Err(Failure::Usage(format!("{what} needs a tau = 1 scenario, got tau = {}", other.tau()))),
    }
}

fn print(v: &Value) {
    // a closed pipe downstream is not an error worth a panic
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Validate { file } => {
            let sc = load(&file)?;
            print(&json!({"valid": true, "tau": sc.state.tau()}));
        }
        Command::Invariants { file } => {
            let s = tau1(&load(&file)?, "invariants")?;
            let rep = clean(&s).map_err(engine)?;
            let c = &rep.situation;
            let mut out = json!({"in_support": c.in_support(), "situation": situation_json(c)});
            if c.in_support() {
                out["invariants"] = profile(c).map_err(engine)?.to_json();
                out["shape"] = support_shape(c).map_err(engine)?.name().into();
            }
            print(&out);
        }
        Command::Clean { file } => {
            let s = tau1(&load(&file)?, "clean")?;
            let rep = clean(&s).map_err(engine)?;
            let steps: Vec<Value> = rep.steps.iter().map(|st| clean_step_json(0, st)).collect();
            print(&json!({"steps": steps, "situation": situation_json(&rep.situation)}));
        }
        Command::Blowup { file, center } => {
            let s = tau1(&load(&file)?, "blowup")?;
            let c = clean(&s).map_err(engine)?.situation;
            let shape = support_shape(&c).map_err(engine)?;
            let center = match center {
                Some(CenterArg::Point) => Center::Point,
                Some(CenterArg::CurveX) => Center::Curve(Axis::X),
                Some(CenterArg::CurveY) => Center::Curve(Axis::Y),
                None => choose_center(&c, shape),
            };
            let exp = blowup(&c, center).map_err(|e| match e {
                BlowupError::WrongCenter { .. } => Failure::Usage(e.to_string()),
                e => engine(e),
            })?;
            let mut outcomes = Vec::new();
            for o in &exp.outcomes {
                let (chart, cval) = chart_point_json(&c.field, o.at);
                let mut v = json!({"chart": chart, "c": cval, "result": o.result.name()});
                match &o.result {
                    Outcome::NotInSupport => {}
                    Outcome::SigmaDrop(e) => v["e_prime"] = json!(e),
                    Outcome::Successor(succ) => {
                        v["situation"] = situation_json(&succ.situation);
                        v["invariants"] = profile(&succ.situation).map_err(engine)?.to_json();
                    }
                }
                outcomes.push(v);
            }
            let warnings: Vec<Value> = exp.warnings.iter().map(|w| w.to_json()).collect();
            print(&json!({"shape": shape.name(), "center": center.name(), "outcomes": outcomes, "warnings": warnings}));
        }
        Command::Resolve { file, max_depth, extend_field_cap, trace } => {
            let sc = load(&file)?;
            let mut limits = sc.limits.unwrap_or_default();
            if let Some(d) = max_depth {
                limits.max_depth = d;
            }
            if let Some(d) = extend_field_cap {
                limits.extend_field_cap = d;
            }
            return match &sc.state {
                State::Tau1(s) => resolve_tau1(s, limits, sc.effective_seed(), trace.as_deref()),
                State::Tau0(st) => gamma_report(st, limits.max_depth),
                State::Tau2(st) => {
                    let run = tau2_chain(st).map_err(engine)?;
                    let end = match run.end {
                        Tau2Outcome::Done(exit) => json!({"result": "done", "exit": format!("{exit:?}")}),
                        Tau2Outcome::SigmaDrop { element, e } => json!({"result": "sigma_drop", "element": element, "e_prime": e}),
                        Tau2Outcome::Next(_) => unreachable!("chains end on a terminal outcome"),
                    };
                    print(&json!({"steps": run.steps, "end": end, "final_alpha": run.last.alpha}));
                    Ok(ExitCode::SUCCESS)
                }
            };
        }
        Command::OracleSupport { file, box_size } => {
            let s = tau1(&load(&file)?, "oracle-support")?;
            let c = clean(&s).map_err(engine)?.situation;
            let oracle = support_oracle(&c, box_size).map_err(engine)?;
            let points: Vec<Value> = oracle
                .points
                .iter()
                .map(|&(x, y, z)| {
                    let digits = |code| oracle.field.element(code).map(|e| oracle.field.to_coeffs(e)).unwrap_or_default();
                    json!([digits(x), digits(y), digits(z)])
                })
                .collect();
            let germ = oracle.germ();
            let mut out = json!({
                "box_field": {"p": oracle.field.p(), "m": oracle.field.m()},
                "points": points,
                "germ": {"point": germ.point, "curve_x": germ.curve_x, "curve_y": germ.curve_y},
            });
            if c.in_support() {
                let shape = support_shape(&c).map_err(engine)?;
                out["shape"] = shape.name().into();
                out["agrees"] = oracle.agrees_with(shape).into();
                out["off_origin_branches"] = oracle.points.difference(&oracle.predicted_points(shape)).count().into();
            }
            print(&out);
        }
        Command::Gamma { file, max_depth } => {
            let sc = load(&file)?;
            let State::Tau0(st) = &sc.state else {
                return Err(Failure::Usage(format!("gamma needs a tau = 0 scenario, got tau = {}", sc.state.tau())));
            };
            return gamma_report(st, max_depth);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve_tau1(s: &Situation, limits: Limits, seed: u64, trace: Option<&Path>) -> Result<ExitCode, Failure> {
    let res = resolve(s, limits).map_err(engine)?;
    if let Some(path) = trace {
        let file = File::create(path).map_err(|e| Failure::Engine(format!("cannot write {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        emit_trace(&res, seed, &mut w).and_then(|_| w.flush()).map_err(engine)?;
    }
    let sum = res.summary();
    let breaches: Vec<String> = res.breaches.iter().map(|b| b.to_string()).collect();
    print(&json!({
        "nodes": sum.nodes,
        "leaves": sum.leaves,
        "max_depth": sum.max_depth,
        "field_extensions": sum.field_extensions,
        "claim_checks": sum.claim_checks,
        "breaches": breaches,
        "depth_capped": res.depth_capped(),
    }));
    Ok(if !res.breaches.is_empty() {
        ExitCode::from(3)
    } else if res.depth_capped() {
        ExitCode::from(4)
    } else {
        ExitCode::SUCCESS
    })
}

fn gamma_report(st: &monres::situation::Tau0State, max_depth: u32) -> Result<ExitCode, Failure> {
    let g = gamma(st).ok().map(|g| g.to_json());
    let run = gamma_loop(st, max_depth).map_err(engine)?;
    let breaches: Vec<String> = run.breaches.iter().map(|(a, b)| format!("{b} is not below {a}")).collect();
    print(&json!({
        "gamma": g,
        "steps": run.steps,
        "resolved_branches": run.resolved,
        "max_depth": run.max_depth,
        "breaches": breaches,
        "depth_capped": run.depth_capped,
    }));
    Ok(if !run.breaches.is_empty() {
        ExitCode::from(3)
    } else if run.depth_capped {
        ExitCode::from(4)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(f) => f.report(),
    }
}
