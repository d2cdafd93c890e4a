use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use choquet_core::capacity::{is_submodular, scale_alpha};
use choquet_core::choquet::var;
use choquet_core::data::{load_prices_csv, run_pipeline, PipelineConfig, PIPELINE_NODE_BUDGET};
use choquet_core::es::{choquet_es, es_dual, MAX_DUAL_ATOMS};
use choquet_core::infconv::{
    allocation_csv, brute_force_infconv, share_atomless_with, share_discrete_with, tail_rearrange, MAX_ORACLE_AGENTS,
    MAX_ORACLE_ATOMS, SCHEMA_VERSION,
};
use choquet_core::oracle::{run_oracle, OracleOptions};
use choquet_core::{
    AgentSpec, EsMethod, Error, ExtendedReal, FiniteSpace, Result, ShareOptions, SharingResult, Side,
    SimpleRandomVariable,
};

use crate::problem::{parse, EvalProblem, ShareProblem};
use crate::{ExitCode, Mode};

/// What a command prints and the exit code it asks for.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: ExitCode,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            code: ExitCode::Ok,
        }
    }
}

pub fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write_out(dir: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub alpha: f64,
    #[serde(rename = "VaR_left")]
    pub var_left: f64,
    #[serde(rename = "VaR_right")]
    pub var_right: f64,
    #[serde(rename = "ES_quantile_integral")]
    pub es_quantile_integral: f64,
    #[serde(rename = "ES_scaled_capacity")]
    pub es_scaled_capacity: f64,
    /// Present when `(w/alpha) ∧ 1` is submodular and the space is small
    /// enough for the dual program.
    #[serde(rename = "ES_dual")]
    pub es_dual: Option<f64>,
    /// Whether `(w/alpha) ∧ 1` is submodular; `None` when the space is too
    /// large to check.
    pub submodular: Option<bool>,
}

pub fn eval(problem: &EvalProblem) -> Result<EvalReport> {
    let (w, x) = problem.build()?;
    let alpha = problem.alpha;
    let submodular = match is_submodular(&scale_alpha(&w, alpha)?) {
        Ok(c) => Some(c.holds),
        Err(Error::SpaceTooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let es_dual = if submodular == Some(true) && x.atoms() <= MAX_DUAL_ATOMS && alpha < 1.0 {
        Some(es_dual(&w, alpha, &x)?)
    } else {
        None
    };
    Ok(EvalReport {
        schema_version: SCHEMA_VERSION,
        alpha,
        var_left: var(&w, alpha, Side::Left, &x)?,
        var_right: var(&w, alpha, Side::Right, &x)?,
        es_quantile_integral: choquet_es(&w, alpha, &x, EsMethod::QuantileIntegral)?,
        es_scaled_capacity: choquet_es(&w, alpha, &x, EsMethod::ScaledCapacity)?,
        es_dual,
        submodular,
    })
}

pub fn cmd_eval(config: &Path, out: Option<&Path>) -> Result<Outcome> {
    let problem: EvalProblem = parse(&read_input(config)?)?;
    let text = pretty(&eval(&problem)?)?;
    write_out(out, "eval.json", &text)?;
    Ok(Outcome::ok(text))
}

#[derive(Debug, Clone, Copy)]
pub struct ShareArgs {
    pub mode: Mode,
    pub oracle: bool,
    pub paired: bool,
    pub tail_rearrange: bool,
    pub options: ShareOptions,
}

fn solve(mode: Mode, agents: &[AgentSpec], x: &SimpleRandomVariable, space: &FiniteSpace, opts: ShareOptions) -> Result<SharingResult> {
    match mode {
        Mode::Discrete => share_discrete_with(agents, x, opts),
        Mode::Atomless => share_atomless_with(agents, x, space, opts),
    }
}

fn value_json(v: ExtendedReal) -> Value {
    match v {
        ExtendedReal::Finite(f) => json!(f),
        ExtendedReal::NegativeInfinity => json!("-inf"),
    }
}

/// Solves a sharing problem. The returned JSON is the result report with
/// `mode`, and `oracle` or `paired` sections when requested.
pub fn share(problem: &ShareProblem, args: ShareArgs) -> Result<(Value, String, ExitCode)> {
    let (agents, x) = problem.build()?;
    let space = problem.space(&agents)?;
    let mut res = solve(args.mode, &agents, &x, &space, args.options)?;
    if args.tail_rearrange {
        let rearrange_space = match args.mode {
            Mode::Discrete => FiniteSpace::new(x.atoms())?,
            Mode::Atomless => space.clone(),
        };
        res = tail_rearrange(&res, &agents, &x, &rearrange_space)?;
    }
    let mut report = serde_json::to_value(res.report())?;
    report["mode"] = json!(args.mode);
    let mut code = if res.value.is_negative_infinity() {
        ExitCode::NegativeInfinity
    } else {
        ExitCode::Ok
    };

    if args.oracle {
        let small = x.atoms() <= MAX_ORACLE_ATOMS && agents.len() <= MAX_ORACLE_AGENTS;
        if small {
            let vs = agents.iter().map(AgentSpec::binary).collect::<Result<Vec<_>>>()?;
            let oracle = brute_force_infconv(&vs, &x)?.value;
            // whole-atom colourings are the discrete problem; splitting can only do better
            let agrees = match args.mode {
                Mode::Discrete => res.value == oracle,
                Mode::Atomless => res.value <= oracle,
            };
            report["oracle"] = json!({"checked": true, "value": value_json(oracle), "agrees": agrees});
            if !agrees {
                code = ExitCode::OracleMismatch;
            }
        } else {
            report["oracle"] = json!({"checked": false});
        }
    }

    if args.paired {
        let other = match args.mode {
            Mode::Discrete => Mode::Atomless,
            Mode::Atomless => Mode::Discrete,
        };
        let other_value = solve(other, &agents, &x, &space, args.options)?.value;
        let (discrete, atomless) = match args.mode {
            Mode::Discrete => (res.value, other_value),
            Mode::Atomless => (other_value, res.value),
        };
        let holds = discrete >= atomless;
        report["paired"] = json!({
            "discrete": value_json(discrete),
            "atomless": value_json(atomless),
            "discrete_ge_atomless": holds,
        });
        if !holds {
            code = ExitCode::OracleMismatch;
        }
    }
    let csv = allocation_csv(&res, &x)?;
    Ok((report, csv, code))
}

pub fn cmd_share(config: &Path, out: Option<&Path>, args: ShareArgs) -> Result<Outcome> {
    let problem: ShareProblem = parse(&read_input(config)?)?;
    let (report, csv, code) = share(&problem, args)?;
    let text = pretty(&report)?;
    write_out(out, "share.json", &text)?;
    write_out(out, "allocation.csv", &csv)?;
    Ok(Outcome { stdout: text, code })
}

pub fn cmd_pipeline(config: &Path, input: &Path, out: Option<&Path>, node_budget: Option<u64>) -> Result<Outcome> {
    let config: PipelineConfig = parse(&read_input(config)?)?;
    config.validate()?;
    let series = load_prices_csv(input, config.input_mode)?;
    let opts = ShareOptions {
        node_budget: node_budget.unwrap_or(PIPELINE_NODE_BUDGET),
        allow_gap: true,
        ..Default::default()
    };
    let (report, built, results) = run_pipeline(&config, &series, opts)?;
    let table = report.to_table();
    write_out(out, "pipeline.json", &pretty(&report)?)?;
    write_out(out, "pipeline.txt", &table)?;
    for (k, res) in results.iter().enumerate() {
        write_out(out, &format!("allocation_row{}.csv", k + 1), &allocation_csv(res, &built.x)?)?;
    }
    let mut stdout = table;
    for w in &report.warnings {
        stdout.push_str(&format!("warning: {w}\n"));
    }
    Ok(Outcome::ok(stdout))
}

pub fn cmd_oracle(opts: OracleOptions, out: Option<&Path>) -> Result<Outcome> {
    let report = run_oracle(opts);
    let text = pretty(&report)?;
    write_out(out, "oracle.json", &text)?;
    Ok(Outcome {
        stdout: text,
        code: if report.passed {
            ExitCode::Ok
        } else {
            ExitCode::OracleMismatch
        },
    })
}

pub fn out_dir(out: &Option<PathBuf>) -> Option<&Path> {
    out.as_deref()
}
