//! Price ingestion, loss windows, fitted and empirical distributions on a
//! grid, and assembly of VaR agents for risk sharing.

mod fit;
mod grid;
mod series;

pub use fit::{discretize, fit_distribution, Family, FittedDistribution, MIN_OBSERVATIONS, NU_RANGE};
pub use grid::{clamped_count, empirical_on_grid, Grid};
pub use series::{load_prices_csv, read_prices, window_split, InputMode, LossSeries, Window, WindowSpec};

use serde::{Deserialize, Serialize};

use crate::capacity::{Capacity, ProbabilityVector, SupProbability};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::infconv::{share_discrete_with, AgentSpec, SharingResult, ShareOptions, SCHEMA_VERSION};
use crate::rv::SimpleRandomVariable;
use crate::space::FiniteSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitChoice {
    Empirical,
    Normal,
    StudentT,
    /// One normal and one t fit per window.
    NormalAndT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub name: String,
    pub alpha: f64,
    pub window_years: u32,
    pub fit: FitChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub grid: Grid,
    pub agents: Vec<AgentConfig>,
    /// Levels per report row; each has one entry per agent. Empty means one
    /// row with the agents' own levels.
    #[serde(default)]
    pub alpha_sets: Vec<Vec<f64>>,
    #[serde(default)]
    pub input_mode: InputMode,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::Config("no agents".into()));
        }
        for a in &self.agents {
            if !(a.alpha > 0.0 && a.alpha < 1.0) {
                return Err(Error::Config(format!("agent {:?}: alpha {} not in (0, 1)", a.name, a.alpha)));
            }
            if a.window_years == 0 {
                return Err(Error::Config(format!("agent {:?}: window_years must be positive", a.name)));
            }
        }
        for (r, set) in self.alpha_sets.iter().enumerate() {
            if set.len() != self.agents.len() {
                return Err(Error::Config(format!(
                    "alpha set {r} has {} entries for {} agents",
                    set.len(),
                    self.agents.len()
                )));
            }
            if let Some(a) = set.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
                return Err(Error::Config(format!("alpha set {r}: {a} not in (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        if self.alpha_sets.is_empty() {
            vec![self.agents.iter().map(|a| a.alpha).collect()]
        } else {
            self.alpha_sets.clone()
        }
    }
}

/// Per-agent record of how its ambiguity set was built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentSource {
    pub name: String,
    pub windows: usize,
    pub priors: usize,
    pub partial_windows: usize,
    /// Observations outside the grid, moved to a boundary atom.
    pub clamped: usize,
    pub fits: Vec<FittedDistribution>,
}

#[derive(Debug, Clone)]
pub struct Agents {
    pub agents: Vec<AgentSpec>,
    /// `X = 1 - exp(-L)` on the grid atoms.
    pub x: SimpleRandomVariable,
    /// Grid atoms with equal reference weights.
    pub space: FiniteSpace,
    pub sources: Vec<AgentSource>,
    pub warnings: Vec<String>,
}

pub fn build_agents(config: &PipelineConfig, series: &LossSeries) -> Result<Agents> {
    config.validate()?;
    let grid = config.grid;
    let m = grid.count();
    let centers = grid.centers();
    let x = SimpleRandomVariable::new(centers.iter().map(|&c| -(-c).exp_m1()).collect())?;
    let space = FiniteSpace::new(m)?
        .with_labels(centers.iter().map(|c| format!("{c:.6}")).collect())?
        .with_ref_weights(vec![1.0 / m as f64; m])?;

    let mut agents = Vec::with_capacity(config.agents.len());
    let mut sources = Vec::with_capacity(config.agents.len());
    let mut warnings = Vec::new();
    for ac in &config.agents {
        let windows = window_split(series, &WindowSpec::Years(ac.window_years))?;
        let mut priors = Vec::new();
        let mut fits = Vec::new();
        let mut clamped = 0;
        for w in &windows {
            if w.partial {
                warnings.push(format!(
                    "agent {:?}: window {} ({} to {}) is partial",
                    ac.name, w.id, w.start, w.end
                ));
            }
            let families: &[Family] = match ac.fit {
                FitChoice::Empirical => {
                    clamped += clamped_count(&w.series.losses, &grid);
                    priors.push(empirical_on_grid(&w.series.losses, &grid)?);
                    &[]
                }
                FitChoice::Normal => &[Family::Normal],
                FitChoice::StudentT => &[Family::StudentT],
                FitChoice::NormalAndT => &[Family::Normal, Family::StudentT],
            };
            for &fam in families {
                let mut f = fit_distribution(&w.series.losses, fam)?;
                f.window = Some(w.id);
                if !f.converged {
                    warnings.push(format!("agent {:?}: {fam:?} fit of window {} did not converge", ac.name, w.id));
                }
                priors.push(discretize(&f, &grid)?);
                fits.push(f);
            }
        }
        if clamped > 0 {
            warnings.push(format!("agent {:?}: {clamped} observations clamped to the grid ends", ac.name));
        }
        sources.push(AgentSource {
            name: ac.name.clone(),
            windows: windows.len(),
            priors: priors.len(),
            partial_windows: windows.iter().filter(|w| w.partial).count(),
            clamped,
            fits,
        });
        let cap: Capacity = SupProbability::new(priors)?.into();
        agents.push(AgentSpec::var(ac.name.clone(), cap, ac.alpha)?);
    }
    Ok(Agents {
        agents,
        x,
        space,
        sources,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineRow {
    pub alphas: Vec<f64>,
    pub initial: f64,
    /// `None` when sharing drives the risk to `-inf`.
    pub post: Option<f64>,
    pub reduction: Option<f64>,
    /// Set when the search gave up below `post`: the optimum lies between
    /// this and `post`.
    pub lower_bound: Option<ExtendedReal>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub observations: usize,
    pub grid: Grid,
    pub agents: Vec<AgentSource>,
    pub rows: Vec<PipelineRow>,
    pub warnings: Vec<String>,
}

impl PipelineReport {
    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<32} {:>12} {:>12} {:>10}\n", "alphas", "initial", "post", "reduction");
        for r in &self.rows {
            let alphas = format!(
                "({})",
                r.alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
            );
            let mark = if r.lower_bound.is_some() { "*" } else { "" };
            let post = r.post.map_or("-inf".to_string(), |p| format!("{p:.4}{mark}"));
            let red = r.reduction.map_or("-".to_string(), |v| format!("{:.0}%", 100.0 * v));
            out.push_str(&format!("{alphas:<32} {:>12.4} {post:>12} {red:>10}\n", r.initial));
        }
        for r in self.rows.iter().filter(|r| r.lower_bound.is_some()) {
            let lb = match r.lower_bound {
                Some(ExtendedReal::Finite(v)) => format!("{v:.6}"),
                _ => "-inf".to_string(),
            };
            out.push_str(&format!(
                "* search budget exhausted for {:?}: optimum in [{lb}, {:.6}]\n",
                r.alphas,
                r.post.unwrap_or(f64::NAN)
            ));
        }
        out
    }
}

/// Node limit per threshold used by the command-line pipeline.
pub const PIPELINE_NODE_BUDGET: u64 = 2_000;

/// Builds the agents once and solves the whole-atom sharing problem for
/// every row of levels.
pub fn run_pipeline(
    config: &PipelineConfig,
    series: &LossSeries,
    opts: ShareOptions,
) -> Result<(PipelineReport, Agents, Vec<SharingResult>)> {
    let built = build_agents(config, series)?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for alphas in config.rows() {
        let agents: Vec<AgentSpec> = built
            .agents
            .iter()
            .zip(&alphas)
            .map(|(a, &alpha)| AgentSpec::var(a.name.clone(), a.capacity.clone(), alpha))
            .collect::<Result<_>>()?;
        let res = share_discrete_with(&agents, &built.x, opts)?;
        rows.push(PipelineRow {
            alphas,
            initial: res.initial,
            post: match res.value {
                ExtendedReal::Finite(_) => res.post,
                ExtendedReal::NegativeInfinity => None,
            },
            reduction: res.reduction,
            lower_bound: res.lower_bound,
        });
        results.push(res);
    }
    let report = PipelineReport {
        schema_version: SCHEMA_VERSION,
        observations: series.len(),
        grid: config.grid,
        agents: built.sources.clone(),
        rows,
        warnings: built.warnings.clone(),
    };
    Ok((report, built, results))
}

/// Gridded vectors are valid probability vectors.
pub fn check_vector(p: &ProbabilityVector) -> bool {
    let s: f64 = p.weights().iter().sum();
    p.weights().iter().all(|&w| w >= 0.0) && (s - 1.0).abs() <= 1e-12
}
