//! JSON problem files for `eval` and `share`.

use serde::Deserialize;

use choquet_core::capacity::combine_capacities;
use choquet_core::{
    AgentSpec, BinaryCapacity, Capacity, Combine, DistortedProbability, Distortion, Error, Event, ExplicitCapacity,
    FiniteSpace, MeasureKind, ProbabilityVector, Result, Side, SimpleRandomVariable, SupProbability,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CapacitySpec {
    Probability {
        p: Vec<f64>,
    },
    SupProbability {
        priors: Vec<Vec<f64>>,
    },
    /// Either `power` (tabulated on `pieces` steps) or explicit `points`.
    Distorted {
        p: Vec<f64>,
        #[serde(default)]
        power: Option<f64>,
        #[serde(default)]
        pieces: Option<usize>,
        #[serde(default)]
        points: Option<Vec<(f64, f64)>>,
    },
    /// Values indexed by event bitmask, `2^m` entries.
    Explicit {
        m: usize,
        table: Vec<f64>,
    },
    BinaryThreshold {
        base: Box<CapacitySpec>,
        level: f64,
        #[serde(default = "left")]
        side: Side,
    },
    BinaryNullset {
        m: usize,
        null_events: Vec<Vec<usize>>,
    },
    Combined {
        mode: Combine,
        members: Vec<CapacitySpec>,
    },
}

fn left() -> Side {
    Side::Left
}

const DEFAULT_PIECES: usize = 1000;

impl CapacitySpec {
    pub fn build(&self) -> Result<Capacity> {
        Ok(match self {
            CapacitySpec::Probability { p } => ProbabilityVector::new(p.clone())?.into(),
            CapacitySpec::SupProbability { priors } => {
                let members = priors.iter().map(|q| ProbabilityVector::new(q.clone())).collect::<Result<_>>()?;
                SupProbability::new(members)?.into()
            }
            CapacitySpec::Distorted { p, power, pieces, points } => {
                let g = match (power, points) {
                    (Some(k), None) => Distortion::power(*k, pieces.unwrap_or(DEFAULT_PIECES))?,
                    (None, Some(pts)) => Distortion::new(pts.clone())?,
                    _ => return Err(Error::Config("distorted capacity needs exactly one of power or points".into())),
                };
                Capacity::Distorted(DistortedProbability::new(ProbabilityVector::new(p.clone())?, g))
            }
            CapacitySpec::Explicit { m, table } => ExplicitCapacity::new(*m, table.clone())?.into(),
            CapacitySpec::BinaryThreshold { base, level, side } => {
                BinaryCapacity::threshold(base.build()?, *level, *side)?.into()
            }
            CapacitySpec::BinaryNullset { m, null_events } => {
                let events = null_events
                    .iter()
                    .map(|e| Event::from_atoms(*m, e.iter().copied()))
                    .collect::<Result<_>>()?;
                BinaryCapacity::from_null_events(*m, events)?.into()
            }
            CapacitySpec::Combined { mode, members } => {
                combine_capacities(*mode, members.iter().map(CapacitySpec::build).collect::<Result<_>>()?)?
            }
        })
    }
}

/// `{"capacity": ..., "x": [...], "alpha": a}`
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalProblem {
    pub capacity: CapacitySpec,
    pub x: Vec<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentInput {
    #[serde(default)]
    pub name: Option<String>,
    pub alpha: f64,
    pub capacity: CapacitySpec,
}

/// `{"x": [...], "agents": [...], "ref_weights": [...]?}`
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareProblem {
    pub x: Vec<f64>,
    pub agents: Vec<AgentInput>,
    /// Reference weights for splitting atoms; defaults to the average of all
    /// priors.
    #[serde(default)]
    pub ref_weights: Option<Vec<f64>>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

impl EvalProblem {
    pub fn build(&self) -> Result<(Capacity, SimpleRandomVariable)> {
        let w = self.capacity.build()?;
        let x = SimpleRandomVariable::new(self.x.clone())?;
        if w.atoms() != x.atoms() {
            return Err(Error::SpaceMismatch {
                expected: x.atoms(),
                found: w.atoms(),
            });
        }
        Ok((w, x))
    }
}

impl ShareProblem {
    pub fn build(&self) -> Result<(Vec<AgentSpec>, SimpleRandomVariable)> {
        let x = SimpleRandomVariable::new(self.x.clone())?;
        let agents = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let name = a.name.clone().unwrap_or_else(|| format!("agent {}", i + 1));
                AgentSpec::new(name, a.capacity.build()?, a.alpha, MeasureKind::VaR)
            })
            .collect::<Result<Vec<_>>>()?;
        if agents.is_empty() {
            return Err(Error::Config("no agents".into()));
        }
        Ok((agents, x))
    }

    pub fn space(&self, agents: &[AgentSpec]) -> Result<FiniteSpace> {
        let m = self.x.len();
        let weights = match &self.ref_weights {
            Some(w) => w.clone(),
            None => average_prior(agents, m)?,
        };
        FiniteSpace::new(m)?.with_ref_weights(weights)
    }
}

fn average_prior(agents: &[AgentSpec], m: usize) -> Result<Vec<f64>> {
    let mut mu = vec![0.0; m];
    let mut count = 0usize;
    for a in agents {
        let priors: Vec<Vec<f64>> = match &a.capacity {
            Capacity::Distorted(d) => vec![d.base().weights().to_vec()],
            w => match w.as_sup_probability() {
                Some(s) => s.members().iter().map(|p| p.weights().to_vec()).collect(),
                None => continue,
            },
        };
        for q in priors {
            for (acc, v) in mu.iter_mut().zip(q) {
                *acc += v;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Ok(vec![1.0 / m as f64; m]);
    }
    let s: f64 = mu.iter().sum();
    Ok(mu.iter().map(|v| v / s).collect())
}
