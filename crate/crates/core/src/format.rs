//! JSON file formats: instances, traces and phase schedules.
//!
//! Instance:
//!
//! ```json
//! { "version": 1, "mode": "int", "n": 3, "k": 1,
//!   "graph": { "edges": [[0, 1, 1], [1, 2, 2]] },
//!   "labels": ["a", "b", "c"] }
//! ```
//!
//! Exactly one of `graph` (integer mode only) and `matrix` must be present.
//! Float-mode instances may carry `"eps"`, the tie tolerance (default
//! `1e-9`). Lower-bound instances also record their `generator` so that
//! tools can rebuild the star structure.
//!
//! Trace costs are JSON integers in integer mode and decimal strings in
//! floating mode, so that no precision is lost either way.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kcenter::{FacilitySet, Step, TiePolicy, Trace};
use crate::lowerbound::{LowerBoundInstance, PhaseSchedule, Removal};
use crate::metric::{
    metric_from_graph, validate_metric, Arithmetic, MetricSpace, RandomKind, WeightedGraph, DEFAULT_EPS,
};

pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Int,
    Float,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Generator {
    Lowerbound { k: usize, n: usize },
    Random { kind: RandomKind, n: usize, seed: u64 },
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    edges: Vec<(usize, usize, u64)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceJson {
    version: u32,
    mode: Mode,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    graph: Option<GraphJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<serde_json::Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<Generator>,
}

/// A k-center instance as stored on disk.
#[derive(Clone, Debug)]
pub struct Instance {
    pub metric: MetricSpace,
    pub k: Option<usize>,
    pub labels: Option<Vec<String>>,
    pub graph: Option<WeightedGraph>,
    pub generator: Option<Generator>,
}

impl Instance {
    pub fn from_lower_bound(inst: &LowerBoundInstance) -> Self {
        Instance {
            metric: inst.metric.clone(),
            k: Some(inst.k),
            labels: Some(inst.labels()),
            graph: Some(inst.graph.clone()),
            generator: Some(Generator::Lowerbound { k: inst.k, n: inst.n }),
        }
    }

    pub fn from_metric(metric: MetricSpace, k: Option<usize>) -> Self {
        Instance {
            metric,
            k,
            labels: None,
            graph: None,
            generator: None,
        }
    }

    /// Rebuilds the lower-bound structure for instances generated from it,
    /// checking that the stored metric still matches.
    pub fn lower_bound(&self) -> Result<Option<LowerBoundInstance>> {
        let Some(Generator::Lowerbound { k, n }) = self.generator else {
            return Ok(None);
        };
        let inst = LowerBoundInstance::build(k, Some(n))?;
        if inst.metric != self.metric {
            return Err(Error::Format(
                "metric does not match its lower-bound generator".into(),
            ));
        }
        Ok(Some(inst))
    }

    pub fn to_json(&self) -> Result<String> {
        let m = &self.metric;
        let mode = if m.arithmetic().is_exact() { Mode::Int } else { Mode::Float };
        let matrix = match (&self.graph, mode) {
            (Some(_), Mode::Int) => None,
            _ => Some(
                m.rows()
                    .into_iter()
                    .map(|r| r.into_iter().map(|d| number(d, mode)).collect())
                    .collect(),
            ),
        };
        let json = InstanceJson {
            version: VERSION,
            mode,
            n: m.len(),
            eps: match m.arithmetic() {
                Arithmetic::Float { eps } => Some(eps),
                Arithmetic::Exact => None,
            },
            graph: if matrix.is_none() {
                self.graph.as_ref().map(|g| GraphJson {
                    edges: g.edges().to_vec(),
                })
            } else {
                None
            },
            matrix,
            k: self.k,
            labels: self.labels.clone(),
            generator: self.generator.clone(),
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let json: InstanceJson = serde_json::from_str(s)?;
        if json.version != VERSION {
            return Err(Error::Format(format!("unsupported version {}", json.version)));
        }
        let arithmetic = match json.mode {
            Mode::Int => {
                if json.eps.is_some() {
                    return Err(Error::Format("\"eps\" is only meaningful in float mode".into()));
                }
                Arithmetic::Exact
            }
            Mode::Float => Arithmetic::Float {
                eps: json.eps.unwrap_or(DEFAULT_EPS),
            },
        };
        let (metric, graph) = match (json.graph, json.matrix) {
            (Some(_), Some(_)) => {
                return Err(Error::Format("both \"graph\" and \"matrix\" given".into()));
            }
            (None, None) => return Err(Error::Format("one of \"graph\" or \"matrix\" is required".into())),
            (Some(g), None) => {
                if json.mode != Mode::Int {
                    return Err(Error::Format("\"graph\" instances must use int mode".into()));
                }
                let g = WeightedGraph::new(json.n, g.edges)?;
                (metric_from_graph(&g)?, Some(g))
            }
            (None, Some(rows)) => {
                let rows = rows
                    .into_iter()
                    .map(|r| {
                        r.into_iter()
                            .map(|x| x.as_f64().ok_or_else(|| Error::Format(format!("bad number {x}"))))
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                (MetricSpace::from_rows(rows, arithmetic)?, None)
            }
        };
        if metric.len() != json.n {
            return Err(Error::Format(format!(
                "\"n\" is {} but the data has {} points",
                json.n,
                metric.len()
            )));
        }
        let report = validate_metric(&metric);
        if let Some(v) = report.violations.first() {
            return Err(Error::Format(format!(
                "not a metric ({} violations, first: {})",
                report.violations.len(),
                serde_json::to_string(v)?
            )));
        }
        if let Some(labels) = &json.labels {
            if labels.len() != json.n {
                return Err(Error::Format(format!("{} labels for {} points", labels.len(), json.n)));
            }
        }
        if let Some(k) = json.k {
            if k < 1 || k > json.n {
                return Err(Error::InvalidK { k, n: json.n });
            }
        }
        Ok(Instance {
            metric,
            k: json.k,
            labels: json.labels,
            graph,
            generator: json.generator,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_json()? + "\n")?)
    }
}

fn number(d: f64, mode: Mode) -> serde_json::Number {
    match mode {
        Mode::Int => serde_json::Number::from(d as u64),
        Mode::Float => serde_json::Number::from_f64(d).expect("finite"),
    }
}

/// Distance scalar as written in traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostValue {
    Int(u64),
    Decimal(String),
}

impl CostValue {
    pub fn new(c: f64, ar: Arithmetic) -> Self {
        if ar.is_exact() {
            CostValue::Int(c as u64)
        } else {
            CostValue::Decimal(format!("{c}"))
        }
    }

    pub fn value(&self) -> Result<f64> {
        match self {
            CostValue::Int(v) => Ok(*v as f64),
            CostValue::Decimal(s) => s
                .parse()
                .map_err(|_| Error::Format(format!("bad decimal cost {s:?}"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StepJson {
    removed: usize,
    cost: CostValue,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceJson {
    version: u32,
    mode: Mode,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    k: usize,
    policy: TiePolicy,
    steps: Vec<StepJson>,
    #[serde(rename = "final")]
    final_set: Vec<usize>,
}

pub fn trace_to_json(t: &Trace) -> Result<String> {
    let (mode, eps) = match t.arithmetic {
        Arithmetic::Exact => (Mode::Int, None),
        Arithmetic::Float { eps } => (Mode::Float, Some(eps)),
    };
    let json = TraceJson {
        version: VERSION,
        mode,
        n: t.n,
        eps,
        k: t.k,
        policy: t.policy.clone(),
        steps: t
            .steps
            .iter()
            .map(|s| StepJson {
                removed: s.removed,
                cost: CostValue::new(s.cost, t.arithmetic),
            })
            .collect(),
        final_set: t.final_set.members().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&json)?)
}

pub fn trace_from_json(s: &str) -> Result<Trace> {
    let json: TraceJson = serde_json::from_str(s)?;
    if json.version != VERSION {
        return Err(Error::Format(format!("unsupported version {}", json.version)));
    }
    let arithmetic = match json.mode {
        Mode::Int => Arithmetic::Exact,
        Mode::Float => Arithmetic::Float {
            eps: json.eps.unwrap_or(DEFAULT_EPS),
        },
    };
    let steps = json
        .steps
        .into_iter()
        .map(|s| {
            Ok(Step {
                removed: s.removed,
                cost: s.cost.value()?,
                argmin: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if json.k < 1 || json.k > json.n || steps.len() != json.n - json.k {
        return Err(Error::Format(format!(
            "trace has {} steps for n = {}, k = {}",
            steps.len(),
            json.n,
            json.k
        )));
    }
    let mut alive = vec![true; json.n];
    for s in &steps {
        if s.removed >= json.n || !std::mem::replace(&mut alive[s.removed], false) {
            return Err(Error::Format(format!("invalid removal of {}", s.removed)));
        }
    }
    let survivors: Vec<usize> = (0..json.n).filter(|&p| alive[p]).collect();
    if survivors != json.final_set {
        return Err(Error::Format("\"final\" does not match the removals".into()));
    }
    Ok(Trace {
        n: json.n,
        k: json.k,
        arithmetic,
        policy: json.policy,
        steps,
        final_set: FacilitySet::from_sorted(survivors),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleJson {
    version: u32,
    k: usize,
    n: usize,
    removals: Vec<Removal>,
    #[serde(default)]
    phase_sizes: Vec<(usize, usize)>,
}

pub fn schedule_to_json(inst: &LowerBoundInstance, s: &PhaseSchedule) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ScheduleJson {
        version: VERSION,
        k: inst.k,
        n: inst.n,
        removals: s.removals.clone(),
        phase_sizes: s.phase_sizes(),
    })?)
}

/// Returns `(k, n, schedule)`.
pub fn schedule_from_json(s: &str) -> Result<(usize, usize, PhaseSchedule)> {
    let json: ScheduleJson = serde_json::from_str(s)?;
    if json.version != VERSION {
        return Err(Error::Format(format!("unsupported version {}", json.version)));
    }
    Ok((json.k, json.n, PhaseSchedule { removals: json.removals }))
}
