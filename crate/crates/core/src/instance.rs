//! The TOML instance format.
//!
//! ```toml
//! version = 1
//!
//! [[tree.nodes]]
//! label = "root"
//!
//! [[tree.nodes]]
//! parent = 0
//! prob = "1/2"
//!
//! [[tree.nodes]]
//! parent = 0
//! prob = "1/2"
//!
//! [processes]
//! generators = [["1", "2", "0"]]
//! probes = [{ label = "half", values = ["1/2", "1", "0"] }]
//!
//! [conditional]
//! probs = ["1/2", "1/4", "1/4"]
//! blocks = [[0], [1, 2]]
//! generators = [["1", "2", "2"]]
//! probes = [{ values = ["1", "1", "1"] }]
//!
//! [market]
//! prices = [["4", "8", "2"]]
//! claim = ["3", "0"]
//! budget = "1"
//! consumption = { density = ["0", "1", "1"], weights = ["0", "1"] }
//! ```
//!
//! Every number is an exact rational, written `"p/q"` or as an integer.
//! Decimals are rejected. Process values are listed in node order, claims
//! in the order of the leaves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conditional::{RandomVariable, RvError, RvSet};
use crate::market::{ConsumptionDensity, Market, MarketError};
use crate::process::{AdaptedProcess, ProcessError, ProcessSet};
use crate::rational::{format_rational, parse_rational};
use crate::tree::{EventTree, FiniteSpace, NodeId, NodeSpec, Partition, SpaceError, TreeError, TreeSpec};
use crate::Rational;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("malformed instance: {0}")]
    Syntax(String),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("exact rationals required: {field} = {value}")]
    Decimal { field: String, value: String },
    #[error("not a rational number: {field} = {value:?}")]
    BadNumber { field: String, value: String },
    #[error("the instance has no [{0}] section")]
    MissingSection(&'static str),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Rv(#[from] RvError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// A number as written in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    fn of(r: &Rational) -> Self {
        Num::Text(format_rational(r))
    }

    fn parse(&self, field: &str) -> Result<Rational, InstanceError> {
        match self {
            Num::Int(i) => Ok(Rational::from_integer((*i).into())),
            Num::Float(f) => Err(InstanceError::Decimal {
                field: field.into(),
                value: f.to_string(),
            }),
            Num::Text(s) if s.contains('.') || s.contains(['e', 'E']) => Err(InstanceError::Decimal {
                field: field.into(),
                value: s.clone(),
            }),
            Num::Text(s) => parse_rational(s).ok_or_else(|| InstanceError::BadNumber {
                field: field.into(),
                value: s.clone(),
            }),
        }
    }
}

fn parse_all(v: &[Num], field: &str) -> Result<Vec<Rational>, InstanceError> {
    v.iter().enumerate().map(|(i, x)| x.parse(&format!("{field}[{i}]"))).collect()
}

fn write_all(v: &[Rational]) -> Vec<Num> {
    v.iter().map(Num::of).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    version: u32,
    tree: RawTree,
    #[serde(skip_serializing_if = "Option::is_none")]
    processes: Option<RawProcesses>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditional: Option<RawConditional>,
    #[serde(skip_serializing_if = "Option::is_none")]
    market: Option<RawMarket>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTree {
    nodes: Vec<RawNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parent: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prob: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    values: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProcesses {
    generators: Vec<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    probes: Vec<RawProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConditional {
    probs: Vec<Num>,
    blocks: Vec<Vec<usize>>,
    generators: Vec<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    probes: Vec<RawProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConsumption {
    density: Vec<Num>,
    weights: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarket {
    prices: Vec<Vec<Num>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    claim: Option<Vec<Num>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    consumption: Option<RawConsumption>,
}

/// A labelled probe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe<T> {
    pub label: String,
    pub value: T,
}

/// Process generators and probes on the instance tree. Generators are
/// validated only when a [`ProcessSet`] is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessSection {
    pub generators: Vec<AdaptedProcess>,
    pub probes: Vec<Probe<AdaptedProcess>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalSection {
    pub set: RvSet,
    pub probes: Vec<Probe<RandomVariable>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketSection {
    pub market: Market,
    pub claim: Option<Vec<Rational>>,
    pub budget: Option<Rational>,
    pub consumption: Option<ConsumptionDensity>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub tree: EventTree,
    pub processes: Option<ProcessSection>,
    pub conditional: Option<ConditionalSection>,
    pub market: Option<MarketSection>,
}

fn probe_label(raw: &Option<String>, i: usize) -> String {
    raw.clone().unwrap_or_else(|| format!("probe{i}"))
}

impl Instance {
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance = toml::from_str(text).map_err(|e| InstanceError::Syntax(e.to_string()))?;
        if raw.version != FORMAT_VERSION {
            return Err(InstanceError::Version(raw.version));
        }
        let nodes = raw
            .tree
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                Ok(NodeSpec {
                    label: n.label.clone(),
                    parent: n.parent,
                    prob: n.prob.as_ref().map(|p| p.parse(&format!("tree.nodes[{i}].prob"))).transpose()?,
                    time: n.time,
                })
            })
            .collect::<Result<Vec<_>, InstanceError>>()?;
        let tree = EventTree::new(TreeSpec { nodes })?;

        let processes = match &raw.processes {
            None => None,
            Some(p) => {
                let process = |values: &[Num], field: &str| -> Result<AdaptedProcess, InstanceError> {
                    Ok(AdaptedProcess::new(&tree, parse_all(values, field)?)?)
                };
                let generators = p
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(i, g)| process(g, &format!("processes.generators[{i}]")))
                    .collect::<Result<_, _>>()?;
                let probes = p
                    .probes
                    .iter()
                    .enumerate()
                    .map(|(i, pr)| {
                        Ok(Probe {
                            label: probe_label(&pr.label, i),
                            value: process(&pr.values, &format!("processes.probes[{i}]"))?,
                        })
                    })
                    .collect::<Result<_, InstanceError>>()?;
                Some(ProcessSection { generators, probes })
            }
        };

        let conditional = match &raw.conditional {
            None => None,
            Some(c) => {
                let space = FiniteSpace::new(parse_all(&c.probs, "conditional.probs")?)?;
                let partition = Partition::new(space.len(), c.blocks.clone())?;
                let generators = c
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(i, g)| Ok(RandomVariable::new(parse_all(g, &format!("conditional.generators[{i}]"))?)?))
                    .collect::<Result<_, InstanceError>>()?;
                let set = RvSet::new(space, partition, generators)?;
                let probes = c
                    .probes
                    .iter()
                    .enumerate()
                    .map(|(i, pr)| {
                        let v = RandomVariable::new(parse_all(&pr.values, &format!("conditional.probes[{i}]"))?)?;
                        if v.len() != set.len() {
                            return Err(RvError::LengthMismatch {
                                expected: set.len(),
                                found: v.len(),
                            }
                            .into());
                        }
                        Ok(Probe {
                            label: probe_label(&pr.label, i),
                            value: v,
                        })
                    })
                    .collect::<Result<_, InstanceError>>()?;
                Some(ConditionalSection { set, probes })
            }
        };

        let market = match &raw.market {
            None => None,
            Some(m) => {
                let prices = m
                    .prices
                    .iter()
                    .enumerate()
                    .map(|(i, p)| Ok(AdaptedProcess::new(&tree, parse_all(p, &format!("market.prices[{i}]"))?)?))
                    .collect::<Result<_, InstanceError>>()?;
                let market = Market::new(tree.clone(), prices)?;
                let claim = m.claim.as_ref().map(|c| parse_all(c, "market.claim")).transpose()?;
                let budget = m.budget.as_ref().map(|b| b.parse("market.budget")).transpose()?;
                let consumption = match &m.consumption {
                    None => None,
                    Some(c) => {
                        let density = AdaptedProcess::new(&tree, parse_all(&c.density, "market.consumption.density")?)?;
                        let weights = parse_all(&c.weights, "market.consumption.weights")?;
                        Some(ConsumptionDensity::new(&tree, density, weights)?)
                    }
                };
                Some(MarketSection {
                    market,
                    claim,
                    budget,
                    consumption,
                })
            }
        };

        Ok(Instance {
            tree,
            processes,
            conditional,
            market,
        })
    }

    pub fn to_toml(&self) -> String {
        let tree = &self.tree;
        let nodes = tree
            .nodes()
            .map(|n| RawNode {
                label: tree.label(n).map(str::to_owned),
                parent: tree.parent(n).map(|p| p.0),
                prob: tree.parent(n).map(|_| Num::of(tree.one_step_prob(n))),
                time: None,
            })
            .collect();
        let raw_probe = |label: &str, values: &[Rational]| RawProbe {
            label: Some(label.to_owned()),
            values: write_all(values),
        };
        let raw = RawInstance {
            version: FORMAT_VERSION,
            tree: RawTree { nodes },
            processes: self.processes.as_ref().map(|p| RawProcesses {
                generators: p.generators.iter().map(|g| write_all(g.values())).collect(),
                probes: p.probes.iter().map(|pr| raw_probe(&pr.label, pr.value.values())).collect(),
            }),
            conditional: self.conditional.as_ref().map(|c| RawConditional {
                probs: write_all(c.set.space().probs()),
                blocks: c.set.partition().blocks().to_vec(),
                generators: c.set.generators().iter().map(|g| write_all(g.values())).collect(),
                probes: c.probes.iter().map(|pr| raw_probe(&pr.label, pr.value.values())).collect(),
            }),
            market: self.market.as_ref().map(|m| RawMarket {
                prices: m.market.prices().iter().map(|p| write_all(p.values())).collect(),
                claim: m.claim.as_deref().map(write_all),
                budget: m.budget.as_ref().map(Num::of),
                consumption: m.consumption.as_ref().map(|c| RawConsumption {
                    density: write_all(c.density().values()),
                    weights: write_all(c.weights()),
                }),
            }),
        };
        toml::to_string(&raw).expect("instance serializes")
    }

    pub fn process_section(&self) -> Result<&ProcessSection, InstanceError> {
        self.processes.as_ref().ok_or(InstanceError::MissingSection("processes"))
    }

    pub fn process_set(&self) -> Result<ProcessSet, InstanceError> {
        let p = self.process_section()?;
        Ok(ProcessSet::new(self.tree.clone(), p.generators.clone())?)
    }

    pub fn conditional_section(&self) -> Result<&ConditionalSection, InstanceError> {
        self.conditional.as_ref().ok_or(InstanceError::MissingSection("conditional"))
    }

    pub fn market_section(&self) -> Result<&MarketSection, InstanceError> {
        self.market.as_ref().ok_or(InstanceError::MissingSection("market"))
    }

    pub fn node(&self, i: usize) -> Option<NodeId> {
        (i < self.tree.len()).then_some(NodeId(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    const M1: &str = r#"
version = 1

[[tree.nodes]]
label = "root"

[[tree.nodes]]
label = "up"
parent = 0
prob = "1/2"

[[tree.nodes]]
label = "down"
parent = 0
prob = "1/2"

[processes]
generators = [["1", "3/2", "1/2"], [1, 0, 2]]
probes = [{ label = "half", values = ["1/2", "1/2", "1/2"] }]

[conditional]
probs = ["1/2", "1/4", "1/4"]
blocks = [[0], [1, 2]]
generators = [["1", "2", "0"]]
probes = [{ values = ["1", "1", "1"] }]

[market]
prices = [["4", "8", "2"]]
claim = ["3", "0"]
budget = "1"
consumption = { density = ["0", "3", "0"], weights = ["0", "1"] }
"#;

    #[test]
    fn parses_every_section() {
        let inst = Instance::parse(M1).unwrap();
        assert_eq!(inst.tree.len(), 3);
        assert_eq!(inst.tree.find_label("down"), Some(NodeId(2)));
        let p = inst.process_section().unwrap();
        assert_eq!(p.generators[1].values(), &[rat(1, 1), rat(0, 1), rat(2, 1)][..]);
        assert_eq!(p.probes[0].label, "half");
        let c = inst.conditional_section().unwrap();
        assert_eq!(c.set.partition().blocks().len(), 2);
        assert_eq!(c.probes[0].label, "probe0");
        let m = inst.market_section().unwrap();
        assert_eq!(m.market.interior_measure(), &[rat(1, 1), rat(1, 3), rat(2, 3)][..]);
        assert_eq!(m.budget, Some(rat(1, 1)));
    }

    #[test]
    fn round_trip_is_identical() {
        let inst = Instance::parse(M1).unwrap();
        let text = inst.to_toml();
        let again = Instance::parse(&text).unwrap();
        assert_eq!(inst, again);
        assert_eq!(text, again.to_toml());
        assert!(text.contains("\"1/2\""));
    }

    #[test]
    fn decimals_are_rejected() {
        let quoted = M1.replacen("prob = \"1/2\"", "prob = \"0.5\"", 1);
        let err = Instance::parse(&quoted).unwrap_err();
        assert!(matches!(err, InstanceError::Decimal { .. }));
        assert!(err.to_string().contains("exact rationals required"));
        let bare = M1.replacen("prob = \"1/2\"", "prob = 0.5", 1);
        assert!(matches!(Instance::parse(&bare), Err(InstanceError::Decimal { .. })));
        let sci = M1.replacen("budget = \"1\"", "budget = \"1e0\"", 1);
        assert!(matches!(Instance::parse(&sci), Err(InstanceError::Decimal { .. })));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(Instance::parse("version = 1"), Err(InstanceError::Syntax(_))));
        let v2 = M1.replacen("version = 1", "version = 2", 1);
        assert_eq!(Instance::parse(&v2), Err(InstanceError::Version(2)));
        let bad_prob = M1.replacen("prob = \"1/2\"", "prob = \"1/3\"", 1);
        assert!(matches!(Instance::parse(&bad_prob), Err(InstanceError::Tree(_))));
        let zero_den = M1.replacen("budget = \"1\"", "budget = \"1/0\"", 1);
        assert!(matches!(Instance::parse(&zero_den), Err(InstanceError::BadNumber { .. })));
        let arbitrage = M1.replacen("[\"4\", \"8\", \"2\"]", "[\"9\", \"8\", \"2\"]", 1);
        assert!(matches!(
            Instance::parse(&arbitrage),
            Err(InstanceError::Market(MarketError::NoEquivalentMartingaleMeasure))
        ));
        let inst = Instance::parse(&M1.replace("[market]", "[unused]")).unwrap_err();
        assert!(matches!(inst, InstanceError::Syntax(_)));
    }

    #[test]
    fn missing_sections_are_reported() {
        let tree_only = M1.split("[processes]").next().unwrap();
        let inst = Instance::parse(tree_only).unwrap();
        assert_eq!(inst.market_section(), Err(InstanceError::MissingSection("market")));
        assert_eq!(Instance::parse(&inst.to_toml()).unwrap(), inst);
    }
}
