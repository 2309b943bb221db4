use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::bla_logf::logf_output;
use crate::bla_logn::logn_output;
use crate::checker;
use crate::label::Label;
use crate::lattice::{Element, ProcessId};
use crate::sim::{EnvelopeStats, Execution, Node, RunConfig};

pub use crate::checker::Verdict;

impl Verdict {
    /// Flip the outcome. Only used to exercise failure plumbing.
    pub fn invert(&mut self) {
        self.pass = !self.pass;
        if self.pass {
            self.witness = None;
        } else if self.witness.is_none() {
            self.witness = Some(serde_json::json!({"inverted": true}));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProcessOutcome {
    pub id: ProcessId,
    pub correct: bool,
    pub input: Element,
    pub output: Option<Element>,
    /// Outer round of the decision (sqrtf only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decided_round: Option<usize>,
}

/// One correct process after a round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProcessDigest {
    pub value: Element,
    /// `|V|` for the set-based algorithms, height of `v` for sqrtf.
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    pub decided: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundSummary {
    pub round: usize,
    pub processes: BTreeMap<ProcessId, ProcessDigest>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub t: usize,
    pub processes: Vec<ProcessOutcome>,
    pub sub_rounds: usize,
    pub outer_rounds: usize,
    pub envelopes: EnvelopeStats,
    pub byzantine_values: BTreeMap<ProcessId, BTreeSet<Element>>,
    pub verdicts: Vec<Verdict>,
    pub rounds: Vec<RoundSummary>,
    pub all_pass: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failed(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    /// Flip every verdict and recompute `all_pass`.
    pub fn invert_verdicts(&mut self) {
        for v in &mut self.verdicts {
            v.invert();
        }
        self.all_pass = self.verdicts.iter().all(|v| v.pass);
    }
}

pub fn build(ex: &Execution) -> RunReport {
    let cfg = &ex.config;
    let outputs = checker::outputs(ex);
    let processes = (0..cfg.n)
        .map(|i| ProcessOutcome {
            id: i,
            correct: cfg.is_correct(i),
            input: cfg.inputs[i].clone(),
            output: outputs.get(&i).cloned().flatten(),
            decided_round: match &ex.nodes[i] {
                Node::Sqrtf(p) if cfg.is_correct(i) => p.state.decided_at,
                _ => None,
            },
        })
        .collect();
    let verdicts = checker::check_all(ex);
    let all_pass = verdicts.iter().all(|v| v.pass);
    RunReport {
        config: cfg.clone(),
        t: cfg.t(),
        processes,
        sub_rounds: ex.sub_rounds(),
        outer_rounds: ex.outer_rounds,
        envelopes: ex.envelopes.clone(),
        byzantine_values: checker::recorded_byzantine_values(ex),
        verdicts,
        rounds: round_summaries(ex),
        all_pass,
    }
}

fn round_summaries(ex: &Execution) -> Vec<RoundSummary> {
    let mut rounds: BTreeMap<usize, BTreeMap<ProcessId, ProcessDigest>> = BTreeMap::new();
    for i in ex.config.correct_ids() {
        match &ex.nodes[i] {
            Node::Sqrtf(p) => {
                for s in &p.history {
                    let st = &s.state;
                    rounds.entry(st.round).or_default().insert(
                        i,
                        ProcessDigest {
                            value: st.v.clone(),
                            size: st.v.height(),
                            label: None,
                            decided: st.decided_at.is_some(),
                        },
                    );
                }
            }
            Node::Logn(p) => {
                for st in &p.history {
                    rounds.entry(st.round).or_default().insert(
                        i,
                        ProcessDigest {
                            value: logn_output(st),
                            size: st.values.len(),
                            label: None,
                            decided: false,
                        },
                    );
                }
            }
            Node::Logf(p) => {
                for st in &p.history {
                    rounds.entry(st.round).or_default().insert(
                        i,
                        ProcessDigest {
                            value: logf_output(st),
                            size: st.values.len(),
                            label: Some(st.label),
                            decided: false,
                        },
                    );
                }
            }
        }
    }
    rounds
        .into_iter()
        .map(|(round, processes)| RoundSummary { round, processes })
        .collect()
}
