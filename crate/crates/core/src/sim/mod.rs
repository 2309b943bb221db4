//! Lockstep simulator. Each sub-round every process (correct ones and the
//! honest shadows of Byzantine ones) produces an outbox, the adversary
//! rewrites the Byzantine outboxes after seeing the correct ones, and all
//! records between an ordered pair travel in one envelope.

pub mod adversary;
pub mod config;
pub mod report;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bla_logf::LogfProcess;
use crate::bla_logn::{self, LognProcess};
use crate::bla_sqrtf::{round_cap, SqrtfProcess};
use crate::error::ConfigError;
use crate::label::LabelScale;
use crate::lattice::{Element, ProcessId, Tag, Universe};
use crate::protocol::{Inbox, Phase, Process, SubRound};

pub use adversary::{strategy, Adversary, AdversaryView};
pub use config::{builtin_adversaries, default_f, AdversarySpec, Algorithm, RunConfig};
pub use report::{RunReport, Verdict};

#[derive(Clone, Debug)]
pub enum Node {
    Sqrtf(SqrtfProcess),
    Logn(LognProcess),
    Logf(LogfProcess),
}

impl Node {
    fn inner(&mut self) -> &mut dyn Process {
        match self {
            Node::Sqrtf(p) => p,
            Node::Logn(p) => p,
            Node::Logf(p) => p,
        }
    }

    fn admissible_from(&self, sender: ProcessId) -> Vec<Element> {
        match self {
            Node::Sqrtf(p) => p.admissible_from(sender),
            Node::Logn(p) => p.admissible_from(sender),
            Node::Logf(p) => p.admissible_from(sender),
        }
    }

    fn terminated(&self) -> bool {
        match self {
            Node::Sqrtf(p) => p.state.terminated(),
            Node::Logn(_) | Node::Logf(_) => false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EnvelopeStats {
    pub total: usize,
    pub without_self: usize,
    pub per_sub_round: Vec<usize>,
    /// Envelopes sent by correct processes, per sub-round.
    pub correct_per_sub_round: Vec<usize>,
}

impl EnvelopeStats {
    /// Envelopes carrying a correct sender, summed over the run.
    pub fn correct_total(&self) -> usize {
        self.correct_per_sub_round.iter().sum()
    }

    pub fn correct_max(&self) -> usize {
        self.correct_per_sub_round.iter().copied().max().unwrap_or(0)
    }
}

/// A finished run: final process objects with their histories plus
/// message accounting. The checker reads only this.
#[derive(Clone, Debug)]
pub struct Execution {
    pub config: RunConfig,
    pub universe: Universe,
    pub nodes: Vec<Node>,
    pub schedule: Vec<SubRound>,
    pub outer_rounds: usize,
    pub envelopes: EnvelopeStats,
}

impl Execution {
    pub fn sub_rounds(&self) -> usize {
        self.schedule.len()
    }
}

struct Sim<'a> {
    config: &'a RunConfig,
    universe: Universe,
    spare: BTreeMap<ProcessId, Vec<Tag>>,
    nodes: Vec<Node>,
    adversary: Box<dyn Adversary>,
    rng: ChaCha8Rng,
    schedule: Vec<SubRound>,
    stats: EnvelopeStats,
}

impl Sim<'_> {
    fn step(&mut self, outer: usize, phase: Phase) {
        let at = SubRound {
            index: self.schedule.len() + 1,
            outer,
            phase,
        };
        let n = self.config.n;
        let mut correct = BTreeMap::new();
        let mut honest = BTreeMap::new();
        for (id, node) in self.nodes.iter_mut().enumerate() {
            let ob = node.inner().send(&at);
            if self.config.is_correct(id) {
                correct.insert(id, ob);
            } else {
                honest.insert(id, ob);
            }
        }
        let nodes = &self.nodes;
        let admissible = |target: ProcessId, sender: ProcessId| -> Vec<Element> {
            nodes.get(target).map(|t| t.admissible_from(sender)).unwrap_or_default()
        };
        let view = AdversaryView {
            n,
            f: self.config.f,
            algorithm: self.config.algorithm,
            at,
            byzantine: &self.config.byzantine_ids,
            honest: &honest,
            correct: &correct,
            spare: &self.spare,
            admissible: &admissible,
        };
        let byzantine = self.adversary.act(&view, &mut self.rng);

        let mut inboxes: Vec<Inbox> = vec![Inbox::new(); n];
        let mut total = 0;
        let mut from_correct = 0;
        let byzantine = byzantine.into_iter().filter(|(b, _)| !self.config.is_correct(*b));
        for (from, ob) in correct.into_iter().chain(byzantine) {
            for (to, payload) in ob {
                if to >= n || payload.is_empty() {
                    continue;
                }
                total += 1;
                if to != from {
                    self.stats.without_self += 1;
                }
                if self.config.is_correct(from) {
                    from_correct += 1;
                }
                let payload: Vec<_> = if self.config.is_correct(to) {
                    payload
                        .into_iter()
                        .filter(|r| r.elements().all(|v| self.universe.contains(v)))
                        .collect()
                } else {
                    payload
                };
                inboxes[to].insert(from, payload);
            }
        }
        self.stats.total += total;
        self.stats.per_sub_round.push(total);
        self.stats.correct_per_sub_round.push(from_correct);
        for (node, inbox) in self.nodes.iter_mut().zip(&inboxes) {
            node.inner().deliver(&at, inbox);
        }
        self.schedule.push(at);
    }

    fn correct_terminated(&self) -> bool {
        self.config
            .correct_ids()
            .into_iter()
            .all(|i| self.nodes[i].terminated())
    }
}

fn rng_seed(config: &RunConfig) -> u64 {
    config.seed ^ config.adversary.param().wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Run the configured algorithm to completion.
pub fn execute(config: &RunConfig) -> Result<Execution, ConfigError> {
    config.validate()?;
    let (n, f) = (config.n, config.f);
    let universe = config.universe();
    let cap = universe.height();
    let nodes = config
        .inputs
        .iter()
        .enumerate()
        .map(|(id, x)| match config.algorithm {
            Algorithm::Sqrtf => Node::Sqrtf(SqrtfProcess::new(id, n, f, x.clone(), round_cap(cap, f))),
            Algorithm::Logn => Node::Logn(LognProcess::new(id, n, f, x.clone(), cap)),
            Algorithm::Logf => Node::Logf(LogfProcess::new(id, n, f, x.clone(), cap)),
        })
        .collect();
    let mut sim = Sim {
        config,
        spare: config.spare_tags(),
        universe,
        nodes,
        adversary: strategy(config.adversary),
        rng: ChaCha8Rng::seed_from_u64(rng_seed(config)),
        schedule: Vec::new(),
        stats: EnvelopeStats::default(),
    };
    let gc = [Phase::GcLead, Phase::GcEcho, Phase::GcConfirm];
    let sgc = [Phase::SgcLead, Phase::SgcEcho, Phase::SgcConfirm];
    let outer_rounds = match config.algorithm {
        Algorithm::Sqrtf => {
            let limit = round_cap(cap, f);
            let mut r = 0;
            while r < limit {
                r += 1;
                for p in gc {
                    sim.step(r, p);
                }
                if sim.correct_terminated() {
                    break;
                }
            }
            r
        }
        Algorithm::Logn => {
            for p in gc {
                sim.step(0, p);
            }
            let iters = bla_logn::iterations(n);
            for r in 1..=iters {
                for p in sgc {
                    sim.step(r, p);
                }
            }
            iters + 1
        }
        Algorithm::Logf => {
            for p in gc {
                sim.step(0, p);
            }
            let iters = LabelScale::new(n, f).levels as usize;
            for r in 1..=iters {
                for p in sgc.into_iter().chain([Phase::Exchange]) {
                    sim.step(r, p);
                }
            }
            iters + 1
        }
    };
    Ok(Execution {
        config: config.clone(),
        universe: sim.universe,
        nodes: sim.nodes,
        schedule: sim.schedule,
        outer_rounds,
        envelopes: sim.stats,
    })
}

/// Execute and check.
pub fn run(config: &RunConfig) -> Result<RunReport, ConfigError> {
    let ex = execute(config)?;
    Ok(report::build(&ex))
}

/// `execute` that also hands back the verdicts in one go.
pub fn run_with_execution(config: &RunConfig) -> Result<(Execution, RunReport), ConfigError> {
    let ex = execute(config)?;
    let report = report::build(&ex);
    Ok((ex, report))
}

pub fn count_messages(report: &RunReport) -> usize {
    report.envelopes.total
}
