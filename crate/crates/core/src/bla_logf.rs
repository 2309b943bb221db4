//! Lattice agreement in `4 log f + 3` sub-rounds with label-driven
//! classification. Each iteration is a labelled set gradecast followed by
//! one exchange sub-round of slave safe sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::gradecast::{leader_send, GradeTriple, GradecastFilter, GradecastRound};
use crate::label::{Label, LabelScale};
use crate::lattice::{join_all, Element, ProcessId};
use crate::protocol::{broadcast, first_per_key, well_formed_set, Inbox, Outbox, Payload, Phase, Process, Record, SubRound};
use crate::setgradecast::{sgc_leader_send, ScoredSet, SetGcFilter, SetGradecastRound};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LogfState {
    pub values: BTreeSet<Element>,
    pub label: Label,
    /// Safe value set per group label.
    pub safe: BTreeMap<Label, BTreeSet<Element>>,
    /// Completed iterations.
    pub round: usize,
}

pub fn logf_initial_round(triples: &[GradeTriple], scale: &LabelScale) -> LogfState {
    let scored = |min: u8| -> BTreeSet<Element> {
        triples
            .iter()
            .filter(|t| t.score >= min)
            .filter_map(|t| t.value.clone())
            .collect()
    };
    let k0 = scale.initial();
    LogfState {
        values: scored(2),
        label: k0,
        safe: BTreeMap::from([(k0, scored(1))]),
        round: 0,
    }
}

/// Per-label results of one iteration's set gradecasts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LogfRound {
    pub u1: BTreeMap<Label, BTreeSet<Element>>,
    pub u2: BTreeMap<Label, BTreeSet<Element>>,
    /// Processes that gradecast with each label, i.e. exchange recipients.
    pub members: BTreeMap<Label, BTreeSet<ProcessId>>,
    pub next_safe: BTreeMap<Label, BTreeSet<Element>>,
}

/// Grade bookkeeping for iteration `state.round + 1`. `leader_labels` are the
/// labels carried by accepted leader messages.
pub fn logf_prepare(
    state: &LogfState,
    scored: &[ScoredSet],
    leader_labels: &BTreeMap<ProcessId, Label>,
    scale: &LabelScale,
) -> LogfRound {
    let r = state.round + 1;
    let mut out = LogfRound::default();
    let mut labels: BTreeSet<Label> = leader_labels.values().copied().collect();
    labels.insert(state.label);
    for (&j, &k) in leader_labels {
        out.members.entry(k).or_default().insert(j);
    }
    for s in scored {
        let Some(k) = s.label else { continue };
        labels.insert(k);
        out.u1.entry(k).or_default().extend(s.at_least(1).cloned());
        out.u2.entry(k).or_default().extend(s.at_least(2).cloned());
    }
    out.next_safe = state.safe.clone();
    for k in labels {
        let u1 = out.u1.entry(k).or_default().clone();
        let u2 = out.u2.entry(k).or_default().clone();
        let mut m = state.safe.get(&k).cloned().unwrap_or_default();
        m.extend(u1);
        out.next_safe.insert(scale.master(k, r), m);
        out.next_safe.insert(scale.slave(k, r), u2);
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassifierExchange {
    pub sent_sets: BTreeMap<ProcessId, BTreeSet<Element>>,
    pub accepted_union: BTreeSet<Element>,
}

/// Collect `R_j` addressed to `label` and union those inside `u1`.
pub fn collect_exchange(inbox: &Inbox, label: Label, u1: &BTreeSet<Element>, cap: usize) -> ClassifierExchange {
    let sent_sets: BTreeMap<ProcessId, BTreeSet<Element>> = first_per_key(inbox, |_, rec| match rec {
        Record::Cx { target, set } if *target == label => Some(((), set)),
        _ => None,
    })
    .into_iter()
    .filter(|(_, set)| well_formed_set(set, cap))
    .map(|(j, set)| (j, set.iter().cloned().collect()))
    .collect();
    let accepted_union = sent_sets
        .values()
        .filter(|r| r.is_subset(u1))
        .flatten()
        .cloned()
        .collect();
    ClassifierExchange {
        sent_sets,
        accepted_union,
    }
}

/// Classify: master if `|T| > label`, slave otherwise.
pub fn logf_iteration(state: &LogfState, round: &LogfRound, exchange: &ClassifierExchange, scale: &LabelScale) -> LogfState {
    let r = state.round + 1;
    let k = state.label;
    let (values, label) = if scale.exceeds(exchange.accepted_union.len(), k) {
        (round.u1.get(&k).cloned().unwrap_or_default(), scale.master(k, r))
    } else {
        (round.u2.get(&k).cloned().unwrap_or_default(), scale.slave(k, r))
    };
    LogfState {
        values,
        label,
        safe: round.next_safe.clone(),
        round: r,
    }
}

pub fn logf_output(state: &LogfState) -> Element {
    join_all(&state.values)
}

#[derive(Clone, Debug)]
pub struct LogfProcess {
    pub id: ProcessId,
    pub n: usize,
    pub f: usize,
    pub cap: usize,
    pub scale: LabelScale,
    pub input: Element,
    pub state: Option<LogfState>,
    /// State at the start of every round `1..=levels+1`.
    pub history: Vec<LogfState>,
    pub initial_triples: Vec<GradeTriple>,
    pub exchanges: Vec<ClassifierExchange>,
    gc: GradecastRound,
    sgc: Option<SetGradecastRound>,
    round: Option<LogfRound>,
    pending: Payload,
}

impl LogfProcess {
    pub fn new(id: ProcessId, n: usize, f: usize, input: Element, cap: usize) -> Self {
        LogfProcess {
            id,
            n,
            f,
            cap,
            scale: LabelScale::new(n, f),
            input,
            state: None,
            history: Vec::new(),
            initial_triples: Vec::new(),
            exchanges: Vec::new(),
            gc: GradecastRound::new(n, f, GradecastFilter::accept_all()),
            sgc: None,
            round: None,
            pending: Payload::new(),
        }
    }

    fn current(&self) -> &LogfState {
        self.state.as_ref().expect("initial round done")
    }
}

impl Process for LogfProcess {
    fn send(&mut self, at: &SubRound) -> Outbox {
        match at.phase {
            Phase::GcLead => broadcast(self.n, vec![leader_send(self.id, &self.input)]),
            Phase::SgcLead => {
                let state = self.current();
                let valid = self.scale.grid(state.round + 1);
                let filter = SetGcFilter::ByLabel {
                    safe: state.safe.clone(),
                    valid,
                };
                let lead = sgc_leader_send(self.id, &state.values, Some(state.label));
                self.sgc = Some(SetGradecastRound::new(self.n, self.f, self.cap, filter, (0..self.n).collect()));
                broadcast(self.n, vec![lead])
            }
            Phase::Exchange => {
                let round = self.round.as_ref().expect("graded");
                let mut out = Outbox::new();
                for (k, members) in &round.members {
                    let set: Vec<Element> = round.u2.get(k).into_iter().flatten().cloned().collect();
                    for &to in members {
                        out.entry(to).or_default().push(Record::Cx { target: *k, set: set.clone() });
                    }
                }
                out
            }
            Phase::GcEcho | Phase::GcConfirm | Phase::SgcEcho | Phase::SgcConfirm => {
                broadcast(self.n, std::mem::take(&mut self.pending))
            }
        }
    }

    fn deliver(&mut self, at: &SubRound, inbox: &Inbox) {
        match at.phase {
            Phase::GcLead => self.pending = self.gc.on_lead(inbox),
            Phase::GcEcho => self.pending = self.gc.on_echo(inbox),
            Phase::GcConfirm => {
                self.initial_triples = self.gc.on_confirm(inbox);
                let s = logf_initial_round(&self.initial_triples, &self.scale);
                self.history.push(s.clone());
                self.state = Some(s);
            }
            Phase::SgcLead => self.pending = self.sgc.as_mut().expect("round started").on_lead(inbox),
            Phase::SgcEcho => self.pending = self.sgc.as_mut().expect("round started").on_echo(inbox),
            Phase::SgcConfirm => {
                let sgc = self.sgc.take().expect("round started");
                let scored = sgc.on_confirm(inbox);
                let labels: BTreeMap<ProcessId, Label> = sgc
                    .leader_messages()
                    .iter()
                    .filter_map(|(&j, (label, _))| label.map(|k| (j, k)))
                    .collect();
                self.round = Some(logf_prepare(self.current(), &scored, &labels, &self.scale));
            }
            Phase::Exchange => {
                let round = self.round.take().expect("graded");
                let state = self.current();
                let empty = BTreeSet::new();
                let u1 = round.u1.get(&state.label).unwrap_or(&empty);
                let ex = collect_exchange(inbox, state.label, u1, self.cap);
                let next = logf_iteration(state, &round, &ex, &self.scale);
                self.exchanges.push(ex);
                self.history.push(next.clone());
                self.state = Some(next);
            }
        }
    }

    fn admissible_from(&self, _sender: ProcessId) -> Vec<Element> {
        self.state
            .as_ref()
            .and_then(|s| s.safe.get(&s.label))
            .map(|set| set.iter().cloned().collect())
            .unwrap_or_default()
    }
}
