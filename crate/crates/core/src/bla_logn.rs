//! Lattice agreement in `3 log n + 3` sub-rounds by id-based group halving.
//!
//! Deviation from the textbook recursion: value sets start as the values
//! graded 2 in the initial gradecast, and masters keep their previous values
//! when absorbing `U1`. Without both, a master whose slaves are silent ends
//! with no value at all.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::gradecast::{leader_send, GradeTriple, GradecastFilter, GradecastRound};
use crate::label::ceil_log2;
use crate::lattice::{join_all, Element, ProcessId};
use crate::protocol::{broadcast, Inbox, Outbox, Payload, Phase, Process, SubRound};
use crate::setgradecast::{sgc_leader_send, ScoredSet, SetGcFilter, SetGradecastRound};

/// Half-open id interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Group {
    pub lo: ProcessId,
    pub hi: ProcessId,
}

impl Group {
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, id: ProcessId) -> bool {
        self.lo <= id && id < self.hi
    }

    pub fn ids(&self) -> std::ops::Range<ProcessId> {
        self.lo..self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GroupSplit {
    pub group: Group,
    pub slaves: Group,
    pub masters: Group,
}

/// Lower `ceil(|G|/2)` ids are slaves; singletons do not split.
pub fn split(group: Group) -> Option<GroupSplit> {
    if group.len() < 2 {
        return None;
    }
    let mid = group.lo + group.len().div_ceil(2);
    Some(GroupSplit {
        group,
        slaves: Group { lo: group.lo, hi: mid },
        masters: Group { lo: mid, hi: group.hi },
    })
}

pub fn iterations(n: usize) -> usize {
    ceil_log2(n) as usize
}

/// Groups at the start of iteration `r` (1-based); `r = iterations + 1`
/// gives the final groups.
pub fn groups_at(n: usize, r: usize) -> Vec<Group> {
    let mut groups = vec![Group { lo: 0, hi: n }];
    for _ in 1..r {
        groups = groups
            .into_iter()
            .flat_map(|g| match split(g) {
                Some(s) => vec![s.slaves, s.masters],
                None => vec![g],
            })
            .collect();
    }
    groups
}

pub fn splits_at(n: usize, r: usize) -> Vec<GroupSplit> {
    groups_at(n, r).into_iter().filter_map(split).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LognState {
    pub values: BTreeSet<Element>,
    /// `safe[j]`: values admitted from process `j`.
    pub safe: Vec<BTreeSet<Element>>,
    pub group: Group,
    /// Completed iterations.
    pub round: usize,
}

/// Build the safe array and value set from the initial gradecast.
pub fn logn_initial_round(triples: &[GradeTriple], n: usize) -> LognState {
    let scored = |min: u8| -> BTreeSet<Element> {
        triples
            .iter()
            .filter(|t| t.score >= min)
            .filter_map(|t| t.value.clone())
            .collect()
    };
    let one = scored(1);
    LognState {
        values: scored(2),
        safe: vec![one; n],
        group: Group { lo: 0, hi: n },
        round: 0,
    }
}

/// Apply one iteration's slave set-gradecasts at process `me`.
pub fn logn_iteration(state: &LognState, me: ProcessId, scored: &[ScoredSet]) -> LognState {
    let n = state.safe.len();
    let r = state.round + 1;
    let mut next = state.clone();
    next.round = r;
    for sp in splits_at(n, r) {
        let mut u1 = BTreeSet::new();
        let mut u2 = BTreeSet::new();
        for s in scored.iter().filter(|s| sp.slaves.contains(s.leader) && s.label.is_none()) {
            u1.extend(s.at_least(1).cloned());
            u2.extend(s.at_least(2).cloned());
        }
        for j in sp.slaves.ids() {
            next.safe[j] = u2.clone();
        }
        for j in sp.masters.ids() {
            next.safe[j].extend(u1.iter().cloned());
        }
        if sp.slaves.contains(me) {
            next.values = u2;
            next.group = sp.slaves;
        } else if sp.masters.contains(me) {
            next.values.extend(u1);
            next.group = sp.masters;
        }
    }
    next
}

pub fn logn_output(state: &LognState) -> Element {
    join_all(&state.values)
}

#[derive(Clone, Debug)]
pub struct LognProcess {
    pub id: ProcessId,
    pub n: usize,
    pub f: usize,
    pub cap: usize,
    pub input: Element,
    pub state: Option<LognState>,
    /// State after the initial round and after every iteration.
    pub history: Vec<LognState>,
    /// Grade triples of the initial gradecast.
    pub initial_triples: Vec<GradeTriple>,
    gc: GradecastRound,
    sgc: Option<SetGradecastRound>,
    pending: Payload,
}

impl LognProcess {
    pub fn new(id: ProcessId, n: usize, f: usize, input: Element, cap: usize) -> Self {
        LognProcess {
            id,
            n,
            f,
            cap,
            input,
            state: None,
            history: Vec::new(),
            initial_triples: Vec::new(),
            gc: GradecastRound::new(n, f, GradecastFilter::accept_all()),
            sgc: None,
            pending: Payload::new(),
        }
    }
}

impl Process for LognProcess {
    fn send(&mut self, at: &SubRound) -> Outbox {
        match at.phase {
            Phase::GcLead => broadcast(self.n, vec![leader_send(self.id, &self.input)]),
            Phase::SgcLead => {
                let state = self.state.as_ref().expect("initial round done");
                let r = state.round + 1;
                let slaves: BTreeSet<ProcessId> = splits_at(self.n, r).iter().flat_map(|s| s.slaves.ids()).collect();
                let rows: BTreeMap<ProcessId, BTreeSet<Element>> = state.safe.iter().cloned().enumerate().collect();
                let lead = slaves.contains(&self.id);
                self.sgc = Some(SetGradecastRound::new(
                    self.n,
                    self.f,
                    self.cap,
                    SetGcFilter::ByLeader(rows),
                    slaves,
                ));
                if lead {
                    broadcast(self.n, vec![sgc_leader_send(self.id, &state.values, None)])
                } else {
                    Outbox::new()
                }
            }
            Phase::GcEcho | Phase::GcConfirm | Phase::SgcEcho | Phase::SgcConfirm => {
                broadcast(self.n, std::mem::take(&mut self.pending))
            }
            Phase::Exchange => unreachable!("logn has no exchange sub-round"),
        }
    }

    fn deliver(&mut self, at: &SubRound, inbox: &Inbox) {
        match at.phase {
            Phase::GcLead => self.pending = self.gc.on_lead(inbox),
            Phase::GcEcho => self.pending = self.gc.on_echo(inbox),
            Phase::GcConfirm => {
                self.initial_triples = self.gc.on_confirm(inbox);
                let s = logn_initial_round(&self.initial_triples, self.n);
                self.history.push(s.clone());
                self.state = Some(s);
            }
            Phase::SgcLead => self.pending = self.sgc.as_mut().expect("round started").on_lead(inbox),
            Phase::SgcEcho => self.pending = self.sgc.as_mut().expect("round started").on_echo(inbox),
            Phase::SgcConfirm => {
                let scored = self.sgc.take().expect("round started").on_confirm(inbox);
                let next = logn_iteration(self.state.as_ref().expect("initial round done"), self.id, &scored);
                self.history.push(next.clone());
                self.state = Some(next);
            }
            Phase::Exchange => unreachable!("logn has no exchange sub-round"),
        }
    }

    fn admissible_from(&self, sender: ProcessId) -> Vec<Element> {
        self.state
            .as_ref()
            .map(|s| s.safe[sender].iter().cloned().collect())
            .unwrap_or_default()
    }
}
