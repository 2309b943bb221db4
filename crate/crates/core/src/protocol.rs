//! Wire records, inboxes and the per-process step interface shared by the
//! three algorithms.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::lattice::{Element, ProcessId};
use crate::label::Label;

/// One per-instance message. Several records travel in one envelope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Gc {
        leader: ProcessId,
        step: u8,
        value: Element,
    },
    Sgc {
        leader: ProcessId,
        step: u8,
        set: Vec<Element>,
        label: Option<Label>,
    },
    Cx {
        target: Label,
        set: Vec<Element>,
    },
}

impl Record {
    pub fn elements(&self) -> Box<dyn Iterator<Item = &Element> + '_> {
        match self {
            Record::Gc { value, .. } => Box::new(std::iter::once(value)),
            Record::Sgc { set, .. } | Record::Cx { set, .. } => Box::new(set.iter()),
        }
    }
}

pub type Payload = Vec<Record>;

/// Records received in one sub-round, keyed by sender.
pub type Inbox = BTreeMap<ProcessId, Payload>;

/// Records to send in one sub-round, keyed by recipient.
pub type Outbox = BTreeMap<ProcessId, Payload>;

pub fn broadcast(n: usize, records: Payload) -> Outbox {
    if records.is_empty() {
        return Outbox::new();
    }
    (0..n).map(|to| (to, records.clone())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    GcLead,
    GcEcho,
    GcConfirm,
    SgcLead,
    SgcEcho,
    SgcConfirm,
    Exchange,
}

impl Phase {
    pub fn gradecast_step(self) -> Option<u8> {
        match self {
            Phase::GcLead | Phase::SgcLead => Some(1),
            Phase::GcEcho | Phase::SgcEcho => Some(2),
            Phase::GcConfirm | Phase::SgcConfirm => Some(3),
            Phase::Exchange => None,
        }
    }
}

/// Position in the schedule. `index` counts sub-rounds from 1; `outer` is
/// the algorithm round (sqrtf counts from 1, logn/logf use 0 for the
/// initial gradecast round).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubRound {
    pub index: usize,
    pub outer: usize,
    pub phase: Phase,
}

pub trait Process {
    fn send(&mut self, at: &SubRound) -> Outbox;
    fn deliver(&mut self, at: &SubRound, inbox: &Inbox);
    /// Values this process would currently admit from `sender`; used by
    /// adversaries that stay inside the receivers' safe sets.
    fn admissible_from(&self, sender: ProcessId) -> Vec<Element>;
}

/// First record per `(sender, key)` wins; later duplicates are ignored.
pub(crate) fn first_per_key<'a, K: Ord, T>(
    inbox: &'a Inbox,
    mut pick: impl FnMut(ProcessId, &'a Record) -> Option<(K, T)>,
) -> Vec<(ProcessId, T)> {
    let mut out = Vec::new();
    for (&from, payload) in inbox {
        let mut seen = BTreeSet::new();
        for rec in payload {
            if let Some((key, item)) = pick(from, rec) {
                if seen.insert(key) {
                    out.push((from, item));
                }
            }
        }
    }
    out
}

/// A wire set is well formed when it has no duplicates and fits the universe.
pub fn well_formed_set(set: &[Element], cap: usize) -> bool {
    if set.len() > cap {
        return false;
    }
    // Honest senders ship sorted sets, so the common case is a linear scan.
    if set.windows(2).all(|w| w[0] < w[1]) {
        return true;
    }
    let distinct: BTreeSet<&Element> = set.iter().collect();
    distinct.len() == set.len()
}
