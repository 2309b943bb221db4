//! Three-step gradecast with safe-lattice and bad-set filtering.
//!
//! The free functions are the per-instance steps. [`GradecastRound`] runs
//! all `n` instances at one process for one algorithm round, which is how
//! both the simulator and the exhaustive search drive it.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::lattice::{Element, GeneratingSet, ProcessId};
use crate::protocol::{first_per_key, Inbox, Record};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradecastFilter {
    pub safe_generators: GeneratingSet,
    pub bad_set: BTreeSet<ProcessId>,
    pub accept_all: bool,
}

impl GradecastFilter {
    pub fn accept_all() -> Self {
        GradecastFilter {
            accept_all: true,
            ..Default::default()
        }
    }

    pub fn admits_sender(&self, sender: ProcessId) -> bool {
        !self.bad_set.contains(&sender)
    }

    pub fn admits_value(&self, v: &Element) -> bool {
        self.accept_all || self.safe_generators.contains(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradeTriple {
    pub leader: ProcessId,
    pub value: Option<Element>,
    pub score: u8,
}

impl GradeTriple {
    pub fn none(leader: ProcessId) -> Self {
        GradeTriple {
            leader,
            value: None,
            score: 0,
        }
    }
}

/// Distinct-sender counts per value for one instance and one step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EchoTally {
    pub occurrences: BTreeMap<Element, usize>,
}

impl EchoTally {
    pub fn add(&mut self, v: &Element) {
        *self.occurrences.entry(v.clone()).or_default() += 1;
    }

    /// Most frequent value; ties go to the smallest in canonical order.
    pub fn majority(&self) -> Option<(&Element, usize)> {
        let mut best: Option<(&Element, usize)> = None;
        for (v, &c) in &self.occurrences {
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((v, c));
            }
        }
        best
    }
}

pub fn leader_send(leader: ProcessId, v: &Element) -> Record {
    Record::Gc {
        leader,
        step: 1,
        value: v.clone(),
    }
}

/// Step 2: forward the leader's value if the filter admits it.
pub fn echo_step(
    leader: ProcessId,
    received: Option<&Element>,
    filter: &GradecastFilter,
) -> Option<Record> {
    let v = received?;
    if !filter.admits_sender(leader) || !filter.admits_value(v) {
        return None;
    }
    Some(Record::Gc {
        leader,
        step: 2,
        value: v.clone(),
    })
}

/// Step 3: confirm the majority echo when it reaches `n - f`.
pub fn confirm_step(leader: ProcessId, tally: &EchoTally, n: usize, f: usize) -> Option<Record> {
    let (maj, count) = tally.majority()?;
    (count >= n - f).then(|| Record::Gc {
        leader,
        step: 3,
        value: maj.clone(),
    })
}

pub fn grade(tally: &EchoTally, n: usize, f: usize, leader: ProcessId) -> GradeTriple {
    match tally.majority() {
        Some((maj, c)) if c >= n - f => GradeTriple {
            leader,
            value: Some(maj.clone()),
            score: 2,
        },
        Some((maj, c)) if c > f => GradeTriple {
            leader,
            value: Some(maj.clone()),
            score: 1,
        },
        _ => GradeTriple::none(leader),
    }
}

/// All `n` gradecast instances at one process for one round.
#[derive(Clone, Debug)]
pub struct GradecastRound {
    pub n: usize,
    pub f: usize,
    pub filter: GradecastFilter,
    from_leader: BTreeMap<ProcessId, Element>,
}

impl GradecastRound {
    pub fn new(n: usize, f: usize, filter: GradecastFilter) -> Self {
        GradecastRound {
            n,
            f,
            filter,
            from_leader: BTreeMap::new(),
        }
    }

    /// Admitted `(sender, leader, value)` triples of one step, one per
    /// sender and instance.
    fn admitted<'a>(&self, inbox: &'a Inbox, want: u8) -> Vec<(ProcessId, (ProcessId, &'a Element))> {
        first_per_key(inbox, |from, rec| match rec {
            Record::Gc {
                leader,
                step,
                value,
            } if *step == want && (want != 1 || *leader == from) && *leader < self.n => {
                Some((*leader, (*leader, value)))
            }
            _ => None,
        })
        .into_iter()
        .filter(|(from, (_, v))| self.filter.admits_sender(*from) && self.filter.admits_value(v))
        .collect()
    }

    /// Consume leader messages; returns this process's echoes.
    pub fn on_lead(&mut self, inbox: &Inbox) -> Vec<Record> {
        self.from_leader = self
            .admitted(inbox, 1)
            .into_iter()
            .map(|(_, (leader, v))| (leader, v.clone()))
            .collect();
        self.from_leader
            .iter()
            .filter_map(|(&leader, v)| echo_step(leader, Some(v), &self.filter))
            .collect()
    }

    fn tallies(&self, inbox: &Inbox, step: u8) -> BTreeMap<ProcessId, EchoTally> {
        let mut out: BTreeMap<ProcessId, EchoTally> = BTreeMap::new();
        for (_, (leader, v)) in self.admitted(inbox, step) {
            out.entry(leader).or_default().add(v);
        }
        out
    }

    /// Consume echoes; returns this process's confirmations.
    pub fn on_echo(&mut self, inbox: &Inbox) -> Vec<Record> {
        self.tallies(inbox, 2)
            .iter()
            .filter_map(|(&leader, t)| confirm_step(leader, t, self.n, self.f))
            .collect()
    }

    /// Consume confirmations; returns one triple per leader `0..n`.
    pub fn on_confirm(&self, inbox: &Inbox) -> Vec<GradeTriple> {
        let tallies = self.tallies(inbox, 3);
        (0..self.n)
            .map(|leader| match tallies.get(&leader) {
                Some(t) => grade(t, self.n, self.f, leader),
                None => GradeTriple::none(leader),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Element {
        s.parse().unwrap()
    }

    fn tally(entries: &[(&str, usize)]) -> EchoTally {
        EchoTally {
            occurrences: entries.iter().map(|(v, c)| (e(v), *c)).collect(),
        }
    }

    #[test]
    fn leader_message_carries_value() {
        assert_eq!(
            leader_send(1, &e("{0:0}")),
            Record::Gc {
                leader: 1,
                step: 1,
                value: e("{0:0}")
            }
        );
        assert!(matches!(leader_send(1, &Element::bottom()), Record::Gc { value, .. } if value.is_bottom()));
    }

    #[test]
    fn echo_respects_filter() {
        let filter = GradecastFilter {
            safe_generators: GeneratingSet::new([e("{0:0}")]),
            bad_set: BTreeSet::from([2]),
            accept_all: false,
        };
        assert!(echo_step(1, Some(&e("{0:0}")), &filter).is_some());
        assert!(echo_step(1, Some(&e("{9:0}")), &filter).is_none());
        assert!(echo_step(2, Some(&e("{0:0}")), &filter).is_none());
        assert!(echo_step(1, None, &filter).is_none());
    }

    #[test]
    fn confirm_threshold() {
        assert!(confirm_step(0, &tally(&[("{0:0}", 3)]), 4, 1).is_some());
        assert!(confirm_step(0, &tally(&[("{0:0}", 2), ("{1:0}", 1)]), 4, 1).is_none());
        assert!(confirm_step(0, &EchoTally::default(), 4, 1).is_none());
    }

    #[test]
    fn grading_thresholds() {
        let g = grade(&tally(&[("{0:0}", 3)]), 4, 1, 0);
        assert_eq!((g.value, g.score), (Some(e("{0:0}")), 2));
        let g = grade(&tally(&[("{0:0}", 2)]), 4, 1, 0);
        assert_eq!((g.value, g.score), (Some(e("{0:0}")), 1));
        let g = grade(&tally(&[("{0:0}", 1)]), 4, 1, 0);
        assert_eq!((g.value, g.score), (None, 0));
    }

    #[test]
    fn majority_ties_pick_smallest() {
        let t = tally(&[("{1:0}", 2), ("{0:0}", 2)]);
        assert_eq!(t.majority().unwrap().0, &e("{0:0}"));
    }
}
