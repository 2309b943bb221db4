//! Set gradecast: a leader gradecasts a set of distinct values and every
//! value is graded on its own. An optional label rides along for the
//! classifier algorithm.
//!
//! Admission is judged against the safe set for the instance leader (or for
//! the label the leader attached), at every step.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::label::Label;
use crate::lattice::{Element, ProcessId};
use crate::protocol::{first_per_key, well_formed_set, Inbox, Record};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetGcFilter {
    /// Safe set per leader id; unlabeled instances only.
    ByLeader(BTreeMap<ProcessId, BTreeSet<Element>>),
    /// Safe set per label; only labels in `valid` are accepted at all.
    ByLabel {
        safe: BTreeMap<Label, BTreeSet<Element>>,
        valid: BTreeSet<Label>,
    },
}

impl SetGcFilter {
    pub fn admits_label(&self, label: Option<Label>) -> bool {
        match (self, label) {
            (SetGcFilter::ByLeader(_), None) => true,
            (SetGcFilter::ByLabel { valid, .. }, Some(k)) => valid.contains(&k),
            _ => false,
        }
    }

    pub fn safe_for(&self, leader: ProcessId, label: Option<Label>) -> Option<&BTreeSet<Element>> {
        match (self, label) {
            (SetGcFilter::ByLeader(rows), None) => rows.get(&leader),
            (SetGcFilter::ByLabel { safe, valid }, Some(k)) if valid.contains(&k) => safe.get(&k),
            _ => None,
        }
    }

    pub fn admits(&self, leader: ProcessId, label: Option<Label>, v: &Element) -> bool {
        self.safe_for(leader, label).is_some_and(|s| s.contains(v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScoredSet {
    pub leader: ProcessId,
    pub label: Option<Label>,
    pub scores: BTreeMap<Element, u8>,
}

impl ScoredSet {
    pub fn at_least(&self, score: u8) -> impl Iterator<Item = &Element> {
        self.scores
            .iter()
            .filter(move |(_, &c)| c >= score)
            .map(|(v, _)| v)
    }
}

/// Distinct-sender counts per value for one instance and label.
pub type SetTally = BTreeMap<Element, usize>;

pub fn sgc_leader_send(leader: ProcessId, values: &BTreeSet<Element>, label: Option<Label>) -> Record {
    Record::Sgc {
        leader,
        step: 1,
        set: values.iter().cloned().collect(),
        label,
    }
}

/// Step 2: forward the leader's set with inadmissible values removed.
pub fn sgc_echo(
    leader: ProcessId,
    received: Option<(Option<Label>, &[Element])>,
    filter: &SetGcFilter,
) -> Option<Record> {
    let (label, set) = received?;
    Some(Record::Sgc {
        leader,
        step: 2,
        set: set
            .iter()
            .filter(|v| filter.admits(leader, label, v))
            .cloned()
            .collect(),
        label,
    })
}

/// Values echoed by at least `n - f` distinct senders.
pub fn sgc_confirm(tally: &SetTally, n: usize, f: usize) -> Vec<Element> {
    tally
        .iter()
        .filter(|(_, &c)| c >= n - f)
        .map(|(v, _)| v.clone())
        .collect()
}

pub fn sgc_grade(tally: &SetTally, n: usize, f: usize, leader: ProcessId, label: Option<Label>) -> ScoredSet {
    let scores = tally
        .iter()
        .filter_map(|(v, &c)| {
            let s = if c >= n - f {
                2
            } else if c > f {
                1
            } else {
                return None;
            };
            Some((v.clone(), s))
        })
        .collect();
    ScoredSet {
        leader,
        label,
        scores,
    }
}

/// All set-gradecast instances at one process for one round.
#[derive(Clone, Debug)]
pub struct SetGradecastRound {
    pub n: usize,
    pub f: usize,
    /// Wire sets larger than this are malformed.
    pub cap: usize,
    pub filter: SetGcFilter,
    /// Leaders whose instances exist this round; others are ignored.
    pub leaders: BTreeSet<ProcessId>,
    from_leader: BTreeMap<ProcessId, (Option<Label>, Vec<Element>)>,
}

type Keyed<'a> = (ProcessId, (ProcessId, Option<Label>, &'a [Element]));

impl SetGradecastRound {
    pub fn new(n: usize, f: usize, cap: usize, filter: SetGcFilter, leaders: BTreeSet<ProcessId>) -> Self {
        SetGradecastRound {
            n,
            f,
            cap,
            filter,
            leaders,
            from_leader: BTreeMap::new(),
        }
    }

    /// Leader messages accepted in step 1, with the label each carried.
    pub fn leader_messages(&self) -> &BTreeMap<ProcessId, (Option<Label>, Vec<Element>)> {
        &self.from_leader
    }

    fn accepted<'a>(&self, inbox: &'a Inbox, want: u8) -> Vec<Keyed<'a>> {
        first_per_key(inbox, |from, rec| match rec {
            Record::Sgc {
                leader,
                step,
                set,
                label,
            } if *step == want && (want != 1 || *leader == from) => Some((*leader, (*leader, *label, set.as_slice()))),
            _ => None,
        })
        .into_iter()
        .filter(|(_, (leader, label, set))| {
            self.leaders.contains(leader) && self.filter.admits_label(*label) && well_formed_set(set, self.cap)
        })
        .collect()
    }

    pub fn on_lead(&mut self, inbox: &Inbox) -> Vec<Record> {
        self.from_leader = self
            .accepted(inbox, 1)
            .into_iter()
            .map(|(_, (leader, label, set))| (leader, (label, set.to_vec())))
            .collect();
        self.from_leader
            .iter()
            .filter_map(|(&leader, (label, set))| sgc_echo(leader, Some((*label, set)), &self.filter))
            .collect()
    }

    fn tallies(&self, inbox: &Inbox, step: u8) -> BTreeMap<ProcessId, BTreeMap<Option<Label>, SetTally>> {
        let mut out: BTreeMap<ProcessId, BTreeMap<Option<Label>, SetTally>> = BTreeMap::new();
        for (_, (leader, label, set)) in self.accepted(inbox, step) {
            let t = out.entry(leader).or_default().entry(label).or_default();
            let Some(safe) = self.filter.safe_for(leader, label) else {
                continue;
            };
            for v in set.iter().filter(|v| safe.contains(v)) {
                match t.get_mut(v) {
                    Some(c) => *c += 1,
                    None => {
                        t.insert(v.clone(), 1);
                    }
                }
            }
        }
        out
    }

    /// Consume echoes; returns one confirmation per instance heard of.
    pub fn on_echo(&mut self, inbox: &Inbox) -> Vec<Record> {
        let tallies = self.tallies(inbox, 2);
        let mut leaders: BTreeSet<ProcessId> = tallies.keys().copied().collect();
        leaders.extend(self.from_leader.keys());
        leaders
            .into_iter()
            .map(|leader| {
                let passing: Vec<(Option<Label>, Vec<Element>)> = tallies
                    .get(&leader)
                    .into_iter()
                    .flatten()
                    .map(|(label, t)| (*label, sgc_confirm(t, self.n, self.f)))
                    .filter(|(_, set)| !set.is_empty())
                    .collect();
                let (label, set) = match passing.into_iter().next() {
                    Some(p) => p,
                    None => {
                        let label = self
                            .from_leader
                            .get(&leader)
                            .map(|(l, _)| *l)
                            .or_else(|| tallies.get(&leader).and_then(|m| m.keys().next().copied()))
                            .flatten();
                        (label, Vec::new())
                    }
                };
                Record::Sgc {
                    leader,
                    step: 3,
                    set,
                    label,
                }
            })
            .collect()
    }

    /// Consume confirmations; returns the nonempty graded sets.
    pub fn on_confirm(&self, inbox: &Inbox) -> Vec<ScoredSet> {
        self.tallies(inbox, 3)
            .into_iter()
            .flat_map(|(leader, by_label)| {
                by_label
                    .into_iter()
                    .map(move |(label, t)| sgc_grade(&t, self.n, self.f, leader, label))
            })
            .filter(|s| !s.scores.is_empty())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Element {
        s.parse().unwrap()
    }

    fn tally(entries: &[(&str, usize)]) -> SetTally {
        entries.iter().map(|(v, c)| (e(v), *c)).collect()
    }

    #[test]
    fn echo_drops_invalid_values() {
        let filter = SetGcFilter::ByLeader(BTreeMap::from([(2, BTreeSet::from([e("{0:0}")]))]));
        let set = [e("{0:0}"), e("{9:0}")];
        let rec = sgc_echo(2, Some((None, &set)), &filter).unwrap();
        assert!(matches!(rec, Record::Sgc { set, .. } if set == vec![e("{0:0}")]));
        assert!(sgc_echo(2, None, &filter).is_none());
    }

    #[test]
    fn confirm_keeps_every_value_over_threshold() {
        let t = tally(&[("{0:0}", 3), ("{1:0}", 3), ("{2:0}", 2)]);
        assert_eq!(sgc_confirm(&t, 4, 1), vec![e("{0:0}"), e("{1:0}")]);
        assert!(sgc_confirm(&tally(&[("{0:0}", 2)]), 4, 1).is_empty());
    }

    #[test]
    fn grade_scores_each_value() {
        let s = sgc_grade(&tally(&[("{0:0}", 3), ("{1:0}", 2), ("{2:0}", 1)]), 4, 1, 0, None);
        assert_eq!(s.scores, BTreeMap::from([(e("{0:0}"), 2), (e("{1:0}"), 1)]));
    }

    #[test]
    fn duplicate_sets_are_ignored() {
        let filter = SetGcFilter::ByLeader((0..4).map(|j| (j, BTreeSet::from([e("{0:0}")]))).collect());
        let mut round = SetGradecastRound::new(4, 1, 8, filter, BTreeSet::from([0]));
        let inbox = Inbox::from([(
            0,
            vec![Record::Sgc {
                leader: 0,
                step: 1,
                set: vec![e("{0:0}"), e("{0:0}")],
                label: None,
            }],
        )]);
        assert!(round.on_lead(&inbox).is_empty());
    }

    #[test]
    fn label_filter_rejects_unknown_labels() {
        let filter = SetGcFilter::ByLabel {
            safe: BTreeMap::from([(24, BTreeSet::from([e("{0:0}")]))]),
            valid: BTreeSet::from([24]),
        };
        assert!(filter.admits(5, Some(24), &e("{0:0}")));
        assert!(!filter.admits(5, Some(25), &e("{0:0}")));
        assert!(!filter.admits(5, None, &e("{0:0}")));
    }
}
