//! Exhaustive adversary search over one gradecast or set-gradecast
//! instance with n = 4, f = 1: processes 0..3 are correct and process 3 is
//! Byzantine. Every sub-round the adversary picks, per correct recipient,
//! one symbol from a small alphabet (including silence).

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use bla_core::gradecast::{leader_send, GradeTriple, GradecastFilter, GradecastRound};
use bla_core::lattice::{Element, GeneratingSet, Tag};
use bla_core::protocol::{Inbox, Record};
use bla_core::setgradecast::{sgc_leader_send, SetGcFilter, SetGradecastRound};

pub const N: usize = 4;
pub const F: usize = 1;
pub const BYZ: usize = 3;
pub const CORRECT: [usize; 3] = [0, 1, 2];

pub fn val(k: usize) -> Element {
    Element::singleton(Tag::new(k, 0))
}

/// `a`, `b` and `c`; silence is the fourth symbol.
pub fn alphabet() -> Vec<Element> {
    (0..3).map(val).collect()
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub transcripts: usize,
    pub violations: usize,
    pub first: Option<String>,
}

impl Outcome {
    fn record(&mut self, broken: Option<String>) {
        self.transcripts += 1;
        if let Some(w) = broken {
            self.violations += 1;
            self.first.get_or_insert(w);
        }
    }

    pub fn absorb(&mut self, other: Outcome) {
        self.transcripts += other.transcripts;
        self.violations += other.violations;
        if self.first.is_none() {
            self.first = other.first;
        }
    }
}

/// Every assignment of a symbol (`None` = silence) to each correct recipient.
fn choices<T: Clone>(symbols: &[T]) -> Vec<[Option<T>; 3]> {
    let mut opts: Vec<Option<T>> = vec![None];
    opts.extend(symbols.iter().cloned().map(Some));
    let mut out = Vec::new();
    for x in &opts {
        for y in &opts {
            for z in &opts {
                out.push([x.clone(), y.clone(), z.clone()]);
            }
        }
    }
    out
}

/// A correct recipient's inbox: every correct broadcast plus the
/// adversary's pick for that recipient.
fn inbox_for(correct_out: &BTreeMap<usize, Vec<Record>>, byz: Option<Record>) -> Inbox {
    let mut inbox: Inbox = correct_out
        .iter()
        .filter(|(_, recs)| !recs.is_empty())
        .map(|(&j, recs)| (j, recs.clone()))
        .collect();
    if let Some(r) = byz {
        inbox.insert(BYZ, vec![r]);
    }
    inbox
}

pub fn restrictive_filter() -> GradecastFilter {
    GradecastFilter {
        safe_generators: GeneratingSet::new([val(0), val(1)]),
        bad_set: BTreeSet::new(),
        accept_all: false,
    }
}

/// Gradecast properties for the instance of `leader`. A correct leader
/// sends `a`. `filters[i]` is the filter of correct process `i`.
pub fn search_gradecast(leader: usize, filters: &[GradecastFilter; 3]) -> Outcome {
    let alpha = alphabet();
    let mut out = Outcome::default();
    let lead_choices: Vec<[Option<Element>; 3]> = if leader == BYZ {
        choices(&alpha)
    } else {
        vec![[None, None, None]]
    };
    let step_choices = choices(&alpha);
    for c1 in &lead_choices {
        let mut procs: Vec<GradecastRound> = filters.iter().map(|f| GradecastRound::new(N, F, f.clone())).collect();
        let mut lead_out = BTreeMap::new();
        if leader != BYZ {
            lead_out.insert(leader, vec![leader_send(leader, &val(0))]);
        }
        let echoes: BTreeMap<usize, Vec<Record>> = CORRECT
            .iter()
            .map(|&i| {
                let byz = c1[i].clone().map(|v| leader_send(BYZ, &v));
                (i, procs[i].on_lead(&inbox_for(&lead_out, byz)))
            })
            .collect();
        for c2 in &step_choices {
            let mut procs2 = procs.clone();
            let confirms: BTreeMap<usize, Vec<Record>> = CORRECT
                .iter()
                .map(|&i| {
                    let byz = c2[i].clone().map(|value| Record::Gc { leader, step: 2, value });
                    (i, procs2[i].on_echo(&inbox_for(&echoes, byz)))
                })
                .collect();
            for c3 in &step_choices {
                let grades: Vec<GradeTriple> = CORRECT
                    .iter()
                    .map(|&i| {
                        let byz = c3[i].clone().map(|value| Record::Gc { leader, step: 3, value });
                        procs2[i].on_confirm(&inbox_for(&confirms, byz))[leader].clone()
                    })
                    .collect();
                let broken = gradecast_violation(leader, filters, &grades).map(|what| {
                    format!("{what}: leader={leader} lead={c1:?} echo={c2:?} confirm={c3:?} grades={grades:?}")
                });
                out.record(broken);
            }
        }
    }
    out
}

fn gradecast_violation(leader: usize, filters: &[GradecastFilter; 3], grades: &[GradeTriple]) -> Option<&'static str> {
    for (a, ga) in grades.iter().enumerate() {
        for gb in &grades[a + 1..] {
            if ga.score > 0 && gb.score > 0 && ga.value != gb.value {
                return Some("property 2");
            }
            if ga.score.abs_diff(gb.score) > 1 {
                return Some("property 3");
            }
        }
    }
    let admitted = filters
        .iter()
        .all(|f| f.admits_value(&val(0)) && f.admits_sender(leader));
    if leader != BYZ && admitted && grades.iter().any(|g| g.score != 2 || g.value != Some(val(0))) {
        return Some("property 1");
    }
    None
}

/// Set alphabet: `[a]`, `[a, b]`, `[c]`.
pub fn set_alphabet() -> Vec<Vec<Element>> {
    vec![vec![val(0)], vec![val(0), val(1)], vec![val(2)]]
}

/// Set gradecast properties per value for the instance of `leader`. A
/// correct leader sends `{a, b}`; every correct process considers `safe`
/// admissible from the leader.
pub fn search_set_gradecast(leader: usize, safe: &BTreeSet<Element>) -> Outcome {
    let sets = set_alphabet();
    let mut out = Outcome::default();
    let filter = SetGcFilter::ByLeader(BTreeMap::from([(leader, safe.clone())]));
    let lead_choices: Vec<[Option<Vec<Element>>; 3]> = if leader == BYZ {
        choices(&sets)
    } else {
        vec![[None, None, None]]
    };
    let step_choices = choices(&sets);
    let own: BTreeSet<Element> = [val(0), val(1)].into();
    for c1 in &lead_choices {
        let mut procs: Vec<SetGradecastRound> = CORRECT
            .iter()
            .map(|_| SetGradecastRound::new(N, F, 8, filter.clone(), BTreeSet::from([leader])))
            .collect();
        let mut lead_out = BTreeMap::new();
        if leader != BYZ {
            lead_out.insert(leader, vec![sgc_leader_send(leader, &own, None)]);
        }
        let echoes: BTreeMap<usize, Vec<Record>> = CORRECT
            .iter()
            .map(|&i| {
                let byz = c1[i].clone().map(|set| Record::Sgc { leader: BYZ, step: 1, set, label: None });
                (i, procs[i].on_lead(&inbox_for(&lead_out, byz)))
            })
            .collect();
        for c2 in &step_choices {
            let mut procs2 = procs.clone();
            let confirms: BTreeMap<usize, Vec<Record>> = CORRECT
                .iter()
                .map(|&i| {
                    let byz = c2[i].clone().map(|set| Record::Sgc { leader, step: 2, set, label: None });
                    (i, procs2[i].on_echo(&inbox_for(&echoes, byz)))
                })
                .collect();
            for c3 in &step_choices {
                let scores: Vec<BTreeMap<Element, u8>> = CORRECT
                    .iter()
                    .map(|&i| {
                        let byz = c3[i].clone().map(|set| Record::Sgc { leader, step: 3, set, label: None });
                        procs2[i]
                            .on_confirm(&inbox_for(&confirms, byz))
                            .into_iter()
                            .filter(|s| s.leader == leader)
                            .flat_map(|s| s.scores)
                            .collect()
                    })
                    .collect();
                let broken = set_violation(leader, safe, &own, &scores).map(|what| {
                    format!("{what}: leader={leader} lead={c1:?} echo={c2:?} confirm={c3:?} scores={scores:?}")
                });
                out.record(broken);
            }
        }
    }
    out
}

fn set_violation(
    leader: usize,
    safe: &BTreeSet<Element>,
    own: &BTreeSet<Element>,
    scores: &[BTreeMap<Element, u8>],
) -> Option<&'static str> {
    let score = |s: &BTreeMap<Element, u8>, v: &Element| s.get(v).copied().unwrap_or(0);
    for v in alphabet() {
        for (a, sa) in scores.iter().enumerate() {
            for sb in &scores[a + 1..] {
                if score(sa, &v).abs_diff(score(sb, &v)) > 1 {
                    return Some("property 3");
                }
            }
        }
        if scores.iter().any(|s| score(s, &v) == 2) && scores.iter().any(|s| score(s, &v) == 0) {
            return Some("property 2");
        }
        if !safe.contains(&v) && scores.iter().any(|s| score(s, &v) > 0) {
            return Some("filter soundness");
        }
    }
    if leader != BYZ {
        for v in own.intersection(safe) {
            if scores.iter().any(|s| score(s, v) != 2) {
                return Some("property 1");
            }
        }
    }
    None
}
