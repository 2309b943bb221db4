//! Byzantine strategies. Every Byzantine id runs an honest shadow copy of
//! the protocol; strategies start from the shadow's outbox and distort it.
//! They see everything the correct processes send in the same sub-round.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::label::LabelScale;
use crate::lattice::{join_all, Element, ProcessId, Tag};
use crate::protocol::{Outbox, Phase, Record, SubRound};
use crate::sim::config::{AdversarySpec, Algorithm};

pub struct AdversaryView<'a> {
    pub n: usize,
    pub f: usize,
    pub algorithm: Algorithm,
    pub at: SubRound,
    pub byzantine: &'a BTreeSet<ProcessId>,
    /// What each Byzantine id's honest shadow would send.
    pub honest: &'a BTreeMap<ProcessId, Outbox>,
    /// What the correct processes send this sub-round.
    pub correct: &'a BTreeMap<ProcessId, Outbox>,
    /// Unused tags each Byzantine id may mint values from.
    pub spare: &'a BTreeMap<ProcessId, Vec<Tag>>,
    /// `admissible(target, sender)`: values `target` would accept from `sender`.
    pub admissible: &'a dyn Fn(ProcessId, ProcessId) -> Vec<Element>,
}

impl AdversaryView<'_> {
    fn honest_of(&self, b: ProcessId) -> Outbox {
        self.honest.get(&b).cloned().unwrap_or_default()
    }

    /// First gradecast round of the run, where receivers accept anything.
    fn first_round(&self) -> bool {
        match self.algorithm {
            Algorithm::Sqrtf => self.at.outer == 1,
            Algorithm::Logn | Algorithm::Logf => self.at.outer == 0,
        }
    }

    fn fresh(&self, b: ProcessId, k: usize) -> Option<Element> {
        let pool = self.spare.get(&b)?;
        (!pool.is_empty()).then(|| Element::singleton(pool[k % pool.len()]))
    }

    /// Values led by correct processes this sub-round.
    fn correct_leads(&self) -> BTreeSet<Element> {
        let mut out = BTreeSet::new();
        for (from, ob) in self.correct {
            for rec in ob.values().flatten() {
                match rec {
                    Record::Gc { leader, step: 1, value } if leader == from => {
                        out.insert(value.clone());
                    }
                    Record::Sgc { leader, step: 1, set, .. } if leader == from => {
                        out.extend(set.iter().cloned());
                    }
                    Record::Cx { set, .. } => out.extend(set.iter().cloned()),
                    _ => {}
                }
            }
        }
        out
    }

    fn scale(&self) -> LabelScale {
        LabelScale::new(self.n, self.f)
    }
}

pub trait Adversary {
    /// Outboxes for every Byzantine id this sub-round.
    fn act(&mut self, view: &AdversaryView, rng: &mut ChaCha8Rng) -> BTreeMap<ProcessId, Outbox>;
}

pub fn strategy(spec: AdversarySpec) -> Box<dyn Adversary> {
    Box::new(Builtin(spec))
}

struct Builtin(AdversarySpec);

impl Adversary for Builtin {
    fn act(&mut self, view: &AdversaryView, rng: &mut ChaCha8Rng) -> BTreeMap<ProcessId, Outbox> {
        view.byzantine
            .iter()
            .map(|&b| {
                let honest = view.honest_of(b);
                let out = match self.0 {
                    AdversarySpec::Silent => Outbox::new(),
                    AdversarySpec::CrashAt(r) => keep_if(view.at.index < r, honest),
                    AdversarySpec::Terrible(r) => keep_if(view.at.outer < r, honest),
                    AdversarySpec::EquivocateSplit => equivocate(view, b, honest),
                    AdversarySpec::InjectFresh => inject_fresh(view, b, honest),
                    AdversarySpec::LieLabel => lie(view, b, honest),
                    AdversarySpec::RandomWithinSafe(_) => random_within_safe(view, b, honest, rng),
                };
                (b, out)
            })
            .collect()
    }
}

fn keep_if(cond: bool, honest: Outbox) -> Outbox {
    if cond {
        honest
    } else {
        Outbox::new()
    }
}

fn map_records(honest: Outbox, mut f: impl FnMut(ProcessId, Record) -> Option<Record>) -> Outbox {
    honest
        .into_iter()
        .map(|(to, recs)| (to, recs.into_iter().filter_map(|r| f(to, r)).collect::<Vec<_>>()))
        .filter(|(_, recs)| !recs.is_empty())
        .collect()
}

fn with_extra(set: Vec<Element>, extra: impl IntoIterator<Item = Element>) -> Vec<Element> {
    let mut all: BTreeSet<Element> = set.into_iter().collect();
    all.extend(extra);
    all.into_iter().collect()
}

/// Leader and exchange messages differ between the lower and upper halves
/// of the recipients; echoes stay honest.
fn equivocate(view: &AdversaryView, b: ProcessId, honest: Outbox) -> Outbox {
    let leads = view.correct_leads();
    let alt_value = |v: &Element| -> Element {
        if view.first_round() {
            view.fresh(b, 0).map(|x| x.join(v)).unwrap_or_else(|| v.clone())
        } else {
            join_all(&leads).join(v)
        }
    };
    let half = view.n / 2;
    map_records(honest, |to, rec| {
        if to < half {
            return Some(rec);
        }
        Some(match rec {
            Record::Gc { leader, step: 1, value } => Record::Gc {
                leader,
                step: 1,
                value: alt_value(&value),
            },
            Record::Sgc { leader, step: 1, set, label } => Record::Sgc {
                leader,
                step: 1,
                set: with_extra(set, leads.iter().cloned().chain(view.fresh(b, view.at.outer))),
                label,
            },
            Record::Cx { target, set } => Record::Cx {
                target,
                set: with_extra(set, leads.iter().cloned()),
            },
            other => other,
        })
    })
}

/// Leads with a value carrying a tag nobody has seen, new every round.
fn inject_fresh(view: &AdversaryView, b: ProcessId, honest: Outbox) -> Outbox {
    let Some(fresh) = view.fresh(b, view.at.outer) else {
        return honest;
    };
    map_records(honest, |_, rec| {
        Some(match rec {
            Record::Gc { leader, step: 1, value } => Record::Gc {
                leader,
                step: 1,
                value: value.join(&fresh),
            },
            Record::Sgc { leader, step: 1, set, label } => Record::Sgc {
                leader,
                step: 1,
                set: with_extra(set, [fresh.clone()]),
                label,
            },
            other => other,
        })
    })
}

/// Misreports metadata: forged labels and oversized exchange sets for the
/// classifier, malformed duplicate sets for id-based halving, and inflated
/// echoes for gradecast.
fn lie(view: &AdversaryView, b: ProcessId, honest: Outbox) -> Outbox {
    let leads = view.correct_leads();
    match view.algorithm {
        Algorithm::Logf if view.at.outer >= 1 => {
            let grid: Vec<_> = view.scale().grid(view.at.outer).into_iter().collect();
            let big: Vec<Element> = leads.iter().cloned().chain(view.fresh(b, view.at.outer)).collect();
            map_records(honest, |to, rec| {
                Some(match rec {
                    Record::Sgc { leader, step, set, label } => {
                        let forged = grid[(to + b + step as usize) % grid.len()];
                        Record::Sgc {
                            leader,
                            step,
                            set,
                            label: if to % 2 == 0 { Some(forged) } else { label },
                        }
                    }
                    Record::Cx { target, set } => Record::Cx {
                        target,
                        set: with_extra(set, big.iter().cloned()),
                    },
                    other => other,
                })
            })
        }
        Algorithm::Logn if view.at.phase == Phase::SgcLead => map_records(honest, |to, rec| {
            Some(match rec {
                Record::Sgc { leader, step, mut set, label } if to % 2 == 0 => {
                    if let Some(first) = set.first().cloned() {
                        set.push(first);
                    }
                    Record::Sgc { leader, step, set, label }
                }
                other => other,
            })
        }),
        Algorithm::Sqrtf | Algorithm::Logn | Algorithm::Logf => {
            let top = join_all(&leads);
            map_records(honest, |_, rec| {
                Some(match rec {
                    Record::Gc { leader, step, value } if step >= 2 => Record::Gc {
                        leader,
                        step,
                        value: value.join(&top),
                    },
                    other => other,
                })
            })
        }
    }
}

/// Replaces every value with a random one the recipient would accept from
/// this sender, and drops a quarter of the records.
fn random_within_safe(view: &AdversaryView, b: ProcessId, honest: Outbox, rng: &mut ChaCha8Rng) -> Outbox {
    let mut out = Outbox::new();
    for (to, recs) in honest {
        if view.byzantine.contains(&to) {
            out.insert(to, recs);
            continue;
        }
        let pool = (view.admissible)(to, b);
        let mut kept = Vec::new();
        for rec in recs {
            if rng.gen_ratio(1, 4) {
                continue;
            }
            if pool.is_empty() {
                kept.push(rec);
                continue;
            }
            let pick_set = |rng: &mut ChaCha8Rng| -> Vec<Element> {
                let k = rng.gen_range(0..=pool.len());
                let mut s: Vec<Element> = pool.choose_multiple(rng, k).cloned().collect();
                s.sort();
                s
            };
            kept.push(match rec {
                Record::Gc { leader, step, .. } => Record::Gc {
                    leader,
                    step,
                    value: pool.choose(rng).cloned().expect("nonempty pool"),
                },
                Record::Sgc { leader, step, label, .. } => Record::Sgc {
                    leader,
                    step,
                    set: pick_set(rng),
                    label,
                },
                Record::Cx { target, .. } => Record::Cx {
                    target,
                    set: pick_set(rng),
                },
            });
        }
        if !kept.is_empty() {
            out.insert(to, kept);
        }
    }
    out
}
