//! Property checks over finished executions: the three lattice agreement
//! properties, round and message bounds, and per-round lemma invariants
//! for each algorithm.

mod logf;
mod logn;
mod sqrtf;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Value};

use crate::bla_logf::logf_output;
use crate::bla_logn::{self, logn_output};
use crate::bla_sqrtf::ceil_sqrt;
use crate::gradecast::GradeTriple;
use crate::label::ceil_log2;
use crate::lattice::{join_all, Element, ProcessId};
use crate::sim::{Algorithm, Execution, Node};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

/// Accumulates the first counterexample for one property.
pub(crate) struct Check {
    name: String,
    witness: Option<Value>,
}

impl Check {
    pub(crate) fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            witness: None,
        }
    }

    pub(crate) fn ensure(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    pub(crate) fn done(self) -> Verdict {
        Verdict {
            name: self.name,
            pass: self.witness.is_none(),
            witness: self.witness,
        }
    }
}

pub fn check_comparability(outputs: &BTreeMap<ProcessId, Element>) -> Verdict {
    let mut c = Check::new("comparability");
    for (i, yi) in outputs {
        for (j, yj) in outputs.range(i + 1..) {
            c.ensure(yi.comparable(yj), || json!({"i": i, "j": j, "y_i": yi, "y_j": yj}));
        }
    }
    c.done()
}

pub fn check_downward(inputs: &BTreeMap<ProcessId, Element>, outputs: &BTreeMap<ProcessId, Element>) -> Verdict {
    let mut c = Check::new("downward_validity");
    for (i, x) in inputs {
        match outputs.get(i) {
            Some(y) => c.ensure(x.leq(y), || json!({"i": i, "x_i": x, "y_i": y})),
            None => c.ensure(false, || json!({"i": i, "x_i": x, "y_i": null})),
        }
    }
    c.done()
}

/// `join(outputs) <= join(correct inputs + B)` with `|B| <= t`, where `B`
/// holds the values of Byzantine origin that correct processes scored in
/// the initial gradecast.
pub fn check_upward(
    inputs: &BTreeMap<ProcessId, Element>,
    outputs: &BTreeMap<ProcessId, Element>,
    recorded: &BTreeMap<ProcessId, BTreeSet<Element>>,
    t: usize,
) -> Verdict {
    let mut c = Check::new("upward_validity");
    let b: BTreeSet<&Element> = recorded.values().flatten().collect();
    c.ensure(b.len() <= t, || json!({"recorded": recorded, "t": t}));
    let top = join_all(inputs.values().chain(b.iter().copied()));
    let out = join_all(outputs.values());
    c.ensure(out.leq(&top), || {
        let extra: Vec<String> = out
            .tags()
            .iter()
            .filter(|tag| !top.contains(tag))
            .map(|tag| tag.to_string())
            .collect();
        json!({"outputs_join": out, "bound": top, "tags_without_provenance": extra})
    });
    c.done()
}

/// Values of each Byzantine leader that some correct process scored at
/// least 1 in the initial gradecast.
pub fn recorded_byzantine_values(ex: &Execution) -> BTreeMap<ProcessId, BTreeSet<Element>> {
    let mut out: BTreeMap<ProcessId, BTreeSet<Element>> = BTreeMap::new();
    for i in ex.config.correct_ids() {
        for t in initial_triples(&ex.nodes[i]) {
            if let (false, Some(v), true) = (ex.config.is_correct(t.leader), &t.value, t.score >= 1) {
                out.entry(t.leader).or_default().insert(v.clone());
            }
        }
    }
    out
}

fn initial_triples(node: &Node) -> &[GradeTriple] {
    match node {
        Node::Sqrtf(p) => p.history.first().map(|s| s.triples.as_slice()).unwrap_or(&[]),
        Node::Logn(p) => &p.initial_triples,
        Node::Logf(p) => &p.initial_triples,
    }
}

/// Final output per correct process; `None` for an undecided sqrtf process.
pub fn outputs(ex: &Execution) -> BTreeMap<ProcessId, Option<Element>> {
    ex.config
        .correct_ids()
        .into_iter()
        .map(|i| {
            let y = match &ex.nodes[i] {
                Node::Sqrtf(p) => p.state.y.clone(),
                Node::Logn(p) => p.state.as_ref().map(logn_output),
                Node::Logf(p) => p.state.as_ref().map(logf_output),
            };
            (i, y)
        })
        .collect()
}

/// Early-stopping bound on outer rounds for `t` actual faults.
pub fn early_stop_rounds(t: usize) -> usize {
    (2 * ceil_sqrt(t) + 2).max(3)
}

pub fn sqrtf_sub_round_bound(height: usize, f: usize) -> usize {
    (3 * height + 6).min(6 * ceil_sqrt(f) + 6)
}

pub fn logn_sub_rounds(n: usize) -> usize {
    3 + 3 * ceil_log2(n) as usize
}

pub fn logf_sub_rounds(f: usize) -> usize {
    3 + 4 * ceil_log2(f) as usize
}

pub fn check_round_bound(ex: &Execution) -> Verdict {
    let mut c = Check::new("round_bound");
    let cfg = &ex.config;
    let subs = ex.sub_rounds();
    match cfg.algorithm {
        Algorithm::Sqrtf => {
            let cap = sqrtf_sub_round_bound(ex.universe.height(), cfg.f);
            c.ensure(subs <= cap, || json!({"sub_rounds": subs, "bound": cap}));
            let early = early_stop_rounds(cfg.t());
            c.ensure(ex.outer_rounds <= early, || {
                json!({"outer_rounds": ex.outer_rounds, "early_stop_bound": early, "t": cfg.t()})
            });
        }
        Algorithm::Logn => {
            let want = logn_sub_rounds(cfg.n);
            c.ensure(subs == want, || json!({"sub_rounds": subs, "expected": want}));
        }
        Algorithm::Logf => {
            let want = logf_sub_rounds(cfg.f);
            c.ensure(subs == want, || json!({"sub_rounds": subs, "expected": want}));
        }
    }
    c.done()
}

pub fn check_message_bound(ex: &Execution) -> Verdict {
    let mut c = Check::new("message_bound");
    let n2 = ex.config.n * ex.config.n;
    for (k, (&all, &corr)) in ex
        .envelopes
        .per_sub_round
        .iter()
        .zip(&ex.envelopes.correct_per_sub_round)
        .enumerate()
    {
        c.ensure(corr <= n2 && all <= n2, || {
            json!({"sub_round": k + 1, "correct_envelopes": corr, "envelopes": all, "n_squared": n2})
        });
    }
    let bound = ex.sub_rounds() * n2;
    let per_round = match ex.config.algorithm {
        Algorithm::Sqrtf => 3 * ex.outer_rounds * n2,
        Algorithm::Logn => logn_sub_rounds(ex.config.n) * n2,
        Algorithm::Logf => logf_sub_rounds(ex.config.f) * n2,
    };
    let total = ex.envelopes.total;
    c.ensure(total <= bound.min(per_round), || {
        json!({"envelopes": total, "bound": per_round})
    });
    c.done()
}

/// Every verdict for an execution, BLA properties first.
pub fn check_all(ex: &Execution) -> Vec<Verdict> {
    let cfg = &ex.config;
    let inputs: BTreeMap<ProcessId, Element> = cfg
        .correct_ids()
        .into_iter()
        .map(|i| (i, cfg.inputs[i].clone()))
        .collect();
    let outs = outputs(ex);
    let decided: BTreeMap<ProcessId, Element> = outs
        .iter()
        .filter_map(|(i, y)| y.clone().map(|y| (*i, y)))
        .collect();
    let recorded = recorded_byzantine_values(ex);
    let mut verdicts = vec![
        check_comparability(&decided),
        check_downward(&inputs, &decided),
        check_upward(&inputs, &decided, &recorded, cfg.t()),
        check_round_bound(ex),
        check_message_bound(ex),
    ];
    verdicts.extend(match cfg.algorithm {
        Algorithm::Sqrtf => sqrtf::lemmas(ex),
        Algorithm::Logn => logn::lemmas(ex),
        Algorithm::Logf => logf::lemmas(ex),
    });
    verdicts
}

/// At most one value per leader scored >= 1 by correct processes.
pub(crate) fn at_most_one<'a>(
    c: &mut Check,
    round: usize,
    triples: impl IntoIterator<Item = &'a GradeTriple>,
) {
    let mut per_leader: BTreeMap<ProcessId, BTreeSet<&Element>> = BTreeMap::new();
    for t in triples {
        if let (Some(v), true) = (&t.value, t.score >= 1) {
            per_leader.entry(t.leader).or_default().insert(v);
        }
    }
    for (leader, vals) in per_leader {
        c.ensure(vals.len() <= 1, || json!({"round": round, "leader": leader, "values": vals}));
    }
}

pub(crate) fn set_json(s: &BTreeSet<Element>) -> Value {
    json!(s)
}

pub(crate) fn groups_of_logn(n: usize, r: usize) -> Vec<bla_logn::GroupSplit> {
    bla_logn::splits_at(n, r)
}
