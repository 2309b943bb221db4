use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use super::{at_most_one, Check, Verdict};
use crate::bla_sqrtf::SqrtfSnapshot;
use crate::lattice::{join_all, member_of_generated, Element, GeneratingSet, ProcessId};
use crate::sim::{Execution, Node};

struct View<'a> {
    correct: Vec<ProcessId>,
    inputs: BTreeMap<ProcessId, &'a Element>,
    hist: BTreeMap<ProcessId, &'a [SqrtfSnapshot]>,
}

impl View<'_> {
    fn snap(&self, i: ProcessId, r: usize) -> &SqrtfSnapshot {
        &self.hist[&i][r - 1]
    }

    /// `v^r`, the join of correct values after round `r` (inputs for `r = 0`).
    fn v_join(&self, r: usize) -> Element {
        if r == 0 {
            return join_all(self.inputs.values().copied());
        }
        join_all(self.correct.iter().map(|&i| &self.snap(i, r).state.v))
    }

    /// `S^r`, the union of correct safe generators.
    fn s_union(&self, r: usize) -> BTreeSet<Element> {
        self.correct
            .iter()
            .flat_map(|&i| self.snap(i, r).state.sv.members.iter().cloned())
            .collect()
    }

    fn undecided_after(&self, i: ProcessId, r: usize) -> bool {
        self.snap(i, r).state.decided_at.is_none()
    }
}

pub(super) fn lemmas(ex: &Execution) -> Vec<Verdict> {
    let correct = ex.config.correct_ids();
    let mut hist = BTreeMap::new();
    for &i in &correct {
        if let Node::Sqrtf(p) = &ex.nodes[i] {
            hist.insert(i, p.history.as_slice());
        }
    }
    let rounds = hist.values().map(|h| h.len()).min().unwrap_or(0);
    let view = View {
        inputs: correct.iter().map(|&i| (i, &ex.config.inputs[i])).collect(),
        correct,
        hist,
    };

    let mut c = (1..=8).map(|k| Check::new(format!("properties_p{k}"))).collect::<Vec<_>>();
    let mut once = Check::new("at_most_one");
    let mut dec2 = Check::new("dec_2round");
    let mut agree = Check::new("gradecast_agreement");
    let mut decision = Check::new("decision");

    let sv_gen: BTreeMap<(ProcessId, usize), GeneratingSet> = view
        .correct
        .iter()
        .flat_map(|&i| (1..=rounds).map(move |r| (i, r)))
        .map(|(i, r)| ((i, r), view.snap(i, r).state.sv.clone()))
        .collect();

    for r in 1..=rounds {
        let vr = view.v_join(r);
        let sr = view.s_union(r);
        for &i in &view.correct {
            let si = &view.snap(i, r).state;
            for &j in &view.correct {
                let svj = &sv_gen[&(j, r)];
                c[0].ensure(member_of_generated(svj, &si.v), || {
                    json!({"round": r, "i": i, "j": j, "v_i": si.v, "sv_j": svj.members})
                });
            }
            c[1].ensure(member_of_generated(&sv_gen[&(i, r)], &vr), || {
                json!({"round": r, "i": i, "v": vr, "sv_i": si.sv.members})
            });
            let prev = if r == 1 {
                view.inputs[&i].clone()
            } else {
                view.snap(i, r - 1).state.v.clone()
            };
            if view.undecided_after(i, r) {
                c[3].ensure(prev.lt(&si.v), || json!({"round": r, "i": i, "before": prev, "after": si.v}));
            }
            let hit: Vec<_> = si.bad.iter().filter(|b| ex.config.is_correct(**b)).collect();
            c[7].ensure(hit.is_empty(), || json!({"round": r, "i": i, "correct_in_bad": hit}));
        }
        let s_top = join_all(&sr);
        c[2].ensure(vr.leq(&s_top), || json!({"round": r, "v": vr, "s": s_top}));
        if r < rounds {
            let next_undecided = view.correct.iter().any(|&i| view.undecided_after(i, r + 1));
            let vn = view.v_join(r + 1);
            if next_undecided {
                c[4].ensure(vr.lt(&vn), || json!({"round": r, "v": vr, "v_next": vn}));
            }
            let sn = view.s_union(r + 1);
            let gen = GeneratingSet::new(sr.iter().cloned());
            for u in &sn {
                c[5].ensure(member_of_generated(&gen, u), || {
                    json!({"round": r + 1, "value": u, "s_prev": sr})
                });
            }
            let sn_top = join_all(&sn);
            c[6].ensure(sn_top.leq(&s_top), || json!({"round": r + 1, "s_next": sn_top, "s": s_top}));
        }
        at_most_one(
            &mut once,
            r,
            view.correct.iter().flat_map(|&i| view.snap(i, r).triples.iter()),
        );
        gradecast_values_agree(&mut agree, &view, r);
    }

    if let Some(r0) = (1..=rounds).find(|&r| view.v_join(r) == join_all(&view.s_union(r))) {
        let by = (r0 + 2).min(rounds);
        for &i in &view.correct {
            let d = view.snap(i, by).state.decided_at;
            dec2.ensure(d.is_some(), || json!({"stable_round": r0, "checked_round": by, "i": i}));
        }
    }

    for &i in &view.correct {
        if let Node::Sqrtf(p) = &ex.nodes[i] {
            let s = &p.state;
            let ok = s.y.is_some() && s.decided_at.is_some_and(|d| d <= s.term_round);
            decision.ensure(ok, || {
                json!({"i": i, "decided_at": s.decided_at, "term_round": s.term_round, "rounds": s.round})
            });
        }
    }

    let mut out: Vec<Verdict> = c.into_iter().map(Check::done).collect();
    out.extend([once.done(), dec2.done(), agree.done(), decision.done()]);
    out
}

/// Two correct processes that give a leader a positive score agree on its value.
fn gradecast_values_agree(c: &mut Check, view: &View, r: usize) {
    let mut seen: BTreeMap<ProcessId, (ProcessId, &Element)> = BTreeMap::new();
    for &i in &view.correct {
        for t in &view.snap(i, r).triples {
            let (Some(v), true) = (&t.value, t.score >= 1) else {
                continue;
            };
            match seen.get(&t.leader) {
                Some((j, w)) => c.ensure(*w == v, || {
                    json!({"round": r, "leader": t.leader, "i": i, "v_i": v, "j": j, "v_j": w})
                }),
                None => {
                    seen.insert(t.leader, (i, v));
                }
            }
        }
    }
}
