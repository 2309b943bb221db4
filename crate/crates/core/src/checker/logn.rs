use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use super::{at_most_one, groups_of_logn, set_json, Check, Verdict};
use crate::bla_logn::{Group, LognState};
use crate::lattice::{Element, ProcessId};
use crate::sim::{Execution, Node};

struct View<'a> {
    correct: Vec<ProcessId>,
    /// `hist[i][r]`: state after iteration `r`, `r = 0` being the initial round.
    hist: BTreeMap<ProcessId, &'a [LognState]>,
}

impl View<'_> {
    fn values(&self, i: ProcessId, r: usize) -> &BTreeSet<Element> {
        &self.hist[&i][r].values
    }

    /// `SF_j^r`: union over correct processes of their safe set for `j`.
    fn sf(&self, j: ProcessId, r: usize) -> BTreeSet<Element> {
        self.correct
            .iter()
            .flat_map(|i| self.hist[i][r].safe[j].iter().cloned())
            .collect()
    }

    fn sf_group(&self, g: Group, r: usize) -> BTreeSet<Element> {
        g.ids().flat_map(|j| self.sf(j, r)).collect()
    }
}

pub(super) fn lemmas(ex: &Execution) -> Vec<Verdict> {
    let n = ex.config.n;
    let correct = ex.config.correct_ids();
    let mut hist = BTreeMap::new();
    let mut triples = Vec::new();
    for &i in &correct {
        if let Node::Logn(p) = &ex.nodes[i] {
            hist.insert(i, p.history.as_slice());
            triples.extend(p.initial_triples.iter());
        }
    }
    let last = hist.values().map(|h| h.len()).min().unwrap_or(0);
    let view = View { correct, hist };

    let mut once = Check::new("at_most_one");
    let mut p = [
        Check::new("cls_logn_p1"),
        Check::new("cls_logn_p2"),
        Check::new("cls_logn_p3"),
    ];
    let mut dom = Check::new("domination");
    let mut keep = Check::new("correct_value");
    let mut comp = Check::new("comp");

    at_most_one(&mut once, 0, triples);
    if last == 0 {
        comp.ensure(false, || json!({"error": "no initial round recorded"}));
    }
    let last = last.saturating_sub(1);

    for r in 1..=last {
        for sp in groups_of_logn(n, r) {
            let parent = view.sf_group(sp.group, r - 1);
            let sf_s = view.sf_group(sp.slaves, r);
            let sf_m = view.sf_group(sp.masters, r);
            p[0].ensure(sf_s.is_subset(&parent), || {
                json!({"round": r, "group": sp.group, "sf_slaves": set_json(&sf_s), "sf_group": set_json(&parent)})
            });
            p[1].ensure(sf_m.is_subset(&parent), || {
                json!({"round": r, "group": sp.group, "sf_masters": set_json(&sf_m), "sf_group": set_json(&parent)})
            });
            for &i in view.correct.iter().filter(|&&i| sp.group.contains(i)) {
                let vi = view.values(i, r);
                p[2].ensure(vi.is_subset(&parent), || {
                    json!({"round": r, "i": i, "v_i": set_json(vi), "sf_group": set_json(&parent)})
                });
            }
            for &j in view.correct.iter().filter(|&&j| sp.masters.contains(j)) {
                for t in r..=last {
                    let vj = view.values(j, t);
                    dom.ensure(sf_s.is_subset(vj), || {
                        json!({"round": r, "later": t, "master": j, "sf_slaves": set_json(&sf_s), "v_j": set_json(vj)})
                    });
                }
            }
        }
    }

    for &j in &view.correct {
        for r in 0..=last {
            for v in view.values(j, r) {
                let everywhere = |t: usize| view.correct.iter().all(|&i| view.hist[&i][t].safe[j].contains(v));
                if !everywhere(r) {
                    continue;
                }
                for t in r..=last {
                    let ok = view.values(j, t).contains(v) && everywhere(t);
                    keep.ensure(ok, || json!({"j": j, "value": v, "round": r, "lost_at": t}));
                }
            }
        }
    }

    let finals: Vec<(ProcessId, &BTreeSet<Element>)> = view.correct.iter().map(|&i| (i, view.values(i, last))).collect();
    for (a, (i, vi)) in finals.iter().enumerate() {
        for (j, vj) in &finals[a + 1..] {
            comp.ensure(vi.is_subset(vj) || vj.is_subset(vi), || {
                json!({"i": i, "j": j, "v_i": set_json(vi), "v_j": set_json(vj)})
            });
        }
    }

    let [p1, p2, p3] = p;
    vec![once.done(), p1.done(), p2.done(), p3.done(), dom.done(), keep.done(), comp.done()]
}
