use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use super::{at_most_one, set_json, Check, Verdict};
use crate::bla_logf::LogfState;
use crate::label::{Label, LabelScale};
use crate::lattice::{Element, ProcessId};
use crate::sim::{Execution, Node};

struct View<'a> {
    correct: Vec<ProcessId>,
    /// `hist[i][r - 1]`: state at the start of round `r`.
    hist: BTreeMap<ProcessId, &'a [LogfState]>,
}

impl View<'_> {
    fn at(&self, i: ProcessId, r: usize) -> &LogfState {
        &self.hist[&i][r - 1]
    }

    fn sf(&self, k: Label, r: usize) -> BTreeSet<Element> {
        self.correct
            .iter()
            .flat_map(|&i| self.at(i, r).safe.get(&k).into_iter().flatten().cloned())
            .collect()
    }

    fn group(&self, k: Label, r: usize) -> Vec<ProcessId> {
        self.correct.iter().copied().filter(|&i| self.at(i, r).label == k).collect()
    }

    fn labels(&self, r: usize) -> BTreeSet<Label> {
        self.correct.iter().map(|&i| self.at(i, r).label).collect()
    }
}

pub(super) fn lemmas(ex: &Execution) -> Vec<Verdict> {
    let scale = LabelScale::new(ex.config.n, ex.config.f);
    let levels = scale.levels as usize;
    let correct = ex.config.correct_ids();
    let mut hist = BTreeMap::new();
    let mut triples = Vec::new();
    for &i in &correct {
        if let Node::Logf(p) = &ex.nodes[i] {
            hist.insert(i, p.history.as_slice());
            triples.extend(p.initial_triples.iter());
        }
    }
    let rounds = hist.values().map(|h| h.len()).min().unwrap_or(0);
    let view = View { correct, hist };
    let unit = scale.unit();
    let size = |s: &BTreeSet<Element>| scale.scale_count(s.len());

    let mut once = Check::new("at_most_one");
    let mut p: Vec<Check> = (1..=8).map(|k| Check::new(format!("cls_logf_p{k}"))).collect();
    let mut dec = Check::new("dec");
    let mut same = Check::new("same_group");
    let mut grid = Check::new("label_grid");

    at_most_one(&mut once, 0, triples);
    grid.ensure(rounds == levels + 1, || json!({"recorded_rounds": rounds, "expected": levels + 1}));
    let rounds = rounds.min(levels + 1);

    for r in 1..=rounds {
        let allowed = scale.grid(r);
        for &i in &view.correct {
            let k = view.at(i, r).label;
            grid.ensure(allowed.contains(&k), || json!({"round": r, "i": i, "label": k}));
        }
        let w = scale.window(r);
        for k in view.labels(r) {
            let sf = view.sf(k, r);
            for i in view.group(k, r) {
                let vi = &view.at(i, r).values;
                let ok = k - w < size(vi) && size(vi) <= k + w;
                dec.ensure(ok, || {
                    json!({"round": r, "i": i, "label": scale.as_f64(k), "size": vi.len(), "half_width": w as f64 / unit as f64})
                });
            }
            dec.ensure(size(&sf) <= k + w, || {
                json!({"round": r, "label": scale.as_f64(k), "sf_size": sf.len(), "half_width": w as f64 / unit as f64})
            });
        }
    }

    for r in 1..rounds {
        let w = scale.window(r);
        for k in view.labels(r) {
            let (lo, hi) = (k - w, k + w);
            let members = view.group(k, r);
            let sf = view.sf(k, r);
            let pre = members.iter().all(|&i| {
                let s = size(&view.at(i, r).values);
                lo < s && s <= hi
            }) && size(&sf) <= hi;
            let (m, s) = (scale.master(k, r), scale.slave(k, r));
            let masters: Vec<_> = members.iter().copied().filter(|&i| view.at(i, r + 1).label == m).collect();
            let slaves: Vec<_> = members.iter().copied().filter(|&i| view.at(i, r + 1).label == s).collect();
            let sf_m = view.sf(m, r + 1);
            let sf_s = view.sf(s, r + 1);
            let ctx = || json!({"round": r, "label": scale.as_f64(k)});
            if pre {
                for &i in &masters {
                    let n_i = size(&view.at(i, r + 1).values);
                    p[0].ensure(k < n_i && n_i <= hi, || json!({"ctx": ctx(), "i": i, "size": n_i / unit}));
                }
                for &i in &slaves {
                    let n_i = size(&view.at(i, r + 1).values);
                    p[1].ensure(lo < n_i && n_i <= k, || json!({"ctx": ctx(), "i": i, "size": n_i / unit}));
                }
                p[4].ensure(size(&sf_m) <= hi, || json!({"ctx": ctx(), "sf_master_size": sf_m.len()}));
            }
            p[2].ensure(sf_m.is_subset(&sf), || {
                json!({"ctx": ctx(), "sf_master": set_json(&sf_m), "sf": set_json(&sf)})
            });
            p[3].ensure(sf_s.is_subset(&sf), || {
                json!({"ctx": ctx(), "sf_slave": set_json(&sf_s), "sf": set_json(&sf)})
            });
            if !slaves.is_empty() {
                p[5].ensure(size(&sf_s) <= k, || json!({"ctx": ctx(), "sf_slave_size": sf_s.len()}));
            }
            for &j in &masters {
                let vj = &view.at(j, r + 1).values;
                p[6].ensure(sf_s.is_subset(vj), || {
                    json!({"ctx": ctx(), "master": j, "sf_slave": set_json(&sf_s), "v_j": set_json(vj)})
                });
            }
            for &i in &members {
                let vi = &view.at(i, r + 1).values;
                let stray = !masters.contains(&i) && !slaves.contains(&i);
                p[7].ensure(vi.is_subset(&sf) && !stray, || {
                    json!({"ctx": ctx(), "i": i, "v_next": set_json(vi), "sf": set_json(&sf), "next_label": view.at(i, r + 1).label})
                });
            }
        }
    }

    if levels >= 1 && rounds == levels + 1 {
        let r = rounds;
        for k in view.labels(r) {
            let g = view.group(k, r);
            for pair in g.windows(2) {
                let (a, b) = (&view.at(pair[0], r).values, &view.at(pair[1], r).values);
                same.ensure(a == b, || {
                    json!({"label": scale.as_f64(k), "i": pair[0], "j": pair[1], "v_i": set_json(a), "v_j": set_json(b)})
                });
            }
        }
    }

    let mut out: Vec<Verdict> = vec![once.done()];
    out.extend(p.into_iter().map(Check::done));
    out.extend([dec.done(), same.done(), grid.done()]);
    out
}
