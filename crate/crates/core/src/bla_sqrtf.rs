//! Early-stopping lattice agreement in `O(sqrt f)` rounds of `n` parallel
//! gradecasts.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::ProtocolError;
use crate::gradecast::{leader_send, GradeTriple, GradecastFilter, GradecastRound};
use crate::lattice::{join_all, Element, GeneratingSet, ProcessId};
use crate::protocol::{broadcast, Inbox, Outbox, Payload, Phase, Process, SubRound};

pub fn ceil_sqrt(x: usize) -> usize {
    let mut r = (x as f64).sqrt() as usize;
    while r * r < x {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= x {
        r -= 1;
    }
    r
}

/// `F = min(h(X) + 2, 2 * ceil(sqrt f) + 2)` outer rounds.
pub fn round_cap(height: usize, f: usize) -> usize {
    (height + 2).min(2 * ceil_sqrt(f) + 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SqrtfState {
    pub v: Element,
    pub bad: BTreeSet<ProcessId>,
    pub sv: GeneratingSet,
    /// Completed outer rounds.
    pub round: usize,
    pub term_round: usize,
    pub decided_at: Option<usize>,
    pub y: Option<Element>,
}

impl SqrtfState {
    pub fn new(input: Element, cap: usize) -> Self {
        SqrtfState {
            v: input,
            bad: BTreeSet::new(),
            sv: GeneratingSet::default(),
            round: 0,
            term_round: cap,
            decided_at: None,
            y: None,
        }
    }

    pub fn filter(&self) -> GradecastFilter {
        GradecastFilter {
            safe_generators: self.sv.clone(),
            bad_set: self.bad.clone(),
            accept_all: self.round == 0,
        }
    }

    pub fn terminated(&self) -> bool {
        self.round >= self.term_round
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundDigest {
    pub u1: BTreeSet<Element>,
    pub u2: BTreeSet<Element>,
    pub newly_bad: BTreeSet<ProcessId>,
}

/// One outer round of bookkeeping given this round's `n` grade triples.
pub fn sqrtf_round(
    state: &SqrtfState,
    triples: &[GradeTriple],
    n: usize,
) -> Result<(SqrtfState, RoundDigest), ProtocolError> {
    if triples.len() != n {
        return Err(ProtocolError::TripleCount {
            expected: n,
            got: triples.len(),
        });
    }
    let mut digest = RoundDigest::default();
    for t in triples {
        if let (Some(v), true) = (&t.value, t.score >= 1) {
            digest.u1.insert(v.clone());
            if t.score == 2 {
                digest.u2.insert(v.clone());
            }
        }
        if t.score <= 1 && !state.bad.contains(&t.leader) {
            digest.newly_bad.insert(t.leader);
        }
    }
    let mut next = state.clone();
    next.round += 1;
    next.bad.extend(digest.newly_bad.iter().copied());
    next.sv = GeneratingSet::new(digest.u1.iter().cloned());
    if next.decided_at.is_none() && digest.u2.iter().all(|u| u.comparable(&state.v)) {
        next.decided_at = Some(next.round);
        next.y = Some(state.v.clone());
    }
    next.v = join_all(&digest.u2);
    Ok((next, digest))
}

/// `t_i := min(t_i, r + k + 2)` after round `state.round`.
pub fn update_term_round(state: &mut SqrtfState, newly_bad: usize) {
    state.term_round = state.term_round.min(state.round + newly_bad + 2);
}

pub fn sqrtf_output(state: &SqrtfState) -> Result<Element, ProtocolError> {
    state.y.clone().ok_or(ProtocolError::Undecided {
        round: state.round,
    })
}

/// What one correct process looked like at the end of an outer round.
#[derive(Clone, Debug, Serialize)]
pub struct SqrtfSnapshot {
    pub state: SqrtfState,
    pub triples: Vec<GradeTriple>,
    pub digest: RoundDigest,
}

#[derive(Clone, Debug)]
pub struct SqrtfProcess {
    pub id: ProcessId,
    pub n: usize,
    pub f: usize,
    pub state: SqrtfState,
    pub history: Vec<SqrtfSnapshot>,
    gc: GradecastRound,
    pending: Payload,
}

impl SqrtfProcess {
    pub fn new(id: ProcessId, n: usize, f: usize, input: Element, cap: usize) -> Self {
        SqrtfProcess {
            id,
            n,
            f,
            state: SqrtfState::new(input, cap),
            history: Vec::new(),
            gc: GradecastRound::new(n, f, GradecastFilter::accept_all()),
            pending: Payload::new(),
        }
    }
}

impl Process for SqrtfProcess {
    fn send(&mut self, at: &SubRound) -> Outbox {
        match at.phase {
            Phase::GcLead => {
                self.gc = GradecastRound::new(self.n, self.f, self.state.filter());
                broadcast(self.n, vec![leader_send(self.id, &self.state.v)])
            }
            Phase::GcEcho | Phase::GcConfirm => broadcast(self.n, std::mem::take(&mut self.pending)),
            other => unreachable!("sqrtf has no {other:?} sub-round"),
        }
    }

    fn deliver(&mut self, at: &SubRound, inbox: &Inbox) {
        match at.phase {
            Phase::GcLead => self.pending = self.gc.on_lead(inbox),
            Phase::GcEcho => self.pending = self.gc.on_echo(inbox),
            Phase::GcConfirm => {
                let triples = self.gc.on_confirm(inbox);
                let (mut next, digest) =
                    sqrtf_round(&self.state, &triples, self.n).expect("gradecast round yields n triples");
                update_term_round(&mut next, digest.newly_bad.len());
                self.state = next;
                self.history.push(SqrtfSnapshot {
                    state: self.state.clone(),
                    triples,
                    digest,
                });
            }
            other => unreachable!("sqrtf has no {other:?} sub-round"),
        }
    }

    fn admissible_from(&self, sender: ProcessId) -> Vec<Element> {
        if self.state.bad.contains(&sender) || self.state.sv.is_empty() {
            return Vec::new();
        }
        let mut out: Vec<Element> = self.state.sv.members.iter().cloned().collect();
        out.push(self.state.sv.top());
        out.dedup();
        out
    }
}
