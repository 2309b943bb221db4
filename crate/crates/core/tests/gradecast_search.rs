#[path = "support/search.rs"]
mod search;

use std::collections::BTreeSet;

use bla_core::gradecast::GradecastFilter;
use search::*;

fn same(f: GradecastFilter) -> [GradecastFilter; 3] {
    [f.clone(), f.clone(), f]
}

#[test]
fn byzantine_leader_accept_all() {
    let out = search_gradecast(BYZ, &same(GradecastFilter::accept_all()));
    assert_eq!(out.transcripts, 64 * 64 * 64);
    assert_eq!(out.violations, 0, "{:?}", out.first);
}

#[test]
fn byzantine_leader_restrictive_filter() {
    let out = search_gradecast(BYZ, &same(restrictive_filter()));
    assert_eq!(out.violations, 0, "{:?}", out.first);
}

#[test]
fn correct_leader_always_scores_two() {
    for f in [GradecastFilter::accept_all(), restrictive_filter()] {
        let out = search_gradecast(0, &same(f));
        assert_eq!(out.transcripts, 64 * 64);
        assert_eq!(out.violations, 0, "{:?}", out.first);
    }
}

#[test]
fn bad_set_leader_is_never_scored() {
    let mut f = GradecastFilter::accept_all();
    f.bad_set.insert(BYZ);
    let out = search_gradecast(BYZ, &same(f));
    assert_eq!(out.violations, 0, "{:?}", out.first);
}

// The score-gap property needs every correct process to run the same
// filter. With one process rejecting `c`, a Byzantine leader can get `c`
// graded 2 at two processes and 0 at the third.
#[test]
fn heterogeneous_filters_break_score_gap() {
    let filters = [restrictive_filter(), GradecastFilter::accept_all(), GradecastFilter::accept_all()];
    let out = search_gradecast(BYZ, &filters);
    assert!(out.violations > 0);
    assert!(out.first.unwrap().starts_with("property 3"));
}

#[test]
fn set_gradecast_byzantine_leader() {
    let safe: BTreeSet<_> = [val(0), val(1)].into();
    let out = search_set_gradecast(BYZ, &safe);
    assert_eq!(out.transcripts, 64 * 64 * 64);
    assert_eq!(out.violations, 0, "{:?}", out.first);
}

#[test]
fn set_gradecast_correct_leader() {
    for safe in [BTreeSet::from([val(0), val(1)]), BTreeSet::from([val(0)]), alphabet().into_iter().collect()] {
        let out = search_set_gradecast(0, &safe);
        assert_eq!(out.violations, 0, "{:?}", out.first);
    }
}
