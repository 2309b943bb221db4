use std::collections::BTreeSet;

use bla_core::lattice::{join_all, Element, Tag};
use bla_core::sim::{run, AdversarySpec, Algorithm, RunConfig};
use proptest::prelude::*;

const ALGORITHMS: [Algorithm; 3] = [Algorithm::Sqrtf, Algorithm::Logn, Algorithm::Logf];

fn singletons(n: usize) -> Vec<Element> {
    (0..n).map(|i| Element::singleton(Tag::new(i, 0))).collect()
}

fn config(n: usize, f: usize, byz: &[usize], algorithm: Algorithm, adversary: AdversarySpec) -> RunConfig {
    RunConfig {
        n,
        f,
        byzantine_ids: byz.iter().copied().collect(),
        algorithm,
        inputs: singletons(n),
        adversary,
        seed: 7,
        universe_size: 4 * n,
    }
}

#[test]
fn logn_sub_round_counts() {
    for (n, f, want) in [(4, 1, 9), (7, 2, 12), (8, 2, 12), (16, 5, 15)] {
        let r = run(&config(n, f, &[], Algorithm::Logn, AdversarySpec::Silent)).unwrap();
        assert_eq!(r.sub_rounds, want, "n = {n}");
    }
}

#[test]
fn logf_sub_round_counts() {
    for (n, f, want) in [(4, 1, 3), (7, 2, 7), (10, 3, 11), (16, 5, 15)] {
        let r = run(&config(n, f, &[0], Algorithm::Logf, AdversarySpec::Silent)).unwrap();
        assert_eq!(r.sub_rounds, want, "n = {n} f = {f}");
    }
}

#[test]
fn all_correct_runs_output_the_join_of_inputs() {
    for alg in ALGORITHMS {
        for n in [4, 7] {
            let c = config(n, (n - 1) / 3, &[], alg, AdversarySpec::Silent);
            let top = join_all(&c.inputs);
            let r = run(&c).unwrap();
            assert!(r.all_pass, "{alg} n = {n}: {:?}", r.failed().collect::<Vec<_>>());
            for p in &r.processes {
                assert_eq!(p.output.as_ref(), Some(&top), "{alg} n = {n} process {}", p.id);
            }
        }
    }
}

#[test]
fn sqrtf_without_faults_decides_by_round_three() {
    for n in [4, 7, 10, 13] {
        let r = run(&config(n, (n - 1) / 3, &[], Algorithm::Sqrtf, AdversarySpec::Silent)).unwrap();
        assert!(r.outer_rounds <= 3, "n = {n}: {} rounds", r.outer_rounds);
        assert!(r.processes.iter().all(|p| p.decided_round.is_some_and(|d| d <= 3)));
    }
}

#[test]
fn silent_byzantine_values_stay_out() {
    for alg in ALGORITHMS {
        let r = run(&config(7, 2, &[5, 6], alg, AdversarySpec::Silent)).unwrap();
        let honest = join_all(&singletons(5));
        for p in r.processes.iter().filter(|p| p.correct) {
            assert_eq!(p.output.as_ref(), Some(&honest), "{alg} process {}", p.id);
        }
        assert!(r.byzantine_values.values().all(BTreeSet::is_empty));
    }
}

#[test]
fn injected_values_are_recorded_for_upward_validity() {
    for alg in ALGORITHMS {
        let r = run(&config(7, 2, &[5, 6], alg, AdversarySpec::InjectFresh)).unwrap();
        let upward = r.verdict("upward_validity").unwrap();
        assert!(upward.pass, "{alg}: {:?}", upward.witness);
        let recorded: usize = r.byzantine_values.values().map(BTreeSet::len).sum();
        assert!(recorded <= 2, "{alg}: {recorded} recorded values");
    }
}

#[test]
fn resilience_is_enforced() {
    let c = config(6, 2, &[], Algorithm::Logn, AdversarySpec::Silent);
    assert!(run(&c).is_err());
}

#[test]
fn reports_are_reproducible() {
    let c = RunConfig::generated(10, 3, 3, Algorithm::Logf, AdversarySpec::RandomWithinSafe(4), 11);
    assert_eq!(run(&c).unwrap().to_json(), run(&c).unwrap().to_json());
}

fn adversary() -> impl Strategy<Value = AdversarySpec> {
    prop_oneof![
        Just(AdversarySpec::Silent),
        (1usize..8).prop_map(AdversarySpec::CrashAt),
        Just(AdversarySpec::EquivocateSplit),
        Just(AdversarySpec::InjectFresh),
        (1usize..4).prop_map(AdversarySpec::Terrible),
        Just(AdversarySpec::LieLabel),
        any::<u64>().prop_map(AdversarySpec::RandomWithinSafe),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lattice_agreement_holds(
        n in 4usize..11,
        alg in prop::sample::select(ALGORITHMS.to_vec()),
        adv in adversary(),
        seed in any::<u64>(),
        t_pick in any::<usize>(),
    ) {
        let f = (n - 1) / 3;
        let c = RunConfig::generated(n, f, t_pick % (f + 1), alg, adv, seed);
        let r = run(&c).unwrap();
        for name in ["comparability", "downward_validity", "upward_validity", "round_bound", "message_bound"] {
            let v = r.verdict(name).unwrap();
            prop_assert!(v.pass, "{} failed on {}: {:?}", name, c.to_json(), v.witness);
        }
        let outs: Vec<&Element> = r.processes.iter().filter(|p| p.correct).filter_map(|p| p.output.as_ref()).collect();
        prop_assert_eq!(outs.len(), n - c.t());
        for a in &outs {
            for b in &outs {
                prop_assert!(a.comparable(b));
            }
        }
    }
}
