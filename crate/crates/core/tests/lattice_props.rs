use bla_core::lattice::{join_all, member_of_generated, Element, GeneratingSet, Tag};
use proptest::prelude::*;

fn element() -> impl Strategy<Value = Element> {
    proptest::collection::btree_set((0usize..6, 0u32..2), 0..6)
        .prop_map(|s| Element::from_tags(s.into_iter().map(|(o, k)| Tag::new(o, k))))
}

fn as_mask(v: &Element) -> u16 {
    v.tags().iter().fold(0, |m, t| m | 1 << (t.origin * 2 + t.nonce as usize))
}

/// Membership by enumerating every nonempty subset of generators.
fn brute_member(g: &[Element], v: &Element) -> bool {
    let want = as_mask(v);
    (1u32..1 << g.len()).any(|pick| {
        let got = g
            .iter()
            .enumerate()
            .filter(|(i, _)| pick >> i & 1 == 1)
            .fold(0u16, |m, (_, e)| m | as_mask(e));
        got == want
    })
}

proptest! {
    #[test]
    fn join_laws(a in element(), b in element(), c in element()) {
        prop_assert_eq!(a.join(&b), b.join(&a));
        prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
        prop_assert_eq!(a.join(&a), a.clone());
        prop_assert_eq!(a.join(&Element::bottom()), a.clone());
    }

    #[test]
    fn join_is_least_upper_bound(a in element(), b in element(), c in element()) {
        let j = a.join(&b);
        prop_assert!(a.leq(&j) && b.leq(&j));
        if a.leq(&c) && b.leq(&c) {
            prop_assert!(j.leq(&c));
        }
    }

    #[test]
    fn order_matches_join(a in element(), b in element()) {
        prop_assert_eq!(a.leq(&b), a.join(&b) == b);
        prop_assert_eq!(a.comparable(&b), a.leq(&b) || b.leq(&a));
        prop_assert_eq!(a.height() + b.height(), a.join(&b).height() + (as_mask(&a) & as_mask(&b)).count_ones() as usize);
    }

    #[test]
    fn text_round_trip(a in element()) {
        prop_assert_eq!(a.to_string().parse::<Element>().unwrap(), a);
    }

    #[test]
    fn generated_membership_matches_subsets(g in proptest::collection::vec(element(), 0..7), v in element()) {
        let gen = GeneratingSet::new(g.iter().cloned());
        let members: Vec<Element> = gen.members.iter().cloned().collect();
        prop_assert_eq!(member_of_generated(&gen, &v), brute_member(&members, &v));
    }

    #[test]
    fn generators_and_their_joins_are_members(g in proptest::collection::vec(element(), 1..6)) {
        let gen = GeneratingSet::new(g.iter().cloned());
        for m in &g {
            prop_assert!(member_of_generated(&gen, m));
        }
        prop_assert!(member_of_generated(&gen, &join_all(&g)));
        prop_assert_eq!(gen.top(), join_all(&g));
    }
}
