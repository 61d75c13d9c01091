use a2planar::rewrite::{enumerate_basis, enumerate_basis_capped};
use a2planar::{Error, Sign, SignString};

/// Number of walks in the dominant chamber of the SU(3) weight lattice from 0 back to 0,
/// stepping by a weight of the fundamental representation for `-` and of its dual for `+`.
fn walk_count(sigma: &[Sign]) -> u64 {
    use std::collections::HashMap;
    let steps = [(1i32, 0i32), (-1, 1), (0, -1)];
    let mut cur: HashMap<(i32, i32), u64> = HashMap::from([((0, 0), 1)]);
    for s in sigma {
        let mut next = HashMap::new();
        for (&(a, b), &c) in &cur {
            for &(da, db) in &steps {
                let (da, db) = if *s == Sign::Minus { (da, db) } else { (-da, -db) };
                let (x, y) = (a + da, b + db);
                if x >= 0 && y >= 0 {
                    *next.entry((x, y)).or_insert(0) += c;
                }
            }
        }
        cur = next;
    }
    cur.get(&(0, 0)).copied().unwrap_or(0)
}

fn all_sigmas(len: usize) -> Vec<SignString> {
    (0..1u32 << len)
        .map(|bits| {
            SignString((0..len).map(|i| if bits >> i & 1 == 1 { Sign::Plus } else { Sign::Minus }).collect())
        })
        .collect()
}

#[test]
fn oracle_values() {
    let counts: Vec<u64> = (1..=5).map(|m| walk_count(&SignString::tl(m).0)).collect();
    assert_eq!(counts, vec![1, 2, 6, 23, 103]);
}

#[test]
fn tl_counts_match_oracle() {
    for (m, want) in [(1usize, 1usize), (2, 2), (3, 6), (4, 23), (5, 103)] {
        let sigma = SignString::tl(m);
        assert_eq!(enumerate_basis(&sigma).unwrap().len(), want, "m = {m}");
    }
}

#[test]
fn every_short_boundary_matches_oracle() {
    for len in 0..=8 {
        for sigma in all_sigmas(len) {
            let got = enumerate_basis(&sigma).unwrap().len() as u64;
            assert_eq!(got, walk_count(&sigma.0), "sigma = {sigma}");
        }
    }
}

#[test]
fn permutation_invariance() {
    for len in 0..=6 {
        let mut by_content = std::collections::BTreeMap::new();
        for sigma in all_sigmas(len) {
            let minus = sigma.0.iter().filter(|s| **s == Sign::Minus).count();
            let n = enumerate_basis(&sigma).unwrap().len();
            let prev = *by_content.entry(minus).or_insert(n);
            assert_eq!(prev, n, "sigma = {sigma}");
        }
    }
}

#[test]
fn basis_webs_are_distinct_and_valid() {
    let ws = enumerate_basis(&SignString::tl(4)).unwrap();
    let mut keys = std::collections::BTreeSet::new();
    for w in &ws {
        w.validate().unwrap();
        assert!(keys.insert(w.canonical_key().unwrap()));
    }
}

#[test]
fn frontier_cap_enforced() {
    let err = enumerate_basis_capped(&SignString::tl(4), 5).unwrap_err();
    assert!(matches!(err, Error::FrontierCap { .. }));
}
