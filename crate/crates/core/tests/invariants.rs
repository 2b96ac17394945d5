//! Property tests over random posets, sheaves and complexes.

mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sixops::derived;
use sixops::field::{F2, F3, Q};
use sixops::laws::{self, random_space, SuiteConfig};
use sixops::ops::{self, PointMap};
use sixops::presheaf::{self, from_stalks, random_presheaf};
use sixops::sheaf::{random_sheaf, StalkSheaf};
use sixops::simplicial::SimplicialComplex;
use sixops::site::FiniteSite;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random complex on up to five vertices from a handful of random facets.
fn random_complex(seed: u64) -> SimplicialComplex {
    let mut r = rng(seed);
    let names = ["a", "b", "c", "d", "e"];
    let n = rand::Rng::gen_range(&mut r, 2..=5);
    let mut facets: Vec<Vec<&str>> = (0..n).map(|i| vec![names[i]]).collect();
    for _ in 0..rand::Rng::gen_range(&mut r, 1..=5) {
        let f: Vec<&str> = names[..n].iter().copied().filter(|_| rand::Rng::gen_bool(&mut r, 0.5)).collect();
        if !f.is_empty() {
            facets.push(f);
        }
    }
    let refs: Vec<&[&str]> = facets.iter().map(Vec::as_slice).collect();
    SimplicialComplex::from_facets("random", &names[..n], &refs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constant_cohomology_matches_simplicial_oracle(seed in any::<u64>()) {
        let c = random_complex(seed);
        let s = c.space();
        let q = derived::cohomology(&StalkSheaf::<Q>::constant(&s));
        let f2 = derived::cohomology(&StalkSheaf::<F2>::constant(&s));
        prop_assert_eq!(q, common::simplicial_cohomology(&c.simplices, 0));
        prop_assert_eq!(f2, common::simplicial_cohomology(&c.simplices, 2));
    }

    #[test]
    fn resolutions_agree_with_cech_on_star_covers(seed in any::<u64>()) {
        let c = random_complex(seed);
        let s = c.space();
        let f: StalkSheaf<F3> = random_sheaf(&s, &mut rng(seed ^ 1), 2);
        let cech = derived::trim(derived::cech_cohomology(&derived::star_cover(&s.poset), &f));
        prop_assert_eq!(derived::cohomology(&f), cech);
    }

    #[test]
    fn resolution_length_is_bounded_by_height(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_space(&mut r, 8, 4);
        let f: StalkSheaf<Q> = random_sheaf(&s, &mut r, 3);
        let res = derived::resolve(&f).unwrap();
        prop_assert!(res.length() <= s.poset.height() + 1);
        prop_assert!(res.is_exact(&f.rep));
    }

    #[test]
    fn inverse_direct_adjunction(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_space(&mut r, 6, 3);
        let y = random_space(&mut r, 5, 3);
        let map = common::random_monotone(&mut r, &|a, b| x.poset.leq(a, b), x.len(), &|a, b| y.poset.leq(a, b), y.len());
        let f = PointMap::new(x.clone(), y.clone(), map).unwrap();
        let a: StalkSheaf<Q> = random_sheaf(&x, &mut r, 2);
        let g: StalkSheaf<Q> = random_sheaf(&y, &mut r, 2);
        prop_assert!(ops::adjunction_check(&f, &a, &g).passed());
    }

    #[test]
    fn stalk_sheaves_satisfy_descent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_space(&mut r, 6, 3);
        let site = Arc::new(FiniteSite::alexandrov(s.clone()));
        let f: StalkSheaf<Q> = random_sheaf(&s, &mut r, 2);
        let g = from_stalks(&f, &site);
        prop_assert!(g.is_sheaf());
        let back = g.to_stalks().unwrap();
        prop_assert_eq!(back.dims(), f.dims());
    }

    #[test]
    fn sheafification_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_space(&mut r, 4, 2);
        let site = Arc::new(FiniteSite::alexandrov(s));
        let f = random_presheaf::<Q, _>(&site, &mut r, 2);
        let (ff, _) = f.sheafify();
        let (fff, eta) = ff.sheafify();
        prop_assert!(ff.is_sheaf());
        prop_assert!(eta.is_iso());
        prop_assert_eq!(ff.rep.dims(), fff.rep.dims());
        prop_assert!(presheaf::sheafify_adjunction(&f, &ff).bijective);
    }

    #[test]
    fn direct_images_compose(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_space(&mut r, 5, 2);
        let y = random_space(&mut r, 4, 2);
        let f = laws::random_monotone_map(&mut r, &x, &y);
        let g = PointMap::to_point(&y);
        let a: StalkSheaf<Q> = random_sheaf(&x, &mut r, 2);
        let c = derived::direct_composition_check(&f, &g, &a);
        prop_assert!(c.quasi_iso && c.dims_agree);
    }

    #[test]
    fn law_trials_replay_from_their_seed(seed in any::<u64>()) {
        let cfg = SuiteConfig { laws: vec!["adjunction".into()], trials: 1, seed, ..Default::default() };
        let rep = laws::run_law_suite::<Q>(&cfg).unwrap().remove(0);
        let outs = laws::replay::<Q>("adjunction", laws::trial_seed(seed, "adjunction", 0), &cfg).unwrap();
        prop_assert_eq!(outs.iter().filter(|o| o.ok).count(), rep.asserted_pass);
    }
}
