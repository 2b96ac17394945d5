//! The comparison functors on the shipped coarse sites.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sixops::field::Q;
use sixops::laws::{self, Status, SuiteConfig};
use sixops::models;
use sixops::ops;
use sixops::presheaf::random_presheaf;
use sixops::rho::{self, Rho};
use sixops::sheaf::{random_sheaf, StalkSheaf};

fn rho_of(name: &str) -> Rho {
    Rho::new(models::shipped(name).unwrap().site().site.clone()).unwrap()
}

#[test]
fn direct_image_of_an_indicator() {
    let rho = rho_of("coarse-circle");
    let p = &rho.space.poset;
    let u = p.set_of(&["a", "a-b", "a-c"]).unwrap();
    let k = StalkSheaf::<Q>::constant_on(&rho.space, &u).unwrap();
    let g = rho::rho_direct(&rho, &k);
    for (i, w) in rho.lattice().opens().iter().enumerate() {
        assert_eq!(g.dim(i), k.sections_dim(w), "{:?}", p.names_of(w));
    }
    assert!(g.is_sheaf());
}

#[test]
fn coarse_sheaf_outside_the_image() {
    // With only trivial coverings a coarse sheaf need not satisfy fine descent.
    let rho = rho_of("coarse-interval");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let found = (0..50).any(|_| {
        let g = random_presheaf::<Q, _>(&rho.coarse, &mut rng, 2).sheafify().0;
        !rho::rho_direct_unit(&rho, &g).is_iso()
    });
    assert!(found);
}

#[test]
fn shriek_of_constants_respects_tensor() {
    let rho = rho_of("coarse-circle");
    let k = StalkSheaf::<Q>::constant(&rho.space);
    let one = rho::rho_shriek(&rho, &k).sheaf;
    let two = rho::rho_shriek(&rho, &ops::tensor(&k, &k)).sheaf;
    let prod = ops::sheafified_tensor(&one, &one);
    assert_eq!(two.rep.dims(), prod.rep.dims());
}

#[test]
fn adjunctions_and_hom_formula_on_the_star_site() {
    let rho = rho_of("coarse-circle");
    assert!(rho.is_basis() && rho.has_full_coverings());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let f: StalkSheaf<Q> = random_sheaf(&rho.space, &mut rng, 2);
        let g = random_presheaf::<Q, _>(&rho.coarse, &mut rng, 2).sheafify().0;
        assert!(rho::rho_shriek_adjunction_check(&rho, &f, &g).holds());
        assert!(rho::rho_direct_adjunction_check(&rho, &g, &f).holds());
        assert!(rho::rho_hom_formula_check(&rho, &f, &g).iso);
        assert!(rho::rho_shriek_unit(&rho, &rho::rho_shriek(&rho, &f)).is_iso());
    }
}

#[test]
fn identities_are_skipped_on_a_non_basis_site() {
    let cfg = SuiteConfig {
        laws: vec!["rho-identities".into()],
        trials: 5,
        seed: 1,
        models: vec![models::shipped("coarse-interval-nonbasis").unwrap()],
        ..Default::default()
    };
    let r = laws::run_law_suite::<Q>(&cfg).unwrap().remove(0);
    assert_eq!(r.status, Status::Skipped);
    assert!(!r.warnings.is_empty());
}

#[test]
fn crafted_site_is_refused() {
    let cfg = SuiteConfig {
        laws: vec!["rho-adjunction".into()],
        trials: 1,
        seed: 1,
        models: vec![models::shipped("coarse-circle-crafted").unwrap()],
        ..Default::default()
    };
    let r = laws::run_law_suite::<Q>(&cfg).unwrap().remove(0);
    assert_eq!(r.status, Status::Skipped);
}
