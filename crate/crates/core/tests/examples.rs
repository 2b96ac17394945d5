//! Worked examples on the shipped models, checked against hand computations.

use sixops::derived;
use sixops::field::{F2, Q};
use sixops::matrix::Matrix;
use sixops::models;
use sixops::ops::{self, PointMap};
use sixops::sheaf::StalkSheaf;
use sixops::simplicial::Stratification;

fn space(name: &str) -> std::sync::Arc<sixops::site::Space> {
    models::shipped(name).unwrap().space().clone()
}

#[test]
fn sierpinski_extension_class() {
    let s = space("sierpinski");
    let p = &s.poset;
    let ka = StalkSheaf::<Q>::constant_on(&s, &p.set_of(&["a"]).unwrap()).unwrap();
    let ke = StalkSheaf::<Q>::constant_on(&s, &p.set_of(&["e"]).unwrap()).unwrap();
    let ext = derived::ext_dims(&ka, &ke);
    assert_eq!(ext.first().copied().unwrap_or(0), 0);
    assert_eq!(ext.get(1).copied(), Some(1));
}

#[test]
fn sierpinski_constant_resolution() {
    let s = space("sierpinski");
    let k = StalkSheaf::<Q>::constant(&s);
    let r = derived::resolve(&k).unwrap();
    assert!(r.length() <= 1);
    assert_eq!(derived::cohomology(&k), vec![1]);
}

#[test]
fn circle_to_point_direct_image() {
    let s = space("circle");
    let k = StalkSheaf::<Q>::constant(&s);
    let ra = derived::rf_star(&PointMap::to_point(&s), &k);
    assert_eq!(derived::trim(ra.global_sections().cohomology()), vec![1, 1]);
}

#[test]
fn product_of_circles() {
    let m = models::shipped("circle-x-circle").unwrap();
    assert_eq!(derived::cohomology(&StalkSheaf::<Q>::constant(m.space())), vec![1, 2, 1]);
    let s = space("circle");
    let a = PointMap::to_point(&s);
    let k = StalkSheaf::<Q>::constant(&s);
    let d = derived::kunneth(&a, &a, &k, &k);
    assert!(d.holds());
    assert_eq!(derived::trim(d.target.stalk(0).cohomology()), vec![1, 2, 1]);
}

#[test]
fn sphere_and_rp2_over_two_fields() {
    assert_eq!(derived::cohomology(&StalkSheaf::<Q>::constant(&space("sphere"))), vec![1, 0, 1]);
    assert_eq!(derived::cohomology(&StalkSheaf::<F2>::constant(&space("rp2"))), vec![1, 1, 1]);
    assert_eq!(derived::cohomology(&StalkSheaf::<Q>::constant(&space("rp2"))), vec![1]);
}

#[test]
fn dual_of_constant_on_circle() {
    let d = derived::dual_prime(&StalkSheaf::<Q>::constant(&space("circle")));
    assert_eq!(derived::trim(d.global_sections().cohomology()), vec![1, 1]);
}

#[test]
fn constant_sheaf_on_circle_is_not_quasi_injective() {
    assert!(!ops::is_quasi_injective(&StalkSheaf::<Q>::constant(&space("circle"))));
}

#[test]
fn monodromy_sheaf_on_circle() {
    let m = models::shipped("circle").unwrap();
    let c = m.complex().unwrap();
    let s = m.space().clone();
    let idx = |vs: &[usize]| c.index_of(vs).unwrap();
    let a = idx(&[0]);
    let labels = (0..s.len()).map(|x| usize::from(x != a)).collect();
    let swap = Matrix::<Q>::from_i64(&[&[0, 1], &[1, 0]]);
    let f = Stratification::new(s.clone(), vec!["marked".into(), "rest".into()], labels, vec![2, 2])
        .with_edge(a, idx(&[0, 1]), Matrix::identity(2))
        .with_edge(a, idx(&[0, 2]), swap)
        .sheaf()
        .unwrap();
    // Invariants of the swap, and Euler characteristic zero.
    assert_eq!(derived::cohomology(&f), vec![1, 1]);
}

#[test]
fn non_invertible_map_inside_a_stratum_is_rejected() {
    let s = space("interval");
    let r = Stratification::<Q>::new(s.clone(), vec!["all".into()], vec![0; s.len()], vec![1]).with_edge(0, 2, Matrix::zeros(1, 1)).sheaf();
    assert!(r.is_err());
}
