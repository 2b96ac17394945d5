//! The comparison morphism `ρ: X -> X'` between the Alexandrov site of a space and a
//! coarse subsite: `ρ_*`, `ρ^{-1}`, `ρ_!`, their units and counits, and the identities
//! relating them.
//!
//! Fine sheaves are stalk functors; coarse sheaves are presheaves on the coarse lattice.
//! `ρ^{-1}G` has stalk `G(W_x)` where `W_x` is the smallest coarse open containing `x`.
//! `ρ_!` is the left adjoint of `ρ^{-1}`: the coarse sheafification of the presheaf
//! `W ↦ colim_{x : W ⊆ W_x} F_x`.

use std::sync::Arc;

use serde::Serialize;

use crate::field::Field;
use crate::matrix::Matrix;
use crate::ops::inverse_image_kan;
use crate::pointset::PointSet;
use crate::presheaf::{self, factor_through, from_stalks, morphism_from_stalks, sheafify_morphism, Presheaf};
use crate::rep::{self, Colimit, Limit, Morphism, Rep};
use crate::sheaf::{self, SheafShortExact, StalkSheaf};
use crate::site::{FiniteSite, OpenLattice, SiteError, SiteMorphism, Space};

/// `ρ` together with the data every functor needs.
#[derive(Debug, Clone)]
pub struct Rho {
    pub space: Arc<Space>,
    pub fine: Arc<FiniteSite>,
    pub coarse: Arc<FiniteSite>,
    pub morphism: SiteMorphism,
    /// Lattice index of the smallest coarse open containing each point.
    pub hull: Vec<usize>,
}

impl Rho {
    pub fn new(coarse: Arc<FiniteSite>) -> Result<Self, SiteError> {
        let space = coarse.backing.clone().ok_or_else(|| SiteError::LatticeMap("coarse site needs a backing space".into()))?;
        let fine = Arc::new(FiniteSite::alexandrov(space.clone()));
        let morphism = SiteMorphism::inclusion(fine.clone(), coarse.clone())?;
        morphism.validate()?;
        let lat = coarse.lattice()?;
        let n = space.len();
        let hull = (0..n)
            .map(|x| {
                let mut s = PointSet::full(n);
                for w in lat.opens().iter().filter(|w| w.contains(x)) {
                    s = s.intersection(w);
                }
                lat.index_of(&s).expect("coarse lattice is closed under meets")
            })
            .collect();
        Ok(Rho { space, fine, coarse, morphism, hull })
    }

    pub fn lattice(&self) -> &OpenLattice {
        self.coarse.lattice().expect("coarse lattice")
    }

    /// The sublattice contains every `U_x`.
    pub fn is_basis(&self) -> bool {
        self.coarse.basis
    }

    /// Basis sublattice whose coverings include every union covering.
    pub fn has_full_coverings(&self) -> bool {
        if !self.is_basis() {
            return false;
        }
        let lat = self.lattice();
        (0..lat.len()).all(|u| {
            let mut fam: Vec<usize> = lat.open(u).iter().map(|x| self.hull[x]).collect();
            fam.sort_unstable();
            fam.dedup();
            self.coarse.is_covering(u, &fam)
        })
    }

    /// Points `x` with `W ⊆ W_x`; a down-set.
    pub fn shriek_index(&self, w: usize) -> PointSet {
        let lat = self.lattice();
        PointSet::from_iter(self.space.len(), (0..self.space.len()).filter(|&x| lat.open(w).is_subset(lat.open(self.hull[x]))))
    }

    /// Coarse opens contained in `W`, as a subset of the lattice order.
    fn below(&self, w: usize) -> PointSet {
        let lat = self.lattice();
        PointSet::from_iter(lat.len(), (0..lat.len()).filter(|&v| lat.open(v).is_subset(lat.open(w))))
    }
}

/// `ρ_*F`: the sections of `F` on coarse opens.
pub fn rho_direct<F: Field>(rho: &Rho, f: &StalkSheaf<F>) -> Presheaf<F> {
    from_stalks(f, &rho.coarse)
}

pub fn rho_direct_morphism<F: Field>(rho: &Rho, a: &StalkSheaf<F>, b: &StalkSheaf<F>, phi: &Morphism<F>) -> Morphism<F> {
    morphism_from_stalks(a, b, phi, &rho.coarse)
}

/// `ρ^{-1}G` by the stalk formula `(ρ^{-1}G)_x = G(W_x)`.
pub fn rho_inverse<F: Field>(rho: &Rho, g: &Presheaf<F>) -> StalkSheaf<F> {
    let dims = rho.hull.iter().map(|&w| g.dim(w)).collect();
    let rep = Rep::build(&rho.space.poset, dims, |x, y| g.restrict(rho.hull[x], rho.hull[y]).clone());
    StalkSheaf { space: rho.space.clone(), rep }
}

pub fn rho_inverse_morphism<F: Field>(rho: &Rho, phi: &Morphism<F>) -> Morphism<F> {
    Morphism { comps: rho.hull.iter().map(|&w| phi.comp(w).clone()).collect() }
}

/// `ρ^{-1}G` as the fine sheafification of the Kan presheaf, read off at the stars.
pub fn rho_inverse_kan<F: Field>(rho: &Rho, g: &Presheaf<F>) -> StalkSheaf<F> {
    inverse_image_kan(&rho.morphism, g).sheafify().0.to_stalks().expect("fine site is Alexandrov")
}

/// Comparison from the stalk formula to the Kan construction: at `x`, the colimit
/// insertion of `G(W_x)` followed by the sheafification unit at `U_x`.
pub fn rho_inverse_comparison<F: Field>(rho: &Rho, g: &Presheaf<F>) -> Morphism<F> {
    let kan = inverse_image_kan(&rho.morphism, g);
    let (_, unit) = kan.sheafify();
    let sl = rho.fine.lattice().expect("fine lattice");
    let tl = rho.lattice();
    let comps = (0..rho.space.len())
        .map(|x| {
            let u = sl.index_of(rho.space.poset.up(x)).expect("star");
            let index = PointSet::from_iter(tl.len(), (0..tl.len()).filter(|&w| sl.open(u).is_subset(tl.open(w))));
            let colim = g.rep.colimit(tl.order(), &index);
            unit.comp(u).mul(&colim.inj(rho.hull[x]))
        })
        .collect();
    Morphism { comps }
}

/// Counit `ρ^{-1}ρ_*F -> F`: evaluation of a section over `W_x` at `x`.
pub fn rho_direct_counit<F: Field>(rho: &Rho, f: &StalkSheaf<F>) -> Morphism<F> {
    let lat = rho.lattice();
    Morphism { comps: (0..rho.space.len()).map(|x| f.sections(lat.open(rho.hull[x])).proj(x)).collect() }
}

/// Unit `G -> ρ_*ρ^{-1}G`.
pub fn rho_direct_unit<F: Field>(rho: &Rho, g: &Presheaf<F>) -> Morphism<F> {
    let lat = rho.lattice();
    let h = rho_inverse(rho, g);
    let comps = (0..lat.len())
        .map(|w| {
            let l = h.sections(lat.open(w));
            let vals = l.gather(|x| g.restrict(w, rho.hull[x]).clone(), g.dim(w));
            l.coords(&vals).expect("restrictions form a section")
        })
        .collect();
    Morphism { comps }
}

/// Sections of `F` over an arbitrary subset: the limit of the stalks over `S`.
pub fn closure_sections<F: Field>(s: &PointSet, f: &StalkSheaf<F>) -> Limit<F> {
    f.sections(s)
}

/// `ρ_!F` with the presheaf it sheafifies.
#[derive(Debug, Clone)]
pub struct ShriekImage<F> {
    pub presheaf: Presheaf<F>,
    pub colimits: Vec<Colimit<F>>,
    pub sheaf: Presheaf<F>,
    pub unit: Morphism<F>,
}

fn stacked<F: Field>(parts: Vec<Matrix<F>>, rows: usize) -> Matrix<F> {
    let refs: Vec<&Matrix<F>> = parts.iter().collect();
    if refs.is_empty() {
        Matrix::zeros(rows, 0)
    } else {
        Matrix::hstack(&refs)
    }
}

/// The presheaf `W ↦ colim_{x : W ⊆ W_x} F_x` and its colimit data.
pub fn shriek_presheaf<F: Field>(rho: &Rho, f: &StalkSheaf<F>) -> (Presheaf<F>, Vec<Colimit<F>>) {
    let lat = rho.lattice();
    let index: Vec<PointSet> = (0..lat.len()).map(|w| rho.shriek_index(w)).collect();
    let colims: Vec<Colimit<F>> = index.iter().map(|s| f.rep.colimit(&rho.space.poset, s)).collect();
    let dims = colims.iter().map(|c| c.dim()).collect();
    let r = Rep::build(lat.order(), dims, |u, v| {
        let (cu, cv) = (&colims[u], &colims[v]);
        stacked(index[u].iter().map(|x| cv.inj(x)).collect(), cv.dim()).mul(&cu.section)
    });
    (Presheaf { site: rho.coarse.clone(), rep: r }, colims)
}

pub fn rho_shriek<F: Field>(rho: &Rho, f: &StalkSheaf<F>) -> ShriekImage<F> {
    let (p, colimits) = shriek_presheaf(rho, f);
    let (sheaf, unit) = p.sheafify();
    ShriekImage { presheaf: p, colimits, sheaf, unit }
}

/// `ρ_!φ` between the sheaves of `rho_shriek(a)` and `rho_shriek(b)`.
pub fn rho_shriek_morphism<F: Field>(rho: &Rho, sa: &ShriekImage<F>, sb: &ShriekImage<F>, phi: &Morphism<F>) -> Morphism<F> {
    let lat = rho.lattice();
    let comps = (0..lat.len())
        .map(|w| {
            let (ca, cb) = (&sa.colimits[w], &sb.colimits[w]);
            let parts = rho.shriek_index(w).iter().map(|x| cb.inj(x).mul(phi.comp(x))).collect();
            stacked(parts, cb.dim()).mul(&ca.section)
        })
        .collect();
    sheafify_morphism(&sa.presheaf, &sb.presheaf, &Morphism { comps })
}

/// Unit `F -> ρ^{-1}ρ_!F`.
pub fn rho_shriek_unit<F: Field>(rho: &Rho, s: &ShriekImage<F>) -> Morphism<F> {
    Morphism { comps: rho.hull.iter().enumerate().map(|(x, &w)| s.unit.comp(w).mul(&s.colimits[w].inj(x))).collect() }
}

/// Counit `ρ_!ρ^{-1}G -> G` for a coarse sheaf `G`, where `s = rho_shriek(ρ^{-1}G)`.
pub fn rho_shriek_counit<F: Field>(rho: &Rho, s: &ShriekImage<F>, g: &Presheaf<F>) -> Option<Morphism<F>> {
    let lat = rho.lattice();
    let comps = (0..lat.len())
        .map(|w| {
            let c = &s.colimits[w];
            let parts = rho.shriek_index(w).iter().map(|x| g.restrict(rho.hull[x], w).clone()).collect();
            stacked(parts, g.dim(w)).mul(&c.section)
        })
        .collect();
    factor_through(&s.presheaf, &s.sheaf, &s.unit, g, &Morphism { comps })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RhoAdjunctionReport {
    pub dim_coarse: usize,
    pub dim_fine: usize,
    pub bijective: bool,
    pub triangles: bool,
}

impl RhoAdjunctionReport {
    pub fn holds(&self) -> bool {
        self.bijective && self.triangles
    }
}

/// Matrix of `ψ ↦ ρ^{-1}ψ ∘ η_F` from `Hom(ρ_!F, G)` to `Hom(F, ρ^{-1}G)`.
fn transpose_matrix<F: Field>(rho: &Rho, f: &StalkSheaf<F>, s: &ShriekImage<F>, g: &Presheaf<F>) -> Matrix<F> {
    let h = rho_inverse(rho, g);
    let eta = rho_shriek_unit(rho, s);
    let hc = presheaf::hom_space(&s.sheaf, g);
    let hf = sheaf::hom_space(f, &h);
    let cols: Vec<Vec<F>> = (0..hc.dim())
        .map(|k| {
            let psi = hc.basis_morphism(k);
            let v = hf.flatten(|x| psi.comp(rho.hull[x]).mul(eta.comp(x)));
            hf.basis.solve(&Matrix::column(v)).expect("transpose is natural").col(0)
        })
        .collect();
    Matrix::from_fn(hf.dim(), hc.dim(), |i, j| cols[j][i].clone())
}

/// Checks `Hom(ρ_!F, G) ≅ Hom(F, ρ^{-1}G)` via the unit, and both triangle identities.
pub fn rho_shriek_adjunction_check<F: Field>(rho: &Rho, f: &StalkSheaf<F>, g: &Presheaf<F>) -> RhoAdjunctionReport {
    let s = rho_shriek(rho, f);
    let m = transpose_matrix(rho, f, &s, g);
    let h = rho_inverse(rho, g);
    // ρ^{-1}ε_G ∘ η_{ρ^{-1}G} = 1
    let sh = rho_shriek(rho, &h);
    let first = match rho_shriek_counit(rho, &sh, g) {
        Some(eps) => rho_shriek_unit(rho, &sh).then(&rho_inverse_morphism(rho, &eps)) == Morphism::identity(&h.rep),
        None => false,
    };
    // ε_{ρ_!F} ∘ ρ_!η_F = 1
    let rs = rho_inverse(rho, &s.sheaf);
    let srs = rho_shriek(rho, &rs);
    let eta = rho_shriek_unit(rho, &s);
    let second = match rho_shriek_counit(rho, &srs, &s.sheaf) {
        Some(eps) => rho_shriek_morphism(rho, &s, &srs, &eta).then(&eps) == Morphism::identity(&s.sheaf.rep),
        None => false,
    };
    RhoAdjunctionReport { dim_coarse: m.cols(), dim_fine: m.rows(), bijective: m.is_invertible(), triangles: first && second }
}

/// Checks `Hom(ρ^{-1}G, F) ≅ Hom(G, ρ_*F)` via the unit of `G`, and both triangles.
pub fn rho_direct_adjunction_check<F: Field>(rho: &Rho, g: &Presheaf<F>, f: &StalkSheaf<F>) -> RhoAdjunctionReport {
    let h = rho_inverse(rho, g);
    let pf = rho_direct(rho, f);
    let unit = rho_direct_unit(rho, g);
    let hf = sheaf::hom_space(&h, f);
    let hc = presheaf::hom_space(g, &pf);
    let cols: Vec<Vec<F>> = (0..hf.dim())
        .map(|k| {
            let psi = hf.basis_morphism(k);
            let pushed = rho_direct_morphism(rho, &h, f, &psi);
            let v = hc.flatten(|w| pushed.comp(w).mul(unit.comp(w)));
            hc.basis.solve(&Matrix::column(v)).expect("transpose is natural").col(0)
        })
        .collect();
    let m = Matrix::from_fn(hc.dim(), hf.dim(), |i, j| cols[j][i].clone());
    // ε_{ρ^{-1}G} ∘ ρ^{-1}η_G = 1
    let first = rho_inverse_morphism(rho, &unit).then(&rho_direct_counit(rho, &h)) == Morphism::identity(&h.rep);
    // ρ_*ε_F ∘ η_{ρ_*F} = 1
    let rf = rho_inverse(rho, &pf);
    let eps = rho_direct_counit(rho, f);
    let second = rho_direct_unit(rho, &pf).then(&rho_direct_morphism(rho, &rf, f, &eps)) == Morphism::identity(&pf.rep);
    RhoAdjunctionReport { dim_coarse: m.rows(), dim_fine: m.cols(), bijective: m.is_invertible(), triangles: first && second }
}

/// `ρ^{-1}ρ_*F ≅ F` through the counit.
pub fn inverse_direct_is_identity<F: Field>(rho: &Rho, f: &StalkSheaf<F>) -> bool {
    rho_direct_counit(rho, f).is_iso()
}

/// `ρ^{-1}ρ_!F ≅ F` through the unit.
pub fn inverse_shriek_is_identity<F: Field>(rho: &Rho, f: &StalkSheaf<F>) -> bool {
    rho_shriek_unit(rho, &rho_shriek(rho, f)).is_iso()
}

/// `ρ_!` applied to a short exact sequence of fine sheaves stays exact.
pub fn rho_shriek_exactness<F: Field>(rho: &Rho, ses: &SheafShortExact<F>) -> bool {
    let (sa, sb, sc) = (rho_shriek(rho, &ses.a), rho_shriek(rho, &ses.b), rho_shriek(rho, &ses.c));
    let i = rho_shriek_morphism(rho, &sa, &sb, &ses.i);
    let q = rho_shriek_morphism(rho, &sb, &sc, &ses.q);
    presheaf::is_short_exact(&sb.sheaf, &sc.sheaf, &i, &q)
}

/// Exactness of `ρ_*` on a short exact sequence: `(mono, exact in the middle, epi)`.
pub fn rho_direct_exactness<F: Field>(rho: &Rho, ses: &SheafShortExact<F>) -> (bool, bool, bool) {
    let (b, c) = (rho_direct(rho, &ses.b), rho_direct(rho, &ses.c));
    let i = rho_direct_morphism(rho, &ses.a, &ses.b, &ses.i);
    let q = rho_direct_morphism(rho, &ses.b, &ses.c, &ses.q);
    (presheaf::is_monomorphism(&i), presheaf::locally_exact(&b, &i, &q), presheaf::is_epimorphism(&c, &q))
}

/// `ρ^{-1}` on a short exact sequence of coarse sheaves is stalkwise exact.
pub fn rho_inverse_exactness<F: Field>(rho: &Rho, a: &Presheaf<F>, b: &Presheaf<F>, c: &Presheaf<F>, i: &Morphism<F>, q: &Morphism<F>) -> bool {
    let _ = (a, c);
    let (fi, fq) = (rho_inverse_morphism(rho, i), rho_inverse_morphism(rho, q));
    let fb = rho_inverse(rho, b);
    fi.is_mono() && fq.is_epi() && rep::exact_at(&fi, &fq, fb.dims())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomFormulaReport {
    /// Stalk dimensions of `ρ^{-1}Hom(ρ_!F, G)`.
    pub left: Vec<usize>,
    /// Stalk dimensions of `Hom(F, ρ^{-1}G)`.
    pub right: Vec<usize>,
    pub iso: bool,
}

/// The canonical map `ρ^{-1}Hom(ρ_!F, G) -> Hom(F, ρ^{-1}G)`, checked stalkwise.
pub fn rho_hom_formula_check<F: Field>(rho: &Rho, f: &StalkSheaf<F>, g: &Presheaf<F>) -> HomFormulaReport {
    let lat = rho.lattice();
    let p = &rho.space.poset;
    let s = rho_shriek(rho, f);
    let h = rho_inverse(rho, g);
    let eta = rho_shriek_unit(rho, &s);
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut iso = true;
    for x in 0..p.len() {
        let w = rho.hull[x];
        let hc = rep::hom_space(lat.order(), &s.sheaf.rep, &g.rep, &rho.below(w));
        let hf = rep::hom_space(p, &f.rep, &h.rep, p.up(x));
        let cols: Vec<Vec<F>> = (0..hc.dim())
            .map(|k| {
                let v = hc.basis.col(k);
                let flat = hf.flatten(|y| hc.component(&v, rho.hull[y]).mul(eta.comp(y)));
                hf.basis.solve(&Matrix::column(flat)).expect("transpose is natural").col(0)
            })
            .collect();
        let m = Matrix::from_fn(hf.dim(), hc.dim(), |i, j| cols[j][i].clone());
        left.push(hc.dim());
        right.push(hf.dim());
        iso &= m.is_invertible();
    }
    HomFormulaReport { left, right, iso }
}

/// The closure presheaf `W ↦ Γ(cl(W); F)`.
pub fn closure_presheaf<F: Field>(rho: &Rho, f: &StalkSheaf<F>) -> Presheaf<F> {
    let lat = rho.lattice();
    let p = &rho.space.poset;
    let limits: Vec<Limit<F>> = lat.opens().iter().map(|w| closure_sections(&p.down_closure(w), f)).collect();
    let dims = limits.iter().map(|l| l.dim()).collect();
    let r = Rep::build(lat.order(), dims, |u, v| {
        let (lu, lv) = (&limits[u], &limits[v]);
        lv.coords(&lv.gather(|x| lu.proj(x), lu.dim())).expect("restriction of a section")
    });
    Presheaf { site: rho.coarse.clone(), rep: r }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureComparison {
    /// Section dimensions of `ρ_!F` on each coarse open.
    pub adjoint: Vec<usize>,
    /// Section dimensions of the sheafified closure presheaf.
    pub closure: Vec<usize>,
    pub agree: bool,
}

/// Compares `ρ_!F` with the sheafified closure presheaf, open by open.
pub fn closure_formula_report<F: Field>(rho: &Rho, f: &StalkSheaf<F>) -> ClosureComparison {
    let a = rho_shriek(rho, f).sheaf;
    let c = closure_presheaf(rho, f).sheafify().0;
    let adjoint = a.rep.dims().to_vec();
    let closure = c.rep.dims().to_vec();
    ClosureComparison { agree: adjoint == closure, adjoint, closure }
}

/// Union of the opens `V ⊆ U` with `V ⊂⊂ U`.
pub fn largest_rel_compact_in(space: &Space, u: &PointSet) -> PointSet {
    let p = &space.poset;
    let mut out = p.empty_set();
    for x in u.iter() {
        let ux = p.up(x);
        if space.rel_compact_leq(ux, u).unwrap_or(false) {
            out = out.union(ux);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LindComparison {
    /// `Γ(cl(W); k_U)` for each coarse open `W`.
    pub closure: Vec<usize>,
    /// `ρ_!k_{V*}` sections with `V*` the greatest `V ⊂⊂ U`.
    pub colimit: Vec<usize>,
    pub agree: bool,
}

/// `ρ_!k_U` by the closure formula against the colimit `colim_{V⊂⊂U} k_V` evaluated
/// at its greatest element.
pub fn lind_report<F: Field>(rho: &Rho, u: &PointSet) -> Result<LindComparison, sheaf::SheafError> {
    let ku = StalkSheaf::<F>::constant_on(&rho.space, u)?;
    let vstar = largest_rel_compact_in(&rho.space, u);
    let kv = StalkSheaf::<F>::constant_on(&rho.space, &vstar)?;
    let closure = closure_presheaf(rho, &ku).rep.dims().to_vec();
    let colimit = rho_shriek(rho, &kv).sheaf.rep.dims().to_vec();
    Ok(LindComparison { agree: closure == colimit, closure, colimit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;
    use crate::poset::PosetSpace;
    use crate::site::coarse_subsite;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn interval() -> Arc<Space> {
        let p = PosetSpace::new(
            vec!["v0".into(), "e".into(), "v1".into()],
            &[("v0".into(), "e".into()), ("v1".into(), "e".into())],
        )
        .unwrap();
        Arc::new(Space::new("interval", p))
    }

    fn full_rho(sp: &Arc<Space>) -> Rho {
        let fine = FiniteSite::alexandrov(sp.clone());
        let opens = fine.lattice().unwrap().opens().to_vec();
        let lat = fine.lattice().unwrap();
        let mut covers = BTreeMap::new();
        for u in 0..lat.len() {
            covers.insert(u, vec![fine.finest_cover(u)]);
        }
        let coarse = coarse_subsite(&fine, "full", opens, covers).unwrap();
        Rho::new(Arc::new(coarse)).unwrap()
    }

    #[test]
    fn full_sublattice_is_identity() {
        let sp = interval();
        let rho = full_rho(&sp);
        assert!(rho.is_basis() && rho.has_full_coverings());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let f: StalkSheaf<Q> = sheaf::random_sheaf(&sp, &mut rng, 2);
            assert!(inverse_direct_is_identity(&rho, &f));
            assert!(inverse_shriek_is_identity(&rho, &f));
            let g = rho_direct(&rho, &sheaf::random_sheaf(&sp, &mut rng, 2));
            assert!(g.is_sheaf());
            assert!(rho_shriek_adjunction_check(&rho, &f, &g).holds());
            assert!(rho_direct_adjunction_check(&rho, &g, &f).holds());
            assert!(rho_inverse_comparison(&rho, &g).is_iso());
        }
    }

    #[test]
    fn closure_sections_of_two_arcs() {
        let sp = interval();
        let k: StalkSheaf<Q> = StalkSheaf::constant(&sp);
        let ends = PointSet::from_iter(3, [0, 2]);
        assert_eq!(closure_sections(&ends, &k).dim(), 2);
        assert_eq!(closure_sections(&PointSet::full(3), &k).dim(), 1);
    }

    #[test]
    fn closure_formula_differs_on_open_point() {
        // ρ = identity on the Sierpinski space: ρ_!k_{e} = k_{e}, while the closure
        // presheaf vanishes on {e}.
        let p = PosetSpace::new(vec!["a".into(), "e".into()], &[("a".into(), "e".into())]).unwrap();
        let sp = Arc::new(Space::new("sierpinski", p));
        let rho = full_rho(&sp);
        let ke: StalkSheaf<Q> = StalkSheaf::constant_on(&sp, &PointSet::singleton(2, 1)).unwrap();
        let r = closure_formula_report(&rho, &ke);
        assert!(!r.agree);
        assert!(inverse_shriek_is_identity(&rho, &ke));
    }
}
