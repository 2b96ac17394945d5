//! Sheaves on Alexandrov spaces stored by stalks.

use std::sync::Arc;

use rand::Rng;

use crate::field::Field;
use crate::matrix::Matrix;
use crate::pointset::PointSet;
use crate::rep::{self, Limit, Morphism, Rep, RepError};
use crate::site::Space;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SheafError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("{set:?} is not locally closed: {a} <= {b} <= {c} with {b} outside")]
    NotLocallyClosed { set: Vec<String>, a: String, b: String, c: String },
    #[error("sheaves live on different spaces")]
    SpaceMismatch,
    #[error("{0}")]
    Other(String),
}

/// A sheaf on the Alexandrov space of a poset: stalks with maps `F_x -> F_y` for `x <= y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StalkSheaf<F> {
    pub space: Arc<Space>,
    pub rep: Rep<F>,
}

impl<F: Field> StalkSheaf<F> {
    pub fn new(space: Arc<Space>, rep: Rep<F>) -> Result<Self, SheafError> {
        rep.validate(&space.poset)?;
        Ok(StalkSheaf { space, rep })
    }

    pub fn zero(space: &Arc<Space>) -> Self {
        StalkSheaf { space: space.clone(), rep: Rep::zero(&space.poset) }
    }

    /// The constant sheaf `k_X`.
    pub fn constant(space: &Arc<Space>) -> Self {
        StalkSheaf { space: space.clone(), rep: Rep::indicator(&space.poset, &space.poset.full()) }
    }

    /// `k_Z` for a locally closed `Z`; rejects other sets with a witness chain.
    pub fn constant_on(space: &Arc<Space>, z: &PointSet) -> Result<Self, SheafError> {
        let p = &space.poset;
        if let Some((a, b, c)) = p.convexity_witness(z) {
            return Err(SheafError::NotLocallyClosed {
                set: p.names_of(z),
                a: p.name(a).into(),
                b: p.name(b).into(),
                c: p.name(c).into(),
            });
        }
        Ok(StalkSheaf { space: space.clone(), rep: Rep::indicator(p, z) })
    }

    /// Co-skyscraper `I_x ⊗ k^d`: stalk `k^d` on the closure of `x`.
    pub fn coskyscraper(space: &Arc<Space>, x: usize, d: usize) -> Self {
        let sets = vec![space.poset.down(x).clone(); d];
        StalkSheaf { space: space.clone(), rep: Rep::indicator_sum(&space.poset, &sets) }
    }

    pub fn poset(&self) -> &crate::poset::PosetSpace {
        &self.space.poset
    }

    pub fn dim(&self, x: usize) -> usize {
        self.rep.dim(x)
    }

    pub fn dims(&self) -> &[usize] {
        self.rep.dims()
    }

    pub fn map(&self, x: usize, y: usize) -> &Matrix<F> {
        self.rep.map(x, y)
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    /// `Γ(S; F)` for any subset: compatible families over the induced order.
    pub fn sections(&self, s: &PointSet) -> Limit<F> {
        self.rep.limit(&self.space.poset, s)
    }

    pub fn sections_dim(&self, s: &PointSet) -> usize {
        self.sections(s).dim()
    }

    pub fn global_sections_dim(&self) -> usize {
        self.sections_dim(&self.space.poset.full())
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        StalkSheaf { space: self.space.clone(), rep: self.rep.direct_sum(&other.rep, &self.space.poset) }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        StalkSheaf { space: self.space.clone(), rep: self.rep.tensor(&other.rep, &self.space.poset) }
    }

    pub fn same_space(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    /// Restriction of a morphism of sections: the matrix `Γ(U;F) -> Γ(V;F)` for `V ⊆ U`.
    pub fn restriction(&self, u: &PointSet, v: &PointSet) -> Matrix<F> {
        let lu = self.sections(u);
        let lv = self.sections(v);
        let rows = lv.gather(|x| lu.proj(x), lu.dim());
        lv.coords(&rows).expect("restriction of a section is a section")
    }
}

/// Is `phi` a natural transformation `a -> b`?
pub fn validate_morphism<F: Field>(a: &StalkSheaf<F>, b: &StalkSheaf<F>, phi: &Morphism<F>) -> Result<(), SheafError> {
    if !a.same_space(b) {
        return Err(SheafError::SpaceMismatch);
    }
    phi.validate(&a.space.poset, &a.rep, &b.rep).map_err(SheafError::from)
}

pub fn kernel<F: Field>(a: &StalkSheaf<F>, phi: &Morphism<F>) -> (StalkSheaf<F>, Morphism<F>) {
    let (r, m) = rep::kernel(&a.space.poset, &a.rep, phi);
    (StalkSheaf { space: a.space.clone(), rep: r }, m)
}

pub fn cokernel<F: Field>(b: &StalkSheaf<F>, phi: &Morphism<F>) -> (StalkSheaf<F>, Morphism<F>) {
    let (r, m) = rep::cokernel(&b.space.poset, &b.rep, phi);
    (StalkSheaf { space: b.space.clone(), rep: r }, m)
}

pub fn image<F: Field>(b: &StalkSheaf<F>, phi: &Morphism<F>) -> (StalkSheaf<F>, Morphism<F>) {
    let (r, m) = rep::image(&b.space.poset, &b.rep, phi);
    (StalkSheaf { space: b.space.clone(), rep: r }, m)
}

/// Morphism `k_U -> F` determined by a section `s` of `F` over the open `u`
/// (given in the coordinates of `F.sections(u)`).
pub fn section_morphism<F: Field>(f: &StalkSheaf<F>, u: &PointSet, gens: &[(PointSet, Matrix<F>)]) -> Morphism<F> {
    let _ = u;
    let p = &f.space.poset;
    let comps = (0..p.len())
        .map(|x| {
            let cols: Vec<Matrix<F>> = gens
                .iter()
                .filter(|(w, _)| w.contains(x))
                .map(|(w, s)| {
                    let l = f.sections(w);
                    l.proj(x).mul(s)
                })
                .collect();
            let refs: Vec<&Matrix<F>> = cols.iter().collect();
            if refs.is_empty() {
                Matrix::zeros(f.dim(x), 0)
            } else {
                Matrix::hstack(&refs)
            }
        })
        .collect();
    Morphism { comps }
}

/// A presentation `⊕_j k_{V_j} --rel--> ⊕_i k_{U_i} --gen--> F -> 0`.
#[derive(Debug, Clone)]
pub struct GeneratorDecomposition<F> {
    /// Generators: an open and a section over it (coordinates in `sections(U)`).
    pub generators: Vec<(PointSet, Matrix<F>)>,
    pub relations: Vec<(PointSet, Matrix<F>)>,
    pub free: StalkSheaf<F>,
    pub rel_source: StalkSheaf<F>,
    pub gen_map: Morphism<F>,
    pub rel_map: Morphism<F>,
    pub exact: bool,
}

/// Greedy choice of sections over the candidate opens (largest first) until their
/// images span every stalk.
fn greedy_generators<F: Field>(f: &StalkSheaf<F>, candidates: &[PointSet]) -> Vec<(PointSet, Matrix<F>)> {
    let p = &f.space.poset;
    let mut gens: Vec<(PointSet, Matrix<F>)> = Vec::new();
    let mut spans: Vec<Matrix<F>> = (0..p.len()).map(|x| Matrix::zeros(f.dim(x), 0)).collect();
    let target: usize = f.rep.total_dim();
    let mut have = 0;
    for u in candidates {
        if have == target {
            break;
        }
        let l = f.sections(u);
        for k in 0..l.dim() {
            let s = Matrix::from_fn(l.dim(), 1, |i, _| if i == k { F::one() } else { F::zero() });
            let mut gain = 0;
            let mut next = Vec::new();
            for x in 0..p.len() {
                if u.contains(x) {
                    let v = l.proj(x).mul(&s);
                    let m = Matrix::hstack(&[&spans[x], &v]);
                    let r = m.rank();
                    if r > spans[x].rank() {
                        gain += 1;
                    }
                    next.push(m);
                } else {
                    next.push(spans[x].clone());
                }
            }
            if gain > 0 {
                spans = next;
                gens.push((u.clone(), s));
                have = spans.iter().map(|m| m.rank()).sum();
            }
        }
    }
    gens
}

fn free_sheaf<F: Field>(space: &Arc<Space>, gens: &[(PointSet, Matrix<F>)]) -> StalkSheaf<F> {
    let sets: Vec<PointSet> = gens.iter().map(|(u, _)| u.clone()).collect();
    StalkSheaf { space: space.clone(), rep: Rep::indicator_sum(&space.poset, &sets) }
}

/// Candidate opens for generators, largest first: every open when the lattice is small,
/// otherwise the whole space and the minimal opens.
fn candidate_opens(space: &Space) -> Vec<PointSet> {
    let p = &space.poset;
    let mut c = match p.all_up_sets(256) {
        Ok(all) => all.into_iter().filter(|s| !s.is_empty()).collect(),
        Err(_) => {
            let mut v: Vec<PointSet> = (0..p.len()).map(|x| p.up(x).clone()).collect();
            v.push(p.full());
            v.sort();
            v.dedup();
            v
        }
    };
    c.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.to_vec().cmp(&b.to_vec())));
    c
}

pub fn generator_decomposition<F: Field>(f: &StalkSheaf<F>) -> GeneratorDecomposition<F> {
    let cands = candidate_opens(&f.space);
    let generators = greedy_generators(f, &cands);
    let free = free_sheaf(&f.space, &generators);
    let gen_map = section_morphism(f, &f.space.poset.full(), &generators);
    let (k, inc) = kernel(&free, &gen_map);
    let rel_gens = greedy_generators(&k, &cands);
    let rel_source = free_sheaf(&f.space, &rel_gens);
    let to_k = section_morphism(&k, &f.space.poset.full(), &rel_gens);
    let rel_map = to_k.then(&inc);
    let exact = gen_map.is_epi() && rep::exact_at(&rel_map, &gen_map, free.dims());
    // Relations as sections of the free sheaf over their opens.
    let relations = rel_gens
        .iter()
        .map(|(u, s)| {
            let lk = k.sections(u);
            let lf = free.sections(u);
            let vals = lf.gather(|x| inc.comp(x).mul(&lk.proj(x)).mul(s), 1);
            (u.clone(), lf.coords(&vals).expect("relation is a section"))
        })
        .collect();
    GeneratorDecomposition { generators, relations, free, rel_source, gen_map, rel_map, exact }
}

/// Random sheaf built from cokernels and kernels of maps between sums of `k_U`.
pub fn random_sheaf<F: Field, R: Rng>(space: &Arc<Space>, rng: &mut R, max_dim: usize) -> StalkSheaf<F> {
    StalkSheaf { space: space.clone(), rep: rep::random_rep(&space.poset, rng, max_dim) }
}

pub fn random_morphism<F: Field, R: Rng>(a: &StalkSheaf<F>, b: &StalkSheaf<F>, rng: &mut R) -> Morphism<F> {
    rep::random_morphism(&a.space.poset, &a.rep, &b.rep, rng)
}

pub struct SheafShortExact<F> {
    pub a: StalkSheaf<F>,
    pub b: StalkSheaf<F>,
    pub c: StalkSheaf<F>,
    pub i: Morphism<F>,
    pub q: Morphism<F>,
}

pub fn random_short_exact<F: Field, R: Rng>(space: &Arc<Space>, rng: &mut R, max_dim: usize) -> SheafShortExact<F> {
    let s = rep::random_short_exact(&space.poset, rng, max_dim);
    let w = |r| StalkSheaf { space: space.clone(), rep: r };
    SheafShortExact { a: w(s.a), b: w(s.b), c: w(s.c), i: s.i, q: s.q }
}

/// Hom space between sheaves over a set (the whole space by default).
pub fn hom_space<F: Field>(a: &StalkSheaf<F>, b: &StalkSheaf<F>) -> rep::HomSpace<F> {
    rep::hom_space(&a.space.poset, &a.rep, &b.rep, &a.space.poset.full())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;
    use crate::poset::PosetSpace;

    fn sierpinski() -> Arc<Space> {
        let p = PosetSpace::new(vec!["a".into(), "e".into()], &[("a".into(), "e".into())]).unwrap();
        Arc::new(Space::new("sierpinski", p))
    }

    #[test]
    fn extension_by_zero_cokernel() {
        let sp = sierpinski();
        let e = sp.poset.set_of(&["e"]).unwrap();
        let ke: StalkSheaf<Q> = StalkSheaf::constant_on(&sp, &e).unwrap();
        let k = StalkSheaf::constant(&sp);
        let hs = hom_space(&ke, &k);
        assert_eq!(hs.dim(), 1);
        let phi = hs.basis_morphism(0);
        let (c, _) = cokernel(&k, &phi);
        assert_eq!(c.dims(), &[1, 0]);
    }

    #[test]
    fn rejects_non_convex() {
        let p = crate::poset::chain_poset(3);
        let sp = Arc::new(Space::new("chain", p));
        let z = PointSet::from_iter(3, [0, 2]);
        assert!(matches!(StalkSheaf::<Q>::constant_on(&sp, &z), Err(SheafError::NotLocallyClosed { .. })));
    }

    #[test]
    fn decomposition_of_closed_point() {
        let sp = sierpinski();
        let a = sp.poset.set_of(&["a"]).unwrap();
        let ka: StalkSheaf<Q> = StalkSheaf::constant_on(&sp, &a).unwrap();
        let d = generator_decomposition(&ka);
        assert!(d.exact);
        assert_eq!(d.generators.len(), 1);
        assert_eq!(sp.poset.names_of(&d.generators[0].0), vec!["a", "e"]);
        assert_eq!(d.relations.len(), 1);
        assert_eq!(sp.poset.names_of(&d.relations[0].0), vec!["e"]);
    }

    #[test]
    fn decomposition_of_constant_on_open() {
        let sp = sierpinski();
        let k: StalkSheaf<Q> = StalkSheaf::constant(&sp);
        let d = generator_decomposition(&k);
        assert!(d.exact);
        assert_eq!(d.generators.len(), 1);
        assert!(d.relations.is_empty());
    }
}
