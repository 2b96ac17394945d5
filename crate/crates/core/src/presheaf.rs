//! Presheaves on the open lattice of a finite site: descent checks, the plus
//! construction, sheafification and the abelian structure of sheaves.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::field::Field;
use crate::matrix::Matrix;
use crate::poset::PosetSpace;
use crate::rep::{self, HomSpace, Morphism, Rep};
use crate::sheaf::StalkSheaf;
use crate::site::{FiniteSite, OpenLattice, SiteError};

/// A presheaf: a representation of the lattice ordered by reverse inclusion.
/// `rep.map(u, v)` is the restriction `F(U) -> F(V)` for `V ⊆ U`.
#[derive(Debug, Clone)]
pub struct Presheaf<F> {
    pub site: Arc<FiniteSite>,
    pub rep: Rep<F>,
}

/// Sections over a family `S`: the equalizer inside `∏_{V∈S} F(V)`.
#[derive(Debug, Clone)]
pub struct FamilySections<F> {
    pub family: Vec<usize>,
    pub basis: Matrix<F>,
    offsets: Vec<usize>,
    dims: Vec<usize>,
}

impl<F: Field> FamilySections<F> {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    /// Component at the `i`-th member, as a map from section coordinates.
    pub fn proj(&self, i: usize) -> Matrix<F> {
        self.basis.block(self.offsets[i], 0, self.dims[i], self.dim())
    }

    pub fn coords(&self, v: &Matrix<F>) -> Matrix<F> {
        self.basis.solve(v).expect("vector is a compatible family")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SheafKind {
    Sheaf,
    Separated,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SheafCheck {
    pub kind: SheafKind,
    /// First failing open and family, with the failure ("injectivity" or "gluing").
    pub witness: Option<(Vec<String>, Vec<Vec<String>>, String)>,
}

impl<F: Field> Presheaf<F> {
    pub fn order(&self) -> &PosetSpace {
        lattice(&self.site).order()
    }

    pub fn lattice(&self) -> &OpenLattice {
        lattice(&self.site)
    }

    pub fn new(site: Arc<FiniteSite>, rep: Rep<F>) -> Result<Self, rep::RepError> {
        rep.validate(lattice(&site).order())?;
        Ok(Presheaf { site, rep })
    }

    pub fn zero(site: &Arc<FiniteSite>) -> Self {
        Presheaf { site: site.clone(), rep: Rep::zero(lattice(site).order()) }
    }

    pub fn dim(&self, u: usize) -> usize {
        self.rep.dim(u)
    }

    pub fn restrict(&self, u: usize, v: usize) -> &Matrix<F> {
        self.rep.map(u, v)
    }

    /// `F(S)` for a family of opens.
    pub fn family_sections(&self, fam: &[usize]) -> FamilySections<F> {
        let lat = self.lattice();
        let dims: Vec<usize> = fam.iter().map(|&v| self.dim(v)).collect();
        let mut offsets = Vec::with_capacity(fam.len());
        let mut total = 0;
        for d in &dims {
            offsets.push(total);
            total += d;
        }
        let mut blocks = Vec::new();
        for i in 0..fam.len() {
            for j in i + 1..fam.len() {
                let w = lat.meet(fam[i], fam[j]);
                let dw = self.dim(w);
                if dw == 0 {
                    continue;
                }
                let mut row = Matrix::zeros(dw, total);
                row.set_block(0, offsets[i], self.restrict(fam[i], w));
                row.add_block(0, offsets[j], &self.restrict(fam[j], w).neg());
                blocks.push(row);
            }
        }
        let basis = if blocks.is_empty() {
            Matrix::identity(total)
        } else {
            let refs: Vec<&Matrix<F>> = blocks.iter().collect();
            Matrix::vstack(&refs).kernel()
        };
        FamilySections { family: fam.to_vec(), basis, offsets, dims }
    }

    /// The canonical map `F(U) -> F(S)` in section coordinates.
    pub fn to_family(&self, u: usize, fs: &FamilySections<F>) -> Matrix<F> {
        let parts: Vec<Matrix<F>> = fs.family.iter().map(|&v| self.restrict(u, v).clone()).collect();
        let refs: Vec<&Matrix<F>> = parts.iter().collect();
        let stacked = if refs.is_empty() { Matrix::zeros(0, self.dim(u)) } else { Matrix::vstack(&refs) };
        fs.coords(&stacked)
    }

    /// Descent on every listed covering and on the finest covering of every open.
    pub fn check_sheaf(&self) -> SheafCheck {
        let lat = self.lattice();
        let mut separated = true;
        let mut witness = None;
        for u in 0..lat.len() {
            let mut fams = self.site.listed_covers(u);
            let fin = self.site.finest_cover(u);
            if !fams.contains(&fin) {
                fams.push(fin);
            }
            for fam in fams {
                let fs = self.family_sections(&fam);
                let m = self.to_family(u, &fs);
                let inj = m.is_injective();
                let surj = m.is_surjective();
                if !inj {
                    separated = false;
                }
                if (!inj || !surj) && (witness.is_none() || (!inj && separated_witness(&witness))) {
                    let what = if inj { "gluing" } else { "injectivity" };
                    witness = Some((
                        self.site.named(lat.open(u)),
                        fam.iter().map(|&v| self.site.named(lat.open(v))).collect(),
                        what.to_string(),
                    ));
                }
            }
        }
        let kind = match (&witness, separated) {
            (None, _) => SheafKind::Sheaf,
            (Some(_), true) => SheafKind::Separated,
            (Some(_), false) => SheafKind::Neither,
        };
        SheafCheck { kind, witness }
    }

    pub fn is_sheaf(&self) -> bool {
        self.check_sheaf().kind == SheafKind::Sheaf
    }

    /// First pair `(U, V)` where `0 -> F(U∪V) -> F(U)⊕F(V) -> F(U∩V)` fails to be exact,
    /// or `None` when every pair passes and `F(∅) = 0`.
    pub fn pairwise_glue_witness(&self) -> Option<(usize, usize)> {
        let lat = self.lattice();
        if self.dim(lat.bottom()) != 0 {
            return Some((lat.bottom(), lat.bottom()));
        }
        for u in 0..lat.len() {
            for v in u + 1..lat.len() {
                let j = lat.join(u, v);
                let m = lat.meet(u, v);
                let first = Matrix::vstack(&[self.restrict(j, u), self.restrict(j, v)]);
                let second = Matrix::hstack(&[self.restrict(u, m), &self.restrict(v, m).neg()]);
                let mid = self.dim(u) + self.dim(v);
                if !first.is_injective() || first.rank() + second.rank() != mid || !second.mul(&first).is_zero() {
                    return Some((u, v));
                }
            }
        }
        None
    }

    pub fn pairwise_glue_check(&self) -> bool {
        self.pairwise_glue_witness().is_none()
    }

    /// `F^+` with the unit `F -> F^+`.
    pub fn plus(&self) -> (Presheaf<F>, Morphism<F>) {
        let lat = self.lattice();
        let covers: Vec<Vec<usize>> = (0..lat.len()).map(|u| self.site.finest_cover(u)).collect();
        let secs: Vec<FamilySections<F>> = covers.iter().map(|c| self.family_sections(c)).collect();
        let dims = secs.iter().map(|s| s.dim()).collect();
        let rep = Rep::build(lat.order(), dims, |u, w| {
            // For each member of the finer covering of W pick a member of U's covering containing it.
            let src = &secs[u];
            let tgt = &secs[w];
            let parts: Vec<Matrix<F>> = tgt
                .family
                .iter()
                .map(|&b| {
                    let i = src
                        .family
                        .iter()
                        .position(|&a| lat.open(b).is_subset(lat.open(a)))
                        .expect("finest covers refine restricted covers");
                    self.restrict(src.family[i], b).mul(&src.proj(i))
                })
                .collect();
            let refs: Vec<&Matrix<F>> = parts.iter().collect();
            let stacked = if refs.is_empty() { Matrix::zeros(0, src.dim()) } else { Matrix::vstack(&refs) };
            tgt.coords(&stacked)
        });
        let unit = Morphism { comps: (0..lat.len()).map(|u| self.to_family(u, &secs[u])).collect() };
        (Presheaf { site: self.site.clone(), rep }, unit)
    }

    /// `F^{++}` with the composite unit.
    pub fn sheafify(&self) -> (Presheaf<F>, Morphism<F>) {
        let (p1, u1) = self.plus();
        let (p2, u2) = p1.plus();
        (p2, u1.then(&u2))
    }

    /// Stalks `F(U_x)` on an Alexandrov site.
    pub fn to_stalks(&self) -> Result<StalkSheaf<F>, SiteError> {
        let sp = self.site.backing.clone().filter(|_| self.site.is_alexandrov()).ok_or_else(|| {
            SiteError::LatticeMap("stalks need an Alexandrov site".into())
        })?;
        let lat = self.lattice();
        let idx: Vec<usize> = (0..sp.len()).map(|x| lat.index_of(sp.poset.up(x)).expect("star")).collect();
        let dims = idx.iter().map(|&i| self.dim(i)).collect();
        let rep = Rep::build(&sp.poset, dims, |x, y| self.restrict(idx[x], idx[y]).clone());
        Ok(StalkSheaf { space: sp, rep })
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Presheaf { site: self.site.clone(), rep: self.rep.direct_sum(&other.rep, self.order()) }
    }

    /// Openwise tensor product (a presheaf; sheafify for the sheaf tensor).
    pub fn openwise_tensor(&self, other: &Self) -> Self {
        Presheaf { site: self.site.clone(), rep: self.rep.tensor(&other.rep, self.order()) }
    }
}

fn separated_witness(w: &Option<(Vec<String>, Vec<Vec<String>>, String)>) -> bool {
    matches!(w, Some((_, _, k)) if k == "gluing")
}

pub(crate) fn lattice(site: &FiniteSite) -> &OpenLattice {
    site.lattice().expect("site lattice is enumerable")
}

/// `U ↦ Γ(U; F)` on the opens of `site` (which must be opens of the sheaf's space).
pub fn from_stalks<F: Field>(f: &StalkSheaf<F>, site: &Arc<FiniteSite>) -> Presheaf<F> {
    let lat = lattice(site);
    let limits: Vec<_> = lat.opens().iter().map(|u| f.sections(u)).collect();
    let dims = limits.iter().map(|l| l.dim()).collect();
    let rep = Rep::build(lat.order(), dims, |u, v| {
        let lu = &limits[u];
        let lv = &limits[v];
        let rows = lv.gather(|x| lu.proj(x), lu.dim());
        lv.coords(&rows).expect("restriction of a section")
    });
    Presheaf { site: site.clone(), rep }
}

/// Openwise components `Γ(U; φ)` of a stalk morphism.
pub fn morphism_from_stalks<F: Field>(
    a: &StalkSheaf<F>,
    b: &StalkSheaf<F>,
    phi: &Morphism<F>,
    site: &Arc<FiniteSite>,
) -> Morphism<F> {
    let lat = lattice(site);
    let comps = lat
        .opens()
        .iter()
        .map(|u| {
            let la = a.sections(u);
            let lb = b.sections(u);
            let vals = lb.gather(|x| phi.comp(x).mul(&la.proj(x)), la.dim());
            lb.coords(&vals).expect("image of a section")
        })
        .collect();
    Morphism { comps }
}

/// `φ^+ : F^+ -> G^+`.
pub fn plus_morphism<F: Field>(a: &Presheaf<F>, b: &Presheaf<F>, phi: &Morphism<F>) -> Morphism<F> {
    let lat = a.lattice();
    let comps = (0..lat.len())
        .map(|u| {
            let fam = a.site.finest_cover(u);
            let sa = a.family_sections(&fam);
            let sb = b.family_sections(&fam);
            let blocks: Vec<&Matrix<F>> = fam.iter().map(|&v| phi.comp(v)).collect();
            let diag = if blocks.is_empty() { Matrix::zeros(0, 0) } else { Matrix::block_diag(&blocks) };
            sb.coords(&diag.mul(&sa.basis))
        })
        .collect();
    Morphism { comps }
}

pub fn sheafify_morphism<F: Field>(a: &Presheaf<F>, b: &Presheaf<F>, phi: &Morphism<F>) -> Morphism<F> {
    let (a1, _) = a.plus();
    let (b1, _) = b.plus();
    let p1 = plus_morphism(a, b, phi);
    plus_morphism(&a1, &b1, &p1)
}

pub fn hom_space<F: Field>(a: &Presheaf<F>, b: &Presheaf<F>) -> HomSpace<F> {
    let p = a.order();
    rep::hom_space(p, &a.rep, &b.rep, &p.full())
}

/// Matrix of `ψ ↦ ψ∘η` from `Hom(S, H)` coordinates to `Hom(P, H)` coordinates.
pub fn precomposition_matrix<F: Field>(p: &Presheaf<F>, s: &Presheaf<F>, eta: &Morphism<F>, h: &Presheaf<F>) -> Matrix<F> {
    let hs = hom_space(s, h);
    let hp = hom_space(p, h);
    let cols: Vec<Vec<F>> = (0..hs.dim())
        .map(|k| {
            let psi = hs.basis_morphism(k);
            let v = hp.flatten(|u| psi.comp(u).mul(eta.comp(u)));
            hp.basis.solve(&Matrix::column(v)).expect("composite is natural").col(0)
        })
        .collect();
    Matrix::from_fn(hp.dim(), hs.dim(), |i, j| cols[j][i].clone())
}

/// The unique `c: S -> H` with `c∘η = u`, if it exists.
pub fn factor_through<F: Field>(
    p: &Presheaf<F>,
    s: &Presheaf<F>,
    eta: &Morphism<F>,
    h: &Presheaf<F>,
    u: &Morphism<F>,
) -> Option<Morphism<F>> {
    let hs = hom_space(s, h);
    let hp = hom_space(p, h);
    let m = precomposition_matrix(p, s, eta, h);
    let target = hp.basis.solve(&Matrix::column(hp.flatten(|x| u.comp(x).clone())))?;
    let a = m.solve(&target)?;
    let v = hs.basis.mul(&a).col(0);
    Some(Morphism { comps: (0..s.lattice().len()).map(|x| hs.component(&v, x)).collect() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjunctionWitness {
    pub dim_source: usize,
    pub dim_target: usize,
    pub bijective: bool,
}

/// `Hom_Sh(F^{++}, G) -> Hom_Psh(F, G)`, precomposition with the unit.
pub fn sheafify_adjunction<F: Field>(f: &Presheaf<F>, g: &Presheaf<F>) -> AdjunctionWitness {
    let (ff, eta) = f.sheafify();
    let m = precomposition_matrix(f, &ff, &eta, g);
    AdjunctionWitness { dim_source: m.cols(), dim_target: m.rows(), bijective: m.is_invertible() }
}

/// Openwise kernel (a sheaf when the source is).
pub fn kernel<F: Field>(a: &Presheaf<F>, phi: &Morphism<F>) -> (Presheaf<F>, Morphism<F>) {
    let (r, m) = rep::kernel(a.order(), &a.rep, phi);
    (Presheaf { site: a.site.clone(), rep: r }, m)
}

pub fn image<F: Field>(b: &Presheaf<F>, phi: &Morphism<F>) -> (Presheaf<F>, Morphism<F>) {
    let (r, m) = rep::image(b.order(), &b.rep, phi);
    (Presheaf { site: b.site.clone(), rep: r }, m)
}

pub fn openwise_cokernel<F: Field>(b: &Presheaf<F>, phi: &Morphism<F>) -> (Presheaf<F>, Morphism<F>) {
    let (r, m) = rep::cokernel(b.order(), &b.rep, phi);
    (Presheaf { site: b.site.clone(), rep: r }, m)
}

/// Sheaf cokernel: the sheafified openwise cokernel, with the projection from `b`
/// (composed with the sheafification units).
pub fn cokernel<F: Field>(b: &Presheaf<F>, phi: &Morphism<F>) -> (Presheaf<F>, Morphism<F>) {
    let (c, q) = openwise_cokernel(b, phi);
    let (cs, eta) = c.sheafify();
    (cs, q.then(&eta))
}

/// Local lifting criterion: for every `U` there is a covering on whose members every
/// section of `G(U)` lifts. The finest covering is tested, since lifts restrict.
pub fn is_epimorphism<F: Field>(b: &Presheaf<F>, phi: &Morphism<F>) -> bool {
    epimorphism_witness(b, phi).is_none()
}

/// First open where lifting fails on the finest covering.
pub fn epimorphism_witness<F: Field>(b: &Presheaf<F>, phi: &Morphism<F>) -> Option<usize> {
    let lat = b.lattice();
    (0..lat.len()).find(|&u| {
        b.site.finest_cover(u).iter().any(|&w| {
            let img = phi.comp(w);
            let need = b.restrict(u, w);
            Matrix::hstack(&[img, need]).rank() != img.rank()
        })
    })
}

/// Mono in the sheaf category: openwise injective.
pub fn is_monomorphism<F: Field>(phi: &Morphism<F>) -> bool {
    phi.is_mono()
}

/// Exactness of `A -> B -> C` at `B` in sheaves on a site: every section of the kernel
/// lies locally in the image.
pub fn locally_exact<F: Field>(b: &Presheaf<F>, i: &Morphism<F>, q: &Morphism<F>) -> bool {
    let lat = b.lattice();
    (0..lat.len()).all(|u| {
        if !q.comp(u).mul(i.comp(u)).is_zero() {
            return false;
        }
        let k = q.comp(u).kernel();
        b.site.finest_cover(u).iter().all(|&w| {
            let img = i.comp(w);
            let need = b.restrict(u, w).mul(&k);
            Matrix::hstack(&[img, &need]).rank() == img.rank()
        })
    })
}

/// `0 -> A -> B -> C -> 0` is exact as a sequence of sheaves on a site.
pub fn is_short_exact<F: Field>(b: &Presheaf<F>, c: &Presheaf<F>, i: &Morphism<F>, q: &Morphism<F>) -> bool {
    is_monomorphism(i) && locally_exact(b, i, q) && is_epimorphism(c, q)
}

pub fn random_presheaf<F: Field, R: Rng>(site: &Arc<FiniteSite>, rng: &mut R, max_dim: usize) -> Presheaf<F> {
    Presheaf { site: site.clone(), rep: rep::random_rep(lattice(site).order(), rng, max_dim) }
}

pub struct PresheafShortExact<F> {
    pub a: Presheaf<F>,
    pub b: Presheaf<F>,
    pub c: Presheaf<F>,
    pub i: Morphism<F>,
    pub q: Morphism<F>,
}

pub fn random_short_exact<F: Field, R: Rng>(site: &Arc<FiniteSite>, rng: &mut R, max_dim: usize) -> PresheafShortExact<F> {
    let s = rep::random_short_exact(lattice(site).order(), rng, max_dim);
    let w = |r| Presheaf { site: site.clone(), rep: r };
    PresheafShortExact { a: w(s.a), b: w(s.b), c: w(s.c), i: s.i, q: s.q }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;
    use crate::site::Space;
    use std::collections::BTreeMap;

    fn two_points() -> Arc<FiniteSite> {
        let p = PosetSpace::new(vec!["x1".into(), "x2".into()], &[]).unwrap();
        Arc::new(FiniteSite::alexandrov(Arc::new(Space::new("two", p))))
    }

    fn crafted(site: &Arc<FiniteSite>) -> Presheaf<Q> {
        let lat = lattice(site);
        let dims: Vec<usize> = lat.opens().iter().map(|u| usize::from(u.len() == 1)).collect();
        let rep = Rep::build(lat.order(), dims.clone(), |u, v| Matrix::zeros(dims[v], dims[u]));
        Presheaf::new(site.clone(), rep).unwrap()
    }

    #[test]
    fn separated_not_sheaf() {
        let site = two_points();
        let f = crafted(&site);
        let c = f.check_sheaf();
        assert_eq!(c.kind, SheafKind::Separated);
        assert!(!f.pairwise_glue_check());
        let (s, _) = f.sheafify();
        assert!(s.is_sheaf());
        assert_eq!(s.dim(lattice(&site).top()), 2);
    }

    #[test]
    fn nonzero_on_empty_is_neither() {
        let site = two_points();
        let lat = lattice(&site);
        let rep: Rep<Q> = Rep::indicator(lat.order(), &lat.order().full());
        let f = Presheaf::new(site.clone(), rep).unwrap();
        assert_eq!(f.check_sheaf().kind, SheafKind::Neither);
    }

    #[test]
    fn trivial_coverings_plus_is_identity() {
        let p = PosetSpace::new(vec!["a".into(), "e".into()], &[("a".into(), "e".into())]).unwrap();
        let sp = Arc::new(Space::new("s", p));
        let fine = FiniteSite::alexandrov(sp.clone());
        let subl = lattice(&fine).opens().to_vec();
        let coarse = Arc::new(crate::site::coarse_subsite(&fine, "c", subl, BTreeMap::new()).unwrap());
        let k = StalkSheaf::<Q>::constant(&sp);
        let f = from_stalks(&k, &coarse);
        let (g, u) = f.plus();
        assert!(u.is_iso());
        assert_eq!(g.rep.dims(), f.rep.dims());
    }
}
