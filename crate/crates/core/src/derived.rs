//! Derived functors through explicit injective resolutions: `RΓ`, Čech comparison,
//! `RHom`, `Rf_*`, `Rf_!!`, the derived canonical maps, `f^!`, and duality checks.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::complex::{
    canonical_resolution, canonical_resolution_complex, inj_morphism, is_quasi_iso, minimal_resolution, ChainMap, Cochain,
    Complex, InjComplex, InjSum, Resolution, ResolutionError,
};
use crate::field::Field;
use crate::matrix::Matrix;
use crate::ops::{direct_image_full, direct_image_morphism, fiber_product, inverse_image, limit_restriction, restrict_z, PointMap};
use crate::pointset::PointSet;
use crate::poset::PosetSpace;
use crate::rep::Morphism;
use crate::sheaf::{SheafError, StalkSheaf};
use crate::simplicial::SimplicialComplex;
use crate::site::Space;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DerivedError {
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error("{0}")]
    Shape(String),
}

/// Minimal injective resolution with the `height + 1` length bound enforced.
pub fn resolve<F: Field>(f: &StalkSheaf<F>) -> Result<Resolution<F>, ResolutionError> {
    minimal_resolution(f, f.poset().height() + 1)
}

fn resolve_unchecked<F: Field>(f: &StalkSheaf<F>) -> InjComplex<F> {
    resolve(f).expect("resolution length is bounded by the height").complex
}

/// An injective complex quasi-isomorphic to `K`.
pub fn resolve_complex<F: Field>(k: &Complex<F>) -> InjComplex<F> {
    if k.terms.len() == 1 {
        let mut c = resolve_unchecked(&k.sheaf(0));
        c.lo += k.lo;
        return c;
    }
    canonical_resolution_complex(k).complex
}

/// `RΓ(U; F)` as a cochain complex.
pub fn derived_sections<F: Field>(f: &StalkSheaf<F>, u: &PointSet) -> Cochain<F> {
    resolve_unchecked(f).sections(u)
}

pub fn derived_sections_complex<F: Field>(k: &Complex<F>, u: &PointSet) -> Cochain<F> {
    resolve_complex(k).sections(u)
}

/// Graded dimensions of `H^k(X; F)`, `k >= 0`, trailing zeros removed (at least one entry).
pub fn cohomology<F: Field>(f: &StalkSheaf<F>) -> Vec<usize> {
    trim(derived_sections(f, &f.poset().full()).cohomology())
}

pub fn trim(mut v: Vec<usize>) -> Vec<usize> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    if v.is_empty() {
        v.push(0);
    }
    v
}

/// The Čech complex of `F` for a finite family of opens (indices in list order).
pub fn cech_complex<F: Field>(cover: &[PointSet], f: &StalkSheaf<F>) -> Cochain<F> {
    let mut levels: Vec<Vec<(Vec<usize>, PointSet)>> = vec![cover
        .iter()
        .enumerate()
        .filter(|(_, u)| !u.is_empty())
        .map(|(i, u)| (vec![i], u.clone()))
        .collect()];
    loop {
        let last = levels.last().unwrap();
        let mut next = Vec::new();
        for (idx, u) in last {
            for j in idx.last().unwrap() + 1..cover.len() {
                let w = u.intersection(&cover[j]);
                if !w.is_empty() {
                    let mut k = idx.clone();
                    k.push(j);
                    next.push((k, w));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    let lims: Vec<Vec<_>> = levels.iter().map(|l| l.iter().map(|(_, u)| f.sections(u)).collect()).collect();
    let dims: Vec<usize> = lims.iter().map(|l| l.iter().map(|s| s.dim()).sum()).collect();
    let diffs = (0..levels.len().saturating_sub(1))
        .map(|k| {
            let pos: HashMap<&Vec<usize>, usize> = levels[k].iter().enumerate().map(|(i, (idx, _))| (idx, i)).collect();
            let so = prefix(&lims[k].iter().map(|l| l.dim()).collect::<Vec<_>>());
            let to = prefix(&lims[k + 1].iter().map(|l| l.dim()).collect::<Vec<_>>());
            let mut m = Matrix::zeros(dims[k + 1], dims[k]);
            for (t, (idx, _)) in levels[k + 1].iter().enumerate() {
                for j in 0..idx.len() {
                    let mut face = idx.clone();
                    face.remove(j);
                    let s = pos[&face];
                    let r = limit_restriction(&lims[k][s], &lims[k + 1][t]);
                    let r = if j % 2 == 0 { r } else { r.neg() };
                    m.add_block(to[t], so[s], &r);
                }
            }
            m
        })
        .collect();
    Cochain { lo: 0, dims, diffs }
}

fn prefix(v: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(v.len());
    let mut o = 0;
    for &d in v {
        out.push(o);
        o += d;
    }
    out
}

/// Open stars of the minimal points (vertex stars on a face poset).
pub fn star_cover(p: &PosetSpace) -> Vec<PointSet> {
    p.minimal_in(&p.full()).into_iter().map(|x| p.up(x).clone()).collect()
}

pub fn cech_cohomology<F: Field>(cover: &[PointSet], f: &StalkSheaf<F>) -> Vec<usize> {
    trim(cech_complex(cover, f).cohomology())
}

/// `RHom(K, L)`: `Hom(K, J)` for an injective resolution `J` of `L`.
pub fn rhom<F: Field>(k: &Complex<F>, l: &Complex<F>) -> InjComplex<F> {
    resolve_complex(l).hom_from(k)
}

pub fn rhom_sheaves<F: Field>(f: &StalkSheaf<F>, g: &StalkSheaf<F>) -> InjComplex<F> {
    resolve_unchecked(g).hom_from_sheaf(f)
}

/// `dim Ext^k(F, G)` for `k >= 0`.
pub fn ext_dims<F: Field>(f: &StalkSheaf<F>, g: &StalkSheaf<F>) -> Vec<usize> {
    let c = rhom_sheaves(f, g).global_sections();
    let h = c.cohomology();
    let hi = c.lo + h.len() as i64 - 1;
    trim((0..=hi.max(0)).map(|k| c.h(k)).collect())
}

/// `dim Hom_{D}(K, L) = dim H^0 RHom(K, L)`.
pub fn hom_derived<F: Field>(k: &Complex<F>, l: &Complex<F>) -> usize {
    rhom(k, l).global_sections().h(0)
}

/// Stalkwise cohomology dimensions, indexed `[point][degree - lo]`.
pub fn stalk_cohomology<F: Field>(k: &Complex<F>) -> Vec<Vec<usize>> {
    (0..k.poset().len()).map(|x| k.stalk(x).cohomology()).collect()
}

/// Stalk cohomology normalized to a common degree window.
pub fn stalk_cohomology_window<F: Field>(k: &Complex<F>, lo: i64, hi: i64) -> Vec<Vec<usize>> {
    (0..k.poset().len()).map(|x| (lo..=hi).map(|d| k.stalk(x).h(d)).collect()).collect()
}

/// `Rf_*F`.
pub fn rf_star<F: Field>(f: &PointMap, a: &StalkSheaf<F>) -> InjComplex<F> {
    resolve_unchecked(a).push(f)
}

pub fn rf_star_complex<F: Field>(f: &PointMap, k: &Complex<F>) -> InjComplex<F> {
    resolve_complex(k).push(f)
}

/// `Rf_!!F = Rf_*(F_{U*})`.
pub fn rf_proper<F: Field>(f: &PointMap, a: &StalkSheaf<F>) -> InjComplex<F> {
    let ustar = f.source.largest_rel_compact();
    rf_star(f, &restrict_z(&ustar, a).expect("U* is open"))
}

pub fn rf_proper_complex<F: Field>(f: &PointMap, k: &Complex<F>) -> InjComplex<F> {
    let ustar = f.source.largest_rel_compact();
    rf_star_complex(f, &k.restrict_z(&ustar))
}

/// Termwise `f_*` of a complex with the limits used.
pub fn push_complex<F: Field>(f: &PointMap, k: &Complex<F>) -> (Complex<F>, Vec<crate::ops::DirectImage<F>>) {
    let ds: Vec<_> = (0..k.terms.len()).map(|i| direct_image_full(f, &k.sheaf(i))).collect();
    let diffs = k.diffs.iter().enumerate().map(|(i, d)| direct_image_morphism(&ds[i], &ds[i + 1], d)).collect();
    let c = Complex { space: f.target.clone(), lo: k.lo, terms: ds.iter().map(|d| d.sheaf.rep.clone()).collect(), diffs };
    (c, ds)
}

/// A chain map between two complexes with its verification results.
#[derive(Debug, Clone)]
pub struct DerivedMap<F> {
    pub source: Complex<F>,
    pub target: Complex<F>,
    pub map: ChainMap<F>,
    pub chain_map: bool,
    pub quasi_iso: bool,
}

impl<F: Field> DerivedMap<F> {
    pub fn new(source: Complex<F>, target: Complex<F>, map: ChainMap<F>) -> Self {
        let chain_map = map.is_chain_map(&source, &target);
        let quasi_iso = chain_map && is_quasi_iso(&map, &source, &target);
        DerivedMap { source, target, map, chain_map, quasi_iso }
    }

    pub fn holds(&self) -> bool {
        self.chain_map && self.quasi_iso
    }
}

/// `Rg_*Rf_*F -> R(g∘f)_*F` compared two ways: `g_*` of the resolution map of `f_*I` must
/// be a quasi-isomorphism, and the stalk cohomology of both sides must agree.
#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport {
    pub quasi_iso: bool,
    pub dims_agree: bool,
}

pub fn direct_composition_check<F: Field>(f: &PointMap, g: &PointMap, a: &StalkSheaf<F>) -> CompositionReport {
    let i = resolve_unchecked(a);
    let pc = i.push(f).to_complex();
    let t = canonical_resolution_complex(&pc);
    let tc = t.complex.to_complex();
    let (gp, dp) = push_complex(g, &pc);
    let (gt, dt) = push_complex(g, &tc);
    let comps = (0..t.aug.comps.len())
        .map(|q| {
            let k = t.aug.lo + q as i64;
            let (ip, it) = ((k - pc.lo) as usize, (k - tc.lo) as usize);
            direct_image_morphism(&dp[ip], &dt[it], &t.aug.comps[q])
        })
        .collect();
    let m = DerivedMap::new(gp, gt.clone(), ChainMap { lo: t.aug.lo, comps });
    let direct = i.push(&f.then(g)).to_complex();
    let (lo, hi) = (direct.lo.min(gt.lo), direct.hi().max(gt.hi()));
    let dims_agree = stalk_cohomology_window(&direct, lo, hi) == stalk_cohomology_window(&gt, lo, hi);
    CompositionReport { quasi_iso: m.holds(), dims_agree }
}

/// Stalk cohomology of `R(g∘f)_!!F` and of `Rg_!!Rf_!!F`.
pub fn proper_composition_dims<F: Field>(f: &PointMap, g: &PointMap, a: &StalkSheaf<F>) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let gf = f.then(g);
    let direct = rf_proper(&gf, a).to_complex();
    let inner = rf_proper(f, a).to_complex();
    let outer = rf_proper_complex(g, &inner).to_complex();
    let (lo, hi) = (direct.lo.min(outer.lo), direct.hi().max(outer.hi()));
    (stalk_cohomology_window(&direct, lo, hi), stalk_cohomology_window(&outer, lo, hi))
}

/// Positions, within the stalk at `w`, of each summand: `(summand, offset, multiplicity)`.
fn stalk_blocks(sum: &InjSum, p: &PosetSpace, w: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut o = 0;
    for (s, &(x, m)) in sum.summands.iter().enumerate() {
        if p.leq(w, x) {
            out.push((s, o, m));
            o += m;
        }
    }
    out
}

fn block_diag_or_empty<F: Field>(blocks: &[Matrix<F>]) -> Matrix<F> {
    let refs: Vec<&Matrix<F>> = blocks.iter().collect();
    if refs.is_empty() {
        Matrix::zeros(0, 0)
    } else {
        Matrix::block_diag(&refs)
    }
}

/// `Rf_!!F ⊗ G -> Rf_!!(F ⊗ f^{-1}G)` on canonical resolutions: on the summand of a chain
/// ending at `x_k`, `1 ⊗ G(y <= f(x_k))`.
pub fn derived_projection_formula<F: Field>(f: &PointMap, a: &StalkSheaf<F>, g: &StalkSheaf<F>) -> DerivedMap<F> {
    let ustar = f.source.largest_rel_compact();
    let au = restrict_z(&ustar, a).expect("open");
    let ca = canonical_resolution(&au);
    let ja = ca.complex.push(f);
    let source = ja.to_complex().tensor_sheaf(&g.rep);
    let b = restrict_z(&ustar, &a.tensor(&inverse_image(f, g))).expect("open");
    let cb = canonical_resolution(&b);
    let target = cb.complex.push(f).to_complex();
    let q = &f.target.poset;
    let comps = (0..ja.terms.len())
        .map(|k| Morphism {
            comps: (0..q.len())
                .map(|y| {
                    let blocks: Vec<Matrix<F>> = stalk_blocks(&ja.terms[k], q, y)
                        .into_iter()
                        .map(|(s, _, m)| {
                            let last = *ca.chains[k][s].last().unwrap();
                            Matrix::identity(m).kron(g.map(y, f.map[last]))
                        })
                        .collect();
                    block_diag_or_empty(&blocks)
                })
                .collect(),
        })
        .collect();
    DerivedMap::new(source, target, ChainMap { lo: 0, comps })
}

/// `g^{-1}Rf_!!F -> Rf'_!!g'^{-1}F`: pullback of normalized cochains along `g'`. `None` when
/// the supports do not match and the pullback is not a chain map.
pub fn derived_base_change<F: Field>(f: &PointMap, g: &PointMap, a: &StalkSheaf<F>) -> Result<Option<DerivedMap<F>>, SheafError> {
    let sq = fiber_product(f, g)?;
    let ustar = f.source.largest_rel_compact();
    let au = restrict_z(&ustar, a)?;
    let ca = canonical_resolution(&au);
    let ja = ca.complex.push(f);
    let source = ja.to_complex().pullback(g);
    let ustar2 = sq.fiber.largest_rel_compact();
    let a2 = restrict_z(&ustar2, &inverse_image(&sq.g_prime, a))?;
    let cb = canonical_resolution(&a2);
    let jb = cb.complex.push(&sq.f_prime);
    let target = jb.to_complex();
    let (py, px) = (&f.target.poset, &f.source.poset);
    let pyp = &g.source.poset;
    let index: Vec<HashMap<&Vec<usize>, usize>> =
        ca.chains.iter().map(|cs| cs.iter().enumerate().map(|(i, c)| (c, i)).collect()).collect();
    let n = ja.terms.len().min(jb.terms.len());
    let mut comps = Vec::with_capacity(n);
    for k in 0..n {
        let mut per = Vec::with_capacity(pyp.len());
        for yp in 0..pyp.len() {
            let cols = stalk_blocks(&ja.terms[k], py, g.map[yp]);
            let rows = stalk_blocks(&jb.terms[k], pyp, yp);
            let col_of: HashMap<usize, (usize, usize)> = cols.iter().map(|&(s, o, m)| (s, (o, m))).collect();
            let nr: usize = rows.iter().map(|r| r.2).sum();
            let nc: usize = cols.iter().map(|c| c.2).sum();
            let mut m = Matrix::zeros(nr, nc);
            for &(s2, ro, rm) in &rows {
                let img: Vec<usize> = cb.chains[k][s2].iter().map(|&x| sq.g_prime.map[x]).collect();
                if img.windows(2).any(|w| !px.lt(w[0], w[1])) {
                    continue;
                }
                if let Some(&s) = index[k].get(&img) {
                    if let Some(&(co, cm)) = col_of.get(&s) {
                        if rm == cm && rm > 0 {
                            m.set_block(ro, co, &Matrix::identity(rm));
                        }
                    }
                }
            }
            per.push(m);
        }
        comps.push(Morphism { comps: per });
    }
    let d = DerivedMap::new(source, target, ChainMap { lo: 0, comps });
    Ok(if d.chain_map { Some(d) } else { None })
}

/// `X × X'` with the product order (index `x * |X'| + x'`) inside the product of ambients.
pub fn product_space(a: &Arc<Space>, b: &Arc<Space>) -> Arc<Space> {
    let poset = a.poset.product(&b.poset);
    let name = format!("{}x{}", a.name, b.name);
    if a.ambient.is_none() && b.ambient.is_none() {
        return Arc::new(Space::new(&name, poset));
    }
    let amb = |s: &Space| match &s.ambient {
        Some(am) => (am.poset.clone(), am.embed.clone()),
        None => (s.poset.clone(), (0..s.len()).collect()),
    };
    let (pa, ea) = amb(a);
    let (pb, eb) = amb(b);
    let m = b.len();
    let embed = (0..a.len() * m).map(|i| ea[i / m] * pb.len() + eb[i % m]).collect();
    Arc::new(Space::with_ambient(&name, poset, pa.product(&pb), embed).expect("product of opens is open"))
}

pub fn product_projections(prod: &Arc<Space>, a: &Arc<Space>, b: &Arc<Space>) -> (PointMap, PointMap) {
    let m = b.len();
    let n = prod.len();
    (
        PointMap { source: prod.clone(), target: a.clone(), map: (0..n).map(|i| i / m).collect() },
        PointMap { source: prod.clone(), target: b.clone(), map: (0..n).map(|i| i % m).collect() },
    )
}

/// `f × g` between product spaces.
pub fn product_map(f: &PointMap, g: &PointMap) -> PointMap {
    let src = product_space(&f.source, &g.source);
    let tgt = product_space(&f.target, &g.target);
    let (m, mt) = (g.source.len(), g.target.len());
    let map = (0..src.len()).map(|i| f.map[i / m] * mt + g.map[i % m]).collect();
    PointMap { source: src, target: tgt, map }
}

/// `F ⊠ G` on `X × X'`.
pub fn external_sheaf<F: Field>(a: &StalkSheaf<F>, b: &StalkSheaf<F>, prod: &Arc<Space>) -> StalkSheaf<F> {
    let (p1, p2) = product_projections(prod, &a.space, &b.space);
    inverse_image(&p1, a).tensor(&inverse_image(&p2, b))
}

/// `Rf_!!F ⊠ Rg_!!G -> R(f×g)_!!(F ⊠ G)` by the Alexander–Whitney cross product: a chain
/// `C` of `X × X'` pairs the front face of its first projection with the back face of
/// its second, the coefficient `F(c_p <= C_n)` moving the first value to the end.
pub fn kunneth<F: Field>(f: &PointMap, g: &PointMap, a: &StalkSheaf<F>, b: &StalkSheaf<F>) -> DerivedMap<F> {
    let delta = product_map(f, g);
    let au = restrict_z(&f.source.largest_rel_compact(), a).expect("open");
    let bu = restrict_z(&g.source.largest_rel_compact(), b).expect("open");
    let (ca, cb) = (canonical_resolution(&au), canonical_resolution(&bu));
    let (ja, jb) = (ca.complex.push(f), cb.complex.push(g));
    let lhs = ja.external(&jb, delta.target.clone());
    let r = external_sheaf(&au, &bu, &delta.source);
    let cr = canonical_resolution(&r);
    let rhs = cr.complex.push(&delta);
    let m = g.source.len();
    let ia: Vec<HashMap<&Vec<usize>, usize>> = ca.chains.iter().map(|cs| cs.iter().enumerate().map(|(i, c)| (c, i)).collect()).collect();
    let ib: Vec<HashMap<&Vec<usize>, usize>> = cb.chains.iter().map(|cs| cs.iter().enumerate().map(|(i, c)| (c, i)).collect()).collect();
    let (px, pxp) = (&f.source.poset, &g.source.poset);
    let n = lhs.terms.len().min(rhs.terms.len());
    let mut mats = Vec::with_capacity(n);
    for t in 0..n {
        // Column offsets of (i, s, s') in the external product layout.
        let mut col: HashMap<(usize, usize, usize), usize> = HashMap::new();
        let mut o = 0;
        for i in 0..ja.terms.len() {
            if t < i || t - i >= jb.terms.len() {
                continue;
            }
            for (s, &(_, ma)) in ja.terms[i].summands.iter().enumerate() {
                for (s2, &(_, mb)) in jb.terms[t - i].summands.iter().enumerate() {
                    col.insert((i, s, s2), o);
                    o += ma * mb;
                }
            }
        }
        let mut mat = Matrix::zeros(rhs.terms[t].total(), lhs.terms[t].total());
        let mut ro = 0;
        for (ci, chain) in cr.chains[t].iter().enumerate() {
            let rm = rhs.terms[t].summands[ci].1;
            let (end1, end2) = (chain[t] / m, chain[t] % m);
            for p in 0..=t {
                let front: Vec<usize> = chain[..=p].iter().map(|&c| c / m).collect();
                let back: Vec<usize> = chain[p..].iter().map(|&c| c % m).collect();
                if front.windows(2).any(|w| !px.lt(w[0], w[1])) || back.windows(2).any(|w| !pxp.lt(w[0], w[1])) {
                    continue;
                }
                let (Some(&s), Some(&s2)) = (ia[p].get(&front), ib[t - p].get(&back)) else { continue };
                let co = col[&(p, s, s2)];
                let blk = au.map(front[p], end1).kron(&Matrix::identity(bu.dim(end2)));
                mat.add_block(ro, co, &blk);
            }
            ro += rm;
        }
        mats.push(mat);
    }
    let q = &delta.target.poset;
    let comps = (0..n).map(|t| inj_morphism(q, &lhs.terms[t], &rhs.terms[t], &mats[t])).collect();
    DerivedMap::new(lhs.to_complex(), rhs.to_complex(), ChainMap { lo: 0, comps })
}

/// `ω_X`: `⊕_{dim σ = d} I_σ` in degree `-d`, differentials the signed incidences.
pub fn dualizing_complex<F: Field>(k: &SimplicialComplex, space: &Arc<Space>) -> InjComplex<F> {
    let top = k.dim();
    let by_dim: Vec<Vec<usize>> = (0..=top).rev().map(|d| (0..k.len()).filter(|&s| k.dim_of(s) == d).collect()).collect();
    let terms: Vec<InjSum> = by_dim.iter().map(|ss| InjSum { summands: ss.iter().map(|&s| (s, 1)).collect() }).collect();
    let diffs = (0..by_dim.len().saturating_sub(1))
        .map(|i| {
            let (src, tgt) = (&by_dim[i], &by_dim[i + 1]);
            let pos: HashMap<usize, usize> = tgt.iter().enumerate().map(|(j, &s)| (s, j)).collect();
            let mut m = Matrix::zeros(tgt.len(), src.len());
            for (c, &s) in src.iter().enumerate() {
                for (face, sign) in k.boundary(s) {
                    m.set(pos[&face], c, F::from_i64(sign));
                }
            }
            m
        })
        .collect();
    InjComplex { space: space.clone(), lo: -(top as i64), terms, diffs }
}

/// One factor of a factorization used to compute `f^!`.
#[derive(Debug, Clone)]
pub enum ShriekStep<F> {
    /// A locally closed embedding with the induced order.
    Closed(PointMap),
    /// An open embedding.
    Open(PointMap),
    /// A projection `X × Y -> Y` (index `x * |Y| + y`) with `ω_X`.
    Projection { map: PointMap, factor: Arc<Space>, omega: InjComplex<F> },
}

impl<F: Field> ShriekStep<F> {
    pub fn map(&self) -> &PointMap {
        match self {
            ShriekStep::Closed(m) | ShriekStep::Open(m) => m,
            ShriekStep::Projection { map, .. } => map,
        }
    }
}

/// `f = steps[n-1] ∘ ... ∘ steps[0]`.
#[derive(Debug, Clone)]
pub struct Factorization<F> {
    pub steps: Vec<ShriekStep<F>>,
}

impl<F: Field> Factorization<F> {
    pub fn composite(&self) -> PointMap {
        let mut it = self.steps.iter();
        let first = it.next().expect("nonempty factorization").map().clone();
        it.fold(first, |acc, s| acc.then(s.map()))
    }

    /// `a: X -> pt` as the projection `X × pt -> pt` (the product with a point is `X`).
    pub fn to_point(k: &SimplicialComplex, space: &Arc<Space>) -> Self {
        let pt = PointMap::to_point(space);
        let omega = dualizing_complex(k, space);
        Factorization { steps: vec![ShriekStep::Projection { map: pt, factor: space.clone(), omega }] }
    }

    pub fn closed(i: PointMap) -> Self {
        Factorization { steps: vec![ShriekStep::Closed(i)] }
    }

    pub fn open(j: PointMap) -> Self {
        Factorization { steps: vec![ShriekStep::Open(j)] }
    }
}

enum DObj<F> {
    Inj(InjComplex<F>),
    Cx(Complex<F>),
}

impl<F: Field> DObj<F> {
    fn inj(self) -> InjComplex<F> {
        match self {
            DObj::Inj(i) => i,
            DObj::Cx(c) => resolve_complex(&c),
        }
    }

    fn cx(self) -> Complex<F> {
        match self {
            DObj::Inj(i) => i.to_complex(),
            DObj::Cx(c) => c,
        }
    }
}

/// `i^!K = i^{-1}RHom(k_Z, K)` for an injective complex `K`.
pub fn shriek_closed<F: Field>(i: &PointMap, k: &InjComplex<F>) -> Result<InjComplex<F>, DerivedError> {
    let z = i.image(&i.source.poset.full());
    if !i.target.poset.is_locally_closed(&z) || !i.is_closed_embedding() {
        return Err(DerivedError::Shape("not a locally closed embedding".into()));
    }
    Ok(k.supported_in(&z).restrict_closed(i))
}

/// `j^! = j^{-1}` for an open embedding.
pub fn shriek_open<F: Field>(j: &PointMap, k: &Complex<F>) -> Result<Complex<F>, DerivedError> {
    if !j.is_open_embedding() {
        return Err(DerivedError::Shape("not an open embedding".into()));
    }
    Ok(k.pullback(j))
}

/// `p^!K = ω_X ⊠ K` for the projection `X × Y -> Y`.
pub fn shriek_projection<F: Field>(p: &PointMap, factor: &Arc<Space>, omega: &InjComplex<F>, k: &InjComplex<F>) -> Result<InjComplex<F>, DerivedError> {
    let m = p.target.len();
    if p.source.len() != factor.len() * m || (0..p.source.len()).any(|i| p.map[i] != i % m) {
        return Err(DerivedError::Shape("map is not a product projection".into()));
    }
    Ok(omega.external(k, p.source.clone()))
}

/// `f^!K` through the declared factorization.
pub fn upper_shriek<F: Field>(fact: &Factorization<F>, k: &Complex<F>) -> Result<InjComplex<F>, DerivedError> {
    let mut cur = DObj::Cx(k.clone());
    for step in fact.steps.iter().rev() {
        cur = match step {
            ShriekStep::Closed(i) => DObj::Inj(shriek_closed(i, &cur.inj())?),
            ShriekStep::Open(j) => DObj::Cx(shriek_open(j, &cur.cx())?),
            ShriekStep::Projection { map, factor, omega } => DObj::Inj(shriek_projection(map, factor, omega, &cur.inj())?),
        };
    }
    Ok(cur.inj())
}

pub fn upper_shriek_sheaf<F: Field>(fact: &Factorization<F>, g: &StalkSheaf<F>) -> Result<InjComplex<F>, DerivedError> {
    match fact.steps.as_slice() {
        [ShriekStep::Closed(i)] => shriek_closed(i, &resolve_unchecked(g)),
        _ => upper_shriek(fact, &Complex::concentrated(g, 0)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdierReport {
    /// `dim Hom(Rf_!!F, G)`.
    pub hom_proper: usize,
    /// `dim Hom(F, f^!G)`.
    pub hom_shriek: usize,
    pub equal: bool,
}

pub fn verdier_adjunction_check<F: Field>(fact: &Factorization<F>, a: &StalkSheaf<F>, g: &StalkSheaf<F>) -> Result<VerdierReport, DerivedError> {
    let f = fact.composite();
    let rf = rf_proper(&f, a).to_complex();
    let hom_proper = resolve_unchecked(g).hom_from(&rf).global_sections().h(0);
    let hom_shriek = upper_shriek_sheaf(fact, g)?.hom_from_sheaf(a).global_sections().h(0);
    Ok(VerdierReport { hom_proper, hom_shriek, equal: hom_proper == hom_shriek })
}

/// The unit `F -> i^!Ri_!!F` for a proper locally closed embedding.
pub fn closed_unit<F: Field>(i: &PointMap, a: &StalkSheaf<F>) -> Result<DerivedMap<F>, DerivedError> {
    let ustar = i.source.largest_rel_compact();
    if ustar != i.source.poset.full() {
        return Err(DerivedError::Shape("embedding is not proper".into()));
    }
    let d = direct_image_full(i, a);
    let res = resolve(&d.sheaf)?;
    let z = i.image(&i.source.poset.full());
    let j = shriek_closed(i, &res.complex)?;
    let px = &i.target.poset;
    let comps = (0..i.source.len())
        .map(|w| {
            let x = i.map[w];
            let l = &d.limits[x];
            let s = l.coords(&l.gather(|v| a.map(w, v).clone(), a.dim(w))).expect("compatible");
            let full = res.aug.comp(x).mul(&s);
            let keep: Vec<usize> = stalk_blocks(&res.complex.terms[0], px, x)
                .into_iter()
                .filter(|&(si, _, _)| z.contains(res.complex.terms[0].summands[si].0))
                .flat_map(|(_, o, m)| o..o + m)
                .collect();
            full.select_rows(&keep)
        })
        .collect();
    Ok(DerivedMap::new(Complex::concentrated(a, 0), j.to_complex(), ChainMap { lo: 0, comps: vec![Morphism { comps }] }))
}

/// `D'F = RHom(F, k_X)`.
pub fn dual_prime<F: Field>(a: &StalkSheaf<F>) -> InjComplex<F> {
    resolve_unchecked(&StalkSheaf::constant(&a.space)).hom_from_sheaf(a)
}

pub fn dual_prime_complex<F: Field>(k: &Complex<F>) -> InjComplex<F> {
    let sp = k.space.clone();
    resolve_unchecked(&StalkSheaf::<F>::constant(&sp)).hom_from(k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LctReport {
    /// `k_{Ū} -> D'k_U` is a quasi-isomorphism.
    pub closure: bool,
    /// `k_U -> D'k_{Ū}` is a quasi-isomorphism.
    pub open: bool,
}

impl LctReport {
    pub fn holds(&self) -> bool {
        self.closure && self.open
    }
}

/// Both comparison maps are adjoint to `k_U ⊗ k_{Ū} = k_U -> k_X`, realized on the
/// resolution of `k_X` by projecting the augmentation onto the summands in `U` (resp. `Ū`).
pub fn is_lct<F: Field>(space: &Arc<Space>, u: &PointSet) -> Result<LctReport, DerivedError> {
    let p = &space.poset;
    if !p.is_open(u) {
        return Err(DerivedError::Shape("not an open subset".into()));
    }
    let cl = p.down_closure(u);
    let k = StalkSheaf::<F>::constant(space);
    let res = resolve(&k)?;
    let compare = |src: &PointSet, supp: &PointSet| -> bool {
        let target = res.complex.supported_in(supp);
        let source = StalkSheaf::constant_on(space, src).expect("locally closed");
        let comps = (0..p.len())
            .map(|w| {
                let keep: Vec<usize> = stalk_blocks(&res.complex.terms[0], p, w)
                    .into_iter()
                    .filter(|&(si, _, _)| supp.contains(res.complex.terms[0].summands[si].0))
                    .flat_map(|(_, o, m)| o..o + m)
                    .collect();
                if src.contains(w) {
                    res.aug.comp(w).select_rows(&keep)
                } else {
                    Matrix::zeros(keep.len(), 0)
                }
            })
            .collect();
        DerivedMap::new(Complex::concentrated(&source, 0), target.to_complex(), ChainMap { lo: 0, comps: vec![Morphism { comps }] })
            .holds()
    };
    Ok(LctReport { closure: compare(&cl, u), open: compare(u, &cl) })
}

/// `Γ(V; I ⊗ k_U)` has no higher cohomology, for a sheaf `I` and opens `U`, `V`.
pub fn restricted_acyclic<F: Field>(i: &StalkSheaf<F>, u: &PointSet, v: &PointSet) -> bool {
    let iu = restrict_z(u, i).expect("open");
    derived_sections(&iu, v).cohomology().iter().skip(1).all(|&d| d == 0)
}

/// Cohomology sheaves of an injective complex as graded stalk dimensions.
pub fn graded_stalks<F: Field>(k: &InjComplex<F>) -> Vec<Vec<usize>> {
    stalk_cohomology(&k.to_complex())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F2, Q};

    fn circle() -> SimplicialComplex {
        SimplicialComplex::from_facets("S1", &["a", "b", "c"], &[&["a", "b"], &["b", "c"], &["a", "c"]])
    }

    #[test]
    fn circle_cohomology_both_ways() {
        let k = circle();
        let sp = k.space();
        let c: StalkSheaf<Q> = StalkSheaf::constant(&sp);
        assert_eq!(cohomology(&c), vec![1, 1]);
        assert_eq!(cech_cohomology(&k.vertex_star_cover(), &c), vec![1, 1]);
    }

    #[test]
    fn omega_computes_homology() {
        let rp2 = SimplicialComplex::from_facets(
            "RP2",
            &["1", "2", "3", "4", "5", "6"],
            &[
                &["1", "2", "3"],
                &["1", "3", "4"],
                &["1", "4", "5"],
                &["1", "5", "6"],
                &["1", "2", "6"],
                &["2", "3", "5"],
                &["2", "4", "5"],
                &["2", "4", "6"],
                &["3", "4", "6"],
                &["3", "5", "6"],
            ],
        );
        let sp = rp2.space();
        let w: InjComplex<F2> = dualizing_complex(&rp2, &sp);
        assert!(w.is_complex());
        let g = w.global_sections();
        assert_eq!((g.h(0), g.h(-1), g.h(-2)), (1, 1, 1));
        let wq: InjComplex<Q> = dualizing_complex(&rp2, &sp);
        let g = wq.global_sections();
        assert_eq!((g.h(0), g.h(-1), g.h(-2)), (1, 0, 0));
    }

    #[test]
    fn circle_to_point_verdier() {
        let k = circle();
        let sp = k.space();
        let fact = Factorization::<Q>::to_point(&k, &sp);
        let c = StalkSheaf::constant(&sp);
        let pt = fact.composite().target.clone();
        let r = verdier_adjunction_check(&fact, &c, &StalkSheaf::constant(&pt)).unwrap();
        assert_eq!((r.hom_proper, r.hom_shriek), (1, 1));
    }

    #[test]
    fn interior_vertex_shriek() {
        let k = SimplicialComplex::from_facets("path", &["v0", "v1", "v2"], &[&["v0", "v1"], &["v1", "v2"]]);
        let sp = k.space();
        let p = &sp.poset;
        for (name, expect) in [("v1", vec![0, 1]), ("v0", vec![0])] {
            let x = p.index_of(name).unwrap();
            let pt = Arc::new(Space::new("pt", PosetSpace::point(name)));
            let i = PointMap::new(pt, sp.clone(), vec![x]).unwrap();
            let j = upper_shriek_sheaf(&Factorization::closed(i), &StalkSheaf::<Q>::constant(&sp)).unwrap();
            assert_eq!(trim(j.global_sections().cohomology()), expect);
        }
    }

    #[test]
    fn star_is_lct() {
        let k = circle();
        let sp = k.space();
        let u = k.open_star(0);
        assert!(is_lct::<Q>(&sp, &u).unwrap().holds());
        assert!(is_lct::<Q>(&sp, &sp.poset.empty_set()).unwrap().holds());
    }

    #[test]
    fn kunneth_interval() {
        let k = SimplicialComplex::from_facets("I", &["a", "b"], &[&["a", "b"]]);
        let sp = k.space();
        let a = PointMap::to_point(&sp);
        let c: StalkSheaf<Q> = StalkSheaf::constant(&sp);
        let m = kunneth(&a, &a, &c, &c);
        assert!(m.chain_map);
        assert!(m.quasi_iso);
    }
}
