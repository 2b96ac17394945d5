//! Bounded complexes of sheaves, complexes of co-skyscraper sums, and injective
//! resolutions.

use std::sync::Arc;

use crate::field::Field;
use crate::matrix::{cohomology_dims, Matrix};
use crate::ops::PointMap;
use crate::pointset::PointSet;
use crate::poset::PosetSpace;
use crate::rep::{self, Morphism, Rep};
use crate::sheaf::StalkSheaf;
use crate::site::Space;

/// A cochain complex of finite-dimensional vector spaces starting in degree `lo`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain<F> {
    pub lo: i64,
    pub dims: Vec<usize>,
    pub diffs: Vec<Matrix<F>>,
}

impl<F: Field> Cochain<F> {
    pub fn cohomology(&self) -> Vec<usize> {
        cohomology_dims(&self.dims, &self.diffs)
    }

    /// `H^k` for an absolute degree.
    pub fn h(&self, k: i64) -> usize {
        let i = k - self.lo;
        if i < 0 || i as usize >= self.dims.len() {
            0
        } else {
            self.cohomology()[i as usize]
        }
    }

    pub fn euler(&self) -> i64 {
        self.cohomology().iter().enumerate().map(|(i, &d)| if (i as i64 + self.lo) % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
    }
}

/// Trims zero cohomology at both ends and pads to start at degree 0 when possible;
/// returns graded dimensions from `from` to `to` inclusive.
pub fn graded(c: &[usize], lo: i64, from: i64, to: i64) -> Vec<usize> {
    (from..=to)
        .map(|k| {
            let i = k - lo;
            if i < 0 || i as usize >= c.len() {
                0
            } else {
                c[i as usize]
            }
        })
        .collect()
}

/// A bounded complex of sheaves `terms[i]` in degree `lo + i`.
#[derive(Debug, Clone)]
pub struct Complex<F> {
    pub space: Arc<Space>,
    pub lo: i64,
    pub terms: Vec<Rep<F>>,
    /// `diffs[i]: terms[i] -> terms[i+1]`.
    pub diffs: Vec<Morphism<F>>,
}

impl<F: Field> Complex<F> {
    pub fn concentrated(f: &StalkSheaf<F>, degree: i64) -> Self {
        Complex { space: f.space.clone(), lo: degree, terms: vec![f.rep.clone()], diffs: vec![] }
    }

    pub fn poset(&self) -> &PosetSpace {
        &self.space.poset
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.terms.len() as i64 - 1
    }

    pub fn term(&self, k: i64) -> Option<&Rep<F>> {
        let i = k - self.lo;
        if i < 0 {
            None
        } else {
            self.terms.get(i as usize)
        }
    }

    pub fn sheaf(&self, i: usize) -> StalkSheaf<F> {
        StalkSheaf { space: self.space.clone(), rep: self.terms[i].clone() }
    }

    /// `d∘d = 0` and every differential natural.
    pub fn is_complex(&self) -> bool {
        let p = self.poset();
        for (i, d) in self.diffs.iter().enumerate() {
            if d.validate(p, &self.terms[i], &self.terms[i + 1]).is_err() {
                return false;
            }
            if i + 1 < self.diffs.len() && !d.then(&self.diffs[i + 1]).is_zero() {
                return false;
            }
        }
        true
    }

    /// Stalk complex at `x`.
    pub fn stalk(&self, x: usize) -> Cochain<F> {
        Cochain {
            lo: self.lo,
            dims: self.terms.iter().map(|t| t.dim(x)).collect(),
            diffs: self.diffs.iter().map(|d| d.comp(x).clone()).collect(),
        }
    }

    pub fn is_acyclic(&self) -> bool {
        (0..self.poset().len()).all(|x| self.stalk(x).cohomology().iter().all(|&d| d == 0))
    }

    /// Sections over any subset, termwise (not derived).
    pub fn sections(&self, s: &PointSet) -> Cochain<F> {
        let p = self.poset();
        let lims: Vec<_> = self.terms.iter().map(|t| t.limit(p, s)).collect();
        let diffs = self
            .diffs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let (a, b) = (&lims[i], &lims[i + 1]);
                let vals = b.gather(|x| d.comp(x).mul(&a.proj(x)), a.dim());
                b.coords(&vals).expect("differential maps sections to sections")
            })
            .collect();
        Cochain { lo: self.lo, dims: lims.iter().map(|l| l.dim()).collect(), diffs }
    }

    pub fn tensor_sheaf(&self, g: &Rep<F>) -> Self {
        let p = self.poset();
        let idg = Morphism::identity(g);
        Complex {
            space: self.space.clone(),
            lo: self.lo,
            terms: self.terms.iter().map(|t| t.tensor(g, p)).collect(),
            diffs: self.diffs.iter().map(|d| d.tensor(&idg)).collect(),
        }
    }

    /// Total tensor complex with the Koszul sign on the second factor.
    pub fn tensor(&self, other: &Self) -> Self {
        let p = self.poset();
        let lo = self.lo + other.lo;
        let n = self.terms.len() + other.terms.len() - 1;
        let mut terms = Vec::with_capacity(n);
        let mut blocks: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
        for t in 0..n {
            let mut rep = Rep::zero(p);
            let mut parts = Vec::new();
            for i in 0..self.terms.len() {
                if t >= i && t - i < other.terms.len() {
                    rep = rep.direct_sum(&self.terms[i].tensor(&other.terms[t - i], p), p);
                    parts.push((i, t - i));
                }
            }
            terms.push(rep);
            blocks.push(parts);
        }
        let diffs = (0..n.saturating_sub(1))
            .map(|t| {
                let comps = (0..p.len())
                    .map(|x| {
                        let dimp = |i: usize, j: usize| self.terms[i].dim(x) * other.terms[j].dim(x);
                        let rows: usize = blocks[t + 1].iter().map(|&(i, j)| dimp(i, j)).sum();
                        let cols: usize = blocks[t].iter().map(|&(i, j)| dimp(i, j)).sum();
                        let mut m = Matrix::zeros(rows, cols);
                        let mut c0 = 0;
                        for &(i, j) in &blocks[t] {
                            let mut r0 = 0;
                            for &(i2, j2) in &blocks[t + 1] {
                                if i2 == i + 1 && j2 == j {
                                    let b = self.diffs[i].comp(x).kron(&Matrix::identity(other.terms[j].dim(x)));
                                    m.set_block(r0, c0, &b);
                                }
                                if i2 == i && j2 == j + 1 {
                                    let sign = if (self.lo + i as i64) % 2 == 0 { F::one() } else { F::one().neg() };
                                    let b = Matrix::identity(self.terms[i].dim(x)).kron(other.diffs[j].comp(x)).scale(&sign);
                                    m.set_block(r0, c0, &b);
                                }
                                r0 += dimp(i2, j2);
                            }
                            c0 += dimp(i, j);
                        }
                        m
                    })
                    .collect();
                Morphism { comps }
            })
            .collect();
        Complex { space: self.space.clone(), lo, terms, diffs }
    }

    pub fn pullback(&self, f: &PointMap) -> Self {
        Complex {
            space: f.source.clone(),
            lo: self.lo,
            terms: self.terms.iter().map(|t| t.pullback(&f.source.poset, &f.map)).collect(),
            diffs: self.diffs.iter().map(|d| d.pullback(&f.map)).collect(),
        }
    }

    /// Termwise `· ⊗ k_Z`.
    pub fn restrict_z(&self, z: &PointSet) -> Self {
        self.tensor_sheaf(&Rep::indicator(self.poset(), z))
    }

    /// Extends by zero terms so that the complex covers `[lo, hi]`.
    pub fn padded(&self, lo: i64, hi: i64) -> Self {
        let p = self.poset();
        let z = Rep::zero(p);
        let terms: Vec<Rep<F>> = (lo..=hi).map(|k| self.term(k).cloned().unwrap_or_else(|| z.clone())).collect();
        let diffs = (lo..hi)
            .map(|k| {
                let i = k - self.lo;
                if i >= 0 && (i as usize) < self.diffs.len() {
                    self.diffs[i as usize].clone()
                } else {
                    Morphism::zero(&terms[(k - lo) as usize], &terms[(k - lo + 1) as usize])
                }
            })
            .collect();
        Complex { space: self.space.clone(), lo, terms, diffs }
    }
}

/// A degreewise morphism of complexes; `comps[i]` acts in degree `lo + i`.
#[derive(Debug, Clone)]
pub struct ChainMap<F> {
    pub lo: i64,
    pub comps: Vec<Morphism<F>>,
}

impl<F: Field> ChainMap<F> {
    pub fn hi(&self) -> i64 {
        self.lo + self.comps.len() as i64 - 1
    }

    /// Component in degree `k`, zero outside the stored range.
    pub fn at(&self, k: i64, a: &Rep<F>, b: &Rep<F>) -> Morphism<F> {
        let i = k - self.lo;
        if i >= 0 && (i as usize) < self.comps.len() {
            self.comps[i as usize].clone()
        } else {
            Morphism::zero(a, b)
        }
    }

    fn range(&self, a: &Complex<F>, b: &Complex<F>) -> (i64, i64) {
        (self.lo.min(a.lo).min(b.lo), self.hi().max(a.hi()).max(b.hi()))
    }

    /// Natural in every degree and commutes with the differentials.
    pub fn is_chain_map(&self, a: &Complex<F>, b: &Complex<F>) -> bool {
        let (lo, hi) = self.range(a, b);
        let a = a.padded(lo, hi);
        let b = b.padded(lo, hi);
        let p = a.poset();
        let comps: Vec<Morphism<F>> = (lo..=hi).map(|k| self.at(k, &a.terms[(k - lo) as usize], &b.terms[(k - lo) as usize])).collect();
        for (i, m) in comps.iter().enumerate() {
            if m.validate(p, &a.terms[i], &b.terms[i]).is_err() {
                return false;
            }
            if i + 1 < comps.len() && m.then(&b.diffs[i]) != a.diffs[i].then(&comps[i + 1]) {
                return false;
            }
        }
        true
    }
}

/// Mapping cone: `Cone^k = A^{k+1} ⊕ B^k`, `d(a, b) = (-d a, φ a + d b)`.
pub fn cone<F: Field>(phi: &ChainMap<F>, a: &Complex<F>, b: &Complex<F>) -> Complex<F> {
    let (lo, hi) = phi.range(a, b);
    let a = a.padded(lo - 1, hi + 1);
    let b = b.padded(lo - 1, hi + 1);
    let p = a.poset().clone();
    let ai = |k: i64| (k - (lo - 1)) as usize;
    let phis: Vec<Morphism<F>> = (lo - 1..=hi + 1).map(|k| phi.at(k, &a.terms[ai(k)], &b.terms[ai(k)])).collect();
    // Cone degrees lo-1 ..= hi.
    let terms: Vec<Rep<F>> = (lo - 1..=hi).map(|k| a.terms[ai(k + 1)].direct_sum(&b.terms[ai(k)], &p)).collect();
    let diffs = (lo - 1..hi)
        .map(|k| {
            let comps = (0..p.len())
                .map(|x| {
                    let da = a.diffs[ai(k + 1)].comp(x).neg();
                    let db = b.diffs[ai(k)].comp(x);
                    let f = phis[ai(k + 1)].comp(x);
                    let (a1, a2) = (a.terms[ai(k + 1)].dim(x), a.terms[ai(k + 2)].dim(x));
                    let (b0, b1) = (b.terms[ai(k)].dim(x), b.terms[ai(k + 1)].dim(x));
                    let mut m = Matrix::zeros(a2 + b1, a1 + b0);
                    m.set_block(0, 0, &da);
                    m.set_block(a2, 0, f);
                    m.set_block(a2, a1, db);
                    m
                })
                .collect();
            Morphism { comps }
        })
        .collect();
    Complex { space: a.space.clone(), lo: lo - 1, terms, diffs }
}

/// A chain map is a quasi-isomorphism iff its cone is acyclic (stalkwise).
pub fn is_quasi_iso<F: Field>(phi: &ChainMap<F>, a: &Complex<F>, b: &Complex<F>) -> bool {
    cone(phi, a, b).is_acyclic()
}

/// A finite sum `⊕ I_x ⊗ k^m` of co-skyscrapers, summands in list order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InjSum {
    pub summands: Vec<(usize, usize)>,
}

impl InjSum {
    pub fn empty() -> Self {
        InjSum { summands: vec![] }
    }

    pub fn total(&self) -> usize {
        self.summands.iter().map(|s| s.1).sum()
    }

    /// Coordinates (in the full summand vector) of the summands whose point satisfies `keep`.
    pub fn coords_where(&self, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut out = Vec::new();
        let mut o = 0;
        for &(x, m) in &self.summands {
            if keep(x) {
                out.extend(o..o + m);
            }
            o += m;
        }
        out
    }

    /// Coordinates of the stalk at `w`: summands at points `>= w`.
    pub fn stalk_coords(&self, p: &PosetSpace, w: usize) -> Vec<usize> {
        self.coords_where(|x| p.leq(w, x))
    }

    pub fn to_rep<F: Field>(&self, p: &PosetSpace) -> Rep<F> {
        let sets: Vec<PointSet> = self
            .summands
            .iter()
            .flat_map(|&(x, m)| std::iter::repeat(p.down(x).clone()).take(m))
            .collect();
        Rep::indicator_sum(p, &sets)
    }

    pub fn points(&self) -> Vec<usize> {
        self.summands.iter().flat_map(|&(x, m)| std::iter::repeat(x).take(m)).collect()
    }
}

/// Map of co-skyscraper sums to its stalk morphisms.
pub fn inj_morphism<F: Field>(p: &PosetSpace, a: &InjSum, b: &InjSum, m: &Matrix<F>) -> Morphism<F> {
    Morphism {
        comps: (0..p.len())
            .map(|w| m.submatrix(&b.stalk_coords(p, w), &a.stalk_coords(p, w)))
            .collect(),
    }
}

/// A bounded complex of co-skyscraper sums; `diffs[i]` is a block matrix whose block
/// from a summand at `x` to one at `y` vanishes unless `y <= x`.
#[derive(Debug, Clone)]
pub struct InjComplex<F> {
    pub space: Arc<Space>,
    pub lo: i64,
    pub terms: Vec<InjSum>,
    pub diffs: Vec<Matrix<F>>,
}

impl<F: Field> InjComplex<F> {
    pub fn poset(&self) -> &PosetSpace {
        &self.space.poset
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.terms.len() as i64 - 1
    }

    /// Largest degree with a nonzero term, relative to `lo` (the length of a resolution).
    pub fn length(&self) -> usize {
        self.terms.iter().rposition(|t| t.total() > 0).unwrap_or(0)
    }

    pub fn to_complex(&self) -> Complex<F> {
        let p = self.poset();
        Complex {
            space: self.space.clone(),
            lo: self.lo,
            terms: self.terms.iter().map(|t| t.to_rep(p)).collect(),
            diffs: self
                .diffs
                .iter()
                .enumerate()
                .map(|(i, d)| inj_morphism(p, &self.terms[i], &self.terms[i + 1], d))
                .collect(),
        }
    }

    /// Blocks respect the order and `d∘d = 0`.
    pub fn is_complex(&self) -> bool {
        let p = self.poset();
        for (i, d) in self.diffs.iter().enumerate() {
            let (src, tgt) = (self.terms[i].points(), self.terms[i + 1].points());
            if d.rows() != tgt.len() || d.cols() != src.len() {
                return false;
            }
            for (r, &y) in tgt.iter().enumerate() {
                for (c, &x) in src.iter().enumerate() {
                    if !d.get(r, c).is_zero() && !p.leq(y, x) {
                        return false;
                    }
                }
            }
            if i + 1 < self.diffs.len() && !self.diffs[i + 1].mul(d).is_zero() {
                return false;
            }
        }
        true
    }

    /// `Γ(U; ·)` for an open `U`: the summands at points of `U`.
    pub fn sections(&self, u: &PointSet) -> Cochain<F> {
        let idx: Vec<Vec<usize>> = self.terms.iter().map(|t| t.coords_where(|x| u.contains(x))).collect();
        Cochain {
            lo: self.lo,
            dims: idx.iter().map(|v| v.len()).collect(),
            diffs: self.diffs.iter().enumerate().map(|(i, d)| d.submatrix(&idx[i + 1], &idx[i])).collect(),
        }
    }

    pub fn global_sections(&self) -> Cochain<F> {
        self.sections(&self.poset().full())
    }

    /// Direct image: co-skyscrapers push forward to co-skyscrapers at the image points.
    pub fn push(&self, f: &PointMap) -> InjComplex<F> {
        InjComplex {
            space: f.target.clone(),
            lo: self.lo,
            terms: self
                .terms
                .iter()
                .map(|t| InjSum { summands: t.summands.iter().map(|&(x, m)| (f.map[x], m)).collect() })
                .collect(),
            diffs: self.diffs.clone(),
        }
    }

    /// Keeps the summands at points of a locally closed `z` (this is `Hom(k_Z, ·)` on
    /// co-skyscraper sums), still on the whole space.
    pub fn supported_in(&self, z: &PointSet) -> InjComplex<F> {
        let idx: Vec<Vec<usize>> = self.terms.iter().map(|t| t.coords_where(|x| z.contains(x))).collect();
        InjComplex {
            space: self.space.clone(),
            lo: self.lo,
            terms: self
                .terms
                .iter()
                .map(|t| InjSum { summands: t.summands.iter().copied().filter(|&(x, _)| z.contains(x)).collect() })
                .collect(),
            diffs: self.diffs.iter().enumerate().map(|(i, d)| d.submatrix(&idx[i + 1], &idx[i])).collect(),
        }
    }

    /// Restriction to a closed subspace given by its inclusion `i` (all summands must sit
    /// in the image).
    pub fn restrict_closed(&self, i: &PointMap) -> InjComplex<F> {
        let back: std::collections::HashMap<usize, usize> = i.map.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        InjComplex {
            space: i.source.clone(),
            lo: self.lo,
            terms: self
                .terms
                .iter()
                .map(|t| InjSum { summands: t.summands.iter().map(|&(x, m)| (back[&x], m)).collect() })
                .collect(),
            diffs: self.diffs.clone(),
        }
    }

    /// `Hom(K, I)` for a complex of sheaves `K`: again a complex of co-skyscraper sums,
    /// with `Hom(K^p, I_x ⊗ V) = I_x ⊗ Hom(K^p_x, V)`. Multiplicity spaces are
    /// flattened row-major (`V` rows, `K^p_x` columns).
    pub fn hom_from(&self, k: &Complex<F>) -> InjComplex<F> {
        let lo = self.lo - k.hi();
        let hi = self.hi() - k.lo;
        let n = (hi - lo + 1).max(0) as usize;
        // Summands of total degree t: pairs (p, q) with q - p = t.
        let mut terms = Vec::with_capacity(n);
        let mut layout: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
        for t in lo..=hi {
            let mut summands = Vec::new();
            let mut parts = Vec::new();
            for (pi, kp) in k.terms.iter().enumerate() {
                let p = k.lo + pi as i64;
                let q = t + p;
                let qi = q - self.lo;
                if qi < 0 || qi as usize >= self.terms.len() {
                    continue;
                }
                for &(x, m) in &self.terms[qi as usize].summands {
                    summands.push((x, m * kp.dim(x)));
                }
                parts.push((pi, qi as usize));
            }
            terms.push(InjSum { summands });
            layout.push(parts);
        }
        let diffs = (0..n.saturating_sub(1))
            .map(|ti| {
                let t = lo + ti as i64;
                let (src, tgt) = (&terms[ti], &terms[ti + 1]);
                let mut m = Matrix::zeros(tgt.total(), src.total());
                let src_off = block_offsets(&layout[ti], |pi, qi| hom_block_sizes(self, k, pi, qi));
                let tgt_off = block_offsets(&layout[ti + 1], |pi, qi| hom_block_sizes(self, k, pi, qi));
                for (bi, &(pi, qi)) in layout[ti].iter().enumerate() {
                    let p = k.lo + pi as i64;
                    // Hom(K^p, d_I): (pi, qi) -> (pi, qi+1)
                    if let Some(bj) = layout[ti + 1].iter().position(|&b| b == (pi, qi + 1)) {
                        let d = &self.diffs[qi];
                        let blk = hom_post_block(self, k, pi, qi, d);
                        m.add_block(tgt_off[bj], src_off[bi], &blk);
                    }
                    // -(-1)^t Hom(d_K, I): (pi, qi) -> (pi-1, qi)
                    if pi > 0 {
                        if let Some(bj) = layout[ti + 1].iter().position(|&b| b == (pi - 1, qi)) {
                            let mut blk = hom_pre_block(self, k, pi, qi);
                            if (t + 1) % 2 != 0 {
                                blk = blk.neg();
                            }
                            let _ = p;
                            m.add_block(tgt_off[bj], src_off[bi], &blk);
                        }
                    }
                }
                m
            })
            .collect();
        InjComplex { space: self.space.clone(), lo, terms, diffs }
    }

    pub fn hom_from_sheaf(&self, f: &StalkSheaf<F>) -> InjComplex<F> {
        self.hom_from(&Complex::concentrated(f, 0))
    }

    /// External product `self ⊠ other` on the product space (index `x * m + y`):
    /// `I_x ⊠ I_y = I_{(x,y)}`, with the Koszul sign on the second factor.
    pub fn external(&self, other: &InjComplex<F>, product: Arc<Space>) -> InjComplex<F> {
        let m = other.poset().len();
        let lo = self.lo + other.lo;
        let n = self.terms.len() + other.terms.len() - 1;
        let mut terms = Vec::with_capacity(n);
        let mut layout: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
        for t in 0..n {
            let mut summands = Vec::new();
            let mut parts = Vec::new();
            for i in 0..self.terms.len() {
                if t < i || t - i >= other.terms.len() {
                    continue;
                }
                let j = t - i;
                for &(x, a) in &self.terms[i].summands {
                    for &(y, b) in &other.terms[j].summands {
                        summands.push((x * m + y, a * b));
                    }
                }
                parts.push((i, j));
            }
            terms.push(InjSum { summands });
            layout.push(parts);
        }
        let size = |i: usize, j: usize| self.terms[i].total() * other.terms[j].total();
        let diffs = (0..n.saturating_sub(1))
            .map(|t| {
                let mut mat = Matrix::zeros(terms[t + 1].total(), terms[t].total());
                let so = block_offsets(&layout[t], size);
                let to = block_offsets(&layout[t + 1], size);
                for (bi, &(i, j)) in layout[t].iter().enumerate() {
                    if let Some(bj) = layout[t + 1].iter().position(|&b| b == (i + 1, j)) {
                        let blk = ext_kron(&self.diffs[i], &self.terms[i], &self.terms[i + 1], &other.terms[j], true);
                        mat.add_block(to[bj], so[bi], &blk);
                    }
                    if let Some(bj) = layout[t + 1].iter().position(|&b| b == (i, j + 1)) {
                        let sign = if (self.lo + i as i64) % 2 == 0 { F::one() } else { F::one().neg() };
                        let blk = ext_kron_right(&self.terms[i], &other.diffs[j], &other.terms[j], &other.terms[j + 1]).scale(&sign);
                        mat.add_block(to[bj], so[bi], &blk);
                    }
                }
                mat
            })
            .collect();
        InjComplex { space: product, lo, terms, diffs }
    }
}

fn block_offsets(layout: &[(usize, usize)], size: impl Fn(usize, usize) -> usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(layout.len());
    let mut o = 0;
    for &(a, b) in layout {
        out.push(o);
        o += size(a, b);
    }
    out
}

fn hom_block_sizes<F: Field>(inj: &InjComplex<F>, k: &Complex<F>, pi: usize, qi: usize) -> usize {
    inj.terms[qi].summands.iter().map(|&(x, m)| m * k.terms[pi].dim(x)).sum()
}

/// Summand-major layout of `Hom(K^p, I^q)`: for each summand `(x, m)` of `I^q`, an
/// `m × dim K^p_x` matrix flattened row-major.
fn hom_layout<F: Field>(inj: &InjSum, kp: &Rep<F>) -> Vec<(usize, usize, usize, usize)> {
    // (point, m, kdim, offset)
    let mut out = Vec::new();
    let mut o = 0;
    for &(x, m) in &inj.summands {
        let kd = kp.dim(x);
        out.push((x, m, kd, o));
        o += m * kd;
    }
    out
}

/// `h ↦ d∘h` from `Hom(K^p, I^q)` to `Hom(K^p, I^{q+1})`: the block between summands
/// at `x` and `y` (with `y <= x`) is `B ⊗ K^p(y <= x)^T`.
fn hom_post_block<F: Field>(inj: &InjComplex<F>, k: &Complex<F>, pi: usize, qi: usize, d: &Matrix<F>) -> Matrix<F> {
    let p = inj.poset();
    let kp = &k.terms[pi];
    let src = hom_layout(&inj.terms[qi], kp);
    let tgt = hom_layout(&inj.terms[qi + 1], kp);
    let total = |l: &[(usize, usize, usize, usize)]| l.iter().map(|s| s.1 * s.2).sum::<usize>();
    let mut out = Matrix::zeros(total(&tgt), total(&src));
    let mut r0 = 0;
    for &(y, my, _, to) in &tgt {
        let mut c0 = 0;
        for &(x, mx, _, so) in &src {
            if p.leq(y, x) {
                let b = d.block(r0, c0, my, mx);
                if !b.is_zero() {
                    let blk = b.kron(&kp.map(y, x).transpose());
                    out.add_block(to, so, &blk);
                }
            }
            c0 += mx;
        }
        r0 += my;
    }
    out
}

/// `h ↦ h∘d_K` from `Hom(K^p, I^q)` to `Hom(K^{p-1}, I^q)`: pointwise `1 ⊗ (d_K)_x^T`.
fn hom_pre_block<F: Field>(inj: &InjComplex<F>, k: &Complex<F>, pi: usize, qi: usize) -> Matrix<F> {
    let src = hom_layout(&inj.terms[qi], &k.terms[pi]);
    let tgt = hom_layout(&inj.terms[qi], &k.terms[pi - 1]);
    let total = |l: &[(usize, usize, usize, usize)]| l.iter().map(|s| s.1 * s.2).sum::<usize>();
    let mut out = Matrix::zeros(total(&tgt), total(&src));
    for (s, t) in src.iter().zip(&tgt) {
        let (x, m) = (s.0, s.1);
        let dk = k.diffs[pi - 1].comp(x);
        out.set_block(t.3, s.3, &Matrix::identity(m).kron(&dk.transpose()));
    }
    out
}

/// Block of `d ⊠ 1` in the external product layout.
fn ext_kron<F: Field>(d: &Matrix<F>, a: &InjSum, a2: &InjSum, b: &InjSum, _left: bool) -> Matrix<F> {
    // Summand order is (summand of A) major, (summand of B) minor; within a pair, the
    // multiplicity space is kron(mA, mB).
    let mut out = Matrix::zeros(a2.total() * b.total(), a.total() * b.total());
    let ao = offsets(a);
    let a2o = offsets(a2);
    let bo = offsets(b);
    let bt = b.total();
    for (i2, &(_, m2)) in a2.summands.iter().enumerate() {
        for (i, &(_, m1)) in a.summands.iter().enumerate() {
            let blk = d.block(a2o[i2], ao[i], m2, m1);
            if blk.is_zero() {
                continue;
            }
            for (j, &(_, mb)) in b.summands.iter().enumerate() {
                let r = a2o[i2] * bt + m2 * bo[j];
                let c = ao[i] * bt + m1 * bo[j];
                out.add_block(r, c, &blk.kron(&Matrix::identity(mb)));
            }
        }
    }
    out
}

fn ext_kron_right<F: Field>(a: &InjSum, d: &Matrix<F>, b: &InjSum, b2: &InjSum) -> Matrix<F> {
    let mut out = Matrix::zeros(a.total() * b2.total(), a.total() * b.total());
    let ao = offsets(a);
    let bo = offsets(b);
    let b2o = offsets(b2);
    for (i, &(_, ma)) in a.summands.iter().enumerate() {
        for (j2, &(_, m2)) in b2.summands.iter().enumerate() {
            for (j, &(_, m1)) in b.summands.iter().enumerate() {
                let blk = d.block(b2o[j2], bo[j], m2, m1);
                if blk.is_zero() {
                    continue;
                }
                let r = ao[i] * b2.total() + ma * b2o[j2];
                let c = ao[i] * b.total() + ma * bo[j];
                out.add_block(r, c, &Matrix::identity(ma).kron(&blk));
            }
        }
    }
    out
}

fn offsets(s: &InjSum) -> Vec<usize> {
    let mut out = Vec::with_capacity(s.summands.len());
    let mut o = 0;
    for &(_, m) in &s.summands {
        out.push(o);
        o += m;
    }
    out
}

/// An injective resolution `F -> I^0 -> I^1 -> ...`.
#[derive(Debug, Clone)]
pub struct Resolution<F> {
    pub complex: InjComplex<F>,
    /// Augmentation `F -> I^0`, stalkwise.
    pub aug: Morphism<F>,
}

impl<F: Field> Resolution<F> {
    pub fn length(&self) -> usize {
        self.complex.length()
    }

    /// `F -> I^0 -> I^1 -> ...` is exact at every stalk.
    pub fn is_exact(&self, f: &Rep<F>) -> bool {
        let c = self.complex.to_complex();
        let n = c.terms.len();
        for x in 0..c.poset().len() {
            let mut dims = vec![f.dim(x)];
            dims.extend(c.terms.iter().map(|t| t.dim(x)));
            let mut diffs = vec![self.aug.comp(x).clone()];
            diffs.extend(c.diffs.iter().map(|d| d.comp(x).clone()));
            if n == 0 {
                if f.dim(x) != 0 {
                    return false;
                }
                continue;
            }
            if cohomology_dims(&dims, &diffs).iter().any(|&d| d != 0) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolutionError {
    #[error("resolution did not terminate within {0} steps")]
    TooLong(usize),
}

/// Kernel of `F_x -> ⊕_{y covers x} F_y` as columns, with a retraction onto it.
fn socle<F: Field>(p: &PosetSpace, r: &Rep<F>, x: usize) -> (Matrix<F>, Matrix<F>) {
    let d = r.dim(x);
    let ups = p.upper_covers(x);
    let s = if ups.is_empty() {
        Matrix::identity(d)
    } else {
        let parts: Vec<&Matrix<F>> = ups.iter().map(|&y| r.map(x, y)).collect();
        Matrix::vstack(&parts).kernel()
    };
    (s.clone(), retraction(&s))
}

/// A left inverse of a matrix with independent columns.
fn retraction<F: Field>(s: &Matrix<F>) -> Matrix<F> {
    let (n, k) = (s.rows(), s.cols());
    let mut basis = s.clone();
    for i in 0..n {
        if basis.cols() == n {
            break;
        }
        let e = Matrix::from_fn(n, 1, |r, _| if r == i { F::one() } else { F::zero() });
        let cand = Matrix::hstack(&[&basis, &e]);
        if cand.rank() > basis.cols() {
            basis = cand;
        }
    }
    let inv = basis.inverse().expect("completed basis is invertible");
    inv.block(0, 0, k, n)
}

/// Injective envelope `F -> ⊕_x I_x ⊗ soc_x(F)`: summands in point order; stalk map at
/// `z` sends `v` to `(π_x F(z <= x) v)_{x >= z}`.
fn envelope<F: Field>(p: &PosetSpace, r: &Rep<F>) -> (InjSum, Morphism<F>, Vec<Matrix<F>>) {
    let mut summands = Vec::new();
    let mut pis = Vec::new();
    for x in 0..p.len() {
        let (s, pi) = socle(p, r, x);
        if s.cols() > 0 {
            summands.push((x, s.cols()));
        }
        pis.push(pi);
    }
    let sum = InjSum { summands };
    let comps = (0..p.len())
        .map(|z| {
            let parts: Vec<Matrix<F>> = sum
                .summands
                .iter()
                .filter(|&&(x, _)| p.leq(z, x))
                .map(|&(x, _)| pis[x].mul(r.map(z, x)))
                .collect();
            let refs: Vec<&Matrix<F>> = parts.iter().collect();
            if refs.is_empty() {
                Matrix::zeros(0, r.dim(z))
            } else {
                Matrix::vstack(&refs)
            }
        })
        .collect();
    (sum, Morphism { comps }, pis)
}

/// The minimal injective resolution, built from socles of successive cokernels.
pub fn minimal_resolution<F: Field>(f: &StalkSheaf<F>, max_len: usize) -> Result<Resolution<F>, ResolutionError> {
    let p = f.poset().clone();
    let (mut sum, mut emb, _) = envelope(&p, &f.rep);
    let aug = emb.clone();
    let mut target = sum.to_rep::<F>(&p);
    let mut terms = vec![sum.clone()];
    let mut diffs = Vec::new();
    loop {
        let (c, q) = rep::cokernel(&p, &target, &emb);
        if c.is_zero() {
            break;
        }
        if terms.len() > max_len {
            return Err(ResolutionError::TooLong(max_len));
        }
        let (next, _, pis) = envelope(&p, &c);
        // Block from summand (x, S_x) of the current term to (z, S'_z) of the next:
        // π'_z q_z ι_x, with ι_x the inclusion of the summand into the stalk at z.
        let mut d = Matrix::zeros(next.total(), sum.total());
        let src_off = offsets(&sum);
        let tgt_off = offsets(&next);
        for (j, &(z, _)) in next.summands.iter().enumerate() {
            let stalk = sum.stalk_coords(&p, z);
            let qz = q.comp(z);
            let block_row = pis[z].mul(qz);
            for (i, &(x, mx)) in sum.summands.iter().enumerate() {
                if !p.leq(z, x) {
                    continue;
                }
                let cols: Vec<usize> = (src_off[i]..src_off[i] + mx)
                    .map(|g| stalk.iter().position(|&s| s == g).expect("summand in stalk"))
                    .collect();
                let blk = block_row.select_cols(&cols);
                d.set_block(tgt_off[j], src_off[i], &blk);
            }
        }
        diffs.push(d);
        terms.push(next.clone());
        target = next.to_rep(&p);
        sum = next;
        emb = inj_morphism(&p, &terms[terms.len() - 2], &sum, diffs.last().expect("diff"));
    }
    Ok(Resolution { complex: InjComplex { space: f.space.clone(), lo: 0, terms, diffs }, aug })
}

/// Chains `x0 < ... < xk` of the poset, grouped by `k`.
pub fn chains_by_degree(p: &PosetSpace) -> Vec<Vec<Vec<usize>>> {
    p.chains(p.len())
}

/// The canonical resolution `C^k = ⊕_{x0<...<xk} I_{x0} ⊗ F_{xk}`, functorial in `F`.
pub struct CanonicalResolution<F> {
    pub complex: InjComplex<F>,
    pub aug: Morphism<F>,
    /// Chains indexing the summands of each term.
    pub chains: Vec<Vec<Vec<usize>>>,
}

pub fn canonical_resolution<F: Field>(f: &StalkSheaf<F>) -> CanonicalResolution<F> {
    let p = f.poset();
    let chains = chains_by_degree(p);
    let terms: Vec<InjSum> = chains
        .iter()
        .map(|cs| InjSum { summands: cs.iter().map(|c| (c[0], f.dim(*c.last().unwrap()))).collect() })
        .collect();
    let diffs = (0..chains.len().saturating_sub(1)).map(|k| canonical_diff(p, &f.rep, &chains, &terms, k)).collect();
    let aug = canonical_aug(p, &f.rep, &terms[0]);
    CanonicalResolution { complex: InjComplex { space: f.space.clone(), lo: 0, terms, diffs }, aug, chains }
}

fn canonical_aug<F: Field>(p: &PosetSpace, r: &Rep<F>, t0: &InjSum) -> Morphism<F> {
    Morphism {
        comps: (0..p.len())
            .map(|z| {
                let parts: Vec<Matrix<F>> =
                    t0.summands.iter().filter(|&&(x, _)| p.leq(z, x)).map(|&(x, _)| r.map(z, x).clone()).collect();
                let refs: Vec<&Matrix<F>> = parts.iter().collect();
                if refs.is_empty() {
                    Matrix::zeros(0, r.dim(z))
                } else {
                    Matrix::vstack(&refs)
                }
            })
            .collect(),
    }
}

/// `(ds)(c') = Σ_{i<=k} (-1)^i s(∂_i c') + (-1)^{k+1} F(x_k <= x_{k+1}) s(∂_{k+1} c')`.
fn canonical_diff<F: Field>(p: &PosetSpace, r: &Rep<F>, chains: &[Vec<Vec<usize>>], terms: &[InjSum], k: usize) -> Matrix<F> {
    let _ = p;
    let src = &chains[k];
    let tgt = &chains[k + 1];
    let so = offsets(&terms[k]);
    let to = offsets(&terms[k + 1]);
    let index: std::collections::HashMap<&Vec<usize>, usize> = src.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut d = Matrix::zeros(terms[k + 1].total(), terms[k].total());
    for (j, c) in tgt.iter().enumerate() {
        for i in 0..=k + 1 {
            let mut face = c.clone();
            face.remove(i);
            let si = index[&face];
            let last = *c.last().unwrap();
            let sign = if i % 2 == 0 { F::one() } else { F::one().neg() };
            let blk = if i == k + 1 {
                r.map(c[k], last).scale(&sign)
            } else {
                Matrix::identity(r.dim(last)).scale(&sign)
            };
            d.add_block(to[j], so[si], &blk);
        }
    }
    d
}

/// `C(φ)`: block diagonal over chains with `φ_{x_k}`.
pub fn canonical_morphism<F: Field>(chains: &[Vec<Vec<usize>>], a: &Rep<F>, b: &Rep<F>, phi: &Morphism<F>) -> Vec<Matrix<F>> {
    let _ = (a, b);
    chains
        .iter()
        .map(|cs| {
            let blocks: Vec<&Matrix<F>> = cs.iter().map(|c| phi.comp(*c.last().unwrap())).collect();
            if blocks.is_empty() {
                Matrix::zeros(0, 0)
            } else {
                Matrix::block_diag(&blocks)
            }
        })
        .collect()
}

/// Canonical resolution of a bounded complex: `Tot(C^p(K^q))` with
/// `d = d_C + (-1)^p C(d_K)`, and the augmentation `K -> Tot`.
pub struct TotalResolution<F> {
    pub complex: InjComplex<F>,
    pub aug: ChainMap<F>,
    pub chains: Vec<Vec<Vec<usize>>>,
    /// For each total degree, the `(p, q)` blocks in order.
    pub layout: Vec<Vec<(usize, usize)>>,
}

pub fn canonical_resolution_complex<F: Field>(k: &Complex<F>) -> TotalResolution<F> {
    let p = k.poset();
    let chains = chains_by_degree(p);
    let nc = chains.len();
    let nq = k.terms.len();
    let res: Vec<CanonicalResolution<F>> = k.terms.iter().map(|t| canonical_resolution(&StalkSheaf { space: k.space.clone(), rep: t.clone() })).collect();
    let n = nc + nq - 1;
    let mut terms = Vec::with_capacity(n);
    let mut layout = Vec::with_capacity(n);
    for t in 0..n {
        let mut summands = Vec::new();
        let mut parts = Vec::new();
        for q in 0..nq {
            if t >= q && t - q < nc {
                summands.extend(res[q].complex.terms[t - q].summands.iter().copied());
                parts.push((t - q, q));
            }
        }
        terms.push(InjSum { summands });
        layout.push(parts);
    }
    let size = |pc: usize, q: usize| res[q].complex.terms[pc].total();
    let mph: Vec<Vec<Matrix<F>>> =
        (0..nq.saturating_sub(1)).map(|q| canonical_morphism(&chains, &k.terms[q], &k.terms[q + 1], &k.diffs[q])).collect();
    let diffs = (0..n.saturating_sub(1))
        .map(|t| {
            let mut m = Matrix::zeros(terms[t + 1].total(), terms[t].total());
            let so = block_offsets(&layout[t], size);
            let to = block_offsets(&layout[t + 1], size);
            for (bi, &(pc, q)) in layout[t].iter().enumerate() {
                if let Some(bj) = layout[t + 1].iter().position(|&b| b == (pc + 1, q)) {
                    m.add_block(to[bj], so[bi], &res[q].complex.diffs[pc]);
                }
                if let Some(bj) = layout[t + 1].iter().position(|&b| b == (pc, q + 1)) {
                    let sign = if pc % 2 == 0 { F::one() } else { F::one().neg() };
                    m.add_block(to[bj], so[bi], &mph[q][pc].scale(&sign));
                }
            }
            m
        })
        .collect();
    let complex = InjComplex { space: k.space.clone(), lo: k.lo, terms, diffs };
    // Augmentation in degree lo + q lands in the (0, q) block.
    let terms = &complex.terms;
    let comps = (0..nq)
        .map(|q| {
            let t = q;
            let so = block_offsets(&layout[t], size);
            let bi = layout[t].iter().position(|&b| b == (0, q)).expect("block");
            let comps = (0..p.len())
                .map(|x| {
                    let full = &terms[t];
                    let stalk = full.stalk_coords(p, x);
                    let blk = res[q].complex.terms[0].stalk_coords(p, x);
                    let mut m = Matrix::zeros(stalk.len(), k.terms[q].dim(x));
                    let a = res[q].aug.comp(x);
                    for (r, &g) in blk.iter().enumerate() {
                        let pos = stalk.iter().position(|&s| s == so[bi] + g).expect("in stalk");
                        for c in 0..a.cols() {
                            m.set(pos, c, a.get(r, c).clone());
                        }
                    }
                    m
                })
                .collect();
            Morphism { comps }
        })
        .collect();
    TotalResolution { complex, aug: ChainMap { lo: k.lo, comps }, chains, layout }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;
    use crate::poset::chain_poset;

    fn sierpinski() -> Arc<Space> {
        let p = PosetSpace::new(vec!["a".into(), "e".into()], &[("a".into(), "e".into())]).unwrap();
        Arc::new(Space::new("sierpinski", p))
    }

    #[test]
    fn constant_on_sierpinski() {
        let sp = sierpinski();
        let k: StalkSheaf<Q> = StalkSheaf::constant(&sp);
        let r = minimal_resolution(&k, 4).unwrap();
        assert!(r.is_exact(&k.rep));
        assert!(r.complex.is_complex());
        assert!(r.length() <= 1);
        assert_eq!(r.complex.global_sections().cohomology()[0], 1);
    }

    #[test]
    fn coskyscraper_resolves_in_length_zero() {
        let sp = Arc::new(Space::new("c", chain_poset(3)));
        let i: StalkSheaf<Q> = StalkSheaf::coskyscraper(&sp, 2, 1);
        let r = minimal_resolution(&i, 4).unwrap();
        assert_eq!(r.complex.terms.len(), 1);
    }

    #[test]
    fn canonical_is_exact() {
        let sp = sierpinski();
        let e = sp.poset.set_of(&["e"]).unwrap();
        let k: StalkSheaf<Q> = StalkSheaf::constant_on(&sp, &e).unwrap();
        let c = canonical_resolution(&k);
        assert!(c.complex.is_complex());
        let r = Resolution { complex: c.complex.clone(), aug: c.aug.clone() };
        assert!(r.is_exact(&k.rep));
    }
}
