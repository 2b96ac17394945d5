//! Representations of a finite poset: a vector space per point and a linear map for
//! every comparable pair `x <= y`.
//!
//! Stalk sheaves on an Alexandrov space and presheaves on an open lattice are both
//! stored this way (the latter over the lattice ordered by reverse inclusion).

use rand::Rng;

use crate::field::Field;
use crate::matrix::Matrix;
use crate::pointset::PointSet;
use crate::poset::PosetSpace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RepError {
    #[error("map {0} -> {1} has shape {2}x{3}, expected {4}x{5}")]
    Shape(usize, usize, usize, usize, usize, usize),
    #[error("composition fails along {0} <= {1} <= {2}")]
    NotFunctorial(usize, usize, usize),
    #[error("naturality square fails on {0} <= {1}")]
    NotNatural(usize, usize),
    #[error("missing map for {0} <= {1}")]
    MissingMap(usize, usize),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rep<F> {
    dims: Vec<usize>,
    maps: Vec<Vec<Option<Matrix<F>>>>,
}

/// A natural transformation between two representations, one matrix per point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Morphism<F> {
    pub comps: Vec<Matrix<F>>,
}

impl<F: Field> Rep<F> {
    pub fn zero(p: &PosetSpace) -> Self {
        Self::build(p, vec![0; p.len()], |_, _| Matrix::zeros(0, 0))
    }

    /// Builds a representation from maps on covering pairs, composing along a path
    /// for every other comparable pair and checking that all paths agree.
    pub fn from_hasse(
        p: &PosetSpace,
        dims: Vec<usize>,
        mut edge: impl FnMut(usize, usize) -> Matrix<F>,
    ) -> Result<Self, RepError> {
        let n = p.len();
        let mut hasse: Vec<Vec<Option<Matrix<F>>>> = vec![vec![None; n]; n];
        for (x, y) in p.hasse() {
            let m = edge(x, y);
            if m.rows() != dims[y] || m.cols() != dims[x] {
                return Err(RepError::Shape(x, y, m.rows(), m.cols(), dims[y], dims[x]));
            }
            hasse[x][y] = Some(m);
        }
        let mut maps: Vec<Vec<Option<Matrix<F>>>> = vec![vec![None; n]; n];
        for x in 0..n {
            maps[x][x] = Some(Matrix::identity(dims[x]));
            for &y in p.linear_extension() {
                if y == x || !p.leq(x, y) {
                    continue;
                }
                let mut found: Option<(usize, Matrix<F>)> = None;
                for &z in p.lower_covers(y) {
                    if !p.leq(x, z) {
                        continue;
                    }
                    let via = hasse[z][y].as_ref().expect("hasse map").mul(maps[x][z].as_ref().expect("earlier pair"));
                    match &found {
                        None => found = Some((z, via)),
                        Some((_, m)) if *m == via => {}
                        Some(_) => return Err(RepError::NotFunctorial(x, z, y)),
                    }
                }
                maps[x][y] = Some(found.expect("some lower cover lies above x").1);
            }
        }
        Ok(Rep { dims, maps })
    }

    /// Builds from a function defined on every comparable pair, trusting functoriality.
    pub fn build(p: &PosetSpace, dims: Vec<usize>, mut f: impl FnMut(usize, usize) -> Matrix<F>) -> Self {
        let n = p.len();
        let mut maps: Vec<Vec<Option<Matrix<F>>>> = vec![vec![None; n]; n];
        for x in 0..n {
            for y in p.up(x).iter() {
                maps[x][y] = Some(if x == y { Matrix::identity(dims[x]) } else { f(x, y) });
            }
        }
        Rep { dims, maps }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, x: usize) -> usize {
        self.dims[x]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    pub fn map(&self, x: usize, y: usize) -> &Matrix<F> {
        self.maps[x][y].as_ref().unwrap_or_else(|| panic!("no map {x} -> {y}"))
    }

    /// Checks shapes and functoriality on every comparable triple.
    pub fn validate(&self, p: &PosetSpace) -> Result<(), RepError> {
        let n = p.len();
        for x in 0..n {
            for y in p.up(x).iter() {
                let m = self.maps[x][y].as_ref().ok_or(RepError::MissingMap(x, y))?;
                if m.rows() != self.dims[y] || m.cols() != self.dims[x] {
                    return Err(RepError::Shape(x, y, m.rows(), m.cols(), self.dims[y], self.dims[x]));
                }
                if x == y && !m.is_identity() {
                    return Err(RepError::NotFunctorial(x, x, x));
                }
            }
        }
        for x in 0..n {
            for y in p.up(x).iter() {
                if y == x {
                    continue;
                }
                for &z in p.upper_covers(y) {
                    if self.map(y, z).mul(self.map(x, y)) != *self.map(x, z) {
                        return Err(RepError::NotFunctorial(x, y, z));
                    }
                }
            }
        }
        Ok(())
    }

    /// Dimension 1 on `s`, identity maps inside `s`, zero elsewhere.
    pub fn indicator(p: &PosetSpace, s: &PointSet) -> Self {
        Self::indicator_sum(p, std::slice::from_ref(s))
    }

    /// Direct sum of indicators of the given sets, summands in list order.
    pub fn indicator_sum(p: &PosetSpace, sets: &[PointSet]) -> Self {
        let members: Vec<Vec<usize>> =
            (0..p.len()).map(|x| (0..sets.len()).filter(|&i| sets[i].contains(x)).collect()).collect();
        let dims = members.iter().map(|m| m.len()).collect();
        Self::build(p, dims, |x, y| {
            Matrix::from_fn(members[y].len(), members[x].len(), |r, c| {
                if members[y][r] == members[x][c] {
                    F::one()
                } else {
                    F::zero()
                }
            })
        })
    }

    pub fn direct_sum(&self, other: &Self, p: &PosetSpace) -> Self {
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        Self::build(p, dims, |x, y| Matrix::block_diag(&[self.map(x, y), other.map(x, y)]))
    }

    pub fn tensor(&self, other: &Self, p: &PosetSpace) -> Self {
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a * b).collect();
        Self::build(p, dims, |x, y| self.map(x, y).kron(other.map(x, y)))
    }

    /// Pullback along a monotone map `f: Q -> P` (`self` lives on P).
    pub fn pullback(&self, q: &PosetSpace, f: &[usize]) -> Self {
        let dims = (0..q.len()).map(|x| self.dims[f[x]]).collect();
        Self::build(q, dims, |x, y| self.map(f[x], f[y]).clone())
    }

    /// Offsets of each point of `s` inside the product of stalks over `s`.
    pub fn offsets(&self, s: &PointSet) -> (Vec<(usize, usize)>, usize) {
        let mut off = Vec::new();
        let mut t = 0;
        for x in s.iter() {
            off.push((x, t));
            t += self.dims[x];
        }
        (off, t)
    }

    /// Limit over the induced subposet `s`: compatible families of stalk elements.
    pub fn limit(&self, p: &PosetSpace, s: &PointSet) -> Limit<F> {
        let (offsets, total) = self.offsets(s);
        let pos = |x: usize| offsets.iter().find(|(y, _)| *y == x).map(|(_, o)| *o).expect("point in set");
        let edges = p.hasse_within(s);
        let rows: usize = edges.iter().map(|&(_, y)| self.dims[y]).sum();
        let mut d = Matrix::zeros(rows, total);
        let mut r = 0;
        for &(x, y) in &edges {
            d.set_block(r, pos(x), self.map(x, y));
            d.add_block(r, pos(y), &Matrix::identity(self.dims[y]).neg());
            r += self.dims[y];
        }
        Limit { basis: d.kernel(), offsets, dims: self.dims.clone() }
    }

    /// Colimit over the induced subposet `s`.
    pub fn colimit(&self, p: &PosetSpace, s: &PointSet) -> Colimit<F> {
        let (offsets, total) = self.offsets(s);
        let pos = |x: usize| offsets.iter().find(|(y, _)| *y == x).map(|(_, o)| *o).expect("point in set");
        let edges = p.hasse_within(s);
        let cols: usize = edges.iter().map(|&(x, _)| self.dims[x]).sum();
        let mut d = Matrix::zeros(total, cols);
        let mut c = 0;
        for &(x, y) in &edges {
            d.set_block(pos(y), c, self.map(x, y));
            d.add_block(pos(x), c, &Matrix::identity(self.dims[x]).neg());
            c += self.dims[x];
        }
        let (q, s_) = d.cokernel();
        Colimit { quotient: q, section: s_, offsets, dims: self.dims.clone() }
    }

    /// Restricts to an induced subposet (given by `sub` and its index map into `p`).
    pub fn restrict(&self, sub: &PosetSpace, map: &[usize]) -> Self {
        self.pullback(sub, map)
    }
}

/// A limit presented as the column space of `basis` inside the product of stalks.
#[derive(Clone, Debug)]
pub struct Limit<F> {
    pub basis: Matrix<F>,
    pub offsets: Vec<(usize, usize)>,
    dims: Vec<usize>,
}

impl<F: Field> Limit<F> {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn offset(&self, x: usize) -> Option<usize> {
        self.offsets.iter().find(|(y, _)| *y == x).map(|(_, o)| *o)
    }

    /// Evaluation of sections at a point of the set.
    pub fn proj(&self, x: usize) -> Matrix<F> {
        let o = self.offset(x).expect("point in limit set");
        self.basis.block(o, 0, self.dims[x], self.dim())
    }

    /// Coordinates of a family of product vectors (columns) in the section basis.
    pub fn coords(&self, v: &Matrix<F>) -> Option<Matrix<F>> {
        self.basis.solve(v)
    }

    /// Expands a family given on a (possibly larger) set into this limit's product
    /// coordinates by picking the entries of the points of this set.
    pub fn gather(&self, value_at: impl Fn(usize) -> Matrix<F>, cols: usize) -> Matrix<F> {
        let mut out = Matrix::zeros(self.ambient_dim(), cols);
        for &(x, o) in &self.offsets {
            out.set_block(o, 0, &value_at(x));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Colimit<F> {
    pub quotient: Matrix<F>,
    pub section: Matrix<F>,
    pub offsets: Vec<(usize, usize)>,
    dims: Vec<usize>,
}

impl<F: Field> Colimit<F> {
    pub fn dim(&self) -> usize {
        self.quotient.rows()
    }

    pub fn offset(&self, x: usize) -> Option<usize> {
        self.offsets.iter().find(|(y, _)| *y == x).map(|(_, o)| *o)
    }

    /// Structure map from the stalk at `x`.
    pub fn inj(&self, x: usize) -> Matrix<F> {
        let o = self.offset(x).expect("point in colimit set");
        self.quotient.block(0, o, self.dim(), self.dims[x])
    }
}

impl<F: Field> Morphism<F> {
    pub fn zero(a: &Rep<F>, b: &Rep<F>) -> Self {
        Morphism { comps: a.dims.iter().zip(&b.dims).map(|(&m, &n)| Matrix::zeros(n, m)).collect() }
    }

    pub fn identity(a: &Rep<F>) -> Self {
        Morphism { comps: a.dims.iter().map(|&d| Matrix::identity(d)).collect() }
    }

    pub fn comp(&self, x: usize) -> &Matrix<F> {
        &self.comps[x]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Self) -> Self {
        Morphism { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| b.mul(a)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Morphism { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn scale(&self, c: &F) -> Self {
        Morphism { comps: self.comps.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn neg(&self) -> Self {
        Morphism { comps: self.comps.iter().map(|a| a.neg()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|m| m.is_zero())
    }

    pub fn is_iso(&self) -> bool {
        self.comps.iter().all(|m| m.is_invertible())
    }

    pub fn is_mono(&self) -> bool {
        self.comps.iter().all(|m| m.is_injective())
    }

    pub fn is_epi(&self) -> bool {
        self.comps.iter().all(|m| m.is_surjective())
    }

    pub fn inverse(&self) -> Option<Self> {
        Some(Morphism { comps: self.comps.iter().map(|m| m.inverse()).collect::<Option<Vec<_>>>()? })
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Morphism { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| Matrix::block_diag(&[a, b])).collect() }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Morphism { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.kron(b)).collect() }
    }

    pub fn pullback(&self, f: &[usize]) -> Self {
        Morphism { comps: f.iter().map(|&y| self.comps[y].clone()).collect() }
    }

    /// Checks shapes and all naturality squares on covering pairs.
    pub fn validate(&self, p: &PosetSpace, a: &Rep<F>, b: &Rep<F>) -> Result<(), RepError> {
        for x in 0..p.len() {
            let m = &self.comps[x];
            if m.rows() != b.dim(x) || m.cols() != a.dim(x) {
                return Err(RepError::Shape(x, x, m.rows(), m.cols(), b.dim(x), a.dim(x)));
            }
        }
        for (x, y) in p.hasse() {
            if b.map(x, y).mul(&self.comps[x]) != self.comps[y].mul(a.map(x, y)) {
                return Err(RepError::NotNatural(x, y));
            }
        }
        Ok(())
    }
}

/// Kernel with its inclusion.
pub fn kernel<F: Field>(p: &PosetSpace, a: &Rep<F>, phi: &Morphism<F>) -> (Rep<F>, Morphism<F>) {
    let bases: Vec<Matrix<F>> = phi.comps.iter().map(|m| m.kernel()).collect();
    sub_rep(p, a, bases)
}

/// Image with its inclusion into the target.
pub fn image<F: Field>(p: &PosetSpace, b: &Rep<F>, phi: &Morphism<F>) -> (Rep<F>, Morphism<F>) {
    let bases: Vec<Matrix<F>> = phi.comps.iter().map(|m| m.image()).collect();
    sub_rep(p, b, bases)
}

/// Subrepresentation spanned pointwise by the columns of `bases` (must be stable).
pub fn sub_rep<F: Field>(p: &PosetSpace, a: &Rep<F>, bases: Vec<Matrix<F>>) -> (Rep<F>, Morphism<F>) {
    let dims = bases.iter().map(|b| b.cols()).collect();
    let rep = Rep::build(p, dims, |x, y| {
        bases[y].solve(&a.map(x, y).mul(&bases[x])).expect("subspace stable under structure maps")
    });
    (rep, Morphism { comps: bases })
}

/// Cokernel with its projection.
pub fn cokernel<F: Field>(p: &PosetSpace, b: &Rep<F>, phi: &Morphism<F>) -> (Rep<F>, Morphism<F>) {
    let qs: Vec<(Matrix<F>, Matrix<F>)> = phi.comps.iter().map(|m| m.cokernel()).collect();
    quotient_rep(p, b, qs)
}

/// Quotient by the kernels of the pointwise surjections `qs[x].0` with sections `qs[x].1`.
pub fn quotient_rep<F: Field>(
    p: &PosetSpace,
    b: &Rep<F>,
    qs: Vec<(Matrix<F>, Matrix<F>)>,
) -> (Rep<F>, Morphism<F>) {
    let dims = qs.iter().map(|(q, _)| q.rows()).collect();
    let rep = Rep::build(p, dims, |x, y| qs[y].0.mul(b.map(x, y)).mul(&qs[x].1));
    (rep, Morphism { comps: qs.into_iter().map(|(q, _)| q).collect() })
}

/// Basis of the space of natural transformations `a|_s -> b|_s`.
///
/// Each basis vector is the concatenation over `x in s` (set order) of the row-major
/// entries of the component at `x`.
pub fn hom_space<F: Field>(p: &PosetSpace, a: &Rep<F>, b: &Rep<F>, s: &PointSet) -> HomSpace<F> {
    let mut offsets = Vec::new();
    let mut total = 0;
    for x in s.iter() {
        offsets.push((x, total));
        total += a.dim(x) * b.dim(x);
    }
    let pos = |x: usize| offsets.iter().find(|(y, _)| *y == x).map(|(_, o)| *o).expect("point");
    let edges = p.hasse_within(s);
    let rows: usize = edges.iter().map(|&(x, y)| b.dim(y) * a.dim(x)).sum();
    let mut sys: Matrix<F> = Matrix::zeros(rows, total);
    let mut r0 = 0;
    for &(x, y) in &edges {
        let (ax, bx, ay, by) = (a.dim(x), b.dim(x), a.dim(y), b.dim(y));
        let bm = b.map(x, y);
        let am = a.map(x, y);
        let (ox, oy) = (pos(x), pos(y));
        for i in 0..by {
            for j in 0..ax {
                let row = r0 + i * ax + j;
                for k in 0..bx {
                    let v = bm.get(i, k);
                    if !v.is_zero() {
                        let c = ox + k * ax + j;
                        let cur = sys.get(row, c).add(v);
                        sys.set(row, c, cur);
                    }
                }
                for k in 0..ay {
                    let v = am.get(k, j);
                    if !v.is_zero() {
                        let c = oy + i * ay + k;
                        let cur = sys.get(row, c).sub(v);
                        sys.set(row, c, cur);
                    }
                }
            }
        }
        r0 += by * ax;
    }
    HomSpace { basis: sys.kernel(), offsets, adims: a.dims.clone(), bdims: b.dims.clone() }
}

#[derive(Clone, Debug)]
pub struct HomSpace<F> {
    pub basis: Matrix<F>,
    pub offsets: Vec<(usize, usize)>,
    adims: Vec<usize>,
    bdims: Vec<usize>,
}

impl<F: Field> HomSpace<F> {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    fn offset(&self, x: usize) -> usize {
        self.offsets.iter().find(|(y, _)| *y == x).map(|(_, o)| *o).expect("point in hom set")
    }

    /// Component at `x` of the transformation with coordinate vector `v`.
    pub fn component(&self, v: &[F], x: usize) -> Matrix<F> {
        let o = self.offset(x);
        let (r, c) = (self.bdims[x], self.adims[x]);
        Matrix::from_fn(r, c, |i, j| v[o + i * c + j].clone())
    }

    /// Linear map from hom coordinates to the component at `x`, flattened row-major.
    pub fn component_matrix(&self, x: usize) -> Matrix<F> {
        let o = self.offset(x);
        let len = self.bdims[x] * self.adims[x];
        self.basis.block(o, 0, len, self.dim())
    }

    /// Full morphism for the `k`-th basis element (requires `s` to be every point).
    pub fn basis_morphism(&self, k: usize) -> Morphism<F> {
        let v = self.basis.col(k);
        Morphism { comps: (0..self.adims.len()).map(|x| self.component(&v, x)).collect() }
    }

    /// Flattens a morphism given by components into this space's ambient coordinates.
    pub fn flatten(&self, comp: impl Fn(usize) -> Matrix<F>) -> Vec<F> {
        let mut v = vec![F::zero(); self.ambient_dim()];
        for &(x, o) in &self.offsets {
            let m = comp(x);
            let c = self.adims[x];
            for i in 0..self.bdims[x] {
                for j in 0..c {
                    v[o + i * c + j] = m.get(i, j).clone();
                }
            }
        }
        v
    }
}

/// A random small field element in `[-2, 2]`.
pub fn small_scalar<F: Field, R: Rng>(rng: &mut R) -> F {
    F::from_i64(rng.gen_range(-2..=2))
}

/// Random morphism between indicator sums: entry `(i, j)` is allowed when
/// `allowed(j, i)` holds, so that the resulting transformation is natural.
pub fn indicator_morphism<F: Field>(
    p: &PosetSpace,
    src: &[PointSet],
    tgt: &[PointSet],
    coeff: &dyn Fn(usize, usize) -> F,
) -> Morphism<F> {
    let comps = (0..p.len())
        .map(|x| {
            let s: Vec<usize> = (0..src.len()).filter(|&j| src[j].contains(x)).collect();
            let t: Vec<usize> = (0..tgt.len()).filter(|&i| tgt[i].contains(x)).collect();
            Matrix::from_fn(t.len(), s.len(), |r, c| coeff(t[r], s[c]))
        })
        .collect();
    Morphism { comps }
}

/// Random finitely presented representation: the cokernel of a random map between
/// sums of up-set indicators, or the kernel of one between down-set indicators.
/// Retries until every stalk has dimension at most `max_dim`.
pub fn random_rep<F: Field, R: Rng>(p: &PosetSpace, rng: &mut R, max_dim: usize) -> Rep<F> {
    if max_dim == 0 || p.is_empty() {
        return Rep::zero(p);
    }
    for _ in 0..64 {
        let r = random_rep_once(p, rng, max_dim);
        if r.dims.iter().all(|&d| d <= max_dim) {
            return r;
        }
    }
    // Fall back to a single indicator, which always fits.
    let x = rng.gen_range(0..p.len());
    Rep::indicator(p, p.up(x))
}

fn random_rep_once<F: Field, R: Rng>(p: &PosetSpace, rng: &mut R, max_dim: usize) -> Rep<F> {
    let n = p.len();
    let gens = rng.gen_range(1..=max_dim.min(3) + 1);
    let rels = rng.gen_range(0..=gens);
    let projective = rng.gen_bool(0.5);
    let pick = |rng: &mut R| rng.gen_range(0..n);
    let a: Vec<usize> = (0..gens).map(|_| pick(rng)).collect();
    let b: Vec<usize> = (0..rels).map(|_| pick(rng)).collect();
    let mut coeffs = vec![vec![F::zero(); b.len()]; a.len()];
    for row in coeffs.iter_mut() {
        for c in row.iter_mut() {
            *c = small_scalar(rng);
        }
    }
    if projective {
        // Hom(P_b, P_a) is nonzero iff a <= b.
        let src: Vec<PointSet> = b.iter().map(|&y| p.up(y).clone()).collect();
        let tgt: Vec<PointSet> = a.iter().map(|&x| p.up(x).clone()).collect();
        let phi = indicator_morphism(p, &src, &tgt, &|i, j| {
            if p.leq(a[i], b[j]) {
                coeffs[i][j].clone()
            } else {
                F::zero()
            }
        });
        let target = Rep::indicator_sum(p, &tgt);
        cokernel(p, &target, &phi).0
    } else {
        // Hom(I_a, I_b) is nonzero iff b <= a.
        let src: Vec<PointSet> = a.iter().map(|&x| p.down(x).clone()).collect();
        let tgt: Vec<PointSet> = b.iter().map(|&y| p.down(y).clone()).collect();
        let phi = indicator_morphism(p, &src, &tgt, &|i, j| {
            if p.leq(b[i], a[j]) {
                coeffs[j][i].clone()
            } else {
                F::zero()
            }
        });
        let source = Rep::indicator_sum(p, &src);
        kernel(p, &source, &phi).0
    }
}

/// A random morphism `a -> b`: a random combination of a basis of the hom space.
pub fn random_morphism<F: Field, R: Rng>(p: &PosetSpace, a: &Rep<F>, b: &Rep<F>, rng: &mut R) -> Morphism<F> {
    let hs = hom_space(p, a, b, &p.full());
    let coeffs: Vec<F> = (0..hs.dim()).map(|_| small_scalar(rng)).collect();
    let v = hs.basis.mul(&Matrix::column(coeffs)).col(0);
    Morphism { comps: (0..p.len()).map(|x| hs.component(&v, x)).collect() }
}

/// A short exact sequence `0 -> a -> b -> c -> 0` with `b` random and `a` the image of a
/// random map from a sum of up-set indicators.
pub struct ShortExact<F> {
    pub a: Rep<F>,
    pub b: Rep<F>,
    pub c: Rep<F>,
    pub i: Morphism<F>,
    pub q: Morphism<F>,
}

pub fn random_short_exact<F: Field, R: Rng>(p: &PosetSpace, rng: &mut R, max_dim: usize) -> ShortExact<F> {
    let b: Rep<F> = random_rep(p, rng, max_dim);
    let k = rng.gen_range(0..=2);
    let gens: Vec<usize> = (0..k).map(|_| rng.gen_range(0..p.len())).collect();
    let sets: Vec<PointSet> = gens.iter().map(|&x| p.up(x).clone()).collect();
    let src = Rep::indicator_sum(p, &sets);
    // Hom(P_x, b) = b_x: pick a random element of each generator's stalk.
    let elems: Vec<Matrix<F>> = gens
        .iter()
        .map(|&x| Matrix::from_fn(b.dim(x), 1, |_, _| small_scalar(rng)))
        .collect();
    let comps = (0..p.len())
        .map(|y| {
            let idx: Vec<usize> = (0..k).filter(|&j| sets[j].contains(y)).collect();
            let cols: Vec<Matrix<F>> = idx.iter().map(|&j| b.map(gens[j], y).mul(&elems[j])).collect();
            let refs: Vec<&Matrix<F>> = cols.iter().collect();
            if refs.is_empty() {
                Matrix::zeros(b.dim(y), 0)
            } else {
                Matrix::hstack(&refs)
            }
        })
        .collect();
    let phi = Morphism { comps };
    debug_assert!(phi.validate(p, &src, &b).is_ok());
    let (a, i) = image(p, &b, &phi);
    let (c, q) = cokernel(p, &b, &i);
    ShortExact { a, b, c, i, q }
}

/// Exactness of `a --f--> b --g--> c` at `b`, pointwise.
pub fn exact_at<F: Field>(f: &Morphism<F>, g: &Morphism<F>, bdims: &[usize]) -> bool {
    f.comps.iter().zip(&g.comps).zip(bdims).all(|((f, g), &d)| {
        g.mul(f).is_zero() && f.rank() + g.rank() == d
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;
    use crate::poset::chain_poset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn indicator_limits() {
        let p = chain_poset(3);
        let k: Rep<Q> = Rep::indicator(&p, &p.full());
        assert_eq!(k.limit(&p, &p.full()).dim(), 1);
        assert_eq!(k.colimit(&p, &p.full()).dim(), 1);
        let two = PointSet::from_iter(3, [0, 2]);
        assert_eq!(k.limit(&p, &two).dim(), 1);
    }

    #[test]
    fn hom_between_indicators() {
        let p = chain_poset(2);
        let top: Rep<Q> = Rep::indicator(&p, &PointSet::singleton(2, 1));
        let bot: Rep<Q> = Rep::indicator(&p, &PointSet::singleton(2, 0));
        assert_eq!(hom_space(&p, &top, &bot, &p.full()).dim(), 0);
        assert_eq!(hom_space(&p, &bot, &top, &p.full()).dim(), 0);
        let all: Rep<Q> = Rep::indicator(&p, &p.full());
        assert_eq!(hom_space(&p, &top, &all, &p.full()).dim(), 1);
        assert_eq!(hom_space(&p, &all, &bot, &p.full()).dim(), 1);
    }

    #[test]
    fn random_reps_are_functorial() {
        let p = chain_poset(4).product(&chain_poset(2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let r: Rep<Q> = random_rep(&p, &mut rng, 3);
            r.validate(&p).unwrap();
            assert!(r.dims().iter().all(|&d| d <= 3));
            let ses = random_short_exact::<Q, _>(&p, &mut rng, 3);
            ses.i.validate(&p, &ses.a, &ses.b).unwrap();
            ses.q.validate(&p, &ses.b, &ses.c).unwrap();
            assert!(ses.i.is_mono() && ses.q.is_epi());
            assert!(exact_at(&ses.i, &ses.q, ses.b.dims()));
        }
    }
}
