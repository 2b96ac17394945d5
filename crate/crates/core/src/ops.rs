//! Non-derived operations: tensor, internal Hom, direct and inverse images, proper
//! direct images, supports, the canonical comparison maps, quasi-injectivity.

use std::sync::Arc;

use serde::Serialize;

use crate::field::Field;
use crate::matrix::Matrix;
use crate::pointset::PointSet;
use crate::poset::PosetSpace;
use crate::presheaf::{self, Presheaf};
use crate::rep::{self, HomSpace, Limit, Morphism, Rep};
use crate::sheaf::{SheafError, StalkSheaf};
use crate::site::{FiniteSite, SiteError, SiteMorphism, Space};

/// A monotone map of finite spaces.
#[derive(Debug, Clone)]
pub struct PointMap {
    pub source: Arc<Space>,
    pub target: Arc<Space>,
    pub map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub holds: bool,
    pub witness: Option<String>,
}

impl PointMap {
    pub fn new(source: Arc<Space>, target: Arc<Space>, map: Vec<usize>) -> Result<Self, SheafError> {
        if map.len() != source.len() || map.iter().any(|&y| y >= target.len()) {
            return Err(SheafError::Other("point map has the wrong shape".into()));
        }
        for x in 0..source.len() {
            for y in source.poset.up(x).iter() {
                if !target.poset.leq(map[x], map[y]) {
                    return Err(SheafError::Other(format!(
                        "map is not monotone: {} <= {} but {} </= {}",
                        source.poset.name(x),
                        source.poset.name(y),
                        target.poset.name(map[x]),
                        target.poset.name(map[y])
                    )));
                }
            }
        }
        Ok(PointMap { source, target, map })
    }

    pub fn identity(space: &Arc<Space>) -> Self {
        PointMap { source: space.clone(), target: space.clone(), map: (0..space.len()).collect() }
    }

    /// The map to the one-point space.
    pub fn to_point(space: &Arc<Space>) -> Self {
        let pt = Arc::new(Space::new("pt", PosetSpace::point("pt")));
        PointMap { source: space.clone(), target: pt, map: vec![0; space.len()] }
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &PointMap) -> PointMap {
        PointMap { source: self.source.clone(), target: g.target.clone(), map: self.map.iter().map(|&y| g.map[y]).collect() }
    }

    pub fn preimage(&self, s: &PointSet) -> PointSet {
        PointSet::from_iter(self.source.len(), (0..self.map.len()).filter(|&x| s.contains(self.map[x])))
    }

    pub fn image(&self, s: &PointSet) -> PointSet {
        PointSet::from_iter(self.target.len(), s.iter().map(|x| self.map[x]))
    }

    /// Properness: the ambient closure of `U*` stays in the source, and the image of
    /// every ambient-closed subset of it is closed in the target's ambient.
    pub fn certificate(&self) -> Certificate {
        let ustar = self.source.largest_rel_compact();
        let Some(cl) = self.source.ambient_closure_within(&ustar) else {
            return Certificate { holds: false, witness: Some("closure of U* leaves the source".into()) };
        };
        for x in cl.iter() {
            let img = self.image(self.source.poset.down(x));
            match self.target.ambient_closure_within(&img) {
                Some(c) if c == img => {}
                _ => {
                    return Certificate {
                        holds: false,
                        witness: Some(format!(
                            "image of the closure of {} is not closed",
                            self.source.poset.name(x)
                        )),
                    }
                }
            }
        }
        Certificate { holds: true, witness: None }
    }

    /// The induced morphism of Alexandrov sites.
    pub fn site_morphism(&self, source: &Arc<FiniteSite>, target: &Arc<FiniteSite>) -> Result<SiteMorphism, SiteError> {
        SiteMorphism::from_point_map(source.clone(), target.clone(), self.map.clone())
    }

    pub fn is_closed_embedding(&self) -> bool {
        self.is_injective() && self.target.poset.is_closed(&self.image(&self.source.poset.full())) && self.reflects_order()
    }

    pub fn is_open_embedding(&self) -> bool {
        self.is_injective() && self.target.poset.is_open(&self.image(&self.source.poset.full())) && self.reflects_order()
    }

    fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        self.map.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    fn reflects_order(&self) -> bool {
        (0..self.map.len()).all(|a| {
            (0..self.map.len()).all(|b| self.source.poset.leq(a, b) == self.target.poset.leq(self.map[a], self.map[b]))
        })
    }
}

/// Restriction matrix between two limits with `small`'s set inside `big`'s.
pub fn limit_restriction<F: Field>(big: &Limit<F>, small: &Limit<F>) -> Matrix<F> {
    let rows = small.gather(|x| big.proj(x), big.dim());
    small.coords(&rows).expect("restriction of a compatible family")
}

pub fn tensor<F: Field>(a: &StalkSheaf<F>, b: &StalkSheaf<F>) -> StalkSheaf<F> {
    a.tensor(b)
}

/// Internal Hom with, per point, the hom space over the minimal open used as its basis.
pub struct HomSheaf<F> {
    pub sheaf: StalkSheaf<F>,
    pub spaces: Vec<HomSpace<F>>,
}

impl<F: Field> HomSheaf<F> {
    /// Component at `z ∈ U_x` of the stalk element `v` at `x`.
    pub fn component(&self, x: usize, v: &Matrix<F>, z: usize) -> Matrix<F> {
        let hs = &self.spaces[x];
        let full = hs.basis.mul(v).col(0);
        hs.component(&full, z)
    }
}

pub fn hom_sheaf<F: Field>(a: &StalkSheaf<F>, b: &StalkSheaf<F>) -> HomSheaf<F> {
    let p = a.poset();
    let spaces: Vec<HomSpace<F>> = (0..p.len()).map(|x| rep::hom_space(p, &a.rep, &b.rep, p.up(x))).collect();
    let dims = spaces.iter().map(|h| h.dim()).collect();
    let r = Rep::build(p, dims, |x, y| {
        let hx = &spaces[x];
        let hy = &spaces[y];
        let cols: Vec<Vec<F>> = (0..hx.dim())
            .map(|k| {
                let v = hx.basis.col(k);
                hy.flatten(|z| hx.component(&v, z))
            })
            .collect();
        let m = Matrix::from_fn(hy.ambient_dim(), cols.len(), |i, j| cols[j][i].clone());
        hy.basis.solve(&m).expect("restricted family stays natural")
    });
    HomSheaf { sheaf: StalkSheaf { space: a.space.clone(), rep: r }, spaces }
}

/// `Hom(A, ψ): Hom(A, B1) -> Hom(A, B2)`.
pub fn hom_post<F: Field>(h1: &HomSheaf<F>, h2: &HomSheaf<F>, psi: &Morphism<F>) -> Morphism<F> {
    let n = h1.spaces.len();
    let comps = (0..n)
        .map(|x| {
            let (s1, s2) = (&h1.spaces[x], &h2.spaces[x]);
            let cols: Vec<Vec<F>> = (0..s1.dim())
                .map(|k| {
                    let v = s1.basis.col(k);
                    s2.flatten(|z| psi.comp(z).mul(&s1.component(&v, z)))
                })
                .collect();
            let m = Matrix::from_fn(s2.ambient_dim(), cols.len(), |i, j| cols[j][i].clone());
            s2.basis.solve(&m).expect("natural")
        })
        .collect();
    Morphism { comps }
}

/// `Hom(φ, B): Hom(A2, B) -> Hom(A1, B)` for `φ: A1 -> A2`.
pub fn hom_pre<F: Field>(h2: &HomSheaf<F>, h1: &HomSheaf<F>, phi: &Morphism<F>) -> Morphism<F> {
    let n = h1.spaces.len();
    let comps = (0..n)
        .map(|x| {
            let (s2, s1) = (&h2.spaces[x], &h1.spaces[x]);
            let cols: Vec<Vec<F>> = (0..s2.dim())
                .map(|k| {
                    let v = s2.basis.col(k);
                    s1.flatten(|z| s2.component(&v, z).mul(phi.comp(z)))
                })
                .collect();
            let m = Matrix::from_fn(s1.ambient_dim(), cols.len(), |i, j| cols[j][i].clone());
            s1.basis.solve(&m).expect("natural")
        })
        .collect();
    Morphism { comps }
}

/// `f_*F` together with the limits realizing its stalks `Γ(f^{-1}U_y; F)`.
pub struct DirectImage<F> {
    pub sheaf: StalkSheaf<F>,
    pub limits: Vec<Limit<F>>,
}

pub fn direct_image_full<F: Field>(f: &PointMap, a: &StalkSheaf<F>) -> DirectImage<F> {
    let q = &f.target.poset;
    let limits: Vec<Limit<F>> = (0..q.len()).map(|y| a.sections(&f.preimage(q.up(y)))).collect();
    let dims = limits.iter().map(|l| l.dim()).collect();
    let r = Rep::build(q, dims, |y, z| limit_restriction(&limits[y], &limits[z]));
    DirectImage { sheaf: StalkSheaf { space: f.target.clone(), rep: r }, limits }
}

pub fn direct_image<F: Field>(f: &PointMap, a: &StalkSheaf<F>) -> StalkSheaf<F> {
    direct_image_full(f, a).sheaf
}

/// `f_*φ` between two direct images.
pub fn direct_image_morphism<F: Field>(da: &DirectImage<F>, db: &DirectImage<F>, phi: &Morphism<F>) -> Morphism<F> {
    let comps = da
        .limits
        .iter()
        .zip(&db.limits)
        .map(|(la, lb)| {
            let vals = lb.gather(|x| phi.comp(x).mul(&la.proj(x)), la.dim());
            lb.coords(&vals).expect("image of a section")
        })
        .collect();
    Morphism { comps }
}

pub fn inverse_image<F: Field>(f: &PointMap, g: &StalkSheaf<F>) -> StalkSheaf<F> {
    StalkSheaf { space: f.source.clone(), rep: g.rep.pullback(&f.source.poset, &f.map) }
}

pub fn inverse_image_morphism<F: Field>(f: &PointMap, psi: &Morphism<F>) -> Morphism<F> {
    psi.pullback(&f.map)
}

/// Unit `G -> f_*f^{-1}G`.
pub fn adjunction_unit<F: Field>(f: &PointMap, g: &StalkSheaf<F>) -> Morphism<F> {
    let pulled = inverse_image(f, g);
    let d = direct_image_full(f, &pulled);
    let comps = (0..f.target.len())
        .map(|y| {
            let l = &d.limits[y];
            let vals = l.gather(|x| g.map(y, f.map[x]).clone(), g.dim(y));
            l.coords(&vals).expect("constant family is compatible")
        })
        .collect();
    Morphism { comps }
}

/// Counit `f^{-1}f_*F -> F`: evaluation of a section over `f^{-1}U_{f(x)}` at `x`.
pub fn adjunction_counit<F: Field>(f: &PointMap, a: &StalkSheaf<F>) -> Morphism<F> {
    let d = direct_image_full(f, a);
    Morphism { comps: (0..f.source.len()).map(|x| d.limits[f.map[x]].proj(x)).collect() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjunctionReport {
    pub dim_left: usize,
    pub dim_right: usize,
    pub bijective: bool,
    pub unit_triangle: bool,
    pub counit_triangle: bool,
}

impl AdjunctionReport {
    pub fn passed(&self) -> bool {
        self.bijective && self.unit_triangle && self.counit_triangle
    }
}

/// The bijection `Hom(f^{-1}G, F) -> Hom(G, f_*F)`, `ψ ↦ f_*ψ ∘ η`, and both triangles.
pub fn adjunction_check<F: Field>(f: &PointMap, a: &StalkSheaf<F>, g: &StalkSheaf<F>) -> AdjunctionReport {
    let p = &f.source.poset;
    let q = &f.target.poset;
    let fg = inverse_image(f, g);
    let left = rep::hom_space(p, &fg.rep, &a.rep, &p.full());
    let da = direct_image_full(f, a);
    let dfg = direct_image_full(f, &fg);
    let right = rep::hom_space(q, &g.rep, &da.sheaf.rep, &q.full());
    let eta = adjunction_unit(f, g);
    let cols: Vec<Vec<F>> = (0..left.dim())
        .map(|k| {
            let psi = left.basis_morphism(k);
            let pushed = direct_image_morphism(&dfg, &da, &psi);
            let m = eta.then(&pushed);
            let v = right.flatten(|y| m.comp(y).clone());
            right.basis.solve(&Matrix::column(v)).expect("natural").col(0)
        })
        .collect();
    let mat = Matrix::from_fn(right.dim(), left.dim(), |i, j| cols[j][i].clone());
    // ε_{f^{-1}G} ∘ f^{-1}η_G = id
    let eps_fg = adjunction_counit(f, &fg);
    let t1 = inverse_image_morphism(f, &eta).then(&eps_fg);
    let unit_triangle = t1 == Morphism::identity(&fg.rep);
    // f_*ε_F ∘ η_{f_*F} = id
    let eta_da = adjunction_unit(f, &da.sheaf);
    let fda = inverse_image(f, &da.sheaf);
    let dfda = direct_image_full(f, &fda);
    let eps = adjunction_counit(f, a);
    let t2 = eta_da.then(&direct_image_morphism(&dfda, &da, &eps));
    let counit_triangle = t2 == Morphism::identity(&da.sheaf.rep);
    AdjunctionReport {
        dim_left: left.dim(),
        dim_right: right.dim(),
        bijective: mat.is_invertible(),
        unit_triangle,
        counit_triangle,
    }
}

/// `k_A -> k_B`, identity on common points. Natural when `A ∩ B` is open in `A` and
/// closed in `B` (e.g. `A` open in `B = X`, or `B` closed in `A = X`).
pub fn indicator_map<F: Field>(p: &PosetSpace, a: &PointSet, b: &PointSet) -> Morphism<F> {
    Morphism {
        comps: (0..p.len())
            .map(|x| {
                let (ra, rb) = (usize::from(a.contains(x)), usize::from(b.contains(x)));
                if ra == 1 && rb == 1 {
                    Matrix::identity(1)
                } else {
                    Matrix::zeros(rb, ra)
                }
            })
            .collect(),
    }
}

/// `F_Z = F ⊗ k_Z`.
pub fn restrict_z<F: Field>(z: &PointSet, a: &StalkSheaf<F>) -> Result<StalkSheaf<F>, SheafError> {
    let kz = StalkSheaf::constant_on(&a.space, z)?;
    Ok(a.tensor(&kz))
}

/// `Γ_Z F = Hom(k_Z, F)`.
pub fn gamma_z<F: Field>(z: &PointSet, a: &StalkSheaf<F>) -> Result<HomSheaf<F>, SheafError> {
    let kz = StalkSheaf::constant_on(&a.space, z)?;
    Ok(hom_sheaf(&kz, a))
}

/// `0 -> F_U -> F -> F_{X∖U} -> 0` for an open `U`.
pub struct OpenClosedSequence<F> {
    pub open_part: StalkSheaf<F>,
    pub closed_part: StalkSheaf<F>,
    pub i: Morphism<F>,
    pub q: Morphism<F>,
}

pub fn open_closed_sequence<F: Field>(a: &StalkSheaf<F>, u: &PointSet) -> Result<OpenClosedSequence<F>, SheafError> {
    let p = a.poset();
    if !p.is_open(u) {
        return Err(SheafError::Other(format!("{:?} is not open", p.names_of(u))));
    }
    let z = u.complement();
    let open_part = restrict_z(u, a)?;
    let closed_part = restrict_z(&z, a)?;
    let full = p.full();
    // F ⊗ k_X has the coordinates of F.
    let i = Morphism::identity(&a.rep).tensor(&indicator_map(p, u, &full));
    let q = Morphism::identity(&a.rep).tensor(&indicator_map(p, &full, &z));
    Ok(OpenClosedSequence { open_part, closed_part, i, q })
}

/// `f_!!F = f_*(F_{U*})` and the monomorphism into `f_*F`.
pub struct ProperImage<F> {
    pub sheaf: StalkSheaf<F>,
    pub into_direct: Morphism<F>,
    pub ustar: PointSet,
}

pub fn proper_direct_image<F: Field>(f: &PointMap, a: &StalkSheaf<F>) -> ProperImage<F> {
    let ustar = f.source.largest_rel_compact();
    let p = a.poset();
    let fu = restrict_z(&ustar, a).expect("U* is open");
    let inc = Morphism::identity(&a.rep).tensor(&indicator_map(p, &ustar, &p.full()));
    let du = direct_image_full(f, &fu);
    let df = direct_image_full(f, a);
    let into_direct = direct_image_morphism(&du, &df, &inc);
    ProperImage { sheaf: du.sheaf, into_direct, ustar }
}

/// `f_!!φ`.
pub fn proper_direct_image_morphism<F: Field>(f: &PointMap, a: &StalkSheaf<F>, b: &StalkSheaf<F>, phi: &Morphism<F>) -> Morphism<F> {
    let ustar = f.source.largest_rel_compact();
    let p = a.poset();
    let ku: Morphism<F> = Morphism::identity(&Rep::indicator(p, &ustar));
    let fa = direct_image_full(f, &restrict_z(&ustar, a).expect("open"));
    let fb = direct_image_full(f, &restrict_z(&ustar, b).expect("open"));
    direct_image_morphism(&fa, &fb, &phi.tensor(&ku))
}

/// A canonical morphism together with its endpoints and whether it is invertible.
#[derive(Debug, Clone)]
pub struct CanonicalMap<F> {
    pub source: StalkSheaf<F>,
    pub target: StalkSheaf<F>,
    pub map: Morphism<F>,
    pub iso: bool,
}

impl<F: Field> CanonicalMap<F> {
    fn new(source: StalkSheaf<F>, target: StalkSheaf<F>, map: Morphism<F>) -> Self {
        let iso = map.is_iso();
        CanonicalMap { source, target, map, iso }
    }

    pub fn is_natural(&self) -> bool {
        self.map.validate(self.source.poset(), &self.source.rep, &self.target.rep).is_ok()
    }
}

/// `f_!!F ⊗ G -> f_!!(F ⊗ f^{-1}G)`: `s ⊗ g ↦ (s_x ⊗ G(y ≤ f(x)) g)_x`.
pub fn projection_formula_map<F: Field>(f: &PointMap, a: &StalkSheaf<F>, g: &StalkSheaf<F>) -> CanonicalMap<F> {
    let ustar = f.source.largest_rel_compact();
    let au = restrict_z(&ustar, a).expect("open");
    let da = direct_image_full(f, &au);
    let source = da.sheaf.tensor(g);
    let fg = inverse_image(f, g);
    let tu = restrict_z(&ustar, &a.tensor(&fg)).expect("open");
    let dt = direct_image_full(f, &tu);
    let comps = (0..f.target.len())
        .map(|y| {
            let (ls, lt) = (&da.limits[y], &dt.limits[y]);
            let vals = lt.gather(|x| ls.proj(x).kron(g.map(y, f.map[x])), ls.dim() * g.dim(y));
            lt.coords(&vals).expect("compatible")
        })
        .collect();
    CanonicalMap::new(source, dt.sheaf, Morphism { comps })
}

/// A cartesian square `X' -> Y'` over `X -> Y` with `g: Y' -> Y`.
pub struct FiberSquare {
    pub fiber: Arc<Space>,
    /// `f': X' -> Y'`
    pub f_prime: PointMap,
    /// `g': X' -> X`
    pub g_prime: PointMap,
}

fn ambient_of(sp: &Space) -> (PosetSpace, Vec<usize>) {
    match &sp.ambient {
        Some(a) => (a.poset.clone(), a.embed.clone()),
        None => (sp.poset.clone(), (0..sp.len()).collect()),
    }
}

/// `X' = {(x, y') : f(x) = g(y')}` with the product order, inside the product of ambients.
pub fn fiber_product(f: &PointMap, g: &PointMap) -> Result<FiberSquare, SheafError> {
    if !Arc::ptr_eq(&f.target, &g.target) && *f.target != *g.target {
        return Err(SheafError::Other("maps have different targets".into()));
    }
    let (x, yp) = (&f.source, &g.source);
    let prod = x.poset.product(&yp.poset);
    let m = yp.len();
    let pts: Vec<usize> = (0..x.len() * m).filter(|&i| f.map[i / m] == g.map[i % m]).collect();
    let set = PointSet::from_iter(prod.len(), pts.iter().copied());
    let (sub, back) = prod.subposet(&set);
    let (ax, ex) = ambient_of(x);
    let (ay, ey) = ambient_of(yp);
    let has_ambient = x.ambient.is_some() || yp.ambient.is_some();
    let name = format!("{}x{}", x.name, yp.name);
    let fiber = if has_ambient {
        let amb = ax.product(&ay);
        let embed = back.iter().map(|&i| ex[i / m] * ay.len() + ey[i % m]).collect();
        Space::in_ambient(&name, sub, amb, embed).map_err(|e| SheafError::Other(e.to_string()))?
    } else {
        Space::new(&name, sub)
    };
    let fiber = Arc::new(fiber);
    let f_prime = PointMap { source: fiber.clone(), target: yp.clone(), map: back.iter().map(|&i| i % m).collect() };
    let g_prime = PointMap { source: fiber.clone(), target: x.clone(), map: back.iter().map(|&i| i / m).collect() };
    Ok(FiberSquare { fiber, f_prime, g_prime })
}

/// `g^{-1}f_!!F -> f'_!!g'^{-1}F`, `s ↦ (s_{g'(x')})_{x'}`. `None` when the family is not
/// compatible, i.e. the supports do not match up and no canonical map exists.
pub fn base_change_map<F: Field>(f: &PointMap, g: &PointMap, a: &StalkSheaf<F>) -> Result<Option<CanonicalMap<F>>, SheafError> {
    let sq = fiber_product(f, g)?;
    let ustar = f.source.largest_rel_compact();
    let da = direct_image_full(f, &restrict_z(&ustar, a)?);
    let source = inverse_image(g, &da.sheaf);
    let pulled = inverse_image(&sq.g_prime, a);
    let ustar2 = sq.fiber.largest_rel_compact();
    let dt = direct_image_full(&sq.f_prime, &restrict_z(&ustar2, &pulled)?);
    let mut comps = Vec::new();
    for yp in 0..g.source.len() {
        let ls = &da.limits[g.map[yp]];
        let lt = &dt.limits[yp];
        let vals = lt.gather(
            |xp| {
                let x = sq.g_prime.map[xp];
                if ustar.contains(x) && ustar2.contains(xp) {
                    ls.proj(x)
                } else {
                    Matrix::zeros(pulled.dim(xp) * usize::from(ustar2.contains(xp)), ls.dim())
                }
            },
            ls.dim(),
        );
        match lt.coords(&vals) {
            Some(c) => comps.push(c),
            None => return Ok(None),
        }
    }
    Ok(Some(CanonicalMap::new(source, dt.sheaf, Morphism { comps })))
}

/// `f_!!Hom(f^{-1}G, F) -> Hom(G, f_!!F)`.
pub fn hom_pushforward_map<F: Field>(f: &PointMap, g: &StalkSheaf<F>, a: &StalkSheaf<F>) -> CanonicalMap<F> {
    let ustar = f.source.largest_rel_compact();
    let fg = inverse_image(f, g);
    let h = hom_sheaf(&fg, a);
    let hu = restrict_z(&ustar, &h.sheaf).expect("open");
    let dl = direct_image_full(f, &hu);
    let au = restrict_z(&ustar, a).expect("open");
    let dr = direct_image_full(f, &au);
    let r = hom_sheaf(g, &dr.sheaf);
    let q = &f.target.poset;
    let comps = (0..q.len())
        .map(|y| {
            let ll = &dl.limits[y];
            let rs = &r.spaces[y];
            let cols: Vec<Vec<F>> = (0..ll.dim())
                .map(|k| {
                    let e = Matrix::from_fn(ll.dim(), 1, |i, _| if i == k { F::one() } else { F::zero() });
                    // Φ_x: the component at x of the hom element carried at x.
                    let phi = |x: usize| -> Matrix<F> {
                        if ustar.contains(x) {
                            let v = ll.proj(x).mul(&e);
                            h.component(x, &v, x)
                        } else {
                            Matrix::zeros(0, fg.dim(x))
                        }
                    };
                    rs.flatten(|yp| {
                        let lt = &dr.limits[yp];
                        let vals = lt.gather(|x| phi(x).mul(g.map(yp, f.map[x])), g.dim(yp));
                        lt.coords(&vals).expect("compatible")
                    })
                })
                .collect();
            let m = Matrix::from_fn(rs.ambient_dim(), cols.len(), |i, j| cols[j][i].clone());
            rs.basis.solve(&m).expect("natural")
        })
        .collect();
    CanonicalMap::new(dl.sheaf, r.sheaf, Morphism { comps })
}

/// `(g∘f)_*F -> g_*f_*F`, restriction of a section to each preimage.
pub fn pushforward_composition_map<F: Field>(f: &PointMap, g: &PointMap, a: &StalkSheaf<F>) -> CanonicalMap<F> {
    let gf = f.then(g);
    let d = direct_image_full(&gf, a);
    let df = direct_image_full(f, a);
    let dg = direct_image_full(g, &df.sheaf);
    let comps = (0..g.target.len())
        .map(|z| {
            let (ls, lt) = (&d.limits[z], &dg.limits[z]);
            let vals = lt.gather(|y| limit_restriction(ls, &df.limits[y]), ls.dim());
            lt.coords(&vals).expect("compatible")
        })
        .collect();
    CanonicalMap::new(d.sheaf, dg.sheaf, Morphism { comps })
}

/// Quasi-injectivity on relatively compact opens: `F_x -> Γ(U_x ∖ {x}; F)` is onto for
/// every `x ∈ U*` (equivalent to surjectivity of all restrictions between opens in `U*`).
pub fn is_quasi_injective<F: Field>(a: &StalkSheaf<F>) -> bool {
    quasi_injective_witness(a).is_none()
}

pub fn quasi_injective_witness<F: Field>(a: &StalkSheaf<F>) -> Option<usize> {
    let p = a.poset();
    let ustar = a.space.largest_rel_compact();
    let found = ustar.iter().find(|&x| {
        let mut punct = p.up(x).clone();
        punct.remove(x);
        let l = a.sections(&punct);
        let m = l.gather(|y| a.map(x, y).clone(), a.dim(x));
        !l.coords(&m).expect("compatible").is_surjective()
    });
    found
}

/// Direct image of a presheaf along a lattice-level morphism: `V ↦ F(f^t V)`.
pub fn direct_image_presheaf<F: Field>(f: &SiteMorphism, a: &Presheaf<F>) -> Presheaf<F> {
    let tl = f.target.lattice().expect("lattice");
    let dims = (0..tl.len()).map(|v| a.dim(f.lattice_map[v])).collect();
    let r = Rep::build(tl.order(), dims, |v, w| a.restrict(f.lattice_map[v], f.lattice_map[w]).clone());
    Presheaf { site: f.target.clone(), rep: r }
}

/// `f^←G(U) = colim_{U ⊆ f^t W} G(W)`, before sheafification.
pub fn inverse_image_kan<F: Field>(f: &SiteMorphism, g: &Presheaf<F>) -> Presheaf<F> {
    let sl = f.source.lattice().expect("lattice");
    let tl = f.target.lattice().expect("lattice");
    let order = tl.order();
    let index: Vec<PointSet> = (0..sl.len())
        .map(|u| {
            PointSet::from_iter(tl.len(), (0..tl.len()).filter(|&w| sl.open(u).is_subset(sl.open(f.lattice_map[w]))))
        })
        .collect();
    let colims: Vec<_> = index.iter().map(|s| g.rep.colimit(order, s)).collect();
    let dims = colims.iter().map(|c| c.dim()).collect();
    let r = Rep::build(sl.order(), dims, |u, v| {
        // index(u) ⊆ index(v): send each generator to its class in the larger colimit.
        let (cu, cv) = (&colims[u], &colims[v]);
        let parts: Vec<Matrix<F>> = index[u].iter().map(|w| cv.inj(w)).collect();
        let refs: Vec<&Matrix<F>> = parts.iter().collect();
        let big = if refs.is_empty() { Matrix::zeros(cv.dim(), 0) } else { Matrix::hstack(&refs) };
        big.mul(&cu.section)
    });
    Presheaf { site: f.source.clone(), rep: r }
}

/// `f^{-1}G = (f^←G)^{++}`.
pub fn inverse_image_presheaf<F: Field>(f: &SiteMorphism, g: &Presheaf<F>) -> Presheaf<F> {
    inverse_image_kan(f, g).sheafify().0
}

pub fn sheafified_tensor<F: Field>(a: &Presheaf<F>, b: &Presheaf<F>) -> Presheaf<F> {
    presheaf::Presheaf::openwise_tensor(a, b).sheafify().0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;

    fn sierpinski() -> Arc<Space> {
        let p = PosetSpace::new(vec!["a".into(), "e".into()], &[("a".into(), "e".into())]).unwrap();
        Arc::new(Space::new("sierpinski", p))
    }

    #[test]
    fn hom_between_extensions_vanishes() {
        let sp = sierpinski();
        let e = sp.poset.set_of(&["e"]).unwrap();
        let a = sp.poset.set_of(&["a"]).unwrap();
        let ke: StalkSheaf<Q> = StalkSheaf::constant_on(&sp, &e).unwrap();
        let ka = StalkSheaf::constant_on(&sp, &a).unwrap();
        assert!(hom_sheaf(&ke, &ka).sheaf.is_zero());
    }

    #[test]
    fn pushforward_to_point_is_sections() {
        let sp = sierpinski();
        let k: StalkSheaf<Q> = StalkSheaf::constant(&sp);
        let a = PointMap::to_point(&sp);
        assert_eq!(direct_image(&a, &k).dims(), &[1]);
        assert!(adjunction_check(&a, &k, &StalkSheaf::constant(&a.target)).passed());
    }

    #[test]
    fn gamma_of_closed_point() {
        let sp = sierpinski();
        let a = sp.poset.set_of(&["a"]).unwrap();
        let k: StalkSheaf<Q> = StalkSheaf::constant(&sp);
        let g = gamma_z(&a, &k).unwrap();
        assert_eq!(g.sheaf.dim(1), 0);
        assert_eq!(g.sheaf.global_sections_dim(), 0);
    }
}
