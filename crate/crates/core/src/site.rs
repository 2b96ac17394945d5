//! Finite Grothendieck sites: Alexandrov sites of posets and coarse sublattices with
//! declared coverings, plus relative compactness from an ambient space.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::pointset::PointSet;
use crate::poset::{PosetError, PosetSpace};

/// Largest lattice of opens enumerated for an Alexandrov site.
pub const MAX_OPENS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SiteError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("embedding: {0}")]
    Embedding(String),
    #[error("{0:?} is not an open of the site")]
    NotOpen(Vec<String>),
    #[error("sublattice not closed under {op}: {a:?}, {b:?}")]
    NotClosed { op: &'static str, a: Vec<String>, b: Vec<String> },
    #[error("sublattice must contain the empty set and the whole space")]
    MissingBounds,
    #[error("family member {member:?} is not contained in {open:?}")]
    NotSubfamily { open: Vec<String>, member: Vec<String> },
    #[error("covering system fails {axiom}: {witness}")]
    InvalidCovering { axiom: String, witness: String },
    #[error("lattice map: {0}")]
    LatticeMap(String),
}

/// An ambient space in which a space sits as an open subset; it supplies closures
/// for relative compactness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ambient {
    pub poset: PosetSpace,
    /// Index in the ambient poset of each point of the space.
    pub embed: Vec<usize>,
}

/// A finite poset with the Alexandrov topology, optionally inside an ambient space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    pub name: String,
    pub poset: PosetSpace,
    pub ambient: Option<Ambient>,
}

impl Space {
    pub fn new(name: &str, poset: PosetSpace) -> Self {
        Space { name: name.to_string(), poset, ambient: None }
    }

    /// Attaches an ambient space; the image must be open and carry the induced order.
    pub fn with_ambient(name: &str, poset: PosetSpace, ambient: PosetSpace, embed: Vec<usize>) -> Result<Self, SiteError> {
        Self::embedded(name, poset, ambient, embed, true)
    }

    /// Like `with_ambient` but the image may be any subset with the induced order
    /// (fiber products sit inside products of ambients this way).
    pub fn in_ambient(name: &str, poset: PosetSpace, ambient: PosetSpace, embed: Vec<usize>) -> Result<Self, SiteError> {
        Self::embedded(name, poset, ambient, embed, false)
    }

    fn embedded(name: &str, poset: PosetSpace, ambient: PosetSpace, embed: Vec<usize>, open: bool) -> Result<Self, SiteError> {
        if embed.len() != poset.len() {
            return Err(SiteError::Embedding("embedding must list every point".into()));
        }
        let mut image = ambient.empty_set();
        for &e in &embed {
            if e >= ambient.len() || image.contains(e) {
                return Err(SiteError::Embedding("embedding is not injective".into()));
            }
            image.insert(e);
        }
        for x in 0..poset.len() {
            for y in 0..poset.len() {
                if poset.leq(x, y) != ambient.leq(embed[x], embed[y]) {
                    return Err(SiteError::Embedding(format!(
                        "order mismatch on {} and {}",
                        poset.name(x),
                        poset.name(y)
                    )));
                }
            }
        }
        if open && !ambient.is_open(&image) {
            return Err(SiteError::Embedding("image is not open in the ambient".into()));
        }
        Ok(Space { name: name.to_string(), poset, ambient: Some(Ambient { poset: ambient, embed }) })
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poset.is_empty()
    }

    fn to_ambient(&self, s: &PointSet) -> Option<PointSet> {
        let a = self.ambient.as_ref()?;
        Some(PointSet::from_iter(a.poset.len(), s.iter().map(|x| a.embed[x])))
    }

    /// Closure taken in the ambient (in the space itself when there is no ambient).
    /// Points outside the space make the result `None`.
    pub fn ambient_closure_within(&self, s: &PointSet) -> Option<PointSet> {
        match &self.ambient {
            None => Some(self.poset.down_closure(s)),
            Some(a) => {
                let cl = a.poset.down_closure(&self.to_ambient(s).expect("ambient"));
                let mut out = self.poset.empty_set();
                let mut inside = 0;
                for x in 0..self.len() {
                    if cl.contains(a.embed[x]) {
                        out.insert(x);
                        inside += 1;
                    }
                }
                if inside == cl.len() {
                    Some(out)
                } else {
                    None
                }
            }
        }
    }

    /// `U ⊂⊂ V`: the ambient closure of `U` lies in `V`.
    pub fn rel_compact_leq(&self, u: &PointSet, v: &PointSet) -> Result<bool, SiteError> {
        for s in [u, v] {
            if !self.poset.is_open(s) {
                return Err(SiteError::NotOpen(self.poset.names_of(s)));
            }
        }
        Ok(match self.ambient_closure_within(u) {
            Some(cl) => cl.is_subset(v),
            None => false,
        })
    }

    /// Greatest open relatively compact in the whole space.
    pub fn largest_rel_compact(&self) -> PointSet {
        let top = self.poset.full();
        let mut out = self.poset.empty_set();
        for x in 0..self.len() {
            let ux = self.poset.up(x);
            if self.rel_compact_leq(ux, &top).expect("minimal opens are open") {
                out = out.union(ux);
            }
        }
        out
    }

    /// Every open relatively compact in the whole space (from a lattice enumeration).
    pub fn rel_compact_family(&self, opens: &[PointSet]) -> Vec<PointSet> {
        let top = self.poset.full();
        opens.iter().filter(|u| self.rel_compact_leq(u, &top).unwrap_or(false)).cloned().collect()
    }

    pub fn open_star(&self, x: usize) -> &PointSet {
        self.poset.up(x)
    }
}

/// A finite family of opens closed under union and intersection, with `∅` and the top.
#[derive(Debug)]
pub struct OpenLattice {
    n: usize,
    opens: Vec<PointSet>,
    index: HashMap<PointSet, usize>,
    order: OnceLock<PosetSpace>,
}

impl Clone for OpenLattice {
    fn clone(&self) -> Self {
        OpenLattice::from_sorted(self.n, self.opens.clone())
    }
}

impl OpenLattice {
    fn from_sorted(n: usize, opens: Vec<PointSet>) -> Self {
        let index = opens.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        OpenLattice { n, opens, index, order: OnceLock::new() }
    }

    /// Validates closure under pairwise union and intersection and the presence of bounds.
    pub fn new(n: usize, mut opens: Vec<PointSet>, names: &[String]) -> Result<Self, SiteError> {
        opens.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.to_vec().cmp(&b.to_vec())));
        opens.dedup();
        let lat = Self::from_sorted(n, opens);
        let named = |s: &PointSet| s.iter().map(|i| names[i].clone()).collect::<Vec<_>>();
        if lat.index_of(&PointSet::empty(n)).is_none() || lat.index_of(&PointSet::full(n)).is_none() {
            return Err(SiteError::MissingBounds);
        }
        for a in &lat.opens {
            for b in &lat.opens {
                if lat.index_of(&a.union(b)).is_none() {
                    return Err(SiteError::NotClosed { op: "union", a: named(a), b: named(b) });
                }
                if lat.index_of(&a.intersection(b)).is_none() {
                    return Err(SiteError::NotClosed { op: "intersection", a: named(a), b: named(b) });
                }
            }
        }
        Ok(lat)
    }

    pub fn len(&self) -> usize {
        self.opens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opens.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn open(&self, i: usize) -> &PointSet {
        &self.opens[i]
    }

    pub fn opens(&self) -> &[PointSet] {
        &self.opens
    }

    pub fn index_of(&self, s: &PointSet) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn top(&self) -> usize {
        self.opens.len() - 1
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.index_of(&self.opens[a].intersection(&self.opens[b])).expect("lattice closed under meets")
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.index_of(&self.opens[a].union(&self.opens[b])).expect("lattice closed under joins")
    }

    /// Members contained in `u`.
    pub fn below(&self, u: usize) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.opens[v].is_subset(&self.opens[u])).collect()
    }

    /// The lattice as a poset ordered by reverse inclusion (`U <= V` iff `U ⊇ V`), so that
    /// presheaves are representations of it.
    pub fn order(&self) -> &PosetSpace {
        self.order.get_or_init(|| {
            let names = (0..self.len()).map(|i| format!("o{i}")).collect();
            let mut pairs = Vec::new();
            for u in 0..self.len() {
                for v in 0..self.len() {
                    if u != v && self.opens[v].is_subset(&self.opens[u]) {
                        pairs.push((u, v));
                    }
                }
            }
            PosetSpace::from_indices(names, &pairs).expect("inclusion is a partial order")
        })
    }
}

/// Designated coverings. Families are lists of lattice indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoveringSystem {
    /// Every family of opens whose union is the open (stored as a predicate).
    UnionCovers,
    /// Explicit families per open; coverings are their refinement-saturation.
    Declared(BTreeMap<usize, Vec<Vec<usize>>>),
}

/// A finite site.
#[derive(Debug)]
pub struct FiniteSite {
    pub name: String,
    pub names: Vec<String>,
    pub backing: Option<Arc<Space>>,
    lattice: OnceLock<Result<OpenLattice, SiteError>>,
    pub covering: CoveringSystem,
    /// Contains every minimal open `U_x` of the backing poset.
    pub basis: bool,
}

impl FiniteSite {
    /// The Alexandrov site of a space: all up-sets, all union coverings.
    pub fn alexandrov(space: Arc<Space>) -> FiniteSite {
        FiniteSite {
            name: space.name.clone(),
            names: space.poset.names().to_vec(),
            backing: Some(space),
            lattice: OnceLock::new(),
            covering: CoveringSystem::UnionCovers,
            basis: true,
        }
    }

    /// A site given by an explicit lattice and declared coverings. The empty family is
    /// added for `∅` and `{U}` for every `U`.
    pub fn declared(
        name: &str,
        names: Vec<String>,
        backing: Option<Arc<Space>>,
        lattice: OpenLattice,
        mut covers: BTreeMap<usize, Vec<Vec<usize>>>,
    ) -> Result<FiniteSite, SiteError> {
        for u in 0..lattice.len() {
            let fams = covers.entry(u).or_default();
            for f in fams.iter_mut() {
                f.sort_unstable();
                f.dedup();
            }
            if !fams.contains(&vec![u]) {
                fams.insert(0, vec![u]);
            }
            if u == lattice.bottom() && !fams.contains(&vec![]) {
                fams.push(vec![]);
            }
            for f in fams.iter() {
                for &v in f {
                    if v >= lattice.len() {
                        return Err(SiteError::LatticeMap(format!("open index {v} out of range")));
                    }
                }
            }
        }
        let basis = match &backing {
            Some(sp) => (0..sp.len()).all(|x| lattice.index_of(sp.poset.up(x)).is_some()),
            None => false,
        };
        let cell = OnceLock::new();
        let _ = cell.set(Ok(lattice));
        Ok(FiniteSite { name: name.to_string(), names, backing, lattice: cell, covering: CoveringSystem::Declared(covers), basis })
    }

    pub fn is_alexandrov(&self) -> bool {
        matches!(self.covering, CoveringSystem::UnionCovers)
    }

    pub fn n_points(&self) -> usize {
        self.names.len()
    }

    pub fn lattice(&self) -> Result<&OpenLattice, SiteError> {
        self.lattice
            .get_or_init(|| {
                let sp = self.backing.as_ref().expect("Alexandrov sites have a backing space");
                let opens = sp.poset.all_up_sets(MAX_OPENS)?;
                Ok(OpenLattice::from_sorted(sp.len(), opens))
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    pub fn named(&self, s: &PointSet) -> Vec<String> {
        s.iter().map(|i| self.names[i].clone()).collect()
    }

    fn lat(&self) -> &OpenLattice {
        self.lattice().expect("lattice available")
    }

    /// Whether `family` covers `u` in this site.
    pub fn is_covering(&self, u: usize, family: &[usize]) -> bool {
        let lat = self.lat();
        let uo = lat.open(u);
        if !family.iter().all(|&v| lat.open(v).is_subset(uo)) {
            return false;
        }
        match &self.covering {
            CoveringSystem::UnionCovers => {
                let mut un = PointSet::empty(lat.universe());
                for &v in family {
                    un = un.union(lat.open(v));
                }
                un == *uo
            }
            CoveringSystem::Declared(map) => map
                .get(&u)
                .map(|fams| fams.iter().any(|d| refines(lat, d, family)))
                .unwrap_or(false),
        }
    }

    /// Declared families of `u` (for Alexandrov sites: `{U}` and the star family).
    pub fn listed_covers(&self, u: usize) -> Vec<Vec<usize>> {
        match &self.covering {
            CoveringSystem::UnionCovers => {
                let mut out = vec![vec![u]];
                let stars = self.finest_cover(u);
                if stars != vec![u] {
                    out.push(stars);
                }
                out
            }
            CoveringSystem::Declared(map) => map.get(&u).cloned().unwrap_or_default(),
        }
    }

    /// A covering refining every covering of `u`: the stars for Alexandrov sites, the
    /// maximal members of the common refinement of the declared families otherwise.
    pub fn finest_cover(&self, u: usize) -> Vec<usize> {
        let lat = self.lat();
        let members: Vec<usize> = match &self.covering {
            CoveringSystem::UnionCovers => {
                let sp = self.backing.as_ref().expect("backing");
                lat.open(u).iter().map(|x| lat.index_of(sp.poset.up(x)).expect("star is open")).collect()
            }
            CoveringSystem::Declared(map) => {
                let mut acc: Vec<usize> = vec![u];
                for fam in map.get(&u).into_iter().flatten() {
                    let mut next = Vec::new();
                    for &a in &acc {
                        for &b in fam {
                            next.push(lat.meet(a, b));
                        }
                    }
                    acc = next;
                }
                acc
            }
        };
        maximal_members(lat, &members)
    }
}

/// Deduplicated members not strictly contained in another member; `∅` is dropped.
pub fn maximal_members(lat: &OpenLattice, members: &[usize]) -> Vec<usize> {
    let mut m: Vec<usize> = members.to_vec();
    m.sort_unstable();
    m.dedup();
    m.iter()
        .copied()
        .filter(|&a| !lat.open(a).is_empty())
        .filter(|&a| !m.iter().any(|&b| b != a && lat.open(a).is_subset(lat.open(b))))
        .collect()
}

/// `S1 ⪯ S2`: every member of `s1` lies in some member of `s2`.
pub fn refines(lat: &OpenLattice, s1: &[usize], s2: &[usize]) -> bool {
    s1.iter().all(|&v| s2.iter().any(|&w| lat.open(v).is_subset(lat.open(w))))
}

/// Refinement test with the well-formedness check that all members lie in `u`.
pub fn refinement_leq(site: &FiniteSite, s1: &[usize], s2: &[usize], u: usize) -> Result<bool, SiteError> {
    let lat = site.lattice()?;
    for &v in s1.iter().chain(s2) {
        if !lat.open(v).is_subset(lat.open(u)) {
            return Err(SiteError::NotSubfamily { open: site.named(lat.open(u)), member: site.named(lat.open(v)) });
        }
    }
    Ok(refines(lat, s1, s2))
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    pub checked: usize,
    pub exhaustive: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ValidationReport {
    pub site: String,
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

struct Tally {
    axiom: &'static str,
    checked: usize,
    witness: Option<String>,
    exhaustive: bool,
}

impl Tally {
    fn new(axiom: &'static str, exhaustive: bool) -> Self {
        Tally { axiom, checked: 0, witness: None, exhaustive }
    }
    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }
    fn done(self) -> AxiomCheck {
        AxiomCheck {
            axiom: self.axiom.to_string(),
            passed: self.witness.is_none(),
            checked: self.checked,
            exhaustive: self.exhaustive,
            witness: self.witness,
        }
    }
}

fn fam_names(site: &FiniteSite, fam: &[usize]) -> String {
    let lat = site.lat();
    let parts: Vec<String> = fam.iter().map(|&v| format!("{{{}}}", site.named(lat.open(v)).join(","))).collect();
    format!("{{{}}}", parts.join(", "))
}

fn open_name(site: &FiniteSite, u: usize) -> String {
    format!("{{{}}}", site.named(site.lat().open(u)).join(","))
}

/// Checks the well-formedness conditions and GT1 to GT4. Declared systems are checked
/// exhaustively; union coverings are sampled with `samples` random instances.
pub fn validate_gt_axioms(site: &FiniteSite, samples: usize, seed: u64) -> ValidationReport {
    let checks = match &site.covering {
        CoveringSystem::Declared(_) => validate_declared(site),
        CoveringSystem::UnionCovers => validate_union(site, samples, seed),
    };
    ValidationReport { site: site.name.clone(), checks }
}

fn validate_declared(site: &FiniteSite) -> Vec<AxiomCheck> {
    let lat = site.lat();
    let CoveringSystem::Declared(map) = &site.covering else { unreachable!() };
    let mut wf = Tally::new("well-formed", true);
    let mut union = Tally::new("union-cover", true);
    let mut gt1 = Tally::new("GT1", true);
    let mut gt2 = Tally::new("GT2", true);
    let mut gt3 = Tally::new("GT3", true);
    let mut gt4 = Tally::new("GT4", true);
    for u in 0..lat.len() {
        let fams = map.get(&u).cloned().unwrap_or_default();
        gt1.record(site.is_covering(u, &[u]), || format!("{{U}} does not cover {}", open_name(site, u)));
        for f in &fams {
            let inside = f.iter().all(|&v| lat.open(v).is_subset(lat.open(u)));
            wf.record(inside, || format!("{} lists a member outside {}", fam_names(site, f), open_name(site, u)));
            let mut un = PointSet::empty(lat.universe());
            for &v in f {
                un = un.union(lat.open(v));
            }
            union.record(un == *lat.open(u), || {
                format!("{} is declared to cover {} but its union is {{{}}}", fam_names(site, f), open_name(site, u), site.named(&un).join(","))
            });
            // Saturation: every coarsening of a declared family inside U is a covering.
            let below = lat.below(u);
            for &w in &below {
                let mut bigger = f.clone();
                bigger.push(w);
                gt2.record(site.is_covering(u, &bigger), || {
                    format!("{} covers {} but the coarser {} does not", fam_names(site, f), open_name(site, u), fam_names(site, &bigger))
                });
            }
            for &v in &below {
                let pulled: Vec<usize> = f.iter().map(|&w| lat.meet(v, w)).collect();
                gt3.record(site.is_covering(v, &pulled), || {
                    format!("pullback of {} (covering {}) to {} is {} which is not a covering", fam_names(site, f), open_name(site, u), open_name(site, v), fam_names(site, &pulled))
                });
            }
        }
        // GT4: a family that is locally a covering on the members of a covering covers.
        let below = lat.below(u);
        let candidates: Vec<Vec<usize>> = if below.len() <= 12 {
            (0u32..(1u32 << below.len()))
                .map(|mask| (0..below.len()).filter(|&i| mask & (1 << i) != 0).map(|i| below[i]).collect())
                .collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(u as u64);
            (0..4096).map(|_| below.iter().copied().filter(|_| rng.gen_bool(0.3)).collect()).collect()
        };
        for s1 in &fams {
            for s2 in &candidates {
                let local = s1.iter().all(|&v| {
                    let pulled: Vec<usize> = s2.iter().map(|&w| lat.meet(v, w)).collect();
                    site.is_covering(v, &pulled)
                });
                if local {
                    gt4.record(site.is_covering(u, s2), || {
                        format!("{} is locally covering on {} but does not cover {}", fam_names(site, s2), fam_names(site, s1), open_name(site, u))
                    });
                }
            }
        }
    }
    vec![wf.done(), union.done(), gt1.done(), gt2.done(), gt3.done(), gt4.done()]
}

fn validate_union(site: &FiniteSite, samples: usize, seed: u64) -> Vec<AxiomCheck> {
    let sp = site.backing.as_ref().expect("backing").clone();
    let p = &sp.poset;
    let n = p.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gt1 = Tally::new("GT1", false);
    let mut gt2 = Tally::new("GT2", false);
    let mut gt3 = Tally::new("GT3", false);
    let mut gt4 = Tally::new("GT4", false);
    let names = |s: &PointSet| format!("{{{}}}", p.names_of(s).join(","));
    let random_open = |rng: &mut ChaCha8Rng| {
        let mut s = PointSet::empty(n);
        for x in 0..n {
            if rng.gen_bool(0.4) {
                s.insert(x);
            }
        }
        p.up_closure(&s)
    };
    let random_open_in = |rng: &mut ChaCha8Rng, u: &PointSet| {
        let mut s = PointSet::empty(n);
        for x in u.iter() {
            if rng.gen_bool(0.4) {
                s.insert(x);
            }
        }
        p.up_closure(&s)
    };
    let union_of = |f: &[PointSet]| f.iter().fold(PointSet::empty(n), |a, b| a.union(b));
    // A random covering of u: stars of its points merged into random groups, plus noise.
    let random_cover = |rng: &mut ChaCha8Rng, u: &PointSet| -> Vec<PointSet> {
        let k = rng.gen_range(1..=3);
        let mut fam = vec![PointSet::empty(n); k];
        for x in u.iter() {
            let g = rng.gen_range(0..k);
            fam[g] = fam[g].union(p.up(x));
        }
        if rng.gen_bool(0.5) {
            fam.push(random_open_in(rng, u));
        }
        fam
    };
    let covers = |u: &PointSet, f: &[PointSet]| f.iter().all(|v| v.is_subset(u)) && union_of(f) == *u;
    for _ in 0..samples {
        let u = random_open(&mut rng);
        gt1.record(covers(&u, std::slice::from_ref(&u)), || format!("{{U}} does not cover {}", names(&u)));
        let s1 = random_cover(&mut rng, &u);
        let mut s2 = s1.clone();
        s2.push(random_open_in(&mut rng, &u));
        gt2.record(!covers(&u, &s1) || !refines_sets(&s1, &s2) || covers(&u, &s2), || {
            format!("coarsening of a covering of {} is not a covering", names(&u))
        });
        let v = random_open_in(&mut rng, &u);
        let pulled: Vec<PointSet> = s1.iter().map(|w| w.intersection(&v)).collect();
        gt3.record(covers(&v, &pulled), || format!("pullback to {} of a covering of {} fails", names(&v), names(&u)));
        let mut t = random_cover(&mut rng, &u);
        if rng.gen_bool(0.5) {
            let k = rng.gen_range(0..t.len());
            t.remove(k);
        }
        let local = s1.iter().all(|v| {
            let pv: Vec<PointSet> = t.iter().map(|w| w.intersection(v)).collect();
            covers(v, &pv)
        });
        gt4.record(!local || covers(&u, &t), || format!("local covering of {} does not cover", names(&u)));
    }
    vec![gt1.done(), gt2.done(), gt3.done(), gt4.done()]
}

fn refines_sets(s1: &[PointSet], s2: &[PointSet]) -> bool {
    s1.iter().all(|a| s2.iter().any(|b| a.is_subset(b)))
}

/// Builds the coarse site on a sublattice with declared coverings, and reports whether
/// the sublattice is a basis. Fails when the lattice is not closed or the coverings
/// are invalid.
pub fn coarse_subsite(
    fine: &FiniteSite,
    name: &str,
    sublattice: Vec<PointSet>,
    covers: BTreeMap<usize, Vec<Vec<usize>>>,
) -> Result<FiniteSite, SiteError> {
    let sp = fine.backing.clone().ok_or_else(|| SiteError::LatticeMap("fine site needs a backing space".into()))?;
    for s in &sublattice {
        if !sp.poset.is_open(s) {
            return Err(SiteError::NotOpen(sp.poset.names_of(s)));
        }
    }
    let lat = OpenLattice::new(sp.len(), sublattice, sp.poset.names())?;
    let site = FiniteSite::declared(name, sp.poset.names().to_vec(), Some(sp), lat, covers)?;
    let report = validate_gt_axioms(&site, 0, 0);
    if let Some(f) = report.first_failure() {
        return Err(SiteError::InvalidCovering { axiom: f.axiom.clone(), witness: f.witness.clone().unwrap_or_default() });
    }
    Ok(site)
}

/// Lattice-level morphism of sites `f: X -> Y`, given by `f^t` from the opens of `Y` to
/// the opens of `X`.
#[derive(Debug, Clone)]
pub struct SiteMorphism {
    pub source: Arc<FiniteSite>,
    pub target: Arc<FiniteSite>,
    /// Index of `f^t(V)` in the source lattice for every target open `V`.
    pub lattice_map: Vec<usize>,
    pub point_map: Option<Vec<usize>>,
}

impl SiteMorphism {
    /// The morphism `ρ: X -> X'` with `ρ^t` the inclusion of the coarse lattice.
    pub fn inclusion(fine: Arc<FiniteSite>, coarse: Arc<FiniteSite>) -> Result<Self, SiteError> {
        let fl = fine.lattice()?;
        let cl = coarse.lattice()?;
        let mut map = Vec::with_capacity(cl.len());
        for w in cl.opens() {
            map.push(fl.index_of(w).ok_or_else(|| SiteError::NotOpen(fine.named(w)))?);
        }
        let id: Vec<usize> = (0..fine.n_points()).collect();
        Ok(SiteMorphism { source: fine, target: coarse, lattice_map: map, point_map: Some(id) })
    }

    /// From a monotone point map between poset-backed sites: `f^t(V) = f^{-1}(V)`.
    pub fn from_point_map(source: Arc<FiniteSite>, target: Arc<FiniteSite>, f: Vec<usize>) -> Result<Self, SiteError> {
        let sl = source.lattice()?;
        let tl = target.lattice()?;
        let mut map = Vec::with_capacity(tl.len());
        for v in tl.opens() {
            let pre = PointSet::from_iter(source.n_points(), (0..f.len()).filter(|&x| v.contains(f[x])));
            map.push(sl.index_of(&pre).ok_or_else(|| SiteError::NotOpen(source.named(&pre)))?);
        }
        Ok(SiteMorphism { source, target, lattice_map: map, point_map: Some(f) })
    }

    /// Checks that `f^t` preserves top, meets and coverings, and agrees with the point map.
    pub fn validate(&self) -> Result<(), SiteError> {
        let sl = self.source.lattice()?;
        let tl = self.target.lattice()?;
        if self.lattice_map.len() != tl.len() {
            return Err(SiteError::LatticeMap("lattice map must be defined on every target open".into()));
        }
        if self.lattice_map[tl.top()] != sl.top() {
            return Err(SiteError::LatticeMap("top is not preserved".into()));
        }
        for a in 0..tl.len() {
            for b in 0..tl.len() {
                let m = self.lattice_map[tl.meet(a, b)];
                if m != sl.meet(self.lattice_map[a], self.lattice_map[b]) {
                    return Err(SiteError::LatticeMap(format!(
                        "meet of {:?} and {:?} is not preserved",
                        self.target.named(tl.open(a)),
                        self.target.named(tl.open(b))
                    )));
                }
            }
        }
        for v in 0..tl.len() {
            for fam in self.target.listed_covers(v) {
                let img: Vec<usize> = fam.iter().map(|&w| self.lattice_map[w]).collect();
                if !self.source.is_covering(self.lattice_map[v], &img) {
                    return Err(SiteError::LatticeMap(format!(
                        "covering {} of {} is not sent to a covering",
                        fam_names(&self.target, &fam),
                        open_name(&self.target, v)
                    )));
                }
            }
        }
        if let Some(f) = &self.point_map {
            for v in 0..tl.len() {
                let pre = PointSet::from_iter(self.source.n_points(), (0..f.len()).filter(|&x| tl.open(v).contains(f[x])));
                if *sl.open(self.lattice_map[v]) != pre {
                    return Err(SiteError::LatticeMap("point map and lattice map disagree".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sierpinski() -> Arc<Space> {
        let p = PosetSpace::new(vec!["a".into(), "e".into()], &[("a".into(), "e".into())]).unwrap();
        Arc::new(Space::new("sierpinski", p))
    }

    #[test]
    fn alexandrov_site_passes() {
        let site = FiniteSite::alexandrov(sierpinski());
        assert_eq!(site.lattice().unwrap().len(), 3);
        let r = validate_gt_axioms(&site, 200, 1);
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn crafted_cover_is_flagged() {
        let sp = sierpinski();
        let fine = FiniteSite::alexandrov(sp.clone());
        let lat = fine.lattice().unwrap().clone();
        let e = lat.index_of(&PointSet::singleton(2, 1)).unwrap();
        let mut covers = BTreeMap::new();
        covers.insert(lat.top(), vec![vec![e]]);
        let site = FiniteSite::declared("bad", sp.poset.names().to_vec(), Some(sp.clone()), lat.clone(), covers.clone()).unwrap();
        let r = validate_gt_axioms(&site, 0, 0);
        let f = r.first_failure().unwrap();
        assert_eq!(f.axiom, "union-cover");
        assert!(f.witness.as_ref().unwrap().contains("{e}"));
        assert!(coarse_subsite(&fine, "bad", lat.opens().to_vec(), covers).is_err());
    }

    #[test]
    fn identity_coverings_pass() {
        let sp = sierpinski();
        let fine = FiniteSite::alexandrov(sp.clone());
        let lat = fine.lattice().unwrap().clone();
        let site = coarse_subsite(&fine, "triv", lat.opens().to_vec(), BTreeMap::new()).unwrap();
        assert!(site.basis);
        assert_eq!(site.finest_cover(lat.top()), vec![lat.top()]);
    }

    #[test]
    fn half_open_interval_compactness() {
        let names: Vec<String> = ["v0", "e0", "v1", "e1", "v2"].iter().map(|s| s.to_string()).collect();
        let pairs: Vec<(String, String)> = [("v0", "e0"), ("v1", "e0"), ("v1", "e1"), ("v2", "e1")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let amb = PosetSpace::new(names.clone(), &pairs).unwrap();
        let (x, embed) = amb.subposet(&amb.set_of(&["v0", "e0", "v1", "e1"]).unwrap());
        let sp = Space::with_ambient("half", x, amb, embed).unwrap();
        let ustar = sp.largest_rel_compact();
        assert_eq!(sp.poset.names_of(&ustar), vec!["v0", "e0"]);
        let e1 = sp.poset.set_of(&["e1"]).unwrap();
        assert!(!sp.rel_compact_leq(&e1, &sp.poset.full()).unwrap());
    }
}
