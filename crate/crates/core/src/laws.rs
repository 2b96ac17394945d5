//! The law-suite runner: randomized trials of the algebraic identities, each trial
//! seeded deterministically from the suite seed, the law and the trial index.
//!
//! A law instance is *asserted* or *reported*. Asserted failures make the suite fail;
//! reported instances (uncertified maps, non-basis sites) are only counted.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::derived::{self, Factorization};
use crate::field::Field;
use crate::io::{opens_to_json, stalks_to_json, SiteModel};
use crate::models::{self, Model};
use crate::ops::{self, PointMap};
use crate::pointset::PointSet;
use crate::poset::PosetSpace;
use crate::presheaf::{self, from_stalks, random_presheaf, sheafify_morphism, Presheaf};
use crate::rep::Morphism;
use crate::rho::{self, Rho};
use crate::sheaf::{self, random_sheaf, StalkSheaf};
use crate::simplicial::{simplicial_map, SimplicialComplex};
use crate::site::{validate_gt_axioms, FiniteSite, Space};

pub struct LawSpec {
    pub name: &'static str,
    pub summary: &'static str,
    /// Runs one trial; `false` means the law has no randomness and runs once.
    pub randomized: bool,
}

pub const LAWS: &[LawSpec] = &[
    LawSpec { name: "gt-axioms", summary: "GT1-GT4 on random Alexandrov sites and shipped coarse sites", randomized: true },
    LawSpec { name: "sheafification", summary: "F^++ is a sheaf, unit adjunction, exactness of (.)^++", randomized: true },
    LawSpec { name: "pairwise-gluing", summary: "two-open gluing implies the full sheaf condition", randomized: true },
    LawSpec { name: "adjunction", summary: "(f^-1, f_*) Hom bijection and triangle identities", randomized: true },
    LawSpec { name: "cech", summary: "derived sections agree with Cech cohomology on star covers", randomized: true },
    LawSpec { name: "projection-formula", summary: "Rf_!!F (x) G -> Rf_!!(F (x) f^-1 G) is a quasi-isomorphism", randomized: true },
    LawSpec { name: "base-change", summary: "g^-1 Rf_!!F -> Rf'_!! g'^-1 F is a quasi-isomorphism", randomized: true },
    LawSpec { name: "kunneth", summary: "Rf_!!F (x) Rg_!!G -> R(f x g)_!!(F [x] G) is a quasi-isomorphism", randomized: true },
    LawSpec { name: "sheaf-canonical-maps", summary: "non-derived projection formula, base change, Hom and composition maps", randomized: true },
    LawSpec { name: "composition", summary: "R(g f)_* = Rg_* Rf_* and the proper analogue on certified pairs", randomized: true },
    LawSpec { name: "verdier", summary: "dim Hom(Rf_!!F, G) = dim Hom(F, f^!G) on factorized maps", randomized: true },
    LawSpec { name: "closed-unit", summary: "F -> i^! Ri_!! F is a quasi-isomorphism for proper closed embeddings", randomized: true },
    LawSpec { name: "quasi-injective", summary: "co-skyscrapers, partial exactness of sections, stability", randomized: true },
    LawSpec { name: "resolution-bound", summary: "injective resolutions end within height + 1", randomized: true },
    LawSpec { name: "lct", summary: "l.c.t. predicate on vertex stars and other opens", randomized: false },
    LawSpec { name: "rho-identities", summary: "rho^-1 rho_* = id, rho^-1 rho_! = id, stalk formula for rho^-1", randomized: true },
    LawSpec { name: "rho-adjunction", summary: "(rho_!, rho^-1) and (rho^-1, rho_*) bijections and triangles", randomized: true },
    LawSpec { name: "rho-exactness", summary: "rho_! exact, rho^-1 exact, rho_* left exact", randomized: true },
    LawSpec { name: "rho-hom-formula", summary: "rho^-1 Hom(rho_!F, G) = Hom(F, rho^-1 G)", randomized: true },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Assert,
    Report,
    Skip,
}

/// One checked instance within a trial.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub mode: Mode,
    pub ok: bool,
    pub instance: String,
    pub detail: String,
    pub inputs: Vec<(String, String)>,
}

impl Outcome {
    fn new(mode: Mode, ok: bool, instance: impl Into<String>) -> Self {
        Outcome { mode, ok, instance: instance.into(), detail: String::new(), inputs: Vec::new() }
    }

    fn assert(ok: bool, instance: impl Into<String>) -> Self {
        Self::new(Mode::Assert, ok, instance)
    }

    fn gated(certified: bool, ok: bool, instance: impl Into<String>) -> Self {
        Self::new(if certified { Mode::Assert } else { Mode::Report }, ok, instance)
    }

    fn skip(instance: impl Into<String>, why: impl Into<String>) -> Self {
        let mut o = Self::new(Mode::Skip, true, instance);
        o.detail = why.into();
        o
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    fn input(mut self, role: &str, json: String) -> Self {
        self.inputs.push((role.to_string(), json));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedInput {
    pub role: String,
    pub sheaf: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub trial_seed: u64,
    pub instance: String,
    pub detail: String,
    pub inputs: Vec<NamedInput>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawReport {
    pub law: String,
    pub field: String,
    pub seed: u64,
    pub trials: usize,
    pub asserted_pass: usize,
    pub asserted_fail: usize,
    pub reported_pass: usize,
    pub reported_fail: usize,
    pub skipped: usize,
    pub status: Status,
    pub warnings: Vec<String>,
    pub counterexample: Option<Counterexample>,
    /// First failing report-mode instance, for inspection.
    pub report_failure: Option<Counterexample>,
}

impl LawReport {
    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LawError {
    #[error("unknown law {0:?}")]
    UnknownLaw(String),
    #[error("unknown map {0:?}")]
    UnknownMap(String),
}

/// Suite configuration. Empty `laws` means every law; `models` overrides the default
/// models of the laws that take a site or complex; `maps` restricts the map catalog.
#[derive(Debug, Clone, Default)]
pub struct SuiteConfig {
    pub laws: Vec<String>,
    pub trials: usize,
    pub seed: u64,
    pub models: Vec<Model>,
    pub maps: Vec<String>,
}

/// The seed of one trial.
pub fn trial_seed(seed: u64, law: &str, trial: usize) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in law.bytes().chain((trial as u64).to_le_bytes()) {
        h = (h ^ u64::from(b)).wrapping_mul(0x1000_0000_01b3);
        h ^= h >> 29;
    }
    h
}

pub fn run_law_suite<F: Field>(cfg: &SuiteConfig) -> Result<Vec<LawReport>, LawError> {
    let names: Vec<String> = if cfg.laws.is_empty() { LAWS.iter().map(|l| l.name.to_string()).collect() } else { cfg.laws.clone() };
    for n in &names {
        if !LAWS.iter().any(|l| l.name == n) {
            return Err(LawError::UnknownLaw(n.clone()));
        }
    }
    let ctx = Context::new(cfg)?;
    Ok(names.iter().map(|n| run_law_with::<F>(&ctx, n, cfg.trials, cfg.seed)).collect())
}

/// Reruns a single trial from its seed, returning every instance it checks. `cfg`
/// supplies the models and maps; its laws, trials and seed are ignored.
pub fn replay<F: Field>(law: &str, trial_seed: u64, cfg: &SuiteConfig) -> Result<Vec<Outcome>, LawError> {
    if !LAWS.iter().any(|l| l.name == law) {
        return Err(LawError::UnknownLaw(law.to_string()));
    }
    let ctx = Context::new(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    Ok(dispatch::<F>(&ctx, law, &mut rng))
}

fn run_law_with<F: Field>(ctx: &Context, law: &str, trials: usize, seed: u64) -> LawReport {
    let spec = LAWS.iter().find(|l| l.name == law).expect("known law");
    let n = if spec.randomized { trials } else { 1 };
    let mut r = LawReport {
        law: law.to_string(),
        field: F::label(),
        seed,
        trials: n,
        asserted_pass: 0,
        asserted_fail: 0,
        reported_pass: 0,
        reported_fail: 0,
        skipped: 0,
        status: Status::Pass,
        warnings: Vec::new(),
        counterexample: None,
        report_failure: None,
    };
    for t in 0..n {
        let ts = trial_seed(seed, law, t);
        let mut rng = ChaCha8Rng::seed_from_u64(ts);
        for o in dispatch::<F>(ctx, law, &mut rng) {
            let cex = || Counterexample {
                trial: t,
                trial_seed: ts,
                instance: o.instance.clone(),
                detail: o.detail.clone(),
                inputs: o
                    .inputs
                    .iter()
                    .map(|(role, s)| NamedInput {
                        role: role.clone(),
                        sheaf: serde_json::from_str(s).expect("serialized sheaf"),
                    })
                    .collect(),
            };
            match (o.mode, o.ok) {
                (Mode::Assert, true) => r.asserted_pass += 1,
                (Mode::Assert, false) => {
                    r.asserted_fail += 1;
                    if r.counterexample.is_none() {
                        r.counterexample = Some(cex());
                    }
                }
                (Mode::Report, true) => r.reported_pass += 1,
                (Mode::Report, false) => {
                    r.reported_fail += 1;
                    if r.report_failure.is_none() {
                        r.report_failure = Some(cex());
                    }
                }
                (Mode::Skip, _) => {
                    r.skipped += 1;
                    let w = format!("skipped {}: {}", o.instance, o.detail);
                    if !r.warnings.contains(&w) {
                        r.warnings.push(w);
                    }
                }
            }
        }
    }
    r.status = if r.asserted_fail > 0 {
        Status::Fail
    } else if r.asserted_pass == 0 && r.skipped > 0 {
        Status::Skipped
    } else {
        Status::Pass
    };
    r
}

fn dispatch<F: Field>(ctx: &Context, law: &str, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    match law {
        "gt-axioms" => law_gt(ctx, rng),
        "sheafification" => law_sheafification::<F>(ctx, rng),
        "pairwise-gluing" => law_pairwise::<F>(ctx, rng),
        "adjunction" => law_adjunction::<F>(rng),
        "cech" => law_cech::<F>(ctx, rng),
        "projection-formula" => law_projection::<F>(ctx, rng),
        "base-change" => law_base_change::<F>(ctx, rng),
        "kunneth" => law_kunneth::<F>(ctx, rng),
        "sheaf-canonical-maps" => law_sheaf_maps::<F>(ctx, rng),
        "composition" => law_composition::<F>(ctx, rng),
        "verdier" => law_verdier::<F>(ctx, rng),
        "closed-unit" => law_closed_unit::<F>(ctx, rng),
        "quasi-injective" => law_quasi_injective::<F>(ctx, rng),
        "resolution-bound" => law_resolution_bound::<F>(rng),
        "lct" => law_lct::<F>(ctx),
        "rho-identities" => law_rho_identities::<F>(ctx, rng),
        "rho-adjunction" => law_rho_adjunction::<F>(ctx, rng),
        "rho-exactness" => law_rho_exactness::<F>(ctx, rng),
        "rho-hom-formula" => law_rho_hom::<F>(ctx, rng),
        _ => unreachable!("checked law name"),
    }
}

/// A named map of the shipped catalog.
#[derive(Debug, Clone)]
pub struct CatalogMap {
    pub name: String,
    pub map: PointMap,
    pub certified: bool,
}

impl CatalogMap {
    fn new(name: &str, map: PointMap) -> Self {
        let certified = map.certificate().holds;
        CatalogMap { name: name.to_string(), map, certified }
    }
}

/// A named map with a factorization for `f^!`.
pub struct CatalogFactorization<F> {
    pub name: String,
    pub fact: Factorization<F>,
    pub asserted: bool,
}

struct Context {
    complexes: Vec<(SimplicialComplex, Arc<Space>)>,
    sites: Vec<SiteModel>,
    coarse: Vec<SiteModel>,
    maps: Vec<CatalogMap>,
    pairs: Vec<(CatalogMap, CatalogMap)>,
    circle: SimplicialComplex,
    interval: SimplicialComplex,
    path: SimplicialComplex,
}

fn model(name: &str) -> Model {
    models::shipped(name).expect("shipped model")
}

fn complex_of(name: &str) -> SimplicialComplex {
    model(name).complex().expect("complex model").clone()
}

/// The two-edge path `v0 - v1 - v2`.
pub fn path_complex() -> SimplicialComplex {
    SimplicialComplex::from_facets("path", &["v0", "v1", "v2"], &[&["v0", "v1"], &["v1", "v2"]])
}

/// The point `pt -> X` at `x`.
pub fn point_inclusion(space: &Arc<Space>, x: usize) -> PointMap {
    let pt = Arc::new(Space::new("pt", PosetSpace::point(space.poset.name(x))));
    PointMap::new(pt, space.clone(), vec![x]).expect("a point is monotone")
}

/// The simplex spanned by the named vertices.
pub fn simplex(c: &SimplicialComplex, vs: &[&str]) -> usize {
    let mut idx: Vec<usize> = vs.iter().map(|n| c.vertices.iter().position(|v| v == n).expect("vertex")).collect();
    idx.sort_unstable();
    c.index_of(&idx).expect("simplex")
}

/// Inclusion of a subset with the induced order.
pub fn subspace_inclusion(space: &Arc<Space>, s: &PointSet, name: &str) -> PointMap {
    let (sub, idx) = space.poset.subposet(s);
    let src = Arc::new(Space::new(name, sub));
    PointMap::new(src, space.clone(), idx).expect("inclusions are monotone")
}

/// Maps shipped with the suite, with their certificates.
pub fn shipped_maps() -> Vec<CatalogMap> {
    let circle = complex_of("circle");
    let interval = complex_of("interval");
    let (cs, is) = (circle.space(), interval.space());
    let two = path_complex();
    let ps = two.space();
    let fold = simplicial_map(&circle, &interval, &[("a", "v0"), ("b", "v1"), ("c", "v1")]).expect("simplicial");
    let half = model("half-open").site().space.clone();
    let amb = half.ambient.as_ref().expect("ambient");
    let path = Arc::new(Space::new("path", amb.poset.clone()));
    vec![
        CatalogMap::new("circle->pt", PointMap::to_point(&cs)),
        CatalogMap::new("interval->pt", PointMap::to_point(&is)),
        CatalogMap::new("circle->interval", PointMap::new(cs.clone(), is.clone(), fold).expect("monotone")),
        CatalogMap::new("identity(circle)", PointMap::identity(&cs)),
        CatalogMap::new("half-open->pt", PointMap::to_point(&half)),
        CatalogMap::new("half-open->path", PointMap::new(half.clone(), path, amb.embed.clone()).expect("monotone")),
        // Open inclusions are not proper: this one carries no certificate.
        CatalogMap::new("star(v1)->path", subspace_inclusion(&ps, ps.open_star(simplex(&two, &["v1"])), "star")),
    ]
}

/// Factorized maps used by the duality checks. Open embeddings are report-only.
pub fn shipped_factorizations<F: Field>() -> Vec<CatalogFactorization<F>> {
    let circle = complex_of("circle");
    let interval = complex_of("interval");
    let path = path_complex();
    let ps = path.space();
    let cs = circle.space();
    let v = |c: &SimplicialComplex, n: &str| simplex(c, &[n]);
    let arc = cs.poset.down_closure(&PointSet::singleton(cs.len(), simplex(&circle, &["a", "b"])));
    vec![
        CatalogFactorization { name: "circle->pt".into(), fact: Factorization::to_point(&circle, &cs), asserted: true },
        CatalogFactorization { name: "interval->pt".into(), fact: Factorization::to_point(&interval, &interval.space()), asserted: true },
        CatalogFactorization { name: "v1->path".into(), fact: Factorization::closed(point_inclusion(&ps, v(&path, "v1"))), asserted: true },
        CatalogFactorization { name: "v0->path".into(), fact: Factorization::closed(point_inclusion(&ps, v(&path, "v0"))), asserted: true },
        CatalogFactorization { name: "arc->circle".into(), fact: Factorization::closed(subspace_inclusion(&cs, &arc, "arc")), asserted: true },
        CatalogFactorization {
            name: "star(v1)->path".into(),
            fact: Factorization::open(subspace_inclusion(&ps, ps.open_star(v(&path, "v1")), "star")),
            asserted: false,
        },
    ]
}

impl Context {
    fn new(cfg: &SuiteConfig) -> Result<Self, LawError> {
        let overrides = &cfg.models;
        let all = shipped_maps();
        for n in &cfg.maps {
            if !all.iter().any(|m| &m.name == n) {
                return Err(LawError::UnknownMap(n.clone()));
            }
        }
        let keep = |n: &str| cfg.maps.is_empty() || cfg.maps.iter().any(|m| m == n);
        let by = |n: &str| all.iter().find(|m| m.name == n).expect("catalog").clone();
        let pairs = [("interval->pt", "interval->pt"), ("circle->pt", "interval->pt"), ("circle->interval", "interval->pt")]
            .into_iter()
            .filter(|(f, _)| keep(f))
            .map(|(f, g)| (by(f), by(g)))
            .collect();
        let maps = all.iter().filter(|m| keep(&m.name)).cloned().collect();
        let (complexes, sites, coarse) = if overrides.is_empty() {
            let complexes = ["interval", "circle", "sphere"].iter().map(|n| {
                let c = complex_of(n);
                let s = c.space();
                (c, s)
            });
            let sites = ["sierpinski", "half-open", "coarse-interval", "coarse-circle"].iter().map(|n| model(n).site().clone());
            let coarse = ["coarse-interval", "coarse-circle", "coarse-interval-nonbasis", "coarse-circle-crafted"]
                .iter()
                .map(|n| model(n).site().clone());
            (complexes.collect(), sites.collect(), coarse.collect())
        } else {
            let complexes = overrides.iter().filter_map(|m| m.complex().map(|c| (c.clone(), m.space().clone()))).collect();
            let sites = overrides.iter().map(|m| m.site().clone()).collect();
            let coarse = overrides.iter().filter(|m| m.site().is_coarse()).map(|m| m.site().clone()).collect();
            (complexes, sites, coarse)
        };
        Ok(Context {
            complexes,
            sites,
            coarse,
            maps,
            pairs,
            circle: complex_of("circle"),
            interval: complex_of("interval"),
            path: path_complex(),
        })
    }
}

fn sheaf_json<F: Field>(f: &StalkSheaf<F>) -> String {
    stalks_to_json(&f.space.name, f)
}

fn presheaf_json<F: Field>(g: &Presheaf<F>) -> String {
    opens_to_json(&g.site.name, g)
}

/// A random poset on `n` points with height at most `max_height`.
pub fn random_poset<R: Rng>(rng: &mut R, n: usize, max_height: usize) -> PosetSpace {
    let level: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=max_height)).collect();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if level[a] < level[b] && rng.gen_bool(0.35) {
                pairs.push((a, b));
            }
        }
    }
    let names = (0..n).map(|i| format!("p{i}")).collect();
    PosetSpace::from_indices(names, &pairs).expect("level order is acyclic")
}

pub fn random_space<R: Rng>(rng: &mut R, max_points: usize, max_height: usize) -> Arc<Space> {
    let n = rng.gen_range(1..=max_points);
    Arc::new(Space::new("random", random_poset(rng, n, max_height)))
}

/// A random monotone map, built along a linear extension; falls back to a constant map.
pub fn random_monotone_map<R: Rng>(rng: &mut R, source: &Arc<Space>, target: &Arc<Space>) -> PointMap {
    let p = &source.poset;
    let q = &target.poset;
    for _ in 0..20 {
        let mut f = vec![usize::MAX; p.len()];
        let mut ok = true;
        for &x in p.linear_extension() {
            let cands: Vec<usize> = (0..q.len()).filter(|&y| p.lower_covers(x).iter().all(|&z| q.leq(f[z], y))).collect();
            if cands.is_empty() {
                ok = false;
                break;
            }
            f[x] = cands[rng.gen_range(0..cands.len())];
        }
        if ok {
            return PointMap::new(source.clone(), target.clone(), f).expect("monotone by construction");
        }
    }
    PointMap::new(source.clone(), target.clone(), vec![0; p.len()]).expect("constant maps are monotone")
}

fn pick<'a, T, R: Rng>(rng: &mut R, v: &'a [T]) -> &'a T {
    &v[rng.gen_range(0..v.len())]
}

fn law_gt(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut out = Vec::new();
    let sp = random_space(rng, 8, 3);
    let site = FiniteSite::alexandrov(sp.clone());
    let r = validate_gt_axioms(&site, 40, rng.gen());
    out.push(Outcome::assert(r.all_pass(), "random Alexandrov site").detail(r.first_failure().map(|f| f.axiom.clone()).unwrap_or_default()));
    for m in &ctx.coarse {
        let r = validate_gt_axioms(&m.site, 0, 0);
        if m.name.ends_with("crafted") {
            let ok = r.first_failure().is_some_and(|f| f.witness.is_some());
            out.push(Outcome::assert(ok, format!("{} (expected failure with witness)", m.name)));
        } else {
            out.push(Outcome::assert(r.all_pass(), m.name.clone()).detail(r.first_failure().map(|f| format!("{}: {:?}", f.axiom, f.witness)).unwrap_or_default()));
        }
    }
    out
}

/// Sites on which presheaf laws are exercised: a small random Alexandrov site or a
/// shipped site whose coverings pass validation.
fn presheaf_site(ctx: &Context, rng: &mut ChaCha8Rng) -> Arc<FiniteSite> {
    let good: Vec<&SiteModel> = ctx
        .sites
        .iter()
        .filter(|m| m.site.lattice().is_ok_and(|l| l.len() <= 40) && validate_gt_axioms(&m.site, 10, 0).all_pass())
        .collect();
    if good.is_empty() || rng.gen_bool(0.5) {
        let sp = random_space(rng, 4, 2);
        Arc::new(FiniteSite::alexandrov(sp))
    } else {
        pick(rng, &good).site.clone()
    }
}

fn law_sheafification<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let site = presheaf_site(ctx, rng);
    let f: Presheaf<F> = random_presheaf(&site, rng, 2);
    let (ff, _) = f.sheafify();
    let g = random_presheaf::<F, _>(&site, rng, 2).sheafify().0;
    let adj = presheaf::sheafify_adjunction(&f, &g);
    let s = presheaf::random_short_exact::<F, _>(&site, rng, 2);
    let (sb, sc) = (s.b.sheafify().0, s.c.sheafify().0);
    let i = sheafify_morphism(&s.a, &s.b, &s.i);
    let q = sheafify_morphism(&s.b, &s.c, &s.q);
    let name = site.name.clone();
    vec![
        Outcome::assert(ff.is_sheaf(), format!("{name}: F^++ is a sheaf")).input("F", presheaf_json(&f)),
        Outcome::assert(adj.bijective && adj.dim_source == adj.dim_target, format!("{name}: unit adjunction"))
            .input("F", presheaf_json(&f))
            .input("G", presheaf_json(&g)),
        Outcome::assert(presheaf::is_short_exact(&sb, &sc, &i, &q), format!("{name}: (.)^++ exact"))
            .input("A", presheaf_json(&s.a))
            .input("B", presheaf_json(&s.b))
            .input("C", presheaf_json(&s.c)),
    ]
}

fn law_pairwise<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let site = presheaf_site(ctx, rng);
    for attempt in 0..40 {
        let f: Presheaf<F> = random_presheaf(&site, rng, if attempt % 2 == 0 { 1 } else { 2 });
        if f.pairwise_glue_check() {
            return vec![Outcome::assert(f.is_sheaf(), format!("{}: random presheaf passing the two-open test", site.name))
                .input("F", presheaf_json(&f))];
        }
    }
    // Fall back to a subpresheaf of a sheaf: the openwise image of a random map.
    let sp = site.backing.clone().expect("backed site");
    let a: StalkSheaf<F> = random_sheaf(&sp, rng, 2);
    let g = from_stalks(&a, &site);
    let h: Presheaf<F> = random_presheaf(&site, rng, 2);
    let phi = crate::rep::random_morphism(g.order(), &h.rep, &g.rep, rng);
    let (img, _) = presheaf::image(&g, &phi);
    if img.pairwise_glue_check() {
        vec![Outcome::assert(img.is_sheaf(), format!("{}: image presheaf passing the two-open test", site.name)).input("F", presheaf_json(&img))]
    } else {
        vec![Outcome::assert(g.is_sheaf(), format!("{}: sections presheaf", site.name)).input("F", presheaf_json(&g))]
    }
}

fn law_adjunction<F: Field>(rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let x = random_space(rng, 6, 3);
    let y = random_space(rng, 5, 3);
    let f = random_monotone_map(rng, &x, &y);
    let a: StalkSheaf<F> = random_sheaf(&x, rng, 2);
    let g: StalkSheaf<F> = random_sheaf(&y, rng, 2);
    let r = ops::adjunction_check(&f, &a, &g);
    vec![Outcome::assert(r.passed(), format!("random map {:?}", f.map))
        .detail(format!("{r:?}"))
        .input("F", sheaf_json(&a))
        .input("G", sheaf_json(&g))]
}

fn law_cech<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    if ctx.complexes.is_empty() {
        return vec![Outcome::skip("cech", "no simplicial complex among the models")];
    }
    let (c, sp) = pick(rng, &ctx.complexes);
    let f: StalkSheaf<F> = random_sheaf(sp, rng, 2);
    let a = derived::cohomology(&f);
    let b = derived::trim(derived::cech_cohomology(&derived::star_cover(&sp.poset), &f));
    vec![Outcome::assert(a == b, c.name.clone()).detail(format!("{a:?} vs {b:?}")).input("F", sheaf_json(&f))]
}

fn law_projection<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    ctx.maps
        .iter()
        .map(|m| {
            let a: StalkSheaf<F> = random_sheaf(&m.map.source, rng, 2);
            let g: StalkSheaf<F> = random_sheaf(&m.map.target, rng, 2);
            let d = derived::derived_projection_formula(&m.map, &a, &g);
            Outcome::gated(m.certified, d.holds(), m.name.clone())
                .detail(format!("chain map {}, quasi-iso {}", d.chain_map, d.quasi_iso))
                .input("F", sheaf_json(&a))
                .input("G", sheaf_json(&g))
        })
        .collect()
}

/// Base change is asserted only when the compact supports of the square agree:
/// `U*' = g'^-1(U*)`.
pub fn supports_match(f: &PointMap, g: &PointMap) -> bool {
    ops::fiber_product(f, g).is_ok_and(|sq| sq.fiber.largest_rel_compact() == sq.g_prime.preimage(&f.source.largest_rel_compact()))
}

fn law_base_change<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    ctx.maps
        .iter()
        .map(|m| {
            let y = rng.gen_range(0..m.map.target.len());
            let g = point_inclusion(&m.map.target, y);
            let a: StalkSheaf<F> = random_sheaf(&m.map.source, rng, 2);
            let inst = format!("{} at {}", m.name, m.map.target.poset.name(y));
            let (ok, detail) = match derived::derived_base_change(&m.map, &g, &a) {
                Ok(Some(d)) => (d.holds(), format!("chain map {}, quasi-iso {}", d.chain_map, d.quasi_iso)),
                Ok(None) => (false, "pullback of cochains is not a chain map".into()),
                Err(e) => (false, e.to_string()),
            };
            Outcome::gated(m.certified && supports_match(&m.map, &g), ok, inst).detail(detail).input("F", sheaf_json(&a))
        })
        .collect()
}

fn law_kunneth<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    ctx.pairs
        .iter()
        .map(|(f, g)| {
            let a: StalkSheaf<F> = random_sheaf(&f.map.source, rng, 2);
            let b: StalkSheaf<F> = random_sheaf(&g.map.source, rng, 2);
            let d = derived::kunneth(&f.map, &g.map, &a, &b);
            Outcome::gated(f.certified && g.certified, d.holds(), format!("{} x {}", f.name, g.name))
                .detail(format!("chain map {}, quasi-iso {}", d.chain_map, d.quasi_iso))
                .input("F", sheaf_json(&a))
                .input("G", sheaf_json(&b))
        })
        .collect()
}

/// `F_{U*} = Γ_{U*}F` exactly when `U*` is also closed; the Hom pushforward needs it.
fn ustar_closed(f: &PointMap) -> bool {
    f.source.poset.is_closed(&f.source.largest_rel_compact())
}

fn law_sheaf_maps<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut out = Vec::new();
    for m in &ctx.maps {
        let a: StalkSheaf<F> = random_sheaf(&m.map.source, rng, 2);
        let g: StalkSheaf<F> = random_sheaf(&m.map.target, rng, 2);
        let pf = ops::projection_formula_map(&m.map, &a, &g);
        out.push(
            Outcome::gated(m.certified, pf.iso && pf.is_natural(), format!("projection formula, {}", m.name))
                .input("F", sheaf_json(&a))
                .input("G", sheaf_json(&g)),
        );
        let hp = ops::hom_pushforward_map(&m.map, &g, &a);
        out.push(
            Outcome::gated(m.certified && ustar_closed(&m.map), hp.iso && hp.is_natural(), format!("Hom pushforward, {}", m.name))
                .input("F", sheaf_json(&a))
                .input("G", sheaf_json(&g)),
        );
        let y = rng.gen_range(0..m.map.target.len());
        let g = point_inclusion(&m.map.target, y);
        let ok = match ops::base_change_map(&m.map, &g, &a) {
            Ok(Some(c)) => c.iso,
            _ => false,
        };
        out.push(Outcome::gated(m.certified && supports_match(&m.map, &g), ok, format!("base change, {} at {}", m.name, m.map.target.poset.name(y))).input("F", sheaf_json(&a)));
    }
    for (f, g) in &ctx.pairs {
        if !Arc::ptr_eq(&f.map.target, &g.map.source) && f.map.target.poset != g.map.source.poset {
            continue;
        }
        let a: StalkSheaf<F> = random_sheaf(&f.map.source, rng, 2);
        let c = ops::pushforward_composition_map(&f.map, &g.map, &a);
        out.push(
            Outcome::gated(f.certified && g.certified, c.iso, format!("proper composition, {} then {}", f.name, g.name))
                .input("F", sheaf_json(&a)),
        );
    }
    out
}

fn law_composition<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut out = Vec::new();
    for (f, g) in &ctx.pairs {
        if f.map.target.poset != g.map.source.poset {
            continue;
        }
        let a: StalkSheaf<F> = random_sheaf(&f.map.source, rng, 2);
        let r = derived::direct_composition_check(&f.map, &g.map, &a);
        out.push(Outcome::assert(r.quasi_iso && r.dims_agree, format!("Rg_* Rf_*, {} then {}", f.name, g.name)).input("F", sheaf_json(&a)));
        let (one, two) = derived::proper_composition_dims(&f.map, &g.map, &a);
        out.push(Outcome::gated(f.certified && g.certified, one == two, format!("Rg_!! Rf_!!, {} then {}", f.name, g.name)).input("F", sheaf_json(&a)));
    }
    let x = random_space(rng, 5, 2);
    let y = random_space(rng, 4, 2);
    let z = random_space(rng, 3, 2);
    let f = random_monotone_map(rng, &x, &y);
    let g = random_monotone_map(rng, &y, &z);
    let a: StalkSheaf<F> = random_sheaf(&x, rng, 2);
    let r = derived::direct_composition_check(&f, &g, &a);
    out.push(Outcome::assert(r.quasi_iso && r.dims_agree, "Rg_* Rf_*, random pair").input("F", sheaf_json(&a)));
    out
}

fn law_verdier<F: Field>(_ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    shipped_factorizations::<F>()
        .into_iter()
        .map(|c| {
            let f = c.fact.composite();
            let a: StalkSheaf<F> = random_sheaf(&f.source, rng, 2);
            let g: StalkSheaf<F> = random_sheaf(&f.target, rng, 2);
            let (ok, detail) = match derived::verdier_adjunction_check(&c.fact, &a, &g) {
                Ok(r) => (r.equal, format!("{} vs {}", r.hom_proper, r.hom_shriek)),
                Err(e) => (false, e.to_string()),
            };
            Outcome::new(if c.asserted { Mode::Assert } else { Mode::Report }, ok, c.name)
                .detail(detail)
                .input("F", sheaf_json(&a))
                .input("G", sheaf_json(&g))
        })
        .collect()
}

fn law_closed_unit<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let ps = ctx.path.space();
    let cs = ctx.circle.space();
    let arc = cs.poset.down_closure(&PointSet::singleton(cs.len(), simplex(&ctx.circle, &["a", "b"])));
    let ends = PointSet::from_iter(ps.len(), [simplex(&ctx.path, &["v0"]), simplex(&ctx.path, &["v2"])]);
    let cases = [
        ("v1->path", point_inclusion(&ps, simplex(&ctx.path, &["v1"]))),
        ("arc->circle", subspace_inclusion(&cs, &arc, "arc")),
        ("endpoints->path", subspace_inclusion(&ps, &ends, "endpoints")),
    ];
    cases
        .into_iter()
        .map(|(name, i)| {
            let a: StalkSheaf<F> = random_sheaf(&i.source, rng, 2);
            let (ok, detail) = match derived::closed_unit(&i, &a) {
                Ok(d) => (d.holds(), format!("chain map {}, quasi-iso {}", d.chain_map, d.quasi_iso)),
                Err(e) => (false, e.to_string()),
            };
            Outcome::assert(ok, name).detail(detail).input("F", sheaf_json(&a))
        })
        .collect()
}

/// Pushout of `0 -> A -> B -> C -> 0` along the augmentation `A -> I^0`: a short exact
/// sequence `0 -> I^0 -> P -> C -> 0` with injective kernel.
pub fn pushout_along_hull<F: Field>(ses: &sheaf::SheafShortExact<F>) -> (StalkSheaf<F>, StalkSheaf<F>, Morphism<F>, Morphism<F>) {
    let res = derived::resolve(&ses.a).expect("bounded resolution");
    let p = ses.a.poset();
    let j = StalkSheaf { space: ses.a.space.clone(), rep: res.complex.terms[0].to_rep(p) };
    let sum = ses.b.direct_sum(&j);
    let into = Morphism {
        comps: (0..p.len())
            .map(|x| crate::matrix::Matrix::vstack(&[ses.i.comp(x), &res.aug.comp(x).neg()]))
            .collect(),
    };
    let (po, proj) = sheaf::cokernel(&sum, &into);
    let nb = ses.b.dims().to_vec();
    let from_j = Morphism {
        comps: (0..p.len())
            .map(|x| proj.comp(x).select_cols(&(nb[x]..nb[x] + j.dim(x)).collect::<Vec<_>>()))
            .collect(),
    };
    // P -> C: (b, j) ↦ q(b), well defined since q∘i = 0.
    let onto = Morphism {
        comps: (0..p.len())
            .map(|x| {
                let qz = crate::matrix::Matrix::hstack(&[ses.q.comp(x), &crate::matrix::Matrix::zeros(ses.c.dim(x), j.dim(x))]);
                // Solve onto . proj = qz; proj is surjective.
                proj.comp(x).transpose().solve(&qz.transpose()).expect("q kills the image").transpose()
            })
            .collect(),
    };
    (j, po, from_j, onto)
}

fn sections_surjective<F: Field>(b: &StalkSheaf<F>, c: &StalkSheaf<F>, q: &Morphism<F>, u: &PointSet) -> bool {
    let (lb, lc) = (b.sections(u), c.sections(u));
    let img = lc.gather(|x| q.comp(x).mul(&lb.proj(x)), lb.dim());
    lc.coords(&img).expect("image of a section").is_surjective()
}

fn law_quasi_injective<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let half = model("half-open").site().space.clone();
    let spaces = [ctx.interval.space(), ctx.circle.space(), ctx.path.space(), half];
    let sp = pick(rng, &spaces).clone();
    let p = &sp.poset;
    let mut out = Vec::new();
    let x = rng.gen_range(0..sp.len());
    let sky: StalkSheaf<F> = StalkSheaf::coskyscraper(&sp, x, rng.gen_range(1..=2));
    out.push(Outcome::assert(ops::is_quasi_injective(&sky), format!("{}: co-skyscraper at {}", sp.name, p.name(x))));
    let ses = sheaf::random_short_exact::<F, _>(&sp, rng, 2);
    let (j, po, _, onto) = pushout_along_hull(&ses);
    let lat = FiniteSite::alexandrov(sp.clone());
    let opens = lat.lattice().expect("small lattice").opens().to_vec();
    let exact = opens.iter().all(|u| sections_surjective(&po, &ses.c, &onto, u));
    out.push(
        Outcome::assert(exact, format!("{}: sections exact with quasi-injective kernel", sp.name))
            .input("A", sheaf_json(&ses.a))
            .input("B", sheaf_json(&ses.b)),
    );
    if ops::is_quasi_injective(&po) {
        out.push(Outcome::assert(ops::is_quasi_injective(&ses.c), format!("{}: quotient of quasi-injectives", sp.name)).input("C", sheaf_json(&ses.c)));
    }
    let z = p.down_closure(&PointSet::singleton(sp.len(), rng.gen_range(0..sp.len())));
    let gz = ops::gamma_z(&z, &j).expect("closed set");
    out.push(Outcome::assert(ops::is_quasi_injective(&gz.sheaf), format!("{}: Gamma_Z of an injective", sp.name)).input("I", sheaf_json(&j)));
    let g: StalkSheaf<F> = random_sheaf(&sp, rng, 2);
    let h = ops::hom_sheaf(&g, &j);
    out.push(
        Outcome::assert(ops::is_quasi_injective(&h.sheaf), format!("{}: Hom(G, I)", sp.name))
            .input("G", sheaf_json(&g))
            .input("I", sheaf_json(&j)),
    );
    out
}

fn law_resolution_bound<F: Field>(rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let sp = random_space(rng, 9, 4);
    let f: StalkSheaf<F> = random_sheaf(&sp, rng, 2);
    let h = sp.poset.height();
    let (ok, detail) = match derived::resolve(&f) {
        Ok(r) => (r.length() <= h + 1 && r.is_exact(&f.rep), format!("length {} for height {h}", r.length())),
        Err(e) => (false, e.to_string()),
    };
    vec![Outcome::assert(ok, format!("random poset of height {h}")).detail(detail).input("F", sheaf_json(&f))]
}

fn law_lct<F: Field>(ctx: &Context) -> Vec<Outcome> {
    let mut out = Vec::new();
    for c in [&ctx.circle, &ctx.interval] {
        let sp = c.space();
        for v in 0..c.vertices.len() {
            let s = c.index_of(&[v]).expect("vertex");
            let ok = derived::is_lct::<F>(&sp, sp.open_star(s)).is_ok_and(|r| r.holds());
            // Boundary vertices of the interval are not l.c.t.; only closed models are asserted.
            out.push(Outcome::gated(c.name == "circle", ok, format!("{}: star of {}", c.name, c.vertices[v])));
        }
        let empty = sp.poset.empty_set();
        out.push(Outcome::assert(derived::is_lct::<F>(&sp, &empty).is_ok_and(|r| r.holds()), format!("{}: empty open", c.name)));
        let opens = FiniteSite::alexandrov(sp.clone()).lattice().expect("lattice").opens().to_vec();
        for u in &opens {
            let ok = derived::is_lct::<F>(&sp, u).is_ok_and(|r| r.holds());
            out.push(Outcome::new(Mode::Report, ok, format!("{}: {{{}}}", c.name, sp.poset.names_of(u).join(","))));
        }
    }
    out
}

fn rho_sites(ctx: &Context) -> Vec<(String, Result<Rho, String>)> {
    ctx.coarse
        .iter()
        .map(|m| {
            let r = validate_gt_axioms(&m.site, 0, 0);
            let rho = match r.first_failure() {
                Some(f) => Err(format!("coverings fail {}", f.axiom)),
                None => Rho::new(m.site.clone()).map_err(|e| e.to_string()),
            };
            (m.name.clone(), rho)
        })
        .collect()
}

fn law_rho_identities<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut out = Vec::new();
    for (name, rho) in rho_sites(ctx) {
        let rho = match rho {
            Ok(r) => r,
            Err(e) => {
                out.push(Outcome::skip(name, e));
                continue;
            }
        };
        let f: StalkSheaf<F> = random_sheaf(&rho.space, rng, 2);
        let g = random_presheaf::<F, _>(&rho.coarse, rng, 2).sheafify().0;
        let stalk_path = rho::rho_inverse_comparison(&rho, &g).is_iso();
        if !rho.is_basis() {
            out.push(Outcome::skip(name.clone(), "sublattice is not a basis"));
            out.push(Outcome::new(Mode::Report, rho::inverse_direct_is_identity(&rho, &f), format!("{name}: rho^-1 rho_* F = F")));
            out.push(Outcome::new(Mode::Report, stalk_path, format!("{name}: stalk formula for rho^-1")));
            continue;
        }
        out.push(Outcome::assert(rho::inverse_direct_is_identity(&rho, &f), format!("{name}: rho^-1 rho_* F = F")).input("F", sheaf_json(&f)));
        out.push(Outcome::assert(rho::inverse_shriek_is_identity(&rho, &f), format!("{name}: rho^-1 rho_! F = F")).input("F", sheaf_json(&f)));
        out.push(Outcome::assert(stalk_path, format!("{name}: stalk formula for rho^-1")).input("G", presheaf_json(&g)));
        let counit_iso = rho::rho_direct_unit(&rho, &g).is_iso();
        out.push(Outcome::new(Mode::Report, counit_iso, format!("{name}: G = rho_* rho^-1 G")));
    }
    out
}

fn law_rho_adjunction<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut out = Vec::new();
    for (name, rho) in rho_sites(ctx) {
        let Ok(rho) = rho else {
            out.push(Outcome::skip(name, "site not usable"));
            continue;
        };
        let f: StalkSheaf<F> = random_sheaf(&rho.space, rng, 2);
        let g = random_presheaf::<F, _>(&rho.coarse, rng, 2).sheafify().0;
        let a = rho::rho_shriek_adjunction_check(&rho, &f, &g);
        out.push(
            Outcome::assert(a.holds(), format!("{name}: (rho_!, rho^-1)"))
                .detail(format!("{a:?}"))
                .input("F", sheaf_json(&f))
                .input("G", presheaf_json(&g)),
        );
        let b = rho::rho_direct_adjunction_check(&rho, &g, &f);
        out.push(
            Outcome::assert(b.holds(), format!("{name}: (rho^-1, rho_*)"))
                .detail(format!("{b:?}"))
                .input("F", sheaf_json(&f))
                .input("G", presheaf_json(&g)),
        );
    }
    out
}

fn law_rho_exactness<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut out = Vec::new();
    for (name, rho) in rho_sites(ctx) {
        let Ok(rho) = rho else {
            out.push(Outcome::skip(name, "site not usable"));
            continue;
        };
        let ses = sheaf::random_short_exact::<F, _>(&rho.space, rng, 2);
        let mode = if rho.is_basis() { Mode::Assert } else { Mode::Report };
        out.push(
            Outcome::new(mode, rho::rho_shriek_exactness(&rho, &ses), format!("{name}: rho_! exact"))
                .input("A", sheaf_json(&ses.a))
                .input("B", sheaf_json(&ses.b))
                .input("C", sheaf_json(&ses.c)),
        );
        let (mono, mid, epi) = rho::rho_direct_exactness(&rho, &ses);
        out.push(Outcome::assert(mono && mid, format!("{name}: rho_* left exact")).input("A", sheaf_json(&ses.a)).input("B", sheaf_json(&ses.b)));
        let full = rho.has_full_coverings();
        out.push(Outcome::new(if full { Mode::Assert } else { Mode::Report }, epi, format!("{name}: rho_* right exact")).input("B", sheaf_json(&ses.b)));
        let cs = presheaf::random_short_exact::<F, _>(&rho.coarse, rng, 2);
        let (sa, sb, sc) = (cs.a.sheafify().0, cs.b.sheafify().0, cs.c.sheafify().0);
        let i = sheafify_morphism(&cs.a, &cs.b, &cs.i);
        let q = sheafify_morphism(&cs.b, &cs.c, &cs.q);
        if presheaf::is_short_exact(&sb, &sc, &i, &q) {
            out.push(Outcome::assert(rho::rho_inverse_exactness(&rho, &sa, &sb, &sc, &i, &q), format!("{name}: rho^-1 exact")));
        }
    }
    out
}

fn law_rho_hom<F: Field>(ctx: &Context, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut out = Vec::new();
    for (name, rho) in rho_sites(ctx) {
        let Ok(rho) = rho else {
            out.push(Outcome::skip(name, "site not usable"));
            continue;
        };
        let f: StalkSheaf<F> = random_sheaf(&rho.space, rng, 2);
        let g = random_presheaf::<F, _>(&rho.coarse, rng, 2).sheafify().0;
        let r = rho::rho_hom_formula_check(&rho, &f, &g);
        let mode = if rho.has_full_coverings() { Mode::Assert } else { Mode::Report };
        out.push(Outcome::new(mode, r.iso, format!("{name}: hom formula")).input("F", sheaf_json(&f)).input("G", presheaf_json(&g)));
    }
    out
}

/// Per-law counts in a compact map, for summaries.
pub fn summary(reports: &[LawReport]) -> BTreeMap<String, Status> {
    reports.iter().map(|r| (r.law.clone(), r.status)).collect()
}
