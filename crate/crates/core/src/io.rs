//! File formats: `.site.json` for posets and sites, `.sheaf.json` for sheaf data.
//! Scalars are exact strings (`"3/7"`, `"-1"`); no floats are accepted.
//!
//! `.site.json` fields: `points`, `leq` (pairs, closed transitively), optional
//! `sublattice` (a list of opens, each a list of points), optional `coverings` (keyed by
//! sublattice index, families of sublattice indices), optional `ambient`
//! (`points`, `leq`, `embedding` naming the ambient point of each point).
//!
//! `.sheaf.json` fields: `site` (a model name or path), `representation` (`stalks` or
//! `opens`), `dims` keyed by point name or open, `maps` keyed by `"x<=y"` (Hasse edges
//! for stalks) or `"U>=V"` (opens). An open is a sublattice index or a comma separated
//! list of points. Missing dims are zero; missing maps are zero matrices.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::matrix::Matrix;
use crate::pointset::PointSet;
use crate::poset::PosetSpace;
use crate::presheaf::Presheaf;
use crate::rep::Rep;
use crate::sheaf::{SheafError, StalkSheaf};
use crate::simplicial::{ComplexError, Pos};
use crate::site::{FiniteSite, OpenLattice, SiteError, Space};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IoError {
    #[error("{pos}: syntax: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("{0}")]
    Other(String),
}

impl From<SiteError> for IoError {
    fn from(e: SiteError) -> Self {
        IoError::Other(e.to_string())
    }
}

impl From<SheafError> for IoError {
    fn from(e: SheafError) -> Self {
        IoError::Other(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmbientFile {
    points: Vec<String>,
    leq: Vec<(String, String)>,
    embedding: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    points: Vec<String>,
    leq: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sublattice: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coverings: Option<BTreeMap<String, Vec<Vec<usize>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ambient: Option<AmbientFile>,
}

/// A parsed site together with its declared open list, if any.
#[derive(Debug, Clone)]
pub struct SiteModel {
    pub name: String,
    pub space: Arc<Space>,
    pub site: Arc<FiniteSite>,
    /// Declared sublattice in file order (empty for Alexandrov sites).
    pub declared: Vec<PointSet>,
}

impl SiteModel {
    pub fn is_coarse(&self) -> bool {
        !self.declared.is_empty()
    }

    pub fn alexandrov(space: Arc<Space>) -> Self {
        SiteModel {
            name: space.name.clone(),
            site: Arc::new(FiniteSite::alexandrov(space.clone())),
            space,
            declared: Vec::new(),
        }
    }
}

fn pos_at(text: &str, offset: usize) -> Pos {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    Pos { line, column }
}

/// Position of the first occurrence of the JSON string `"needle"`.
fn string_pos(text: &str, needle: &str) -> Pos {
    let quoted = serde_json::to_string(needle).expect("string");
    text.find(&quoted).map_or(Pos { line: 1, column: 1 }, |o| pos_at(text, o))
}

fn syntax(e: serde_json::Error) -> IoError {
    IoError::Syntax { pos: Pos { line: e.line(), column: e.column() }, msg: e.to_string() }
}

fn invalid(pos: Pos, msg: impl Into<String>) -> IoError {
    IoError::Invalid { pos, msg: msg.into() }
}

fn build_poset(text: &str, points: &[String], leq: &[(String, String)]) -> Result<PosetSpace, IoError> {
    for (a, b) in leq {
        for n in [a, b] {
            if !points.contains(n) {
                return Err(invalid(string_pos(text, n), format!("unknown point {n:?} in leq")));
            }
        }
    }
    PosetSpace::new(points.to_vec(), leq).map_err(|e| invalid(string_pos(text, "leq"), e.to_string()))
}

pub fn parse_site(text: &str) -> Result<SiteModel, IoError> {
    let file: SiteFile = serde_json::from_str(text).map_err(syntax)?;
    let name = file.name.clone().unwrap_or_else(|| "site".into());
    let poset = build_poset(text, &file.points, &file.leq)?;
    let space = match &file.ambient {
        None => Space::new(&name, poset),
        Some(a) => {
            let ap = build_poset(text, &a.points, &a.leq)?;
            let embed = a
                .embedding
                .iter()
                .map(|n| ap.index_of(n).ok_or_else(|| invalid(string_pos(text, "embedding"), format!("unknown ambient point {n:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Space::with_ambient(&name, poset, ap, embed).map_err(|e| invalid(string_pos(text, "ambient"), e.to_string()))?
        }
    };
    let space = Arc::new(space);
    let Some(sub) = &file.sublattice else {
        if file.coverings.is_some() {
            return Err(invalid(string_pos(text, "coverings"), "coverings need a sublattice"));
        }
        return Ok(SiteModel::alexandrov(space));
    };
    let mut declared = Vec::with_capacity(sub.len());
    for names in sub {
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let s = space
            .poset
            .set_of(&refs)
            .map_err(|e| invalid(string_pos(text, "sublattice"), e.to_string()))?;
        if !space.poset.is_open(&s) {
            return Err(invalid(string_pos(text, "sublattice"), format!("{names:?} is not an up-set")));
        }
        declared.push(s);
    }
    let lattice = OpenLattice::new(space.len(), declared.clone(), space.poset.names())
        .map_err(|e| invalid(string_pos(text, "sublattice"), e.to_string()))?;
    let to_lat = |i: usize| lattice.index_of(&declared[i]).expect("declared open");
    let mut covers: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for (key, fams) in file.coverings.iter().flatten() {
        let kpos = string_pos(text, key);
        let u: usize = key.parse().map_err(|_| invalid(kpos, format!("covering key {key:?} is not an open index")))?;
        let check = |i: usize| if i < declared.len() { Ok(to_lat(i)) } else { Err(invalid(kpos, format!("open index {i} out of range"))) };
        let lu = check(u)?;
        let mut out = Vec::new();
        for fam in fams {
            let f: Vec<usize> = fam.iter().map(|&i| check(i)).collect::<Result<_, _>>()?;
            for &m in &f {
                if !lattice.open(m).is_subset(lattice.open(lu)) {
                    return Err(invalid(kpos, format!("member {} of a covering of {u} is not contained in it", space.poset.names_of(lattice.open(m)).join(","))));
                }
            }
            out.push(f);
        }
        covers.insert(lu, out);
    }
    let site = FiniteSite::declared(&name, space.poset.names().to_vec(), Some(space.clone()), lattice, covers)?;
    Ok(SiteModel { name, space, site: Arc::new(site), declared })
}

fn embedding_names(space: &Space) -> Option<AmbientFile> {
    space.ambient.as_ref().map(|a| AmbientFile {
        points: a.poset.names().to_vec(),
        leq: a.poset.hasse().iter().map(|&(x, y)| (a.poset.name(x).to_string(), a.poset.name(y).to_string())).collect(),
        embedding: a.embed.iter().map(|&i| a.poset.name(i).to_string()).collect(),
    })
}

/// Canonical `.site.json` text: Hasse pairs, declared opens in order.
pub fn site_to_json(m: &SiteModel) -> String {
    let p = &m.space.poset;
    let leq = p.hasse().iter().map(|&(x, y)| (p.name(x).to_string(), p.name(y).to_string())).collect();
    let (sublattice, coverings) = if m.is_coarse() {
        let lat = m.site.lattice().expect("declared lattice");
        let back = |l: usize| m.declared.iter().position(|d| d == lat.open(l)).expect("declared open");
        let mut cov = BTreeMap::new();
        for (i, d) in m.declared.iter().enumerate() {
            let l = lat.index_of(d).expect("declared");
            let fams: Vec<Vec<usize>> = m
                .site
                .listed_covers(l)
                .into_iter()
                .filter(|f| *f != vec![l] && !(f.is_empty() && d.is_empty()))
                .map(|f| {
                    let mut v: Vec<usize> = f.into_iter().map(back).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            if !fams.is_empty() {
                cov.insert(i.to_string(), fams);
            }
        }
        let sub = m.declared.iter().map(|s| p.names_of(s)).collect();
        (Some(sub), if cov.is_empty() { None } else { Some(cov) })
    } else {
        (None, None)
    };
    let file = SiteFile {
        name: Some(m.name.clone()),
        points: p.names().to_vec(),
        leq,
        sublattice,
        coverings,
        ambient: embedding_names(&m.space),
    };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Stalks,
    Opens,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SheafFile {
    site: String,
    representation: Representation,
    #[serde(default)]
    dims: BTreeMap<String, usize>,
    #[serde(default)]
    maps: BTreeMap<String, Vec<Vec<String>>>,
}

/// Sheaf data in either representation.
#[derive(Debug, Clone)]
pub enum SheafData<F> {
    Stalks(StalkSheaf<F>),
    Opens(Presheaf<F>),
}

/// The `site` reference of a `.sheaf.json` document.
pub fn sheaf_site_ref(text: &str) -> Result<String, IoError> {
    let file: SheafFile = serde_json::from_str(text).map_err(syntax)?;
    Ok(file.site)
}

fn parse_matrix<F: Field>(text: &str, key: &str, rows: &[Vec<String>], r: usize, c: usize) -> Result<Matrix<F>, IoError> {
    let pos = string_pos(text, key);
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(invalid(pos, format!("map {key:?} must be {r}x{c}")));
    }
    let mut m = Matrix::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            m.set(i, j, F::parse(s).map_err(|e| invalid(pos, e.to_string()))?);
        }
    }
    Ok(m)
}

fn parse_open(text: &str, model: &SiteModel, key: &str, s: &str) -> Result<usize, IoError> {
    let lat = model.site.lattice()?;
    let pos = string_pos(text, key);
    let set = if let Ok(i) = s.trim().parse::<usize>() {
        if model.is_coarse() {
            model.declared.get(i).cloned().ok_or_else(|| invalid(pos, format!("open index {i} out of range")))?
        } else {
            lat.opens().get(i).cloned().ok_or_else(|| invalid(pos, format!("open index {i} out of range")))?
        }
    } else {
        let names: Vec<&str> = s.split(',').map(str::trim).filter(|n| !n.is_empty()).collect();
        model.space.poset.set_of(&names).map_err(|e| invalid(pos, e.to_string()))?
    };
    lat.index_of(&set).ok_or_else(|| invalid(pos, format!("{s:?} is not an open of the site")))
}

/// Parses sheaf data over an already resolved site model.
pub fn parse_sheaf<F: Field>(text: &str, model: &SiteModel) -> Result<SheafData<F>, IoError> {
    let file: SheafFile = serde_json::from_str(text).map_err(syntax)?;
    match file.representation {
        Representation::Stalks => {
            let p = &model.space.poset;
            let mut dims = vec![0; p.len()];
            for (k, &d) in &file.dims {
                let x = p.index_of(k).ok_or_else(|| invalid(string_pos(text, k), format!("unknown point {k:?}")))?;
                dims[x] = d;
            }
            let mut edges: BTreeMap<(usize, usize), Matrix<F>> = BTreeMap::new();
            for (k, rows) in &file.maps {
                let (a, b) = k.split_once("<=").ok_or_else(|| invalid(string_pos(text, k), "stalk maps are keyed \"x<=y\""))?;
                let x = p.index_of(a.trim()).ok_or_else(|| invalid(string_pos(text, k), format!("unknown point {a:?}")))?;
                let y = p.index_of(b.trim()).ok_or_else(|| invalid(string_pos(text, k), format!("unknown point {b:?}")))?;
                if !p.upper_covers(x).contains(&y) {
                    return Err(invalid(string_pos(text, k), format!("{k:?} is not a Hasse edge")));
                }
                edges.insert((x, y), parse_matrix(text, k, rows, dims[y], dims[x])?);
            }
            let rep = Rep::from_hasse(p, dims.clone(), |x, y| edges.get(&(x, y)).cloned().unwrap_or_else(|| Matrix::zeros(dims[y], dims[x])))
                .map_err(|e| invalid(string_pos(text, "maps"), e.to_string()))?;
            Ok(SheafData::Stalks(StalkSheaf::new(model.space.clone(), rep)?))
        }
        Representation::Opens => {
            let lat = model.site.lattice()?;
            let order = lat.order();
            let mut dims = vec![0; lat.len()];
            for (k, &d) in &file.dims {
                dims[parse_open(text, model, k, k)?] = d;
            }
            let mut edges: BTreeMap<(usize, usize), Matrix<F>> = BTreeMap::new();
            for (k, rows) in &file.maps {
                let (a, b) = k.split_once(">=").ok_or_else(|| invalid(string_pos(text, k), "open maps are keyed \"U>=V\""))?;
                let u = parse_open(text, model, k, a)?;
                let v = parse_open(text, model, k, b)?;
                if !order.upper_covers(u).contains(&v) {
                    return Err(invalid(string_pos(text, k), format!("{k:?} is not a covering pair of opens")));
                }
                edges.insert((u, v), parse_matrix(text, k, rows, dims[v], dims[u])?);
            }
            let rep = Rep::from_hasse(order, dims.clone(), |u, v| edges.get(&(u, v)).cloned().unwrap_or_else(|| Matrix::zeros(dims[v], dims[u])))
                .map_err(|e| invalid(string_pos(text, "maps"), e.to_string()))?;
            Ok(SheafData::Opens(Presheaf { site: model.site.clone(), rep }))
        }
    }
}

fn matrix_strings<F: Field>(m: &Matrix<F>) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_exact_string()).collect()).collect()
}

/// Canonical stalk-representation text for a sheaf.
pub fn stalks_to_json<F: Field>(site_ref: &str, f: &StalkSheaf<F>) -> String {
    let p = f.poset();
    let dims = (0..p.len()).filter(|&x| f.dim(x) > 0).map(|x| (p.name(x).to_string(), f.dim(x))).collect();
    let maps = p
        .hasse()
        .into_iter()
        .filter(|&(x, y)| f.dim(x) > 0 && f.dim(y) > 0)
        .map(|(x, y)| (format!("{}<={}", p.name(x), p.name(y)), matrix_strings(f.map(x, y))))
        .collect();
    let file = SheafFile { site: site_ref.to_string(), representation: Representation::Stalks, dims, maps };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

/// Canonical open-representation text; opens are written as point lists.
pub fn opens_to_json<F: Field>(site_ref: &str, g: &Presheaf<F>) -> String {
    let lat = g.lattice();
    let sp = g.site.backing.as_ref().expect("backed site");
    let name = |u: usize| sp.poset.names_of(lat.open(u)).join(",");
    let dims = (0..lat.len()).filter(|&u| g.dim(u) > 0).map(|u| (name(u), g.dim(u))).collect();
    let maps = lat
        .order()
        .hasse()
        .into_iter()
        .filter(|&(u, v)| g.dim(u) > 0 && g.dim(v) > 0)
        .map(|(u, v)| (format!("{}>={}", name(u), name(v)), matrix_strings(g.restrict(u, v))))
        .collect();
    let file = SheafFile { site: site_ref.to_string(), representation: Representation::Opens, dims, maps };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;

    const HALF_OPEN: &str = include_str!("../models/half-open.site.json");

    #[test]
    fn site_round_trip() {
        let m = parse_site(HALF_OPEN).unwrap();
        assert_eq!(m.space.poset.names_of(&m.space.largest_rel_compact()), ["v0", "v0-v1"]);
        let text = site_to_json(&m);
        let again = parse_site(&text).unwrap();
        assert_eq!(site_to_json(&again), text);
    }

    #[test]
    fn unknown_point_is_located() {
        let bad = "{\n  \"points\": [\"a\"],\n  \"leq\": [[\"a\", \"b\"]]\n}";
        match parse_site(bad) {
            Err(IoError::Invalid { pos, .. }) => assert_eq!((pos.line, pos.column), (3, 17)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sheaf_round_trip() {
        let m = parse_site(HALF_OPEN).unwrap();
        let text = r#"{"site": "half-open", "representation": "stalks", "dims": {"v0": 1, "v0-v1": 2}, "maps": {"v0<=v0-v1": [["1/2"], ["-3"]]}}"#;
        let SheafData::Stalks(f) = parse_sheaf::<Q>(text, &m).unwrap() else { panic!() };
        assert_eq!(f.dims(), &[1, 0, 2, 0]);
        let out = stalks_to_json("half-open", &f);
        let SheafData::Stalks(g) = parse_sheaf::<Q>(&out, &m).unwrap() else { panic!() };
        assert_eq!(f, g);
        assert_eq!(stalks_to_json("half-open", &g), out);
    }
}
