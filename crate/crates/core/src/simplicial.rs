//! Finite simplicial complexes, their face posets, and constructible sheaves from
//! stratifications.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::matrix::Matrix;
use crate::pointset::PointSet;
use crate::poset::PosetSpace;
use crate::rep::{Rep, RepError};
use crate::sheaf::StalkSheaf;
use crate::site::Space;

/// A location in a source file, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComplexError {
    #[error("{pos}: syntax: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: empty simplex (S1)")]
    EmptySimplex { pos: Pos },
    #[error("{pos}: unknown vertex {vertex:?} (S1)")]
    UnknownVertex { pos: Pos, vertex: String },
    #[error("{pos}: repeated vertex {vertex:?} in a simplex")]
    RepeatedVertex { pos: Pos, vertex: String },
    #[error("{pos}: simplex {simplex:?} listed twice")]
    Duplicate { pos: Pos, simplex: Vec<String> },
    #[error("{pos}: face {face:?} of {simplex:?} is missing (S2)")]
    MissingFace { pos: Pos, simplex: Vec<String>, face: Vec<String> },
    #[error("{pos}: vertex {vertex:?} is not a simplex (S3)")]
    MissingVertex { pos: Pos, vertex: String },
    #[error("{pos}: vertex {vertex:?} listed twice")]
    DuplicateVertex { pos: Pos, vertex: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ComplexFile {
    #[serde(default)]
    name: Option<String>,
    vertices: Vec<String>,
    simplices: Vec<Vec<String>>,
}

/// A finite simplicial complex, simplices kept as sorted vertex-index lists ordered by
/// dimension and then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    pub name: String,
    pub vertices: Vec<String>,
    pub simplices: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl SimplicialComplex {
    /// Validates S1–S4 and builds the complex. Positions in errors are unknown here.
    pub fn new(name: &str, vertices: Vec<String>, simplices: Vec<Vec<String>>) -> Result<Self, ComplexError> {
        Self::checked(name, vertices, simplices, &|_| Pos { line: 0, column: 0 }, &|_| Pos { line: 0, column: 0 })
    }

    fn checked(
        name: &str,
        vertices: Vec<String>,
        simplices: Vec<Vec<String>>,
        vpos: &dyn Fn(usize) -> Pos,
        spos: &dyn Fn(usize) -> Pos,
    ) -> Result<Self, ComplexError> {
        let mut vindex = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vindex.insert(v.clone(), i).is_some() {
                return Err(ComplexError::DuplicateVertex { pos: vpos(i), vertex: v.clone() });
            }
        }
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut sorted = Vec::with_capacity(simplices.len());
        for (k, s) in simplices.iter().enumerate() {
            if s.is_empty() {
                return Err(ComplexError::EmptySimplex { pos: spos(k) });
            }
            let mut idx = Vec::with_capacity(s.len());
            for v in s {
                match vindex.get(v) {
                    Some(&i) => idx.push(i),
                    None => return Err(ComplexError::UnknownVertex { pos: spos(k), vertex: v.clone() }),
                }
            }
            idx.sort_unstable();
            if let Some(w) = idx.windows(2).find(|w| w[0] == w[1]) {
                return Err(ComplexError::RepeatedVertex { pos: spos(k), vertex: vertices[w[0]].clone() });
            }
            if seen.insert(idx.clone(), k).is_some() {
                return Err(ComplexError::Duplicate { pos: spos(k), simplex: s.clone() });
            }
            sorted.push(idx);
        }
        let names = |s: &[usize]| s.iter().map(|&i| vertices[i].clone()).collect::<Vec<_>>();
        for (k, s) in sorted.iter().enumerate() {
            if s.len() < 2 {
                continue;
            }
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                if !seen.contains_key(&face) {
                    return Err(ComplexError::MissingFace { pos: spos(k), simplex: names(s), face: names(&face) });
                }
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            if !seen.contains_key(&vec![i]) {
                return Err(ComplexError::MissingVertex { pos: vpos(i), vertex: v.clone() });
            }
        }
        // S4 (local finiteness) holds for any finite list.
        sorted.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let index = sorted.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(SimplicialComplex { name: name.to_string(), vertices, simplices: sorted, index })
    }

    /// Builds the complex generated by the given simplices (all faces added).
    pub fn from_facets(name: &str, vertices: &[&str], facets: &[&[&str]]) -> Self {
        let mut all: BTreeSet<Vec<String>> = BTreeSet::new();
        for f in facets {
            let n = f.len();
            for mask in 1u32..(1 << n) {
                all.insert((0..n).filter(|i| mask & (1 << i) != 0).map(|i| f[i].to_string()).collect());
            }
        }
        for v in vertices {
            all.insert(vec![v.to_string()]);
        }
        Self::new(name, vertices.iter().map(|s| s.to_string()).collect(), all.into_iter().collect())
            .expect("closed under faces by construction")
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn dim_of(&self, s: usize) -> usize {
        self.simplices[s].len() - 1
    }

    pub fn dim(&self) -> usize {
        self.simplices.iter().map(|s| s.len() - 1).max().unwrap_or(0)
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn simplex_name(&self, s: usize) -> String {
        self.simplices[s].iter().map(|&i| self.vertices[i].as_str()).collect::<Vec<_>>().join("-")
    }

    /// Codimension-one faces with incidence signs `(-1)^i` for the `i`-th vertex removed.
    pub fn boundary(&self, s: usize) -> Vec<(usize, i64)> {
        let sim = &self.simplices[s];
        if sim.len() < 2 {
            return vec![];
        }
        (0..sim.len())
            .map(|i| {
                let mut f = sim.clone();
                f.remove(i);
                (self.index[&f], if i % 2 == 0 { 1 } else { -1 })
            })
            .collect()
    }

    /// Face poset, `σ <= τ` iff `σ ⊆ τ`; points are in simplex order.
    pub fn face_poset(&self) -> PosetSpace {
        let names = (0..self.len()).map(|s| self.simplex_name(s)).collect();
        let pairs: Vec<(usize, usize)> =
            (0..self.len()).flat_map(|s| self.boundary(s).into_iter().map(move |(f, _)| (f, s))).collect();
        PosetSpace::from_indices(names, &pairs).expect("face relation is a partial order")
    }

    pub fn space(&self) -> Arc<Space> {
        Arc::new(Space::new(&self.name, self.face_poset()))
    }

    /// `U(σ)`: all simplices having `σ` as a face.
    pub fn open_star(&self, s: usize) -> PointSet {
        let sim = &self.simplices[s];
        PointSet::from_iter(self.len(), (0..self.len()).filter(|&t| sim.iter().all(|v| self.simplices[t].contains(v))))
    }

    /// Open stars of the vertices.
    pub fn vertex_star_cover(&self) -> Vec<PointSet> {
        (0..self.vertices.len()).map(|v| self.open_star(self.index[&vec![v]])).collect()
    }

    /// The simplices spanned by a subset of the vertices.
    pub fn full_subcomplex(&self, vs: &[usize]) -> PointSet {
        PointSet::from_iter(self.len(), (0..self.len()).filter(|&s| self.simplices[s].iter().all(|v| vs.contains(v))))
    }

    pub fn to_json(&self) -> String {
        let file = ComplexFile {
            name: Some(self.name.clone()),
            vertices: self.vertices.clone(),
            simplices: self.simplices.iter().map(|s| s.iter().map(|&i| self.vertices[i].clone()).collect()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

/// Parses a `.cplx.json` document: `{"name": .., "vertices": [..], "simplices": [[..], ..]}`
/// with every face listed.
pub fn parse_complex(text: &str) -> Result<SimplicialComplex, ComplexError> {
    let file: ComplexFile = serde_json::from_str(text)
        .map_err(|e| ComplexError::Syntax { pos: Pos { line: e.line(), column: e.column() }, msg: e.to_string() })?;
    let name = file.name.clone().unwrap_or_else(|| "complex".into());
    let vpos = |i: usize| element_pos(text, "vertices", i);
    let spos = |i: usize| element_pos(text, "simplices", i);
    SimplicialComplex::checked(&name, file.vertices, file.simplices, &vpos, &spos)
}

/// Position of the `index`-th element of the top-level array under `key`.
fn element_pos(text: &str, key: &str, index: usize) -> Pos {
    let pattern = format!("\"{}\"", key);
    let start = match text.find(&pattern) {
        Some(s) => s + pattern.len(),
        None => return Pos { line: 1, column: 1 },
    };
    let bytes = text.as_bytes();
    let mut i = start;
    while i < bytes.len() && bytes[i] != b'[' {
        i += 1;
    }
    let mut depth = 0usize;
    let mut count = 0usize;
    let mut expecting = true;
    let mut in_str = false;
    let mut esc = false;
    let mut found = i;
    while i < bytes.len() {
        let c = bytes[i];
        if in_str {
            if esc {
                esc = false;
            } else if c == b'\\' {
                esc = true;
            } else if c == b'"' {
                in_str = false;
            }
            i += 1;
            continue;
        }
        match c {
            b'[' | b'{' => {
                if depth == 1 && expecting {
                    if count == index {
                        found = i;
                        break;
                    }
                    expecting = false;
                }
                depth += 1;
            }
            b']' | b'}' => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            b',' if depth == 1 => {
                count += 1;
                expecting = true;
            }
            b'"' => {
                if depth == 1 && expecting {
                    if count == index {
                        found = i;
                        break;
                    }
                    expecting = false;
                }
                in_str = true;
            }
            _ => {}
        }
        i += 1;
    }
    let before = &text[..found.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map(|p| p + 1).unwrap_or(0) + 1;
    Pos { line, column }
}

/// The face-poset map of a simplicial map given on vertices (names in `L`).
pub fn simplicial_map(k: &SimplicialComplex, l: &SimplicialComplex, vertex_map: &[(&str, &str)]) -> Result<Vec<usize>, String> {
    let lookup: HashMap<&str, &str> = vertex_map.iter().copied().collect();
    let vpos = |c: &SimplicialComplex, n: &str| c.vertices.iter().position(|v| v == n);
    let mut out = Vec::with_capacity(k.len());
    for s in &k.simplices {
        let mut img: Vec<usize> = Vec::new();
        for &v in s {
            let name = lookup.get(k.vertices[v].as_str()).ok_or_else(|| format!("vertex {} unmapped", k.vertices[v]))?;
            img.push(vpos(l, name).ok_or_else(|| format!("unknown vertex {name}"))?);
        }
        img.sort_unstable();
        img.dedup();
        out.push(l.index_of(&img).ok_or_else(|| format!("image of {:?} is not a simplex", s))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StratificationError {
    #[error("stratum label list has {0} entries, expected {1}")]
    Labels(usize, usize),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("map {0} -> {1} inside stratum {2} is not invertible")]
    NotLocallyConstant(String, String, String),
}

/// A partition of the face poset into strata, with a stalk dimension per stratum and
/// explicit maps along Hasse edges. Edges inside a stratum default to the identity,
/// edges across strata to zero.
#[derive(Debug, Clone)]
pub struct Stratification<F> {
    pub space: Arc<Space>,
    pub strata: Vec<String>,
    pub labels: Vec<usize>,
    pub dims: Vec<usize>,
    pub edges: BTreeMap<(usize, usize), Matrix<F>>,
}

impl<F: Field> Stratification<F> {
    pub fn new(space: Arc<Space>, strata: Vec<String>, labels: Vec<usize>, dims: Vec<usize>) -> Self {
        Stratification { space, strata, labels, dims, edges: BTreeMap::new() }
    }

    pub fn with_edge(mut self, x: usize, y: usize, m: Matrix<F>) -> Self {
        self.edges.insert((x, y), m);
        self
    }

    pub fn sheaf(&self) -> Result<StalkSheaf<F>, StratificationError> {
        let p = &self.space.poset;
        if self.labels.len() != p.len() {
            return Err(StratificationError::Labels(self.labels.len(), p.len()));
        }
        let d: Vec<usize> = self.labels.iter().map(|&l| self.dims[l]).collect();
        let rep = Rep::from_hasse(p, d.clone(), |x, y| match self.edges.get(&(x, y)) {
            Some(m) => m.clone(),
            None if self.labels[x] == self.labels[y] => Matrix::identity(d[x]),
            None => Matrix::zeros(d[y], d[x]),
        })?;
        for x in 0..p.len() {
            for y in p.up(x).iter() {
                if self.labels[x] == self.labels[y] && !rep.map(x, y).is_invertible() {
                    return Err(StratificationError::NotLocallyConstant(
                        p.name(x).into(),
                        p.name(y).into(),
                        self.strata[self.labels[x]].clone(),
                    ));
                }
            }
        }
        Ok(StalkSheaf { space: self.space.clone(), rep })
    }
}

/// A constructible sheaf given directly by its stratification.
pub fn constructible_from_stratification<F: Field>(s: &Stratification<F>) -> Result<StalkSheaf<F>, StratificationError> {
    s.sheaf()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_face_poset() {
        let k = SimplicialComplex::from_facets("edge", &["a", "b"], &[&["a", "b"]]);
        let p = k.face_poset();
        assert_eq!(p.len(), 3);
        assert_eq!(p.hasse().len(), 2);
    }

    #[test]
    fn missing_face_is_located() {
        let text = "{\n  \"vertices\": [\"a\", \"b\"],\n  \"simplices\": [[\"a\"], [\"a\", \"b\"]]\n}";
        match parse_complex(text) {
            Err(ComplexError::MissingFace { pos, face, .. }) => {
                assert_eq!(face, vec!["b".to_string()]);
                assert_eq!(pos, Pos { line: 3, column: 24 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let k = SimplicialComplex::from_facets("circle", &["a", "b", "c"], &[&["a", "b"], &["b", "c"], &["a", "c"]]);
        let back = parse_complex(&k.to_json()).unwrap();
        assert_eq!(back, k);
        assert_eq!(back.to_json(), k.to_json());
    }
}
