//! The shipped model corpus, embedded at compile time.

use std::sync::Arc;

use crate::io::{self, IoError, SiteModel};
use crate::simplicial::{parse_complex, SimplicialComplex};
use crate::site::Space;

/// `(name, file name, text)` for every shipped model.
pub const MODELS: &[(&str, &str, &str)] = &[
    ("interval", "interval.cplx.json", include_str!("../models/interval.cplx.json")),
    ("half-open", "half-open.site.json", include_str!("../models/half-open.site.json")),
    ("sierpinski", "sierpinski.site.json", include_str!("../models/sierpinski.site.json")),
    ("circle", "circle.cplx.json", include_str!("../models/circle.cplx.json")),
    ("sphere", "sphere.cplx.json", include_str!("../models/sphere.cplx.json")),
    ("torus", "torus.cplx.json", include_str!("../models/torus.cplx.json")),
    ("rp2", "rp2.cplx.json", include_str!("../models/rp2.cplx.json")),
    ("circle-x-circle", "circle-x-circle.site.json", include_str!("../models/circle-x-circle.site.json")),
    ("coarse-interval", "coarse-interval.site.json", include_str!("../models/coarse-interval.site.json")),
    ("coarse-circle", "coarse-circle.site.json", include_str!("../models/coarse-circle.site.json")),
    (
        "coarse-interval-nonbasis",
        "coarse-interval-nonbasis.site.json",
        include_str!("../models/coarse-interval-nonbasis.site.json"),
    ),
    (
        "coarse-circle-crafted",
        "coarse-circle-crafted.site.json",
        include_str!("../models/coarse-circle-crafted.site.json"),
    ),
];

/// A loaded model: a simplicial complex (with its face poset site) or a site file.
#[derive(Debug, Clone)]
pub enum Model {
    Complex(SimplicialComplex, SiteModel),
    Site(SiteModel),
}

impl Model {
    pub fn site(&self) -> &SiteModel {
        match self {
            Model::Complex(_, s) | Model::Site(s) => s,
        }
    }

    pub fn complex(&self) -> Option<&SimplicialComplex> {
        match self {
            Model::Complex(c, _) => Some(c),
            Model::Site(_) => None,
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.site().space
    }
}

/// Parses a model from text, dispatching on the file name suffix (`.cplx.json` or
/// anything else for sites).
pub fn parse_model(file_name: &str, text: &str) -> Result<Model, IoError> {
    if file_name.ends_with(".cplx.json") {
        let c = parse_complex(text)?;
        let site = SiteModel::alexandrov(c.space());
        Ok(Model::Complex(c, site))
    } else {
        Ok(Model::Site(io::parse_site(text)?))
    }
}

pub fn shipped(name: &str) -> Option<Model> {
    MODELS
        .iter()
        .find(|(n, f, _)| *n == name || *f == name)
        .map(|(_, f, t)| parse_model(f, t).expect("shipped models parse"))
}

pub fn names() -> Vec<&'static str> {
    MODELS.iter().map(|(n, _, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_models_load() {
        for n in names() {
            let m = shipped(n).unwrap();
            if m.site().is_coarse() {
                assert!(m.site().site.lattice().is_ok(), "{n}");
            }
        }
        assert_eq!(shipped("circle-x-circle").unwrap().space().len(), 36);
        assert!(!shipped("coarse-interval-nonbasis").unwrap().site().site.basis);
    }
}
