//! Exact six-operation sheaf calculus on finite Grothendieck sites.

pub mod field;
pub mod matrix;
pub mod pointset;
pub mod poset;
pub mod rep;
pub mod site;
pub mod sheaf;
pub mod presheaf;
pub mod ops;
pub mod complex;
pub mod simplicial;
pub mod derived;
pub mod rho;
pub mod io;
pub mod models;
pub mod laws;
pub mod report;
