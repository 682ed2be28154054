//! Hybridizable piecewise-polynomial spaces on triangle meshes, the lifting
//! operators that connect them, an HDG Poisson solver, and an audit engine
//! that measures the constants of discrete Poincaré and trace inequalities.

pub mod cli;
pub mod fields;
pub mod hdg;
pub mod inequalities;
pub mod lifting;
pub mod linalg;
pub mod mesh;
pub mod polybasis;
pub mod report;
