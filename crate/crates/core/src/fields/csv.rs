use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::{CellField, SkeletonField, VectorCellField};

/// One row per block: `kind,k,block_id,c0,c1,...`. Floats use the shortest
/// representation that round-trips.
pub fn fields_to_csv(u: Option<&CellField>, uhat: Option<&SkeletonField>, p: Option<&VectorCellField>) -> String {
    let width = [
        u.map_or(0, |u| u.nb()),
        uhat.map_or(0, |u| u.nf()),
        p.map_or(0, |p| 2 * p.nb()),
    ]
    .into_iter()
    .max()
    .unwrap_or(0);
    let mut s = String::from("kind,k,block_id");
    for i in 0..width {
        write!(s, ",c{i}").unwrap();
    }
    s.push('\n');
    let mut rows = |kind: &str, k: usize, bs: usize, coef: &[f64]| {
        for (id, blk) in coef.chunks(bs.max(1)).enumerate() {
            write!(s, "{kind},{k},{id}").unwrap();
            for v in blk {
                write!(s, ",{v:?}").unwrap();
            }
            s.push('\n');
        }
    };
    if let Some(u) = u {
        rows("cell", u.k, u.nb(), &u.coef);
    }
    if let Some(uh) = uhat {
        rows("face", uh.k, uh.nf(), &uh.coef);
    }
    if let Some(p) = p {
        rows("flux", p.k, 2 * p.nb(), &p.coef);
    }
    s
}

pub fn write_field_csv(
    path: &Path,
    u: Option<&CellField>,
    uhat: Option<&SkeletonField>,
    p: Option<&VectorCellField>,
) -> io::Result<()> {
    crate::report::write_atomic(path, fields_to_csv(u, uhat, p).as_bytes())
}
