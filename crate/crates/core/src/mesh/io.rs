use std::fmt::Write;

use super::{BoundaryTag, Mesh, MeshError, MeshSource};

/// Canonical text form. Coordinates use Rust's shortest round-trip float
/// formatting, so `load_mesh(&save_mesh(m)) == m` bit for bit.
pub fn save_mesh(m: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("hmesh 1 dim 2\n");
    writeln!(s, "vertices {}", m.n_vertices()).unwrap();
    for p in m.vertices() {
        writeln!(s, "{:?} {:?}", p[0], p[1]).unwrap();
    }
    writeln!(s, "cells {}", m.n_cells()).unwrap();
    for c in m.cells() {
        writeln!(s, "{} {} {}", c[0], c[1], c[2]).unwrap();
    }
    let bnd: Vec<usize> = m.boundary_faces().collect();
    writeln!(s, "boundary {}", bnd.len()).unwrap();
    for f in bnd {
        let face = m.face(f);
        let t = if face.tag == BoundaryTag::Dirichlet { 'D' } else { 'N' };
        writeln!(s, "{} {} {}", face.vertices[0], face.vertices[1], t).unwrap();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line with its 1-based number.
    fn next(&mut self) -> Result<(usize, Vec<&'a str>), MeshError> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                return Ok((i + 1, line.split_whitespace().collect()));
            }
        }
        Err(MeshError::Parse {
            line: self.last + 1,
            msg: "unexpected end of file".into(),
        })
    }

    fn section(&mut self, name: &str) -> Result<usize, MeshError> {
        let (line, tok) = self.next()?;
        match tok.as_slice() {
            [kw, n] if *kw == name => n.parse().map_err(|_| MeshError::Parse {
                line,
                msg: format!("bad count in `{name}` header"),
            }),
            _ => Err(MeshError::Parse {
                line,
                msg: format!("expected `{name} <count>`"),
            }),
        }
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, MeshError> {
    tok.parse().map_err(|_| MeshError::Parse {
        line,
        msg: format!("malformed {what} `{tok}`"),
    })
}

pub fn load_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut it = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (line, header) = it.next()?;
    if header != ["hmesh", "1", "dim", "2"] {
        return Err(MeshError::Parse {
            line,
            msg: "expected header `hmesh 1 dim 2`".into(),
        });
    }
    let mut src = MeshSource::default();
    let nv = it.section("vertices")?;
    for _ in 0..nv {
        let (line, tok) = it.next()?;
        if tok.len() != 2 {
            return Err(MeshError::Parse {
                line,
                msg: "vertex line needs `x y`".into(),
            });
        }
        let x: f64 = parse_num(tok[0], line, "coordinate")?;
        let y: f64 = parse_num(tok[1], line, "coordinate")?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(MeshError::Parse {
                line,
                msg: "non-finite coordinate".into(),
            });
        }
        src.vertices.push([x, y]);
    }
    let nc = it.section("cells")?;
    for _ in 0..nc {
        let (line, tok) = it.next()?;
        if tok.len() != 3 {
            return Err(MeshError::Parse {
                line,
                msg: "cell line needs `i j k`".into(),
            });
        }
        let mut c = [0usize; 3];
        for (slot, t) in c.iter_mut().zip(&tok) {
            *slot = parse_num(t, line, "vertex index")?;
        }
        src.cells.push(c);
        src.cell_lines.push(line);
    }
    let nb = it.section("boundary")?;
    for _ in 0..nb {
        let (line, tok) = it.next()?;
        if tok.len() != 3 {
            return Err(MeshError::Parse {
                line,
                msg: "boundary line needs `i j D|N`".into(),
            });
        }
        let a = parse_num(tok[0], line, "vertex index")?;
        let b = parse_num(tok[1], line, "vertex index")?;
        let tag = match tok[2] {
            "D" => BoundaryTag::Dirichlet,
            "N" => BoundaryTag::Neumann,
            t => {
                return Err(MeshError::Parse {
                    line,
                    msg: format!("unknown boundary tag `{t}` (expected D or N)"),
                })
            }
        };
        src.tags.push(([a, b], tag));
        src.tag_lines.push(line);
    }
    if let Ok((line, _)) = it.next() {
        return Err(MeshError::Parse {
            line,
            msg: "trailing content after boundary section".into(),
        });
    }
    Mesh::new(src)
}
