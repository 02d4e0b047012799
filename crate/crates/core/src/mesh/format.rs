//! Plain-text mesh format.
//!
//! ```text
//! VAGMESH 2
//! VERTICES n
//! x y            (n lines)
//! CELLS m
//! k i1 ... ik [tag]   (m lines, 1-based vertex indices, counterclockwise)
//! CENTERS m      (optional block)
//! x y            (m lines)
//! ```
//!
//! `#` starts a comment; blank lines are ignored. Serialization emits 17
//! significant digits so a parse/serialize/parse round trip is bit-exact.

use nalgebra::Point2;

use crate::error::{Error, Result};

use super::{CellSpec, Mesh};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate() }
    }

    /// Next non-empty line with comments stripped, with its 1-based number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    token.parse().map_err(|_| Error::MeshParse {
        line,
        message: format!("expected a number, found {token:?}"),
    })
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| Error::MeshParse {
        line,
        message: format!("expected a nonnegative integer, found {token:?}"),
    })
}

/// Parses the text format above and validates the mesh.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines::new(text);

    let (ln, header) = lines
        .next_content()
        .ok_or(Error::MeshParse { line: 1, message: "empty file".into() })?;
    if header != "VAGMESH 2" {
        return Err(Error::MeshParse {
            line: ln,
            message: format!("expected header \"VAGMESH 2\", found {header:?}"),
        });
    }

    let (ln, decl) = lines.next_content().ok_or(Error::MeshParse {
        line: ln,
        message: "missing VERTICES block".into(),
    })?;
    let n_vertices = match decl.split_whitespace().collect::<Vec<_>>()[..] {
        ["VERTICES", count] => parse_usize(count, ln)?,
        _ => {
            return Err(Error::MeshParse {
                line: ln,
                message: format!("expected \"VERTICES n\", found {decl:?}"),
            })
        }
    };

    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (ln, line) = lines.next_content().ok_or(Error::MeshParse {
            line: 0,
            message: "unexpected end of file in VERTICES block".into(),
        })?;
        let mut tok = line.split_whitespace();
        let (x, y) = match (tok.next(), tok.next(), tok.next()) {
            (Some(x), Some(y), None) => (parse_f64(x, ln)?, parse_f64(y, ln)?),
            _ => {
                return Err(Error::MeshParse {
                    line: ln,
                    message: format!("expected \"x y\", found {line:?}"),
                })
            }
        };
        vertices.push(Point2::new(x, y));
    }

    let (ln, decl) = lines.next_content().ok_or(Error::MeshParse {
        line: 0,
        message: "missing CELLS block".into(),
    })?;
    let n_cells = match decl.split_whitespace().collect::<Vec<_>>()[..] {
        ["CELLS", count] => parse_usize(count, ln)?,
        _ => {
            return Err(Error::MeshParse {
                line: ln,
                message: format!("expected \"CELLS m\", found {decl:?}"),
            })
        }
    };

    let mut specs = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let (ln, line) = lines.next_content().ok_or(Error::MeshParse {
            line: 0,
            message: "unexpected end of file in CELLS block".into(),
        })?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let k = parse_usize(tokens[0], ln)?;
        if k < 3 {
            return Err(Error::MeshParse {
                line: ln,
                message: format!("cell must have at least 3 vertices, found {k}"),
            });
        }
        if tokens.len() != 1 + k && tokens.len() != 2 + k {
            return Err(Error::MeshParse {
                line: ln,
                message: format!(
                    "expected {k} vertex indices with an optional tag, found {} tokens",
                    tokens.len() - 1
                ),
            });
        }
        let mut ring = Vec::with_capacity(k);
        for t in &tokens[1..1 + k] {
            let one_based = parse_usize(t, ln)?;
            if one_based == 0 {
                return Err(Error::MeshParse {
                    line: ln,
                    message: "vertex indices are 1-based".into(),
                });
            }
            ring.push(one_based - 1);
        }
        let tag = if tokens.len() == 2 + k {
            parse_usize(tokens[1 + k], ln)? as u32
        } else {
            1
        };
        specs.push(CellSpec { vertices: ring, center: None, tag });
    }

    // optional CENTERS block
    if let Some((ln, decl)) = lines.next_content() {
        match decl.split_whitespace().collect::<Vec<_>>()[..] {
            ["CENTERS", count] => {
                let m = parse_usize(count, ln)?;
                if m != n_cells {
                    return Err(Error::MeshParse {
                        line: ln,
                        message: format!(
                            "CENTERS count {m} does not match CELLS count {n_cells}"
                        ),
                    });
                }
                for spec in specs.iter_mut() {
                    let (ln, line) = lines.next_content().ok_or(Error::MeshParse {
                        line: 0,
                        message: "unexpected end of file in CENTERS block".into(),
                    })?;
                    let mut tok = line.split_whitespace();
                    let (x, y) = match (tok.next(), tok.next(), tok.next()) {
                        (Some(x), Some(y), None) => {
                            (parse_f64(x, ln)?, parse_f64(y, ln)?)
                        }
                        _ => {
                            return Err(Error::MeshParse {
                                line: ln,
                                message: format!("expected \"x y\", found {line:?}"),
                            })
                        }
                    };
                    spec.center = Some(Point2::new(x, y));
                }
            }
            _ => {
                return Err(Error::MeshParse {
                    line: ln,
                    message: format!("unexpected trailing content {decl:?}"),
                })
            }
        }
        if let Some((ln, extra)) = lines.next_content() {
            return Err(Error::MeshParse {
                line: ln,
                message: format!("unexpected trailing content {extra:?}"),
            });
        }
    }

    Mesh::new(vertices, specs)
}

fn fmt17(x: f64) -> String {
    // 17 significant digits; enough for an exact f64 round trip
    format!("{x:.16e}")
}

/// Serializes a mesh in the format read by [`parse_mesh`]. Centers are always
/// written so the round trip is bit-identical.
pub fn serialize_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("VAGMESH 2\n");
    out.push_str(&format!("VERTICES {}\n", mesh.n_vertices()));
    for v in mesh.vertices() {
        out.push_str(&format!("{} {}\n", fmt17(v.x), fmt17(v.y)));
    }
    out.push_str(&format!("CELLS {}\n", mesh.n_cells()));
    for cell in mesh.cells() {
        out.push_str(&format!("{}", cell.n_vertices()));
        for &v in &cell.vertices {
            out.push_str(&format!(" {}", v + 1));
        }
        out.push_str(&format!(" {}\n", cell.tag));
    }
    out.push_str(&format!("CENTERS {}\n", mesh.n_cells()));
    for cell in mesh.cells() {
        out.push_str(&format!("{} {}\n", fmt17(cell.center.x), fmt17(cell.center.y)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT_SQUARE: &str = "\
VAGMESH 2
# a single unit-square cell
VERTICES 4
0 0
1 0
1 1
0 1
CELLS 1
4 1 2 3 4
CENTERS 1
0.5 0.5
";

    #[test]
    fn parses_single_cell() {
        let mesh = parse_mesh(UNIT_SQUARE).unwrap();
        assert_eq!(mesh.n_cells(), 1);
        assert_eq!(mesh.n_vertices(), 4);
        assert_eq!(mesh.boundary_vertices().count(), 4);
        assert_eq!(mesh.cell(0).center, Point2::new(0.5, 0.5));
    }

    #[test]
    fn parse_error_reports_line() {
        let bad = "VAGMESH 2\nVERTICES 2\n0 0\n1 zz\nCELLS 0\n";
        match parse_mesh(bad) {
            Err(Error::MeshParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_star_shaped_cell_names_cell() {
        let bad = "\
VAGMESH 2
VERTICES 4
0 0
4 0
2 3
2 0.5
CELLS 1
4 1 2 3 4
";
        match parse_mesh(bad) {
            Err(Error::NonStarShaped { cell }) => assert_eq!(cell, 0),
            other => panic!("expected star-shape error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let mesh = parse_mesh(UNIT_SQUARE).unwrap();
        let text = serialize_mesh(&mesh);
        let reparsed = parse_mesh(&text).unwrap();
        assert_eq!(mesh, reparsed);
        assert_eq!(text, serialize_mesh(&reparsed));
    }
}
