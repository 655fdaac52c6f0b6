use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::Mesh;

/// Plain-text dump: a line `nv nt`, then `nv` lines `x y boundary_flag`,
/// then `nt` lines `v0 v1 v2`.
pub fn write_mesh(mesh: &Mesh, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{} {}", mesh.n_vertices(), mesh.n_triangles())?;
    for (v, p) in mesh.vertices().iter().enumerate() {
        writeln!(out, "{:e} {:e} {}", p[0], p[1], mesh.is_boundary(v) as u8)?;
    }
    for t in mesh.triangles() {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Reads a dump written by [`write_mesh`]. The result is a new initial mesh
/// whose boundary flags must agree with the stored ones.
pub fn read_mesh(input: impl BufRead) -> Result<Mesh> {
    let mut lines = input.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((i, Err(e))) => Err(Error::Parse { line: i + 1, message: e.to_string() }),
            None => Err(Error::Parse { line: 0, message: format!("unexpected end of input, expected {what}") }),
        }
    };
    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    let (ln, header) = next("header")?;
    let counts: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse().map_err(|e| parse_err(ln, format!("{e}"))))
        .collect::<Result<_>>()?;
    let [nv, nt] = counts[..] else {
        return Err(parse_err(ln, "header must be `nv nt`".into()));
    };

    let mut vertices = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next("vertex")?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(ln, "vertex line must be `x y flag`".into()));
        }
        let x: f64 = f[0].parse().map_err(|e| parse_err(ln, format!("{e}")))?;
        let y: f64 = f[1].parse().map_err(|e| parse_err(ln, format!("{e}")))?;
        let b: u8 = f[2].parse().map_err(|e| parse_err(ln, format!("{e}")))?;
        vertices.push([x, y]);
        flags.push(b != 0);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = next("triangle")?;
        let v: Vec<u32> = l
            .split_whitespace()
            .map(|s| s.parse().map_err(|e| parse_err(ln, format!("{e}"))))
            .collect::<Result<_>>()?;
        let [a, b, c] = v[..] else {
            return Err(parse_err(ln, "triangle line must be `v0 v1 v2`".into()));
        };
        triangles.push([a, b, c]);
    }
    let mesh = Mesh::initial(vertices, triangles)?;
    if mesh.boundary_flags() != flags.as_slice() {
        return Err(Error::Structure("stored boundary flags disagree with the mesh topology".into()));
    }
    Ok(mesh)
}
