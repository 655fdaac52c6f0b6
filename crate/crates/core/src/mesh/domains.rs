use std::collections::HashMap;

use crate::error::{Error, Result};

use super::Mesh;

/// Computational domains of the benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `(0,1)²`
    UnitSquare,
    /// `(-1,1)² \ (-1,0]²`
    LShaped,
    /// `(-1,1)²` minus the thin wedge `conv{(0,0), (-1,δ), (-1,-δ)}`.
    Slit { delta: f64 },
}

impl Domain {
    pub fn area(&self) -> f64 {
        match *self {
            Domain::UnitSquare => 1.0,
            Domain::LShaped => 3.0,
            Domain::Slit { delta } => 4.0 - delta,
        }
    }

    fn blocks(&self) -> &'static [[i32; 2]] {
        match self {
            Domain::UnitSquare => &[[0, 0]],
            Domain::LShaped => &[[0, -1], [-1, 0], [0, 0]],
            Domain::Slit { .. } => &[[-1, -1], [0, -1], [-1, 0], [0, 0]],
        }
    }
}

/// Structured mesh of right-angled triangles with `target_count` elements.
///
/// The domain is a union of unit blocks, each cut into `n × n` squares whose
/// diagonals form a union-jack pattern about the block centre, so that no
/// triangle has two edges on the boundary once `n ≥ 2`. The hypotenuse of
/// every triangle is its refinement edge.
pub fn initial_mesh(domain: Domain, target_count: usize) -> Result<Mesh> {
    let blocks = domain.blocks();
    let per_cell = 2 * blocks.len();
    let n = (target_count / per_cell.max(1)) as f64;
    let n = n.sqrt().round() as usize;
    if n == 0 || per_cell * n * n != target_count {
        return Err(Error::Config(format!(
            "{domain:?} supports triangle counts {per_cell}·n², got {target_count}"
        )));
    }
    if let Domain::Slit { delta } = domain {
        if !(delta >= 0.0 && delta < 0.5 / n as f64) {
            return Err(Error::Config(format!("slit width {delta} out of range")));
        }
    }

    let ni = n as i32;
    let mut ids: HashMap<(i32, i32, bool), u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vertex = |i: i32, j: i32, upper: bool| -> u32 {
        // vertices on the slit are duplicated, one copy per face
        let on_slit = matches!(domain, Domain::Slit { .. }) && j == 0 && i < 0;
        let key = (i, j, on_slit && upper);
        *ids.entry(key).or_insert_with(|| {
            let x = i as f64 / n as f64;
            let mut y = j as f64 / n as f64;
            if let (true, Domain::Slit { delta }) = (on_slit, domain) {
                y = if upper { -delta * x } else { delta * x };
            }
            vertices.push([x, y]);
            (vertices.len() - 1) as u32
        })
    };

    let mut triangles = Vec::with_capacity(target_count);
    for b in blocks {
        let upper = b[1] >= 0;
        for cj in 0..ni {
            for ci in 0..ni {
                let i = b[0] * ni + ci;
                let j = b[1] * ni + cj;
                let p00 = vertex(i, j, upper);
                let p10 = vertex(i + 1, j, upper);
                let p11 = vertex(i + 1, j + 1, upper);
                let p01 = vertex(i, j + 1, upper);
                let dx = 2 * ci + 1 - ni;
                let dy = 2 * cj + 1 - ni;
                if dx * dy > 0 {
                    triangles.push([p11, p00, p10]);
                    triangles.push([p00, p11, p01]);
                } else {
                    triangles.push([p10, p01, p00]);
                    triangles.push([p01, p10, p11]);
                }
            }
        }
    }
    Mesh::initial(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_areas() {
        let m = initial_mesh(Domain::UnitSquare, 512).unwrap();
        assert_eq!(m.n_triangles(), 512);
        assert_eq!(m.n_vertices(), 289);
        assert_eq!(m.n_dofs(), 225);
        let l = initial_mesh(Domain::LShaped, 384).unwrap();
        assert_eq!(l.n_triangles(), 384);
        assert!((l.total_area() - 3.0).abs() < 1e-13);
        let d = Domain::Slit { delta: 0.005 };
        let s = initial_mesh(d, 512).unwrap();
        assert_eq!(s.n_triangles(), 512);
        assert!((s.total_area() - d.area()).abs() < 1e-13);
        assert!(matches!(initial_mesh(Domain::UnitSquare, 100), Err(Error::Config(_))));
    }

    #[test]
    fn two_triangle_square() {
        let m = initial_mesh(Domain::UnitSquare, 2).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_dofs(), 0);
        assert_eq!(m.edges().len(), 5);
    }

    #[test]
    fn refinement_edge_is_hypotenuse() {
        for (d, c) in [
            (Domain::UnitSquare, 128),
            (Domain::LShaped, 96),
            (Domain::Slit { delta: 0.0 }, 128),
        ] {
            let m = initial_mesh(d, c).unwrap();
            for t in 0..m.n_triangles() {
                let p = m.points(t);
                let len = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
                assert!(len(p[0], p[1]) > len(p[1], p[2]));
                assert!(len(p[0], p[1]) > len(p[2], p[0]));
            }
        }
    }

    #[test]
    fn slit_faces_are_boundary() {
        let m = initial_mesh(Domain::Slit { delta: 0.005 }, 512).unwrap();
        // both copies of (-1/2, 0) are boundary vertices
        let copies: Vec<usize> = (0..m.n_vertices())
            .filter(|&v| (m.vertices()[v][0] + 0.5).abs() < 1e-15 && m.vertices()[v][1].abs() < 0.01)
            .collect();
        assert_eq!(copies.len(), 2);
        assert!(copies.iter().all(|&v| m.is_boundary(v)));
        // the interior of the right half of the x-axis is not
        let v = (0..m.n_vertices())
            .find(|&v| m.vertices()[v] == [0.5, 0.0])
            .unwrap();
        assert!(!m.is_boundary(v));
    }

    #[test]
    fn no_triangle_with_two_boundary_edges() {
        for (d, c) in [(Domain::UnitSquare, 512), (Domain::LShaped, 384), (Domain::Slit { delta: 0.005 }, 512)] {
            let m = initial_mesh(d, c).unwrap();
            for t in 0..m.n_triangles() {
                let nb = m
                    .triangle_edges(t)
                    .iter()
                    .filter(|&&e| m.is_boundary_edge(e as usize))
                    .count();
                assert!(nb <= 1, "{d:?} triangle {t}");
            }
        }
    }
}
