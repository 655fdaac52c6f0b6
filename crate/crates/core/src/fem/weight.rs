use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{
    bary_point, clip_convex, collapsed_gauss, fan, midpoint, polygon_area, signed_area, Barycentric, Point,
};
use crate::mesh::{ElemKey, Mesh};
use crate::problem::WeightSpec;

/// Moments `∫_t w ξ^α dx` for `|α| ≤ 2` in local coordinates
/// `ξ = (x - center) / scale`, ordered `1, ξ₁, ξ₂, ξ₁², ξ₁ξ₂, ξ₂²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub center: Point,
    pub scale: f64,
    pub m: [f64; 6],
}

impl Moments {
    #[inline]
    fn local(&self, offset: f64, grad: [f64; 2]) -> (f64, [f64; 2]) {
        (
            offset + grad[0] * self.center[0] + grad[1] * self.center[1],
            [grad[0] * self.scale, grad[1] * self.scale],
        )
    }

    /// `∫ w f` for affine `f(x) = offset + grad·x`.
    #[inline]
    pub fn integrate(&self, offset: f64, grad: [f64; 2]) -> f64 {
        let (a, b) = self.local(offset, grad);
        a * self.m[0] + b[0] * self.m[1] + b[1] * self.m[2]
    }

    /// `∫ w f g` for affine `f`, `g`.
    #[inline]
    pub fn integrate_product(&self, f: (f64, [f64; 2]), g: (f64, [f64; 2])) -> f64 {
        let (a, b) = self.local(f.0, f.1);
        let (c, d) = self.local(g.0, g.1);
        a * c * self.m[0]
            + (a * d[0] + c * b[0]) * self.m[1]
            + (a * d[1] + c * b[1]) * self.m[2]
            + b[0] * d[0] * self.m[3]
            + (b[0] * d[1] + b[1] * d[0]) * self.m[4]
            + b[1] * d[1] * self.m[5]
    }

    /// Moments of the constant weight `scale_w` over triangle `t`.
    fn of_triangle(t: &[Point; 3], center: Point, scale: f64, value: f64) -> [f64; 6] {
        let area = signed_area(t[0], t[1], t[2]).abs() * value;
        let xi: [[f64; 2]; 3] = std::array::from_fn(|i| {
            [(t[i][0] - center[0]) / scale, (t[i][1] - center[1]) / scale]
        });
        let s = [xi[0][0] + xi[1][0] + xi[2][0], xi[0][1] + xi[1][1] + xi[2][1]];
        let q = |a: usize, b: usize| {
            let dot: f64 = (0..3).map(|i| xi[i][a] * xi[i][b]).sum();
            area / 12.0 * (dot + s[a] * s[b])
        };
        [area, area * s[0] / 3.0, area * s[1] / 3.0, q(0, 0), q(0, 1), q(1, 1)]
    }
}

/// Bump weight tabulated on a fixed depth of the bisection forest so that
/// element moments are additive under refinement.
#[derive(Debug)]
struct Mollifier {
    center: Point,
    radius: f64,
    norm: f64,
    depth: u8,
    // per root: sorted (path, prefix sums of unnormalized moments)
    roots: Vec<Option<(Vec<u64>, Vec<[f64; 6]>)>>,
}

const MOLLIFIER_DEPTH: u8 = 10;

impl Mollifier {
    fn new(t0: &Mesh, center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("mollifier radius must be positive, got {radius}")));
        }
        let mut m = Mollifier {
            center,
            radius,
            norm: 1.0,
            depth: MOLLIFIER_DEPTH,
            roots: vec![None; t0.n_triangles()],
        };
        let rule = collapsed_gauss(6);
        let mut total = 0.0;
        for t in 0..t0.n_triangles() {
            let pts = t0.points(t);
            if !m.touches(&pts) {
                continue;
            }
            let mut leaves = Vec::new();
            descend(pts, ElemKey::root(t as u32), m.depth, &mut leaves);
            let mut paths = Vec::with_capacity(leaves.len());
            let mut prefix = Vec::with_capacity(leaves.len() + 1);
            let mut acc = [0.0; 6];
            prefix.push(acc);
            for (key, p) in leaves {
                let mom = m.quadrature(&p, &rule);
                for k in 0..6 {
                    acc[k] += mom[k];
                }
                paths.push(key.path);
                prefix.push(acc);
            }
            total += acc[0];
            m.roots[t] = Some((paths, prefix));
        }
        if !(total > 0.0) {
            return Err(Error::Config("mollifier support does not meet the domain".into()));
        }
        m.norm = 1.0 / total;
        Ok(m)
    }

    fn touches(&self, t: &[Point; 3]) -> bool {
        // distance from the centre to the triangle is below the radius
        let c = self.center;
        let b = Barycentric::new(t);
        if b.eval(c).iter().all(|&l| l >= 0.0) {
            return true;
        }
        (0..3).any(|i| {
            let (p, q) = (t[i], t[(i + 1) % 3]);
            let d = [q[0] - p[0], q[1] - p[1]];
            let s = (((c[0] - p[0]) * d[0] + (c[1] - p[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
            let x = [p[0] + s * d[0], p[1] + s * d[1]];
            (x[0] - c[0]).hypot(x[1] - c[1]) < self.radius
        })
    }

    fn bump(&self, x: Point) -> f64 {
        let r2 = self.radius * self.radius;
        let d2 = (x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2);
        if d2 >= r2 {
            0.0
        } else {
            (-r2 / (r2 - d2)).exp()
        }
    }

    fn quadrature(&self, t: &[Point; 3], rule: &[([f64; 3], f64)]) -> [f64; 6] {
        let area = signed_area(t[0], t[1], t[2]).abs();
        let mut out = [0.0; 6];
        for &(l, w) in rule {
            let x = bary_point(t, l);
            let f = self.bump(x) * w * area;
            if f == 0.0 {
                continue;
            }
            let xi = [(x[0] - self.center[0]) / self.radius, (x[1] - self.center[1]) / self.radius];
            out[0] += f;
            out[1] += f * xi[0];
            out[2] += f * xi[1];
            out[3] += f * xi[0] * xi[0];
            out[4] += f * xi[0] * xi[1];
            out[5] += f * xi[1] * xi[1];
        }
        out
    }

    fn moments(&self, t: &[Point; 3], key: ElemKey) -> Option<[f64; 6]> {
        let (paths, prefix) = self.roots.get(key.root as usize)?.as_ref()?;
        let raw = if key.depth <= self.depth {
            let lo = paths.partition_point(|&p| p < key.path);
            let hi = paths.partition_point(|&p| p <= key.path_upper());
            let mut s = [0.0; 6];
            for k in 0..6 {
                s[k] = prefix[hi][k] - prefix[lo][k];
            }
            s
        } else {
            if !self.touches(t) {
                return None;
            }
            self.quadrature(t, &collapsed_gauss(6))
        };
        if raw[0] == 0.0 {
            return None;
        }
        Some(raw.map(|v| v * self.norm))
    }
}

fn descend(t: [Point; 3], key: ElemKey, depth: u8, out: &mut Vec<(ElemKey, [Point; 3])>) {
    if key.depth == depth {
        out.push((key, t));
        return;
    }
    let [a, b, c] = t;
    let m = midpoint(a, b);
    descend([c, a, m], key.child(0).expect("depth within limit"), depth, out);
    descend([b, c, m], key.child(1).expect("depth within limit"), depth, out);
}

#[derive(Debug, Clone)]
enum Kind {
    Polygon { poly: Vec<Point>, value: f64 },
    Mollifier(Arc<Mollifier>),
}

/// Weight function prepared for exact-moment integration on one mesh family.
#[derive(Debug, Clone)]
pub struct Weight {
    kind: Kind,
}

impl Weight {
    /// `χ_P` for a convex counter-clockwise polygon `P`.
    pub fn indicator(poly: &[Point]) -> Result<Weight> {
        if poly.len() < 3 || polygon_area(poly) <= 0.0 {
            return Err(Error::Config("weight polygon must be convex and counter-clockwise".into()));
        }
        Ok(Weight { kind: Kind::Polygon { poly: poly.to_vec(), value: 1.0 } })
    }

    /// Weight described by `spec`, normalized to unit integral. `t0` is the
    /// initial mesh of the family the weight will be integrated on.
    pub fn new(spec: &WeightSpec, t0: &Mesh) -> Result<Weight> {
        match spec {
            WeightSpec::Polygon(poly) => {
                let mut w = Weight::indicator(poly)?;
                if let Kind::Polygon { value, .. } = &mut w.kind {
                    *value = 1.0 / polygon_area(poly);
                }
                Ok(w)
            }
            WeightSpec::Mollifier { center, radius } => Ok(Weight {
                kind: Kind::Mollifier(Arc::new(Mollifier::new(t0, *center, *radius)?)),
            }),
        }
    }

    pub fn eval(&self, x: Point) -> f64 {
        match &self.kind {
            Kind::Polygon { poly, value } => {
                let n = poly.len();
                let inside = (0..n).all(|i| signed_area(poly[i], poly[(i + 1) % n], x) >= 0.0);
                if inside {
                    *value
                } else {
                    0.0
                }
            }
            Kind::Mollifier(m) => m.bump(x) * m.norm,
        }
    }

    /// Moments of the weight over element `t` with genealogy `key`;
    /// `None` when the weight vanishes on it.
    pub fn moments(&self, t: &[Point; 3], key: ElemKey) -> Option<Moments> {
        match &self.kind {
            Kind::Polygon { poly, value } => {
                let center = [(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0];
                let n = poly.len();
                let inside = |x: Point| (0..n).all(|i| signed_area(poly[i], poly[(i + 1) % n], x) >= 0.0);
                let m = if t.iter().all(|&x| inside(x)) {
                    Moments::of_triangle(t, center, 1.0, *value)
                } else {
                    let clipped = clip_convex(t, poly);
                    if clipped.is_empty() {
                        return None;
                    }
                    let mut acc = [0.0; 6];
                    for s in fan(&clipped) {
                        let part = Moments::of_triangle(&s, center, 1.0, *value);
                        for k in 0..6 {
                            acc[k] += part[k];
                        }
                    }
                    acc
                };
                (m[0] != 0.0).then_some(Moments { center, scale: 1.0, m })
            }
            Kind::Mollifier(mol) => mol.moments(t, key).map(|m| Moments {
                center: mol.center,
                scale: mol.radius,
                m,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::gauss_legendre;
    use crate::mesh::{initial_mesh, refine_nvb, uniform_refine, Domain, new_interior_vertices};

    fn slit() -> Mesh {
        initial_mesh(Domain::Slit { delta: 0.005 }, 512).unwrap()
    }

    fn mollifier(t0: &Mesh) -> Weight {
        Weight::new(&WeightSpec::Mollifier { center: [0.4, -0.5], radius: 0.15 }, t0).unwrap()
    }

    #[test]
    fn mollifier_is_normalized() {
        let t0 = slit();
        let w = mollifier(&t0);
        // independent polar Gauss quadrature over the disk
        let (r, c) = (0.15, [0.4, -0.5]);
        let gl = gauss_legendre(60);
        let mut s = 0.0;
        for &(u, wu) in &gl {
            let rho = 0.5 * (u + 1.0) * r;
            for &(v, wv) in &gl {
                let phi = std::f64::consts::PI * (v + 1.0);
                let x = [c[0] + rho * phi.cos(), c[1] + rho * phi.sin()];
                s += 0.5 * r * wu * std::f64::consts::PI * wv * rho * w.eval(x);
            }
        }
        assert!((s - 1.0).abs() < 1e-8, "{s}");
        assert_eq!(w.eval([0.55, -0.5]), 0.0);
        assert!(w.eval([0.5499, -0.5]) < 1e-10);
    }

    #[test]
    fn mollifier_moments_are_additive() {
        let t0 = slit();
        let w = mollifier(&t0);
        let mut m = t0.clone();
        for _ in 0..7 {
            // refine near the centre to exceed the tabulated depth
            let marks: Vec<[u32; 2]> = new_interior_vertices(&m)
                .into_iter()
                .filter(|nv| {
                    let p = m.vertices()[nv.edge[0] as usize];
                    (p[0] - 0.4).hypot(p[1] + 0.5) < 0.1
                })
                .map(|nv| nv.edge)
                .collect();
            m = refine_nvb(&m, &marks).unwrap();
        }
        let m = uniform_refine(&uniform_refine(&m).unwrap()).unwrap();
        assert!(m.keys().iter().any(|k| k.depth > MOLLIFIER_DEPTH));
        let total: f64 = (0..m.n_triangles())
            .filter_map(|t| w.moments(&m.points(t), m.keys()[t]))
            .map(|mm| mm.m[0])
            .sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn polygon_moments_exact() {
        let w = Weight::new(&WeightSpec::Polygon(vec![[0.0, 0.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]), &initial_mesh(Domain::UnitSquare, 2).unwrap()).unwrap();
        let t = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let key = ElemKey::root(0);
        let m = w.moments(&t, key).unwrap();
        // ∫_{[0,1/2]²} 4 x dx = 1/4, ∫ 4 x y = 1/16
        let b = Barycentric::new(&t);
        assert!((m.integrate(0.0, [1.0, 0.0]) - 0.25).abs() < 1e-15);
        assert!((m.integrate_product((0.0, [1.0, 0.0]), (0.0, [0.0, 1.0])) - 1.0 / 16.0).abs() < 1e-15);
        assert!((m.integrate(b.offset[0], b.grad[0]) - 0.5).abs() < 1e-15);
        let far = [[2.0, 2.0], [3.0, 2.0], [2.0, 3.0]];
        assert!(w.moments(&far, key).is_none());
    }
}
