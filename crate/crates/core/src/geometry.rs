//! Planar triangle geometry: barycentric calculus, convex clipping, exact
//! integrals of affine products and plane waves, and quadrature rules.

use num_complex::Complex64;

pub type Point = [f64; 2];

#[inline]
pub fn midpoint(a: Point, b: Point) -> Point {
    // commutative in IEEE arithmetic, so both neighbours of an edge agree bit-for-bit
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

#[inline]
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Barycentric coordinates as affine functions `λ_i(x) = c_i + g_i · x`.
#[derive(Debug, Clone, Copy)]
pub struct Barycentric {
    pub offset: [f64; 3],
    pub grad: [[f64; 2]; 3],
    pub area: f64,
}

impl Barycentric {
    pub fn new(t: &[Point; 3]) -> Self {
        let area = signed_area(t[0], t[1], t[2]);
        let inv = 1.0 / (2.0 * area);
        let mut grad = [[0.0; 2]; 3];
        let mut offset = [0.0; 3];
        for i in 0..3 {
            let p = t[(i + 1) % 3];
            let q = t[(i + 2) % 3];
            grad[i] = [(p[1] - q[1]) * inv, (q[0] - p[0]) * inv];
            offset[i] = (p[0] * q[1] - q[0] * p[1]) * inv;
        }
        Barycentric { offset, grad, area }
    }

    #[inline]
    pub fn eval(&self, x: Point) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = self.offset[i] + self.grad[i][0] * x[0] + self.grad[i][1] * x[1];
        }
        out
    }

    /// Barycentric coordinates of `pts` in this triangle, `m[k][i] = λ_i(pts[k])`.
    #[inline]
    pub fn transfer(&self, pts: &[Point; 3]) -> [[f64; 3]; 3] {
        [self.eval(pts[0]), self.eval(pts[1]), self.eval(pts[2])]
    }
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * s
}

/// Clips `subject` against the convex counter-clockwise polygon `clip`
/// (Sutherland-Hodgman). Returns the (possibly empty) intersection polygon.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let side = |p: Point| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let p = input[j];
            let q = input[(j + 1) % input.len()];
            let sp = side(p);
            let sq = side(q);
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    if polygon_area(&out).abs() <= 0.0 {
        out.clear();
    }
    out
}

/// Fan triangulation of a convex polygon.
pub fn fan(poly: &[Point]) -> impl Iterator<Item = [Point; 3]> + '_ {
    (1..poly.len().saturating_sub(1)).map(move |i| [poly[0], poly[i], poly[i + 1]])
}

/// `∫_t f g dx` for affine `f`, `g` given by their vertex values.
#[inline]
pub fn p1_product(area: f64, f: [f64; 3], g: [f64; 3]) -> f64 {
    let dot = f[0] * g[0] + f[1] * g[1] + f[2] * g[2];
    let sf = f[0] + f[1] + f[2];
    let sg = g[0] + g[1] + g[2];
    area / 12.0 * (dot + sf * sg)
}

/// `∫_T exp(i k·x) dx`, exact up to roundoff.
///
/// Uses the Taylor expansion of the reference-triangle integral, which is
/// stable when the phase variation over the triangle is at most one radian;
/// larger triangles are split into four congruent children first.
pub fn plane_wave_integral(t: &[Point; 3], k: [f64; 2]) -> Complex64 {
    let e1 = [t[1][0] - t[0][0], t[1][1] - t[0][1]];
    let e2 = [t[2][0] - t[0][0], t[2][1] - t[0][1]];
    let a = k[0] * e1[0] + k[1] * e1[1];
    let b = k[0] * e2[0] + k[1] * e2[1];
    if a.abs().max(b.abs()) > 1.0 {
        let m01 = midpoint(t[0], t[1]);
        let m12 = midpoint(t[1], t[2]);
        let m20 = midpoint(t[2], t[0]);
        return plane_wave_integral(&[t[0], m01, m20], k)
            + plane_wave_integral(&[m01, t[1], m12], k)
            + plane_wave_integral(&[m20, m12, t[2]], k)
            + plane_wave_integral(&[m12, m20, m01], k);
    }
    // ∫_ref exp(i(a s + b t)) = Σ_n i^n h_n(a, b) / (n + 2)!,  h_n complete homogeneous
    let mut h = 1.0;
    let mut bpow = 1.0;
    let mut fact = 2.0;
    let mut sum = Complex64::new(0.5, 0.0);
    let mut ipow = Complex64::new(1.0, 0.0);
    for n in 1..40 {
        bpow *= b;
        h = a * h + bpow;
        fact *= (n + 2) as f64;
        ipow *= Complex64::new(0.0, 1.0);
        sum += ipow * (h / fact);
        // |h_n| <= n + 1 when |a|, |b| <= 1; individual terms may vanish early
        if (n + 1) as f64 / fact < 1e-18 {
            break;
        }
    }
    let phase = k[0] * t[0][0] + k[1] * t[0][1];
    let jac = 2.0 * signed_area(t[0], t[1], t[2]).abs();
    Complex64::from_polar(jac, phase) * sum
}

/// Degree-5, 7-point rule on a triangle: barycentric points and weights
/// summing to one.
pub fn dunavant7() -> [([f64; 3], f64); 7] {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let b1 = (9.0 + 2.0 * s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let b2 = (9.0 - 2.0 * s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let w2 = (155.0 + s15) / 1200.0;
    [
        ([1.0 / 3.0; 3], 0.225),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Collapsed tensor Gauss rule with `n²` points on a triangle; barycentric
/// points and weights summing to one. Exact for polynomials of degree `2n - 2`.
pub fn collapsed_gauss(n: usize) -> Vec<([f64; 3], f64)> {
    let gl = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for &(xu, wu) in &gl {
        let u = 0.5 * (xu + 1.0);
        for &(xv, wv) in &gl {
            let v = 0.5 * (xv + 1.0) * (1.0 - u);
            // reference area 1/2, Jacobian (1 - u)/4
            let w = 0.25 * wu * wv * (1.0 - u) * 2.0;
            out.push(([1.0 - u - v, u, v], w));
        }
    }
    out
}

#[inline]
pub fn bary_point(t: &[Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * t[0][0] + l[1] * t[1][0] + l[2] * t[2][0],
        l[0] * t[0][1] + l[1] * t[1][1] + l[2] * t[2][1],
    ]
}

/// Quadrature of a scalar function over a triangle with the given rule.
pub fn integrate_rule(t: &[Point; 3], rule: &[([f64; 3], f64)], f: impl Fn(Point) -> f64) -> f64 {
    let area = signed_area(t[0], t[1], t[2]).abs();
    area * rule.iter().map(|&(l, w)| w * f(bary_point(t, l))).sum::<f64>()
}
