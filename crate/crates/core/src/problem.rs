//! Parametric diffusion coefficient `a(x, y) = a₀ + Σ yₘ aₘ(x)` with planar
//! Fourier modes, right-hand sides, and the benchmark setups.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{plane_wave_integral, Point};
use crate::mesh::Domain;

pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Affine coefficient with `a₀ ≡ 1` and
/// `aₘ(x) = A m⁻² cos(2π β₁(m) x₁) cos(2π β₂(m) x₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientField {
    pub amplitude: f64,
}

impl CoefficientField {
    /// Field with `τ = A ζ(2)` equal to `tau`.
    pub fn with_tau(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Config(format!("tau must lie in (0, 1), got {tau}")));
        }
        Ok(CoefficientField { amplitude: tau / ZETA2 })
    }

    pub fn tau(&self) -> f64 {
        self.amplitude * ZETA2
    }

    /// Ellipticity constants `(λ, Λ) = (1 - τ, 1 + τ)`.
    pub fn bounds(&self) -> (f64, f64) {
        (1.0 - self.tau(), 1.0 + self.tau())
    }

    /// `(k(m), β₁(m), β₂(m))`.
    pub fn mode(m: usize) -> Result<(u64, u64, u64)> {
        if m == 0 {
            return Err(Error::Precondition("mode index must be positive".into()));
        }
        let m = m as u64;
        // largest k with k(k+1)/2 <= m
        let mut k = ((0.25 + 2.0 * m as f64).sqrt() - 0.5) as u64;
        while k * (k + 1) / 2 > m {
            k -= 1;
        }
        while (k + 1) * (k + 2) / 2 <= m {
            k += 1;
        }
        let b1 = m - k * (k + 1) / 2;
        Ok((k, b1, k - b1))
    }

    pub fn eval(&self, m: usize, x: Point) -> Result<f64> {
        if m == 0 {
            return Ok(1.0);
        }
        let (_, b1, b2) = Self::mode(m)?;
        let tau = 2.0 * std::f64::consts::PI;
        Ok(self.amplitude / (m * m) as f64
            * (tau * b1 as f64 * x[0]).cos()
            * (tau * b2 as f64 * x[1]).cos())
    }

    /// `∫_T aₘ dx`, exact up to roundoff (`m = 0` gives `|T|`).
    pub fn integrate(&self, m: usize, t: &[Point; 3]) -> f64 {
        if m == 0 {
            return crate::geometry::signed_area(t[0], t[1], t[2]).abs();
        }
        let (_, b1, b2) = Self::mode(m).expect("m > 0");
        let tau = 2.0 * std::f64::consts::PI;
        let kp = [tau * b1 as f64, tau * b2 as f64];
        let km = [tau * b1 as f64, -tau * b2 as f64];
        // cos a cos b = (cos(a+b) + cos(a-b)) / 2
        let s: Complex64 = plane_wave_integral(t, kp) + plane_wave_integral(t, km);
        self.amplitude / (m * m) as f64 * 0.5 * s.re
    }
}

/// Deterministic right-hand side functional `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsSpec {
    /// `F(v) = ∫_D v dx`
    ConstantOne,
    /// `F(v) = -∫_{T_f} ∂v/∂x₁ dx`
    Directional { region: [Point; 3] },
}

/// Quantity of interest of a setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GoalKind {
    /// `E[∫ w u²]`
    WeightedL2Sq,
    /// `E[∫ w u (∂₁u + ∂₂u)]`
    Convection,
    /// `100 E[(∫ w u)²]`
    SecondMoment,
    /// `100 Var[∫ w u]`
    Variance,
}

/// Weight function `w` of a goal functional.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// `χ_S / |S|` for a convex counter-clockwise polygon `S`.
    Polygon(Vec<Point>),
    /// Normalized bump `C exp(-r² / (r² - |x - x₀|²))` on the disk `B(x₀, r)`.
    Mollifier { center: Point, radius: f64 },
}

/// Complete specification of one benchmark problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub setup: u8,
    pub domain: Domain,
    pub initial_triangles: usize,
    pub rhs: RhsSpec,
    pub coefficient: CoefficientField,
    pub goal: GoalKind,
    pub weight: WeightSpec,
}

pub const SLIT_DELTA: f64 = 0.005;

impl ProblemSpec {
    pub fn setup(id: u8) -> Result<ProblemSpec> {
        let coefficient = CoefficientField::with_tau(0.9)?;
        let spec = match id {
            1 => ProblemSpec {
                setup: 1,
                domain: Domain::UnitSquare,
                initial_triangles: 512,
                rhs: RhsSpec::ConstantOne,
                coefficient,
                goal: GoalKind::WeightedL2Sq,
                weight: WeightSpec::Polygon(vec![
                    [5.0 / 8.0, 9.0 / 16.0],
                    [7.0 / 8.0, 9.0 / 16.0],
                    [7.0 / 8.0, 13.0 / 16.0],
                    [5.0 / 8.0, 13.0 / 16.0],
                ]),
            },
            2 => ProblemSpec {
                setup: 2,
                domain: Domain::LShaped,
                initial_triangles: 384,
                rhs: RhsSpec::ConstantOne,
                coefficient,
                goal: GoalKind::Convection,
                weight: WeightSpec::Polygon(vec![[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
            },
            3 => ProblemSpec {
                setup: 3,
                domain: Domain::UnitSquare,
                initial_triangles: 512,
                rhs: RhsSpec::Directional {
                    region: [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]],
                },
                coefficient,
                goal: GoalKind::SecondMoment,
                weight: WeightSpec::Polygon(vec![[1.0, 0.5], [1.0, 1.0], [0.5, 1.0]]),
            },
            4 => ProblemSpec {
                setup: 4,
                domain: Domain::Slit { delta: SLIT_DELTA },
                initial_triangles: 512,
                rhs: RhsSpec::ConstantOne,
                coefficient,
                goal: GoalKind::Variance,
                weight: WeightSpec::Mollifier {
                    center: [0.4, -0.5],
                    radius: 0.15,
                },
            },
            _ => return Err(Error::Config(format!("unknown setup {id}, expected 1-4"))),
        };
        Ok(spec)
    }
}
