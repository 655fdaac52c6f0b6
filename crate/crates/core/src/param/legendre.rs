use crate::error::{Error, Result};

/// Legendre polynomial of degree `n`, orthonormal for the measure `dy/2` on `[-1, 1]`.
pub fn legendre_eval(n: usize, y: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, y);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * y * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (2.0 * n as f64 + 1.0).sqrt() * p1
}

/// Coefficient `cₙ = n / √(4n² - 1)` of the recurrence
/// `y Pₙ₋₁ = cₙ Pₙ + cₙ₋₁ Pₙ₋₂`, equal to `∫ y Pₙ Pₙ₋₁ dπ`.
pub fn coupling_coeff(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("coupling coefficient needs degree >= 1".into()));
    }
    let n = n as f64;
    Ok(n / (4.0 * n * n - 1.0).sqrt())
}
