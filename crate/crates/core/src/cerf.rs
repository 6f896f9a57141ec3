//! Scaled complex error function.
//!
//! The stochastic-prior error formula needs products of the form
//! `e^{-y^2} erf(x - i y)` with `y` up to several hundred, where `erf` alone
//! overflows (it grows like `e^{y^2 - x^2}`). This wrapper evaluates the
//! product directly through the Faddeeva function `w`, which is bounded in
//! the first quadrant:
//!
//! ```text
//! e^{-y^2} erf(x - i y) = e^{-y^2} - e^{-x^2} e^{2 i x y} w(y + i x)
//! ```
//!
//! with symmetry reductions mapping any quadrant onto `x >= 0, y >= 0`.

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;

/// `e^{-y^2} * erf(x - i y)` for arbitrary real `x`, `y`.
pub(crate) fn erf_scaled(x: f64, y: f64) -> Complex64 {
    if x < 0.0 {
        // erf is odd, erf(conj z) = conj(erf z).
        return -erf_scaled(-x, y).conj();
    }
    if y < 0.0 {
        return erf_scaled(x, -y).conj();
    }
    if y * y < 500.0 {
        // |erf(x - iy)| <= ~e^{y^2 - x^2}: representable, and the direct
        // product avoids the cancellation the w-form suffers for small |z|.
        return Complex64::new(x, -y).erf() * (-y * y).exp();
    }
    // For large y the erf itself overflows; fold its growth into the
    // Faddeeva function of the first-quadrant argument, where |w| <= 1.
    let w = Complex64::new(y, x).w();
    let phase = Complex64::from_polar((-x * x).exp(), 2.0 * x * y);
    Complex64::new((-y * y).exp(), 0.0) - phase * w
}
