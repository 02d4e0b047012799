//! Adaptive Simpson quadrature used for custom model functions and as an
//! independent oracle for the catalog closed forms.

/// Adaptive Simpson integration of `f` on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates `g` on [lo, hi] (both nonnegative) after the substitution
/// a = s^2, which removes integrable endpoint singularities at zero such as
/// a^(-1/2) or log a.
pub fn integrate_sqrt_substituted<F: Fn(f64) -> f64>(
    g: &F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> f64 {
    debug_assert!(lo >= 0.0 && hi >= 0.0);
    let transformed = |s: f64| {
        if s == 0.0 {
            0.0
        } else {
            2.0 * s * g(s * s)
        }
    };
    adaptive_simpson(&transformed, lo.sqrt(), hi.sqrt(), tol)
}

/// Integrates `g` on [0, u] with the square-root substitution.
pub fn integrate_from_zero_sqrt<F: Fn(f64) -> f64>(g: &F, u: f64, tol: f64) -> f64 {
    integrate_sqrt_substituted(g, 0.0, u, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_integrated_to_tolerance() {
        let f = |x: f64| 3.0 * x * x - 2.0 * x + 1.0;
        assert_relative_eq!(adaptive_simpson(&f, 0.0, 2.0, 1e-12), 6.0, epsilon = 1e-11);
    }

    #[test]
    fn log_integral() {
        // integral of ln on [1, 4] is 4 ln 4 - 3
        let f = |x: f64| x.ln();
        let exact = 4.0 * 4.0f64.ln() - 3.0;
        assert_relative_eq!(adaptive_simpson(&f, 1.0, 4.0, 1e-11), exact, epsilon = 1e-10);
    }

    #[test]
    fn sqrt_singularity_at_zero() {
        // integral of a^(-1/2) on [0, 4] is 2 sqrt(4) = 4
        let g = |a: f64| a.powf(-0.5);
        assert_relative_eq!(integrate_from_zero_sqrt(&g, 4.0, 1e-12), 4.0, epsilon = 1e-10);
    }
}
