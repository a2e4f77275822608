//! Entropy integrals `Comp(F) = int_0^inf sqrt(log N(F, |.|_inf, u)) du`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ui;

use crate::error::{Error, Result};

/// Covering-number model of a hypothesis class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropyProfile {
    /// `size` hypotheses with sup-norm diameter at most `m`.
    FiniteClass { size: usize, m: f64 },
    /// `(y - s(w.x))^2` with `w` in the unit ball of `R^d`.
    EuclideanBallLipschitz {
        d: usize,
        r0: f64,
        b: f64,
        s_sup: f64,
        s_prime_sup: f64,
    },
    /// `(y - h(x))^2` with `h` in the radius-`r` ball of the Gaussian RKHS.
    GaussianRkhs {
        d: usize,
        r0: f64,
        sigma: f64,
        r: f64,
        b: f64,
    },
    /// Step function: `N(u) = steps[k].1` for `steps[k-1].0 <= u < steps[k].0`
    /// and `N(u) = 1` beyond the last breakpoint.
    ExplicitTable { steps: Vec<(f64, f64)> },
}

impl EntropyProfile {
    /// Checks parameter domains and that tabulated covering numbers are at
    /// least 1 and nonincreasing in `u`.
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        match self {
            EntropyProfile::FiniteClass { size, m } => {
                if *size == 0 {
                    return Err(Error::invalid("finite class must have at least one member"));
                }
                nonneg("m", *m)
            }
            EntropyProfile::EuclideanBallLipschitz {
                d,
                r0,
                b,
                s_sup,
                s_prime_sup,
            } => {
                if *d == 0 {
                    return Err(Error::invalid("dimension must be positive"));
                }
                nonneg("r0", *r0)?;
                nonneg("b", *b)?;
                nonneg("s_sup", *s_sup)?;
                nonneg("s_prime_sup", *s_prime_sup)
            }
            EntropyProfile::GaussianRkhs { d, r0, sigma, r, b } => {
                if *d == 0 || !(*sigma > 0.0) {
                    return Err(Error::invalid("dimension and kernel width must be positive"));
                }
                nonneg("r0", *r0)?;
                nonneg("r", *r)?;
                nonneg("b", *b)
            }
            EntropyProfile::ExplicitTable { steps } => {
                let mut prev_u = 0.0;
                let mut prev_n = f64::INFINITY;
                for &(u, n) in steps {
                    if !(u > prev_u) || !u.is_finite() {
                        return Err(Error::invalid("table breakpoints must increase"));
                    }
                    if !(n >= 1.0) || n > prev_n {
                        return Err(Error::invalid(
                            "covering numbers must be >= 1 and nonincreasing",
                        ));
                    }
                    prev_u = u;
                    prev_n = n;
                }
                Ok(())
            }
        }
    }
}

/// `D = 2 r0 (B + |s|) |s'|`, the Lipschitz constant of `w -> f_w` in sup norm.
pub fn network_scale(r0: f64, b: f64, s_sup: f64, s_prime_sup: f64) -> f64 {
    2.0 * r0 * (b + s_sup) * s_prime_sup
}

/// Constant `C_1` of the Gaussian RKHS class:
/// `48 sqrt(d) (2 G((d+3)/2, ln 2) + (ln 2)^((d+1)/2)) (32 + 2560 d r0^2 / sigma^2)^((d+1)/2)`.
pub fn rkhs_c1(d: usize, r0: f64, sigma: f64) -> f64 {
    let df = d as f64;
    let ln2 = std::f64::consts::LN_2;
    let e = (df + 1.0) / 2.0;
    48.0 * df.sqrt()
        * (2.0 * upper_incomplete_gamma((df + 3.0) / 2.0, ln2) + ln2.powf(e))
        * (32.0 + 2560.0 * df * r0 * r0 / (sigma * sigma)).powf(e)
}

/// `G(s, v) = int_v^inf u^(s-1) e^(-u) du`.
pub fn upper_incomplete_gamma(s: f64, v: f64) -> f64 {
    gamma_ui(s, v)
}

/// `Comp(F)` for the given profile.
pub fn comp_entropy_integral(profile: &EntropyProfile) -> Result<f64> {
    profile.validate()?;
    Ok(match profile {
        EntropyProfile::FiniteClass { size, m } => m * (*size as f64).ln().sqrt(),
        EntropyProfile::EuclideanBallLipschitz {
            d,
            r0,
            b,
            s_sup,
            s_prime_sup,
        } => {
            let dd = network_scale(*r0, *b, *s_sup, *s_prime_sup);
            1.5 * dd * (*d as f64).sqrt()
        }
        EntropyProfile::GaussianRkhs { d, r0, sigma, r, b } => {
            rkhs_c1(*d, *r0, *sigma) / 48.0 * (r * r + b * r)
        }
        EntropyProfile::ExplicitTable { steps } => {
            let mut total = 0.0;
            let mut lo = 0.0;
            for &(u, n) in steps {
                let v = n.ln().sqrt();
                total += adaptive_simpson(&|_| v, lo, u, 1e-6);
                lo = u;
            }
            total
        }
    })
}

/// Adaptive Simpson quadrature of `g` on `[a, b]` to relative tolerance
/// `rel_tol` (absolute floor 1e-15).
pub fn adaptive_simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (g(a), g(0.5 * (a + b)), g(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = (rel_tol * whole.abs()).max(1e-15);
    simpson_step(g, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
