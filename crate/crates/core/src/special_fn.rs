//! Regularized incomplete gamma function, its inverse, and the binomial and
//! negative-binomial mixture weights.

use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

fn check_order(a: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("gamma order must be positive, got {a}"));
    }
    Ok(())
}

/// `ln(x^a e^{-x} / Γ(a))`, the common prefactor of both expansions.
fn log_prefactor(a: f64, x: f64) -> f64 {
    a * x.ln() - x - ln_gamma(a)
}

/// Series for P(a, x); converges quickly for x < a + 1.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    (log_prefactor(a, x).exp() * sum).min(1.0)
}

/// Modified Lentz continued fraction for Q(a, x); used for x ≥ a + 1.
fn upper_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (log_prefactor(a, x).exp() * h).min(1.0)
}

/// Regularized lower incomplete gamma function
/// `γ_a(x) = (1/Γ(a)) ∫₀ˣ t^{a−1} e^{−t} dt`.
///
/// # Errors
/// [`Error::Domain`] for `a ≤ 0` or `x < 0`.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_order(a)?;
    if !(x >= 0.0) {
        return domain(format!("gamma argument must be nonnegative, got {x}"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_cf(a, x)
    })
}

/// Complement `1 − γ_a(x)`, accurate in relative terms for large `x`.
pub(crate) fn reg_upper_gamma(a: f64, x: f64) -> Result<f64> {
    check_order(a)?;
    if !(x >= 0.0) {
        return domain(format!("gamma argument must be nonnegative, got {x}"));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_cf(a, x)
    })
}

/// Density of the gamma(a, 1) distribution at `x`.
fn gamma_pdf(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ((a - 1.0) * x.ln() - x - ln_gamma(a)).exp()
}

/// Bracketed Newton iteration for an increasing function `f` with derivative
/// `df` and a root in `[lo, hi]`; falls back to bisection whenever the Newton
/// step leaves the bracket.
fn bracketed_newton(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-15 * hi {
            return next;
        }
        x = next;
    }
    x
}

fn upper_bracket(a: f64, reached: impl Fn(f64) -> bool) -> f64 {
    let mut hi = a + 40.0 + 10.0 * a.sqrt();
    while !reached(hi) {
        hi *= 2.0;
    }
    hi
}

/// Inverse of [`reg_lower_gamma`] in its second argument.
///
/// # Errors
/// [`Error::Domain`] for `a ≤ 0` or `y ∉ [0, 1)`.
pub fn inv_reg_lower_gamma(a: f64, y: f64) -> Result<f64> {
    check_order(a)?;
    if !(0.0..1.0).contains(&y) {
        return domain(format!("probability must lie in [0, 1), got {y}"));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y > 0.5 {
        return inv_reg_upper_gamma(a, 1.0 - y);
    }
    let f = |x: f64| reg_lower_gamma(a, x).unwrap_or(1.0) - y;
    let hi = upper_bracket(a, |x| f(x) >= 0.0);
    Ok(bracketed_newton(f, |x| gamma_pdf(a, x), 0.0, hi))
}

/// Solves `1 − γ_a(x) = q`; keeps full relative accuracy for tiny `q`, which
/// is what radii at small ε need.
pub(crate) fn inv_reg_upper_gamma(a: f64, q: f64) -> Result<f64> {
    check_order(a)?;
    if !(q > 0.0 && q <= 1.0) {
        return domain(format!("tail probability must lie in (0, 1], got {q}"));
    }
    if q == 1.0 {
        return Ok(0.0);
    }
    if q >= 0.5 {
        return inv_reg_lower_gamma(a, 1.0 - q);
    }
    // Work on log Q so the Newton step stays well scaled far in the tail.
    let lq = q.ln();
    let f = |x: f64| lq - reg_upper_gamma(a, x).unwrap_or(0.0).max(TINY).ln();
    let df = |x: f64| gamma_pdf(a, x) / reg_upper_gamma(a, x).unwrap_or(0.0).max(TINY);
    let hi = upper_bracket(a, |x| f(x) >= 0.0);
    Ok(bracketed_newton(f, df, 0.0, hi))
}

/// `ln(n!)`, exact to rounding for `n ≤ 170`.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    if n <= 170 {
        return (2..=n).fold(1.0f64, |acc, i| acc * i as f64).ln();
    }
    ln_gamma(n as f64 + 1.0)
}

fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    if n <= 1000 {
        // the running product stays below f64::MAX for n ≤ 1000
        let mut c = 1.0f64;
        for i in 1..=k {
            c = c * (n - k + i) as f64 / i as f64;
        }
        return c.ln();
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn check_prob(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("probability must lie in [0, 1], got {p}"));
    }
    Ok(())
}

/// Binomial weight `B_l = C(n−1, l) p^l (1−p)^{n−1−l}` with `n = m + L`.
///
/// # Errors
/// [`Error::IndexOutOfRange`] unless `l < m_plus_l`; [`Error::Domain`] for
/// `p ∉ [0, 1]`.
pub fn binomial_coeff_b(l: usize, m_plus_l: usize, p: f64) -> Result<f64> {
    if l >= m_plus_l {
        return Err(Error::IndexOutOfRange {
            index: l,
            limit: m_plus_l,
        });
    }
    check_prob(p)?;
    let trials = m_plus_l - 1;
    let fails = trials - l;
    if trials == 0 {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(if l == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if fails == 0 { 1.0 } else { 0.0 });
    }
    let ln = ln_choose(trials, l) + l as f64 * p.ln() + fails as f64 * (-p).ln_1p();
    Ok(ln.exp())
}

/// Negative-binomial weight `D_s = C(s+n−1, n−1) p^n (1−p)^s` with
/// `n = m + L`.
///
/// # Errors
/// [`Error::Domain`] for `p ∉ (0, 1]` or `m_plus_l = 0`.
pub fn negbinom_coeff_d(s: usize, m_plus_l: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!("probability must lie in (0, 1], got {p}"));
    }
    if m_plus_l == 0 {
        return domain("level count must be positive");
    }
    if p == 1.0 {
        return Ok(if s == 0 { 1.0 } else { 0.0 });
    }
    let n = m_plus_l;
    let ln = ln_choose(s + n - 1, n - 1) + n as f64 * p.ln() + s as f64 * (-p).ln_1p();
    Ok(ln.exp())
}
