//! End-to-end validation of boxsd-core: independent oracles and a small
//! pass/fail reporter used by the acceptance gate.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use boxsd_core::decoder::NormKind;
use boxsd_core::model::SystemConfig;
use boxsd_core::special_fn::reg_lower_gamma;

/// Verdict of one criterion with a one-line summary of the evidence.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

/// Runs one criterion, prints its line and returns whether it passed. A
/// panic counts as a failure.
pub fn report(id: u32, name: &str, f: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Verdict::new(false, format!("panicked: {msg}"))
    });
    let tag = if v.pass { "PASS" } else { "FAIL" };
    println!(
        "[{tag}] criterion {id:>2} {name}: {} ({:.1} s)",
        v.detail,
        t.elapsed().as_secs_f64()
    );
    v.pass
}

pub fn gamma(a: f64, x: f64) -> f64 {
    reg_lower_gamma(a, x).unwrap()
}

/// Binomial coefficient by direct product.
pub fn choose(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |c, i| c * (n - k + i) as f64 / i as f64)
}

/// Binomial mixture of χ cdfs, term by term.
pub fn linf_cdf(prev: f64, cur: f64, m: usize, l: usize, c2: f64, s2: f64, mt: usize) -> f64 {
    let n = m + l;
    let mf = mt as f64;
    let p = (prev + mf * s2) / (cur + mf * s2);
    let x = c2 / (cur / mf + s2);
    (0..n)
        .map(|j| {
            choose(n - 1, j)
                * p.powi(j as i32)
                * (1.0 - p).powi((n - 1 - j) as i32)
                * gamma((n - j) as f64, x)
        })
        .sum()
}

/// Negative-binomial series for the l~∞ component cdf with each gamma factor
/// evaluated directly.
pub fn ltilde_cdf(prev: f64, cur: f64, m: usize, l: usize, c2: f64, s2: f64, mt: usize) -> f64 {
    let n = m + l;
    let mf = mt as f64;
    let p = (prev + mf * s2) / (cur + mf * s2);
    let x = c2 / (prev / mf + s2);
    if p >= 1.0 {
        return gamma(0.5, x).powi(2);
    }
    let (mut acc, mut mass) = (0.0, 0.0);
    let mut ln_d = n as f64 * p.ln();
    for s in 0..20000 {
        let d = ln_d.exp();
        mass += d;
        let g = gamma(s as f64 + 0.5, x);
        acc += d * g;
        if mass > 1.0 - 1e-14 || g < 1e-18 {
            break;
        }
        ln_d += (1.0 - p).ln() + ((s + n) as f64 / (s + 1) as f64).ln();
    }
    gamma(0.5, x) * acc
}

/// Expected nodes per level by summing over every ordered pair of
/// k-prefixes. Returns `(lower, upper)`, equal except for l~∞.
pub fn brute_force_expected(norm: NormKind, cfg: &SystemConfig, c2: f64) -> Vec<(f64, f64)> {
    let pts = cfg.constellation.points().to_vec();
    let q = pts.len();
    let (mt, l, s2) = (cfg.m, cfg.l(), cfg.sigma2);
    let mut out = Vec::new();
    for k in 1..=cfg.m {
        let (mut lo, mut hi) = (0.0, 0.0);
        for code in 0..q.pow(2 * k as u32) {
            let mut c = code;
            let mut dp = Vec::with_capacity(k);
            for _ in 0..k {
                dp.push(pts[c % q]);
                c /= q;
            }
            let mut b = Vec::with_capacity(k);
            for d in &dp {
                b.push(d - pts[c % q]);
                c /= q;
            }
            let norms: Vec<f64> = (0..=k)
                .map(|m| b[..m].iter().map(|z| z.norm_sqr()).sum())
                .collect();
            match norm {
                NormKind::L2 => {
                    let v = gamma((k + l) as f64, c2 / (norms[k] / mt as f64 + s2));
                    lo += v;
                    hi += v;
                }
                NormKind::Linf => {
                    let mut v = gamma(1.0, c2 / s2).powi(l as i32);
                    for m in 1..=k {
                        v *= linf_cdf(norms[m - 1], norms[m], m, l, c2, s2, mt);
                    }
                    lo += v;
                    hi += v;
                }
                NormKind::LtildeInf => {
                    let pre = gamma(0.5, c2 / s2).powi(2 * l as i32);
                    let (mut vl, mut vh) = (pre, pre);
                    for m in 1..=k {
                        let z = b[m - 1];
                        if z.re.abs() > 1e-9 && z.im.abs() > 1e-9 {
                            vl *= linf_cdf(norms[m - 1], norms[m], m, l, c2, s2, mt);
                            vh *= linf_cdf(norms[m - 1], norms[m], m, l, 2.0 * c2, s2, mt);
                        } else {
                            let e = ltilde_cdf(norms[m - 1], norms[m], m, l, c2, s2, mt);
                            vl *= e;
                            vh *= e;
                        }
                    }
                    lo += vl;
                    hi += vh;
                }
            }
        }
        let scale = (q as f64).powi(k as i32);
        out.push((lo / scale, hi / scale));
    }
    out
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
