//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use boxsd_core::decoder::{partial_metric_update, NormKind};
use boxsd_core::model::{
    build_problem, make_constellation, sample_channel, sample_symbols, DecodeProblem, Rng,
    SystemConfig,
};
use boxsd_core::special_fn::reg_lower_gamma;
use boxsd_core::Complex64;

pub fn qam4() -> boxsd_core::model::Constellation {
    make_constellation("4qam").unwrap()
}

/// Binomial coefficient by direct product.
pub fn choose(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |c, i| c * (n - k + i) as f64 / i as f64)
}

pub fn gamma(a: f64, x: f64) -> f64 {
    reg_lower_gamma(a, x).unwrap()
}

/// Binomial-mixture cdf written out from its definition.
pub fn linf_cdf_oracle(
    prev: f64,
    cur: f64,
    m: usize,
    l: usize,
    c2: f64,
    s2: f64,
    mt: usize,
) -> f64 {
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

/// Negative-binomial series with every gamma factor evaluated directly,
/// summed until the D-mass reaches `1 − 1e−14` or 20000 terms.
pub fn ltilde_cdf_oracle(
    prev: f64,
    cur: f64,
    m: usize,
    l: usize,
    c2: f64,
    s2: f64,
    mt: usize,
) -> f64 {
    let n = m + l;
    let mf = mt as f64;
    let p = (prev + mf * s2) / (cur + mf * s2);
    let x = c2 / (prev / mf + s2);
    if p >= 1.0 {
        return gamma(0.5, x).powi(2);
    }
    let mut acc = 0.0;
    let mut mass = 0.0;
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

/// Brute-force expected nodes per level: sums over all `|𝒜|^{2k}` ordered
/// pairs of k-prefixes. Returns `(lower, upper)` per level; the two agree
/// except for l~∞.
pub fn brute_force_expected(norm: NormKind, cfg: &SystemConfig, c2: f64) -> Vec<(f64, f64)> {
    let pts = cfg.constellation.points().to_vec();
    let q = pts.len();
    let (mt, l, s2) = (cfg.m, cfg.l(), cfg.sigma2);
    let mut out = Vec::new();
    for k in 1..=cfg.m {
        let count = q.pow(2 * k as u32);
        let (mut lo, mut hi) = (0.0, 0.0);
        for code in 0..count {
            // digits 0..k are d′ per level, k..2k are d per level
            let mut c = code;
            let mut b = Vec::with_capacity(k);
            let mut dp = Vec::with_capacity(k);
            for _ in 0..k {
                dp.push(pts[c % q]);
                c /= q;
            }
            for i in 0..k {
                b.push(dp[i] - pts[c % q]);
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
                        v *= linf_cdf_oracle(norms[m - 1], norms[m], m, l, c2, s2, mt);
                    }
                    lo += v;
                    hi += v;
                }
                NormKind::LtildeInf => {
                    let pre = gamma(0.5, c2 / s2).powi(2 * l as i32);
                    let (mut vl, mut vh) = (pre, pre);
                    for m in 1..=k {
                        let z = b[m - 1];
                        let general = z.re.abs() > 1e-9 && z.im.abs() > 1e-9;
                        if general {
                            vl *= linf_cdf_oracle(norms[m - 1], norms[m], m, l, c2, s2, mt);
                            vh *= linf_cdf_oracle(norms[m - 1], norms[m], m, l, 2.0 * c2, s2, mt);
                        } else {
                            let e = ltilde_cdf_oracle(norms[m - 1], norms[m], m, l, c2, s2, mt);
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

/// Partial metric of the prefix occupying antennas `M−k+1..M`, computed from
/// the definition.
pub fn prefix_metric(p: &DecodeProblem, norm: NormKind, prefix: &[usize]) -> f64 {
    let pts = p.constellation.points();
    let k = prefix.len();
    let mut d = vec![Complex64::new(0.0, 0.0); p.m];
    for (i, &s) in prefix.iter().enumerate() {
        d[p.m - k + i] = pts[s];
    }
    let mut met = p.y[p.m..]
        .iter()
        .fold(0.0, |a, &z| partial_metric_update(norm, a, z));
    for row in (p.m - k..p.m).rev() {
        let mut s = p.y[row];
        for j in row + 1..p.m {
            s -= p.r[(row, j)] * d[j];
        }
        met = partial_metric_update(norm, met, s - p.r[(row, row)] * d[row]);
    }
    met
}

/// Number of k-prefixes meeting the constraint, by enumeration.
pub fn brute_force_counts(p: &DecodeProblem, norm: NormKind, thr: f64) -> Vec<u64> {
    let q = p.constellation.len();
    (1..=p.m)
        .map(|k| {
            let mut n = 0;
            for code in 0..q.pow(k as u32) {
                let mut c = code;
                let prefix: Vec<usize> = (0..k)
                    .map(|_| {
                        let s = c % q;
                        c /= q;
                        s
                    })
                    .collect();
                if prefix_metric(p, norm, &prefix) <= thr {
                    n += 1;
                }
            }
            n
        })
        .collect()
}

/// A random problem with its own seed.
pub fn random_problem(m: usize, n: usize, snr_db: f64, seed: u64) -> DecodeProblem {
    let cfg = SystemConfig::from_snr_db(m, n, snr_db, qam4()).unwrap();
    let mut rng = Rng::new(seed);
    let d = sample_symbols(&cfg, &mut rng);
    let h = sample_channel(&cfg, &mut rng);
    build_problem(&h, &d, &cfg, &mut rng).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
