//! Closed-form expressions: radii, partial-metric cdfs, expected node counts,
//! complexity lower bounds and scaling exponent, tree-pruning quantities and
//! pairwise-error bounds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::decoder::NormKind;
use crate::error::{domain, Error, Result};
use crate::model::{difference_profile, ComponentClass, Rng, SystemConfig};
use crate::special_fn::{binomial_coeff_b, inv_reg_upper_gamma, ln_factorial, reg_lower_gamma};

/// Default cap on distinct accumulated-norm states in the expectation DP.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Residual negative-binomial mass at which the l~∞ series stops.
pub const SERIES_MASS_TOL: f64 = 1e-12;

/// Stop the l~∞ series once the remaining tail is provably below this.
pub const SERIES_TAIL_TOL: f64 = 1e-15;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0, 1), got {eps}"));
    }
    Ok(())
}

/// `−expm1(ln(1−ε)/k)`, i.e. `1 − (1−ε)^{1/k}` without cancellation.
fn one_minus_root(eps: f64, k: f64) -> f64 {
    -((-eps).ln_1p() / k).exp_m1()
}

/// `C₂² = σ² γ_N^{-1}(1 − ε)`.
pub fn radius_l2(eps: f64, n: usize, sigma2: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(sigma2 * inv_reg_upper_gamma(n as f64, eps)?)
}

/// `C∞² = −σ² log(1 − (1 − ε)^{1/N})`.
pub fn radius_linf(eps: f64, n: usize, sigma2: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(-sigma2 * one_minus_root(eps, n as f64).ln())
}

/// `C~∞² = σ² γ_{1/2}^{-1}((1 − ε)^{1/(2N)})`.
pub fn radius_ltilde(eps: f64, n: usize, sigma2: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(sigma2 * inv_reg_upper_gamma(0.5, one_minus_root(eps, 2.0 * n as f64))?)
}

/// Accumulated squared error norms `‖b_{m−1}‖²` and `‖b_m‖²`, each stored as
/// an integer over `denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefixState {
    pub q_prev: u64,
    pub q_cur: u64,
    pub denominator: u64,
}

impl PrefixState {
    pub fn new(q_prev: u64, q_cur: u64, denominator: u64) -> Result<Self> {
        if q_cur < q_prev || denominator == 0 {
            return domain("prefix state needs q_cur ≥ q_prev and a positive denominator");
        }
        Ok(PrefixState {
            q_prev,
            q_cur,
            denominator,
        })
    }

    pub fn prev(&self) -> f64 {
        self.q_prev as f64 / self.denominator as f64
    }

    pub fn cur(&self) -> f64 {
        self.q_cur as f64 / self.denominator as f64
    }

    /// `p = (‖b_{m−1}‖² + Mσ²) / (‖b_m‖² + Mσ²)`.
    pub fn p(&self, sigma2: f64, m_tx: usize) -> f64 {
        let ms = m_tx as f64 * sigma2;
        (self.prev() + ms) / (self.cur() + ms)
    }
}

/// Cdf of `|[z(b)]_{M−m+1}|` at radius `C` (passed squared as `c2`): a
/// binomial mixture of χ distributions.
pub fn component_cdf_linf(
    state: PrefixState,
    m: usize,
    l: usize,
    c2: f64,
    sigma2: f64,
    m_tx: usize,
) -> Result<f64> {
    if m == 0 {
        return domain("level must be at least 1");
    }
    let n = m + l;
    let p = state.p(sigma2, m_tx);
    let x = c2 / (state.cur() / m_tx as f64 + sigma2);
    let mut acc = 0.0;
    for j in 0..n {
        let w = binomial_coeff_b(j, n, p)?;
        if w > 0.0 {
            acc += w * reg_lower_gamma((n - j) as f64, x)?;
        }
    }
    Ok(acc.min(1.0))
}

/// Exact cdf of `‖[z(b)]_{M−m+1}‖~∞` for a zero, purely-real or
/// purely-imaginary component, by the negative-binomial series.
///
/// # Errors
/// [`Error::Contract`] for a general-class component.
pub fn component_cdf_ltilde_exact(
    state: PrefixState,
    m: usize,
    l: usize,
    c2: f64,
    sigma2: f64,
    m_tx: usize,
    class: ComponentClass,
) -> Result<f64> {
    if class == ComponentClass::General {
        return Err(Error::Contract(
            "exact l~∞ cdf needs a zero, purely-real or purely-imaginary component".into(),
        ));
    }
    if class == ComponentClass::Zero && state.q_cur != state.q_prev {
        return Err(Error::Contract(
            "zero component must leave the norm unchanged".into(),
        ));
    }
    if m == 0 {
        return domain("level must be at least 1");
    }
    let n = m + l;
    let p = state.p(sigma2, m_tx);
    let x = c2 / (state.prev() / m_tx as f64 + sigma2);
    let head = reg_lower_gamma(0.5, x)?;
    Ok((head * ltilde_series(n, p, x)?).min(1.0))
}

/// `Σ_s D_s γ_{s+1/2}(x)`.
///
/// `γ_{s+1/2}` follows the recurrence `γ_{a+1} = γ_a − x^a e^{−x}/Γ(a+1)`,
/// re-anchored by direct evaluation every 64 steps. The sum stops when the
/// unvisited D-mass is below [`SERIES_MASS_TOL`], or when that mass times the
/// current (decreasing in s) gamma factor bounds the tail below
/// [`SERIES_TAIL_TOL`].
fn ltilde_series(n: usize, p: f64, x: f64) -> Result<f64> {
    if p >= 1.0 {
        return reg_lower_gamma(0.5, x);
    }
    let ln_q = (-p).ln_1p();
    let mut ln_d = n as f64 * p.ln();
    let mut g = reg_lower_gamma(0.5, x)?;
    let ln_x = x.ln();
    let mut ln_t = 0.5 * ln_x - x - ln_gamma(1.5);
    let mut mass = 0.0;
    let mut acc = 0.0;
    let mut s = 0usize;
    loop {
        let d = ln_d.exp();
        mass += d;
        acc += d * g;
        let rest = (1.0 - mass).max(0.0);
        // next gamma factor
        let a = s as f64 + 0.5;
        g = if (s + 1) % 64 == 0 {
            reg_lower_gamma(a + 1.0, x)?
        } else {
            (g - ln_t.exp()).max(0.0)
        };
        ln_t += ln_x - (a + 1.0).ln();
        if rest < SERIES_MASS_TOL || rest * g < SERIES_TAIL_TOL {
            break;
        }
        ln_d += ln_q + ((s + n) as f64 / (s + 1) as f64).ln();
        s += 1;
        if s > 100_000_000 {
            return Err(Error::Contract("l~∞ series failed to converge".into()));
        }
    }
    Ok(acc)
}

/// Lower and upper bounds on the l~∞ component cdf: the l∞ cdf at radius `C`
/// and at radius `√2 C`.
pub fn component_cdf_ltilde_bounds(
    state: PrefixState,
    m: usize,
    l: usize,
    c2: f64,
    sigma2: f64,
    m_tx: usize,
) -> Result<(f64, f64)> {
    Ok((
        component_cdf_linf(state, m, l, c2, sigma2, m_tx)?,
        component_cdf_linf(state, m, l, 2.0 * c2, sigma2, m_tx)?,
    ))
}

/// Expected count at one level: a single value, or a bracket for l~∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LevelValue {
    Exact(f64),
    Bounds { lower: f64, upper: f64 },
}

impl LevelValue {
    pub fn lower(&self) -> f64 {
        match *self {
            LevelValue::Exact(v) => v,
            LevelValue::Bounds { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            LevelValue::Exact(v) => v,
            LevelValue::Bounds { upper, .. } => upper,
        }
    }

    pub fn exact(&self) -> Option<f64> {
        match *self {
            LevelValue::Exact(v) => Some(v),
            LevelValue::Bounds { .. } => None,
        }
    }
}

/// Expected number of visited nodes per tree level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub norm: NormKind,
    pub eps: f64,
    pub sigma2: f64,
    pub m: usize,
    pub n: usize,
    pub constellation: String,
    /// Entry `k − 1` holds level `k`.
    pub per_level: Vec<LevelValue>,
    pub total: LevelValue,
}

/// Per-transition factor used by the product-form DP.
#[derive(Clone, Copy)]
enum Factor {
    Linf,
    LtildeLower,
    LtildeUpper,
}

/// Runs the product-form DP: state is the exact accumulated squared norm,
/// each level multiplies by `weight/|𝒜|` times the component cdf.
fn product_dp(cfg: &SystemConfig, c2: f64, factor: Factor, cap: usize) -> Result<Vec<f64>> {
    let profile = difference_profile(&cfg.constellation);
    let q = cfg.constellation.len() as f64;
    let (l, m_tx, sigma2) = (cfg.l(), cfg.m, cfg.sigma2);
    let den = profile.denominator;
    let mut states: BTreeMap<u64, f64> = BTreeMap::from([(0, 1.0)]);
    let mut out = Vec::with_capacity(m_tx);
    for m in 1..=m_tx {
        let mut next: BTreeMap<u64, f64> = BTreeMap::new();
        for (&qp, &v) in &states {
            for e in &profile.entries {
                let st = PrefixState::new(qp, qp + e.sq_norm, den)?;
                let f = match (factor, e.class) {
                    (Factor::Linf, _) => component_cdf_linf(st, m, l, c2, sigma2, m_tx)?,
                    (Factor::LtildeLower, ComponentClass::General) => {
                        component_cdf_linf(st, m, l, c2, sigma2, m_tx)?
                    }
                    (Factor::LtildeUpper, ComponentClass::General) => {
                        component_cdf_linf(st, m, l, 2.0 * c2, sigma2, m_tx)?
                    }
                    (_, class) => component_cdf_ltilde_exact(st, m, l, c2, sigma2, m_tx, class)?,
                };
                *next.entry(st.q_cur).or_insert(0.0) += v * f * e.weight as f64 / q;
            }
        }
        if next.len() > cap {
            return Err(Error::StateOverflow(cap));
        }
        out.push(next.values().sum());
        states = next;
    }
    Ok(out)
}

/// Expected nodes per level for SD-l²: the accumulated-norm distribution is
/// the profile convolved `k` times.
fn l2_dp(cfg: &SystemConfig, c2: f64, cap: usize) -> Result<Vec<f64>> {
    let profile = difference_profile(&cfg.constellation).by_norm();
    let den = difference_profile(&cfg.constellation).denominator as f64;
    let q = cfg.constellation.len() as f64;
    let mut states: BTreeMap<u64, f64> = BTreeMap::from([(0, 1.0)]);
    let mut out = Vec::with_capacity(cfg.m);
    for k in 1..=cfg.m {
        let mut next: BTreeMap<u64, f64> = BTreeMap::new();
        for (&qp, &v) in &states {
            for &(dq, w) in &profile {
                *next.entry(qp + dq).or_insert(0.0) += v * w as f64 / q;
            }
        }
        if next.len() > cap {
            return Err(Error::StateOverflow(cap));
        }
        let order = (k + cfg.l()) as f64;
        let mut acc = 0.0;
        for (&qk, &w) in &next {
            let scale = qk as f64 / den / cfg.m as f64 + cfg.sigma2;
            acc += w * reg_lower_gamma(order, c2 / scale)?;
        }
        out.push(acc);
        states = next;
    }
    Ok(out)
}

/// Expected visited nodes per level with the ε-matched radius of `norm`.
pub fn expected_nodes(norm: NormKind, cfg: &SystemConfig, eps: f64) -> Result<ComplexityReport> {
    expected_nodes_with_cap(norm, cfg, eps, DEFAULT_STATE_CAP)
}

/// [`expected_nodes`] with an explicit cap on DP states.
pub fn expected_nodes_with_cap(
    norm: NormKind,
    cfg: &SystemConfig,
    eps: f64,
    cap: usize,
) -> Result<ComplexityReport> {
    cfg.validate()?;
    let c2 = norm.radius2(eps, cfg.n, cfg.sigma2)?;
    let l = cfg.l() as i32;
    let per_level: Vec<LevelValue> = match norm {
        NormKind::L2 => l2_dp(cfg, c2, cap)?
            .into_iter()
            .map(LevelValue::Exact)
            .collect(),
        NormKind::Linf => {
            let pre = reg_lower_gamma(1.0, c2 / cfg.sigma2)?.powi(l);
            product_dp(cfg, c2, Factor::Linf, cap)?
                .into_iter()
                .map(|v| LevelValue::Exact(pre * v))
                .collect()
        }
        NormKind::LtildeInf => {
            let pre = reg_lower_gamma(0.5, c2 / cfg.sigma2)?.powi(2 * l);
            let lo = product_dp(cfg, c2, Factor::LtildeLower, cap)?;
            let hi = product_dp(cfg, c2, Factor::LtildeUpper, cap)?;
            lo.into_iter()
                .zip(hi)
                .map(|(a, b)| LevelValue::Bounds {
                    lower: pre * a,
                    upper: pre * b,
                })
                .collect()
        }
    };
    let total = match norm {
        NormKind::LtildeInf => LevelValue::Bounds {
            lower: per_level.iter().map(LevelValue::lower).sum(),
            upper: per_level.iter().map(LevelValue::upper).sum(),
        },
        _ => LevelValue::Exact(per_level.iter().map(LevelValue::lower).sum()),
    };
    Ok(ComplexityReport {
        norm,
        eps,
        sigma2: cfg.sigma2,
        m: cfg.m,
        n: cfg.n,
        constellation: cfg.constellation.label().to_string(),
        per_level,
        total,
    })
}

/// `(1−ε) Σ_{k=1}^{M} Σ_{i=1}^{k} (k/i)^i (1 + B² i/(Mσ²))^{−k}`, valid for
/// `M = N`.
pub fn complexity_lower_bound(cfg: &SystemConfig, eps: f64) -> Result<f64> {
    cfg.validate()?;
    if cfg.m != cfg.n {
        return domain(format!(
            "lower bound needs M = N, got M={} N={}",
            cfg.m, cfg.n
        ));
    }
    if !(0.0..=1.0).contains(&eps) {
        return domain(format!("eps must lie in [0, 1], got {eps}"));
    }
    let b2 = difference_profile(&cfg.constellation).max_sq_distance();
    let mf = cfg.m as f64;
    let mut acc = 0.0;
    for k in 1..=cfg.m {
        for i in 1..=k {
            let (kf, fi) = (k as f64, i as f64);
            acc += (fi * (kf / fi).ln() - kf * (b2 * fi / (mf * cfg.sigma2)).ln_1p()).exp();
        }
    }
    Ok((1.0 - eps) * acc)
}

/// `γ(α, β) = β log(α/β) − α log(1 + B²β/σ²)`.
pub fn scaling_exponent(alpha: f64, beta: f64, sigma2: f64, b2: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= alpha) {
        return domain(format!("need 0 < β ≤ α ≤ 1, got α={alpha} β={beta}"));
    }
    if !(sigma2 > 0.0) || !(b2 > 0.0) {
        return domain("σ² and B² must be positive");
    }
    Ok(beta * (alpha / beta).ln() - alpha * (b2 * beta / sigma2).ln_1p())
}

/// `log f(M)` for the single lower-bound term with `k = ⌈αM⌉`, `i = ⌈βM⌉`:
/// `log(1−ε) + i log(k/i) − k log(1 + B² i/(Mσ²))`.
pub fn log_scaling_term(
    m: usize,
    alpha: f64,
    beta: f64,
    eps: f64,
    sigma2: f64,
    b2: f64,
) -> Result<f64> {
    scaling_exponent(alpha, beta, sigma2, b2)?;
    check_eps(eps)?;
    let mf = m as f64;
    let k = (alpha * mf).ceil();
    let i = (beta * mf).ceil();
    Ok((-eps).ln_1p() + i * (k / i).ln() - k * (b2 * i / (mf * sigma2)).ln_1p())
}

/// `A(m̂) = γ₁(κ)^{n−1} Σ_{l=0}^{n−1} C(n−1, l) κ^{−l} / (n−l)!` with
/// `n = m̂ + L`.
pub fn a_value(kappa: f64, n: usize) -> Result<f64> {
    if n == 0 || !(kappa > 0.0) {
        return domain("A needs m̂ + L ≥ 1 and κ > 0");
    }
    let ln_g1 = (-(-kappa).exp_m1()).ln();
    let ln_k = kappa.ln();
    let t = n - 1;
    let mut acc = 0.0;
    for j in 0..n {
        let ln_c = ln_factorial(t) - ln_factorial(j) - ln_factorial(t - j);
        acc += (t as f64 * ln_g1 + ln_c - j as f64 * ln_k - ln_factorial(n - j)).exp();
    }
    Ok(acc)
}

/// Tree-pruning quantities for an ε-matched pair of l² and l∞ radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TpbReport {
    pub kappa_inf: f64,
    pub kappa_2: f64,
    pub rho_c: f64,
    /// `A(m̂)` for `m̂ = 1..=M`.
    pub a_values: Vec<f64>,
    /// Largest `k` with `((k+L)!)^{1/(k+L)} ≤ ρ_C`, or 0.
    pub k_bar: usize,
    /// `m̄(k)` for `k = 1..=M`.
    pub m_bar: Vec<Option<usize>>,
    /// `max(⌊ρ_C⌋ − L, 0)`.
    pub k_bar_inst: usize,
    /// `(V_{2,k}, V_{∞,k})` for `k = 1..=M`.
    pub volumes: Vec<(f64, f64)>,
}

/// `ρ_C = κ₂ / κ∞` for a given ε and N.
pub fn rho_c(eps: f64, n: usize) -> Result<f64> {
    Ok(radius_l2(eps, n, 1.0)? / radius_linf(eps, n, 1.0)?)
}

pub fn tpb_report(cfg: &SystemConfig, eps: f64) -> Result<TpbReport> {
    cfg.validate()?;
    let (m, l) = (cfg.m, cfg.l());
    let kappa_inf = radius_linf(eps, cfg.n, 1.0)?;
    let kappa_2 = radius_l2(eps, cfg.n, 1.0)?;
    let rho = kappa_2 / kappa_inf;
    let ln_rho = rho.ln();
    let a_values = (1..=m)
        .map(|mh| a_value(kappa_inf, mh + l))
        .collect::<Result<_>>()?;
    let k_bar = (1..=m)
        .filter(|&k| ln_factorial(k + l) / (k + l) as f64 <= ln_rho)
        .max()
        .unwrap_or(0);
    let m_bar = (1..=m)
        .map(|k| {
            let rhs = (k + l) as f64 * ln_rho - ln_factorial(k + l);
            (1..=k).filter(|&mm| -ln_factorial(mm + l) > rhs).max()
        })
        .collect();
    let k_bar_inst = (rho.floor() as i64 - l as i64).max(0) as usize;
    let (c2_2, c2_inf) = (kappa_2 * cfg.sigma2, kappa_inf * cfg.sigma2);
    let volumes = (1..=m)
        .map(|k| {
            let kf = k as f64;
            let v2 = (kf * (PI * c2_2).ln() - ln_factorial(k)).exp();
            let vi = (kf * (PI * c2_inf).ln()).exp();
            (v2, vi)
        })
        .collect();
    Ok(TpbReport {
        kappa_inf,
        kappa_2,
        rho_c: rho,
        a_values,
        k_bar,
        m_bar,
        k_bar_inst,
        volumes,
    })
}

/// High-SNR approximation of the probability that an error prefix with
/// squared norm `b_norm2` survives to level `k`. `kappa` is `κ∞` for l∞ and
/// `κ₂` for l²; `m_hat` is ignored for l².
#[allow(clippy::too_many_arguments)]
pub fn asymptotic_visit_prob(
    norm: NormKind,
    k: usize,
    l: usize,
    m_hat: usize,
    b_norm2: f64,
    kappa: f64,
    rho: f64,
    m_tx: usize,
) -> Result<f64> {
    if !(b_norm2 > 0.0) {
        return domain("error prefix must be nonzero");
    }
    let n = k + l;
    let base = (rho * b_norm2 / m_tx as f64).powi(-(n as i32));
    match norm {
        NormKind::Linf => Ok(a_value(kappa, m_hat + l)? * kappa.powi(n as i32) * base),
        NormKind::L2 => Ok((n as f64 * kappa.ln() - ln_factorial(n)).exp() * base),
        NormKind::LtildeInf => domain("asymptotic visit probability is defined for l² and l∞ only"),
    }
}

/// Pairwise-error bound curves at one SNR and error norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PepBounds {
    pub ub_inf: f64,
    pub ub_ltilde: f64,
    pub ub_ml: f64,
    pub lb_ml: f64,
    pub beta: f64,
    pub beta_tilde: f64,
}

fn ln_central_binom(n: usize) -> f64 {
    ln_factorial(2 * n) - 2.0 * ln_factorial(n)
}

fn snr_gap(root: f64, n: usize) -> f64 {
    let half_binom = ln_central_binom(n) - 2f64.ln();
    4.0 * (root + 1.0).powi(2) * (-half_binom / n as f64).exp()
}

pub fn pep_bounds(n: usize, m_tx: usize, b_norm2: f64, rho: f64) -> Result<PepBounds> {
    if !(b_norm2 > 0.0) || n == 0 || m_tx == 0 || !(rho > 0.0) {
        return domain("PEP bounds need N, M ≥ 1, ‖b‖² > 0 and ρ > 0");
    }
    let nf = n as f64;
    let snr = rho * b_norm2 / m_tx as f64;
    let ub = |root: f64| (nf * 2f64.ln() - nf * (snr / (2.0 * (root + 1.0).powi(2))).ln_1p()).exp();
    Ok(PepBounds {
        ub_inf: ub(nf.sqrt()),
        ub_ltilde: ub((2.0 * nf).sqrt()),
        ub_ml: (nf * 2f64.ln() - nf * (snr / 8.0).ln_1p()).exp(),
        lb_ml: (-(2f64.ln()) - nf * 4f64.ln() + ln_central_binom(n) - nf * (snr / 4.0).ln_1p())
            .exp(),
        beta: snr_gap(nf.sqrt(), n),
        beta_tilde: snr_gap((2.0 * nf).sqrt(), n),
    })
}

/// Draws `t_m² = ((‖b_m‖²/M + σ²)/2)(γ² + Σ_{i<m+L} λ_i²)`, where `γ² ~ χ²₂`
/// and each `λ_i²` is zero with probability `p` and `χ²₂` otherwise.
pub fn sum_representation_sampler(
    state: PrefixState,
    m: usize,
    l: usize,
    sigma2: f64,
    m_tx: usize,
    rng: &mut Rng,
) -> f64 {
    let p = state.p(sigma2, m_tx);
    let scale = 0.5 * (state.cur() / m_tx as f64 + sigma2);
    let mut acc = -2.0 * rng.uniform_open().ln();
    for _ in 1..m + l {
        if rng.uniform() >= p {
            acc -= 2.0 * rng.uniform_open().ln();
        }
    }
    scale * acc
}

/// MGF `E{e^{s t_m²}} = [1 − (‖b_{m−1}‖²/M + σ²)s]^{m+L−1} / [1 − (‖b_m‖²/M + σ²)s]^{m+L}`.
pub fn sum_representation_mgf(
    state: PrefixState,
    m: usize,
    l: usize,
    sigma2: f64,
    m_tx: usize,
    s: f64,
) -> f64 {
    let n = (m + l) as i32;
    let a_prev = state.prev() / m_tx as f64 + sigma2;
    let a_cur = state.cur() / m_tx as f64 + sigma2;
    (1.0 - a_prev * s).powi(n - 1) / (1.0 - a_cur * s).powi(n)
}
