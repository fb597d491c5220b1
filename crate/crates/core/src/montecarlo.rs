//! Seeded parallel trial runner and empirical-distribution validators.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::rho_c;
use crate::decoder::{decode_restart_radii2, DecodeOutcome, NormKind, RestartSchedule};
use crate::error::{domain, Result};
use crate::model::{
    build_problem, qr, sample_channel, sample_noise, sample_symbols, snr_db_to_sigma2,
    Constellation, Rng, SystemConfig,
};

/// How each trial chooses its radius.
#[derive(Debug, Clone, PartialEq)]
pub enum RadiusPolicy {
    /// One run at the ε-matched radius; no leaf counts as an error.
    Fixed(f64),
    Restart(RestartSchedule),
}

/// A Monte Carlo experiment over an SNR grid.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub m: usize,
    pub n: usize,
    pub constellation: Constellation,
    pub norms: Vec<NormKind>,
    pub radius: RadiusPolicy,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl TrialPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.snr_db.is_empty() || self.norms.is_empty() {
            return domain("plan needs at least one trial, SNR point and norm");
        }
        self.config(0)?;
        Ok(())
    }

    /// System configuration at grid point `point`.
    pub fn config(&self, point: usize) -> Result<SystemConfig> {
        SystemConfig::new(
            self.m,
            self.n,
            snr_db_to_sigma2(self.snr_db[point]),
            self.constellation.clone(),
        )
    }
}

/// Sample mean with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub half_width: f64,
    pub n: u64,
}

impl EstimateWithCI {
    /// From the integer sum and sum of squares of `n` observations.
    pub fn from_sums(sum: u128, sum_sq: u128, n: u64) -> Self {
        let nf = n as f64;
        let mean = sum as f64 / nf;
        let var = if n > 1 {
            ((sum_sq as f64 - sum as f64 * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        EstimateWithCI {
            mean,
            half_width: 1.96 * (var / nf).sqrt(),
            n,
        }
    }
}

/// Integer running sums for one norm at one grid point.
#[derive(Debug, Clone, Default)]
struct NormAcc {
    errors: u64,
    no_leaf: u64,
    level_sum: Vec<u128>,
    level_sq: Vec<u128>,
    total_sum: u128,
    total_sq: u128,
    runs_sum: u128,
    runs_sq: u128,
}

impl NormAcc {
    fn new(m: usize) -> Self {
        NormAcc {
            level_sum: vec![0; m],
            level_sq: vec![0; m],
            ..Default::default()
        }
    }

    fn add(&mut self, out: &DecodeOutcome, truth: &[usize]) {
        if out.decision.as_deref() != Some(truth) {
            self.errors += 1;
        }
        if !out.found_leaf {
            self.no_leaf += 1;
        }
        for (k, &s) in out.nodes_per_level.iter().enumerate() {
            self.level_sum[k] += s as u128;
            self.level_sq[k] += (s as u128) * (s as u128);
        }
        let t = out.total_nodes() as u128;
        self.total_sum += t;
        self.total_sq += t * t;
        self.runs_sum += out.runs_used as u128;
        self.runs_sq += (out.runs_used as u128).pow(2);
    }

    fn merge(&mut self, o: &NormAcc) {
        self.errors += o.errors;
        self.no_leaf += o.no_leaf;
        for k in 0..self.level_sum.len() {
            self.level_sum[k] += o.level_sum[k];
            self.level_sq[k] += o.level_sq[k];
        }
        self.total_sum += o.total_sum;
        self.total_sq += o.total_sq;
        self.runs_sum += o.runs_sum;
        self.runs_sq += o.runs_sq;
    }
}

#[derive(Debug, Clone)]
struct PointAcc {
    norms: Vec<NormAcc>,
    tpb_violations: u64,
}

impl PointAcc {
    fn new(norms: usize, m: usize) -> Self {
        PointAcc {
            norms: vec![NormAcc::new(m); norms],
            tpb_violations: 0,
        }
    }

    fn merge(mut self, o: PointAcc) -> Self {
        for (a, b) in self.norms.iter_mut().zip(&o.norms) {
            a.merge(b);
        }
        self.tpb_violations += o.tpb_violations;
        self
    }
}

/// Statistics of one norm at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSummary {
    pub norm: NormKind,
    pub snr_db: f64,
    /// Vector error rate `P[d̂ ≠ d′]`.
    pub error_rate: EstimateWithCI,
    /// Fraction of trials in which no leaf was found.
    pub no_leaf_rate: f64,
    /// `S_k` per level, summed over restarts.
    pub per_level: Vec<EstimateWithCI>,
    pub total: EstimateWithCI,
    pub runs: EstimateWithCI,
}

/// Outcome of a whole plan at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub snr_db: f64,
    pub norms: Vec<NormSummary>,
    /// Trials in which `S∞,k > S2,k` for some `k ≤ k̄_I`; only checked for a
    /// fixed radius with both l² and l∞ in the plan.
    pub tpb_violations: u64,
}

/// Child stream of trial `trial` at grid point `point`.
pub fn trial_rng(seed: u64, point: usize, trial: u64) -> Rng {
    Rng::stream(seed, ((point as u64) << 40) | trial)
}

/// Draws one realization and decodes it with every norm of the plan.
pub fn run_trial(
    plan: &TrialPlan,
    point: usize,
    trial: u64,
) -> Result<(Vec<usize>, Vec<DecodeOutcome>)> {
    let cfg = plan.config(point)?;
    let radii2 = point_radii2(plan, &cfg)?;
    trial_with_radii(plan, &cfg, &radii2, point, trial)
}

/// Squared radii per norm of the plan at one grid point; a fixed policy is a
/// one-run schedule.
fn point_radii2(plan: &TrialPlan, cfg: &SystemConfig) -> Result<Vec<Vec<f64>>> {
    plan.norms
        .iter()
        .map(|&norm| match &plan.radius {
            RadiusPolicy::Fixed(eps) => Ok(vec![norm.radius2(*eps, cfg.n, cfg.sigma2)?]),
            RadiusPolicy::Restart(s) => s.radii2(norm, cfg.n, cfg.sigma2),
        })
        .collect()
}

fn trial_with_radii(
    plan: &TrialPlan,
    cfg: &SystemConfig,
    radii2: &[Vec<f64>],
    point: usize,
    trial: u64,
) -> Result<(Vec<usize>, Vec<DecodeOutcome>)> {
    let mut rng = trial_rng(plan.seed, point, trial);
    let truth = sample_symbols(cfg, &mut rng);
    let h = sample_channel(cfg, &mut rng);
    let problem = build_problem(&h, &truth, cfg, &mut rng)?;
    let outs = plan
        .norms
        .iter()
        .zip(radii2)
        .map(|(&norm, r)| decode_restart_radii2(&problem, norm, r))
        .collect::<Result<Vec<_>>>()?;
    Ok((truth, outs))
}

fn run_point(plan: &TrialPlan, point: usize) -> Result<PointSummary> {
    let l2 = plan.norms.iter().position(|&n| n == NormKind::L2);
    let li = plan.norms.iter().position(|&n| n == NormKind::Linf);
    let tpb = match (&plan.radius, l2, li) {
        (RadiusPolicy::Fixed(eps), Some(a), Some(b)) => {
            let kbi =
                (rho_c(*eps, plan.n)?.floor() as i64 - (plan.n - plan.m) as i64).max(0) as usize;
            Some((a, b, kbi.min(plan.m)))
        }
        _ => None,
    };
    let m = plan.m;
    let nn = plan.norms.len();
    let cfg = plan.config(point)?;
    let radii2 = point_radii2(plan, &cfg)?;
    let acc = (0..plan.trials)
        .into_par_iter()
        .try_fold(
            || PointAcc::new(nn, m),
            |mut acc, t| -> Result<PointAcc> {
                let (truth, outs) = trial_with_radii(plan, &cfg, &radii2, point, t)?;
                for (a, o) in acc.norms.iter_mut().zip(&outs) {
                    a.add(o, &truth);
                }
                if let Some((a, b, kbi)) = tpb {
                    let (s2, si) = (&outs[a].nodes_per_level, &outs[b].nodes_per_level);
                    if (0..kbi).any(|k| si[k] > s2[k]) {
                        acc.tpb_violations += 1;
                    }
                }
                Ok(acc)
            },
        )
        .try_reduce(|| PointAcc::new(nn, m), |a, b| Ok(a.merge(b)))?;
    let n = plan.trials;
    let snr_db = plan.snr_db[point];
    let norms = plan
        .norms
        .iter()
        .zip(&acc.norms)
        .map(|(&norm, a)| NormSummary {
            norm,
            snr_db,
            error_rate: EstimateWithCI::from_sums(a.errors as u128, a.errors as u128, n),
            no_leaf_rate: a.no_leaf as f64 / n as f64,
            per_level: (0..m)
                .map(|k| EstimateWithCI::from_sums(a.level_sum[k], a.level_sq[k], n))
                .collect(),
            total: EstimateWithCI::from_sums(a.total_sum, a.total_sq, n),
            runs: EstimateWithCI::from_sums(a.runs_sum, a.runs_sq, n),
        })
        .collect();
    Ok(PointSummary {
        snr_db,
        norms,
        tpb_violations: acc.tpb_violations,
    })
}

/// Runs every grid point of the plan.
pub fn run_plan(plan: &TrialPlan) -> Result<Vec<PointSummary>> {
    plan.validate()?;
    (0..plan.snr_db.len()).map(|p| run_point(plan, p)).collect()
}

/// Vector error rate per (norm, SNR).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRatePoint {
    pub norm: NormKind,
    pub snr_db: f64,
    pub estimate: EstimateWithCI,
}

pub fn run_error_rate(plan: &TrialPlan) -> Result<Vec<ErrorRatePoint>> {
    Ok(run_plan(plan)?
        .into_iter()
        .flat_map(|p| p.norms)
        .map(|s| ErrorRatePoint {
            norm: s.norm,
            snr_db: s.snr_db,
            estimate: s.error_rate,
        })
        .collect())
}

/// Per-level node counts for a fixed-radius plan.
pub fn run_node_counts(plan: &TrialPlan) -> Result<Vec<PointSummary>> {
    if !matches!(plan.radius, RadiusPolicy::Fixed(_)) {
        return domain("node-count runs need a single fixed ε");
    }
    run_plan(plan)
}

/// Accumulated restart complexity.
pub fn run_restart_complexity(plan: &TrialPlan) -> Result<Vec<PointSummary>> {
    match &plan.radius {
        RadiusPolicy::Restart(s) if s.max_runs() >= 12 && s.eps().len() >= 12 => run_plan(plan),
        _ => domain("restart complexity needs a schedule with at least 12 runs"),
    }
}

/// Samples of the partial metrics for a fixed error prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSamples {
    /// `component[m − 1]` holds samples of `|[z(b)]_{M−m+1}|`, `m = 1..=k`.
    pub component: Vec<Vec<f64>>,
    /// `‖z_k(b_k)‖₂`.
    pub l2: Vec<f64>,
    /// `‖z_k(b_k)‖∞`.
    pub linf: Vec<f64>,
    /// `‖z_k(b_k)‖~∞`.
    pub ltilde: Vec<f64>,
}

/// Draws `z_k(b_k) = [R; 0] b + n` restricted to the bottom `k + L` rows,
/// with fresh `R` and noise per sample. `b_prefix[0]` is the entry at antenna
/// `M − k + 1` and the last element the entry at antenna `M`.
pub fn run_metric_distribution(
    b_prefix: &[Complex64],
    cfg: &SystemConfig,
    samples: usize,
    rng: &mut Rng,
) -> Result<MetricSamples> {
    cfg.validate()?;
    let (m, k) = (cfg.m, b_prefix.len());
    if k == 0 || k > m {
        return domain(format!("prefix length must lie in 1..={m}, got {k}"));
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[m - k..].copy_from_slice(b_prefix);
    let mut out = MetricSamples {
        component: vec![Vec::with_capacity(samples); k],
        l2: Vec::with_capacity(samples),
        linf: Vec::with_capacity(samples),
        ltilde: Vec::with_capacity(samples),
    };
    for _ in 0..samples {
        let h = sample_channel(cfg, rng);
        let r = qr(&h)?.r;
        let w = sample_noise(cfg, rng);
        let (mut s2, mut si, mut st) = (0.0f64, 0.0f64, 0.0f64);
        let mut push = |z: Complex64| {
            s2 += z.norm_sqr();
            si = si.max(z.norm());
            st = st.max(z.re.abs()).max(z.im.abs());
        };
        for &z in &w[m..] {
            push(z);
        }
        for lvl in 1..=k {
            let row = m - lvl;
            let mut z = w[row];
            for j in row..m {
                z += r[(row, j)] * b[j];
            }
            out.component[lvl - 1].push(z.norm());
            push(z);
        }
        out.l2.push(s2.sqrt());
        out.linf.push(si);
        out.ltilde.push(st);
    }
    Ok(out)
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `sqrt(−ln(α/2)/2)` at α = 1%.
pub const KS_C_1PCT: f64 = 1.627_623_630_718_73;

/// Asymptotic 1% critical value of the one-sample statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    KS_C_1PCT / (n as f64).sqrt()
}

/// Asymptotic 1% critical value of the two-sample statistic.
pub fn ks_critical_two_sample_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_C_1PCT * ((n + m) / (n * m)).sqrt()
}
