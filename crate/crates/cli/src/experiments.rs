use anyhow::Result;
use boxsd_core::analytic::{
    component_cdf_linf, expected_nodes, pep_bounds, sum_representation_sampler, tpb_report,
    LevelValue, PrefixState,
};
use boxsd_core::model::{Rng, SystemConfig};
use boxsd_core::montecarlo::{
    ks_critical_1pct, ks_critical_two_sample_1pct, ks_statistic, ks_two_sample, run_error_rate,
    run_metric_distribution, run_node_counts, run_restart_complexity, RadiusPolicy, TrialPlan,
};
use boxsd_core::special_fn::reg_lower_gamma;
use boxsd_core::Complex64;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{Cell, Table};

pub const ERROR_RATE: &[&str] = &["norm", "snr_db", "p_err", "ci_half_width", "n"];
pub const VS_EPSILON: &[&str] = &[
    "norm",
    "m",
    "n",
    "snr_db",
    "eps",
    "analytic",
    "analytic_lo",
    "analytic_hi",
    "empirical_mean",
    "ci_half_width",
];
pub const VS_LEVEL: &[&str] = &[
    "norm",
    "k",
    "analytic",
    "analytic_lo",
    "analytic_hi",
    "empirical_mean",
    "ci_half_width",
];
pub const VS_SNR: &[&str] = &[
    "norm",
    "snr_db",
    "total_mean",
    "ci_half_width",
    "runs_mean",
    "no_leaf_rate",
    "n",
];
pub const TPB: &[&str] = &[
    "eps",
    "k",
    "a_value",
    "m_bar",
    "v2",
    "vinf",
    "kappa_inf",
    "kappa_2",
    "rho_c",
    "k_bar",
    "k_bar_inst",
];
pub const CDFS: &[&str] = &["check", "k", "prefix", "ks", "critical", "pass"];
pub const PEP: &[&str] = &[
    "snr_db",
    "b_norm2",
    "ub_inf",
    "ub_ltilde",
    "ub_ml",
    "lb_ml",
    "beta",
    "beta_tilde",
];

pub fn columns(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::ErrorRate => ERROR_RATE,
        Experiment::ComplexityVsEpsilon => VS_EPSILON,
        Experiment::ComplexityVsLevel => VS_LEVEL,
        Experiment::ComplexityVsSnr => VS_SNR,
        Experiment::TpbReport => TPB,
        Experiment::ValidateCdfs => CDFS,
        Experiment::PepBounds => PEP,
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Table> {
    let mut t = Table::new(columns(cfg.experiment()));
    match cfg.experiment() {
        Experiment::ErrorRate => error_rate(cfg, &mut t)?,
        Experiment::ComplexityVsEpsilon => vs_epsilon(cfg, &mut t)?,
        Experiment::ComplexityVsLevel => vs_level(cfg, &mut t)?,
        Experiment::ComplexityVsSnr => vs_snr(cfg, &mut t)?,
        Experiment::TpbReport => tpb(cfg, &mut t)?,
        Experiment::ValidateCdfs => cdfs(cfg, &mut t)?,
        Experiment::PepBounds => pep(cfg, &mut t)?,
    }
    Ok(t)
}

fn plan(cfg: &ExperimentConfig, radius: RadiusPolicy, snr_db: Vec<f64>) -> Result<TrialPlan> {
    Ok(TrialPlan {
        m: cfg.system.m,
        n: cfg.system.n,
        constellation: cfg.constellation()?,
        norms: cfg.norm_kinds()?,
        radius,
        snr_db,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}

fn system(cfg: &ExperimentConfig, snr_db: f64) -> Result<SystemConfig> {
    Ok(SystemConfig::from_snr_db(
        cfg.system.m,
        cfg.system.n,
        snr_db,
        cfg.constellation()?,
    )?)
}

/// `(analytic, lo, hi)`; the single value is empty when only bounds exist.
fn analytic_cells(v: LevelValue) -> [Cell; 3] {
    match v {
        LevelValue::Exact(x) => [x.into(), x.into(), x.into()],
        LevelValue::Bounds { lower, upper } => [Cell::Empty, lower.into(), upper.into()],
    }
}

fn error_rate(cfg: &ExperimentConfig, t: &mut Table) -> Result<()> {
    let radius = if cfg.radius.restart {
        RadiusPolicy::Restart(cfg.schedule()?)
    } else {
        RadiusPolicy::Fixed(cfg.radius.eps[0])
    };
    let mut pts = run_error_rate(&plan(cfg, radius, cfg.system.snr_db.clone())?)?;
    pts.sort_by_key(|p| p.norm);
    for p in pts {
        t.push(vec![
            p.norm.name().into(),
            p.snr_db.into(),
            p.estimate.mean.into(),
            p.estimate.half_width.into(),
            cfg.trials.into(),
        ]);
    }
    Ok(())
}

fn vs_epsilon(cfg: &ExperimentConfig, t: &mut Table) -> Result<()> {
    let snr = cfg.system.snr_db[0];
    let sys = system(cfg, snr)?;
    let norms = cfg.norm_kinds()?;
    let mut empirical = Vec::new();
    for &eps in &cfg.radius.eps {
        empirical.push(if cfg.trials > 0 {
            Some(run_node_counts(&plan(cfg, RadiusPolicy::Fixed(eps), vec![snr])?)?.remove(0))
        } else {
            None
        });
    }
    for (ni, &norm) in norms.iter().enumerate() {
        for (ei, &eps) in cfg.radius.eps.iter().enumerate() {
            let [a, lo, hi] = analytic_cells(expected_nodes(norm, &sys, eps)?.total);
            let est = empirical[ei].as_ref().map(|p| p.norms[ni].total);
            t.push(vec![
                norm.name().into(),
                sys.m.into(),
                sys.n.into(),
                snr.into(),
                eps.into(),
                a,
                lo,
                hi,
                est.map(|e| e.mean).into(),
                est.map(|e| e.half_width).into(),
            ]);
        }
    }
    Ok(())
}

fn vs_level(cfg: &ExperimentConfig, t: &mut Table) -> Result<()> {
    let snr = cfg.system.snr_db[0];
    let eps = cfg.radius.eps[0];
    let sys = system(cfg, snr)?;
    let norms = cfg.norm_kinds()?;
    let empirical = if cfg.trials > 0 {
        Some(run_node_counts(&plan(cfg, RadiusPolicy::Fixed(eps), vec![snr])?)?.remove(0))
    } else {
        None
    };
    for (ni, &norm) in norms.iter().enumerate() {
        let rep = expected_nodes(norm, &sys, eps)?;
        for (k, v) in rep.per_level.iter().enumerate() {
            let [a, lo, hi] = analytic_cells(*v);
            let est = empirical.as_ref().map(|p| p.norms[ni].per_level[k]);
            t.push(vec![
                norm.name().into(),
                (k + 1).into(),
                a,
                lo,
                hi,
                est.map(|e| e.mean).into(),
                est.map(|e| e.half_width).into(),
            ]);
        }
    }
    Ok(())
}

fn vs_snr(cfg: &ExperimentConfig, t: &mut Table) -> Result<()> {
    let p = plan(
        cfg,
        RadiusPolicy::Restart(cfg.schedule()?),
        cfg.system.snr_db.clone(),
    )?;
    let pts = run_restart_complexity(&p)?;
    for ni in 0..p.norms.len() {
        for pt in &pts {
            let s = &pt.norms[ni];
            t.push(vec![
                s.norm.name().into(),
                s.snr_db.into(),
                s.total.mean.into(),
                s.total.half_width.into(),
                s.runs.mean.into(),
                s.no_leaf_rate.into(),
                cfg.trials.into(),
            ]);
        }
    }
    Ok(())
}

fn tpb(cfg: &ExperimentConfig, t: &mut Table) -> Result<()> {
    let sys = system(cfg, cfg.system.snr_db[0])?;
    for &eps in &cfg.radius.eps {
        let r = tpb_report(&sys, eps)?;
        for k in 0..sys.m {
            t.push(vec![
                eps.into(),
                (k + 1).into(),
                r.a_values[k].into(),
                r.m_bar[k].into(),
                r.volumes[k].0.into(),
                r.volumes[k].1.into(),
                r.kappa_inf.into(),
                r.kappa_2.into(),
                r.rho_c.into(),
                r.k_bar.into(),
                r.k_bar_inst.into(),
            ]);
        }
    }
    Ok(())
}

fn cdfs(cfg: &ExperimentConfig, t: &mut Table) -> Result<()> {
    let sys = system(cfg, cfg.system.snr_db[0])?;
    let c = &sys.constellation;
    let (m, l, s2) = (sys.m, sys.l(), sys.sigma2);
    let samples = cfg.trials as usize;
    let crit = ks_critical_1pct(samples);
    let crit2 = ks_critical_two_sample_1pct(samples, samples);
    for k in 1..=m.min(3) {
        let mut rng = Rng::stream(cfg.seed, k as u64);
        // grid differences, b[0] at level k
        let pairs: Vec<(i32, i32)> = (0..k)
            .map(|_| {
                let (a, b) = (c.grid()[rng.index(c.len())], c.grid()[rng.index(c.len())]);
                (a.0 - b.0, a.1 - b.1)
            })
            .collect();
        let scale = (c.scale2() as f64).sqrt();
        let b: Vec<Complex64> = pairs
            .iter()
            .map(|&(x, y)| Complex64::new(x as f64, y as f64) / scale)
            .collect();
        let q: Vec<u64> = pairs.iter().map(|&(x, y)| (x * x + y * y) as u64).collect();
        let q_cur: u64 = q.iter().sum();
        let st = PrefixState::new(q_cur - q[0], q_cur, c.scale2())?;
        let label = pairs
            .iter()
            .map(|&(x, y)| format!("{x}{y:+}j"))
            .collect::<Vec<_>>()
            .join(" ");
        let s = run_metric_distribution(&b, &sys, samples, &mut rng)?;
        let dc = ks_statistic(&s.component[k - 1], |x| {
            component_cdf_linf(st, k, l, x * x, s2, m).unwrap_or(f64::NAN)
        });
        let bn = q_cur as f64 / c.scale2() as f64;
        let dn = ks_statistic(&s.l2, |x| {
            reg_lower_gamma((k + l) as f64, x * x / (bn / m as f64 + s2)).unwrap_or(f64::NAN)
        });
        let direct: Vec<f64> = s.component[k - 1].iter().map(|x| x * x).collect();
        let rep: Vec<f64> = (0..samples)
            .map(|_| sum_representation_sampler(st, k, l, s2, m, &mut rng))
            .collect();
        let ds = ks_two_sample(&direct, &rep);
        for (name, d, cr) in [
            ("component_linf", dc, crit),
            ("norm_l2", dn, crit),
            ("sum_representation", ds, crit2),
        ] {
            t.push(vec![
                name.into(),
                k.into(),
                label.clone().into(),
                d.into(),
                cr.into(),
                (d < cr).into(),
            ]);
        }
    }
    Ok(())
}

fn pep(cfg: &ExperimentConfig, t: &mut Table) -> Result<()> {
    let c = cfg.constellation()?;
    let b2 = match cfg.pep.b_norm2 {
        Some(b) => b,
        None => {
            let pts = c.points();
            pts.iter()
                .flat_map(|a| pts.iter().map(move |b| (a - b).norm_sqr()))
                .filter(|&d| d > 1e-12)
                .fold(f64::INFINITY, f64::min)
        }
    };
    for &snr in &cfg.system.snr_db {
        let sys = system(cfg, snr)?;
        let p = pep_bounds(sys.n, sys.m, b2, 1.0 / sys.sigma2)?;
        t.push(vec![
            snr.into(),
            b2.into(),
            p.ub_inf.into(),
            p.ub_ltilde.into(),
            p.ub_ml.into(),
            p.lb_ml.into(),
            p.beta.into(),
            p.beta_tilde.into(),
        ]);
    }
    Ok(())
}
