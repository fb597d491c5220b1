//! Depth-first sphere decoder over the l², l∞ and l~∞ pruning metrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{radius_l2, radius_linf, radius_ltilde};
use crate::error::{domain, Error, Result};
use crate::model::DecodeProblem;

/// Pruning metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NormKind {
    L2,
    Linf,
    LtildeInf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L2, NormKind::Linf, NormKind::LtildeInf];

    pub fn name(self) -> &'static str {
        match self {
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
            NormKind::LtildeInf => "ltildeinf",
        }
    }

    pub fn parse(s: &str) -> Option<NormKind> {
        match s {
            "l2" => Some(NormKind::L2),
            "linf" => Some(NormKind::Linf),
            "ltildeinf" => Some(NormKind::LtildeInf),
            _ => None,
        }
    }

    /// `C²` chosen so the transmitted vector lies inside the search region
    /// with probability `1 − eps`.
    pub fn radius2(self, eps: f64, n: usize, sigma2: f64) -> Result<f64> {
        match self {
            NormKind::L2 => radius_l2(eps, n, sigma2),
            NormKind::Linf => radius_linf(eps, n, sigma2),
            NormKind::LtildeInf => radius_ltilde(eps, n, sigma2),
        }
    }
}

/// Radius of a single decoding run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusSpec {
    /// Radius `C` (not squared).
    Explicit(f64),
    /// Radius derived from the in-region probability `1 − eps`.
    Epsilon(f64),
}

/// Increasing-radius schedule for restarted decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartSchedule {
    eps: Vec<f64>,
    max_runs: usize,
}

impl RestartSchedule {
    pub fn new(eps: Vec<f64>, max_runs: usize) -> Result<Self> {
        if eps.is_empty() || max_runs == 0 {
            return domain("restart schedule must be nonempty");
        }
        if eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return domain("schedule probabilities must lie in (0, 1)");
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return domain("schedule probabilities must be strictly decreasing");
        }
        Ok(RestartSchedule { eps, max_runs })
    }

    /// `ε_i = 0.1^i` for `i = 1..=max_runs`.
    pub fn geometric(max_runs: usize) -> Result<Self> {
        let eps = (1..=max_runs as i32).map(|i| 0.1f64.powi(i)).collect();
        Self::new(eps, max_runs)
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn max_runs(&self) -> usize {
        self.max_runs
    }

    /// Squared radii `C²` of the runs that may be attempted, for one norm.
    pub fn radii2(&self, norm: NormKind, n: usize, sigma2: f64) -> Result<Vec<f64>> {
        self.eps
            .iter()
            .take(self.max_runs)
            .map(|&e| norm.radius2(e, n, sigma2))
            .collect()
    }
}

/// Result of one decoding call.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Decision as constellation indices, absent if no leaf met the constraint.
    pub decision: Option<Vec<usize>>,
    /// Full metric of the decision under the active norm (squared for l²);
    /// infinite when there is no decision.
    pub metric: f64,
    /// `S_k` for `k = 1..=M`, summed over all runs.
    pub nodes_per_level: Vec<u64>,
    /// `S_k` of each individual run.
    pub per_run_nodes: Vec<Vec<u64>>,
    pub runs_used: usize,
    pub found_leaf: bool,
}

impl DecodeOutcome {
    pub fn total_nodes(&self) -> u64 {
        self.nodes_per_level.iter().sum()
    }
}

/// One step of the recursive metric.
pub fn partial_metric_update(norm: NormKind, parent_metric: f64, residual: Complex64) -> f64 {
    match norm {
        NormKind::L2 => parent_metric + residual.norm_sqr(),
        NormKind::Linf => parent_metric.max(residual.norm()),
        NormKind::LtildeInf => parent_metric.max(residual.re.abs()).max(residual.im.abs()),
    }
}

/// Metric of the bottom `L` entries of `y`, which every node inherits.
pub fn root_metric(problem: &DecodeProblem, norm: NormKind) -> f64 {
    problem.y[problem.m..]
        .iter()
        .fold(0.0, |acc, &z| partial_metric_update(norm, acc, z))
}

/// Threshold in metric units: `C²` for l², `C` otherwise.
pub fn threshold(problem: &DecodeProblem, norm: NormKind, radius: RadiusSpec) -> Result<f64> {
    let c2 = match radius {
        RadiusSpec::Explicit(c) => {
            if !(c > 0.0) {
                return domain(format!("radius must be positive, got {c}"));
            }
            c * c
        }
        RadiusSpec::Epsilon(eps) => norm.radius2(eps, problem.n, problem.sigma2)?,
    };
    Ok(threshold_from_c2(norm, c2))
}

fn threshold_from_c2(norm: NormKind, c2: f64) -> f64 {
    match norm {
        NormKind::L2 => c2,
        _ => c2.sqrt(),
    }
}

fn better(metric: f64, idx: &[usize], best_metric: f64, best: &Option<Vec<usize>>) -> bool {
    match best {
        None => true,
        Some(b) => metric < best_metric || (metric == best_metric && idx < b.as_slice()),
    }
}

struct Search<'a> {
    problem: &'a DecodeProblem,
    norm: NormKind,
    thr: f64,
    order: &'a [usize],
    d: Vec<usize>,
    nodes: Vec<u64>,
    best: Option<Vec<usize>>,
    best_metric: f64,
}

impl Search<'_> {
    fn descend(&mut self, row: usize, parent: f64) {
        let p = self.problem;
        let pts = p.constellation.points();
        let mut s = p.y[row];
        for j in row + 1..p.m {
            s -= p.r[(row, j)] * pts[self.d[j]];
        }
        let rii = p.r[(row, row)];
        let level = p.m - row;
        for &c in self.order {
            let met = partial_metric_update(self.norm, parent, s - rii * pts[c]);
            if met > self.thr {
                continue;
            }
            self.nodes[level - 1] += 1;
            self.d[row] = c;
            if row == 0 {
                if better(met, &self.d, self.best_metric, &self.best) {
                    self.best = Some(self.d.clone());
                    self.best_metric = met;
                }
            } else {
                self.descend(row - 1, met);
            }
        }
    }
}

/// Single fixed-radius run visiting children in the given index order.
pub fn decode_fixed_with_order(
    problem: &DecodeProblem,
    norm: NormKind,
    radius: RadiusSpec,
    order: &[usize],
) -> Result<DecodeOutcome> {
    let q = problem.constellation.len();
    let mut seen = vec![false; q];
    for &c in order {
        if c >= q || std::mem::replace(&mut seen[c], true) {
            return domain("child order must be a permutation of the constellation indices");
        }
    }
    if order.len() != q {
        return domain("child order must be a permutation of the constellation indices");
    }
    let thr = threshold(problem, norm, radius)?;
    Ok(search(problem, norm, thr, order))
}

fn search(problem: &DecodeProblem, norm: NormKind, thr: f64, order: &[usize]) -> DecodeOutcome {
    let base = root_metric(problem, norm);
    let mut search = Search {
        problem,
        norm,
        thr,
        order,
        d: vec![0; problem.m],
        nodes: vec![0; problem.m],
        best: None,
        best_metric: f64::INFINITY,
    };
    if base <= thr {
        search.descend(problem.m - 1, base);
    }
    let found = search.best.is_some();
    DecodeOutcome {
        decision: search.best,
        metric: search.best_metric,
        per_run_nodes: vec![search.nodes.clone()],
        nodes_per_level: search.nodes,
        runs_used: 1,
        found_leaf: found,
    }
}

/// Single fixed-radius run; children visited in constellation-index order.
pub fn decode_fixed(
    problem: &DecodeProblem,
    norm: NormKind,
    radius: RadiusSpec,
) -> Result<DecodeOutcome> {
    let order: Vec<usize> = (0..problem.constellation.len()).collect();
    decode_fixed_with_order(problem, norm, radius, &order)
}

/// Reruns [`decode_fixed`] along the schedule until a leaf is found.
pub fn decode_restart(
    problem: &DecodeProblem,
    norm: NormKind,
    schedule: &RestartSchedule,
) -> Result<DecodeOutcome> {
    let radii2 = schedule.radii2(norm, problem.n, problem.sigma2)?;
    decode_restart_radii2(problem, norm, &radii2)
}

/// [`decode_restart`] over precomputed squared radii `C²`, tried in order.
pub fn decode_restart_radii2(
    problem: &DecodeProblem,
    norm: NormKind,
    radii2: &[f64],
) -> Result<DecodeOutcome> {
    if radii2.is_empty() || radii2.iter().any(|&c2| !(c2 > 0.0)) {
        return domain("restart needs at least one positive radius");
    }
    let order: Vec<usize> = (0..problem.constellation.len()).collect();
    let mut total = vec![0u64; problem.m];
    let mut per_run = Vec::new();
    for &c2 in radii2 {
        let run = search(problem, norm, threshold_from_c2(norm, c2), &order);
        for (t, n) in total.iter_mut().zip(&run.nodes_per_level) {
            *t += n;
        }
        per_run.push(run.nodes_per_level);
        if run.found_leaf {
            return Ok(DecodeOutcome {
                decision: run.decision,
                metric: run.metric,
                nodes_per_level: total,
                runs_used: per_run.len(),
                per_run_nodes: per_run,
                found_leaf: true,
            });
        }
    }
    Ok(DecodeOutcome {
        decision: None,
        metric: f64::INFINITY,
        nodes_per_level: total,
        runs_used: per_run.len(),
        per_run_nodes: per_run,
        found_leaf: false,
    })
}

/// Full metric of a candidate, accumulated in the same order as the search.
pub fn full_metric(problem: &DecodeProblem, norm: NormKind, idx: &[usize]) -> f64 {
    let pts = problem.constellation.points();
    let mut met = root_metric(problem, norm);
    for row in (0..problem.m).rev() {
        let mut s = problem.y[row];
        for j in row + 1..problem.m {
            s -= problem.r[(row, j)] * pts[idx[j]];
        }
        met = partial_metric_update(norm, met, s - problem.r[(row, row)] * pts[idx[row]]);
    }
    met
}

/// Brute-force minimizer of the full metric with the decoder's tie-break.
///
/// # Errors
/// [`Error::SizeGuard`] when `|𝒜|^M > 10⁶`.
pub fn exhaustive_decode(problem: &DecodeProblem, norm: NormKind) -> Result<Vec<usize>> {
    let q = problem.constellation.len();
    let leaves = (q as u128).pow(problem.m as u32);
    if leaves > 1_000_000 {
        return Err(Error::SizeGuard(leaves));
    }
    let mut idx = vec![0usize; problem.m];
    let mut best = None;
    let mut best_metric = f64::INFINITY;
    loop {
        let met = full_metric(problem, norm, &idx);
        if better(met, &idx, best_metric, &best) {
            best = Some(idx.clone());
            best_metric = met;
        }
        // odometer with the last antenna slowest
        let mut pos = 0;
        loop {
            if pos == problem.m {
                return Ok(best.expect("at least one leaf"));
            }
            idx[pos] += 1;
            if idx[pos] < q {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
