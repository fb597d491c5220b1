//! Constellations, the i.i.d. Rayleigh channel, noise, QR reduction to the
//! triangular decode problem, and pairwise-difference profiles.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Finite symbol alphabet with zero mean and unit average energy.
///
/// Every point is stored both as a complex number and as integer grid
/// coordinates `(a, b)` with `point = (a + jb) / sqrt(scale2)`, which is what
/// makes exact difference norms possible.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    label: String,
    points: Vec<Complex64>,
    grid: Vec<(i32, i32)>,
    scale2: u64,
}

impl Constellation {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integer grid coordinates of each point.
    pub fn grid(&self) -> &[(i32, i32)] {
        &self.grid
    }

    /// Squared grid scale: `|point|² = (a² + b²) / scale2`.
    pub fn scale2(&self) -> u64 {
        self.scale2
    }
}

/// Builds one of the supported constellations: `bpsk`, `4qam`, `16qam`.
pub fn make_constellation(label: &str) -> Result<Constellation> {
    let (levels, real_only): (&[i32], bool) = match label {
        "bpsk" => (&[-1, 1], true),
        "4qam" => (&[-1, 1], false),
        "16qam" => (&[-3, -1, 1, 3], false),
        other => return Err(Error::UnknownConstellation(other.to_string())),
    };
    let mut grid = Vec::new();
    if real_only {
        grid.extend(levels.iter().map(|&a| (a, 0)));
    } else {
        for &a in levels {
            for &b in levels {
                grid.push((a, b));
            }
        }
    }
    let energy: i64 = grid.iter().map(|&(a, b)| (a * a + b * b) as i64).sum();
    let scale2 = (energy / grid.len() as i64) as u64;
    let s = (scale2 as f64).sqrt();
    let points = grid
        .iter()
        .map(|&(a, b)| Complex64::new(a as f64 / s, b as f64 / s))
        .collect();
    Ok(Constellation {
        label: label.to_string(),
        points,
        grid,
        scale2,
    })
}

/// Shape of a scalar difference `b = d′ − d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentClass {
    Zero,
    PurelyReal,
    PurelyImag,
    General,
}

/// One group of ordered symbol pairs sharing a difference norm and class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileEntry {
    /// `|b|²` times the profile denominator.
    pub sq_norm: u64,
    pub class: ComponentClass,
    /// Number of ordered pairs `(d′, d)` in this group.
    pub weight: u64,
}

/// Multiset of pairwise differences of a constellation with exact norms.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceProfile {
    pub entries: Vec<ProfileEntry>,
    pub denominator: u64,
}

impl DifferenceProfile {
    /// Largest squared pairwise distance `B²`.
    pub fn max_sq_distance(&self) -> f64 {
        let top = self.entries.iter().map(|e| e.sq_norm).max().unwrap_or(0);
        top as f64 / self.denominator as f64
    }

    /// Total weight per distinct `sq_norm`, ignoring the component class.
    pub fn by_norm(&self) -> Vec<(u64, u64)> {
        let mut acc = BTreeMap::new();
        for e in &self.entries {
            *acc.entry(e.sq_norm).or_insert(0u64) += e.weight;
        }
        acc.into_iter().collect()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Groups all `|𝒜|²` ordered differences by exact squared norm and class.
pub fn difference_profile(c: &Constellation) -> DifferenceProfile {
    let mut acc: BTreeMap<(u64, ComponentClass), u64> = BTreeMap::new();
    for &(a1, b1) in &c.grid {
        for &(a0, b0) in &c.grid {
            let (da, db) = ((a1 - a0) as i64, (b1 - b0) as i64);
            let class = match (da == 0, db == 0) {
                (true, true) => ComponentClass::Zero,
                (false, true) => ComponentClass::PurelyReal,
                (true, false) => ComponentClass::PurelyImag,
                (false, false) => ComponentClass::General,
            };
            *acc.entry(((da * da + db * db) as u64, class)).or_insert(0) += 1;
        }
    }
    let g = acc.keys().fold(c.scale2, |g, &(n, _)| gcd(g, n));
    DifferenceProfile {
        entries: acc
            .into_iter()
            .map(|((n, class), weight)| ProfileEntry {
                sq_norm: n / g,
                class,
                weight,
            })
            .collect(),
        denominator: c.scale2 / g,
    }
}

/// MIMO system parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas.
    pub m: usize,
    /// Receive antennas.
    pub n: usize,
    /// Noise variance; SNR is `1/σ²`.
    pub sigma2: f64,
    pub constellation: Constellation,
}

impl SystemConfig {
    pub fn new(m: usize, n: usize, sigma2: f64, constellation: Constellation) -> Result<Self> {
        let cfg = SystemConfig {
            m,
            n,
            sigma2,
            constellation,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration at an SNR given in dB.
    pub fn from_snr_db(
        m: usize,
        n: usize,
        snr_db: f64,
        constellation: Constellation,
    ) -> Result<Self> {
        Self::new(m, n, snr_db_to_sigma2(snr_db), constellation)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n < self.m {
            return domain(format!("need N ≥ M ≥ 1, got M={} N={}", self.m, self.n));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return domain(format!(
                "noise variance must be positive, got {}",
                self.sigma2
            ));
        }
        Ok(())
    }

    /// `L = N − M`.
    pub fn l(&self) -> usize {
        self.n - self.m
    }
}

/// `σ² = 10^{−snr_db/10}`.
pub fn snr_db_to_sigma2(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Seeded generator; child streams are derived from `(seed, stream)` so each
/// Monte Carlo trial owns an independent, reproducible sequence.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::stream(seed, 0)
    }

    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on (0, 1].
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.inner.gen::<f64>()
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Pair of independent standard normals by Box–Muller.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.uniform_open().ln()).sqrt();
        let (s, c) = (2.0 * PI * self.uniform()).sin_cos();
        (r * c, r * s)
    }

    pub fn normal(&mut self) -> f64 {
        self.normal_pair().0
    }

    /// Circularly symmetric complex Gaussian with `E|z|² = var`.
    pub fn complex_gaussian(&mut self, var: f64) -> Complex64 {
        let (a, b) = self.normal_pair();
        let s = (0.5 * var).sqrt();
        Complex64::new(s * a, s * b)
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `Aᴴ v`.
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].conj() * v[i]).sum())
            .collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Full QR factorization `H = Q [R; 0]` with a real nonnegative diagonal.
#[derive(Debug, Clone)]
pub struct Qr {
    /// Unitary N×N factor.
    pub q: CMatrix,
    /// Upper-triangular M×M factor.
    pub r: CMatrix,
}

/// Householder QR of an N×M matrix (N ≥ M), with the phases of the diagonal
/// moved into the columns of Q.
pub fn qr(h: &CMatrix) -> Result<Qr> {
    let (n, m) = (h.rows, h.cols);
    if n < m {
        return Err(Error::DimensionMismatch(format!(
            "QR needs rows ≥ cols, got {n}×{m}"
        )));
    }
    let mut a = h.clone();
    let mut q = CMatrix::identity(n);
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    for j in 0..m {
        let len = n - j;
        let norm_x = (j..n).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = a[(j, j)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;
        for k in 0..len {
            v[k] = a[(j + k, j)];
        }
        v[0] -= alpha;
        let vn2: f64 = v[..len].iter().map(|z| z.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        for c in j..m {
            let s: Complex64 = (0..len).map(|k| v[k].conj() * a[(j + k, c)]).sum();
            let f = s * (2.0 / vn2);
            for k in 0..len {
                let vk = v[k];
                a[(j + k, c)] -= vk * f;
            }
        }
        for i in 0..n {
            let s: Complex64 = (0..len).map(|k| q[(i, j + k)] * v[k]).sum();
            let f = s * (2.0 / vn2);
            for k in 0..len {
                let vk = v[k];
                q[(i, j + k)] -= f * vk.conj();
            }
        }
    }
    let mut r = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            r[(i, j)] = a[(i, j)];
        }
    }
    for j in 0..m {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm == 0.0 {
            continue;
        }
        let phase = d / norm;
        for c in j..m {
            r[(j, c)] *= phase.conj();
        }
        r[(j, j)] = Complex64::new(norm, 0.0);
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(Qr { q, r })
}

/// Channel with i.i.d. `CN(0, 1/M)` entries, N×M.
pub fn sample_channel(cfg: &SystemConfig, rng: &mut Rng) -> CMatrix {
    let var = 1.0 / cfg.m as f64;
    let mut h = CMatrix::zeros(cfg.n, cfg.m);
    for z in h.data.iter_mut() {
        *z = rng.complex_gaussian(var);
    }
    h
}

/// Uniformly drawn transmit vector as constellation indices.
pub fn sample_symbols(cfg: &SystemConfig, rng: &mut Rng) -> Vec<usize> {
    let q = cfg.constellation.len();
    (0..cfg.m).map(|_| rng.index(q)).collect()
}

/// Noise vector with i.i.d. `CN(0, σ²)` entries, length N.
pub fn sample_noise(cfg: &SystemConfig, rng: &mut Rng) -> Vec<Complex64> {
    (0..cfg.n)
        .map(|_| rng.complex_gaussian(cfg.sigma2))
        .collect()
}

/// Triangular form `y = Q^H r`, `z(d) = y − [R; 0] d` of one realization.
#[derive(Debug, Clone)]
pub struct DecodeProblem {
    pub r: CMatrix,
    pub y: Vec<Complex64>,
    pub m: usize,
    pub n: usize,
    pub sigma2: f64,
    /// Transmitted vector as constellation indices.
    pub truth: Vec<usize>,
    pub constellation: Constellation,
}

impl DecodeProblem {
    pub fn symbols(&self, idx: &[usize]) -> Vec<Complex64> {
        let pts = self.constellation.points();
        idx.iter().map(|&i| pts[i]).collect()
    }

    /// Residual vector `z(d) = y − [R; 0] d`, length N.
    pub fn residual(&self, idx: &[usize]) -> Vec<Complex64> {
        let d = self.symbols(idx);
        let mut z = self.y.clone();
        for i in 0..self.m {
            for j in i..self.m {
                z[i] -= self.r[(i, j)] * d[j];
            }
        }
        z
    }

    /// `‖r − H d‖²`, which equals `‖z(d)‖²` by unitarity of Q.
    pub fn l2_distance2(&self, idx: &[usize]) -> f64 {
        self.residual(idx).iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Reduces `r = H d′ + w` with an explicit noise vector.
pub fn build_problem_with_noise(
    h: &CMatrix,
    d_true: &[usize],
    w: &[Complex64],
    cfg: &SystemConfig,
) -> Result<DecodeProblem> {
    if h.rows != cfg.n || h.cols != cfg.m || d_true.len() != cfg.m || w.len() != cfg.n {
        return Err(Error::DimensionMismatch(format!(
            "channel {}×{}, data {}, noise {} for M={} N={}",
            h.rows,
            h.cols,
            d_true.len(),
            w.len(),
            cfg.m,
            cfg.n
        )));
    }
    if let Some(&bad) = d_true.iter().find(|&&i| i >= cfg.constellation.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            limit: cfg.constellation.len(),
        });
    }
    let pts = cfg.constellation.points();
    let d: Vec<Complex64> = d_true.iter().map(|&i| pts[i]).collect();
    let mut received = h.mul_vec(&d);
    for (x, n) in received.iter_mut().zip(w) {
        *x += n;
    }
    let Qr { q, r } = qr(h)?;
    Ok(DecodeProblem {
        r,
        y: q.adjoint_mul_vec(&received),
        m: cfg.m,
        n: cfg.n,
        sigma2: cfg.sigma2,
        truth: d_true.to_vec(),
        constellation: cfg.constellation.clone(),
    })
}

/// Draws `w ~ CN(0, σ² I)` and reduces `r = H d′ + w` to triangular form.
pub fn build_problem(
    h: &CMatrix,
    d_true: &[usize],
    cfg: &SystemConfig,
    rng: &mut Rng,
) -> Result<DecodeProblem> {
    let w = sample_noise(cfg, rng);
    build_problem_with_noise(h, d_true, &w, cfg)
}
