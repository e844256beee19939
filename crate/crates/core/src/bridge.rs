//! Brownian bridge paths and the limit laws of normalised distances.
//!
//! A bridge on a probability grid is built from a Wiener path with
//! independent Gaussian increments, `B(p) = W(p) − p·W(1)`. Restricting the
//! grid to the jump probabilities of a step law gives the exact joint law of
//! `(B(q_1), …, B(q_{m−1}))` without any matrix factorisation.
//!
//! Limit draws:
//!
//! ```text
//! discrete:    (Σ_j |B(q_j)| (x_{j+1} − x_j)^r)^{1/r}
//! continuous:  (∫₀¹ |B(p)|^r / f(F⁻¹(p))^r dp)^{1/r}
//! ```

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dist::{check_order, DistributionModel, EmpiricalDistribution, StepDistribution};
use crate::error::{LabError, Result};
use crate::hazard::{condition2_verdict, Verdict};
use crate::mallows::distance_step_step;

/// Default number of grid points for continuous limit draws.
pub const DEFAULT_GRID_SIZE: usize = 4097;

/// A bridge sampled on a probability grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl BridgePath {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `m` equally spaced points from 0 to 1 inclusive.
pub fn uniform_grid(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(LabError::domain(format!("a bridge grid needs at least 2 points, got {m}")));
    }
    let h = (m - 1) as f64;
    let mut grid: Vec<f64> = (0..m).map(|k| k as f64 / h).collect();
    grid[m - 1] = 1.0;
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
        return Err(LabError::domain("bridge grid must start at 0 and end at 1"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LabError::domain("bridge grid must be strictly increasing"));
    }
    Ok(())
}

/// Fill `out` with `B(grid[k])`; the grid must already be validated.
fn fill_bridge<R: Rng + ?Sized>(grid: &[f64], out: &mut [f64], rng: &mut R) {
    out[0] = 0.0;
    let mut w = 0.0;
    for k in 1..grid.len() {
        let z: f64 = rng.sample(StandardNormal);
        w += z * (grid[k] - grid[k - 1]).sqrt();
        out[k] = w;
    }
    let last = grid.len() - 1;
    let w1 = out[last];
    for k in 1..last {
        out[k] -= grid[k] * w1;
    }
    out[last] = 0.0;
}

/// One bridge path on `grid`.
pub fn sample_bridge<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> Result<BridgePath> {
    check_grid(grid)?;
    let mut values = vec![0.0; grid.len()];
    fill_bridge(grid, &mut values, rng);
    Ok(BridgePath { grid: grid.to_vec(), values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    Continuous,
    Discrete,
}

/// Independent draws from a limit law with its description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub kind: LimitKind,
    pub r: f64,
    /// Display form of the source model.
    pub model: String,
    /// Grid points per path (continuous draws only).
    pub grid_size: Option<usize>,
    /// Discretisation caveats, such as excised endpoint cells.
    pub bias_note: Option<String>,
    pub draws: Vec<f64>,
}

/// Limit draws for a step law: the exact Gaussian vector at its jumps.
///
/// A single atom has an identically zero limit.
pub fn limit_discrete<R: Rng + ?Sized>(
    law: &StepDistribution,
    r: f64,
    reps: usize,
    rng: &mut R,
) -> Result<LimitSample> {
    check_order(r)?;
    let m = law.len();
    let mut sample = LimitSample {
        kind: LimitKind::Discrete,
        r,
        model: law.to_string(),
        grid_size: None,
        bias_note: None,
        draws: vec![0.0; reps],
    };
    if m == 1 {
        sample.bias_note = Some("single atom: degenerate limit at 0".into());
        return Ok(sample);
    }
    let q = law.cumulative();
    let mut grid = Vec::with_capacity(m + 1);
    grid.push(0.0);
    grid.extend_from_slice(&q[..m - 1]);
    grid.push(1.0);
    let gaps: Vec<f64> = law.atoms().windows(2).map(|w| (w[1] - w[0]).powf(r)).collect();
    let mut path = vec![0.0; grid.len()];
    for d in sample.draws.iter_mut() {
        fill_bridge(&grid, &mut path, rng);
        let s: f64 = gaps.iter().zip(&path[1..m]).map(|(g, b)| b.abs() * g).sum();
        *d = s.powf(1.0 / r);
    }
    Ok(sample)
}

/// Options for continuous limit draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousLimitOptions {
    pub grid_size: usize,
    /// Caller asserts that the density is monotone near both ends of an
    /// unbounded support.
    pub monotone_tails: bool,
}

impl Default for ContinuousLimitOptions {
    fn default() -> Self {
        ContinuousLimitOptions { grid_size: DEFAULT_GRID_SIZE, monotone_tails: false }
    }
}

/// Limit draws for a continuous model by trapezoid over the bridge grid.
///
/// Bounded support uses the full grid (the bridge vanishes at both ends).
/// On an unbounded side the outermost cell is excised and the excision is
/// recorded in the bias note. Unbounded support is refused unless the
/// tail integral `∫ F(1 − F)/f` is certified finite and the caller asserts
/// monotone tails.
pub fn limit_continuous<R: Rng + ?Sized>(
    model: &DistributionModel,
    r: f64,
    opts: &ContinuousLimitOptions,
    reps: usize,
    rng: &mut R,
) -> Result<LimitSample> {
    check_order(r)?;
    let grid = uniform_grid(opts.grid_size)?;
    if opts.grid_size < 4 {
        return Err(LabError::domain("continuous limit grid needs at least 4 points"));
    }
    let support = model.support();
    let open_left = support.lower.is_infinite();
    let open_right = support.upper.is_infinite();
    if open_left || open_right {
        let verdict = condition2_verdict(model);
        if !matches!(verdict.verdict, Verdict::Finite { .. }) {
            return Err(LabError::refused(format!(
                "limit law for {model} needs a finite ∫F(1−F)/f; verdict was {}",
                verdict.verdict
            )));
        }
        if !opts.monotone_tails {
            return Err(LabError::refused(format!(
                "limit law for {model} on unbounded support needs monotone tails asserted"
            )));
        }
    }
    let m = grid.len();
    let lo = usize::from(open_left);
    let hi = m - 1 - usize::from(open_right);
    // trapezoid weights h/f(ξ_p)^r on the retained range, zero elsewhere
    let h = 1.0 / (m - 1) as f64;
    let mut weights = vec![0.0; m];
    for k in lo.max(1)..=hi.min(m - 2) {
        let x = model.law().quantile(grid[k]);
        let f = model.pdf(x);
        if !(f > 0.0) || !f.is_finite() {
            return Err(LabError::domain(format!("density of {model} is {f} at the quantile {x} (p = {})", grid[k])));
        }
        let end = if k == lo || k == hi { 0.5 } else { 1.0 };
        weights[k] = end * h / f.powf(r);
    }
    let bias_note = match (open_left, open_right) {
        (false, false) => None,
        (l, r_) => Some(format!(
            "excised outer cell(s) of width {h:e}:{}{}",
            if l { " left" } else { "" },
            if r_ { " right" } else { "" }
        )),
    };
    let mut path = vec![0.0; m];
    let mut draws = Vec::with_capacity(reps);
    for _ in 0..reps {
        fill_bridge(&grid, &mut path, rng);
        let s: f64 = if r == 2.0 {
            path.iter().zip(&weights).map(|(b, w)| b * b * w).sum()
        } else {
            path.iter().zip(&weights).map(|(b, w)| b.abs().powf(r) * w).sum()
        };
        draws.push(s.powf(1.0 / r));
    }
    Ok(LimitSample { kind: LimitKind::Continuous, r, model: model.to_string(), grid_size: Some(m), bias_note, draws })
}

/// Two-sample Kolmogorov–Smirnov statistic; ties are resolved by stepping
/// both empirical cdfs past a common value together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// 1% critical value `1.628·√(1/n₁ + 1/n₂)` of the two-sample KS statistic.
pub fn ks_critical_1pct(n1: usize, n2: usize) -> f64 {
    1.628 * (1.0 / n1 as f64 + 1.0 / n2 as f64).sqrt()
}

/// Agreement of normalised distances with limit draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitComparison {
    pub ks: f64,
    pub ks_critical_1pct: f64,
    /// `d_2` between the two empirical laws.
    pub d2: f64,
}

impl LimitComparison {
    pub fn passes(&self) -> bool {
        self.ks < self.ks_critical_1pct
    }
}

pub fn compare_to_limit(normalized: &[f64], limit: &LimitSample) -> Result<LimitComparison> {
    let lhs = EmpiricalDistribution::from_values(normalized.to_vec())?;
    let rhs = EmpiricalDistribution::from_values(limit.draws.clone())?;
    let d2 = distance_step_step(&lhs.to_step(), &rhs.to_step(), 2.0)?.value;
    Ok(LimitComparison {
        ks: ks_two_sample(normalized, &limit.draws),
        ks_critical_1pct: ks_critical_1pct(normalized.len(), limit.draws.len()),
        d2,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    use super::*;
    use crate::stats::{mean, sample_variance};

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn endpoints_pinned() {
        let grid = uniform_grid(17).unwrap();
        let mut g = rng(1);
        for _ in 0..100 {
            let b = sample_bridge(&grid, &mut g).unwrap();
            assert_eq!(b.values()[0], 0.0);
            assert_eq!(b.values()[16], 0.0);
        }
    }

    #[test]
    fn invalid_grids() {
        let mut g = rng(1);
        for grid in [vec![0.0], vec![0.1, 1.0], vec![0.0, 0.5, 0.5, 1.0], vec![0.0, 0.9]] {
            assert!(matches!(sample_bridge(&grid, &mut g), Err(LabError::Domain(_))));
        }
    }

    #[test]
    fn midpoint_variance() {
        let grid = [0.0, 0.5, 1.0];
        let mut g = rng(2);
        let n = 100_000;
        let v: Vec<f64> = (0..n).map(|_| sample_bridge(&grid, &mut g).unwrap().values()[1].powi(2)).collect();
        let m = mean(&v);
        let se = (sample_variance(&v) / n as f64).sqrt();
        assert!((m - 0.25).abs() < 4.0 * se, "{m} ± {se}");
    }

    #[test]
    fn two_point_covariance() {
        let (p1, p2) = (0.2, 0.7);
        let grid = [0.0, p1, p2, 1.0];
        let mut g = rng(3);
        let n = 100_000;
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let b = sample_bridge(&grid, &mut g).unwrap();
            xs.push(b.values()[1]);
            ys.push(b.values()[2]);
        }
        let check = |prod: Vec<f64>, target: f64| {
            let se = (sample_variance(&prod) / n as f64).sqrt();
            assert!((mean(&prod) - target).abs() < 4.0 * se, "{} vs {target}", mean(&prod));
        };
        check(xs.iter().map(|x| x * x).collect(), p1 * (1.0 - p1));
        check(ys.iter().map(|y| y * y).collect(), p2 * (1.0 - p2));
        check(xs.iter().zip(&ys).map(|(x, y)| x * y).collect(), p1 * (1.0 - p2));
    }

    #[test]
    fn bernoulli_limit_mean_of_squares() {
        let law = StepDistribution::bernoulli(0.5).unwrap();
        let s = limit_discrete(&law, 2.0, 100_000, &mut rng(4)).unwrap();
        let sq: Vec<f64> = s.draws.iter().map(|d| d * d).collect();
        let se = (sample_variance(&sq) / sq.len() as f64).sqrt();
        let target = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((mean(&sq) - target).abs() < 4.0 * se);
        assert!(s.draws.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn single_atom_is_degenerate() {
        let law = StepDistribution::point_mass(2.0).unwrap();
        let s = limit_discrete(&law, 2.0, 50, &mut rng(5)).unwrap();
        assert_eq!(s.draws, vec![0.0; 50]);
    }

    #[test]
    fn discrete_scaling_on_replay() {
        let law = StepDistribution::new(vec![0.0, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let scaled = law.affine(2.5, 0.0).unwrap();
        let a = limit_discrete(&law, 2.0, 200, &mut rng(6)).unwrap();
        let b = limit_discrete(&scaled, 2.0, 200, &mut rng(6)).unwrap();
        for (x, y) in a.draws.iter().zip(&b.draws) {
            assert!((y - 2.5 * x).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn two_atoms_match_half_normal() {
        let (q, gap, r) = (0.3, 1.5, 3.0);
        let law = StepDistribution::new(vec![1.0, 1.0 + gap], vec![q, 1.0 - q]).unwrap();
        let s = limit_discrete(&law, r, 10_000, &mut rng(7)).unwrap();
        let mut g = rng(8);
        let sd = (q * (1.0 - q)).sqrt();
        let direct: Vec<f64> = (0..10_000)
            .map(|_| {
                let z: f64 = g.sample(StandardNormal);
                gap * (sd * z.abs()).powf(1.0 / r)
            })
            .collect();
        assert!(ks_two_sample(&s.draws, &direct) < 0.023);
    }

    #[test]
    fn uniform_limit_mean_of_squares() {
        let u = DistributionModel::standard_uniform();
        let s = limit_continuous(&u, 2.0, &ContinuousLimitOptions::default(), 4000, &mut rng(9)).unwrap();
        let sq: Vec<f64> = s.draws.iter().map(|d| d * d).collect();
        let se = (sample_variance(&sq) / sq.len() as f64).sqrt();
        assert!((mean(&sq) - 1.0 / 6.0).abs() < 4.0 * se, "{} ± {se}", mean(&sq));
        assert!(s.bias_note.is_none());
    }

    #[test]
    fn uniform_limit_scales_with_width() {
        let opts = ContinuousLimitOptions { grid_size: 257, monotone_tails: false };
        let a = limit_continuous(&DistributionModel::standard_uniform(), 2.0, &opts, 100, &mut rng(10)).unwrap();
        let wide = DistributionModel::uniform(0.0, 3.0).unwrap();
        let b = limit_continuous(&wide, 2.0, &opts, 100, &mut rng(10)).unwrap();
        for (x, y) in a.draws.iter().zip(&b.draws) {
            assert!((y - 3.0 * x).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn grid_refinement_below_noise() {
        let u = DistributionModel::standard_uniform();
        let reps = 2000;
        let run = |m: usize, seed: u64| {
            let opts = ContinuousLimitOptions { grid_size: m, monotone_tails: false };
            let s = limit_continuous(&u, 2.0, &opts, reps, &mut rng(seed)).unwrap();
            let sq: Vec<f64> = s.draws.iter().map(|d| d * d).collect();
            (mean(&sq), sample_variance(&sq) / reps as f64)
        };
        let (m1, v1) = run(4097, 11);
        let (m2, v2) = run(8193, 12);
        assert!((m1 - m2).abs() < 2.0 * (v1 + v2).sqrt());
    }

    #[test]
    fn unbounded_support_refused() {
        let n = DistributionModel::standard_normal();
        let opts = ContinuousLimitOptions { grid_size: 65, monotone_tails: true };
        let err = limit_continuous(&n, 2.0, &opts, 10, &mut rng(13)).unwrap_err();
        assert!(matches!(err, LabError::Refused(_)));
    }

    #[test]
    fn ks_edge_cases() {
        let v = vec![0.3, 0.1, 0.2];
        assert_eq!(ks_two_sample(&v, &v), 0.0);
        assert_eq!(ks_two_sample(&[0.0], &[1.0]), 1.0);
        let lim = LimitSample {
            kind: LimitKind::Discrete,
            r: 2.0,
            model: "point(x=1)".into(),
            grid_size: None,
            bias_note: None,
            draws: vec![1.0],
        };
        let c = compare_to_limit(&[0.0], &lim).unwrap();
        assert_eq!((c.ks, c.d2), (1.0, 1.0));
        let same = compare_to_limit(&[1.0], &lim).unwrap();
        assert_eq!((same.ks, same.d2), (0.0, 0.0));
    }

    #[test]
    fn same_law_ks_below_critical() {
        let u = DistributionModel::standard_uniform();
        let opts = ContinuousLimitOptions { grid_size: 513, monotone_tails: false };
        let a = limit_continuous(&u, 2.0, &opts, 10_000, &mut rng(14)).unwrap();
        let b = limit_continuous(&u, 2.0, &opts, 10_000, &mut rng(15)).unwrap();
        let c = compare_to_limit(&a.draws, &b).unwrap();
        assert!(c.ks < ks_critical_1pct(10_000, 10_000), "{c:?}");
        assert!((ks_critical_1pct(10_000, 10_000) - 0.023).abs() < 1e-3);
    }
}
