//! Bootstrap of the normalised sample mean.
//!
//! The root is `√n (X̄ₙ − μ)` with sampling law `Hₙ(F)`; its bootstrap
//! counterpart `√n (X̄*ₙ − X̄ₙ)` has law `Hₙ(F̂ₙ)`. Both are represented by
//! Monte Carlo draws kept in draw order, or for `n ≤ 7` the bootstrap law is
//! enumerated exactly over all `nⁿ` resamples.
//!
//! Distance bounds checked here:
//!
//! ```text
//! |s − σ| ≤ d_2(Hₙ(F̂ₙ), Hₙ(F)) ≤ d_2(F̂ₙ, F)
//! d_2(F̂ₙ − X̄ₙ, F − μ)² = d_2(F̂ₙ, F)² − (X̄ₙ − μ)²
//! ```
//!
//! with `s² = n⁻¹ Σ (Xᵢ − X̄ₙ)²`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{EmpiricalDistribution, Law, StepDistribution};
use crate::error::{LabError, Result};
use crate::mallows::{distance, distance_step_step};
use crate::stats::{mean, pairwise_sum, sample_variance};

/// Largest sample size with exact bootstrap enumeration (`7⁷` resamples).
pub const MAX_EXACT_N: usize = 7;

/// Draw `n` values from the sample with replacement.
pub fn resample<R: Rng + ?Sized>(sample: &EmpiricalDistribution, rng: &mut R) -> EmpiricalDistribution {
    let v = sample.values();
    let draws = (0..v.len()).map(|_| v[rng.random_range(0..v.len())]).collect();
    EmpiricalDistribution::from_values(draws).expect("resampled values are finite and nonempty")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    /// `Hₙ(F)`
    TrueSampling,
    /// `Hₙ(F̂ₙ)`
    Bootstrap,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootRepr {
    /// Draws in generation order.
    MonteCarlo(Vec<f64>),
    Exact(StepDistribution),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootDistribution {
    pub kind: RootKind,
    pub n: usize,
    /// Number of draws, or of resamples enumerated.
    pub size: usize,
    pub repr: RootRepr,
}

impl RootDistribution {
    pub fn to_step(&self) -> Result<StepDistribution> {
        match &self.repr {
            RootRepr::MonteCarlo(d) => Ok(EmpiricalDistribution::from_values(d.clone())?.to_step()),
            RootRepr::Exact(s) => Ok(s.clone()),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.repr {
            RootRepr::MonteCarlo(d) => mean(d),
            RootRepr::Exact(s) => s.mean(),
        }
    }

    /// Monte Carlo error of this representation in `d_2`: half the distance
    /// between its two halves. Zero when exact.
    pub fn mc_error(&self) -> Result<f64> {
        match &self.repr {
            RootRepr::Exact(_) => Ok(0.0),
            RootRepr::MonteCarlo(d) if d.len() < 2 => Ok(f64::INFINITY),
            RootRepr::MonteCarlo(d) => {
                let (a, b) = d.split_at(d.len() / 2);
                let a = EmpiricalDistribution::from_values(a.to_vec())?.to_step();
                let b = EmpiricalDistribution::from_values(b.to_vec())?.to_step();
                Ok(0.5 * distance_step_step(&a, &b, 2.0)?.value)
            }
        }
    }
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(LabError::domain("at least one Monte Carlo draw is required"));
    }
    Ok(())
}

/// `reps` draws of `√n (X̄ₙ − μ)` under `law`.
pub fn true_root_distribution<R: Rng + ?Sized>(
    law: &Law,
    n: usize,
    reps: usize,
    rng: &mut R,
) -> Result<RootDistribution> {
    law.require_moment(2.0)?;
    check_reps(reps)?;
    if n == 0 {
        return Err(LabError::domain("sample size must be at least 1"));
    }
    let mu = law.mean();
    let scale = 1.0 / (n as f64).sqrt();
    let mut buf = vec![0.0; n];
    let draws = (0..reps)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = law.draw(rng) - mu;
            }
            pairwise_sum(&buf) * scale
        })
        .collect();
    Ok(RootDistribution { kind: RootKind::TrueSampling, n, size: reps, repr: RootRepr::MonteCarlo(draws) })
}

/// `reps` draws of `√n (X̄*ₙ − X̄ₙ)`.
pub fn bootstrap_root_distribution<R: Rng + ?Sized>(
    sample: &EmpiricalDistribution,
    reps: usize,
    rng: &mut R,
) -> Result<RootDistribution> {
    check_reps(reps)?;
    let n = sample.len();
    let xbar = sample.mean();
    let centred: Vec<f64> = sample.values().iter().map(|x| x - xbar).collect();
    let scale = 1.0 / (n as f64).sqrt();
    let mut buf = vec![0.0; n];
    let draws = (0..reps)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = centred[rng.random_range(0..n)];
            }
            pairwise_sum(&buf) * scale
        })
        .collect();
    Ok(RootDistribution { kind: RootKind::Bootstrap, n, size: reps, repr: RootRepr::MonteCarlo(draws) })
}

/// Visit every multiset of `n` indices from `0..n` as a count vector.
fn for_each_multiset(counts: &mut [usize], slot: usize, left: usize, visit: &mut dyn FnMut(&[usize])) {
    if slot == counts.len() - 1 {
        counts[slot] = left;
        visit(counts);
        return;
    }
    for c in (0..=left).rev() {
        counts[slot] = c;
        for_each_multiset(counts, slot + 1, left - c, visit);
    }
}

/// The bootstrap root law over all `nⁿ` equally likely resamples, grouped
/// by multiset with multinomial weights; equal root values are merged.
pub fn bootstrap_root_exact(sample: &EmpiricalDistribution) -> Result<RootDistribution> {
    let n = sample.len();
    if n > MAX_EXACT_N {
        return Err(LabError::refused(format!(
            "exact bootstrap enumeration is limited to n ≤ {MAX_EXACT_N}, got n = {n}"
        )));
    }
    let xbar = sample.mean();
    let centred: Vec<f64> = sample.values().iter().map(|x| x - xbar).collect();
    let factorial: Vec<usize> = (0..=n)
        .scan(1usize, |f, k| {
            *f *= k.max(1);
            Some(*f)
        })
        .collect();
    let scale = 1.0 / (n as f64).sqrt();
    let mut roots: Vec<(f64, usize)> = Vec::new();
    let mut counts = vec![0usize; n];
    for_each_multiset(&mut counts, 0, n, &mut |c| {
        let weight = factorial[n] / c.iter().map(|&k| factorial[k]).product::<usize>();
        let terms: Vec<f64> = c.iter().zip(&centred).map(|(&k, &x)| k as f64 * x).collect();
        roots.push((pairwise_sum(&terms) * scale, weight));
    });
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut atoms: Vec<f64> = Vec::new();
    let mut weights: Vec<usize> = Vec::new();
    for (x, w) in roots {
        if atoms.last() == Some(&x) {
            *weights.last_mut().expect("nonempty") += w;
        } else {
            atoms.push(x);
            weights.push(w);
        }
    }
    let size = n.pow(n as u32);
    debug_assert_eq!(weights.iter().sum::<usize>(), size);
    Ok(RootDistribution {
        kind: RootKind::Bootstrap,
        n,
        size,
        repr: RootRepr::Exact(StepDistribution::from_counts(atoms, &weights)),
    })
}

/// `d_2` between two root laws with a Monte Carlo error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub gap: f64,
    /// `√(e_a² + e_b²)` from the per-representation half-split errors.
    pub mc_error: f64,
}

pub fn root_gap(a: &RootDistribution, b: &RootDistribution) -> Result<GapEstimate> {
    let gap = distance_step_step(&a.to_step()?, &b.to_step()?, 2.0)?.value;
    let (ea, eb) = (a.mc_error()?, b.mc_error()?);
    Ok(GapEstimate { gap, mc_error: (ea * ea + eb * eb).sqrt() })
}

/// `d_2(Hₙ(F̂ₙ), Hₙ(F))` from `reps` draws of each root.
pub fn bootstrap_gap<R: Rng + ?Sized>(
    sample: &EmpiricalDistribution,
    law: &Law,
    reps: usize,
    rng: &mut R,
) -> Result<GapEstimate> {
    let truth = true_root_distribution(law, sample.len(), reps, rng)?;
    let boot = bootstrap_root_distribution(sample, reps, rng)?;
    root_gap(&boot, &truth)
}

/// As [`bootstrap_gap`] with the bootstrap law enumerated exactly.
pub fn bootstrap_gap_exact<R: Rng + ?Sized>(
    sample: &EmpiricalDistribution,
    law: &Law,
    reps: usize,
    rng: &mut R,
) -> Result<GapEstimate> {
    let boot = bootstrap_root_exact(sample)?;
    let truth = true_root_distribution(law, sample.len(), reps, rng)?;
    root_gap(&boot, &truth)
}

/// `d_2(F̂ₙ, F)`.
pub fn upper_bound(sample: &EmpiricalDistribution, law: &Law) -> Result<f64> {
    Ok(distance(&Law::Empirical(sample.clone()), law, 2.0)?.value)
}

/// `|s − σ|` with the `1/n` sample standard deviation.
pub fn lower_bound(sample: &EmpiricalDistribution, law: &Law) -> Result<f64> {
    law.require_moment(2.0)?;
    Ok((sample.variance().sqrt() - law.variance().sqrt()).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftIdentity {
    /// `d_2(F̂ₙ − X̄ₙ, F − μ)²`
    pub lhs_sq: f64,
    /// `d_2(F̂ₙ, F)² − (X̄ₙ − μ)²`
    pub rhs_sq: f64,
    pub satisfied: bool,
}

pub fn shift_identity_check(sample: &EmpiricalDistribution, law: &Law) -> Result<ShiftIdentity> {
    let (xbar, mu) = (sample.mean(), law.mean());
    let lhs = distance(&Law::Empirical(sample.shifted(-xbar)), &law.shifted(-mu)?, 2.0)?;
    let full = distance(&Law::Empirical(sample.clone()), law, 2.0)?;
    let lhs_sq = lhs.value_pow_r;
    let rhs_sq = full.value_pow_r - (xbar - mu) * (xbar - mu);
    Ok(ShiftIdentity { lhs_sq, rhs_sq, satisfied: (lhs_sq - rhs_sq).abs() <= 1e-8 })
}

/// Monte Carlo moments of `√n (s − σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaClt {
    pub n: usize,
    pub reps: usize,
    pub mean: f64,
    pub variance: f64,
    /// `(E(X − μ)⁴ − σ⁴)/(4σ²)`
    pub asymptotic_variance: f64,
}

pub fn sigma_clt_statistics<R: Rng + ?Sized>(law: &Law, n: usize, reps: usize, rng: &mut R) -> Result<SigmaClt> {
    if law.require_moment(4.0).is_err() {
        return Err(LabError::refused(format!(
            "E X⁴ diverges for {law}: √n(s − σ) has no normal limit (see the heavy-tail trajectory)"
        )));
    }
    check_reps(reps)?;
    if n < 2 {
        return Err(LabError::domain("σ statistics need n ≥ 2"));
    }
    let mu = law.mean();
    let var = law.variance();
    let sigma = var.sqrt();
    if !(sigma > 0.0) {
        return Err(LabError::domain(format!("{law} is degenerate")));
    }
    let m4 = law.shifted(-mu)?.abs_moment(4.0)?;
    let root_n = (n as f64).sqrt();
    let mut buf = vec![0.0; n];
    let stats: Vec<f64> = (0..reps)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = law.draw(rng);
            }
            let m = mean(&buf);
            let sq: Vec<f64> = buf.iter().map(|x| (x - m) * (x - m)).collect();
            let s = (pairwise_sum(&sq) / n as f64).sqrt();
            root_n * (s - sigma)
        })
        .collect();
    Ok(SigmaClt {
        n,
        reps,
        mean: mean(&stats),
        variance: sample_variance(&stats),
        asymptotic_variance: (m4 - var * var) / (4.0 * var),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub n: usize,
    pub lower_bound: f64,
    /// `n^{δ/(2+δ)}·|s − σ|`
    pub scaled: f64,
}

/// `n^{δ/(2+δ)}·|s − σ|` along one growing sample at the given checkpoints.
///
/// Reported without a verdict: the heavy-tail behaviour is an almost-sure
/// statement that no finite path can settle.
pub fn heavy_tail_trajectory<R: Rng + ?Sized>(
    law: &Law,
    delta: f64,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<Vec<TrajectoryPoint>> {
    law.require_moment(2.0)?;
    if !(delta > 0.0) || checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints.first() == Some(&0) {
        return Err(LabError::domain("need δ > 0 and strictly increasing positive checkpoints"));
    }
    let sigma = law.variance().sqrt();
    let mut out = Vec::with_capacity(checkpoints.len());
    let (mut count, mut m, mut m2) = (0usize, 0.0, 0.0);
    for &stop in checkpoints {
        while count < stop {
            let x = law.draw(rng);
            count += 1;
            let d = x - m;
            m += d / count as f64;
            m2 += d * (x - m);
        }
        let lb = ((m2 / count as f64).sqrt() - sigma).abs();
        out.push(TrajectoryPoint {
            n: count,
            lower_bound: lb,
            scaled: (count as f64).powf(delta / (2.0 + delta)) * lb,
        });
    }
    Ok(out)
}
