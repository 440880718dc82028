//! Elimination of negative durations.
//!
//! On a closed one-parameter subgroup `e^{-B|t|}` equals `e^{B t̄}` for
//! `t̄ = t mod T`. Otherwise we look for `s = t̄ + |t| ≥ |t|` with every
//! eigenphase `ω_j s` within `g` of a multiple of 2π, where
//! `1 − cos g = ε²/(2n)`; then `‖e^{-B|t|} − e^{B t̄}‖ < ε`. The search pins the
//! largest frequency exactly (`s = 2πp/ω_max`) and scans `p` for simultaneous
//! approximation of the remaining frequency ratios (Dirichlet).

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{expm, AlgebraElement, Matrix};
use crate::program::{PulseSchedule, Step};

/// Largest denominator considered when testing frequency ratios for commensurability.
pub const DEFAULT_RESOLUTION: u64 = 1_000_000;
pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000_000;
pub const DEFAULT_PERIOD_TOL: f64 = 1e-10;

/// Eigenvalue phases `ω_j` of an anti-Hermitian generator (eigenvalues `iω_j`).
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencySet {
    pub omegas: Vec<f64>,
}

impl FrequencySet {
    pub fn of(b: &AlgebraElement) -> Self {
        FrequencySet {
            omegas: b.spectrum().omegas().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.omegas.len()
    }

    fn scale(&self) -> f64 {
        self.omegas.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }

    /// Distinct `|ω_j|` above rounding noise, in decreasing order.
    pub fn distinct_magnitudes(&self) -> Vec<f64> {
        let floor = 1e-12 * self.scale().max(1e-300);
        let mut mags: Vec<f64> = self
            .omegas
            .iter()
            .map(|w| w.abs())
            .filter(|w| *w > floor)
            .collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut out: Vec<f64> = Vec::new();
        for w in mags {
            if out
                .last()
                .is_none_or(|last| (last - w).abs() > 1e-12 * last)
            {
                out.push(w);
            }
        }
        out
    }

    /// `‖1 − e^{Bs}‖ = √(2 Σ_j (1 − cos ω_j s))`.
    pub fn defect_norm(&self, s: f64) -> f64 {
        self.omegas
            .iter()
            .map(|w| {
                let half = 0.5 * reduce_phase(w * s);
                4.0 * half.sin().powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Phase reduced to (−π, π].
fn reduce_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Continued-fraction convergents `p/q` of `x` with `q ≤ max_den`.
pub fn convergents(x: f64, max_den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut p_prev, mut q_prev, mut p, mut q) = (0u64, 1u64, 1u64, 0u64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > u64::MAX as f64 / 2.0 {
            break;
        }
        let a = a as u64;
        let (Some(p_next), Some(q_next)) = (
            a.checked_mul(p).and_then(|v| v.checked_add(p_prev)),
            a.checked_mul(q).and_then(|v| v.checked_add(q_prev)),
        ) else {
            break;
        };
        if q_next > max_den {
            break;
        }
        (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
        out.push((p, q));
        let frac = rest - a as f64;
        if frac < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `T > 0` with `e^{BT} = 1` within `tol`, if the nonzero eigenfrequencies
/// are pairwise commensurable with denominators up to `resolution`.
pub fn detect_period_with(b: &AlgebraElement, tol: f64, resolution: u64) -> Option<f64> {
    let freqs = FrequencySet::of(b);
    let mags = freqs.distinct_magnitudes();
    let base = *mags.last()?;
    // ω_j = base · p_j / q_j
    let mut ratios = Vec::with_capacity(mags.len());
    for &w in &mags {
        let ratio = w / base;
        let (p, q) = convergents(ratio, resolution)
            .into_iter()
            .find(|(p, q)| (ratio - *p as f64 / *q as f64).abs() <= 1e-9 * ratio)?;
        ratios.push((p, q));
    }
    let lcm_q = ratios
        .iter()
        .try_fold(1u64, |acc, &(_, q)| acc.checked_mul(q / gcd(acc, q)))?;
    // ω_j = (base / lcm_q) · n_j with integer n_j
    let g = ratios.iter().map(|&(p, q)| p * (lcm_q / q)).fold(0u64, gcd);
    let fundamental = base / lcm_q as f64 * g as f64;
    let period = 2.0 * PI / fundamental;
    let dim = b.dim();
    let check = expm(b, period).ok()?.distance(&Matrix::identity(dim));
    (check <= tol).then_some(period)
}

pub fn detect_period(b: &AlgebraElement, tol: f64) -> Option<f64> {
    detect_period_with(b, tol, DEFAULT_RESOLUTION)
}

/// A nonnegative replacement `t̄` for a negative duration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Replacement {
    pub t_bar: f64,
    /// Upper bound on `‖e^{-B|t|} − e^{B t̄}‖`.
    pub bound: f64,
    pub exact: bool,
}

/// A time `s` at which every frequency is near a full turn.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnTime {
    /// `s = 2πp/ω_0`.
    pub t: f64,
    pub p: u64,
    /// `q_j ≈ p ω_j / ω_0` for the remaining frequencies.
    pub q: Vec<i64>,
    /// `|p ω_j/ω_0 − q_j|` for the remaining frequencies.
    pub distances: Vec<f64>,
}

/// Smallest `p ≥ 1` with `2πp/ω_0 ≥ min_time` such that every other
/// frequency satisfies `|ω_j t − 2π q_j| < 2π/k`, where `k` is the least
/// integer with `1/k < phase_tol/(2π)`. Frequency `ω_0 = frequencies[0]` is
/// hit exactly.
pub fn dirichlet_return_time(
    frequencies: &[f64],
    min_time: f64,
    phase_tol: f64,
    cap: u64,
) -> Result<ReturnTime> {
    let (&pinned, others) = frequencies
        .split_first()
        .ok_or_else(|| Error::invalid("no frequencies to approximate"))?;
    if !(pinned > 0.0) || others.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::invalid("frequencies must be positive"));
    }
    if !(phase_tol > 0.0) {
        return Err(Error::invalid("phase tolerance must be positive"));
    }
    let k = (2.0 * PI / phase_tol).floor() + 1.0;
    let threshold = 1.0 / k;
    let ratios: Vec<f64> = others.iter().map(|w| w / pinned).collect();
    let first = ((min_time.max(0.0) * pinned / (2.0 * PI)).ceil() as u64).max(1);
    for p in first..first.saturating_add(cap) {
        let pf = p as f64;
        if ratios.iter().all(|r| dist_to_integer(r * pf) < threshold) {
            return Ok(ReturnTime {
                t: 2.0 * PI * pf / pinned,
                p,
                q: ratios.iter().map(|r| (r * pf).round() as i64).collect(),
                distances: ratios.iter().map(|r| dist_to_integer(r * pf)).collect(),
            });
        }
    }
    Err(Error::SearchBudgetExceeded { cap })
}

/// Phase tolerance `g` with `1 − cos g = defect`.
pub fn phase_tolerance(defect: f64) -> f64 {
    2.0 * (defect / 2.0).sqrt().asin()
}

#[derive(Clone, Debug)]
pub struct TimefixOptions {
    pub search_cap: u64,
    pub period_tol: f64,
    pub resolution: u64,
}

impl Default for TimefixOptions {
    fn default() -> Self {
        TimefixOptions {
            search_cap: DEFAULT_SEARCH_CAP,
            period_tol: DEFAULT_PERIOD_TOL,
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

/// Certified `‖1 − e^{Bs}‖` when `s` is known only to rounding: each phase
/// may be off by `|ω| δs`.
fn certified_defect(freqs: &FrequencySet, s: f64) -> f64 {
    let ds = 4.0 * f64::EPSILON * s.abs();
    freqs
        .omegas
        .iter()
        .map(|w| {
            let chord = 2.0 * (0.5 * reduce_phase(w * s)).sin().abs();
            (chord + w.abs() * ds).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Replaces the negative duration `t` of `b` by a nonnegative `t̄`.
pub fn positive_time_with(
    b: &AlgebraElement,
    t: f64,
    eps: f64,
    period: Option<f64>,
    options: &TimefixOptions,
) -> Result<Replacement> {
    if !(t < 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "expected a finite negative duration, got {t}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let freqs = FrequencySet::of(b);
    let mags = freqs.distinct_magnitudes();
    if mags.is_empty() {
        return Ok(Replacement {
            t_bar: 0.0,
            bound: 0.0,
            exact: true,
        });
    }
    let abs_t = -t;
    if let Some(period) = period {
        let t_bar = t.rem_euclid(period);
        return Ok(Replacement {
            t_bar,
            bound: certified_defect(&freqs, t_bar + abs_t),
            exact: true,
        });
    }

    let n = freqs.dim() as f64;
    let g = 2.0 * (eps / (2.0 * n.sqrt())).asin();
    let found = dirichlet_return_time(&mags, abs_t, g, options.search_cap)?;
    let t_bar = (found.t - abs_t).max(0.0);
    // Phases at s = 2πp/ω_max are 2π·distance for the other frequencies;
    // bound them from the search rather than from cos of a large argument.
    let ds = 4.0 * f64::EPSILON * found.t;
    let mut sum = 0.0;
    for w in &freqs.omegas {
        let w_abs = w.abs();
        let dist = mags
            .iter()
            .skip(1)
            .zip(&found.distances)
            .find(|(m, _)| (*m - w_abs).abs() <= 1e-12 * *m)
            .map_or(0.0, |(_, d)| *d);
        let chord = 2.0
            * (PI * (dist + 4.0 * f64::EPSILON * found.p as f64))
                .sin()
                .abs();
        sum += (chord + w_abs * ds).powi(2);
    }
    Ok(Replacement {
        t_bar,
        bound: sum.sqrt(),
        exact: false,
    })
}

pub fn positive_time(b: &AlgebraElement, t: f64, eps: f64) -> Result<Replacement> {
    let options = TimefixOptions::default();
    let period = detect_period_with(b, options.period_tol, options.resolution);
    positive_time_with(b, t, eps, period, &options)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplacementRecord {
    pub step_index: usize,
    pub gen: usize,
    pub t_old: f64,
    pub t_new: f64,
    pub exact: bool,
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct TimefixOutcome {
    pub schedule: PulseSchedule,
    /// Certified bound on the distance between the old and new full products.
    pub bound: f64,
    pub replacements: Vec<ReplacementRecord>,
}

/// Per-replacement tolerance `ε_total / (repeats · n_neg · 2)`.
pub fn per_step_budget(eps_total: f64, repeats: u64, negative_steps: usize) -> f64 {
    eps_total / (repeats.max(1) as f64 * negative_steps.max(1) as f64 * 2.0)
}

/// Replaces every negative duration in `schedule`.
///
/// Steps on generators with closed orbits are replaced exactly. The remaining
/// negative steps share `eps_total` uniformly, and the returned bound is
/// `repeats · Σ bound_i` by telescoping and unitary invariance.
pub fn rewrite_schedule(
    schedule: &PulseSchedule,
    generators: &[AlgebraElement],
    eps_total: f64,
    options: &TimefixOptions,
) -> Result<TimefixOutcome> {
    if !(eps_total > 0.0) {
        return Err(Error::invalid("eps_total must be positive"));
    }
    if let Some(bad) = schedule.steps.iter().find(|s| s.gen >= generators.len()) {
        return Err(Error::invalid(format!(
            "step refers to unknown generator {}",
            bad.gen
        )));
    }
    if schedule.steps.iter().any(|s| !s.duration.is_finite()) {
        return Err(Error::invalid("schedule has non-finite durations"));
    }
    let periods: Vec<Option<f64>> = generators
        .iter()
        .map(|g| detect_period_with(g, options.period_tol, options.resolution))
        .collect();
    let negative_open = schedule
        .steps
        .iter()
        .filter(|s| s.duration < 0.0 && periods[s.gen].is_none())
        .count();
    let eps = per_step_budget(eps_total, schedule.repeats, negative_open);

    let mut cache: HashMap<(usize, u64), Replacement> = HashMap::new();
    let mut steps: Vec<Step> = Vec::with_capacity(schedule.steps.len());
    let mut records = Vec::new();
    let mut total = 0.0;
    for (index, step) in schedule.steps.iter().enumerate() {
        if step.duration >= 0.0 {
            steps.push(*step);
            continue;
        }
        let key = (step.gen, step.duration.to_bits());
        let rep = match cache.get(&key) {
            Some(r) => *r,
            None => {
                let r = positive_time_with(
                    &generators[step.gen],
                    step.duration,
                    eps,
                    periods[step.gen],
                    options,
                )?;
                cache.insert(key, r);
                r
            }
        };
        total += rep.bound;
        steps.push(Step {
            gen: step.gen,
            duration: rep.t_bar,
        });
        records.push(ReplacementRecord {
            step_index: index,
            gen: step.gen,
            t_old: step.duration,
            t_new: rep.t_bar,
            exact: rep.exact,
            bound: rep.bound,
        });
    }
    Ok(TimefixOutcome {
        schedule: PulseSchedule {
            steps,
            repeats: schedule.repeats,
        },
        bound: total * schedule.repeats as f64,
        replacements: records,
    })
}
