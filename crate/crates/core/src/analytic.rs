//! Minimum-weight error-string model of the logical failure rate.
//!
//! A logical X (Z) failure needs `(d+1)/2` data-qubit errors along a
//! minimum-weight string. Per round a data qubit picks up idling errors
//! `p_x + p_y` (resp. `p_z + p_y`) over `T/N` and gate errors `k p`, so
//!
//! ```text
//! pL_{x/z}(N) = A N (p_{x/z}(T/N) + p_y(T/N) + k p)^((d+1)/2)
//! ```
//!
//! Linearising the idling rates to `T / (2 T_rel N)` gives the optimum
//! `N* = (d-1) T / (4 k p T_rel)` with `T_rel = T1` for X and `T2` for Z.
//! Strings through ancilla measurements are not modelled, so readout
//! errors `q` play no part here.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

use crate::circuit::Basis;
use crate::error::{invalid, Error, Result};
use crate::estimator::SweepResult;
use crate::noise::{idling_probs, t2_from};
use num_rational::Ratio;
use serde::Serialize;
use std::io::Write;

/// Data-qubit error events per round, times the chance that a two-qubit
/// depolarizing channel leaves an X-type (or Z-type) error on a fixed qubit.
pub fn k_value() -> Ratio<i64> {
    Ratio::new(7, 1) * Ratio::new(8, 15)
}

pub fn k_default() -> f64 {
    let k = k_value();
    *k.numer() as f64 / *k.denom() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rates {
    /// Exact twirled idling probabilities.
    Exact,
    /// `p_rel(t) + p_y(t) ~ t / (2 T_rel)`.
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticParams {
    pub d: usize,
    pub total_time: f64,
    pub t1: f64,
    pub t2: f64,
    pub p: f64,
    pub k: f64,
    /// Multiplicity prefactor; cancels in every argmin.
    pub a: f64,
}

impl AnalyticParams {
    /// Parameters with `T2` derived from `T1` and `Tphi`, `k = 56/15` and `A = 1`.
    pub fn new(d: usize, total_time: f64, t1: f64, t_phi: f64, p: f64) -> Result<Self> {
        let params = AnalyticParams {
            d,
            total_time,
            t1,
            t2: t2_from(t1, t_phi)?,
            p,
            k: k_default(),
            a: 1.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 3 || self.d.is_multiple_of(2) {
            return Err(Error::InvalidDistance(self.d));
        }
        if !(self.k > 0.0) {
            return Err(invalid("k", "must be positive"));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(invalid("T", "must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid("p", "must lie in [0, 1]"));
        }
        if !(self.a > 0.0) {
            return Err(invalid("A", "must be positive"));
        }
        Ok(())
    }

    fn t_rel(&self, basis: Basis) -> Result<f64> {
        match basis {
            Basis::X => Ok(self.t1),
            Basis::Z => Ok(self.t2),
            Basis::Y => Err(invalid("basis", "the string model covers X and Z only")),
        }
    }

    fn exponent(&self) -> i32 {
        (self.d as i32 + 1) / 2
    }
}

/// Idling error rate per round that flips the `basis` logical.
fn idle_rate(params: &AnalyticParams, rounds: usize, basis: Basis, rates: Rates) -> Result<f64> {
    let t = params.total_time / rounds as f64;
    let t_rel = params.t_rel(basis)?;
    Ok(match rates {
        Rates::Linearized => t / (2.0 * t_rel),
        Rates::Exact => {
            if params.t1.is_infinite() && params.t2.is_infinite() {
                return Ok(0.0);
            }
            let c = idling_probs(t, params.t1, params.t2)?;
            match basis {
                Basis::X => c.px + c.py,
                _ => c.pz + c.py,
            }
        }
    })
}

/// `A N (p_rel(T/N) + p_y(T/N) + k p)^((d+1)/2)`.
pub fn min_weight_failure(params: &AnalyticParams, rounds: usize, basis: Basis) -> Result<f64> {
    min_weight_failure_with(params, rounds, basis, Rates::Exact)
}

pub fn min_weight_failure_with(params: &AnalyticParams, rounds: usize, basis: Basis, rates: Rates) -> Result<f64> {
    params.validate()?;
    if rounds == 0 {
        return Err(invalid("rounds", "must be at least 1"));
    }
    let per_round = idle_rate(params, rounds, basis, rates)? + params.k * params.p;
    Ok(params.a * rounds as f64 * per_round.powi(params.exponent()))
}

/// `(d-1) T / (4 k p T_rel)`; infinite when `p = 0`.
pub fn n_star_basis(params: &AnalyticParams, basis: Basis) -> Result<f64> {
    params.validate()?;
    let t_rel = params.t_rel(basis)?;
    if params.p == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((params.d as f64 - 1.0) * params.total_time / (4.0 * params.k * params.p * t_rel))
}

/// Integer `N` minimising the summed X and Z string failures.
pub fn n_star_combined(params: &AnalyticParams) -> Result<usize> {
    n_star_combined_with(params, Rates::Exact)
}

pub fn n_star_combined_with(params: &AnalyticParams, rates: Rates) -> Result<usize> {
    let nx = n_star_basis(params, Basis::X)?;
    let nz = n_star_basis(params, Basis::Z)?;
    let hi = 2.0 * nx.max(nz);
    if !hi.is_finite() {
        return Err(invalid("p", "must be positive for a finite optimum"));
    }
    let hi = (hi.ceil() as usize).max(1);
    let mut best = (f64::INFINITY, 1);
    for n in 1..=hi {
        let v = min_weight_failure_with(params, n, Basis::X, rates)? + min_weight_failure_with(params, n, Basis::Z, rates)?;
        if v < best.0 {
            best = (v, n);
        }
    }
    Ok(best.1)
}

/// Integer argmin of one basis' string failure over `1..=max_rounds`.
pub fn argmin_basis(params: &AnalyticParams, basis: Basis, max_rounds: usize, rates: Rates) -> Result<usize> {
    let mut best = (f64::INFINITY, 1);
    for n in 1..=max_rounds.max(1) {
        let v = min_weight_failure_with(params, n, basis, rates)?;
        if v < best.0 {
            best = (v, n);
        }
    }
    Ok(best.1)
}

/// Whole rounds of length `cycle_time` that fit into `total_time`.
pub fn feasible_rounds(total_time: f64, cycle_time: f64) -> Result<u64> {
    if !(cycle_time > 0.0) {
        return Err(invalid("cycle_time", "must be positive"));
    }
    if !(total_time >= 0.0) {
        return Err(invalid("T", "must be non-negative"));
    }
    // The relative slack absorbs representation error in ratios such as 1 s / 2 ms.
    Ok((total_time / cycle_time * (1.0 + 1e-12)).floor() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticRow {
    pub d: usize,
    pub n_star_x: f64,
    pub n_star_z: f64,
    pub n_star_combined: usize,
}

pub fn analytic_row(params: &AnalyticParams) -> Result<AnalyticRow> {
    Ok(AnalyticRow {
        d: params.d,
        n_star_x: n_star_basis(params, Basis::X)?,
        n_star_z: n_star_basis(params, Basis::Z)?,
        n_star_combined: n_star_combined(params)?,
    })
}

pub fn write_analytic_csv<W: Write>(out: W, rows: &[AnalyticRow]) -> Result<()> {
    let err = |e: csv::Error| invalid("output", e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "N_star_x", "N_star_z", "N_star_combined"]).map_err(err)?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            r.n_star_x.to_string(),
            r.n_star_z.to_string(),
            r.n_star_combined.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| invalid("output", e.to_string()))
}

/// Analytic optima next to the optimal interval found by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub d: usize,
    pub n_star_z: f64,
    pub n_star_x: f64,
    pub n_star_combined: usize,
    pub empirical_argmin: usize,
    pub empirical_lo: usize,
    pub empirical_hi: usize,
    /// Combined optimum lies in `[N*_z, N*_x]` (either order).
    pub combined_bracketed: bool,
    /// Empirical interval meets `[min(N*) - tol, max(N*) + tol]`.
    pub overlaps: bool,
}

pub fn compare_with_sweep(params: &AnalyticParams, sweep: &SweepResult, tolerance: f64) -> Result<Comparison> {
    let row = analytic_row(params)?;
    let (lo, hi) = sweep.interval_rounds();
    let (a, b) = (row.n_star_z.min(row.n_star_x), row.n_star_z.max(row.n_star_x));
    let c = row.n_star_combined as f64;
    Ok(Comparison {
        d: params.d,
        n_star_z: row.n_star_z,
        n_star_x: row.n_star_x,
        n_star_combined: row.n_star_combined,
        empirical_argmin: sweep.argmin_rounds(),
        empirical_lo: lo,
        empirical_hi: hi,
        combined_bracketed: a.floor() <= c && c <= b.ceil(),
        overlaps: (lo as f64) <= b + tolerance && (hi as f64) >= a - tolerance,
    })
}

pub fn write_comparison_csv<W: Write>(out: W, rows: &[Comparison]) -> Result<()> {
    let err = |e: csv::Error| invalid("output", e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "d",
        "N_star_z",
        "N_star_x",
        "N_star_combined",
        "empirical_argmin",
        "empirical_lo",
        "empirical_hi",
        "combined_bracketed",
        "overlaps",
    ])
    .map_err(err)?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            r.n_star_z.to_string(),
            r.n_star_x.to_string(),
            r.n_star_combined.to_string(),
            r.empirical_argmin.to_string(),
            r.empirical_lo.to_string(),
            r.empirical_hi.to_string(),
            (r.combined_bracketed as u8).to_string(),
            (r.overlaps as u8).to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| invalid("output", e.to_string()))
}
