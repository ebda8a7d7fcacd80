//! Lower bounds and analytic expectations.
//!
//! Fractional quantities are reported both raw and rounded up; assertions
//! against lower bounds should use the raw value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{symmetric_diameter, NetworkGraph};

/// `H(n) = 1 + 1/2 + ... + 1/n`, with `H(0) = 0`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Approximation factor of the greedy backbone, `2 + H(Δ)`.
pub fn greedy_cds_factor(max_degree: usize) -> f64 {
    2.0 + harmonic(max_degree)
}

/// Message approximation factor for general graphs, `(2H(Δ) + 5)(1 + 1/c)`.
pub fn message_ratio_bound(max_degree: usize, c: usize) -> f64 {
    (2.0 * harmonic(max_degree) + 5.0) * (1.0 + 1.0 / c as f64)
}

/// Message approximation factor for unit disk graphs, `15.6(1 + 1/c)`.
pub fn udg_message_ratio_bound(c: usize) -> f64 {
    15.6 * (1.0 + 1.0 / c as f64)
}

/// Interference-free makespan bound, `2(4 diam(G) + ceil(k/c))`.
pub fn schedule_time_bound(diameter: u32, k: usize, c: usize) -> usize {
    2 * (4 * diameter as usize + k.div_ceil(c))
}

/// `max(k, k(MCDS size - 1)/c)` as a real number.
pub fn message_lower_bound_real(k: usize, c: usize, mcds_size: usize) -> Result<f64> {
    if c < 1 {
        return Err(Error::InvalidCompression { c, k });
    }
    let aggregated = k as f64 * mcds_size.saturating_sub(1) as f64 / c as f64;
    Ok((k as f64).max(aggregated))
}

/// `max(k, ceil(k(MCDS size - 1)/c))`.
pub fn message_lower_bound(k: usize, c: usize, mcds_size: usize) -> Result<usize> {
    if c < 1 {
        return Err(Error::InvalidCompression { c, k });
    }
    Ok(k.max((k * mcds_size.saturating_sub(1)).div_ceil(c)))
}

/// `ceil(k/c) + d - 1` where `d` is the diameter of the star-plus-path
/// fixture.
pub fn time_lower_bound_star_path(k: usize, c: usize, d: usize) -> Result<usize> {
    if c < 1 {
        return Err(Error::InvalidCompression { c, k });
    }
    if k < 1 || d < 1 {
        return Err(Error::InvalidParameter(format!(
            "k = {k} and d = {d} must be at least 1"
        )));
    }
    Ok(k.div_ceil(c) + d - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub message_lb: usize,
    pub message_lb_real: f64,
    /// Universal time floor: the diameter.
    pub time_lb: usize,
    pub mcds_size: usize,
    /// True when `mcds_size` comes from the exact oracle rather than an estimate.
    pub mcds_exact: bool,
    pub formulas_used: Vec<String>,
}

impl BoundReport {
    pub fn compute(g: &NetworkGraph, k: usize, c: usize, mcds_size: usize, mcds_exact: bool) -> Result<Self> {
        let mut formulas = vec!["message-lb: max(k, k(mcds-1)/c)".to_string()];
        if !mcds_exact {
            formulas.push("mcds-size: greedy estimate".into());
        }
        formulas.push("time-lb: diam(G)".into());
        Ok(Self {
            message_lb: message_lower_bound(k, c, mcds_size)?,
            message_lb_real: message_lower_bound_real(k, c, mcds_size)?,
            time_lb: symmetric_diameter(g)? as usize,
            mcds_size,
            mcds_exact,
            formulas_used: formulas,
        })
    }
}

fn slots(delta_max: usize, mu: f64) -> usize {
    ((mu * delta_max as f64).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdStats {
    /// Slots per half round, `ceil(μΔ)`.
    pub slots: usize,
    /// Probability that all of a node's neighborhood succeeds in one round:
    /// `(1 - 1/m)^(Δδ)`.
    pub success_prob: f64,
    /// Probability that one transmitter avoids `δ` contenders: `(1 - 1/m)^δ`.
    pub single_success_prob: f64,
    /// Bound on expected retransmissions, `e^(2δ/μ)`.
    pub exp_retx_bound: f64,
    /// Expected error messages, `δ(1 - (1 - 1/m)^Δ)`.
    pub exp_err_msgs: f64,
    /// Exponential form of the error-message expectation, `δ(1 - e^(-1/μ))`.
    pub exp_err_msgs_approx: f64,
}

pub fn expected_cd_stats(delta: usize, delta_max: usize, mu: f64) -> CdStats {
    let m = slots(delta_max, mu);
    let q = 1.0 - 1.0 / m as f64;
    let d = delta as f64;
    CdStats {
        slots: m,
        success_prob: q.powf(d * delta_max as f64),
        single_success_prob: q.powf(d),
        exp_retx_bound: (2.0 * d / mu).exp(),
        exp_err_msgs: d * (1.0 - q.powf(delta_max as f64)),
        exp_err_msgs_approx: d * (1.0 - (-1.0 / mu).exp()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoCdStats {
    /// Acknowledgement success probability, `e^(-2/μ)`.
    pub success_prob: f64,
    /// Expected neighbor transmissions, `e^(2/μ) δ`.
    pub exp_neighbor_tx: f64,
    /// Smallest `j` with `δ(1 - e^(-2/μ))^j < 1`.
    pub rounds_j: usize,
    /// `log(1/δ) / log(1 - e^(-2/μ))`.
    pub j_prime_delta: f64,
    /// `log(1/Δ) / log(1 - e^(-2/μ))`.
    pub j_prime_max: f64,
}

pub fn expected_nocd_stats(delta: usize, delta_max: usize, mu: f64) -> NoCdStats {
    let p = (-2.0 / mu).exp();
    let q = 1.0 - p;
    let d = delta as f64;
    let j_prime = |x: f64| if x <= 1.0 { 0.0 } else { (1.0 / x).ln() / q.ln() };
    let mut rounds_j = 0;
    while d * q.powi(rounds_j as i32) >= 1.0 {
        rounds_j += 1;
    }
    NoCdStats {
        success_prob: p,
        exp_neighbor_tx: d / p,
        rounds_j,
        j_prime_delta: j_prime(d),
        j_prime_max: j_prime(delta_max as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn message_lower_bound_examples() {
        assert_eq!(message_lower_bound(3, 1, 1).unwrap(), 3);
        assert_eq!(message_lower_bound(1, 1, 7).unwrap(), 6);
        assert_eq!(message_lower_bound(1, 1, 1).unwrap(), 1);
        assert_eq!(message_lower_bound(4, 2, 5).unwrap(), 8);
        assert_eq!(message_lower_bound_real(4, 3, 5).unwrap(), 16.0 / 3.0);
        assert!(message_lower_bound(4, 0, 5).is_err());
    }

    #[test]
    fn star_path_time_examples() {
        for d in 1..5 {
            assert_eq!(time_lower_bound_star_path(3, 3, d).unwrap(), d);
        }
        assert_eq!(time_lower_bound_star_path(4, 1, 3).unwrap(), 6);
        assert_eq!(time_lower_bound_star_path(5, 2, 1).unwrap(), 3);
        assert!(time_lower_bound_star_path(0, 1, 1).is_err());
    }

    #[test]
    fn cd_stats_examples() {
        let s = expected_cd_stats(0, 4, 4.0);
        assert_eq!(s.success_prob, 1.0);
        assert_eq!(s.exp_err_msgs, 0.0);
        let s = expected_cd_stats(5, 5, 5.0);
        assert!((s.exp_retx_bound - 7.389_056).abs() < 1e-5);
        let s = expected_cd_stats(4, 4, 4.0);
        assert_eq!(s.slots, 16);
        assert!((s.success_prob - (15.0f64 / 16.0).powi(16)).abs() < 1e-15);
    }

    #[test]
    fn cd_success_is_monotone() {
        for delta in 1..10 {
            let a = expected_cd_stats(delta, 10, 3.0).success_prob;
            let b = expected_cd_stats(delta + 1, 10, 3.0).success_prob;
            assert!(b < a);
            let c = expected_cd_stats(delta, 10, 4.0).success_prob;
            assert!(c > a);
        }
    }

    #[test]
    fn nocd_rounds() {
        assert_eq!(expected_nocd_stats(1, 1, 2.0).rounds_j, 1);
        assert_eq!(expected_nocd_stats(0, 1, 2.0).rounds_j, 0);
        let s = expected_nocd_stats(8, 8, 2.0);
        let expect = ((1.0f64 / 8.0).ln() / (1.0 - (-1.0f64).exp()).ln()).ceil() as usize;
        assert_eq!(s.rounds_j, expect);
        assert_eq!(s.rounds_j, 5);
        assert!((s.exp_neighbor_tx - 8.0 * std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(0), 0.0);
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
        assert!((greedy_cds_factor(2) - 3.5).abs() < 1e-15);
    }
}
