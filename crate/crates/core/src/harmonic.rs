//! The weighted rational-approximation counter G(theta) and the empirical
//! pair-sum report against its analytic upper-bound shape.

use crate::arith::von_mangoldt;
use crate::error::{RaceError, Result};
use rayon::prelude::*;

/// Points on the unit circle with a verified minimum spacing.
#[derive(Clone, Debug)]
pub struct SpacedPoints {
    points: Vec<f64>,
    spacing: f64,
}

#[cfg(test)]
fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl SpacedPoints {
    /// Accept points in [0,1) whose pairwise circle distance is >= 1/x.
    pub fn new(points: Vec<f64>, x: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(RaceError::Domain("need at least one point".into()));
        }
        for &p in &points {
            if !(0.0..1.0).contains(&p) {
                return Err(RaceError::Domain(format!("point {p} outside [0,1)")));
            }
        }
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut spacing = f64::INFINITY;
        for w in sorted.windows(2) {
            spacing = spacing.min(w[1] - w[0]);
        }
        if sorted.len() > 1 {
            spacing = spacing.min(1.0 - (sorted[sorted.len() - 1] - sorted[0]));
        }
        if spacing < 1.0 / x {
            return Err(RaceError::Domain(format!(
                "points are {spacing}-spaced, need 1/x = {}",
                1.0 / x
            )));
        }
        Ok(SpacedPoints { points, spacing })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// G(theta) = sum over q <= big_q of (Lambda(q)/q) #{a : ||theta - a/q|| <= 1/x}.
/// Requires x > 2Q, so at most one a per q can fire; that a is found by
/// rounding theta*q, making the evaluation O(Q).
pub fn g_function(theta: f64, big_q: u64, x: f64) -> Result<f64> {
    if big_q < 1 {
        return Err(RaceError::Domain("Q must be >= 1".into()));
    }
    if x <= 2.0 * big_q as f64 {
        return Err(RaceError::Domain(format!(
            "need x > 2Q (x = {x}, Q = {big_q})"
        )));
    }
    let theta = theta - theta.floor();
    let window = 1.0 / x;
    let mut sum = 0.0;
    for q in 2..=big_q {
        let lam = von_mangoldt(q);
        if lam == 0.0 {
            continue;
        }
        let qf = q as f64;
        let a = (theta * qf).round();
        let dist = (theta * qf - a).abs() / qf;
        if dist <= window {
            sum += lam / qf;
        }
    }
    // q = 1: Lambda(1) = 0, contributes nothing
    Ok(sum)
}

#[derive(Clone, Copy, Debug)]
pub struct PairSumReport {
    /// sum over (r,s) of G(theta_r - phi_s)
    pub sum: f64,
    /// sqrt(RS) log^2(2QRS) + RSQ/x
    pub reference_form: f64,
    pub ratio: f64,
}

/// Total of G over all difference pairs, compared against the analytic shape.
pub fn pair_sum_report(
    thetas: &SpacedPoints,
    phis: &SpacedPoints,
    big_q: u64,
    x: f64,
) -> Result<PairSumReport> {
    // validate the (Q, x) domain once up front
    g_function(0.0, big_q, x)?;
    for (name, sp) in [("theta", thetas), ("phi", phis)] {
        if sp.spacing() < 1.0 / x {
            return Err(RaceError::Domain(format!(
                "{name} points are {}-spaced, need 1/x = {}",
                sp.spacing(),
                1.0 / x
            )));
        }
    }
    let sum: f64 = thetas
        .points
        .par_iter()
        .map(|&t| {
            phis.points
                .iter()
                .map(|&p| g_function(t - p, big_q, x).expect("domain checked"))
                .sum::<f64>()
        })
        .sum();
    let r = thetas.len() as f64;
    let s = phis.len() as f64;
    let reference_form =
        (r * s).sqrt() * (2.0 * big_q as f64 * r * s).ln().powi(2) + r * s * big_q as f64 / x;
    Ok(PairSumReport {
        sum,
        reference_form,
        ratio: sum / reference_form,
    })
}
