//! Monte Carlo engine for ordering probabilities under the two models:
//! the zero-sum X-vector with shared uniform-circle randomness, and the
//! Gaussian Z-vector with matched correlations.
//!
//! Estimates are deterministic for a given (seed, sample count): the RNG is
//! keyed by fixed-size sample chunks, so the worker count never changes the
//! result.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::covariance::{CorrelationMatrix, ShiftVector};
use crate::error::{RaceError, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::CounterRng;
use crate::zeros::ZeroSet;

/// A race pattern over an n-tuple of contestants (tuple positions, 0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderingEvent {
    /// positions in decreasing order: vals[p0] > vals[p1] > ... > vals[p_{n-1}]
    FullOrdering(Vec<usize>),
    /// position i strictly ahead of everyone else
    Leader(usize),
    /// first k tuple positions in order, k-th ahead of the rest
    FirstK(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventOutcome {
    Holds,
    Fails,
    /// an exact float equality made the strict pattern ambiguous
    Tie,
}

impl OrderingEvent {
    pub fn n_required(&self) -> usize {
        match self {
            OrderingEvent::FullOrdering(p) => p.len(),
            OrderingEvent::Leader(i) => i + 1,
            OrderingEvent::FirstK(k) => *k,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            OrderingEvent::FullOrdering(perm) => {
                let mut seen = vec![false; n];
                if perm.len() != n {
                    return Err(RaceError::Domain(format!(
                        "full ordering names {} positions, tuple has {n}",
                        perm.len()
                    )));
                }
                for &p in perm {
                    if p >= n || seen[p] {
                        return Err(RaceError::Domain(format!("bad permutation entry {p}")));
                    }
                    seen[p] = true;
                }
            }
            OrderingEvent::Leader(i) => {
                if *i >= n {
                    return Err(RaceError::Domain(format!("leader index {i} out of range")));
                }
            }
            OrderingEvent::FirstK(k) => {
                if *k < 1 || *k > n {
                    return Err(RaceError::Domain(format!("firstk k={k} out of range 1..={n}")));
                }
            }
        }
        Ok(())
    }

    pub fn evaluate<T: PartialOrd>(&self, vals: &[T]) -> EventOutcome {
        match self {
            OrderingEvent::FullOrdering(perm) => {
                for w in perm.windows(2) {
                    if vals[w[0]] == vals[w[1]] {
                        return EventOutcome::Tie;
                    }
                    if vals[w[0]] < vals[w[1]] {
                        return EventOutcome::Fails;
                    }
                }
                EventOutcome::Holds
            }
            OrderingEvent::Leader(i) => {
                let mut tie = false;
                for (j, v) in vals.iter().enumerate() {
                    if j == *i {
                        continue;
                    }
                    if *v > vals[*i] {
                        return EventOutcome::Fails;
                    }
                    if *v == vals[*i] {
                        tie = true;
                    }
                }
                if tie {
                    EventOutcome::Tie
                } else {
                    EventOutcome::Holds
                }
            }
            OrderingEvent::FirstK(k) => {
                let k = *k;
                for w in vals[..k].windows(2) {
                    if w[0] == w[1] {
                        return EventOutcome::Tie;
                    }
                    if w[0] < w[1] {
                        return EventOutcome::Fails;
                    }
                }
                let mut tie = false;
                for v in &vals[k..] {
                    if *v > vals[k - 1] {
                        return EventOutcome::Fails;
                    }
                    if *v == vals[k - 1] {
                        tie = true;
                    }
                }
                if tie {
                    EventOutcome::Tie
                } else {
                    EventOutcome::Holds
                }
            }
        }
    }

    /// The symmetric-case prediction: 1/n! for a full ordering, 1/n for a
    /// leader, (n-k)!/n! for a first-k pattern.
    pub fn symmetric_prediction(&self, n: usize) -> f64 {
        fn log_falling(n: usize, k: usize) -> f64 {
            ((n - k + 1)..=n).map(|v| (v as f64).ln()).sum()
        }
        match self {
            OrderingEvent::FullOrdering(_) => (-log_falling(n, n)).exp(),
            OrderingEvent::Leader(_) => 1.0 / n as f64,
            OrderingEvent::FirstK(k) => (-log_falling(n, *k)).exp(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    XModel,
    ZModel,
    Sieve,
}

#[derive(Clone, Debug)]
pub struct DensityEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub hits: u64,
    pub ties: u64,
    pub prediction: Option<f64>,
    pub bound: Option<f64>,
    pub model: ModelKind,
}

/// One sample of the normalized X-vector: the per-character inner sums over
/// zeros are drawn once (one fresh circle point per zero) and reused for all
/// residues via Re(2 chi(a) S_chi).
pub struct XSampler {
    /// per character block: zero weights 1/sqrt(1/4+gamma^2)
    block_weights: Vec<Vec<f64>>,
    /// per block, per residue: 2 chi(a)
    coeffs: Vec<Vec<Complex64>>,
    /// -C_q(a)/sqrt(Var), zero when shifts disabled
    shifts: Vec<f64>,
    inv_sqrt_var: f64,
    n: usize,
}

impl XSampler {
    pub fn new(
        zs: &ZeroSet,
        table: &crate::characters::CharacterTable,
        shifts: &ShiftVector,
        include_shifts: bool,
    ) -> Result<XSampler> {
        let var = crate::covariance::var_q(zs);
        if var <= 0.0 {
            return Err(RaceError::Domain("zero set has no zeros".into()));
        }
        let inv_sqrt_var = 1.0 / var.sqrt();
        let n = shifts.residues.len();
        let mut block_weights = Vec::with_capacity(zs.blocks.len());
        let mut coeffs = Vec::with_capacity(zs.blocks.len());
        for block in &zs.blocks {
            block_weights.push(
                block
                    .gammas
                    .iter()
                    .map(|&g| 1.0 / (0.25 + g * g).sqrt())
                    .collect(),
            );
            let row: Result<Vec<Complex64>> = shifts
                .residues
                .iter()
                .map(|&a| Ok(table.eval(block.conrey_index, a)? * 2.0))
                .collect();
            coeffs.push(row?);
        }
        let shift_vals = shifts
            .c
            .iter()
            .map(|&c| {
                if include_shifts {
                    -(c as f64) * inv_sqrt_var
                } else {
                    0.0
                }
            })
            .collect();
        Ok(XSampler {
            block_weights,
            coeffs,
            shifts: shift_vals,
            inv_sqrt_var,
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The per-coordinate means (shift part), as seen by a matching Z model.
    pub fn means(&self) -> &[f64] {
        &self.shifts
    }

    pub fn sample(&self, rng: &mut CounterRng, out: &mut [f64]) {
        out.copy_from_slice(&self.shifts);
        for (weights, coeffs) in self.block_weights.iter().zip(&self.coeffs) {
            let mut s = Complex64::new(0.0, 0.0);
            for &w in weights {
                let (sin, cos) = rng.angle().sin_cos();
                s.re += w * cos;
                s.im += w * sin;
            }
            s *= self.inv_sqrt_var;
            for (o, c) in out.iter_mut().zip(coeffs) {
                *o += c.re * s.re - c.im * s.im; // Re(c * S)
            }
        }
    }
}

/// Gaussian sampler with the given correlation matrix (Cholesky with jitter
/// escalation) and optional mean vector.
pub struct ZSampler {
    chol: Cholesky,
    /// set when the factor is diagonal (e.g. independent coordinates):
    /// the O(n^2) triangular multiply collapses to a scale
    diag: Option<Vec<f64>>,
    mean: Vec<f64>,
    n: usize,
}

impl ZSampler {
    pub fn new(r: &Matrix, mean: Option<Vec<f64>>) -> Result<ZSampler> {
        let n = r.rows();
        let chol = Cholesky::new(r)?;
        let off_diag = (0..n).any(|i| (0..i).any(|j| chol.lower[(i, j)] != 0.0));
        let diag = if off_diag {
            None
        } else {
            Some((0..n).map(|i| chol.lower[(i, i)]).collect())
        };
        let mean = mean.unwrap_or_else(|| vec![0.0; n]);
        assert_eq!(mean.len(), n);
        Ok(ZSampler {
            chol,
            diag,
            mean,
            n,
        })
    }

    pub fn from_correlation(cm: &CorrelationMatrix, mean: Option<Vec<f64>>) -> Result<ZSampler> {
        ZSampler::new(&cm.r, mean)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn jitter(&self) -> f64 {
        self.chol.jitter
    }

    pub fn sample(&self, rng: &mut CounterRng, scratch: &mut [f64], out: &mut [f64]) {
        for s in scratch.iter_mut() {
            *s = rng.sample(StandardNormal);
        }
        if let Some(d) = &self.diag {
            for ((o, s), w) in out.iter_mut().zip(scratch.iter()).zip(d) {
                *o = w * s;
            }
        } else {
            self.chol.apply(scratch, out);
        }
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o += m;
        }
    }
}

pub enum Model<'a> {
    X(&'a XSampler),
    Z(&'a ZSampler),
}

impl Model<'_> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::X(_) => ModelKind::XModel,
            Model::Z(_) => ModelKind::ZModel,
        }
    }

    fn n(&self) -> usize {
        match self {
            Model::X(s) => s.n(),
            Model::Z(s) => s.n(),
        }
    }
}

/// Samples per RNG chunk; the estimate depends on (seed, samples) only
/// because chunk boundaries are fixed regardless of worker count.
pub const CHUNK: u64 = 1 << 16;

/// Estimate the probability of `event` under `model` by Monte Carlo.
/// Ties count as failures and are tallied separately.
pub fn mc_event_probability(
    model: &Model,
    event: &OrderingEvent,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<DensityEstimate> {
    if samples < 1000 {
        return Err(RaceError::Domain(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let n = model.n();
    event.validate(n)?;
    let chunks = samples.div_ceil(CHUNK);
    let run = |chunk: u64| -> (u64, u64) {
        let mut rng = CounterRng::new(seed, chunk);
        let lo = chunk * CHUNK;
        let hi = (lo + CHUNK).min(samples);
        let mut vals = vec![0.0f64; n];
        let mut scratch = vec![0.0f64; n];
        let mut hits = 0u64;
        let mut ties = 0u64;
        for _ in lo..hi {
            match model {
                Model::X(s) => s.sample(&mut rng, &mut vals),
                Model::Z(s) => s.sample(&mut rng, &mut scratch, &mut vals),
            }
            match event.evaluate(&vals) {
                EventOutcome::Holds => hits += 1,
                EventOutcome::Tie => ties += 1,
                EventOutcome::Fails => {}
            }
        }
        (hits, ties)
    };
    let (hits, ties) = if workers == 1 {
        let mut acc = (0u64, 0u64);
        for chunk in 0..chunks {
            let (h, t) = run(chunk);
            acc.0 += h;
            acc.1 += t;
        }
        acc
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| RaceError::Domain(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..chunks)
                .into_par_iter()
                .map(run)
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
        })
    };
    let value = hits as f64 / samples as f64;
    Ok(DensityEstimate {
        value,
        stderr: (value * (1.0 - value) / samples as f64).sqrt(),
        samples,
        hits,
        ties,
        prediction: None,
        bound: None,
        model: model.kind(),
    })
}
