//! Discrete-phase reflection vectors and reflection-design schemes.
//!
//! The surface applies one of `2^b` phase shifts per element; a reflection
//! vector stores the codebook index of every element. Given an estimated
//! channel autocorrelation matrix, [`optimize_reflection`] maximizes the
//! quadratic gain `v^H R v` over the codebook by per-element coordinate
//! ascent. The sampling-based selection schemes used for comparison (RMS,
//! CSM, ACSM) live here as well.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::AutocorrMatrix;
use crate::error::{Error, Result};
use crate::hermitian::HERMITIAN_REL_TOL;
use crate::stream::{self, substream};

/// Unit-modulus reflection vector with entries from the `2^b`-point codebook.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionVector {
    indices: Vec<u8>,
    bits: u32,
}

impl ReflectionVector {
    pub fn from_indices(indices: Vec<u8>, bits: u32) -> Result<Self> {
        validate_bits(bits)?;
        let size = 1u32 << bits;
        if let Some(&bad) = indices.iter().find(|&&i| u32::from(i) >= size) {
            return Err(Error::Config(format!(
                "codebook index {bad} out of range for b={bits}"
            )));
        }
        Ok(Self { indices, bits })
    }

    /// All-zero phase configuration (every element at codebook index 0).
    pub fn flat(n: usize, bits: u32) -> Result<Self> {
        Self::from_indices(vec![0; n], bits)
    }

    /// Independent uniform draw over the codebook.
    pub fn random(n: usize, bits: u32, rng: &mut impl Rng) -> Result<Self> {
        validate_bits(bits)?;
        let size = 1u8 << bits;
        Ok(Self {
            indices: (0..n).map(|_| rng.gen_range(0..size)).collect(),
            bits,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn indices(&self) -> &[u8] {
        &self.indices
    }

    pub fn set_index(&mut self, element: usize, index: u8) {
        debug_assert!(u32::from(index) < (1u32 << self.bits));
        self.indices[element] = index;
    }

    /// Phase value of one codebook index: `exp(j * index * 2pi / 2^b)`.
    pub fn phase(bits: u32, index: u8) -> Complex64 {
        let delta = std::f64::consts::TAU / f64::from(1u32 << bits);
        Complex64::from_polar(1.0, delta * f64::from(index))
    }

    /// Complex unit-modulus value vector.
    pub fn value(&self) -> DVector<Complex64> {
        DVector::from_iterator(
            self.indices.len(),
            self.indices.iter().map(|&i| Self::phase(self.bits, i)),
        )
    }

    /// Indices as a comma-separated list, e.g. for CSV export.
    pub fn indices_csv(&self) -> String {
        self.indices
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn validate_bits(bits: u32) -> Result<()> {
    if !(1..=8).contains(&bits) {
        return Err(Error::Config(format!(
            "phase-shift bit count must be in 1..=8, got {bits}"
        )));
    }
    Ok(())
}

/// Outcome of a reflection optimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub v_opt: ReflectionVector,
    /// Final quadratic gain `v^H R v`, recomputed from scratch.
    pub objective: f64,
    pub method: String,
    pub restarts: usize,
    pub sweeps: usize,
    /// Objective after every accepted single-element update of the winning
    /// restart, starting from its initial value.
    pub objective_trace: Vec<f64>,
}

/// Quadratic gain `v^H R v` (real for Hermitian `R`).
pub fn quadratic_gain(r: &DMatrix<Complex64>, v: &ReflectionVector) -> f64 {
    let value = v.value();
    (value.adjoint() * r * value)[(0, 0)].re
}

/// Maximize `v^H R v` over the discrete codebook by cyclic coordinate ascent.
///
/// One start is the principal eigenvector of `R` quantized to the codebook;
/// the remaining `restarts - 1` starts are uniform random draws. Each start
/// sweeps the elements cyclically, setting every element to the exact
/// per-element optimum (a `2^b`-way enumeration), until a full sweep changes
/// nothing. Returns the best start.
pub fn optimize_reflection(
    r_hat: &DMatrix<Complex64>,
    bits: u32,
    restarts: usize,
    seed: u64,
) -> Result<OptimizationReport> {
    validate_bits(bits)?;
    let n = r_hat.nrows();
    if r_hat.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a nonempty square matrix, got {}x{}",
            r_hat.nrows(),
            r_hat.ncols()
        )));
    }
    let norm = r_hat.norm();
    let asym = (r_hat - r_hat.adjoint()).norm();
    if asym > HERMITIAN_REL_TOL.max(1e-9) * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitianInput {
            asymmetry: asym / norm.max(f64::MIN_POSITIVE),
            tol: HERMITIAN_REL_TOL,
        });
    }
    let r = (r_hat + r_hat.adjoint()) * Complex64::new(0.5, 0.0);
    let restarts = restarts.max(1);

    let mut rng = substream(seed, &[stream::OPTIMIZER]);
    let mut best: Option<(f64, ReflectionVector, Vec<f64>, usize)> = None;
    for start in 0..restarts {
        let init = if start == 0 {
            quantized_principal_eigenvector(&r, bits)
        } else {
            ReflectionVector::random(n, bits, &mut rng)?
        };
        let (v, obj, trace, sweeps) = coordinate_ascent(&r, init);
        if best.as_ref().map_or(true, |(b, ..)| obj > *b) {
            best = Some((obj, v, trace, sweeps));
        }
    }
    let (_, v_opt, objective_trace, sweeps) = best.expect("restarts >= 1");
    let objective = quadratic_gain(&r, &v_opt);
    Ok(OptimizationReport {
        v_opt,
        objective,
        method: "coordinate-ascent".to_string(),
        restarts,
        sweeps,
        objective_trace,
    })
}

fn quantized_principal_eigenvector(r: &DMatrix<Complex64>, bits: u32) -> ReflectionVector {
    let n = r.nrows();
    let eig = r.clone().symmetric_eigen();
    let top = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let x = eig.eigenvectors.column(top);
    let size = 1u32 << bits;
    let delta = std::f64::consts::TAU / f64::from(size);
    let indices = (0..n)
        .map(|i| {
            let arg = x[i].arg().rem_euclid(std::f64::consts::TAU);
            ((arg / delta).round() as u32 % size) as u8
        })
        .collect();
    ReflectionVector {
        indices,
        bits,
    }
}

fn coordinate_ascent(
    r: &DMatrix<Complex64>,
    mut v: ReflectionVector,
) -> (ReflectionVector, f64, Vec<f64>, usize) {
    let n = r.nrows();
    let bits = v.bits();
    let size = 1u32 << bits;
    let mut value = v.value();
    let mut obj = (value.adjoint() * r * &value)[(0, 0)].re;
    let mut trace = vec![obj];
    let mut sweeps = 0;
    loop {
        let mut changed = false;
        for e in 0..n {
            // Linear term seen by element e with all others fixed:
            // v^H R v = const + 2 Re(conj(v_e) c_e) with
            // c_e = sum_{j != e} R[e, j] v_j.
            let mut c = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != e {
                    c += r[(e, j)] * value[j];
                }
            }
            let current_score = (Complex64::conj(&value[e]) * c).re;
            let mut best_idx = v.indices()[e];
            let mut best_score = current_score;
            for idx in 0..size as u8 {
                let phase = ReflectionVector::phase(bits, idx);
                let score = (phase.conj() * c).re;
                if score > best_score {
                    best_score = score;
                    best_idx = idx;
                }
            }
            if best_idx != v.indices()[e] {
                obj += 2.0 * (best_score - current_score);
                v.set_index(e, best_idx);
                value[e] = ReflectionVector::phase(bits, best_idx);
                trace.push(obj);
                changed = true;
            }
        }
        sweeps += 1;
        if !changed {
            break;
        }
    }
    // Re-derive the final objective to shed accumulated increments.
    let final_obj = (value.adjoint() * r * &value)[(0, 0)].re;
    if let Some(last) = trace.last_mut() {
        *last = final_obj;
    }
    (v, final_obj, trace, sweeps)
}

/// Random-max sampling: draw `t_p` random vectors, keep the one with the
/// largest measured average gain.
pub fn benchmark_rms<F>(
    mut gain: F,
    t_p: usize,
    n: usize,
    bits: u32,
    seed: u64,
) -> Result<ReflectionVector>
where
    F: FnMut(&ReflectionVector) -> f64,
{
    if t_p == 0 {
        return Err(Error::EmptyInput("RMS needs at least one draw".into()));
    }
    let mut rng = substream(seed, &[stream::RMS_DRAW]);
    let mut best: Option<(f64, ReflectionVector)> = None;
    for _ in 0..t_p {
        let v = ReflectionVector::random(n, bits, &mut rng)?;
        let g = gain(&v);
        if best.as_ref().map_or(true, |(b, _)| g > *b) {
            best = Some((g, v));
        }
    }
    Ok(best.expect("t_p >= 1").1)
}

/// Conditional sample mean: per element and codebook value, average the
/// measured power over every measurement whose training vector takes that
/// value there, then pick the argmax per element (lowest index on ties).
///
/// `power` holds one row per location, one column per training vector.
pub fn benchmark_csm(
    power: &[Vec<f64>],
    training: &[ReflectionVector],
    bits: u32,
) -> Result<ReflectionVector> {
    validate_bits(bits)?;
    if power.is_empty() || training.is_empty() {
        return Err(Error::EmptyInput("CSM needs measurements".into()));
    }
    let t_p = training.len();
    if power.iter().any(|row| row.len() != t_p) {
        return Err(Error::DimensionMismatch(
            "power rows must have one entry per training vector".into(),
        ));
    }
    let n = training[0].len();
    let size = 1usize << bits;

    // Location-averaged gain per training vector.
    let averaged: Vec<f64> = (0..t_p)
        .map(|t| power.iter().map(|row| row[t]).sum::<f64>() / power.len() as f64)
        .collect();

    let mut indices = Vec::with_capacity(n);
    for e in 0..n {
        let mut sums = vec![0.0f64; size];
        let mut counts = vec![0usize; size];
        for (t, v) in training.iter().enumerate() {
            let idx = v.indices()[e] as usize;
            sums[idx] += averaged[t];
            counts[idx] += 1;
        }
        if let Some(idx) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyConditionCell { element: e, index: idx });
        }
        let mut best_idx = 0usize;
        let mut best_mean = sums[0] / counts[0] as f64;
        for idx in 1..size {
            let mean = sums[idx] / counts[idx] as f64;
            if mean > best_mean {
                best_mean = mean;
                best_idx = idx;
            }
        }
        indices.push(best_idx as u8);
    }
    ReflectionVector::from_indices(indices, bits)
}

/// Measurement collector for the staged schemes: given a batch of training
/// vectors, return one power row per location.
pub trait MeasureBatch {
    fn measure(&mut self, vectors: &[ReflectionVector]) -> Vec<Vec<f64>>;
}

impl<F> MeasureBatch for F
where
    F: FnMut(&[ReflectionVector]) -> Vec<Vec<f64>>,
{
    fn measure(&mut self, vectors: &[ReflectionVector]) -> Vec<Vec<f64>> {
        self(vectors)
    }
}

/// Adaptive CSM: stage 1 runs CSM on fresh random training; stage 2 splits
/// the elements into two halves and refines each in turn, holding the other
/// half fixed at its current value while only the free half is randomized.
///
/// The total measurement budget `t_p` is split evenly across stages (and
/// across the two half-refinements inside stage 2 and beyond). With
/// `stages == 1` this reduces to plain CSM on the full budget.
pub fn benchmark_acsm<M: MeasureBatch>(
    collector: &mut M,
    t_p: usize,
    n: usize,
    bits: u32,
    stages: usize,
    seed: u64,
) -> Result<ReflectionVector> {
    validate_bits(bits)?;
    if stages == 0 {
        return Err(Error::Config("ACSM needs at least one stage".into()));
    }
    if t_p < stages * 2 {
        return Err(Error::Config(format!(
            "ACSM budget {t_p} too small for {stages} stages"
        )));
    }
    let mut rng = substream(seed, &[stream::ACSM]);

    let stage1_budget = if stages == 1 { t_p } else { t_p / 2 };
    let batch: Vec<ReflectionVector> = (0..stage1_budget)
        .map(|_| ReflectionVector::random(n, bits, &mut rng))
        .collect::<Result<_>>()?;
    let power = collector.measure(&batch);
    let mut current = benchmark_csm(&power, &batch, bits)?;
    if stages == 1 {
        return Ok(current);
    }

    let halves: [Vec<usize>; 2] = [(0..n / 2).collect(), (n / 2..n).collect()];
    let refine_budget = (t_p - stage1_budget) / (2 * (stages - 1));
    for _ in 1..stages {
        for free in &halves {
            if free.is_empty() {
                continue;
            }
            // Fixed half pinned at the current choice, free half random.
            let batch: Vec<ReflectionVector> = (0..refine_budget.max(2))
                .map(|_| {
                    let mut v = current.clone();
                    for &e in free {
                        v.set_index(e, rng.gen_range(0..(1u8 << bits)));
                    }
                    v
                })
                .collect();
            let power = collector.measure(&batch);
            match csm_on_elements(&power, &batch, bits, free) {
                Ok(choices) => {
                    for (&e, &idx) in free.iter().zip(&choices) {
                        current.set_index(e, idx);
                    }
                }
                // A starved condition cell in a refinement round falls back
                // to the current value instead of aborting the whole scheme.
                Err(Error::EmptyConditionCell { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(current)
}

fn csm_on_elements(
    power: &[Vec<f64>],
    training: &[ReflectionVector],
    bits: u32,
    elements: &[usize],
) -> Result<Vec<u8>> {
    let t_p = training.len();
    let size = 1usize << bits;
    let averaged: Vec<f64> = (0..t_p)
        .map(|t| power.iter().map(|row| row[t]).sum::<f64>() / power.len() as f64)
        .collect();
    let mut out = Vec::with_capacity(elements.len());
    for &e in elements {
        let mut sums = vec![0.0f64; size];
        let mut counts = vec![0usize; size];
        for (t, v) in training.iter().enumerate() {
            let idx = v.indices()[e] as usize;
            sums[idx] += averaged[t];
            counts[idx] += 1;
        }
        if let Some(idx) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyConditionCell { element: e, index: idx });
        }
        let mut best_idx = 0usize;
        let mut best_mean = sums[0] / counts[0] as f64;
        for idx in 1..size {
            let mean = sums[idx] / counts[idx] as f64;
            if mean > best_mean {
                best_mean = mean;
                best_idx = idx;
            }
        }
        out.push(best_idx as u8);
    }
    Ok(out)
}

/// Average channel power gain of `v` against the empirical mean of `r_list`.
pub fn average_gain(v: &ReflectionVector, r_list: &[AutocorrMatrix]) -> Result<f64> {
    if r_list.is_empty() {
        return Err(Error::EmptyInput("average_gain needs at least one matrix".into()));
    }
    let n = r_list[0].dim();
    if v.len() != n || r_list.iter().any(|r| r.dim() != n) {
        return Err(Error::DimensionMismatch(
            "reflection vector and matrices must share the element count".into(),
        ));
    }
    let total: f64 = r_list
        .iter()
        .map(|r| quadratic_gain(r.matrix(), v))
        .sum();
    Ok(total / r_list.len() as f64)
}
