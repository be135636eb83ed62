//! Linear-chain CRF over per-sentence emission scores.
//!
//! Labels are plain indices `0..K` here so the same code serves the seven
//! rhetorical roles and small test instances. Everything runs in `f64` and in
//! log space.

mod linear;

pub use linear::{train_crf, CrfModel, CrfTrainConfig, LinearEmitter, TrainedCrf, TrainingDoc};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerically stable `log(sum(exp(xs)))`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// T x K score matrix, row per sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionMatrix {
    rows: usize,
    labels: usize,
    scores: Vec<f64>,
}

impl EmissionMatrix {
    pub fn zeros(rows: usize, labels: usize) -> Self {
        EmissionMatrix {
            rows,
            labels,
            scores: vec![0.0; rows * labels],
        }
    }

    pub fn from_vec(rows: usize, labels: usize, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != rows * labels {
            return Err(Error::Argument(format!(
                "emission buffer of length {} is not {rows}x{labels}",
                scores.len()
            )));
        }
        Ok(EmissionMatrix {
            rows,
            labels,
            scores,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Argument("ragged emission rows".into()));
        }
        Self::from_vec(rows.len(), k, rows.concat())
    }

    /// Number of positions (sentences).
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn num_labels(&self) -> usize {
        self.labels
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.scores[t * self.labels..(t + 1) * self.labels]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.scores[t * self.labels..(t + 1) * self.labels]
    }

    pub fn get(&self, t: usize, k: usize) -> f64 {
        self.scores[t * self.labels + k]
    }

    pub fn set(&mut self, t: usize, k: usize, v: f64) {
        self.scores[t * self.labels + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.scores
    }
}

/// Transition (from -> to), start and stop scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrfParams {
    pub num_labels: usize,
    pub transitions: Vec<f64>,
    pub start: Vec<f64>,
    pub stop: Vec<f64>,
}

impl CrfParams {
    pub fn zeros(k: usize) -> Self {
        CrfParams {
            num_labels: k,
            transitions: vec![0.0; k * k],
            start: vec![0.0; k],
            stop: vec![0.0; k],
        }
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transitions[from * self.num_labels + to]
    }

    pub fn set_transition(&mut self, from: usize, to: usize, v: f64) {
        self.transitions[from * self.num_labels + to] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.transitions
            .iter()
            .chain(&self.start)
            .chain(&self.stop)
            .all(|v| v.is_finite())
    }

    fn check(&self, em: &EmissionMatrix) -> Result<()> {
        if em.num_labels() != self.num_labels {
            return Err(Error::Argument(format!(
                "emissions have {} labels, parameters {}",
                em.num_labels(),
                self.num_labels
            )));
        }
        if em.is_empty() {
            return Err(Error::Argument("empty sequence".into()));
        }
        Ok(())
    }
}

/// Unnormalized log score of one label sequence.
pub fn sequence_score(em: &EmissionMatrix, p: &CrfParams, labels: &[usize]) -> Result<f64> {
    p.check(em)?;
    if labels.len() != em.len() {
        return Err(Error::Argument(format!(
            "{} labels for {} positions",
            labels.len(),
            em.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= p.num_labels) {
        return Err(Error::Argument(format!("label index {bad} out of range")));
    }
    let mut s = p.start[labels[0]] + p.stop[labels[labels.len() - 1]];
    for (t, &y) in labels.iter().enumerate() {
        s += em.get(t, y);
        if t > 0 {
            s += p.transition(labels[t - 1], y);
        }
    }
    Ok(s)
}

/// Forward log-messages: `alpha[t][j]` is the log-sum of all prefixes ending
/// in label `j` at position `t` (start and emissions included).
fn forward(em: &EmissionMatrix, p: &CrfParams) -> Vec<Vec<f64>> {
    let k = p.num_labels;
    let mut alpha = Vec::with_capacity(em.len());
    alpha.push((0..k).map(|j| p.start[j] + em.get(0, j)).collect::<Vec<_>>());
    let mut buf = vec![0.0; k];
    for t in 1..em.len() {
        let prev = &alpha[t - 1];
        let row: Vec<f64> = (0..k)
            .map(|j| {
                for i in 0..k {
                    buf[i] = prev[i] + p.transition(i, j);
                }
                log_sum_exp(&buf) + em.get(t, j)
            })
            .collect();
        alpha.push(row);
    }
    alpha
}

/// Backward log-messages: `beta[t][i]` is the log-sum over suffixes after
/// position `t` given label `i` at `t` (stop included, emission at `t`
/// excluded).
fn backward(em: &EmissionMatrix, p: &CrfParams) -> Vec<Vec<f64>> {
    let k = p.num_labels;
    let n = em.len();
    let mut beta = vec![vec![0.0; k]; n];
    beta[n - 1].copy_from_slice(&p.stop);
    let mut buf = vec![0.0; k];
    for t in (0..n - 1).rev() {
        for i in 0..k {
            for j in 0..k {
                buf[j] = p.transition(i, j) + em.get(t + 1, j) + beta[t + 1][j];
            }
            beta[t][i] = log_sum_exp(&buf);
        }
    }
    beta
}

fn final_log_z(alpha_last: &[f64], p: &CrfParams) -> f64 {
    let v: Vec<f64> = alpha_last.iter().zip(&p.stop).map(|(a, s)| a + s).collect();
    log_sum_exp(&v)
}

/// Log of the sum over all `K^T` label sequences of `exp(score)`.
pub fn log_partition(em: &EmissionMatrix, p: &CrfParams) -> Result<f64> {
    p.check(em)?;
    let alpha = forward(em, p);
    Ok(final_log_z(&alpha[alpha.len() - 1], p))
}

/// Highest scoring label sequence and its score. Backpointer ties go to the
/// lowest label index.
pub fn viterbi(em: &EmissionMatrix, p: &CrfParams) -> Result<(Vec<usize>, f64)> {
    p.check(em)?;
    let k = p.num_labels;
    let n = em.len();
    let mut delta: Vec<f64> = (0..k).map(|j| p.start[j] + em.get(0, j)).collect();
    let mut back = vec![vec![0usize; k]; n];
    for t in 1..n {
        let next: Vec<f64> = (0..k)
            .map(|j| {
                let mut best = 0;
                let mut best_score = delta[0] + p.transition(0, j);
                for i in 1..k {
                    let s = delta[i] + p.transition(i, j);
                    if s > best_score {
                        best = i;
                        best_score = s;
                    }
                }
                back[t][j] = best;
                best_score + em.get(t, j)
            })
            .collect();
        delta = next;
    }
    let mut last = 0;
    let mut best_score = delta[0] + p.stop[0];
    for j in 1..k {
        let s = delta[j] + p.stop[j];
        if s > best_score {
            last = j;
            best_score = s;
        }
    }
    let mut path = vec![last; n];
    for t in (1..n).rev() {
        path[t - 1] = back[t][path[t]];
    }
    Ok((path, best_score))
}

/// Posterior label marginals `P(y_t = k)`, T x K.
pub fn marginals(em: &EmissionMatrix, p: &CrfParams) -> Result<EmissionMatrix> {
    p.check(em)?;
    let alpha = forward(em, p);
    let beta = backward(em, p);
    let log_z = final_log_z(&alpha[alpha.len() - 1], p);
    let mut out = EmissionMatrix::zeros(em.len(), p.num_labels);
    for t in 0..em.len() {
        for j in 0..p.num_labels {
            out.set(t, j, (alpha[t][j] + beta[t][j] - log_z).exp());
        }
    }
    Ok(out)
}

/// Gradient of the negative log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfGrad {
    pub emissions: EmissionMatrix,
    pub params: CrfParams,
}

/// Negative log-likelihood of `gold` and its gradient with respect to the
/// emissions and every CRF parameter (expected minus observed counts, from
/// forward-backward).
pub fn nll_and_grad(em: &EmissionMatrix, p: &CrfParams, gold: &[usize]) -> Result<(f64, CrfGrad)> {
    let gold_score = sequence_score(em, p, gold)?;
    let k = p.num_labels;
    let n = em.len();
    let alpha = forward(em, p);
    let beta = backward(em, p);
    let log_z = final_log_z(&alpha[n - 1], p);

    let mut d_em = EmissionMatrix::zeros(n, k);
    let mut d_p = CrfParams::zeros(k);
    for t in 0..n {
        for j in 0..k {
            d_em.set(t, j, (alpha[t][j] + beta[t][j] - log_z).exp());
        }
        d_em.row_mut(t)[gold[t]] -= 1.0;
    }
    // start and stop see the same marginal-minus-indicator as the end rows
    d_p.start.copy_from_slice(d_em.row(0));
    d_p.stop.copy_from_slice(d_em.row(n - 1));
    for t in 0..n - 1 {
        for i in 0..k {
            for j in 0..k {
                let lp = alpha[t][i] + p.transition(i, j) + em.get(t + 1, j) + beta[t + 1][j] - log_z;
                d_p.transitions[i * k + j] += lp.exp();
            }
        }
        d_p.transitions[gold[t] * k + gold[t + 1]] -= 1.0;
    }
    Ok((
        log_z - gold_score,
        CrfGrad {
            emissions: d_em,
            params: d_p,
        },
    ))
}
