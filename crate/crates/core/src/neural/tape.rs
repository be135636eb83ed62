//! Reverse-mode differentiation over an explicit operation tape.
//!
//! Values are flat `f64` buffers; matrices are row-major and their shape is
//! carried by the operation that consumes them. Only the operations the
//! hierarchical models need are provided.

use crate::crf::{self, CrfParams, EmissionMatrix};
use crate::error::Result;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    /// `rows x cols` matrix times a `cols` vector.
    MatVec { w: Var, x: Var, rows: usize, cols: usize },
    Add(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Tanh(Var),
    Sigmoid(Var),
    Concat(Vec<Var>),
    Slice { x: Var, start: usize },
    LogSumExp(Var),
    /// CRF negative log-likelihood; the gradient is computed during the
    /// forward pass and cached.
    CrfNll {
        em: Var,
        transitions: Var,
        start: Var,
        stop: Var,
        grad: Box<crf::CrfGrad>,
    },
}

#[derive(Debug)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    pub fn leaf(&mut self, value: Vec<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matvec(&mut self, w: Var, x: Var, rows: usize, cols: usize) -> Var {
        let wv = self.value(w);
        let xv = self.value(x);
        debug_assert_eq!(wv.len(), rows * cols);
        debug_assert_eq!(xv.len(), cols);
        let out = wv
            .chunks_exact(cols)
            .map(|row| row.iter().zip(xv).map(|(a, b)| a * b).sum())
            .collect();
        self.push(out, Op::MatVec { w, x, rows, cols })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x + y).collect();
        self.push(out, Op::Add(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).collect();
        self.push(out, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).iter().map(|x| x * c).collect();
        self.push(out, Op::Scale(a, c))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).iter().map(|x| x.tanh()).collect();
        self.push(out, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).iter().map(|&x| sigmoid(x)).collect();
        self.push(out, Op::Sigmoid(a))
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let mut out = Vec::new();
        for &p in parts {
            out.extend_from_slice(self.value(p));
        }
        self.push(out, Op::Concat(parts.to_vec()))
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Var {
        let out = self.value(x)[start..start + len].to_vec();
        self.push(out, Op::Slice { x, start })
    }

    /// Scalar `log(sum(exp(x)))`.
    pub fn log_sum_exp(&mut self, x: Var) -> Var {
        let out = vec![crf::log_sum_exp(self.value(x))];
        self.push(out, Op::LogSumExp(x))
    }

    /// Softmax cross-entropy of `logits` against class `target`, built from
    /// log-sum-exp and slice.
    pub fn softmax_xent(&mut self, logits: Var, target: usize) -> Var {
        let lse = self.log_sum_exp(logits);
        let picked = self.slice(logits, target, 1);
        let neg = self.scale(picked, -1.0);
        self.add(lse, neg)
    }

    /// Sum of scalar nodes.
    pub fn sum(&mut self, xs: &[Var]) -> Var {
        let mut acc = xs[0];
        for &x in &xs[1..] {
            acc = self.add(acc, x);
        }
        acc
    }

    /// Linear-chain CRF negative log-likelihood of `gold`. `em` holds the
    /// `T x K` emissions row-major.
    pub fn crf_nll(
        &mut self,
        em: Var,
        transitions: Var,
        start: Var,
        stop: Var,
        num_labels: usize,
        gold: &[usize],
    ) -> Result<Var> {
        let emv = self.value(em).to_vec();
        let params = CrfParams {
            num_labels,
            transitions: self.value(transitions).to_vec(),
            start: self.value(start).to_vec(),
            stop: self.value(stop).to_vec(),
        };
        let em_m = EmissionMatrix::from_vec(emv.len() / num_labels, num_labels, emv)?;
        let (nll, grad) = crf::nll_and_grad(&em_m, &params, gold)?;
        Ok(self.push(
            vec![nll],
            Op::CrfNll {
                em,
                transitions,
                start,
                stop,
                grad: Box::new(grad),
            },
        ))
    }

    /// Gradients of scalar `root` with respect to every node.
    pub fn backward(&self, root: Var) -> Grads {
        let mut g: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        g[root.0] = Some(vec![1.0; self.nodes[root.0].value.len()]);
        for i in (0..=root.0).rev() {
            let Some(dy) = g[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {}
                Op::MatVec { w, x, rows, cols } => {
                    let (rows, cols) = (*rows, *cols);
                    let wv = &self.nodes[w.0].value;
                    let xv = &self.nodes[x.0].value;
                    {
                        let dw = slot(&mut g, *w, rows * cols);
                        for (r, &d) in dy.iter().enumerate() {
                            if d != 0.0 {
                                for (a, b) in dw[r * cols..(r + 1) * cols].iter_mut().zip(xv) {
                                    *a += d * b;
                                }
                            }
                        }
                    }
                    let dx = slot(&mut g, *x, cols);
                    for (r, &d) in dy.iter().enumerate() {
                        if d != 0.0 {
                            for (a, b) in dx.iter_mut().zip(&wv[r * cols..(r + 1) * cols]) {
                                *a += d * b;
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    for p in [*a, *b] {
                        for (s, d) in slot(&mut g, p, dy.len()).iter_mut().zip(&dy) {
                            *s += d;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    for ((s, d), o) in slot(&mut g, *a, dy.len()).iter_mut().zip(&dy).zip(bv) {
                        *s += d * o;
                    }
                    for ((s, d), o) in slot(&mut g, *b, dy.len()).iter_mut().zip(&dy).zip(av) {
                        *s += d * o;
                    }
                }
                Op::Scale(a, c) => {
                    for (s, d) in slot(&mut g, *a, dy.len()).iter_mut().zip(&dy) {
                        *s += d * c;
                    }
                }
                Op::Tanh(a) => {
                    for ((s, d), y) in slot(&mut g, *a, dy.len()).iter_mut().zip(&dy).zip(&node.value) {
                        *s += d * (1.0 - y * y);
                    }
                }
                Op::Sigmoid(a) => {
                    for ((s, d), y) in slot(&mut g, *a, dy.len()).iter_mut().zip(&dy).zip(&node.value) {
                        *s += d * y * (1.0 - y);
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let n = self.nodes[p.0].value.len();
                        for (s, d) in slot(&mut g, *p, n).iter_mut().zip(&dy[off..off + n]) {
                            *s += d;
                        }
                        off += n;
                    }
                }
                Op::Slice { x, start } => {
                    let n = self.nodes[x.0].value.len();
                    for (s, d) in slot(&mut g, *x, n)[*start..*start + dy.len()].iter_mut().zip(&dy) {
                        *s += d;
                    }
                }
                Op::LogSumExp(x) => {
                    let xv = &self.nodes[x.0].value;
                    let lse = node.value[0];
                    for (s, v) in slot(&mut g, *x, xv.len()).iter_mut().zip(xv) {
                        *s += dy[0] * (v - lse).exp();
                    }
                }
                Op::CrfNll {
                    em,
                    transitions,
                    start,
                    stop,
                    grad,
                } => {
                    let d = dy[0];
                    let pairs: [(Var, &[f64]); 4] = [
                        (*em, grad.emissions.as_slice()),
                        (*transitions, &grad.params.transitions),
                        (*start, &grad.params.start),
                        (*stop, &grad.params.stop),
                    ];
                    for (v, gv) in pairs {
                        for (s, x) in slot(&mut g, v, gv.len()).iter_mut().zip(gv) {
                            *s += d * x;
                        }
                    }
                }
            }
            g[i] = Some(dy);
        }
        Grads { grads: g }
    }
}

fn slot(g: &mut [Option<Vec<f64>>], v: Var, n: usize) -> &mut Vec<f64> {
    g[v.0].get_or_insert_with(|| vec![0.0; n])
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Result of [`Tape::backward`].
#[derive(Debug)]
pub struct Grads {
    grads: Vec<Option<Vec<f64>>>,
}

impl Grads {
    /// Gradient for `v`; `None` when `v` does not influence the root.
    pub fn get(&self, v: Var) -> Option<&[f64]> {
        self.grads[v.0].as_deref()
    }

    pub fn take(&mut self, v: Var) -> Option<Vec<f64>> {
        self.grads[v.0].take()
    }
}
