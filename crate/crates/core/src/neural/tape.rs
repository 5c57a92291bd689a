//! Reverse-mode automatic differentiation over small dense batches.
//!
//! A [`Tape`] records operations on nodes holding a `rows × width` block
//! (one row per sample, row-major) and reads model weights directly out of
//! a flat parameter buffer. [`Tape::backward`] walks the record in reverse
//! and accumulates `∂loss/∂θ` into a gradient buffer aligned with that
//! parameter buffer. A single sample is a one-row node; scalars are 1×1.

use super::params::ParamSlice;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Constant,
    Param {
        offset: usize,
    },
    Linear {
        w: usize,
        rows: usize,
        cols: usize,
        b: Option<usize>,
        x: Var,
    },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    OneMinus(Var),
    Exp(Var),
    Square(Var),
    Scale(Var, f64),
    Slice {
        x: Var,
        start: usize,
    },
    LogSoftmax(Var),
    Pick {
        x: Var,
        indices: Vec<usize>,
    },
    Sum(Var),
    RowSum(Var),
    AddN(Vec<Var>),
    Clamp {
        x: Var,
        lo: f64,
        hi: f64,
    },
    Min(Var, Var),
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    rows: usize,
    op: Op,
    needs_grad: bool,
}

impl Node {
    fn width(&self) -> usize {
        self.value.len() / self.rows
    }
}

pub struct Tape<'p> {
    params: &'p [f64],
    nodes: Vec<Node>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p [f64]) -> Self {
        Self {
            params,
            nodes: Vec::with_capacity(128),
        }
    }

    fn push(&mut self, value: Vec<f64>, rows: usize, op: Op, needs_grad: bool) -> Var {
        debug_assert!(rows > 0 && value.len() % rows == 0);
        self.nodes.push(Node {
            value,
            rows,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    /// Number of sample rows held by `v`.
    pub fn rows(&self, v: Var) -> usize {
        self.nodes[v.0].rows
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let val = self.value(v);
        debug_assert_eq!(val.len(), 1);
        val[0]
    }

    /// A one-row leaf that receives no gradient (inputs, stored hidden
    /// states, targets).
    pub fn constant(&mut self, value: Vec<f64>) -> Var {
        self.push(value, 1, Op::Constant, false)
    }

    /// A `rows`-row constant; `value.len()` must be a multiple of `rows`.
    pub fn constant_rows(&mut self, value: Vec<f64>, rows: usize) -> Var {
        assert!(rows > 0 && value.len() % rows == 0, "constant of {} values in {rows} rows", value.len());
        self.push(value, rows, Op::Constant, false)
    }

    pub fn constant_scalar(&mut self, x: f64) -> Var {
        self.constant(vec![x])
    }

    /// A parameter block exposed directly as a one-row node.
    pub fn param(&mut self, slice: &ParamSlice) -> Var {
        let value = self.params[slice.range()].to_vec();
        self.push(value, 1, Op::Param { offset: slice.offset }, true)
    }

    /// `W·x + b` row by row, with `W` of shape `rows × cols`.
    pub fn linear(&mut self, w: &ParamSlice, b: Option<&ParamSlice>, x: Var) -> Var {
        let (rows, cols) = (w.rows, w.cols);
        let xn = &self.nodes[x.0];
        assert_eq!(xn.width(), cols, "linear `{}`: input width", w.name);
        let batch = xn.rows;
        let wv = &self.params[w.range()];
        let mut out = vec![0.0; batch * rows];
        if let Some(b) = b {
            assert_eq!(b.len(), rows, "linear `{}`: bias width", w.name);
            let bv = &self.params[b.range()];
            for o in out.chunks_exact_mut(rows) {
                o.copy_from_slice(bv);
            }
        }
        // weight row outermost so it stays in cache across the batch
        for (r, wrow) in wv.chunks_exact(cols).enumerate() {
            for (k, xrow) in xn.value.chunks_exact(cols).enumerate() {
                out[k * rows + r] += dot(wrow, xrow);
            }
        }
        self.push(
            out,
            batch,
            Op::Linear {
                w: w.offset,
                rows,
                cols,
                b: b.map(|b| b.offset),
                x,
            },
            true,
        )
    }

    fn zip_with(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (na, nb) = (&self.nodes[a.0], &self.nodes[b.0]);
        assert!(
            na.value.len() == nb.value.len() && na.rows == nb.rows,
            "elementwise op on mismatched shapes"
        );
        let out = na.value.iter().zip(&nb.value).map(|(x, y)| f(*x, *y)).collect();
        let (rows, ng) = (na.rows, na.needs_grad || nb.needs_grad);
        self.push(out, rows, op, ng)
    }

    fn map(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let n = &self.nodes[a.0];
        let out = n.value.iter().map(|x| f(*x)).collect();
        let (rows, ng) = (n.rows, n.needs_grad);
        self.push(out, rows, op, ng)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn min(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, f64::min, Op::Min(a, b))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map(a, sigmoid, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, f64::tanh, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.map(a, |x| x.max(0.0), Op::Relu(a))
    }

    pub fn one_minus(&mut self, a: Var) -> Var {
        self.map(a, |x| 1.0 - x, Op::OneMinus(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.map(a, f64::exp, Op::Exp(a))
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.map(a, |x| x * x, Op::Square(a))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.map(a, |x| c * x, Op::Scale(a, c))
    }

    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        self.map(a, |x| x.clamp(lo, hi), Op::Clamp { x: a, lo, hi })
    }

    /// Columns `start..start + len` of every row.
    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Var {
        let n = &self.nodes[a.0];
        let width = n.width();
        assert!(start + len <= width, "slice past row end");
        let mut out = Vec::with_capacity(n.rows * len);
        for row in n.value.chunks_exact(width) {
            out.extend_from_slice(&row[start..start + len]);
        }
        let (rows, ng) = (n.rows, n.needs_grad);
        self.push(out, rows, Op::Slice { x: a, start }, ng)
    }

    /// Shifted log-softmax of every row.
    pub fn log_softmax(&mut self, a: Var) -> Var {
        let n = &self.nodes[a.0];
        let mut out = Vec::with_capacity(n.value.len());
        for row in n.value.chunks_exact(n.width()) {
            out.extend(log_softmax(row));
        }
        let (rows, ng) = (n.rows, n.needs_grad);
        self.push(out, rows, Op::LogSoftmax(a), ng)
    }

    /// Element `index` of a one-row node.
    pub fn pick(&mut self, a: Var, index: usize) -> Var {
        self.pick_rows(a, &[index])
    }

    /// Element `indices[r]` of row `r`, as a column.
    pub fn pick_rows(&mut self, a: Var, indices: &[usize]) -> Var {
        let n = &self.nodes[a.0];
        assert_eq!(indices.len(), n.rows, "one index per row");
        let width = n.width();
        let out = n
            .value
            .chunks_exact(width)
            .zip(indices)
            .map(|(row, &i)| row[i])
            .collect();
        let (rows, ng) = (n.rows, n.needs_grad);
        self.push(
            out,
            rows,
            Op::Pick {
                x: a,
                indices: indices.to_vec(),
            },
            ng,
        )
    }

    /// Sum of every element, as a scalar.
    pub fn sum(&mut self, a: Var) -> Var {
        let out = vec![self.nodes[a.0].value.iter().sum()];
        let ng = self.ng(a);
        self.push(out, 1, Op::Sum(a), ng)
    }

    /// Per-row sums, as a column.
    pub fn row_sum(&mut self, a: Var) -> Var {
        let n = &self.nodes[a.0];
        let out = n.value.chunks_exact(n.width()).map(|r| r.iter().sum()).collect();
        let (rows, ng) = (n.rows, n.needs_grad);
        self.push(out, rows, Op::RowSum(a), ng)
    }

    /// Elementwise sum of equally shaped nodes.
    pub fn add_n(&mut self, terms: &[Var]) -> Var {
        assert!(!terms.is_empty(), "add_n of nothing");
        let first = &self.nodes[terms[0].0];
        let (rows, len) = (first.rows, first.value.len());
        let mut out = vec![0.0; len];
        let mut ng = false;
        for t in terms {
            let n = &self.nodes[t.0];
            assert!(n.value.len() == len && n.rows == rows, "add_n on mismatched shapes");
            out.iter_mut().zip(&n.value).for_each(|(o, x)| *o += x);
            ng |= n.needs_grad;
        }
        self.push(out, rows, Op::AddN(terms.to_vec()), ng)
    }

    /// Row-wise entropy `-Σ p·log p` of a log-probability node.
    pub fn entropy_of_log_probs(&mut self, logp: Var) -> Var {
        let p = self.exp(logp);
        let plogp = self.mul(p, logp);
        let s = self.row_sum(plogp);
        self.scale(s, -1.0)
    }

    /// Accumulates `∂loss/∂θ` into `grads` (aligned with the parameter
    /// buffer the tape reads from).
    pub fn backward(&self, loss: Var, grads: &mut [f64]) {
        self.backward_scaled(loss, 1.0, grads);
    }

    /// As [`Tape::backward`] with the seed gradient `seed` instead of 1.
    pub fn backward_scaled(&self, loss: Var, seed: f64, grads: &mut [f64]) {
        assert_eq!(grads.len(), self.params.len(), "gradient buffer width");
        assert_eq!(self.nodes[loss.0].value.len(), 1, "loss must be scalar");
        let mut adj: Vec<Vec<f64>> = vec![Vec::new(); loss.0 + 1];
        adj[loss.0] = vec![seed];

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.needs_grad || adj[i].is_empty() {
                continue;
            }
            let g = std::mem::take(&mut adj[i]);
            // adjoint buffer of `v`, or None when nothing upstream needs it
            let slot = |adj: &mut Vec<Vec<f64>>, v: Var| -> Option<usize> {
                let n = &self.nodes[v.0];
                if !n.needs_grad {
                    return None;
                }
                if adj[v.0].is_empty() {
                    adj[v.0] = vec![0.0; n.value.len()];
                }
                Some(v.0)
            };
            let each = |adj: &mut Vec<Vec<f64>>, v: Var, f: &dyn Fn(&mut [f64])| {
                if let Some(j) = slot(adj, v) {
                    f(&mut adj[j]);
                }
            };
            match &node.op {
                Op::Constant => {}
                Op::Param { offset } => {
                    for (k, gk) in g.iter().enumerate() {
                        grads[offset + k] += gk;
                    }
                }
                Op::Linear {
                    w,
                    rows,
                    cols,
                    b,
                    x,
                } => {
                    let (rows, cols) = (*rows, *cols);
                    let xv = &self.nodes[x.0].value;
                    if let Some(b) = b {
                        for gr in g.chunks_exact(rows) {
                            grads[*b..*b + rows].iter_mut().zip(gr).for_each(|(d, gk)| *d += gk);
                        }
                    }
                    let dx_slot = slot(&mut adj, *x);
                    let wv = &self.params[*w..*w + rows * cols];
                    let gw = &mut grads[*w..*w + rows * cols];
                    for (r, (gw_row, w_row)) in
                        gw.chunks_exact_mut(cols).zip(wv.chunks_exact(cols)).enumerate()
                    {
                        for (k, xrow) in xv.chunks_exact(cols).enumerate() {
                            let gk = g[k * rows + r];
                            if gk == 0.0 {
                                continue;
                            }
                            axpy(gw_row, gk, xrow);
                            if let Some(j) = dx_slot {
                                axpy(&mut adj[j][k * cols..(k + 1) * cols], gk, w_row);
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    each(&mut adj, *a, &|d| axpy(d, 1.0, &g));
                    each(&mut adj, *b, &|d| axpy(d, 1.0, &g));
                }
                Op::Sub(a, b) => {
                    each(&mut adj, *a, &|d| axpy(d, 1.0, &g));
                    each(&mut adj, *b, &|d| axpy(d, -1.0, &g));
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    each(&mut adj, *a, &|d| zip3(d, &g, vb, |gk, y| gk * y));
                    each(&mut adj, *b, &|d| zip3(d, &g, va, |gk, y| gk * y));
                }
                Op::Min(a, b) => {
                    let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    each(&mut adj, *a, &|d| {
                        for k in 0..d.len() {
                            if va[k] <= vb[k] {
                                d[k] += g[k];
                            }
                        }
                    });
                    each(&mut adj, *b, &|d| {
                        for k in 0..d.len() {
                            if va[k] > vb[k] {
                                d[k] += g[k];
                            }
                        }
                    });
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    each(&mut adj, *a, &|d| zip3(d, &g, y, |gk, y| gk * y * (1.0 - y)));
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    each(&mut adj, *a, &|d| zip3(d, &g, y, |gk, y| gk * (1.0 - y * y)));
                }
                Op::Relu(a) => {
                    let x = &self.nodes[a.0].value;
                    each(&mut adj, *a, &|d| zip3(d, &g, x, |gk, x| if x > 0.0 { gk } else { 0.0 }));
                }
                Op::OneMinus(a) => each(&mut adj, *a, &|d| axpy(d, -1.0, &g)),
                Op::Exp(a) => {
                    let y = &node.value;
                    each(&mut adj, *a, &|d| zip3(d, &g, y, |gk, y| gk * y));
                }
                Op::Square(a) => {
                    let x = &self.nodes[a.0].value;
                    each(&mut adj, *a, &|d| zip3(d, &g, x, |gk, x| 2.0 * gk * x));
                }
                Op::Scale(a, c) => each(&mut adj, *a, &|d| axpy(d, *c, &g)),
                Op::Clamp { x, lo, hi } => {
                    let xv = &self.nodes[x.0].value;
                    each(&mut adj, *x, &|d| {
                        zip3(d, &g, xv, |gk, x| if x > *lo && x < *hi { gk } else { 0.0 })
                    });
                }
                Op::Slice { x, start } => {
                    let (len, width) = (node.width(), self.nodes[x.0].width());
                    each(&mut adj, *x, &|d| {
                        for (drow, grow) in d.chunks_exact_mut(width).zip(g.chunks_exact(len)) {
                            axpy(&mut drow[*start..*start + len], 1.0, grow);
                        }
                    });
                }
                Op::LogSoftmax(a) => {
                    // d/dx_k = g_k - softmax_k · Σ g, per row
                    let width = node.width();
                    let y = &node.value;
                    each(&mut adj, *a, &|d| {
                        for ((drow, grow), yrow) in d
                            .chunks_exact_mut(width)
                            .zip(g.chunks_exact(width))
                            .zip(y.chunks_exact(width))
                        {
                            let gsum: f64 = grow.iter().sum();
                            for k in 0..width {
                                drow[k] += grow[k] - yrow[k].exp() * gsum;
                            }
                        }
                    });
                }
                Op::Pick { x, indices } => {
                    let width = self.nodes[x.0].width();
                    each(&mut adj, *x, &|d| {
                        for (r, &i) in indices.iter().enumerate() {
                            d[r * width + i] += g[r];
                        }
                    });
                }
                Op::Sum(a) => each(&mut adj, *a, &|d| d.iter_mut().for_each(|v| *v += g[0])),
                Op::RowSum(a) => {
                    let width = self.nodes[a.0].width();
                    each(&mut adj, *a, &|d| {
                        for (drow, gr) in d.chunks_exact_mut(width).zip(&g) {
                            drow.iter_mut().for_each(|v| *v += gr);
                        }
                    });
                }
                Op::AddN(terms) => {
                    for t in terms {
                        each(&mut adj, *t, &|d| axpy(d, 1.0, &g));
                    }
                }
            }
        }
    }
}

/// `y += a·x`.
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// `d[k] += f(g[k], v[k])`.
fn zip3(d: &mut [f64], g: &[f64], v: &[f64], f: impl Fn(f64, f64) -> f64) {
    for ((dk, gk), vk) in d.iter_mut().zip(g).zip(v) {
        *dk += f(*gk, *vk);
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `x - max(x) - log Σ exp(x - max(x))`.
pub fn log_softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = x.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    x.iter().map(|v| v - m - lse).collect()
}

/// Dot product over eight independent accumulators so the multiply-adds
/// vectorize.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        let x: &[f64; 8] = x.try_into().expect("chunk of 8");
        let y: &[f64; 8] = y.try_into().expect("chunk of 8");
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let half = [acc[0] + acc[4], acc[1] + acc[5], acc[2] + acc[6], acc[3] + acc[7]];
    (half[0] + half[2]) + (half[1] + half[3]) + tail
}
