use super::loss::{sigmoid, softmax, softplus};
use super::params::{blk, Gradients, NetworkParameters, LEAKY_SLOPE, LN_EPS};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Action distribution, sums to one.
    pub policy: Vec<f64>,
    /// Non-negative value estimate.
    pub value: f64,
}

/// Intermediate activations of one encoder block.
#[derive(Debug, Clone)]
pub struct BlockTrace {
    pub input: Matrix,
    pub q: Matrix,
    pub k: Matrix,
    pub v: Matrix,
    /// Row-stochastic `n_tokens × n_tokens` weights, one per head.
    pub attention: Vec<Matrix>,
    pub context: Matrix,
    pub norm1_hat: Matrix,
    pub norm1_inv_std: Vec<f64>,
    pub norm1_out: Matrix,
    pub hidden: Matrix,
    pub norm2_hat: Matrix,
    pub norm2_inv_std: Vec<f64>,
    pub output: Matrix,
}

#[derive(Debug, Clone)]
pub struct HeadTrace {
    pub pre1: Vec<f64>,
    pub act1: Vec<f64>,
    pub pre2: Vec<f64>,
    pub act2: Vec<f64>,
    pub out: Vec<f64>,
}

/// Everything the backward pass needs.
#[derive(Debug, Clone)]
pub struct Trace {
    pub features: Matrix,
    pub blocks: Vec<BlockTrace>,
    pub pooled: Vec<f64>,
    pub policy_head: HeadTrace,
    pub value_head: HeadTrace,
    pub logits: Vec<f64>,
    pub prediction: Prediction,
}

impl Trace {
    /// Encoder output, one row per token.
    pub fn tokens(&self) -> &Matrix {
        &self.blocks.last().expect("at least one block").output
    }
}

fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

fn leaky_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

/// `x · W + b` for a single row.
fn dense(x: &[f64], w: &Matrix, b: &Matrix) -> Vec<f64> {
    debug_assert_eq!(x.len(), w.rows);
    let mut out = b.data.clone();
    for (i, &xi) in x.iter().enumerate() {
        for (o, &wv) in out.iter_mut().zip(w.row(i)) {
            *o += xi * wv;
        }
    }
    out
}

/// Per-row layer normalisation; returns (output, normalised input, 1/std).
fn layer_norm(x: &Matrix, gain: &Matrix, bias: &Matrix) -> (Matrix, Matrix, Vec<f64>) {
    let mut hat = Matrix::zeros(x.rows, x.cols);
    let mut out = Matrix::zeros(x.rows, x.cols);
    let mut inv_std = Vec::with_capacity(x.rows);
    let n = x.cols as f64;
    for r in 0..x.rows {
        let row = x.row(r);
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let is = 1.0 / (var + LN_EPS).sqrt();
        inv_std.push(is);
        for c in 0..x.cols {
            let h = (row[c] - mean) * is;
            hat.data[r * x.cols + c] = h;
            out.data[r * x.cols + c] = h * gain.data[c] + bias.data[c];
        }
    }
    (out, hat, inv_std)
}

fn layer_norm_backward(
    dy: &Matrix,
    hat: &Matrix,
    inv_std: &[f64],
    gain: &Matrix,
    dgain: &mut Matrix,
    dbias: &mut Matrix,
) -> Matrix {
    let cols = dy.cols;
    let n = cols as f64;
    let mut dx = Matrix::zeros(dy.rows, cols);
    for r in 0..dy.rows {
        let (g, h) = (dy.row(r), hat.row(r));
        let mut mean_dh = 0.0;
        let mut mean_dh_h = 0.0;
        for c in 0..cols {
            dgain.data[c] += g[c] * h[c];
            dbias.data[c] += g[c];
            let dh = g[c] * gain.data[c];
            mean_dh += dh;
            mean_dh_h += dh * h[c];
        }
        mean_dh /= n;
        mean_dh_h /= n;
        let out = dx.row_mut(r);
        for c in 0..cols {
            let dh = g[c] * gain.data[c];
            out[c] = inv_std[r] * (dh - mean_dh - h[c] * mean_dh_h);
        }
    }
    dx
}

fn head_forward(x: &[f64], p: &NetworkParameters, base: usize) -> HeadTrace {
    let pre1 = dense(x, p.t(base), p.t(base + 1));
    let act1: Vec<f64> = pre1.iter().map(|&v| leaky(v)).collect();
    let pre2 = dense(&act1, p.t(base + 2), p.t(base + 3));
    let act2: Vec<f64> = pre2.iter().map(|&v| leaky(v)).collect();
    let out = dense(&act2, p.t(base + 4), p.t(base + 5));
    HeadTrace {
        pre1,
        act1,
        pre2,
        act2,
        out,
    }
}

/// Accumulates head gradients and returns the gradient w.r.t. its input.
fn head_backward(
    x: &[f64],
    tr: &HeadTrace,
    dout: &[f64],
    p: &NetworkParameters,
    g: &mut Gradients,
    base: usize,
) -> Vec<f64> {
    fn layer(
        input: &[f64],
        dout: &[f64],
        w: &Matrix,
        dw: &mut Matrix,
        db: &mut Matrix,
    ) -> Vec<f64> {
        for (i, &xi) in input.iter().enumerate() {
            for (d, &go) in dw.row_mut(i).iter_mut().zip(dout) {
                *d += xi * go;
            }
        }
        for (d, &go) in db.data.iter_mut().zip(dout) {
            *d += go;
        }
        (0..w.rows)
            .map(|i| w.row(i).iter().zip(dout).map(|(a, b)| a * b).sum())
            .collect()
    }
    let (lo, hi) = g.tensors.split_at_mut(base + 4);
    let (dw3, db3) = hi.split_at_mut(1);
    let mut d2 = layer(&tr.act2, dout, p.t(base + 4), &mut dw3[0], &mut db3[0]);
    d2.iter_mut().zip(&tr.pre2).for_each(|(d, &z)| *d *= leaky_grad(z));
    let (lo2, mid) = lo.split_at_mut(base + 2);
    let (dw2, db2) = mid.split_at_mut(1);
    let mut d1 = layer(&tr.act1, &d2, p.t(base + 2), &mut dw2[0], &mut db2[0]);
    d1.iter_mut().zip(&tr.pre1).for_each(|(d, &z)| *d *= leaky_grad(z));
    let (dw1, db1) = lo2[base..].split_at_mut(1);
    layer(x, &d1, p.t(base), &mut dw1[0], &mut db1[0])
}

impl NetworkParameters {
    fn check_input(&self, features: &Matrix) -> Result<()> {
        let s = &self.shape;
        if (features.rows, features.cols) != (s.n_tokens(), s.n_features) {
            return Err(Error::Shape(format!(
                "features are {}x{}, network expects {}x{}",
                features.rows,
                features.cols,
                s.n_tokens(),
                s.n_features
            )));
        }
        Ok(())
    }

    fn block_forward(&self, b: usize, x: Matrix) -> BlockTrace {
        let s = &self.shape;
        let base = self.shape.block(b);
        let t = |i: usize| self.t(base + i);
        let q = x.affine(t(blk::WQ), t(blk::BQ));
        let k = x.affine(t(blk::WK), t(blk::BK));
        let v = x.affine(t(blk::WV), t(blk::BV));
        let n = x.rows;
        let dh = s.d_head();
        let scale = 1.0 / (dh as f64).sqrt();
        let mut context = Matrix::zeros(n, s.d_model);
        let mut attention = Vec::with_capacity(s.n_heads);
        for h in 0..s.n_heads {
            let cols = h * dh..(h + 1) * dh;
            let mut a = Matrix::zeros(n, n);
            for r in 0..n {
                let qr = &q.row(r)[cols.clone()];
                let row = a.row_mut(r);
                for c in 0..n {
                    let kc = &k.row(c)[cols.clone()];
                    row[c] = scale * qr.iter().zip(kc).map(|(x, y)| x * y).sum::<f64>();
                }
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for e in row.iter_mut() {
                    *e = (*e - max).exp();
                    sum += *e;
                }
                row.iter_mut().for_each(|e| *e /= sum);
            }
            for r in 0..n {
                let (ar, out) = (a.row(r), &mut context.data[r * s.d_model..(r + 1) * s.d_model]);
                for c in 0..n {
                    let w = ar[c];
                    for (o, &vv) in out[cols.clone()].iter_mut().zip(&v.row(c)[cols.clone()]) {
                        *o += w * vv;
                    }
                }
            }
            attention.push(a);
        }
        let mut r1 = context.affine(t(blk::WO), t(blk::BO));
        r1.add_assign(&x);
        let (norm1_out, norm1_hat, norm1_inv_std) = layer_norm(&r1, t(blk::LN1_G), t(blk::LN1_B));
        let mut hidden = norm1_out.affine(t(blk::FF1_W), t(blk::FF1_B));
        hidden.data.iter_mut().for_each(|h| *h = h.max(0.0));
        let mut r2 = hidden.affine(t(blk::FF2_W), t(blk::FF2_B));
        r2.add_assign(&norm1_out);
        let (output, norm2_hat, norm2_inv_std) = layer_norm(&r2, t(blk::LN2_G), t(blk::LN2_B));
        BlockTrace {
            input: x,
            q,
            k,
            v,
            attention,
            context,
            norm1_hat,
            norm1_inv_std,
            norm1_out,
            hidden,
            norm2_hat,
            norm2_inv_std,
            output,
        }
    }

    /// Forward pass keeping every intermediate.
    pub fn forward_trace(&self, features: &Matrix) -> Result<Trace> {
        self.check_input(features)?;
        let mut x = features.affine(self.t(0), self.t(1));
        x.add_assign(&self.positional);
        let mut blocks = Vec::with_capacity(self.shape.n_blocks);
        for b in 0..self.shape.n_blocks {
            let tr = self.block_forward(b, x);
            x = tr.output.clone();
            blocks.push(tr);
        }
        let pooled = x.mean_rows();
        let policy_head = head_forward(&pooled, self, self.shape.policy_head());
        let value_head = head_forward(&pooled, self, self.shape.value_head());
        let logits = policy_head.out.clone();
        let prediction = Prediction {
            policy: softmax(&logits),
            value: softplus(value_head.out[0]),
        };
        Ok(Trace {
            features: features.clone(),
            blocks,
            pooled,
            policy_head,
            value_head,
            logits,
            prediction,
        })
    }

    pub fn predict(&self, features: &Matrix) -> Result<Prediction> {
        Ok(self.forward_trace(features)?.prediction)
    }
}

/// Back-propagates `∂l/∂logits` and `∂l/∂v` through the whole network,
/// accumulating into `grads`.
pub fn backward(params: &NetworkParameters, trace: &Trace, dlogits: &[f64], dvalue: f64, grads: &mut Gradients) {
    let s = &params.shape;
    let du = dvalue * sigmoid(trace.value_head.out[0]);
    let mut dpooled = head_backward(&trace.pooled, &trace.policy_head, dlogits, params, grads, s.policy_head());
    let dv = head_backward(&trace.pooled, &trace.value_head, &[du], params, grads, s.value_head());
    dpooled.iter_mut().zip(&dv).for_each(|(a, b)| *a += b);

    let n = s.n_tokens();
    let mut dx = Matrix::zeros(n, s.d_model);
    for r in 0..n {
        for (d, &g) in dx.row_mut(r).iter_mut().zip(&dpooled) {
            *d = g / n as f64;
        }
    }
    for b in (0..s.n_blocks).rev() {
        dx = block_backward(params, b, &trace.blocks[b], &dx, grads);
    }
    trace.features.tmatmul_acc(&dx, &mut grads.tensors[0]);
    dx.col_sum_acc(&mut grads.tensors[1]);
}

fn block_backward(p: &NetworkParameters, b: usize, tr: &BlockTrace, dout: &Matrix, grads: &mut Gradients) -> Matrix {
    let s = &p.shape;
    let base = s.block(b);
    let t = |i: usize| p.t(base + i);
    let g = &mut grads.tensors[base..base + super::params::BLOCK_TENSORS];

    // second normalisation and feed-forward
    let (lo, hi) = g.split_at_mut(blk::LN2_B);
    let dr2 = layer_norm_backward(dout, &tr.norm2_hat, &tr.norm2_inv_std, t(blk::LN2_G), &mut lo[blk::LN2_G], &mut hi[0]);
    tr.hidden.tmatmul_acc(&dr2, &mut g[blk::FF2_W]);
    dr2.col_sum_acc(&mut g[blk::FF2_B]);
    let mut dhidden = dr2.matmul_t(t(blk::FF2_W));
    for (d, &h) in dhidden.data.iter_mut().zip(&tr.hidden.data) {
        if h <= 0.0 {
            *d = 0.0;
        }
    }
    tr.norm1_out.tmatmul_acc(&dhidden, &mut g[blk::FF1_W]);
    dhidden.col_sum_acc(&mut g[blk::FF1_B]);
    let mut dnorm1 = dhidden.matmul_t(t(blk::FF1_W));
    dnorm1.add_assign(&dr2);

    // first normalisation and attention
    let (lo, hi) = g.split_at_mut(blk::LN1_B);
    let dr1 = layer_norm_backward(&dnorm1, &tr.norm1_hat, &tr.norm1_inv_std, t(blk::LN1_G), &mut lo[blk::LN1_G], &mut hi[0]);
    tr.context.tmatmul_acc(&dr1, &mut g[blk::WO]);
    dr1.col_sum_acc(&mut g[blk::BO]);
    let dcontext = dr1.matmul_t(t(blk::WO));

    let n = tr.input.rows;
    let dh = s.d_head();
    let scale = 1.0 / (dh as f64).sqrt();
    let mut dq = Matrix::zeros(n, s.d_model);
    let mut dk = Matrix::zeros(n, s.d_model);
    let mut dv = Matrix::zeros(n, s.d_model);
    let mut dscore = vec![0.0; n];
    for h in 0..s.n_heads {
        let cols = h * dh..(h + 1) * dh;
        let a = &tr.attention[h];
        for r in 0..n {
            let dc = &dcontext.row(r)[cols.clone()];
            let ar = a.row(r);
            // dA[r][c] = dC_r · V_c ; dV_c += A[r][c] dC_r
            let mut dot = 0.0;
            for c in 0..n {
                let vc = &tr.v.row(c)[cols.clone()];
                let da: f64 = dc.iter().zip(vc).map(|(x, y)| x * y).sum();
                dscore[c] = da;
                dot += da * ar[c];
                let w = ar[c];
                for (o, &x) in dv.row_mut(c)[cols.clone()].iter_mut().zip(dc) {
                    *o += w * x;
                }
            }
            for c in 0..n {
                let ds = ar[c] * (dscore[c] - dot) * scale;
                if ds == 0.0 {
                    continue;
                }
                let kc = &tr.k.row(c)[cols.clone()];
                for (o, &x) in dq.row_mut(r)[cols.clone()].iter_mut().zip(kc) {
                    *o += ds * x;
                }
                let qr = &tr.q.row(r)[cols.clone()];
                for (o, &x) in dk.row_mut(c)[cols.clone()].iter_mut().zip(qr) {
                    *o += ds * x;
                }
            }
        }
    }
    let mut dx = dr1;
    for (dm, w, bias) in [(&dq, blk::WQ, blk::BQ), (&dk, blk::WK, blk::BK), (&dv, blk::WV, blk::BV)] {
        tr.input.tmatmul_acc(dm, &mut g[w]);
        dm.col_sum_acc(&mut g[bias]);
        dx.add_assign(&dm.matmul_t(t(w)));
    }
    dx
}
