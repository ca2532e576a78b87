//! Recurrent cells (simple RNN, LSTM, GRU) with backpropagation through
//! time, plus the classifier head that reads the final hidden state.
//!
//! Cells are generic over sequence length. The flow classifiers feed each
//! record as a single time step carrying the whole feature vector; the
//! multi-step path exists so gradients can be checked on real sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::mlp::{backprop_input, sigmoid, Activation, DenseNetwork, Gradients, Loss};
use crate::rng::{rng_for, Stream};

/// One gate's parameters: `pre = W_x x + W_h h_prev + b`. The same shape
/// doubles as that gate's gradient accumulator.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Gate {
    /// `(hidden, input)`
    pub w_x: Mat,
    /// `(hidden, hidden)`
    pub w_h: Mat,
    pub b: Vec<f64>,
}

impl Gate {
    fn new(input: usize, hidden: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Gate {
        use rand::Rng;
        // Xavier over the concatenated [x, h] fan-in.
        let bound = (6.0 / (input + hidden + hidden) as f64).sqrt();
        let mut draw = |_r: usize, _c: usize| (rng.gen::<f64>() * 2.0 - 1.0) * bound;
        Gate {
            w_x: Mat::from_fn(hidden, input, &mut draw),
            w_h: Mat::from_fn(hidden, hidden, &mut draw),
            b: vec![0.0; hidden],
        }
    }

    fn zeros(input: usize, hidden: usize) -> Gate {
        Gate {
            w_x: Mat::zeros(hidden, input),
            w_h: Mat::zeros(hidden, hidden),
            b: vec![0.0; hidden],
        }
    }

    fn pre(&self, x: &[f64], h_prev: &[f64]) -> Vec<f64> {
        let mut pre = self.w_x.matvec(x);
        let rec = self.w_h.matvec(h_prev);
        for ((p, r), b) in pre.iter_mut().zip(&rec).zip(&self.b) {
            *p += r + b;
        }
        pre
    }

    fn param_count(&self) -> usize {
        self.w_x.len() + self.w_h.len() + self.b.len()
    }

    fn accumulate(&mut self, dpre: &[f64], x: &[f64], h_in: &[f64]) {
        self.w_x.add_outer(dpre, x, 1.0);
        self.w_h.add_outer(dpre, h_in, 1.0);
        for (g, d) in self.b.iter_mut().zip(dpre) {
            *g += d;
        }
    }

    fn reset(&mut self) {
        self.w_x.as_mut_slice().fill(0.0);
        self.w_h.as_mut_slice().fill(0.0);
        self.b.fill(0.0);
    }

    fn scale(&mut self, s: f64) {
        for v in self.w_x.as_mut_slice() {
            *v *= s;
        }
        for v in self.w_h.as_mut_slice() {
            *v *= s;
        }
        for v in &mut self.b {
            *v *= s;
        }
    }
}

/// Elman RNN: `h_t = tanh(W_x x_t + W_h h_{t−1} + b)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RnnCell {
    pub gate: Gate,
}

/// LSTM with forget/input/output gates and a tanh candidate:
/// `c_t = f ⊙ c_{t−1} + i ⊙ g`, `h_t = o ⊙ tanh(c_t)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LstmCell {
    pub f: Gate,
    pub i: Gate,
    pub o: Gate,
    pub g: Gate,
}

/// GRU: `h_t = (1 − z) ⊙ h_{t−1} + z ⊙ h̃`, where the candidate `h̃` sees
/// the reset-gated state `r ⊙ h_{t−1}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GruCell {
    pub z: Gate,
    pub r: Gate,
    pub h: Gate,
}

/// Any of the three recurrent cells. A zeroed copy of the same shape serves
/// as the gradient accumulator.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum RecurrentCell {
    Rnn(RnnCell),
    Lstm(LstmCell),
    Gru(GruCell),
}

/// Which cell a [`RecurrentModel`] should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    Rnn,
    Lstm,
    Gru,
}

/// Per-step values cached by a forward pass for backpropagation through
/// time. `hs[0]` (and `cs[0]`) are the zero initial state, so step `t`
/// reads `hs[t]` and writes `hs[t + 1]`.
pub struct CellTrace {
    hs: Vec<Vec<f64>>,
    cs: Vec<Vec<f64>>,
    // Per-step gate activations; which are populated depends on the cell.
    f: Vec<Vec<f64>>,
    i: Vec<Vec<f64>>,
    o: Vec<Vec<f64>>,
    g: Vec<Vec<f64>>,
    tanh_c: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    h_tilde: Vec<Vec<f64>>,
    rh_prev: Vec<Vec<f64>>,
}

impl CellTrace {
    fn new(hidden: usize) -> CellTrace {
        CellTrace {
            hs: vec![vec![0.0; hidden]],
            cs: vec![vec![0.0; hidden]],
            f: Vec::new(),
            i: Vec::new(),
            o: Vec::new(),
            g: Vec::new(),
            tanh_c: Vec::new(),
            z: Vec::new(),
            r: Vec::new(),
            h_tilde: Vec::new(),
            rh_prev: Vec::new(),
        }
    }

    /// Hidden state after the last step.
    pub fn final_hidden(&self) -> &[f64] {
        self.hs.last().expect("trace holds the initial state")
    }
}

impl RecurrentCell {
    pub fn new(kind: CellKind, input: usize, hidden: usize, seed: u64) -> Result<RecurrentCell> {
        if input == 0 || hidden == 0 {
            return Err(Error::param("cell", "input and hidden sizes must be positive"));
        }
        let mut rng = rng_for(seed, Stream::WeightInit);
        Ok(match kind {
            CellKind::Rnn => RecurrentCell::Rnn(RnnCell {
                gate: Gate::new(input, hidden, &mut rng),
            }),
            CellKind::Lstm => RecurrentCell::Lstm(LstmCell {
                f: Gate::new(input, hidden, &mut rng),
                i: Gate::new(input, hidden, &mut rng),
                o: Gate::new(input, hidden, &mut rng),
                g: Gate::new(input, hidden, &mut rng),
            }),
            CellKind::Gru => RecurrentCell::Gru(GruCell {
                z: Gate::new(input, hidden, &mut rng),
                r: Gate::new(input, hidden, &mut rng),
                h: Gate::new(input, hidden, &mut rng),
            }),
        })
    }

    pub fn kind(&self) -> CellKind {
        match self {
            RecurrentCell::Rnn(_) => CellKind::Rnn,
            RecurrentCell::Lstm(_) => CellKind::Lstm,
            RecurrentCell::Gru(_) => CellKind::Gru,
        }
    }

    fn gates(&self) -> Vec<&Gate> {
        match self {
            RecurrentCell::Rnn(c) => vec![&c.gate],
            RecurrentCell::Lstm(c) => vec![&c.f, &c.i, &c.o, &c.g],
            RecurrentCell::Gru(c) => vec![&c.z, &c.r, &c.h],
        }
    }

    fn gates_mut(&mut self) -> Vec<&mut Gate> {
        match self {
            RecurrentCell::Rnn(c) => vec![&mut c.gate],
            RecurrentCell::Lstm(c) => vec![&mut c.f, &mut c.i, &mut c.o, &mut c.g],
            RecurrentCell::Gru(c) => vec![&mut c.z, &mut c.r, &mut c.h],
        }
    }

    pub fn input_size(&self) -> usize {
        self.gates()[0].w_x.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.gates()[0].w_h.cols()
    }

    pub fn weight_count(&self) -> usize {
        self.gates().iter().map(|g| g.param_count()).sum()
    }

    /// A same-shaped cell with all parameters zero, for gradients.
    pub fn zeros_like(&self) -> RecurrentCell {
        let (input, hidden) = (self.input_size(), self.hidden_size());
        let zero = || Gate::zeros(input, hidden);
        match self {
            RecurrentCell::Rnn(_) => RecurrentCell::Rnn(RnnCell { gate: zero() }),
            RecurrentCell::Lstm(_) => RecurrentCell::Lstm(LstmCell {
                f: zero(),
                i: zero(),
                o: zero(),
                g: zero(),
            }),
            RecurrentCell::Gru(_) => RecurrentCell::Gru(GruCell {
                z: zero(),
                r: zero(),
                h: zero(),
            }),
        }
    }

    pub fn reset(&mut self) {
        for g in self.gates_mut() {
            g.reset();
        }
    }

    pub fn scale(&mut self, s: f64) {
        for g in self.gates_mut() {
            g.scale(s);
        }
    }

    /// Parameter block lengths in a fixed order (per gate: w_x, w_h, b).
    pub fn block_sizes(&self) -> Vec<usize> {
        self.gates()
            .iter()
            .flat_map(|g| [g.w_x.len(), g.w_h.len(), g.b.len()])
            .collect()
    }

    /// Mutable views of the parameter blocks in [`Self::block_sizes`] order.
    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for g in self.gates_mut() {
            out.push(g.w_x.as_mut_slice());
            out.push(g.w_h.as_mut_slice());
            out.push(g.b.as_mut_slice());
        }
        out
    }

    /// Immutable views matching [`Self::blocks_mut`].
    pub fn blocks(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for g in self.gates() {
            out.push(g.w_x.as_slice());
            out.push(g.w_h.as_slice());
            out.push(g.b.as_slice());
        }
        out
    }

    /// Runs the cell over a sequence, caching what BPTT needs.
    pub fn forward(&self, steps: &[&[f64]]) -> Result<CellTrace> {
        if steps.is_empty() {
            return Err(Error::empty("recurrent forward needs at least one step"));
        }
        for x in steps {
            if x.len() != self.input_size() {
                return Err(Error::DimensionMismatch {
                    expected: self.input_size(),
                    found: x.len(),
                });
            }
        }
        let mut trace = CellTrace::new(self.hidden_size());
        for &x in steps {
            match self {
                RecurrentCell::Rnn(cell) => {
                    let h_prev = trace.hs.last().expect("initialised").clone();
                    let h: Vec<f64> =
                        cell.gate.pre(x, &h_prev).iter().map(|&p| p.tanh()).collect();
                    trace.hs.push(h);
                }
                RecurrentCell::Lstm(cell) => {
                    let h_prev = trace.hs.last().expect("initialised").clone();
                    let c_prev = trace.cs.last().expect("initialised").clone();
                    let f: Vec<f64> =
                        cell.f.pre(x, &h_prev).iter().map(|&p| sigmoid(p)).collect();
                    let i: Vec<f64> =
                        cell.i.pre(x, &h_prev).iter().map(|&p| sigmoid(p)).collect();
                    let o: Vec<f64> =
                        cell.o.pre(x, &h_prev).iter().map(|&p| sigmoid(p)).collect();
                    let g: Vec<f64> = cell.g.pre(x, &h_prev).iter().map(|&p| p.tanh()).collect();
                    let c: Vec<f64> = (0..f.len())
                        .map(|j| f[j] * c_prev[j] + i[j] * g[j])
                        .collect();
                    let tanh_c: Vec<f64> = c.iter().map(|&v| v.tanh()).collect();
                    let h: Vec<f64> = (0..o.len()).map(|j| o[j] * tanh_c[j]).collect();
                    trace.f.push(f);
                    trace.i.push(i);
                    trace.o.push(o);
                    trace.g.push(g);
                    trace.tanh_c.push(tanh_c);
                    trace.cs.push(c);
                    trace.hs.push(h);
                }
                RecurrentCell::Gru(cell) => {
                    let h_prev = trace.hs.last().expect("initialised").clone();
                    let z: Vec<f64> =
                        cell.z.pre(x, &h_prev).iter().map(|&p| sigmoid(p)).collect();
                    let r: Vec<f64> =
                        cell.r.pre(x, &h_prev).iter().map(|&p| sigmoid(p)).collect();
                    let rh_prev: Vec<f64> =
                        r.iter().zip(&h_prev).map(|(&r, &h)| r * h).collect();
                    let h_tilde: Vec<f64> =
                        cell.h.pre(x, &rh_prev).iter().map(|&p| p.tanh()).collect();
                    let h: Vec<f64> = (0..z.len())
                        .map(|j| (1.0 - z[j]) * h_prev[j] + z[j] * h_tilde[j])
                        .collect();
                    trace.z.push(z);
                    trace.r.push(r);
                    trace.rh_prev.push(rh_prev);
                    trace.h_tilde.push(h_tilde);
                    trace.hs.push(h);
                }
            }
        }
        Ok(trace)
    }

    /// Backpropagation through time. `d_final` is dL/d(final hidden state);
    /// parameter gradients accumulate into `grads` (a zeroed same-shape
    /// cell).
    pub fn backward(
        &self,
        steps: &[&[f64]],
        trace: &CellTrace,
        d_final: &[f64],
        grads: &mut RecurrentCell,
    ) {
        let n = self.hidden_size();
        debug_assert_eq!(d_final.len(), n);
        let mut dh = d_final.to_vec();

        match (self, grads) {
            (RecurrentCell::Rnn(cell), RecurrentCell::Rnn(grad)) => {
                for t in (0..steps.len()).rev() {
                    let h_t = &trace.hs[t + 1];
                    let h_prev = &trace.hs[t];
                    let dpre: Vec<f64> = h_t
                        .iter()
                        .zip(&dh)
                        .map(|(&h, &d)| d * (1.0 - h * h))
                        .collect();
                    grad.gate.accumulate(&dpre, steps[t], h_prev);
                    dh = cell.gate.w_h.matvec_transposed(&dpre);
                }
            }
            (RecurrentCell::Lstm(cell), RecurrentCell::Lstm(grad)) => {
                let mut dc = vec![0.0; n];
                for t in (0..steps.len()).rev() {
                    let (f, i, o, g) = (&trace.f[t], &trace.i[t], &trace.o[t], &trace.g[t]);
                    let tanh_c = &trace.tanh_c[t];
                    let c_prev = &trace.cs[t];
                    let h_prev = &trace.hs[t];

                    let mut dpre_f = vec![0.0; n];
                    let mut dpre_i = vec![0.0; n];
                    let mut dpre_o = vec![0.0; n];
                    let mut dpre_g = vec![0.0; n];
                    for j in 0..n {
                        dpre_o[j] = o[j] * (1.0 - o[j]) * tanh_c[j] * dh[j];
                        dc[j] += o[j] * (1.0 - tanh_c[j] * tanh_c[j]) * dh[j];
                        dpre_f[j] = f[j] * (1.0 - f[j]) * c_prev[j] * dc[j];
                        dpre_i[j] = i[j] * (1.0 - i[j]) * g[j] * dc[j];
                        dpre_g[j] = (1.0 - g[j] * g[j]) * i[j] * dc[j];
                    }
                    grad.f.accumulate(&dpre_f, steps[t], h_prev);
                    grad.i.accumulate(&dpre_i, steps[t], h_prev);
                    grad.o.accumulate(&dpre_o, steps[t], h_prev);
                    grad.g.accumulate(&dpre_g, steps[t], h_prev);

                    let mut dh_prev = cell.f.w_h.matvec_transposed(&dpre_f);
                    for (acc, v) in dh_prev.iter_mut().zip(cell.i.w_h.matvec_transposed(&dpre_i)) {
                        *acc += v;
                    }
                    for (acc, v) in dh_prev.iter_mut().zip(cell.o.w_h.matvec_transposed(&dpre_o)) {
                        *acc += v;
                    }
                    for (acc, v) in dh_prev.iter_mut().zip(cell.g.w_h.matvec_transposed(&dpre_g)) {
                        *acc += v;
                    }
                    dh = dh_prev;
                    for j in 0..n {
                        dc[j] *= f[j];
                    }
                }
            }
            (RecurrentCell::Gru(cell), RecurrentCell::Gru(grad)) => {
                for t in (0..steps.len()).rev() {
                    let (z, r) = (&trace.z[t], &trace.r[t]);
                    let h_tilde = &trace.h_tilde[t];
                    let h_prev = &trace.hs[t];
                    let rh_prev = &trace.rh_prev[t];

                    let mut dpre_z = vec![0.0; n];
                    let mut dpre_h = vec![0.0; n];
                    for j in 0..n {
                        dpre_z[j] = z[j] * (1.0 - z[j]) * (h_tilde[j] - h_prev[j]) * dh[j];
                        dpre_h[j] = (1.0 - h_tilde[j] * h_tilde[j]) * z[j] * dh[j];
                    }
                    // The candidate saw r ⊙ h_prev, so its recurrent-input
                    // gradient splits between r and h_prev.
                    let d_rh = cell.h.w_h.matvec_transposed(&dpre_h);
                    let mut dpre_r = vec![0.0; n];
                    for j in 0..n {
                        dpre_r[j] = r[j] * (1.0 - r[j]) * h_prev[j] * d_rh[j];
                    }

                    grad.z.accumulate(&dpre_z, steps[t], h_prev);
                    grad.r.accumulate(&dpre_r, steps[t], h_prev);
                    grad.h.accumulate(&dpre_h, steps[t], rh_prev);

                    let mut dh_prev: Vec<f64> = (0..n)
                        .map(|j| (1.0 - z[j]) * dh[j] + r[j] * d_rh[j])
                        .collect();
                    for (acc, v) in dh_prev.iter_mut().zip(cell.z.w_h.matvec_transposed(&dpre_z)) {
                        *acc += v;
                    }
                    for (acc, v) in dh_prev.iter_mut().zip(cell.r.w_h.matvec_transposed(&dpre_r)) {
                        *acc += v;
                    }
                    dh = dh_prev;
                }
            }
            _ => unreachable!("gradient cell shape always matches the model cell"),
        }
    }
}

/// Recurrent flow classifier: cell → dense (ReLU) → softmax. Classification
/// reads only the hidden state after the last step.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RecurrentModel {
    pub cell: RecurrentCell,
    pub head: DenseNetwork,
}

/// Gradient buffers shaped like a [`RecurrentModel`].
pub struct RecurrentGradients {
    pub cell: RecurrentCell,
    pub head: Gradients,
}

impl RecurrentGradients {
    pub fn zeros_like(model: &RecurrentModel) -> RecurrentGradients {
        RecurrentGradients {
            cell: model.cell.zeros_like(),
            head: Gradients::zeros_like(&model.head),
        }
    }

    pub fn reset(&mut self) {
        self.cell.reset();
        self.head.reset();
    }

    pub fn scale(&mut self, s: f64) {
        self.cell.scale(s);
        self.head.scale(s);
    }
}

impl RecurrentModel {
    pub fn new(
        kind: CellKind,
        input_size: usize,
        hidden_size: usize,
        dense_units: usize,
        n_classes: usize,
        seed: u64,
    ) -> Result<RecurrentModel> {
        let cell = RecurrentCell::new(kind, input_size, hidden_size, seed)?;
        let head = DenseNetwork::new(
            &[hidden_size, dense_units, n_classes],
            Activation::Relu,
            Activation::Softmax,
            // Offset so the head does not reuse the cell's draw sequence.
            seed ^ 0x7265_6375,
        )?;
        Ok(RecurrentModel { cell, head })
    }

    pub fn n_classes(&self) -> usize {
        self.head.output_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.cell.input_size()
    }

    pub fn weight_count(&self) -> usize {
        self.cell.weight_count() + self.head.weight_count()
    }

    /// Class probabilities after consuming the whole sequence.
    pub fn forward(&self, steps: &[&[f64]]) -> Result<Vec<f64>> {
        let trace = self.cell.forward(steps)?;
        self.head.forward(trace.final_hidden())
    }

    pub fn predict_class(&self, steps: &[&[f64]]) -> Result<usize> {
        Ok(crate::linalg::argmax(&self.forward(steps)?))
    }

    /// One training sample: forward, backward through the head, then BPTT.
    pub fn backprop(
        &self,
        steps: &[&[f64]],
        target: &[f64],
        loss: Loss,
        grads: &mut RecurrentGradients,
    ) -> Result<f64> {
        let trace = self.cell.forward(steps)?;
        let (loss_value, d_hidden) =
            backprop_input(&self.head, trace.final_hidden(), target, loss, &mut grads.head)?;
        self.cell.backward(steps, &trace, &d_hidden, &mut grads.cell);
        Ok(loss_value)
    }

    /// Parameter block lengths, cell blocks first, then the head.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = self.cell.block_sizes();
        sizes.extend(
            self.head
                .layers
                .iter()
                .flat_map(|l| [l.weights.len(), l.biases.len()]),
        );
        sizes
    }

    /// Applies one optimizer step over all parameter blocks.
    pub fn apply_step(
        &mut self,
        grads: &RecurrentGradients,
        state: &mut crate::mlp::OptimizerState,
        optimizer: &crate::mlp::Optimizer,
        lr: f64,
    ) {
        state.begin_step();
        let n_cell_blocks = {
            let mut blocks = self.cell.blocks_mut();
            let grad_blocks = grads.cell.blocks();
            debug_assert_eq!(blocks.len(), grad_blocks.len());
            for (b, (params, grad)) in blocks.iter_mut().zip(&grad_blocks).enumerate() {
                state.update_block(b, params, grad, optimizer, lr);
            }
            blocks.len()
        };
        for (l, layer) in self.head.layers.iter_mut().enumerate() {
            state.update_block(
                n_cell_blocks + 2 * l,
                layer.weights.as_mut_slice(),
                grads.head.weights[l].as_slice(),
                optimizer,
                lr,
            );
            state.update_block(
                n_cell_blocks + 2 * l + 1,
                layer.biases.as_mut_slice(),
                &grads.head.biases[l],
                optimizer,
                lr,
            );
        }
    }
}
