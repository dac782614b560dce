//! Fixed-width tanh multilayer perceptron with exact input derivatives and
//! parameter gradients.
//!
//! Each point is pushed forward as a small jet: the activation value together
//! with its first derivatives along `t` and `x` and the second derivative
//! along `x`. Parameter gradients of any loss built from those jets come from
//! a reverse sweep over the jet-augmented forward pass.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::par::{map_chunks, Execution, CHUNK};

/// Topology of a tanh network: `input_dim -> hidden_width x hidden_layers -> output_dim`,
/// identity on the output layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
}

impl MlpSpec {
    pub fn new(
        input_dim: usize,
        output_dim: usize,
        hidden_layers: usize,
        hidden_width: usize,
    ) -> Result<Self> {
        let spec = Self {
            input_dim,
            output_dim,
            hidden_layers,
            hidden_width,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.input_dim, 1 | 2) {
            return domain(format!("input_dim must be 1 or 2, got {}", self.input_dim));
        }
        if !matches!(self.output_dim, 1 | 3) {
            return domain(format!("output_dim must be 1 or 3, got {}", self.output_dim));
        }
        if self.hidden_layers == 0 || self.hidden_width == 0 {
            return domain("network needs at least one hidden layer of width >= 1");
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every affine layer, output layer last.
    pub fn layers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.hidden_layers).map(move |l| {
            let fan_in = if l == 0 {
                self.input_dim
            } else {
                self.hidden_width
            };
            let fan_out = if l == self.hidden_layers {
                self.output_dim
            } else {
                self.hidden_width
            };
            (fan_in, fan_out)
        })
    }

    pub fn param_count(&self) -> usize {
        self.layers().map(|(i, o)| i * o + o).sum()
    }

    /// Start of each layer's weight block in the flat parameter vector.
    fn offsets(&self) -> Vec<usize> {
        self.layers()
            .scan(0, |acc, (i, o)| {
                let start = *acc;
                *acc += i * o + o;
                Some(start)
            })
            .collect()
    }
}

/// Flat trainable parameters. Per layer: weight matrix row-major
/// (`fan_out` rows of `fan_in`), then the bias vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn zeros(spec: &MlpSpec) -> Self {
        Self(vec![0.0; spec.param_count()])
    }

    pub fn from_vec(spec: &MlpSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.param_count() {
            return domain(format!(
                "parameter vector has length {}, topology needs {}",
                values.len(),
                spec.param_count()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("parameter vector contains non-finite entries");
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// FNV-1a over the IEEE bit patterns.
    pub fn fingerprint(&self) -> u64 {
        self.0
            .iter()
            .flat_map(|v| v.to_bits().to_le_bytes())
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
                (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
            })
    }

    /// Mutable views of the weight matrix and bias of layer `layer`.
    pub fn layer_mut(&mut self, spec: &MlpSpec, layer: usize) -> (&mut [f64], &mut [f64]) {
        let (fan_in, fan_out) = spec.layers().nth(layer).expect("layer index in range");
        let start = spec.offsets()[layer];
        let block = &mut self.0[start..start + fan_in * fan_out + fan_out];
        block.split_at_mut(fan_in * fan_out)
    }
}

/// Glorot-uniform weights, zero biases.
///
/// The stream is ChaCha8 seeded with `seed`; weight `k` of a layer is
/// `(2u - 1) L` with `u` the next `f64` in `[0, 1)` and
/// `L = sqrt(6 / (fan_in + fan_out))`. Layers are filled in order.
pub fn init_glorot(spec: &MlpSpec, seed: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(spec.param_count());
    for (fan_in, fan_out) in spec.layers() {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for _ in 0..fan_in * fan_out {
            let u: f64 = rng.gen();
            values.push((2.0 * u - 1.0) * limit);
        }
        values.extend(std::iter::repeat_n(0.0, fan_out));
    }
    ParamVector(values)
}

/// Which input derivatives to propagate. `dt` is along input 0, `dx` along
/// input 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Want {
    pub dt: bool,
    pub dx: bool,
    pub dxx: bool,
}

impl Want {
    pub const VALUE: Want = Want {
        dt: false,
        dx: false,
        dxx: false,
    };
    pub const DT: Want = Want {
        dt: true,
        dx: false,
        dxx: false,
    };
    pub const ALL: Want = Want {
        dt: true,
        dx: true,
        dxx: true,
    };
}

/// Network output and requested input derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalJet {
    pub value: Vec<f64>,
    pub dt: Vec<f64>,
    pub dx: Option<Vec<f64>>,
    pub dxx: Option<Vec<f64>>,
}

/// Sensitivities of a loss to each jet slot at one point. Slots the loss
/// does not depend on stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct JetAdjoint {
    pub value: Vec<f64>,
    pub dt: Vec<f64>,
    pub dx: Vec<f64>,
    pub dxx: Vec<f64>,
}

impl JetAdjoint {
    pub fn zeros(output_dim: usize) -> Self {
        Self {
            value: vec![0.0; output_dim],
            dt: vec![0.0; output_dim],
            dx: vec![0.0; output_dim],
            dxx: vec![0.0; output_dim],
        }
    }
}

/// A scalar loss assembled from jets at a fixed, flat list of points
/// (`input_dim` coordinates per point).
pub trait JetObjective: Sync {
    fn points(&self) -> &[f64];

    fn want(&self) -> Want;

    /// Loss value and one adjoint per jet.
    fn value_and_adjoints(&self, jets: &[EvalJet]) -> (f64, Vec<JetAdjoint>);

    fn value(&self, jets: &[EvalJet]) -> f64 {
        self.value_and_adjoints(jets).0
    }
}

/// Slot layout of a jet: component 0 is the value, the rest follow.
#[derive(Debug, Clone, Copy)]
struct Slots {
    count: usize,
    dt: Option<usize>,
    dx: Option<usize>,
    dxx: Option<usize>,
}

impl Slots {
    fn new(want: Want, input_dim: usize) -> Self {
        let mut count = 1;
        let mut next = || {
            count += 1;
            Some(count - 1)
        };
        let dt = if want.dt { next() } else { None };
        // dxx propagation needs the first x-derivative.
        let dx = if input_dim == 2 && (want.dx || want.dxx) {
            next()
        } else {
            None
        };
        let dxx = if input_dim == 2 && want.dxx {
            next()
        } else {
            None
        };
        Self { count, dt, dx, dxx }
    }

    /// Jet of the raw input: value, unit seeds along t and x, zero curvature.
    fn seed(&self, input: &[f64]) -> Vec<f64> {
        let n = input.len();
        let mut a = vec![0.0; self.count * n];
        a[..n].copy_from_slice(input);
        if let Some(c) = self.dt {
            a[c * n] = 1.0;
        }
        if let Some(c) = self.dx {
            a[c * n + 1] = 1.0;
        }
        a
    }
}

/// Network bound to a parameter vector, with precomputed layer offsets.
struct Bound<'a> {
    spec: &'a MlpSpec,
    params: &'a [f64],
    offsets: Vec<usize>,
    slots: Slots,
}

impl<'a> Bound<'a> {
    fn new(spec: &'a MlpSpec, params: &'a ParamVector, want: Want) -> Result<Self> {
        spec.validate()?;
        if params.len() != spec.param_count() {
            return domain(format!(
                "parameter vector has length {}, topology needs {}",
                params.len(),
                spec.param_count()
            ));
        }
        if (want.dx || want.dxx) && spec.input_dim < 2 {
            return domain("x-derivatives requested from a network without an x input");
        }
        Ok(Self {
            spec,
            params: params.as_slice(),
            offsets: spec.offsets(),
            slots: Slots::new(want, spec.input_dim),
        })
    }

    fn tape_len(&self) -> usize {
        2 * self.slots.count * self.spec.hidden_width * self.spec.hidden_layers
    }

    fn out_len(&self) -> usize {
        self.slots.count * self.spec.output_dim
    }

    /// Affine map applied slot-wise; the bias enters the value slot only.
    fn affine(&self, layer: usize, input: &[f64], out: &mut [f64]) {
        let (fan_in, fan_out) = self.dims(layer);
        let w = &self.params[self.offsets[layer]..][..fan_in * fan_out];
        let b = &self.params[self.offsets[layer] + fan_in * fan_out..][..fan_out];
        for c in 0..self.slots.count {
            let a = &input[c * fan_in..(c + 1) * fan_in];
            for o in 0..fan_out {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                let mut acc = if c == 0 { b[o] } else { 0.0 };
                for (wi, ai) in row.iter().zip(a) {
                    acc += wi * ai;
                }
                out[c * fan_out + o] = acc;
            }
        }
    }

    fn dims(&self, layer: usize) -> (usize, usize) {
        let s = self.spec;
        let fan_in = if layer == 0 { s.input_dim } else { s.hidden_width };
        let fan_out = if layer == s.hidden_layers {
            s.output_dim
        } else {
            s.hidden_width
        };
        (fan_in, fan_out)
    }

    /// Forward pass. `tape` receives `(z, h)` jets of every hidden layer;
    /// `out` receives the output jet.
    fn forward(&self, input: &[f64], tape: &mut [f64], out: &mut [f64]) {
        let width = self.spec.hidden_width;
        let block = self.slots.count * width;
        let seed = self.slots.seed(input);
        for l in 0..self.spec.hidden_layers {
            let (done, rest) = tape.split_at_mut(2 * block * l);
            let prev: &[f64] = if l == 0 { &seed } else { &done[done.len() - block..] };
            let (z, h) = rest[..2 * block].split_at_mut(block);
            self.affine(l, prev, z);
            self.activate(z, h);
        }
        self.affine(self.spec.hidden_layers, &tape[tape.len() - block..], out);
    }

    /// Jet of `tanh` applied to the jet `z`.
    fn activate(&self, z: &[f64], h: &mut [f64]) {
        let w = self.spec.hidden_width;
        let Slots { dt, dx, dxx, .. } = self.slots;
        for i in 0..w {
            let t = z[i].tanh();
            let s = 1.0 - t * t;
            h[i] = t;
            if let Some(c) = dt {
                h[c * w + i] = s * z[c * w + i];
            }
            if let Some(c) = dx {
                h[c * w + i] = s * z[c * w + i];
            }
            if let Some(c) = dxx {
                let zx = z[dx.unwrap() * w + i];
                let s1 = -2.0 * t * s;
                h[c * w + i] = s * z[c * w + i] + s1 * zx * zx;
            }
        }
    }

    /// Reverse sweep: accumulates `d loss / d params` into `grad` given the
    /// adjoint of the output jet.
    fn backward(&self, input: &[f64], tape: &[f64], out_adj: &[f64], grad: &mut [f64]) {
        let width = self.spec.hidden_width;
        let k = self.slots.count;
        let block = k * width;
        let seed = self.slots.seed(input);
        let mut adj = out_adj.to_vec();
        let mut below = vec![0.0; block];
        for layer in (0..=self.spec.hidden_layers).rev() {
            let (fan_in, fan_out) = self.dims(layer);
            let a: &[f64] = if layer == 0 {
                &seed
            } else {
                &tape[2 * block * (layer - 1) + block..][..block]
            };
            let off = self.offsets[layer];
            let w = &self.params[off..off + fan_in * fan_out];
            {
                let (gw, gb) = grad[off..off + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
                for o in 0..fan_out {
                    gb[o] += adj[o];
                    let grow = &mut gw[o * fan_in..(o + 1) * fan_in];
                    for c in 0..k {
                        let g = adj[c * fan_out + o];
                        if g != 0.0 {
                            for (gi, ai) in grow.iter_mut().zip(&a[c * fan_in..(c + 1) * fan_in]) {
                                *gi += g * ai;
                            }
                        }
                    }
                }
            }
            if layer == 0 {
                break;
            }
            // Adjoint of the layer input h_{layer-1}.
            below.iter_mut().for_each(|v| *v = 0.0);
            for c in 0..k {
                for o in 0..fan_out {
                    let g = adj[c * fan_out + o];
                    if g != 0.0 {
                        let row = &w[o * fan_in..(o + 1) * fan_in];
                        for (bi, wi) in below[c * fan_in..(c + 1) * fan_in].iter_mut().zip(row) {
                            *bi += g * wi;
                        }
                    }
                }
            }
            // Through tanh of hidden layer (layer - 1).
            let z = &tape[2 * block * (layer - 1)..][..block];
            adj.resize(block, 0.0);
            self.activate_adjoint(z, &below, &mut adj);
        }
    }

    /// Maps the adjoint of `h = tanh-jet(z)` to the adjoint of `z`.
    fn activate_adjoint(&self, z: &[f64], h_adj: &[f64], z_adj: &mut [f64]) {
        let w = self.spec.hidden_width;
        let Slots { dt, dx, dxx, .. } = self.slots;
        for i in 0..w {
            let t = z[i].tanh();
            let s = 1.0 - t * t;
            let s1 = -2.0 * t * s;
            let mut g0 = h_adj[i] * s;
            if let Some(c) = dt {
                g0 += h_adj[c * w + i] * s1 * z[c * w + i];
                z_adj[c * w + i] = h_adj[c * w + i] * s;
            }
            if let Some(c) = dx {
                g0 += h_adj[c * w + i] * s1 * z[c * w + i];
                z_adj[c * w + i] = h_adj[c * w + i] * s;
            }
            if let Some(c) = dxx {
                let cx = dx.unwrap();
                let zx = z[cx * w + i];
                let s2 = -2.0 * s * s + 4.0 * t * t * s;
                let hb = h_adj[c * w + i];
                g0 += hb * (s1 * z[c * w + i] + s2 * zx * zx);
                z_adj[cx * w + i] += hb * 2.0 * s1 * zx;
                z_adj[c * w + i] = hb * s;
            }
            z_adj[i] = g0;
        }
    }

    fn jet_from(&self, out: &[f64], want: Want) -> EvalJet {
        let m = self.spec.output_dim;
        let slot = |c: Option<usize>| c.map(|c| out[c * m..(c + 1) * m].to_vec());
        EvalJet {
            value: out[..m].to_vec(),
            dt: slot(self.slots.dt).unwrap_or_else(|| vec![0.0; m]),
            dx: if want.dx { slot(self.slots.dx) } else { None },
            dxx: slot(self.slots.dxx),
        }
    }

    fn adjoint_into(&self, adj: &JetAdjoint, out: &mut [f64]) {
        let m = self.spec.output_dim;
        out[..m].copy_from_slice(&adj.value);
        for (slot, src) in [
            (self.slots.dt, &adj.dt),
            (self.slots.dx, &adj.dx),
            (self.slots.dxx, &adj.dxx),
        ] {
            if let Some(c) = slot {
                out[c * m..(c + 1) * m].copy_from_slice(src);
            }
        }
    }

    fn check_points(&self, points: &[f64]) -> Result<usize> {
        let d = self.spec.input_dim;
        if !points.len().is_multiple_of(d) {
            return domain(format!(
                "flat point list of length {} is not a multiple of input_dim {d}",
                points.len()
            ));
        }
        Ok(points.len() / d)
    }
}

/// Value and requested input derivatives of the network at one point.
pub fn evaluate(spec: &MlpSpec, params: &ParamVector, input: &[f64], want: Want) -> Result<EvalJet> {
    let net = Bound::new(spec, params, want)?;
    if input.len() != spec.input_dim {
        return domain(format!(
            "input has length {}, network expects {}",
            input.len(),
            spec.input_dim
        ));
    }
    let mut tape = vec![0.0; net.tape_len()];
    let mut out = vec![0.0; net.out_len()];
    net.forward(input, &mut tape, &mut out);
    Ok(net.jet_from(&out, want))
}

/// Jets at every point of a flat point list.
pub fn evaluate_batch(
    spec: &MlpSpec,
    params: &ParamVector,
    points: &[f64],
    want: Want,
    exec: Execution,
) -> Result<Vec<EvalJet>> {
    let net = Bound::new(spec, params, want)?;
    net.check_points(points)?;
    let d = spec.input_dim;
    let chunks = map_chunks(points, CHUNK * d, exec, |_, chunk| {
        let mut tape = vec![0.0; net.tape_len()];
        let mut out = vec![0.0; net.out_len()];
        chunk
            .chunks(d)
            .map(|p| {
                net.forward(p, &mut tape, &mut out);
                net.jet_from(&out, want)
            })
            .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Loss value only.
pub fn loss_value(
    spec: &MlpSpec,
    params: &ParamVector,
    objective: &dyn JetObjective,
    exec: Execution,
) -> Result<f64> {
    let jets = evaluate_batch(spec, params, objective.points(), objective.want(), exec)?;
    let loss = objective.value(&jets);
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    Ok(loss)
}

/// Loss value and its exact gradient with respect to the parameters.
///
/// Per-chunk partial gradients are summed in chunk order, so the result is
/// independent of thread count.
pub fn loss_gradient(
    spec: &MlpSpec,
    params: &ParamVector,
    objective: &dyn JetObjective,
    exec: Execution,
) -> Result<(f64, Vec<f64>)> {
    let want = objective.want();
    let net = Bound::new(spec, params, want)?;
    let points = objective.points();
    let n = net.check_points(points)?;
    let d = spec.input_dim;
    let tape_len = net.tape_len();
    let out_len = net.out_len();

    let forward = map_chunks(points, CHUNK * d, exec, |_, chunk| {
        let count = chunk.len() / d;
        let mut tapes = vec![0.0; count * tape_len];
        let mut out = vec![0.0; out_len];
        let jets = chunk
            .chunks(d)
            .zip(tapes.chunks_mut(tape_len))
            .map(|(p, tape)| {
                net.forward(p, tape, &mut out);
                net.jet_from(&out, want)
            })
            .collect::<Vec<_>>();
        (jets, tapes)
    });
    let mut jets = Vec::with_capacity(n);
    let mut tapes = Vec::with_capacity(forward.len());
    for (j, t) in forward {
        jets.extend(j);
        tapes.push(t);
    }

    let (loss, adjoints) = objective.value_and_adjoints(&jets);
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    if adjoints.len() != n {
        return domain(format!("objective returned {} adjoints for {n} points", adjoints.len()));
    }

    let chunk_ids: Vec<usize> = (0..tapes.len()).collect();
    let partials = map_chunks(&chunk_ids, 1, exec, |_, ids| {
        let k = ids[0];
        let mut grad = vec![0.0; spec.param_count()];
        let mut out_adj = vec![0.0; out_len];
        let first = k * CHUNK;
        for (j, tape) in tapes[k].chunks(tape_len).enumerate() {
            let idx = first + j;
            net.adjoint_into(&adjoints[idx], &mut out_adj);
            net.backward(&points[idx * d..(idx + 1) * d], tape, &out_adj, &mut grad);
        }
        grad
    });
    let mut grad = vec![0.0; spec.param_count()];
    for part in partials {
        for (g, p) in grad.iter_mut().zip(part) {
            *g += p;
        }
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    Ok((loss, grad))
}

/// Worst relative error between `g . d` and the central difference
/// `(L(p + h d) - L(p - h d)) / 2h` over `directions` random unit vectors.
pub fn grad_check_fn<F>(params: &[f64], eval: F, directions: usize, h: f64, seed: u64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    if h <= 0.0 || directions == 0 {
        return domain("grad_check needs h > 0 and at least one direction");
    }
    let (_, grad) = eval(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let mut dir: Vec<f64> = (0..params.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        dir.iter_mut().for_each(|v| *v /= norm);
        let shifted = |sign: f64| -> Vec<f64> {
            params.iter().zip(&dir).map(|(p, v)| p + sign * h * v).collect()
        };
        let (plus, _) = eval(&shifted(1.0))?;
        let (minus, _) = eval(&shifted(-1.0))?;
        let numeric = (plus - minus) / (2.0 * h);
        let analytic: f64 = grad.iter().zip(&dir).map(|(g, v)| g * v).sum();
        let scale = analytic.abs().max(numeric.abs());
        if scale > 0.0 {
            worst = worst.max((analytic - numeric).abs() / scale);
        }
    }
    Ok(worst)
}

/// [`grad_check_fn`] applied to [`loss_gradient`] of a jet objective.
pub fn grad_check(
    spec: &MlpSpec,
    params: &ParamVector,
    objective: &dyn JetObjective,
    directions: usize,
    h: f64,
) -> Result<f64> {
    grad_check_fn(
        params.as_slice(),
        |p| {
            let p = ParamVector(p.to_vec());
            loss_gradient(spec, &p, objective, Execution::Sequential)
        },
        directions,
        h,
        0x6772_6164,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub spec: MlpSpec,
    pub seed: u64,
    pub iteration: usize,
    pub len: usize,
}

/// Writes a one-line JSON header, a newline, then `len` little-endian `f64`s.
pub fn write_checkpoint<W: Write>(
    mut w: W,
    spec: &MlpSpec,
    seed: u64,
    iteration: usize,
    params: &ParamVector,
) -> Result<()> {
    let header = CheckpointHeader {
        spec: *spec,
        seed,
        iteration,
        len: params.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for v in params.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(CheckpointHeader, ParamVector)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let split = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| Error::Domain("checkpoint header is not newline-terminated".into()))?;
    let header: CheckpointHeader = serde_json::from_slice(&bytes[..split])?;
    header.spec.validate()?;
    let body = &bytes[split + 1..];
    if body.len() != header.len * 8 {
        return domain(format!(
            "checkpoint body holds {} bytes, header promises {} values",
            body.len(),
            header.len
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let params = ParamVector::from_vec(&header.spec, values)?;
    Ok((header, params))
}
