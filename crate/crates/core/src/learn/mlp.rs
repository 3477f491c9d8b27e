use std::fmt::{self, Debug, Display, Write as _};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::EngineError;
use crate::rng::rng_from_seed;

/// Floating-point type the network computes in.
pub trait Scalar: Float + FromPrimitive + Debug + Display + FromStr + Default + Send + Sync + 'static {
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    /// max(0, tanh(x)); outputs lie in [0, 1).
    RectifiedTanh,
    Softmax,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::RectifiedTanh => "rtanh",
            Activation::Softmax => "softmax",
        }
    }

    fn apply<T: Scalar>(self, z: &[T], out: &mut [T]) {
        match self {
            Activation::Identity => out.copy_from_slice(z),
            Activation::Relu => z.iter().zip(out.iter_mut()).for_each(|(&z, o)| *o = z.max(T::zero())),
            Activation::RectifiedTanh => {
                // tanh rounds to exactly 1 for large inputs; keep the bound strict.
                let top = T::one() - T::epsilon();
                z.iter().zip(out.iter_mut()).for_each(|(&z, o)| *o = z.tanh().max(T::zero()).min(top))
            }
            Activation::Softmax => {
                let m = z.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
                let mut sum = T::zero();
                for (o, &z) in out.iter_mut().zip(z) {
                    *o = (z - m).exp();
                    sum = sum + *o;
                }
                out.iter_mut().for_each(|o| *o = *o / sum);
            }
        }
    }

    /// Gradient with respect to the pre-activation, given the gradient with
    /// respect to the output. Overwrites `g`.
    fn backward<T: Scalar>(self, z: &[T], out: &[T], g: &mut [T]) {
        match self {
            Activation::Identity => {}
            Activation::Relu => g.iter_mut().zip(z).for_each(|(g, &z)| {
                if z <= T::zero() {
                    *g = T::zero()
                }
            }),
            Activation::RectifiedTanh => g.iter_mut().zip(z.iter().zip(out)).for_each(|(g, (&z, &o))| {
                *g = if z > T::zero() { *g * (T::one() - o * o) } else { T::zero() }
            }),
            Activation::Softmax => {
                let dot = g.iter().zip(out).fold(T::zero(), |a, (&g, &o)| a + g * o);
                g.iter_mut().zip(out).for_each(|(g, &o)| *g = o * (*g - dot));
            }
        }
    }
}

impl FromStr for Activation {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Activation::Identity, Activation::Relu, Activation::RectifiedTanh, Activation::Softmax]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| EngineError::Parse(format!("unknown activation {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loss {
    /// Mean over outputs of the squared difference.
    SquaredError,
    /// 1 − cos(output, target).
    Cosine,
    /// −Σ t ln o; meant for a softmax output.
    CrossEntropy,
}

/// One hidden layer: `inputs → hidden → outputs`.
///
/// Parameters live in one flat vector: hidden weights (row per hidden unit),
/// hidden biases, output weights (row per output), output biases.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T: Scalar> {
    inputs: usize,
    hidden: usize,
    outputs: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    params: Vec<T>,
}

/// Forward-pass intermediates for one example.
#[derive(Clone, Debug, Default)]
pub struct Trace<T> {
    hz: Vec<T>,
    h: Vec<T>,
    oz: Vec<T>,
    pub out: Vec<T>,
}

impl<T: Scalar> Mlp<T> {
    pub fn zeros(inputs: usize, hidden: usize, outputs: usize, hidden_act: Activation, output_act: Activation) -> Self {
        let n = hidden * inputs + hidden + outputs * hidden + outputs;
        Mlp {
            inputs,
            hidden,
            outputs,
            hidden_activation: hidden_act,
            output_activation: output_act,
            params: vec![T::zero(); n],
        }
    }

    /// Weights uniform in ±1/√fan_in, biases zero.
    pub fn init(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        hidden_act: Activation,
        output_act: Activation,
        seed: u64,
    ) -> Self {
        let mut m = Self::zeros(inputs, hidden, outputs, hidden_act, output_act);
        let mut rng = rng_from_seed(seed);
        let (w1, _, w2, _) = m.offsets();
        let a1 = 1.0 / (inputs as f64).sqrt();
        for p in &mut m.params[w1.clone()] {
            *p = T::of(rng.random_range(-a1..a1));
        }
        let a2 = 1.0 / (hidden as f64).sqrt();
        for p in &mut m.params[w2.clone()] {
            *p = T::of(rng.random_range(-a2..a2));
        }
        m
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    fn offsets(&self) -> (std::ops::Range<usize>, std::ops::Range<usize>, std::ops::Range<usize>, std::ops::Range<usize>) {
        let w1 = 0..self.hidden * self.inputs;
        let b1 = w1.end..w1.end + self.hidden;
        let w2 = b1.end..b1.end + self.outputs * self.hidden;
        let b2 = w2.end..w2.end + self.outputs;
        (w1, b1, w2, b2)
    }

    /// Whether parameter `i` is a weight (L1-penalized) rather than a bias.
    fn is_weight(&self, i: usize) -> bool {
        let (w1, _, w2, _) = self.offsets();
        w1.contains(&i) || w2.contains(&i)
    }

    pub fn l1_norm(&self) -> T {
        (0..self.params.len()).filter(|&i| self.is_weight(i)).fold(T::zero(), |a, i| a + self.params[i].abs())
    }

    pub fn set_output_bias(&mut self, value: T) {
        let (_, _, _, b2) = self.offsets();
        self.params[b2].iter_mut().for_each(|b| *b = value);
    }

    pub fn forward_trace(&self, x: &[T], t: &mut Trace<T>) -> Result<(), EngineError> {
        if x.len() != self.inputs {
            return Err(EngineError::Parse(format!("input length {} != {}", x.len(), self.inputs)));
        }
        let (w1, b1, w2, b2) = self.offsets();
        let (w1, b1, w2, b2) = (&self.params[w1], &self.params[b1], &self.params[w2], &self.params[b2]);
        t.hz.clear();
        for j in 0..self.hidden {
            let row = &w1[j * self.inputs..(j + 1) * self.inputs];
            t.hz.push(row.iter().zip(x).fold(b1[j], |a, (&w, &x)| a + w * x));
        }
        t.h.resize(self.hidden, T::zero());
        self.hidden_activation.apply(&t.hz, &mut t.h);
        t.oz.clear();
        for k in 0..self.outputs {
            let row = &w2[k * self.hidden..(k + 1) * self.hidden];
            t.oz.push(row.iter().zip(&t.h).fold(b2[k], |a, (&w, &h)| a + w * h));
        }
        t.out.resize(self.outputs, T::zero());
        self.output_activation.apply(&t.oz, &mut t.out);
        Ok(())
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>, EngineError> {
        let mut t = Trace::default();
        self.forward_trace(x, &mut t)?;
        Ok(t.out)
    }

    pub fn forward_batch<X: AsRef<[T]>>(&self, xs: &[X]) -> Result<Vec<Vec<T>>, EngineError> {
        let mut t = Trace::default();
        xs.iter()
            .map(|x| {
                self.forward_trace(x.as_ref(), &mut t)?;
                Ok(t.out.clone())
            })
            .collect()
    }

    /// Mean data loss over a batch plus `l1 · Σ|w|`, accumulating its
    /// gradient into `grad` (same layout as the parameters).
    pub fn loss_and_grad<X: AsRef<[T]>, Y: AsRef<[T]>>(
        &self,
        batch: &[(X, Y)],
        loss: Loss,
        l1: T,
        grad: &mut [T],
    ) -> Result<T, EngineError> {
        let (w1r, b1r, w2r, b2r) = self.offsets();
        let b = T::of(batch.len() as f64);
        let mut total = T::zero();
        let mut t = Trace::default();
        let mut go = vec![T::zero(); self.outputs];
        let mut gh = vec![T::zero(); self.hidden];
        for (x, y) in batch {
            let (x, y) = (x.as_ref(), y.as_ref());
            if y.len() != self.outputs {
                return Err(EngineError::Parse(format!("target length {} != {}", y.len(), self.outputs)));
            }
            self.forward_trace(x, &mut t)?;
            let special_ce = loss == Loss::CrossEntropy && self.output_activation == Activation::Softmax;
            total = total + data_loss(loss, &t.out, y, &mut go) / b;
            if special_ce {
                go.iter_mut().zip(t.out.iter().zip(y)).for_each(|(g, (&o, &y))| *g = o - y);
            } else {
                self.output_activation.backward(&t.oz, &t.out, &mut go);
            }
            go.iter_mut().for_each(|g| *g = *g / b);
            gh.iter_mut().for_each(|g| *g = T::zero());
            for k in 0..self.outputs {
                let row = w2r.start + k * self.hidden;
                for j in 0..self.hidden {
                    grad[row + j] = grad[row + j] + go[k] * t.h[j];
                    gh[j] = gh[j] + go[k] * self.params[row + j];
                }
                grad[b2r.start + k] = grad[b2r.start + k] + go[k];
            }
            self.hidden_activation.backward(&t.hz, &t.h, &mut gh);
            for j in 0..self.hidden {
                let row = w1r.start + j * self.inputs;
                for i in 0..self.inputs {
                    grad[row + i] = grad[row + i] + gh[j] * x[i];
                }
                grad[b1r.start + j] = grad[b1r.start + j] + gh[j];
            }
        }
        if l1 > T::zero() {
            for r in [w1r, w2r] {
                for i in r {
                    let w = self.params[i];
                    total = total + l1 * w.abs();
                    grad[i] = grad[i] + l1 * w.signum() * T::of((w != T::zero()) as u8 as f64);
                }
            }
        }
        Ok(total)
    }

    /// Mean data loss (no penalty) over a dataset.
    pub fn mean_loss<X: AsRef<[T]>, Y: AsRef<[T]>>(&self, data: &[(X, Y)], loss: Loss) -> Result<T, EngineError> {
        let mut t = Trace::default();
        let mut scratch = vec![T::zero(); self.outputs];
        let mut total = T::zero();
        for (x, y) in data {
            self.forward_trace(x.as_ref(), &mut t)?;
            total = total + data_loss(loss, &t.out, y.as_ref(), &mut scratch);
        }
        Ok(total / T::of(data.len().max(1) as f64))
    }

    /// Plain-text weights: a header of `key value` lines, then the
    /// parameter blocks one row per line. Numbers are written in shortest
    /// round-trip form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mlp {} {} {}", self.inputs, self.hidden, self.outputs);
        let _ = writeln!(s, "activations {} {}", self.hidden_activation.name(), self.output_activation.name());
        let (w1, b1, w2, b2) = self.offsets();
        write_block(&mut s, "w1", &self.params[w1], self.inputs);
        write_block(&mut s, "b1", &self.params[b1], self.hidden);
        write_block(&mut s, "w2", &self.params[w2], self.hidden);
        write_block(&mut s, "b2", &self.params[b2], self.outputs);
        s
    }

    pub fn parse_lines<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<Self, EngineError> {
        let err = |m: &str| EngineError::Parse(m.to_string());
        let head: Vec<&str> = lines.next().ok_or_else(|| err("missing mlp line"))?.split_whitespace().collect();
        if head.len() != 4 || head[0] != "mlp" {
            return Err(err("bad mlp line"));
        }
        let dims: Vec<usize> =
            head[1..].iter().map(|s| s.parse().map_err(|_| err("bad size"))).collect::<Result<_, _>>()?;
        let acts: Vec<&str> = lines.next().ok_or_else(|| err("missing activations"))?.split_whitespace().collect();
        if acts.len() != 3 || acts[0] != "activations" {
            return Err(err("bad activations line"));
        }
        let mut m = Mlp::zeros(dims[0], dims[1], dims[2], acts[1].parse()?, acts[2].parse()?);
        let (w1, b1, w2, b2) = m.offsets();
        for (name, range) in [("w1", w1), ("b1", b1), ("w2", w2), ("b2", b2)] {
            read_block(lines, name, &mut m.params[range])?;
        }
        Ok(m)
    }

    pub fn from_text(s: &str) -> Result<Self, EngineError> {
        Self::parse_lines(&mut s.lines())
    }
}

fn write_block<T: Scalar>(s: &mut String, name: &str, vals: &[T], row: usize) {
    let _ = writeln!(s, "{name} {}", vals.len());
    for chunk in vals.chunks(row.max(1)) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
}

fn read_block<'a, T: Scalar, I: Iterator<Item = &'a str>>(
    lines: &mut I,
    name: &str,
    out: &mut [T],
) -> Result<(), EngineError> {
    let err = |m: String| EngineError::Parse(m);
    let head = lines.next().ok_or_else(|| err(format!("missing block {name}")))?;
    if head != format!("{name} {}", out.len()) {
        return Err(err(format!("expected block {name} of {}, got {head:?}", out.len())));
    }
    let mut i = 0;
    while i < out.len() {
        let line = lines.next().ok_or_else(|| err(format!("block {name} truncated")))?;
        for tok in line.split_whitespace() {
            if i >= out.len() {
                return Err(err(format!("block {name} too long")));
            }
            out[i] = tok.parse().map_err(|_| err(format!("bad number {tok:?}")))?;
            i += 1;
        }
    }
    Ok(())
}

/// Loss of one example; writes dLoss/dOutput into `g`.
fn data_loss<T: Scalar>(loss: Loss, o: &[T], y: &[T], g: &mut [T]) -> T {
    match loss {
        Loss::SquaredError => {
            let k = T::of(o.len() as f64);
            let mut l = T::zero();
            for ((g, &o), &y) in g.iter_mut().zip(o).zip(y) {
                l = l + (o - y) * (o - y) / k;
                *g = T::of(2.0) * (o - y) / k;
            }
            l
        }
        Loss::Cosine => {
            let eps = T::of(1e-12);
            let no = (o.iter().fold(T::zero(), |a, &x| a + x * x) + eps).sqrt();
            let ny = (y.iter().fold(T::zero(), |a, &x| a + x * x) + eps).sqrt();
            let dot = o.iter().zip(y).fold(T::zero(), |a, (&o, &y)| a + o * y);
            let cos = dot / (no * ny);
            for ((g, &o), &y) in g.iter_mut().zip(o).zip(y) {
                *g = -(y / (no * ny) - cos * o / (no * no));
            }
            T::one() - cos
        }
        Loss::CrossEntropy => {
            let tiny = T::of(1e-300).max(T::min_positive_value());
            let mut l = T::zero();
            for ((g, &o), &y) in g.iter_mut().zip(o).zip(y) {
                l = l - y * o.max(tiny).ln();
                *g = -y / o.max(tiny);
            }
            l
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub l1: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub loss: Loss,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l1: 1e-5,
            batch_size: 16,
            epochs: 10,
            seed: 0,
            loss: Loss::SquaredError,
        }
    }
}

/// Adaptive-moment optimizer state.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n: usize) -> Self {
        Adam { m: vec![T::zero(); n], v: vec![T::zero(); n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [T], grad: &[T], cfg: &TrainConfig) {
        self.t += 1;
        let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
        let lr = T::of(cfg.learning_rate);
        let eps = T::of(cfg.epsilon);
        let c1 = T::one() - b1.powi(self.t);
        let c2 = T::one() - b2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * grad[i];
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] = params[i] - lr * mh / (vh.sqrt() + eps);
        }
    }
}

#[derive(Debug)]
pub struct NonFiniteLoss {
    pub epoch: usize,
    pub batch: usize,
}

impl Display for NonFiniteLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "loss became non-finite at epoch {} batch {}", self.epoch, self.batch)
    }
}

/// Minibatch training. Returns the mean data loss after each epoch.
pub fn train<T: Scalar, X: AsRef<[T]>, Y: AsRef<[T]>>(
    mlp: &mut Mlp<T>,
    data: &[(X, Y)],
    cfg: &TrainConfig,
) -> Result<Vec<T>, EngineError> {
    if data.is_empty() {
        return Err(EngineError::Parse("empty training set".into()));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut adam = Adam::new(mlp.params.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grad = vec![T::zero(); mlp.params.len()];
    let mut curve = Vec::with_capacity(cfg.epochs);
    let l1 = T::of(cfg.l1);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for (bi, chunk) in order.chunks(cfg.batch_size.max(1)).enumerate() {
            let batch: Vec<(&[T], &[T])> = chunk.iter().map(|&i| (data[i].0.as_ref(), data[i].1.as_ref())).collect();
            grad.iter_mut().for_each(|g| *g = T::zero());
            let l = mlp.loss_and_grad(&batch, cfg.loss, l1, &mut grad)?;
            if !l.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(EngineError::Parse(NonFiniteLoss { epoch, batch: bi }.to_string()));
            }
            adam.step(&mut mlp.params, &grad, cfg);
        }
        curve.push(mlp.mean_loss(data, cfg.loss)?);
    }
    Ok(curve)
}
