//! Small fully connected network trained with Adam, one sample at a time.

use rand::Rng;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone)]
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    fn apply(&mut self, params: &mut [f64], grads: &[f64], lr: f64, t: i32) {
        let c1 = 1.0 - BETA1.powi(t);
        let c2 = 1.0 - BETA2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g;
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g * g;
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + ADAM_EPS);
        }
    }
}

#[derive(Debug, Clone)]
struct Dense {
    inputs: usize,
    outputs: usize,
    /// Row-major `outputs x inputs`.
    w: Vec<f64>,
    b: Vec<f64>,
    adam_w: Adam,
    adam_b: Adam,
}

impl Dense {
    fn new<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        // He-uniform initialization
        let limit = (6.0 / inputs as f64).sqrt();
        Self {
            inputs,
            outputs,
            w: (0..inputs * outputs).map(|_| rng.random_range(-limit..limit)).collect(),
            b: vec![0.0; outputs],
            adam_w: Adam::new(inputs * outputs),
            adam_b: Adam::new(outputs),
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.w[o * self.inputs..(o + 1) * self.inputs];
                self.b[o] + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect()
    }
}

/// ReLU hidden layers and a linear output head.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<Dense>,
    steps: i32,
}

impl Mlp {
    pub fn new<R: Rng>(inputs: usize, hidden: usize, depth: usize, outputs: usize, rng: &mut R) -> Self {
        let mut sizes = vec![inputs];
        sizes.extend(std::iter::repeat_n(hidden, depth));
        sizes.push(outputs);
        Self {
            layers: sizes.windows(2).map(|w| Dense::new(w[0], w[1], rng)).collect(),
            steps: 0,
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let mut a = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            a = layer.forward(&a);
            if i < last {
                a.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        a
    }

    /// Error `q(x)[output] - target` and per-layer `(dW, db)` of
    /// `0.5 (q(x)[output] - target)^2`.
    fn gradients(&self, x: &[f64], output: usize, target: f64) -> (f64, Vec<(Vec<f64>, Vec<f64>)>) {
        let last = self.layers.len() - 1;
        let mut acts = vec![x.to_vec()];
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.forward(acts.last().expect("input present"));
            if i < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        let err = acts[last + 1][output] - target;
        let mut delta = vec![0.0; self.layers[last].outputs];
        delta[output] = err;
        let mut grads = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &acts[i];
            let mut gw = vec![0.0; layer.w.len()];
            let mut back = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let span = o * layer.inputs..(o + 1) * layer.inputs;
                for ((g, x), (acc, w)) in gw[span.clone()].iter_mut().zip(input).zip(back.iter_mut().zip(&layer.w[span])) {
                    *g = d * x;
                    *acc += d * w;
                }
            }
            // ReLU derivative of the layer below
            for (b, a) in back.iter_mut().zip(input) {
                if *a <= 0.0 {
                    *b = 0.0;
                }
            }
            grads.push((gw, delta));
            delta = back;
        }
        grads.reverse();
        (err, grads)
    }

    /// One Adam step on `0.5 (q(x)[output] - target)^2`. Returns the error
    /// before the update.
    pub fn train(&mut self, x: &[f64], output: usize, target: f64, lr: f64) -> f64 {
        let (err, grads) = self.gradients(x, output, target);
        if lr == 0.0 {
            return err;
        }
        self.steps += 1;
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(grads) {
            layer.adam_w.apply(&mut layer.w, &gw, lr, self.steps);
            layer.adam_b.apply(&mut layer.b, &gb, lr, self.steps);
        }
        err
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(&l.b).all(|x| x.is_finite()))
    }
}
