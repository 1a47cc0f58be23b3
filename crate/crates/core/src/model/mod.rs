//! V1/V2 networks: construction, forward passes and persistence.

mod checkpoint;
mod spec;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, load_checkpoint_expecting, save_checkpoint};
pub use spec::{
    Arch, Block, LayerShape, LayerSpec, NetworkSpec, DEFAULT_HIDDEN_FC, DEFAULT_INPUT, DEFAULT_NUM_CLASSES,
    V1_CHANNELS, V1_SPATIAL_ONLY_POOLS, V2_CHANNELS,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::autograd::{Param, Tape, Var};
use crate::error::{Error, Result};
use crate::ops::{self, activation::softmax_row};
use crate::tensor::{Element, Tensor};

/// Anything that maps a clip batch `[B, C, T, H, W]` to class logits.
pub trait Classifier: Sync {
    /// Per-sample input shape `(C, T, H, W)`.
    fn input_shape(&self) -> [usize; 4];

    fn num_classes(&self) -> usize;

    fn logits(&self, batch: &Tensor<f32>) -> Result<Tensor<f32>>;

    fn clip_len(&self) -> usize {
        self.input_shape()[1]
    }

    /// Softmax of the logits, evaluated in double precision.
    fn probabilities(&self, batch: &Tensor<f32>) -> Result<Vec<Vec<f64>>> {
        let logits = self.logits(batch)?;
        if !logits.all_finite() {
            return Err(Error::Numeric("model produced non-finite logits".into()));
        }
        let n = logits.shape()[1];
        Ok(logits
            .data()
            .chunks(n)
            .map(|row| softmax_row(&row.iter().map(|&v| v as f64).collect::<Vec<_>>()))
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    spec: NetworkSpec,
    params: Vec<Param<T>>,
    seed: u64,
}

/// Builds a V1 network with He-normal weights and zero biases.
pub fn build_v1(input_shape: [usize; 4], channel_plan: &[usize], num_classes: usize, seed: u64) -> Result<Model<f32>> {
    Model::new(NetworkSpec::v1(input_shape, channel_plan, num_classes)?, seed)
}

pub fn build_v2(input_shape: [usize; 4], channel_plan: &[usize], num_classes: usize, seed: u64) -> Result<Model<f32>> {
    Model::new(NetworkSpec::v2(input_shape, channel_plan, num_classes)?, seed)
}

impl<T: Element> Model<T> {
    pub fn new(spec: NetworkSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = spec
            .param_shapes()?
            .into_iter()
            .map(|shape| {
                // Biases (rank 1) start at zero; weights are scaled normal.
                if shape.len() == 1 {
                    return Param::new(Tensor::zeros(shape));
                }
                let fan_in: usize = shape[1..].iter().product();
                let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
                Param::new(Tensor::from_fn(shape, |_| T::from_f64_lossy(normal.sample(&mut rng))))
            })
            .collect();
        Ok(Self { spec, params, seed })
    }

    /// Wraps existing parameter values, checking them against the spec.
    pub fn from_values(spec: NetworkSpec, values: Vec<Tensor<T>>, seed: u64) -> Result<Self> {
        let shapes = spec.param_shapes()?;
        if shapes.len() != values.len() {
            return Err(Error::dim(format!(
                "spec needs {} parameter tensors, got {}",
                shapes.len(),
                values.len()
            )));
        }
        for (i, (s, v)) in shapes.iter().zip(&values).enumerate() {
            if v.shape() != s.as_slice() {
                return Err(Error::dim(format!("parameter {i}: expected {s:?}, got {:?}", v.shape())));
            }
        }
        Ok(Self {
            spec,
            params: values.into_iter().map(Param::new).collect(),
            seed,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &[Param<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param<T>] {
        &mut self.params
    }

    pub fn zero_grad(&mut self) {
        self.params.iter_mut().for_each(Param::zero_grad);
    }

    pub fn cast<U: Element>(&self) -> Model<U> {
        Model {
            spec: self.spec.clone(),
            params: self.params.iter().map(Param::cast).collect(),
            seed: self.seed,
        }
    }

    fn check_batch(&self, shape: &[usize]) -> Result<()> {
        if shape.len() != 5 || shape[1..] != self.spec.input_shape {
            return Err(Error::dim(format!(
                "batch shape {shape:?} does not match model input (B, {:?})",
                self.spec.input_shape
            )));
        }
        Ok(())
    }

    fn run<E: Exec<T>>(&self, exec: &mut E, x: E::H) -> Result<E::H> {
        let mut x = x;
        let mut p = 0;
        for block in &self.spec.blocks {
            x = exec.conv(x, p)?;
            x = exec.relu(x)?;
            x = exec.pool(x, block.pool)?;
            p += 2;
            if block.attention {
                x = exec.attention(x, p)?;
                p += 2;
            }
        }
        x = exec.flatten(x)?;
        x = exec.linear(x, p)?;
        x = exec.relu(x)?;
        exec.linear(x, p + 2)
    }

    /// Inference pass: returns logits `[B, num_classes]`, keeps no tape.
    pub fn forward(&self, batch: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_batch(batch.shape())?;
        let mut exec = Eager { params: &self.params };
        self.run(&mut exec, batch.clone())
    }

    /// Records the forward pass on `tape`. Parameter `i` is registered as
    /// tape parameter `i`, so `tape.backward(.., self.params_mut())` fills
    /// this model's gradients.
    pub fn forward_on_tape(&self, tape: &mut Tape<T>, batch: Var) -> Result<Var> {
        let vars: Vec<Var> = self
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| tape.param(i, p.value.clone()))
            .collect();
        self.forward_with_params(tape, &vars, batch)
    }

    /// Records the forward pass using `params` (already on `tape`) in place
    /// of this model's own values. Only the spec of `self` is used.
    pub fn forward_with_params(&self, tape: &mut Tape<T>, params: &[Var], batch: Var) -> Result<Var> {
        self.check_batch(tape.value(batch).shape())?;
        if params.len() != self.params.len() {
            return Err(Error::dim(format!(
                "expected {} parameter tensors, got {}",
                self.params.len(),
                params.len()
            )));
        }
        let mut exec = Recorder {
            tape,
            vars: params.to_vec(),
        };
        self.run(&mut exec, batch)
    }

    /// Forward, summed cross-entropy and backward in one call. Gradients
    /// are overwritten. Returns the loss and the logits.
    pub fn loss_and_grad(&mut self, batch: &Tensor<T>, targets: &[usize]) -> Result<(f64, Tensor<T>)> {
        let mut tape = Tape::new();
        let x = tape.input(batch.clone());
        let logits = self.forward_on_tape(&mut tape, x)?;
        let loss = tape.cross_entropy(logits, targets)?;
        let value = tape.value(loss).data()[0].as_f64();
        let logits = tape.value(logits).clone();
        self.zero_grad();
        tape.backward(loss, &mut self.params)?;
        Ok((value, logits))
    }
}

impl Model<f32> {
    /// Order-sensitive FNV-1a digest of the parameter bits.
    pub fn param_digest(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for p in &self.params {
            for v in p.value.data() {
                for b in v.to_bits().to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        h
    }
}

impl Classifier for Model<f32> {
    fn input_shape(&self) -> [usize; 4] {
        self.spec.input_shape
    }

    fn num_classes(&self) -> usize {
        self.spec.num_classes
    }

    fn logits(&self, batch: &Tensor<f32>) -> Result<Tensor<f32>> {
        self.forward(batch)
    }
}

trait Exec<T: Element> {
    type H;
    fn conv(&mut self, x: Self::H, p: usize) -> Result<Self::H>;
    fn relu(&mut self, x: Self::H) -> Result<Self::H>;
    fn pool(&mut self, x: Self::H, window: [usize; 3]) -> Result<Self::H>;
    fn attention(&mut self, x: Self::H, p: usize) -> Result<Self::H>;
    fn flatten(&mut self, x: Self::H) -> Result<Self::H>;
    fn linear(&mut self, x: Self::H, p: usize) -> Result<Self::H>;
}

struct Eager<'a, T> {
    params: &'a [Param<T>],
}

impl<T: Element> Exec<T> for Eager<'_, T> {
    type H = Tensor<T>;

    fn conv(&mut self, x: Tensor<T>, p: usize) -> Result<Tensor<T>> {
        ops::conv3d(&x, &self.params[p].value, &self.params[p + 1].value)
    }

    fn relu(&mut self, x: Tensor<T>) -> Result<Tensor<T>> {
        Ok(ops::relu(&x))
    }

    fn pool(&mut self, x: Tensor<T>, window: [usize; 3]) -> Result<Tensor<T>> {
        Ok(ops::maxpool3d(&x, window)?.output)
    }

    fn attention(&mut self, x: Tensor<T>, p: usize) -> Result<Tensor<T>> {
        Ok(ops::attention(&x, &self.params[p].value, &self.params[p + 1].value)?.output)
    }

    fn flatten(&mut self, x: Tensor<T>) -> Result<Tensor<T>> {
        let b = x.shape()[0];
        let rest = x.len() / b.max(1);
        x.reshape(vec![b, rest])
    }

    fn linear(&mut self, x: Tensor<T>, p: usize) -> Result<Tensor<T>> {
        ops::linear(&x, &self.params[p].value, &self.params[p + 1].value)
    }
}

struct Recorder<'a, T> {
    tape: &'a mut Tape<T>,
    vars: Vec<Var>,
}

impl<T: Element> Exec<T> for Recorder<'_, T> {
    type H = Var;

    fn conv(&mut self, x: Var, p: usize) -> Result<Var> {
        self.tape.conv3d(x, self.vars[p], self.vars[p + 1])
    }

    fn relu(&mut self, x: Var) -> Result<Var> {
        self.tape.relu(x)
    }

    fn pool(&mut self, x: Var, window: [usize; 3]) -> Result<Var> {
        self.tape.maxpool3d(x, window)
    }

    fn attention(&mut self, x: Var, p: usize) -> Result<Var> {
        self.tape.attention(x, self.vars[p], self.vars[p + 1])
    }

    fn flatten(&mut self, x: Var) -> Result<Var> {
        self.tape.flatten(x)
    }

    fn linear(&mut self, x: Var, p: usize) -> Result<Var> {
        self.tape.linear(x, self.vars[p], self.vars[p + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Model<f32> {
        build_v2([3, 8, 12, 16], &[4, 8], 21, 11).unwrap()
    }

    #[test]
    fn zero_input_gives_finite_logits() {
        let m = tiny();
        let y = m.forward(&Tensor::zeros(vec![1, 3, 8, 12, 16])).unwrap();
        assert_eq!(y.shape(), &[1, 21]);
        assert!(y.all_finite());
    }

    #[test]
    fn duplicated_samples_give_identical_rows() {
        let m = tiny();
        let one = Tensor::<f32>::from_fn(vec![3, 8, 12, 16], |i| ((i * 31) % 17) as f32 / 17.0);
        let batch = Tensor::stack(&[one.clone(), one]).unwrap();
        let y = m.forward(&batch).unwrap();
        assert_eq!(y.row(0), y.row(1));
    }

    #[test]
    fn wrong_batch_shape_is_dimension_error() {
        let m = tiny();
        let err = m.forward(&Tensor::zeros(vec![1, 3, 8, 12, 15])).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn biases_start_at_zero_and_init_is_seeded() {
        let a = tiny();
        let b = tiny();
        assert_eq!(a, b);
        assert!(a.params()[1].value.data().iter().all(|&v| v == 0.0));
        let c = build_v2([3, 8, 12, 16], &[4, 8], 21, 12).unwrap();
        assert_ne!(a.params()[0], c.params()[0]);
    }

    #[test]
    fn tape_and_eager_agree() {
        let m = tiny();
        let x = Tensor::<f32>::from_fn(vec![2, 3, 8, 12, 16], |i| ((i * 7) % 13) as f32 / 13.0);
        let eager = m.forward(&x).unwrap();
        let mut tape = Tape::new();
        let xv = tape.input(x);
        let y = m.forward_on_tape(&mut tape, xv).unwrap();
        assert_eq!(tape.value(y), &eager);
    }

    #[test]
    fn parameter_count_matches_spec() {
        let m = tiny();
        // 2 blocks × (conv w, b, attention w, b) + 2 linear layers × (w, b)
        assert_eq!(m.params().len(), 12);
    }
}
