//! Tape-based reverse-mode differentiation.
//!
//! Every operation applied through a [`Tape`] appends a node holding its
//! output and whatever the backward rule needs. Nodes are only ever
//! appended, so index order is a topological order and a single reverse
//! sweep visits each node exactly once.
//!
//! ```
//! use strokebench::autograd::{Param, Tape};
//! use strokebench::tensor::Tensor;
//!
//! let mut params = vec![Param::new(Tensor::<f64>::new(vec![3], vec![1.0, -2.0, 0.5]).unwrap())];
//! let mut tape = Tape::new();
//! let theta = tape.param(0, params[0].value.clone());
//! let sq = tape.mul(theta, theta).unwrap();
//! let half = tape.scale(sq, 0.5).unwrap();
//! let loss = tape.sum(half).unwrap();
//! tape.backward(loss, &mut params).unwrap();
//! assert_eq!(params[0].grad.data(), &[1.0, -2.0, 0.5]);
//! ```

use crate::error::{Error, Result};
use crate::ops::{activation, attention, conv, linear, loss, pool};
use crate::tensor::{Element, Tensor};

/// A trainable tensor with its gradient and optimizer state.
#[derive(Clone, Debug, PartialEq)]
pub struct Param<T> {
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
    pub velocity: Tensor<T>,
}

impl<T: Element> Param<T> {
    pub fn new(value: Tensor<T>) -> Self {
        let grad = Tensor::zeros(value.shape().to_vec());
        let velocity = Tensor::zeros(value.shape().to_vec());
        Self { value, grad, velocity }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(T::zero());
    }

    pub fn cast<U: Element>(&self) -> Param<U> {
        Param {
            value: self.value.cast(),
            grad: self.grad.cast(),
            velocity: self.velocity.cast(),
        }
    }
}

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

enum Op<T> {
    Input,
    Param(usize),
    Conv3d { input: Var, weight: Var, bias: Var },
    Relu { input: Var },
    MaxPool { input: Var, argmax: Vec<usize> },
    Attention { input: Var, weight: Var, bias: Var, mask: Vec<T> },
    Reshape { input: Var },
    Linear { input: Var, weight: Var, bias: Var },
    CrossEntropy { logits: Var, targets: Vec<usize> },
    Sum { input: Var },
    Mul { a: Var, b: Var },
    Scale { input: Var, factor: T },
}

struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    requires_grad: bool,
}

pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Element> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Element> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    /// A constant leaf; no gradient flows into it.
    pub fn input(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Input, false)
    }

    /// A leaf whose gradient is accumulated into `params[index]` by [`Tape::backward`].
    pub fn param(&mut self, index: usize, value: Tensor<T>) -> Var {
        self.push(value, Op::Param(index), true)
    }

    pub fn conv3d(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let out = conv::conv3d(self.value(input), self.value(weight), self.value(bias))?;
        let rg = self.needs(&[input, weight, bias]);
        Ok(self.push(out, Op::Conv3d { input, weight, bias }, rg))
    }

    pub fn relu(&mut self, input: Var) -> Result<Var> {
        let out = activation::relu(self.value(input));
        let rg = self.needs(&[input]);
        Ok(self.push(out, Op::Relu { input }, rg))
    }

    pub fn maxpool3d(&mut self, input: Var, window: [usize; 3]) -> Result<Var> {
        let pooled = pool::maxpool3d(self.value(input), window)?;
        let rg = self.needs(&[input]);
        Ok(self.push(
            pooled.output,
            Op::MaxPool {
                input,
                argmax: pooled.argmax,
            },
            rg,
        ))
    }

    pub fn attention(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let out = attention::attention(self.value(input), self.value(weight), self.value(bias))?;
        let rg = self.needs(&[input, weight, bias]);
        Ok(self.push(
            out.output,
            Op::Attention {
                input,
                weight,
                bias,
                mask: out.mask,
            },
            rg,
        ))
    }

    pub fn reshape(&mut self, input: Var, shape: Vec<usize>) -> Result<Var> {
        let out = self.value(input).clone().reshape(shape)?;
        let rg = self.needs(&[input]);
        Ok(self.push(out, Op::Reshape { input }, rg))
    }

    /// Collapses every axis after the first.
    pub fn flatten(&mut self, input: Var) -> Result<Var> {
        let shape = self.value(input).shape();
        let b = shape.first().copied().unwrap_or(1);
        let rest = shape.iter().skip(1).product();
        self.reshape(input, vec![b, rest])
    }

    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let out = linear::linear(self.value(input), self.value(weight), self.value(bias))?;
        let rg = self.needs(&[input, weight, bias]);
        Ok(self.push(out, Op::Linear { input, weight, bias }, rg))
    }

    /// Batch-summed softmax cross-entropy; produces a one-element node.
    pub fn cross_entropy(&mut self, logits: Var, targets: &[usize]) -> Result<Var> {
        let l = loss::cross_entropy(self.value(logits), targets)?;
        let rg = self.needs(&[logits]);
        Ok(self.push(
            Tensor::scalar(l),
            Op::CrossEntropy {
                logits,
                targets: targets.to_vec(),
            },
            rg,
        ))
    }

    pub fn sum(&mut self, input: Var) -> Result<Var> {
        let s = self.value(input).sum();
        let rg = self.needs(&[input]);
        Ok(self.push(Tensor::scalar(s), Op::Sum { input }, rg))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        y.expect_shape(x.shape())?;
        let data = x.data().iter().zip(y.data()).map(|(&p, &q)| p * q).collect();
        let out = Tensor::new(x.shape().to_vec(), data)?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(out, Op::Mul { a, b }, rg))
    }

    pub fn scale(&mut self, input: Var, factor: f64) -> Result<Var> {
        let factor = T::from_f64_lossy(factor);
        let out = self.value(input).map(|v| v * factor);
        let rg = self.needs(&[input]);
        Ok(self.push(out, Op::Scale { input, factor }, rg))
    }

    /// Back-propagates from the scalar `loss`, adding parameter gradients
    /// into `params[i].grad`. Consumes the tape, releasing all intermediates.
    pub fn backward(self, loss: Var, params: &mut [Param<T>]) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::State("backward called on an empty tape".into()));
        }
        if loss.0 >= self.nodes.len() {
            return Err(Error::State(format!("loss node {} is not on this tape", loss.0)));
        }
        if self.nodes[loss.0].value.len() != 1 {
            return Err(Error::State(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.nodes[loss.0].value.shape()
            )));
        }

        let mut grads: Vec<Option<Tensor<T>>> = Vec::new();
        grads.resize_with(loss.0 + 1, || None);
        grads[loss.0] = Some(Tensor::ones(self.nodes[loss.0].value.shape().to_vec()));
        let mut nodes = self.nodes;
        nodes.truncate(loss.0 + 1);

        while let Some(node) = nodes.pop() {
            let idx = nodes.len();
            let Some(g) = grads[idx].take() else { continue };
            if !node.requires_grad {
                continue;
            }
            let value = |v: Var| &nodes[v.0].value;
            let wants = |v: Var| nodes[v.0].requires_grad;
            let mut pending: Vec<(Var, Tensor<T>)> = Vec::new();
            match node.op {
                Op::Input => {}
                Op::Param(i) => {
                    let n = params.len();
                    let p = params.get_mut(i).ok_or_else(|| {
                        Error::Index(format!("tape refers to parameter {i}, only {n} given"))
                    })?;
                    p.grad.add_assign(&g)?;
                }
                Op::Conv3d { input, weight, bias } => {
                    let (gi, gw, gb) =
                        conv::conv3d_backward(value(input), value(weight), value(bias), &g, wants(input))?;
                    if let Some(gi) = gi {
                        pending.push((input, gi));
                    }
                    pending.push((weight, gw));
                    pending.push((bias, gb));
                }
                Op::Relu { input } => {
                    pending.push((input, activation::relu_backward(value(input), &g)?));
                }
                Op::MaxPool { input, argmax } => {
                    pending.push((input, pool::maxpool3d_backward(value(input).shape(), &argmax, &g)?));
                }
                Op::Attention {
                    input,
                    weight,
                    bias,
                    mask,
                } => {
                    let (gi, gw, gb) =
                        attention::attention_backward(value(input), value(weight), value(bias), &mask, &g)?;
                    pending.push((input, gi));
                    pending.push((weight, gw));
                    pending.push((bias, gb));
                }
                Op::Reshape { input } => {
                    pending.push((input, g.reshape(value(input).shape().to_vec())?));
                }
                Op::Linear { input, weight, bias } => {
                    let (gi, gw, gb) = linear::linear_backward(value(input), value(weight), value(bias), &g)?;
                    pending.push((input, gi));
                    pending.push((weight, gw));
                    pending.push((bias, gb));
                }
                Op::CrossEntropy { logits, targets } => {
                    let upstream = g.data()[0];
                    let gl = loss::cross_entropy_backward(value(logits), &targets)?.map(|v| v * upstream);
                    pending.push((logits, gl));
                }
                Op::Sum { input } => {
                    let upstream = g.data()[0];
                    pending.push((input, Tensor::full(value(input).shape().to_vec(), upstream)));
                }
                Op::Mul { a, b } => {
                    let (x, y) = (value(a), value(b));
                    let ga = zip_mul(&g, y)?;
                    let gb = zip_mul(&g, x)?;
                    pending.push((a, ga));
                    pending.push((b, gb));
                }
                Op::Scale { input, factor } => {
                    pending.push((input, g.map(|v| v * factor)));
                }
            }
            for (v, gv) in pending {
                if !nodes[v.0].requires_grad {
                    continue;
                }
                match &mut grads[v.0] {
                    Some(acc) => acc.add_assign(&gv)?,
                    slot => *slot = Some(gv),
                }
            }
        }
        Ok(())
    }
}

fn zip_mul<T: Element>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    b.expect_shape(a.shape())?;
    let data = a.data().iter().zip(b.data()).map(|(&p, &q)| p * q).collect();
    Tensor::new(a.shape().to_vec(), data)
}
