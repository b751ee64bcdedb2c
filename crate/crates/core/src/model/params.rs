//! Named parameter storage and graph binding.

use std::collections::HashMap;

use gaze_tensor::{Element, Graph, Tensor, Var};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Ordered, named collection of weight tensors. Iteration order is insertion
/// order, which fixes checkpoint layout and optimizer determinism.
#[derive(Debug, Clone)]
pub struct ParamStore<T: Element = f32> {
    names: Vec<String>,
    tensors: Vec<Tensor<T>>,
    index: HashMap<String, usize>,
}

impl<T: Element> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Element> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore {
            names: Vec::new(),
            tensors: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor<T>) -> usize {
        let name = name.into();
        assert!(
            !self.index.contains_key(&name),
            "duplicate parameter {name}"
        );
        let id = self.tensors.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.tensors.push(tensor);
        id
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn total_values(&self) -> usize {
        self.tensors.iter().map(Tensor::numel).sum()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn tensor(&self, id: usize) -> &Tensor<T> {
        &self.tensors[id]
    }

    pub fn tensor_mut(&mut self, id: usize) -> &mut Tensor<T> {
        &mut self.tensors[id]
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn cast<U: Element>(&self) -> ParamStore<U> {
        ParamStore {
            names: self.names.clone(),
            tensors: self.tensors.iter().map(Tensor::cast).collect(),
            index: self.index.clone(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::all_finite)
    }

    /// Replace every tensor from another store with identical layout.
    pub fn load_from(&mut self, other: &ParamStore<T>) -> Result<()> {
        if self.names != other.names {
            return Err(Error::Config("parameter layout mismatch".into()));
        }
        for (dst, src) in self.tensors.iter_mut().zip(&other.tensors) {
            if dst.shape() != src.shape() {
                return Err(Error::Config(format!(
                    "parameter shape mismatch: {:?} vs {:?}",
                    dst.shape(),
                    src.shape()
                )));
            }
            *dst = src.clone();
        }
        Ok(())
    }
}

/// Graph handles for every parameter, aligned with store order.
pub struct BoundParams {
    vars: Vec<Var>,
}

impl BoundParams {
    pub fn var(&self, id: usize) -> Var {
        self.vars[id]
    }
}

/// Bind every parameter into a graph. Parameters whose name matches
/// `frozen` are bound as plain leaves: no gradient flows into them.
pub fn bind<T: Element>(
    store: &ParamStore<T>,
    g: &mut Graph<T>,
    frozen: &dyn Fn(&str) -> bool,
) -> BoundParams {
    let vars = store
        .iter()
        .map(|(name, tensor)| {
            if frozen(name) {
                g.leaf(tensor.clone())
            } else {
                g.param(tensor.clone())
            }
        })
        .collect();
    BoundParams { vars }
}

/// Uniform weight init with variance `gain^2 / fan_in`: bound is
/// `gain * sqrt(3 / fan_in)`. Use gain sqrt(2) ahead of relu, 1 elsewhere.
pub fn init_uniform<T: Element>(
    rng: &mut ChaCha8Rng,
    shape: &[usize],
    fan_in: usize,
    gain: f64,
) -> Tensor<T> {
    let bound = gain * (3.0 / fan_in as f64).sqrt();
    let numel: usize = shape.iter().product();
    let data = (0..numel)
        .map(|_| T::from_f64(rng.gen_range(-bound..bound)))
        .collect();
    Tensor::new(shape.to_vec(), data).expect("shape/data agree")
}

pub const RELU_GAIN: f64 = std::f64::consts::SQRT_2;
pub const LINEAR_GAIN: f64 = 1.0;
