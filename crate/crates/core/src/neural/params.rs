use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceKind {
    Weight,
    Bias,
}

/// A named `rows × cols` block inside a [`ParamVector`], row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSlice {
    pub name: String,
    pub kind: SliceKind,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl ParamSlice {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Flat parameter storage with an aligned gradient buffer.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub grads: Vec<f64>,
    pub layout: Vec<ParamSlice>,
}

impl ParamVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a zero-initialized block and returns its index in `layout`.
    pub fn push(&mut self, name: &str, kind: SliceKind, rows: usize, cols: usize) -> usize {
        let slice = ParamSlice {
            name: name.to_string(),
            kind,
            offset: self.values.len(),
            rows,
            cols,
        };
        self.values.resize(self.values.len() + slice.len(), 0.0);
        self.grads.resize(self.values.len(), 0.0);
        self.layout.push(slice);
        self.layout.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn slice(&self, id: usize) -> &ParamSlice {
        &self.layout[id]
    }

    pub fn find(&self, name: &str) -> Option<&ParamSlice> {
        self.layout.iter().find(|s| s.name == name)
    }

    pub fn zero_grads(&mut self) {
        self.grads.clear();
        self.grads.resize(self.values.len(), 0.0);
    }

    pub fn grad_norm(&self) -> f64 {
        self.grads.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Rescales the gradient to at most `max_norm`; returns the norm before
    /// clipping.
    pub fn clip_grad_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.grad_norm();
        if norm > max_norm {
            let s = max_norm / norm;
            self.grads.iter_mut().for_each(|g| *g *= s);
        }
        norm
    }

    /// Glorot-uniform weights `U(±sqrt(6/(fan_in+fan_out)))`, zero biases.
    pub fn init_glorot<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for s in &self.layout {
            let range = s.range();
            match s.kind {
                SliceKind::Bias => self.values[range].fill(0.0),
                SliceKind::Weight => {
                    let limit = (6.0 / (s.rows + s.cols) as f64).sqrt();
                    for x in &mut self.values[range] {
                        *x = rng.random_range(-limit..=limit);
                    }
                }
            }
        }
    }

    /// Same layout (names, shapes, offsets).
    pub fn same_layout(&self, other: &ParamVector) -> bool {
        self.layout == other.layout && self.values.len() == other.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn layout_offsets_are_contiguous() {
        let mut p = ParamVector::new();
        let a = p.push("w", SliceKind::Weight, 3, 4);
        let b = p.push("b", SliceKind::Bias, 3, 1);
        assert_eq!(p.slice(a).range(), 0..12);
        assert_eq!(p.slice(b).range(), 12..15);
        assert_eq!(p.grads.len(), 15);
    }

    #[test]
    fn glorot_bounds_and_zero_bias() {
        let mut p = ParamVector::new();
        p.push("w", SliceKind::Weight, 10, 6);
        p.push("b", SliceKind::Bias, 10, 1);
        p.init_glorot(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        let lim = (6.0f64 / 16.0).sqrt();
        assert!(p.values[..60].iter().all(|x| x.abs() <= lim));
        assert!(p.values[..60].iter().any(|x| *x != 0.0));
        assert!(p.values[60..].iter().all(|x| *x == 0.0));
    }

    #[test]
    fn clipping_caps_norm() {
        let mut p = ParamVector::new();
        p.push("w", SliceKind::Weight, 1, 2);
        p.grads = vec![3.0, 4.0];
        assert_eq!(p.clip_grad_norm(1.0), 5.0);
        assert!((p.grad_norm() - 1.0).abs() < 1e-12);
    }
}
