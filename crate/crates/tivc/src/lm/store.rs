//! Flat parameter store: every tensor is a named 2-D array with a parallel
//! gradient buffer and Adam state. Lookup by name happens once at
//! construction; hot paths use integer handles.

use std::collections::HashMap;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub usize);

#[derive(Debug, Clone)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Array2<f64>>,
    grads: Vec<Array2<f64>>,
    adam_m: Vec<Array2<f64>>,
    adam_v: Vec<Array2<f64>>,
    index: HashMap<String, usize>,
    step: u64,
}

impl ParamStore {
    pub fn new() -> ParamStore {
        ParamStore {
            names: Vec::new(),
            tensors: Vec::new(),
            grads: Vec::new(),
            adam_m: Vec::new(),
            adam_v: Vec::new(),
            index: HashMap::new(),
            step: 0,
        }
    }

    /// Register a tensor initialized from `init(rng)` per element.
    pub fn add(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        rng: &mut ChaCha8Rng,
        scale: f64,
    ) -> ParamId {
        let name = name.into();
        assert!(
            !self.index.contains_key(&name),
            "duplicate parameter {name}"
        );
        // Gaussian via Box-Muller keeps the dependency surface small and the
        // draw order deterministic.
        let n = rows * cols;
        let mut data = Vec::with_capacity(n);
        while data.len() < n {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = std::f64::consts::TAU * u2;
            data.push(r * theta.cos() * scale);
            if data.len() < n {
                data.push(r * theta.sin() * scale);
            }
        }
        let t = Array2::from_shape_vec((rows, cols), data).unwrap();
        self.add_tensor(name, t)
    }

    pub fn add_zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> ParamId {
        self.add_tensor(name.into(), Array2::zeros((rows, cols)))
    }

    pub fn add_ones(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> ParamId {
        self.add_tensor(name.into(), Array2::ones((rows, cols)))
    }

    fn add_tensor(&mut self, name: String, t: Array2<f64>) -> ParamId {
        let id = self.tensors.len();
        let shape = t.raw_dim();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.grads.push(Array2::zeros(shape));
        self.adam_m.push(Array2::zeros(shape));
        self.adam_v.push(Array2::zeros(shape));
        self.tensors.push(t);
        ParamId(id)
    }

    pub fn id(&self, name: &str) -> ParamId {
        ParamId(
            *self
                .index
                .get(name)
                .unwrap_or_else(|| panic!("unknown parameter {name}")),
        )
    }

    pub fn get(&self, id: ParamId) -> &Array2<f64> {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.tensors[id.0]
    }

    pub fn grad(&self, id: ParamId) -> &Array2<f64> {
        &self.grads[id.0]
    }

    pub fn grad_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.grads[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn by_name(&self, name: &str) -> Option<&Array2<f64>> {
        self.index.get(name).map(|&i| &self.tensors[i])
    }

    pub fn by_name_mut(&mut self, name: &str) -> Option<&mut Array2<f64>> {
        self.index
            .get(name)
            .copied()
            .map(move |i| &mut self.tensors[i])
    }

    pub fn zero_grads(&mut self) {
        for g in &mut self.grads {
            g.fill(0.0);
        }
    }

    pub fn num_params(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }

    /// One Adam update over every tensor; gradients are left untouched so the
    /// caller decides when to clear them.
    pub fn adam_step(&mut self, lr: f64) {
        const BETA1: f64 = 0.9;
        const BETA2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - BETA1.powf(t);
        let bc2 = 1.0 - BETA2.powf(t);
        for i in 0..self.tensors.len() {
            let g = &self.grads[i];
            let m = &mut self.adam_m[i];
            let v = &mut self.adam_v[i];
            ndarray::Zip::from(m)
                .and(v)
                .and(&mut self.tensors[i])
                .and(g)
                .for_each(|m, v, p, &g| {
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    let mh = *m / bc1;
                    let vh = *v / bc2;
                    *p -= lr * mh / (vh.sqrt() + EPS);
                });
        }
    }

    /// Global L2 gradient clipping; returns the pre-clip norm.
    pub fn clip_grads(&mut self, max_norm: f64) -> f64 {
        let sq: f64 = self
            .grads
            .iter()
            .map(|g| g.iter().map(|x| x * x).sum::<f64>())
            .sum();
        let norm = sq.sqrt();
        if norm > max_norm && norm > 0.0 {
            let s = max_norm / norm;
            for g in &mut self.grads {
                g.mapv_inplace(|x| x * s);
            }
        }
        norm
    }
}

impl Default for ParamStore {
    fn default() -> Self {
        ParamStore::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn seeded_init_is_reproducible() {
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        let mut a = ParamStore::new();
        let mut b = ParamStore::new();
        let ia = a.add("w", 4, 5, &mut r1, 0.1);
        let ib = b.add("w", 4, 5, &mut r2, 0.1);
        assert_eq!(a.get(ia), b.get(ib));
    }

    #[test]
    fn adam_descends_a_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ps = ParamStore::new();
        let id = ps.add("x", 1, 3, &mut rng, 1.0);
        for _ in 0..500 {
            ps.zero_grads();
            let x = ps.get(id).clone();
            ps.grad_mut(id).assign(&(2.0 * &x));
            ps.adam_step(0.05);
        }
        assert!(ps.get(id).iter().all(|v| v.abs() < 1e-2));
    }

    #[test]
    fn clip_scales_to_max_norm() {
        let mut ps = ParamStore::new();
        let id = ps.add_zeros("x", 1, 4);
        ps.grad_mut(id).fill(3.0); // norm 6
        let pre = ps.clip_grads(1.5);
        assert!((pre - 6.0).abs() < 1e-12);
        let post: f64 = ps.grad(id).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((post - 1.5).abs() < 1e-12);
    }
}
