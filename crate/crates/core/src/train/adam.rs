//! Adaptive-moment optimizer with the usual defaults.

use gaze_tensor::Tensor;

use crate::model::ParamStore;

pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<Tensor<f32>>,
    v: Vec<Tensor<f32>>,
    t: u32,
}

impl Adam {
    pub fn new(store: &ParamStore<f32>, lr: f64) -> Self {
        let m = store.iter().map(|(_, t)| Tensor::zeros(t.shape())).collect();
        let v = store.iter().map(|(_, t)| Tensor::zeros(t.shape())).collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m,
            v,
            t: 0,
        }
    }

    /// Apply one update. `grads[i] = None` leaves parameter `i` untouched
    /// (frozen or unused), including its moments.
    pub fn step(&mut self, store: &mut ParamStore<f32>, grads: &[Option<Tensor<f32>>]) {
        assert_eq!(grads.len(), store.len(), "gradient slots must cover every parameter");
        self.t += 1;
        let bc1 = 1.0 - (self.beta1 as f32).powi(self.t as i32);
        let bc2 = 1.0 - (self.beta2 as f32).powi(self.t as i32);
        let (b1, b2) = (self.beta1 as f32, self.beta2 as f32);
        let (lr, eps) = (self.lr as f32, self.eps as f32);
        for (i, grad) in grads.iter().enumerate() {
            let Some(grad) = grad else { continue };
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            let p = store.tensor_mut(i).data_mut();
            for ((pv, gv), (mv, vv)) in p.iter_mut().zip(grad.data()).zip(m.iter_mut().zip(v)) {
                *mv = b1 * *mv + (1.0 - b1) * gv;
                *vv = b2 * *vv + (1.0 - b2) * gv * gv;
                let m_hat = *mv / bc1;
                let v_hat = *vv / bc2;
                *pv -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}
