//! Classic fixed-step fourth-order Runge–Kutta.
//!
//! ```text
//! k1 = f(t,       y)
//! k2 = f(t + h/2, y + h k1 / 2)
//! k3 = f(t + h/2, y + h k2 / 2)
//! k4 = f(t + h,   y + h k3)
//! y' = y + h (k1 + 2 k2 + 2 k3 + k4) / 6
//! ```

/// RK4 stepper with reusable stage buffers.
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self { k1: vec![0.0; dim], k2: vec![0.0; dim], k3: vec![0.0; dim], k4: vec![0.0; dim], tmp: vec![0.0; dim] }
    }

    /// Advances `y` from `t` to `t + h` in place. `f(t, y, dy)` writes the
    /// derivative into `dy`.
    pub fn step<F>(&mut self, t: f64, h: f64, y: &mut [f64], mut f: F)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        f(t, y, &mut self.k1);
        for ((z, yi), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *z = yi + 0.5 * h * k;
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k2);
        for ((z, yi), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *z = yi + 0.5 * h * k;
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k3);
        for ((z, yi), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *z = yi + h * k;
        }
        f(t + h, &self.tmp, &mut self.k4);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fourth_order() {
        // y' = -y, y(0) = 1, error at t = 1 for dt and dt/2
        let run = |h: f64| {
            let mut rk = Rk4::new(1);
            let mut y = [1.0];
            let steps = (1.0 / h).round() as usize;
            for i in 0..steps {
                rk.step(i as f64 * h, h, &mut y, |_, y, dy| dy[0] = -y[0]);
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos t, y(0) = 0 → sin t
        let mut rk = Rk4::new(1);
        let mut y = [0.0];
        let h = 0.01;
        for i in 0..300 {
            rk.step(i as f64 * h, h, &mut y, |t, _, dy| dy[0] = t.cos());
        }
        assert!((y[0] - 3.0f64.sin()).abs() < 1e-10);
    }
}
