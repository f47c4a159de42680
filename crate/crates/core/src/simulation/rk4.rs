/// Classical fourth-order Runge-Kutta stepper with preallocated stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances the autonomous system `y' = f(y)` by `h` in place.
    pub fn step<F>(&mut self, y: &mut [f64], h: f64, mut f: F)
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        f(y, &mut self.k1);
        stage(&mut self.tmp, y, 0.5 * h, &self.k1);
        f(&self.tmp, &mut self.k2);
        stage(&mut self.tmp, y, 0.5 * h, &self.k2);
        f(&self.tmp, &mut self.k3);
        stage(&mut self.tmp, y, h, &self.k3);
        f(&self.tmp, &mut self.k4);
        let ks = self.k1.iter().zip(&self.k2).zip(&self.k3).zip(&self.k4);
        for (yi, (((a, b), c), d)) in y.iter_mut().zip(ks) {
            *yi += h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
        }
    }
}

/// `out = y + a k`
fn stage(out: &mut [f64], y: &[f64], a: f64, k: &[f64]) {
    for ((o, yi), ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + a * ki;
    }
}
