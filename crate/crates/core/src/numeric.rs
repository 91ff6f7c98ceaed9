//! Small numeric helpers shared by the evaluators.

use num_complex::Complex64;

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierC {
    re: Neumaier,
    im: Neumaier,
}

impl NeumaierC {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn sum(&self) -> Complex64 {
        Complex64::new(self.re.sum(), self.im.sum())
    }
}

pub fn csum<I: IntoIterator<Item = Complex64>>(it: I) -> Complex64 {
    let mut s = NeumaierC::default();
    for z in it {
        s.add(z);
    }
    s.sum()
}

/// `sum |z|`, compensated.
pub fn abs_sum<I: IntoIterator<Item = Complex64>>(it: I) -> f64 {
    let mut s = Neumaier::default();
    for z in it {
        s.add(z.norm());
    }
    s.sum()
}
