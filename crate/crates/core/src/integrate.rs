//! Small numerical building blocks shared by the kernel and trig-sum code:
//! exact time averages of complex exponentials, composite Simpson weights and
//! compensated summation.

use num_complex::Complex64;

/// Frequencies with `|omega|` at or below this are treated as resonant (DC).
pub const OMEGA_TOL: f64 = 1e-12;

/// `(1/T) * integral_0^T e^{i omega t} dt`.
///
/// Evaluated as `e^{i x/2} sin(x/2)/(x/2)` with `x = omega T`, which stays
/// accurate when `x` is tiny. Returns exactly 1 for `|omega| <= OMEGA_TOL`.
pub fn averaging_factor(omega: f64, horizon: f64) -> Complex64 {
    if omega.abs() <= OMEGA_TOL {
        return Complex64::new(1.0, 0.0);
    }
    let half = 0.5 * omega * horizon;
    let s = sinc(half);
    let (sin, cos) = half.sin_cos();
    Complex64::new(cos * s, sin * s)
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Even number of Simpson intervals covering `span` with step at most `dt`.
pub fn simpson_intervals(span: f64, dt: f64) -> usize {
    let m = (span / dt).ceil().max(2.0) as usize;
    m + (m % 2)
}

/// Composite Simpson coefficient (without the `h/3` factor) of node `i` in `0..=m`.
pub fn simpson_coefficient(i: usize, m: usize) -> f64 {
    if i == 0 || i == m {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Composite Simpson integral of `f` over `[a, b]` with step at most `dt`.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, dt: f64) -> f64 {
    let m = simpson_intervals(b - a, dt);
    let h = (b - a) / m as f64;
    let acc: CompensatedSum = (0..=m)
        .map(|i| simpson_coefficient(i, m) * f(a + i as f64 * h))
        .collect();
    acc.value() * h / 3.0
}
