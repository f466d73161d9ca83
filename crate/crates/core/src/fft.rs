//! Complex FFT plans.
//!
//! Power-of-two lengths use an iterative radix-2 transform with precomputed
//! twiddles. Other lengths fall back to a direct O(N^2) sum so small odd-size
//! grids still work in tests.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

#[derive(Debug, Clone)]
enum Kind {
    Radix2 {
        twiddles: Vec<Complex64>,
        reversed: Vec<u32>,
    },
    Direct {
        roots: Vec<Complex64>,
    },
}

/// A reusable plan for unnormalized forward (`e^{-2 pi i jk/N}`) and inverse
/// (`e^{+2 pi i jk/N}`) transforms of one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    kind: Kind,
}

fn root(k: usize, n: usize) -> Complex64 {
    let angle = -2.0 * PI * (k as f64) / (n as f64);
    Complex64::new(Float::cos(angle), Float::sin(angle))
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let kind = if len.is_power_of_two() {
            let bits = len.trailing_zeros();
            let reversed = (0..len as u32)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
                .collect();
            let twiddles = (0..len / 2).map(|k| root(k, len)).collect();
            Kind::Radix2 { twiddles, reversed }
        } else {
            Kind::Direct {
                roots: (0..len).map(|k| root(k, len)).collect(),
            }
        };
        Self { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        match &self.kind {
            Kind::Radix2 { twiddles, reversed } => radix2(buf, twiddles, reversed),
            Kind::Direct { roots } => direct(buf, roots),
        }
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        for c in buf.iter_mut() {
            *c = c.conj();
        }
        self.forward(buf);
        for c in buf.iter_mut() {
            *c = c.conj();
        }
    }
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], reversed: &[u32]) {
    let n = buf.len();
    for (i, &j) in reversed.iter().enumerate().take(n) {
        let j = j as usize;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        for start in (0..n).step_by(2 * half) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        half *= 2;
    }
}

fn direct(buf: &mut [Complex64], roots: &[Complex64]) {
    let n = buf.len();
    let input = buf.to_vec();
    for (j, out) in buf.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, x) in input.iter().enumerate() {
            acc += *x * roots[(j * k) % n];
        }
        *out = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                x.iter()
                    .enumerate()
                    .map(|(k, v)| *v * root(j * k, n))
                    .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
            })
            .collect()
    }

    #[test]
    fn radix2_matches_direct_sum() {
        for &n in &[1usize, 2, 4, 8, 64] {
            let x: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            FftPlan::new(n).forward(&mut y);
            for (a, b) in y.iter().zip(naive(&x)) {
                assert!((a - b).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn inverse_round_trip_odd_length() {
        let n = 12;
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let plan = FftPlan::new(n);
        let mut y = x.clone();
        plan.forward(&mut y);
        plan.inverse(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a / n as f64 - b).norm() < 1e-12);
        }
    }
}
