//! Real periodic fields held in both physical and spectral form.
//!
//! Spectral coefficients follow `u_hat_j = (1/N) sum_k u(x_k) exp(-i xi_j x_k)`,
//! so `u(x) = sum_j u_hat_j exp(i xi_j x)` and `||u||_2^2 = 2L sum_j |u_hat_j|^2`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{mode_of, slot_of, Grid};

#[inline]
fn parity(mode: i64) -> f64 {
    if mode & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A real field on a torus grid with samples and spectrum kept in sync.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    samples: Vec<f64>,
    spectrum: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.points();
        Self {
            grid: grid.clone(),
            samples: vec![0.0; n],
            spectrum: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Builds a field from collocation samples.
    pub fn from_samples(grid: &Grid, samples: Vec<f64>) -> Result<Self> {
        let n = grid.points();
        if samples.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: samples.len(),
            });
        }
        let spectrum = forward(grid, 1, &samples, false);
        Ok(Self {
            grid: grid.clone(),
            samples,
            spectrum,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.points_iter().map(f).collect();
        Self::from_samples(grid, samples).expect("length matches grid")
    }

    /// Builds a field from spectral coefficients. The input is projected onto
    /// real fields by symmetrizing conjugate pairs.
    pub fn from_spectrum(grid: &Grid, mut spectrum: Vec<Complex64>) -> Result<Self> {
        let n = grid.points();
        if spectrum.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: spectrum.len(),
            });
        }
        hermitize(&mut spectrum);
        let samples = inverse(grid, &spectrum);
        Ok(Self {
            grid: grid.clone(),
            samples,
            spectrum,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Applies a real even Fourier multiplier `m(xi)`.
    pub fn multiply_real(&self, m: impl Fn(f64) -> f64) -> Field {
        let xi = self.grid.wavenumbers();
        let spectrum = self.spectrum.iter().zip(xi).map(|(c, &w)| c * m(w)).collect();
        Self::from_spectrum(&self.grid, spectrum).expect("length matches grid")
    }

    /// Applies an arbitrary multiplier to the spectrum, given the slot and
    /// wavenumber.
    pub fn map_spectrum(&self, m: impl Fn(usize, f64, Complex64) -> Complex64) -> Field {
        let xi = self.grid.wavenumbers();
        let spectrum = self.spectrum.iter().enumerate().map(|(i, c)| m(i, xi[i], *c)).collect();
        Self::from_spectrum(&self.grid, spectrum).expect("length matches grid")
    }

    pub fn scale(&mut self, a: f64) {
        self.samples.iter_mut().for_each(|v| *v *= a);
        self.spectrum.iter_mut().for_each(|c| *c *= a);
    }

    pub fn scaled(&self, a: f64) -> Field {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &Field) -> Result<()> {
        self.ensure_same_grid(other)?;
        for (v, w) in self.samples.iter_mut().zip(&other.samples) {
            *v += a * w;
        }
        for (c, d) in self.spectrum.iter_mut().zip(&other.spectrum) {
            *c += d * a;
        }
        Ok(())
    }

    /// `sum_i a_i f_i` over fields sharing one grid.
    pub fn linear_combination(terms: &[(f64, &Field)]) -> Result<Field> {
        let (first_a, first) = terms
            .first()
            .ok_or_else(|| crate::error::invalid("terms", "linear combination needs a term"))?;
        let mut out = first.scaled(*first_a);
        for (a, f) in &terms[1..] {
            out.add_scaled(*a, f)?;
        }
        Ok(out)
    }

    pub fn difference(&self, other: &Field) -> Result<Field> {
        let mut out = self.clone();
        out.add_scaled(-1.0, other)?;
        Ok(out)
    }

    /// `(f, g)_{L^2}` computed from the spectra.
    pub fn inner_l2(&self, other: &Field) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let sum: f64 = self
            .spectrum
            .iter()
            .zip(&other.spectrum)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(2.0 * self.grid.half_length() * sum)
    }

    /// Spectral interpolation onto `factor * N` equispaced points.
    pub fn oversampled(&self, factor: usize) -> Vec<f64> {
        if factor == 1 {
            return self.samples.clone();
        }
        let n = self.grid.points();
        let m = factor * n;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (idx, c) in self.spectrum.iter().enumerate() {
            let j = mode_of(idx, n);
            if idx == n / 2 {
                let half = c * (0.5 * parity(j));
                buf[slot_of(j, m)] += half;
                buf[slot_of(-j, m)] += half;
            } else {
                buf[slot_of(j, m)] = c * parity(j);
            }
        }
        self.grid.plan(factor).inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Re-expresses the field on another grid with the same half-length.
    pub fn resample(&self, target: &Grid) -> Result<Field> {
        if (target.half_length() - self.grid.half_length()).abs() > 1e-12 * self.grid.half_length() {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.points();
        let m = target.points();
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (idx, c) in self.spectrum.iter().enumerate() {
            let j = mode_of(idx, n);
            if j.unsigned_abs() as usize >= m / 2 {
                continue;
            }
            if idx == n / 2 {
                out[slot_of(j, m)] += c * 0.5;
                out[slot_of(-j, m)] += c * 0.5;
            } else {
                out[slot_of(j, m)] = *c;
            }
        }
        Field::from_spectrum(target, out)
    }
}

/// Forward transform of `factor * N` samples, returning `N` coefficients.
/// With `truncate` the Nyquist slot is cleared.
pub(crate) fn forward(grid: &Grid, factor: usize, samples: &[f64], truncate: bool) -> Vec<Complex64> {
    let n = grid.points();
    let m = factor * n;
    debug_assert_eq!(samples.len(), m);
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.plan(factor).forward(&mut buf);
    let scale = 1.0 / m as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (idx, slot) in out.iter_mut().enumerate() {
        let j = mode_of(idx, n);
        if truncate && idx == n / 2 {
            continue;
        }
        *slot = buf[slot_of(j, m)] * (parity(j) * scale);
    }
    if !truncate && factor == 1 {
        // exact transform: keep the Nyquist coefficient real
        let ny = n / 2;
        out[ny] = Complex64::new(out[ny].re, 0.0);
    }
    out
}

fn inverse(grid: &Grid, spectrum: &[Complex64]) -> Vec<f64> {
    let n = grid.points();
    let mut buf: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(idx, c)| c * parity(mode_of(idx, n)))
        .collect();
    grid.plan(1).inverse(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

fn hermitize(spectrum: &mut [Complex64]) {
    let n = spectrum.len();
    spectrum[0].im = 0.0;
    spectrum[n / 2].im = 0.0;
    for idx in 1..n / 2 {
        let a = spectrum[idx];
        let b = spectrum[n - idx];
        let sym = (a + b.conj()) * 0.5;
        spectrum[idx] = sym;
        spectrum[n - idx] = sym.conj();
    }
}
