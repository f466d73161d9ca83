//! Periodic collocation grids on the torus `[-L, L)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use once_cell::race::OnceBox;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftPlan;

/// Half-length `L` and point count `N` of a torus grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_length: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(half_length: f64, points: usize) -> Result<Self> {
        let spec = Self { half_length, points };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_length.is_finite() && self.half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-length must be positive and finite, got {}",
                self.half_length
            )));
        }
        if self.points < 8 || !self.points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "point count must be even and at least 8, got {}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    /// Collocation point `x_k = -L + 2Lk/N`.
    pub fn point(&self, k: usize) -> f64 {
        -self.half_length + self.spacing() * k as f64
    }

    /// Signed mode number of storage slot `idx` (FFT order).
    pub fn mode(&self, idx: usize) -> i64 {
        mode_of(idx, self.points)
    }

    /// Wavenumber `pi j / L` of storage slot `idx`.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        PI * self.mode(idx) as f64 / self.half_length
    }

    /// Largest resolved wavenumber `pi N / (2L)`.
    pub fn max_wavenumber(&self) -> f64 {
        PI * self.points as f64 / (2.0 * self.half_length)
    }

    /// Storage slot of the Nyquist mode `-N/2`.
    pub fn nyquist_slot(&self) -> usize {
        self.points / 2
    }
}

pub(crate) fn mode_of(idx: usize, n: usize) -> i64 {
    if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

pub(crate) fn slot_of(mode: i64, n: usize) -> usize {
    mode.rem_euclid(n as i64) as usize
}

struct Plans {
    spec: GridSpec,
    wavenumbers: Vec<f64>,
    native: FftPlan,
    padded: OnceBox<FftPlan>,
    fine: OnceBox<FftPlan>,
}

/// A grid with its cached wavenumbers and FFT plans. Cheap to clone.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<Plans>,
}

impl core::fmt::Debug for Grid {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_tuple("Grid").field(&self.inner.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let wavenumbers = (0..spec.points).map(|i| spec.wavenumber(i)).collect();
        Ok(Self {
            inner: Arc::new(Plans {
                spec,
                wavenumbers,
                native: FftPlan::new(spec.points),
                padded: OnceBox::new(),
                fine: OnceBox::new(),
            }),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.inner.spec
    }

    pub fn points(&self) -> usize {
        self.inner.spec.points
    }

    pub fn half_length(&self) -> f64 {
        self.inner.spec.half_length
    }

    /// Wavenumbers in storage (FFT) order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    pub fn points_iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points()).map(move |k| self.inner.spec.point(k))
    }

    pub(crate) fn plan(&self, factor: usize) -> &FftPlan {
        let n = self.points();
        match factor {
            1 => &self.inner.native,
            2 => self.inner.padded.get_or_init(|| Box::new(FftPlan::new(2 * n))),
            4 => self.inner.fine.get_or_init(|| Box::new(FftPlan::new(4 * n))),
            _ => panic!("unsupported oversampling factor {factor}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_layout() {
        let spec = GridSpec::new(PI, 8).unwrap();
        let modes: Vec<i64> = (0..8).map(|i| spec.mode(i)).collect();
        assert_eq!(modes, [0, 1, 2, 3, -4, -3, -2, -1]);
        assert!((spec.wavenumber(3) - 3.0).abs() < 1e-15);
        assert_eq!(slot_of(-4, 8), 4);
        assert!((spec.point(0) + PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(0.0, 8).is_err());
        assert!(GridSpec::new(1.0, 7).is_err());
        assert!(GridSpec::new(f64::NAN, 8).is_err());
        assert!(GridSpec::new(1.0, 2).is_err());
    }
}
