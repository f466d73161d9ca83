//! Pointwise nonlinear products, optionally dealiased by zero padding.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::field::{forward, Field};
use crate::grid::Grid;

/// Physical space in which nonlinear terms are formed. With dealiasing the
/// fields are interpolated to `2N` points and the result is truncated back to
/// the resolved modes with the Nyquist slot cleared.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    grid: Grid,
    factor: usize,
}

impl ProductSpace {
    pub fn new(grid: &Grid, dealias: bool) -> Self {
        Self {
            grid: grid.clone(),
            factor: if dealias { 2 } else { 1 },
        }
    }

    pub fn dealiased(&self) -> bool {
        self.factor > 1
    }

    pub fn len(&self) -> usize {
        self.factor * self.grid.points()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Samples of `u` on the product grid.
    pub fn lift(&self, u: &Field) -> Vec<f64> {
        u.oversampled(self.factor)
    }

    /// Spectrum (on the native grid) of product-grid samples.
    pub fn project_spectrum(&self, values: &[f64]) -> Vec<Complex64> {
        forward(&self.grid, self.factor, values, self.dealiased())
    }

    pub fn project(&self, values: &[f64]) -> Field {
        if self.factor == 1 {
            return Field::from_samples(&self.grid, values.to_vec()).expect("length matches grid");
        }
        Field::from_spectrum(&self.grid, self.project_spectrum(values)).expect("length matches grid")
    }

    /// Pointwise product `f * g`.
    pub fn multiply(&self, f: &Field, g: &Field) -> Field {
        let a = self.lift(f);
        let b = self.lift(g);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        self.project(&prod)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use core::f64::consts::PI;

    #[test]
    fn dealiased_square_removes_aliased_mode() {
        let g = Grid::new(GridSpec::new(PI, 16).unwrap()).unwrap();
        let u = Field::from_fn(&g, |x| (6.0 * x).cos());
        let on = ProductSpace::new(&g, true).multiply(&u, &u);
        // cos^2(6x) = 1/2 + cos(12x)/2 and 12 is not resolved on 16 points
        for v in on.samples() {
            assert!((v - 0.5).abs() < 1e-13);
        }
        let off = ProductSpace::new(&g, false).multiply(&u, &u);
        let s = off.spectrum();
        assert!(s[4].norm() > 0.2, "mode 12 aliases onto mode -4 without padding");
    }
}
