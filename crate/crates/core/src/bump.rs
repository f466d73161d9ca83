//! Smooth compactly supported plateau profiles.

use serde::{Deserialize, Serialize};

use crate::spectral::{smooth_step, smooth_step_derivative};

/// Equal to 1 on `|x| <= inner`, 0 on `|x| >= outer`, smooth in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauBump {
    pub inner: f64,
    pub outer: f64,
}

/// Plateau on `[-1, 1]`, support `[-2, 2]`.
pub const PROFILE: PlateauBump = PlateauBump { inner: 1.0, outer: 2.0 };

/// Plateau on `[-2, 2]`, support `[-3, 3]`. Equals 1 on the support of [`PROFILE`].
pub const ENVELOPE: PlateauBump = PlateauBump { inner: 2.0, outer: 3.0 };

impl PlateauBump {
    pub fn value(&self, x: f64) -> f64 {
        smooth_step((self.outer - x.abs()) / (self.outer - self.inner))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let width = self.outer - self.inner;
        -x.signum() * smooth_step_derivative((self.outer - x.abs()) / width) / width
    }

    /// `||psi||_{L^2}^2` by composite Gauss-Legendre quadrature.
    pub fn l2_norm_squared(&self) -> f64 {
        let ramp = gauss_legendre(
            |x| {
                let v = self.value(x);
                v * v
            },
            self.inner,
            self.outer,
            64,
        );
        2.0 * (self.inner + ramp)
    }

    pub fn support_radius(&self) -> f64 {
        self.outer
    }
}

const NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Composite 8-point Gauss-Legendre rule on `cells` equal cells of `[a, b]`.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let mut total = 0.0;
    for c in 0..cells {
        let mid = a + h * (c as f64 + 0.5);
        let mut acc = 0.0;
        for (node, w) in NODES.iter().zip(WEIGHTS) {
            acc += w * f(mid + 0.5 * h * node);
        }
        total += 0.5 * h * acc;
    }
    total
}
