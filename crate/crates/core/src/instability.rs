//! Approximate solutions built from a solved low-frequency part and an
//! explicit high-frequency wave packet, their residual terms, and the
//! experiment showing that nearby initial data separate in finite time.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::bump::{PlateauBump, ENVELOPE, PROFILE};
use crate::dynamics::{check_degree, drift, DriftParams};
use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::field::Field;
use crate::fit::{fit_power_law, PowerFit};
use crate::grid::{Grid, GridSpec};
use crate::integrate::{simulate_with, BlowupCaps, Scheme, SimConfig, Stepper};
use crate::noise::NoiseModel;
use crate::norms::{h_norm, scaled_bump_grid};
use crate::product::ProductSpace;
use crate::spectral::{derivative, derivative_factor};

/// Parameters of one family of approximate solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstabilityScenario {
    pub k: u32,
    /// Sobolev index of the well-posedness space, above 5/2.
    pub s: f64,
    /// Width exponent: the packet envelope has width `n^delta`.
    pub delta: f64,
    /// Index in `(1/2, 1)` in which residuals are measured.
    pub rho0: f64,
    pub n_list: Vec<u32>,
    pub t_probe: f64,
}

impl InstabilityScenario {
    pub fn new(k: u32, s: f64, delta: f64, rho0: f64, n_list: Vec<u32>, t_probe: f64) -> Result<Self> {
        let scenario = Self {
            k,
            s,
            delta,
            rho0,
            n_list,
            t_probe,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Open interval of admissible width exponents for degree `k`.
    pub fn delta_bounds(k: u32) -> (f64, f64) {
        if k == 1 {
            (2.0 / 3.0, 1.0)
        } else {
            let kf = k as f64;
            (2.0 / kf - 2.0 / (2.0 * kf - 1.0), 1.0 / kf)
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_degree(self.k)?;
        if !(self.s > 2.5 && self.s.is_finite()) {
            return Err(invalid("s", format!("must exceed 5/2, got {}", self.s)));
        }
        let (lo, hi) = Self::delta_bounds(self.k);
        if !(self.delta > lo && self.delta < hi) {
            return Err(invalid(
                "delta",
                format!("must lie in ({lo}, {hi}) for k = {}, got {}", self.k, self.delta),
            ));
        }
        if !(self.rho0 > 0.5 && self.rho0 < 1.0) {
            return Err(invalid("rho0", format!("must lie in (1/2, 1), got {}", self.rho0)));
        }
        if self.decay_exponent() >= 0.0 {
            return Err(invalid(
                "delta",
                format!("decay exponent {} is not negative", self.decay_exponent()),
            ));
        }
        if self.n_list.iter().any(|n| *n < 32) {
            return Err(invalid("n_list", "frequencies must be at least 32"));
        }
        if !(self.t_probe > 0.0 && self.t_probe.is_finite()) {
            return Err(invalid("t_probe", format!("must be positive, got {}", self.t_probe)));
        }
        Ok(())
    }

    /// `r_s = -s - 1 + rho0 + k delta`.
    pub fn decay_exponent(&self) -> f64 {
        -self.s - 1.0 + self.rho0 + self.k as f64 * self.delta
    }

    /// Expected decay `(k delta - 1)/2` of the approximation error in `H^s`.
    pub fn tracking_exponent(&self) -> f64 {
        (self.k as f64 * self.delta - 1.0) / 2.0
    }

    /// The two values of `m` whose solutions are compared: `(-1, 1)` for odd
    /// `k`, `(0, 1)` for even `k`.
    pub fn m_pair(&self) -> (i32, i32) {
        if self.k % 2 == 1 {
            (-1, 1)
        } else {
            (0, 1)
        }
    }

    pub fn check_m(&self, m: i32) -> Result<()> {
        let (a, b) = self.m_pair();
        if m == a || m == b || m == 0 {
            Ok(())
        } else {
            Err(invalid("m", format!("{m} is not allowed for k = {}", self.k)))
        }
    }

    /// `n^{-delta/2 - s}`.
    pub fn amplitude(&self, n: u32) -> f64 {
        Float::powf(n as f64, -0.5 * self.delta - self.s)
    }

    pub fn width(&self, n: u32) -> f64 {
        Float::powf(n as f64, self.delta)
    }

    /// Grid resolving frequency `n` with dealiasing headroom.
    pub fn grid(&self, n: u32) -> Result<GridSpec> {
        scaled_bump_grid(n as f64, self.delta, ENVELOPE.support_radius())
    }
}

/// The profile `phi` and envelope `phi_tilde`, with `phi_tilde = 1` on the
/// support of `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bumps {
    pub profile: PlateauBump,
    pub envelope: PlateauBump,
}

impl Default for Bumps {
    fn default() -> Self {
        Self {
            profile: PROFILE,
            envelope: ENVELOPE,
        }
    }
}

pub fn build_bumps(profile: PlateauBump, envelope: PlateauBump) -> Result<Bumps> {
    for (name, b) in [("profile", profile), ("envelope", envelope)] {
        if !(b.inner > 0.0 && b.inner < b.outer && b.outer.is_finite()) {
            return Err(invalid(name, format!("need 0 < inner < outer, got {b:?}")));
        }
    }
    if envelope.inner < profile.outer {
        return Err(invalid("envelope", "plateau must cover the profile support"));
    }
    Ok(Bumps { profile, envelope })
}

impl Bumps {
    /// Fails when the envelope scaled by `width` reaches the domain boundary.
    pub fn check_fits(&self, grid: &GridSpec, width: f64) -> Result<()> {
        let radius = self.envelope.outer * width;
        if radius >= grid.half_length {
            return Err(Error::SupportExceedsDomain {
                radius,
                half_length: grid.half_length,
            });
        }
        Ok(())
    }

    pub fn profile_field(&self, grid: &Grid, width: f64) -> Result<Field> {
        self.check_fits(grid.spec(), width)?;
        Ok(Field::from_fn(grid, |x| self.profile.value(x / width)))
    }

    pub fn envelope_field(&self, grid: &Grid, width: f64) -> Result<Field> {
        self.check_fits(grid.spec(), width)?;
        Ok(Field::from_fn(grid, |x| self.envelope.value(x / width)))
    }
}

/// The packet `n^{-delta/2-s} phi(x/n^delta) cos(n x - m t)` and its pieces.
#[derive(Debug, Clone, Copy)]
pub struct Packet {
    pub n: f64,
    pub m: f64,
    pub amplitude: f64,
    pub width: f64,
    pub profile: PlateauBump,
}

impl Packet {
    pub fn new(scenario: &InstabilityScenario, n: u32, m: i32) -> Result<Self> {
        scenario.check_m(m)?;
        Ok(Self {
            n: n as f64,
            m: m as f64,
            amplitude: scenario.amplitude(n),
            width: scenario.width(n),
            profile: PROFILE,
        })
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        Bumps::default().check_fits(grid.spec(), self.width)?;
        let limit = 2.0 / 3.0 * grid.spec().max_wavenumber();
        if self.n >= limit {
            return Err(invalid(
                "n",
                format!("frequency {} exceeds the dealiased band {limit}", self.n),
            ));
        }
        Ok(())
    }

    fn envelope(&self, x: f64) -> f64 {
        self.amplitude * self.profile.value(x / self.width)
    }

    fn sample(&self, grid: &Grid, t: f64, f: impl Fn(f64, f64, f64) -> f64) -> Result<Field> {
        self.check(grid)?;
        let spec = grid.spec();
        let samples = (0..spec.points)
            .map(|k| {
                let x = spec.point(k);
                let (c, s) = carrier(spec, k, self.n, self.m * t);
                f(x, c, s)
            })
            .collect();
        Field::from_samples(grid, samples)
    }

    pub fn field(&self, grid: &Grid, t: f64) -> Result<Field> {
        self.sample(grid, t, |x, c, _| self.envelope(x) * c)
    }

    /// `A phi(x/n^delta) sin(n x - m t)`.
    pub fn sine_field(&self, grid: &Grid, t: f64) -> Result<Field> {
        self.sample(grid, t, |x, _, s| self.envelope(x) * s)
    }

    /// `A phi'(x/n^delta) cos(n x - m t)`.
    pub fn slope_field(&self, grid: &Grid, t: f64) -> Result<Field> {
        self.sample(grid, t, |x, c, _| {
            self.amplitude * self.profile.derivative(x / self.width) * c
        })
    }

    /// Exact time derivative `m A phi sin(n x - m t)`.
    pub fn time_derivative(&self, grid: &Grid, t: f64) -> Result<Field> {
        Ok(self.sine_field(grid, t)?.scaled(self.m))
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, Float::mul_add(a, b, -p))
}

const TWO_PI_HI: f64 = core::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `(cos, sin)` of `freq * x_k - shift` at the exact grid point
/// `x_k = -L + 2Lk/N`. The phase is carried in double-double arithmetic so
/// large `freq * x` do not leave rounding noise in the samples.
pub(crate) fn carrier(spec: &GridSpec, k: usize, freq: f64, shift: f64) -> (f64, f64) {
    let l = spec.half_length;
    let ratio = 2.0 * k as f64 / spec.points as f64;
    let (p, p_err) = two_prod(l, ratio);
    let (x, x_err) = two_sum(-l, p);
    let x_lo = x_err + p_err;
    let (q, q_err) = two_prod(freq, x);
    let (theta, t_err) = two_sum(q, -shift);
    let lo = q_err + freq * x_lo + t_err;
    let turns = Float::round(theta / TWO_PI_HI);
    let (r, r_err) = two_prod(turns, TWO_PI_HI);
    let (hi, hi_err) = two_sum(theta, -r);
    let rest = hi_err - r_err - turns * TWO_PI_LO + lo;
    let (c, s) = (Float::cos(hi), Float::sin(hi));
    (c - s * rest, s + c * rest)
}

/// High-frequency part at time `t`.
pub fn high_freq(scenario: &InstabilityScenario, n: u32, m: i32, t: f64, grid: &Grid) -> Result<Field> {
    Packet::new(scenario, n, m)?.field(grid, t)
}

/// `m n^{-1/k} phi_tilde(x/n^delta)`.
pub fn low_freq_initial(scenario: &InstabilityScenario, n: u32, m: i32, grid: &Grid) -> Result<Field> {
    scenario.check_m(m)?;
    let amp = m as f64 * Float::powf(n as f64, -1.0 / scenario.k as f64);
    let mut f = Bumps::default().envelope_field(grid, scenario.width(n))?;
    f.scale(amp);
    Ok(f)
}

/// Exact initial data `u_l(0) + u_h(0)` of the compared solutions.
pub fn initial_data(scenario: &InstabilityScenario, n: u32, m: i32, grid: &Grid) -> Result<Field> {
    let mut u = low_freq_initial(scenario, n, m, grid)?;
    u.add_scaled(1.0, &high_freq(scenario, n, m, 0.0, grid)?)?;
    Ok(u)
}

/// Time stepping of the low-frequency problem on a coarse grid with the
/// scenario's half-length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowFreqSettings {
    pub t_final: f64,
    pub dt: f64,
    pub coarse_points: usize,
    /// Steps between stored samples.
    pub sample_every: usize,
}

/// Samples of the solved low-frequency part.
#[derive(Debug, Clone)]
pub struct LowFreqTrajectory {
    pub n: u32,
    pub m: i32,
    pub times: Vec<f64>,
    pub states: Vec<Field>,
}

impl LowFreqTrajectory {
    /// Sample `index` re-expressed on `grid`.
    pub fn state_on(&self, index: usize, grid: &Grid) -> Result<Field> {
        let state = self
            .states
            .get(index)
            .ok_or_else(|| invalid("index", format!("no low-frequency sample {index}")))?;
        state.resample(grid)
    }

    pub fn sup_norm_ratio(&self, r: f64) -> f64 {
        let h0 = h_norm(&self.states[0], r);
        if h0 == 0.0 {
            return 0.0;
        }
        self.states.iter().map(|u| h_norm(u, r)).fold(0.0, Float::max) / h0
    }
}

fn deterministic_config(scenario: &InstabilityScenario, grid: GridSpec, dt: f64, t_final: f64) -> Result<SimConfig> {
    let mut cfg = SimConfig::deterministic(grid, scenario.k, dt, t_final)?;
    cfg.s_track = alloc::vec![scenario.rho0, scenario.s];
    cfg.sobolev_index = scenario.s;
    cfg.caps = BlowupCaps {
        w1inf: f64::INFINITY,
        hs: f64::INFINITY,
        grace: 0.0,
    };
    Ok(cfg)
}

/// Solves the deterministic equation from `u_l(0)`. `m = 0` gives the zero
/// trajectory without stepping.
pub fn low_freq_solve(
    scenario: &InstabilityScenario,
    n: u32,
    m: i32,
    settings: &LowFreqSettings,
) -> Result<LowFreqTrajectory> {
    scenario.validate()?;
    let fine = scenario.grid(n)?;
    let spec = GridSpec::new(fine.half_length, settings.coarse_points)?;
    let grid = Grid::new(spec)?;
    let mut cfg = deterministic_config(scenario, spec, settings.dt, settings.t_final)?;
    cfg.record_stride = settings.sample_every.max(1);
    let u0 = low_freq_initial(scenario, n, m, &grid)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    if m == 0 {
        let mut i = 0;
        while i <= cfg.steps() {
            times.push(cfg.step_time(i));
            states.push(u0.clone());
            if i == cfg.steps() {
                break;
            }
            i = (i + cfg.record_stride).min(cfg.steps());
        }
        return Ok(LowFreqTrajectory { n, m, times, states });
    }
    let record = simulate_with(&u0, &cfg, |t, u| {
        times.push(t);
        states.push(u.clone());
    })?;
    if let Some(b) = record.breakdown {
        return Err(Error::NonFinite { time: b.time });
    }
    Ok(LowFreqTrajectory { n, m, times, states })
}

/// `u_{m,n} = u_l + u_h`.
pub fn assemble(low: &Field, high: &Field) -> Result<Field> {
    let mut u = low.clone();
    u.add_scaled(1.0, high)?;
    Ok(u)
}

/// `Z_q(l, h) = (l + h)^q - l^q` expanded binomially; zero for `q <= 0`.
pub fn binomial_excess(q: i32, l: f64, h: f64) -> f64 {
    let mut total = 0.0;
    let mut coeff = 1.0;
    for j in 1..=q {
        coeff = coeff * (q - j + 1) as f64 / j as f64;
        total += coeff * Float::powi(l, q - j) * Float::powi(h, j);
    }
    total
}

fn powi(x: f64, p: i32) -> f64 {
    if p <= 0 {
        if p == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        Float::powi(x, p)
    }
}

fn spectral_norm(grid: &Grid, spec: &[Complex64], s: f64) -> f64 {
    let sum: f64 = spec
        .iter()
        .zip(grid.wavenumbers())
        .map(|(c, &xi)| Float::powf(1.0 + xi * xi, s) * c.norm_sqr())
        .sum();
    Float::sqrt(2.0 * grid.half_length() * sum)
}

/// Residual terms at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub time: f64,
    /// `||E_i||_{H^rho0}` for `i = 1..4`.
    pub terms: [f64; 4],
    /// `||E_1 + E_2 + E_3 + E_4||_{H^rho0}`.
    pub total: f64,
    /// `||int_0^t (E_1 + ... + E_4)||_{H^rho0}` by the trapezoid rule.
    pub accumulated: f64,
    /// Relative `H^rho0` mismatch against the residual assembled from the drift.
    pub consistency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub n: u32,
    pub m: i32,
    pub samples: Vec<ErrorSample>,
    pub max_terms: [f64; 4],
    pub max_accumulated: f64,
}

/// Evaluates the residual of `u_l + u_h` split into transport, `F1`, `F2`
/// and `F3` contributions at every stored sample of `low`.
pub fn error_terms(
    scenario: &InstabilityScenario,
    low: &LowFreqTrajectory,
    check_consistency: bool,
) -> Result<ErrorBreakdown> {
    let n = low.n;
    let m = low.m;
    let k = scenario.k as i32;
    let grid = Grid::new(scenario.grid(n)?)?;
    let packet = Packet::new(scenario, n, m)?;
    let space = ProductSpace::new(&grid, true);
    let ny = grid.spec().nyquist_slot();
    let xi = grid.wavenumbers().to_vec();
    let c2 = (2.0 * k as f64 - 1.0) / 2.0;
    let c3 = (k as f64 - 1.0) / 2.0;
    let nf = n as f64;
    let slope_scale = Float::powf(nf, -scenario.delta);

    let l0 = space.lift(&low.state_on(0, &grid)?);
    let l0k: Vec<f64> = l0.iter().map(|v| powi(*v, k)).collect();
    let params = DriftParams::new(scenario.k)?;

    let mut samples = Vec::with_capacity(low.times.len());
    let mut previous: Option<(f64, Vec<Complex64>)> = None;
    let mut integral = alloc::vec![Complex64::new(0.0, 0.0); grid.points()];
    let mut max_terms = [0.0f64; 4];
    let mut max_accumulated = 0.0f64;
    for (i, &t) in low.times.iter().enumerate() {
        let ul = low.state_on(i, &grid)?;
        let uh = packet.field(&grid, t)?;
        let l = space.lift(&ul);
        let lx = space.lift(&derivative(&ul));
        let h = space.lift(&uh);
        let hx = space.lift(&derivative(&uh));
        let sn = space.lift(&packet.sine_field(&grid, t)?);
        let cp = space.lift(&packet.slope_field(&grid, t)?);

        let len = l.len();
        let mut g1 = Vec::with_capacity(len);
        let mut g2 = Vec::with_capacity(len);
        let mut g3 = Vec::with_capacity(len);
        let mut g4 = Vec::with_capacity(len);
        for p in 0..len {
            let (a, ax, b, bx) = (l[p], lx[p], h[p], hx[p]);
            let lk = powi(a, k);
            let vx = ax + bx;
            g1.push((l0k[p] - lk) * nf * sn[p] + lk * slope_scale * cp[p] + binomial_excess(k, a, b) * vx);
            g2.push(binomial_excess(k + 1, a, b));
            g3.push(powi(a, k - 1) * (2.0 * ax * bx + bx * bx) + binomial_excess(k - 1, a, b) * vx * vx);
            if k > 1 {
                g4.push(
                    powi(a, k - 2) * (3.0 * ax * ax * bx + 3.0 * ax * bx * bx + bx * bx * bx)
                        + binomial_excess(k - 2, a, b) * vx * vx * vx,
                );
            }
        }
        let e1 = space.project_spectrum(&g1);
        let helm_dx = |vals: &[f64], w: f64| -> Vec<Complex64> {
            space
                .project_spectrum(vals)
                .iter()
                .enumerate()
                .map(|(j, c)| c * derivative_factor(j, ny, xi[j]) * (w / (1.0 + xi[j] * xi[j])))
                .collect()
        };
        let e2 = helm_dx(&g2, 1.0);
        let e3 = helm_dx(&g3, c2);
        let e4: Vec<Complex64> = if k > 1 {
            space
                .project_spectrum(&g4)
                .iter()
                .enumerate()
                .map(|(j, c)| c * (c3 / (1.0 + xi[j] * xi[j])))
                .collect()
        } else {
            alloc::vec![Complex64::new(0.0, 0.0); grid.points()]
        };
        let terms = [
            spectral_norm(&grid, &e1, scenario.rho0),
            spectral_norm(&grid, &e2, scenario.rho0),
            spectral_norm(&grid, &e3, scenario.rho0),
            spectral_norm(&grid, &e4, scenario.rho0),
        ];
        let sum: Vec<Complex64> = (0..grid.points()).map(|j| e1[j] + e2[j] + e3[j] + e4[j]).collect();
        let total = spectral_norm(&grid, &sum, scenario.rho0);

        if let Some((t_prev, prev)) = &previous {
            let half = 0.5 * (t - t_prev);
            for j in 0..integral.len() {
                integral[j] += (prev[j] + sum[j]) * half;
            }
        }
        let accumulated = spectral_norm(&grid, &integral, scenario.rho0);

        let consistency = if check_consistency {
            let u = assemble(&ul, &uh)?;
            let mut direct = drift(&u, &params)?;
            direct.add_scaled(-1.0, &drift(&ul, &params)?)?;
            direct.add_scaled(1.0, &packet.time_derivative(&grid, t)?)?;
            let diff: Vec<Complex64> = direct.spectrum().iter().zip(&sum).map(|(a, b)| a - b).collect();
            let scale = Float::max(total, spectral_norm(&grid, direct.spectrum(), scenario.rho0));
            Some(if scale > 0.0 {
                spectral_norm(&grid, &diff, scenario.rho0) / scale
            } else {
                0.0
            })
        } else {
            None
        };

        for (mx, v) in max_terms.iter_mut().zip(terms) {
            *mx = Float::max(*mx, v);
        }
        max_accumulated = Float::max(max_accumulated, accumulated);
        samples.push(ErrorSample {
            time: t,
            terms,
            total,
            accumulated,
            consistency,
        });
        previous = Some((t, sum));
    }
    Ok(ErrorBreakdown {
        n,
        m,
        samples,
        max_terms,
        max_accumulated,
    })
}

/// How the compared solutions are stepped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceSettings {
    pub t_final: f64,
    pub dt: f64,
    pub coarse_points: usize,
    pub sample_every: usize,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Scheme for noisy runs; noiseless runs always use RK4.
    pub scheme: Scheme,
    pub paths: usize,
    pub seed: u64,
    /// `H^s` radius after which the capped suprema stop accumulating.
    #[serde(default)]
    pub exit_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub n: u32,
    pub grid: GridSpec,
    /// `||u^{m1,n}(0) - u^{m2,n}(0)||_{H^s}`.
    pub initial_gap: f64,
    /// `2 n^{-delta/2-s} ||phi(x/n^delta) sin(n x)||_{H^s}`.
    pub reference: f64,
    /// Path mean of `sup_t ||u^{m1,n}(t) - u^{m2,n}(t)||_{H^s}`.
    pub sup_gap: f64,
    /// Same supremum restricted to times before either solution exits.
    pub sup_gap_before_exit: f64,
    pub normalized_gap: f64,
    /// Path mean of the larger `sup_t ||u_{m,n} - u^{m,n}||_{H^s}` over both `m`.
    pub tracking: f64,
    pub path_sup_gaps: Vec<f64>,
    /// Time of the first non-finite state, if any.
    pub breakdown: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub scenario: InstabilityScenario,
    pub rows: Vec<DivergenceRow>,
    /// `sup |sin t|` over the sampled times.
    pub sup_sin: f64,
    pub initial_gap_fit: Option<PowerFit>,
    pub tracking_fit: Option<PowerFit>,
}

fn divergence_row(scenario: &InstabilityScenario, n: u32, settings: &DivergenceSettings) -> Result<DivergenceRow> {
    let spec = scenario.grid(n)?;
    let grid = Grid::new(spec)?;
    let (m1, m2) = scenario.m_pair();
    let low = LowFreqSettings {
        t_final: settings.t_final,
        dt: settings.dt,
        coarse_points: settings.coarse_points,
        sample_every: settings.sample_every,
    };
    let lows = [
        low_freq_solve(scenario, n, m1, &low)?,
        low_freq_solve(scenario, n, m2, &low)?,
    ];
    let packets = [Packet::new(scenario, n, m1)?, Packet::new(scenario, n, m2)?];
    let starts = [
        initial_data(scenario, n, m1, &grid)?,
        initial_data(scenario, n, m2, &grid)?,
    ];
    let initial_gap = h_norm(&starts[0].difference(&starts[1])?, scenario.s);
    let sine = Field::from_fn(&grid, |x| {
        packets[0].amplitude * PROFILE.value(x / packets[0].width) * Float::sin(n as f64 * x)
    });
    let reference = 2.0 * h_norm(&sine, scenario.s);

    let mut cfg = deterministic_config(scenario, spec, settings.dt, settings.t_final)?;
    if !settings.noise.is_none() {
        cfg.noise = settings.noise.clone();
        cfg.scheme = settings.scheme;
    }
    let paths = if settings.noise.is_none() {
        1
    } else {
        settings.paths.max(1)
    };
    let mut sup_gaps = Vec::with_capacity(paths);
    let mut capped_gaps = Vec::with_capacity(paths);
    let mut trackings = Vec::with_capacity(paths);
    let mut breakdown = None;
    for path in 0..paths {
        cfg.seed = settings.seed.wrapping_add(path as u64);
        let mut steppers = [Stepper::new(&starts[0], &cfg)?, Stepper::new(&starts[1], &cfg)?];
        let mut sup_gap = 0.0f64;
        let mut capped = 0.0f64;
        let mut tracking = 0.0f64;
        let mut exited = false;
        let mut sample = 0usize;
        loop {
            let idx = steppers[0].index();
            let last = steppers[0].finished();
            if idx % settings.sample_every.max(1) == 0 || last {
                let gap = h_norm(&steppers[0].state().difference(steppers[1].state())?, scenario.s);
                sup_gap = Float::max(sup_gap, gap);
                if let Some(r) = settings.exit_radius {
                    exited |= steppers.iter().any(|st| h_norm(st.state(), scenario.s) > r);
                }
                if !exited {
                    capped = Float::max(capped, gap);
                }
                let t = steppers[0].time();
                for j in 0..2 {
                    let approx = assemble(&lows[j].state_on(sample, &grid)?, &packets[j].field(&grid, t)?)?;
                    let err = h_norm(&approx.difference(steppers[j].state())?, scenario.s);
                    tracking = Float::max(tracking, err);
                }
                sample += 1;
            }
            if last {
                break;
            }
            let mut failed = None;
            for st in steppers.iter_mut() {
                match st.advance() {
                    Ok(()) => {}
                    Err(Error::NonFinite { time }) => failed = Some(time),
                    Err(e) => return Err(e),
                }
            }
            if let Some(time) = failed {
                breakdown.get_or_insert(time);
                break;
            }
        }
        sup_gaps.push(sup_gap);
        capped_gaps.push(capped);
        trackings.push(tracking);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let sup_gap = mean(&sup_gaps);
    Ok(DivergenceRow {
        n,
        grid: spec,
        initial_gap,
        reference,
        sup_gap,
        sup_gap_before_exit: mean(&capped_gaps),
        normalized_gap: sup_gap / reference,
        tracking: mean(&trackings),
        path_sup_gaps: sup_gaps,
        breakdown,
    })
}

/// Runs the compared solutions for every `n` of the scenario.
pub fn divergence_experiment(
    scenario: &InstabilityScenario,
    settings: &DivergenceSettings,
    exec: &impl Executor,
) -> Result<DivergenceReport> {
    scenario.validate()?;
    if settings.sample_every == 0 {
        return Err(invalid("sample_every", "must be positive"));
    }
    let rows: Result<Vec<DivergenceRow>> = exec
        .map(scenario.n_list.len(), |i| {
            divergence_row(scenario, scenario.n_list[i], settings)
        })
        .into_iter()
        .collect();
    let rows = rows?;
    let steps = Float::ceil(settings.t_final / settings.dt * (1.0 - 1e-12)) as usize;
    let sup_sin = (0..=steps)
        .filter(|i| i % settings.sample_every == 0 || *i == steps)
        .map(|i| Float::abs(Float::sin(Float::min(i as f64 * settings.dt, settings.t_final))))
        .fold(0.0, Float::max);
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let fit = |ys: Vec<f64>| fit_power_law(&ns, &ys).ok();
    Ok(DivergenceReport {
        scenario: scenario.clone(),
        initial_gap_fit: fit(rows.iter().map(|r| r.initial_gap).collect()),
        tracking_fit: fit(rows.iter().map(|r| r.tracking).collect()),
        sup_sin,
        rows,
    })
}
