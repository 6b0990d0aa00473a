//! The assembled gap-tooth scheme: teeth coupled across the gaps.
//!
//! Every step first reads the macroscopic field (the tooth centres), dots
//! it with the boundary condition weights to produce a `(left, right)`
//! target pair per tooth, resolves the tooth edges from those targets and
//! then advances the interiors.  Stencils address neighbouring teeth
//! modulo `m`, so the macroscopic domain is periodic.

use crate::microsim::{self, MicroState, PdeChoice, ToothGeometry};
use crate::stencil::{interp_weights, tbc_weights, Side, TbcSpec, TbcWeights};
use crate::{Error, Result};

/// One Fourier mode of the initial condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierMode {
    /// Integer wavenumber on the periodic domain.
    pub k: i32,
    pub amp: f64,
    pub phase: f64,
}

/// Full description of a gap-tooth experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct GapToothConfig {
    pub geom: ToothGeometry,
    pub pde: PdeChoice,
    pub tbc: TbcSpec,
    /// Simulation step; `None` picks [`microsim::default_dt`].
    pub dt: Option<f64>,
    pub t_end: f64,
    pub initial_condition: Vec<FourierMode>,
}

impl GapToothConfig {
    pub fn validate(&self) -> Result<()> {
        self.pde.validate()?;
        self.tbc.validate()?;
        let p = self.tbc.half_width();
        if self.geom.teeth() < 2 * p {
            return Err(Error::config(
                "geometry.teeth",
                format!(
                    "an order-{} stencil needs at least {} teeth, got {}",
                    self.tbc.order,
                    2 * p,
                    self.geom.teeth()
                ),
            ));
        }
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return Err(Error::config(
                "time.t_end",
                format!("end time must be positive, got {}", self.t_end),
            ));
        }
        if let Some(dt) = self.dt {
            let bound = microsim::stable_dt_bound(&self.geom, &self.pde);
            if !dt.is_finite() || dt <= 0.0 || dt > bound {
                return Err(Error::config(
                    "time.dt",
                    format!("step must lie in (0, {bound:.3e}], got {dt:.3e}"),
                ));
            }
        }
        Ok(())
    }

    /// Step used by simulation: the explicit `dt` or the default rule.
    pub fn simulation_dt(&self) -> f64 {
        self.dt
            .unwrap_or_else(|| microsim::default_dt(&self.geom, &self.pde))
    }

    /// True when the stencil only fits by wrapping onto the same tooth
    /// twice (`m == 2p`).  Legal, but reported values carry large
    /// wavenumber errors and reports should flag them.
    pub fn wrap_degenerate(&self) -> bool {
        self.geom.teeth() < 2 * self.tbc.half_width() + 1
    }

    /// Samples the Fourier initial condition at every micro point.
    pub fn initial_state(&self) -> MicroState {
        let scale = std::f64::consts::TAU / self.geom.domain_length();
        MicroState::from_fn(&self.geom, |_, _, x| {
            self.initial_condition
                .iter()
                .map(|mode| mode.amp * (scale * mode.k as f64 * x + mode.phase).cos())
                .sum()
        })
    }

    /// Same experiment on `m` teeth.
    pub fn with_teeth(&self, m: usize) -> Result<GapToothConfig> {
        let geom = ToothGeometry::with_domain_length(
            m,
            self.geom.micro_points(),
            self.geom.ratio(),
            self.geom.domain_length(),
        )?;
        let mut config = self.clone();
        config.geom = geom;
        config.validate()?;
        Ok(config)
    }

    /// Same experiment with `n` micro points per tooth.
    pub fn with_micro_points(&self, n: usize) -> Result<GapToothConfig> {
        let geom = ToothGeometry::with_domain_length(
            self.geom.teeth(),
            n,
            self.geom.ratio(),
            self.geom.domain_length(),
        )?;
        let mut config = self.clone();
        config.geom = geom;
        config.validate()?;
        Ok(config)
    }
}

/// Boundary targets for every tooth: the boundary condition weights dotted
/// with the macro values of the neighbouring teeth, indices taken mod `m`.
pub fn compute_targets(
    macro_values: &[f64],
    tbc: &TbcSpec,
    geom: &ToothGeometry,
) -> Result<Vec<(f64, f64)>> {
    assert_eq!(
        macro_values.len(),
        geom.teeth(),
        "one macro value per tooth"
    );
    let left = tbc_weights(
        tbc,
        geom.ratio(),
        geom.inner_fraction(),
        geom.h_macro(),
        Side::Left,
    )?;
    let right = tbc_weights(
        tbc,
        geom.ratio(),
        geom.inner_fraction(),
        geom.h_macro(),
        Side::Right,
    )?;
    Ok(targets_from_weights(macro_values, &left, &right))
}

fn targets_from_weights(
    macro_values: &[f64],
    left: &TbcWeights,
    right: &TbcWeights,
) -> Vec<(f64, f64)> {
    let m = macro_values.len() as isize;
    (0..m)
        .map(|j| {
            let dot = |w: &TbcWeights| {
                w.iter()
                    .map(|(k, wt)| wt * macro_values[(j + k).rem_euclid(m) as usize])
                    .sum::<f64>()
            };
            (dot(left), dot(right))
        })
        .collect()
}

/// Reusable one-step driver with precomputed boundary weights.
pub struct Stepper {
    config: GapToothConfig,
    dt: f64,
    left: TbcWeights,
    right: TbcWeights,
    linearized: bool,
}

impl Stepper {
    pub fn new(config: &GapToothConfig) -> Result<Self> {
        Self::with_dt(config, config.simulation_dt(), false)
    }

    /// Driver for the dynamics linearised about the zero state (the
    /// Burgers Jacobian at zero is pure diffusion with its viscosity).
    pub fn linearized(config: &GapToothConfig, dt: f64) -> Result<Self> {
        Self::with_dt(config, dt, true)
    }

    fn with_dt(config: &GapToothConfig, dt: f64, linearized: bool) -> Result<Self> {
        config.validate()?;
        let bound = microsim::stable_dt_bound(&config.geom, &config.pde);
        if !dt.is_finite() || dt <= 0.0 || dt > bound {
            return Err(Error::config(
                "time.dt",
                format!("step must lie in (0, {bound:.3e}], got {dt:.3e}"),
            ));
        }
        let geom = &config.geom;
        let left = tbc_weights(
            &config.tbc,
            geom.ratio(),
            geom.inner_fraction(),
            geom.h_macro(),
            Side::Left,
        )?;
        let right = tbc_weights(
            &config.tbc,
            geom.ratio(),
            geom.inner_fraction(),
            geom.h_macro(),
            Side::Right,
        )?;
        Ok(Stepper {
            config: config.clone(),
            dt,
            left,
            right,
            linearized,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn config(&self) -> &GapToothConfig {
        &self.config
    }

    /// One full step: snapshot the macro field, refresh the tooth edges,
    /// advance the interiors, advance time.
    pub fn step(&self, state: &mut MicroState) -> Result<()> {
        let macros = state.macro_values();
        let targets = targets_from_weights(&macros, &self.left, &self.right);
        microsim::apply_tbc(state, &self.config.geom, &self.config.tbc, &targets)?;
        if self.linearized {
            microsim::diffusion_interior_step(
                state,
                &self.config.geom,
                self.config.pde.linear_diffusivity(),
                self.dt,
            )?;
        } else {
            microsim::interior_step(state, &self.config.geom, &self.config.pde, self.dt)?;
        }
        state.advance_time(self.dt);
        Ok(())
    }
}

/// Advances `state` by one step of the configured scheme.
pub fn step(state: &mut MicroState, config: &GapToothConfig) -> Result<()> {
    Stepper::new(config)?.step(state)
}

/// The full micro field at one stored time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// Flattened tooth-major values, `j * n + i`.
    pub values: Vec<f64>,
}

/// Time history of a simulation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub geom: ToothGeometry,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    /// Rows `(t, j, i, x, v)` in deterministic tooth-major order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, usize, usize, f64, f64)> + '_ {
        let n = self.geom.micro_points();
        self.snapshots.iter().flat_map(move |snap| {
            snap.values.iter().enumerate().map(move |(idx, &v)| {
                let (j, i) = (idx / n, idx % n);
                (snap.t, j, i, self.geom.micro_x(j, i), v)
            })
        })
    }

    pub fn max_abs(&self, snapshot: usize) -> f64 {
        self.snapshots[snapshot]
            .values
            .iter()
            .fold(0.0, |acc, v| v.abs().max(acc))
    }

    /// Root-mean-square of the macro (tooth centre) values of a snapshot.
    pub fn macro_rms(&self, snapshot: usize) -> f64 {
        let n = self.geom.micro_points();
        let c = self.geom.center_index();
        let snap = &self.snapshots[snapshot];
        let sum: f64 = (0..self.geom.teeth())
            .map(|j| snap.values[j * n + c].powi(2))
            .sum();
        (sum / self.geom.teeth() as f64).sqrt()
    }
}

/// Runs the scheme to `t_end`, storing the initial state and every
/// `snapshot_stride`-th step (the final step is always stored).
pub fn run(config: &GapToothConfig, snapshot_stride: usize) -> Result<Trajectory> {
    let stepper = Stepper::new(config)?;
    let dt = stepper.dt();
    let steps = (config.t_end / dt).ceil() as u64;
    let stride = snapshot_stride.max(1) as u64;
    let mut state = config.initial_state();
    let mut snapshots = Vec::with_capacity((steps / stride + 2) as usize);
    snapshots.push(Snapshot {
        t: state.time(),
        values: state.values().to_vec(),
    });
    for s in 1..=steps {
        stepper.step(&mut state)?;
        if s % stride == 0 || s == steps {
            snapshots.push(Snapshot {
                t: state.time(),
                values: state.values().to_vec(),
            });
        }
    }
    Ok(Trajectory {
        geom: config.geom,
        snapshots,
    })
}

/// Least-squares slope of `ln rms(macro)` against time over snapshots with
/// `t0 <= t <= t1`; `None` when fewer than two usable snapshots exist.
pub fn fitted_decay_rate(traj: &Trajectory, t0: f64, t1: f64) -> Option<f64> {
    let points: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.t >= t0 && s.t <= t1)
        .filter_map(|(idx, s)| {
            let rms = traj.macro_rms(idx);
            (rms > 0.0).then(|| (s.t, rms.ln()))
        })
        .collect();
    if points.len() < 2 {
        return None;
    }
    let len = points.len() as f64;
    let t_mean = points.iter().map(|(t, _)| t).sum::<f64>() / len;
    let y_mean = points.iter().map(|(_, y)| y).sum::<f64>() / len;
    let cov: f64 = points
        .iter()
        .map(|(t, y)| (t - t_mean) * (y - y_mean))
        .sum();
    let var: f64 = points.iter().map(|(t, _)| (t - t_mean).powi(2)).sum();
    (var > 0.0).then(|| cov / var)
}

/// Worst deviation of the micro field from the order-`2p` interpolant of
/// the current macro values, over all teeth and micro points.
///
/// Healthy gap-tooth dynamics pull this residual down as the in-tooth
/// transients decay, leaving a field slaved to the macro scale.
pub fn macro_interpolant_residual(
    state: &MicroState,
    geom: &ToothGeometry,
    p: usize,
) -> Result<f64> {
    let macros = state.macro_values();
    let m = geom.teeth() as isize;
    let eta_over_h = geom.micro_spacing() / geom.h_macro();
    let c = geom.center_index();
    let mut worst = 0.0f64;
    for i in 0..geom.micro_points() {
        let fraction = (i as isize - c as isize) as f64 * eta_over_h;
        let side = if fraction < 0.0 {
            Side::Left
        } else {
            Side::Right
        };
        let w = interp_weights(fraction.abs(), p, side)?;
        for j in 0..m {
            let predicted = w.apply(|k| macros[(j + k).rem_euclid(m) as usize]);
            let actual = state.get(j as usize, i);
            worst = worst.max((actual - predicted).abs());
        }
    }
    Ok(worst)
}
