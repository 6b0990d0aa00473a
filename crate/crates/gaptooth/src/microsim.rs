//! Tooth geometry and the in-tooth microsimulator.
//!
//! Each of the `m` teeth covers a short interval centred on a macroscopic
//! grid point and carries `n` equispaced micro points; the centre point
//! doubles as the macroscopic value.  The interior points advance with an
//! explicit three-point step, while the two edge points are set each step
//! from boundary targets interpolated across the gaps (see
//! [`crate::coupling`]).

use crate::stencil::{TbcFamily, TbcSpec};
use crate::{Error, Result};

/// Periodic arrangement of teeth on the macroscopic grid.
///
/// The domain has length `L` (default `2 pi`) and macro spacing
/// `H = L / m`.  A tooth centred on `X_j = j H` spans `[X_j - rH, X_j + rH]`,
/// so its width is `h = 2 r H` and its micro spacing `eta = h / (n - 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToothGeometry {
    m: usize,
    n: usize,
    r: f64,
    domain_length: f64,
}

impl ToothGeometry {
    /// Geometry on the default domain of length `2 pi`.
    pub fn new(m: usize, n: usize, r: f64) -> Result<Self> {
        Self::with_domain_length(m, n, r, std::f64::consts::TAU)
    }

    pub fn with_domain_length(m: usize, n: usize, r: f64, domain_length: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::config("geometry.teeth", "need at least one tooth"));
        }
        if n < 5 || n.is_multiple_of(2) {
            return Err(Error::config(
                "geometry.micro_points",
                format!("micro point count must be odd and >= 5, got {n}"),
            ));
        }
        if !r.is_finite() || r <= 0.0 || r >= 0.5 {
            return Err(Error::config(
                "geometry.ratio",
                format!("gap-to-tooth ratio must lie in (0, 0.5), got {r}"),
            ));
        }
        if !domain_length.is_finite() || domain_length <= 0.0 {
            return Err(Error::config(
                "geometry.domain_length",
                format!("domain length must be positive, got {domain_length}"),
            ));
        }
        Ok(ToothGeometry {
            m,
            n,
            r,
            domain_length,
        })
    }

    pub fn teeth(&self) -> usize {
        self.m
    }

    pub fn micro_points(&self) -> usize {
        self.n
    }

    pub fn ratio(&self) -> f64 {
        self.r
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    /// Macro spacing `H = L / m`.
    pub fn h_macro(&self) -> f64 {
        self.domain_length / self.m as f64
    }

    /// Tooth width `h = 2 r H`.
    pub fn tooth_width(&self) -> f64 {
        2.0 * self.r * self.h_macro()
    }

    /// Micro spacing `eta = h / (n - 1)`.
    pub fn micro_spacing(&self) -> f64 {
        self.tooth_width() / (self.n - 1) as f64
    }

    /// Centre coordinate of tooth `j`.
    pub fn center(&self, j: usize) -> f64 {
        j as f64 * self.h_macro()
    }

    /// Coordinate of micro point `i` in tooth `j`.
    pub fn micro_x(&self, j: usize, i: usize) -> f64 {
        self.center(j) - self.r * self.h_macro() + i as f64 * self.micro_spacing()
    }

    /// Index of the centre micro point, `(n - 1) / 2`.
    pub fn center_index(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Edge fraction of the micro point next to an edge:
    /// `r' = (r H - eta) / H = r (n - 3) / (n - 1)`.
    pub fn inner_fraction(&self) -> f64 {
        self.r * (self.n - 3) as f64 / (self.n - 1) as f64
    }
}

/// Microscale dynamics inside the teeth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PdeChoice {
    /// `u_t = u_xx`
    Diffusion,
    /// `u_t = nu u_xx - u u_x`
    Burgers { nu: f64 },
}

impl PdeChoice {
    pub fn validate(&self) -> Result<()> {
        if let PdeChoice::Burgers { nu } = self {
            if !nu.is_finite() || *nu <= 0.0 {
                return Err(Error::config(
                    "pde.nu",
                    format!("viscosity must be positive, got {nu}"),
                ));
            }
        }
        Ok(())
    }

    /// Diffusivity of the linearisation about the zero state.
    pub fn linear_diffusivity(&self) -> f64 {
        match self {
            PdeChoice::Diffusion => 1.0,
            PdeChoice::Burgers { nu } => *nu,
        }
    }
}

/// Default simulation step: `min(1e-4, 0.25 eta^2 / max(1, nu))`.
pub fn default_dt(geom: &ToothGeometry, pde: &PdeChoice) -> f64 {
    let eta = geom.micro_spacing();
    (0.25 * eta * eta / pde.linear_diffusivity().max(1.0)).min(1e-4)
}

/// Largest step the explicit diffusive term tolerates, `0.5 eta^2 / nu`.
pub fn stable_dt_bound(geom: &ToothGeometry, pde: &PdeChoice) -> f64 {
    let eta = geom.micro_spacing();
    0.5 * eta * eta / pde.linear_diffusivity()
}

/// The micro field of all teeth at one time, stored row per tooth.
#[derive(Clone, Debug, PartialEq)]
pub struct MicroState {
    m: usize,
    n: usize,
    /// Micro value of point `i` in tooth `j` at flat index `j * n + i`.
    v: Vec<f64>,
    t: f64,
}

impl MicroState {
    pub fn zeros(geom: &ToothGeometry) -> Self {
        MicroState {
            m: geom.teeth(),
            n: geom.micro_points(),
            v: vec![0.0; geom.teeth() * geom.micro_points()],
            t: 0.0,
        }
    }

    /// Builds a state by sampling `f(j, i, x)` at every micro point.
    pub fn from_fn(geom: &ToothGeometry, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let mut state = Self::zeros(geom);
        for j in 0..state.m {
            for i in 0..state.n {
                state.v[j * state.n + i] = f(j, i, geom.micro_x(j, i));
            }
        }
        state
    }

    pub fn teeth(&self) -> usize {
        self.m
    }

    pub fn micro_points(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    pub fn advance_time(&mut self, dt: f64) {
        self.t += dt;
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.v[j * self.n + i]
    }

    pub fn set(&mut self, j: usize, i: usize, value: f64) {
        self.v[j * self.n + i] = value;
    }

    /// Flattened view, tooth-major (`j * n + i`).
    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }

    /// Macroscopic field: the centre micro value of each tooth.
    pub fn macro_values(&self) -> Vec<f64> {
        let c = (self.n - 1) / 2;
        (0..self.m).map(|j| self.v[j * self.n + c]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |acc, v| v.abs().max(acc))
    }

    fn check_finite(&self) -> Result<()> {
        for (idx, v) in self.v.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Diverged {
                    tooth: idx / self.n,
                    index: idx % self.n,
                    t: self.t,
                });
            }
        }
        Ok(())
    }
}

/// Advances the interior micro points of every tooth by one explicit step.
///
/// Edge points are left untouched; they belong to [`apply_tbc`].  Fails
/// with [`Error::Diverged`] as soon as any micro value becomes non-finite.
pub fn interior_step(
    state: &mut MicroState,
    geom: &ToothGeometry,
    pde: &PdeChoice,
    dt: f64,
) -> Result<()> {
    match pde {
        PdeChoice::Diffusion => diffusion_interior_step(state, geom, 1.0, dt),
        PdeChoice::Burgers { nu } => burgers_interior_step(state, geom, *nu, dt),
    }
}

/// Explicit step of `u_t = kappa u_xx` on the tooth interiors.
///
/// Shared by [`PdeChoice::Diffusion`] and the linearisation of Burgers flow
/// about the zero state, whose Jacobian is exactly this map with
/// `kappa = nu`.
pub(crate) fn diffusion_interior_step(
    state: &mut MicroState,
    geom: &ToothGeometry,
    kappa: f64,
    dt: f64,
) -> Result<()> {
    debug_assert_eq!(state.m, geom.teeth());
    let eta = geom.micro_spacing();
    let c = dt * kappa / (eta * eta);
    let n = state.n;
    for row in state.v.chunks_exact_mut(n) {
        let mut prev = row[0];
        for i in 1..n - 1 {
            let cur = row[i];
            row[i] = cur + c * (row[i + 1] - 2.0 * cur + prev);
            prev = cur;
        }
    }
    state.check_finite()
}

fn burgers_interior_step(
    state: &mut MicroState,
    geom: &ToothGeometry,
    nu: f64,
    dt: f64,
) -> Result<()> {
    debug_assert_eq!(state.m, geom.teeth());
    let eta = geom.micro_spacing();
    let diffuse = dt * nu / (eta * eta);
    let advect = dt / (2.0 * eta);
    let n = state.n;
    for row in state.v.chunks_exact_mut(n) {
        let mut prev = row[0];
        for i in 1..n - 1 {
            let cur = row[i];
            let next = row[i + 1];
            row[i] = cur + diffuse * (next - 2.0 * cur + prev) - advect * cur * (next - prev);
            prev = cur;
        }
    }
    state.check_finite()
}

/// Sets the two edge points of every tooth from the boundary targets
/// `(left, right)`, resolving the constrained micro combination of the
/// boundary condition family.
///
/// The mixed family solves `a v + b dv/dn = g` for the edge value using the
/// second-order one-sided three-point derivative; its pivot
/// `a + 3b / (2 eta)` must be safely nonzero.
pub fn apply_tbc(
    state: &mut MicroState,
    geom: &ToothGeometry,
    spec: &TbcSpec,
    targets: &[(f64, f64)],
) -> Result<()> {
    assert_eq!(
        targets.len(),
        state.m,
        "one (left, right) target pair per tooth"
    );
    let n = state.n;
    match spec.family {
        TbcFamily::Dirichlet => {
            for (row, &(left, right)) in state.v.chunks_exact_mut(n).zip(targets) {
                row[0] = left;
                row[n - 1] = right;
            }
        }
        TbcFamily::Mixed { a, b } => {
            let eta = geom.micro_spacing();
            let slope = b / (2.0 * eta);
            let pivot = a + 3.0 * slope;
            if pivot.abs() <= 1e-12 * (a.abs() + (3.0 * slope).abs()) {
                return Err(Error::SingularTbc { pivot });
            }
            for (row, &(left, right)) in state.v.chunks_exact_mut(n).zip(targets) {
                // Left edge: a v0 - b (-3 v0 + 4 v1 - v2) / (2 eta) = g.
                row[0] = (left + slope * (4.0 * row[1] - row[2])) / pivot;
                // Right edge, mirrored.
                row[n - 1] = (right + slope * (4.0 * row[n - 2] - row[n - 3])) / pivot;
            }
        }
        TbcFamily::TwoPoint { beta } => {
            for (row, &(left, right)) in state.v.chunks_exact_mut(n).zip(targets) {
                row[0] = left - beta * row[1];
                row[n - 1] = right - beta * row[n - 2];
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::TbcFamily;

    fn geom_16_11() -> ToothGeometry {
        ToothGeometry::new(16, 11, 0.1).unwrap()
    }

    #[test]
    fn spacing_follows_from_ratio_and_macro_step() {
        let g = geom_16_11();
        let h_macro = std::f64::consts::TAU / 16.0;
        assert!((g.h_macro() - h_macro).abs() < 1e-15);
        assert!((g.tooth_width() - 0.2 * h_macro).abs() < 1e-15);
        assert!((g.micro_spacing() - 0.02 * h_macro).abs() < 1e-15);
        assert_eq!(g.center_index(), 5);
        assert!((g.micro_x(3, 5) - g.center(3)).abs() < 1e-15);
        assert!((g.micro_x(3, 0) - (g.center(3) - 0.1 * h_macro)).abs() < 1e-15);
        assert!((g.inner_fraction() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_geometry() {
        assert!(ToothGeometry::new(0, 11, 0.1).is_err());
        assert!(ToothGeometry::new(8, 10, 0.1).is_err());
        assert!(ToothGeometry::new(8, 3, 0.1).is_err());
        assert!(ToothGeometry::new(8, 11, 0.0).is_err());
        assert!(ToothGeometry::new(8, 11, 0.5).is_err());
        assert!(ToothGeometry::with_domain_length(8, 11, 0.1, 0.0).is_err());
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let g = geom_16_11();
        let mut s = MicroState::zeros(&g);
        for pde in [PdeChoice::Diffusion, PdeChoice::Burgers { nu: 2.0 }] {
            interior_step(&mut s, &g, &pde, 1e-5).unwrap();
            assert_eq!(s.max_abs(), 0.0);
        }
        let targets = vec![(0.0, 0.0); g.teeth()];
        for family in [
            TbcFamily::Dirichlet,
            TbcFamily::Mixed { a: 0.95, b: 0.05 },
            TbcFamily::TwoPoint { beta: 1.0 },
        ] {
            let spec = TbcSpec { family, order: 4 };
            apply_tbc(&mut s, &g, &spec, &targets).unwrap();
            assert_eq!(s.max_abs(), 0.0);
        }
    }

    #[test]
    fn constant_rows_are_unmoved_by_diffusion() {
        let g = geom_16_11();
        let mut s = MicroState::from_fn(&g, |_, _, _| 3.25);
        interior_step(&mut s, &g, &PdeChoice::Diffusion, 2e-6).unwrap();
        for v in s.values() {
            assert_eq!(*v, 3.25);
        }
    }

    #[test]
    fn single_point_response_matches_stencil() {
        let g = geom_16_11();
        let dt = 1e-6;
        let eta = g.micro_spacing();
        let c = dt / (eta * eta);
        let mut s = MicroState::zeros(&g);
        s.set(4, 5, 1.0);
        interior_step(&mut s, &g, &PdeChoice::Diffusion, dt).unwrap();
        assert!((s.get(4, 5) - (1.0 - 2.0 * c)).abs() < 1e-15);
        assert!((s.get(4, 4) - c).abs() < 1e-15);
        assert!((s.get(4, 6) - c).abs() < 1e-15);
        assert_eq!(s.get(4, 3), 0.0);
        assert_eq!(s.get(3, 5), 0.0);
    }

    #[test]
    fn burgers_advects_a_linear_profile() {
        let g = geom_16_11();
        let dt = 1e-6;
        let mut s = MicroState::from_fn(&g, |_, _, x| x);
        burgers_interior_step(&mut s, &g, 1.0, dt).unwrap();
        for j in [0, 7] {
            for i in 2..g.micro_points() - 2 {
                let x = g.micro_x(j, i);
                // Diffusion of a linear profile vanishes; advection leaves
                // u_t = -u u_x = -x.
                assert!((s.get(j, i) - (x - dt * x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dirichlet_targets_land_on_edges() {
        let g = geom_16_11();
        let mut s = MicroState::zeros(&g);
        let spec = TbcSpec {
            family: TbcFamily::Dirichlet,
            order: 4,
        };
        let targets: Vec<(f64, f64)> = (0..g.teeth()).map(|j| (j as f64, -(j as f64))).collect();
        apply_tbc(&mut s, &g, &spec, &targets).unwrap();
        for j in 0..g.teeth() {
            assert_eq!(s.get(j, 0), j as f64);
            assert_eq!(s.get(j, g.micro_points() - 1), -(j as f64));
        }
    }

    #[test]
    fn mixed_with_pure_value_matches_dirichlet() {
        let g = geom_16_11();
        let spec = TbcSpec {
            family: TbcFamily::Mixed { a: 1.0, b: 0.0 },
            order: 4,
        };
        let mut s = MicroState::from_fn(&g, |j, i, _| (j + i) as f64 * 0.01);
        let targets = vec![(2.5, -1.5); g.teeth()];
        apply_tbc(&mut s, &g, &spec, &targets).unwrap();
        for j in 0..g.teeth() {
            assert_eq!(s.get(j, 0), 2.5);
            assert_eq!(s.get(j, g.micro_points() - 1), -1.5);
        }
    }

    #[test]
    fn mixed_edge_recovers_quadratic_data() {
        // The one-sided three-point derivative is exact on quadratics, so
        // prescribing a v + b dv/dn of a quadratic must reproduce its edge
        // value exactly.
        let g = geom_16_11();
        let (a, b) = (0.95, 0.05);
        let spec = TbcSpec {
            family: TbcFamily::Mixed { a, b },
            order: 4,
        };
        let q = |x: f64| 2.0 + 3.0 * x + 4.0 * x * x;
        let dq = |x: f64| 3.0 + 8.0 * x;
        let mut s = MicroState::from_fn(&g, |_, _, x| q(x));
        let n = g.micro_points();
        let targets: Vec<(f64, f64)> = (0..g.teeth())
            .map(|j| {
                let xl = g.micro_x(j, 0);
                let xr = g.micro_x(j, n - 1);
                (a * q(xl) - b * dq(xl), a * q(xr) + b * dq(xr))
            })
            .collect();
        // Corrupt the edges; apply_tbc must restore them.
        for j in 0..g.teeth() {
            s.set(j, 0, 99.0);
            s.set(j, n - 1, -99.0);
        }
        apply_tbc(&mut s, &g, &spec, &targets).unwrap();
        for j in 0..g.teeth() {
            assert!((s.get(j, 0) - q(g.micro_x(j, 0))).abs() < 1e-12);
            assert!((s.get(j, n - 1) - q(g.micro_x(j, n - 1))).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_zero_pivot_is_rejected() {
        let g = geom_16_11();
        let eta = g.micro_spacing();
        let b = 0.05;
        let spec = TbcSpec {
            family: TbcFamily::Mixed {
                a: -3.0 * b / (2.0 * eta),
                b,
            },
            order: 4,
        };
        let mut s = MicroState::zeros(&g);
        let targets = vec![(1.0, 1.0); g.teeth()];
        assert!(matches!(
            apply_tbc(&mut s, &g, &spec, &targets),
            Err(Error::SingularTbc { .. })
        ));
    }

    #[test]
    fn two_point_substitution() {
        let g = geom_16_11();
        let spec = TbcSpec {
            family: TbcFamily::TwoPoint { beta: 1.0 },
            order: 4,
        };
        let mut s = MicroState::zeros(&g);
        s.set(0, 1, 0.5);
        let mut targets = vec![(0.0, 0.0); g.teeth()];
        targets[0] = (2.0, 0.0);
        apply_tbc(&mut s, &g, &spec, &targets).unwrap();
        // v0 + beta v1 = 2 with v1 = 0.5 gives v0 = 1.5.
        assert_eq!(s.get(0, 0), 1.5);
    }

    #[test]
    fn divergence_reports_position_and_time() {
        let g = geom_16_11();
        let mut s = MicroState::zeros(&g);
        s.set_time(0.25);
        s.set(2, 4, f64::INFINITY);
        let err = interior_step(&mut s, &g, &PdeChoice::Diffusion, 1e-6).unwrap_err();
        match err {
            Error::Diverged { tooth, index, t } => {
                assert_eq!(tooth, 2);
                assert!((3..=5).contains(&index), "index {index}");
                assert_eq!(t, 0.25);
            }
            other => panic!("expected divergence, got {other}"),
        }
    }

    #[test]
    fn oversized_step_diverges() {
        let g = geom_16_11();
        let dt = 100.0 * stable_dt_bound(&g, &PdeChoice::Diffusion);
        let mut s = MicroState::from_fn(&g, |_, _, x| x.cos());
        let mut failed = false;
        for _ in 0..2000 {
            if interior_step(&mut s, &g, &PdeChoice::Diffusion, dt).is_err() {
                failed = true;
                break;
            }
        }
        assert!(
            failed,
            "explicit step far over the stability bound must blow up"
        );
    }

    #[test]
    fn default_dt_is_capped_and_scaled() {
        let fine = geom_16_11();
        let eta = fine.micro_spacing();
        let expect = 0.25 * eta * eta;
        assert!((default_dt(&fine, &PdeChoice::Diffusion) - expect).abs() < 1e-18);
        // Viscosity above one tightens the step.
        let visc = default_dt(&fine, &PdeChoice::Burgers { nu: 4.0 });
        assert!((visc - expect / 4.0).abs() < 1e-18);
        // A very coarse micro grid is capped by the absolute limit.
        let coarse = ToothGeometry::new(2, 5, 0.4).unwrap();
        assert_eq!(default_dt(&coarse, &PdeChoice::Diffusion), 1e-4);
    }
}
