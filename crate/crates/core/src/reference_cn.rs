//! Crank-Nicolson reference solver on a truncated box with hard walls.
//!
//! Second-order differences in space, trapezoidal rule in time, potential
//! sampled at the mid-step time. By default `V(0) = U` (the surface node
//! belongs to the vacuum), which makes the scheme first order in `dx`;
//! [`SurfaceNode::Midpoint`] uses `U/2` there and restores second order.
//! Only meant for cross-checking the boundary solver over a few periods.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::units::PhysicalConfig;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Extra box length beyond the `2 k t` free-flight estimate.
pub const BOX_MARGIN: f64 = 10.0;

/// Starting state of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// Continuum stationary state sampled at the nodes.
    Sampled,
    /// Stationary state of the discrete operator at the same energy; exactly
    /// stationary on the grid when the field is off.
    DiscreteStationary,
    /// Free Gaussian `exp(-(x-x0)^2/(4 sigma^2) + i k x)`; runs without any
    /// potential.
    Gaussian { center: f64, sigma: f64, momentum: f64 },
}

/// Value of the step potential at the surface node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurfaceNode {
    /// `V(0) = U`.
    #[default]
    Vacuum,
    /// `V(0) = U/2`.
    Midpoint,
}

impl SurfaceNode {
    fn weight(self) -> f64 {
        match self {
            SurfaceNode::Vacuum => 1.0,
            SurfaceNode::Midpoint => 0.5,
        }
    }
}

/// Uniform grid on `[-a, a]` with Dirichlet walls and a fixed time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnGrid {
    pub half_width: f64,
    pub dx: f64,
    pub dt: f64,
}

impl Default for CnGrid {
    fn default() -> Self {
        CnGrid {
            half_width: 160.0,
            dx: 0.02,
            dt: 2e-4,
        }
    }
}

impl CnGrid {
    pub fn new(half_width: f64, dx: f64, dt: f64) -> Result<Self> {
        for (name, v) in [("half_width", half_width), ("dx", dx), ("dt", dt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("{v} must be positive")));
            }
        }
        let cells = half_width / dx;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::validation("dx", format!("a/dx = {cells} is not an integer")));
        }
        if cells.round() < 4.0 {
            return Err(Error::validation("dx", "need at least four cells per half box"));
        }
        Ok(CnGrid { half_width, dx, dt })
    }

    /// Cells on each side of the surface.
    pub fn cells(&self) -> usize {
        (self.half_width / self.dx).round() as usize
    }

    /// Node count including both walls.
    pub fn points(&self) -> usize {
        2 * self.cells() + 1
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - self.cells() as f64) * self.dx
    }

    /// Moves the left wall onto the node of the initial standing wave nearest
    /// to `half_width`, adjusting `dx` by less than one cell per box.
    pub fn aligned(&self, config: &PhysicalConfig, initial: InitialState, surface: SurfaceNode) -> Result<CnGrid> {
        if let InitialState::Gaussian { .. } = initial {
            return Ok(*self);
        }
        let mut dx = self.dx;
        let mut a = self.half_width;
        for _ in 0..50 {
            let (kd, ratio) = match initial {
                InitialState::Sampled => (config.k, continuum_reflection(config)),
                _ => discrete_reflection(config, dx, surface)?.0,
            };
            // e^{ikx} + R e^{-ikx} vanishes where k x = arg(R)/2 + pi/2 + n pi.
            let base = 0.5 * ratio.arg() + 0.5 * PI;
            let n = ((-self.half_width * kd - base) / PI).round();
            let node = -(base + n * PI) / kd;
            let cells = (node / self.dx).round().max(4.0);
            let next = node / cells;
            let done = (next - dx).abs() < 1e-15 * dx;
            dx = next;
            a = node;
            if done || initial == InitialState::Sampled {
                break;
            }
        }
        CnGrid::new(a, dx, self.dt)
    }

    /// `a >= 2 k t + margin`: no wall echo reaches the surface by `t`.
    pub fn admits(&self, config: &PhysicalConfig, t_end: f64) -> bool {
        self.half_width >= 2.0 * config.k * t_end + BOX_MARGIN
    }
}

fn continuum_reflection(config: &PhysicalConfig) -> Complex64 {
    let ik = Complex64::new(0.0, config.k);
    let k0 = config.kappa0();
    (ik + k0) / (ik - k0)
}

/// Discrete momentum and reflection ratio, and the decay factor per cell
/// and vacuum amplitude of the discrete stationary state at `k^2/2`.
fn discrete_reflection(
    config: &PhysicalConfig,
    dx: f64,
    surface: SurfaceNode,
) -> Result<((f64, Complex64), (f64, Complex64))> {
    let energy = 0.5 * config.k * config.k;
    let c = 1.0 - energy * dx * dx;
    if c <= -1.0 {
        return Err(Error::validation("dx", "grid cannot carry the incoming momentum"));
    }
    let kd = c.acos() / dx;
    let decay = 1.0 + (config.u - energy) * dx * dx;
    let q = decay - (decay * decay - 1.0).sqrt();
    // psi_j = e^{i kd j dx} + R e^{-i kd j dx} (j <= 0), T q^j (j >= 0),
    // T = 1 + R, and the equation at j = 0 with V(0) = w U.
    let e = Complex64::from_polar(1.0, kd * dx);
    let a = q - 2.0 - 2.0 * dx * dx * (surface.weight() * config.u - energy);
    let r = -(a + 1.0 / e) / (a + e);
    Ok(((kd, r), (q, 1.0 + r)))
}

/// Options for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct CnOptions {
    pub initial: InitialState,
    pub surface: SurfaceNode,
    /// Record the surface current every this many steps.
    pub sample_every: usize,
    /// Record every step before this time.
    pub dense_until: f64,
    /// Times at which the full field is stored.
    pub snapshots: Vec<f64>,
    /// Deviation at `|x| = 0.9 a` above which the run is flagged.
    pub probe_threshold: f64,
}

impl Default for CnOptions {
    fn default() -> Self {
        CnOptions {
            initial: InitialState::Sampled,
            surface: SurfaceNode::Vacuum,
            sample_every: 50,
            dense_until: 0.25,
            snapshots: Vec::new(),
            probe_threshold: 1e-2,
        }
    }
}

/// Result of a run.
#[derive(Debug, Clone)]
pub struct CnRun {
    pub grid: CnGrid,
    pub times: Vec<f64>,
    /// `j(0, t)` from the centred difference at the surface node.
    pub current: Vec<f64>,
    /// `(t, psi)` at the requested snapshot times (nearest step).
    pub snapshots: Vec<(f64, Vec<Complex64>)>,
    pub initial_norm: f64,
    pub final_norm: f64,
    /// Set when a probe near a wall saw the wave move.
    pub warning: Option<String>,
}

impl CnRun {
    pub fn norm_drift(&self) -> f64 {
        (self.final_norm - self.initial_norm).abs() / self.initial_norm
    }

    /// Standard deviation of `|psi|^2` on the grid.
    pub fn width(&self, psi: &[Complex64]) -> f64 {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (j, p) in psi.iter().enumerate() {
            let w = p.norm_sqr();
            let x = self.grid.x(j);
            m0 += w;
            m1 += w * x;
            m2 += w * x * x;
        }
        let mean = m1 / m0;
        (m2 / m0 - mean * mean).sqrt()
    }

    pub fn write_csv(&self, out: &mut impl Write, config: &PhysicalConfig) -> std::io::Result<()> {
        writeln!(out, "t_au,t_over_period,j_over_k_cn")?;
        for (t, j) in self.times.iter().zip(&self.current) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", t, t / config.period, j / config.k)?;
        }
        Ok(())
    }

    pub fn write_snapshot(&self, out: &mut impl Write, index: usize) -> std::io::Result<()> {
        writeln!(out, "x_au,re_psi,im_psi")?;
        for (j, p) in self.snapshots[index].1.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.grid.x(j), p.re, p.im)?;
        }
        Ok(())
    }
}

fn initial_state(
    config: &PhysicalConfig,
    grid: &CnGrid,
    initial: InitialState,
    surface: SurfaceNode,
) -> Result<Vec<Complex64>> {
    let n = grid.points();
    let c = grid.cells();
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    match initial {
        InitialState::Sampled => {
            let r = continuum_reflection(config);
            let t = 1.0 + r;
            for (j, p) in psi.iter_mut().enumerate() {
                let x = grid.x(j);
                *p = if j < c {
                    Complex64::from_polar(1.0, config.k * x) + r * Complex64::from_polar(1.0, -config.k * x)
                } else {
                    t * (-config.kappa0() * x).exp()
                };
            }
        }
        InitialState::DiscreteStationary => {
            let ((kd, r), (q, t)) = discrete_reflection(config, grid.dx, surface)?;
            for (j, p) in psi.iter_mut().enumerate() {
                let x = grid.x(j);
                *p = if j < c {
                    Complex64::from_polar(1.0, kd * x) + r * Complex64::from_polar(1.0, -kd * x)
                } else {
                    t * q.powi((j - c) as i32)
                };
            }
        }
        InitialState::Gaussian { center, sigma, momentum } => {
            for (j, p) in psi.iter_mut().enumerate() {
                let x = grid.x(j) - center;
                *p = Complex64::from_polar((-x * x / (4.0 * sigma * sigma)).exp(), momentum * grid.x(j));
            }
        }
    }
    psi[0] = Complex64::new(0.0, 0.0);
    psi[n - 1] = Complex64::new(0.0, 0.0);
    Ok(psi)
}

fn norm(psi: &[Complex64], dx: f64) -> f64 {
    (psi.iter().map(|p| p.norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// Evolves to `t_end` and records `j(0, t)`.
pub fn cn_evolve(config: &PhysicalConfig, grid: &CnGrid, t_end: f64, options: &CnOptions) -> Result<CnRun> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::validation("t_end", format!("{t_end} must be non-negative")));
    }
    if options.sample_every == 0 {
        return Err(Error::validation("sample_every", "must be at least 1"));
    }
    let free = matches!(options.initial, InitialState::Gaussian { .. });
    if !free && !grid.admits(config, t_end) {
        return Err(Error::validation(
            "half_width",
            format!(
                "a = {} is below 2 k t + {BOX_MARGIN} = {}",
                grid.half_width,
                2.0 * config.k * t_end + BOX_MARGIN
            ),
        ));
    }
    let n = grid.points();
    let c = grid.cells();
    let (dx, dt) = (grid.dx, grid.dt);
    let steps = (t_end / dt).round() as usize;
    let mut psi = initial_state(config, grid, options.initial, options.surface)?;
    let initial_norm = norm(&psi, dx);
    let energy = 0.5 * config.k * config.k;

    let probes = [(n as f64 * 0.05).round() as usize, n - 1 - (n as f64 * 0.05).round() as usize];
    let probe0: Vec<Complex64> = probes.iter().map(|&j| psi[j]).collect();

    // Off-diagonal of (1 + i dt H / 2) is -i beta; its diagonal is 1 + i h_j.
    let beta = dt / (4.0 * dx * dx);
    let h_kin = 0.5 * dt / (dx * dx);
    let xs: Vec<f64> = (0..n).map(|j| grid.x(j)).collect();
    let first = if free { 1 } else { c };
    let surface_u = options.surface.weight() * config.u;
    // Forward elimination on the metal side never changes.
    let mut inv = vec![Complex64::new(0.0, 0.0); n];
    let mut cp = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..first {
        let mut denom = Complex64::new(1.0, h_kin);
        if j > 1 {
            denom += I * beta * cp[j - 1];
        }
        inv[j] = 1.0 / denom;
        cp[j] = -I * beta * inv[j];
    }

    let current_at = |psi: &[Complex64]| (psi[c].conj() * (psi[c + 1] - psi[c - 1])).im / (2.0 * dx);
    let mut times = vec![0.0];
    let mut current = vec![current_at(&psi)];
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = options.snapshots.clone();
    pending.sort_by(|a, b| a.total_cmp(b));
    let mut next_snap = 0;
    while next_snap < pending.len() && pending[next_snap] <= 0.5 * dt {
        snapshots.push((0.0, psi.clone()));
        next_snap += 1;
    }

    let mut dp = vec![Complex64::new(0.0, 0.0); n];
    let mut warning = None;
    for step in 0..steps {
        let t = step as f64 * dt;
        let drive = config.field * (config.omega * (t + 0.5 * dt)).cos();
        let h_at = |j: usize| {
            if j < first || free {
                h_kin
            } else if j == c {
                h_kin + 0.5 * dt * surface_u
            } else {
                h_kin + 0.5 * dt * (config.u - drive * xs[j])
            }
        };
        for j in first..n - 1 {
            let mut denom = Complex64::new(1.0, h_at(j));
            if j > 1 {
                denom += I * beta * cp[j - 1];
            }
            inv[j] = 1.0 / denom;
            cp[j] = -I * beta * inv[j];
        }
        let mut prev = Complex64::new(0.0, 0.0);
        for j in 1..n - 1 {
            let rhs = Complex64::new(1.0, -h_at(j)) * psi[j] + I * beta * (psi[j - 1] + psi[j + 1]);
            prev = (rhs + I * beta * prev) * inv[j];
            dp[j] = prev;
        }
        psi[n - 2] = dp[n - 2];
        for j in (1..n - 2).rev() {
            psi[j] = dp[j] - cp[j] * psi[j + 1];
        }
        let t_new = (step + 1) as f64 * dt;
        if (step + 1) % options.sample_every == 0 || step + 1 == steps || t_new < options.dense_until {
            times.push(t_new);
            current.push(current_at(&psi));
        }
        while next_snap < pending.len() && pending[next_snap] <= t_new + 0.5 * dt {
            snapshots.push((t_new, psi.clone()));
            next_snap += 1;
        }
        if warning.is_none() && (step + 1) % 1000 == 0 && !free {
            let phase = Complex64::from_polar(1.0, -energy * t_new);
            for (p, &j) in probes.iter().enumerate() {
                let dev = (psi[j] - probe0[p] * phase).norm();
                if dev > options.probe_threshold {
                    warning = Some(format!(
                        "wave reached the probe at x = {:.1} (deviation {dev:.2e} at t = {t_new:.2})",
                        grid.x(j)
                    ));
                }
            }
        }
    }
    let final_norm = norm(&psi, dx);
    Ok(CnRun {
        grid: *grid,
        times,
        current,
        snapshots,
        initial_norm,
        final_norm,
        warning,
    })
}
