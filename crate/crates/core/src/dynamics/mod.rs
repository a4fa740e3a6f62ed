//! Split-step evolution of spin ⊗ center-of-mass (⊗ recorder) states.
//!
//! The Hamiltonian is T_CM + V_spin + H_rec: kinetic energy on a periodic
//! 1D grid, the gradient coupling -Sz * (mu_B b) * z between spin and packet
//! position, and an optional coupling of the packet to a small d-level
//! recorder.  Propagation is second-order Strang splitting: half a potential
//! step, a full kinetic step in the Fourier representation, then the other
//! potential half with the non-commuting recorder factors in reversed order.
//!
//! Internally amplitudes are stored as (spin, recorder, z) with z contiguous,
//! so every FFT and every recorder rotation works on whole cache lines.  The
//! public boundary speaks `QState` with factor order (S, CM) or (S, CM, R).

pub mod scenarios;

use crate::error::{Error, Result};
use crate::potential::effective_potential_closed_form;
use crate::shells::closed_shell_config;
use crate::state::{QState, SpaceLabel};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const DRIFT_LIMIT: f64 = 1e-6;
const COARSE_FLOOR: f64 = 8.0;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_points: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_points: 512,
            z_min: -20.0,
            z_max: 20.0,
            dt: 0.005,
            n_steps: 2000,
        }
    }
}

impl GridSpec {
    pub fn spacing(&self) -> f64 {
        (self.z_max - self.z_min) / self.n_points as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let dz = self.spacing();
        (0..self.n_points)
            .map(|i| self.z_min + i as f64 * dz)
            .collect()
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    fn validate(&self) -> Result<()> {
        if self.n_points < 64 || !self.n_points.is_power_of_two() {
            return Err(Error::InvalidInput {
                detail: format!(
                    "grid needs a power-of-two point count >= 64, got {}",
                    self.n_points
                ),
            });
        }
        if !(self.z_max > self.z_min) || !self.z_min.is_finite() || !self.z_max.is_finite() {
            return Err(Error::InvalidInput {
                detail: format!("invalid grid extent [{}, {}]", self.z_min, self.z_max),
            });
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidInput {
                detail: format!("time step must be positive, got {}", self.dt),
            });
        }
        Ok(())
    }
}

/// Initial Gaussian wavepacket: center, position spread, mean momentum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
}

impl Default for PacketSpec {
    fn default() -> Self {
        PacketSpec {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentMode {
    /// No recorder coupling; an attached recorder factor stays inert.
    None,
    /// Coupling lambda * z * X, with X the cyclic-shift generator of the
    /// d-level recorder (Fourier-diagonal, symmetric spectrum).
    LinearRecorder { dim: usize, coupling: f64 },
    /// Recorder levels see the closed-shell effective potential evaluated at
    /// per-level shifted distances |z - x_k * a_mu|; the coupling scale is
    /// the potential gradient near the packet rather than a free parameter.
    PotentialDerived {
        z: u32,
        a_mu: f64,
        truncation: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub mode: EnvironmentMode,
    /// Recorder self-energies, diagonal in the computational basis; empty
    /// means zero spectrum (pure recorder).
    #[serde(default)]
    pub self_energy: Vec<f64>,
}

impl Default for EnvironmentSpec {
    fn default() -> Self {
        EnvironmentSpec {
            mode: EnvironmentMode::None,
            self_energy: Vec::new(),
        }
    }
}

impl EnvironmentSpec {
    pub fn recorder_dim(&self) -> Option<usize> {
        match self.mode {
            EnvironmentMode::None => None,
            EnvironmentMode::LinearRecorder { dim, .. } => Some(dim),
            EnvironmentMode::PotentialDerived { truncation, .. } => Some(truncation),
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.mode {
            EnvironmentMode::None => {
                if !self.self_energy.is_empty() {
                    return Err(Error::InvalidInput {
                        detail: "self-energy given without a recorder".into(),
                    });
                }
            }
            EnvironmentMode::LinearRecorder { dim, coupling } => {
                if *dim < 2 {
                    return Err(Error::InvalidInput {
                        detail: format!("recorder needs at least 2 levels, got {dim}"),
                    });
                }
                if !coupling.is_finite() {
                    return Err(Error::InvalidInput {
                        detail: "recorder coupling must be finite".into(),
                    });
                }
            }
            EnvironmentMode::PotentialDerived {
                z,
                a_mu,
                truncation,
            } => {
                if *truncation < 2 {
                    return Err(Error::InvalidInput {
                        detail: format!("recorder needs at least 2 levels, got {truncation}"),
                    });
                }
                if !(*a_mu > 0.0) || !a_mu.is_finite() {
                    return Err(Error::InvalidInput {
                        detail: format!("length unit must be positive, got {a_mu}"),
                    });
                }
                closed_shell_config(*z)?;
            }
        }
        if let Some(d) = self.recorder_dim() {
            if !self.self_energy.is_empty() && self.self_energy.len() != d {
                return Err(Error::DimensionMismatch {
                    detail: format!(
                        "self-energy has {} entries for a {d}-level recorder",
                        self.self_energy.len()
                    ),
                });
            }
            if self.self_energy.iter().any(|e| !e.is_finite()) {
                return Err(Error::InvalidInput {
                    detail: "self-energy entries must be finite".into(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub mass: f64,
    pub field_gradient: f64,
    pub magneton: f64,
    pub environment: EnvironmentSpec,
}

impl Default for HamiltonianSpec {
    fn default() -> Self {
        HamiltonianSpec {
            mass: 1.0,
            field_gradient: 0.5,
            magneton: 1.0,
            environment: EnvironmentSpec::default(),
        }
    }
}

impl HamiltonianSpec {
    fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidInput {
                detail: format!("mass must be positive, got {}", self.mass),
            });
        }
        if !self.field_gradient.is_finite() || !self.magneton.is_finite() {
            return Err(Error::InvalidInput {
                detail: "field gradient and magneton must be finite".into(),
            });
        }
        self.environment.validate()
    }
}

/// Diagnostic time series sampled during a propagation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub norm: Vec<f64>,
    pub spin_entropy: Vec<f64>,
    pub packet_separation: Vec<f64>,
    pub record_overlap: Vec<f64>,
    pub cm_purity: Vec<f64>,
}

impl RunRecord {
    fn with_capacity(cap: usize) -> Self {
        RunRecord {
            times: Vec::with_capacity(cap),
            norm: Vec::with_capacity(cap),
            spin_entropy: Vec::with_capacity(cap),
            packet_separation: Vec::with_capacity(cap),
            record_overlap: Vec::with_capacity(cap),
            cm_purity: Vec::with_capacity(cap),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, diag: &Diagnostics) {
        self.times.push(t);
        self.norm.push(diag.norm);
        self.spin_entropy.push(diag.spin_entropy);
        self.packet_separation.push(diag.separation);
        self.record_overlap.push(diag.record_overlap);
        self.cm_purity.push(diag.cm_purity);
    }
}

enum Coupling {
    /// No recorder operation at all.
    Off,
    /// Self-energy phases only, diagonal per recorder level.
    Diagonal(Vec<Complex64>),
    /// Dense half-step rotations per grid point, stored as d*d contiguous
    /// z-rows; `first` carries the self-energy factor on the left, `second`
    /// on the right, keeping the split palindromic.
    Full {
        first: Vec<Complex64>,
        second: Vec<Complex64>,
        dim: usize,
    },
}

pub struct Propagator {
    grid: GridSpec,
    packet: PacketSpec,
    mass: f64,
    /// mu_B * b, the spin-dependent force scale.
    gradient_coupling: f64,
    env_dim: Option<usize>,
    spin_half: [Vec<Complex64>; 2],
    kinetic: Vec<Complex64>,
    coupling: Coupling,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("grid", &self.grid)
            .field("packet", &self.packet)
            .field("mass", &self.mass)
            .field("gradient_coupling", &self.gradient_coupling)
            .field("env_dim", &self.env_dim)
            .finish_non_exhaustive()
    }
}

/// Cyclic-shift generator eigenvalues, symmetric around zero.
fn shift_eigenvalues(d: usize) -> Vec<f64> {
    (0..d)
        .map(|k| 2.0 * std::f64::consts::PI * (k as f64 - (d as f64 - 1.0) / 2.0) / d as f64)
        .collect()
}

/// Half-step recorder rotation at one grid point: F^H diag(phases) F, where
/// F is the d-point DFT.  Entry (r, r') = (1/d) sum_k phases[k] w^(k(r-r')).
fn recorder_rotation(phases: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; d * d];
    for r in 0..d {
        for rp in 0..d {
            let mut acc = Complex64::ZERO;
            for (k, ph) in phases.iter().enumerate() {
                let angle =
                    2.0 * std::f64::consts::PI * k as f64 * (r as f64 - rp as f64) / d as f64;
                acc += ph * Complex64::cis(angle);
            }
            out[r * d + rp] = acc / d as f64;
        }
    }
    out
}

impl Propagator {
    pub fn build(grid: &GridSpec, ham: &HamiltonianSpec, packet: &PacketSpec) -> Result<Self> {
        grid.validate()?;
        ham.validate()?;
        if !(packet.width > 0.0) || !packet.width.is_finite() || !packet.center.is_finite() {
            return Err(Error::InvalidInput {
                detail: "packet needs a positive finite width and finite center".into(),
            });
        }
        if packet.center < grid.z_min || packet.center > grid.z_max {
            return Err(Error::InvalidInput {
                detail: format!("packet center {} outside the grid", packet.center),
            });
        }
        let points_per_width = packet.width / grid.spacing();
        if points_per_width < COARSE_FLOOR {
            return Err(Error::GridTooCoarse {
                points_per_width,
                floor: COARSE_FLOOR,
            });
        }

        let n = grid.n_points;
        let z = grid.coordinates();
        let g = ham.magneton * ham.field_gradient;
        // Spin potential -s g z with s = +1/2 for the first spin component,
        // so the up branch is pushed toward +z.
        let spin_half = [
            z.iter()
                .map(|&zi| Complex64::cis(0.25 * grid.dt * g * zi))
                .collect(),
            z.iter()
                .map(|&zi| Complex64::cis(-0.25 * grid.dt * g * zi))
                .collect(),
        ];

        // Unnormalized FFT pair; the 1/n factor rides on the kinetic phase.
        let length = grid.z_max - grid.z_min;
        let kinetic = (0..n)
            .map(|j| {
                let j_signed = if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                let k = 2.0 * std::f64::consts::PI * j_signed / length;
                Complex64::cis(-grid.dt * k * k / (2.0 * ham.mass)) / n as f64
            })
            .collect();

        let env = &ham.environment;
        let coupling = match &env.mode {
            EnvironmentMode::None => Coupling::Off,
            EnvironmentMode::LinearRecorder { dim, coupling } => {
                let d = *dim;
                let self_phases: Vec<Complex64> = if env.self_energy.is_empty() {
                    vec![Complex64::ONE; d]
                } else {
                    env.self_energy
                        .iter()
                        .map(|&e| Complex64::cis(-0.5 * grid.dt * e))
                        .collect()
                };
                if *coupling == 0.0 {
                    if self_phases.iter().all(|p| *p == Complex64::ONE) {
                        Coupling::Off
                    } else {
                        Coupling::Diagonal(self_phases)
                    }
                } else {
                    let x = shift_eigenvalues(d);
                    build_full_coupling(n, d, &self_phases, |zi, buf| {
                        for (k, b) in buf.iter_mut().enumerate() {
                            *b = Complex64::cis(-0.5 * grid.dt * coupling * z[zi] * x[k]);
                        }
                        Ok(())
                    })?
                }
            }
            EnvironmentMode::PotentialDerived {
                z: zq,
                a_mu,
                truncation,
            } => {
                let d = *truncation;
                let self_phases: Vec<Complex64> = if env.self_energy.is_empty() {
                    vec![Complex64::ONE; d]
                } else {
                    env.self_energy
                        .iter()
                        .map(|&e| Complex64::cis(-0.5 * grid.dt * e))
                        .collect()
                };
                let x = shift_eigenvalues(d);
                build_full_coupling(n, d, &self_phases, |zi, buf| {
                    for (k, b) in buf.iter_mut().enumerate() {
                        let distance = (z[zi] - x[k] * a_mu).abs();
                        let v = effective_potential_closed_form(*zq, distance, *a_mu)?;
                        *b = Complex64::cis(-0.5 * grid.dt * v);
                    }
                    Ok(())
                })?
            }
        };

        let mut planner = FftPlanner::new();
        Ok(Propagator {
            grid: *grid,
            packet: *packet,
            mass: ham.mass,
            gradient_coupling: g,
            env_dim: env.recorder_dim(),
            spin_half,
            kinetic,
            coupling,
            fft_fwd: planner.plan_fft_forward(n),
            fft_inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn packet(&self) -> &PacketSpec {
        &self.packet
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// The spin-dependent force scale mu_B * b.
    pub fn gradient_coupling(&self) -> f64 {
        self.gradient_coupling
    }

    pub fn recorder_dim(&self) -> Option<usize> {
        self.env_dim
    }
}

/// Assemble both half-step rotation tables from a per-grid-point phase rule.
fn build_full_coupling(
    n: usize,
    d: usize,
    self_phases: &[Complex64],
    mut phase_rule: impl FnMut(usize, &mut [Complex64]) -> Result<()>,
) -> Result<Coupling> {
    let mut first = vec![Complex64::ZERO; n * d * d];
    let mut second = vec![Complex64::ZERO; n * d * d];
    let mut phases = vec![Complex64::ZERO; d];
    for zi in 0..n {
        phase_rule(zi, &mut phases)?;
        let rot = recorder_rotation(&phases, d);
        for r in 0..d {
            for rp in 0..d {
                let base = (r * d + rp) * n + zi;
                first[base] = self_phases[r] * rot[r * d + rp];
                second[base] = rot[r * d + rp] * self_phases[rp];
            }
        }
    }
    Ok(Coupling::Full {
        first,
        second,
        dim: d,
    })
}

/// Amplitudes in the internal (spin, recorder, z) layout.
struct DynState {
    n: usize,
    d: usize,
    data: Vec<Complex64>,
}

impl DynState {
    fn from_qstate(state: &QState, prop: &Propagator) -> Result<Self> {
        let amps = state.amplitudes().ok_or(Error::KindMismatch {
            detail: "propagation needs a pure state".into(),
        })?;
        let space = state.space();
        let n = prop.grid.n_points;
        let ok_shape = match space.len() {
            2 => space[0].dim == 2 && space[1].dim == n,
            3 => space[0].dim == 2 && space[1].dim == n && space[2].dim >= 1,
            _ => false,
        };
        if !ok_shape {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "state factors {:?} do not match a (2, {n}) or (2, {n}, d) layout",
                    space.iter().map(|l| l.dim).collect::<Vec<_>>()
                ),
            });
        }
        let d = if space.len() == 3 { space[2].dim } else { 1 };
        if let Some(env_d) = prop.env_dim {
            if d != env_d {
                return Err(Error::DimensionMismatch {
                    detail: format!("recorder factor has dim {d}, coupling expects {env_d}"),
                });
            }
        }
        let mut data = vec![Complex64::ZERO; 2 * d * n];
        for s in 0..2 {
            for zi in 0..n {
                for r in 0..d {
                    data[(s * d + r) * n + zi] = amps[(s * n + zi) * d + r];
                }
            }
        }
        Ok(DynState { n, d, data })
    }

    /// Back to the public factor order; renormalizes away residual drift so
    /// the result satisfies the state invariants (the drift itself is
    /// reported in the norm series).
    fn to_qstate(&self, space: &[SpaceLabel]) -> Result<QState> {
        let norm = self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut amps = vec![Complex64::ZERO; self.data.len()];
        for s in 0..2 {
            for zi in 0..self.n {
                for r in 0..self.d {
                    amps[(s * self.n + zi) * self.d + r] =
                        self.data[(s * self.d + r) * self.n + zi] / norm;
                }
            }
        }
        QState::pure(space.to_vec(), amps)
    }

    // Sequential on purpose: a parallel reduction would round differently
    // from run to run and the result lands in recorded output.
    fn norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Diagnostics {
    norm: f64,
    spin_entropy: f64,
    separation: f64,
    record_overlap: f64,
    cm_purity: f64,
    mean_width: f64,
    offdiag_norm: f64,
    r_ground_fidelity: f64,
}

fn entropy_from_eigen(mut l1: f64, mut l2: f64) -> f64 {
    let total = l1 + l2;
    if total <= 0.0 {
        return 0.0;
    }
    l1 = (l1 / total).max(0.0);
    l2 = (l2 / total).max(0.0);
    let mut s = 0.0;
    for l in [l1, l2] {
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    s
}

fn diagnostics(st: &DynState, z: &[f64]) -> Diagnostics {
    let (n, d) = (st.n, st.d);
    let line = |s: usize, r: usize| &st.data[(s * d + r) * n..(s * d + r + 1) * n];

    // Per-branch recorder Gram matrices G_s[r, r'] = <line(s,r') | line(s,r)>
    // conjugated so G_s is the reduced recorder density of branch s.
    let gram = |s: usize| -> Vec<Complex64> {
        let mut g = vec![Complex64::ZERO; d * d];
        for r in 0..d {
            for rp in r..d {
                let mut acc = Complex64::ZERO;
                let (a, b) = (line(s, r), line(s, rp));
                for zi in 0..n {
                    acc += a[zi] * b[zi].conj();
                }
                g[r * d + rp] = acc;
                g[rp * d + r] = acc.conj();
            }
        }
        g
    };
    let g_up = gram(0);
    let g_dn = gram(1);

    let frob_sq = |g: &[Complex64]| -> f64 { g.iter().map(|x| x.norm_sqr()).sum() };
    let cross = |a: &[Complex64], b: &[Complex64]| -> f64 {
        // Tr(A B) for Hermitian PSD factors; real and nonnegative.
        a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum()
    };

    let norm_sq: f64 = st.norm_sq();
    let tr_uu = frob_sq(&g_up);
    let tr_dd = frob_sq(&g_dn);
    let tr_ud = cross(&g_up, &g_dn).max(0.0);

    let record_overlap = if tr_uu * tr_dd < 1e-60 {
        1.0
    } else {
        (tr_ud / (tr_uu * tr_dd).sqrt()).sqrt()
    };
    let offdiag_norm = tr_ud.sqrt() / norm_sq;
    let cm_purity = {
        let mut sum = 0.0;
        for i in 0..d * d {
            sum += (g_up[i] + g_dn[i]).norm_sqr();
        }
        sum / (norm_sq * norm_sq)
    };
    let r_ground_fidelity = (g_up[0].re + g_dn[0].re) / norm_sq;

    // Branch populations, positions, widths.
    let mut p = [0.0f64; 2];
    let mut zbar = [0.0f64; 2];
    let mut z2bar = [0.0f64; 2];
    for s in 0..2 {
        for r in 0..d {
            let l = line(s, r);
            for zi in 0..n {
                let w = l[zi].norm_sqr();
                p[s] += w;
                zbar[s] += w * z[zi];
                z2bar[s] += w * z[zi] * z[zi];
            }
        }
    }
    let mut mean = [0.0f64; 2];
    let mut width = [0.0f64; 2];
    for s in 0..2 {
        if p[s] > 1e-30 {
            mean[s] = zbar[s] / p[s];
            width[s] = (z2bar[s] / p[s] - mean[s] * mean[s]).max(0.0).sqrt();
        }
    }
    let separation = mean[0] - mean[1];
    let mean_width = match (p[0] > 1e-30, p[1] > 1e-30) {
        (true, true) => 0.5 * (width[0] + width[1]),
        (true, false) => width[0],
        (false, true) => width[1],
        (false, false) => 0.0,
    };

    // Reduced spin 2x2 state from branch norms and the inter-branch overlap.
    let mut cross_sz = Complex64::ZERO;
    for r in 0..d {
        let (a, b) = (line(0, r), line(1, r));
        for zi in 0..n {
            cross_sz += a[zi] * b[zi].conj();
        }
    }
    let half_gap = 0.5 * (p[0] - p[1]);
    let disc = (half_gap * half_gap + cross_sz.norm_sqr()).sqrt();
    let mid = 0.5 * (p[0] + p[1]);
    let spin_entropy = entropy_from_eigen(mid + disc, mid - disc);

    Diagnostics {
        norm: norm_sq.sqrt(),
        spin_entropy,
        separation,
        record_overlap,
        cm_purity,
        mean_width,
        offdiag_norm,
        r_ground_fidelity,
    }
}

fn apply_spin_and_diagonal(st: &mut DynState, prop: &Propagator, extra: Option<&[Complex64]>) {
    let (n, d) = (st.n, st.d);
    st.data
        .par_chunks_exact_mut(n)
        .enumerate()
        .for_each(|(idx, chunk)| {
            let s = idx / d;
            let r = idx % d;
            let scale = extra.map_or(Complex64::ONE, |phases| phases[r]);
            let spin = &prop.spin_half[s];
            for (zi, a) in chunk.iter_mut().enumerate() {
                *a *= spin[zi] * scale;
            }
        });
}

fn apply_full_coupling(
    st: &mut DynState,
    scratch: &mut [Complex64],
    prop: &Propagator,
    table: &[Complex64],
    dim: usize,
) {
    let (n, d) = (st.n, st.d);
    debug_assert_eq!(d, dim);
    scratch.copy_from_slice(&st.data);
    let scratch_ref = &*scratch;
    st.data
        .par_chunks_exact_mut(n)
        .enumerate()
        .for_each(|(idx, out)| {
            let s = idx / d;
            let r = idx % d;
            let spin = &prop.spin_half[s];
            out.fill(Complex64::ZERO);
            for rp in 0..d {
                let row = &table[(r * d + rp) * n..(r * d + rp + 1) * n];
                let src = &scratch_ref[(s * d + rp) * n..(s * d + rp + 1) * n];
                for zi in 0..n {
                    out[zi] += row[zi] * src[zi];
                }
            }
            for (zi, a) in out.iter_mut().enumerate() {
                *a *= spin[zi];
            }
        });
}

fn apply_kinetic(st: &mut DynState, prop: &Propagator) {
    let n = st.n;
    let kin = &prop.kinetic;
    st.data.par_chunks_exact_mut(n).for_each(|linebuf| {
        prop.fft_fwd.process(linebuf);
        for (zi, a) in linebuf.iter_mut().enumerate() {
            *a *= kin[zi];
        }
        prop.fft_inv.process(linebuf);
    });
}

fn step(st: &mut DynState, scratch: &mut [Complex64], prop: &Propagator) {
    match &prop.coupling {
        Coupling::Off => apply_spin_and_diagonal(st, prop, None),
        Coupling::Diagonal(phases) => apply_spin_and_diagonal(st, prop, Some(phases)),
        Coupling::Full { first, dim, .. } => apply_full_coupling(st, scratch, prop, first, *dim),
    }
    apply_kinetic(st, prop);
    match &prop.coupling {
        Coupling::Off => apply_spin_and_diagonal(st, prop, None),
        Coupling::Diagonal(phases) => apply_spin_and_diagonal(st, prop, Some(phases)),
        Coupling::Full { second, dim, .. } => apply_full_coupling(st, scratch, prop, second, *dim),
    }
}

/// Evolve a pure (S, CM) or (S, CM, R) state for the grid's step count,
/// sampling diagnostics every `record_every` steps (plus start and end).
pub fn propagate(
    state: &QState,
    prop: &Propagator,
    record_every: usize,
) -> Result<(RunRecord, QState)> {
    if record_every == 0 {
        return Err(Error::InvalidInput {
            detail: "record interval must be at least 1".into(),
        });
    }
    let mut st = DynState::from_qstate(state, prop)?;
    let z = prop.grid.coordinates();
    let n_steps = prop.grid.n_steps;
    let mut record = RunRecord::with_capacity(n_steps / record_every + 2);
    record.push(0.0, &diagnostics(&st, &z));

    let mut scratch = vec![Complex64::ZERO; st.data.len()];
    for s in 0..n_steps {
        step(&mut st, &mut scratch, prop);
        let done = s + 1;
        let norm = st.norm_sq().sqrt();
        let drift = (norm - 1.0).abs();
        if drift > DRIFT_LIMIT {
            return Err(Error::NormDrift { step: done, drift });
        }
        if done % record_every == 0 || done == n_steps {
            record.push(done as f64 * prop.grid.dt, &diagnostics(&st, &z));
        }
    }
    let final_state = st.to_qstate(state.space())?;
    Ok((record, final_state))
}

/// Spec-shaped alias for propagator construction.
pub fn build_hamiltonian(
    grid: &GridSpec,
    ham: &HamiltonianSpec,
    packet: &PacketSpec,
) -> Result<Propagator> {
    Propagator::build(grid, ham, packet)
}

/// Normalized Gaussian amplitudes over the grid.
pub fn gaussian_amplitudes(grid: &GridSpec, packet: &PacketSpec) -> Vec<Complex64> {
    let z = grid.coordinates();
    let mut amps: Vec<Complex64> = z
        .iter()
        .map(|&zi| {
            let arg = -(zi - packet.center).powi(2) / (4.0 * packet.width * packet.width);
            Complex64::from_polar(arg.exp(), packet.momentum * zi)
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    amps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{partial_trace, purity, tensor};
    use approx::assert_relative_eq;

    fn cm_label(n: usize) -> SpaceLabel {
        SpaceLabel::new("CM", n)
    }

    fn spin_x_plus() -> QState {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QState::pure(vec![SpaceLabel::new("S", 2)], vec![h, h]).unwrap()
    }

    fn spin_up() -> QState {
        QState::basis(vec![SpaceLabel::new("S", 2)], 0).unwrap()
    }

    fn packet_state(
        grid: &GridSpec,
        packet: &PacketSpec,
        spin: QState,
        d: Option<usize>,
    ) -> QState {
        let cm = QState::pure(
            vec![cm_label(grid.n_points)],
            gaussian_amplitudes(grid, packet),
        )
        .unwrap();
        let sc = tensor(&spin, &cm).unwrap();
        match d {
            Some(d) => {
                let r = QState::basis(vec![SpaceLabel::new("R", d)], 0).unwrap();
                tensor(&sc, &r).unwrap()
            }
            None => sc,
        }
    }

    fn branch_width(state: &QState, grid: &GridSpec, spin_index: usize) -> f64 {
        let amps = state.amplitudes().unwrap();
        let z = grid.coordinates();
        let n = grid.n_points;
        let (mut p, mut zb, mut z2b) = (0.0, 0.0, 0.0);
        for zi in 0..n {
            let w = amps[spin_index * n + zi].norm_sqr();
            p += w;
            zb += w * z[zi];
            z2b += w * z[zi] * z[zi];
        }
        ((z2b / p) - (zb / p).powi(2)).sqrt()
    }

    fn branch_momentum_mean(state: &QState, grid: &GridSpec, spin_index: usize) -> f64 {
        let amps = state.amplitudes().unwrap();
        let n = grid.n_points;
        let mut buf: Vec<Complex64> = (0..n).map(|zi| amps[spin_index * n + zi]).collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        let length = grid.z_max - grid.z_min;
        let (mut p, mut kbar) = (0.0, 0.0);
        for (j, a) in buf.iter().enumerate() {
            let j_signed = if j < n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            };
            let k = 2.0 * std::f64::consts::PI * j_signed / length;
            let w = a.norm_sqr();
            p += w;
            kbar += w * k;
        }
        kbar / p
    }

    #[test]
    fn build_validates_inputs() {
        let packet = PacketSpec::default();
        let ham = HamiltonianSpec::default();

        let mut grid = GridSpec {
            n_points: 500,
            ..GridSpec::default()
        };
        assert!(Propagator::build(&grid, &ham, &packet).is_err());
        grid.n_points = 32;
        assert!(Propagator::build(&grid, &ham, &packet).is_err());

        let coarse = GridSpec {
            n_points: 64,
            ..GridSpec::default()
        };
        let err = Propagator::build(&coarse, &ham, &packet).unwrap_err();
        assert_eq!(err.kind(), "grid_too_coarse");

        let mut bad_env = HamiltonianSpec::default();
        bad_env.environment.mode = EnvironmentMode::LinearRecorder {
            dim: 1,
            coupling: 0.1,
        };
        assert!(Propagator::build(&GridSpec::default(), &bad_env, &packet).is_err());

        let mut open_shell = HamiltonianSpec::default();
        open_shell.environment.mode = EnvironmentMode::PotentialDerived {
            z: 11,
            a_mu: 1.0,
            truncation: 4,
        };
        let err = Propagator::build(&GridSpec::default(), &open_shell, &packet).unwrap_err();
        assert_eq!(err.kind(), "not_closed_shell");

        let mut bad_self = HamiltonianSpec::default();
        bad_self.environment.mode = EnvironmentMode::LinearRecorder {
            dim: 4,
            coupling: 0.1,
        };
        bad_self.environment.self_energy = vec![0.0; 3];
        assert!(Propagator::build(&GridSpec::default(), &bad_self, &packet).is_err());
    }

    #[test]
    fn free_packet_follows_spreading_law() {
        let grid = GridSpec {
            n_steps: 400,
            ..GridSpec::default()
        };
        let packet = PacketSpec::default();
        let ham = HamiltonianSpec {
            field_gradient: 0.0,
            ..HamiltonianSpec::default()
        };
        let prop = Propagator::build(&grid, &ham, &packet).unwrap();
        let state = packet_state(&grid, &packet, spin_up(), None);
        let (record, final_state) = propagate(&state, &prop, 100).unwrap();
        let t = grid.total_time();
        let sigma = packet.width;
        let expected = sigma * (1.0 + (t / (2.0 * sigma * sigma * ham.mass)).powi(2)).sqrt();
        let measured = branch_width(&final_state, &grid, 0);
        assert_relative_eq!(measured, expected, max_relative = 1e-6);
        for nrm in &record.norm {
            assert!((nrm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_gives_ehrenfest_momentum_split() {
        let grid = GridSpec {
            n_steps: 200,
            dt: 0.005,
            ..GridSpec::default()
        };
        let packet = PacketSpec::default();
        let ham = HamiltonianSpec::default();
        let prop = Propagator::build(&grid, &ham, &packet).unwrap();
        let state = packet_state(&grid, &packet, spin_x_plus(), None);
        let (_, final_state) = propagate(&state, &prop, 50).unwrap();
        let p_up = branch_momentum_mean(&final_state, &grid, 0);
        let p_dn = branch_momentum_mean(&final_state, &grid, 1);
        let expected = ham.magneton * ham.field_gradient * grid.total_time();
        assert_relative_eq!(p_up - p_dn, expected, max_relative = 1e-6);
        assert!(p_up > 0.0 && p_dn < 0.0);
    }

    #[test]
    fn zero_coupling_recorder_matches_no_environment() {
        let grid = GridSpec {
            n_steps: 200,
            ..GridSpec::default()
        };
        let packet = PacketSpec::default();
        let plain = HamiltonianSpec::default();
        let mut wired = HamiltonianSpec::default();
        wired.environment.mode = EnvironmentMode::LinearRecorder {
            dim: 4,
            coupling: 0.0,
        };

        let state = packet_state(&grid, &packet, spin_x_plus(), Some(4));
        let prop_a = Propagator::build(&grid, &plain, &packet).unwrap();
        let prop_b = Propagator::build(&grid, &wired, &packet).unwrap();
        let (rec_a, fin_a) = propagate(&state, &prop_a, 50).unwrap();
        let (rec_b, fin_b) = propagate(&state, &prop_b, 50).unwrap();

        let fidelity = fin_a.overlap(&fin_b).unwrap().norm_sqr();
        assert!(fidelity >= 1.0 - 1e-10, "fidelity {fidelity}");
        for (a, b) in rec_a.spin_entropy.iter().zip(&rec_b.spin_entropy) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in rec_a.packet_separation.iter().zip(&rec_b.packet_separation) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_steps_returns_state_unchanged() {
        let grid = GridSpec {
            n_steps: 0,
            ..GridSpec::default()
        };
        let packet = PacketSpec::default();
        let prop = Propagator::build(&grid, &HamiltonianSpec::default(), &packet).unwrap();
        let state = packet_state(&grid, &packet, spin_x_plus(), None);
        let (record, final_state) = propagate(&state, &prop, 10).unwrap();
        assert_eq!(record.len(), 1);
        let a = state.amplitudes().unwrap();
        let b = final_state.amplitudes().unwrap();
        for i in 0..a.len() {
            assert!((a[i] - b[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn norm_drift_stays_below_budget_over_thousand_steps() {
        let grid = GridSpec {
            n_steps: 1000,
            ..GridSpec::default()
        };
        let packet = PacketSpec::default();
        let mut ham = HamiltonianSpec::default();
        ham.environment.mode = EnvironmentMode::LinearRecorder {
            dim: 4,
            coupling: 0.2,
        };
        ham.environment.self_energy = vec![0.0, 0.3, 0.7, 1.1];
        let prop = Propagator::build(&grid, &ham, &packet).unwrap();
        let state = packet_state(&grid, &packet, spin_x_plus(), Some(4));
        let (record, _) = propagate(&state, &prop, 100).unwrap();
        for nrm in &record.norm {
            assert!((nrm - 1.0).abs() <= 1e-8, "norm {nrm}");
        }
    }

    #[test]
    fn propagate_checks_state_shape() {
        let grid = GridSpec::default();
        let packet = PacketSpec::default();
        let mut ham = HamiltonianSpec::default();
        ham.environment.mode = EnvironmentMode::LinearRecorder {
            dim: 4,
            coupling: 0.1,
        };
        let prop = Propagator::build(&grid, &ham, &packet).unwrap();

        let wrong_r = packet_state(&grid, &packet, spin_x_plus(), Some(3));
        assert!(matches!(
            propagate(&wrong_r, &prop, 10),
            Err(Error::DimensionMismatch { .. })
        ));
        let no_r = packet_state(&grid, &packet, spin_x_plus(), None);
        assert!(matches!(
            propagate(&no_r, &prop, 10),
            Err(Error::DimensionMismatch { .. })
        ));
        let density = partial_trace(&no_r, &["S", "CM"]).unwrap();
        let free = Propagator::build(&grid, &HamiltonianSpec::default(), &packet).unwrap();
        assert!(matches!(
            propagate(&density, &free, 10),
            Err(Error::KindMismatch { .. })
        ));
        assert!(propagate(&no_r, &free, 0).is_err());
    }

    #[test]
    fn inert_recorder_keeps_ground_level_exactly() {
        let grid = GridSpec {
            n_steps: 300,
            ..GridSpec::default()
        };
        let packet = PacketSpec::default();
        let prop = Propagator::build(&grid, &HamiltonianSpec::default(), &packet).unwrap();
        let state = packet_state(&grid, &packet, spin_x_plus(), Some(8));
        let (_, final_state) = propagate(&state, &prop, 100).unwrap();
        let r = partial_trace(&final_state, &["R"]).unwrap();
        let m = r.density_matrix();
        assert!(m[(0, 0)].re >= 1.0 - 1e-12);
        assert_relative_eq!(purity(&r), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn driven_recorder_decoheres_monotonically() {
        let grid = GridSpec {
            n_points: 256,
            z_min: -10.0,
            z_max: 10.0,
            dt: 0.005,
            n_steps: 600,
        };
        let packet = PacketSpec::default();
        let mut ham = HamiltonianSpec {
            field_gradient: 1.0,
            ..HamiltonianSpec::default()
        };
        ham.environment.mode = EnvironmentMode::LinearRecorder {
            dim: 4,
            coupling: 0.15,
        };
        let prop = Propagator::build(&grid, &ham, &packet).unwrap();
        let state = packet_state(&grid, &packet, spin_x_plus(), Some(4));
        let (record, _) = propagate(&state, &prop, 50).unwrap();
        assert_relative_eq!(record.record_overlap[0], 1.0, max_relative = 1e-9);
        for pair in record.record_overlap.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "overlap rose: {pair:?}");
        }
        assert!(*record.record_overlap.last().unwrap() < 0.9);
        assert!(*record.cm_purity.last().unwrap() < 1.0 - 1e-3);
    }

    #[test]
    fn potential_derived_mode_builds_and_decoheres() {
        let grid = GridSpec {
            n_points: 256,
            z_min: -10.0,
            z_max: 10.0,
            dt: 0.005,
            n_steps: 400,
        };
        let packet = PacketSpec {
            center: 2.0,
            width: 1.0,
            momentum: 0.0,
        };
        let mut ham = HamiltonianSpec::default();
        ham.environment.mode = EnvironmentMode::PotentialDerived {
            z: 2,
            a_mu: 1.0,
            truncation: 4,
        };
        let prop = Propagator::build(&grid, &ham, &packet).unwrap();
        let state = packet_state(&grid, &packet, spin_x_plus(), Some(4));
        let (record, _) = propagate(&state, &prop, 100).unwrap();
        for nrm in &record.norm {
            assert!((nrm - 1.0).abs() < 1e-8);
        }
        assert!(*record.cm_purity.last().unwrap() < 1.0 - 1e-4);
    }

    #[test]
    fn conversion_roundtrip_with_recorder() {
        let grid = GridSpec {
            n_steps: 0,
            ..GridSpec::default()
        };
        let packet = PacketSpec {
            center: 1.0,
            width: 1.5,
            momentum: 0.7,
        };
        let mut ham = HamiltonianSpec::default();
        ham.environment.mode = EnvironmentMode::LinearRecorder {
            dim: 3,
            coupling: 0.4,
        };
        let prop = Propagator::build(&grid, &ham, &packet).unwrap();
        let r = QState::pure(
            vec![SpaceLabel::new("R", 3)],
            vec![
                Complex64::new(0.6, 0.0),
                Complex64::new(0.0, 0.48),
                Complex64::new(0.64, 0.0),
            ],
        )
        .unwrap();
        let cm = QState::pure(
            vec![cm_label(grid.n_points)],
            gaussian_amplitudes(&grid, &packet),
        )
        .unwrap();
        let state = tensor(&tensor(&spin_x_plus(), &cm).unwrap(), &r).unwrap();
        let (_, back) = propagate(&state, &prop, 5).unwrap();
        let a = state.amplitudes().unwrap();
        let b = back.amplitudes().unwrap();
        for i in 0..a.len() {
            assert!((a[i] - b[i]).norm() < 1e-14);
        }
    }
}
