//! Canonical beam-splitting runs and their derived reports.
//!
//! Scenario A: no recorder coupling; the beam splits and spin entangles with
//! the packet position while an attached recorder stays in its ground level.
//! Scenario B: the linear recorder is driven hard enough that its levels keep
//! distinguishable records of the branch, mixing the spin + packet state.
//! On top of these sit the transverse-measurement erasure report and the
//! pointer sieve ranking candidate packets by how little entropy the
//! recorder coupling produces.

use super::{
    diagnostics, gaussian_amplitudes, DynState, EnvironmentMode, EnvironmentSpec, GridSpec,
    HamiltonianSpec, PacketSpec, Propagator, RunRecord,
};
use crate::error::{Error, Result};
use crate::state::{tensor, QState, SpaceLabel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgParams {
    pub grid: GridSpec,
    pub hamiltonian: HamiltonianSpec,
    pub packet: PacketSpec,
    /// Recorder levels to attach when the environment is off (1 drops the
    /// factor); an active environment fixes the dimension itself.
    pub recorder_levels: usize,
    pub record_every: usize,
}

impl Default for SgParams {
    fn default() -> Self {
        SgParams {
            grid: GridSpec::default(),
            hamiltonian: HamiltonianSpec::default(),
            packet: PacketSpec::default(),
            recorder_levels: 8,
            record_every: 100,
        }
    }
}

impl SgParams {
    fn recorder_dim(&self) -> usize {
        self.hamiltonian
            .environment
            .recorder_dim()
            .unwrap_or(self.recorder_levels)
    }

    fn validate(&self) -> Result<()> {
        if self.record_every == 0 {
            return Err(Error::InvalidInput {
                detail: "record interval must be at least 1".into(),
            });
        }
        if self.recorder_levels == 0 {
            return Err(Error::InvalidInput {
                detail: "recorder level count must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// The wide-grid split run: no recorder coupling, packets driven well apart.
/// The default grid is doubled in extent here so the deflected packets stay
/// clear of the periodic boundary.
pub fn scenario_a_params() -> SgParams {
    SgParams {
        grid: GridSpec {
            n_points: 1024,
            z_min: -40.0,
            z_max: 40.0,
            dt: 0.005,
            n_steps: 2000,
        },
        ..SgParams::default()
    }
}

/// The recorded split run: a stronger gradient over a longer flight with the
/// recorder coupling tuned so the accumulated differential phase reaches the
/// first null of the d-level overlap kernel (lambda = 6 / (g T^3)).
pub fn scenario_b_params() -> SgParams {
    let gradient = 2.0;
    let flight_time: f64 = 21.0;
    SgParams {
        grid: GridSpec {
            n_points: 8192,
            z_min: -250.0,
            z_max: 250.0,
            dt: 0.004,
            n_steps: 5250,
        },
        hamiltonian: HamiltonianSpec {
            mass: 1.0,
            field_gradient: gradient,
            magneton: 1.0,
            environment: EnvironmentSpec {
                mode: EnvironmentMode::LinearRecorder {
                    dim: 8,
                    coupling: 6.0 / (gradient * flight_time.powi(3)),
                },
                self_energy: Vec::new(),
            },
        },
        packet: PacketSpec {
            center: 0.0,
            width: 2.29,
            momentum: 0.0,
        },
        recorder_levels: 8,
        record_every: 50,
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub final_spin_entropy: f64,
    pub packet_separation: f64,
    pub mean_packet_width: f64,
    pub separation_in_widths: f64,
    pub record_overlap: f64,
    pub cm_purity: f64,
    pub offdiag_norm: f64,
    pub r_ground_fidelity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub record: RunRecord,
    pub summary: ScenarioSummary,
}

/// Initial state: transversally polarized spin, Gaussian packet, recorder in
/// its ground level.
pub fn prepare_initial_state(params: &SgParams) -> Result<QState> {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let spin = QState::pure(vec![SpaceLabel::new("S", 2)], vec![h, h])?;
    let cm = QState::pure(
        vec![SpaceLabel::new("CM", params.grid.n_points)],
        gaussian_amplitudes(&params.grid, &params.packet),
    )?;
    let joint = tensor(&spin, &cm)?;
    let d = params.recorder_dim();
    if d > 1 {
        let r = QState::basis(vec![SpaceLabel::new("R", d)], 0)?;
        tensor(&joint, &r)
    } else {
        Ok(joint)
    }
}

fn run(params: &SgParams) -> Result<(Propagator, RunRecord, QState)> {
    params.validate()?;
    let prop = Propagator::build(&params.grid, &params.hamiltonian, &params.packet)?;
    let initial = prepare_initial_state(params)?;
    let (record, final_state) = super::propagate(&initial, &prop, params.record_every)?;
    Ok((prop, record, final_state))
}

pub fn sg_scenario(params: &SgParams) -> Result<(ScenarioReport, QState)> {
    let (prop, record, final_state) = run(params)?;
    let st = DynState::from_qstate(&final_state, &prop)?;
    let diag = diagnostics(&st, &prop.grid().coordinates());
    let summary = ScenarioSummary {
        final_spin_entropy: diag.spin_entropy,
        packet_separation: diag.separation,
        mean_packet_width: diag.mean_width,
        separation_in_widths: if diag.mean_width > 0.0 {
            diag.separation.abs() / diag.mean_width
        } else {
            0.0
        },
        record_overlap: diag.record_overlap,
        cm_purity: diag.cm_purity,
        offdiag_norm: diag.offdiag_norm,
        r_ground_fidelity: diag.r_ground_fidelity,
    };
    Ok((ScenarioReport { record, summary }, final_state))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErasureReport {
    pub p_plus: f64,
    pub visibility_conditioned: f64,
    pub cm_purity_conditioned: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Orthonormalize the evolved branch packets symmetrically; returns the pair
/// closest (in least-squares sense) to the inputs.
fn lowdin_pair(up: &[Complex64], dn: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let s = dot(up, dn);
    let mag = s.norm();
    if 1.0 - mag < 1e-12 {
        return Err(Error::NonOrthonormalBasis { deviation: mag });
    }
    let phase = if mag > 0.0 { s / mag } else { Complex64::ONE };
    let a_plus = 0.5 / (1.0 + mag).sqrt();
    let a_minus = 0.5 / (1.0 - mag).sqrt();
    // W = S^(-1/2) assembled from the +/- projectors of the 2x2 overlap.
    let w00 = Complex64::new(a_plus + a_minus, 0.0);
    let w01 = (a_plus - a_minus) * phase;
    let w10 = (a_plus - a_minus) * phase.conj();
    let w11 = Complex64::new(a_plus + a_minus, 0.0);
    let n = up.len();
    let mut chi_up = vec![Complex64::ZERO; n];
    let mut chi_dn = vec![Complex64::ZERO; n];
    for i in 0..n {
        chi_up[i] = up[i] * w00 + dn[i] * w10;
        chi_dn[i] = up[i] * w01 + dn[i] * w11;
    }
    Ok((chi_up, chi_dn))
}

/// Transverse-spin measurement discriminator.  Runs the configured scenario,
/// measures the +1/2 transverse outcome, traces the recorder, and scores the
/// conditioned packet state against the coupling-free evolved packet pair
/// (symmetrically orthonormalized).
pub fn erasure_scenario(params: &SgParams) -> Result<ErasureReport> {
    let (prop, _, final_state) = run(params)?;
    let st = DynState::from_qstate(&final_state, &prop)?;
    let (n, d) = (st.n, st.d);

    // Reference packets from the same run with the recorder coupling off.
    let mut ref_params = params.clone();
    ref_params.hamiltonian.environment = EnvironmentSpec::default();
    ref_params.recorder_levels = 1;
    let (ref_prop, _, ref_state) = run(&ref_params)?;
    let ref_st = DynState::from_qstate(&ref_state, &ref_prop)?;
    let mut phi_up = ref_st.data[0..n].to_vec();
    let mut phi_dn = ref_st.data[n..2 * n].to_vec();
    for (phi, scale) in [
        (
            &mut phi_up,
            dot(&ref_st.data[0..n], &ref_st.data[0..n]).re.sqrt(),
        ),
        (
            &mut phi_dn,
            dot(&ref_st.data[n..2 * n], &ref_st.data[n..2 * n])
                .re
                .sqrt(),
        ),
    ] {
        for a in phi.iter_mut() {
            *a /= scale;
        }
    }
    let (chi_up, chi_dn) = lowdin_pair(&phi_up, &phi_dn)?;

    // Conditioned branch for the +1/2 transverse outcome: the spin-up and
    // spin-down components recombine with equal weight per recorder level.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus_rows: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for r in 0..d {
        let up_line = &st.data[r * n..(r + 1) * n];
        let dn_line = &st.data[(d + r) * n..(d + r + 1) * n];
        plus_rows.push(
            up_line
                .iter()
                .zip(dn_line)
                .map(|(u, v)| (u + v) * h)
                .collect(),
        );
    }
    let p_plus: f64 = plus_rows.iter().map(|row| dot(row, row).re).sum();

    // Visibility and purity of the conditioned packet state after tracing
    // the recorder, written through the per-level rows.
    let mut cross = Complex64::ZERO;
    let mut purity_acc = 0.0;
    for r in 0..d {
        let to_up = dot(&chi_dn, &plus_rows[r]);
        let from_up = dot(&plus_rows[r], &chi_up);
        cross += to_up * from_up;
        for rp in 0..d {
            purity_acc += dot(&plus_rows[r], &plus_rows[rp]).norm_sqr();
        }
    }
    Ok(ErasureReport {
        p_plus,
        visibility_conditioned: 2.0 * cross.norm() / p_plus,
        cm_purity_conditioned: purity_acc / (p_plus * p_plus),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SieveCandidate {
    pub label: String,
    pub state: QState,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SieveEntry {
    pub label: String,
    pub linear_entropy_production: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SieveReport {
    /// Ascending entropy production; the front entry is the best pointer.
    pub entries: Vec<SieveEntry>,
    pub spread: f64,
    pub tied: bool,
}

const SIEVE_TIE_SPREAD: f64 = 1e-9;

/// Grid and environment used by the standard sieve run.
pub fn standard_sieve_setup() -> (GridSpec, EnvironmentSpec) {
    (
        GridSpec {
            n_points: 512,
            z_min: -20.0,
            z_max: 20.0,
            dt: 0.005,
            n_steps: 400,
        },
        EnvironmentSpec {
            mode: EnvironmentMode::LinearRecorder {
                dim: 8,
                coupling: 0.1,
            },
            self_energy: Vec::new(),
        },
    )
}

/// The three-candidate reference set: a minimal-uncertainty packet, the same
/// packet squeezed in position by 4, and a symmetric two-packet
/// superposition.
pub fn standard_candidates(grid: &GridSpec) -> Vec<SieveCandidate> {
    let label = |l: &str| l.to_string();
    let cm = SpaceLabel::new("CM", grid.n_points);
    let minimal = gaussian_amplitudes(grid, &PacketSpec::default());
    let squeezed = gaussian_amplitudes(
        grid,
        &PacketSpec {
            width: 0.25,
            ..PacketSpec::default()
        },
    );
    let left = gaussian_amplitudes(
        grid,
        &PacketSpec {
            center: -2.0,
            ..PacketSpec::default()
        },
    );
    let right = gaussian_amplitudes(
        grid,
        &PacketSpec {
            center: 2.0,
            ..PacketSpec::default()
        },
    );
    let mut two: Vec<Complex64> = left.iter().zip(&right).map(|(a, b)| a + b).collect();
    let norm = two.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut two {
        *a /= norm;
    }
    vec![
        SieveCandidate {
            label: label("minimal"),
            state: QState::pure(vec![cm.clone()], minimal).unwrap(),
        },
        SieveCandidate {
            label: label("squeezed"),
            state: QState::pure(vec![cm.clone()], squeezed).unwrap(),
        },
        SieveCandidate {
            label: label("two-packet"),
            state: QState::pure(vec![cm], two).unwrap(),
        },
    ]
}

/// Rank candidate packet states by the linear entropy 1 - Tr(rho_CM^2) that
/// the recorder coupling produces over the grid's time span.  The kinetic
/// term stays on (with zero gradient): without it a position-dephasing
/// coupling would trivially favor the narrowest packet and never the
/// minimal-uncertainty one.
pub fn pointer_sieve(
    candidates: &[SieveCandidate],
    grid: &GridSpec,
    env: &EnvironmentSpec,
    mass: f64,
) -> Result<SieveReport> {
    let d = env.recorder_dim().ok_or(Error::InvalidInput {
        detail: "the sieve needs an active environment".into(),
    })?;
    if candidates.is_empty() {
        return Err(Error::InvalidInput {
            detail: "no sieve candidates given".into(),
        });
    }
    let ham = HamiltonianSpec {
        mass,
        field_gradient: 0.0,
        magneton: 1.0,
        environment: env.clone(),
    };
    // The coarseness check applies to the scenario's reference packet;
    // candidates themselves only need to be spectrally resolved.
    let prop = Propagator::build(grid, &ham, &PacketSpec::default())?;
    let spin = QState::basis(vec![SpaceLabel::new("S", 2)], 0)?;
    let ground = QState::basis(vec![SpaceLabel::new("R", d)], 0)?;

    let mut entries = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let space = cand.state.space();
        if space.len() != 1 || space[0].dim != grid.n_points {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "candidate '{}' does not live on the {}-point packet grid",
                    cand.label, grid.n_points
                ),
            });
        }
        let joint = tensor(&tensor(&spin, &cand.state)?, &ground)?;
        let record_every = prop.grid().n_steps.max(1);
        let (_, final_state) = super::propagate(&joint, &prop, record_every)?;
        let st = DynState::from_qstate(&final_state, &prop)?;
        // Reduced packet purity via recorder-level Gram overlaps; only the
        // spin-up block is populated.
        let n = st.n;
        let mut purity = 0.0;
        let mut trace = 0.0;
        for r in 0..d {
            let row = &st.data[r * n..(r + 1) * n];
            trace += dot(row, row).re;
            for rp in 0..d {
                let rowp = &st.data[rp * n..(rp + 1) * n];
                purity += dot(row, rowp).norm_sqr();
            }
        }
        entries.push(SieveEntry {
            label: cand.label.clone(),
            linear_entropy_production: 1.0 - purity / (trace * trace),
        });
    }
    entries.sort_by(|a, b| {
        a.linear_entropy_production
            .partial_cmp(&b.linear_entropy_production)
            .expect("entropy productions are finite")
    });
    let spread = entries.last().unwrap().linear_entropy_production
        - entries.first().unwrap().linear_entropy_production;
    Ok(SieveReport {
        entries,
        spread,
        tied: spread <= SIEVE_TIE_SPREAD,
    })
}
