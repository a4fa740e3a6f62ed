//! Finite-dimensional tensor-product state algebra.
//!
//! A `QState` is a pure vector or a density matrix over an ordered list of
//! labeled factors.  Flat indices are row-major with the first factor most
//! significant, so `tensor` is a plain Kronecker product.  Pure states are
//! promoted to density matrices wherever a mixed-state operation needs one.
//!
//! Spin convention: two-level factors measured with `SpinObservable` use
//! eigenvalues +1/2 and -1/2, up = (1, 0), and the transverse plus state
//! (1, 1)/sqrt(2).

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const NORM_TOL: f64 = 1e-10;
const HERMITICITY_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = -1e-10;
const OUTCOME_CUTOFF: f64 = 1e-12;
const BASIS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceLabel {
    pub name: String,
    pub dim: usize,
}

impl SpaceLabel {
    pub fn new(name: &str, dim: usize) -> Self {
        SpaceLabel {
            name: name.to_string(),
            dim,
        }
    }
}

#[derive(Debug, Clone)]
enum StateData {
    Pure(DVector<Complex64>),
    Density(DMatrix<Complex64>),
}

#[derive(Debug, Clone)]
pub struct QState {
    space: Vec<SpaceLabel>,
    data: StateData,
}

fn check_space(space: &[SpaceLabel]) -> Result<usize> {
    if space.is_empty() {
        return Err(Error::InvalidInput {
            detail: "state needs at least one factor".into(),
        });
    }
    let mut dim = 1usize;
    for (i, label) in space.iter().enumerate() {
        if label.dim == 0 {
            return Err(Error::InvalidInput {
                detail: format!("factor '{}' has dimension 0", label.name),
            });
        }
        if space[..i].iter().any(|l| l.name == label.name) {
            return Err(Error::DuplicateLabel {
                label: label.name.clone(),
            });
        }
        dim = dim.checked_mul(label.dim).ok_or(Error::Overflow {
            context: "composite dimension",
        })?;
    }
    Ok(dim)
}

fn validate_density(m: &DMatrix<Complex64>) -> Result<()> {
    let n = m.nrows();
    let mut herm_dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            herm_dev = herm_dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if herm_dev > HERMITICITY_TOL {
        return Err(Error::KindMismatch {
            detail: format!("density matrix not Hermitian, deviation {herm_dev:e}"),
        });
    }
    let trace: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
    if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
        return Err(Error::InvalidInput {
            detail: format!("density matrix trace {trace} is not 1"),
        });
    }
    let eig = m.clone().symmetric_eigen();
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < EIGEN_FLOOR {
        return Err(Error::InvalidInput {
            detail: format!("density matrix has negative eigenvalue {min:e}"),
        });
    }
    Ok(())
}

impl QState {
    /// Pure state from row-major amplitudes; norm must be 1 within 1e-10.
    pub fn pure(space: Vec<SpaceLabel>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = check_space(&space)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                detail: format!("space dimension {dim}, got {} amplitudes", amplitudes.len()),
            });
        }
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput {
                detail: format!("pure state norm {norm} is not 1"),
            });
        }
        Ok(QState {
            space,
            data: StateData::Pure(v),
        })
    }

    /// Basis vector |index> of the composite space.
    pub fn basis(space: Vec<SpaceLabel>, index: usize) -> Result<Self> {
        let dim = check_space(&space)?;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                detail: format!("basis index {index} outside dimension {dim}"),
            });
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[index] = Complex64::ONE;
        QState::pure(space, amplitudes)
    }

    /// Density matrix from a row-major Hermitian, unit-trace, PSD matrix.
    pub fn density(space: Vec<SpaceLabel>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = check_space(&space)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "space dimension {dim}, got {}x{} matrix",
                    matrix.nrows(),
                    matrix.ncols()
                ),
            });
        }
        validate_density(&matrix)?;
        Ok(QState {
            space,
            data: StateData::Density(matrix),
        })
    }

    /// Internal constructor for operator outputs that are valid by
    /// construction; still guarded in debug builds.
    fn density_unchecked(space: Vec<SpaceLabel>, matrix: DMatrix<Complex64>) -> Self {
        debug_assert!(validate_density(&matrix).is_ok());
        QState {
            space,
            data: StateData::Density(matrix),
        }
    }

    pub fn space(&self) -> &[SpaceLabel] {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.iter().map(|l| l.dim).product()
    }

    pub fn is_pure_kind(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    /// Amplitudes of a pure state; None for a density matrix.
    pub fn amplitudes(&self) -> Option<&DVector<Complex64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    /// Density-matrix view, promoting a pure state to its projector.
    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        }
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.space
            .iter()
            .position(|l| l.name == label)
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_string(),
            })
    }

    /// Row-major strides per factor.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.space.len()];
        for i in (0..self.space.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.space[i + 1].dim;
        }
        strides
    }

    /// Overlap <self|other> for two pure states on identical spaces.
    pub fn overlap(&self, other: &QState) -> Result<Complex64> {
        let (a, b) = match (&self.data, &other.data) {
            (StateData::Pure(a), StateData::Pure(b)) => (a, b),
            _ => {
                return Err(Error::KindMismatch {
                    detail: "overlap needs two pure states".into(),
                })
            }
        };
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                detail: "overlap needs identical factor lists".into(),
            });
        }
        Ok(a.dotc(b))
    }
}

/// Kronecker composition; factor lists concatenate.
pub fn tensor(a: &QState, b: &QState) -> Result<QState> {
    let mut space = a.space.clone();
    space.extend(b.space.iter().cloned());
    check_space(&space)?;
    match (&a.data, &b.data) {
        (StateData::Pure(va), StateData::Pure(vb)) => {
            let mut amps = Vec::with_capacity(va.len() * vb.len());
            for x in va.iter() {
                for y in vb.iter() {
                    amps.push(x * y);
                }
            }
            QState::pure(space, amps)
        }
        (StateData::Density(ma), StateData::Density(mb)) => {
            let m = ma.kronecker(mb);
            Ok(QState::density_unchecked(space, m))
        }
        _ => Err(Error::KindMismatch {
            detail: "tensor needs both pure or both density".into(),
        }),
    }
}

/// Reduced density matrix over `keep`, preserving the state's factor order.
pub fn partial_trace(state: &QState, keep: &[&str]) -> Result<QState> {
    if keep.is_empty() {
        return Err(Error::InvalidInput {
            detail: "must keep at least one factor".into(),
        });
    }
    let mut keep_flags = vec![false; state.space.len()];
    for label in keep {
        let pos = state.position(label)?;
        keep_flags[pos] = true;
    }
    let strides = state.strides();
    let kept: Vec<usize> = (0..state.space.len()).filter(|&i| keep_flags[i]).collect();
    let traced: Vec<usize> = (0..state.space.len()).filter(|&i| !keep_flags[i]).collect();
    let kept_dim: usize = kept.iter().map(|&i| state.space[i].dim).product();
    let traced_dim: usize = traced.iter().map(|&i| state.space[i].dim).product();
    let kept_space: Vec<SpaceLabel> = kept.iter().map(|&i| state.space[i].clone()).collect();

    if traced.is_empty() {
        return Ok(QState::density_unchecked(
            kept_space,
            state.density_matrix(),
        ));
    }

    // compose(k, t): flat index whose kept factors spell k and traced factors
    // spell t, both row-major within their own group.
    let compose = |mut k: usize, mut t: usize| -> usize {
        let mut flat = 0;
        for &f in kept.iter().rev() {
            let d = state.space[f].dim;
            flat += (k % d) * strides[f];
            k /= d;
        }
        for &f in traced.iter().rev() {
            let d = state.space[f].dim;
            flat += (t % d) * strides[f];
            t /= d;
        }
        flat
    };

    let reduced = match &state.data {
        StateData::Pure(v) => {
            // Gather into a kept x traced matrix; the reduced state is M M^dagger.
            let m = DMatrix::from_fn(kept_dim, traced_dim, |k, t| v[compose(k, t)]);
            &m * m.adjoint()
        }
        StateData::Density(rho) => {
            let mut out = DMatrix::zeros(kept_dim, kept_dim);
            for ki in 0..kept_dim {
                for kj in 0..kept_dim {
                    let mut acc = Complex64::ZERO;
                    for t in 0..traced_dim {
                        acc += rho[(compose(ki, t), compose(kj, t))];
                    }
                    out[(ki, kj)] = acc;
                }
            }
            out
        }
    };
    Ok(QState::density_unchecked(kept_space, reduced))
}

/// Tr(rho^2); 1 for pure states.
pub fn purity(state: &QState) -> f64 {
    match &state.data {
        StateData::Pure(_) => 1.0,
        StateData::Density(m) => m.iter().map(|z| z.norm_sqr()).sum(),
    }
}

/// Von Neumann entropy -Tr(rho ln rho); 0 for pure states.
pub fn vn_entropy(state: &QState) -> f64 {
    let m = match &state.data {
        StateData::Pure(_) => return 0.0,
        StateData::Density(m) => m,
    };
    let eig = m.clone().symmetric_eigen();
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert!(
        min >= EIGEN_FLOOR,
        "density eigenvalue {min:e} below the PSD floor"
    );
    eig.eigenvalues
        .iter()
        .map(|&l| {
            let l = l.max(0.0);
            if l > 0.0 {
                -l * l.ln()
            } else {
                0.0
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinObservable {
    Sz,
    Sx,
}

impl SpinObservable {
    /// (eigenvalue, eigenvector) pairs, descending eigenvalue.
    fn eigenpairs(self) -> [(f64, [Complex64; 2]); 2] {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            SpinObservable::Sz => [
                (0.5, [Complex64::ONE, Complex64::ZERO]),
                (-0.5, [Complex64::ZERO, Complex64::ONE]),
            ],
            SpinObservable::Sx => [(0.5, [h, h]), (-0.5, [h, -h])],
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub value: f64,
    pub probability: f64,
    pub post_state: QState,
}

/// Projective measurement of a two-level factor; outcomes with probability
/// below 1e-12 are dropped so every post state is normalizable.
pub fn measure(
    state: &QState,
    observable: SpinObservable,
    subsystem: &str,
) -> Result<Vec<MeasurementOutcome>> {
    let pos = state.position(subsystem)?;
    if state.space[pos].dim != 2 {
        return Err(Error::DimensionMismatch {
            detail: format!(
                "spin measurement needs a two-level factor, '{subsystem}' has dim {}",
                state.space[pos].dim
            ),
        });
    }
    let stride = state.strides()[pos];
    let dim = state.dim();
    let mut outcomes = Vec::new();
    for (value, vec2) in observable.eigenpairs() {
        let proj = [
            [vec2[0] * vec2[0].conj(), vec2[0] * vec2[1].conj()],
            [vec2[1] * vec2[0].conj(), vec2[1] * vec2[1].conj()],
        ];
        // The expanded projector only mixes indices differing in the target
        // digit s; that partner index is base + (1 - 2s)*stride.
        let apply_vec = |v: &DVector<Complex64>| -> DVector<Complex64> {
            let mut out = DVector::zeros(dim);
            for base in 0..dim {
                let s = (base / stride) % 2;
                let flipped = (base as isize + (1 - 2 * s as isize) * stride as isize) as usize;
                out[base] = proj[s][s] * v[base] + proj[s][1 - s] * v[flipped];
            }
            out
        };
        match &state.data {
            StateData::Pure(v) => {
                let projected = apply_vec(v);
                let p = projected.norm_squared();
                if p > OUTCOME_CUTOFF {
                    let normalized = projected / Complex64::new(p.sqrt(), 0.0);
                    outcomes.push(MeasurementOutcome {
                        value,
                        probability: p,
                        post_state: QState {
                            space: state.space.clone(),
                            data: StateData::Pure(normalized),
                        },
                    });
                }
            }
            StateData::Density(rho) => {
                // P rho P, applying the 2x2 projector on rows then columns.
                let mut tmp = rho.clone();
                for col in 0..dim {
                    let mut column = DVector::from_fn(dim, |r, _| tmp[(r, col)]);
                    column = apply_vec(&column);
                    for r in 0..dim {
                        tmp[(r, col)] = column[r];
                    }
                }
                for row in 0..dim {
                    let mut line = DVector::from_fn(dim, |c, _| tmp[(row, c)].conj());
                    line = apply_vec(&line);
                    for c in 0..dim {
                        tmp[(row, c)] = line[c].conj();
                    }
                }
                let p: f64 = (0..dim).map(|i| tmp[(i, i)].re).sum();
                if p > OUTCOME_CUTOFF {
                    let normalized = tmp / Complex64::new(p, 0.0);
                    outcomes.push(MeasurementOutcome {
                        value,
                        probability: p,
                        post_state: QState::density_unchecked(state.space.clone(), normalized),
                    });
                }
            }
        }
    }
    Ok(outcomes)
}

/// Fringe visibility 2 |<minus| rho |plus>| of a state against an orthonormal
/// pure pair; the pair must be orthonormal within 1e-8.
pub fn coherence_visibility(rho: &QState, plus: &QState, minus: &QState) -> Result<f64> {
    let p = plus.amplitudes().ok_or(Error::KindMismatch {
        detail: "visibility basis states must be pure".into(),
    })?;
    let m = minus.amplitudes().ok_or(Error::KindMismatch {
        detail: "visibility basis states must be pure".into(),
    })?;
    if plus.space != rho.space || minus.space != rho.space {
        return Err(Error::DimensionMismatch {
            detail: "visibility basis must live on the state's space".into(),
        });
    }
    let deviation = (p.norm() - 1.0)
        .abs()
        .max((m.norm() - 1.0).abs())
        .max(m.dotc(p).norm());
    if deviation > BASIS_TOL {
        return Err(Error::NonOrthonormalBasis { deviation });
    }
    let rho_m = rho.density_matrix();
    let cross = (m.adjoint() * &rho_m * p)[(0, 0)];
    Ok(2.0 * cross.norm())
}

// Serialized form: labeled factors, kind tag, and row-major amplitudes as
// interleaved re/im pairs (vector for pure, flattened matrix for density).
#[derive(Serialize, Deserialize)]
struct QStateRepr {
    space: Vec<SpaceLabel>,
    kind: String,
    amplitudes: Vec<f64>,
}

impl Serialize for QState {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let (kind, amplitudes) = match &self.data {
            StateData::Pure(v) => (
                "pure".to_string(),
                v.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<f64>>(),
            ),
            StateData::Density(m) => (
                "density".to_string(),
                (0..m.nrows())
                    .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                    .flat_map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
                    .collect(),
            ),
        };
        QStateRepr {
            space: self.space.clone(),
            kind,
            amplitudes,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QState {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = QStateRepr::deserialize(deserializer)?;
        let complex: Vec<Complex64> = repr
            .amplitudes
            .chunks(2)
            .map(|c| Complex64::new(c[0], *c.get(1).unwrap_or(&0.0)))
            .collect();
        if repr.amplitudes.len() % 2 != 0 {
            return Err(D::Error::custom(
                "amplitude list must interleave re/im pairs",
            ));
        }
        match repr.kind.as_str() {
            "pure" => QState::pure(repr.space, complex).map_err(D::Error::custom),
            "density" => {
                let dim = (complex.len() as f64).sqrt().round() as usize;
                if dim * dim != complex.len() {
                    return Err(D::Error::custom("density amplitude count is not a square"));
                }
                let m = DMatrix::from_fn(dim, dim, |i, j| complex[i * dim + j]);
                QState::density(repr.space, m).map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!("unknown state kind '{other}'"))),
        }
    }
}
