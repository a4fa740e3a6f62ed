//! Helpers shared by the integration suites.

use num_complex::Complex64;

/// Reduced density matrix by direct index summation, the slow reference the
/// engine's partial trace is checked against.
pub fn brute_force_reduced(
    amps: &[Complex64],
    dims: &[usize],
    keep: &[usize],
) -> Vec<Vec<Complex64>> {
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let decode = |mut i: usize| {
        let mut idx = vec![0usize; dims.len()];
        for axis in (0..dims.len()).rev() {
            idx[axis] = i % dims[axis];
            i /= dims[axis];
        }
        idx
    };
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); kept_dim]; kept_dim];
    for i in 0..amps.len() {
        let vi = decode(i);
        for j in 0..amps.len() {
            let vj = decode(j);
            let traced_match = (0..dims.len())
                .filter(|a| !keep.contains(a))
                .all(|a| vi[a] == vj[a]);
            if !traced_match {
                continue;
            }
            let row = keep.iter().fold(0, |acc, &k| acc * dims[k] + vi[k]);
            let col = keep.iter().fold(0, |acc, &k| acc * dims[k] + vj[k]);
            rho[row][col] += amps[i] * amps[j].conj();
        }
    }
    rho
}

pub fn normalized(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}
