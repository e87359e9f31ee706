//! RBF and ZZ feature-map fidelity kernels.
//!
//! The ZZ map with one repetition and full pairwise entanglement is a
//! Hadamard layer followed by gates that are all diagonal in the computational
//! basis, so the encoded state is `2^(-d/2) * sum_z exp(i theta_z(x)) |z>`. The
//! fidelity kernel therefore reduces to an inner product of cached phase
//! tables. [`statevector_oracle`] rebuilds the same state gate by gate as an
//! independent check.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::{Array2, ArrayView1, ArrayView2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{par, Error, Result};

/// Largest qubit count accepted by the statevector routines.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Quantum,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Rbf => "rbf",
            KernelKind::Quantum => "quantum",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            KernelKind::Rbf => "RBF-SVC",
            KernelKind::Quantum => "QSVC",
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbf" => Ok(KernelKind::Rbf),
            "quantum" => Ok(KernelKind::Quantum),
            other => Err(Error::InvalidArgument(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub values: Array2<f64>,
    pub kind: KernelKind,
    /// Set for train Gram matrices built from a single feature set.
    pub is_square_symmetric: bool,
}

impl KernelMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.values[[i, j]] - self.values[[j, i]]).abs());
            }
        }
        worst
    }

    pub fn max_diagonal_error(&self) -> f64 {
        self.values.diag().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.rows();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (self.values[[i, j]] + self.values[[j, i]]));
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_dims(x: &ArrayView2<f64>, y: &ArrayView2<f64>) -> Result<()> {
    if x.ncols() != y.ncols() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} features", x.ncols()),
            got: format!("{} features", y.ncols()),
        });
    }
    Ok(())
}

/// `1 / (d * var)` with `var` the population variance of every entry of `train`.
pub fn rbf_gamma_scale(train: &ArrayView2<f64>) -> Result<f64> {
    let n = train.len();
    if n == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let mean = train.iter().sum::<f64>() / n as f64;
    let var = train.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(1.0 / (train.ncols() as f64 * var))
}

fn rbf_entry(a: ArrayView1<f64>, b: ArrayView1<f64>, gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum();
    (-gamma * d2).exp()
}

/// Cross kernel `exp(-gamma |x_i - y_j|^2)`.
pub fn rbf_gram(x: &ArrayView2<f64>, y: &ArrayView2<f64>, gamma: f64) -> Result<KernelMatrix> {
    check_dims(x, y)?;
    let rows = par::map_range(x.nrows(), |i| {
        y.outer_iter().map(|b| rbf_entry(x.row(i), b, gamma)).collect::<Vec<f64>>()
    });
    Ok(KernelMatrix {
        values: stack(rows, x.nrows(), y.nrows()),
        kind: KernelKind::Rbf,
        is_square_symmetric: false,
    })
}

/// Symmetric train Gram with exact unit diagonal.
pub fn rbf_train_gram(x: &ArrayView2<f64>, gamma: f64) -> KernelMatrix {
    let n = x.nrows();
    let rows = par::map_range(n, |i| (0..i).map(|j| rbf_entry(x.row(i), x.row(j), gamma)).collect::<Vec<f64>>());
    KernelMatrix {
        values: mirror(rows, n, 1.0),
        kind: KernelKind::Rbf,
        is_square_symmetric: true,
    }
}

fn stack(rows: Vec<Vec<f64>>, n: usize, m: usize) -> Array2<f64> {
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n, m), flat).expect("row lengths match")
}

/// Builds a symmetric matrix from strictly-lower rows.
fn mirror(lower: Vec<Vec<f64>>, n: usize, diag: f64) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros((n, n));
    for (i, row) in lower.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
        out[[i, i]] = diag;
    }
    out
}

fn bit(z: usize, i: usize) -> usize {
    (z >> i) & 1
}

/// Diagonal phase the ZZ map accumulates on basis state `z`:
/// `sum_i 2 x_i b_i + sum_{i<j} 2 (pi - x_i)(pi - x_j) (b_i xor b_j)`.
pub fn zz_phase(x: &[f64], z: usize) -> f64 {
    let d = x.len();
    let mut theta = 0.0;
    for i in 0..d {
        if bit(z, i) == 1 {
            theta += 2.0 * x[i];
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if bit(z, i) != bit(z, j) {
                theta += 2.0 * (PI - x[i]) * (PI - x[j]);
            }
        }
    }
    theta
}

/// `exp(i theta_z(x))` for every basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable(pub Vec<Complex64>);

impl PhaseTable {
    pub fn new(x: &[f64]) -> Result<Self> {
        if x.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits(x.len()));
        }
        Ok(PhaseTable((0..1usize << x.len()).map(|z| Complex64::cis(zz_phase(x, z))).collect()))
    }

    /// `|2^-d sum_z conj(a_z) b_z|^2`.
    pub fn fidelity(&self, other: &PhaseTable) -> f64 {
        let overlap: Complex64 = self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum();
        (overlap / self.0.len() as f64).norm_sqr()
    }
}

fn phase_tables(x: &ArrayView2<f64>) -> Result<Vec<PhaseTable>> {
    if x.ncols() > MAX_QUBITS {
        return Err(Error::TooManyQubits(x.ncols()));
    }
    let tables = par::map_range(x.nrows(), |i| PhaseTable::new(&x.row(i).to_vec()));
    par::collect_results(tables)
}

/// Cross fidelity kernel between angle-encoded rows of `x` and `y`.
pub fn fidelity_kernel(x: &ArrayView2<f64>, y: &ArrayView2<f64>) -> Result<KernelMatrix> {
    check_dims(x, y)?;
    let tx = phase_tables(x)?;
    let ty = phase_tables(y)?;
    let rows = par::map_range(tx.len(), |i| ty.iter().map(|b| tx[i].fidelity(b)).collect::<Vec<f64>>());
    Ok(KernelMatrix {
        values: stack(rows, x.nrows(), y.nrows()),
        kind: KernelKind::Quantum,
        is_square_symmetric: false,
    })
}

/// Symmetric train Gram of the fidelity kernel. The diagonal is the computed
/// self-fidelity rather than a forced 1.
pub fn fidelity_train_gram(x: &ArrayView2<f64>) -> Result<KernelMatrix> {
    let t = phase_tables(x)?;
    let n = t.len();
    let rows = par::map_range(n, |i| (0..=i).map(|j| t[i].fidelity(&t[j])).collect::<Vec<f64>>());
    let mut out = Array2::<f64>::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    Ok(KernelMatrix {
        values: out,
        kind: KernelKind::Quantum,
        is_square_symmetric: true,
    })
}

/// Amplitudes of a `d`-qubit pure state; qubit `i` is bit `i` of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    pub amplitudes: Vec<Complex64>,
}

impl Statevector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector { amplitudes })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn hadamard(&mut self, q: usize) {
        let mask = 1 << q;
        for z in 0..self.amplitudes.len() {
            if z & mask == 0 {
                let a = self.amplitudes[z];
                let b = self.amplitudes[z | mask];
                self.amplitudes[z] = (a + b) * FRAC_1_SQRT_2;
                self.amplitudes[z | mask] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    /// `diag(1, e^{i lambda})` on qubit `q`.
    pub fn phase(&mut self, q: usize, lambda: f64) {
        let w = Complex64::cis(lambda);
        for (z, a) in self.amplitudes.iter_mut().enumerate() {
            if bit(z, q) == 1 {
                *a *= w;
            }
        }
    }

    /// Controlled-NOT as a permutation of basis indices.
    pub fn cx(&mut self, control: usize, target: usize) {
        let (cm, tm) = (1 << control, 1 << target);
        for z in 0..self.amplitudes.len() {
            if z & cm != 0 && z & tm == 0 {
                self.amplitudes.swap(z, z | tm);
            }
        }
    }

    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Gate-level simulation of the one-repetition ZZ feature map on `|0...0>`.
pub fn statevector_oracle(x: &[f64]) -> Result<Statevector> {
    let d = x.len();
    let mut sv = Statevector::zero(d)?;
    for q in 0..d {
        sv.hadamard(q);
    }
    for (q, &xq) in x.iter().enumerate() {
        sv.phase(q, 2.0 * xq);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            sv.cx(i, j);
            sv.phase(j, 2.0 * (PI - x[i]) * (PI - x[j]));
            sv.cx(i, j);
        }
    }
    Ok(sv)
}

/// `|<psi(x)|psi(y)>|^2` from two gate-level simulations.
pub fn oracle_kernel(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} features", x.len()),
            got: format!("{} features", y.len()),
        });
    }
    Ok(statevector_oracle(x)?.inner(&statevector_oracle(y)?).norm_sqr())
}
