//! Dense statevector and the gate set used by the encoders and the qNN.
//!
//! Qubit `0` is the leftmost tensor factor, i.e. the most significant bit of
//! the basis index. A window of qubits `a..a+m` is therefore a contiguous bit
//! field, which keeps reduced density matrices and window operators simple.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 14;

/// A single gate of the supported set. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    Rx(usize, f64),
    /// `exp(-i θ Z / 2)`
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    /// Generic single-qubit rotation `U3(θ, φ, λ)`.
    U3(usize, f64, f64, f64),
}

impl Gate {
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Rz(q, _) | Gate::U3(q, ..) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    /// 2×2 matrix for single-qubit gates, `None` for CNOT.
    pub fn single_qubit_matrix(&self) -> Option<[[C64; 2]; 2]> {
        let z = C64::new(0.0, 0.0);
        match *self {
            Gate::H(_) => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                Some([[h, h], [h, -h]])
            }
            Gate::Rx(_, t) => {
                let c = C64::new((t / 2.0).cos(), 0.0);
                let s = C64::new(0.0, -(t / 2.0).sin());
                Some([[c, s], [s, c]])
            }
            Gate::Rz(_, t) => Some([[C64::from_polar(1.0, -t / 2.0), z], [z, C64::from_polar(1.0, t / 2.0)]]),
            Gate::U3(_, theta, phi, lambda) => Some(u3_matrix(theta, phi, lambda)),
            Gate::Cnot { .. } => None,
        }
    }
}

pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> [[C64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), -C64::from_polar(s, lambda)],
        [C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<C64>,
}

/// `|0…0⟩` on `n` qubits.
pub fn zero_state(n: usize) -> Result<Statevector> {
    Statevector::zero(n)
}

impl Statevector {
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Size(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes; the vector is normalized on the way in.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Size(format!("amplitude length {len} is not 2^n")));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::Size(format!("qubit count {n} above {MAX_QUBITS}")));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("state has zero or non-finite norm".into()));
        }
        Ok(Self { n, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Bit mask of qubit `q` inside a basis index.
    #[inline]
    pub(crate) fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::Index(format!("qubit {q} out of range for {} qubits", self.n)));
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Cnot { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(Error::Index(format!("CNOT control and target both {control}")));
                }
                let (cm, tm) = (self.mask(control), self.mask(target));
                for i in 0..self.amps.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amps.swap(i, i | tm);
                    }
                }
                Ok(())
            }
            Gate::H(q) | Gate::Rx(q, _) | Gate::Rz(q, _) | Gate::U3(q, ..) => {
                self.check_qubit(q)?;
                let u = gate.single_qubit_matrix().expect("single-qubit gate");
                self.apply_1q(q, &u);
                Ok(())
            }
        }
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    pub(crate) fn apply_1q(&mut self, q: usize, u: &[[C64; 2]; 2]) {
        let m = self.mask(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | m];
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i | m] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// Applies a `2^m × 2^m` unitary to the contiguous qubits `first..first+m`.
    pub fn apply_window(&mut self, first: usize, u: &DMatrix<C64>) -> Result<()> {
        let dim = u.nrows();
        if dim != u.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Shape(format!("window operator {}x{} is not 2^m square", u.nrows(), u.ncols())));
        }
        let m = dim.trailing_zeros() as usize;
        if first + m > self.n {
            return Err(Error::Index(format!("window {first}..{} exceeds {} qubits", first + m, self.n)));
        }
        let low = self.n - first - m;
        let high_count = 1usize << first;
        let low_count = 1usize << low;
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        for h in 0..high_count {
            for l in 0..low_count {
                let base = (h << (m + low)) | l;
                for (w, slot) in buf.iter_mut().enumerate() {
                    *slot = self.amps[base | (w << low)];
                }
                for r in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..dim {
                        acc += u[(r, c)] * buf[c];
                    }
                    self.amps[base | (r << low)] = acc;
                }
            }
        }
        Ok(())
    }

    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}
