//! Data-encoding circuits.
//!
//! Every `A*`/`B*` ansatz starts with a Hadamard on each qubit followed by
//! `RZ(2π x_i)` on qubit `i`. Type-A blocks add nearest-neighbour cross terms
//! `RZ(2π x_i x_{i+1})` on qubit `i+1`; when the ansatz is entangling the cross
//! term is sandwiched between `CNOT(i, i+1)` gates. Ansatz-B appends a CNOT
//! chain instead. The whole block is repeated `depth_repeats` times.
//!
//! `QuantumData` is the data-generating encoder: `RX(x_i)` on each qubit and a
//! fixed, seeded block of random `U3` layers separated by CNOT chains.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use super::state::{Gate, Statevector, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ansatz {
    A,
    A4,
    A4c,
    B,
    Bc,
    QuantumData,
}

impl Ansatz {
    pub const ALL: [Ansatz; 6] = [Ansatz::A, Ansatz::A4, Ansatz::A4c, Ansatz::B, Ansatz::Bc, Ansatz::QuantumData];

    pub fn has_cross_terms(self) -> bool {
        matches!(self, Ansatz::A | Ansatz::A4 | Ansatz::A4c)
    }

    pub fn has_cnot(self) -> bool {
        matches!(self, Ansatz::A | Ansatz::A4 | Ansatz::B | Ansatz::QuantumData)
    }

    pub fn default_depth(self) -> usize {
        match self {
            Ansatz::A4 | Ansatz::A4c => 4,
            Ansatz::QuantumData => 3,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Ansatz::A => "A",
            Ansatz::A4 => "A4",
            Ansatz::A4c => "A4c",
            Ansatz::B => "B",
            Ansatz::Bc => "Bc",
            Ansatz::QuantumData => "QuantumData",
        }
    }
}

impl fmt::Display for Ansatz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ansatz {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches("Ansatz-").trim_start_matches("ansatz-");
        Ansatz::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::Validation(format!("unknown ansatz '{s}'")))
    }
}

/// Declarative description of an encoding circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderSpec {
    pub ansatz: Ansatz,
    pub n: usize,
    pub depth_repeats: usize,
    #[serde(default)]
    pub random_seed: u64,
}

impl EncoderSpec {
    pub fn new(ansatz: Ansatz, n: usize) -> Result<Self> {
        let spec = Self { ansatz, n, depth_repeats: ansatz.default_depth(), random_seed: 0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn quantum_data(n: usize, random_seed: u64) -> Result<Self> {
        let mut spec = Self::new(Ansatz::QuantumData, n)?;
        spec.random_seed = random_seed;
        Ok(spec)
    }

    pub fn with_depth(mut self, depth_repeats: usize) -> Result<Self> {
        self.depth_repeats = depth_repeats;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(Error::Size(format!("encoder qubit count {} outside 1..={MAX_QUBITS}", self.n)));
        }
        if self.depth_repeats == 0 {
            return Err(Error::Validation("depth_repeats must be at least 1".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Short content hash used to tag exported kernel matrices.
    pub fn hash(&self) -> String {
        let text = self.to_text().unwrap_or_default();
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }

    /// Gate list for input `x`.
    pub fn compile(&self, x: &[f64]) -> Result<Vec<Gate>> {
        compile_encoder(self, x)
    }

    /// `U_enc(x)|0…0⟩`.
    pub fn encode(&self, x: &[f64]) -> Result<Statevector> {
        let gates = self.compile(x)?;
        let mut s = Statevector::zero(self.n)?;
        s.apply_all(&gates)?;
        Ok(s)
    }
}

pub fn compile_encoder(spec: &EncoderSpec, x: &[f64]) -> Result<Vec<Gate>> {
    spec.validate()?;
    let n = spec.n;
    if x.len() != n {
        return Err(Error::Shape(format!("input of length {} for a {n}-qubit encoder", x.len())));
    }
    if spec.ansatz == Ansatz::QuantumData {
        return Ok(quantum_data_gates(spec, x));
    }
    let mut block = Vec::new();
    block.extend((0..n).map(Gate::H));
    block.extend((0..n).map(|i| Gate::Rz(i, TAU * x[i])));
    if spec.ansatz.has_cross_terms() {
        for i in 0..n.saturating_sub(1) {
            let angle = TAU * x[i] * x[i + 1];
            if spec.ansatz.has_cnot() {
                block.push(Gate::Cnot { control: i, target: i + 1 });
                block.push(Gate::Rz(i + 1, angle));
                block.push(Gate::Cnot { control: i, target: i + 1 });
            } else {
                block.push(Gate::Rz(i + 1, angle));
            }
        }
    } else if spec.ansatz.has_cnot() {
        block.extend((0..n.saturating_sub(1)).map(|i| Gate::Cnot { control: i, target: i + 1 }));
    }
    let mut gates = Vec::with_capacity(block.len() * spec.depth_repeats);
    for _ in 0..spec.depth_repeats {
        gates.extend_from_slice(&block);
    }
    Ok(gates)
}

fn quantum_data_gates(spec: &EncoderSpec, x: &[f64]) -> Vec<Gate> {
    let n = spec.n;
    let mut gates: Vec<Gate> = (0..n).map(|i| Gate::Rx(i, x[i])).collect();
    gates.extend(random_block(n, spec.depth_repeats, spec.random_seed));
    gates
}

/// Fixed random circuit: `layers` rounds of random `U3` on every qubit, each
/// followed by a CNOT chain. Angles are uniform on `[0, 2π)`.
pub fn random_block(n: usize, layers: usize, seed: u64) -> Vec<Gate> {
    let mut gates = Vec::new();
    for layer in 0..layers {
        for q in 0..n {
            let mut r = rng::substream(seed, &[0x52_41_4E_44, layer as u64, q as u64]);
            let (a, b, c) = (r.random::<f64>() * TAU, r.random::<f64>() * TAU, r.random::<f64>() * TAU);
            gates.push(Gate::U3(q, a, b, c));
        }
        for q in 0..n.saturating_sub(1) {
            gates.push(Gate::Cnot { control: q, target: q + 1 });
        }
    }
    gates
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn bc_zero_input_is_plus_plus() {
        let spec = EncoderSpec::new(Ansatz::Bc, 2).unwrap();
        let s = spec.encode(&[0.0, 0.0]).unwrap();
        for a in s.amplitudes() {
            assert!((a - C64::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn b_and_bc_differ_by_cnot_layer() {
        let x = [0.3, -0.7, 0.1];
        let b = EncoderSpec::new(Ansatz::B, 3).unwrap().compile(&x).unwrap();
        let bc = EncoderSpec::new(Ansatz::Bc, 3).unwrap().compile(&x).unwrap();
        assert_eq!(&b[..bc.len()], &bc[..]);
        let extra = &b[bc.len()..];
        assert_eq!(extra, &[Gate::Cnot { control: 0, target: 1 }, Gate::Cnot { control: 1, target: 2 }]);
    }

    #[test]
    fn a4_is_four_a_blocks() {
        let x = [0.2, 0.4, -0.6, 0.9];
        let a = EncoderSpec::new(Ansatz::A, 4).unwrap().compile(&x).unwrap();
        let a4 = EncoderSpec::new(Ansatz::A4, 4).unwrap().compile(&x).unwrap();
        assert_eq!(a4.len(), 4 * a.len());
        for chunk in a4.chunks(a.len()) {
            assert_eq!(chunk, &a[..]);
        }
        let a4c = EncoderSpec::new(Ansatz::A4c, 4).unwrap().compile(&x).unwrap();
        assert!(a4c.iter().all(|g| !matches!(g, Gate::Cnot { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let spec = EncoderSpec::new(Ansatz::B, 3).unwrap();
        assert!(matches!(spec.compile(&[0.1, 0.2]), Err(Error::Shape(_))));
    }

    #[test]
    fn quantum_data_is_deterministic_per_seed() {
        let x = [1.0, 2.0, 3.0];
        let a = EncoderSpec::quantum_data(3, 11).unwrap().compile(&x).unwrap();
        let b = EncoderSpec::quantum_data(3, 11).unwrap().compile(&x).unwrap();
        let c = EncoderSpec::quantum_data(3, 12).unwrap().compile(&x).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a[..3], [Gate::Rx(0, 1.0), Gate::Rx(1, 2.0), Gate::Rx(2, 3.0)]);
    }

    #[test]
    fn text_round_trip_and_hash() {
        let spec = EncoderSpec::quantum_data(4, 99).unwrap();
        let text = spec.to_text().unwrap();
        assert_eq!(EncoderSpec::from_text(&text).unwrap(), spec);
        assert_eq!(spec.hash(), spec.clone().hash());
        assert_ne!(spec.hash(), EncoderSpec::new(Ansatz::B, 4).unwrap().hash());
        assert!(EncoderSpec::from_text("ansatz = \"B\"\nn = 2\ndepth_repeats = 1\nbogus = 3\n").is_err());
    }

    #[test]
    fn parses_names() {
        assert_eq!("Ansatz-A4c".parse::<Ansatz>().unwrap(), Ansatz::A4c);
        assert_eq!("bc".parse::<Ansatz>().unwrap(), Ansatz::Bc);
        assert!("C".parse::<Ansatz>().is_err());
    }
}
