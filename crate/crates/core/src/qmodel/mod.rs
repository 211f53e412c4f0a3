//! Quantum layer: two-qubit states, four-outcome POVMs, noise channels, the
//! triangle Born rule and the tilted-Bell-state-measurement (TBSM) family.

mod matrix;
mod noise;

pub use matrix::{kron, ComplexMatrix};
pub use noise::{
    apply_dephasing, apply_photon_loss, apply_white_meas, apply_white_state, lossy_povm,
    noclick_povm, noclick_povm_to, NoiseKind, NoiseSpec,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist::TriangleDistribution;
use crate::error::{Error, Result};

const STATE_TOL: f64 = 1e-12;
const POVM_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// Density matrix of a two-qubit source, basis order |00⟩,|01⟩,|10⟩,|11⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    density: ComplexMatrix,
}

impl TwoQubitState {
    pub fn new(density: ComplexMatrix) -> Result<Self> {
        if density.rows() != 4 || density.cols() != 4 {
            return Err(Error::DimensionMismatch("two-qubit state must be 4x4".into()));
        }
        if !density.is_hermitian(STATE_TOL) {
            return Err(Error::InvalidParam { name: "density", detail: "not Hermitian".into() });
        }
        let tr = density.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidParam { name: "density", detail: format!("trace {tr}") });
        }
        let min_ev = density.min_eigenvalue();
        if min_ev < -PSD_TOL {
            return Err(Error::InvalidParam {
                name: "density",
                detail: format!("negative eigenvalue {min_ev:e}"),
            });
        }
        Ok(Self { density })
    }

    pub fn pure(amplitudes: [Complex64; 4]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(&amplitudes))
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }
}

/// Four-outcome POVM on two qubits. Element `o` belongs to outcome
/// `(x1, x2) = (o >> 1, o & 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.len() != 4 {
            return Err(Error::DimensionMismatch(format!("{} POVM elements", elements.len())));
        }
        let mut sum = ComplexMatrix::zeros(4, 4);
        for (o, e) in elements.iter().enumerate() {
            if e.rows() != 4 || e.cols() != 4 {
                return Err(Error::DimensionMismatch("POVM elements must be 4x4".into()));
            }
            if !e.is_hermitian(POVM_TOL) {
                return Err(Error::InvalidParam {
                    name: "povm",
                    detail: format!("element {o} not Hermitian"),
                });
            }
            let min_ev = e.min_eigenvalue();
            if min_ev < -PSD_TOL {
                return Err(Error::InvalidParam {
                    name: "povm",
                    detail: format!("element {o} has eigenvalue {min_ev:e}"),
                });
            }
            sum = sum.add(e)?;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(4));
        if dev > POVM_TOL {
            return Err(Error::InvalidParam {
                name: "povm",
                detail: format!("elements sum to identity only within {dev:e}"),
            });
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, x1: u8, x2: u8) -> &ComplexMatrix {
        &self.elements[usize::from(2 * x1 + x2)]
    }

    pub fn labels() -> [(u8, u8); 4] {
        [(0, 0), (0, 1), (1, 0), (1, 1)]
    }

    /// True when every element is idempotent (a projector).
    pub fn is_projective(&self, tol: f64) -> bool {
        self.elements
            .iter()
            .all(|e| e.matmul(e).map(|sq| sq.max_abs_diff(e) <= tol).unwrap_or(false))
    }
}

/// Parameters of the TBSM family: the source state λ0|01⟩+λ1|10⟩ and the
/// measurement angles (u, v) = (cos φ_u, sin φ_u), (w, z) = (cos φ_w, sin φ_w).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TbsmParams {
    pub lambda0_sq: f64,
    pub phi_u: f64,
    pub phi_w: f64,
}

impl TbsmParams {
    pub fn new(lambda0_sq: f64, phi_u: f64, phi_w: f64) -> Result<Self> {
        let p = Self { lambda0_sq, phi_u, phi_w };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0_sq > 0.0 && self.lambda0_sq < 1.0) {
            return Err(Error::InvalidParam {
                name: "lambda0_sq",
                detail: format!("{} not in (0, 1)", self.lambda0_sq),
            });
        }
        if !self.phi_u.is_finite() || !self.phi_w.is_finite() {
            return Err(Error::InvalidParam { name: "phi", detail: "non-finite angle".into() });
        }
        Ok(())
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0_sq.sqrt()
    }

    pub fn lambda1(&self) -> f64 {
        (1.0 - self.lambda0_sq).sqrt()
    }
}

/// Qubit slots in the global order (A_L, A_R, B_L, B_R, C_L, C_R).
pub const SLOT_NAMES: [&str; 6] = ["A_L", "A_R", "B_L", "B_R", "C_L", "C_R"];

/// Assignment of the six source qubits (α₁, α₂, β₁, β₂, γ₁, γ₂) to party slots.
///
/// Source α feeds (B_L, C_R), β feeds (C_L, A_R), γ feeds (A_L, B_R). The
/// default puts each source's first tensor factor on the second slot of its
/// pair: α₁→C_R, β₁→A_R, γ₁→B_R.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wiring {
    slots: [usize; 6],
}

impl Default for Wiring {
    fn default() -> Self {
        Self { slots: [5, 2, 1, 4, 3, 0] }
    }
}

impl Wiring {
    pub fn new(slots: [usize; 6]) -> Result<Self> {
        let allowed = [[2, 5], [4, 1], [0, 3]];
        for (s, pair) in allowed.iter().enumerate() {
            let got = [slots[2 * s], slots[2 * s + 1]];
            let ok = (got[0] == pair[0] && got[1] == pair[1])
                || (got[0] == pair[1] && got[1] == pair[0]);
            if !ok {
                return Err(Error::InvalidParam {
                    name: "wiring",
                    detail: format!("source {s} mapped to slots {got:?}, expected {pair:?}"),
                });
            }
        }
        Ok(Self { slots })
    }

    pub fn slots(&self) -> [usize; 6] {
        self.slots
    }

    /// Maps a 6-bit index in slot order to the index in source-qubit order.
    fn slot_to_source_index(&self, s: usize) -> usize {
        let mut j = 0;
        for (k, &slot) in self.slots.iter().enumerate() {
            let bit = (s >> (5 - slot)) & 1;
            j |= bit << (5 - k);
        }
        j
    }
}

/// Three sources (α, β, γ) and three parties (A, B, C) on the triangle.
#[derive(Debug, Clone)]
pub struct QuantumTriangleModel {
    pub states: [TwoQubitState; 3],
    pub povms: [Povm; 3],
    pub wiring: Wiring,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The TBSM source state λ0|01⟩ + λ1|10⟩.
pub fn tbsm_state(p: &TbsmParams) -> Result<TwoQubitState> {
    p.validate()?;
    TwoQubitState::pure([c(0.0), c(p.lambda0()), c(p.lambda1()), c(0.0)])
}

/// Tilted Bell measurement with angles `phi_u` (x1 = 1 sector) and `phi_w` (x1 = 0 sector).
pub fn tbsm_povm(phi_u: f64, phi_w: f64) -> Result<Povm> {
    let (u, v) = (phi_u.cos(), phi_u.sin());
    let (w, z) = (phi_w.cos(), phi_w.sin());
    let vecs = [
        [c(w), c(0.0), c(0.0), c(z)],
        [c(z), c(0.0), c(0.0), c(-w)],
        [c(0.0), c(u), c(v), c(0.0)],
        [c(0.0), c(v), c(-u), c(0.0)],
    ];
    Povm::new(vecs.iter().map(|v| ComplexMatrix::outer(v)).collect())
}

pub fn tbsm_model(p: &TbsmParams) -> Result<QuantumTriangleModel> {
    let s = tbsm_state(p)?;
    let m = tbsm_povm(p.phi_u, p.phi_w)?;
    Ok(QuantumTriangleModel {
        states: [s.clone(), s.clone(), s],
        povms: [m.clone(), m.clone(), m],
        wiring: Wiring::default(),
    })
}

/// Born rule on the triangle: P(a,b,c) = Tr[(ρ^α⊗ρ^β⊗ρ^γ) (E^a⊗E^b⊗E^c)] with
/// the source product permuted into slot order.
pub fn born_rule(m: &QuantumTriangleModel) -> Result<TriangleDistribution> {
    let rho = kron(&kron(m.states[0].density(), m.states[1].density()), m.states[2].density());
    if rho.rows() != 64 {
        return Err(Error::DimensionMismatch("joint state must be 64x64".into()));
    }
    let perm: Vec<usize> = (0..64).map(|s| m.wiring.slot_to_source_index(s)).collect();
    let mut slot_rho = ComplexMatrix::zeros(64, 64);
    for s in 0..64 {
        for t in 0..64 {
            slot_rho.set(s, t, rho.get(perm[s], perm[t]));
        }
    }
    let mut table = vec![0.0; 64];
    for a in 0..4 {
        let ea = &m.povms[0].elements()[a];
        for b in 0..4 {
            let eab = kron(ea, &m.povms[1].elements()[b]);
            for cc in 0..4 {
                let e = kron(&eab, &m.povms[2].elements()[cc]);
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..64 {
                    for t in 0..64 {
                        acc += slot_rho.get(s, t) * e.get(t, s);
                    }
                }
                table[16 * a + 4 * b + cc] = acc.re;
            }
        }
    }
    let sum: f64 = table.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(Error::NonNormalized(sum));
    }
    for x in table.iter_mut() {
        if *x < 0.0 {
            if *x < -1e-12 {
                return Err(Error::NumericalFailure(format!("Born-rule entry {x:e}")));
            }
            *x = 0.0;
        }
    }
    TriangleDistribution::new(4, table)
}

/// Closed form of the noiseless TBSM distribution under the default wiring.
///
/// With U = (u, v), V = (v, −u), W = (w, z), Z = (z, −w):
/// P(1i,1j,1k) = (λ1³U_iU_jU_k + λ0³V_iV_jV_k)², and
/// P(1i,0j,0k) = (λ0λ1²U_iW_kZ_j + λ1λ0²V_iW_jZ_k)² with the same value at the
/// cyclic placements (0k,1i,0j) and (0j,0k,1i). Everything else vanishes.
pub fn tbsm_closed_form(p: &TbsmParams) -> Result<TriangleDistribution> {
    p.validate()?;
    let (l0, l1) = (p.lambda0(), p.lambda1());
    let (u, v) = (p.phi_u.cos(), p.phi_u.sin());
    let (w, z) = (p.phi_w.cos(), p.phi_w.sin());
    let uu = [u, v];
    let vv = [v, -u];
    let ww = [w, z];
    let zz = [z, -w];
    let mut table = vec![0.0; 64];
    let idx = |a: usize, b: usize, cc: usize| 16 * a + 4 * b + cc;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let s1 = l1.powi(3) * uu[i] * uu[j] * uu[k] + l0.powi(3) * vv[i] * vv[j] * vv[k];
                table[idx(2 + i, 2 + j, 2 + k)] = s1 * s1;
                let s2 = l0 * l1 * l1 * uu[i] * ww[k] * zz[j] + l1 * l0 * l0 * vv[i] * ww[j] * zz[k];
                let val = s2 * s2;
                table[idx(2 + i, j, k)] = val;
                table[idx(k, 2 + i, j)] = val;
                table[idx(j, k, 2 + i)] = val;
            }
        }
    }
    TriangleDistribution::new(4, table)
}

/// TBSM distribution with the given noise processes applied in order.
pub fn tbsm_distribution(p: &TbsmParams, noise: &[NoiseSpec]) -> Result<TriangleDistribution> {
    let mut model = tbsm_model(p)?;
    for n in noise {
        n.apply(&mut model, p)?;
    }
    born_rule(&model)
}
