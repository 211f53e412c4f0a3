use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, Povm, QuantumTriangleModel, TbsmParams, TwoQubitState};
use crate::error::{check_unit, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    Dephasing,
    WhiteState,
    WhiteMeas,
    NoClick,
    PhotonLoss,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::Dephasing => "dephasing",
            NoiseKind::WhiteState => "white_state",
            NoiseKind::WhiteMeas => "white_meas",
            NoiseKind::NoClick => "no_click",
            NoiseKind::PhotonLoss => "photon_loss",
        }
    }

    /// Noise at strength `level`, where 0 is noiseless. For photon loss the
    /// level is the loss probability 1 − η.
    pub fn at_level(self, level: f64) -> NoiseSpec {
        let param = match self {
            NoiseKind::PhotonLoss => 1.0 - level,
            _ => level,
        };
        NoiseSpec { kind: self, param }
    }

    pub fn level_of(self, param: f64) -> f64 {
        match self {
            NoiseKind::PhotonLoss => 1.0 - param,
            _ => param,
        }
    }
}

/// A noise process and its parameter (d, ω, ω', p or η).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub param: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { kind: NoiseKind::None, param: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("noise.param", self.param)
    }

    /// Applies the noise to every source or every party of `m`. Photon loss
    /// acts on whatever measurement the model carries.
    pub fn apply(&self, m: &mut QuantumTriangleModel, _p: &TbsmParams) -> Result<()> {
        self.validate()?;
        match self.kind {
            NoiseKind::None => {}
            NoiseKind::Dephasing => {
                for s in m.states.iter_mut() {
                    *s = apply_dephasing(s, self.param)?;
                }
            }
            NoiseKind::WhiteState => {
                for s in m.states.iter_mut() {
                    *s = apply_white_state(s, self.param)?;
                }
            }
            NoiseKind::WhiteMeas => {
                for e in m.povms.iter_mut() {
                    *e = apply_white_meas(e, self.param)?;
                }
            }
            NoiseKind::NoClick => {
                for e in m.povms.iter_mut() {
                    *e = noclick_povm(e, self.param)?;
                }
            }
            NoiseKind::PhotonLoss => {
                for e in m.povms.iter_mut() {
                    *e = apply_photon_loss(e, self.param)?;
                }
            }
        }
        Ok(())
    }
}

/// (1−d)ρ + d(ρ₀₁|01⟩⟨01| + ρ₁₀|10⟩⟨10|), for states living on span{|01⟩,|10⟩}.
pub fn apply_dephasing(s: &TwoQubitState, d: f64) -> Result<TwoQubitState> {
    check_unit("d", d)?;
    let rho = s.density();
    for i in 0..4 {
        for j in 0..4 {
            let inside = (i == 1 || i == 2) && (j == 1 || j == 2);
            if !inside && rho.get(i, j).norm() > 1e-12 {
                return Err(Error::InvalidParam {
                    name: "state",
                    detail: "dephasing is defined on span{|01>,|10>} only".into(),
                });
            }
        }
    }
    let mut diag = ComplexMatrix::zeros(4, 4);
    diag.set(1, 1, rho.get(1, 1));
    diag.set(2, 2, rho.get(2, 2));
    TwoQubitState::new(rho.scale(1.0 - d).add(&diag.scale(d))?)
}

/// (1−ω)ρ + ω 𝟙/4.
pub fn apply_white_state(s: &TwoQubitState, omega: f64) -> Result<TwoQubitState> {
    check_unit("omega", omega)?;
    let mixed = ComplexMatrix::identity(4).scale(0.25);
    TwoQubitState::new(s.density().scale(1.0 - omega).add(&mixed.scale(omega))?)
}

/// E = (1−ω')Π + ω' 𝟙/4 for every element.
pub fn apply_white_meas(m: &Povm, omega: f64) -> Result<Povm> {
    check_unit("omega_meas", omega)?;
    let mixed = ComplexMatrix::identity(4).scale(0.25 * omega);
    let elements = m
        .elements()
        .iter()
        .map(|e| e.scale(1.0 - omega).add(&mixed))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements)
}

/// No-click with probability `p`, relabelled to outcome (1, 0).
pub fn noclick_povm(m: &Povm, p: f64) -> Result<Povm> {
    noclick_povm_to(m, p, (1, 0))
}

/// No-click with probability `p`, relabelled to `target`.
pub fn noclick_povm_to(m: &Povm, p: f64, target: (u8, u8)) -> Result<Povm> {
    check_unit("p", p)?;
    if target.0 > 1 || target.1 > 1 {
        return Err(Error::InvalidParam { name: "target", detail: format!("{target:?}") });
    }
    if !m.is_projective(1e-10) {
        return Err(Error::InvalidParam { name: "povm", detail: "not projective".into() });
    }
    let t = usize::from(2 * target.0 + target.1);
    let elements = m
        .elements()
        .iter()
        .enumerate()
        .map(|(o, e)| {
            let e = e.scale(1.0 - p);
            if o == t {
                e.add(&ComplexMatrix::identity(4).scale(p))
            } else {
                Ok(e)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements)
}

/// Single-photon loss before the measurement: E = Σᵢⱼ (Kᵢ⊗Kⱼ)† Π (Kᵢ⊗Kⱼ) with
/// K₀ = |0⟩⟨0| + √η|1⟩⟨1| and K₁ = √(1−η)|0⟩⟨1|.
pub fn apply_photon_loss(m: &Povm, eta: f64) -> Result<Povm> {
    check_unit("eta", eta)?;
    let k0 = ComplexMatrix::diag(&[1.0, eta.sqrt()]);
    let mut k1 = ComplexMatrix::zeros(2, 2);
    k1.set(0, 1, Complex64::new((1.0 - eta).sqrt(), 0.0));
    let ks = [k0, k1];
    let mut krons = Vec::with_capacity(4);
    for ki in &ks {
        for kj in &ks {
            krons.push(super::kron(ki, kj));
        }
    }
    let elements = m
        .elements()
        .iter()
        .map(|pi| {
            let mut acc = ComplexMatrix::zeros(4, 4);
            for k in &krons {
                acc = acc.add(&k.adjoint().matmul(pi)?.matmul(k)?)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements)
}

/// Lossy version of the w = 1 tilted Bell measurement.
pub fn lossy_povm(eta: f64, phi_u: f64) -> Result<Povm> {
    apply_photon_loss(&super::tbsm_povm(phi_u, 0.0)?, eta)
}
