//! Exact re-verification of Farkas certificates.
//!
//! Every finite `f64` is a dyadic rational m·2^e, and sums and products of
//! dyadics stay dyadic, so the certificate inequality for the LP exactly as
//! stored can be decided with big-integer arithmetic and no rounding.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{FarkasCertificate, LinearProgram, Sense};

#[derive(Debug, Clone)]
struct Dyadic {
    m: BigInt,
    e: i64,
}

impl Dyadic {
    fn zero() -> Self {
        Self { m: BigInt::zero(), e: 0 }
    }

    fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        Self { m: BigInt::from(mant) * sign, e }
    }

    fn mul(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m, e: self.e + other.e }
    }

    fn sign(&self) -> i32 {
        if self.m.is_zero() {
            0
        } else if self.m.is_positive() {
            1
        } else {
            -1
        }
    }
}

fn sum(terms: &[Dyadic]) -> Dyadic {
    let nz: Vec<&Dyadic> = terms.iter().filter(|t| !t.m.is_zero()).collect();
    let Some(e_min) = nz.iter().map(|t| t.e).min() else {
        return Dyadic::zero();
    };
    let mut m = BigInt::zero();
    for t in nz {
        m += &t.m << ((t.e - e_min) as usize);
    }
    Dyadic { m, e: e_min }
}

/// Decides the certificate condition exactly: multiplier signs valid and
/// min over the box of (Σ yᵢ rowᵢ)·x strictly above Σ yᵢ rhsᵢ.
pub fn check_farkas_exact(lp: &LinearProgram, cert: &FarkasCertificate) -> bool {
    if cert.y.len() != lp.num_constraints() || cert.y.iter().any(|y| !y.is_finite()) {
        return false;
    }
    let n = lp.num_vars();
    let mut col_terms: Vec<Vec<Dyadic>> = vec![Vec::new(); n];
    let mut beta_terms = Vec::new();
    for (c, &y) in lp.constraints().iter().zip(&cert.y) {
        let ok = match c.sense {
            Sense::Le => y >= 0.0,
            Sense::Ge => y <= 0.0,
            Sense::Eq => true,
        };
        if !ok {
            return false;
        }
        if y == 0.0 {
            continue;
        }
        let yd = Dyadic::from_f64(y);
        for &(j, a) in &c.terms {
            col_terms[j].push(yd.mul(&Dyadic::from_f64(a)));
        }
        beta_terms.push(yd.mul(&Dyadic::from_f64(c.rhs)));
    }
    let mut total = Vec::with_capacity(n + 1);
    for (v, terms) in lp.variables().iter().zip(&col_terms) {
        let cj = sum(terms);
        match cj.sign() {
            1 => total.push(cj.mul(&Dyadic::from_f64(v.lower))),
            -1 => {
                if v.upper.is_infinite() {
                    return false;
                }
                total.push(cj.mul(&Dyadic::from_f64(v.upper)));
            }
            _ => {}
        }
    }
    let mut beta = sum(&beta_terms);
    beta.m = -beta.m;
    total.push(beta);
    sum(&total).sign() > 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_round_trip() {
        for x in [1.0, -0.1, 3.5e-300, 1e300, 5e-324, 0.225] {
            let d = Dyadic::from_f64(x);
            let back = d.m.to_string().parse::<f64>().unwrap() * 2f64.powi(d.e as i32);
            if d.e > -1000 && d.e < 900 {
                assert_eq!(back, x);
            }
        }
    }

    #[test]
    fn exact_sum_cancels() {
        let s = sum(&[Dyadic::from_f64(0.1), Dyadic::from_f64(0.2), Dyadic::from_f64(-0.1), Dyadic::from_f64(-0.2)]);
        assert_eq!(s.sign(), 0);
    }
}
