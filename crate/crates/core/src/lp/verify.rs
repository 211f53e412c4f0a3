use super::{FarkasCertificate, LinearProgram, Sense};

/// Neumaier-compensated accumulator that also captures the rounding error of
/// each product through a fused multiply-add.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        self.add(p);
        self.add(e);
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// True iff `point` satisfies every bound and constraint within `tol`.
pub fn check_point(lp: &LinearProgram, point: &[f64], tol: f64) -> bool {
    if point.len() != lp.num_vars() || point.iter().any(|x| !x.is_finite()) {
        return false;
    }
    for (v, &x) in lp.variables().iter().zip(point) {
        if x < v.lower - tol || x > v.upper + tol {
            return false;
        }
    }
    for c in lp.constraints() {
        let mut s = CompensatedSum::default();
        for &(j, a) in &c.terms {
            s.add_product(a, point[j]);
        }
        s.add(-c.rhs);
        let r = s.value();
        let ok = match c.sense {
            Sense::Le => r <= tol,
            Sense::Ge => r >= -tol,
            Sense::Eq => r.abs() <= tol,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// min over the variable box of (Σ yᵢ rowᵢ)·x − Σ yᵢ rhsᵢ, or −∞ when the
/// multipliers have the wrong sign or the minimum is unbounded.
pub fn farkas_gap(lp: &LinearProgram, cert: &FarkasCertificate) -> f64 {
    if cert.y.len() != lp.num_constraints() || cert.y.iter().any(|y| !y.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let mut coeff = vec![CompensatedSum::default(); lp.num_vars()];
    let mut beta = CompensatedSum::default();
    for (c, &y) in lp.constraints().iter().zip(&cert.y) {
        let sign_ok = match c.sense {
            Sense::Le => y >= 0.0,
            Sense::Ge => y <= 0.0,
            Sense::Eq => true,
        };
        if !sign_ok {
            return f64::NEG_INFINITY;
        }
        if y == 0.0 {
            continue;
        }
        for &(j, a) in &c.terms {
            coeff[j].add_product(y, a);
        }
        beta.add_product(y, c.rhs);
    }
    let mut total = CompensatedSum::default();
    for (v, s) in lp.variables().iter().zip(&coeff) {
        let cj = s.value();
        if cj > 0.0 {
            total.add_product(cj, v.lower);
        } else if cj < 0.0 {
            if v.upper.is_infinite() {
                return f64::NEG_INFINITY;
            }
            total.add_product(cj, v.upper);
        }
    }
    total.add(-beta.value());
    total.value()
}

/// True iff the certificate proves infeasibility with a margin above `tol`.
pub fn check_farkas(lp: &LinearProgram, cert: &FarkasCertificate, tol: f64) -> bool {
    farkas_gap(lp, cert) > tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}
