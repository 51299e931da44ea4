use std::collections::BTreeMap;

use crate::coeff::{Coeff, Rational};

use super::grassmann::Grassmann;

pub type Exponent = [u8; 4];

fn total(e: &Exponent) -> u32 {
    e.iter().map(|&k| k as u32).sum()
}

/// Taylor expansion around the sample point, truncated at total degree
/// `order`: `Σ c_α y^α` with `y = X − x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    pub order: u32,
    coeffs: BTreeMap<Exponent, Grassmann>,
}

impl Jet {
    pub fn zero(order: u32) -> Self {
        Jet { order, coeffs: BTreeMap::new() }
    }

    pub fn constant(order: u32, g: Grassmann) -> Self {
        let mut j = Jet::zero(order);
        if !g.is_zero() {
            j.coeffs.insert([0; 4], g);
        }
        j
    }

    pub fn from_coeffs(order: u32, coeffs: impl IntoIterator<Item = (Exponent, Grassmann)>) -> Self {
        let mut j = Jet::zero(order);
        for (e, g) in coeffs {
            if total(&e) <= order && !g.is_zero() {
                let slot = j.coeffs.entry(e).or_default();
                *slot = slot.add(&g);
            }
        }
        j.coeffs.retain(|_, g| !g.is_zero());
        j
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value at the expansion point.
    pub fn value(&self) -> Grassmann {
        self.coeffs.get(&[0; 4]).cloned().unwrap_or_default()
    }

    pub fn truncate(&self, order: u32) -> Jet {
        Jet::from_coeffs(order, self.coeffs.iter().map(|(e, g)| (*e, g.clone())))
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let order = self.order.min(o.order);
        if order == 0 {
            return Jet::constant(0, self.value().add(&o.value()));
        }
        Jet::from_coeffs(order, self.coeffs.iter().chain(o.coeffs.iter()).map(|(e, g)| (*e, g.clone())))
    }

    pub fn scale(&self, c: &Coeff) -> Jet {
        Jet::from_coeffs(self.order, self.coeffs.iter().map(|(e, g)| (*e, g.scale(c))))
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let order = self.order.min(o.order);
        if order == 0 {
            return Jet::constant(0, self.value().mul(&o.value()));
        }
        let mut out: BTreeMap<Exponent, Grassmann> = BTreeMap::new();
        for (ea, ga) in &self.coeffs {
            for (eb, gb) in &o.coeffs {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                if total(&e) > order {
                    continue;
                }
                let p = ga.mul(gb);
                let slot = out.entry(e).or_default();
                *slot = slot.add(&p);
            }
        }
        out.retain(|_, g| !g.is_zero());
        Jet { order, coeffs: out }
    }

    /// `∂/∂X^m`; the result is exact to one order less.
    pub fn derivative(&self, m: usize) -> Jet {
        let order = self.order.saturating_sub(1);
        let mut out = Vec::new();
        for (e, g) in &self.coeffs {
            if e[m] == 0 {
                continue;
            }
            let mut lower = *e;
            lower[m] -= 1;
            out.push((lower, g.scale(&Coeff::int(e[m] as i64))));
        }
        Jet::from_coeffs(order, out)
    }
}

fn binomial(n: u8, k: u8) -> i64 {
    (0..k as i64).fold(1, |acc, i| acc * (n as i64 - i) / (i + 1))
}

/// Re-expand `Σ a_e X^e` around `x`, i.e. return the Taylor coefficients
/// of the polynomial in `y = X − x`.
pub fn recentre(poly: &[(Exponent, Rational)], x: &[Rational; 4]) -> Vec<(Exponent, Rational)> {
    let mut out: BTreeMap<Exponent, Rational> = BTreeMap::new();
    for (e, a) in poly {
        // Π_m Σ_k C(e_m, k) x_m^{e_m − k} y_m^k
        let mut partial: Vec<(Exponent, Rational)> = vec![([0; 4], a.clone())];
        for m in 0..4 {
            let mut next = Vec::new();
            for (pe, pc) in &partial {
                for k in 0..=e[m] {
                    let mut ne = *pe;
                    ne[m] = k;
                    let mut c = pc * Rational::from_integer(binomial(e[m], k) as i64);
                    for _ in 0..(e[m] - k) {
                        c *= &x[m];
                    }
                    next.push((ne, c));
                }
            }
            partial = next;
        }
        for (pe, pc) in partial {
            *out.entry(pe).or_insert_with(|| Rational::zero()) += pc;
        }
    }
    out.into_iter().filter(|(_, c)| *c != Rational::zero()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;

    fn scalar_jet(order: u32, c: &[(Exponent, i64)]) -> Jet {
        Jet::from_coeffs(order, c.iter().map(|(e, v)| (*e, Grassmann::scalar(Coeff::int(*v)))))
    }

    #[test]
    fn product_rule_holds_on_jets() {
        let f = scalar_jet(3, &[([0; 4], 2), ([1, 0, 0, 0], 3), ([0, 1, 0, 0], -1), ([2, 0, 0, 0], 5)]);
        let g = scalar_jet(3, &[([0; 4], -1), ([1, 0, 0, 0], 4), ([1, 1, 0, 0], 7)]);
        let lhs = f.mul(&g).derivative(0);
        let rhs = f.derivative(0).mul(&g.truncate(2)).add(&f.truncate(2).mul(&g.derivative(0)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn recentre_shifts_polynomials() {
        // X0² + 3 X1 around (1, 2, 0, 0) = y0² + 2 y0 + 1 + 3 y1 + 6
        let p = vec![([2, 0, 0, 0], rat(1, 1)), ([0, 1, 0, 0], rat(3, 1))];
        let x = [rat(1, 1), rat(2, 1), rat(0, 1), rat(0, 1)];
        let r: BTreeMap<_, _> = recentre(&p, &x).into_iter().collect();
        assert_eq!(r[&[0, 0, 0, 0]], rat(7, 1));
        assert_eq!(r[&[1, 0, 0, 0]], rat(2, 1));
        assert_eq!(r[&[2, 0, 0, 0]], rat(1, 1));
        assert_eq!(r[&[0, 1, 0, 0]], rat(3, 1));
    }
}
