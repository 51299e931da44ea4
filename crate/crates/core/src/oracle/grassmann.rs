use std::fmt;

use crate::coeff::Coeff;

/// Element of a finite Grassmann algebra with at most 128 generators,
/// stored as sorted (monomial mask, coefficient) pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Grassmann {
    terms: Vec<(u128, Coeff)>,
}

/// Sign of `θ_A θ_B` reordered into ascending generator order.
fn merge_sign(a: u128, b: u128) -> bool {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    swaps % 2 == 1
}

impl Grassmann {
    pub fn zero() -> Self {
        Grassmann::default()
    }

    pub fn scalar(c: Coeff) -> Self {
        Grassmann::monomial(0, c)
    }

    pub fn generator(g: u32) -> Self {
        Grassmann::monomial(1u128 << g, Coeff::one())
    }

    pub fn monomial(mask: u128, c: Coeff) -> Self {
        if c.is_zero() {
            Grassmann::zero()
        } else {
            Grassmann { terms: vec![(mask, c)] }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(u128, Coeff)] {
        &self.terms
    }

    /// Body (generator-free part).
    pub fn body(&self) -> Coeff {
        match self.terms.first() {
            Some((0, c)) => c.clone(),
            _ => Coeff::zero(),
        }
    }

    fn from_unsorted(mut v: Vec<(u128, Coeff)>) -> Self {
        v.sort_by_key(|(m, _)| *m);
        let mut out: Vec<(u128, Coeff)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += &c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Grassmann { terms: out }
    }

    pub fn add(&self, o: &Grassmann) -> Grassmann {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        let mut v = self.terms.clone();
        v.extend(o.terms.iter().cloned());
        Grassmann::from_unsorted(v)
    }

    pub fn scale(&self, c: &Coeff) -> Grassmann {
        if c.is_zero() {
            return Grassmann::zero();
        }
        Grassmann { terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect() }
    }

    pub fn mul(&self, o: &Grassmann) -> Grassmann {
        let mut v = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                if ma & mb != 0 {
                    continue;
                }
                let c = ca * cb;
                v.push((ma | mb, if merge_sign(*ma, *mb) { -c } else { c }));
            }
        }
        Grassmann::from_unsorted(v)
    }
}

impl fmt::Display for Grassmann {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if *m == 0 {
                    return c.to_string();
                }
                let gens: Vec<String> = (0..128).filter(|g| m >> g & 1 == 1).map(|g| format!("g{g}")).collect();
                format!("{c}*{}", gens.join("*"))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_anticommute_and_square_to_zero() {
        let a = Grassmann::generator(3);
        let b = Grassmann::generator(7);
        assert!(a.mul(&a).is_zero());
        assert!(a.mul(&b).add(&b.mul(&a)).is_zero());
        assert!(!a.mul(&b).is_zero());
    }

    #[test]
    fn three_generator_reordering() {
        let (a, b, c) = (Grassmann::generator(0), Grassmann::generator(1), Grassmann::generator(2));
        // θ2 θ0 θ1 = θ0 θ1 θ2 (two transpositions)
        assert_eq!(c.mul(&a).mul(&b), a.mul(&b).mul(&c));
        // θ1 θ0 θ2 = −θ0 θ1 θ2
        assert_eq!(b.mul(&a).mul(&c), a.mul(&b).mul(&c).scale(&Coeff::int(-1)));
    }

    #[test]
    fn even_elements_commute() {
        let x = Grassmann::generator(0).mul(&Grassmann::generator(5)).add(&Grassmann::scalar(Coeff::int(2)));
        let y = Grassmann::generator(1).mul(&Grassmann::generator(2));
        assert_eq!(x.mul(&y), y.mul(&x));
    }
}
