//! Multivariate polynomials with integer coefficients, used to compare
//! interpreted rule sides.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A monomial: variables with positive exponents, sorted by name.
pub type Monomial = Vec<(Arc<str>, u32)>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, i64>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut m: BTreeMap<Arc<str>, u32> = a.iter().cloned().collect();
    for (x, e) in b {
        *m.entry(x.clone()).or_insert(0) += e;
    }
    m.into_iter().collect()
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn var(x: Arc<str>) -> Self {
        let mut p = Self::zero();
        p.add_term(vec![(x, 1)], 1);
        p
    }

    fn add_term(&mut self, m: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                out.add_term(mono_mul(m1, m2), c1 * c2);
            }
        }
        out
    }

    pub fn constant_term(&self) -> i64 {
        self.terms.get(&Vec::new()).copied().unwrap_or(0)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Monomial, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().map(|(_, e)| e).sum()).max().unwrap_or(0)
    }

    /// Absolute positiveness: every coefficient is non-negative, which makes
    /// the polynomial non-negative on all naturals.
    pub fn is_nonnegative(&self) -> bool {
        self.terms.values().all(|&c| c >= 0)
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> i64) -> i64 {
        self.terms
            .iter()
            .map(|(m, &c)| m.iter().fold(c, |acc, (x, e)| acc * env(x).pow(*e)))
            .sum()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // higher-degree monomials first, constant last
        let mut items: Vec<(&Monomial, i64)> = self.coefficients().collect();
        items.sort_by_key(|(m, _)| std::cmp::Reverse(m.iter().map(|(_, e)| *e).sum::<u32>()));
        for (i, (m, c)) in items.iter().enumerate() {
            let (sign, c) = if *c < 0 { ("-", -c) } else { ("+", *c) };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let vars: Vec<String> = m
                .iter()
                .map(|(x, e)| if *e == 1 { x.to_string() } else { format!("{x}^{e}") })
                .collect();
            match (c, vars.is_empty()) {
                (c, true) => write!(f, "{c}")?,
                (1, false) => write!(f, "{}", vars.join("*"))?,
                (c, false) => write!(f, "{c}*{}", vars.join("*"))?,
            }
        }
        Ok(())
    }
}
