//! Dense polynomials with complex coefficients in one, two and three
//! variables. These carry the exact (finitely supported) data: the germ f,
//! the family G(x, y, t) at a fixed t, and deformation paths F(x, y, s).

use num_complex::Complex64 as C64;
use std::fmt;

/// Horner evaluation of an ascending coefficient slice.
pub fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Value and first derivative at `z`.
pub fn horner_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn derivative_coeffs(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Univariate polynomial, coefficient of z^k at index k.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    pub fn monomial(k: usize, c: C64) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn eval(&self, z: C64) -> C64 {
        horner(&self.coeffs, z)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(derivative_coeffs(&self.coeffs))
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, n: usize) -> Poly {
        (0..n).fold(Poly::constant(C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// Substitute `inner` for the variable.
    pub fn compose(&self, inner: &Poly) -> Poly {
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, &c| acc.mul(inner).add(&Poly::constant(c)))
    }

    /// Order of vanishing at zero, counting coefficients with modulus at most
    /// `tol * max(1, max |c|)` as zero. `None` if everything is zero.
    pub fn vanishing_order(&self, tol: f64) -> Option<usize> {
        let scale = self.max_abs().max(1.0);
        self.coeffs.iter().position(|c| c.norm() > tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Zero out coefficients below `rel_tol * max |c|` and drop the tail.
    pub fn cleaned(&self, rel_tol: f64) -> Poly {
        let thr = rel_tol * self.max_abs();
        Poly::new(
            self.coeffs
                .iter()
                .map(|&c| if c.norm() <= thr { C64::new(0.0, 0.0) } else { c })
                .collect(),
        )
    }
}

/// Polynomial in (x, y): `ycoeffs[b]` is the coefficient of y^b, a
/// polynomial in x.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiPoly {
    pub ycoeffs: Vec<Poly>,
}

impl BiPoly {
    pub fn new(mut ycoeffs: Vec<Poly>) -> Self {
        while ycoeffs.last().is_some_and(|p| p.is_zero()) {
            ycoeffs.pop();
        }
        BiPoly { ycoeffs }
    }

    pub fn zero() -> Self {
        BiPoly::default()
    }

    /// Build from terms `coefficient * x^a * y^b`; repeated exponents add up.
    pub fn from_terms(terms: &[(usize, usize, C64)]) -> Self {
        let mut out = BiPoly::zero();
        for &(a, b, c) in terms {
            out = out.add(&BiPoly::monomial(a, b, c));
        }
        out
    }

    pub fn monomial(a: usize, b: usize, c: C64) -> Self {
        let mut ycoeffs = vec![Poly::zero(); b + 1];
        ycoeffs[b] = Poly::monomial(a, c);
        BiPoly::new(ycoeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.ycoeffs.is_empty()
    }

    pub fn degree_y(&self) -> Option<usize> {
        self.ycoeffs.len().checked_sub(1)
    }

    pub fn degree_x(&self) -> usize {
        self.ycoeffs
            .iter()
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn ycoeff(&self, b: usize) -> Poly {
        self.ycoeffs.get(b).cloned().unwrap_or_default()
    }

    /// Coefficient of x^a y^b.
    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        self.ycoeffs.get(b).map(|p| p.coeff(a)).unwrap_or_default()
    }

    /// The y-polynomial obtained by fixing x.
    pub fn at_x(&self, x: C64) -> Vec<C64> {
        self.ycoeffs.iter().map(|p| p.eval(x)).collect()
    }

    pub fn eval(&self, x: C64, y: C64) -> C64 {
        horner(&self.at_x(x), y)
    }

    pub fn dy(&self) -> BiPoly {
        BiPoly::new(
            self.ycoeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(b, p)| p.scale(C64::new(b as f64, 0.0)))
                .collect(),
        )
    }

    pub fn dx(&self) -> BiPoly {
        BiPoly::new(self.ycoeffs.iter().map(Poly::derivative).collect())
    }

    pub fn scale(&self, c: C64) -> BiPoly {
        BiPoly::new(self.ycoeffs.iter().map(|p| p.scale(c)).collect())
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let n = self.ycoeffs.len().max(other.ycoeffs.len());
        BiPoly::new(
            (0..n)
                .map(|b| self.ycoeff(b).add(&other.ycoeff(b)))
                .collect(),
        )
    }

    pub fn sub(&self, other: &BiPoly) -> BiPoly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        if self.is_zero() || other.is_zero() {
            return BiPoly::zero();
        }
        let mut out = vec![Poly::zero(); self.ycoeffs.len() + other.ycoeffs.len() - 1];
        for (i, a) in self.ycoeffs.iter().enumerate() {
            for (j, b) in other.ycoeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        BiPoly::new(out)
    }

    /// Substitute x -> -x.
    pub fn reflect_x(&self) -> BiPoly {
        BiPoly::new(
            self.ycoeffs
                .iter()
                .map(|p| {
                    Poly::new(
                        p.coeffs
                            .iter()
                            .enumerate()
                            .map(|(a, &c)| if a % 2 == 1 { -c } else { c })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    /// Coefficientwise complex conjugate, i.e. conj(p)(conj x, conj y).
    pub fn conj(&self) -> BiPoly {
        BiPoly::new(
            self.ycoeffs
                .iter()
                .map(|p| Poly::new(p.coeffs.iter().map(|c| c.conj()).collect()))
                .collect(),
        )
    }

    /// Substitute x -> lambda * x.
    pub fn scale_x(&self, lambda: f64) -> BiPoly {
        BiPoly::new(
            self.ycoeffs
                .iter()
                .map(|p| {
                    Poly::new(
                        p.coeffs
                            .iter()
                            .enumerate()
                            .map(|(a, &c)| c * lambda.powi(a as i32))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn distance(&self, other: &BiPoly) -> f64 {
        self.sub(other)
            .ycoeffs
            .iter()
            .map(Poly::max_abs)
            .fold(0.0, f64::max)
    }

    /// Nonzero terms as (a, b, c).
    pub fn terms(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for (b, p) in self.ycoeffs.iter().enumerate() {
            for (a, &c) in p.coeffs.iter().enumerate() {
                if c != C64::new(0.0, 0.0) {
                    out.push((a, b, c));
                }
            }
        }
        out
    }
}

fn fmt_monomial(a: usize, b: usize) -> String {
    let part = |v: &str, e: usize| match e {
        0 => None,
        1 => Some(v.to_string()),
        _ => Some(format!("{v}^{e}")),
    };
    let parts: Vec<String> = [part("x", a), part("y", b)].into_iter().flatten().collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// Label of the monomial x^a y^b, e.g. `"1"`, `"x"`, `"x*y"`, `"x^2*y"`.
pub fn monomial_label(a: usize, b: usize) -> String {
    fmt_monomial(a, b)
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = terms
            .iter()
            .map(|&(a, b, c)| {
                let mono = fmt_monomial(a, b);
                if c == C64::new(1.0, 0.0) {
                    mono
                } else if c.im == 0.0 {
                    format!("{}*{}", c.re, mono)
                } else {
                    format!("({}{:+}i)*{}", c.re, c.im, mono)
                }
            })
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

/// Polynomial in (x, y, s): `scoeffs[k]` is the coefficient of s^k.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriPoly {
    pub scoeffs: Vec<BiPoly>,
}

impl TriPoly {
    pub fn new(mut scoeffs: Vec<BiPoly>) -> Self {
        while scoeffs.last().is_some_and(|p| p.is_zero()) {
            scoeffs.pop();
        }
        TriPoly { scoeffs }
    }

    /// Terms `coefficient * x^a * y^b * s^k`.
    pub fn from_terms(terms: &[(usize, usize, usize, C64)]) -> Self {
        let kmax = terms.iter().map(|t| t.2).max().map_or(0, |k| k + 1);
        let mut scoeffs = vec![BiPoly::zero(); kmax];
        for &(a, b, k, c) in terms {
            scoeffs[k] = scoeffs[k].add(&BiPoly::monomial(a, b, c));
        }
        TriPoly::new(scoeffs)
    }

    pub fn constant_in_s(p: BiPoly) -> Self {
        TriPoly::new(vec![p])
    }

    pub fn at_s(&self, s: f64) -> BiPoly {
        let s = C64::new(s, 0.0);
        self.scoeffs
            .iter()
            .rev()
            .fold(BiPoly::zero(), |acc, p| acc.scale(s).add(p))
    }

    pub fn ds(&self) -> TriPoly {
        TriPoly::new(
            self.scoeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, p)| p.scale(C64::new(k as f64, 0.0)))
                .collect(),
        )
    }

    pub fn add(&self, other: &TriPoly) -> TriPoly {
        let n = self.scoeffs.len().max(other.scoeffs.len());
        let get = |v: &[BiPoly], k: usize| v.get(k).cloned().unwrap_or_default();
        TriPoly::new(
            (0..n)
                .map(|k| get(&self.scoeffs, k).add(&get(&other.scoeffs, k)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &TriPoly) -> TriPoly {
        if self.scoeffs.is_empty() || other.scoeffs.is_empty() {
            return TriPoly::default();
        }
        let mut out = vec![BiPoly::zero(); self.scoeffs.len() + other.scoeffs.len() - 1];
        for (i, a) in self.scoeffs.iter().enumerate() {
            for (j, b) in other.scoeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        TriPoly::new(out)
    }

    /// Substitute a polynomial sigma(s) for s.
    pub fn compose_s(&self, sigma: &Poly) -> TriPoly {
        let sig = TriPoly::new(
            sigma
                .coeffs
                .iter()
                .map(|&c| BiPoly::monomial(0, 0, c))
                .collect(),
        );
        self.scoeffs.iter().rev().fold(TriPoly::default(), |acc, p| {
            acc.mul(&sig).add(&TriPoly::constant_in_s(p.clone()))
        })
    }

    /// Substitute x -> lambda * x.
    pub fn scale_x(&self, lambda: f64) -> TriPoly {
        TriPoly::new(self.scoeffs.iter().map(|p| p.scale_x(lambda)).collect())
    }

    pub fn scale(&self, c: C64) -> TriPoly {
        TriPoly::new(self.scoeffs.iter().map(|p| p.scale(c)).collect())
    }

    /// Terms as (a, b, k, c).
    pub fn terms(&self) -> Vec<(usize, usize, usize, C64)> {
        self.scoeffs
            .iter()
            .enumerate()
            .flat_map(|(k, p)| p.terms().into_iter().map(move |(a, b, c)| (a, b, k, c)))
            .collect()
    }
}

/// p(x, u(x, y, s)) for a polynomial p in (x, y).
pub fn substitute_y(p: &BiPoly, u: &TriPoly) -> TriPoly {
    p.ycoeffs.iter().rev().fold(TriPoly::default(), |acc, c| {
        acc.mul(u)
            .add(&TriPoly::constant_in_s(BiPoly::new(vec![c.clone()])))
    })
}

/// A polynomial in s times a polynomial in (x, y).
pub fn s_times(phi: &Poly, g: &BiPoly) -> TriPoly {
    TriPoly::new(phi.coeffs.iter().map(|&c| g.scale(c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn horner_derivative() {
        // 1 + 2z + 3z^2 at z = 2: 17, derivative 2 + 6z = 14
        let (p, dp) = horner_with_derivative(&[c(1.0), c(2.0), c(3.0)], c(2.0));
        assert_eq!(p, c(17.0));
        assert_eq!(dp, c(14.0));
    }

    #[test]
    fn bipoly_derivatives() {
        // y^3 - x^2 + t x y
        let f = BiPoly::from_terms(&[(0, 3, c(1.0)), (2, 0, c(-1.0)), (1, 1, c(0.5))]);
        let x = C64::new(0.3, 0.1);
        let y = C64::new(-0.2, 0.4);
        let fy = f.dy().eval(x, y);
        let fx = f.dx().eval(x, y);
        assert!((fy - (3.0 * y * y + 0.5 * x)).norm() < 1e-15);
        assert!((fx - (-2.0 * x + 0.5 * y)).norm() < 1e-15);
    }

    #[test]
    fn reflect_and_labels() {
        let f = BiPoly::from_terms(&[(0, 4, c(1.0)), (2, 0, c(-1.0)), (1, 1, c(1.0))]);
        let g = f.reflect_x();
        assert_eq!(g.coeff(1, 1), c(-1.0));
        assert_eq!(g.coeff(2, 0), c(-1.0));
        assert_eq!(monomial_label(0, 0), "1");
        assert_eq!(monomial_label(1, 1), "x*y");
        assert_eq!(monomial_label(2, 1), "x^2*y");
    }

    #[test]
    fn substitution_in_y() {
        // y^2 with y -> y + s x gives y^2 + 2 s x y + s^2 x^2
        let p = BiPoly::monomial(0, 2, c(1.0));
        let u = TriPoly::from_terms(&[(0, 1, 0, c(1.0)), (1, 0, 1, c(1.0))]);
        let q = substitute_y(&p, &u);
        let want = TriPoly::from_terms(&[(0, 2, 0, c(1.0)), (1, 1, 1, c(2.0)), (2, 0, 2, c(1.0))]);
        assert_eq!(q, want);
    }

    #[test]
    fn compose_in_s() {
        // F = x * s^2, sigma = s + s^2 -> x (s + s^2)^2 = x (s^2 + 2 s^3 + s^4)
        let f = TriPoly::from_terms(&[(1, 0, 2, c(1.0))]);
        let g = f.compose_s(&Poly::new(vec![c(0.0), c(1.0), c(1.0)]));
        assert_eq!(g.at_s(0.5).coeff(1, 0), c(0.75 * 0.75));
        assert_eq!(g.scoeffs[3].coeff(1, 0), c(2.0));
    }
}
