//! Truncated Laurent series in x and polynomials in y over them.

use crate::error::{Error, Result};
use crate::poly::{BiPoly, Poly};
use num_complex::Complex64 as C64;

/// Modulus below which a coefficient counts as zero in valuation and rank
/// decisions.
pub const EPS_VAL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A Laurent series known for exponents `valuation..order`. Exponents at or
/// above `order` are unknown, not zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncSeries {
    pub valuation: i32,
    pub coeffs: Vec<C64>,
    pub order: i32,
}

impl TruncSeries {
    /// Coefficients for `valuation..order`; `coeffs` is padded with zeros or
    /// cut to the right length.
    pub fn new(valuation: i32, mut coeffs: Vec<C64>, order: i32) -> Self {
        let len = (order - valuation).max(0) as usize;
        coeffs.resize(len, ZERO);
        TruncSeries {
            valuation: valuation.min(order),
            coeffs,
            order,
        }
    }

    pub fn zero(order: i32) -> Self {
        TruncSeries {
            valuation: order,
            coeffs: Vec::new(),
            order,
        }
    }

    pub fn constant(c: C64, order: i32) -> Self {
        TruncSeries::monomial(0, c, order)
    }

    pub fn one(order: i32) -> Self {
        TruncSeries::constant(ONE, order)
    }

    /// `c * x^k`.
    pub fn monomial(k: i32, c: C64, order: i32) -> Self {
        if k >= order {
            return TruncSeries::zero(order);
        }
        let mut coeffs = vec![ZERO; (order - k) as usize];
        coeffs[0] = c;
        TruncSeries {
            valuation: k,
            coeffs,
            order,
        }
    }

    /// Taylor series from ascending coefficients starting at x^0.
    pub fn from_coeffs(coeffs: &[C64], order: i32) -> Self {
        TruncSeries::new(0, coeffs.to_vec(), order)
    }

    pub fn from_poly(p: &Poly, order: i32) -> Self {
        TruncSeries::from_coeffs(&p.coeffs, order)
    }

    /// Coefficient of x^k; zero below the valuation and (by convention) at or
    /// above the order.
    pub fn coeff(&self, k: i32) -> C64 {
        if k < self.valuation || k >= self.order {
            ZERO
        } else {
            self.coeffs[(k - self.valuation) as usize]
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drop leading coefficients of modulus at most `eps`.
    pub fn normalized(&self, eps: f64) -> Self {
        match self.coeffs.iter().position(|c| c.norm() > eps) {
            Some(i) => TruncSeries {
                valuation: self.valuation + i as i32,
                coeffs: self.coeffs[i..].to_vec(),
                order: self.order,
            },
            None => TruncSeries::zero(self.order),
        }
    }

    /// Exponent of the first coefficient above `eps`, or `None`.
    pub fn leading_exponent(&self, eps: f64) -> Option<i32> {
        self.coeffs
            .iter()
            .position(|c| c.norm() > eps)
            .map(|i| self.valuation + i as i32)
    }

    fn stripped(&self) -> Self {
        self.normalized(0.0)
    }

    pub fn truncate(&self, order: i32) -> Self {
        if order >= self.order {
            return self.clone();
        }
        if order <= self.valuation {
            return TruncSeries::zero(order);
        }
        TruncSeries {
            valuation: self.valuation,
            coeffs: self.coeffs[..(order - self.valuation) as usize].to_vec(),
            order,
        }
    }

    /// Multiply by x^k.
    pub fn shift(&self, k: i32) -> Self {
        TruncSeries {
            valuation: self.valuation + k,
            coeffs: self.coeffs.clone(),
            order: self.order + k,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        TruncSeries {
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
            order: self.order,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-ONE)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let valuation = self.valuation.min(other.valuation).min(order);
        let coeffs = (valuation..order)
            .map(|k| self.coeff(k) + other.coeff(k))
            .collect();
        TruncSeries {
            valuation,
            coeffs,
            order,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Cauchy product; the order follows the usual propagation rule.
    pub fn mul(&self, other: &Self) -> Self {
        series_mul(self, other)
    }

    pub fn inv(&self) -> Result<Self> {
        series_inv(self)
    }

    /// Evaluate the stored terms at x.
    pub fn eval(&self, x: C64) -> C64 {
        let mut acc = ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc * x.powi(self.valuation)
    }
}

pub fn series_mul(a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
    let a = a.stripped();
    let b = b.stripped();
    let order = (a.order + b.valuation).min(b.order + a.valuation);
    let valuation = a.valuation + b.valuation;
    if valuation >= order {
        return TruncSeries::zero(order);
    }
    let n = (order - valuation) as usize;
    let mut coeffs = vec![ZERO; n];
    for (k, out) in coeffs.iter_mut().enumerate() {
        let mut acc = ZERO;
        for i in 0..=k.min(a.coeffs.len().saturating_sub(1)) {
            if let Some(&bc) = b.coeffs.get(k - i) {
                acc += a.coeffs[i] * bc;
            }
        }
        *out = acc;
    }
    TruncSeries {
        valuation,
        coeffs,
        order,
    }
}

pub fn series_inv(a: &TruncSeries) -> Result<TruncSeries> {
    let a = a.stripped();
    let lead = a.coeffs.first().copied().unwrap_or(ZERO);
    if lead.norm() <= EPS_VAL {
        return Err(Error::ZeroLeadingCoefficient {
            modulus: lead.norm(),
        });
    }
    let e = a.valuation;
    let n = a.coeffs.len();
    let inv_lead = ONE / lead;
    let mut c = vec![ZERO; n];
    c[0] = inv_lead;
    for k in 1..n {
        let mut acc = ZERO;
        for i in 1..=k {
            acc += a.coeffs[i] * c[k - i];
        }
        c[k] = -acc * inv_lead;
    }
    Ok(TruncSeries {
        valuation: -e,
        coeffs: c,
        order: a.order - 2 * e,
    })
}

/// Polynomial in y with truncated-series coefficients; `coeffs[k]` is the
/// coefficient of y^k.
#[derive(Debug, Clone, PartialEq)]
pub struct YPolySeries {
    pub coeffs: Vec<TruncSeries>,
}

impl YPolySeries {
    pub fn new(coeffs: Vec<TruncSeries>) -> Self {
        YPolySeries { coeffs }
    }

    pub fn zero(order: i32) -> Self {
        YPolySeries {
            coeffs: vec![TruncSeries::zero(order)],
        }
    }

    pub fn constant(c: TruncSeries) -> Self {
        YPolySeries { coeffs: vec![c] }
    }

    /// The polynomial `y`.
    pub fn y(order: i32) -> Self {
        YPolySeries {
            coeffs: vec![TruncSeries::zero(order), TruncSeries::one(order)],
        }
    }

    /// `c * x^a * y^b`.
    pub fn monomial(a: i32, b: usize, c: C64, order: i32) -> Self {
        let mut coeffs = vec![TruncSeries::zero(order); b + 1];
        coeffs[b] = TruncSeries::monomial(a, c, order);
        YPolySeries { coeffs }
    }

    pub fn from_bipoly(p: &BiPoly, order: i32) -> Self {
        if p.is_zero() {
            return YPolySeries::zero(order);
        }
        YPolySeries {
            coeffs: p
                .ycoeffs
                .iter()
                .map(|q| TruncSeries::from_poly(q, order))
                .collect(),
        }
    }

    /// Number of stored y-coefficients (the degree bound D).
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    /// Smallest truncation order among the coefficients.
    pub fn order(&self) -> i32 {
        self.coeffs.iter().map(|c| c.order).min().unwrap_or(i32::MAX)
    }

    /// Smallest valuation among the coefficients.
    pub fn valuation(&self) -> i32 {
        self.coeffs
            .iter()
            .map(|c| c.stripped().valuation)
            .min()
            .unwrap_or(i32::MAX)
    }

    pub fn coeff(&self, k: usize) -> TruncSeries {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| TruncSeries::zero(self.order()))
    }

    /// Drop top y-coefficients that are exactly zero (keeps at least one).
    pub fn trimmed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        YPolySeries { coeffs }
    }

    pub fn truncate(&self, order: i32) -> Self {
        YPolySeries {
            coeffs: self.coeffs.iter().map(|c| c.truncate(order)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let order = self.order().min(other.order());
        let get = |p: &Self, k: usize| {
            p.coeffs
                .get(k)
                .cloned()
                .unwrap_or_else(|| TruncSeries::zero(order))
        };
        YPolySeries {
            coeffs: (0..n).map(|k| get(self, k).add(&get(other, k))).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, c: C64) -> Self {
        YPolySeries {
            coeffs: self.coeffs.iter().map(|s| s.scale(c)).collect(),
        }
    }

    pub fn mul_series(&self, s: &TruncSeries) -> Self {
        YPolySeries {
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let order = self.order().min(other.order());
        let mut out: Vec<Option<TruncSeries>> = vec![None; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let p = a.mul(b);
                out[i + j] = Some(match out[i + j].take() {
                    Some(acc) => acc.add(&p),
                    None => p,
                });
            }
        }
        YPolySeries {
            coeffs: out
                .into_iter()
                .map(|c| c.unwrap_or_else(|| TruncSeries::zero(order)))
                .collect(),
        }
    }

    /// y-derivative.
    pub fn dy(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return YPolySeries::zero(self.order());
        }
        YPolySeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale(C64::new(k as f64, 0.0)))
                .collect(),
        }
    }

    /// Evaluate the stored jets at a point.
    pub fn eval(&self, x: C64, y: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(ZERO, |acc, c| acc * y + c.eval(x))
    }

    /// The y-coefficients evaluated at x.
    pub fn at_x(&self, x: C64) -> Vec<C64> {
        self.coeffs.iter().map(|c| c.eval(x)).collect()
    }

    /// Largest coefficient modulus over all stored terms.
    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .map(TruncSeries::max_abs)
            .fold(0.0, f64::max)
    }

    /// Largest coefficient modulus of `self - other` on the common range.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// Coefficient of x^a y^b.
    pub fn term(&self, a: i32, b: usize) -> C64 {
        self.coeffs.get(b).map(|c| c.coeff(a)).unwrap_or(ZERO)
    }

    /// Terms with nonnegative x-exponent as a polynomial, dropping the
    /// truncation.
    pub fn to_bipoly(&self) -> BiPoly {
        BiPoly::new(
            self.coeffs
                .iter()
                .map(|c| Poly::new((0..c.order.max(0)).map(|k| c.coeff(k)).collect()))
                .collect(),
        )
    }
}

/// Division with remainder by a monic y-polynomial. Returns
/// `(quotient, remainder)` with `p = quotient * m + remainder` and
/// `deg remainder < deg m`.
pub fn ypoly_divrem(p: &YPolySeries, m: &YPolySeries) -> (YPolySeries, YPolySeries) {
    let m = m.trimmed();
    let d = m.coeffs.len() - 1;
    let order = p.order().min(m.order());
    let mut r: Vec<TruncSeries> = p.coeffs.clone();
    if r.len() <= d {
        r.resize(d.max(1), TruncSeries::zero(order));
        return (YPolySeries::zero(order), YPolySeries { coeffs: r });
    }
    let mut q = vec![TruncSeries::zero(order); r.len() - d];
    for k in (d..r.len()).rev() {
        let lead = r[k].clone();
        if lead.is_exact_zero() {
            continue;
        }
        for j in 0..d {
            r[k - d + j] = r[k - d + j].sub(&lead.mul(&m.coeffs[j]));
        }
        q[k - d] = lead;
        r[k] = TruncSeries::zero(order);
    }
    r.truncate(d.max(1));
    (YPolySeries { coeffs: q }, YPolySeries { coeffs: r })
}

/// Remainder of `p` modulo the monic `m`.
pub fn ypoly_reduce(p: &YPolySeries, m: &YPolySeries) -> YPolySeries {
    ypoly_divrem(p, m).1
}

/// `p(x, u(x, y))` by Horner's scheme, without reduction.
pub fn ypoly_subst(p: &YPolySeries, u: &YPolySeries) -> YPolySeries {
    let mut it = p.coeffs.iter().rev();
    let Some(top) = it.next() else {
        return YPolySeries::zero(u.order());
    };
    let mut acc = YPolySeries::constant(top.clone());
    for c in it {
        acc = acc.mul(u).add(&YPolySeries::constant(c.clone()));
    }
    acc.trimmed()
}

/// Radii of the bidisc on which sup-norm estimates are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polydisc {
    pub rx: f64,
    pub ry: f64,
}

/// Majorant of `sup |p|` over the polydisc: the sum of |c| rx^a ry^b over
/// the stored terms.
pub fn majorant(p: &YPolySeries, disc: Polydisc) -> f64 {
    let mut total = 0.0;
    for (b, c) in p.coeffs.iter().enumerate() {
        for (i, z) in c.coeffs.iter().enumerate() {
            let a = c.valuation + i as i32;
            total += z.norm() * disc.rx.powi(a) * disc.ry.powi(b as i32);
        }
    }
    total
}

/// Inverse of the substitution y -> u(x, y): returns v with
/// `u(x, v(x, y)) = y` to the truncation order of u. Requires `u - y` to
/// vanish at x = 0 and `|u_y - 1| < 1/2` on the polydisc.
pub fn subst_invert(u: &YPolySeries, disc: Polydisc) -> Result<YPolySeries> {
    let order = u.order();
    let y = YPolySeries::y(order);
    let w = u.sub(&y);
    if w.valuation() < 1 {
        let offending = w
            .coeffs
            .iter()
            .filter_map(|c| c.leading_exponent(EPS_VAL))
            .min();
        if offending.is_some_and(|e| e < 1) {
            return Err(Error::NoContraction(
                "u - y does not vanish at x = 0".into(),
            ));
        }
    }
    let bound = majorant(&w.dy(), disc);
    if bound >= 0.5 {
        return Err(Error::NoContraction(format!(
            "sup |u_y - 1| estimate {bound:.3e} is not below 1/2"
        )));
    }
    let mut v = y.clone();
    for _ in 0..(order.max(0) as usize + 3) {
        let uv = ypoly_subst(u, &v);
        let next = y.sub(&uv.sub(&v)).trimmed();
        let delta = next.sub(&v);
        v = next;
        if delta.coeffs.iter().all(TruncSeries::is_exact_zero) {
            return Ok(v);
        }
    }
    Err(Error::TruncationUnstable(
        "substitution inverse did not settle at the truncation order".into(),
    ))
}

/// Formal Weierstrass preparation of a y-polynomial `p` whose x^0 slice is
/// `y^d` times a unit: returns `(w, e)` with `p = w * e`, `w` monic of degree d with lower
/// coefficients vanishing at x = 0 and `e` a unit.
pub fn weierstrass_prepare(p: &YPolySeries, d: usize) -> Result<(YPolySeries, YPolySeries)> {
    let order = p.order();
    if order <= 0 {
        return Err(Error::TruncationUnstable(
            "preparation needs a nonnegative truncation order".into(),
        ));
    }
    if p.valuation() < 0 {
        return Err(Error::NotWeierstrass("negative x-valuation".into()));
    }
    let n = order as usize;
    let deg = p.coeffs.len();
    // slices[k][b] = coefficient of x^k y^b
    let slices: Vec<Vec<C64>> = (0..n)
        .map(|k| (0..deg).map(|b| p.term(k as i32, b)).collect())
        .collect();
    // x^0 slice must be y^d times a unit e0 in y
    let low0 = slices[0][..d.min(deg)].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let e0: Vec<C64> = slices[0].get(d..).map(<[C64]>::to_vec).unwrap_or_default();
    let e0_lead = e0.first().copied().unwrap_or(ZERO);
    if low0 > 1e-12 || e0_lead.norm() <= EPS_VAL {
        return Err(Error::NotWeierstrass(format!(
            "x^0 slice is not y^{d} times a unit"
        )));
    }
    // inverse of e0 modulo y^d
    let mut e0_inv = vec![ZERO; d];
    if d > 0 {
        e0_inv[0] = ONE / e0_lead;
        for k in 1..d {
            let mut acc = ZERO;
            for i in 1..=k.min(e0.len() - 1) {
                acc += e0[i] * e0_inv[k - i];
            }
            e0_inv[k] = -acc / e0_lead;
        }
    }
    let mut f_slices: Vec<Vec<C64>> = vec![vec![ZERO; d]];
    let mut e_slices: Vec<Vec<C64>> = vec![e0.clone()];
    for k in 1..n {
        let mut r = slices[k].clone();
        for i in 1..k {
            let fi = &f_slices[i];
            let ej = &e_slices[k - i];
            let need = fi.len() + ej.len() - 1;
            if r.len() < need {
                r.resize(need, ZERO);
            }
            for (a, &fa) in fi.iter().enumerate() {
                for (b, &eb) in ej.iter().enumerate() {
                    r[a + b] -= fa * eb;
                }
            }
        }
        if r.len() < d {
            r.resize(d, ZERO);
        }
        let mut fk = vec![ZERO; d];
        for a in 0..d {
            for b in 0..d - a {
                fk[a + b] += r[a] * e0_inv[b];
            }
        }
        // r - fk * e0 is divisible by y^d
        let need = (d + e0.len()).max(r.len());
        r.resize(need, ZERO);
        for (a, &fa) in fk.iter().enumerate() {
            for (b, &eb) in e0.iter().enumerate() {
                r[a + b] -= fa * eb;
            }
        }
        let high = r[d..].to_vec();
        f_slices.push(fk);
        e_slices.push(if high.is_empty() { vec![ZERO] } else { high });
    }
    let w_coeffs: Vec<TruncSeries> = (0..=d)
        .map(|b| {
            if b == d {
                TruncSeries::one(order)
            } else {
                TruncSeries::from_coeffs(
                    &f_slices.iter().map(|s| s[b]).collect::<Vec<_>>(),
                    order,
                )
            }
        })
        .collect();
    let edeg = e_slices.iter().map(Vec::len).max().unwrap_or(1);
    let e_coeffs: Vec<TruncSeries> = (0..edeg)
        .map(|b| {
            TruncSeries::from_coeffs(
                &e_slices
                    .iter()
                    .map(|s| s.get(b).copied().unwrap_or(ZERO))
                    .collect::<Vec<_>>(),
                order,
            )
        })
        .collect();
    Ok((
        YPolySeries { coeffs: w_coeffs },
        YPolySeries { coeffs: e_coeffs }.trimmed(),
    ))
}

/// Samples of a function on the circle |x| = radius_x at M equally spaced
/// nodes, optionally several values per node.
#[derive(Debug, Clone, PartialEq)]
pub struct BiGrid {
    pub radius_x: f64,
    pub values: Vec<Vec<C64>>,
}

impl BiGrid {
    pub fn new(radius_x: f64, values: Vec<Vec<C64>>) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "node count {} is not a power of two",
                values.len()
            )));
        }
        if values.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("non-finite grid sample".into()));
        }
        Ok(BiGrid { radius_x, values })
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn mul_examples() {
        let a = TruncSeries::from_coeffs(&[c(1.0), c(1.0)], 8);
        let b = TruncSeries::from_coeffs(&[c(1.0), c(-1.0)], 8);
        let p = a.mul(&b);
        assert_eq!(p.order, 8);
        assert_eq!(p.coeff(0), c(1.0));
        assert_eq!(p.coeff(1), c(0.0));
        assert_eq!(p.coeff(2), c(-1.0));

        let xinv = TruncSeries::monomial(-1, c(1.0), 8);
        let x = TruncSeries::monomial(1, c(1.0), 8);
        let one = xinv.mul(&x);
        assert_eq!(one.valuation, 0);
        assert_eq!(one.coeff(0), c(1.0));

        let s = TruncSeries::from_coeffs(&[c(1.0), c(2.0), c(3.0)], 8);
        let sq = s.mul(&s);
        let want = [1.0, 4.0, 10.0, 12.0, 9.0, 0.0];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(sq.coeff(k as i32), c(*w));
        }
    }

    #[test]
    fn order_propagation() {
        // x^2 known to order 5 times 1 known to order 10: order min(5, 12)
        let a = TruncSeries::monomial(2, c(1.0), 5);
        let b = TruncSeries::one(10);
        assert_eq!(a.mul(&b).order, 5);
        assert_eq!(b.mul(&a).order, 5);
        let a = TruncSeries::monomial(2, c(1.0), 10);
        let b = TruncSeries::one(5);
        assert_eq!(a.mul(&b).order, 7);
    }

    #[test]
    fn inv_examples() {
        let a = TruncSeries::from_coeffs(&[c(1.0), c(-1.0)], 5);
        let i = a.inv().unwrap();
        for k in 0..5 {
            assert_eq!(i.coeff(k), c(1.0));
        }
        let x2 = TruncSeries::monomial(2, c(1.0), 8);
        let i = x2.inv().unwrap();
        assert_eq!(i.valuation, -2);
        assert_eq!(i.coeff(-2), c(1.0));

        let a = TruncSeries::from_coeffs(&[c(2.0), c(1.0)], 3);
        let i = a.inv().unwrap();
        assert_eq!(i.coeff(0), c(0.5));
        assert_eq!(i.coeff(1), c(-0.25));
        assert_eq!(i.coeff(2), c(0.125));
        assert_eq!(i.order, 3);

        let tiny = TruncSeries::from_coeffs(&[c(1e-12), c(1.0)], 4);
        assert!(matches!(
            tiny.inv(),
            Err(Error::ZeroLeadingCoefficient { .. })
        ));
    }

    fn cusp(order: i32) -> YPolySeries {
        YPolySeries::from_bipoly(
            &BiPoly::from_terms(&[(0, 3, c(1.0)), (2, 0, c(-1.0))]),
            order,
        )
    }

    #[test]
    fn reduce_examples() {
        let f = cusp(10);
        let r = ypoly_reduce(&YPolySeries::monomial(0, 3, c(1.0), 10), &f);
        assert_eq!(r.term(2, 0), c(1.0));
        assert_eq!(r.max_abs(), 1.0);

        let r = ypoly_reduce(&YPolySeries::monomial(0, 4, c(1.0), 10), &f);
        assert_eq!(r.term(2, 1), c(1.0));
        assert_eq!(r.coeffs.len(), 3);
        assert_eq!(r.sub(&YPolySeries::monomial(2, 1, c(1.0), 10)).max_abs(), 0.0);

        let p = YPolySeries::monomial(0, 2, c(1.0), 10).add(&YPolySeries::monomial(0, 0, c(1.0), 10));
        let r = ypoly_reduce(&p, &f);
        assert_eq!(r.sub(&p).max_abs(), 0.0);
    }

    #[test]
    fn subst_examples() {
        let n = 10;
        let u = YPolySeries::y(n).add(&YPolySeries::monomial(1, 0, c(1.0), n));
        let s = ypoly_subst(&YPolySeries::monomial(0, 2, c(1.0), n), &u);
        assert_eq!(s.term(0, 2), c(1.0));
        assert_eq!(s.term(1, 1), c(2.0));
        assert_eq!(s.term(2, 0), c(1.0));

        let y = YPolySeries::y(n);
        assert_eq!(ypoly_subst(&y, &y).distance(&y), 0.0);

        let s = ypoly_subst(&cusp(n), &u);
        let want = BiPoly::from_terms(&[
            (0, 3, c(1.0)),
            (1, 2, c(3.0)),
            (2, 1, c(3.0)),
            (3, 0, c(1.0)),
            (2, 0, c(-1.0)),
        ]);
        assert_eq!(s.to_bipoly().distance(&want), 0.0);
    }

    #[test]
    fn invert_examples() {
        let n = 6;
        let disc = Polydisc { rx: 0.25, ry: 0.5 };
        let y = YPolySeries::y(n);
        assert_eq!(subst_invert(&y, disc).unwrap().distance(&y), 0.0);

        let u = y.add(&YPolySeries::monomial(1, 0, c(1.0), n));
        let v = subst_invert(&u, disc).unwrap();
        assert_eq!(v.distance(&y.sub(&YPolySeries::monomial(1, 0, c(1.0), n))), 0.0);

        let u = y.add(&YPolySeries::monomial(1, 2, c(1.0), n));
        let v = subst_invert(&u, disc).unwrap();
        assert_eq!(v.term(0, 1), c(1.0));
        assert_eq!(v.term(1, 2), c(-1.0));
        assert_eq!(v.term(2, 3), c(2.0));
        assert_eq!(v.term(3, 4), c(-5.0));
        assert_eq!(v.term(4, 5), c(14.0));
        let back = ypoly_subst(&u, &v);
        assert!(back.distance(&y) < 1e-12);
    }

    #[test]
    fn invert_rejects_non_contraction() {
        let n = 6;
        let y = YPolySeries::y(n);
        let u = y.add(&YPolySeries::monomial(0, 0, c(0.1), n));
        assert!(matches!(
            subst_invert(&u, Polydisc { rx: 0.5, ry: 0.5 }),
            Err(Error::NoContraction(_))
        ));
        let u = y.add(&YPolySeries::monomial(1, 2, c(4.0), n));
        assert!(matches!(
            subst_invert(&u, Polydisc { rx: 0.5, ry: 0.5 }),
            Err(Error::NoContraction(_))
        ));
    }

    #[test]
    fn prepare_recovers_factors() {
        let n = 12;
        // (y^2 - x) * (1 + y + x)
        let w = YPolySeries::from_bipoly(&BiPoly::from_terms(&[(0, 2, c(1.0)), (1, 0, c(-1.0))]), n);
        let e = YPolySeries::from_bipoly(
            &BiPoly::from_terms(&[(0, 0, c(1.0)), (0, 1, c(1.0)), (1, 0, c(1.0))]),
            n,
        );
        let p = w.mul(&e);
        let (w2, e2) = weierstrass_prepare(&p, 2).unwrap();
        assert!(w2.distance(&w) < 1e-13);
        assert!(e2.distance(&e) < 1e-13);
    }
}
