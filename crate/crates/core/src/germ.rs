//! Plane-curve germs in Weierstrass form and their basic invariants.

use crate::contour::{circle_nodes, poly_roots};
use crate::error::{Error, Result};
use crate::linalg::{determinant, CMat};
use crate::poly::{BiPoly, Poly};
use crate::series::{YPolySeries, EPS_VAL};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Relative size below which interpolated discriminant coefficients are
/// treated as zero.
pub const DISC_CLEAN: f64 = 1e-11;

/// A monic Weierstrass polynomial f(x, y) of degree d in y.
#[derive(Debug, Clone, PartialEq)]
pub struct Germ {
    /// The polynomial after the x-rescaling, monic in y.
    pub f: BiPoly,
    pub d: usize,
    pub r: usize,
    pub disc_x: Poly,
    pub delta1: f64,
    pub delta2: f64,
    /// The stored f is the input composed with x -> x_scale * x.
    pub x_scale: f64,
}

impl Germ {
    pub fn fy(&self) -> BiPoly {
        self.f.dy()
    }

    /// f as a y-polynomial over series of the given order.
    pub fn f_series(&self, order: i32) -> YPolySeries {
        YPolySeries::from_bipoly(&self.f, order)
    }

    pub fn label(&self) -> String {
        self.f.to_string()
    }
}

/// Sylvester matrix of two polynomials with ascending coefficients.
fn sylvester(p: &[C64], q: &[C64]) -> CMat {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    let mut s = CMat::zeros(size, size);
    for i in 0..n {
        for (k, &c) in p.iter().rev().enumerate() {
            s[(i, i + k)] = c;
        }
    }
    for i in 0..m {
        for (k, &c) in q.iter().rev().enumerate() {
            s[(n + i, i + k)] = c;
        }
    }
    s
}

/// Discriminant in y of a monic y-polynomial with numeric coefficients:
/// (-1)^{d(d-1)/2} Res_y(P, P_y).
pub fn discriminant_numeric(coeffs: &[C64]) -> C64 {
    let d = coeffs.len() - 1;
    if d == 0 {
        return C64::new(1.0, 0.0);
    }
    let dp: Vec<C64> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect();
    let det = determinant(&sylvester(coeffs, &dp));
    if (d * (d - 1) / 2) % 2 == 1 {
        -det
    } else {
        det
    }
}

/// Discriminant of a monic y-polynomial as an exact polynomial in x,
/// interpolated from Sylvester determinants on a circle.
pub fn discriminant_x(p: &BiPoly) -> Poly {
    let d = p.degree_y().unwrap_or(0);
    if d == 0 {
        return Poly::constant(C64::new(1.0, 0.0));
    }
    let bound = (d - 1) * p.degree_x() + d * p.dy().degree_x();
    let n = bound + 1;
    let nodes = circle_nodes(1.0, n);
    let values: Vec<C64> = nodes
        .iter()
        .map(|&x| discriminant_numeric(&p.at_x(x)))
        .collect();
    let coeffs: Vec<C64> = (0..n)
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for (k, v) in values.iter().enumerate() {
                acc += v * C64::from_polar(1.0, -2.0 * PI * ((j * k) % n) as f64 / n as f64);
            }
            acc / n as f64
        })
        .collect();
    let out = Poly::new(coeffs);
    let scale = out.max_abs();
    // keep exactly representable integers exact
    Poly::new(
        out.coeffs
            .iter()
            .map(|c| {
                if c.norm() <= DISC_CLEAN * scale {
                    C64::new(0.0, 0.0)
                } else {
                    let rounded = C64::new(c.re.round(), c.im.round());
                    if (c - rounded).norm() < 1e-9 * scale.max(1.0) {
                        rounded
                    } else {
                        *c
                    }
                }
            })
            .collect(),
    )
}

/// Order of vanishing of the discriminant at x = 0.
pub fn dimension(g: &Germ) -> usize {
    g.r
}

fn disc_order(disc: &Poly) -> Result<usize> {
    disc.vanishing_order(DISC_CLEAN)
        .ok_or_else(|| Error::DegenerateGerm("discriminant vanishes identically".into()))
}

/// Largest y-root modulus of f over the circle |x| = rho.
pub fn max_root_modulus(f: &BiPoly, rho: f64, m: usize) -> f64 {
    circle_nodes(rho, m)
        .iter()
        .flat_map(|&x| poly_roots(&f.at_x(x), None))
        .map(|y| y.norm())
        .fold(0.0, f64::max)
}

/// Nonzero roots of a polynomial.
fn nonzero_roots(p: &Poly) -> Vec<C64> {
    poly_roots(&p.coeffs, None)
        .into_iter()
        .filter(|z| *z != C64::new(0.0, 0.0))
        .collect()
}

/// Validate and normalize a germ given by terms coefficient * x^a * y^b.
pub fn normalize_germ(
    terms: &[(usize, usize, C64)],
    delta1: Option<f64>,
    delta2: Option<f64>,
) -> Result<Germ> {
    let raw = BiPoly::from_terms(terms);
    let d = raw
        .degree_y()
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::NotWeierstrass("no positive power of y".into()))?;
    let lead = raw.ycoeff(d);
    if lead.degree() != Some(0) {
        return Err(Error::NotWeierstrass(
            "coefficient of the top power of y depends on x".into(),
        ));
    }
    let f = raw.scale(C64::new(1.0, 0.0) / lead.coeff(0));
    for b in 0..d {
        let c0 = f.coeff(0, b);
        if c0.norm() > EPS_VAL {
            return Err(Error::NotWeierstrass(format!(
                "coefficient of y^{b} does not vanish at x = 0"
            )));
        }
    }
    let disc = discriminant_x(&f);
    if disc.is_zero() {
        return Err(Error::DegenerateGerm(
            "f_y vanishes on V(f): non-reduced input".into(),
        ));
    }
    let r = disc_order(&disc)?;

    let (delta1, x_scale) = match delta1 {
        Some(d1) => {
            if d1 <= 0.0 || !d1.is_finite() {
                return Err(Error::InvalidInput("delta1 must be positive".into()));
            }
            (d1, 1.0)
        }
        None => {
            let m = nonzero_roots(&disc)
                .iter()
                .map(|z| z.norm())
                .fold(f64::INFINITY, f64::min);
            (1.0, if m.is_finite() { (m / 2.0).min(1.0) } else { 1.0 })
        }
    };
    let f = if x_scale != 1.0 { f.scale_x(x_scale) } else { f };
    let disc = if x_scale != 1.0 { discriminant_x(&f) } else { disc };
    for z in nonzero_roots(&disc) {
        if z.norm() < delta1 {
            return Err(Error::OutOfDomain(format!(
                "branch point at |x| = {:.3e} inside the disc of radius {delta1}",
                z.norm()
            )));
        }
    }
    let reach = max_root_modulus(&f, delta1, 64);
    let delta2 = match delta2 {
        Some(d2) => {
            if d2 <= reach {
                return Err(Error::OutOfDomain(format!(
                    "y-roots reach |y| = {reach:.3e} >= delta2 = {d2}"
                )));
            }
            d2
        }
        None => {
            if reach > 0.0 {
                2.0 * reach
            } else {
                1.0
            }
        }
    };
    Ok(Germ {
        f,
        d,
        r,
        disc_x: disc,
        delta1,
        delta2,
        x_scale,
    })
}

/// Shorthand for germs with real coefficients, `(a, b, c)` meaning c x^a y^b.
pub fn germ_from_real_terms(terms: &[(usize, usize, f64)]) -> Result<Germ> {
    let t: Vec<(usize, usize, C64)> = terms
        .iter()
        .map(|&(a, b, c)| (a, b, C64::new(c, 0.0)))
        .collect();
    normalize_germ(&t, None, None)
}

/// The germ y^n - x^m.
pub fn quasi_homogeneous(n: usize, m: usize) -> Germ {
    germ_from_real_terms(&[(0, n, 1.0), (m, 0, -1.0)]).expect("y^n - x^m is a valid germ")
}
