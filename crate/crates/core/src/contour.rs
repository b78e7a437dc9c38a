//! Numerics on circles in the x-plane: polynomial roots per node, trapezoid
//! residues, Cauchy coefficient extraction and preparation by power sums.

use crate::error::{Error, Result};
use crate::poly::horner_with_derivative;
use crate::series::TruncSeries;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Default contour node count.
pub const DEFAULT_NODES: usize = 256;
/// Minimal root separation over a contour.
pub const SEP_TOL: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);

/// The M nodes rho * exp(2 pi i k / M).
pub fn circle_nodes(rho: f64, m: usize) -> Vec<C64> {
    (0..m)
        .map(|k| C64::from_polar(rho, 2.0 * PI * k as f64 / m as f64))
        .collect()
}

/// All roots of a polynomial given by ascending coefficients, by
/// Aberth-Ehrlich iteration followed by a Newton polish. Trailing zero
/// coefficients are dropped; exact zero roots are split off first. `init`
/// optionally supplies starting points (one per root after removal of the
/// zero roots).
pub fn poly_roots(coeffs: &[C64], init: Option<&[C64]>) -> Vec<C64> {
    let mut c: Vec<C64> = coeffs.to_vec();
    while c.last().is_some_and(|z| *z == ZERO) {
        c.pop();
    }
    if c.len() <= 1 {
        return Vec::new();
    }
    let zeros = c.iter().take_while(|z| **z == ZERO).count();
    let c = &c[zeros..];
    let n = c.len() - 1;
    let mut roots = vec![ZERO; zeros];
    if n == 0 {
        return roots;
    }
    let lead = c[n];
    let monic: Vec<C64> = c.iter().map(|z| z / lead).collect();
    if n == 1 {
        roots.push(-monic[0]);
        return roots;
    }
    let mut z: Vec<C64> = match init {
        Some(s) if s.len() == n => s.to_vec(),
        _ => newton_polygon_start(&monic),
    };
    let abs_coeffs: Vec<f64> = monic.iter().map(|a| a.norm()).collect();
    let mut frozen = vec![false; n];
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let (p, dp) = horner_with_derivative(&monic, z[i]);
            let noise = 8.0 * f64::EPSILON * abs_coeffs.iter().rev().fold(0.0, |acc, a| acc * z[i].norm() + a);
            if p.norm() <= noise {
                frozen[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut sum = ZERO;
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff != ZERO {
                        sum += 1.0 / diff;
                    }
                }
            }
            let denom = 1.0 - ratio * sum;
            let step = if denom == ZERO || !denom.is_finite() {
                ratio
            } else {
                ratio / denom
            };
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-14 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner_with_derivative(&monic, *zi);
            if dp == ZERO {
                break;
            }
            let cand = *zi - p / dp;
            let (pc, _) = horner_with_derivative(&monic, cand);
            if pc.norm() < p.norm() {
                *zi = cand;
            } else {
                break;
            }
        }
    }
    roots.extend(z);
    roots
}

/// Starting points on circles whose radii come from the upper convex hull
/// of (k, log|a_k|).
fn newton_polygon_start(monic: &[C64]) -> Vec<C64> {
    let n = monic.len() - 1;
    let pts: Vec<(usize, f64)> = monic
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != ZERO)
        .map(|(k, a)| (k, a.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (k1, l1) = hull[hull.len() - 2];
            let (k2, l2) = hull[hull.len() - 1];
            let cross = (k2 - k1) as f64 * (p.1 - l1) - (l2 - l1) * (p.0 - k1) as f64;
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut z = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (k1, l1) = w[0];
        let (k2, l2) = w[1];
        let count = k2 - k1;
        let radius = ((l1 - l2) / count as f64).exp().max(1e-300);
        for j in 0..count {
            let angle = 2.0 * PI * j as f64 / count as f64 + 2.0 * PI * k1 as f64 / n as f64 + 0.4;
            z.push(C64::from_polar(radius, angle));
        }
    }
    z
}

/// Minimal pairwise distance of a root list (infinite for fewer than two).
pub fn min_separation(roots: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            best = best.min((roots[i] - roots[j]).norm());
        }
    }
    best
}

/// Roots of y-polynomials over the nodes of a circle in the x-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetSamples {
    pub radius_x: f64,
    pub nodes: Vec<C64>,
    pub sheets: Vec<Vec<C64>>,
    pub min_separation: f64,
}

/// Roots of the monic y-polynomial whose ascending coefficients at x are
/// given by `coeffs_at`, at M nodes on |x| = rho. Roots at consecutive nodes
/// are matched by proximity.
pub fn roots_on_circle<F>(coeffs_at: F, rho: f64, m: usize) -> Result<SheetSamples>
where
    F: Fn(C64) -> Vec<C64>,
{
    let nodes = circle_nodes(rho, m);
    let mut sheets: Vec<Vec<C64>> = Vec::with_capacity(m);
    let mut sep = f64::INFINITY;
    for &x in &nodes {
        let c = coeffs_at(x);
        let prev = sheets.last().cloned();
        let mut roots = poly_roots(&c, prev.as_deref());
        if let Some(prev) = prev {
            roots = match_to(&prev, roots);
        }
        sep = sep.min(min_separation(&roots));
        sheets.push(roots);
    }
    if sep < SEP_TOL {
        return Err(Error::ContourTooClose { separation: sep });
    }
    Ok(SheetSamples {
        radius_x: rho,
        nodes,
        sheets,
        min_separation: sep,
    })
}

/// Reorder `roots` so that entry i is the one closest to `prev[i]`
/// (greedy).
fn match_to(prev: &[C64], roots: Vec<C64>) -> Vec<C64> {
    if prev.len() != roots.len() {
        return roots;
    }
    let mut left: Vec<Option<C64>> = roots.into_iter().map(Some).collect();
    prev.iter()
        .map(|p| {
            let (idx, _) = left
                .iter()
                .enumerate()
                .filter_map(|(i, r)| r.map(|r| (i, (r - p).norm())))
                .fold((usize::MAX, f64::INFINITY), |best, cur| {
                    if cur.1 < best.1 {
                        cur
                    } else {
                        best
                    }
                });
            left[idx].take().unwrap()
        })
        .collect()
}

/// (1 / 2 pi i) times the integral of f dx over |x| = rho, from samples at
/// the nodes of [`circle_nodes`].
pub fn contour_residue(values: &[C64], rho: f64) -> C64 {
    let m = values.len();
    let nodes = circle_nodes(rho, m);
    values
        .iter()
        .zip(&nodes)
        .fold(ZERO, |acc, (f, x)| acc + f * x)
        / m as f64
}

/// Taylor coefficients c_0..c_{N-1} from samples on |x| = rho. The tail is
/// judged on the scaled coefficients |c_j| rho^j.
pub fn cauchy_taylor(values: &[C64], rho: f64, n: usize) -> Result<TruncSeries> {
    let m = values.len();
    if n > m / 2 {
        return Err(Error::InvalidInput(format!(
            "{n} coefficients requested from {m} samples"
        )));
    }
    let coeffs: Vec<C64> = (0..n)
        .map(|j| {
            let mut acc = ZERO;
            for (k, f) in values.iter().enumerate() {
                let angle = -2.0 * PI * ((j * k) % m) as f64 / m as f64;
                acc += f * C64::from_polar(1.0, angle);
            }
            acc / (m as f64 * rho.powi(j as i32))
        })
        .collect();
    let scaled: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c.norm() * rho.powi(j as i32))
        .collect();
    let max = scaled.iter().copied().fold(0.0, f64::max);
    let tail = scaled.last().copied().unwrap_or(0.0);
    if tail > 0.1 * max && tail > 1e-13 * (1.0 + max) {
        return Err(Error::AliasingDetected { tail, max });
    }
    Ok(TruncSeries::from_coeffs(&coeffs, n as i32))
}

/// Monic polynomial with the given roots, ascending coefficients.
pub fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut c = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![ZERO; c.len() + 1];
        for (i, &a) in c.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        c = next;
    }
    c
}

/// Ascending coefficients of the monic polynomial with power sums
/// p_1..p_d (Newton's identities).
pub fn monic_from_power_sums(p: &[C64]) -> Vec<C64> {
    let d = p.len();
    let mut e = vec![ZERO; d + 1];
    e[0] = C64::new(1.0, 0.0);
    for k in 1..=d {
        let mut acc = ZERO;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - i] * p[i - 1];
        }
        e[k] = acc / k as f64;
    }
    // y^d - e1 y^{d-1} + e2 y^{d-2} - ...
    let mut out = vec![ZERO; d + 1];
    for k in 0..=d {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out[d - k] = sign * e[k];
    }
    out
}

/// Power sums p_0..p_d of the roots inside |y| = rho_y of the polynomial
/// with ascending coefficients `coeffs`, by the trapezoid rule on
/// y^n P'(y)/P(y) with `my` nodes.
pub fn power_sums_inside(coeffs: &[C64], rho_y: f64, d: usize, my: usize) -> Result<Vec<C64>> {
    let nodes = circle_nodes(rho_y, my);
    let mut sums = vec![ZERO; d + 1];
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for &y in &nodes {
        let (p, dp) = horner_with_derivative(coeffs, y);
        if p.norm() <= 1e-14 * scale.max(1.0) {
            return Err(Error::ContourTooClose {
                separation: p.norm(),
            });
        }
        let w = dp / p * y;
        let mut yn = C64::new(1.0, 0.0);
        for s in sums.iter_mut() {
            *s += w * yn;
            yn *= y;
        }
    }
    for s in sums.iter_mut() {
        *s /= my as f64;
    }
    let winding = sums[0];
    if (winding - C64::new(d as f64, 0.0)).norm() > 1e-6 {
        return Err(Error::RootCountMismatch {
            expected: d,
            found: winding.re,
        });
    }
    Ok(sums)
}

/// Weierstrass factor of degree d of a y-polynomial at each x-node: the
/// monic polynomial whose roots are the d roots inside |y| < rho_y.
pub fn numeric_weierstrass_prepare(
    coeffs_per_node: &[Vec<C64>],
    rho_y: f64,
    d: usize,
    my: usize,
) -> Result<Vec<Vec<C64>>> {
    coeffs_per_node
        .iter()
        .map(|c| {
            let sums = power_sums_inside(c, rho_y, d, my)?;
            Ok(monic_from_power_sums(&sums[1..]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn roots_of_cubic() {
        let want = [c(1.0), C64::new(-0.5, 0.3), C64::new(0.2, -2.0)];
        let p = poly_from_roots(&want);
        let got = poly_roots(&p, None);
        for w in want {
            assert!(got.iter().any(|g| (g - w).norm() < 1e-13));
        }
    }

    #[test]
    fn zero_roots_split_off() {
        // x^2 (x - 1)
        let got = poly_roots(&[c(0.0), c(0.0), c(-1.0), c(1.0)], None);
        assert_eq!(got.len(), 3);
        assert_eq!(got.iter().filter(|z| **z == ZERO).count(), 2);
    }

    #[test]
    fn sqrt_sheets() {
        let s = roots_on_circle(|x| vec![-x, c(0.0), c(1.0)], 1.0, 8).unwrap();
        for (x, ys) in s.nodes.iter().zip(&s.sheets) {
            assert!((ys[0] + ys[1]).norm() < 1e-14);
            assert!((ys[0] * ys[0] - x).norm() < 1e-14);
        }
    }

    #[test]
    fn cusp_vieta() {
        let s = roots_on_circle(|x| vec![-x * x, c(0.0), c(0.0), c(1.0)], 0.75, 64).unwrap();
        for (x, ys) in s.nodes.iter().zip(&s.sheets) {
            assert!((ys[0] * ys[1] * ys[2] - x * x).norm() < 1e-12);
        }
    }

    #[test]
    fn contour_through_branch_point() {
        // y^2 - (x - 1): branch point at x = 1 lies on |x| = 1 at node 0
        let r = roots_on_circle(|x| vec![c(1.0) - x, c(0.0), c(1.0)], 1.0, 16);
        assert!(matches!(r, Err(Error::ContourTooClose { .. })));
    }

    #[test]
    fn residues() {
        let rho = 0.7;
        let nodes = circle_nodes(rho, 32);
        let inv: Vec<C64> = nodes.iter().map(|x| 1.0 / x).collect();
        assert!((contour_residue(&inv, rho) - c(1.0)).norm() < 1e-15);
        assert!(contour_residue(&vec![c(1.0); 32], rho).norm() < 1e-15);
        let f: Vec<C64> = nodes.iter().map(|x| 1.0 / x + 3.0 / (x * x)).collect();
        assert!((contour_residue(&f, rho) - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn taylor_extraction() {
        let rho = 0.5;
        let nodes = circle_nodes(rho, 128);
        let geo: Vec<C64> = nodes.iter().map(|x| 1.0 / (1.0 - x)).collect();
        let s = cauchy_taylor(&geo, rho, 8).unwrap();
        for j in 0..8 {
            assert!((s.coeff(j) - c(1.0)).norm() < 1e-10);
        }
        let sq: Vec<C64> = nodes.iter().map(|x| x * x).collect();
        let s = cauchy_taylor(&sq, rho, 6).unwrap();
        assert!((s.coeff(2) - c(1.0)).norm() < 1e-14);
        assert!(s.coeff(3).norm() < 1e-14);
        let ex: Vec<C64> = nodes.iter().map(|x| x.exp()).collect();
        let s = cauchy_taylor(&ex, rho, 8).unwrap();
        let mut fact = 1.0;
        for j in 0..8 {
            if j > 0 {
                fact *= j as f64;
            }
            assert!((s.coeff(j) - c(1.0 / fact)).norm() < 1e-10);
        }
    }

    #[test]
    fn aliasing_is_reported() {
        // 1 / (1 - x / 0.6) sampled at rho = 0.5 decays too slowly for N = 4
        let rho = 0.5;
        let nodes = circle_nodes(rho, 64);
        let f: Vec<C64> = nodes.iter().map(|x| 1.0 / (1.0 - x / 0.52)).collect();
        assert!(matches!(
            cauchy_taylor(&f, rho, 4),
            Err(Error::AliasingDetected { .. })
        ));
    }

    #[test]
    fn prepare_drops_far_factor() {
        let x = C64::new(0.1, 0.05);
        // (y^2 - x)(y - 5)
        let p = vec![5.0 * x, -x, c(-5.0), c(1.0)];
        let w = numeric_weierstrass_prepare(&[p], 1.0, 2, 256).unwrap();
        assert!((w[0][0] + x).norm() < 1e-9);
        assert!(w[0][1].norm() < 1e-9);
        assert!((w[0][2] - c(1.0)).norm() < 1e-12);

        let cusp = vec![-x * x, c(0.0), c(0.0), c(1.0)];
        let w = numeric_weierstrass_prepare(&[cusp.clone()], 1.0, 3, 256).unwrap();
        for (a, b) in w[0].iter().zip(&cusp) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn prepare_detects_wrong_count() {
        let x = C64::new(0.1, 0.0);
        let p = vec![5.0 * x, -x, c(-5.0), c(1.0)];
        assert!(matches!(
            numeric_weierstrass_prepare(&[p], 1.0, 3, 256),
            Err(Error::RootCountMismatch { .. })
        ));
    }
}
