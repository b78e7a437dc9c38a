//! Decomposition h = a G(x, u, t) + b G_u(x, u, t) + c·g(x, u) and the
//! classifying map obtained by integrating the resulting vector field.

use crate::contour::{cauchy_taylor, circle_nodes, contour_residue, min_separation, poly_roots};
use crate::error::{Error, Result};
use crate::family::UniversalFamily;
use crate::linalg::{solve, CMat};
use crate::local_algebra::{default_order, Quotient};
use crate::poly::{derivative_coeffs, horner, horner_with_derivative, s_times, substitute_y, BiPoly, Poly, TriPoly};
use crate::series::{
    subst_invert, weierstrass_prepare, ypoly_divrem, ypoly_reduce, ypoly_subst, Polydisc, TruncSeries,
    YPolySeries,
};
use num_complex::Complex64 as C64;
use serde::Serialize;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Threshold on |F_y| at a sheet point.
pub const SINGULAR_SHEET_TOL: f64 = 1e-10;
/// Threshold on the distance between interpolation nodes.
pub const SHEET_COLLISION_TOL: f64 = 1e-8;
/// Largest |G(x, u(x, y_i), t)| accepted at a field evaluation.
pub const ON_CURVE_TOL: f64 = 1e-6;
/// Default final residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;

/// A one-parameter family F(x, y, s), s in [0, s_max], with F(x, y, 0) = f.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationPath {
    pub f: TriPoly,
    pub s_max: f64,
}

impl DeformationPath {
    pub fn new(f: TriPoly, s_max: f64, fam: &UniversalFamily) -> Result<Self> {
        let dev = f.at_s(0.0).distance(&fam.germ.f);
        if dev > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "F(x, y, 0) differs from the germ by {dev:.3e}"
            )));
        }
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(Error::InvalidInput("s_max must be positive".into()));
        }
        Ok(DeformationPath { f, s_max })
    }
}

/// F = H(x, y, s) G(x, u(x, y, s), phi(s)) for given polynomial data.
pub fn pullback_path(
    fam: &UniversalFamily,
    u: &TriPoly,
    phi: &[Poly],
    unit: Option<&TriPoly>,
    s_max: f64,
) -> Result<DeformationPath> {
    if phi.len() != fam.r {
        return Err(Error::InvalidInput(format!(
            "phi has {} components, family has r = {}",
            phi.len(),
            fam.r
        )));
    }
    let mut f = substitute_y(&fam.germ.f, u);
    for (p, g) in phi.iter().zip(fam.basis_g()) {
        f = f.add(&s_times(p, &BiPoly::monomial(0, 0, ONE)).mul(&substitute_y(g, u)));
    }
    if let Some(h) = unit {
        f = h.mul(&f);
    }
    DeformationPath::new(f, s_max, fam)
}

/// The pullback of the universal family along s -> s t*.
pub fn straight_line(fam: &UniversalFamily, t_star: &[C64]) -> Result<DeformationPath> {
    let phi: Vec<Poly> = t_star.iter().map(|&t| Poly::new(vec![ZERO, t])).collect();
    let u = TriPoly::from_terms(&[(0, 1, 0, ONE)]);
    pullback_path(fam, &u, &phi, None, 1.0)
}

/// The triple (a, b, c) at t = 0 as jets.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub a: YPolySeries,
    pub b: YPolySeries,
    pub c: Vec<C64>,
    /// Largest coefficient of h - a G(u) - b G_u(u) - c g(u) on the
    /// checked range.
    pub residual: f64,
}

/// Inverse of a y-polynomial unit as a power series in y, truncated below
/// y^k.
fn ypoly_unit_inverse(e: &YPolySeries, k: usize) -> Result<YPolySeries> {
    let e0_inv = e.coeff(0).normalized(0.0).inv()?;
    let mut out: Vec<TruncSeries> = vec![e0_inv.clone()];
    for n in 1..k {
        let mut acc = TruncSeries::zero(e.order());
        for i in 1..=n.min(e.coeffs.len() - 1) {
            acc = acc.add(&e.coeffs[i].mul(&out[n - i]));
        }
        out.push(acc.mul(&e0_inv).neg());
    }
    Ok(YPolySeries::new(out))
}

fn drop_high_y(p: &YPolySeries, k: usize) -> YPolySeries {
    YPolySeries::new(p.coeffs.iter().take(k).cloned().collect())
}

fn nonneg_part(p: &YPolySeries) -> (YPolySeries, f64) {
    let mut pole = 0.0f64;
    let coeffs = p
        .coeffs
        .iter()
        .map(|c| {
            for k in c.valuation..0 {
                pole = pole.max(c.coeff(k).norm());
            }
            TruncSeries::new(0, (0..c.order.max(0)).map(|k| c.coeff(k)).collect(), c.order)
        })
        .collect();
    (YPolySeries::new(coeffs), pole)
}

/// Exact decomposition at t = 0 of `h` with respect to the substitution `u`
/// (u - y of positive x-valuation).
pub fn decompose_exact(h: &BiPoly, u: &YPolySeries, fam: &UniversalFamily) -> Result<Decomposition> {
    let germ = &fam.germ;
    let order = default_order(germ.r).max(u.order().min(24));
    let q = Quotient::new(germ, order)?;
    let f = &q.f;
    let d = germ.d;
    let u = u.truncate(order);
    let disc = Polydisc {
        rx: germ.delta1,
        ry: germ.delta2,
    };
    let v = subst_invert(&u, disc)?;
    let hs = YPolySeries::from_bipoly(h, order);
    let h_tilde = ypoly_reduce(&ypoly_subst(&hs, &v), f);
    let gs: Vec<YPolySeries> = fam
        .basis_g()
        .iter()
        .map(|g| YPolySeries::from_bipoly(g, order))
        .collect();
    let hd: Vec<YPolySeries> = fam
        .dual_h()
        .iter()
        .map(|g| YPolySeries::from_bipoly(g, order))
        .collect();
    let r = fam.r;
    let bmat = CMat::from_fn(r, r, |i, j| q.pairing(&gs[i], &hd[j]));
    let p: Vec<C64> = hd.iter().map(|hj| q.pairing(&h_tilde, hj)).collect();
    let c = if r == 0 {
        Vec::new()
    } else {
        solve(&bmat.transpose(), &p)?
    };
    let cg = gs
        .iter()
        .zip(&c)
        .fold(YPolySeries::zero(order), |acc, (g, &ci)| acc.add(&g.scale(ci)));
    let rest = h_tilde.sub(&cg);
    let (b_tilde, pole) = nonneg_part(&ypoly_reduce(&rest.mul(&q.fy_inv), f));
    if pole > 1e-8 {
        return Err(Error::TruncationUnstable(format!(
            "(h - c g) / f_y has a pole of size {pole:.3e}"
        )));
    }
    // pull back through u and reduce by the prepared factor of f(x, u)
    let fu = ypoly_subst(f, &u);
    let (w, e) = weierstrass_prepare(&fu, d)?;
    let b = ypoly_reduce(&ypoly_subst(&b_tilde, &u), &w);
    let fy_u = ypoly_subst(&f.dy(), &u);
    let gu: Vec<YPolySeries> = gs.iter().map(|g| ypoly_subst(g, &u)).collect();
    let cgu = gu
        .iter()
        .zip(&c)
        .fold(YPolySeries::zero(order), |acc, (g, &ci)| acc.add(&g.scale(ci)));
    let numer = hs.sub(&b.mul(&fy_u)).sub(&cgu);
    let (quo, rem) = ypoly_divrem(&numer, &w);
    let rem_size = rem.max_abs();
    let k = order.max(1) as usize;
    let a = drop_high_y(&quo.mul(&ypoly_unit_inverse(&e, k)?), k);
    let recon = a.mul(&fu).add(&b.mul(&fy_u)).add(&cgu);
    let residual = drop_high_y(&hs.sub(&recon), k)
        .truncate(order - 4)
        .max_abs()
        .max(rem_size);
    if residual > 1e-9 {
        return Err(Error::ToleranceExceeded {
            what: "jet reconstruction residual".into(),
            value: residual,
            tolerance: 1e-9,
        });
    }
    Ok(Decomposition { a, b, c, residual })
}

/// Per-node data shared by all field evaluations.
#[derive(Debug, Clone)]
struct NodeData {
    rho: f64,
    xs: Vec<C64>,
    /// f at each node, ascending in y.
    f: Vec<Vec<C64>>,
    /// g_i and h_j at each node.
    g: Vec<Vec<Vec<C64>>>,
    h: Vec<Vec<Vec<C64>>>,
}

impl NodeData {
    fn new(fam: &UniversalFamily, rho: f64, m: usize) -> Self {
        let xs = circle_nodes(rho, m);
        NodeData {
            rho,
            f: xs.iter().map(|&x| fam.germ.f.at_x(x)).collect(),
            g: xs
                .iter()
                .map(|&x| fam.basis_g().iter().map(|p| p.at_x(x)).collect())
                .collect(),
            h: xs
                .iter()
                .map(|&x| fam.dual_h().iter().map(|p| p.at_x(x)).collect())
                .collect(),
            xs,
        }
    }

    /// G(x_k, ., t), ascending in y.
    fn big_g(&self, k: usize, t: &[C64]) -> Vec<C64> {
        let mut out = self.f[k].clone();
        for (gi, &ti) in self.g[k].iter().zip(t) {
            if out.len() < gi.len() {
                out.resize(gi.len(), ZERO);
            }
            for (o, &c) in out.iter_mut().zip(gi) {
                *o += ti * c;
            }
        }
        out
    }
}

/// Result of the numeric decomposition on the contour.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericDecomposition {
    pub c: Vec<C64>,
    /// b(x_k, y) coefficients (ascending in y) at each node.
    pub b_nodes: Vec<Vec<C64>>,
    /// Taylor coefficients in x of each y-coefficient of b.
    pub b_taylor: Vec<Vec<C64>>,
    /// max |h - b G_u - c g| over the sheet points.
    pub on_curve_residual: f64,
    /// Largest negative Fourier mode of the b coefficients on the circle.
    pub negative_modes: f64,
}

/// Coefficients of the interpolating polynomial through (ys[i], ws[i]).
pub fn lagrange_coeffs(ys: &[C64], ws: &[C64]) -> Vec<C64> {
    let n = ys.len();
    // Newton divided differences, then expansion
    let mut dd = ws.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (ys[i] - ys[i - j]);
        }
    }
    let mut out = vec![ZERO; n];
    for i in (0..n).rev() {
        // out = out * (y - ys[i]) + dd[i]
        let mut next = vec![ZERO; n];
        for k in 0..n {
            if k + 1 < n {
                next[k + 1] += out[k];
            }
            next[k] -= out[k] * ys[i];
        }
        next[0] += dd[i];
        out = next;
    }
    out
}

fn negative_mode_size(b_nodes: &[Vec<C64>]) -> f64 {
    let m = b_nodes.len();
    let d = b_nodes.first().map_or(0, Vec::len);
    let mut worst = 0.0f64;
    for col in 0..d {
        for j in 1..=m / 2 - 1 {
            let mut acc = ZERO;
            for (k, row) in b_nodes.iter().enumerate() {
                let angle = 2.0 * std::f64::consts::PI * ((j * k) % m) as f64 / m as f64;
                acc += row[col] * C64::from_polar(1.0, angle);
            }
            worst = worst.max(acc.norm() / m as f64);
        }
    }
    worst
}

fn decompose_nodes(
    nd: &NodeData,
    t: &[C64],
    u_nodes: &[Vec<C64>],
    sheets: &[Vec<C64>],
    h_vals: &[Vec<C64>],
    check_on_curve: bool,
) -> Result<NumericDecomposition> {
    let m = nd.xs.len();
    let r = t.len();
    let mut bvals = vec![vec![vec![ZERO; m]; r]; r];
    let mut pvals = vec![vec![ZERO; m]; r];
    let mut gu_all = Vec::with_capacity(m);
    let mut ut_all = Vec::with_capacity(m);
    for k in 0..m {
        let gk = nd.big_g(k, t);
        let gyk = derivative_coeffs(&gk);
        let mut gus = Vec::with_capacity(sheets[k].len());
        let mut uts = Vec::with_capacity(sheets[k].len());
        for (i, &y) in sheets[k].iter().enumerate() {
            let ut = horner(&u_nodes[k], y);
            let gval = horner(&gk, ut);
            if check_on_curve && gval.norm() > ON_CURVE_TOL {
                return Err(Error::OutOfDomain(format!(
                    "transformed sheet point misses the fiber: |G| = {:.3e}",
                    gval.norm()
                )));
            }
            let gu = horner(&gyk, ut);
            let inv2 = ONE / (gu * gu);
            let gv: Vec<C64> = nd.g[k].iter().map(|c| horner(c, ut)).collect();
            let hv: Vec<C64> = nd.h[k].iter().map(|c| horner(c, ut)).collect();
            for a in 0..r {
                for b in 0..r {
                    bvals[a][b][k] += gv[a] * hv[b] * inv2;
                }
                pvals[a][k] += h_vals[k][i] * hv[a] * inv2;
            }
            gus.push(gu);
            uts.push(ut);
        }
        gu_all.push(gus);
        ut_all.push(uts);
    }
    let c = if r == 0 {
        Vec::new()
    } else {
        let bmat = CMat::from_fn(r, r, |a, b| contour_residue(&bvals[a][b], nd.rho));
        let p: Vec<C64> = (0..r).map(|a| contour_residue(&pvals[a], nd.rho)).collect();
        solve(&bmat.transpose(), &p)?
    };
    let mut b_nodes = Vec::with_capacity(m);
    let mut resid = 0.0f64;
    for k in 0..m {
        let sep = min_separation(&sheets[k]);
        if sep < SHEET_COLLISION_TOL {
            return Err(Error::SheetCollision { separation: sep });
        }
        let ws: Vec<C64> = (0..sheets[k].len())
            .map(|i| {
                let cg: C64 = nd.g[k]
                    .iter()
                    .zip(&c)
                    .map(|(gc, &ci)| ci * horner(gc, ut_all[k][i]))
                    .sum();
                (h_vals[k][i] - cg) / gu_all[k][i]
            })
            .collect();
        let bk = lagrange_coeffs(&sheets[k], &ws);
        for (i, &y) in sheets[k].iter().enumerate() {
            let cg: C64 = nd.g[k]
                .iter()
                .zip(&c)
                .map(|(gc, &ci)| ci * horner(gc, ut_all[k][i]))
                .sum();
            let e = h_vals[k][i] - horner(&bk, y) * gu_all[k][i] - cg;
            resid = resid.max(e.norm());
        }
        b_nodes.push(bk);
    }
    let negative_modes = negative_mode_size(&b_nodes);
    let b_taylor = u_taylor(&b_nodes, nd.rho, (m / 2).min(32))?;
    Ok(NumericDecomposition {
        c,
        b_nodes,
        b_taylor,
        on_curve_residual: resid,
        negative_modes,
    })
}

/// Roots of y -> G(x_k, u(x_k, y), t) with |y| < delta2 at every node;
/// exactly d per node.
pub fn transformed_sheets(
    fam: &UniversalFamily,
    t: &[C64],
    u_nodes: &[Vec<C64>],
    rho: f64,
) -> Result<Vec<Vec<C64>>> {
    let nd = NodeData::new(fam, rho, u_nodes.len());
    (0..u_nodes.len())
        .map(|k| {
            let gk = nd.big_g(k, t);
            let composed = compose_numeric(&gk, &u_nodes[k]);
            inside_roots(&composed, fam.germ.delta2, fam.germ.d)
        })
        .collect()
}

fn compose_numeric(p: &[C64], u: &[C64]) -> Vec<C64> {
    let mut acc: Vec<C64> = vec![ZERO];
    for &c in p.iter().rev() {
        let mut next = vec![ZERO; acc.len() + u.len() - 1];
        for (i, &a) in acc.iter().enumerate() {
            for (j, &b) in u.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        next[0] += c;
        acc = next;
    }
    acc
}

fn inside_roots(coeffs: &[C64], radius: f64, d: usize) -> Result<Vec<C64>> {
    let roots: Vec<C64> = poly_roots(coeffs, None)
        .into_iter()
        .filter(|y| y.norm() < radius)
        .collect();
    if roots.len() != d {
        return Err(Error::OutOfDomain(format!(
            "{} sheet points inside |y| < {radius}, expected {d}",
            roots.len()
        )));
    }
    Ok(roots)
}

/// c and b for on-curve values `h_vals[k][i]` of h at the sheet points
/// `sheets[k][i]` over the default contour, for the substitution given by
/// its node coefficients `u_nodes`.
pub fn decompose_numeric(
    fam: &UniversalFamily,
    t: &[C64],
    u_nodes: &[Vec<C64>],
    sheets: &[Vec<C64>],
    h_vals: &[Vec<C64>],
) -> Result<NumericDecomposition> {
    let nd = NodeData::new(fam, fam.rho(), u_nodes.len());
    decompose_nodes(&nd, t, u_nodes, sheets, h_vals, true)
}

/// Node coefficients of the identity substitution u = y.
pub fn identity_u(m: usize) -> Vec<Vec<C64>> {
    vec![vec![ZERO, ONE]; m]
}

/// Path data evaluated at the nodes: F and F_s coefficients as polynomials
/// in s.
#[derive(Debug, Clone)]
struct PathNodes {
    /// [node][y-power] -> coefficients in s
    f: Vec<Vec<Vec<C64>>>,
    fs: Vec<Vec<Vec<C64>>>,
}

impl PathNodes {
    fn new(path: &DeformationPath, xs: &[C64]) -> Self {
        let at = |tp: &TriPoly, x: C64| -> Vec<Vec<C64>> {
            let ydeg = tp.scoeffs.iter().map(|p| p.ycoeffs.len()).max().unwrap_or(0);
            (0..ydeg)
                .map(|b| tp.scoeffs.iter().map(|p| p.ycoeff(b).eval(x)).collect())
                .collect()
        };
        let ds = path.f.ds();
        PathNodes {
            f: xs.iter().map(|&x| at(&path.f, x)).collect(),
            fs: xs.iter().map(|&x| at(&ds, x)).collect(),
        }
    }

    fn eval(table: &[Vec<C64>], s: f64) -> Vec<C64> {
        let s = C64::new(s, 0.0);
        table.iter().map(|c| horner(c, s)).collect()
    }
}

struct Ctx<'a> {
    fam: &'a UniversalFamily,
    nd: NodeData,
    pn: PathNodes,
}

/// Field value at one state.
#[derive(Debug, Clone)]
struct FieldValue {
    c: Vec<C64>,
    b: Vec<Vec<C64>>,
}

impl<'a> Ctx<'a> {
    fn new(path: &DeformationPath, fam: &'a UniversalFamily, m: usize) -> Self {
        let nd = NodeData::new(fam, fam.rho(), m);
        let pn = PathNodes::new(path, &nd.xs);
        Ctx { fam, nd, pn }
    }

    fn sheets(&self, s: f64) -> Result<Vec<Vec<C64>>> {
        (0..self.nd.xs.len())
            .map(|k| {
                let fk = PathNodes::eval(&self.pn.f[k], s);
                inside_roots(&fk, self.fam.germ.delta2, self.fam.germ.d)
            })
            .collect()
    }

    fn field(&self, s: f64, t: &[C64], u: &[Vec<C64>], check: bool) -> Result<FieldValue> {
        let sheets = self.sheets(s)?;
        let mut h_vals = Vec::with_capacity(sheets.len());
        for (k, ys) in sheets.iter().enumerate() {
            let fk = PathNodes::eval(&self.pn.f[k], s);
            let fsk = PathNodes::eval(&self.pn.fs[k], s);
            let gk = self.nd.big_g(k, t);
            let gyk = derivative_coeffs(&gk);
            let mut hv = Vec::with_capacity(ys.len());
            for &y in ys {
                let (_, fy) = horner_with_derivative(&fk, y);
                if fy.norm() < SINGULAR_SHEET_TOL {
                    return Err(Error::SingularSheet { modulus: fy.norm() });
                }
                let (ut, uy) = horner_with_derivative(&u[k], y);
                let gu = horner(&gyk, ut);
                hv.push(horner(&fsk, y) * gu * uy / fy);
            }
            h_vals.push(hv);
        }
        let dec = decompose_nodes(&self.nd, t, u, &sheets, &h_vals, check)?;
        Ok(FieldValue {
            c: dec.c,
            b: dec.b_nodes,
        })
    }

    fn residual(&self, s: f64, t: &[C64], u: &[Vec<C64>]) -> Result<f64> {
        let sheets = self.sheets(s)?;
        let mut worst = 0.0f64;
        for (k, ys) in sheets.iter().enumerate() {
            let gk = self.nd.big_g(k, t);
            for &y in ys {
                worst = worst.max(horner(&gk, horner(&u[k], y)).norm());
            }
        }
        Ok(worst)
    }
}

/// dt/ds = c and du/ds = b (node samples) at a state.
pub fn vector_field(
    path: &DeformationPath,
    s: f64,
    t: &[C64],
    u_nodes: &[Vec<C64>],
    fam: &UniversalFamily,
) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    let ctx = Ctx::new(path, fam, u_nodes.len());
    let v = ctx.field(s, t, u_nodes, true)?;
    Ok((v.c, v.b))
}

/// One stored step of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub s: f64,
    pub t: Vec<C64>,
    pub u: Vec<Vec<C64>>,
    pub dt: Vec<C64>,
    pub du: Vec<Vec<C64>>,
}

fn axpy_state(
    t: &[C64],
    u: &[Vec<C64>],
    h: f64,
    dt: &[C64],
    du: &[Vec<C64>],
) -> (Vec<C64>, Vec<Vec<C64>>) {
    let t2 = t.iter().zip(dt).map(|(a, b)| a + b * h).collect();
    let u2 = u
        .iter()
        .zip(du)
        .map(|(row, drow)| {
            let n = row.len().max(drow.len());
            (0..n)
                .map(|j| {
                    row.get(j).copied().unwrap_or(ZERO) + drow.get(j).copied().unwrap_or(ZERO) * h
                })
                .collect()
        })
        .collect();
    (t2, u2)
}

/// Fixed-step RK4 from (s0, t0, u0) to s1, storing every step.
pub fn integrate_trajectory(
    path: &DeformationPath,
    fam: &UniversalFamily,
    steps: usize,
    s0: f64,
    s1: f64,
    t0: &[C64],
    u0: &[Vec<C64>],
) -> Result<Vec<TrajectoryPoint>> {
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be at least 1".into()));
    }
    let ctx = Ctx::new(path, fam, u0.len());
    let h = (s1 - s0) / steps as f64;
    let mut t = t0.to_vec();
    let mut u = u0.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = s0;
    let mut k1 = ctx.field(s, &t, &u, true)?;
    for step in 0..steps {
        out.push(TrajectoryPoint {
            s,
            t: t.clone(),
            u: u.clone(),
            dt: k1.c.clone(),
            du: k1.b.clone(),
        });
        let (t2, u2) = axpy_state(&t, &u, 0.5 * h, &k1.c, &k1.b);
        let k2 = ctx.field(s + 0.5 * h, &t2, &u2, false)?;
        let (t3, u3) = axpy_state(&t, &u, 0.5 * h, &k2.c, &k2.b);
        let k3 = ctx.field(s + 0.5 * h, &t3, &u3, false)?;
        let (t4, u4) = axpy_state(&t, &u, h, &k3.c, &k3.b);
        let k4 = ctx.field(s + h, &t4, &u4, false)?;
        let dt: Vec<C64> = (0..t.len())
            .map(|i| (k1.c[i] + 2.0 * k2.c[i] + 2.0 * k3.c[i] + k4.c[i]) / 6.0)
            .collect();
        let du: Vec<Vec<C64>> = (0..u.len())
            .map(|k| {
                (0..k1.b[k].len())
                    .map(|j| (k1.b[k][j] + 2.0 * k2.b[k][j] + 2.0 * k3.b[k][j] + k4.b[k][j]) / 6.0)
                    .collect()
            })
            .collect();
        let (tn, un) = axpy_state(&t, &u, h, &dt, &du);
        t = tn;
        u = un;
        s = s0 + (step + 1) as f64 * h;
        k1 = ctx.field(s, &t, &u, true)?;
    }
    out.push(TrajectoryPoint {
        s,
        t,
        u,
        dt: k1.c,
        du: k1.b,
    });
    Ok(out)
}

/// Options of [`integrate_path`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub steps: usize,
    pub nodes: usize,
    /// Number of Taylor coefficients reported for u.
    pub order: usize,
    pub tol: f64,
    /// Repeat with twice the steps and compare.
    pub halving_check: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            steps: 64,
            nodes: 256,
            order: 16,
            tol: DEFAULT_TOL,
            halving_check: true,
        }
    }
}

/// The classifying map along a path with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct ClassifyResult {
    pub phi_samples: Vec<(f64, Vec<C64>)>,
    /// Taylor coefficients in x of each y-coefficient of u at s_max.
    pub u_final: Vec<Vec<C64>>,
    pub residual: f64,
    pub halving_difference: Option<f64>,
    pub steps: usize,
    pub nodes: usize,
    pub tolerance: f64,
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryPoint>,
}

impl ClassifyResult {
    pub fn phi_final(&self) -> &[C64] {
        &self.phi_samples.last().expect("at least one sample").1
    }
}

/// Taylor coefficients of node-sampled y-coefficients.
pub fn u_taylor(u_nodes: &[Vec<C64>], rho: f64, order: usize) -> Result<Vec<Vec<C64>>> {
    let d = u_nodes.first().map_or(0, Vec::len);
    (0..d)
        .map(|j| {
            let col: Vec<C64> = u_nodes.iter().map(|row| row[j]).collect();
            let s = cauchy_taylor(&col, rho, order.min(u_nodes.len() / 2))?;
            Ok((0..s.order).map(|k| s.coeff(k)).collect())
        })
        .collect()
}

pub fn integrate_path(
    path: &DeformationPath,
    fam: &UniversalFamily,
    opts: ClassifyOptions,
) -> Result<ClassifyResult> {
    let m = opts.nodes;
    let u0 = identity_u(m);
    let t0 = vec![ZERO; fam.r];
    let traj = integrate_trajectory(path, fam, opts.steps, 0.0, path.s_max, &t0, &u0)?;
    let last = traj.last().expect("nonempty trajectory");
    let ctx = Ctx::new(path, fam, m);
    let residual = ctx.residual(path.s_max, &last.t, &last.u)?;
    if residual > opts.tol {
        return Err(Error::ToleranceExceeded {
            what: "on-curve residual".into(),
            value: residual,
            tolerance: opts.tol,
        });
    }
    let halving_difference = if opts.halving_check {
        let fine = integrate_trajectory(path, fam, 2 * opts.steps, 0.0, path.s_max, &t0, &u0)?;
        let tf = &fine.last().expect("nonempty").t;
        let diff = tf
            .iter()
            .zip(&last.t)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if diff > 10.0 * opts.tol {
            return Err(Error::ToleranceExceeded {
                what: "step-halving difference".into(),
                value: diff,
                tolerance: 10.0 * opts.tol,
            });
        }
        Some(diff)
    } else {
        None
    };
    let u_final = u_taylor(&last.u, fam.rho(), opts.order)?;
    Ok(ClassifyResult {
        phi_samples: traj.iter().map(|p| (p.s, p.t.clone())).collect(),
        u_final,
        residual,
        halving_difference,
        steps: opts.steps,
        nodes: m,
        tolerance: opts.tol,
        trajectory: traj,
    })
}

/// Independent recheck of a classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullbackReport {
    /// max |G(x, u(x, y_i, s), phi(s))| over 2M nodes and 2 x steps samples.
    pub residual: f64,
    /// max |H - 1| at s = 0 with H = F_y / (G_u u_y).
    pub unit_deviation_at_0: f64,
}

fn hermite_mid(a: &TrajectoryPoint, b: &TrajectoryPoint) -> (Vec<C64>, Vec<Vec<C64>>) {
    let h = b.s - a.s;
    let t = (0..a.t.len())
        .map(|i| 0.5 * (a.t[i] + b.t[i]) + h / 8.0 * (a.dt[i] - b.dt[i]))
        .collect();
    let at = |row: &[C64], j: usize| row.get(j).copied().unwrap_or(ZERO);
    let u = (0..a.u.len())
        .map(|k| {
            let n = a.u[k].len().max(b.u[k].len()).max(a.du[k].len());
            (0..n)
                .map(|j| {
                    0.5 * (at(&a.u[k], j) + at(&b.u[k], j))
                        + h / 8.0 * (at(&a.du[k], j) - at(&b.du[k], j))
                })
                .collect()
        })
        .collect();
    (t, u)
}

pub fn verify_pullback(
    path: &DeformationPath,
    result: &ClassifyResult,
    fam: &UniversalFamily,
) -> Result<PullbackReport> {
    let traj = &result.trajectory;
    let rho = fam.rho();
    let m2 = 2 * result.nodes;
    let xs = circle_nodes(rho, m2);
    let pn = PathNodes::new(path, &xs);
    let order = (result.nodes / 2).min(64);
    let mut samples: Vec<(f64, Vec<C64>, Vec<Vec<C64>>)> = Vec::new();
    for (i, p) in traj.iter().enumerate() {
        samples.push((p.s, p.t.clone(), p.u.clone()));
        if let Some(next) = traj.get(i + 1) {
            let (t, u) = hermite_mid(p, next);
            samples.push((0.5 * (p.s + next.s), t, u));
        }
    }
    // the stored final state may carry a corrected parameter
    if let (Some(last), Some(reported)) = (samples.last_mut(), result.phi_samples.last()) {
        last.1 = reported.1.clone();
    }
    let mut worst = 0.0f64;
    let mut unit_dev = 0.0f64;
    for (s, t, u) in &samples {
        let taylor = u_taylor(u, rho, order)?;
        for (k, &x) in xs.iter().enumerate() {
            let fk = PathNodes::eval(&pn.f[k], *s);
            let ys = inside_roots(&fk, fam.germ.delta2, fam.germ.d)?;
            let gk = fam.g_at(t).at_x(x);
            let gyk = derivative_coeffs(&gk);
            let uk: Vec<C64> = taylor.iter().map(|c| horner(c, x)).collect();
            for y in ys {
                let (ut, uy) = horner_with_derivative(&uk, y);
                worst = worst.max(horner(&gk, ut).norm());
                if *s == 0.0 {
                    let (_, fy) = horner_with_derivative(&fk, y);
                    let hunit = fy / (horner(&gyk, ut) * uy);
                    unit_dev = unit_dev.max((hunit - ONE).norm());
                }
            }
        }
    }
    Ok(PullbackReport {
        residual: worst,
        unit_deviation_at_0: unit_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::build_family;
    use crate::germ::quasi_homogeneous;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn lagrange_interpolates() {
        let ys = [c(0.5), C64::new(-0.2, 0.3), c(-0.7)];
        let ws = [c(1.0), c(2.0), C64::new(0.0, 1.0)];
        let p = lagrange_coeffs(&ys, &ws);
        for (y, w) in ys.iter().zip(&ws) {
            assert!((horner(&p, *y) - w).norm() < 1e-13);
        }
    }

    #[test]
    fn exact_decomposition_examples() {
        let fam = build_family(&quasi_homogeneous(3, 2)).unwrap();
        let order = default_order(4);
        let u = YPolySeries::y(order);
        let d = decompose_exact(&fam.basis_g()[0], &u, &fam).unwrap();
        assert!((d.c[0] - c(1.0)).norm() < 1e-10);
        assert!(d.c[1..].iter().all(|z| z.norm() < 1e-10));
        assert!(d.b.max_abs() < 1e-10 && d.a.max_abs() < 1e-10);

        let d = decompose_exact(&fam.germ.f, &u, &fam).unwrap();
        assert!(d.c.iter().all(|z| z.norm() < 1e-10));
        assert!(d.b.max_abs() < 1e-10);
        assert!((d.a.term(0, 0) - c(1.0)).norm() < 1e-10);

        let h = fam.germ.fy().mul(&BiPoly::monomial(0, 1, c(1.0)));
        let d = decompose_exact(&h, &u, &fam).unwrap();
        assert!(d.c.iter().all(|z| z.norm() < 1e-10));
        assert!(d.b.distance(&YPolySeries::y(order)) < 1e-10);
        assert!(d.a.max_abs() < 1e-10);
    }

    #[test]
    fn exact_decomposition_with_shear() {
        let fam = build_family(&quasi_homogeneous(3, 2)).unwrap();
        let order = default_order(4);
        let u = YPolySeries::y(order).add(&YPolySeries::monomial(1, 0, c(0.01), order));
        let h = BiPoly::from_terms(&[(0, 0, c(0.3)), (1, 2, c(-0.5)), (0, 1, C64::new(0.2, 0.1))]);
        let d = decompose_exact(&h, &u, &fam).unwrap();
        assert!(d.residual < 1e-9);
    }

    #[test]
    fn trivial_and_straight_fields() {
        let fam = build_family(&quasi_homogeneous(3, 2)).unwrap();
        let m = 64;
        let constant = DeformationPath::new(TriPoly::constant_in_s(fam.germ.f.clone()), 1.0, &fam).unwrap();
        let (dt, du) = vector_field(&constant, 0.3, &[c(0.0); 4], &identity_u(m), &fam).unwrap();
        assert!(dt.iter().all(|z| z.norm() < 1e-12));
        assert!(du.iter().flatten().all(|z| z.norm() < 1e-12));

        let ts = [c(0.002), c(0.0), c(0.001), c(0.0)];
        let line = straight_line(&fam, &ts).unwrap();
        let s = 0.4;
        let t: Vec<C64> = ts.iter().map(|z| z * s).collect();
        let (dt, du) = vector_field(&line, s, &t, &identity_u(m), &fam).unwrap();
        for (a, b) in dt.iter().zip(&ts) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!(du.iter().flatten().all(|z| z.norm() < 1e-10));
    }
}
