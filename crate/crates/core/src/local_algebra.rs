//! The quotient C{x}[y]/<f, f_y>: multiplication matrices, Smith reduction
//! over the series ring, monomial bases, residue pairing and dual bases.

use crate::contour::{contour_residue, roots_on_circle, DEFAULT_NODES};
use crate::error::{Error, Result};
use crate::germ::Germ;
use crate::linalg::{condition_number, from_rows, inverse, singular_values, CMat};
use crate::poly::{horner, monomial_label, BiPoly};
use crate::series::{ypoly_reduce, TruncSeries, YPolySeries, EPS_VAL};
use num_complex::Complex64 as C64;

/// Square matrix of series, `m[i][j]` = row i, column j.
pub type SeriesMat = Vec<Vec<TruncSeries>>;

/// Condition number above which the pairing matrix counts as singular.
pub const PAIRING_COND_MAX: f64 = 1e12;

/// Default truncation order for a germ with quotient dimension r.
pub fn default_order(r: usize) -> i32 {
    2 * r as i32 + 8
}

/// Matrix of multiplication by `phi` on C{x}[y]/<f> in the basis
/// 1, y, ..., y^{d-1}: column k holds the reduction of phi * y^k.
pub fn mult_matrix(f: &YPolySeries, phi: &YPolySeries) -> SeriesMat {
    let d = f.trimmed().coeffs.len() - 1;
    let order = f.order().min(phi.order());
    let mut m = vec![vec![TruncSeries::zero(order); d]; d];
    for k in 0..d {
        let yk = YPolySeries::monomial(0, k, C64::new(1.0, 0.0), order);
        let col = ypoly_reduce(&phi.mul(&yk), f);
        for (i, row) in m.iter_mut().enumerate() {
            row[k] = col.coeff(i);
        }
    }
    m
}

fn identity(d: usize, order: i32) -> SeriesMat {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i == j {
                        TruncSeries::one(order)
                    } else {
                        TruncSeries::zero(order)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &SeriesMat, b: &SeriesMat) -> SeriesMat {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..k)
                        .map(|l| a[i][l].mul(&b[l][j]))
                        .reduce(|x, y| x.add(&y))
                        .unwrap()
                })
                .collect()
        })
        .collect()
}

/// Result of the Smith reduction `u * m * v = diag`.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub orders: Vec<usize>,
    pub diag: Vec<TruncSeries>,
    pub u: SeriesMat,
    pub v: SeriesMat,
}

/// Smith reduction over C[[x]] at jet level. Pivots are entries of minimal
/// valuation, ties broken by the largest leading coefficient.
pub fn smith_over_series(m: &SeriesMat) -> Result<SmithForm> {
    let d = m.len();
    let order = m
        .iter()
        .flatten()
        .map(|s| s.order)
        .min()
        .unwrap_or(0);
    let mut a: SeriesMat = m
        .iter()
        .map(|row| row.iter().map(|s| s.normalized(EPS_VAL)).collect())
        .collect();
    let mut u = identity(d, order);
    let mut v = identity(d, order);
    let mut orders = Vec::with_capacity(d);
    let mut diag = Vec::with_capacity(d);
    for k in 0..d {
        let mut best: Option<(usize, usize, i32, f64)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, s) in row.iter().enumerate().skip(k) {
                let Some(e) = s.leading_exponent(EPS_VAL) else {
                    continue;
                };
                let lead = s.coeff(e).norm();
                let better = match best {
                    None => true,
                    Some((_, _, be, bl)) => e < be || (e == be && lead > bl),
                };
                if better {
                    best = Some((i, j, e, lead));
                }
            }
        }
        let (pi, pj, e, _) = best.ok_or_else(|| {
            Error::RankDeficient(format!(
                "no pivot below the truncation order in block {k}"
            ))
        })?;
        if e < 0 {
            return Err(Error::InvalidInput(
                "Smith reduction needs entries without poles".into(),
            ));
        }
        a.swap(k, pi);
        u.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        for row in v.iter_mut() {
            row.swap(k, pj);
        }
        let pivot = a[k][k].normalized(EPS_VAL);
        let pinv = pivot.inv()?;
        for i in k + 1..d {
            let factor = nonneg(&a[i][k].normalized(EPS_VAL).mul(&pinv));
            if factor.is_exact_zero() {
                continue;
            }
            for j in 0..d {
                a[i][j] = a[i][j].sub(&factor.mul(&a[k][j])).normalized(0.0);
                u[i][j] = u[i][j].sub(&factor.mul(&u[k][j]));
            }
        }
        for j in k + 1..d {
            let factor = nonneg(&a[k][j].normalized(EPS_VAL).mul(&pinv));
            if factor.is_exact_zero() {
                continue;
            }
            for i in 0..d {
                a[i][j] = a[i][j].sub(&a[i][k].mul(&factor)).normalized(0.0);
                v[i][j] = v[i][j].sub(&v[i][k].mul(&factor));
            }
        }
        for i in k + 1..d {
            a[i][k] = TruncSeries::zero(a[i][k].order);
            a[k][i] = TruncSeries::zero(a[k][i].order);
        }
        orders.push(e as usize);
        diag.push(pivot);
    }
    Ok(SmithForm { orders, diag, u, v })
}

/// Drop terms with negative exponent (numerical residue of a division
/// whose exact result is a power series).
fn nonneg(s: &TruncSeries) -> TruncSeries {
    if s.valuation >= 0 {
        return s.clone();
    }
    TruncSeries::new(0, (0..s.order.max(0)).map(|k| s.coeff(k)).collect(), s.order)
}

/// The quotient algebra of a germ with the data needed for coordinates and
/// pairings.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub f: YPolySeries,
    pub d: usize,
    pub r: usize,
    pub order: i32,
    pub smith: SmithForm,
    /// f_y^{-1} modulo f over Laurent series.
    pub fy_inv: YPolySeries,
}

impl Quotient {
    pub fn new(germ: &Germ, order: i32) -> Result<Self> {
        let f = germ.f_series(order);
        let fy = f.dy();
        let m = mult_matrix(&f, &fy);
        let smith = smith_over_series(&m)?;
        let r: usize = smith.orders.iter().sum();
        if r != germ.r {
            return Err(Error::RankDeficient(format!(
                "divisor orders sum to {r}, discriminant order is {}",
                germ.r
            )));
        }
        let fy_inv = fy_inverse_from_smith(&smith, order)?;
        Ok(Quotient {
            f,
            d: germ.d,
            r,
            order,
            smith,
            fy_inv,
        })
    }

    /// Coordinates of `w` (y-degree < d, no poles) in the quotient: for each
    /// elementary divisor x^e the coefficients 0..e-1 of the transformed
    /// component.
    pub fn coords(&self, w: &YPolySeries) -> Vec<C64> {
        let w = ypoly_reduce(w, &self.f);
        let mut out = Vec::with_capacity(self.r);
        for (i, &e) in self.smith.orders.iter().enumerate() {
            let comp = (0..self.d)
                .map(|j| self.smith.u[i][j].mul(&w.coeff(j)))
                .reduce(|a, b| a.add(&b))
                .unwrap();
            for k in 0..e {
                out.push(comp.coeff(k as i32));
            }
        }
        out
    }

    /// Residue of g h f_y^{-2} dx summed over the sheets.
    pub fn pairing(&self, g: &YPolySeries, h: &YPolySeries) -> C64 {
        let phi = ypoly_reduce(&g.mul(h).mul(&self.fy_inv), &self.f);
        trace_coefficient(&phi, self.d).coeff(-1)
    }
}

fn fy_inverse_from_smith(smith: &SmithForm, order: i32) -> Result<YPolySeries> {
    let d = smith.orders.len();
    // D^{-1} U e_0
    let mut w = Vec::with_capacity(d);
    for i in 0..d {
        w.push(smith.diag[i].inv()?.mul(&smith.u[i][0]));
    }
    let coeffs: Vec<TruncSeries> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| smith.v[i][j].mul(&w[j]))
                .reduce(|a, b| a.add(&b))
                .unwrap_or_else(|| TruncSeries::zero(order))
        })
        .collect();
    Ok(YPolySeries::new(coeffs))
}

/// q with f_y q = 1 modulo f, over Laurent series.
pub fn fy_inverse_mod_f(germ: &Germ, order: i32) -> Result<YPolySeries> {
    Ok(Quotient::new(germ, order)?.fy_inv)
}

/// Coefficient of y^{d-1} of a reduced polynomial: the sum over the roots of
/// phi(y_i) / f_y(y_i).
pub fn trace_coefficient(phi: &YPolySeries, d: usize) -> TruncSeries {
    phi.coeff(d - 1)
}

/// Exact residue pairing at t = 0, with a stability re-run at a higher
/// truncation order.
pub fn residue_pairing(g: &BiPoly, h: &BiPoly, germ: &Germ) -> Result<C64> {
    let order = default_order(germ.r);
    let lo = Quotient::new(germ, order)?;
    let hi = Quotient::new(germ, order + 4)?;
    let p_lo = lo.pairing(
        &YPolySeries::from_bipoly(g, order),
        &YPolySeries::from_bipoly(h, order),
    );
    let p_hi = hi.pairing(
        &YPolySeries::from_bipoly(g, order + 4),
        &YPolySeries::from_bipoly(h, order + 4),
    );
    if (p_lo - p_hi).norm() > 1e-8 {
        return Err(Error::TruncationUnstable(format!(
            "pairing changed by {:.3e} under order increase",
            (p_lo - p_hi).norm()
        )));
    }
    Ok(p_hi)
}

/// Contour version of the pairing for an arbitrary monic fiber G:
/// the residue of sum_i g h / G_y^2 over |x| = rho.
pub fn contour_pairing(
    big_g: &BiPoly,
    g: &BiPoly,
    h: &BiPoly,
    rho: f64,
    m: usize,
) -> Result<C64> {
    Ok(contour_pairing_matrix(big_g, std::slice::from_ref(g), std::slice::from_ref(h), rho, m)?[(0, 0)])
}

/// Matrix of contour pairings `(gs[i], hs[j])` over the fiber of `big_g`.
pub fn contour_pairing_matrix(
    big_g: &BiPoly,
    gs: &[BiPoly],
    hs: &[BiPoly],
    rho: f64,
    m: usize,
) -> Result<CMat> {
    let sheets = roots_on_circle(|x| big_g.at_x(x), rho, m)?;
    let gy = big_g.dy();
    let mut vals = vec![vec![vec![C64::new(0.0, 0.0); m]; hs.len()]; gs.len()];
    for (k, (&x, ys)) in sheets.nodes.iter().zip(&sheets.sheets).enumerate() {
        let gy_c = gy.at_x(x);
        let g_c: Vec<Vec<C64>> = gs.iter().map(|p| p.at_x(x)).collect();
        let h_c: Vec<Vec<C64>> = hs.iter().map(|p| p.at_x(x)).collect();
        for &y in ys {
            let w = horner(&gy_c, y);
            let w2 = C64::new(1.0, 0.0) / (w * w);
            let gv: Vec<C64> = g_c.iter().map(|c| horner(c, y)).collect();
            let hv: Vec<C64> = h_c.iter().map(|c| horner(c, y)).collect();
            for i in 0..gs.len() {
                for j in 0..hs.len() {
                    vals[i][j][k] += gv[i] * hv[j] * w2;
                }
            }
        }
    }
    Ok(CMat::from_fn(gs.len(), hs.len(), |i, j| {
        contour_residue(&vals[i][j], rho)
    }))
}

/// Exponents (a, b) of x^a y^b.
pub type Monomial = (usize, usize);

pub fn monomial_poly(m: Monomial) -> BiPoly {
    BiPoly::monomial(m.0, m.1, C64::new(1.0, 0.0))
}

/// Rank of a set of coordinate vectors (relative singular value cut 1e-8).
pub fn coords_rank(rows: &[Vec<C64>]) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    let sv = singular_values(&from_rows(rows));
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max <= EPS_VAL {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-8 * max).count()
}

/// Monomials x^a y^b with b < d in the order (a + b, b, a).
pub fn candidate_monomials(d: usize, max_total: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for total in 0..=max_total {
        for b in 0..d.min(total + 1) {
            out.push((total - b, b));
        }
    }
    out
}

/// Smallest monomial set spanning the quotient, chosen greedily in the
/// order (a + b, b, a).
pub fn monomial_basis(q: &Quotient) -> Vec<Monomial> {
    let mut basis = Vec::new();
    let mut rows: Vec<Vec<C64>> = Vec::new();
    if q.r == 0 {
        return basis;
    }
    for m in candidate_monomials(q.d, q.r + q.d) {
        let c = q.coords(&YPolySeries::from_bipoly(&monomial_poly(m), q.order));
        rows.push(c);
        if coords_rank(&rows) > basis.len() {
            basis.push(m);
            if basis.len() == q.r {
                break;
            }
        } else {
            rows.pop();
        }
    }
    basis
}

/// Everything computed about the quotient of a germ.
#[derive(Debug, Clone)]
pub struct QuotientData {
    pub basis: Vec<Monomial>,
    pub basis_g: Vec<BiPoly>,
    pub dual_h: Vec<BiPoly>,
    pub divisor_orders: Vec<usize>,
    pub pairing_matrix_at_0: CMat,
    pub order: i32,
}

impl QuotientData {
    pub fn basis_labels(&self) -> Vec<String> {
        self.basis.iter().map(|&(a, b)| monomial_label(a, b)).collect()
    }
}

/// Pairing matrix of `basis` against itself at t = 0.
pub fn pairing_matrix(q: &Quotient, basis: &[BiPoly]) -> CMat {
    let s: Vec<YPolySeries> = basis
        .iter()
        .map(|g| YPolySeries::from_bipoly(g, q.order))
        .collect();
    CMat::from_fn(basis.len(), basis.len(), |i, j| q.pairing(&s[i], &s[j]))
}

/// Dual basis h_j = sum_k (P^{-1})_{kj} g_k with P the pairing matrix.
pub fn dual_basis(q: &Quotient, basis: &[BiPoly]) -> Result<(Vec<BiPoly>, CMat)> {
    if basis.is_empty() {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let p = pairing_matrix(q, basis);
    let cond = condition_number(&p);
    if cond > PAIRING_COND_MAX {
        return Err(Error::SingularPairing { condition: cond });
    }
    let pinv = inverse(&p)?;
    let dual = (0..basis.len())
        .map(|j| {
            basis
                .iter()
                .enumerate()
                .fold(BiPoly::zero(), |acc, (k, g)| acc.add(&g.scale(pinv[(k, j)])))
        })
        .collect();
    Ok((dual, p))
}

/// Quotient data with the default monomial basis, checked for stability at
/// a higher truncation order.
pub fn analyze(germ: &Germ) -> Result<QuotientData> {
    analyze_with_order(germ, default_order(germ.r))
}

pub fn analyze_with_order(germ: &Germ, order: i32) -> Result<QuotientData> {
    let q = Quotient::new(germ, order)?;
    let basis = monomial_basis(&q);
    if basis.len() != germ.r {
        return Err(Error::RankDeficient(format!(
            "found {} basis monomials for a quotient of dimension {}",
            basis.len(),
            germ.r
        )));
    }
    quotient_data_with_basis(germ, &q, basis)
}

/// Quotient data for a prescribed monomial basis.
pub fn quotient_data_with_basis(
    germ: &Germ,
    q: &Quotient,
    basis: Vec<Monomial>,
) -> Result<QuotientData> {
    let polys: Vec<BiPoly> = basis.iter().map(|&m| monomial_poly(m)).collect();
    let (dual, p) = dual_basis(q, &polys)?;
    let q_hi = Quotient::new(germ, q.order + 4)?;
    let p_hi = pairing_matrix(&q_hi, &polys);
    let drift = crate::linalg::max_diff(&p, &p_hi);
    if drift > 1e-8 {
        return Err(Error::TruncationUnstable(format!(
            "pairing matrix changed by {drift:.3e} under order increase"
        )));
    }
    Ok(QuotientData {
        basis,
        basis_g: polys,
        dual_h: dual,
        divisor_orders: q.smith.orders.clone(),
        pairing_matrix_at_0: p,
        order: q.order,
    })
}

/// Contour pairing of the germ itself at the default radius 3/4 delta1.
pub fn contour_pairing_at_0(germ: &Germ, g: &BiPoly, h: &BiPoly) -> Result<C64> {
    contour_pairing(&germ.f, g, h, 0.75 * germ.delta1, DEFAULT_NODES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::quasi_homogeneous;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn mult_matrix_of_cusp() {
        let g = quasi_homogeneous(3, 2);
        let f = g.f_series(10);
        let m = mult_matrix(&f, &f.dy());
        let entries = [(2, 0, 0, 3.0), (0, 1, 2, 3.0), (1, 2, 2, 3.0)];
        for i in 0..3 {
            for j in 0..3 {
                let want = entries
                    .iter()
                    .find(|e| e.0 == i && e.1 == j)
                    .map(|e| TruncSeries::monomial(e.2, c(e.3), 10))
                    .unwrap_or_else(|| TruncSeries::zero(10));
                assert!(m[i][j].sub(&want).max_abs() < 1e-15, "entry {i},{j}");
            }
        }
        let id = mult_matrix(&f, &YPolySeries::constant(TruncSeries::one(10)));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(id[i][j].coeff(0), c(if i == j { 1.0 } else { 0.0 }));
            }
        }
        let z = mult_matrix(&f, &YPolySeries::zero(10));
        assert!(z.iter().flatten().all(|s| s.is_exact_zero()));
    }

    #[test]
    fn smith_examples() {
        let g = quasi_homogeneous(3, 2);
        let f = g.f_series(10);
        let m = mult_matrix(&f, &f.dy());
        let s = smith_over_series(&m).unwrap();
        assert_eq!(s.orders, vec![0, 2, 2]);
        let recon = mat_mul(&mat_mul(&s.u, &m), &s.v);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j {
                    s.diag[i].clone()
                } else {
                    TruncSeries::zero(10)
                };
                assert!(recon[i][j].sub(&want).max_abs() < 1e-10);
            }
        }
        let diag = vec![
            vec![TruncSeries::monomial(1, c(1.0), 8), TruncSeries::zero(8)],
            vec![TruncSeries::zero(8), TruncSeries::monomial(3, c(1.0), 8)],
        ];
        assert_eq!(smith_over_series(&diag).unwrap().orders, vec![1, 3]);
        assert_eq!(
            smith_over_series(&identity(3, 8)).unwrap().orders,
            vec![0, 0, 0]
        );
    }

    #[test]
    fn unit_multiple_keeps_dimension() {
        // (1 + x) f_y generates the same ideal modulo f
        let g = quasi_homogeneous(3, 2);
        let f = g.f_series(12);
        let unit = TruncSeries::from_coeffs(&[c(1.0), c(1.0)], 12);
        let m = mult_matrix(&f, &f.dy().mul_series(&unit));
        let s = smith_over_series(&m).unwrap();
        assert_eq!(s.orders.iter().sum::<usize>(), 4);
    }

    #[test]
    fn bases_of_examples() {
        let cases = [((3, 2), vec![(0, 0), (1, 0), (0, 1), (1, 1)]),
            ((2, 3), vec![(0, 0), (1, 0), (2, 0)]),
            ((2, 1), vec![(0, 0)])];
        for ((n, m), want) in cases {
            let g = quasi_homogeneous(n, m);
            let data = analyze(&g).unwrap();
            assert_eq!(data.basis, want, "y^{n} - x^{m}");
        }
    }

    #[test]
    fn fy_inverse_examples() {
        let g = quasi_homogeneous(2, 1);
        let q = fy_inverse_mod_f(&g, 10).unwrap();
        assert!(q.coeff(0).max_abs() < 1e-15);
        assert!((q.term(-1, 1) - c(0.5)).norm() < 1e-15);
        assert!(q.coeff(1).sub(&TruncSeries::monomial(-1, c(0.5), 8)).max_abs() < 1e-15);

        let g = quasi_homogeneous(3, 2);
        let quot = Quotient::new(&g, 16).unwrap();
        let one = ypoly_reduce(&quot.fy_inv.mul(&quot.f.dy()), &quot.f);
        assert!((one.term(0, 0) - c(1.0)).norm() < 1e-10);
        for b in 0..3 {
            for a in -4..4 {
                if (a, b) != (0, 0) {
                    assert!(one.term(a, b).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn trace_identities() {
        let d = 4;
        let y3 = YPolySeries::monomial(0, 3, c(1.0), 8);
        assert_eq!(trace_coefficient(&y3, d).coeff(0), c(1.0));
        let y1 = YPolySeries::monomial(0, 1, c(1.0), 8);
        assert_eq!(trace_coefficient(&y1, d).coeff(0), c(0.0));
        let p = y3.scale(c(5.0)).add(&YPolySeries::monomial(0, 0, c(3.0), 8));
        assert_eq!(trace_coefficient(&p, d).coeff(0), c(5.0));
    }

    #[test]
    fn pairing_examples() {
        let g = quasi_homogeneous(2, 1);
        let one = BiPoly::monomial(0, 0, c(1.0));
        let p = residue_pairing(&one, &one, &g).unwrap();
        assert!((p - c(0.5)).norm() < 1e-12);
        let pc = contour_pairing(&g.f, &one, &one, 0.5, 256).unwrap();
        assert!((pc - c(0.5)).norm() < 1e-10);
        // anything in the ideal pairs to zero
        let cusp = quasi_homogeneous(3, 2);
        let fy_y = cusp.fy().mul(&BiPoly::monomial(1, 1, c(1.0)));
        let z = residue_pairing(&BiPoly::monomial(0, 1, c(1.0)), &fy_y, &cusp).unwrap();
        assert!(z.norm() < 1e-12);
    }

    #[test]
    fn dual_bases() {
        let g = quasi_homogeneous(2, 1);
        let data = analyze(&g).unwrap();
        assert!(data.dual_h[0].distance(&BiPoly::monomial(0, 0, c(2.0))) < 1e-12);

        let cusp = quasi_homogeneous(3, 2);
        let data = analyze(&cusp).unwrap();
        let want = [(1, 1), (0, 1), (1, 0), (0, 0)];
        for (h, &(a, b)) in data.dual_h.iter().zip(&want) {
            assert!(h.distance(&BiPoly::monomial(a, b, c(3.0))) < 1e-10);
        }
        let q = Quotient::new(&cusp, data.order).unwrap();
        for (i, gi) in data.basis_g.iter().enumerate() {
            for (j, hj) in data.dual_h.iter().enumerate() {
                let p = q.pairing(
                    &YPolySeries::from_bipoly(gi, q.order),
                    &YPolySeries::from_bipoly(hj, q.order),
                );
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p - c(want)).norm() < 1e-10);
            }
        }

        let smooth = crate::germ::germ_from_real_terms(&[(0, 1, 1.0), (2, 0, -1.0)]).unwrap();
        let data = analyze(&smooth).unwrap();
        assert!(data.basis.is_empty() && data.dual_h.is_empty());
    }

    #[test]
    fn non_basis_is_singular() {
        let cusp = quasi_homogeneous(3, 2);
        let q = Quotient::new(&cusp, default_order(4)).unwrap();
        // x^2 lies in the ideal
        let polys: Vec<BiPoly> = [(0, 0), (1, 0), (0, 1), (2, 0)]
            .iter()
            .map(|&m| monomial_poly(m))
            .collect();
        assert!(matches!(
            dual_basis(&q, &polys),
            Err(Error::SingularPairing { .. })
        ));
    }
}
