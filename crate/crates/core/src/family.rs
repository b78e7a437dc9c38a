//! The universal family G = f + t·g and what is evaluated on it: the
//! B-matrix, the branch-value map, fiber classification, certified
//! parameter boxes, symmetric bases and reality constraints.

use crate::contour::{
    circle_nodes, monic_from_power_sums, poly_roots, DEFAULT_NODES,
};
use crate::error::{Error, Result};
use crate::germ::{discriminant_x, Germ};
use crate::linalg::CMat;
use crate::local_algebra::{
    analyze, contour_pairing_matrix, coords_rank, default_order, monomial_poly,
    quotient_data_with_basis, Monomial, Quotient, QuotientData,
};
use crate::poly::{horner, BiPoly, Poly};
use crate::series::YPolySeries;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default seed for probe directions.
pub const DEFAULT_SEED: u64 = 20240917;
/// Merge radius for discriminant roots.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Lower bound on |G_x| at a ramification point for a smooth fiber.
pub const SMOOTH_TOL: f64 = 1e-6;
const PROBES: usize = 8;
const BOX_SAFETY: f64 = 0.5;
const BOX_MAX: f64 = 0.5;

/// A point of the parameter space C^r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub t: Vec<C64>,
}

/// The universal deformation of a germ for a chosen basis.
#[derive(Debug, Clone)]
pub struct UniversalFamily {
    pub germ: Germ,
    pub quotient: QuotientData,
    pub r: usize,
    /// Componentwise bound on |t_i| within which the domain checks passed.
    pub param_box: f64,
    pub seed: u64,
}

impl UniversalFamily {
    pub fn basis_g(&self) -> &[BiPoly] {
        &self.quotient.basis_g
    }

    pub fn dual_h(&self) -> &[BiPoly] {
        &self.quotient.dual_h
    }

    /// G(x, y, t) = f + sum t_i g_i.
    pub fn g_at(&self, t: &[C64]) -> BiPoly {
        self.basis_g()
            .iter()
            .zip(t)
            .fold(self.germ.f.clone(), |acc, (g, &ti)| acc.add(&g.scale(ti)))
    }

    /// Default contour radius 3/4 delta1.
    pub fn rho(&self) -> f64 {
        0.75 * self.germ.delta1
    }

    fn check_len(&self, t: &[C64]) -> Result<()> {
        if t.len() != self.r {
            return Err(Error::InvalidInput(format!(
                "parameter has {} entries, family has r = {}",
                t.len(),
                self.r
            )));
        }
        Ok(())
    }

    fn check_in_box(&self, t: &[C64]) -> Result<()> {
        self.check_len(t)?;
        let m = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > self.param_box * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain(format!(
                "|t| = {m:.3e} exceeds the certified box {:.3e}",
                self.param_box
            )));
        }
        Ok(())
    }
}

/// Family with the default monomial basis.
pub fn build_family(germ: &Germ) -> Result<UniversalFamily> {
    build_family_seeded(germ, DEFAULT_SEED)
}

pub fn build_family_seeded(germ: &Germ, seed: u64) -> Result<UniversalFamily> {
    let quotient = analyze(germ)?;
    finish_family(germ, quotient, seed)
}

/// Family for a prescribed monomial basis (it must span the quotient).
pub fn build_family_with_basis(germ: &Germ, basis: Vec<Monomial>, seed: u64) -> Result<UniversalFamily> {
    let q = Quotient::new(germ, default_order(germ.r))?;
    let quotient = quotient_data_with_basis(germ, &q, basis)?;
    finish_family(germ, quotient, seed)
}

fn finish_family(germ: &Germ, quotient: QuotientData, seed: u64) -> Result<UniversalFamily> {
    let r = quotient.basis.len();
    let mut fam = UniversalFamily {
        germ: germ.clone(),
        quotient,
        r,
        param_box: 0.0,
        seed,
    };
    fam.param_box = certify_box(&fam, seed);
    Ok(fam)
}

/// Discriminant of the fiber at t with negligible coefficients removed.
pub fn fiber_discriminant(fam: &UniversalFamily, t: &[C64]) -> Poly {
    discriminant_x(&fam.g_at(t)).cleaned(1e-13)
}

fn domain_ok(fam: &UniversalFamily, t: &[C64]) -> bool {
    let disc = fiber_discriminant(fam, t);
    let d1 = fam.germ.delta1;
    let roots = poly_roots(&disc.coeffs, None);
    let inside: Vec<&C64> = roots.iter().filter(|z| z.norm() < d1).collect();
    if inside.len() != fam.r || inside.iter().any(|z| z.norm() >= 0.5 * d1) {
        return false;
    }
    let g = fam.g_at(t);
    circle_nodes(d1, 64).iter().all(|&x| {
        poly_roots(&g.at_x(x), None)
            .iter()
            .all(|y| y.norm() < fam.germ.delta2)
    })
}

/// Random parameter with every |t_i| = radius.
pub fn probe_direction(rng: &mut impl Rng, r: usize, radius: f64) -> Vec<C64> {
    (0..r)
        .map(|_| C64::from_polar(radius, rng.gen_range(0.0..2.0 * PI)))
        .collect()
}

/// Random parameter uniform in the componentwise disc of the given radius.
pub fn random_in_box(rng: &mut impl Rng, r: usize, radius: f64) -> Vec<C64> {
    (0..r)
        .map(|_| {
            let rad = radius * rng.gen::<f64>().sqrt();
            C64::from_polar(rad, rng.gen_range(0.0..2.0 * PI))
        })
        .collect()
}

/// Bisection on the box radius with random probe directions, shrunk by a
/// safety factor.
fn certify_box(fam: &UniversalFamily, seed: u64) -> f64 {
    if fam.r == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probes: Vec<Vec<C64>> = (0..PROBES)
        .map(|_| probe_direction(&mut rng, fam.r, 1.0))
        .collect();
    let ok = |radius: f64| {
        probes.iter().all(|p| {
            let t: Vec<C64> = p.iter().map(|z| z * radius).collect();
            domain_ok(fam, &t)
        })
    };
    if ok(BOX_MAX) {
        return BOX_SAFETY * BOX_MAX;
    }
    let (mut lo, mut hi) = (0.0, BOX_MAX);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    BOX_SAFETY * lo
}

/// B_ij(t) = Res g_i h_j / G_y^2 dx over the fiber at t.
pub fn b_matrix(fam: &UniversalFamily, t: &[C64], m: usize) -> Result<CMat> {
    fam.check_len(t)?;
    contour_pairing_matrix(&fam.g_at(t), fam.basis_g(), fam.dual_h(), fam.rho(), m).map_err(
        |e| match e {
            Error::ContourTooClose { separation } => Error::OutOfDomain(format!(
                "fiber roots {separation:.3e} apart on the contour"
            )),
            other => other,
        },
    )
}

/// Coefficients [c_0, ..., c_{r-1}] of the monic polynomial of degree r whose
/// roots are the branch values inside |x| < delta1.
pub fn dis_map(fam: &UniversalFamily, t: &[C64]) -> Result<Vec<C64>> {
    dis_map_nodes(fam, t, DEFAULT_NODES)
}

pub fn dis_map_nodes(fam: &UniversalFamily, t: &[C64], m: usize) -> Result<Vec<C64>> {
    fam.check_len(t)?;
    let disc = fiber_discriminant(fam, t);
    let d1 = fam.germ.delta1;
    let roots = poly_roots(&disc.coeffs, None);
    let inside = roots.iter().filter(|z| z.norm() < d1).count();
    let misplaced = roots
        .iter()
        .filter(|z| z.norm() < d1 && z.norm() >= 0.5 * d1)
        .count();
    if inside != fam.r || misplaced > 0 {
        return Err(Error::OutOfDomain(format!(
            "{inside} branch values inside the disc ({misplaced} outside the inner half), expected {}",
            fam.r
        )));
    }
    if fam.r == 0 {
        return Ok(Vec::new());
    }
    // power sums of the inside roots by the argument principle
    let rho = fam.rho();
    let dd = disc.derivative();
    let mut sums = vec![C64::new(0.0, 0.0); fam.r + 1];
    for x in circle_nodes(rho, m) {
        let w = dd.eval(x) / disc.eval(x) * x;
        let mut xn = C64::new(1.0, 0.0);
        for s in sums.iter_mut() {
            *s += w * xn;
            xn *= x;
        }
    }
    for s in sums.iter_mut() {
        *s /= m as f64;
    }
    if (sums[0].re - fam.r as f64).abs() > 1e-6 {
        return Err(Error::OutOfDomain(format!(
            "winding number {:.6} differs from r = {}",
            sums[0].re, fam.r
        )));
    }
    let monic = monic_from_power_sums(&sums[1..]);
    Ok(monic[..fam.r].to_vec())
}

/// A branch point of a fiber: position, ramification point and the
/// multiplicity of the discriminant root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub x: C64,
    pub y: C64,
    pub multiplicity: usize,
}

/// Classification of the fiber over a parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub t: Vec<C64>,
    pub smooth: bool,
    pub simple_branch: bool,
    pub branch_points: Vec<BranchPoint>,
    pub multiplicity_sum: usize,
    pub dis_value: Vec<C64>,
}

/// Group roots lying within `radius` of each other (single linkage).
pub fn cluster_roots(roots: &[C64], radius: f64) -> Vec<(C64, usize)> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() < radius {
                let (a, b) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == b {
                        *l = a;
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..n {
        if seen.contains(&label[i]) {
            continue;
        }
        seen.push(label[i]);
        let members: Vec<C64> = (0..n).filter(|&j| label[j] == label[i]).map(|j| roots[j]).collect();
        let center = members.iter().sum::<C64>() / members.len() as f64;
        out.push((center, members.len()));
    }
    out
}

/// Ramification point over x: the root of G_y(x, .) where |G(x, .)| is
/// smallest.
fn ramification_y(g: &BiPoly, x: C64) -> C64 {
    let gc = g.at_x(x);
    let gyc = g.dy().at_x(x);
    poly_roots(&gyc, None)
        .into_iter()
        .min_by(|a, b| horner(&gc, *a).norm().total_cmp(&horner(&gc, *b).norm()))
        .unwrap_or(C64::new(0.0, 0.0))
}

pub fn fiber_classification(fam: &UniversalFamily, t: &[C64]) -> Result<FiberReport> {
    fam.check_in_box(t)?;
    classify_fiber_unchecked(fam, t)
}

/// Fiber classification without the box check (the root-count checks of
/// [`dis_map`] still apply).
pub fn classify_fiber_unchecked(fam: &UniversalFamily, t: &[C64]) -> Result<FiberReport> {
    let dis_value = dis_map(fam, t)?;
    let disc = fiber_discriminant(fam, t);
    let d1 = fam.germ.delta1;
    let inside: Vec<C64> = poly_roots(&disc.coeffs, None)
        .into_iter()
        .filter(|z| z.norm() < 0.5 * d1)
        .collect();
    let g = fam.g_at(t);
    let gx = g.dx();
    let gyy = g.dy().dy();
    let mut smooth = true;
    let mut simple = true;
    let mut branch_points = Vec::new();
    for (x, mult) in cluster_roots(&inside, CLUSTER_RADIUS) {
        let y = ramification_y(&g, x);
        if gx.eval(x, y).norm() <= SMOOTH_TOL {
            smooth = false;
        }
        if mult > 1 || gyy.eval(x, y).norm() <= SMOOTH_TOL {
            simple = false;
        }
        branch_points.push(BranchPoint {
            x,
            y,
            multiplicity: mult,
        });
    }
    let multiplicity_sum = branch_points.iter().map(|b| b.multiplicity).sum();
    Ok(FiberReport {
        t: t.to_vec(),
        smooth,
        simple_branch: simple && smooth,
        branch_points,
        multiplicity_sum,
        dis_value,
    })
}

/// Whether the branch multiplicities inside |x| < delta1/2 add up to r.
pub fn multiplicity_conservation_check(fam: &UniversalFamily, t: &[C64]) -> Result<bool> {
    Ok(fiber_classification(fam, t)?.multiplicity_sum == fam.r)
}

/// How the involution x -> -x acts on a germ index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaType {
    /// sigma l = l: f(-x, y) = f(x, y).
    Fixed,
    /// sigma l != l: the germ is y^n + c x, exchanged with its reflection.
    Swapped,
}

/// The prescribed symmetric basis (1, y, ..., y^{n-3}) and how its span
/// compares with the symmetric part of the quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBasis {
    pub basis: Vec<Monomial>,
    /// Dimension of the sigma-symmetric part of the quotient (all of it for
    /// a swapped germ).
    pub symmetric_dim: usize,
    pub deficit: usize,
    pub warning: Option<String>,
}

pub fn symmetric_basis(germ: &Germ, sigma: SigmaType) -> Result<SymmetricBasis> {
    let f = &germ.f;
    let n = germ.d;
    match sigma {
        SigmaType::Fixed => {
            if f.reflect_x().distance(f) > 1e-12 {
                return Err(Error::NotSymmetric("f(-x, y) differs from f(x, y)".into()));
            }
        }
        SigmaType::Swapped => {
            let terms = f.terms();
            let ok = terms.len() == 2
                && terms.iter().any(|&(a, b, _)| (a, b) == (0, n))
                && terms.iter().any(|&(a, b, _)| (a, b) == (1, 0));
            if !ok {
                return Err(Error::NotSymmetric(
                    "a swapped germ must have the form y^n + c x".into(),
                ));
            }
        }
    }
    if n < 2 {
        return Err(Error::NotSymmetric("degree in y below 2".into()));
    }
    let rh = n - 2;
    let basis: Vec<Monomial> = (0..rh).map(|b| (0, b)).collect();
    let q = Quotient::new(germ, default_order(germ.r))?;
    let coords_of = |m: Monomial| q.coords(&YPolySeries::from_bipoly(&monomial_poly(m), q.order));
    let basis_rows: Vec<Vec<C64>> = basis.iter().map(|&m| coords_of(m)).collect();
    if coords_rank(&basis_rows) != basis.len() {
        return Err(Error::RankDeficient(
            "prescribed symmetric elements are dependent in the quotient".into(),
        ));
    }
    let symmetric_dim = match sigma {
        SigmaType::Fixed => {
            let rows: Vec<Vec<C64>> = crate::local_algebra::candidate_monomials(n, germ.r + n)
                .into_iter()
                .filter(|&(a, _)| a % 2 == 0)
                .map(coords_of)
                .collect();
            coords_rank(&rows)
        }
        SigmaType::Swapped => germ.r,
    };
    let deficit = symmetric_dim.saturating_sub(basis.len());
    let warning = (deficit > 0).then(|| {
        format!(
            "prescribed basis spans {} of the {} dimensions of the symmetric quotient",
            basis.len(),
            symmetric_dim
        )
    });
    Ok(SymmetricBasis {
        basis,
        symmetric_dim,
        deficit,
        warning,
    })
}

/// Several germ families with index involutions sigma (x -> -x) and eta
/// (complex conjugation).
#[derive(Debug, Clone)]
pub struct GermCollection {
    pub germs: Vec<UniversalFamily>,
    pub sigma_action: Vec<usize>,
    pub eta_action: Vec<usize>,
    /// Offsets of each germ's parameters in the full vector.
    pub offsets: Vec<usize>,
}

fn check_involution(action: &[usize], n: usize) -> bool {
    action.len() == n && action.iter().all(|&i| i < n && action[i] < n) && (0..n).all(|i| action[action[i]] == i)
}

pub fn assemble_collection(
    germs: Vec<UniversalFamily>,
    sigma_action: Option<Vec<usize>>,
    eta_action: Option<Vec<usize>>,
) -> Result<GermCollection> {
    let n = germs.len();
    let ident: Vec<usize> = (0..n).collect();
    let sigma_declared = sigma_action.is_some();
    let sigma = sigma_action.unwrap_or_else(|| ident.clone());
    let eta = eta_action.unwrap_or(ident);
    if !check_involution(&sigma, n) {
        return Err(Error::NotSymmetric("sigma is not an involution of the germ indices".into()));
    }
    if !check_involution(&eta, n) {
        return Err(Error::IncompatibleRealStructure(
            "eta is not an involution of the germ indices".into(),
        ));
    }
    for l in 0..n {
        let fl = &germs[l].germ.f;
        let m = sigma[l];
        if sigma_declared && germs[m].germ.f.distance(&fl.reflect_x()) > 1e-10 {
            return Err(Error::NotSymmetric(format!(
                "germ {m} is not the reflection of germ {l}"
            )));
        }
        let k = eta[l];
        if germs[k].germ.f.distance(&fl.conj()) > 1e-10 {
            return Err(Error::IncompatibleRealStructure(format!(
                "germ {k} is not the conjugate of germ {l}"
            )));
        }
        let (bl, bk) = (germs[l].basis_g(), germs[k].basis_g());
        let (hl, hk) = (germs[l].dual_h(), germs[k].dual_h());
        let bases_match = bl.len() == bk.len()
            && bl.iter().zip(bk).all(|(a, b)| b.distance(&a.conj()) <= 1e-10)
            && hl.iter().zip(hk).all(|(a, b)| b.distance(&a.conj()) <= 1e-10);
        if !bases_match {
            return Err(Error::IncompatibleRealStructure(format!(
                "basis of germ {k} is not the conjugate of the basis of germ {l}"
            )));
        }
    }
    let mut offsets = Vec::with_capacity(n);
    let mut acc = 0;
    for g in &germs {
        offsets.push(acc);
        acc += g.r;
    }
    Ok(GermCollection {
        germs,
        sigma_action: sigma,
        eta_action: eta,
        offsets,
    })
}

impl GermCollection {
    pub fn total_r(&self) -> usize {
        self.germs.iter().map(|g| g.r).sum()
    }

    /// Real dimension of the fixed locus of eta: r for a germ fixed by eta,
    /// 2r for a conjugate pair.
    pub fn real_slice_dimension(&self) -> usize {
        self.total_r()
    }

    /// Parameters of germ l inside the full vector.
    pub fn slice<'a>(&self, t: &'a [C64], l: usize) -> &'a [C64] {
        &t[self.offsets[l]..self.offsets[l] + self.germs[l].r]
    }

    /// Per-germ branch-value maps.
    pub fn dis_map(&self, t: &[C64]) -> Result<Vec<Vec<C64>>> {
        (0..self.germs.len())
            .map(|l| dis_map(&self.germs[l], self.slice(t, l)))
            .collect()
    }
}

/// Membership tolerance of the real slice.
pub const REALITY_TOL: f64 = 1e-12;

/// Nearest parameter vector with t_{eta l} = conj(t_l), and whether `t`
/// already satisfied the relation.
pub fn reality_constrain(coll: &GermCollection, t: &[C64]) -> Result<(Vec<C64>, bool)> {
    if t.len() != coll.total_r() {
        return Err(Error::InvalidInput(format!(
            "parameter has {} entries, collection has {}",
            t.len(),
            coll.total_r()
        )));
    }
    let mut out = t.to_vec();
    let mut member = true;
    for l in 0..coll.germs.len() {
        let k = coll.eta_action[l];
        let (ol, ok) = (coll.offsets[l], coll.offsets[k]);
        let r = coll.germs[l].r;
        if k == l {
            for i in 0..r {
                if t[ol + i].im.abs() > REALITY_TOL {
                    member = false;
                }
                out[ol + i] = C64::new(t[ol + i].re, 0.0);
            }
        } else if l < k {
            for i in 0..r {
                let (a, b) = (t[ol + i], t[ok + i]);
                if (a - b.conj()).norm() > REALITY_TOL {
                    member = false;
                }
                let mean = 0.5 * (a + b.conj());
                out[ol + i] = mean;
                out[ok + i] = mean.conj();
            }
        }
    }
    Ok((out, member))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::{germ_from_real_terms, quasi_homogeneous};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn cusp_family_shape() {
        let fam = build_family(&quasi_homogeneous(3, 2)).unwrap();
        assert_eq!(fam.r, 4);
        let t = [c(1.0), c(2.0), c(3.0), c(4.0)];
        let g = fam.g_at(&t);
        let want = BiPoly::from_terms(&[
            (0, 3, c(1.0)),
            (2, 0, c(-1.0)),
            (0, 0, c(1.0)),
            (1, 0, c(2.0)),
            (0, 1, c(3.0)),
            (1, 1, c(4.0)),
        ]);
        assert_eq!(g.distance(&want), 0.0);
        assert!(fam.param_box > 1e-3, "box {}", fam.param_box);
    }

    #[test]
    fn small_families() {
        let fam = build_family(&quasi_homogeneous(2, 1)).unwrap();
        assert_eq!(fam.r, 1);
        assert_eq!(fam.basis_g()[0], BiPoly::monomial(0, 0, c(1.0)));
        let rigid = build_family(&germ_from_real_terms(&[(0, 1, 1.0), (2, 0, -1.0)]).unwrap()).unwrap();
        assert_eq!(rigid.r, 0);
        assert_eq!(rigid.param_box, 0.0);
    }

    #[test]
    fn dis_examples() {
        let fam = build_family(&quasi_homogeneous(3, 2)).unwrap();
        let d = dis_map(&fam, &[c(0.0); 4]).unwrap();
        assert!(d.iter().all(|z| z.norm() < 1e-14));
        let fam = build_family(&quasi_homogeneous(2, 1)).unwrap();
        let t1 = C64::new(0.01, 0.02);
        let d = dis_map(&fam, &[t1]).unwrap();
        assert!((d[0] + t1).norm() < 1e-12);
    }

    #[test]
    fn z3_symmetry() {
        let fam = build_family(&quasi_homogeneous(3, 2)).unwrap();
        let q = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let t = [C64::new(0.003, -0.002), c(0.004), C64::new(-0.001, 0.005), c(0.002)];
        let tq = [t[0], t[1], q * t[2], q * t[3]];
        let a = dis_map(&fam, &t).unwrap();
        let b = dis_map(&fam, &tq).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-8);
        }
    }

    #[test]
    fn b_matrix_identity_at_zero() {
        let fam = build_family(&quasi_homogeneous(3, 2)).unwrap();
        let b = b_matrix(&fam, &[c(0.0); 4], 256).unwrap();
        let id = CMat::identity(4, 4);
        assert!(crate::linalg::max_diff(&b, &id) < 1e-10);
        let b = b_matrix(&fam, &[c(0.001), c(0.0), c(0.0), c(0.0)], 256).unwrap();
        assert!(crate::linalg::norm2(&(b.clone() - id)) < 0.1);
        let b2 = b_matrix(&fam, &[c(0.001), c(0.0), c(0.0), c(0.0)], 512).unwrap();
        assert!(crate::linalg::max_diff(&b, &b2) < 1e-9);
    }

    #[test]
    fn b_matrix_out_of_domain() {
        let fam = build_family(&quasi_homogeneous(2, 1)).unwrap();
        // branch value at x = 0.75 = rho sits on node 0
        assert!(matches!(
            b_matrix(&fam, &[c(0.75)], 64),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn fiber_examples() {
        let fam = build_family(&quasi_homogeneous(3, 2)).unwrap();
        let rep = fiber_classification(&fam, &[c(0.0); 4]).unwrap();
        assert!(!rep.smooth);
        assert_eq!(rep.multiplicity_sum, 4);
        assert_eq!(rep.branch_points.len(), 1);
        let rep = fiber_classification(&fam, &[c(1e-3), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert!(rep.smooth);
        assert_eq!(rep.multiplicity_sum, 4);

        let fam = build_family(&quasi_homogeneous(2, 1)).unwrap();
        let rep = fiber_classification(&fam, &[C64::new(0.01, -0.02)]).unwrap();
        assert!(rep.smooth && rep.simple_branch);
        assert_eq!(rep.multiplicity_sum, 1);
        assert!(multiplicity_conservation_check(&fam, &[c(0.0)]).unwrap());
        let outside = c(2.0 * fam.param_box + 0.1);
        assert!(matches!(
            multiplicity_conservation_check(&fam, &[outside]),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn symmetric_bases() {
        let s = symmetric_basis(&quasi_homogeneous(4, 2), SigmaType::Fixed).unwrap();
        assert_eq!(s.basis, vec![(0, 0), (0, 1)]);
        assert_eq!(s.symmetric_dim, 3);
        assert!(s.warning.is_some());
        let s = symmetric_basis(&quasi_homogeneous(3, 2), SigmaType::Fixed).unwrap();
        assert_eq!(s.basis, vec![(0, 0)]);
        let s = symmetric_basis(&quasi_homogeneous(3, 1), SigmaType::Swapped).unwrap();
        assert_eq!(s.basis, vec![(0, 0)]);
        assert_eq!(s.symmetric_dim, 2);
        assert_eq!(s.deficit, 1);
        assert!(matches!(
            symmetric_basis(&quasi_homogeneous(3, 1), SigmaType::Fixed),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn reality_projection() {
        let fam = build_family(&quasi_homogeneous(2, 1)).unwrap();
        let coll = assemble_collection(vec![fam.clone()], None, None).unwrap();
        let (p, member) = reality_constrain(&coll, &[C64::new(0.3, 0.2)]).unwrap();
        assert_eq!(p, vec![c(0.3)]);
        assert!(!member);

        let pair = assemble_collection(vec![fam.clone(), fam.clone()], None, Some(vec![1, 0])).unwrap();
        let t1 = C64::new(0.01, 0.02);
        let (p, member) = reality_constrain(&pair, &[t1, t1.conj()]).unwrap();
        assert!(member);
        assert_eq!(p, vec![t1, t1.conj()]);
        assert_eq!(pair.real_slice_dimension(), 2);

        assert!(matches!(
            assemble_collection(vec![fam.clone(), fam.clone(), fam], Some(vec![1, 2, 0]), None),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn incompatible_conjugate_basis() {
        let g = quasi_homogeneous(2, 1);
        let fam = build_family(&g).unwrap();
        let mut other = fam.clone();
        other.quotient.basis_g[0] = BiPoly::monomial(0, 0, C64::new(0.0, 1.0));
        assert!(matches!(
            assemble_collection(vec![fam, other], None, Some(vec![1, 0])),
            Err(Error::IncompatibleRealStructure(_))
        ));
    }
}
