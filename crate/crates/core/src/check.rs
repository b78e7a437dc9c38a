//! Measurements behind the invariant suite run by `germdeform check`.

use crate::classify::{
    decompose_numeric, identity_u, integrate_path, integrate_trajectory, pullback_path,
    straight_line, ClassifyOptions, DeformationPath,
};
use crate::contour::{circle_nodes, min_separation, poly_from_roots, poly_roots};
use crate::error::{Error, Result};
use crate::family::{
    assemble_collection, b_matrix, build_family, build_family_seeded, dis_map,
    fiber_classification, random_in_box, reality_constrain, symmetric_basis, SigmaType,
    SymmetricBasis, UniversalFamily,
};
use crate::germ::{quasi_homogeneous, Germ};
use crate::linalg::{smallest_singular_value, CMat};
use crate::local_algebra::{analyze, contour_pairing_at_0, monomial_poly, residue_pairing};
use crate::poly::{derivative_coeffs, horner, BiPoly, Poly, TriPoly};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rng_for(seed: u64, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000).wrapping_add(id))
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// The corpus y^n - x^m used by several criteria.
pub fn corpus() -> Vec<Germ> {
    [(2, 1), (2, 3), (3, 2), (3, 4), (4, 2), (4, 3)]
        .iter()
        .map(|&(n, m)| quasi_homogeneous(n, m))
        .collect()
}

pub fn cusp() -> Germ {
    quasi_homogeneous(3, 2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeAnchor {
    pub d: usize,
    pub r: usize,
    pub basis: Vec<String>,
}

pub fn cusp_anchor() -> Result<AnalyzeAnchor> {
    let germ = cusp();
    let q = analyze(&germ)?;
    Ok(AnalyzeAnchor {
        d: germ.d,
        r: germ.r,
        basis: q.basis_labels(),
    })
}

/// max |dis(t1, t2, q t3, q t4) - dis(t)| over random |t_i| <= radius.
pub fn z3_equivariance(seed: u64, samples: usize, radius: f64) -> Result<f64> {
    let fam = build_family(&cusp())?;
    let q = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let mut rng = rng_for(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let t = random_in_box(&mut rng, 4, radius);
        let rotated = vec![t[0], t[1], q * t[2], q * t[3]];
        worst = worst.max(max_diff(&dis_map(&fam, &t)?, &dis_map(&fam, &rotated)?));
    }
    Ok(worst)
}

/// max deviation of sum y_i^n / f'(y_i) from 0 (n < d - 1) or 1 (n = d - 1).
pub fn trace_identities(seed: u64, samples: usize, max_degree: usize) -> f64 {
    let mut rng = rng_for(seed, 3);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < samples {
        let d = rng.gen_range(1..=max_degree);
        let roots: Vec<C64> = (0..d)
            .map(|_| C64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        if min_separation(&roots) < 0.05 {
            continue;
        }
        let coeffs = poly_from_roots(&roots);
        let dcoeffs = derivative_coeffs(&coeffs);
        let found = poly_roots(&coeffs, None);
        for n in 0..d {
            let s: C64 = found
                .iter()
                .map(|&y| y.powu(n as u32) / horner(&dcoeffs, y))
                .sum();
            let expected = if n == d - 1 { ONE } else { ZERO };
            worst = worst.max((s - expected).norm());
        }
        done += 1;
    }
    worst
}

/// max |exact pairing - contour pairing| over basis and dual elements of
/// each corpus germ.
pub fn pairing_cross_validation() -> Result<f64> {
    let mut worst = 0.0f64;
    for germ in corpus() {
        let q = analyze(&germ)?;
        let mut elems: Vec<BiPoly> = q.basis_g.clone();
        elems.extend(q.dual_h.iter().cloned());
        elems.push(monomial_poly((1, germ.d - 1)));
        for g in &elems {
            for h in &elems {
                let exact = residue_pairing(g, h, &germ)?;
                let numeric = contour_pairing_at_0(&germ, g, h)?;
                worst = worst.max((exact - numeric).norm());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualCertificate {
    /// max |pairing(g_i, h_j) - delta_ij| over the corpus.
    pub pairing_deviation: f64,
    /// max |B(0) - I| over the corpus.
    pub b0_deviation: f64,
    /// max ||B(t) - I|| (spectral) for random |t_i| <= 1e-3 on the cusp family.
    pub b_small_t_deviation: f64,
}

pub fn dual_certificate(seed: u64, samples: usize) -> Result<DualCertificate> {
    let mut pairing_deviation = 0.0f64;
    let mut b0_deviation = 0.0f64;
    for germ in corpus() {
        let fam = build_family(&germ)?;
        let q = &fam.quotient;
        for (i, g) in q.basis_g.iter().enumerate() {
            for (j, h) in q.dual_h.iter().enumerate() {
                let p = residue_pairing(g, h, &germ)?;
                let delta = if i == j { ONE } else { ZERO };
                pairing_deviation = pairing_deviation.max((p - delta).norm());
            }
        }
        let b0 = b_matrix(&fam, &vec![ZERO; fam.r], 256)?;
        let id = CMat::identity(fam.r, fam.r);
        b0_deviation = b0_deviation.max((b0 - id).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let fam = build_family(&cusp())?;
    let mut rng = rng_for(seed, 5);
    let mut b_small_t_deviation = 0.0f64;
    for _ in 0..samples {
        let t = random_in_box(&mut rng, fam.r, 1e-3);
        let b = b_matrix(&fam, &t, 256)?;
        let id = CMat::identity(fam.r, fam.r);
        b_small_t_deviation = b_small_t_deviation.max((b - id).norm());
    }
    Ok(DualCertificate {
        pairing_deviation,
        b0_deviation,
        b_small_t_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstancyReport {
    pub germ: String,
    pub r: usize,
    pub samples: usize,
    /// Samples whose multiplicity sum differs from r.
    pub failures: usize,
}

pub fn local_constancy(seed: u64, samples: usize) -> Result<Vec<ConstancyReport>> {
    let mut out = Vec::new();
    for (k, germ) in corpus().into_iter().enumerate() {
        let fam = build_family_seeded(&germ, seed)?;
        let mut rng = rng_for(seed, 600 + k as u64);
        let mut failures = 0;
        for _ in 0..samples {
            let t = random_in_box(&mut rng, fam.r, fam.param_box);
            if fiber_classification(&fam, &t)?.multiplicity_sum != fam.r {
                failures += 1;
            }
        }
        out.push(ConstancyReport {
            germ: germ.label(),
            r: fam.r,
            samples,
            failures,
        });
    }
    Ok(out)
}

fn is_generic(fam: &UniversalFamily, t: &[C64]) -> Result<bool> {
    let rep = fiber_classification(fam, t)?;
    Ok(rep.smooth && rep.simple_branch)
}

/// Fraction of random cusp-family parameters in the certified box whose fiber is
/// smooth with simple branching.
pub fn density_fraction(seed: u64, samples: usize) -> Result<f64> {
    let fam = build_family_seeded(&cusp(), seed)?;
    let mut rng = rng_for(seed, 7);
    let mut hits = 0;
    for _ in 0..samples {
        let t = random_in_box(&mut rng, fam.r, fam.param_box);
        if is_generic(&fam, &t)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

/// Central-difference Jacobian of dis at t.
pub fn dis_jacobian(fam: &UniversalFamily, t: &[C64], h: f64) -> Result<CMat> {
    let r = fam.r;
    let mut jac = CMat::zeros(r, r);
    for j in 0..r {
        let mut tp = t.to_vec();
        let mut tm = t.to_vec();
        tp[j] += h;
        tm[j] -= h;
        let (dp, dm) = (dis_map(fam, &tp)?, dis_map(fam, &tm)?);
        for i in 0..r {
            jac[(i, j)] = (dp[i] - dm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Smallest singular value of the dis Jacobian over random generic points of the cusp family.
pub fn branch_map_rank(seed: u64, samples: usize) -> Result<f64> {
    let fam = build_family_seeded(&cusp(), seed)?;
    let mut rng = rng_for(seed, 8);
    let mut worst = f64::INFINITY;
    let mut found = 0;
    let mut tries = 0;
    while found < samples {
        tries += 1;
        if tries > 50 * samples {
            return Err(Error::OutOfDomain("too few points with simple branching".into()));
        }
        let t = random_in_box(&mut rng, fam.r, fam.param_box);
        if !is_generic(&fam, &t)? {
            continue;
        }
        let jac = dis_jacobian(&fam, &t, 1e-5)?;
        worst = worst.min(smallest_singular_value(&jac));
        found += 1;
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionReport {
    /// max |h - b G_u - c g| at the contour sheets.
    pub on_curve_residual: f64,
    /// max |c(M) - c(2M)|.
    pub c_stability: f64,
}

/// Sheets of G(x_k, ., t) on the default contour and the values of h there.
fn sheets_and_values(fam: &UniversalFamily, t: &[C64], h: &BiPoly, m: usize) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let g = fam.g_at(t);
    let xs = circle_nodes(fam.rho(), m);
    let sheets: Vec<Vec<C64>> = xs.iter().map(|&x| poly_roots(&g.at_x(x), None)).collect();
    let values = xs
        .iter()
        .zip(&sheets)
        .map(|(&x, ys)| ys.iter().map(|&y| h.eval(x, y)).collect())
        .collect();
    (sheets, values)
}

/// Random h of degree < d in x and y, decomposed at random t in half the
/// certified box of the cusp family.
pub fn decomposition_reconstruction(seed: u64, samples: usize, m: usize) -> Result<ReconstructionReport> {
    let fam = build_family_seeded(&cusp(), seed)?;
    let d = fam.germ.d;
    let mut rng = rng_for(seed, 9);
    let mut on_curve_residual = 0.0f64;
    let mut c_stability = 0.0f64;
    for _ in 0..samples {
        let mut terms = Vec::new();
        for a in 0..d {
            for b in 0..d {
                let c = C64::from_polar(rng.gen::<f64>(), rng.gen_range(0.0..std::f64::consts::TAU));
                terms.push((a, b, c));
            }
        }
        let h = BiPoly::from_terms(&terms);
        let t = random_in_box(&mut rng, fam.r, 0.5 * fam.param_box);
        let (sheets, values) = sheets_and_values(&fam, &t, &h, m);
        let coarse = decompose_numeric(&fam, &t, &identity_u(m), &sheets, &values)?;
        let (sheets2, values2) = sheets_and_values(&fam, &t, &h, 2 * m);
        let fine = decompose_numeric(&fam, &t, &identity_u(2 * m), &sheets2, &values2)?;
        on_curve_residual = on_curve_residual
            .max(coarse.on_curve_residual)
            .max(fine.on_curve_residual);
        c_stability = c_stability.max(max_diff(&coarse.c, &fine.c));
    }
    Ok(ReconstructionReport {
        on_curve_residual,
        c_stability,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTripReport {
    /// |phi(1) - t*| for the straight line with 64 steps.
    pub straight_line_error: f64,
    /// |phi(1) - t*| for the sheared straight line.
    pub shear_phi_error: f64,
    /// Largest coefficient error of u(1) against y + 1e-3 x.
    pub shear_u_error: f64,
    /// Manufactured error with 8 steps over the error with 16 steps.
    pub halving_ratio: f64,
    /// |phi(1)| difference between restarts from different initial u.
    pub restart_difference: f64,
    /// Largest residual certificate among the runs.
    pub max_residual: f64,
}

/// The sample point t* of the straight-line tests.
pub fn t_star() -> Vec<C64> {
    vec![re(0.002), ZERO, re(0.001), ZERO]
}

/// A path F = H G(x, u, phi(s)) with nonlinear phi, a shear and a
/// y-dependent unit, and its phi.
pub fn manufactured_path(fam: &UniversalFamily) -> Result<(DeformationPath, Vec<Poly>)> {
    let phi = vec![
        Poly::new(vec![ZERO, re(0.002), ZERO, ZERO, ZERO, re(0.001)]),
        Poly::new(vec![ZERO, ZERO, re(0.0005)]),
        Poly::new(vec![ZERO, re(0.001)]),
        Poly::new(vec![ZERO, ZERO, ZERO, re(-0.0008)]),
    ];
    let u = TriPoly::from_terms(&[(0, 1, 0, ONE), (1, 0, 1, re(1e-3)), (0, 2, 1, re(1e-3))]);
    let unit = TriPoly::from_terms(&[(0, 0, 0, ONE), (0, 1, 1, re(0.1))]);
    Ok((pullback_path(fam, &u, &phi, Some(&unit), 1.0)?, phi))
}

fn options(steps: usize, nodes: usize, halving: bool) -> ClassifyOptions {
    ClassifyOptions {
        steps,
        nodes,
        halving_check: halving,
        ..ClassifyOptions::default()
    }
}

/// phi(1) from u0 = y and from u0 = y + eps f, which describes the same
/// initial germ isomorphism on V(f).
pub fn restart_difference(path: &DeformationPath, fam: &UniversalFamily, steps: usize, m: usize, eps: f64) -> Result<f64> {
    let t0 = vec![ZERO; fam.r];
    let base = integrate_trajectory(path, fam, steps, 0.0, path.s_max, &t0, &identity_u(m))?;
    let shifted: Vec<Vec<C64>> = circle_nodes(fam.rho(), m)
        .iter()
        .map(|&x| {
            let mut row = fam.germ.f.at_x(x).iter().map(|c| c * eps).collect::<Vec<_>>();
            row[1] += ONE;
            row
        })
        .collect();
    let other = integrate_trajectory(path, fam, steps, 0.0, path.s_max, &t0, &shifted)?;
    let end = |tr: &[crate::classify::TrajectoryPoint]| tr.last().map(|p| p.t.clone()).unwrap_or_default();
    Ok(max_diff(&end(&base), &end(&other)))
}

pub fn classification_round_trips(m: usize) -> Result<RoundTripReport> {
    let fam = build_family(&cusp())?;
    let ts = t_star();
    let line = straight_line(&fam, &ts)?;
    let res = integrate_path(&line, &fam, options(64, m, false))?;
    let straight_line_error = max_diff(res.phi_final(), &ts);
    let mut max_residual = res.residual;

    let phi: Vec<Poly> = ts.iter().map(|&t| Poly::new(vec![ZERO, t])).collect();
    let shear = TriPoly::from_terms(&[(0, 1, 0, ONE), (1, 0, 1, re(1e-3))]);
    let path = pullback_path(&fam, &shear, &phi, None, 1.0)?;
    let res = integrate_path(&path, &fam, options(16, m, true))?;
    let shear_phi_error = max_diff(res.phi_final(), &ts);
    let mut expected_u = [vec![ZERO; 2], vec![ONE]];
    expected_u[0][1] = re(1e-3);
    let mut shear_u_error = 0.0f64;
    for (j, row) in res.u_final.iter().enumerate() {
        for (k, c) in row.iter().enumerate() {
            let e = expected_u.get(j).and_then(|r| r.get(k)).copied().unwrap_or(ZERO);
            shear_u_error = shear_u_error.max((c - e).norm());
        }
    }
    max_residual = max_residual.max(res.residual);

    let (path, phi) = manufactured_path(&fam)?;
    let exact: Vec<C64> = phi.iter().map(|p| p.eval(ONE)).collect();
    let coarse = integrate_path(&path, &fam, options(8, m, false))?;
    let fine = integrate_path(&path, &fam, options(16, m, false))?;
    let halving_ratio = max_diff(coarse.phi_final(), &exact) / max_diff(fine.phi_final(), &exact);
    max_residual = max_residual.max(fine.residual);

    let outside = TriPoly::from_terms(&[(0, 3, 0, ONE), (2, 0, 0, re(-1.0)), (2, 2, 1, ONE)]);
    let probe = DeformationPath::new(outside, 1.0, &fam)?;
    let res = integrate_path(&probe, &fam, options(16, m, true))?;
    max_residual = max_residual.max(res.residual);
    let restart = restart_difference(&probe, &fam, 16, m, 1e-3)?
        .max(restart_difference(&path, &fam, 16, m, 1e-3)?);

    Ok(RoundTripReport {
        straight_line_error,
        shear_phi_error,
        shear_u_error,
        halving_ratio,
        restart_difference: restart,
        max_residual,
    })
}

pub fn hyperelliptic_prescription() -> Result<SymmetricBasis> {
    symmetric_basis(&quasi_homogeneous(4, 2), SigmaType::Fixed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealityReport {
    /// max |P(P(t)) - P(t)|.
    pub idempotence_deviation: f64,
    /// Constructed members reported as non-members plus random points
    /// reported as members.
    pub membership_errors: usize,
    pub samples: usize,
}

pub fn reality_slice(seed: u64, samples: usize) -> Result<RealityReport> {
    let fam_a = build_family(&quasi_homogeneous(2, 3))?;
    let fam_b = build_family(&quasi_homogeneous(3, 2))?;
    let collections = vec![
        assemble_collection(vec![fam_a.clone(), fam_a.clone()], None, Some(vec![1, 0]))?,
        assemble_collection(vec![fam_b.clone()], None, None)?,
        assemble_collection(
            vec![fam_b.clone(), fam_a.clone(), fam_b.clone()],
            None,
            Some(vec![2, 1, 0]),
        )?,
    ];
    let mut rng = rng_for(seed, 12);
    let mut idempotence_deviation = 0.0f64;
    let mut membership_errors = 0;
    let mut count = 0;
    for coll in &collections {
        for _ in 0..samples {
            let n = coll.total_r();
            let t = random_in_box(&mut rng, n, 0.01);
            let (p, member) = reality_constrain(coll, &t)?;
            let (pp, p_member) = reality_constrain(coll, &p)?;
            idempotence_deviation = idempotence_deviation.max(max_diff(&p, &pp));
            if member || !p_member {
                membership_errors += 1;
            }
            // a member built from free values on one germ of each orbit
            let mut built = vec![ZERO; n];
            for l in 0..coll.germs.len() {
                let k = coll.eta_action[l];
                for i in 0..coll.germs[l].r {
                    let v = t[coll.offsets[l] + i];
                    if k == l {
                        built[coll.offsets[l] + i] = re(v.re);
                    } else if l < k {
                        built[coll.offsets[l] + i] = v;
                        built[coll.offsets[k] + i] = v.conj();
                    }
                }
            }
            if !reality_constrain(coll, &built)?.1 {
                membership_errors += 1;
            }
            count += 1;
        }
    }
    Ok(RealityReport {
        idempotence_deviation,
        membership_errors,
        samples: count,
    })
}

/// One line of the check table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn line(id: usize, name: &str, outcome: Result<(bool, String)>) -> CheckLine {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckLine {
        id,
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Size parameters of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub nodes: usize,
}

pub fn run_suite(cfg: SuiteConfig) -> Vec<CheckLine> {
    let seed = cfg.seed;
    vec![
        line(1, "cusp anchor", cusp_anchor().map(|a| {
            let ok = a.d == 3 && a.r == 4 && a.basis == ["1", "x", "y", "x*y"];
            (ok, format!("d = {}, r = {}, basis = {:?}", a.d, a.r, a.basis))
        })),
        line(2, "Z3 equivariance", z3_equivariance(seed, 50, 0.01).map(|v| (v < 1e-8, format!("max diff {v:.3e}")))),
        line(3, "trace identities", {
            let v = trace_identities(seed, 100, 6);
            Ok((v < 1e-10, format!("max error {v:.3e}")))
        }),
        line(4, "pairing cross-validation", pairing_cross_validation().map(|v| (v < 1e-8, format!("max diff {v:.3e}")))),
        line(5, "dual-basis certificate", dual_certificate(seed, 20).map(|c| {
            let ok = c.pairing_deviation < 1e-10 && c.b0_deviation < 1e-10 && c.b_small_t_deviation < 0.2;
            (ok, format!(
                "pairing {:.3e}, B(0) {:.3e}, B(t) {:.3e}",
                c.pairing_deviation, c.b0_deviation, c.b_small_t_deviation
            ))
        })),
        line(6, "local constancy", local_constancy(seed, 100).map(|reps| {
            let bad: usize = reps.iter().map(|r| r.failures).sum();
            (bad == 0, format!("{bad} failures over {} germs", reps.len()))
        })),
        line(7, "density of generic fibers", density_fraction(seed, 200).map(|f| (f >= 0.95, format!("fraction {f:.3}")))),
        line(8, "branch-map rank", branch_map_rank(seed, 20).map(|s| (s > 1e-6, format!("min singular value {s:.3e}")))),
        line(9, "decomposition reconstruction", decomposition_reconstruction(seed, 50, cfg.nodes).map(|r| {
            let ok = r.on_curve_residual < 1e-9 && r.c_stability < 1e-9;
            (ok, format!("residual {:.3e}, c stability {:.3e}", r.on_curve_residual, r.c_stability))
        })),
        line(10, "classification round trips", classification_round_trips(cfg.nodes).map(|r| {
            let ok = r.straight_line_error < 1e-6
                && r.shear_phi_error < 1e-6
                && r.shear_u_error < 1e-7
                && r.halving_ratio >= 8.0
                && r.restart_difference < 1e-6;
            (ok, format!(
                "line {:.3e}, shear phi {:.3e}, shear u {:.3e}, halving ratio {:.1}, restart {:.3e}",
                r.straight_line_error, r.shear_phi_error, r.shear_u_error, r.halving_ratio, r.restart_difference
            ))
        })),
        line(11, "hyperelliptic prescription", hyperelliptic_prescription().map(|b| {
            let ok = b.basis == [(0, 0), (0, 1)] && b.warning.is_some();
            (ok, format!("basis {:?}, warning: {}", b.basis, b.warning.unwrap_or_else(|| "none".into())))
        })),
        line(12, "reality slice", reality_slice(seed, 20).map(|r| {
            let ok = r.idempotence_deviation < 1e-12 && r.membership_errors == 0;
            (ok, format!("idempotence {:.3e}, membership errors {}", r.idempotence_deviation, r.membership_errors))
        })),
    ]
}
