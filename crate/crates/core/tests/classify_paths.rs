use germdeform::check::{manufactured_path, restart_difference, t_star};
use germdeform::classify::*;
use germdeform::contour::{circle_nodes, poly_roots};
use germdeform::family::{build_family, UniversalFamily};
use germdeform::germ::quasi_homogeneous;
use germdeform::poly::{BiPoly, Poly, TriPoly};
use germdeform::{re, Error, YPolySeries};
use num_complex::Complex64 as C64;

fn cusp_family() -> UniversalFamily {
    build_family(&quasi_homogeneous(3, 2)).unwrap()
}

fn opts(steps: usize, nodes: usize) -> ClassifyOptions {
    ClassifyOptions {
        steps,
        nodes,
        halving_check: false,
        ..ClassifyOptions::default()
    }
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn manufactured_u() -> TriPoly {
    TriPoly::from_terms(&[(0, 1, 0, re(1.0)), (1, 0, 1, re(1e-3)), (0, 2, 1, re(1e-3))])
}

fn node_rows(p: &BiPoly, fam: &UniversalFamily, m: usize) -> Vec<Vec<C64>> {
    circle_nodes(fam.rho(), m).iter().map(|&x| p.at_x(x)).collect()
}

#[test]
fn field_matches_manufactured_derivatives() {
    let fam = cusp_family();
    let (path, phi) = manufactured_path(&fam).unwrap();
    let u = manufactured_u();
    let m = 64;
    for s in [0.0, 0.3, 0.7, 1.0] {
        let t: Vec<C64> = phi.iter().map(|p| p.eval(re(s))).collect();
        let dt_exact: Vec<C64> = phi.iter().map(|p| p.derivative().eval(re(s))).collect();
        let u_nodes = node_rows(&u.at_s(s), &fam, m);
        let (dt, du) = vector_field(&path, s, &t, &u_nodes, &fam).unwrap();
        assert!(max_diff(&dt, &dt_exact) < 1e-7, "s = {s}");
        for (b, want) in du.iter().zip(node_rows(&u.ds().at_s(s), &fam, m)) {
            let n = b.len().max(want.len());
            for j in 0..n {
                let bj = b.get(j).copied().unwrap_or_default();
                let wj = want.get(j).copied().unwrap_or_default();
                assert!((bj - wj).norm() < 1e-7);
            }
        }
    }
}

#[test]
fn linearization_matches_exact_decomposition() {
    let fam = cusp_family();
    let fs = BiPoly::from_terms(&[
        (2, 2, re(1.0)),
        (0, 0, C64::new(0.2, -0.1)),
        (1, 1, re(0.3)),
        (1, 0, re(-0.05)),
        (0, 2, re(0.4)),
    ]);
    let f = TriPoly::constant_in_s(fam.germ.f.clone()).add(&germdeform::poly::s_times(&Poly::new(vec![re(0.0), re(1e-3)]), &fs));
    let path = DeformationPath::new(f, 1.0, &fam).unwrap();
    let (dt, _) = vector_field(&path, 0.0, &[C64::default(); 4], &identity_u(128), &fam).unwrap();
    let order = 16;
    let exact = decompose_exact(&fs.scale(re(1e-3)), &YPolySeries::y(order), &fam).unwrap();
    assert!(max_diff(&dt, &exact.c) < 1e-8);
}

#[test]
fn reparameterization_equivariance() {
    let fam = cusp_family();
    let (path, phi) = manufactured_path(&fam).unwrap();
    let sigma = Poly::new(vec![re(0.0), re(1.0), re(1.0)]);
    let s_end = (5f64.sqrt() - 1.0) / 2.0;
    let slow = DeformationPath::new(path.f.compose_s(&sigma), s_end, &fam).unwrap();
    let res = integrate_path(&slow, &fam, opts(32, 64)).unwrap();
    for (s, t) in &res.phi_samples {
        let want: Vec<C64> = phi.iter().map(|p| p.eval(sigma.eval(re(*s)))).collect();
        assert!(max_diff(t, &want) < 1e-6, "s = {s}");
    }
}

#[test]
fn pullback_verification() {
    let fam = cusp_family();
    let constant = DeformationPath::new(TriPoly::constant_in_s(fam.germ.f.clone()), 1.0, &fam).unwrap();
    let res = integrate_path(&constant, &fam, opts(4, 64)).unwrap();
    let rep = verify_pullback(&constant, &res, &fam).unwrap();
    assert!(rep.residual < 1e-12 && rep.unit_deviation_at_0 < 1e-12);
    assert!(res.phi_final().iter().all(|z| z.norm() < 1e-14));

    let line = straight_line(&fam, &t_star()).unwrap();
    let res = integrate_path(&line, &fam, opts(8, 64)).unwrap();
    let rep = verify_pullback(&line, &res, &fam).unwrap();
    assert!(rep.residual < 1e-12 && rep.unit_deviation_at_0 < 1e-12);
    assert!(max_diff(res.phi_final(), &t_star()) < 1e-6);
    assert!(res.u_final[0].iter().all(|z| z.norm() < 1e-8));
    assert!((res.u_final[1][0] - re(1.0)).norm() < 1e-8);

    let (path, _) = manufactured_path(&fam).unwrap();
    let mut res = integrate_path(&path, &fam, opts(32, 64)).unwrap();
    let rep = verify_pullback(&path, &res, &fam).unwrap();
    assert!(rep.residual < 1e-8);

    let last = res.phi_samples.last_mut().unwrap();
    last.1[0] += 1e-3;
    let corrupted = verify_pullback(&path, &res, &fam).unwrap();
    assert!(corrupted.residual > 1e-5);
}

#[test]
fn direction_outside_the_basis() {
    let fam = cusp_family();
    let f = TriPoly::from_terms(&[(0, 3, 0, re(1.0)), (2, 0, 0, re(-1.0)), (2, 2, 1, re(1.0))]);
    let path = DeformationPath::new(f, 1.0, &fam).unwrap();
    let res = integrate_path(&path, &fam, ClassifyOptions { steps: 16, nodes: 64, ..ClassifyOptions::default() }).unwrap();
    assert!(res.residual < 1e-7);
    assert!(res.halving_difference.unwrap() < 1e-6);
    assert!(restart_difference(&path, &fam, 16, 64, 1e-3).unwrap() < 1e-6);
}

#[test]
fn numeric_decomposition_of_a_basis_element() {
    let fam = cusp_family();
    let m = 64;
    let t = vec![C64::default(); 4];
    let xs = circle_nodes(fam.rho(), m);
    let sheets: Vec<Vec<C64>> = xs.iter().map(|&x| poly_roots(&fam.germ.f.at_x(x), None)).collect();
    let values: Vec<Vec<C64>> = xs
        .iter()
        .zip(&sheets)
        .map(|(&x, ys)| ys.iter().map(|&y| fam.basis_g()[0].eval(x, y)).collect())
        .collect();
    let dec = decompose_numeric(&fam, &t, &identity_u(m), &sheets, &values).unwrap();
    assert!(max_diff(&dec.c, &[re(1.0), re(0.0), re(0.0), re(0.0)]) < 1e-12);
    assert!(dec.b_nodes.iter().flatten().all(|z| z.norm() < 1e-9));
    assert!(dec.negative_modes < 1e-9);
}

#[test]
fn failures_are_reported() {
    let fam = cusp_family();
    let wrong = TriPoly::from_terms(&[(0, 3, 0, re(1.0)), (2, 0, 0, re(-1.01))]);
    assert!(matches!(DeformationPath::new(wrong, 1.0, &fam), Err(Error::InvalidInput(_))));

    let far = straight_line(&fam, &[re(2.0), re(0.0), re(0.0), re(0.0)]).unwrap();
    assert!(integrate_path(&far, &fam, opts(8, 64)).is_err());

    let (path, _) = manufactured_path(&fam).unwrap();
    let strict = ClassifyOptions { steps: 4, nodes: 64, tol: 1e-9, ..ClassifyOptions::default() };
    assert!(matches!(integrate_path(&path, &fam, strict), Err(Error::ToleranceExceeded { .. })));
}
