use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::domain::{build_grid, CoefficientBounds, DomainSpec};

fn square(n: usize) -> Arc<Grid> {
    Arc::new(build_grid(&DomainSpec::rectangle(&[PI, PI]), n).unwrap())
}

/// Eigenvalues of the 5-point Dirichlet Laplacian on the square with `n` cells.
fn discrete_square_spectrum(n: usize, count: usize) -> Vec<f64> {
    let h = PI / n as f64;
    let s = |m: usize| 4.0 / (h * h) * (m as f64 * h / 2.0).sin().powi(2);
    let mut all: Vec<f64> = (1..n)
        .flat_map(|a| (1..n).map(move |b| s(a) + s(b)))
        .collect();
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    all
}

#[test]
fn one_dimensional_stencil_is_tridiagonal() {
    let g = Arc::new(build_grid(&DomainSpec::rectangle(&[1.0]), 8).unwrap());
    let op = assemble_operator(&g, None).unwrap();
    assert_eq!(op.dimension(), 7);
    let h2 = 1.0 / 64.0;
    let m = op.matrix();
    for i in 0..7 {
        assert!((m.get(i, i) - 2.0 / h2).abs() < 1e-9);
        if i + 1 < 7 {
            assert!((m.get(i, i + 1) + 1.0 / h2).abs() < 1e-9);
        }
        if i + 2 < 7 {
            assert_eq!(m.get(i, i + 2), 0.0);
        }
    }
}

#[test]
fn square_spectrum_matches_sine_identity() {
    let g = square(40);
    let op = assemble_operator(&g, None).unwrap();
    assert!(op.symmetry_defect() < 1e-14);
    let pairs = lowest_eigenpairs(&op, 6, DEFAULT_TOL).unwrap();
    let exact = discrete_square_spectrum(40, 6);
    for (p, e) in pairs.iter().zip(&exact) {
        assert!(
            (p.eigenvalue - e).abs() < 1e-8 * e.max(1.0),
            "{} vs {}",
            p.eigenvalue,
            e
        );
        assert!(p.residual <= DEFAULT_TOL);
    }
    // Ground state has one sign.
    assert!(pairs[0].field.values().iter().all(|&v| v >= 0.0));
}

#[test]
fn rayleigh_quotient_reproduces_eigenvalue() {
    let g = square(30);
    let op = assemble_operator(&g, None).unwrap();
    let pairs = lowest_eigenpairs(&op, 3, DEFAULT_TOL).unwrap();
    for p in &pairs {
        let r = rayleigh_quotient(&p.field, g.inside()).unwrap();
        assert!((r - p.eigenvalue).abs() < 1e-7 * p.eigenvalue);
    }
}

#[test]
fn torus_ground_state_is_constant() {
    let g = Arc::new(build_grid(&DomainSpec::torus(&[2.0 * PI, 2.0 * PI]), 24).unwrap());
    let op = assemble_operator(&g, None).unwrap();
    let pairs = lowest_eigenpairs(&op, 5, DEFAULT_TOL).unwrap();
    assert!(pairs[0].eigenvalue.abs() < 1e-9);
    let h = 2.0 * PI / 24.0;
    let first = 4.0 / (h * h) * (h / 2.0).sin().powi(2);
    for p in &pairs[1..] {
        assert!((p.eigenvalue - first).abs() < 1e-8);
    }
}

#[test]
fn constant_anisotropy_and_weight_scale_spectrum() {
    let g = square(24);
    let n = g.len();
    let aij: Vec<f64> = (0..n).flat_map(|_| [2.0, 0.0, 0.0, 1.0]).collect();
    let c = CoefficientField::new(
        g.clone(),
        aij,
        vec![2.0; n],
        0.0,
        CoefficientBounds::default(),
    )
    .unwrap();
    let op = assemble_operator(&g, Some(&c)).unwrap();
    let l = lowest_eigenpairs(&op, 1, DEFAULT_TOL).unwrap()[0].eigenvalue;
    let h = PI / 24.0;
    let s1 = 4.0 / (h * h) * (h / 2.0).sin().powi(2);
    assert!((l - (2.0 * s1 + s1) / 2.0).abs() < 1e-8, "{l}");
}

#[test]
fn mixed_terms_are_symmetric_and_consistent() {
    let g = square(20);
    let c = CoefficientField::from_fn(
        g.clone(),
        |x| {
            let o = 0.2 * (x[0] + x[1]).sin();
            vec![1.0 + 0.1 * x[0].cos(), o, o, 1.2]
        },
        |_| 1.0,
        0.0,
        CoefficientBounds::default(),
    )
    .unwrap();
    let op = assemble_operator(&g, Some(&c)).unwrap();
    assert!(op.symmetry_defect() < 1e-14);
    let l = lowest_eigenpairs(&op, 1, DEFAULT_TOL).unwrap()[0].eigenvalue;
    assert!(l > 0.5 && l < 4.0, "{l}");
}

#[test]
fn indefinite_coefficients_are_rejected() {
    let g = square(8);
    let n = g.len();
    let aij: Vec<f64> = (0..n).flat_map(|_| [1.0, 0.0, 0.0, -0.5]).collect();
    let c = CoefficientField::from_parts(
        g.clone(),
        aij,
        vec![1.0; n],
        0.0,
        CoefficientBounds::default(),
    )
    .unwrap();
    assert!(matches!(
        assemble_operator(&g, Some(&c)),
        Err(Error::IllPosedOperator(_))
    ));
}

#[test]
fn submask_outside_grid_mask_is_rejected() {
    let g = square(8);
    let mut m = vec![false; g.len()];
    m[0] = true;
    assert!(matches!(
        dirichlet_ground_value(&g, &m),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        dirichlet_ground_value(&g, &vec![false; g.len()]),
        Err(Error::EmptyDomain)
    ));
}

#[test]
fn single_node_ground_value() {
    let g = square(8);
    let mut m = vec![false; g.len()];
    m[g.index([4, 4, 0])] = true;
    let l = dirichlet_ground_value(&g, &m).unwrap();
    let h = PI / 8.0;
    assert!((l - 4.0 / (h * h)).abs() < 1e-10);
}

#[test]
fn rayleigh_quotient_of_zero_is_degenerate() {
    let g = square(8);
    let f = ScalarField::zeros(g.clone());
    assert!(matches!(
        rayleigh_quotient(&f, g.inside()),
        Err(Error::DegenerateRegion(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ground_value_is_monotone_under_inclusion(
        x0 in 1usize..8, y0 in 1usize..8, w in 3usize..10, hgt in 3usize..10,
        dx in 0usize..3, dy in 0usize..3,
    ) {
        let g = square(20);
        let rect = |a: usize, b: usize, w: usize, h: usize| -> Vec<bool> {
            (0..g.len()).map(|i| {
                let c = g.coords(i);
                g.is_inside(i) && c[0] >= a && c[0] < a + w && c[1] >= b && c[1] < b + h
            }).collect()
        };
        let inner = rect(x0 + dx, y0 + dy, w, hgt);
        let outer = rect(x0, y0, w + 2 * dx + 1, hgt + 2 * dy + 1);
        prop_assert!(inner.iter().zip(&outer).all(|(&i, &o)| !i || o));
        let li = dirichlet_ground_value(&g, &inner).unwrap();
        let lo = dirichlet_ground_value(&g, &outer).unwrap();
        prop_assert!(lo <= li * (1.0 + 1e-10));
    }
}
