//! Vector harmonics against hand-differentiated closed forms, the
//! orthonormality suite and projection linearity.

use std::f64::consts::PI;
use std::sync::Arc;

use emmp_core::harmonics::{project, project_all, vec_x, vec_y, vec_z};
use emmp_core::specfun::{mode_count, modes, ModeIndex};
use emmp_core::{Complex64, FieldKind, FieldSamples, ProjectionKind, SphVector, SphereGrid};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `X = (1/i)(∂φY/sinθ θ̂ - ∂θY φ̂)/sqrt(L2)` from `Y` and its two partials.
fn x_from_partials(l: u32, dy_dtheta: Complex64, dy_dphi: Complex64, theta: f64) -> (Complex64, Complex64) {
    let norm = ((l * (l + 1)) as f64).sqrt();
    let minus_i = c(0.0, -1.0);
    (
        minus_i * dy_dphi / theta.sin() / norm,
        minus_i * -dy_dtheta / norm,
    )
}

#[test]
fn x11_matches_hand_derivative() {
    // Y_11 = -sqrt(3/8π) sinθ e^{iφ}
    let (theta, phi) = (PI / 3.0, 0.7);
    let a = -(3.0 / (8.0 * PI)).sqrt();
    let e = Complex64::from_polar(1.0, phi);
    let dth = a * theta.cos() * e;
    let dph = c(0.0, 1.0) * a * theta.sin() * e;
    let (xt, xp) = x_from_partials(1, dth, dph, theta);
    let got = vec_x(ModeIndex::new(1, 1).unwrap(), theta, phi);
    assert!((got.theta - xt).norm() <= 1e-12);
    assert!((got.phi - xp).norm() <= 1e-12);
    // 25-digit symbolic evaluation, frozen.
    assert!((got.theta - c(-0.186_851_906_958_262_28, -0.157_383_190_098_312_74)).norm() <= 1e-12);
    assert!((got.phi - c(0.078_691_595_049_156_37, -0.093_425_953_479_131_14)).norm() <= 1e-12);
}

#[test]
fn z6m3_matches_hand_derivative() {
    // Y_6^{-3} = (1/32) sqrt(1365/π) sin³θ (11cos³θ - 3cosθ) e^{-3iφ}
    let (theta, phi) = (1.1f64, 2.2);
    let (s, co) = (theta.sin(), theta.cos());
    let a = (1365.0 / PI).sqrt() / 32.0;
    let e = Complex64::from_polar(1.0, -3.0 * phi);
    let f = s.powi(3) * (11.0 * co.powi(3) - 3.0 * co);
    let df = 3.0 * s * s * co * (11.0 * co.powi(3) - 3.0 * co) + s.powi(4) * (3.0 - 33.0 * co * co);
    let dth = a * df * e;
    let dph = c(0.0, -3.0) * a * f * e;
    let (xt, xp) = x_from_partials(6, dth, dph, theta);
    // Z = r̂ × X
    let (zt, zp) = (-xp, xt);
    let got = vec_z(ModeIndex::new(6, -3).unwrap(), theta, phi);
    assert!((got.theta - zt).norm() <= 1e-12, "{} vs {}", got.theta, zt);
    assert!((got.phi - zp).norm() <= 1e-12);
    assert!((got.theta - c(0.086_171_351_785_316_33, 0.262_831_317_280_330_23)).norm() <= 1e-12);
    assert!((got.phi - c(0.076_053_388_907_913_37, -0.024_934_712_491_127_24)).norm() <= 1e-12);
}

#[test]
fn dipole_harmonics_at_equator() {
    let mode = ModeIndex::new(1, 0).unwrap();
    let x = vec_x(mode, PI / 2.0, 0.0);
    let z = vec_z(mode, PI / 2.0, 0.0);
    assert_eq!(x.theta, c(0.0, 0.0));
    assert!((x.phi - c(0.0, -0.345_494_149_471_335_5)).norm() <= 1e-15);
    assert!((z.theta - c(0.0, 0.345_494_149_471_335_5)).norm() <= 1e-15);
    assert_eq!(z.phi, c(0.0, 0.0));
}

/// One family of sampled basis fields: `X_lm`, `Z_lm` or `Y_lm r̂`.
fn basis_field(kind: ProjectionKind, mode: ModeIndex, grid: &Arc<SphereGrid>) -> FieldSamples {
    let values = grid
        .nodes()
        .map(|n| match kind {
            ProjectionKind::X => vec_x(mode, n.theta, n.phi).to_vector(),
            ProjectionKind::Z => vec_z(mode, n.theta, n.phi).to_vector(),
            ProjectionKind::Yr => vec_y(mode, n.theta, n.phi),
        })
        .collect();
    FieldSamples::new(grid.clone(), FieldKind::Electric, values).unwrap()
}

#[test]
fn orthonormality_suite_l8() {
    let l_max = 8;
    let grid = Arc::new(SphereGrid::new(l_max, 1.0).unwrap());
    let kinds = [ProjectionKind::X, ProjectionKind::Z, ProjectionKind::Yr];
    let mut worst: f64 = 0.0;
    for field_kind in kinds {
        for src in modes(l_max) {
            let samples = basis_field(field_kind, src, &grid);
            for proj_kind in kinds {
                let got = project_all(&samples, proj_kind, l_max).unwrap();
                for (j, value) in got.iter().enumerate() {
                    let target = if field_kind == proj_kind && j == src.dense_index() { 1.0 } else { 0.0 };
                    worst = worst.max((value - target).norm());
                }
            }
        }
    }
    assert!(worst <= 1e-12, "worst orthonormality error {worst:e}");
}

#[test]
fn y44_norm_on_default_grid() {
    let grid = Arc::new(SphereGrid::new(4, 1.0).unwrap());
    let mode = ModeIndex::new(4, 4).unwrap();
    let got = project(&basis_field(ProjectionKind::Yr, mode, &grid), ProjectionKind::Yr, mode).unwrap();
    assert!((got - 1.0).norm() <= 1e-13);
}

#[test]
fn weights_sum_to_four_pi() {
    for l_max in [1, 2, 8, 17, 40] {
        let g = SphereGrid::new(l_max, 0.25).unwrap();
        assert!((g.total_weight() - 4.0 * PI).abs() <= 1e-13 * 4.0 * PI);
        assert!(g.thetas().iter().all(|&t| t > 0.0 && t < PI));
    }
}

fn random_samples(grid: &Arc<SphereGrid>, seeds: &[f64]) -> FieldSamples {
    let values = (0..grid.len())
        .map(|k| {
            let s = |j: usize| (seeds[j % seeds.len()] * (k as f64 + 1.0 + j as f64)).sin();
            SphVector::new(c(s(0), s(1)), c(s(2), s(3)), c(s(4), s(5)))
        })
        .collect();
    FieldSamples::new(grid.clone(), FieldKind::Magnetic, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_is_linear(
        seeds_f in prop::collection::vec(0.1f64..3.0, 6),
        seeds_g in prop::collection::vec(0.1f64..3.0, 6),
        a_re in -2.0f64..2.0, a_im in -2.0f64..2.0,
        b_re in -2.0f64..2.0, b_im in -2.0f64..2.0,
        l_max in 1u32..6,
    ) {
        let grid = Arc::new(SphereGrid::new(l_max, 1.3).unwrap());
        let f = random_samples(&grid, &seeds_f);
        let g = random_samples(&grid, &seeds_g);
        let (a, b) = (c(a_re, a_im), c(b_re, b_im));
        let combo = f.combine(a, &g, b).unwrap();
        for kind in [ProjectionKind::X, ProjectionKind::Z, ProjectionKind::Yr] {
            let pf = project_all(&f, kind, l_max).unwrap();
            let pg = project_all(&g, kind, l_max).unwrap();
            let pc = project_all(&combo, kind, l_max).unwrap();
            prop_assert_eq!(pc.len(), mode_count(l_max));
            for j in 0..pc.len() {
                let want = a * pf[j] + b * pg[j];
                let scale = 1.0 + (a * pf[j]).norm() + (b * pg[j]).norm();
                prop_assert!((pc[j] - want).norm() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn harmonics_are_transverse_and_related_by_rotation(
        l in 1u32..20, m_frac in -1.0f64..=1.0, theta in 0.01f64..3.13, phi in -PI..PI,
    ) {
        let m = (m_frac * l as f64).round() as i32;
        let mode = ModeIndex::new(l, m).unwrap();
        let x = vec_x(mode, theta, phi);
        let z = vec_z(mode, theta, phi);
        prop_assert_eq!(x.to_vector().r, c(0.0, 0.0));
        prop_assert_eq!(z.to_vector().r, c(0.0, 0.0));
        prop_assert_eq!(z.theta, -x.phi);
        prop_assert_eq!(z.phi, x.theta);
    }
}
