//! Coefficient recovery from surface samples on a sphere of radius `r0`.
//!
//! With `x0 = k r0`, `h = h_l^(1)(x0)`, `D = d/dx[x h_l^(1)(x)]` at `x0`:
//!
//! | route        | `a_E`                              | `a_M`                              |
//! |--------------|------------------------------------|------------------------------------|
//! | radial       | `x0/(Z0 h sqrt(L2)) ∫Y*·E_r`       | `-x0/(h sqrt(L2)) ∫Y*·H_r`         |
//! | tangential E | `x0/(i Z0 D) ∫Z*·E`                | `1/(Z0 h) ∫X*·E`                   |
//! | tangential H | `1/h ∫X*·H`                        | `i x0/D ∫Z*·H`                     |
//!
//! Each route reads only the sample components listed; the others are
//! never touched.
//!
//! The `Z`-projection constants invert the `(i/x) D Z_lm` terms of the
//! field expansion. A commonly printed form, `r0/(Z0 D)` and `r0/D`, is
//! off by the factor `i/k` (it leaves a length dimension behind); it is
//! kept as [`ZPrefactor::Printed`] only so that regression tests can
//! demonstrate the discrepancy.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{project_all, FieldKind, FieldSamples, ProjectionKind};
use crate::multipole::{CoefficientSet, Medium};
use crate::specfun::{mode_count, modes, RadialFactors};

/// Which sample components a coefficient set was recovered from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// `E_r` and `H_r`.
    Radial,
    /// `E_θ`, `E_φ`.
    TangentialE,
    /// `H_θ`, `H_φ`.
    TangentialH,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Radial, Route::TangentialE, Route::TangentialH];

    pub fn name(&self) -> &'static str {
        match self {
            Route::Radial => "radial",
            Route::TangentialE => "tan-e",
            Route::TangentialH => "tan-h",
        }
    }

    /// Sample components the route reads.
    pub fn required_components(&self) -> &'static [&'static str] {
        match self {
            Route::Radial => &["E_r", "H_r"],
            Route::TangentialE => &["E_theta", "E_phi"],
            Route::TangentialH => &["H_theta", "H_phi"],
        }
    }
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Constant applied to `Z`-projections in the tangential routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZPrefactor {
    /// `x0/(i Z0 D)` for E, `i x0/D` for H.
    #[default]
    Derived,
    /// `r0/(Z0 D)` for E, `r0/D` for H. Wrong by `i/k`; regression use only.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionOptions {
    /// Amplification (relative to the best-conditioned degree) above which
    /// a degree is flagged.
    pub condition_threshold: f64,
    pub z_prefactor: ZPrefactor,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        Self {
            condition_threshold: 1e6,
            z_prefactor: ZPrefactor::Derived,
        }
    }
}

/// A degree whose divisor is large compared with the best-conditioned one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionWarning {
    pub route: Route,
    pub l: u32,
    pub amplification: f64,
}

impl std::fmt::Display for ConditionWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: degree l={} is ill-conditioned (amplification {:.3e})",
            self.route, self.l, self.amplification
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionReport {
    pub route: Route,
    pub coeffs: CoefficientSet,
    /// Magnitude of the largest divisor per degree, index `l - 1`.
    pub condition: Vec<f64>,
    /// `condition[l] / min(condition)`.
    pub amplification: Vec<f64>,
    pub warnings: Vec<ConditionWarning>,
    /// Per-mode relative deviation from a reference set, canonical order.
    pub residuals: Option<Vec<f64>>,
}

impl ExtractionReport {
    fn new(route: Route, coeffs: CoefficientSet, condition: Vec<f64>, threshold: f64) -> Self {
        let best = condition.iter().cloned().fold(f64::INFINITY, f64::min);
        let amplification: Vec<f64> = condition.iter().map(|c| c / best).collect();
        let warnings = amplification
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > threshold)
            .map(|(i, &a)| ConditionWarning {
                route,
                l: i as u32 + 1,
                amplification: a,
            })
            .collect();
        Self {
            route,
            coeffs,
            condition,
            amplification,
            warnings,
            residuals: None,
        }
    }

    /// Fills [`ExtractionReport::residuals`] against `reference`.
    pub fn with_reference(mut self, reference: &CoefficientSet) -> Self {
        self.residuals = Some(mode_residuals(&self.coeffs, reference));
        self
    }

    pub fn max_amplification(&self) -> f64 {
        self.amplification.iter().cloned().fold(0.0, f64::max)
    }
}

/// Per-mode deviation `max(|Δa_E|, |Δa_M|) / max(|a_E|, |a_M|)` of the
/// reference; modes where the reference vanishes are scaled by the
/// reference's largest coefficient instead (or reported absolutely if the
/// whole reference is zero).
pub fn mode_residuals(coeffs: &CoefficientSet, reference: &CoefficientSet) -> Vec<f64> {
    let global = reference.max_abs();
    modes(reference.l_max())
        .map(|mode| {
            let de = (coeffs.a_e(mode) - reference.a_e(mode)).norm();
            let dm = (coeffs.a_m(mode) - reference.a_m(mode)).norm();
            let scale = reference.a_e(mode).norm().max(reference.a_m(mode).norm());
            let scale = if scale > 0.0 {
                scale
            } else if global > 0.0 {
                global
            } else {
                1.0
            };
            de.max(dm) / scale
        })
        .collect()
}

/// `max |a - b| / max(|a|, |b|)` over all coefficients of both families,
/// with the denominator taken over the whole set. Zero when both are zero.
pub fn relative_deviation(a: &CoefficientSet, b: &CoefficientSet) -> f64 {
    let scale = a.max_abs().max(b.max_abs());
    if scale == 0.0 {
        return 0.0;
    }
    let diff = a
        .a_e_dense()
        .iter()
        .zip(b.a_e_dense())
        .chain(a.a_m_dense().iter().zip(b.a_m_dense()))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    diff / scale
}

fn expect_kind(samples: &FieldSamples, kind: FieldKind) -> Result<()> {
    if samples.kind() != kind {
        return Err(Error::Samples(format!(
            "expected {:?} field samples, got {:?}",
            kind,
            samples.kind()
        )));
    }
    Ok(())
}

fn check_l_max(l_max: u32) -> Result<()> {
    if l_max < 1 {
        return Err(Error::InvalidParameter("extraction degree must be >= 1".into()));
    }
    Ok(())
}

fn radial_factors(samples: &FieldSamples, medium: &Medium, l_max: u32) -> Result<RadialFactors> {
    RadialFactors::new(l_max, medium.k * samples.grid().radius())
}

/// Coefficients from `E_r` and `H_r` alone.
pub fn extract_radial(
    e: &FieldSamples,
    h: &FieldSamples,
    medium: &Medium,
    l_max: u32,
) -> Result<ExtractionReport> {
    extract_radial_with(e, h, medium, l_max, &ExtractionOptions::default())
}

pub fn extract_radial_with(
    e: &FieldSamples,
    h: &FieldSamples,
    medium: &Medium,
    l_max: u32,
    opts: &ExtractionOptions,
) -> Result<ExtractionReport> {
    check_l_max(l_max)?;
    expect_kind(e, FieldKind::Electric)?;
    expect_kind(h, FieldKind::Magnetic)?;
    if e.grid() != h.grid() {
        return Err(Error::Samples("E and H samples live on different grids".into()));
    }
    let rf = radial_factors(e, medium, l_max)?;
    let pe = project_all(e, ProjectionKind::Yr, l_max)?;
    let ph = project_all(h, ProjectionKind::Yr, l_max)?;
    let n = mode_count(l_max);
    let mut a_e = Vec::with_capacity(n);
    let mut a_m = Vec::with_capacity(n);
    for (j, mode) in modes(l_max).enumerate() {
        let f = rf.x / (rf.h[mode.l() as usize] * mode.ang_norm());
        a_e.push(f * pe[j] / medium.z0);
        a_m.push(-f * ph[j]);
    }
    let coeffs = CoefficientSet::from_dense(l_max, *medium, a_e, a_m)?;
    let condition = (1..=l_max as usize).map(|l| rf.h[l].norm()).collect();
    Ok(ExtractionReport::new(Route::Radial, coeffs, condition, opts.condition_threshold))
}

/// Coefficients from `E_θ`, `E_φ` alone.
pub fn extract_tangential_e(
    e: &FieldSamples,
    medium: &Medium,
    l_max: u32,
) -> Result<ExtractionReport> {
    extract_tangential_e_with(e, medium, l_max, &ExtractionOptions::default())
}

pub fn extract_tangential_e_with(
    e: &FieldSamples,
    medium: &Medium,
    l_max: u32,
    opts: &ExtractionOptions,
) -> Result<ExtractionReport> {
    check_l_max(l_max)?;
    expect_kind(e, FieldKind::Electric)?;
    let rf = radial_factors(e, medium, l_max)?;
    let r0 = e.grid().radius();
    let px = project_all(e, ProjectionKind::X, l_max)?;
    let pz = project_all(e, ProjectionKind::Z, l_max)?;
    let i = Complex64::i();
    let z0 = medium.z0;
    let mut a_e = Vec::with_capacity(px.len());
    let mut a_m = Vec::with_capacity(px.len());
    for (j, mode) in modes(l_max).enumerate() {
        let l = mode.l() as usize;
        let c_e = match opts.z_prefactor {
            ZPrefactor::Derived => rf.x / (i * z0 * rf.d[l]),
            ZPrefactor::Printed => r0 / (z0 * rf.d[l]),
        };
        a_e.push(c_e * pz[j]);
        a_m.push(px[j] / (z0 * rf.h[l]));
    }
    let coeffs = CoefficientSet::from_dense(l_max, *medium, a_e, a_m)?;
    Ok(ExtractionReport::new(
        Route::TangentialE,
        coeffs,
        tangential_condition(&rf, l_max),
        opts.condition_threshold,
    ))
}

/// Coefficients from `H_θ`, `H_φ` alone.
pub fn extract_tangential_h(
    h: &FieldSamples,
    medium: &Medium,
    l_max: u32,
) -> Result<ExtractionReport> {
    extract_tangential_h_with(h, medium, l_max, &ExtractionOptions::default())
}

pub fn extract_tangential_h_with(
    h: &FieldSamples,
    medium: &Medium,
    l_max: u32,
    opts: &ExtractionOptions,
) -> Result<ExtractionReport> {
    check_l_max(l_max)?;
    expect_kind(h, FieldKind::Magnetic)?;
    let rf = radial_factors(h, medium, l_max)?;
    let r0 = h.grid().radius();
    let px = project_all(h, ProjectionKind::X, l_max)?;
    let pz = project_all(h, ProjectionKind::Z, l_max)?;
    let i = Complex64::i();
    let mut a_e = Vec::with_capacity(px.len());
    let mut a_m = Vec::with_capacity(px.len());
    for (j, mode) in modes(l_max).enumerate() {
        let l = mode.l() as usize;
        let c_m = match opts.z_prefactor {
            ZPrefactor::Derived => i * rf.x / rf.d[l],
            ZPrefactor::Printed => r0 / rf.d[l],
        };
        a_e.push(px[j] / rf.h[l]);
        a_m.push(c_m * pz[j]);
    }
    let coeffs = CoefficientSet::from_dense(l_max, *medium, a_e, a_m)?;
    Ok(ExtractionReport::new(
        Route::TangentialH,
        coeffs,
        tangential_condition(&rf, l_max),
        opts.condition_threshold,
    ))
}

fn tangential_condition(rf: &RadialFactors, l_max: u32) -> Vec<f64> {
    (1..=l_max as usize)
        .map(|l| rf.h[l].norm().max(rf.d[l].norm()))
        .collect()
}

/// Runs one route on `(E, H)` samples.
pub fn extract(
    route: Route,
    e: &FieldSamples,
    h: &FieldSamples,
    medium: &Medium,
    l_max: u32,
    opts: &ExtractionOptions,
) -> Result<ExtractionReport> {
    match route {
        Route::Radial => extract_radial_with(e, h, medium, l_max, opts),
        Route::TangentialE => extract_tangential_e_with(e, medium, l_max, opts),
        Route::TangentialH => extract_tangential_h_with(h, medium, l_max, opts),
    }
}

/// All three routes on the same data, with pairwise deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// In [`Route::ALL`] order.
    pub reports: Vec<ExtractionReport>,
    /// `(a, b, relative_deviation)` for each unordered pair.
    pub pairwise: Vec<(Route, Route, f64)>,
    pub max_deviation: f64,
}

impl EquivalenceReport {
    pub fn report(&self, route: Route) -> &ExtractionReport {
        self.reports
            .iter()
            .find(|r| r.route == route)
            .expect("all routes present")
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ConditionWarning> {
        self.reports.iter().flat_map(|r| r.warnings.iter())
    }
}

pub fn equivalence_report(
    e: &FieldSamples,
    h: &FieldSamples,
    medium: &Medium,
    l_max: u32,
    opts: &ExtractionOptions,
) -> Result<EquivalenceReport> {
    let reports = Route::ALL
        .iter()
        .map(|&route| extract(route, e, h, medium, l_max, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut pairwise = Vec::with_capacity(3);
    for a in 0..reports.len() {
        for b in (a + 1)..reports.len() {
            let d = relative_deviation(&reports[a].coeffs, &reports[b].coeffs);
            pairwise.push((reports[a].route, reports[b].route, d));
        }
    }
    let max_deviation = pairwise.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        reports,
        pairwise,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{SphVector, SphereGrid};
    use crate::multipole::synthesize;
    use crate::specfun::ModeIndex;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn medium() -> Medium {
        Medium::vacuum(3.0e8).unwrap()
    }

    fn fields(c: &CoefficientSet, r0: f64) -> (FieldSamples, FieldSamples) {
        let grid = SphereGrid::new(c.l_max(), r0).unwrap();
        synthesize(c, r0, &grid).unwrap()
    }

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radial_recovers_electric_dipole() {
        let mut c = CoefficientSet::zeros(3, medium()).unwrap();
        c.set_a_e(ModeIndex::new(1, 0).unwrap(), c64(1.0, 0.0)).unwrap();
        let r0 = medium().wavelength() / 4.0;
        let (e, h) = fields(&c, r0);
        let rep = extract_radial(&e, &h, &medium(), 3).unwrap();
        for (mode, ae, am) in rep.coeffs.iter() {
            let expect = if mode.l() == 1 && mode.m() == 0 { 1.0 } else { 0.0 };
            assert!((ae - expect).norm() < 1e-10, "{mode}: {ae}");
            assert!(am.norm() < 1e-10);
        }
    }

    #[test]
    fn tangential_e_recovers_magnetic_quadrupole() {
        let mut c = CoefficientSet::zeros(3, medium()).unwrap();
        c.set_a_m(ModeIndex::new(2, 1).unwrap(), c64(3.0, -2.0)).unwrap();
        let (e, _) = fields(&c, 0.4);
        let rep = extract_tangential_e(&e, &medium(), 3).unwrap();
        let got = rep.coeffs.a_m(ModeIndex::new(2, 1).unwrap());
        assert!((got - c64(3.0, -2.0)).norm() < 1e-9);
        assert!(rep.coeffs.a_e_dense().iter().all(|a| a.norm() < 1e-9));
    }

    #[test]
    fn tangential_h_recovers_both_families() {
        for electric in [true, false] {
            let mut c = CoefficientSet::zeros(2, medium()).unwrap();
            let mode = ModeIndex::new(1, 0).unwrap();
            if electric {
                c.set_a_e(mode, c64(1.0, 0.0)).unwrap();
            } else {
                c.set_a_m(mode, c64(1.0, 0.0)).unwrap();
            }
            let (_, h) = fields(&c, 0.3);
            let rep = extract_tangential_h(&h, &medium(), 2).unwrap();
            assert!(relative_deviation(&rep.coeffs, &c) < 1e-10);
        }
    }

    #[test]
    fn zero_samples_give_zero_coefficients() {
        let grid = Arc::new(SphereGrid::new(4, 0.5).unwrap());
        let e = FieldSamples::zeros(grid.clone(), FieldKind::Electric);
        let h = FieldSamples::zeros(grid, FieldKind::Magnetic);
        let rep = equivalence_report(&e, &h, &medium(), 4, &ExtractionOptions::default()).unwrap();
        for r in &rep.reports {
            assert_eq!(r.coeffs.max_abs(), 0.0);
        }
        assert_eq!(rep.max_deviation, 0.0);
    }

    #[test]
    fn kind_and_grid_mismatches_are_rejected() {
        let grid = Arc::new(SphereGrid::new(2, 0.5).unwrap());
        let e = FieldSamples::zeros(grid.clone(), FieldKind::Electric);
        let h = FieldSamples::zeros(grid, FieldKind::Magnetic);
        assert!(extract_tangential_e(&h, &medium(), 2).is_err());
        assert!(extract_tangential_h(&e, &medium(), 2).is_err());
        assert!(extract_radial(&h, &e, &medium(), 2).is_err());
        assert!(matches!(
            extract_radial(&e, &h, &medium(), 3),
            Err(Error::GridTooCoarse { .. })
        ));
        let other = Arc::new(SphereGrid::new(2, 0.6).unwrap());
        let h2 = FieldSamples::zeros(other, FieldKind::Magnetic);
        assert!(extract_radial(&e, &h2, &medium(), 2).is_err());
        assert!(extract_tangential_e(&e, &medium(), 0).is_err());
    }

    #[test]
    fn printed_prefactor_is_off_by_i_over_k() {
        let m = medium();
        let mut c = CoefficientSet::zeros(2, m).unwrap();
        c.set_a_e(ModeIndex::new(2, -1).unwrap(), c64(0.5, 0.25)).unwrap();
        c.set_a_m(ModeIndex::new(1, 1).unwrap(), c64(-1.0, 2.0)).unwrap();
        let (e, h) = fields(&c, 0.7);
        let printed = ExtractionOptions {
            z_prefactor: ZPrefactor::Printed,
            ..Default::default()
        };
        let ae = extract_tangential_e_with(&e, &m, 2, &printed).unwrap();
        let mode = ModeIndex::new(2, -1).unwrap();
        let ratio = ae.coeffs.a_e(mode) / c.a_e(mode);
        assert_relative_eq!(ratio.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(ratio.im, 1.0 / m.k, max_relative = 1e-10);

        let ah = extract_tangential_h_with(&h, &m, 2, &printed).unwrap();
        let mode = ModeIndex::new(1, 1).unwrap();
        let ratio = ah.coeffs.a_m(mode) / c.a_m(mode);
        assert_relative_eq!(ratio.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(ratio.im, -1.0 / m.k, max_relative = 1e-10);
    }

    #[test]
    fn evanescent_degrees_are_flagged() {
        let m = medium();
        let r0 = 0.5 / m.k;
        let grid = Arc::new(SphereGrid::new(8, r0).unwrap());
        let e = FieldSamples::zeros(grid.clone(), FieldKind::Electric);
        let h = FieldSamples::zeros(grid, FieldKind::Magnetic);
        let rep = extract_radial(&e, &h, &m, 8).unwrap();
        assert!(rep.condition.iter().all(|&c| c > 0.0));
        assert_relative_eq!(rep.amplification[0], 1.0);
        let flagged: Vec<u32> = rep.warnings.iter().map(|w| w.l).collect();
        assert!(!flagged.is_empty());
        assert!(flagged.windows(2).all(|w| w[1] == w[0] + 1));
        assert_eq!(*flagged.last().unwrap(), 8);
    }

    #[test]
    fn residuals_against_reference() {
        let m = medium();
        let mut c = CoefficientSet::zeros(1, m).unwrap();
        c.set_a_e(ModeIndex::new(1, 0).unwrap(), c64(2.0, 0.0)).unwrap();
        let mut d = c.clone();
        d.set_a_e(ModeIndex::new(1, 0).unwrap(), c64(2.0, 0.002)).unwrap();
        d.set_a_m(ModeIndex::new(1, 1).unwrap(), c64(0.0, 0.02)).unwrap();
        let r = mode_residuals(&d, &c);
        assert_relative_eq!(r[1], 1e-3, max_relative = 1e-12);
        assert_relative_eq!(r[2], 1e-2, max_relative = 1e-12);
        assert_eq!(r[0], 0.0);
    }

    #[test]
    fn radial_route_ignores_tangential_components() {
        let m = medium();
        let mut c = CoefficientSet::zeros(3, m).unwrap();
        c.set_a_e(ModeIndex::new(3, 2).unwrap(), c64(1.0, 1.0)).unwrap();
        c.set_a_m(ModeIndex::new(2, 0).unwrap(), c64(-0.3, 0.0)).unwrap();
        let (e, h) = fields(&c, PI / (2.0 * m.k));
        let junk = |k: usize, v: &SphVector| {
            SphVector::new(v.r, c64(k as f64, 1.0), c64(-3.0, k as f64))
        };
        let a = extract_radial(&e, &h, &m, 3).unwrap();
        let b = extract_radial(&e.map(junk).unwrap(), &h.map(junk).unwrap(), &m, 3).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
    }
}
