//! Subcommand implementations. Data goes to files or stdout, diagnostics
//! to stderr; the returned [`Verdict`] becomes the exit status.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use emmp_core::dipole::{
    halfwave_coeffs, magnetic_dipole_variant, radial_source_on_sphere,
    validate_roundtrip_on, DipoleSpec, DIPOLE_L_MAX,
};
use emmp_core::extraction::{equivalence_report, extract, ExtractionOptions, Route};
use emmp_core::multipole::{far_field, synthesize};
use emmp_core::{FieldKind, SphereGrid};

use crate::formats::{num, pattern_csv, pattern_directions, save_text, CoeffFile, Component, FieldFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    ToleranceExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Radial,
    TanE,
    TanH,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Radial => Route::Radial,
            RouteArg::TanE => Route::TangentialE,
            RouteArg::TanH => Route::TangentialH,
        }
    }
}

fn options(threshold: f64) -> Result<ExtractionOptions> {
    if !(threshold > 1.0) {
        bail!("--condition-threshold must exceed 1, got {threshold}");
    }
    Ok(ExtractionOptions {
        condition_threshold: threshold,
        ..Default::default()
    })
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Coefficient file (JSON).
    pub coeffs: PathBuf,
    /// Sampling radius in meters.
    #[arg(long)]
    pub radius: f64,
    /// Grid exactness degree; defaults to the coefficient l_max.
    #[arg(long)]
    pub lmax: Option<u32>,
    /// Output field file (CSV).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn synth(args: &SynthArgs) -> Result<Verdict> {
    let file = CoeffFile::load(&args.coeffs)?;
    let c = &file.coeffs;
    let l_max = args.lmax.unwrap_or(c.l_max());
    if l_max < c.l_max() {
        bail!("grid exactness --lmax {l_max} is below the coefficient l_max {}", c.l_max());
    }
    if !(args.radius > 0.0 && args.radius.is_finite()) {
        bail!("--radius must be positive, got {}", args.radius);
    }
    let grid = SphereGrid::new(l_max, args.radius)?;
    let (e, h) = synthesize(c, args.radius, &grid)?;
    let out = FieldFile::new(file.frequency_hz, *c.medium(), e.grid().clone())
        .with_samples(&e)?
        .with_samples(&h)?;
    out.save(&args.out)?;
    Ok(Verdict::Ok)
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Field file (CSV).
    pub field: PathBuf,
    #[arg(long, value_enum)]
    pub route: RouteArg,
    /// Truncation degree; defaults to the grid exactness degree.
    #[arg(long)]
    pub lmax: Option<u32>,
    #[arg(long, default_value_t = 1e6)]
    pub condition_threshold: f64,
    /// Output coefficient file (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn extract_cmd(args: &ExtractArgs) -> Result<Verdict> {
    let field = FieldFile::load(&args.field)?;
    let route = Route::from(args.route);
    field.require(route)?;
    let l_max = args.lmax.unwrap_or(field.grid.l_max());
    let e = field.samples(FieldKind::Electric)?;
    let h = field.samples(FieldKind::Magnetic)?;
    let report = extract(route, &e, &h, &field.medium, l_max, &options(args.condition_threshold)?)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    CoeffFile::new(field.frequency_hz, report.coeffs)?.save(&args.out)?;
    Ok(Verdict::Ok)
}

#[derive(Debug, Args)]
pub struct EquivArgs {
    /// Field file (CSV) with all six components.
    pub field: PathBuf,
    #[arg(long)]
    pub lmax: Option<u32>,
    /// Largest acceptable pairwise deviation.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e6)]
    pub condition_threshold: f64,
}

pub fn equiv(args: &EquivArgs, out: &mut impl Write) -> Result<Verdict> {
    let field = FieldFile::load(&args.field)?;
    for route in Route::ALL {
        field.require(route)?;
    }
    let l_max = args.lmax.unwrap_or(field.grid.l_max());
    let e = field.samples(FieldKind::Electric)?;
    let h = field.samples(FieldKind::Magnetic)?;
    let rep = equivalence_report(&e, &h, &field.medium, l_max, &options(args.condition_threshold)?)?;
    for w in rep.warnings() {
        eprintln!("warning: {w}");
    }
    writeln!(out, "# l m family radial tan-e tan-h")?;
    let sets: Vec<_> = Route::ALL.iter().map(|r| &rep.report(*r).coeffs).collect();
    for mode in emmp_core::specfun::modes(l_max) {
        for (family, pick) in [("aE", true), ("aM", false)] {
            write!(out, "{} {} {family}", mode.l(), mode.m())?;
            for c in &sets {
                let v = if pick { c.a_e(mode) } else { c.a_m(mode) };
                write!(out, " ({},{})", num(v.re), num(v.im))?;
            }
            writeln!(out)?;
        }
    }
    for (a, b, d) in &rep.pairwise {
        writeln!(out, "deviation {a} vs {b}: {d:.3e}")?;
    }
    writeln!(out, "max deviation: {:.3e} (tol {:.1e})", rep.max_deviation, args.tol)?;
    Ok(if rep.max_deviation <= args.tol {
        Verdict::Ok
    } else {
        Verdict::ToleranceExceeded
    })
}

#[derive(Debug, Args)]
pub struct FarfieldArgs {
    /// Coefficient file (JSON).
    pub coeffs: PathBuf,
    /// θ steps: angles iπ/n_theta for i = 0..=n_theta.
    #[arg(long, default_value_t = 180)]
    pub n_theta: usize,
    /// φ steps: angles 2πj/n_phi for j = 0..n_phi.
    #[arg(long, default_value_t = 1)]
    pub n_phi: usize,
    /// Divide magnitudes by the pattern peak.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn farfield(args: &FarfieldArgs) -> Result<Verdict> {
    let file = CoeffFile::load(&args.coeffs)?;
    let dirs = pattern_directions(args.n_theta, args.n_phi)?;
    let pattern = far_field(&file.coeffs, &dirs);
    save_text(&args.out, &pattern_csv(&pattern, file.frequency_hz, args.normalize)?)?;
    Ok(Verdict::Ok)
}

#[derive(Debug, Args)]
pub struct DipoleArgs {
    /// Current amplitude in amperes.
    #[arg(long, default_value_t = 1.0)]
    pub current: f64,
    /// Frequency in hertz.
    #[arg(long, default_value_t = 1.0e9)]
    pub freq: f64,
    /// Grid exactness degree for the λ/4 sphere.
    #[arg(long, default_value_t = DIPOLE_L_MAX)]
    pub lmax: u32,
    /// Largest acceptable round-trip deviation.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Output prefix; files are `<prefix>_<name>.{csv,json}`.
    #[arg(long)]
    pub out: PathBuf,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn dipole(args: &DipoleArgs, out: &mut impl Write) -> Result<Verdict> {
    if !(args.current > 0.0 && args.current.is_finite()) {
        bail!("--current must be positive, got {}", args.current);
    }
    let spec = DipoleSpec::from_frequency(args.current, args.freq)?;
    let grid = std::sync::Arc::new(SphereGrid::new(args.lmax, spec.sphere_radius())?);
    let coeffs = halfwave_coeffs(&spec);
    let medium = *coeffs.medium();
    let write_file = |name: &str, text: String| -> Result<()> {
        let path = with_suffix(&args.out, name);
        save_text(&path, &text).with_context(|| format!("writing {}", path.display()))
    };

    CoeffFile::new(args.freq, coeffs.clone())?.save(&with_suffix(&args.out, "_coeffs.json"))?;

    let source = radial_source_on_sphere(&spec, &grid)?;
    let source_file = FieldFile::new(args.freq, medium, grid.clone()).with_component(Component::Er, &source, 0)?;
    write_file("_source.csv", source_file.to_csv()?)?;

    let cmp = validate_roundtrip_on(&spec, &grid)?;
    write_file("_farfield_direct.csv", pattern_csv(&cmp.direct, args.freq, true)?)?;
    write_file("_farfield_recovered.csv", pattern_csv(&cmp.recovered, args.freq, true)?)?;

    let dual = magnetic_dipole_variant(&spec)?;
    let (_, dual_h) = synthesize(&dual.dual_coeffs, spec.sphere_radius(), &grid)?;
    let dual_file = FieldFile::new(args.freq, medium, grid.clone()).with_component(Component::Hr, &dual_h, 0)?;
    write_file("_dual_source.csv", dual_file.to_csv()?)?;
    write_file("_dual_farfield.csv", pattern_csv(&dual.dual_pattern, args.freq, true)?)?;

    writeln!(
        out,
        "dipole: I={} A, f={:e} Hz, lambda={:.6e} m, r0=lambda/4; round-trip deviation: {:.3e}; \
         E_phi negligible: {}; peak at theta={:.1} deg; dual H_r deviation: {:.3e}",
        args.current,
        args.freq,
        spec.wavelength,
        cmp.rms_deviation,
        cmp.e_phi_negligible,
        cmp.peak_theta.to_degrees(),
        dual.radial_deviation,
    )?;
    Ok(if cmp.rms_deviation <= args.tol {
        Verdict::Ok
    } else {
        Verdict::ToleranceExceeded
    })
}
