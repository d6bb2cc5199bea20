//! On-disk formats.
//!
//! * Coefficient files are JSON with a fixed key order and every number
//!   written with 17 significant digits, so load followed by save
//!   reproduces the input byte for byte.
//! * Field files are CSV with a `# key=value` preamble describing the
//!   sampling grid, one row per node in θ-major order. A component that was
//!   not sampled is written as empty cells.
//! * Pattern files are CSV of far-field magnitudes and phases.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use emmp_core::extraction::Route;
use emmp_core::multipole::FarFieldPattern;
use emmp_core::specfun::{mode_count, modes, ModeIndex};
use emmp_core::{CoefficientSet, Complex64, FieldKind, FieldSamples, Medium, SphVector, SphereGrid};
use serde::Deserialize;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed coefficient file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("route {route} requires {required}; missing: {missing}")]
    MissingComponents {
        route: Route,
        required: String,
        missing: String,
    },
    #[error(transparent)]
    Core(#[from] emmp_core::Error),
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Medium from the values stored on disk; `μ0` follows from `k Z0 = ω μ0`.
pub fn medium_from(frequency_hz: f64, k: f64, z0: f64) -> Result<Medium> {
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(invalid(format!("frequency_hz must be positive, got {frequency_hz}")));
    }
    Ok(Medium::new(k, z0, k * z0 / (2.0 * PI * frequency_hz))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffFile {
    pub frequency_hz: f64,
    pub coeffs: CoefficientSet,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoeffFile {
    schema_version: String,
    l_max: u32,
    frequency_hz: f64,
    medium: RawMedium,
    modes: Vec<RawMode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMedium {
    k: f64,
    #[serde(rename = "Z0")]
    z0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    l: u32,
    m: i32,
    #[serde(rename = "aE")]
    a_e: [f64; 2],
    #[serde(rename = "aM")]
    a_m: [f64; 2],
}

impl CoeffFile {
    pub fn new(frequency_hz: f64, coeffs: CoefficientSet) -> Result<Self> {
        if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
            return Err(invalid(format!("frequency_hz must be positive, got {frequency_hz}")));
        }
        Ok(Self { frequency_hz, coeffs })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawCoeffFile = serde_json::from_str(text)?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported schema_version {:?} (expected {SCHEMA_VERSION:?})",
                raw.schema_version
            )));
        }
        if raw.l_max < 1 {
            return Err(invalid("l_max must be >= 1"));
        }
        let medium = medium_from(raw.frequency_hz, raw.medium.k, raw.medium.z0)?;
        let n = mode_count(raw.l_max);
        let mut seen = vec![false; n];
        let mut c = CoefficientSet::zeros(raw.l_max, medium)?;
        for mode in &raw.modes {
            let index = ModeIndex::new(mode.l, mode.m)?;
            if mode.l > raw.l_max {
                return Err(invalid(format!("mode {index} exceeds l_max = {}", raw.l_max)));
            }
            if std::mem::replace(&mut seen[index.dense_index()], true) {
                return Err(invalid(format!("mode {index} appears more than once")));
            }
            c.set_a_e(index, Complex64::new(mode.a_e[0], mode.a_e[1]))?;
            c.set_a_m(index, Complex64::new(mode.a_m[0], mode.a_m[1]))?;
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("mode {} is missing", ModeIndex::from_dense_index(j))));
        }
        Self::new(raw.frequency_hz, c)
    }

    /// Canonical JSON: modes in ascending `l`, then ascending `m`.
    pub fn to_json(&self) -> String {
        let c = &self.coeffs;
        let m = c.medium();
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"schema_version\": \"{SCHEMA_VERSION}\",");
        let _ = writeln!(s, "  \"l_max\": {},", c.l_max());
        let _ = writeln!(s, "  \"frequency_hz\": {},", num(self.frequency_hz));
        let _ = writeln!(s, "  \"medium\": {{\"k\": {}, \"Z0\": {}}},", num(m.k), num(m.z0));
        s.push_str("  \"modes\": [\n");
        let n = mode_count(c.l_max());
        for (i, mode) in modes(c.l_max()).enumerate() {
            let (ae, am) = (c.a_e(mode), c.a_m(mode));
            let _ = write!(
                s,
                "    {{\"l\": {}, \"m\": {}, \"aE\": [{}, {}], \"aM\": [{}, {}]}}",
                mode.l(),
                mode.m(),
                num(ae.re),
                num(ae.im),
                num(am.re),
                num(am.im)
            );
            s.push_str(if i + 1 < n { ",\n" } else { "\n" });
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, &self.to_json())
    }
}

/// One of the six sampled field components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Er,
    Etheta,
    Ephi,
    Hr,
    Htheta,
    Hphi,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::Er,
        Component::Etheta,
        Component::Ephi,
        Component::Hr,
        Component::Htheta,
        Component::Hphi,
    ];

    /// Column stem in the CSV header (`Er_re`, `Er_im`, ...).
    pub fn column(self) -> &'static str {
        match self {
            Component::Er => "Er",
            Component::Etheta => "Etheta",
            Component::Ephi => "Ephi",
            Component::Hr => "Hr",
            Component::Htheta => "Htheta",
            Component::Hphi => "Hphi",
        }
    }

    /// Name used in diagnostics.
    pub fn label(self) -> &'static str {
        match self {
            Component::Er => "E_r",
            Component::Etheta => "E_theta",
            Component::Ephi => "E_phi",
            Component::Hr => "H_r",
            Component::Htheta => "H_theta",
            Component::Hphi => "H_phi",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn of(kind: FieldKind) -> [Component; 3] {
        match kind {
            FieldKind::Electric => [Component::Er, Component::Etheta, Component::Ephi],
            FieldKind::Magnetic => [Component::Hr, Component::Htheta, Component::Hphi],
        }
    }

    pub fn required_by(route: Route) -> &'static [Component] {
        match route {
            Route::Radial => &[Component::Er, Component::Hr],
            Route::TangentialE => &[Component::Etheta, Component::Ephi],
            Route::TangentialH => &[Component::Htheta, Component::Hphi],
        }
    }
}

/// Field samples on a quadrature grid, any subset of the six components.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub frequency_hz: f64,
    pub medium: Medium,
    pub grid: Arc<SphereGrid>,
    columns: [Option<Vec<Complex64>>; 6],
}

impl FieldFile {
    pub fn new(frequency_hz: f64, medium: Medium, grid: Arc<SphereGrid>) -> Self {
        Self {
            frequency_hz,
            medium,
            grid,
            columns: Default::default(),
        }
    }

    /// Stores all three components of `samples`.
    pub fn with_samples(mut self, samples: &FieldSamples) -> Result<Self> {
        for (axis, comp) in Component::of(samples.kind()).into_iter().enumerate() {
            self = self.with_component(comp, samples, axis)?;
        }
        Ok(self)
    }

    /// Stores one component (`axis` 0, 1, 2 for r, θ, φ) of `samples`.
    pub fn with_component(mut self, comp: Component, samples: &FieldSamples, axis: usize) -> Result<Self> {
        if **samples.grid() != *self.grid {
            return Err(invalid("samples are not on the file's grid"));
        }
        let values = samples
            .values()
            .iter()
            .map(|v| match axis {
                0 => v.r,
                1 => v.theta,
                _ => v.phi,
            })
            .collect();
        self.columns[comp.index()] = Some(values);
        Ok(self)
    }

    pub fn has(&self, comp: Component) -> bool {
        self.columns[comp.index()].is_some()
    }

    pub fn component(&self, comp: Component) -> Option<&[Complex64]> {
        self.columns[comp.index()].as_deref()
    }

    /// Fails with a message naming the missing components when the file
    /// cannot feed `route`.
    pub fn require(&self, route: Route) -> Result<()> {
        let required = Component::required_by(route);
        let missing: Vec<&str> = required.iter().filter(|c| !self.has(**c)).map(|c| c.label()).collect();
        if missing.is_empty() {
            return Ok(());
        }
        Err(FormatError::MissingComponents {
            route,
            required: required.iter().map(|c| c.label()).collect::<Vec<_>>().join(", "),
            missing: missing.join(", "),
        })
    }

    /// Samples of one field; absent components read as zero.
    pub fn samples(&self, kind: FieldKind) -> Result<FieldSamples> {
        let [r, t, p] = Component::of(kind).map(|c| self.component(c));
        let get = |col: Option<&[Complex64]>, k: usize| col.map_or(Complex64::new(0.0, 0.0), |v| v[k]);
        let values = (0..self.grid.len())
            .map(|k| SphVector::new(get(r, k), get(t, k), get(p, k)))
            .collect();
        Ok(FieldSamples::new(self.grid.clone(), kind, values)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        let g = &self.grid;
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version={SCHEMA_VERSION}");
        out.push_str("# kind=field\n");
        let _ = writeln!(out, "# radius_m={}", num(g.radius()));
        let _ = writeln!(out, "# frequency_hz={}", num(self.frequency_hz));
        let _ = writeln!(out, "# wavenumber_per_m={}", num(self.medium.k));
        let _ = writeln!(out, "# impedance_ohm={}", num(self.medium.z0));
        let _ = writeln!(out, "# grid_lmax={}", g.l_max());
        let _ = writeln!(out, "# n_theta={}", g.n_theta());
        let _ = writeln!(out, "# n_phi={}", g.n_phi());

        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec!["theta_rad".to_string(), "phi_rad".into(), "weight_sr".into()];
        for c in Component::ALL {
            header.push(format!("{}_re", c.column()));
            header.push(format!("{}_im", c.column()));
        }
        w.write_record(&header)?;
        for (k, node) in g.nodes().enumerate() {
            let mut row = vec![num(node.theta), num(node.phi), num(node.weight)];
            for c in Component::ALL {
                match self.component(c) {
                    Some(v) => {
                        row.push(num(v[k].re));
                        row.push(num(v[k].im));
                    }
                    None => {
                        row.push(String::new());
                        row.push(String::new());
                    }
                }
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))?);
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let pre = Preamble::parse(text)?;
        if pre.get("kind")? != "field" {
            return Err(invalid("not a field file (kind != field)"));
        }
        let frequency_hz = pre.number("frequency_hz")?;
        let medium = medium_from(frequency_hz, pre.number("wavenumber_per_m")?, pre.number("impedance_ohm")?)?;
        let grid = Arc::new(SphereGrid::with_counts(
            pre.count("grid_lmax")? as u32,
            pre.count("n_theta")?,
            pre.count("n_phi")?,
            pre.number("radius_m")?,
        )?);

        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        let col = |name: &str| header.iter().position(|h| h == name);
        let (ct, cp, cw) = match (col("theta_rad"), col("phi_rad"), col("weight_sr")) {
            (Some(t), Some(p), Some(w)) => (t, p, w),
            _ => return Err(invalid("header must contain theta_rad, phi_rad, weight_sr")),
        };
        let comp_cols: Vec<Option<(usize, usize)>> = Component::ALL
            .iter()
            .map(|c| {
                match (col(&format!("{}_re", c.column())), col(&format!("{}_im", c.column()))) {
                    (Some(re), Some(im)) => Ok(Some((re, im))),
                    (None, None) => Ok(None),
                    _ => Err(invalid(format!("{} needs both _re and _im columns", c.label()))),
                }
            })
            .collect::<Result<_>>()?;

        let mut cells: Vec<Vec<Option<Complex64>>> = vec![Vec::new(); 6];
        let mut rows = 0;
        for (k, record) in rdr.records().enumerate() {
            let record = record?;
            if k >= grid.len() {
                return Err(invalid(format!("more rows than the {} grid nodes", grid.len())));
            }
            let node = grid.node(k);
            let field = |i: usize| -> Result<f64> {
                let s = record.get(i).unwrap_or("");
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("row {}: cannot parse {:?} in column {}", k + 1, s, &header[i])))
            };
            let (t, p, w) = (field(ct)?, field(cp)?, field(cw)?);
            if (t - node.theta).abs() > 1e-12 || (p - node.phi).abs() > 1e-12 || (w - node.weight).abs() > 1e-12 {
                return Err(invalid(format!(
                    "row {}: node ({t}, {p}, {w}) does not match the declared grid",
                    k + 1
                )));
            }
            for (ci, cols) in comp_cols.iter().enumerate() {
                let Some((re, im)) = *cols else { continue };
                let (sre, sim) = (record.get(re).unwrap_or("").trim(), record.get(im).unwrap_or("").trim());
                let value = if sre.is_empty() && sim.is_empty() {
                    None
                } else {
                    Some(Complex64::new(field(re)?, field(im)?))
                };
                cells[ci].push(value);
            }
            rows += 1;
        }
        if rows != grid.len() {
            return Err(invalid(format!(
                "expected {} rows (n_theta x n_phi), found {rows}",
                grid.len()
            )));
        }
        let mut file = FieldFile::new(frequency_hz, medium, grid);
        for (ci, comp) in Component::ALL.into_iter().enumerate() {
            let col = std::mem::take(&mut cells[ci]);
            if col.iter().all(Option::is_none) {
                continue;
            }
            let values: Option<Vec<Complex64>> = col.into_iter().collect();
            let values = values.ok_or_else(|| invalid(format!("{} is only partially present", comp.label())))?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("{} contains non-finite values", comp.label())));
            }
            file.columns[comp.index()] = Some(values);
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, &self.to_csv()?)
    }
}

struct Preamble(Vec<(String, String)>);

impl Preamble {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            if let Some((k, v)) = body.split_once('=') {
                entries.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        Ok(Self(entries))
    }

    fn get(&self, key: &str) -> Result<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| invalid(format!("preamble is missing {key}")))
    }

    fn number(&self, key: &str) -> Result<f64> {
        let v = self.get(key)?;
        v.parse().map_err(|_| invalid(format!("preamble {key}={v} is not a number")))
    }

    fn count(&self, key: &str) -> Result<usize> {
        let v = self.get(key)?;
        v.parse().map_err(|_| invalid(format!("preamble {key}={v} is not a count")))
    }
}

/// One row of a pattern file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternRow {
    pub theta: f64,
    pub phi: f64,
    pub e_theta_abs: f64,
    pub e_phi_abs: f64,
    pub e_theta_phase: f64,
    pub e_phi_phase: f64,
}

const PATTERN_HEADER: [&str; 6] = [
    "theta_rad",
    "phi_rad",
    "Etheta_abs",
    "Ephi_abs",
    "Etheta_phase_rad",
    "Ephi_phase_rad",
];

/// Pattern CSV. With `normalize`, magnitudes are divided by the largest
/// total `|E|` in the pattern.
pub fn pattern_csv(pattern: &FarFieldPattern, frequency_hz: f64, normalize: bool) -> Result<String> {
    let peak = pattern.magnitude().into_iter().fold(0.0, f64::max);
    let scale = if normalize && peak > 0.0 { 1.0 / peak } else { 1.0 };
    let mut out = String::new();
    let _ = writeln!(out, "# schema_version={SCHEMA_VERSION}");
    out.push_str("# kind=pattern\n");
    let _ = writeln!(out, "# frequency_hz={}", num(frequency_hz));
    let _ = writeln!(out, "# normalized={normalize}");
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(PATTERN_HEADER)?;
    for (i, &(theta, phi)) in pattern.directions.iter().enumerate() {
        let (et, ep) = (pattern.e_theta[i], pattern.e_phi[i]);
        w.write_record([
            num(theta),
            num(phi),
            num(et.norm() * scale),
            num(ep.norm() * scale),
            num(et.arg()),
            num(ep.arg()),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))?);
    Ok(out)
}

pub fn parse_pattern(text: &str) -> Result<Vec<PatternRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    if rdr.headers()?.iter().ne(PATTERN_HEADER) {
        return Err(invalid("unexpected pattern header"));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(|s| s.parse().map_err(|_| invalid(format!("cannot parse {s:?}"))))
                .collect::<Result<_>>()?;
            Ok(PatternRow {
                theta: v[0],
                phi: v[1],
                e_theta_abs: v[2],
                e_phi_abs: v[3],
                e_theta_phase: v[4],
                e_phi_phase: v[5],
            })
        })
        .collect()
}

/// `θ_i = iπ/n_theta` for `i = 0..=n_theta` and `φ_j = 2πj/n_phi`, θ-major.
/// Doubling `n_theta` reproduces every previous angle bit for bit.
pub fn pattern_directions(n_theta: usize, n_phi: usize) -> Result<Vec<(f64, f64)>> {
    if n_theta < 1 || n_phi < 1 {
        return Err(invalid("n_theta and n_phi must be >= 1"));
    }
    Ok((0..=n_theta)
        .flat_map(|i| {
            (0..n_phi).map(move |j| (i as f64 * PI / n_theta as f64, j as f64 * 2.0 * PI / n_phi as f64))
        })
        .collect())
}

pub fn save_text(path: &Path, text: &str) -> Result<()> {
    write(path, text)
}
