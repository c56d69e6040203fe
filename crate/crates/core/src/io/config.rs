//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comment
//! [chirp]
//! f0_hz = 77e9
//! ```
//!
//! Sections: `chirp`, `array`, `scan` (required); `scene`, `recon`, `noise`
//! (optional). Lengths are given in millimetres and stored in metres
//! (`value · 1e-3`); `slope_hz_per_us` is multiplied by `1e6` and
//! `t_chirp_us` by `1e-6`. `scatterer` is the only repeatable key.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ApertureScan, ArrayLayout, ArrayMode, ChirpConfig, SPEED_OF_LIGHT};
use crate::rma::{ReconParams, Window};
use crate::sim::{PointScatterer, Scene};

/// The shipped example: reference chirp, 32×32 raster, one target at 540 mm.
pub const EXAMPLE_CONFIG: &str = include_str!("../../configs/example.conf");

const MM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// `+∞` disables noise.
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            snr_db: f64::INFINITY,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub chirp: ChirpConfig,
    pub layout: ArrayLayout,
    pub scan: ApertureScan,
    pub scene: Scene,
    pub recon: ReconParams,
    pub noise: NoiseConfig,
}

struct Entry {
    value: String,
    line: usize,
}

#[derive(Default)]
struct Section {
    line: usize,
    entries: HashMap<String, Entry>,
    scatterers: Vec<Entry>,
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "chirp",
        &[
            "f0_hz",
            "slope_hz_per_us",
            "t_chirp_us",
            "n_samples",
            "f_sample_hz",
            "c_m_per_s",
        ],
    ),
    ("array", &["mode", "tx_mm", "rx_mm"]),
    (
        "scan",
        &["nx", "ny", "dx_mm", "dy_mm", "origin_mm", "z_plane_mm"],
    ),
    ("scene", &["scatterer"]),
    (
        "recon",
        &["nz", "zero_pad", "window", "z0_mm", "z_extent_mm"],
    ),
    ("noise", &["snr_db", "seed"]),
];

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        msg: msg.into(),
    }
}

fn split(text: &str) -> Result<(HashMap<String, Section>, usize)> {
    let mut sections: HashMap<String, Section> = HashMap::new();
    let mut current: Option<String> = None;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|c| c.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(err(line, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.clone(),
                Section {
                    line,
                    ..Default::default()
                },
            );
            current = Some(name);
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(
                line,
                format!("expected `key = value`, got `{content}`"),
            ));
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        let Some(section_name) = current.as_deref() else {
            return Err(err(line, format!("key `{key}` outside any section")));
        };
        let allowed = KEYS.iter().find(|(s, _)| *s == section_name).unwrap().1;
        if !allowed.contains(&key.as_str()) {
            return Err(err(
                line,
                format!("unknown key `{key}` in [{section_name}]"),
            ));
        }
        let section = sections.get_mut(section_name).unwrap();
        let entry = Entry { value, line };
        if key == "scatterer" {
            section.scatterers.push(entry);
        } else if let Some(prev) = section.entries.get(&key) {
            return Err(err(
                line,
                format!("duplicate key `{key}` (first set on line {})", prev.line),
            ));
        } else {
            section.entries.insert(key, entry);
        }
    }
    Ok((sections, last_line))
}

fn numbers(entry: &Entry, count: Option<usize>) -> Result<Vec<f64>> {
    let values = entry
        .value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| err(entry.line, format!("`{}` is not a number", v.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    if let Some(n) = count {
        if values.len() != n {
            return Err(err(
                entry.line,
                format!("expected {n} comma-separated values, got {}", values.len()),
            ));
        }
    }
    Ok(values)
}

struct Reader<'a> {
    name: &'static str,
    section: Option<&'a Section>,
    eof: usize,
}

impl<'a> Reader<'a> {
    fn line(&self) -> usize {
        self.section.map_or(self.eof, |s| s.line)
    }

    fn get(&self, key: &str) -> Option<&'a Entry> {
        self.section.and_then(|s| s.entries.get(key))
    }

    fn require(&self, key: &str) -> Result<&'a Entry> {
        self.get(key).ok_or_else(|| {
            err(
                self.line(),
                format!("missing required key `{key}` in [{}]", self.name),
            )
        })
    }

    fn float(&self, key: &str) -> Result<f64> {
        Ok(numbers(self.require(key)?, Some(1))?[0])
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let e = self.require(key)?;
        let v = numbers(e, Some(1))?[0];
        if !(v.is_finite() && v > 0.0) {
            return Err(err(
                e.line,
                format!("`{key}` must be positive and finite, got {v}"),
            ));
        }
        Ok(v)
    }

    fn count(&self, entry: &Entry, key: &str) -> Result<usize> {
        entry.value.parse::<usize>().map_err(|_| {
            err(
                entry.line,
                format!("`{key}` must be a non-negative integer"),
            )
        })
    }

    fn required_count(&self, key: &str) -> Result<usize> {
        let e = self.require(key)?;
        self.count(e, key)
    }
}

fn offsets(entry: &Entry) -> Result<Vec<[f64; 2]>> {
    entry
        .value
        .split(';')
        .map(|pair| {
            let sub = Entry {
                value: pair.to_string(),
                line: entry.line,
            };
            let v = numbers(&sub, Some(2))?;
            Ok([v[0] * MM, v[1] * MM])
        })
        .collect()
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &[u8]) -> Result<RunConfig> {
    let text = std::str::from_utf8(text).map_err(|e| err(0, format!("not UTF-8: {e}")))?;
    let (sections, eof) = split(text)?;
    let reader = |name: &'static str| Reader {
        name,
        section: sections.get(name),
        eof,
    };

    let r = reader("chirp");
    if r.section.is_none() {
        return Err(err(eof, "missing required section [chirp]"));
    }
    let mut chirp = ChirpConfig {
        f0: r.positive("f0_hz")?,
        slope_k: r.positive("slope_hz_per_us")? * 1e6,
        t_chirp: r.positive("t_chirp_us")? * 1e-6,
        n_samples: r.required_count("n_samples")?,
        f_sample: r.positive("f_sample_hz")?,
        c: SPEED_OF_LIGHT,
    };
    if r.get("c_m_per_s").is_some() {
        chirp.c = r.positive("c_m_per_s")?;
    }
    chirp.validate().map_err(|e| err(r.line(), e.to_string()))?;

    let r = reader("array");
    if r.section.is_none() {
        return Err(err(eof, "missing required section [array]"));
    }
    let mode_entry = r.require("mode")?;
    let mode = match mode_entry.value.as_str() {
        "monostatic" => ArrayMode::Monostatic,
        "bistatic" => ArrayMode::Bistatic,
        other => {
            return Err(err(
                mode_entry.line,
                format!("mode must be `monostatic` or `bistatic`, got `{other}`"),
            ))
        }
    };
    let layout = ArrayLayout::new(
        offsets(r.require("tx_mm")?)?,
        offsets(r.require("rx_mm")?)?,
        mode,
    )
    .map_err(|e| err(r.line(), e.to_string()))?;

    let r = reader("scan");
    if r.section.is_none() {
        return Err(err(eof, "missing required section [scan]"));
    }
    let z_plane = r.float("z_plane_mm")? * MM;
    let origin_entry = r.require("origin_mm")?;
    let origin = numbers(origin_entry, None)?;
    let origin = match origin.len() {
        2 => [origin[0] * MM, origin[1] * MM, z_plane],
        3 if origin[2] * MM == z_plane => [origin[0] * MM, origin[1] * MM, z_plane],
        3 => return Err(err(origin_entry.line, "origin z must equal z_plane_mm")),
        n => {
            return Err(err(
                origin_entry.line,
                format!("origin needs 2 or 3 values, got {n}"),
            ))
        }
    };
    let scan = ApertureScan::new(
        r.required_count("nx")?,
        r.required_count("ny")?,
        r.positive("dx_mm")? * MM,
        r.positive("dy_mm")? * MM,
        origin,
    )
    .map_err(|e| err(r.line(), e.to_string()))?;

    let mut scene = Scene::default();
    if let Some(section) = sections.get("scene") {
        for entry in &section.scatterers {
            let v = numbers(entry, Some(5))?;
            let position = [v[0] * MM, v[1] * MM, v[2] * MM];
            if !(position[2] > z_plane) {
                return Err(err(
                    entry.line,
                    "scatterer must lie in front of the aperture plane",
                ));
            }
            scene
                .scatterers
                .push(PointScatterer::new(position, Complex64::new(v[3], v[4])));
        }
    }

    let r = reader("recon");
    let mut recon = ReconParams::default();
    if let Some(e) = r.get("nz") {
        recon.nz = r.count(e, "nz")?;
        if recon.nz < 2 {
            return Err(err(e.line, "nz must be at least 2"));
        }
    }
    if let Some(e) = r.get("zero_pad") {
        let v: Vec<usize> = e
            .value
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(e.line, "zero_pad must be one or two positive integers"))?;
        recon.zero_pad = match v.as_slice() {
            [p] if *p >= 1 => [*p, *p],
            [px, py] if *px >= 1 && *py >= 1 => [*px, *py],
            _ => return Err(err(e.line, "zero_pad must be one or two positive integers")),
        };
    }
    if let Some(e) = r.get("window") {
        recon.window = Window::parse(&e.value)
            .ok_or_else(|| err(e.line, format!("unknown window `{}`", e.value)))?;
    }
    if r.get("z0_mm").is_some() {
        recon.z0 = Some(r.float("z0_mm")? * MM);
    }
    if r.get("z_extent_mm").is_some() {
        recon.z_extent = Some(r.positive("z_extent_mm")? * MM);
    }

    let r = reader("noise");
    let mut noise = NoiseConfig::default();
    if let Some(e) = r.get("snr_db") {
        let v = numbers(e, Some(1))?[0];
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(err(e.line, "snr_db must be a number or inf"));
        }
        noise.snr_db = v;
    }
    if let Some(e) = r.get("seed") {
        noise.seed = e
            .value
            .parse::<u64>()
            .map_err(|_| err(e.line, "seed must be a non-negative integer"))?;
    }

    Ok(RunConfig {
        chirp,
        layout,
        scan,
        scene,
        recon,
        noise,
    })
}
