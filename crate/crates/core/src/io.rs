//! JSON documents read and written by the command-line tool.
//!
//! Errors name the offending field, e.g. `radial.kind: unknown kind 'foo'`.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cover::{Rectangle, StratifiedCover};
use crate::error::{Error, Result};
use crate::kernel::{
    AngularKernel, BoundedFactor, CatalogueKernel, KernelSpec, RadialFactor, RadialProfile, Resolution,
};
use crate::maximal::GridFunction;
use crate::operators::{LipschitzField, TestFunction};
use crate::weights::Weight;

/// A real number or a [re, im] pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueDoc {
    Real(f64),
    Complex([f64; 2]),
}

impl ValueDoc {
    pub fn complex(self) -> Complex64 {
        match self {
            ValueDoc::Real(v) => Complex64::new(v, 0.0),
            ValueDoc::Complex([a, b]) => Complex64::new(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDoc {
    pub angle_from: f64,
    pub angle_to: f64,
    pub value: ValueDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialDoc {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub h0: Option<f64>,
}

impl RadialDoc {
    pub fn new(kind: &str, params: &[(&str, f64)]) -> Self {
        RadialDoc {
            kind: kind.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            sigma: None,
            epsilon: None,
            h0: None,
        }
    }

    pub fn factor(&self) -> Result<RadialFactor> {
        let r = self;
        let p = &r.params;
        let profile = match r.kind.as_str() {
            "constant" => RadialProfile::Constant(param(p, "radial.params", "value")?),
            "power" => RadialProfile::Power(param(p, "radial.params", "p")?),
            "one_plus_power" => RadialProfile::OnePlusPower {
                coef: param(p, "radial.params", "coef")?,
                exponent: param(p, "radial.params", "exponent")?,
            },
            "log_oscillation" => RadialProfile::LogOscillation { offset: param(p, "radial.params", "offset")? },
            "abs_log_power" => RadialProfile::AbsLogPower(param(p, "radial.params", "p")?),
            "saturating_root" => RadialProfile::SaturatingRoot,
            other => {
                return cfg("radial.kind", format!("unknown kind '{other}' (expected one of {})", RADIAL_KINDS.join(", ")))
            }
        };
        let mut h = RadialFactor::new(profile);
        if let Some(s) = r.sigma {
            if !(s >= 1.0 && s.is_finite()) {
                return cfg("radial.sigma", format!("must be ≥ 1, got {s}"));
            }
            h.sigma = s;
        }
        if let Some(e) = r.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return cfg("radial.epsilon", format!("must be ≥ 0, got {e}"));
            }
            h.epsilon = e;
        }
        if let Some(v) = r.h0 {
            h.h0 = Some(Complex64::new(v, 0.0));
        }
        Ok(h)
    }

}

/// Kernel document: explicit arcs or a catalogue id, plus the radial factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<CellDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub callable_id: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialDoc>,
    /// Non-convolution factor id: "unit" or "cos_dot".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonconv: Option<String>,
}

fn cfg<T>(field: &str, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Config(format!("{field}: {msg}")))
}

fn param(params: &BTreeMap<String, f64>, prefix: &str, name: &str) -> Result<f64> {
    match params.get(name) {
        Some(v) if v.is_finite() => Ok(*v),
        Some(v) => cfg(&format!("{prefix}.{name}"), format!("must be finite, got {v}")),
        None => cfg(&format!("{prefix}.{name}"), "missing parameter"),
    }
}

fn count_param(params: &BTreeMap<String, f64>, prefix: &str, name: &str) -> Result<u32> {
    let v = param(params, prefix, name)?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return cfg(&format!("{prefix}.{name}"), format!("must be a non-negative integer, got {v}"));
    }
    Ok(v as u32)
}

pub const CALLABLE_IDS: &[&str] = &["constant", "cos", "sin_power", "sign_split", "split_arcs", "lacunary_arcs"];
pub const RADIAL_KINDS: &[&str] =
    &["constant", "power", "one_plus_power", "log_oscillation", "abs_log_power", "saturating_root"];

impl KernelDoc {
    pub fn catalogue(&self) -> Result<Option<CatalogueKernel>> {
        let Some(id) = &self.callable_id else { return Ok(None) };
        let p = &self.params;
        let k = match id.as_str() {
            "constant" => CatalogueKernel::Constant { value: param(p, "params", "value")? },
            "cos" => CatalogueKernel::Cos { frequency: count_param(p, "params", "frequency")? },
            "sin_power" => CatalogueKernel::SinPower { alpha: param(p, "params", "alpha")? },
            "sign_split" => CatalogueKernel::SignSplit { alpha: param(p, "params", "alpha")? },
            "split_arcs" => CatalogueKernel::SplitArcs,
            "lacunary_arcs" => CatalogueKernel::LacunaryArcs { levels: count_param(p, "params", "levels")? },
            other => {
                return cfg("callable_id", format!("unknown kernel '{other}' (expected one of {})", CALLABLE_IDS.join(", ")))
            }
        };
        Ok(Some(k))
    }

    pub fn angular(&self) -> Result<AngularKernel> {
        if !(2..=3).contains(&self.dimension) {
            return cfg("dimension", format!("must be 2 or 3, got {}", self.dimension));
        }
        let mut res = Resolution::default();
        if let Some(r) = self.resolution {
            if r < 4 {
                return cfg("resolution", format!("must be at least 4, got {r}"));
            }
            res.circle = r;
        }
        match (&self.cells, self.catalogue()?) {
            (Some(_), Some(_)) => cfg("cells", "give either cells or callable_id, not both"),
            (None, None) => cfg("cells", "missing: give cells or callable_id"),
            (None, Some(k)) => k.build(self.dimension, res).map_err(|e| Error::Config(format!("callable_id: {e}"))),
            (Some(cells), None) => {
                if self.dimension != 2 {
                    return cfg("cells", "explicit arcs are supported for dimension 2");
                }
                let arcs: Vec<(f64, f64, Complex64)> =
                    cells.iter().map(|c| (c.angle_from, c.angle_to, c.value.complex())).collect();
                AngularKernel::from_arcs("cells", &arcs).map_err(|e| Error::Config(format!("cells: {e}")))
            }
        }
    }

    pub fn radial_factor(&self) -> Result<RadialFactor> {
        self.radial.as_ref().map_or(Ok(RadialFactor::unit()), RadialDoc::factor)
    }

    pub fn spec(&self) -> Result<KernelSpec> {
        let mut spec = KernelSpec::new(self.angular()?, self.radial_factor()?);
        spec.nonconv = match self.nonconv.as_deref() {
            None => None,
            Some("unit") => Some(BoundedFactor::unit()),
            Some("cos_dot") => Some(BoundedFactor::cos_dot()),
            Some(other) => return cfg("nonconv", format!("unknown factor '{other}' (expected unit or cos_dot)")),
        };
        Ok(spec)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Parse with the file name in the error.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("{what}: {e}")))
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    parse(&read(path)?, &path.display().to_string())
}

pub fn load_kernel(path: &Path) -> Result<KernelSpec> {
    let doc: KernelDoc = load(path)?;
    doc.spec().map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Weight documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightDoc {
    Constant { value: f64 },
    Power { alpha: f64 },
    Exponential { v: [f64; 2] },
}

impl WeightDoc {
    pub fn weight(&self) -> Result<Weight> {
        match *self {
            WeightDoc::Constant { value } => Weight::constant(value).map_err(|e| Error::Config(format!("value: {e}"))),
            WeightDoc::Power { alpha } if alpha.is_finite() => Ok(Weight::power(alpha)),
            WeightDoc::Power { alpha } => cfg("alpha", format!("must be finite, got {alpha}")),
            WeightDoc::Exponential { v } if v[0].is_finite() && v[1].is_finite() => Ok(Weight::exponential(v)),
            WeightDoc::Exponential { .. } => cfg("v", "must be finite"),
        }
    }
}

pub fn load_weight(path: &Path) -> Result<Weight> {
    load::<WeightDoc>(path)?.weight()
}

pub fn load_test_function(path: &Path) -> Result<TestFunction> {
    let f: TestFunction = load(path)?;
    f.validate().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(f)
}

pub fn load_field(path: &Path) -> Result<LipschitzField> {
    load(path)
}

/// Points as [[x, y], ...].
pub fn load_points(path: &Path) -> Result<Vec<[f64; 2]>> {
    let pts: Vec<[f64; 2]> = load(path)?;
    if let Some(i) = pts.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return cfg(&format!("points[{i}]"), "coordinates must be finite");
    }
    Ok(pts)
}

/// A test function sampled on a centered square grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledDoc {
    pub side: f64,
    pub nodes: usize,
    pub function: TestFunction,
}

/// Grid function from either a stored grid or a sampled test function.
pub fn load_grid_function(path: &Path) -> Result<GridFunction> {
    let text = read(path)?;
    if let Ok(doc) = serde_json::from_str::<SampledDoc>(&text) {
        doc.function.validate()?;
        let g = GridFunction::centered(doc.side, doc.nodes).map_err(|e| Error::Config(format!("side/nodes: {e}")))?;
        return Ok(g.with_fn(|x| Complex64::new(doc.function.real_value(x), 0.0)));
    }
    let g: GridFunction = parse(&text, &path.display().to_string())?;
    if g.shape[0] < 2 || g.shape[1] < 2 || g.values.len() != g.shape[0] * g.shape[1] {
        return cfg("values", format!("expected {} values for shape {:?}", g.shape[0] * g.shape[1], g.shape));
    }
    Ok(g)
}

/// One rectangle of a written cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectDoc {
    pub m: usize,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<f64>>>,
    pub half_extents: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverDoc {
    pub dimension: usize,
    pub gamma: f64,
    pub rectangles: Vec<RectDoc>,
}

pub fn cover_doc(cover: &StratifiedCover) -> CoverDoc {
    let rectangles = cover
        .rects
        .iter()
        .map(|r| {
            let planar = r.rect.dim() == 2;
            RectDoc {
                m: r.m,
                k: r.k,
                angle: planar.then(|| r.rect.angle()),
                frame: (!planar).then(|| r.rect.axes.clone()),
                half_extents: r.rect.half_extents.clone(),
            }
        })
        .collect();
    CoverDoc { dimension: cover.dim, gamma: cover.gamma(), rectangles }
}

impl CoverDoc {
    /// Rebuild the cover; rectangle i is named "rectangles[i]" in errors.
    pub fn cover(&self) -> Result<StratifiedCover> {
        if !(self.dimension == 2 || self.dimension == 3) {
            return cfg("dimension", "must be 2 or 3");
        }
        let mut rects = Vec::with_capacity(self.rectangles.len());
        for (i, r) in self.rectangles.iter().enumerate() {
            let field = format!("rectangles[{i}]");
            if r.half_extents.len() != self.dimension || r.half_extents.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
                return cfg(&field, "half_extents must be positive, one per dimension");
            }
            let rect = match (r.angle, &r.frame) {
                (Some(a), None) if self.dimension == 2 => Rectangle::planar(a, r.half_extents[0], r.half_extents[1]),
                (None, Some(axes)) if axes.len() == self.dimension && axes.iter().all(|a| a.len() == self.dimension) => {
                    Rectangle { axes: axes.clone(), half_extents: r.half_extents.clone() }
                }
                _ => return cfg(&field, "give angle (n = 2) or a square frame"),
            };
            rects.push((r.m, rect));
        }
        Ok(StratifiedCover::from_rectangles(self.dimension, rects))
    }
}

pub fn load_cover(path: &Path) -> Result<StratifiedCover> {
    load::<CoverDoc>(path)?.cover()
}

/// Write pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalogue_and_arcs() {
        let doc: KernelDoc = parse(
            r#"{"dimension": 2, "callable_id": "sin_power", "params": {"alpha": 0.5},
                "radial": {"kind": "saturating_root", "sigma": 1}}"#,
            "k",
        )
        .unwrap();
        let spec = doc.spec().unwrap();
        assert_eq!(spec.omega.values().len(), 4096);
        assert_eq!(spec.radial.h0, Some(Complex64::new(1.0, 0.0)));
        let doc: KernelDoc = parse(
            r#"{"dimension": 2, "cells": [{"angle_from": 0, "angle_to": 1.5707963267948966, "value": 2},
                {"angle_from": 1.5707963267948966, "angle_to": 6.283185307179586, "value": [-0.6666666666666666, 0]}]}"#,
            "k",
        )
        .unwrap();
        assert!(doc.spec().unwrap().omega.cancellation().unwrap().norm() < 1e-12);
    }

    #[test]
    fn errors_name_the_field() {
        let doc: KernelDoc =
            parse(r#"{"dimension": 2, "callable_id": "cos", "radial": {"kind": "bogus"}}"#, "k").unwrap();
        let e = doc.spec().unwrap_err().to_string();
        assert!(e.contains("params.frequency"), "{e}");
        let doc: KernelDoc =
            parse(r#"{"dimension": 2, "callable_id": "split_arcs", "radial": {"kind": "bogus"}}"#, "k").unwrap();
        assert!(doc.spec().unwrap_err().to_string().contains("radial.kind"));
        let e = parse::<KernelDoc>(r#"{"callable_id": "split_arcs"}"#, "k").unwrap_err().to_string();
        assert!(e.contains("dimension"), "{e}");
        let e = parse::<KernelDoc>(r#"{"dimension": 2, "colls": []}"#, "k").unwrap_err().to_string();
        assert!(e.contains("colls"), "{e}");
    }

    #[test]
    fn weight_documents() {
        let w: WeightDoc = parse(r#"{"family": "power", "alpha": 0.5}"#, "w").unwrap();
        assert_eq!(w.weight().unwrap().eval(&[4.0, 0.0]), 2.0);
        assert!(parse::<WeightDoc>(r#"{"family": "power", "beta": 0.5}"#, "w").is_err());
    }

    #[test]
    fn cover_documents_round_trip() {
        let cover = crate::cover::lacunary_rectangles(1..=4);
        let back = cover_doc(&cover).cover().unwrap();
        assert_eq!(back.rects.len(), 4);
        for (a, b) in cover.rects.iter().zip(&back.rects) {
            assert_eq!(a.m, b.m);
            assert!((a.rect.measure() - b.rect.measure()).abs() < 1e-12 * a.rect.measure());
        }
        let mut doc = cover_doc(&cover);
        doc.rectangles[2].half_extents[1] = -1.0;
        assert!(doc.cover().unwrap_err().to_string().contains("rectangles[2]"));
    }
}
