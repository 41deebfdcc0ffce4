//! On-disk formats: CSV for point clouds, traces, and Jacobians; JSON for
//! filtrations, (signed) barcodes, grid modules, lifted vectors, and run
//! configurations.
//!
//! CSV and printed floats use 17 significant digits so round trips are
//! bit-faithful; JSON floats rely on serde_json's shortest round-trip
//! encoding, which is also exact.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::f2::F2Matrix;
use crate::filtration::{validate_monotone, FiltrationError, MonotoneFiltration, PointCloud, SimplicialComplex};
use crate::grid::{Grid, GridError, GridModule, SignedBarcode};
use crate::lift::{LiftedBarcode, PersJacobian};
use crate::persistence::{Bar, Barcode};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{0}")]
    Invalid(String),
}

/// 17 significant digits, enough to reconstruct the exact f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

// --------------------------------------------------------------------------
// point cloud CSV: one point per line, `x_1,...,x_d`
// --------------------------------------------------------------------------

pub fn parse_points_csv(text: &str) -> Result<PointCloud, IoError> {
    let mut points = Vec::new();
    let mut dim = None;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let coords = coords.map_err(|e| IoError::Csv { line: idx + 1, message: e.to_string() })?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(IoError::Csv { line: idx + 1, message: "non-finite coordinate".into() });
        }
        if let Some(d) = dim {
            if coords.len() != d {
                return Err(IoError::Csv {
                    line: idx + 1,
                    message: format!("expected {d} coordinates, got {}", coords.len()),
                });
            }
        } else {
            dim = Some(coords.len());
        }
        points.push(coords);
    }
    PointCloud::new(points).map_err(IoError::from)
}

pub fn points_to_csv(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for p in cloud.points() {
        let row: Vec<String> = p.iter().map(|&c| format_float(c)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

// --------------------------------------------------------------------------
// filtration JSON
// --------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FiltrationDoc {
    n: usize,
    simplices: Vec<SimplexDoc>,
}

#[derive(Serialize, Deserialize)]
struct SimplexDoc {
    verts: Vec<usize>,
    value: Vec<f64>,
}

pub fn filtration_to_json(filtration: &MonotoneFiltration) -> String {
    let doc = FiltrationDoc {
        n: filtration.parameters(),
        simplices: filtration
            .complex()
            .simplices()
            .iter()
            .enumerate()
            .map(|(id, s)| SimplexDoc { verts: s.clone(), value: filtration.value(id).to_vec() })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("filtration serializes")
}

pub fn parse_filtration_json(text: &str) -> Result<MonotoneFiltration, IoError> {
    let doc: FiltrationDoc = serde_json::from_str(text)?;
    let complex = SimplicialComplex::new(doc.simplices.iter().map(|s| s.verts.clone()).collect())?;
    let mut values = vec![Vec::new(); complex.len()];
    for s in &doc.simplices {
        if s.value.len() != doc.n {
            return Err(IoError::Invalid(format!(
                "simplex {:?} has {} value components, expected {}",
                s.verts,
                s.value.len(),
                doc.n
            )));
        }
        let id = complex
            .id_of(&s.verts)
            .ok_or_else(|| IoError::Invalid(format!("unknown simplex {:?}", s.verts)))?;
        values[id] = s.value.clone();
    }
    if values.iter().any(Vec::is_empty) && doc.n > 0 {
        return Err(IoError::Invalid("some simplices carry no value".into()));
    }
    validate_monotone(values, complex).map_err(IoError::from)
}

// --------------------------------------------------------------------------
// barcode JSON (shared by plain and signed barcodes)
// --------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct BarcodeDoc {
    n: usize,
    bars: Vec<BarDoc>,
}

#[derive(Serialize, Deserialize)]
struct BarDoc {
    birth: Vec<f64>,
    death: DeathDoc,
    sign: i8,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DeathDoc {
    Infinite(String),
    Finite(Vec<f64>),
}

fn bar_to_doc(bar: &Bar) -> BarDoc {
    BarDoc {
        birth: bar.birth.clone(),
        death: match &bar.death {
            Some(d) => DeathDoc::Finite(d.clone()),
            None => DeathDoc::Infinite("inf".into()),
        },
        sign: bar.sign,
    }
}

fn doc_to_bar(doc: &BarDoc) -> Result<Bar, IoError> {
    if doc.sign != 1 && doc.sign != -1 {
        return Err(IoError::Invalid(format!("bar sign must be 1 or -1, got {}", doc.sign)));
    }
    let death = match &doc.death {
        DeathDoc::Infinite(s) if s == "inf" => None,
        DeathDoc::Infinite(s) => {
            return Err(IoError::Invalid(format!("unknown death marker {s:?}")));
        }
        DeathDoc::Finite(d) => {
            if d.len() != doc.birth.len() {
                return Err(IoError::Invalid("birth and death arity differ".into()));
            }
            Some(d.clone())
        }
    };
    Ok(Bar { birth: doc.birth.clone(), death, sign: doc.sign })
}

pub fn barcode_to_json(barcode: &Barcode) -> String {
    let doc = BarcodeDoc { n: barcode.n, bars: barcode.bars.iter().map(bar_to_doc).collect() };
    serde_json::to_string_pretty(&doc).expect("barcode serializes")
}

pub fn signed_barcode_to_json(barcode: &SignedBarcode) -> String {
    let doc = BarcodeDoc {
        n: barcode.n,
        bars: barcode
            .positive
            .iter()
            .chain(&barcode.negative)
            .map(bar_to_doc)
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("barcode serializes")
}

/// Parses the shared barcode format into a signed barcode; files written by
/// [`barcode_to_json`] come back with an empty negative part.
pub fn parse_barcode_json(text: &str) -> Result<SignedBarcode, IoError> {
    let doc: BarcodeDoc = serde_json::from_str(text)?;
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for bar_doc in &doc.bars {
        let bar = doc_to_bar(bar_doc)?;
        if bar.birth.len() != doc.n {
            return Err(IoError::Invalid(format!(
                "bar arity {} does not match n = {}",
                bar.birth.len(),
                doc.n
            )));
        }
        if bar.sign == 1 {
            positive.push(bar);
        } else {
            negative.push(bar);
        }
    }
    Ok(SignedBarcode::new(doc.n, positive, negative))
}

// --------------------------------------------------------------------------
// grid module JSON
// --------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GridModuleDoc {
    sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<Vec<f64>>>,
    /// Cell dimensions in row-major order, axis 0 slowest.
    dims: Vec<usize>,
    arrows: Vec<ArrowDoc>,
}

#[derive(Serialize, Deserialize)]
struct ArrowDoc {
    from: Vec<usize>,
    axis: usize,
    matrix: Vec<Vec<u8>>,
}

pub fn grid_module_to_json(module: &GridModule) -> String {
    let grid = module.grid();
    let mut arrows = Vec::new();
    for cell in grid.cells() {
        for axis in 0..grid.n() {
            if cell[axis] + 1 == grid.sizes()[axis] {
                continue;
            }
            let m = module.arrow(&cell, axis);
            let matrix = (0..m.rows())
                .map(|r| (0..m.cols()).map(|c| u8::from(m.get(r, c))).collect())
                .collect();
            arrows.push(ArrowDoc { from: cell.clone(), axis, matrix });
        }
    }
    let doc = GridModuleDoc {
        sizes: grid.sizes().to_vec(),
        coords: grid.coords().map(<[Vec<f64>]>::to_vec),
        dims: module.dims().to_vec(),
        arrows,
    };
    serde_json::to_string_pretty(&doc).expect("module serializes")
}

pub fn parse_grid_module_json(text: &str) -> Result<GridModule, IoError> {
    let doc: GridModuleDoc = serde_json::from_str(text)?;
    let grid = match doc.coords {
        Some(coords) => Grid::with_coords(doc.sizes, coords),
        None => Grid::new(doc.sizes),
    };
    let mut arrow_map = HashMap::new();
    for a in doc.arrows {
        let matrix = F2Matrix::from_rows(&a.matrix);
        arrow_map.insert((a.from, a.axis), matrix);
    }
    GridModule::new(grid, doc.dims, arrow_map).map_err(IoError::from)
}

// --------------------------------------------------------------------------
// lifted vectors and Jacobians
// --------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct LiftedDoc {
    n: usize,
    k: usize,
    positive: usize,
    coords: Vec<f64>,
}

pub fn lifted_to_json(lifted: &LiftedBarcode) -> String {
    let doc = LiftedDoc {
        n: lifted.n,
        k: lifted.k,
        positive: lifted.positive,
        coords: lifted.coords.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("lifted vector serializes")
}

pub fn parse_lifted_json(text: &str) -> Result<LiftedBarcode, IoError> {
    let doc: LiftedDoc = serde_json::from_str(text)?;
    if doc.positive > doc.k {
        return Err(IoError::Invalid("positive block count exceeds k".into()));
    }
    Ok(LiftedBarcode { n: doc.n, k: doc.k, positive: doc.positive, coords: doc.coords })
}

/// Row-major CSV of the Jacobian for offline inspection.
pub fn jacobian_to_csv(jacobian: &PersJacobian) -> String {
    let mut out = String::new();
    for r in 0..jacobian.rows {
        let row: Vec<String> = (0..jacobian.cols).map(|c| format_float(jacobian.get(r, c))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

// --------------------------------------------------------------------------
// descent traces and run configuration
// --------------------------------------------------------------------------

/// One `step,F,grad_norm,sup_norm` line per recorded step.
pub fn trace_to_csv(trace: &[crate::optim::TraceRow]) -> String {
    let mut out = String::from("step,F,grad_norm,sup_norm\n");
    for row in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.step,
            format_float(row.value),
            format_float(row.grad_norm),
            format_float(row.sup_norm)
        ));
    }
    out
}

/// Configuration of an optimization run; all fields have defaults so partial
/// files are accepted. `alpha0 = 0` asks for the scale-derived default
/// `0.1 * initial cloud diameter`, and `bound = 0` for `3 * sqrt(m)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub steps: usize,
    pub alpha0: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub r: usize,
    pub bound: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            steps: 100,
            alpha0: 0.0,
            gamma: 1.0,
            sigma: 0.01,
            lambda: 1.0,
            r: 20,
            bound: 0.0,
        }
    }
}

pub fn parse_run_config(text: &str) -> Result<RunConfig, IoError> {
    Ok(serde_json::from_str(text)?)
}
