//! Versioned file formats. Writers emit JSON by hand with 17-significant-
//! digit floats so identical inputs give identical bytes; readers go through
//! serde and reject unknown format versions.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Deserialize;

use crate::cutoff::KernelSpec;
use crate::error::{Error, Result};
use crate::points::{shrink_degree, PointSet};
use crate::system::FlatSystem;

pub const POINTS_FORMAT: &str = "flatsphere-points/1";
pub const SYSTEM_FORMAT: &str = "flatsphere-system/1";

/// Decimal float with 17 significant digits — round-trips f64 exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_float(out: &mut String, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::domain(format!("cannot serialize non-finite value {x}")));
    }
    out.push_str(&format_float(x));
    Ok(())
}

fn push_point(out: &mut String, p: &[f64]) -> Result<()> {
    out.push('[');
    for (c, x) in p.iter().enumerate() {
        if c > 0 {
            out.push(',');
        }
        push_float(out, *x)?;
    }
    out.push(']');
    Ok(())
}

/// Serialize a node set with the shrink epsilon that produced its degree.
pub fn points_to_json(points: &PointSet, epsilon: f64) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!(
        "{{\"format\":\"{POINTS_FORMAT}\",\"m\":{},\"degree\":{},\"epsilon\":",
        points.sphere_dim(),
        points.degree()
    ));
    push_float(&mut out, epsilon)?;
    out.push_str(",\"points\":[");
    for (j, p) in points.points().iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        out.push('\n');
        push_point(&mut out, p)?;
    }
    out.push_str("]}\n");
    Ok(out)
}

#[derive(Deserialize)]
struct PointsDoc {
    format: String,
    m: u32,
    degree: u32,
    epsilon: f64,
    points: Vec<Vec<f64>>,
}

/// Parse and validate a points document; returns the node set and its
/// recorded shrink epsilon.
pub fn parse_points(text: &str) -> Result<(PointSet, f64)> {
    let doc: PointsDoc = serde_json::from_str(text)?;
    if doc.format != POINTS_FORMAT {
        return Err(Error::UnknownFormat {
            found: doc.format,
            expected: POINTS_FORMAT.to_string(),
        });
    }
    if !(doc.epsilon > 0.0 && doc.epsilon < 0.5) {
        return Err(Error::domain(format!(
            "points file epsilon must lie in (0, 1/2), got {}",
            doc.epsilon
        )));
    }
    Ok((PointSet::new(doc.m, doc.degree, doc.points)?, doc.epsilon))
}

pub fn write_points(path: impl AsRef<Path>, points: &PointSet, epsilon: f64) -> Result<()> {
    Ok(std::fs::write(path, points_to_json(points, epsilon)?)?)
}

pub fn read_points(path: impl AsRef<Path>) -> Result<(PointSet, f64)> {
    parse_points(&std::fs::read_to_string(path)?)
}

/// Serialize a flat system. The sharp (indicator) cutoff is recorded as
/// epsilon 0.
pub fn system_to_json(system: &FlatSystem) -> Result<String> {
    let spec = system.spec();
    let mut out = String::new();
    out.push_str(&format!(
        "{{\"format\":\"{SYSTEM_FORMAT}\",\"m\":{},\"L\":{},\"epsilon\":",
        spec.sphere_dim(),
        spec.degree_cutoff()
    ));
    push_float(&mut out, spec.epsilon())?;
    out.push_str(",\"points\":[");
    for (j, p) in system.points().points().iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        out.push('\n');
        push_point(&mut out, p)?;
    }
    out.push_str("],\"coefficients\":[");
    let a = system.coefficients();
    for i in 0..a.nrows() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("\n[");
        for j in 0..a.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push('[');
            push_float(&mut out, a[(i, j)].re)?;
            out.push(',');
            push_float(&mut out, a[(i, j)].im)?;
            out.push(']');
        }
        out.push(']');
    }
    out.push_str("]}\n");
    Ok(out)
}

#[derive(Deserialize)]
struct SystemDoc {
    format: String,
    m: u32,
    #[serde(rename = "L")]
    degree_cutoff: u32,
    epsilon: f64,
    points: Vec<Vec<f64>>,
    coefficients: Vec<Vec<[f64; 2]>>,
}

pub fn parse_system(text: &str) -> Result<FlatSystem> {
    let doc: SystemDoc = serde_json::from_str(text)?;
    if doc.format != SYSTEM_FORMAT {
        return Err(Error::UnknownFormat {
            found: doc.format,
            expected: SYSTEM_FORMAT.to_string(),
        });
    }
    let spec = if doc.epsilon == 0.0 {
        KernelSpec::reproducing(doc.m, doc.degree_cutoff)?
    } else {
        KernelSpec::new(doc.m, doc.degree_cutoff, doc.epsilon)?
    };
    // the selection degree is implied by (L, epsilon) in the build pipeline
    let degree = if doc.epsilon > 0.0 && doc.epsilon < 0.5 {
        shrink_degree(doc.degree_cutoff.max(1), doc.epsilon)?
    } else {
        doc.degree_cutoff
    };
    let points = PointSet::new(doc.m, degree.min(doc.degree_cutoff), doc.points)?;
    let n = points.len();
    if doc.coefficients.len() != n || doc.coefficients.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "coefficient matrix of {} rows for {n} nodes",
            doc.coefficients.len()
        )));
    }
    let coefficients = DMatrix::from_fn(n, n, |i, j| {
        Complex::new(doc.coefficients[i][j][0], doc.coefficients[i][j][1])
    });
    FlatSystem::from_parts(points, spec, coefficients)
}

pub fn write_system(path: impl AsRef<Path>, system: &FlatSystem) -> Result<()> {
    Ok(std::fs::write(path, system_to_json(system)?)?)
}

pub fn read_system(path: impl AsRef<Path>) -> Result<FlatSystem> {
    parse_system(&std::fs::read_to_string(path)?)
}
