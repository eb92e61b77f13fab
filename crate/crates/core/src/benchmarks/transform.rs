//! Shift/rotation transform data: seeded generation and file I/O.
//!
//! The file format is plain text: one line of n whitespace-separated reals
//! (the shift), followed by n lines of n reals (the rotation matrix rows).
//! Floats are written with Rust's shortest round-trippable formatting, so a
//! write/load cycle reproduces the arrays exactly.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Generates a Haar-distributed random orthogonal matrix by QR-decomposing
/// a Gaussian matrix and fixing the signs from the diagonal of R.
pub fn random_rotation(dimension: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let gauss = DMatrix::from_fn(dimension, dimension, |_, _| rng.sample(StandardNormal));
    let qr = gauss.qr();
    let r_diag: Vec<f64> = (0..dimension).map(|i| qr.r()[(i, i)]).collect();
    let mut q = qr.q();
    for (j, d) in r_diag.iter().enumerate() {
        if *d < 0.0 {
            for i in 0..dimension {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Largest absolute entry of RᵀR − I.
pub fn orthogonality_defect(rotation: &DMatrix<f64>) -> f64 {
    let n = rotation.nrows();
    let gram = rotation.transpose() * rotation;
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram[(i, j)] - expected).abs());
        }
    }
    defect
}

/// Loads a shift vector and rotation matrix from a transform-data file.
///
/// Orthogonality is not enforced (external data is trusted); a defect above
/// 1e-6 is logged as a warning.
pub fn load_transform_data(path: &Path, dimension: usize) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let text = fs::read_to_string(path)?;
    parse_transform_data(&text, dimension)
}

pub(crate) fn parse_transform_data(
    text: &str,
    dimension: usize,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());

    let shift_line = lines
        .next()
        .ok_or_else(|| Error::TransformData("empty file".into()))?;
    let shift = parse_row(shift_line, dimension, "shift")?;

    let mut rotation = DMatrix::zeros(dimension, dimension);
    for row in 0..dimension {
        let line = lines.next().ok_or_else(|| {
            Error::TransformData(format!(
                "expected {dimension} rotation rows, found {row}"
            ))
        })?;
        let values = parse_row(line, dimension, &format!("rotation row {row}"))?;
        for (col, v) in values.iter().enumerate() {
            rotation[(row, col)] = *v;
        }
    }
    if lines.next().is_some() {
        return Err(Error::TransformData("trailing data after rotation rows".into()));
    }

    let defect = orthogonality_defect(&rotation);
    if defect > 1e-6 {
        log::warn!("transform data rotation deviates from orthogonality: max |R'R - I| = {defect:e}");
    }
    Ok((DVector::from_vec(shift), rotation))
}

fn parse_row(line: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::TransformData(format!("{what}: bad number {tok:?}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != expected {
        return Err(Error::TransformData(format!(
            "{what}: expected {expected} values, got {}",
            values.len()
        )));
    }
    Ok(values)
}

/// Writes transform data in the format accepted by [`load_transform_data`].
pub fn write_transform_data(
    path: &Path,
    shift: &DVector<f64>,
    rotation: &DMatrix<f64>,
) -> Result<()> {
    let n = shift.len();
    let mut out = String::new();
    let row_to_line =
        |vals: Vec<f64>| vals.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    out.push_str(&row_to_line(shift.iter().copied().collect()));
    out.push('\n');
    for row in 0..n {
        out.push_str(&row_to_line(rotation.row(row).iter().copied().collect()));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}
