//! Matrix interchange. A matrix is `{"rows": r, "cols": c, "data": [[re, im], ...]}`
//! with `data` row major; a file holds either one matrix or an array of them.

use serde::{Deserialize, Serialize};
use sgmodel_core::numerics::{Complex64, ComplexMatrix};

#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    One(MatrixJson),
    Many(Vec<MatrixJson>),
}

#[cfg(test)]
pub fn to_json(m: &ComplexMatrix) -> MatrixJson {
    let (rows, cols) = m.shape();
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let z = m.get(r, c);
            data.push([z.re, z.im]);
        }
    }
    MatrixJson { rows, cols, data }
}

pub fn from_json(j: &MatrixJson) -> Result<ComplexMatrix, String> {
    if j.rows == 0 || j.cols == 0 {
        return Err("matrix must have nonzero shape".into());
    }
    if j.data.len() != j.rows * j.cols {
        return Err(format!(
            "matrix data holds {} entries, shape wants {}",
            j.data.len(),
            j.rows * j.cols
        ));
    }
    let mut m = ComplexMatrix::zeros(j.rows, j.cols);
    for (k, &[re, im]) in j.data.iter().enumerate() {
        if !(re.is_finite() && im.is_finite()) {
            return Err(format!("matrix entry {k} is not finite"));
        }
        m.set(k / j.cols, k % j.cols, Complex64::new(re, im));
    }
    Ok(m)
}

/// Reads one or more matrices from a JSON file.
pub fn read_matrices(path: &std::path::Path) -> Result<Vec<ComplexMatrix>, crate::Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| crate::Failure::Io(format!("{}: {e}", path.display())))?;
    let parsed: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| crate::Failure::Io(format!("{}: {e}", path.display())))?;
    let items = match parsed {
        MatrixFile::One(j) => vec![j],
        MatrixFile::Many(v) => v,
    };
    items
        .iter()
        .map(|j| from_json(j).map_err(crate::Failure::Precondition))
        .collect()
}
