//! Matrix JSON parsing and printing.
//!
//! Wire format: an array of rows; each entry is either a plain number (real)
//! or a two-element array [re, im] (complex). A matrix is tagged complex
//! when any entry uses the pair form, unless a field is forced explicitly.

use anyhow::{bail, Result};
use iwasawa_lab::{Field, Matrix, Scalar};
use serde_json::Value;

pub fn parse_matrix(text: &str, forced_field: Option<Field>) -> Result<Matrix> {
    let value: Value = serde_json::from_str(text.trim())?;
    let Value::Array(rows) = &value else {
        bail!("expected a JSON array of rows");
    };
    let n = rows.len();
    if n == 0 {
        bail!("matrix is empty");
    }
    let mut entries = Vec::with_capacity(n * n);
    let mut saw_pair = false;
    for (i, row) in rows.iter().enumerate() {
        let Value::Array(cells) = row else {
            bail!("row {i} is not an array");
        };
        if cells.len() != n {
            bail!("row {i} has {} entries, expected {n} (square matrix)", cells.len());
        }
        for (j, cell) in cells.iter().enumerate() {
            let z = match cell {
                Value::Number(x) => {
                    Scalar::new(x.as_f64().unwrap_or(f64::NAN), 0.0)
                }
                Value::Array(pair) if pair.len() == 2 => {
                    saw_pair = true;
                    let re = pair[0].as_f64();
                    let im = pair[1].as_f64();
                    match (re, im) {
                        (Some(re), Some(im)) => Scalar::new(re, im),
                        _ => bail!("entry ({i},{j}): [re, im] must be numbers"),
                    }
                }
                _ => bail!("entry ({i},{j}) must be a number or an [re, im] pair"),
            };
            if !z.re.is_finite() || !z.im.is_finite() {
                bail!("entry ({i},{j}) is not finite");
            }
            entries.push(z);
        }
    }
    let field = forced_field.unwrap_or(if saw_pair { Field::Complex } else { Field::Real });
    if field == Field::Real && entries.iter().any(|z| z.im != 0.0) {
        bail!("matrix has complex entries but the field was forced to R");
    }
    let mut m = Matrix::zeros(n, field);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = entries[i * n + j];
        }
    }
    Ok(m)
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    let n = m.n();
    let rows: Vec<Value> = (0..n)
        .map(|i| {
            let cells: Vec<Value> = (0..n)
                .map(|j| {
                    let z = m[(i, j)];
                    match m.field() {
                        Field::Real => serde_json::json!(z.re),
                        Field::Complex => serde_json::json!([z.re, z.im]),
                    }
                })
                .collect();
            Value::Array(cells)
        })
        .collect();
    Value::Array(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_real_and_complex() {
        let m = parse_matrix("[[1, 2],[3, 4]]", None).unwrap();
        assert_eq!(m.field(), Field::Real);
        assert_eq!(m[(1, 0)].re, 3.0);

        let m = parse_matrix("[[1, [0, 1]],[0, 1]]", None).unwrap();
        assert_eq!(m.field(), Field::Complex);
        assert_eq!(m[(0, 1)].im, 1.0);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrix("not json", None).is_err());
        assert!(parse_matrix("[[1,2],[3]]", None).is_err());
        assert!(parse_matrix("[[1,\"x\"],[3,4]]", None).is_err());
        assert!(parse_matrix("[]", None).is_err());
        assert!(parse_matrix("[[1,[0,1]],[0,1]]", Some(Field::Real)).is_err());
    }

    #[test]
    fn round_trips() {
        let text = "[[1.5, [0.25, -2.0]],[0.0, 1.0]]";
        let m = parse_matrix(text, None).unwrap();
        let json = matrix_to_json(&m).to_string();
        let m2 = parse_matrix(&json, None).unwrap();
        assert_eq!(m, m2);
    }
}
