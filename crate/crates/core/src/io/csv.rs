//! Nodal CSV files: a header `x,y[,z],field...`, one node per row, `#`
//! comment lines.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use crate::elasticity::{sym_component_names, Recovery, SymTensorField};
use crate::pointcloud::PointCloud;
use crate::{Error, Result};

/// Named nodal scalar fields, iterated in name order.
pub type NodalFields = BTreeMap<String, Vec<f64>>;

fn open_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => open_error(path, source),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("row has {len} columns, expected {expected_len}"),
        },
        csv::ErrorKind::Utf8 { err, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("invalid UTF-8: {err}"),
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Reads a cloud and its fields. The dimension is 3 when the third column
/// is named `z`, otherwise 2.
pub fn read_points_csv(path: impl AsRef<Path>) -> Result<(PointCloud, NodalFields)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| open_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    if header.len() < 2 || header[0] != "x" || header[1] != "y" {
        return Err(parse_err(1, "header must start with columns x,y".into()));
    }
    let dim = if header.get(2).map(String::as_str) == Some("z") { 3 } else { 2 };
    let names = &header[dim..];
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(parse_err(1, format!("column {} has an empty name", dim + i + 1)));
        }
        if names[..i].contains(name) || ["x", "y", "z"].contains(&name.as_str()) {
            return Err(parse_err(1, format!("duplicate column '{name}'")));
        }
    }
    let mut coords = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("column {}: '{cell}' is not a number", header[col])))?;
            if !value.is_finite() {
                return Err(parse_err(line, format!("column {}: non-finite value '{cell}'", header[col])));
            }
            if col < dim {
                coords.push(value);
            } else {
                columns[col - dim].push(value);
            }
        }
    }
    if coords.is_empty() {
        return Err(parse_err(2, "no data rows".into()));
    }
    let cloud = PointCloud::from_flat(dim, coords)?;
    Ok((cloud, names.iter().cloned().zip(columns).collect()))
}

/// Writes coordinates followed by `fields` in name order, using shortest
/// round-trip float formatting.
pub fn write_field_csv(path: impl AsRef<Path>, cloud: &PointCloud, fields: &NodalFields) -> Result<()> {
    let path = path.as_ref();
    for values in fields.values() {
        if values.len() != cloud.len() {
            return Err(Error::LengthMismatch {
                expected: cloud.len(),
                found: values.len(),
            });
        }
    }
    let file = File::create(path).map_err(|e| open_error(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = ["x", "y", "z"][..cloud.dim()].to_vec();
    header.extend(fields.keys().map(String::as_str));
    writer.write_record(&header).map_err(|e| csv_error(path, e))?;
    let mut row = Vec::with_capacity(header.len());
    for (p, point) in cloud.points().enumerate() {
        row.clear();
        row.extend(point.iter().map(|v| v.to_string()));
        row.extend(fields.values().map(|f| f[p].to_string()));
        writer.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| open_error(path, e))
}

/// Inserts `prefix` + `xx`, `xy`, ... columns of a symmetric tensor field.
pub fn insert_tensor(fields: &mut NodalFields, prefix: &str, tensor: &SymTensorField) {
    for (k, suffix) in sym_component_names(tensor.dim()).iter().enumerate() {
        fields.insert(format!("{prefix}{suffix}"), tensor.component(k));
    }
}

/// Strain (`e..`), stress (`s..`), von Mises (`vm`) and principal stress
/// (`p1..pd`) columns of a recovery.
pub fn recovery_fields(rec: &Recovery) -> NodalFields {
    let mut fields = NodalFields::new();
    insert_tensor(&mut fields, "e", &rec.strain);
    insert_tensor(&mut fields, "s", &rec.stress);
    fields.insert("vm".into(), rec.von_mises.clone());
    let d = rec.stress.dim();
    for i in 0..d {
        let values = rec.principal.iter().skip(i).step_by(d).copied().collect();
        fields.insert(format!("p{}", i + 1), values);
    }
    fields
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_two_dimensional_file() {
        let f = write_tmp("# nodes\nx,y,ux,uy\n0,0,1,2\n1,0,3,4\n0,1,5,6e-3\n");
        let (cloud, fields) = read_points_csv(f.path()).unwrap();
        assert_eq!(cloud.dim(), 2);
        assert_eq!(cloud.len(), 3);
        assert_eq!(fields.len(), 2);
        assert_eq!(fields["uy"], vec![2.0, 4.0, 6e-3]);
    }

    #[test]
    fn reads_three_dimensional_file() {
        let f = write_tmp("x,y,z\n0,0,0\n1,2,3\n");
        let (cloud, fields) = read_points_csv(f.path()).unwrap();
        assert_eq!(cloud.dim(), 3);
        assert_eq!(cloud.point(1), &[1.0, 2.0, 3.0]);
        assert!(fields.is_empty());
    }

    #[test]
    fn reports_line_of_bad_rows() {
        let nan = write_tmp("x,y,u\n0,0,1\n1,0,NaN\n");
        match read_points_csv(nan.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
        let text = write_tmp("x,y,u\n0,0,1\n1,abc,1\n");
        assert!(matches!(read_points_csv(text.path()), Err(Error::Parse { line: 3, .. })));
        let ragged = write_tmp("x,y,u\n0,0,1\n1,0\n");
        assert!(matches!(read_points_csv(ragged.path()), Err(Error::Parse { line: 3, .. })));
        let header = write_tmp("a,b\n0,0\n");
        assert!(matches!(read_points_csv(header.path()), Err(Error::Parse { .. })));
        let empty = write_tmp("x,y\n");
        assert!(read_points_csv(empty.path()).is_err());
        assert!(matches!(read_points_csv("/nonexistent/file.csv"), Err(Error::Io { .. })));
    }

    #[test]
    fn coordinates_only_output() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let cloud = PointCloud::new(2, vec![vec![0.5, 1.0], vec![2.0, 3.0]]).unwrap();
        write_field_csv(&path, &cloud, &NodalFields::new()).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x,y\n0.5,1\n2,3\n");
    }

    #[test]
    fn stress_columns_order() {
        let mut fields = NodalFields::new();
        insert_tensor(&mut fields, "s", &SymTensorField::zeros(2, 1));
        fields.insert("vm".into(), vec![0.0]);
        let keys: Vec<&str> = fields.keys().map(String::as_str).collect();
        assert_eq!(keys, vec!["sxx", "sxy", "syy", "vm"]);
    }

    #[test]
    fn rejects_length_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let cloud = PointCloud::new(2, vec![vec![0.0, 0.0]]).unwrap();
        let mut fields = NodalFields::new();
        fields.insert("u".into(), vec![1.0, 2.0]);
        assert!(write_field_csv(dir.path().join("o.csv"), &cloud, &fields).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_is_bit_exact(
            rows in proptest::collection::vec(proptest::array::uniform4(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO), 1..20)
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.csv");
            let cloud = PointCloud::new(2, rows.iter().map(|r| vec![r[0], r[1]]).collect()).unwrap();
            let mut fields = NodalFields::new();
            fields.insert("b".into(), rows.iter().map(|r| r[2]).collect());
            fields.insert("a".into(), rows.iter().map(|r| r[3]).collect());
            write_field_csv(&path, &cloud, &fields).unwrap();
            let (back, back_fields) = read_points_csv(&path).unwrap();
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(back.coords()), bits(cloud.coords()));
            for (k, v) in &fields {
                prop_assert_eq!(bits(&back_fields[k]), bits(v));
            }
        }
    }
}
