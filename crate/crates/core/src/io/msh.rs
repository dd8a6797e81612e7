//! Node coordinates from Gmsh ASCII meshes (format 2.2 and 4.1). Element
//! and all other sections are skipped.

use std::path::Path;

use crate::pointcloud::PointCloud;
use crate::{Error, Result};

/// Nodes of a mesh file. `tags[i]` is the file's tag of cloud node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MshNodes {
    pub cloud: PointCloud,
    pub tags: Vec<u64>,
}

struct Lines<'a> {
    path: &'a Path,
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: u64,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<&'a str> {
        self.iter.next().map(|(i, l)| {
            self.line = i as u64 + 1;
            l.trim()
        })
    }

    fn require(&mut self, what: &str) -> Result<&'a str> {
        self.next().ok_or_else(|| self.error(format!("unexpected end of file, expected {what}")))
    }

    fn error(&self, message: String) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message,
        }
    }

    fn numbers<T: std::str::FromStr>(&self, text: &str, at_least: usize, what: &str) -> Result<Vec<T>> {
        let values = text
            .split_whitespace()
            .map(|t| t.parse::<T>().map_err(|_| self.error(format!("{what}: '{t}' is not a valid number"))))
            .collect::<Result<Vec<T>>>()?;
        if values.len() < at_least {
            return Err(self.error(format!("{what}: expected {at_least} values, found {}", values.len())));
        }
        Ok(values)
    }

    fn next_numbers<T: std::str::FromStr>(&mut self, at_least: usize, what: &str) -> Result<Vec<T>> {
        let text = self.require(what)?;
        self.numbers(text, at_least, what)
    }

    fn skip_to_end(&mut self, section: &str) -> Result<()> {
        let end = format!("$End{section}");
        while let Some(l) = self.next() {
            if l == end {
                return Ok(());
            }
        }
        Err(self.error(format!("missing {end}")))
    }
}

fn unsupported(path: &Path, message: impl Into<String>) -> Error {
    Error::UnsupportedFormat {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads the `$Nodes` section. The cloud is 2D when every z coordinate is
/// zero, otherwise 3D.
pub fn read_msh_nodes(path: impl AsRef<Path>) -> Result<MshNodes> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|_| unsupported(path, "not an ASCII mesh file"))?;
    parse_msh(path, &text)
}

fn parse_msh(path: &Path, text: &str) -> Result<MshNodes> {
    let mut lines = Lines {
        path,
        iter: text.lines().enumerate(),
        line: 0,
    };
    let mut version: Option<u32> = None;
    let mut nodes: Option<(Vec<u64>, Vec<[f64; 3]>)> = None;
    while let Some(l) = lines.next() {
        match l {
            "" => {}
            "$MeshFormat" => {
                let fmt = lines.require("mesh format")?;
                let parts: Vec<&str> = fmt.split_whitespace().collect();
                if parts.len() < 3 {
                    return Err(lines.error("malformed $MeshFormat".into()));
                }
                if parts[1] != "0" {
                    return Err(unsupported(path, "binary mesh files are not supported"));
                }
                version = Some(match parts[0] {
                    v if v.starts_with("2.") => 2,
                    "4.1" => 4,
                    v => return Err(unsupported(path, format!("mesh format version {v}"))),
                });
                lines.skip_to_end("MeshFormat")?;
            }
            "$Nodes" => {
                let parsed = match version {
                    Some(2) => nodes_v2(&mut lines)?,
                    Some(_) => nodes_v4(&mut lines)?,
                    None => return Err(lines.error("$Nodes before $MeshFormat".into())),
                };
                if lines.require("$EndNodes")? != "$EndNodes" {
                    return Err(lines.error("expected $EndNodes".into()));
                }
                nodes = Some(parsed);
            }
            section if section.starts_with('$') && !section.starts_with("$End") => {
                lines.skip_to_end(&section[1..])?;
            }
            other => return Err(lines.error(format!("unexpected line '{other}'"))),
        }
    }
    if version.is_none() {
        return Err(unsupported(path, "missing $MeshFormat"));
    }
    let (tags, points) = nodes.ok_or_else(|| unsupported(path, "missing $Nodes section"))?;
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let dim = if points.iter().all(|p| p[2] == 0.0) { 2 } else { 3 };
    let coords = points.iter().flat_map(|p| p[..dim].to_vec()).collect();
    Ok(MshNodes {
        cloud: PointCloud::from_flat(dim, coords)?,
        tags,
    })
}

fn point(lines: &Lines, values: &[f64]) -> Result<[f64; 3]> {
    let p = [values[0], values[1], values[2]];
    if p.iter().any(|v| !v.is_finite()) {
        return Err(lines.error("non-finite coordinate".into()));
    }
    Ok(p)
}

fn nodes_v2(lines: &mut Lines) -> Result<(Vec<u64>, Vec<[f64; 3]>)> {
    let count = lines.next_numbers::<usize>(1, "node count")?[0];
    let mut tags = Vec::with_capacity(count.min(1 << 16));
    let mut points = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let l = lines.require("node line")?;
        let mut parts = l.splitn(2, char::is_whitespace);
        let tag = parts
            .next()
            .and_then(|t| t.parse::<u64>().ok())
            .ok_or_else(|| lines.error(format!("bad node tag in '{l}'")))?;
        let xyz = lines.numbers::<f64>(parts.next().unwrap_or(""), 3, "node coordinates")?;
        tags.push(tag);
        points.push(point(lines, &xyz)?);
    }
    Ok((tags, points))
}

fn nodes_v4(lines: &mut Lines) -> Result<(Vec<u64>, Vec<[f64; 3]>)> {
    let header = lines.next_numbers::<usize>(4, "nodes header")?;
    let (blocks, total) = (header[0], header[1]);
    let mut tags = Vec::with_capacity(total.min(1 << 16));
    let mut points = Vec::with_capacity(total.min(1 << 16));
    for _ in 0..blocks {
        let block = lines.next_numbers::<usize>(4, "entity block header")?;
        let (parametric, n) = (block[2] != 0, block[3]);
        for _ in 0..n {
            tags.push(lines.next_numbers::<u64>(1, "node tag")?[0]);
        }
        for _ in 0..n {
            let values = lines.next_numbers::<f64>(3, "node coordinates")?;
            if parametric && values.len() == 3 {
                return Err(lines.error("parametric node without parametric coordinates".into()));
            }
            points.push(point(lines, &values)?);
        }
    }
    if points.len() != total {
        return Err(lines.error(format!("header declares {total} nodes, blocks hold {}", points.len())));
    }
    Ok((tags, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<MshNodes> {
        parse_msh(Path::new("mesh.msh"), text)
    }

    const V2: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n3\n1 0 0 0\n2 1 0 0\n7 0 1 0\n$EndNodes\n\
$Elements\n1\n1 2 2 0 1 1 2 7\n$EndElements\n";

    #[test]
    fn minimal_v22() {
        let m = parse(V2).unwrap();
        assert_eq!(m.cloud.len(), 3);
        assert_eq!(m.cloud.dim(), 2);
        assert_eq!(m.tags, vec![1, 2, 7]);
        assert_eq!(m.cloud.point(2), &[0.0, 1.0]);
    }

    #[test]
    fn multi_block_v41() {
        let text = "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n$Entities\n0 0 0 0\n$EndEntities\n\
$Nodes\n2 4 1 9\n0 1 0 1\n9\n0 0 0.5\n2 1 0 3\n3\n4\n1\n1 0 0\n1 1 0\n0 0 1\n$EndNodes\n";
        let m = parse(text).unwrap();
        assert_eq!(m.cloud.dim(), 3);
        assert_eq!(m.tags, vec![9, 3, 4, 1]);
        assert_eq!(m.cloud.point(0), &[0.0, 0.0, 0.5]);
        assert_eq!(m.cloud.point(3), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_binary_and_missing_nodes() {
        let bin = "$MeshFormat\n4.1 1 8\n$EndMeshFormat\n";
        assert!(matches!(parse(bin), Err(Error::UnsupportedFormat { .. })));
        let no_nodes = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
        assert!(matches!(parse(no_nodes), Err(Error::UnsupportedFormat { .. })));
    }

    #[test]
    fn reports_positions() {
        let bad = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n2\n1 0 0 0\n2 x 0 0\n$EndNodes\n";
        assert!(matches!(parse(bad), Err(Error::Parse { line: 7, .. })));
        let short = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n3\n1 0 0 0\n";
        assert!(matches!(parse(short), Err(Error::Parse { .. })));
    }

    #[test]
    fn reads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.msh");
        std::fs::write(&path, V2).unwrap();
        assert_eq!(read_msh_nodes(&path).unwrap().cloud.len(), 3);
        std::fs::write(&path, [0xffu8, 0xfe, 0x00]).unwrap();
        assert!(matches!(read_msh_nodes(&path), Err(Error::UnsupportedFormat { .. })));
    }

    proptest! {
        #[test]
        fn never_panics(text in "(\\$[A-Za-z]{0,12}|[0-9. x-]{0,20})(\n(\\$[A-Za-z]{0,12}|[0-9. x-]{0,20})){0,12}") {
            let _ = parse(&text);
            let with_header = format!("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n{text}");
            let _ = parse(&with_header);
        }
    }
}
