use std::fmt::Write as _;
use std::path::Path;

use super::Mesh;
use crate::error::{Error, Result};

/// `%.9g`: nine significant digits, trailing zeros trimmed.
pub(crate) fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-5..9).contains(&exp) {
        format!("{:.*}", (8 - exp).max(0) as usize, v)
    } else {
        format!("{v:.8e}")
    };
    let s = if s.contains('.') && !s.contains('e') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

impl Mesh {
    /// ASCII OBJ: `v` lines, `vn` lines when normals are present, then
    /// 1-based `f` lines.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            writeln!(s, "v {} {} {}", sig9(v[0]), sig9(v[1]), sig9(v[2])).expect("string write");
        }
        for n in &self.normals {
            writeln!(s, "vn {} {} {}", sig9(n[0]), sig9(n[1]), sig9(n[2])).expect("string write");
        }
        let with_normals = !self.normals.is_empty();
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| i + 1);
            if with_normals {
                writeln!(s, "f {a}//{a} {b}//{b} {c}//{c}").expect("string write");
            } else {
                writeln!(s, "f {a} {b} {c}").expect("string write");
            }
        }
        s
    }

    pub fn from_obj(text: &str) -> Result<Mesh> {
        let mut mesh = Mesh::default();
        for (lineno, line) in text.lines().enumerate() {
            let bad = |what: &str| Error::Format(format!("OBJ line {}: {what}", lineno + 1));
            let mut it = line.split_whitespace();
            let Some(tag) = it.next() else { continue };
            let rest: Vec<&str> = it.collect();
            match tag {
                "v" | "vn" => {
                    if rest.len() < 3 {
                        return Err(bad("expected three coordinates"));
                    }
                    let mut p = [0.0; 3];
                    for (d, tok) in rest[..3].iter().enumerate() {
                        p[d] = tok.parse().map_err(|_| bad("unparsable coordinate"))?;
                    }
                    if tag == "v" {
                        mesh.vertices.push(p);
                    } else {
                        mesh.normals.push(p);
                    }
                }
                "f" => {
                    let idx = rest
                        .iter()
                        .map(|tok| {
                            let first = tok.split('/').next().unwrap_or("");
                            match first.parse::<usize>() {
                                Ok(i) if i >= 1 => Ok(i - 1),
                                _ => Err(bad("face index must be a positive integer")),
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if idx.len() < 3 {
                        return Err(bad("face needs three vertices"));
                    }
                    for k in 1..idx.len() - 1 {
                        mesh.triangles.push([idx[0], idx[k], idx[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        mesh.validate()?;
        Ok(mesh)
    }
}

pub fn write_obj(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh.to_obj())?;
    Ok(())
}

pub fn read_obj(path: &Path) -> Result<Mesh> {
    Mesh::from_obj(&std::fs::read_to_string(path)?)
}
