//! Binary dataset container.
//!
//! Layout (little-endian): magic `GFDS`, version `u32`, array count `u32`,
//! then per array: name length `u32`, UTF-8 name, dtype `u8`
//! (0 = f32, 1 = u8, 2 = u32), rank `u8`, extents `u32 × rank`, raw data.

use std::io::{Read, Write};
use std::path::Path;

use super::{derive_seed, extract_boundary, sample_queries, sample_surface, PointBatch, QuerySet, ShapeSpec};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"GFDS";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
enum Array {
    F32(Vec<usize>, Vec<f32>),
    U8(Vec<usize>, Vec<u8>),
    U32(Vec<usize>, Vec<u32>),
}

/// Training data: an input cloud and labelled queries.
///
/// Coordinates are held at single precision (widened to `f64`) so a
/// dataset read back from disk is identical to the one generated.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: PointBatch,
    pub queries: QuerySet,
}

fn round_f32(p: [f64; 3]) -> [f64; 3] {
    p.map(|c| f64::from(c as f32))
}

impl Dataset {
    /// Samples a noisy cloud and uniform queries, then marks boundary
    /// queries within `boundary_radius`.
    pub fn generate(
        spec: &ShapeSpec,
        n_points: usize,
        sigma: f64,
        n_queries: usize,
        boundary_radius: f64,
        seed: u64,
    ) -> Result<Self> {
        let cloud = sample_surface(spec, n_points, sigma, derive_seed(seed, 1))?;
        let points = PointBatch::new(cloud.coords.into_iter().map(round_f32).collect())?;
        let raw = sample_queries(spec, n_queries, derive_seed(seed, 2))?;
        let coords: Vec<[f64; 3]> = raw.coords.into_iter().map(round_f32).collect();
        let labels = coords.iter().map(|&q| super::inside(spec, q)).collect();
        let queries = extract_boundary(&QuerySet::new(coords, labels)?, boundary_radius)?.queries;
        Ok(Self { points, queries })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::read_from(&mut bytes.as_slice())
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let flat = |v: &[[f64; 3]]| v.iter().flatten().map(|&c| c as f32).collect::<Vec<_>>();
        let arrays = [
            (
                "points",
                Array::F32(vec![self.points.len(), 3], flat(&self.points.coords)),
            ),
            (
                "queries",
                Array::F32(vec![self.queries.len(), 3], flat(&self.queries.coords)),
            ),
            (
                "labels",
                Array::U8(
                    vec![self.queries.len()],
                    self.queries.labels.iter().map(|&b| u8::from(b)).collect(),
                ),
            ),
            (
                "boundary_mask",
                Array::U8(
                    vec![self.queries.len()],
                    self.queries.boundary_mask.iter().map(|&b| u8::from(b)).collect(),
                ),
            ),
        ];
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(arrays.len() as u32).to_le_bytes())?;
        for (name, a) in &arrays {
            write_array(w, name, a)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad dataset magic {magic:?}")));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported dataset version {version}")));
        }
        let count = read_u32(r)?;
        let mut points = None;
        let mut queries = None;
        let mut labels = None;
        let mut mask = None;
        for _ in 0..count {
            let (name, a) = read_array(r)?;
            match (name.as_str(), a) {
                ("points", Array::F32(e, d)) if e.len() == 2 && e[1] == 3 => points = Some(triples(&d)),
                ("queries", Array::F32(e, d)) if e.len() == 2 && e[1] == 3 => queries = Some(triples(&d)),
                ("labels", Array::U8(e, d)) if e.len() == 1 => labels = Some(bits(&d, "labels")?),
                ("boundary_mask", Array::U8(e, d)) if e.len() == 1 => mask = Some(bits(&d, "boundary_mask")?),
                ("points" | "queries" | "labels" | "boundary_mask", _) => {
                    return Err(Error::Format(format!("array {name:?} has the wrong dtype or shape")))
                }
                _ => log::debug!("skipping unknown dataset array {name:?}"),
            }
        }
        let missing = |n: &str| Error::Format(format!("dataset lacks required array {n:?}"));
        let points = PointBatch::new(points.ok_or_else(|| missing("points"))?)?;
        let coords = queries.ok_or_else(|| missing("queries"))?;
        let labels = labels.ok_or_else(|| missing("labels"))?;
        let mut queries = QuerySet::new(coords, labels).map_err(|e| Error::Format(e.to_string()))?;
        if let Some(m) = mask {
            if m.len() != queries.len() {
                return Err(Error::Format("boundary_mask length differs from queries".into()));
            }
            queries.boundary_mask = m;
        }
        Ok(Self { points, queries })
    }
}

fn triples(d: &[f32]) -> Vec<[f64; 3]> {
    d.chunks_exact(3)
        .map(|c| [f64::from(c[0]), f64::from(c[1]), f64::from(c[2])])
        .collect()
}

fn bits(d: &[u8], name: &str) -> Result<Vec<bool>> {
    d.iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(Error::Format(format!("{name} holds non-binary value {v}"))),
        })
        .collect()
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn write_array(w: &mut impl Write, name: &str, a: &Array) -> Result<()> {
    w.write_all(&(name.len() as u32).to_le_bytes())?;
    w.write_all(name.as_bytes())?;
    let (code, extents) = match a {
        Array::F32(e, _) => (0u8, e),
        Array::U8(e, _) => (1, e),
        Array::U32(e, _) => (2, e),
    };
    w.write_all(&[code, extents.len() as u8])?;
    for &e in extents {
        w.write_all(&(e as u32).to_le_bytes())?;
    }
    match a {
        Array::F32(_, d) => d.iter().try_for_each(|v| w.write_all(&v.to_le_bytes()))?,
        Array::U8(_, d) => w.write_all(d)?,
        Array::U32(_, d) => d.iter().try_for_each(|v| w.write_all(&v.to_le_bytes()))?,
    }
    Ok(())
}

fn read_array(r: &mut impl Read) -> Result<(String, Array)> {
    let len = read_u32(r)? as usize;
    if len > 4096 {
        return Err(Error::Format(format!("array name length {len} is implausible")));
    }
    let mut name = vec![0u8; len];
    r.read_exact(&mut name)?;
    let name = String::from_utf8(name).map_err(|_| Error::Format("array name is not UTF-8".into()))?;
    let mut head = [0u8; 2];
    r.read_exact(&mut head)?;
    let extents = (0..head[1])
        .map(|_| read_u32(r).map(|e| e as usize))
        .collect::<Result<Vec<_>>>()?;
    let n: usize = extents.iter().product();
    let width = match head[0] {
        0 | 2 => 4,
        1 => 1,
        c => return Err(Error::Format(format!("unknown dtype code {c} for {name:?}"))),
    };
    let mut raw = Vec::new();
    r.take((n * width) as u64).read_to_end(&mut raw)?;
    if raw.len() != n * width {
        return Err(Error::Format(format!("array {name:?} is truncated")));
    }
    let words = || raw.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]);
    let a = match head[0] {
        0 => Array::F32(extents, words().map(f32::from_le_bytes).collect()),
        1 => Array::U8(extents, raw),
        _ => Array::U32(extents, words().map(u32::from_le_bytes).collect()),
    };
    Ok((name, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identical() {
        let ds = Dataset::generate(&ShapeSpec::toy_scene(), 200, 0.005, 500, 0.08, 3).unwrap();
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        let back = Dataset::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, ds);
        assert!(ds.queries.boundary_mask.iter().any(|&b| b));
    }

    #[test]
    fn generation_is_reproducible_to_the_byte() {
        let bytes = || {
            let ds = Dataset::generate(&ShapeSpec::toy_scene(), 100, 0.005, 100, 0.08, 9).unwrap();
            let mut buf = Vec::new();
            ds.write_to(&mut buf).unwrap();
            buf
        };
        assert_eq!(bytes(), bytes());
    }

    #[test]
    fn corrupt_input_is_a_format_error() {
        assert!(matches!(
            Dataset::read_from(&mut &b"GFDX\x01\0\0\0"[..]),
            Err(Error::Format(_))
        ));
        let ds = Dataset::generate(&ShapeSpec::toy_scene(), 10, 0.0, 10, 0.08, 1).unwrap();
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(Dataset::read_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn u32_arrays_are_accepted_and_skipped() {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&4u32.to_le_bytes());
        write_array(&mut buf, "ids", &Array::U32(vec![2], vec![7, 8])).unwrap();
        write_array(&mut buf, "points", &Array::F32(vec![1, 3], vec![0.5; 3])).unwrap();
        write_array(&mut buf, "queries", &Array::F32(vec![1, 3], vec![0.25; 3])).unwrap();
        write_array(&mut buf, "labels", &Array::U8(vec![1], vec![1])).unwrap();
        let ds = Dataset::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(ds.queries.labels, vec![true]);
        assert_eq!(ds.queries.boundary_mask, vec![false]);
    }
}
