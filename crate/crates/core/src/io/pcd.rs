//! Point Cloud Data files with a binary payload.
//!
//! The header is parsed line by line; every numeric value is bounds-checked
//! so hostile input ends in a typed error. Fields other than x, y, z stay
//! opaque record bytes.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pointcloud::{Field, PointCloud, ScalarKind, Schema};

/// Headers longer than this are rejected before any allocation.
pub const MAX_HEADER_BYTES: usize = 64 * 1024;
const MAX_FIELDS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    Ascii,
    Binary,
    BinaryCompressed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcdHeader {
    pub version: String,
    pub fields: Vec<Field>,
    pub width: usize,
    pub height: usize,
    pub viewpoint: String,
    pub points: usize,
    pub data: DataMode,
}

const DEFAULT_VIEWPOINT: &str = "0 0 0 1 0 0 0";

impl PcdHeader {
    /// Binary header describing `cloud` as an unorganized cloud.
    pub fn for_cloud(cloud: &PointCloud) -> Self {
        Self {
            version: "0.7".into(),
            fields: cloud.schema().fields().to_vec(),
            width: cloud.len(),
            height: 1,
            viewpoint: DEFAULT_VIEWPOINT.into(),
            points: cloud.len(),
            data: DataMode::Binary,
        }
    }

    pub fn schema(&self) -> Result<Schema> {
        Schema::new(self.fields.clone())
    }

    pub fn render(&self) -> String {
        let join =
            |f: &dyn Fn(&Field) -> String| self.fields.iter().map(f).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        let _ = writeln!(s, "# .PCD v{} - Point Cloud Data file format", self.version);
        let _ = writeln!(s, "VERSION {}", self.version);
        let _ = writeln!(s, "FIELDS {}", join(&|f| f.name.clone()));
        let _ = writeln!(s, "SIZE {}", join(&|f| f.kind.width().to_string()));
        let _ = writeln!(s, "TYPE {}", join(&|f| f.kind.pcd_tag().to_string()));
        let _ = writeln!(s, "COUNT {}", join(&|f| f.count.to_string()));
        let _ = writeln!(s, "WIDTH {}", self.width);
        let _ = writeln!(s, "HEIGHT {}", self.height);
        let _ = writeln!(s, "VIEWPOINT {}", self.viewpoint);
        let _ = writeln!(s, "POINTS {}", self.points);
        s.push_str("DATA binary\n");
        s
    }
}

fn parse_num(tok: &str, what: &str, offset: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::malformed(offset, format!("bad {what} value `{tok}`")))
}

/// Splits the header off `bytes`, returning it and the payload offset.
fn parse_header(bytes: &[u8]) -> Result<(PcdHeader, usize)> {
    let mut names: Option<Vec<String>> = None;
    let mut sizes: Option<Vec<usize>> = None;
    let mut types: Option<Vec<String>> = None;
    let mut counts: Option<Vec<usize>> = None;
    let mut version = String::from("0.7");
    let mut width = None;
    let mut height = None;
    let mut viewpoint = DEFAULT_VIEWPOINT.to_string();
    let mut points = None;

    let mut pos = 0usize;
    loop {
        if pos >= bytes.len() {
            return Err(Error::malformed(pos, "header ended before a DATA line"));
        }
        if pos >= MAX_HEADER_BYTES {
            return Err(Error::malformed(pos, "header exceeds size limit"));
        }
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i)
            .ok_or_else(|| Error::malformed(pos, "unterminated header line"))?;
        let line = std::str::from_utf8(&bytes[pos..end])
            .map_err(|_| Error::malformed(pos, "header line is not text"))?
            .trim();
        let line_start = pos;
        pos = end + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_ascii_whitespace();
        let key = toks.next().unwrap_or_default().to_ascii_uppercase();
        let rest: Vec<&str> = toks.collect();
        if rest.len() > MAX_FIELDS {
            return Err(Error::malformed(line_start, "too many header values"));
        }
        let one = |what: &str| -> Result<&str> {
            match rest.as_slice() {
                [v] => Ok(v),
                _ => Err(Error::malformed(
                    line_start,
                    format!("{what} takes one value"),
                )),
            }
        };
        match key.as_str() {
            "VERSION" => version = one("VERSION")?.to_string(),
            "FIELDS" => names = Some(rest.iter().map(|s| s.to_string()).collect()),
            "SIZE" => {
                sizes = Some(
                    rest.iter()
                        .map(|t| parse_num(t, "SIZE", line_start))
                        .collect::<Result<_>>()?,
                )
            }
            "TYPE" => types = Some(rest.iter().map(|s| s.to_ascii_uppercase()).collect()),
            "COUNT" => {
                counts = Some(
                    rest.iter()
                        .map(|t| parse_num(t, "COUNT", line_start))
                        .collect::<Result<_>>()?,
                )
            }
            "WIDTH" => width = Some(parse_num(one("WIDTH")?, "WIDTH", line_start)?),
            "HEIGHT" => height = Some(parse_num(one("HEIGHT")?, "HEIGHT", line_start)?),
            "VIEWPOINT" => viewpoint = rest.join(" "),
            "POINTS" => points = Some(parse_num(one("POINTS")?, "POINTS", line_start)?),
            "DATA" => {
                let data = match one("DATA")?.to_ascii_lowercase().as_str() {
                    "binary" => DataMode::Binary,
                    "ascii" => DataMode::Ascii,
                    "binary_compressed" => DataMode::BinaryCompressed,
                    other => {
                        return Err(Error::malformed(
                            line_start,
                            format!("unknown DATA mode `{other}`"),
                        ))
                    }
                };
                let header = assemble(
                    line_start, version, names, sizes, types, counts, width, height, viewpoint,
                    points, data,
                )?;
                return Ok((header, pos));
            }
            other => {
                return Err(Error::malformed(
                    line_start,
                    format!("unknown header key `{other}`"),
                ))
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    offset: usize,
    version: String,
    names: Option<Vec<String>>,
    sizes: Option<Vec<usize>>,
    types: Option<Vec<String>>,
    counts: Option<Vec<usize>>,
    width: Option<usize>,
    height: Option<usize>,
    viewpoint: String,
    points: Option<usize>,
    data: DataMode,
) -> Result<PcdHeader> {
    let missing = |k: &str| Error::malformed(offset, format!("header lacks {k}"));
    let names = names.ok_or_else(|| missing("FIELDS"))?;
    let sizes = sizes.ok_or_else(|| missing("SIZE"))?;
    let types = types.ok_or_else(|| missing("TYPE"))?;
    let counts = counts.unwrap_or_else(|| vec![1; names.len()]);
    if names.is_empty()
        || [sizes.len(), types.len(), counts.len()]
            .iter()
            .any(|&n| n != names.len())
    {
        return Err(Error::malformed(
            offset,
            format!(
                "FIELDS/SIZE/TYPE/COUNT lengths differ ({}/{}/{}/{})",
                names.len(),
                sizes.len(),
                types.len(),
                counts.len()
            ),
        ));
    }
    let mut fields = Vec::with_capacity(names.len());
    for (((name, size), tag), count) in names.into_iter().zip(sizes).zip(types).zip(counts) {
        let kind = ScalarKind::from_pcd(&tag, size).ok_or_else(|| {
            Error::malformed(offset, format!("field `{name}` has TYPE {tag} SIZE {size}"))
        })?;
        if count == 0 || count > 1 << 16 {
            return Err(Error::malformed(
                offset,
                format!("field `{name}` has COUNT {count}"),
            ));
        }
        fields.push(Field { name, kind, count });
    }
    let width = width.ok_or_else(|| missing("WIDTH"))?;
    let height = height.unwrap_or(1);
    let grid = width
        .checked_mul(height)
        .ok_or_else(|| Error::malformed(offset, "WIDTH x HEIGHT overflows"))?;
    let points = points.unwrap_or(grid);
    if points != grid {
        return Err(Error::malformed(
            offset,
            format!("POINTS {points} disagrees with WIDTH x HEIGHT = {grid}"),
        ));
    }
    Ok(PcdHeader {
        version,
        fields,
        width,
        height,
        viewpoint,
        points,
        data,
    })
}

/// Parses a binary PCD file, keeping its header.
pub fn read_pcd_with_header(bytes: &[u8]) -> Result<(PcdHeader, PointCloud)> {
    let (header, start) = parse_header(bytes)?;
    match header.data {
        DataMode::Binary => {}
        DataMode::Ascii => return Err(Error::UnsupportedFormat("PCD DATA ascii".into())),
        DataMode::BinaryCompressed => {
            return Err(Error::UnsupportedFormat(
                "PCD DATA binary_compressed".into(),
            ))
        }
    }
    let schema = header
        .schema()
        .map_err(|e| Error::malformed(0, e.to_string()))?;
    let expected = header
        .points
        .checked_mul(schema.record_size())
        .ok_or_else(|| Error::malformed(start, "declared payload size overflows"))?;
    let actual = bytes.len() - start;
    if actual != expected {
        return Err(Error::malformed(
            start,
            format!("payload is {actual} bytes, header declares {expected}"),
        ));
    }
    let cloud = PointCloud::new(Arc::new(schema), bytes[start..].to_vec())?;
    Ok((header, cloud))
}

pub fn read_pcd(bytes: &[u8]) -> Result<PointCloud> {
    read_pcd_with_header(bytes).map(|(_, c)| c)
}

/// Serializes `cloud` in binary mode. Version and viewpoint come from
/// `template` when given; the point count always follows the cloud.
pub fn write_pcd(cloud: &PointCloud, template: Option<&PcdHeader>) -> Vec<u8> {
    let mut header = PcdHeader::for_cloud(cloud);
    if let Some(t) = template {
        header.version = t.version.clone();
        header.viewpoint = t.viewpoint.clone();
    }
    let mut out = header.render().into_bytes();
    out.extend_from_slice(cloud.bytes());
    out
}
