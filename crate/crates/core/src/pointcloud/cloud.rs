use std::sync::Arc;

use crate::error::{Error, Result};

/// Storage type of one field element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    F32,
    F64,
    I8,
    I16,
    I32,
    I64,
    U8,
    U16,
    U32,
    U64,
}

impl ScalarKind {
    pub fn width(self) -> usize {
        match self {
            ScalarKind::I8 | ScalarKind::U8 => 1,
            ScalarKind::I16 | ScalarKind::U16 => 2,
            ScalarKind::F32 | ScalarKind::I32 | ScalarKind::U32 => 4,
            ScalarKind::F64 | ScalarKind::I64 | ScalarKind::U64 => 8,
        }
    }

    /// Kind for a PCD `TYPE` letter and `SIZE`.
    pub fn from_pcd(tag: &str, size: usize) -> Option<Self> {
        Some(match (tag, size) {
            ("F", 4) => ScalarKind::F32,
            ("F", 8) => ScalarKind::F64,
            ("I", 1) => ScalarKind::I8,
            ("I", 2) => ScalarKind::I16,
            ("I", 4) => ScalarKind::I32,
            ("I", 8) => ScalarKind::I64,
            ("U", 1) => ScalarKind::U8,
            ("U", 2) => ScalarKind::U16,
            ("U", 4) => ScalarKind::U32,
            ("U", 8) => ScalarKind::U64,
            _ => return None,
        })
    }

    pub fn pcd_tag(self) -> char {
        match self {
            ScalarKind::F32 | ScalarKind::F64 => 'F',
            ScalarKind::I8 | ScalarKind::I16 | ScalarKind::I32 | ScalarKind::I64 => 'I',
            _ => 'U',
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, ScalarKind::F32 | ScalarKind::F64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    pub kind: ScalarKind,
    /// Elements per point (PCD `COUNT`).
    pub count: usize,
}

impl Field {
    pub fn new(name: impl Into<String>, kind: ScalarKind) -> Self {
        Self {
            name: name.into(),
            kind,
            count: 1,
        }
    }

    pub fn byte_width(&self) -> usize {
        self.kind.width() * self.count
    }
}

/// Byte offsets of the float coordinate fields inside a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpatialLayout {
    pub offsets: [usize; 3],
    pub kinds: [ScalarKind; 3],
}

impl SpatialLayout {
    #[inline]
    pub fn read(&self, record: &[u8]) -> [f64; 3] {
        std::array::from_fn(|a| read_float(self.kinds[a], &record[self.offsets[a]..]))
    }

    #[inline]
    pub fn write(&self, record: &mut [u8], xyz: [f64; 3]) {
        for a in 0..3 {
            write_float(self.kinds[a], &mut record[self.offsets[a]..], xyz[a]);
        }
    }

    /// True if `byte` (record offset) belongs to x, y or z.
    pub fn covers(&self, byte: usize) -> bool {
        (0..3).any(|a| (self.offsets[a]..self.offsets[a] + self.kinds[a].width()).contains(&byte))
    }
}

#[inline]
fn read_float(kind: ScalarKind, b: &[u8]) -> f64 {
    match kind {
        ScalarKind::F32 => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        ScalarKind::F64 => f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]),
        _ => unreachable!("spatial fields are validated as float"),
    }
}

#[inline]
fn write_float(kind: ScalarKind, b: &mut [u8], v: f64) {
    match kind {
        ScalarKind::F32 => b[..4].copy_from_slice(&(v as f32).to_le_bytes()),
        ScalarKind::F64 => b[..8].copy_from_slice(&v.to_le_bytes()),
        _ => unreachable!("spatial fields are validated as float"),
    }
}

/// Ordered field list with precomputed offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    fields: Vec<Field>,
    offsets: Vec<usize>,
    record_size: usize,
}

impl Schema {
    pub fn new(fields: Vec<Field>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(fields.len());
        let mut size = 0usize;
        for (i, f) in fields.iter().enumerate() {
            if f.count == 0 {
                return Err(Error::Input(format!("field `{}` has zero count", f.name)));
            }
            if fields[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::Input(format!("duplicate field `{}`", f.name)));
            }
            offsets.push(size);
            size = size
                .checked_add(f.byte_width())
                .ok_or_else(|| Error::Input("record size overflows".into()))?;
        }
        if size == 0 {
            return Err(Error::Input("schema has no fields".into()));
        }
        Ok(Self {
            fields,
            offsets,
            record_size: size,
        })
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn record_size(&self) -> usize {
        self.record_size
    }

    pub fn field(&self, name: &str) -> Option<(usize, &Field)> {
        self.fields
            .iter()
            .position(|f| f.name == name)
            .map(|i| (self.offsets[i], &self.fields[i]))
    }

    /// Locates scalar float fields `x`, `y`, `z`.
    pub fn spatial(&self) -> Result<SpatialLayout> {
        let mut offsets = [0; 3];
        let mut kinds = [ScalarKind::F32; 3];
        for (a, name) in ["x", "y", "z"].into_iter().enumerate() {
            let (off, f) = self
                .field(name)
                .ok_or_else(|| Error::Input(format!("point schema lacks field `{name}`")))?;
            if !f.kind.is_float() || f.count != 1 {
                return Err(Error::Input(format!(
                    "field `{name}` must be a scalar float, found {:?} x{}",
                    f.kind, f.count
                )));
            }
            offsets[a] = off;
            kinds[a] = f.kind;
        }
        Ok(SpatialLayout { offsets, kinds })
    }

    /// Five float32 fields of a flat LiDAR sweep: x, y, z, intensity, ring.
    pub fn lidar_xyzir() -> Self {
        Self::new(
            ["x", "y", "z", "intensity", "ring"]
                .into_iter()
                .map(|n| Field::new(n, ScalarKind::F32))
                .collect(),
        )
        .expect("static schema is valid")
    }
}

/// Points stored as contiguous fixed-size little-endian records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointCloud {
    schema: Arc<Schema>,
    records: Vec<u8>,
}

impl PointCloud {
    pub fn new(schema: Arc<Schema>, records: Vec<u8>) -> Result<Self> {
        if !records.len().is_multiple_of(schema.record_size()) {
            return Err(Error::Input(format!(
                "payload of {} bytes is not a multiple of the {}-byte record",
                records.len(),
                schema.record_size()
            )));
        }
        Ok(Self { schema, records })
    }

    pub fn empty(schema: Arc<Schema>) -> Self {
        Self {
            schema,
            records: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.records.len() / self.schema.record_size()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn bytes(&self) -> &[u8] {
        &self.records
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.records
    }

    pub fn record(&self, i: usize) -> &[u8] {
        let n = self.schema.record_size();
        &self.records[i * n..(i + 1) * n]
    }

    pub fn records(&self) -> std::slice::ChunksExact<'_, u8> {
        self.records.chunks_exact(self.schema.record_size())
    }

    /// Coordinates of every point, in order.
    pub fn positions(&self) -> Result<Vec<[f64; 3]>> {
        let layout = self.schema.spatial()?;
        Ok(self.records().map(|r| layout.read(r)).collect())
    }

    /// Records whose index satisfies `keep`, in their original order.
    pub fn retain_indices(&self, mut keep: impl FnMut(usize) -> bool) -> PointCloud {
        let mut out = Vec::with_capacity(self.records.len());
        for (i, r) in self.records().enumerate() {
            if keep(i) {
                out.extend_from_slice(r);
            }
        }
        PointCloud {
            schema: Arc::clone(&self.schema),
            records: out,
        }
    }

    /// Records at ascending `indices`.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut out = Vec::with_capacity(indices.len() * self.schema.record_size());
        for &i in indices {
            out.extend_from_slice(self.record(i));
        }
        PointCloud {
            schema: Arc::clone(&self.schema),
            records: out,
        }
    }

    pub(crate) fn records_mut(&mut self) -> &mut [u8] {
        &mut self.records
    }

    /// Builds a cloud from xyz positions; extra fields are zero.
    pub fn from_positions(schema: Arc<Schema>, points: &[[f64; 3]]) -> Result<Self> {
        let layout = schema.spatial()?;
        let n = schema.record_size();
        let mut records = vec![0u8; n * points.len()];
        for (rec, p) in records.chunks_exact_mut(n).zip(points) {
            layout.write(rec, *p);
        }
        Ok(Self { schema, records })
    }
}
