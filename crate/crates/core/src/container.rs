//! On-disk artifact format (`.amrc`).
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic      4  "AMRC"
//! version    1  = 1
//! dim        1  2 | 3
//! extents    dim x 8   (u64, array axis order)
//! init_level 1
//! value_kind 1  0=f32 1=f64 2=i16 3=i32
//! criterion  1 + 8     kind (0=abs 1=rel), bound (f64)
//! mode       1  low nibble: 0=one-for-one 1=one-for-all; high nibble: split axis + 1
//! packing    1 + 8 + 8 flag, scale_factor, offset (zeros when the flag is 0)
//! post_pass  1  0=identity
//! var_count  2  (u16)
//! ```
//!
//! The body follows: per variable a bit-field section (`u32` byte length + bytes)
//! and a payload section (`u32` value count + values). One-for-all artifacts store
//! the shared bit-field section once, before all payload sections. The post-pass
//! transforms the body as a whole.

use std::sync::Arc;

use crate::codec::{Artifact, CompressedVariable, Layout, Mode, Packing, ValueKind};
use crate::criteria::{Criterion, CriterionKind};
use crate::error::{Error, Result};
use crate::forest::GridShape;
use crate::registry::Registry;

pub const MAGIC: [u8; 4] = *b"AMRC";
pub const VERSION: u8 = 1;
pub const FILE_EXTENSION: &str = "amrc";

/// Lossless byte transform applied to the artifact body.
pub trait PostPass: Send + Sync {
    fn id(&self) -> u8;
    fn name(&self) -> &'static str;
    fn encode(&self, body: Vec<u8>) -> Result<Vec<u8>>;
    fn decode(&self, body: &[u8]) -> Result<Vec<u8>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPass;

impl PostPass for IdentityPass {
    fn id(&self) -> u8 {
        0
    }

    fn name(&self) -> &'static str {
        "identity"
    }

    fn encode(&self, body: Vec<u8>) -> Result<Vec<u8>> {
        Ok(body)
    }

    fn decode(&self, body: &[u8]) -> Result<Vec<u8>> {
        Ok(body.to_vec())
    }
}

pub fn post_passes() -> Registry<dyn PostPass> {
    let mut r: Registry<dyn PostPass> = Registry::new("post-pass");
    r.register("identity", Arc::new(IdentityPass));
    r
}

fn post_pass_by_id(id: u8) -> Option<Arc<dyn PostPass>> {
    let registry = post_passes();
    registry
        .names()
        .into_iter()
        .filter_map(|n| registry.get(n).ok())
        .find(|p| p.id() == id)
}

/// Decoded fixed-size header.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactHeader {
    pub version: u8,
    pub shape: GridShape,
    pub initial_level: u8,
    pub value_kind: ValueKind,
    pub criterion: Criterion,
    pub layout: Layout,
    pub packing: Option<Packing>,
    pub post_pass: u8,
    pub variable_count: u16,
}

impl ArtifactHeader {
    pub fn encoded_len(&self) -> usize {
        4 + 1 + 1 + 8 * self.shape.extents().len() + 1 + 1 + 9 + 1 + 17 + 1 + 2
    }

    fn shares_mesh(&self) -> bool {
        self.layout == Layout::Single(Mode::OneForAll)
    }
}

fn layout_byte(layout: Layout) -> u8 {
    match layout {
        Layout::Single(Mode::OneForOne) => 0,
        Layout::Single(Mode::OneForAll) => 1,
        Layout::Split { axis } => ((axis as u8 + 1) << 4) & 0xf0,
    }
}

fn layout_from_byte(b: u8, dim: usize) -> Option<Layout> {
    match (b >> 4, b & 0x0f) {
        (0, 0) => Some(Layout::Single(Mode::OneForOne)),
        (0, 1) => Some(Layout::Single(Mode::OneForAll)),
        // split slices are 2D cut from a 3D field
        (s @ 1..=3, 0) if dim == 2 => Some(Layout::Split { axis: s as usize - 1 }),
        _ => None,
    }
}

pub fn header_of(artifact: &Artifact) -> Result<ArtifactHeader> {
    Ok(ArtifactHeader {
        version: VERSION,
        shape: artifact.shape.clone(),
        initial_level: artifact.shape.initial_level(),
        value_kind: artifact.value_kind,
        criterion: artifact.criterion,
        layout: artifact.layout,
        packing: artifact.packing,
        post_pass: artifact.post_pass,
        variable_count: u16::try_from(artifact.variables.len())
            .map_err(|_| Error::Encode("more than 65535 variables".into()))?,
    })
}

pub fn write_artifact(artifact: &Artifact) -> Result<Vec<u8>> {
    let header = header_of(artifact)?;
    if artifact.variables.is_empty() {
        return Err(Error::Encode("artifact holds no variables".into()));
    }
    if let Layout::Split { axis } = artifact.layout {
        if artifact.shape.extents().len() != 2 || axis > 2 {
            return Err(Error::Encode(format!(
                "split layout along axis {axis} needs 2D slices"
            )));
        }
    }
    let pass = post_pass_by_id(artifact.post_pass)
        .ok_or_else(|| Error::Unsupported(format!("post-pass id {}", artifact.post_pass)))?;

    let mut out = Vec::with_capacity(header.encoded_len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(artifact.shape.extents().len() as u8);
    for &e in artifact.shape.extents() {
        out.extend_from_slice(&(e as u64).to_le_bytes());
    }
    out.push(header.initial_level);
    out.push(artifact.value_kind.id());
    out.push(match artifact.criterion.kind() {
        CriterionKind::Absolute => 0,
        CriterionKind::Relative => 1,
    });
    out.extend_from_slice(&artifact.criterion.bound().to_le_bytes());
    out.push(layout_byte(artifact.layout));
    match artifact.packing {
        None => {
            out.push(0);
            out.extend_from_slice(&[0u8; 16]);
        }
        Some(p) => {
            out.push(1);
            out.extend_from_slice(&p.scale_factor.to_le_bytes());
            out.extend_from_slice(&p.offset.to_le_bytes());
        }
    }
    out.push(artifact.post_pass);
    out.extend_from_slice(&header.variable_count.to_le_bytes());

    let mut body = Vec::new();
    let kind = artifact.value_kind;
    let write_bits = |body: &mut Vec<u8>, bits: &[u8]| -> Result<()> {
        let len = u32::try_from(bits.len()).map_err(|_| Error::Encode("bit-field too long".into()))?;
        body.extend_from_slice(&len.to_le_bytes());
        body.extend_from_slice(bits);
        Ok(())
    };
    let write_payload = |body: &mut Vec<u8>, payload: &[f64]| -> Result<()> {
        if let Some(v) = payload.iter().find(|v| !kind.represents(**v)) {
            return Err(Error::Encode(format!("payload value {v} is not a finite {kind}")));
        }
        let count = u32::try_from(payload.len()).map_err(|_| Error::Encode("payload too long".into()))?;
        body.extend_from_slice(&count.to_le_bytes());
        for &v in payload {
            kind.write_le(v, body);
        }
        Ok(())
    };
    if header.shares_mesh() {
        let shared = &artifact.variables[0].refinement;
        if artifact.variables.iter().any(|v| &v.refinement != shared) {
            return Err(Error::Encode("one-for-all variables must share one mesh".into()));
        }
        write_bits(&mut body, shared)?;
        for v in &artifact.variables {
            write_payload(&mut body, &v.payload)?;
        }
    } else {
        for v in &artifact.variables {
            write_bits(&mut body, &v.refinement)?;
            write_payload(&mut body, &v.payload)?;
        }
    }
    out.extend(pass.encode(body)?);
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    /// Offset of `bytes[0]` within the file.
    base: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8], base: usize) -> Self {
        Cursor { bytes, pos: 0, base }
    }

    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn err(&self, section: &'static str, message: impl Into<String>) -> Error {
        Error::CorruptArtifact {
            offset: self.offset(),
            section,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize, section: &'static str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err(
                section,
                format!("truncated: need {n} bytes, {} left", self.bytes.len() - self.pos),
            ));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self, section: &'static str) -> Result<u8> {
        Ok(self.take(1, section)?[0])
    }

    fn u16(&mut self, section: &'static str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, section)?.try_into().unwrap()))
    }

    fn u32(&mut self, section: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().unwrap()))
    }

    fn u64(&mut self, section: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, section)?.try_into().unwrap()))
    }

    fn f64(&mut self, section: &'static str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, section)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Parses the fixed header; returns it with the offset where the body starts.
pub fn read_header(bytes: &[u8]) -> Result<(ArtifactHeader, usize)> {
    let mut c = Cursor::new(bytes, 0);
    let magic = c.take(4, "header")?;
    if magic != MAGIC {
        return Err(Error::CorruptArtifact {
            offset: 0,
            section: "header",
            message: format!("bad magic {magic:02x?}"),
        });
    }
    let version = c.u8("header")?;
    if version != VERSION {
        return Err(c.err("header", format!("unsupported version {version}")));
    }
    let dim = c.u8("header")? as usize;
    if dim != 2 && dim != 3 {
        return Err(c.err("header", format!("dimension {dim} is not 2 or 3")));
    }
    let mut extents = Vec::with_capacity(dim);
    for _ in 0..dim {
        let e = c.u64("header")?;
        extents.push(usize::try_from(e).map_err(|_| c.err("header", format!("extent {e} too large")))?);
    }
    let shape = GridShape::new(&extents).map_err(|e| c.err("header", e.to_string()))?;
    let initial_level = c.u8("header")?;
    if initial_level != shape.initial_level() {
        return Err(c.err(
            "header",
            format!(
                "initial level {initial_level} does not match extents (expected {})",
                shape.initial_level()
            ),
        ));
    }
    let kind_id = c.u8("header")?;
    let value_kind = ValueKind::from_id(kind_id)
        .ok_or_else(|| c.err("header", format!("unknown value kind {kind_id}")))?;
    let criterion_kind = match c.u8("header")? {
        0 => CriterionKind::Absolute,
        1 => CriterionKind::Relative,
        other => return Err(c.err("header", format!("unknown criterion kind {other}"))),
    };
    let bound = c.f64("header")?;
    let criterion = Criterion::new(criterion_kind, bound).map_err(|e| c.err("header", e.to_string()))?;
    let mode = c.u8("header")?;
    let layout = layout_from_byte(mode, dim)
        .ok_or_else(|| c.err("header", format!("unknown mode byte {mode:#04x}")))?;
    let flag = c.u8("header")?;
    let scale = c.f64("header")?;
    let offset = c.f64("header")?;
    let packing = match flag {
        0 if scale.to_bits() == 0 && offset.to_bits() == 0 => None,
        0 => return Err(c.err("header", "packing fields set without the packing flag")),
        1 => Some(Packing::new(scale, offset).map_err(|e| c.err("header", e.to_string()))?),
        other => return Err(c.err("header", format!("bad packing flag {other}"))),
    };
    let post_pass = c.u8("header")?;
    if post_pass_by_id(post_pass).is_none() {
        return Err(Error::Unsupported(format!("post-pass id {post_pass}")));
    }
    let variable_count = c.u16("header")?;
    if variable_count == 0 {
        return Err(c.err("header", "artifact holds no variables"));
    }
    let header = ArtifactHeader {
        version,
        shape,
        initial_level,
        value_kind,
        criterion,
        layout,
        packing,
        post_pass,
        variable_count,
    };
    Ok((header, c.offset()))
}

pub fn read_artifact(bytes: &[u8]) -> Result<Artifact> {
    let (header, body_start) = read_header(bytes)?;
    let pass = post_pass_by_id(header.post_pass).expect("validated by read_header");
    let body = pass.decode(&bytes[body_start..])?;
    let mut c = Cursor::new(&body, body_start);
    let kind = header.value_kind;

    let read_bits = |c: &mut Cursor| -> Result<Vec<u8>> {
        let len = c.u32("bit-field")? as usize;
        if len > c.remaining() {
            return Err(c.err("bit-field", format!("length {len} exceeds the {} remaining bytes", c.remaining())));
        }
        Ok(c.take(len, "bit-field")?.to_vec())
    };
    let read_payload = |c: &mut Cursor| -> Result<Vec<f64>> {
        let count = c.u32("payload")? as usize;
        let need = count.saturating_mul(kind.size());
        if need > c.remaining() {
            return Err(c.err(
                "payload",
                format!("truncated: {count} values need {need} bytes, {} left", c.remaining()),
            ));
        }
        let raw = c.take(need, "payload")?;
        let values = kind.decode_all(raw)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::CorruptArtifact {
                offset: c.offset() - need + i * kind.size(),
                section: "payload",
                message: "non-finite payload value".into(),
            });
        }
        Ok(values)
    };

    let n = header.variable_count as usize;
    let mut variables = Vec::with_capacity(n);
    if header.shares_mesh() {
        let shared = read_bits(&mut c)?;
        for _ in 0..n {
            variables.push(CompressedVariable {
                refinement: shared.clone(),
                payload: read_payload(&mut c)?,
            });
        }
    } else {
        for _ in 0..n {
            let refinement = read_bits(&mut c)?;
            let payload = read_payload(&mut c)?;
            variables.push(CompressedVariable { refinement, payload });
        }
    }
    if c.remaining() != 0 {
        return Err(c.err("trailer", format!("{} trailing bytes", c.remaining())));
    }
    Ok(Artifact {
        shape: header.shape,
        value_kind: header.value_kind,
        criterion: header.criterion,
        layout: header.layout,
        packing: header.packing,
        post_pass: header.post_pass,
        variables,
    })
}
