use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Storage type of grid values and payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    F32,
    F64,
    I16,
    I32,
}

impl ValueKind {
    pub const ALL: [ValueKind; 4] = [ValueKind::F32, ValueKind::F64, ValueKind::I16, ValueKind::I32];

    pub fn id(self) -> u8 {
        match self {
            ValueKind::F32 => 0,
            ValueKind::F64 => 1,
            ValueKind::I16 => 2,
            ValueKind::I32 => 3,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        ValueKind::ALL.into_iter().find(|k| k.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            ValueKind::F32 => "f32",
            ValueKind::F64 => "f64",
            ValueKind::I16 => "i16",
            ValueKind::I32 => "i32",
        }
    }

    /// Bytes per stored value.
    pub fn size(self) -> usize {
        match self {
            ValueKind::F32 => 4,
            ValueKind::F64 => 8,
            ValueKind::I16 => 2,
            ValueKind::I32 => 4,
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, ValueKind::I16 | ValueKind::I32)
    }

    fn int_range(self) -> (f64, f64) {
        match self {
            ValueKind::I16 => (i16::MIN as f64, i16::MAX as f64),
            ValueKind::I32 => (i32::MIN as f64, i32::MAX as f64),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Nearest value this kind can store (ties to even for integers).
    pub fn quantize(self, v: f64) -> f64 {
        match self {
            ValueKind::F64 => v,
            ValueKind::F32 => v as f32 as f64,
            ValueKind::I16 | ValueKind::I32 => {
                let (lo, hi) = self.int_range();
                v.round_ties_even().clamp(lo, hi)
            }
        }
    }

    /// True when `v` is finite and stored exactly by this kind.
    pub fn represents(self, v: f64) -> bool {
        v.is_finite() && self.quantize(v) == v
    }

    pub fn validate(self, values: &[f64]) -> Result<()> {
        match values.iter().position(|&v| !self.represents(v)) {
            None => Ok(()),
            Some(i) => Err(Error::Data(format!(
                "value {} at position {i} is not a finite {} value",
                values[i],
                self.name()
            ))),
        }
    }

    pub fn write_le(self, v: f64, out: &mut Vec<u8>) {
        match self {
            ValueKind::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            ValueKind::F64 => out.extend_from_slice(&v.to_le_bytes()),
            ValueKind::I16 => out.extend_from_slice(&(v as i16).to_le_bytes()),
            ValueKind::I32 => out.extend_from_slice(&(v as i32).to_le_bytes()),
        }
    }

    /// Decodes one value from exactly [`ValueKind::size`] bytes.
    pub fn read_le(self, bytes: &[u8]) -> f64 {
        match self {
            ValueKind::F32 => f32::from_le_bytes(bytes.try_into().unwrap()) as f64,
            ValueKind::F64 => f64::from_le_bytes(bytes.try_into().unwrap()),
            ValueKind::I16 => i16::from_le_bytes(bytes.try_into().unwrap()) as f64,
            ValueKind::I32 => i32::from_le_bytes(bytes.try_into().unwrap()) as f64,
        }
    }

    pub fn encode_all(self, values: &[f64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(values.len() * self.size());
        for &v in values {
            self.write_le(v, &mut out);
        }
        out
    }

    pub fn decode_all(self, bytes: &[u8]) -> Result<Vec<f64>> {
        if !bytes.len().is_multiple_of(self.size()) {
            return Err(Error::Shape(format!(
                "{} bytes is not a whole number of {} values",
                bytes.len(),
                self.name()
            )));
        }
        Ok(bytes.chunks_exact(self.size()).map(|c| self.read_le(c)).collect())
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ValueKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ValueKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown value kind `{s}`")))
    }
}
