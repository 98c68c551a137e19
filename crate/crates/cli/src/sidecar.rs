//! `key=value` metadata describing a raw input array.

use std::str::FromStr;

use amrc::{GridShape, Packing, ValueKind};

use crate::CliError;

pub const ROW_MAJOR: &str = "row-major-last-fastest";

#[derive(Debug, Clone, PartialEq)]
pub struct SidecarMeta {
    pub dims: Vec<usize>,
    pub value_kind: ValueKind,
    pub packing: Option<Packing>,
}

impl SidecarMeta {
    pub fn shape(&self) -> Result<GridShape, CliError> {
        GridShape::new(&self.dims).map_err(|e| CliError::Usage(format!("sidecar dims: {e}")))
    }

    /// Expected raw file size for one variable.
    pub fn raw_len(&self) -> usize {
        self.dims.iter().product::<usize>() * self.value_kind.size()
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("sidecar key `{key}`: cannot parse `{value}`")))
}

impl FromStr for SidecarMeta {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let mut dims = None;
        let mut value_kind = None;
        let mut scale = None;
        let mut offset = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("sidecar line {}: expected key=value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dims" => {
                    let parsed = value
                        .split(',')
                        .map(|d| number::<usize>(key, d.trim()))
                        .collect::<Result<Vec<_>, _>>()?;
                    dims = Some(parsed);
                }
                "value_kind" => {
                    value_kind = Some(
                        value
                            .parse::<ValueKind>()
                            .map_err(|e| CliError::Usage(format!("sidecar: {e}")))?,
                    )
                }
                "order" => {
                    if value != ROW_MAJOR {
                        return Err(CliError::Usage(format!(
                            "sidecar order `{value}` is not supported, use `{ROW_MAJOR}`"
                        )));
                    }
                }
                "scale_factor" => scale = Some(number::<f64>(key, value)?),
                "offset" => offset = Some(number::<f64>(key, value)?),
                "missing_value" => {
                    return Err(CliError::Usage(
                        "missing values inside the data domain are not supported".into(),
                    ))
                }
                other => return Err(CliError::Usage(format!("unknown sidecar key `{other}`"))),
            }
        }
        let dims = dims.ok_or_else(|| CliError::Usage("sidecar lacks `dims`".into()))?;
        let value_kind = value_kind.ok_or_else(|| CliError::Usage("sidecar lacks `value_kind`".into()))?;
        let packing = match (scale, offset) {
            (None, None) => None,
            (None, Some(_)) => return Err(CliError::Usage("`offset` given without `scale_factor`".into())),
            (Some(s), o) => Some(Packing::new(s, o.unwrap_or(0.0)).map_err(|e| CliError::Usage(e.to_string()))?),
        };
        let meta = SidecarMeta {
            dims,
            value_kind,
            packing,
        };
        meta.shape()?;
        Ok(meta)
    }
}
