use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use amrc::codec::decode_mesh;
use amrc::container::{post_passes, read_header};
use amrc::synth::generators;
use amrc::{
    compress_artifact, decompress_artifact, read_artifact, write_artifact, CompressionConfig, Criterion,
    CriterionKind, ErrorDomain, ErrorSpec, GridShape, Layout, Mode, ValueKind,
};

use crate::sidecar::SidecarMeta;
use crate::CliError;

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--{what}: cannot parse `{s}`")))
        })
        .collect()
}

/// Parses `a0:b0,a1:b1[,a2:b2]=bound`.
pub fn parse_domain(text: &str, kind: CriterionKind) -> Result<ErrorDomain, CliError> {
    let bad = || CliError::Usage(format!("invalid --domain `{text}`, expected e.g. 0:8,0:8=0.5"));
    let (boxes, bound) = text.split_once('=').ok_or_else(bad)?;
    let bound: f64 = bound.trim().parse().map_err(|_| bad())?;
    let ranges = boxes
        .split(',')
        .map(|r| {
            let (a, b) = r.split_once(':').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            Ok(a..b)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(ErrorDomain::new(ranges, Criterion::new(kind, bound)?)?)
}

pub struct CompressRequest {
    pub inputs: Vec<PathBuf>,
    pub meta: PathBuf,
    pub abs: Option<f64>,
    pub rel: Option<f64>,
    pub domains: Vec<String>,
    pub mode: String,
    pub split_axis: Option<usize>,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressReport {
    pub input_bytes: usize,
    pub output_bytes: usize,
    pub leaves: usize,
    pub iterations: usize,
    pub max_tracker: f64,
}

impl fmt::Display for CompressReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "input_bytes={} output_bytes={} ratio={:.3} leaves={} iterations={} max_tracker={}",
            self.input_bytes,
            self.output_bytes,
            self.input_bytes as f64 / self.output_bytes as f64,
            self.leaves,
            self.iterations,
            self.max_tracker
        )
    }
}

pub fn compress(req: &CompressRequest) -> Result<CompressReport, CliError> {
    let meta_text = String::from_utf8(read_file(&req.meta)?)
        .map_err(|_| CliError::Usage("sidecar is not UTF-8".into()))?;
    let meta: SidecarMeta = meta_text.parse()?;
    let shape = meta.shape()?;

    let default = match (req.abs, req.rel) {
        (Some(e), None) => Criterion::absolute(e)?,
        (None, Some(d)) => Criterion::relative(d)?,
        _ => return Err(CliError::Usage("give exactly one of --abs and --rel".into())),
    };
    let domains = req
        .domains
        .iter()
        .map(|d| parse_domain(d, default.kind()))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = ErrorSpec::new(default, domains)?;
    let mode: Mode = req.mode.parse()?;
    let config = CompressionConfig::new(spec)
        .with_mode(mode)
        .with_split_axis(req.split_axis)
        .with_packing(meta.packing)
        .with_value_kind(meta.value_kind);

    let mut fields = Vec::with_capacity(req.inputs.len());
    let mut input_bytes = 0;
    for path in &req.inputs {
        let raw = read_file(path)?;
        if raw.len() != meta.raw_len() {
            return Err(CliError::Data(format!(
                "{} holds {} bytes but dims {:?} of {} need {}",
                path.display(),
                raw.len(),
                meta.dims,
                meta.value_kind,
                meta.raw_len()
            )));
        }
        input_bytes += raw.len();
        fields.push(meta.value_kind.decode_all(&raw)?);
    }
    let refs: Vec<&[f64]> = fields.iter().map(Vec::as_slice).collect();
    let (artifact, stats) = compress_artifact(&refs, &shape, &config)?;
    let bytes = write_artifact(&artifact)?;
    write_file(&req.output, &bytes)?;
    Ok(CompressReport {
        input_bytes,
        output_bytes: bytes.len(),
        leaves: stats.leaf_count,
        iterations: stats.iterations,
        max_tracker: stats.max_tracker,
    })
}

pub fn decompress(input: &Path, output: &Path) -> Result<(), CliError> {
    let artifact = read_artifact(&read_file(input)?)?;
    let fields = decompress_artifact(&artifact)?;
    let mut out = Vec::new();
    for field in &fields {
        out.extend(artifact.value_kind.encode_all(field));
    }
    write_file(output, &out)
}

fn join_dims(dims: &[usize]) -> String {
    dims.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn info(input: &Path) -> Result<String, CliError> {
    let bytes = read_file(input)?;
    let (header, _) = read_header(&bytes)?;
    let artifact = read_artifact(&bytes)?;
    let mut s = String::new();
    let layout = match header.layout {
        Layout::Single(mode) => mode.name().to_string(),
        Layout::Split { axis } => format!("split (axis {axis}, one-for-one)"),
    };
    let packing = match header.packing {
        None => "none".to_string(),
        Some(p) => format!("scale_factor={} offset={}", p.scale_factor, p.offset),
    };
    let post_pass = post_passes()
        .names()
        .into_iter()
        .find(|n| post_passes().get(n).map(|p| p.id() == header.post_pass).unwrap_or(false))
        .unwrap_or("unknown");
    let _ = writeln!(s, "format: AMRC v{}", header.version);
    let _ = writeln!(s, "file_bytes: {}", bytes.len());
    let _ = writeln!(s, "dims: {}", join_dims(header.shape.extents()));
    if let Layout::Split { .. } = header.layout {
        let _ = writeln!(s, "original_dims: {}", join_dims(artifact.original_shape()?.extents()));
    }
    let _ = writeln!(s, "initial_level: {}", header.initial_level);
    let _ = writeln!(s, "value_kind: {}", header.value_kind);
    let _ = writeln!(s, "criterion: {} {}", header.criterion.kind(), header.criterion.bound());
    let _ = writeln!(s, "mode: {layout}");
    let _ = writeln!(s, "packing: {packing}");
    let _ = writeln!(s, "post_pass: {post_pass}");
    let _ = writeln!(s, "variables: {}", header.variable_count);
    let shared = header.layout == Layout::Single(Mode::OneForAll);
    let mut bit_total = 0;
    let mut payload_total = 0;
    for (i, var) in artifact.variables.iter().enumerate() {
        let mesh = decode_mesh(var, &artifact.shape)?;
        let hist = mesh
            .level_histogram()
            .iter()
            .map(|(l, n)| format!("{l}:{n}"))
            .collect::<Vec<_>>()
            .join(", ");
        let payload_bytes = var.payload.len() * artifact.value_kind.size();
        if !shared || i == 0 {
            bit_total += var.refinement.len();
        }
        payload_total += payload_bytes;
        let _ = writeln!(
            s,
            "variable {i}: leaves={} data_leaves={} levels: {{{hist}}} bitfield_bytes={} payload_bytes={payload_bytes}",
            mesh.len(),
            mesh.data_leaf_count(),
            var.refinement.len(),
        );
    }
    let _ = writeln!(s, "total: bitfield_bytes={bit_total} payload_bytes={payload_total}");
    Ok(s)
}

pub struct SweepRequest {
    pub generator: String,
    pub dims: Vec<usize>,
    pub errors: Vec<f64>,
    pub criterion: String,
    pub split_axis: Option<usize>,
    pub seed: u64,
}

pub fn sweep(req: &SweepRequest) -> Result<String, CliError> {
    let generator = generators().get(&req.generator)?;
    let shape = GridShape::new(&req.dims)?;
    let kind: CriterionKind = req.criterion.parse()?;
    let data = generator.generate(&shape, req.seed);
    let input_bytes = data.len() * ValueKind::F64.size();
    let mut out = String::from("error,bytes,ratio,max_observed_error\n");
    for &bound in &req.errors {
        let config = CompressionConfig::new(ErrorSpec::uniform(Criterion::new(kind, bound)?))
            .with_split_axis(req.split_axis);
        let (artifact, _) = compress_artifact(&[&data], &shape, &config)?;
        let bytes = write_artifact(&artifact)?.len();
        let back = decompress_artifact(&artifact)?.remove(0);
        let observed = data
            .iter()
            .zip(&back)
            .map(|(o, d)| match kind {
                CriterionKind::Absolute => (d - o).abs(),
                CriterionKind::Relative if *o != 0.0 => (d - o).abs() / o.abs(),
                CriterionKind::Relative => 0.0,
            })
            .fold(0.0, f64::max);
        let _ = writeln!(
            out,
            "{bound},{bytes},{:.4},{observed}",
            input_bytes as f64 / bytes as f64
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_syntax() {
        let d = parse_domain("0:8, 2:4=0.25", CriterionKind::Absolute).unwrap();
        assert_eq!(d.ranges, vec![0..8, 2..4]);
        assert_eq!(d.criterion.bound(), 0.25);
        assert!(parse_domain("0:8=", CriterionKind::Absolute).is_err());
        assert!(parse_domain("0-8,0:8=1", CriterionKind::Absolute).is_err());
        assert!(parse_domain("4:2,0:8=1", CriterionKind::Absolute).is_err());
        assert!(parse_domain("0:2,0:2=1.5", CriterionKind::Relative).is_err());
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list::<usize>("4, 5,6", "dims").unwrap(), vec![4, 5, 6]);
        assert!(parse_list::<f64>("1,x", "errors").is_err());
    }

    #[test]
    fn sweep_rows_respect_bounds() {
        let req = SweepRequest {
            generator: "smooth".into(),
            dims: vec![32, 32],
            errors: vec![0.0, 0.5, 2.0],
            criterion: "abs".into(),
            split_axis: None,
            seed: 1,
        };
        let table = sweep(&req).unwrap();
        let rows: Vec<Vec<f64>> = table
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r[3] <= r[0]);
        }
        assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
    }
}
