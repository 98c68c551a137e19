//! Compression driver and decompression.

mod engine;
mod value;

pub use engine::Coarsener;
pub use value::ValueKind;

use std::sync::Arc;

use crate::criteria::{ArithmeticMean, Criterion, CriterionKind, ErrorSpec, Interpolator};
use crate::error::{Error, Result};
use crate::forest::{ForestMesh, GridShape};

/// How several variables relate to meshes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Every variable gets its own mesh.
    #[default]
    OneForOne,
    /// One mesh shared by all variables; a family coarsens only if every variable allows it.
    OneForAll,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::OneForOne => "one-for-one",
            Mode::OneForAll => "one-for-all",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-for-one" => Ok(Mode::OneForOne),
            "one-for-all" => Ok(Mode::OneForAll),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Affine packing `physical = scale_factor * packed + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packing {
    pub scale_factor: f64,
    pub offset: f64,
}

impl Packing {
    pub fn new(scale_factor: f64, offset: f64) -> Result<Self> {
        if !(scale_factor.is_finite() && scale_factor > 0.0) {
            return Err(Error::Config(format!(
                "scale factor must be positive, got {scale_factor}"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::Config(format!("offset must be finite, got {offset}")));
        }
        Ok(Packing {
            scale_factor,
            offset,
        })
    }

    pub fn unpack(&self, packed: f64) -> f64 {
        self.scale_factor * packed + self.offset
    }
}

/// Absolute bound in packed units for a bound given in physical units.
pub fn packed_bound(unpacked: f64, scale_factor: f64) -> Result<f64> {
    if !(scale_factor.is_finite() && scale_factor > 0.0) {
        return Err(Error::Config(format!(
            "scale factor must be positive, got {scale_factor}"
        )));
    }
    Ok(unpacked / scale_factor)
}

#[derive(Clone)]
pub struct CompressionConfig {
    pub spec: ErrorSpec,
    pub mode: Mode,
    /// Compress a 3D field as independent 2D slices along this array axis.
    pub split_axis: Option<usize>,
    /// Data is packed; the spec holds physical (unpacked) bounds.
    pub packing: Option<Packing>,
    pub value_kind: ValueKind,
    pub interpolator: Arc<dyn Interpolator>,
}

impl CompressionConfig {
    pub fn new(spec: ErrorSpec) -> Self {
        CompressionConfig {
            spec,
            mode: Mode::OneForOne,
            split_axis: None,
            packing: None,
            value_kind: ValueKind::F64,
            interpolator: Arc::new(ArithmeticMean),
        }
    }

    pub fn absolute(bound: f64) -> Result<Self> {
        Ok(CompressionConfig::new(ErrorSpec::uniform(Criterion::absolute(bound)?)))
    }

    pub fn relative(bound: f64) -> Result<Self> {
        Ok(CompressionConfig::new(ErrorSpec::uniform(Criterion::relative(bound)?)))
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_split_axis(mut self, axis: Option<usize>) -> Self {
        self.split_axis = axis;
        self
    }

    pub fn with_packing(mut self, packing: Option<Packing>) -> Self {
        self.packing = packing;
        self
    }

    pub fn with_value_kind(mut self, kind: ValueKind) -> Self {
        self.value_kind = kind;
        self
    }

    /// Error spec in the units the data is stored in.
    pub fn working_spec(&self) -> Result<ErrorSpec> {
        match self.packing {
            None => Ok(self.spec.clone()),
            Some(p) => {
                if self.spec.kind() == CriterionKind::Relative {
                    return Err(Error::Config(
                        "relative bounds cannot be carried over to packed data".into(),
                    ));
                }
                self.spec.scaled_down(p.scale_factor)
            }
        }
    }
}

/// Arrangement of variables inside an artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Single(Mode),
    /// One 3D field stored as 2D slices along `axis`, compressed one-for-one.
    Split { axis: usize },
}

/// Refinement bits and payload of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedVariable {
    /// Level-wise refinement bit-field (byte-padded per level).
    pub refinement: Vec<u8>,
    /// Non-dummy leaf values in SFC order.
    pub payload: Vec<f64>,
}

/// Everything needed to reconstruct the compressed fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// Grid of every stored variable (the slice grid for split artifacts).
    pub shape: GridShape,
    pub value_kind: ValueKind,
    /// Default criterion as requested, in physical units.
    pub criterion: Criterion,
    pub layout: Layout,
    pub packing: Option<Packing>,
    pub post_pass: u8,
    pub variables: Vec<CompressedVariable>,
}

impl Artifact {
    pub fn payload_values(&self) -> usize {
        self.variables.iter().map(|v| v.payload.len()).sum()
    }

    /// Grid of the field before splitting, or the stored grid.
    pub fn original_shape(&self) -> Result<GridShape> {
        match self.layout {
            Layout::Single(_) => Ok(self.shape.clone()),
            Layout::Split { axis } => {
                let mut ext = self.shape.extents().to_vec();
                if axis > ext.len() {
                    return Err(Error::Config(format!("split axis {axis} out of range")));
                }
                ext.insert(axis, self.variables.len());
                GridShape::new(&ext)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompressionStats {
    pub iterations: usize,
    pub leaf_count: usize,
    pub payload_values: usize,
    /// Largest tracker in storage units.
    pub max_tracker: f64,
}

impl CompressionStats {
    fn absorb(&mut self, other: &CompressionStats) {
        self.iterations = self.iterations.max(other.iterations);
        self.leaf_count += other.leaf_count;
        self.payload_values += other.payload_values;
        self.max_tracker = self.max_tracker.max(other.max_tracker);
    }
}

fn run_shared(
    shape: &GridShape,
    fields: &[&[f64]],
    spec: &ErrorSpec,
    config: &CompressionConfig,
) -> Result<(Vec<CompressedVariable>, CompressionStats)> {
    let mut engine = Coarsener::new(
        shape,
        fields,
        spec.clone(),
        config.value_kind,
        Arc::clone(&config.interpolator),
    )?;
    engine.run()?;
    let iterations = engine.iterations();
    let max_tracker = engine.max_tracker();
    let (mesh, values, _) = engine.into_parts();
    let refinement = mesh.serialize_refinement();
    let vars: Vec<_> = values
        .iter()
        .map(|v| CompressedVariable {
            refinement: refinement.clone(),
            payload: mesh.gather_payload(v),
        })
        .collect();
    let stats = CompressionStats {
        iterations,
        leaf_count: mesh.len(),
        payload_values: vars.iter().map(|v| v.payload.len()).sum(),
        max_tracker,
    };
    Ok((vars, stats))
}

/// Compresses a single field.
pub fn compress(
    values: &[f64],
    shape: &GridShape,
    config: &CompressionConfig,
) -> Result<(CompressedVariable, CompressionStats)> {
    let spec = config.working_spec()?;
    let (mut vars, stats) = run_shared(shape, &[values], &spec, config)?;
    Ok((vars.pop().expect("one variable in, one out"), stats))
}

/// Compresses several fields on one grid according to `config.mode`.
pub fn compress_many(
    fields: &[&[f64]],
    shape: &GridShape,
    config: &CompressionConfig,
) -> Result<(Vec<CompressedVariable>, CompressionStats)> {
    let spec = config.working_spec()?;
    if let Some(i) = fields.iter().position(|f| f.len() != shape.len()) {
        return Err(Error::Config(format!(
            "variable {i} has {} values, the shared grid needs {}",
            fields[i].len(),
            shape.len()
        )));
    }
    match config.mode {
        Mode::OneForAll => run_shared(shape, fields, &spec, config),
        Mode::OneForOne => {
            let mut vars = Vec::with_capacity(fields.len());
            let mut stats = CompressionStats::default();
            for field in fields {
                let (mut v, s) = run_shared(shape, &[field], &spec, config)?;
                vars.append(&mut v);
                stats.absorb(&s);
            }
            Ok((vars, stats))
        }
    }
}

/// Compresses fields into a complete artifact, honouring mode, split axis and packing.
pub fn compress_artifact(
    fields: &[&[f64]],
    shape: &GridShape,
    config: &CompressionConfig,
) -> Result<(Artifact, CompressionStats)> {
    let (stored_shape, layout, vars, stats) = match config.split_axis {
        None => {
            let (vars, stats) = compress_many(fields, shape, config)?;
            (shape.clone(), Layout::Single(config.mode), vars, stats)
        }
        Some(axis) => {
            if fields.len() != 1 {
                return Err(Error::Config(
                    "splitting along an axis takes exactly one variable".into(),
                ));
            }
            if config.mode != Mode::OneForOne {
                return Err(Error::Config("split slices are compressed one-for-one".into()));
            }
            let (slice_shape, slices) = split_axis(fields[0], shape, axis)?;
            let refs: Vec<&[f64]> = slices.iter().map(Vec::as_slice).collect();
            let (vars, stats) = compress_many(&refs, &slice_shape, config)?;
            (slice_shape, Layout::Split { axis }, vars, stats)
        }
    };
    if vars.len() > u16::MAX as usize {
        return Err(Error::Config(format!("{} variables exceed the container limit", vars.len())));
    }
    Ok((
        Artifact {
            shape: stored_shape,
            value_kind: config.value_kind,
            criterion: config.spec.default_criterion(),
            layout,
            packing: config.packing,
            post_pass: 0,
            variables: vars,
        },
        stats,
    ))
}

/// Reconstructs the mesh of a stored variable.
pub fn decode_mesh(variable: &CompressedVariable, shape: &GridShape) -> Result<ForestMesh> {
    let mesh = ForestMesh::deserialize_refinement(&variable.refinement, shape)?;
    if mesh.data_leaf_count() != variable.payload.len() {
        return Err(Error::CorruptStream(format!(
            "payload holds {} values but the mesh has {} data leaves",
            variable.payload.len(),
            mesh.data_leaf_count()
        )));
    }
    Ok(mesh)
}

/// Constant-interpolation decompression of one variable, in storage units.
pub fn decompress(variable: &CompressedVariable, shape: &GridShape) -> Result<Vec<f64>> {
    let mesh = decode_mesh(variable, shape)?;
    let aligned = mesh.scatter_payload(&variable.payload)?;
    mesh.expand_to_uniform(&aligned)
}

/// Decompresses every variable; split artifacts are re-stacked into one field.
pub fn decompress_artifact(artifact: &Artifact) -> Result<Vec<Vec<f64>>> {
    let fields = artifact
        .variables
        .iter()
        .map(|v| decompress(v, &artifact.shape))
        .collect::<Result<Vec<_>>>()?;
    match artifact.layout {
        Layout::Single(_) => Ok(fields),
        Layout::Split { axis } => {
            let (_, stacked) = stack_axis(&fields, &artifact.shape, axis)?;
            Ok(vec![stacked])
        }
    }
}

/// Slices a 3D field into 2D fields along `axis`.
pub fn split_axis(values: &[f64], shape: &GridShape, axis: usize) -> Result<(GridShape, Vec<Vec<f64>>)> {
    let ext = shape.extents();
    if ext.len() != 3 {
        return Err(Error::Config("only 3D fields can be split".into()));
    }
    if axis >= 3 {
        return Err(Error::Config(format!("split axis {axis} out of range for 3D")));
    }
    if values.len() != shape.len() {
        return Err(Error::Shape(format!(
            "expected {} values, got {}",
            shape.len(),
            values.len()
        )));
    }
    let mut rest = ext.to_vec();
    let count = rest.remove(axis);
    let slice_shape = GridShape::new(&rest)?;
    let mut slices = vec![Vec::with_capacity(slice_shape.len()); count];
    for (i, &v) in values.iter().enumerate() {
        let idx = [i / (ext[1] * ext[2]), (i / ext[2]) % ext[1], i % ext[2]];
        slices[idx[axis]].push(v);
    }
    Ok((slice_shape, slices))
}

/// Inverse of [`split_axis`].
pub fn stack_axis(slices: &[Vec<f64>], slice_shape: &GridShape, axis: usize) -> Result<(GridShape, Vec<f64>)> {
    let mut ext = slice_shape.extents().to_vec();
    if ext.len() != 2 || axis > 2 {
        return Err(Error::Config(format!("cannot stack 2D slices along axis {axis}")));
    }
    if let Some(s) = slices.iter().find(|s| s.len() != slice_shape.len()) {
        return Err(Error::Shape(format!(
            "slice holds {} values, expected {}",
            s.len(),
            slice_shape.len()
        )));
    }
    ext.insert(axis, slices.len());
    let shape = GridShape::new(&ext)?;
    let mut out = Vec::with_capacity(shape.len());
    for i in 0..shape.len() {
        let idx = [i / (ext[1] * ext[2]), (i / ext[2]) % ext[1], i % ext[2]];
        let mut within = idx.to_vec();
        let which = within.remove(axis);
        out.push(slices[which][within[0] * slice_shape.extents()[1] + within[1]]);
    }
    Ok((shape, out))
}
