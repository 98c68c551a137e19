//! Error criteria, region-wise error domains and the compliance checks.

mod check;
mod interpolate;

pub use check::{check_absolute, check_relative, AbsoluteCheck, ErrorCheck, RelativeCheck, Verdict};
pub use interpolate::{ArithmeticMean, Interpolator};

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forest::GridShape;
use crate::registry::Registry;
use crate::sfc::MortonIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionKind {
    /// Point-wise bound in data units.
    Absolute,
    /// Point-wise bound as a fraction of the original magnitude.
    Relative,
}

impl CriterionKind {
    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::Absolute => "abs",
            CriterionKind::Relative => "rel",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" | "absolute" => Ok(CriterionKind::Absolute),
            "rel" | "relative" => Ok(CriterionKind::Relative),
            other => Err(Error::Config(format!("unknown criterion kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criterion {
    kind: CriterionKind,
    bound: f64,
}

impl Criterion {
    pub fn new(kind: CriterionKind, bound: f64) -> Result<Self> {
        if !bound.is_finite() || bound < 0.0 {
            return Err(Error::Config(format!(
                "error bound must be finite and non-negative, got {bound}"
            )));
        }
        if kind == CriterionKind::Relative && bound > 1.0 {
            return Err(Error::Config(format!(
                "relative error bound {bound} exceeds 100%"
            )));
        }
        Ok(Criterion { kind, bound })
    }

    pub fn absolute(bound: f64) -> Result<Self> {
        Criterion::new(CriterionKind::Absolute, bound)
    }

    pub fn relative(bound: f64) -> Result<Self> {
        Criterion::new(CriterionKind::Relative, bound)
    }

    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// Half-open index box on the grid (array axis order) with its own criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDomain {
    pub ranges: Vec<Range<usize>>,
    pub criterion: Criterion,
}

impl ErrorDomain {
    pub fn new(ranges: Vec<Range<usize>>, criterion: Criterion) -> Result<Self> {
        if ranges.iter().any(|r| r.start >= r.end) {
            return Err(Error::Config(format!("empty domain box {ranges:?}")));
        }
        Ok(ErrorDomain { ranges, criterion })
    }

    fn intersects(&self, lo: &[usize], hi: &[usize]) -> bool {
        self.ranges
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(r, (&l, &h))| r.start < h && l < r.end)
    }
}

/// Default criterion plus region-wise overrides. Overlapping domains resolve to the
/// smallest applicable bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSpec {
    default: Criterion,
    domains: Vec<ErrorDomain>,
}

impl ErrorSpec {
    pub fn new(default: Criterion, domains: Vec<ErrorDomain>) -> Result<Self> {
        if let Some(d) = domains.iter().find(|d| d.criterion.kind != default.kind) {
            return Err(Error::Config(format!(
                "domain {:?} uses a {} bound but the default is {}; mixed kinds are not supported",
                d.ranges, d.criterion.kind, default.kind
            )));
        }
        Ok(ErrorSpec { default, domains })
    }

    pub fn uniform(default: Criterion) -> Self {
        ErrorSpec {
            default,
            domains: Vec::new(),
        }
    }

    pub fn default_criterion(&self) -> Criterion {
        self.default
    }

    pub fn kind(&self) -> CriterionKind {
        self.default.kind
    }

    pub fn domains(&self) -> &[ErrorDomain] {
        &self.domains
    }

    /// Checks that every domain has the grid's rank and lies inside the grid.
    pub fn validate_for(&self, shape: &GridShape) -> Result<()> {
        let ext = shape.extents();
        for d in &self.domains {
            if d.ranges.len() != ext.len() {
                return Err(Error::Config(format!(
                    "domain {:?} has {} axes, grid has {}",
                    d.ranges,
                    d.ranges.len(),
                    ext.len()
                )));
            }
            if d.ranges.iter().zip(ext).any(|(r, &e)| r.end > e) {
                return Err(Error::Config(format!(
                    "domain {:?} extends beyond the grid {ext:?}",
                    d.ranges
                )));
            }
        }
        Ok(())
    }

    /// Same spec with every bound divided by `divisor` (absolute bounds only).
    pub fn scaled_down(&self, divisor: f64) -> Result<Self> {
        let scale = |c: Criterion| Criterion::new(c.kind, c.bound / divisor);
        Ok(ErrorSpec {
            default: scale(self.default)?,
            domains: self
                .domains
                .iter()
                .map(|d| {
                    Ok(ErrorDomain {
                        ranges: d.ranges.clone(),
                        criterion: scale(d.criterion)?,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }
}

/// Most restrictive criterion over every domain touching the cells of `element`.
pub fn resolve_bound(element: MortonIndex, spec: &ErrorSpec, shape: &GridShape) -> Criterion {
    if spec.domains.is_empty() {
        return spec.default;
    }
    let dim = shape.dim();
    let d = dim.get();
    let (lo, size) = element.cell_box(shape.initial_level(), dim);
    let mut alo = [0usize; 3];
    let mut ahi = [0usize; 3];
    for a in 0..d {
        let k = d - 1 - a;
        alo[a] = lo[k] as usize;
        ahi[a] = (lo[k] as usize + size as usize).min(shape.extents()[a]);
    }
    let bound = spec
        .domains
        .iter()
        .filter(|dom| dom.intersects(&alo[..d], &ahi[..d]))
        .map(|dom| dom.criterion.bound)
        .fold(spec.default.bound, f64::min);
    Criterion {
        kind: spec.default.kind,
        bound,
    }
}

/// Registered compliance checks, keyed by criterion name.
pub fn checks() -> Registry<dyn ErrorCheck> {
    let mut r: Registry<dyn ErrorCheck> = Registry::new("error criterion");
    r.register("abs", Arc::new(AbsoluteCheck));
    r.register("rel", Arc::new(RelativeCheck));
    r
}

pub fn check_for(kind: CriterionKind) -> Arc<dyn ErrorCheck> {
    checks()
        .get(kind.name())
        .expect("both criterion kinds are registered")
}

/// Registered interpolation maps.
pub fn interpolators() -> Registry<dyn Interpolator> {
    let mut r: Registry<dyn Interpolator> = Registry::new("interpolator");
    r.register("mean", Arc::new(ArithmeticMean));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sfc::Dim;

    fn shape() -> GridShape {
        GridShape::new(&[8, 8]).unwrap()
    }

    fn abs_domain(ranges: [Range<usize>; 2], bound: f64) -> ErrorDomain {
        ErrorDomain::new(ranges.to_vec(), Criterion::absolute(bound).unwrap()).unwrap()
    }

    #[test]
    fn criterion_invariants() {
        assert!(Criterion::absolute(-1.0).is_err());
        assert!(Criterion::absolute(f64::NAN).is_err());
        assert!(Criterion::relative(1.0).is_ok());
        assert!(Criterion::relative(1.01).is_err());
        assert_eq!("rel".parse::<CriterionKind>().unwrap(), CriterionKind::Relative);
    }

    #[test]
    fn resolve_examples() {
        let default = Criterion::absolute(2.0).unwrap();
        let elem = MortonIndex::encode(&[1, 1], 3, Dim::Two).unwrap();
        assert_eq!(resolve_bound(elem, &ErrorSpec::uniform(default), &shape()).bound(), 2.0);

        let spec = ErrorSpec::new(default, vec![abs_domain([0..4, 0..4], 0.5)]).unwrap();
        assert_eq!(resolve_bound(elem, &spec, &shape()).bound(), 0.5);
        // level-1 element in the top right quadrant misses the domain
        let far = MortonIndex { code: 3, level: 1 };
        assert_eq!(resolve_bound(far, &spec, &shape()).bound(), 2.0);

        let nested = ErrorSpec::new(
            default,
            vec![abs_domain([0..8, 0..8], 1.0), abs_domain([2..3, 2..3], 0.25)],
        )
        .unwrap();
        assert_eq!(resolve_bound(MortonIndex::ROOT, &nested, &shape()).bound(), 0.25);
        assert_eq!(resolve_bound(far, &nested, &shape()).bound(), 1.0);
    }

    #[test]
    fn domain_boxes_use_array_axis_order() {
        let shape = GridShape::new(&[4, 8]).unwrap();
        let spec = ErrorSpec::new(
            Criterion::absolute(1.0).unwrap(),
            vec![abs_domain([0..1, 6..8], 0.0)],
        )
        .unwrap();
        // row 0, column 7 in mesh coordinates is (x=7, y=0)
        let hit = MortonIndex::encode(&[7, 0], 3, Dim::Two).unwrap();
        let miss = MortonIndex::encode(&[0, 7], 3, Dim::Two).unwrap();
        assert_eq!(resolve_bound(hit, &spec, &shape).bound(), 0.0);
        assert_eq!(resolve_bound(miss, &spec, &shape).bound(), 1.0);
    }

    #[test]
    fn mixed_kinds_are_rejected() {
        let rel = ErrorDomain::new(vec![0..2, 0..2], Criterion::relative(0.1).unwrap()).unwrap();
        assert!(matches!(
            ErrorSpec::new(Criterion::absolute(1.0).unwrap(), vec![rel]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn validation_against_grid() {
        let spec = ErrorSpec::new(
            Criterion::absolute(1.0).unwrap(),
            vec![abs_domain([8..10, 0..1], 0.0)],
        )
        .unwrap();
        assert!(spec.validate_for(&shape()).is_err());
        assert!(ErrorDomain::new(vec![3..3, 0..1], Criterion::absolute(0.0).unwrap()).is_err());
    }

    #[test]
    fn registries_resolve_by_name() {
        assert_eq!(checks().get("rel").unwrap().kind(), CriterionKind::Relative);
        assert!(checks().get("gradient").is_err());
        assert_eq!(interpolators().get("mean").unwrap().name(), "mean");
    }
}
