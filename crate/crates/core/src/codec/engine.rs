//! Iterated coarsening of a mesh carrying one or more variables.

use std::sync::Arc;

use crate::codec::ValueKind;
use crate::criteria::{check_for, resolve_bound, ErrorCheck, ErrorSpec, Interpolator};
use crate::error::{Error, Result};
use crate::forest::{ForestMesh, GridShape};

/// Mesh plus per-variable leaf values and accumulated-inaccuracy trackers.
///
/// Only the current leaf values are held; original data is dropped once mapped.
pub struct Coarsener {
    mesh: ForestMesh,
    values: Vec<Vec<f64>>,
    trackers: Vec<Vec<f64>>,
    spec: ErrorSpec,
    check: Arc<dyn ErrorCheck>,
    interpolator: Arc<dyn Interpolator>,
    kind: ValueKind,
    iterations: usize,
}

impl Coarsener {
    /// Maps every field onto a fresh initial mesh. All fields share `shape`.
    pub fn new(
        shape: &GridShape,
        fields: &[&[f64]],
        spec: ErrorSpec,
        kind: ValueKind,
        interpolator: Arc<dyn Interpolator>,
    ) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::Config("nothing to compress".into()));
        }
        spec.validate_for(shape)?;
        let mesh = ForestMesh::initial(shape);
        let mut values = Vec::with_capacity(fields.len());
        for field in fields {
            kind.validate(field)?;
            values.push(mesh.map_data(field)?);
        }
        let trackers = vec![vec![0.0; mesh.len()]; fields.len()];
        Ok(Coarsener {
            mesh,
            values,
            trackers,
            check: check_for(spec.kind()),
            spec,
            interpolator,
            kind,
            iterations: 0,
        })
    }

    pub fn mesh(&self) -> &ForestMesh {
        &self.mesh
    }

    pub fn variable_count(&self) -> usize {
        self.values.len()
    }

    /// Leaf-aligned values of variable `var`; dummy leaves hold NaN.
    pub fn values(&self, var: usize) -> &[f64] {
        &self.values[var]
    }

    pub fn trackers(&self, var: usize) -> &[f64] {
        &self.trackers[var]
    }

    /// Number of iterations that coarsened at least one family.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn max_tracker(&self) -> f64 {
        self.trackers
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }

    /// One sweep over all complete families. Accepted families are committed together
    /// at the end, so parents formed here only become candidates in the next sweep.
    /// Returns the number of coarsened families.
    pub fn step(&mut self) -> Result<usize> {
        let dim = self.mesh.dim();
        let n = dim.family_size();
        let nvars = self.values.len();
        let mut accepted = Vec::new();
        // per accepted family and variable: (parent value, parent tracker)
        let mut parents: Vec<(f64, f64)> = Vec::new();
        let mut member_vals = Vec::with_capacity(n);
        let mut member_trackers = Vec::with_capacity(n);
        let mut verdicts = Vec::with_capacity(nvars);

        for start in self.mesh.families() {
            let parent = self.mesh.leaves()[start].parent(dim)?;
            let present: Vec<usize> = (start..start + n)
                .filter(|&i| !self.mesh.is_dummy(i))
                .collect();
            if present.is_empty() {
                accepted.push(start);
                parents.extend(std::iter::repeat_n((f64::NAN, 0.0), nvars));
                continue;
            }
            let bound = resolve_bound(parent, &self.spec, self.mesh.shape()).bound();
            verdicts.clear();
            let mut ok = true;
            for var in 0..nvars {
                member_vals.clear();
                member_trackers.clear();
                for &i in &present {
                    member_vals.push(self.values[var][i]);
                    member_trackers.push(self.trackers[var][i]);
                }
                let mean = self
                    .interpolator
                    .interpolate(&member_vals)
                    .expect("family has present members");
                let candidate = self.kind.quantize(mean);
                let verdict = self
                    .check
                    .check(&member_vals, &member_trackers, candidate, bound)?;
                if !verdict.accepted {
                    ok = false;
                    break;
                }
                verdicts.push((candidate, verdict.tracker));
            }
            if ok {
                accepted.push(start);
                parents.extend_from_slice(&verdicts);
            }
        }

        if accepted.is_empty() {
            return Ok(0);
        }
        let coarse = self.mesh.coarsen_families(&accepted)?;
        let mut values: Vec<Vec<f64>> = (0..nvars).map(|_| Vec::with_capacity(coarse.len())).collect();
        let mut trackers: Vec<Vec<f64>> = (0..nvars).map(|_| Vec::with_capacity(coarse.len())).collect();
        let mut cursor = 0;
        for (f, &start) in accepted.iter().enumerate() {
            for var in 0..nvars {
                values[var].extend_from_slice(&self.values[var][cursor..start]);
                trackers[var].extend_from_slice(&self.trackers[var][cursor..start]);
                let (v, t) = parents[f * nvars + var];
                values[var].push(v);
                trackers[var].push(t);
            }
            cursor = start + n;
        }
        for var in 0..nvars {
            values[var].extend_from_slice(&self.values[var][cursor..]);
            trackers[var].extend_from_slice(&self.trackers[var][cursor..]);
        }
        self.mesh = coarse;
        self.values = values;
        self.trackers = trackers;
        self.iterations += 1;
        Ok(accepted.len())
    }

    /// Coarsens until a sweep accepts nothing.
    pub fn run(&mut self) -> Result<()> {
        while self.mesh.len() > 1 && self.step()? > 0 {}
        Ok(())
    }

    pub fn into_parts(self) -> (ForestMesh, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        (self.mesh, self.values, self.trackers)
    }
}
