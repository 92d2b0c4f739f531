//! Grid-field JSON: `{"grid": {"sizes": [...]}, "components": ...}` where
//! `components` nests one array level per grid direction (first direction
//! outermost) around the per-point component list. Complex entries are
//! `[re, im]` pairs; spinor fields also carry `"twist"`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::spinor::{SpinStructureTwist, SpinorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    pub grid: GridSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub twist: Option<Vec<f64>>,
    pub components: Value,
}

fn nest(grid: &TorusGrid, leaf: impl Fn(usize) -> Value) -> Value {
    fn build(sizes: &[usize], stride: &[usize], base: usize, leaf: &dyn Fn(usize) -> Value) -> Value {
        match sizes.split_first() {
            None => leaf(base),
            Some((&n, rest)) => Value::Array(
                (0..n)
                    .map(|k| build(rest, &stride[1..], base + k * stride[0], leaf))
                    .collect(),
            ),
        }
    }
    let sizes = grid.sizes();
    let mut stride = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * sizes[i + 1];
    }
    build(sizes, &stride, 0, &leaf)
}

fn flatten<'a>(v: &'a Value, depth: usize, sizes: &[usize], out: &mut Vec<&'a Value>) -> Result<()> {
    if depth == sizes.len() {
        out.push(v);
        return Ok(());
    }
    let arr = v
        .as_array()
        .filter(|a| a.len() == sizes[depth])
        .ok_or_else(|| Error::Config(format!("field components: expected {} entries at depth {depth}", sizes[depth])))?;
    for item in arr {
        flatten(item, depth + 1, sizes, out)?;
    }
    Ok(())
}

fn real(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Config(format!("expected a number, found {v}")))
}

/// A real field with `comps` components per point.
pub fn real_field_to_json(grid: &TorusGrid, values: &[f64], comps: usize) -> FieldFile {
    FieldFile {
        grid: GridSpec {
            sizes: grid.sizes().to_vec(),
        },
        twist: None,
        components: nest(grid, |p| Value::from(values[p * comps..(p + 1) * comps].to_vec())),
    }
}

pub fn real_field_from_json(file: &FieldFile, comps: usize) -> Result<(TorusGrid, Vec<f64>)> {
    let grid = TorusGrid::new(&file.grid.sizes)?;
    let mut leaves = Vec::with_capacity(grid.len());
    flatten(&file.components, 0, grid.sizes(), &mut leaves)?;
    let mut values = Vec::with_capacity(grid.len() * comps);
    for leaf in leaves {
        let arr = leaf
            .as_array()
            .filter(|a| a.len() == comps)
            .ok_or_else(|| Error::Config(format!("expected {comps} components per point")))?;
        for v in arr {
            values.push(real(v)?);
        }
    }
    Ok((grid, values))
}

pub fn spinor_to_json(psi: &SpinorField) -> FieldFile {
    let n = psi.spinor_dim;
    FieldFile {
        grid: GridSpec {
            sizes: psi.grid.sizes().to_vec(),
        },
        twist: Some(psi.twist.delta().to_vec()),
        components: nest(&psi.grid, |p| {
            Value::Array(
                psi.values[p * n..(p + 1) * n]
                    .iter()
                    .map(|z| Value::from(vec![z.re, z.im]))
                    .collect(),
            )
        }),
    }
}

pub fn spinor_from_json(file: &FieldFile) -> Result<SpinorField> {
    let grid = TorusGrid::new(&file.grid.sizes)?;
    let twist = match &file.twist {
        Some(d) => SpinStructureTwist::new(d)?,
        None => SpinStructureTwist::periodic(grid.dim()),
    };
    let mut leaves = Vec::with_capacity(grid.len());
    flatten(&file.components, 0, grid.sizes(), &mut leaves)?;
    let n = leaves
        .first()
        .and_then(|l| l.as_array())
        .map(Vec::len)
        .ok_or_else(|| Error::Config("empty spinor field".into()))?;
    let mut values = Vec::with_capacity(grid.len() * n);
    for leaf in leaves {
        let arr = leaf
            .as_array()
            .filter(|a| a.len() == n)
            .ok_or_else(|| Error::Config(format!("expected {n} spinor components per point")))?;
        for z in arr {
            let pair = z
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Config("complex entries are [re, im] pairs".into()))?;
            values.push(Complex64::new(real(&pair[0])?, real(&pair[1])?));
        }
    }
    SpinorField::from_values(&grid, &twist, n, values)
}
