//! Dominance and Pareto-front extraction over dimension-score vectors.
//!
//! Every comparison happens in canonical "maximize" space: minimized coordinates are
//! negated and minimize-absolute coordinates become `-|v|`. `a` dominates `b` when it is
//! at least as good everywhere and strictly better somewhere, so equal vectors never
//! dominate each other and duplicates all stay on the front.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{DimensionKind, DimensionSpec, ScoredQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Maximize,
    Minimize,
    MinimizeAbs,
}

impl Orientation {
    pub fn canonical(self, v: f64) -> f64 {
        match self {
            Orientation::Maximize => v,
            Orientation::Minimize => -v,
            Orientation::MinimizeAbs => -v.abs(),
        }
    }
}

/// Values plus orientations, canonicalized once on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedVector {
    values: Vec<f64>,
    orientations: Vec<Orientation>,
    canonical: Vec<f64>,
}

impl OrientedVector {
    pub fn new(values: Vec<f64>, orientations: Vec<Orientation>) -> Result<Self> {
        if values.len() != orientations.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} values, {} orientations",
                values.len(),
                orientations.len()
            )));
        }
        let canonical = values
            .iter()
            .zip(&orientations)
            .map(|(&v, o)| o.canonical(v))
            .collect();
        Ok(OrientedVector {
            values,
            orientations,
            canonical,
        })
    }

    pub fn maximize(values: Vec<f64>) -> Self {
        let n = values.len();
        Self::new(values, vec![Orientation::Maximize; n]).expect("lengths match")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn canonical(&self) -> &[f64] {
        &self.canonical
    }
}

pub fn dominates(a: &OrientedVector, b: &OrientedVector) -> Result<bool> {
    if a.orientations != b.orientations {
        return Err(Error::LayoutMismatch(format!(
            "orientations {:?} vs {:?}",
            a.orientations, b.orientations
        )));
    }
    Ok(dominates_canonical(&a.canonical, &b.canonical))
}

/// Dominance on already-canonical vectors of equal length.
pub fn dominates_canonical(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strictly = true;
        }
    }
    strictly
}

/// Indices of the non-dominated vectors, in input order.
pub fn front_indices(canonical: &[Vec<f64>]) -> Vec<usize> {
    (0..canonical.len())
        .filter(|&i| {
            !canonical
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && dominates_canonical(other, &canonical[i]))
        })
        .collect()
}

pub fn orientations(specs: &[DimensionSpec]) -> Vec<Orientation> {
    specs.iter().map(DimensionSpec::orientation).collect()
}

/// Canonical score vectors for `candidates` under `specs`.
pub fn canonicalize(candidates: &[ScoredQuery], specs: &[DimensionSpec]) -> Result<Vec<Vec<f64>>> {
    let orient = orientations(specs);
    candidates
        .iter()
        .map(|c| {
            if c.dim_scores.len() != specs.len() {
                return Err(Error::LayoutMismatch(format!(
                    "query `{}` has {} scores, layout has {}",
                    c.query,
                    c.dim_scores.len(),
                    specs.len()
                )));
            }
            if let Some((d, s)) = c
                .dim_scores
                .iter()
                .zip(specs)
                .find(|(d, s)| d.name != s.name)
            {
                return Err(Error::LayoutMismatch(format!(
                    "query `{}` has dimension `{}` where `{}` was expected",
                    c.query, d.name, s.name
                )));
            }
            Ok(c.dim_scores
                .iter()
                .zip(&orient)
                .map(|(d, o)| o.canonical(d.value))
                .collect())
        })
        .collect()
}

pub fn pareto_front(
    candidates: &[ScoredQuery],
    specs: &[DimensionSpec],
) -> Result<Vec<ScoredQuery>> {
    let canon = canonicalize(candidates, specs)?;
    Ok(front_indices(&canon)
        .into_iter()
        .map(|i| candidates[i].clone())
        .collect())
}

/// Pareto front that also keeps non-dominated candidates biased opposite to the original.
///
/// The result is the union of the ordinary front (with `signed_dim` minimizing |bias|)
/// and the front of the candidates whose `signed_dim` sign is opposite to
/// `original_bias`, in input order.
pub fn pseudo_pareto_front(
    candidates: &[ScoredQuery],
    specs: &[DimensionSpec],
    signed_dim: &str,
    original_bias: f64,
) -> Result<Vec<ScoredQuery>> {
    let pos = specs
        .iter()
        .position(|s| s.name == signed_dim)
        .ok_or_else(|| Error::NotSignedDimension(signed_dim.to_string()))?;
    if !matches!(specs[pos].kind, DimensionKind::SignedMean { .. }) {
        return Err(Error::NotSignedDimension(signed_dim.to_string()));
    }
    let mut specs = specs.to_vec();
    specs[pos].orientation = Some(Orientation::MinimizeAbs);
    let canon = canonicalize(candidates, &specs)?;

    let mut keep = vec![false; candidates.len()];
    for i in front_indices(&canon) {
        keep[i] = true;
    }

    let s = sign(original_bias);
    if s != 0.0 {
        let opposite: Vec<usize> = (0..candidates.len())
            .filter(|&i| sign(candidates[i].dim_scores[pos].value) == -s)
            .collect();
        let sub: Vec<Vec<f64>> = opposite.iter().map(|&i| canon[i].clone()).collect();
        for j in front_indices(&sub) {
            keep[opposite[j]] = true;
        }
    }
    Ok(candidates
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(c, _)| c.clone())
        .collect())
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
