//! Points, polygonal curves and pairwise vertex-distance matrices.
//!
//! Curves are finite vertex sequences in `R^d`; all distance kernels in this
//! crate consume the `m' x m''` matrix of pairwise Euclidean vertex distances
//! rather than the curves themselves.

use crate::error::{Error, Result};

/// A point in `R^d`, `d >= 1`, with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidCurve("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCurve("point has non-finite coordinate".into()));
        }
        Ok(Point { coords })
    }

    /// 1-dimensional point.
    pub fn scalar(x: f64) -> Self {
        Point::new(vec![x]).expect("finite scalar")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Componentwise translation by `v`.
    pub fn translate(&self, v: &[f64]) -> Result<Point> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        Point::new(
            self.coords
                .iter()
                .zip(v)
                .map(|(c, t)| c + t)
                .collect(),
        )
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn euclidean(p: &Point, q: &Point) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            actual: q.dim(),
        });
    }
    Ok(euclidean_unchecked(p.coords(), q.coords()))
}

pub(crate) fn euclidean_unchecked(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// A polygonal curve: a nonempty vertex sequence of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    vertices: Vec<Point>,
}

impl Curve {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidCurve("curve must have at least one vertex".into()));
        };
        let d = first.dim();
        for (i, v) in vertices.iter().enumerate() {
            if v.dim() != d {
                return Err(Error::InvalidCurve(format!(
                    "vertex {i} has dimension {} but vertex 0 has dimension {d}",
                    v.dim()
                )));
            }
        }
        Ok(Curve { vertices })
    }

    /// 1-dimensional curve from a value sequence.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Curve::new(values.iter().map(|&x| Point::scalar(x)).collect())
    }

    /// Number of vertices (the curve's complexity `m`).
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    /// Merges runs of consecutive equal vertices into a single vertex.
    pub fn dedup_consecutive(&self) -> Curve {
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            if vertices.last() != Some(v) {
                vertices.push(v.clone());
            }
        }
        Curve { vertices }
    }

    pub fn translate(&self, v: &[f64]) -> Result<Curve> {
        Curve::new(
            self.vertices
                .iter()
                .map(|p| p.translate(v))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// Dense `rows x cols` matrix of nonnegative finite vertex distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("matrix must be nonempty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidMatrix(
                "entries must be finite and nonnegative".into(),
            ));
        }
        Ok(DistanceMatrix { rows, cols, data })
    }

    /// Pairwise Euclidean distances between the vertices of `a` and `b`.
    pub fn from_curves(a: &Curve, b: &Curve) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                actual: b.dim(),
            });
        }
        let (rows, cols) = (a.len(), b.len());
        let mut data = Vec::with_capacity(rows * cols);
        for p in a.vertices() {
            for q in b.vertices() {
                data.push(euclidean_unchecked(p.coords(), q.coords()));
            }
        }
        Ok(DistanceMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at 0-based `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DistanceMatrix {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        DistanceMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Applies `f` to every entry. The result must stay nonnegative and finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<DistanceMatrix> {
        DistanceMatrix::new(self.rows, self.cols, self.data.iter().map(|&x| f(x)).collect())
    }
}

/// Convenience alias for distance_matrix(a, b) following the vertex order of the inputs.
pub fn distance_matrix(a: &Curve, b: &Curve) -> Result<DistanceMatrix> {
    DistanceMatrix::from_curves(a, b)
}
