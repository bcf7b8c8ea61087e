//! Layer geometry and intra-layer connectivity.
//!
//! Neurons sit at fixed coordinates (lattice units). The intra-layer coupling
//! `S` is an isotropic kernel of pairwise distance: excitatory inside the
//! excitation radius `r_i`, a decaying inhibitory tail beyond the inhibition
//! radius `r_o`, and zero in between.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SnnError};
use crate::matrix::DenseMatrix;

/// Neuron coordinates of one layer. 1D and 2D layouts are stored with the
/// unused axes set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGeometry {
    positions: Vec<[f64; 3]>,
    /// Periodic box extent per axis, set when the layer wraps around.
    period: Option<[f64; 3]>,
}

impl LayerGeometry {
    pub fn from_positions(positions: Vec<[f64; 3]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(SnnError::Empty("layer geometry"));
        }
        if let Some(i) = positions
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(SnnError::NonFinite {
                context: "geometry coordinates",
                index: i,
            });
        }
        Ok(LayerGeometry {
            positions,
            period: None,
        })
    }

    /// Read coordinates from CSV: one row per neuron, columns `x,y[,z]`,
    /// optional header. Row order defines neuron identity.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut positions = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(str::parse::<f64>).collect();
            let coords = match parsed {
                Ok(c) => c,
                Err(_) if row == 0 => continue, // header
                Err(e) => {
                    return Err(SnnError::invalid(format!(
                        "geometry csv row {}: {e}",
                        row + 1
                    )))
                }
            };
            if !(2..=3).contains(&coords.len()) {
                return Err(SnnError::invalid(format!(
                    "geometry csv row {}: expected 2 or 3 columns, found {}",
                    row + 1,
                    coords.len()
                )));
            }
            positions.push([coords[0], coords[1], coords.get(2).copied().unwrap_or(0.0)]);
        }
        Self::from_positions(positions)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Make distances periodic with the given box extent (toroidal layers).
    pub fn with_period(mut self, period: [f64; 3]) -> Result<Self> {
        if period.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(SnnError::invalid("period extents must be finite and >= 0"));
        }
        self.period = Some(period);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> [f64; 3] {
        self.positions[i]
    }

    pub fn period(&self) -> Option<[f64; 3]> {
        self.period
    }

    /// Mean position of all neurons.
    pub fn centroid(&self) -> [f64; 3] {
        mean_position(self.positions.iter().copied()).expect("geometry is non-empty")
    }

    /// Distance between neurons `i` and `j`, honoring the period if any.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        let mut sq = 0.0;
        for axis in 0..3 {
            let mut d = (a[axis] - b[axis]).abs();
            if let Some(p) = self.period {
                if p[axis] > 0.0 {
                    d %= p[axis];
                    d = d.min(p[axis] - d);
                }
            }
            sq += d * d;
        }
        sq.sqrt()
    }

    /// Index of the neuron closest to the layer centroid (lowest index on ties).
    pub fn center_index(&self) -> usize {
        let c = self.centroid();
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.positions.iter().enumerate() {
            let d: f64 = (0..3).map(|k| (p[k] - c[k]).powi(2)).sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

pub(crate) fn mean_position(points: impl Iterator<Item = [f64; 3]>) -> Option<[f64; 3]> {
    let mut sum = [0.0; 3];
    let mut n = 0usize;
    for p in points {
        for k in 0..3 {
            sum[k] += p[k];
        }
        n += 1;
    }
    (n > 0).then(|| sum.map(|s| s / n as f64))
}

/// Row-major `width × height` lattice: neuron `row * width + col` sits at
/// `(col · spacing, row · spacing)`.
pub fn grid_geometry(width: usize, height: usize, spacing: f64) -> Result<LayerGeometry> {
    if width == 0 || height == 0 {
        return Err(SnnError::invalid(format!(
            "grid dimensions must be >= 1, got {width}x{height}"
        )));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(SnnError::invalid(format!("grid spacing must be > 0, got {spacing}")));
    }
    let positions = (0..height)
        .flat_map(|row| {
            (0..width).map(move |col| [col as f64 * spacing, row as f64 * spacing, 0.0])
        })
        .collect();
    LayerGeometry::from_positions(positions)
}

/// Evenly spaced 1D chain.
pub fn line_geometry(n: usize, spacing: f64) -> Result<LayerGeometry> {
    grid_geometry(n, 1, spacing)
}

/// Square matrix of pairwise couplings (or distances) within one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix(DenseMatrix);

impl AdjacencyMatrix {
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(SnnError::DimensionMismatch {
                context: "adjacency matrix must be square",
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        if !matrix.is_finite() {
            return Err(SnnError::invalid("adjacency matrix has non-finite entries"));
        }
        Ok(AdjacencyMatrix(matrix))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_inner(self) -> DenseMatrix {
        self.0
    }

    /// `Some(g)` when the matrix equals `g · I`.
    pub fn scaled_identity_gain(&self) -> Option<f64> {
        let n = self.n();
        let g = if n > 0 { self.get(0, 0) } else { 0.0 };
        let ok = (0..n).all(|i| {
            (0..n).all(|j| {
                let v = self.get(i, j);
                if i == j {
                    v == g
                } else {
                    v == 0.0
                }
            })
        });
        ok.then_some(g)
    }
}

/// Pairwise Euclidean distances (periodic if the geometry has a period).
pub fn distance_matrix(geometry: &LayerGeometry) -> AdjacencyMatrix {
    let n = geometry.len();
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = geometry.distance(i, j);
            d.set(i, j, v);
            d.set(j, i, v);
        }
    }
    AdjacencyMatrix(d)
}

/// Shape of the excitatory branch inside `r_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExcitationProfile {
    /// `a_i · D`: grows with distance inside the excitation radius.
    #[default]
    Linear,
    /// `a_i` for every off-diagonal pair inside the excitation radius.
    Constant,
}

fn default_decay_length() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    pub r_i: f64,
    pub r_o: f64,
    pub a_i: f64,
    pub a_o: f64,
    /// Length scale of the inhibitory tail `exp(-D / decay_length)`.
    #[serde(default = "default_decay_length")]
    pub decay_length: f64,
    #[serde(default)]
    pub excitation: ExcitationProfile,
}

impl KernelParams {
    pub fn new(r_i: f64, r_o: f64, a_i: f64, a_o: f64) -> Result<Self> {
        let k = KernelParams {
            r_i,
            r_o,
            a_i,
            a_o,
            decay_length: default_decay_length(),
            excitation: ExcitationProfile::Linear,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.r_i, self.r_o, self.a_i, self.a_o, self.decay_length]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(SnnError::invalid("KernelParams: all fields must be finite"));
        }
        if !(self.r_i > 0.0 && self.r_i <= self.r_o) {
            return Err(SnnError::invalid(format!(
                "KernelParams: requires 0 < r_i <= r_o (r_i = {}, r_o = {})",
                self.r_i, self.r_o
            )));
        }
        if self.a_i < 0.0 || self.a_o < 0.0 {
            return Err(SnnError::invalid(
                "KernelParams: amplitudes a_i and a_o must be >= 0",
            ));
        }
        if self.decay_length <= 0.0 {
            return Err(SnnError::invalid("KernelParams: decay_length must be > 0"));
        }
        Ok(())
    }

    /// Coupling for a single pair at distance `d` (`d > 0`).
    pub fn coupling(&self, d: f64) -> f64 {
        if d < self.r_i {
            match self.excitation {
                ExcitationProfile::Linear => self.a_i * d,
                ExcitationProfile::Constant => self.a_i,
            }
        } else if d > self.r_o {
            -self.a_o * (-d / self.decay_length).exp()
        } else {
            0.0
        }
    }
}

/// Intra-layer coupling `S` from a distance matrix.
pub fn build_adjacency(distances: &AdjacencyMatrix, kernel: &KernelParams) -> Result<AdjacencyMatrix> {
    kernel.validate()?;
    let n = distances.n();
    let d = distances.matrix();
    if d.as_slice().iter().any(|v| *v < 0.0) {
        return Err(SnnError::invalid("distance matrix has negative entries"));
    }
    let s = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            kernel.coupling(d.get(i, j))
        }
    });
    AdjacencyMatrix::new(s)
}

/// Spike-input matrix `S^x`: identity, optionally scaled by `gain`.
pub fn build_spike_input_matrix(n: usize, gain: Option<f64>) -> Result<AdjacencyMatrix> {
    if n == 0 {
        return Err(SnnError::invalid("spike-input matrix needs n >= 1"));
    }
    let g = gain.unwrap_or(1.0);
    if !g.is_finite() {
        return Err(SnnError::invalid("spike-input gain must be finite"));
    }
    let mut m = DenseMatrix::identity(n);
    m.as_mut_slice().iter_mut().for_each(|v| *v *= g);
    AdjacencyMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(p: &[[f64; 2]]) -> LayerGeometry {
        LayerGeometry::from_positions(p.iter().map(|q| [q[0], q[1], 0.0]).collect()).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = grid_geometry(1, 1, 1.0).unwrap();
        assert_eq!(g.positions(), &[[0.0, 0.0, 0.0]]);
        let g = grid_geometry(2, 2, 1.0).unwrap();
        assert_eq!(
            g.positions(),
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]
        );
        let g = grid_geometry(28, 28, 1.0).unwrap();
        assert_eq!(g.len(), 784);
        assert_eq!(g.position(28 * 5 + 3), [3.0, 5.0, 0.0]);
        assert!(grid_geometry(0, 3, 1.0).is_err());
        assert!(grid_geometry(3, 3, 0.0).is_err());
    }

    #[test]
    fn distances() {
        let d = distance_matrix(&pts(&[[0.0, 0.0], [1.0, 0.0]]));
        assert_eq!(d.matrix().as_slice(), &[0.0, 1.0, 1.0, 0.0]);

        let d = distance_matrix(&pts(&[[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]));
        let mut off: Vec<f64> = vec![d.get(0, 1), d.get(0, 2), d.get(1, 2)];
        off.sort_by(f64::total_cmp);
        assert_eq!(off, vec![3.0, 4.0, 5.0]);

        let g = grid_geometry(4, 3, 0.7).unwrap();
        let d = distance_matrix(&g);
        assert!(d.matrix().is_symmetric(0.0));
        assert!((0..g.len()).all(|i| d.get(i, i) == 0.0));
    }

    #[test]
    fn periodic_distance_wraps() {
        let g = grid_geometry(10, 1, 1.0)
            .unwrap()
            .with_period([10.0, 0.0, 0.0])
            .unwrap();
        assert_eq!(g.distance(0, 9), 1.0);
        assert_eq!(g.distance(0, 5), 5.0);
    }

    #[test]
    fn kernel_branches() {
        let k = KernelParams::new(3.0, 5.0, 2.0, 1.0).unwrap();
        assert_eq!(k.coupling(1.0), 2.0);
        assert_eq!(k.coupling(4.0), 0.0);
        assert_eq!(k.coupling(3.0), 0.0);
        assert_eq!(k.coupling(5.0), 0.0);
        assert!((k.coupling(10.0) + (-1.0f64).exp()).abs() < 1e-15);
        assert!((k.coupling(10.0) + 0.367879).abs() < 1e-6);

        let constant = KernelParams {
            excitation: ExcitationProfile::Constant,
            ..k
        };
        assert_eq!(constant.coupling(0.5), 2.0);
        assert_eq!(constant.coupling(2.5), 2.0);
    }

    #[test]
    fn adjacency_diagonal_zero_and_validation() {
        let g = grid_geometry(3, 3, 1.0).unwrap();
        let s = build_adjacency(&distance_matrix(&g), &KernelParams::new(2.0, 2.5, 1.0, 1.0).unwrap())
            .unwrap();
        assert!((0..9).all(|i| s.get(i, i) == 0.0));
        assert!(KernelParams::new(3.0, 2.0, 1.0, 1.0).is_err());
        assert!(KernelParams::new(0.0, 2.0, 1.0, 1.0).is_err());
        assert!(KernelParams::new(1.0, 2.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn spike_input_matrix() {
        let m = build_spike_input_matrix(3, None).unwrap();
        assert_eq!(m.matrix(), &DenseMatrix::identity(3));
        let half = build_spike_input_matrix(2, Some(0.5)).unwrap();
        assert_eq!(half.matrix().as_slice(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(half.scaled_identity_gain(), Some(0.5));
        let x = [0.3, -1.7, 4.0];
        assert_eq!(m.matrix().mul_vec(&x).unwrap(), x.to_vec());
        assert!(build_spike_input_matrix(0, None).is_err());
    }

    #[test]
    fn csv_geometry_with_and_without_header() {
        let with = "x,y\n0,0\n1,0\n0,2\n";
        let g = LayerGeometry::from_csv_reader(with.as_bytes()).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.position(2), [0.0, 2.0, 0.0]);
        let without = "0,0,1\n1,1,1\n";
        let g = LayerGeometry::from_csv_reader(without.as_bytes()).unwrap();
        assert_eq!(g.position(1), [1.0, 1.0, 1.0]);
        assert!(LayerGeometry::from_csv_reader("x,y\n1,a\n".as_bytes()).is_err());
        assert!(LayerGeometry::from_csv_reader("x,y\n".as_bytes()).is_err());
    }

    #[test]
    fn center_index_of_odd_grid() {
        let g = grid_geometry(5, 5, 1.0).unwrap();
        assert_eq!(g.center_index(), 12);
    }
}
