//! Parameter records, the coupled Goodwin vector field and Laplacian construction.
//!
//! Each oscillator is the dimensionless three-stage negative feedback loop
//!
//! ```text
//! dx1/dt = f(x3) - b1 x1,   f(x) = 1 / (1 + x^p)
//! dx2/dt = x1 - b2 x2 - sum_j a_ij (x2_i - x2_j)
//! dx3/dt = x2 - b3 x3
//! ```
//!
//! with diffusive coupling acting on the protein variable `x2`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kinetic parameters of the original (dimensional) Goodwin model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalParams {
    pub v0: f64,
    pub v1: f64,
    pub v2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    #[serde(rename = "Km", alias = "km")]
    pub km: f64,
    pub p: f64,
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("v0", self.v0),
            ("v1", self.v1),
            ("v2", self.v2),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("Km", self.km),
        ];
        for (name, value) in fields {
            positive(name, value)?;
        }
        hill_exponent(self.p)
    }

    /// The time scale `(Km / (v0 v1 v2))^(1/3)`.
    pub fn time_scale(&self) -> f64 {
        (self.km / (self.v0 * self.v1 * self.v2)).cbrt()
    }

    /// Multipliers taking dimensional concentrations `[X1, X2, X3]` to the
    /// dimensionless state `[x1, x2, x3]`.
    pub fn state_scales(&self) -> [f64; 3] {
        let s = self.time_scale();
        [
            s * s * self.v1 * self.v2 / self.km,
            s * self.v2 / self.km,
            1.0 / self.km,
        ]
    }
}

/// Dimensionless degradation rates and Hill coefficient of one oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodwinParams {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub p: f64,
    /// Time scale of the dimensional model, when the record was derived from one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_time: Option<f64>,
}

impl GoodwinParams {
    pub fn new(b1: f64, b2: f64, b3: f64, p: f64) -> Result<Self> {
        let g = Self {
            b1,
            b2,
            b3,
            p,
            sigma_time: None,
        };
        g.validate()?;
        Ok(g)
    }

    /// All three degradation rates equal to `b`.
    pub fn uniform(b: f64, p: f64) -> Result<Self> {
        Self::new(b, b, b, p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("b1", self.b1)?;
        positive("b2", self.b2)?;
        positive("b3", self.b3)?;
        hill_exponent(self.p)?;
        if let Some(s) = self.sigma_time {
            positive("sigma_time", s)?;
        }
        Ok(())
    }

    pub fn rates(&self) -> [f64; 3] {
        [self.b1, self.b2, self.b3]
    }

    /// `b1 b2 b3`
    pub fn product(&self) -> f64 {
        self.b1 * self.b2 * self.b3
    }

    /// `b1 + b2 + b3`
    pub fn sum(&self) -> f64 {
        self.b1 + self.b2 + self.b3
    }

    /// `b1 b2 + b1 b3 + b2 b3`
    pub fn pair_sum(&self) -> f64 {
        self.b1 * self.b2 + self.b1 * self.b3 + self.b2 * self.b3
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and strictly positive, got {value}"),
        })
    }
}

fn hill_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "p",
            reason: format!("Hill coefficient must be >= 1, got {p}"),
        })
    }
}

/// Rescales the dimensional model: `b_i = k_i * s` with `s = (Km / (v0 v1 v2))^(1/3)`.
pub fn nondimensionalize(d: &DimensionalParams) -> Result<GoodwinParams> {
    d.validate()?;
    let s = d.time_scale();
    Ok(GoodwinParams {
        b1: d.k1 * s,
        b2: d.k2 * s,
        b3: d.k3 * s,
        p: d.p,
        sigma_time: Some(s),
    })
}

/// Hill repression `1 / (1 + x^p)`.
pub fn hill_repression(x: f64, p: f64) -> Result<f64> {
    check_domain(x)?;
    Ok(hill(x, p))
}

/// Derivative of [`hill_repression`]: `-p x^(p-1) / (1 + x^p)^2`.
pub fn hill_repression_slope(x: f64, p: f64) -> Result<f64> {
    check_domain(x)?;
    Ok(hill_slope(x, p))
}

fn check_domain(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "repression is defined for x >= 0, got {x}"
        )));
    }
    Ok(())
}

/// Unchecked repression; negative arguments are clamped to zero.
#[inline]
pub(crate) fn hill(x: f64, p: f64) -> f64 {
    1.0 / (1.0 + x.max(0.0).powf(p))
}

#[inline]
pub(crate) fn hill_slope(x: f64, p: f64) -> f64 {
    let x = x.max(0.0);
    if x == 0.0 {
        // x^(p-1) at 0 is 1 for p = 1 and 0 otherwise
        return if p == 1.0 { -1.0 } else { 0.0 };
    }
    let xp = x.powf(p);
    -p * xp / x / ((1.0 + xp) * (1.0 + xp))
}

/// Symmetric coupling weights `a_ij` together with the derived graph Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTopology {
    weights: DMatrix<f64>,
    laplacian: DMatrix<f64>,
    connected: bool,
}

/// Coupling weights of the built-in nine-oscillator network.
pub const TABLE1_WEIGHTS: [[f64; 9]; 9] = [
    [0.0, 0.3, 0.5, 0.0, 0.6, 0.2, 0.0, 0.7, 0.8],
    [0.3, 0.0, 0.7, 0.2, 0.1, 0.8, 0.3, 0.1, 0.5],
    [0.5, 0.7, 0.0, 0.3, 0.6, 0.2, 0.6, 0.0, 0.8],
    [0.0, 0.2, 0.3, 0.0, 0.4, 0.6, 0.2, 0.9, 0.1],
    [0.6, 0.1, 0.6, 0.4, 0.0, 0.2, 0.7, 0.3, 0.8],
    [0.2, 0.8, 0.2, 0.6, 0.2, 0.0, 0.1, 0.9, 0.3],
    [0.0, 0.3, 0.6, 0.2, 0.7, 0.1, 0.0, 0.4, 0.5],
    [0.7, 0.1, 0.0, 0.9, 0.3, 0.9, 0.4, 0.0, 0.8],
    [0.8, 0.5, 0.8, 0.1, 0.8, 0.3, 0.5, 0.8, 0.0],
];

impl CouplingTopology {
    /// Validates `weights` and builds `A[i][i] = sum_j a_ij`, `A[i][j] = -a_ij`.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::InvalidTopology(format!(
                "weight matrix must be square, got {}x{}",
                n,
                weights.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidTopology("network has no oscillators".into()));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidTopology(format!(
                    "diagonal weight a[{i}][{i}] must be 0, got {}",
                    weights[(i, i)]
                )));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidTopology(format!(
                        "weight a[{i}][{j}] must be finite and nonnegative, got {w}"
                    )));
                }
                if w != weights[(j, i)] {
                    return Err(Error::InvalidTopology(format!(
                        "weights are not symmetric: a[{i}][{j}] = {w}, a[{j}][{i}] = {}",
                        weights[(j, i)]
                    )));
                }
            }
        }

        let mut laplacian = -weights.clone();
        for i in 0..n {
            let degree: f64 = (0..n).filter(|&j| j != i).map(|j| weights[(i, j)]).sum();
            laplacian[(i, i)] = degree;
        }
        let connected = reachable_from_first(&weights) == n;
        Ok(Self {
            weights,
            laplacian,
            connected,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::InvalidTopology(format!(
                "weight matrix must be square: {n} rows but a row of length {}",
                bad.len()
            )));
        }
        Self::from_weights(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// The nine-node network used for the numerical study.
    pub fn table1() -> Self {
        Self::from_weights(DMatrix::from_fn(9, 9, |i, j| TABLE1_WEIGHTS[i][j]))
            .expect("built-in topology is valid")
    }

    pub fn complete(n: usize, weight: f64) -> Result<Self> {
        Self::from_weights(DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { 0.0 } else { weight },
        ))
    }

    /// Cycle graph `0 - 1 - ... - (n-1) - 0`. For `n = 2` this is a single edge.
    pub fn ring(n: usize, weight: f64) -> Result<Self> {
        Self::from_weights(DMatrix::from_fn(n, n, |i, j| {
            let d = i.abs_diff(j);
            if n > 1 && i != j && (d == 1 || d == n - 1) {
                weight
            } else {
                0.0
            }
        }))
    }

    pub fn uncoupled(n: usize) -> Result<Self> {
        Self::from_weights(DMatrix::zeros(n, n))
    }

    /// Same graph with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_weights(&self.weights * factor)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Whether every node reaches every other node over nonzero weights.
    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn weight_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| self.weights.row(i).iter().copied().collect())
            .collect()
    }
}

fn reachable_from_first(weights: &DMatrix<f64>) -> usize {
    let n = weights.nrows();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && weights[(i, j)] > 0.0 {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count
}

/// State of the whole network: one `(x1, x2, x3)` triple per oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x3: Vec<f64>,
}

impl NetworkState {
    pub fn zeros(n: usize) -> Self {
        Self {
            x1: vec![0.0; n],
            x2: vec![0.0; n],
            x3: vec![0.0; n],
        }
    }

    /// Every oscillator in the same state.
    pub fn consensus(n: usize, state: [f64; 3]) -> Self {
        Self {
            x1: vec![state[0]; n],
            x2: vec![state[1]; n],
            x3: vec![state[2]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.x3.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x3.len();
        if self.x1.len() != n || self.x2.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.x1.len().max(self.x2.len()),
            });
        }
        if !self.as_flat().iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("state contains non-finite entries".into()));
        }
        Ok(())
    }

    /// Stacked layout `[x1_1..x1_n, x2_1..x2_n, x3_1..x3_n]`.
    pub fn as_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(3 * self.n());
        flat.extend_from_slice(&self.x1);
        flat.extend_from_slice(&self.x2);
        flat.extend_from_slice(&self.x3);
        flat
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(3) {
            return Err(Error::Domain(format!(
                "flat state length {} is not a multiple of 3",
                flat.len()
            )));
        }
        let n = flat.len() / 3;
        Ok(Self {
            x1: flat[..n].to_vec(),
            x2: flat[n..2 * n].to_vec(),
            x3: flat[2 * n..].to_vec(),
        })
    }
}

/// Time derivative of the coupled network at `state`.
pub fn vector_field(
    state: &NetworkState,
    g: &GoodwinParams,
    c: &CouplingTopology,
) -> Result<NetworkState> {
    let n = c.n();
    for len in [state.x1.len(), state.x2.len(), state.x3.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let flat = state.as_flat();
    let mut out = vec![0.0; 3 * n];
    vector_field_flat(&flat, &mut out, g, c.laplacian());
    NetworkState::from_flat(&out)
}

/// Flat-layout vector field used by the integrator. `laplacian` is symmetric,
/// so its column-major storage doubles as row access.
pub(crate) fn vector_field_flat(
    x: &[f64],
    dx: &mut [f64],
    g: &GoodwinParams,
    laplacian: &DMatrix<f64>,
) {
    let n = laplacian.nrows();
    let lap = laplacian.as_slice();
    let (x1, rest) = x.split_at(n);
    let (x2, x3) = rest.split_at(n);
    let (d1, rest) = dx.split_at_mut(n);
    let (d2, d3) = rest.split_at_mut(n);
    for i in 0..n {
        let row = &lap[i * n..(i + 1) * n];
        let flux: f64 = row.iter().zip(x2).map(|(a, v)| a * v).sum();
        d1[i] = hill(x3[i], g.p) - g.b1 * x1[i];
        d2[i] = x1[i] - g.b2 * x2[i] - flux;
        d3[i] = x2[i] - g.b3 * x3[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nondimensionalize_unit_scales() {
        let d = DimensionalParams {
            v0: 1.0,
            v1: 1.0,
            v2: 1.0,
            k1: 1.0,
            k2: 1.0,
            k3: 1.0,
            km: 1.0,
            p: 2.0,
        };
        let g = nondimensionalize(&d).unwrap();
        assert_abs_diff_eq!(g.sigma_time.unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(g.rates(), [1.0, 1.0, 1.0]);
        assert_eq!(g.p, 2.0);
    }

    #[test]
    fn nondimensionalize_cube_roots() {
        let mut d = DimensionalParams {
            v0: 8.0,
            v1: 1.0,
            v2: 1.0,
            k1: 2.0,
            k2: 2.0,
            k3: 2.0,
            km: 1.0,
            p: 2.0,
        };
        let g = nondimensionalize(&d).unwrap();
        assert_abs_diff_eq!(g.sigma_time.unwrap(), 0.5, epsilon = 1e-15);
        for b in g.rates() {
            assert_abs_diff_eq!(b, 1.0, epsilon = 1e-15);
        }

        d = DimensionalParams {
            v0: 1.0,
            v1: 1.0,
            v2: 1.0,
            k1: 1.0,
            k2: 1.0,
            k3: 1.0,
            km: 8.0,
            p: 17.0,
        };
        let g = nondimensionalize(&d).unwrap();
        assert_abs_diff_eq!(g.sigma_time.unwrap(), 2.0, epsilon = 1e-15);
        for b in g.rates() {
            assert_abs_diff_eq!(b, 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn nondimensionalize_rejects_nonpositive() {
        let d = DimensionalParams {
            v0: 1.0,
            v1: 0.0,
            v2: 1.0,
            k1: 1.0,
            k2: 1.0,
            k3: 1.0,
            km: 1.0,
            p: 2.0,
        };
        assert!(matches!(
            nondimensionalize(&d),
            Err(Error::InvalidParameter { name: "v1", .. })
        ));
    }

    #[test]
    fn params_reject_small_hill_coefficient() {
        assert!(GoodwinParams::new(1.0, 1.0, 1.0, 0.5).is_err());
        assert!(GoodwinParams::new(1.0, -1.0, 1.0, 2.0).is_err());
        assert!(GoodwinParams::new(1.0, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn hill_values() {
        assert_eq!(hill_repression(0.0, 17.0).unwrap(), 1.0);
        assert_eq!(hill_repression(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(hill_repression(1.0, 3.5).unwrap(), 0.5);
        assert_eq!(hill_repression_slope(1.0, 2.0).unwrap(), -0.5);
        assert!(hill_repression(-0.1, 2.0).is_err());
        assert!(hill_repression_slope(-0.1, 2.0).is_err());
    }

    #[test]
    fn hill_slope_matches_finite_difference() {
        for &(x, p) in &[(0.3, 2.0), (1.1, 17.0), (2.0, 1.0), (0.9, 4.5)] {
            let h = 1e-6;
            let fd = (hill(x + h, p) - hill(x - h, p)) / (2.0 * h);
            assert_abs_diff_eq!(hill_slope(x, p), fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn laplacian_two_nodes() {
        let c = CouplingTopology::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            c.laplacian(),
            &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
        assert!(c.is_connected());
    }

    #[test]
    fn laplacian_path() {
        let c = CouplingTopology::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(c.laplacian(), &expected);
        assert!(c.is_connected());
    }

    #[test]
    fn table1_rows_sum_to_zero() {
        let c = CouplingTopology::table1();
        assert_eq!(c.n(), 9);
        assert!(c.is_connected());
        for i in 0..9 {
            assert!(c.laplacian().row(i).sum().abs() < 1e-12);
        }
    }

    #[test]
    fn topology_validation() {
        assert!(matches!(
            CouplingTopology::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]),
            Err(Error::InvalidTopology(_))
        ));
        assert!(CouplingTopology::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(CouplingTopology::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(CouplingTopology::from_rows(&[vec![0.0, 1.0]]).is_err());
        let split = CouplingTopology::from_rows(&[
            vec![0.0, 1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 2.0],
            vec![0.0, 0.0, 2.0, 0.0],
        ])
        .unwrap();
        assert!(!split.is_connected());
    }

    #[test]
    fn builtin_shapes() {
        let ring = CouplingTopology::ring(5, 0.5).unwrap();
        assert!(ring.is_connected());
        for i in 0..5 {
            assert_eq!(ring.laplacian()[(i, i)], 1.0);
        }
        let k = CouplingTopology::complete(4, 2.0).unwrap();
        assert_eq!(k.laplacian()[(0, 0)], 6.0);
        assert!(!CouplingTopology::uncoupled(3).unwrap().is_connected());
        assert!(CouplingTopology::uncoupled(1).unwrap().is_connected());
        let scaled = CouplingTopology::table1().scaled(2.0).unwrap();
        assert_eq!(scaled.weights()[(0, 1)], 0.6);
    }

    #[test]
    fn single_oscillator_equilibrium_is_fixed() {
        // f(x0) = b1 b2 b3 x0 with p = 1 and b = 1: x0 = (sqrt 5 - 1) / 2
        let g = GoodwinParams::uniform(1.0, 1.0).unwrap();
        let x0 = (5f64.sqrt() - 1.0) / 2.0;
        let s = NetworkState::consensus(1, [x0, x0, x0]);
        let c = CouplingTopology::uncoupled(1).unwrap();
        let d = vector_field(&s, &g, &c).unwrap();
        for v in d.as_flat() {
            assert!(v.abs() < 1e-15, "{v}");
        }
    }

    #[test]
    fn coupling_vanishes_at_consensus() {
        let g = GoodwinParams::new(0.4, 0.7, 0.9, 17.0).unwrap();
        let c = CouplingTopology::ring(2, 1.0).unwrap();
        let s = NetworkState::consensus(2, [0.3, 0.8, 1.2]);
        let d = vector_field(&s, &g, &c).unwrap();
        assert_eq!(d.x2[0], 0.3 - g.b2 * 0.8);
        assert_eq!(d.x2[0], d.x2[1]);
    }

    #[test]
    fn coupling_hand_evaluation() {
        let g = GoodwinParams::uniform(1.0, 2.0).unwrap();
        let c = CouplingTopology::ring(2, 1.0).unwrap();
        let s = NetworkState {
            x1: vec![0.0, 0.0],
            x2: vec![1.0, 0.0],
            x3: vec![0.0, 0.0],
        };
        let d = vector_field(&s, &g, &c).unwrap();
        assert_eq!(d.x2, vec![-2.0, 1.0]);
    }

    #[test]
    fn vector_field_dimension_mismatch() {
        let g = GoodwinParams::uniform(1.0, 2.0).unwrap();
        let c = CouplingTopology::ring(3, 1.0).unwrap();
        let s = NetworkState::zeros(2);
        assert!(matches!(
            vector_field(&s, &g, &c),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }
}
