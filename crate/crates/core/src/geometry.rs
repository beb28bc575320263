//! Compressible vectors, sparse nets on the sphere and the statistical
//! coverage check for nets under the pseudometric `d(x, y) = |M (x - y)|`.

use std::fmt::Write as _;
use std::ops::Range;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, DenseMatrix};
use crate::rng;

/// Default cap on the net cardinality bound.
pub const DEFAULT_NET_CAP: f64 = 1e7;

/// Sparsity fraction `delta` and distance `rho`, both in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressParams {
    pub delta: f64,
    pub rho: f64,
}

impl CompressParams {
    pub fn new(delta: f64, rho: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) || !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta and rho must lie in (0, 1], got delta={delta}, rho={rho}"
            )));
        }
        Ok(Self { delta, rho })
    }

    /// Sparsity budget `m = ceil(delta n)`, at least 1.
    ///
    /// The strict `|supp x| < delta n` of the definition is folded into this
    /// budget: vectors supported on at most `m` coordinates count as sparse,
    /// and the distance comparison is `<=`.
    pub fn sparsity(&self, n: usize) -> usize {
        // absorb representation error such as 0.1 * 30 = 3.0000000000000004
        let m = (self.delta * n as f64 - 1e-9).ceil() as usize;
        m.clamp(1, n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Compressibility {
    Compressible,
    Incompressible,
}

/// Distance from `x` to the set of `m`-sparse vectors: the norm of `x` with
/// its `m` largest-magnitude coordinates zeroed (ties keep the lower index).
pub fn sparse_distance(x: &[f64], m: usize) -> Result<f64> {
    if m == 0 || m > x.len() {
        return Err(Error::SparsityOutOfRange { m, dim: x.len() });
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    Ok(order[m..].iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt())
}

/// Compressible iff `sparse_distance(x, ceil(delta n)) <= rho`.
pub fn classify(x: &[f64], p: &CompressParams) -> Result<Compressibility> {
    let nx = norm(x);
    if (nx - 1.0).abs() > 1e-8 {
        return Err(Error::NotUnit(nx));
    }
    let d = sparse_distance(x, p.sparsity(x.len()))?;
    Ok(if d <= p.rho { Compressibility::Compressible } else { Compressibility::Incompressible })
}

/// Volumetric bound `(e/delta)^(delta n) (5/rho)^(delta n)` on the size of a
/// `2 rho`-net of the compressible vectors.
pub fn net_cardinality_bound(n: usize, p: &CompressParams) -> f64 {
    let k = p.delta * n as f64;
    (std::f64::consts::E / p.delta).powf(k) * (5.0 / p.rho).powf(k)
}

/// `ceil((e/delta)^(delta n)) * ceil((5/rho)^(delta n))`, the integer form
/// the builder is checked against.
pub fn net_cardinality_bound_ceil(n: usize, p: &CompressParams) -> f64 {
    let k = p.delta * n as f64;
    (std::f64::consts::E / p.delta).powf(k).ceil() * (5.0 / p.rho).powf(k).ceil()
}

/// Points grouped by coordinate support.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereNet {
    ambient_dim: usize,
    /// Covering radius for unit vectors supported on `sparsity` coordinates.
    radius: f64,
    sparsity: usize,
    points: Vec<Vec<f64>>,
    groups: Vec<(Vec<usize>, Range<usize>)>,
    meta: NetMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetMeta {
    pub n: usize,
    pub delta: f64,
    pub rho: f64,
    pub seed: u64,
}

impl SphereNet {
    /// A net from explicit unit vectors, one group, support = all coordinates
    /// that are nonzero anywhere in the set.
    pub fn from_points(points: Vec<Vec<f64>>, radius: f64, sparsity: usize) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or_else(|| Error::InvalidParameter("empty net".into()))?;
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            let np = norm(p);
            if (np - 1.0).abs() > 1e-10 {
                return Err(Error::NotUnit(np));
            }
        }
        let support: Vec<usize> = (0..dim).filter(|&i| points.iter().any(|p| p[i] != 0.0)).collect();
        let len = points.len();
        Ok(Self {
            ambient_dim: dim,
            radius,
            sparsity,
            points,
            groups: vec![(support, 0..len)],
            meta: NetMeta { n: dim, delta: sparsity as f64 / dim as f64, rho: radius, seed: 0 },
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn meta(&self) -> NetMeta {
        self.meta
    }

    /// Euclidean distance from `x` to the nearest net point.
    pub fn nearest_distance(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// One unit vector per row, after a `# n=..,delta=..,rho=..,radius=..,seed=..` header.
    pub fn to_csv(&self) -> String {
        let m = self.meta;
        let mut out = format!(
            "# n={},delta={},rho={},radius={},seed={}\n",
            m.n, m.delta, m.rho, self.radius, m.seed
        );
        for p in &self.points {
            for (j, v) in p.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Uniform random unit vector in `R^dim`.
pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let nv = norm(&v);
        if nv > 0.0 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
}

/// Unit vector on a uniformly random support of size `m`, uniform on the
/// sphere of that coordinate subspace.
pub fn random_sparse_unit<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Vec<f64> {
    let support = index::sample(rng, n, m);
    let values = random_unit(m, rng);
    let mut x = vec![0.0; n];
    for (i, v) in support.iter().zip(values) {
        x[i] = v;
    }
    x
}

/// A random compressible unit vector: sparse unit vector plus a perturbation
/// drawn uniformly from the ball of radius `rho`, renormalized. The
/// perturbation is halved until the result classifies as compressible.
pub fn random_compressible<R: Rng + ?Sized>(n: usize, p: &CompressParams, rng: &mut R) -> Vec<f64> {
    let m = p.sparsity(n);
    let base = random_sparse_unit(n, m, rng);
    let dir = random_unit(n, rng);
    let mut radius = p.rho * rng.random::<f64>().powf(1.0 / n as f64);
    loop {
        let z: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + radius * d).collect();
        let nz = norm(&z);
        let x: Vec<f64> = z.into_iter().map(|v| v / nz).collect();
        if sparse_distance(&x, m).is_ok_and(|d| d <= p.rho) {
            return x;
        }
        radius *= 0.5;
    }
}

/// Greedy separated set on `S^(dim-1)`: random candidates are accepted when
/// farther than `separation` from every accepted point, until `patience`
/// consecutive candidates are rejected.
fn greedy_sphere_net<R: Rng + ?Sized>(dim: usize, separation: f64, patience: usize, rng: &mut R) -> Vec<Vec<f64>> {
    if dim == 1 {
        return if separation < 2.0 { vec![vec![1.0], vec![-1.0]] } else { vec![vec![1.0]] };
    }
    let sep2 = separation * separation;
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut misses = 0;
    while misses < patience {
        let c = random_unit(dim, rng);
        let far = pts
            .iter()
            .all(|p| p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() > sep2);
        if far {
            pts.push(c);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    pts
}

fn for_each_combination(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        let Some(i) = (0..m).rev().find(|&i| idx[i] != i + n - m) else { return };
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Net of unit vectors covering every `ceil(delta n)`-sparse unit vector
/// within `rho`, hence every compressible vector within `2 rho`.
///
/// Each coordinate subspace gets a greedy `rho/2`-separated set. Separation
/// `rho/2` leaves a margin for the randomized maximality, and since
/// `1 + 4/rho <= 5/rho` for `rho <= 1` each subspace stays within the
/// volumetric count `(5/rho)^m`.
pub fn build_sparse_net(n: usize, p: &CompressParams, seed: u64, cap: f64) -> Result<SphereNet> {
    let bound = net_cardinality_bound(n, p);
    if !(bound <= cap) {
        return Err(Error::CardinalityCap { bound, cap });
    }
    let m = p.sparsity(n);
    let separation = p.rho / 2.0;
    let patience = 400 * m;
    let mut r = rng::seeded(seed);
    let mut points = Vec::new();
    let mut groups = Vec::new();
    for_each_combination(n, m, |support| {
        let start = points.len();
        for local in greedy_sphere_net(m, separation, patience, &mut r) {
            let mut x = vec![0.0; n];
            for (&i, v) in support.iter().zip(local) {
                x[i] = v;
            }
            points.push(x);
        }
        groups.push((support.to_vec(), start..points.len()));
    });
    Ok(SphereNet {
        ambient_dim: n,
        radius: p.rho,
        sparsity: m,
        points,
        groups,
        meta: NetMeta { n, delta: p.delta, rho: p.rho, seed },
    })
}

/// Fraction of `probes` whose pseudometric distance `min_y |M (x - y)|` to
/// the net is at most `target_radius`.
pub fn pseudometric_coverage(net: &SphereNet, m: &DenseMatrix, probes: &[Vec<f64>], target_radius: f64) -> Result<f64> {
    if net.is_empty() {
        return Err(Error::InvalidParameter("empty net".into()));
    }
    if m.cols() != net.ambient_dim {
        return Err(Error::DimensionMismatch { expected: net.ambient_dim, got: m.cols() });
    }
    if probes.is_empty() {
        return Err(Error::InvalidParameter("no probes".into()));
    }
    let r2 = target_radius * target_radius;
    let columns = m.transpose();
    // |M (x - y)|^2 accumulated over the union of supports, exact zero when x == y
    let dist2 = |x: &[f64], y: &[f64]| -> f64 {
        let mut v = vec![0.0; m.rows()];
        for (j, (&xj, &yj)) in x.iter().zip(y).enumerate() {
            let d = xj - yj;
            if d != 0.0 {
                crate::linalg::axpy(d, columns.row(j), &mut v);
            }
        }
        v.iter().map(|a| a * a).sum()
    };
    let mut covered = 0usize;
    for x in probes {
        if x.len() != net.ambient_dim {
            return Err(Error::DimensionMismatch { expected: net.ambient_dim, got: x.len() });
        }
        // same-support points first; a hit there settles the probe
        let local = net
            .groups
            .iter()
            .filter(|(s, _)| (0..x.len()).all(|i| x[i] == 0.0 || s.binary_search(&i).is_ok()))
            .flat_map(|(_, range)| range.clone());
        let hit = local.clone().any(|k| dist2(x, &net.points[k]) <= r2)
            || net.points.iter().any(|y| dist2(x, y) <= r2);
        if hit {
            covered += 1;
        }
    }
    Ok(covered as f64 / probes.len() as f64)
}

/// Statistical check of the refined-net property: samples `probes` random
/// unit vectors supported on `net.sparsity()` coordinates and returns the
/// covered fraction under `d(x, y) = |M (x - y)|`.
pub fn check_pseudometric_net(
    net: &SphereNet,
    m: &DenseMatrix,
    probes: usize,
    target_radius: f64,
    seed: u64,
) -> Result<f64> {
    let mut r = rng::seeded(seed);
    let xs: Vec<Vec<f64>> = (0..probes)
        .map(|_| random_sparse_unit(net.ambient_dim, net.sparsity, &mut r))
        .collect();
    pseudometric_coverage(net, m, &xs, target_radius)
}
