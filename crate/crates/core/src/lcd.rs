//! Essential least common denominator
//! `LCD_{alpha,r}(x) = inf { t > 0 : dist(t x, Z^n) < min(r |t x|, alpha) }`
//! of vectors and of two-dimensional subspaces.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, OrthonormalBasis};

/// Absolute width at which the boundary bisection stops.
pub const BISECTION_TOL: f64 = 1e-8;

/// Default number of angular probes for [`lcd_subspace2`].
pub const DEFAULT_ANGULAR_POINTS: usize = 720;

/// Multiple of `sqrt(n)` used when alpha is `auto`.
pub const AUTO_ALPHA_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha {
    Fixed(f64),
    /// `0.1 sqrt(n)` for vectors in `R^n`.
    Auto,
}

impl Alpha {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            Alpha::Fixed(a) => a,
            Alpha::Auto => AUTO_ALPHA_FACTOR * (n as f64).sqrt(),
        }
    }
}

impl std::str::FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(Alpha::Auto);
        }
        let a: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("bad alpha `{s}`")))?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {a}")));
        }
        Ok(Alpha::Fixed(a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcdQuery {
    pub alpha: Alpha,
    pub r: f64,
    /// Search horizon.
    pub t_max: f64,
    /// Grid pitch. `None` means `1e-4 max(1, t_max) / |x|`.
    pub step: Option<f64>,
}

impl LcdQuery {
    pub fn new(alpha: Alpha, r: f64, t_max: f64) -> Result<Self> {
        let q = Self { alpha, r, t_max, step: None };
        q.validate()?;
        Ok(q)
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        self.step = Some(step);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::InvalidParameter(format!("r must lie in (0, 1), got {}", self.r)));
        }
        if let Alpha::Fixed(a) = self.alpha {
            if !(a > 0.0) {
                return Err(Error::InvalidParameter(format!("alpha must be positive, got {a}")));
            }
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {}", self.t_max)));
        }
        if let Some(s) = self.step {
            if !(s > 0.0 && s <= self.t_max) {
                return Err(Error::InvalidParameter(format!("step must lie in (0, t_max], got {s}")));
            }
        }
        Ok(())
    }

    /// Grid pitch for a vector of norm `x_norm`.
    pub fn step_for(&self, x_norm: f64) -> f64 {
        self.step.unwrap_or(1e-4 * self.t_max.max(1.0) / x_norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Uniform grid scan.
    Oracle,
    /// Grid scan with Lipschitz skipping.
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LcdValue {
    Finite(f64),
    /// No qualifying `t` up to the horizon.
    Censored(f64),
}

impl LcdValue {
    /// The value, with censored results read as `+inf`.
    pub fn as_lower_bound(&self) -> f64 {
        match *self {
            LcdValue::Finite(v) => v,
            LcdValue::Censored(_) => f64::INFINITY,
        }
    }

    /// Whether the LCD is known to be at least `level`.
    pub fn at_least(&self, level: f64) -> bool {
        match *self {
            LcdValue::Finite(v) => v >= level,
            LcdValue::Censored(t) => t >= level,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, LcdValue::Censored(_))
    }
}

impl fmt::Display for LcdValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LcdValue::Finite(v) => write!(f, "{v}"),
            LcdValue::Censored(t) => write!(f, "censored:{t}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcdResult {
    pub value: LcdValue,
    pub witness_t: Option<f64>,
    pub achieved_dist: f64,
    pub certified: bool,
}

impl LcdResult {
    /// `value,witness_t,achieved_dist,certified`
    pub fn to_csv_line(&self) -> String {
        let w = self.witness_t.map(|t| t.to_string()).unwrap_or_default();
        format!("{},{},{},{}", self.value, w, self.achieved_dist, self.certified)
    }
}

/// `sqrt(sum_i (t x_i - round(t x_i))^2)`, rounding half to even.
pub fn torus_distance(x: &[f64], t: f64) -> f64 {
    x.iter()
        .map(|&xi| {
            let y = t * xi;
            let d = y - y.round_ties_even();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

struct Problem<'a> {
    x: &'a [f64],
    x_norm: f64,
    alpha: f64,
    r: f64,
}

impl Problem<'_> {
    fn threshold(&self, t: f64) -> f64 {
        (self.r * t * self.x_norm).min(self.alpha)
    }

    /// `(g(t), threshold(t))`
    fn eval(&self, t: f64) -> (f64, f64) {
        (torus_distance(self.x, t), self.threshold(t))
    }

    fn holds(&self, t: f64) -> bool {
        let (g, thr) = self.eval(t);
        g < thr
    }

    /// Boundary crossing inside `(lo, hi]` where the inequality fails at
    /// `lo` and holds at `hi`, approached from above.
    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    fn found(&self, t: f64, certified: bool) -> LcdResult {
        LcdResult {
            value: LcdValue::Finite(t),
            witness_t: Some(t),
            achieved_dist: torus_distance(self.x, t),
            certified,
        }
    }

    fn censored(&self, t_max: f64, certified: bool) -> LcdResult {
        LcdResult {
            value: LcdValue::Censored(t_max),
            witness_t: None,
            achieved_dist: torus_distance(self.x, t_max),
            certified,
        }
    }
}

/// LCD of a nonzero vector.
///
/// Oracle mode visits `t = j * step` for `j = 1, 2, ...` and bisects the
/// first bracket in which the inequality switches on. Fast mode uses that
/// `g(t) = dist(t x, Z^n)` is `|x|`-Lipschitz and the threshold is
/// `r|x|`-Lipschitz: from a failing point with gap `g - thr` no qualifying
/// `t` exists within `(g - thr) / ((1 + r)|x|)`, so the scan jumps by that
/// amount whenever it exceeds the grid pitch. The scan starts at
/// `1/(2|x|_inf)`, below which no `t` qualifies. `certified` is true when
/// every advance before the final bracket was such a jump.
pub fn lcd_vector(x: &[f64], q: &LcdQuery, mode: SearchMode) -> Result<LcdResult> {
    q.validate()?;
    let x_norm = norm(x);
    if x.is_empty() || x_norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let p = Problem { x, x_norm, alpha: q.alpha.resolve(x.len()), r: q.r };
    let step = q.step_for(x_norm);
    Ok(match mode {
        SearchMode::Oracle => scan_oracle(&p, step, q.t_max),
        SearchMode::Fast => scan_fast(&p, step, q.t_max),
    })
}

fn scan_oracle(p: &Problem<'_>, step: f64, t_max: f64) -> LcdResult {
    let mut j: u64 = 1;
    loop {
        let t = j as f64 * step;
        if t > t_max {
            return p.censored(t_max, false);
        }
        if p.holds(t) {
            let lo = (j - 1) as f64 * step;
            return p.found(p.bisect(lo, t), false);
        }
        j += 1;
    }
}

fn scan_fast(p: &Problem<'_>, step: f64, t_max: f64) -> LcdResult {
    let lipschitz = (1.0 + p.r) * p.x_norm;
    // below 1/(2 |x|_inf) every coordinate rounds to 0, so g(t) = t|x| and
    // the inequality cannot hold
    let x_inf = p.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut prev = 0.0;
    let mut t = (0.5 / x_inf).max(step).min(t_max);
    let mut certified = true;
    // whether the advance that reached `t` was a plain grid step
    let mut last_uncertified = false;
    loop {
        let (g, thr) = p.eval(t);
        if g < thr {
            return p.found(p.bisect(prev, t), certified);
        }
        if last_uncertified {
            certified = false;
        }
        if t >= t_max {
            return p.censored(t_max, certified);
        }
        let safe = (g - thr) / lipschitz;
        let next = (t + safe.max(step)).min(t_max);
        last_uncertified = safe < next - t;
        prev = t;
        t = next;
    }
}

/// Upper estimate of the LCD of a plane: minimizes [`lcd_vector`] over the
/// unit vectors `cos(theta) h1 + sin(theta) h2`, `theta = pi i / points`,
/// then refines around the best grid angle by golden-section search. Never
/// certified. Censored directions count as `+inf`; ties keep the smallest
/// angle index.
pub fn lcd_subspace2(h: &OrthonormalBasis, q: &LcdQuery, angular_points: usize, mode: SearchMode) -> Result<LcdResult> {
    if h.rank() != 2 {
        return Err(Error::WrongSubspaceDimension(h.rank()));
    }
    if angular_points == 0 {
        return Err(Error::InvalidParameter("angular_points must be positive".into()));
    }
    let (h1, h2) = (h.vector(0), h.vector(1));
    let direction = |theta: f64| -> Vec<f64> {
        let (s, c) = theta.sin_cos();
        h1.iter().zip(h2).map(|(a, b)| c * a + s * b).collect()
    };
    let at = |theta: f64| lcd_vector(&direction(theta), q, mode);
    let pitch = std::f64::consts::PI / angular_points as f64;

    let grid: Vec<LcdResult> = (0..angular_points)
        .into_par_iter()
        .map(|i| at(i as f64 * pitch))
        .collect::<Result<_>>()?;
    let (best_i, mut best) = grid
        .iter()
        .enumerate()
        .fold((0, grid[0]), |acc, (i, r)| {
            if r.value.as_lower_bound() < acc.1.value.as_lower_bound() {
                (i, *r)
            } else {
                acc
            }
        });

    if angular_points > 1 && !best.value.is_censored() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let center = best_i as f64 * pitch;
        let (mut a, mut b) = (center - pitch, center + pitch);
        let mut c = b - golden * (b - a);
        let mut d = a + golden * (b - a);
        let mut fc = at(c)?;
        let mut fd = at(d)?;
        for _ in 0..40 {
            for f in [fc, fd] {
                if f.value.as_lower_bound() < best.value.as_lower_bound() {
                    best = f;
                }
            }
            if fc.value.as_lower_bound() <= fd.value.as_lower_bound() {
                b = d;
                d = c;
                fd = fc;
                c = b - golden * (b - a);
                fc = at(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + golden * (b - a);
                fd = at(d)?;
            }
            if b - a < 1e-10 {
                break;
            }
        }
        for f in [fc, fd] {
            if f.value.as_lower_bound() < best.value.as_lower_bound() {
                best = f;
            }
        }
    }
    best.certified = false;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormal_basis;

    fn query(alpha: f64, r: f64, t_max: f64) -> LcdQuery {
        LcdQuery::new(Alpha::Fixed(alpha), r, t_max).unwrap()
    }

    fn value(r: &LcdResult) -> f64 {
        match r.value {
            LcdValue::Finite(v) => v,
            LcdValue::Censored(_) => panic!("unexpected censoring"),
        }
    }

    #[test]
    fn torus_distance_examples() {
        assert_eq!(torus_distance(&[1.0, 0.0], 0.5), 0.5);
        assert_eq!(torus_distance(&[3.0, -2.0, 5.0], 2.0), 0.0);
        assert!((torus_distance(&[0.5, 0.5], 1.0) - 0.5f64.sqrt()).abs() < 1e-15);
        // 2.5 rounds to 2
        assert_eq!(torus_distance(&[2.5], 1.0), 0.5);
    }

    #[test]
    fn first_basis_vector() {
        // |t - 1| < 0.1 t first holds just above 1/1.1
        for mode in [SearchMode::Oracle, SearchMode::Fast] {
            let r = lcd_vector(&[1.0, 0.0, 0.0], &query(10.0, 0.1, 5.0), mode).unwrap();
            assert!((value(&r) - 1.0 / 1.1).abs() < 1e-7, "{mode:?}: {r:?}");
            let t = r.witness_t.unwrap();
            assert!(r.achieved_dist < (0.1 * t).min(10.0));
        }
    }

    #[test]
    fn fast_mode_certifies_clean_crossing() {
        let r = lcd_vector(&[1.0, 0.0, 0.0], &query(10.0, 0.1, 5.0), SearchMode::Fast).unwrap();
        assert!(r.certified);
    }

    #[test]
    fn diagonal_direction() {
        let s = 0.5f64.sqrt();
        for mode in [SearchMode::Oracle, SearchMode::Fast] {
            let r = lcd_vector(&[s, s], &query(10.0, 0.1, 5.0), mode).unwrap();
            assert!((value(&r) - 2f64.sqrt() / 1.1).abs() < 1e-7, "{r:?}");
        }
    }

    #[test]
    fn golden_direction_meets_lattice_point_two_three() {
        // |t x - (2, 3)| = 0.05 t, smaller root of
        // (1 - r^2) t^2 - 2 <x, p> t + |p|^2 = 0
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let nn = (1.0 + phi * phi).sqrt();
        let x = [1.0 / nn, phi / nn];
        let r = 0.05;
        let c = (2.0 + 3.0 * phi) / nn;
        let a = 1.0 - r * r;
        let analytic = (c - (c * c - a * 13.0).sqrt()) / a;
        assert!((analytic - 3.481362).abs() < 1e-6);
        for mode in [SearchMode::Oracle, SearchMode::Fast] {
            let res = lcd_vector(&x, &query(0.3, r, 10.0), mode).unwrap();
            assert!((value(&res) - analytic).abs() < 1e-6, "{res:?}");
        }
    }

    #[test]
    fn irrational_direction_in_r20_is_censored() {
        let v: Vec<f64> = (1..=20).map(|i| ((i as f64) * 2f64.sqrt()).fract() - 0.5).collect();
        let nv = norm(&v);
        let x: Vec<f64> = v.iter().map(|a| a / nv).collect();
        for mode in [SearchMode::Oracle, SearchMode::Fast] {
            let res = lcd_vector(&x, &query(0.3, 0.05, 10.0), mode).unwrap();
            assert_eq!(res.value, LcdValue::Censored(10.0));
            assert_eq!(res.witness_t, None);
        }
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(lcd_vector(&[0.0, 0.0], &query(1.0, 0.1, 1.0), SearchMode::Fast), Err(Error::ZeroVector));
        assert!(LcdQuery::new(Alpha::Fixed(1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn integer_direction_bounded_by_norm() {
        let v = [3.0, -1.0, 2.0, 0.0, 5.0];
        let nv = norm(&v);
        let x: Vec<f64> = v.iter().map(|a| a / nv).collect();
        // t = |v| lands on the lattice point v
        assert!(torus_distance(&x, nv) < 1e-12);
        for mode in [SearchMode::Oracle, SearchMode::Fast] {
            let r = lcd_vector(&x, &query(1.0, 0.2, 10.0), mode).unwrap();
            assert!(value(&r) <= nv, "{r:?}");
        }
    }

    #[test]
    fn plane_through_e1() {
        let mut e1 = vec![0.0; 6];
        e1[0] = 1.0;
        let mut e2 = vec![0.0; 6];
        e2[1] = 1.0;
        let h = orthonormal_basis(&[e1.clone(), e2]).unwrap();
        let q = query(10.0, 0.1, 5.0);
        let r = lcd_subspace2(&h, &q, DEFAULT_ANGULAR_POINTS, SearchMode::Fast).unwrap();
        assert!(value(&r) <= 1.0 / 1.1 + 1e-4);
        assert!(!r.certified);
    }

    #[test]
    fn single_angle_is_first_basis_vector() {
        let h = orthonormal_basis(&[vec![0.6, 0.8, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let q = query(10.0, 0.1, 10.0);
        let sub = lcd_subspace2(&h, &q, 1, SearchMode::Oracle).unwrap();
        let direct = lcd_vector(h.vector(0), &q, SearchMode::Oracle).unwrap();
        assert_eq!(sub.value, direct.value);
        assert!(matches!(
            lcd_subspace2(&orthonormal_basis(&[vec![1.0, 0.0]]).unwrap(), &q, 4, SearchMode::Fast),
            Err(Error::WrongSubspaceDimension(1))
        ));
    }

    #[test]
    fn auto_alpha() {
        assert!((Alpha::Auto.resolve(100) - 1.0).abs() < 1e-15);
        assert_eq!("auto".parse::<Alpha>().unwrap(), Alpha::Auto);
        assert_eq!("2.5".parse::<Alpha>().unwrap(), Alpha::Fixed(2.5));
        assert!("-1".parse::<Alpha>().is_err());
    }

    #[test]
    fn csv_line() {
        let r = lcd_vector(&[1.0], &query(10.0, 0.1, 5.0), SearchMode::Oracle).unwrap();
        let line = r.to_csv_line();
        assert!(line.starts_with("0.9090909"));
        assert!(line.ends_with(",false"));
    }
}
