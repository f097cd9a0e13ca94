//! Optimal WGAN critic on a discretized problem.
//!
//! Given training points `X` with critic values `v` and a weighted support
//! grid `S`, the closed form `max_i (v_i − ‖x − x_i‖)` is compared against an
//! exact linear-program solve of the critic objective
//! `mean_X D − Σ_g w_g D(g)` under pairwise 1-Lipschitz constraints.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Norm;
use crate::error::{Error, Result};

/// Largest `|X ∪ S|` accepted by the dense LP.
pub const MAX_LP_POINTS: usize = 200;

const WEIGHT_SUM_TOL: f64 = 1e-9;
const LIPSCHITZ_INPUT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticInstance {
    pub train: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub support: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub norm: Norm,
}

fn dist(a: &[f64], b: &[f64], norm: Norm) -> f64 {
    let it = a.iter().zip(b).map(|(x, y)| x - y);
    match norm {
        Norm::L1 => it.map(f64::abs).sum(),
        Norm::L2 => it.map(|d| d * d).sum::<f64>().sqrt(),
    }
}

impl CriticInstance {
    pub fn dim(&self) -> usize {
        self.train.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.train.is_empty() || self.support.is_empty() {
            return bad("training points and support must be nonempty".into());
        }
        let d = self.dim();
        if d == 0 {
            return bad("points must have at least one coordinate".into());
        }
        if self.train.iter().chain(&self.support).any(|p| p.len() != d) {
            return bad(format!("all points must have {d} coordinates"));
        }
        if self
            .train
            .iter()
            .chain(&self.support)
            .flatten()
            .chain(&self.values)
            .chain(&self.weights)
            .any(|v| !v.is_finite())
        {
            return bad("instance contains non-finite numbers".into());
        }
        if self.values.len() != self.train.len() {
            return bad(format!(
                "{} values for {} training points",
                self.values.len(),
                self.train.len()
            ));
        }
        if self.weights.len() != self.support.len() {
            return bad(format!(
                "{} weights for {} support points",
                self.weights.len(),
                self.support.len()
            ));
        }
        if self.weights.iter().any(|&w| w < 0.0) {
            return bad("support weights must be non-negative".into());
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return bad(format!("support weights sum to {total}, not 1"));
        }
        for i in 0..self.train.len() {
            for j in i + 1..self.train.len() {
                let gap = (self.values[i] - self.values[j]).abs();
                if gap > dist(&self.train[i], &self.train[j], self.norm) + LIPSCHITZ_INPUT_TOL {
                    return bad(format!("values at training points {i} and {j} violate 1-Lipschitz"));
                }
            }
        }
        Ok(())
    }

    /// Parses and validates a JSON instance record.
    pub fn from_json(text: &str) -> Result<Self> {
        let inst: CriticInstance =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("critic instance: {e}")))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// `X` followed by `S`.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.train.iter().chain(&self.support).cloned().collect()
    }

    /// Critic objective of `f`, which must be laid out as `X` then `S`.
    pub fn objective(&self, f: &CriticFunction) -> f64 {
        let n = self.train.len();
        let mean_x = f.values[..n].iter().sum::<f64>() / n as f64;
        let support: f64 = self.weights.iter().zip(&f.values[n..]).map(|(w, v)| w * v).sum();
        mean_x - support
    }

    /// Random instance with `1..=max_train` training points and `1..=max_support`
    /// support points in `[-2, 2]^dim`, strictly positive weights and values
    /// drawn from a random cone of slope at most 1.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_train: usize, max_support: usize, dim: usize, norm: Norm) -> Self {
        let point = |rng: &mut R| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
        let n = rng.random_range(1..=max_train.max(1));
        let m = rng.random_range(1..=max_support.max(1));
        let train: Vec<Vec<f64>> = (0..n).map(|_| point(rng)).collect();
        let support = (0..m).map(|_| point(rng)).collect();
        let apex = point(rng);
        let slope: f64 = rng.random_range(0.0..1.0);
        let offset: f64 = rng.random_range(-1.0..1.0);
        let values = train.iter().map(|x| offset + slope * dist(x, &apex, norm)).collect();
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        CriticInstance {
            train,
            values,
            support,
            weights: raw.iter().map(|w| w / total).collect(),
            norm,
        }
    }
}

/// `count` seeded random instances. Without a fixed `dim` or `norm` the
/// instances cycle through 1-D/2-D and L2/L1.
pub fn random_instances(
    seed: u64,
    count: usize,
    max_train: usize,
    max_support: usize,
    dim: Option<usize>,
    norm: Option<Norm>,
) -> Vec<CriticInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let dim = dim.unwrap_or(1 + k % 2);
            let norm = norm.unwrap_or(if (k / 2) % 2 == 0 { Norm::L2 } else { Norm::L1 });
            CriticInstance::random(&mut rng, max_train, max_support, dim, norm)
        })
        .collect()
}

/// A critic represented by its values on a finite point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticFunction {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// `max_i (v_i − ‖x − x_i‖)`.
pub fn closed_form_critic(x: &[f64], train: &[Vec<f64>], values: &[f64], norm: Norm) -> Result<f64> {
    if train.is_empty() {
        return Err(Error::Config("closed form needs at least one training point".into()));
    }
    if train.len() != values.len() {
        return Err(Error::Config("training points and values differ in length".into()));
    }
    if train.iter().any(|p| p.len() != x.len()) {
        return Err(Error::Config("point dimensions differ".into()));
    }
    Ok(train
        .iter()
        .zip(values)
        .map(|(xi, vi)| vi - dist(x, xi, norm))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest excess `|f(a) − f(b)| − ‖a − b‖` found.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub a: usize,
    pub b: usize,
    pub excess: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    pub passed: bool,
    /// Worst pair, when any pair exceeds the tolerance.
    pub worst: Option<Violation>,
}

pub fn verify_lipschitz(f: &CriticFunction, norm: Norm, tol: f64) -> LipschitzCheck {
    let mut worst: Option<Violation> = None;
    for a in 0..f.points.len() {
        for b in a + 1..f.points.len() {
            let excess = (f.values[a] - f.values[b]).abs() - dist(&f.points[a], &f.points[b], norm);
            if excess > tol && worst.is_none_or(|w| excess > w.excess) {
                worst = Some(Violation { a, b, excess });
            }
        }
    }
    LipschitzCheck {
        passed: worst.is_none(),
        worst,
    }
}

/// A 1-Lipschitz program over a finite point set.
///
/// Maximizes `Σ_k objective[k] · D_k` subject to `|D_a − D_b| ≤ ‖p_a − p_b‖`,
/// with optional fixed values and an optional zero-sum anchor.
pub struct LipschitzProgram<'a> {
    pub points: &'a [Vec<f64>],
    pub norm: Norm,
    pub objective: &'a [f64],
    pub pinned: &'a [Option<f64>],
    pub anchor: &'a [usize],
}

impl LipschitzProgram<'_> {
    /// Returns the maximizer and the optimal objective value.
    pub fn solve(&self) -> Result<(Vec<f64>, f64)> {
        let p = self.points.len();
        if p == 0 {
            return Err(Error::Solver("no points".into()));
        }
        if p > MAX_LP_POINTS {
            return Err(Error::Solver(format!(
                "{p} points exceed the dense solve limit of {MAX_LP_POINTS}"
            )));
        }
        if self.objective.len() != p || self.pinned.len() != p {
            return Err(Error::Solver("objective or pins do not match the point count".into()));
        }
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<_> = (0..p)
            .map(|k| {
                let bounds = match self.pinned[k] {
                    Some(v) => (v, v),
                    None => (f64::NEG_INFINITY, f64::INFINITY),
                };
                lp.add_var(self.objective[k], bounds)
            })
            .collect();
        for a in 0..p {
            for b in a + 1..p {
                if self.pinned[a].is_some() && self.pinned[b].is_some() {
                    continue;
                }
                let d = dist(&self.points[a], &self.points[b], self.norm);
                lp.add_constraint([(vars[a], 1.0), (vars[b], -1.0)], ComparisonOp::Le, d);
                lp.add_constraint([(vars[b], 1.0), (vars[a], -1.0)], ComparisonOp::Le, d);
            }
        }
        if !self.anchor.is_empty() {
            lp.add_constraint(
                self.anchor.iter().map(|&k| (vars[k], 1.0)).collect::<Vec<_>>(),
                ComparisonOp::Eq,
                0.0,
            );
        }
        let sol = lp.solve().map_err(|e| Error::Solver(e.to_string()))?;
        let values: Vec<f64> = vars.iter().map(|&v| *sol.var_value(v)).collect();
        Ok((values, sol.objective()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    /// Values on `X` then `S`.
    pub function: CriticFunction,
    pub objective: f64,
}

/// Exact maximizer of the discretized critic objective, anchored so that the
/// mean over `X` is zero.
pub fn oracle_optimal_critic(instance: &CriticInstance) -> Result<OracleSolution> {
    instance.validate()?;
    let n = instance.train.len();
    let points = instance.points();
    let mut objective = vec![1.0 / n as f64; n];
    objective.extend(instance.weights.iter().map(|w| -w));
    let pinned = vec![None; points.len()];
    let anchor: Vec<usize> = (0..n).collect();
    let (values, objective) = LipschitzProgram {
        points: &points,
        norm: instance.norm,
        objective: &objective,
        pinned: &pinned,
        anchor: &anchor,
    }
    .solve()?;
    Ok(OracleSolution {
        function: CriticFunction { points, values },
        objective,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportComparison {
    pub point: Vec<f64>,
    pub oracle: f64,
    pub closed_form: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub passed: bool,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub oracle_objective: f64,
    /// Objective of the closed form rebuilt from the oracle's training values.
    pub closed_form_objective: f64,
    pub oracle_lipschitz: LipschitzCheck,
    pub support: Vec<SupportComparison>,
}

impl TheoremReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Solves the oracle, rebuilds the closed form from its training values and
/// compares the two on every support point.
pub fn check_theorem(instance: &CriticInstance, tol: f64) -> Result<TheoremReport> {
    let oracle = oracle_optimal_critic(instance)?;
    let n = instance.train.len();
    let x_values = &oracle.function.values[..n];
    let mut support = Vec::with_capacity(instance.support.len());
    let mut rebuilt = x_values.to_vec();
    for (k, s) in instance.support.iter().enumerate() {
        let closed = closed_form_critic(s, &instance.train, x_values, instance.norm)?;
        rebuilt.push(closed);
        support.push(SupportComparison {
            point: s.clone(),
            oracle: oracle.function.values[n + k],
            closed_form: closed,
        });
    }
    let max_deviation = support
        .iter()
        .map(|c| (c.oracle - c.closed_form).abs())
        .fold(0.0, f64::max);
    let closed_form_objective = instance.objective(&CriticFunction {
        points: oracle.function.points.clone(),
        values: rebuilt,
    });
    Ok(TheoremReport {
        passed: max_deviation < tol,
        tolerance: tol,
        max_deviation,
        oracle_objective: oracle.objective,
        closed_form_objective,
        oracle_lipschitz: verify_lipschitz(&oracle.function, instance.norm, 1e-7),
        support,
    })
}

/// Closed-form values on a regular grid spanning the training points plus a
/// unit margin: `(x, D*(x))` rows in 1-D, `(x1, x2, D*(x))` rows in 2-D.
pub fn plot_rows(instance: &CriticInstance, values: &[f64], resolution: usize) -> Result<Vec<Vec<f64>>> {
    let d = instance.dim();
    if !(1..=2).contains(&d) {
        return Err(Error::Config(format!("plot data needs a 1-D or 2-D instance, got {d}-D")));
    }
    if resolution < 2 {
        return Err(Error::Config("plot resolution must be at least 2".into()));
    }
    let axis = |c: usize| -> Vec<f64> {
        let lo = instance.train.iter().map(|p| p[c]).fold(f64::INFINITY, f64::min) - 1.0;
        let hi = instance.train.iter().map(|p| p[c]).fold(f64::NEG_INFINITY, f64::max) + 1.0;
        (0..resolution)
            .map(|k| lo + (hi - lo) * k as f64 / (resolution - 1) as f64)
            .collect()
    };
    let mut rows = Vec::new();
    if d == 1 {
        for x in axis(0) {
            rows.push(vec![x, closed_form_critic(&[x], &instance.train, values, instance.norm)?]);
        }
    } else {
        let (xs, ys) = (axis(0), axis(1));
        for &x in &xs {
            for &y in &ys {
                rows.push(vec![x, y, closed_form_critic(&[x, y], &instance.train, values, instance.norm)?]);
            }
        }
    }
    Ok(rows)
}
