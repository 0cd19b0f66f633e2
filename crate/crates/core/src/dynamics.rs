//! Bicharacteristic flow on the boundary contact space over the circle,
//! radial-point location, the heteroclinic graph and the Morse sequence.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::radial::{linearization_spectrum, CriticalPointSpec, RadialClass, Sign};

/// `c cos(k theta) + s sin(k theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub order: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Trigonometric potential `V0` on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    #[serde(default)]
    pub constant: f64,
    pub harmonics: Vec<Harmonic>,
}

impl PotentialModel {
    pub fn cos(order: u32, coeff: f64) -> Self {
        Self { constant: 0.0, harmonics: vec![Harmonic { order, cos: coeff, sin: 0.0 }] }
    }

    pub fn max_order(&self) -> u32 {
        self.harmonics.iter().map(|h| h.order).max().unwrap_or(0)
    }

    /// `V0^{(d)}(theta)` for `d <= 3`.
    pub fn derivative(&self, theta: f64, d: u32) -> f64 {
        let mut v = if d == 0 { self.constant } else { 0.0 };
        for h in &self.harmonics {
            let k = h.order as f64;
            let (s, c) = (k * theta).sin_cos();
            let kd = k.powi(d as i32);
            v += kd
                * match d % 4 {
                    0 => h.cos * c + h.sin * s,
                    1 => -h.cos * s + h.sin * c,
                    2 => -h.cos * c - h.sin * s,
                    _ => h.cos * s - h.sin * c,
                };
        }
        v
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.derivative(theta, 0)
    }

    /// `p = nu^2 + mu^2 + V0(theta) - sigma`.
    pub fn symbol(&self, sigma: f64, pt: &ContactPoint) -> f64 {
        pt.nu * pt.nu + pt.mu * pt.mu + self.value(pt.theta) - sigma
    }

    fn validate(&self) -> Result<()> {
        if self.harmonics.is_empty() || self.harmonics.iter().all(|h| h.order == 0 || (h.cos == 0.0 && h.sin == 0.0)) {
            return Err(Error::InvalidInput("potential must contain a nonconstant harmonic".into()));
        }
        if self.harmonics.iter().any(|h| !h.cos.is_finite() || !h.sin.is_finite()) || !self.constant.is_finite() {
            return Err(Error::InvalidInput("potential coefficients must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactPoint {
    pub theta: f64,
    pub nu: f64,
    pub mu: f64,
}

impl ContactPoint {
    pub fn new(theta: f64, nu: f64, mu: f64) -> Self {
        Self { theta, nu, mu }
    }

    fn to_array(self) -> [f64; 3] {
        [self.theta, self.nu, self.mu]
    }

    fn from_slice(y: &[f64]) -> Self {
        Self { theta: y[0], nu: y[1], mu: y[2] }
    }
}

/// Angle difference wrapped into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

/// Legendre field `W` in `(theta, nu, mu)` components.
pub fn field_eval(pm: &PotentialModel, sigma: f64, pt: &ContactPoint) -> [f64; 3] {
    let p = pm.symbol(sigma, pt);
    [
        2.0 * pt.mu,
        2.0 * pt.mu * pt.mu - p,
        -2.0 * pt.nu * pt.mu - pm.derivative(pt.theta, 1),
    ]
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub theta: f64,
    pub nu: f64,
    pub mu: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// `max |p(t) - p(0)|`.
    pub max_p_drift: f64,
    /// Smallest increment of `nu` between consecutive samples.
    pub min_nu_step: f64,
}

impl Trajectory {
    fn new(start: TrajectorySample) -> Self {
        Self { samples: vec![start], max_p_drift: 0.0, min_nu_step: 0.0 }
    }

    fn push(&mut self, s: TrajectorySample) {
        let first = self.samples[0];
        let last = *self.samples.last().unwrap();
        self.max_p_drift = self.max_p_drift.max((s.p - first.p).abs());
        self.min_nu_step = self.min_nu_step.min(s.nu - last.nu);
        self.samples.push(s);
    }

    pub fn last(&self) -> ContactPoint {
        let s = self.samples.last().unwrap();
        ContactPoint::new(s.theta, s.nu, s.mu)
    }

    /// Monotonicity and conservation hold within `tol`.
    pub fn is_admissible(&self, tol: f64) -> bool {
        self.max_p_drift <= tol && self.min_nu_step >= -tol
    }
}

fn flow_options(tol: f64) -> OdeOptions {
    OdeOptions { rtol: tol, atol: tol * 1e-2, h0: 1e-3, h_max: 0.25, ..Default::default() }
}

fn sample(pm: &PotentialModel, sigma: f64, t: f64, y: &[f64]) -> TrajectorySample {
    let pt = ContactPoint::from_slice(y);
    TrajectorySample { t, theta: pt.theta, nu: pt.nu, mu: pt.mu, p: pm.symbol(sigma, &pt) }
}

/// Integrates `W` from `pt0` over `[0, t_end]` (negative `t_end` runs backward).
pub fn integrate_flow(pm: &PotentialModel, sigma: f64, pt0: &ContactPoint, t_end: f64, tol: f64) -> Result<Trajectory> {
    let p0 = pm.symbol(sigma, pt0);
    if p0.abs() > tol.max(1e-12) * 10.0 {
        return Err(Error::InvalidInput(format!("starting point is off-shell: p = {p0:e}")));
    }
    let y0 = pt0.to_array();
    let mut traj = Trajectory::new(sample(pm, sigma, 0.0, &y0));
    integrate(
        |y, d| d.copy_from_slice(&field_eval(pm, sigma, &ContactPoint::from_slice(y))),
        0.0,
        &y0,
        t_end,
        &flow_options(tol),
        |t, y| {
            traj.push(sample(pm, sigma, t, y));
            true
        },
    )?;
    Ok(traj)
}

/// Radial point of the circle flow with its linearization data.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RadialNode {
    pub id: usize,
    pub theta: f64,
    pub nu: f64,
    pub sign: Sign,
    pub critical_value: f64,
    pub hessian: f64,
    pub morse_index: usize,
    pub class: RadialClass,
    pub lambda: f64,
    pub r: Complex<f64>,
    /// Distance between the finite-difference Jacobian spectrum of `W` on
    /// the energy surface and `{lambda r, lambda (1 - r)}`.
    pub spectrum_residual: f64,
}

impl RadialNode {
    pub fn point(&self) -> ContactPoint {
        ContactPoint::new(self.theta, self.nu, 0.0)
    }

    pub fn outgoing(&self) -> bool {
        self.sign == Sign::Plus
    }

    pub fn is_minimum(&self) -> bool {
        self.morse_index == 0
    }
}

/// Critical points of `V0` by Newton refinement of sign changes of `V0'`.
pub fn critical_points(pm: &PotentialModel) -> Result<Vec<f64>> {
    pm.validate()?;
    let n = 4096 * pm.max_order().max(1) as usize;
    let h = 2.0 * PI / n as f64;
    let grid = |i: usize| (i as f64 + 0.5) * h;
    let mut out: Vec<f64> = Vec::new();
    for i in 0..n {
        let (a, b) = (grid(i), grid(i + 1));
        let (fa, fb) = (pm.derivative(a, 1), pm.derivative(b, 1));
        if fa == 0.0 || fa.signum() != fb.signum() {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            let mut x = 0.5 * (lo + hi);
            for _ in 0..100 {
                let f = pm.derivative(x, 1);
                if f == 0.0 {
                    break;
                }
                if f.signum() == flo.signum() {
                    lo = x;
                    flo = f;
                } else {
                    hi = x;
                }
                let step = f / pm.derivative(x, 2);
                if step.abs() < 1e-15 * x.abs().max(1.0) {
                    x -= step;
                    break;
                }
                let newton = x - step;
                x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                if hi - lo < 1e-15 {
                    break;
                }
            }
            out.push(x.rem_euclid(2.0 * PI));
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup_by(|a, b| angle_diff(*a, *b).abs() < 1e-9);
    if out.len() > 1 && angle_diff(out[0], *out.last().unwrap()).abs() < 1e-9 {
        out.pop();
    }
    for &x in &out {
        let h2 = pm.derivative(x, 2);
        if h2.abs() < 1e-8 {
            return Err(Error::Degenerate(format!("degenerate critical point of the potential at theta = {x}")));
        }
    }
    Ok(out)
}

/// Jacobian of `W` restricted to the energy surface in `(theta, mu)` by
/// central differences.
pub fn surface_jacobian(pm: &PotentialModel, sigma: f64, node: &RadialNode) -> Matrix2<f64> {
    let step = 1e-6;
    let on_shell = |theta: f64, mu: f64| {
        let w = (sigma - pm.value(theta) - mu * mu).max(0.0).sqrt();
        ContactPoint::new(theta, node.nu.signum() * w, mu)
    };
    let eval = |theta: f64, mu: f64| {
        let v = field_eval(pm, sigma, &on_shell(theta, mu));
        Vector2::new(v[0], v[2])
    };
    let (t, m) = (node.theta, 0.0);
    let c0 = (eval(t + step, m) - eval(t - step, m)) / (2.0 * step);
    let c1 = (eval(t, m + step) - eval(t, m - step)) / (2.0 * step);
    Matrix2::from_columns(&[c0, c1])
}

/// Radial points at energy `sigma`, sorted by `(theta, sign)`.
pub fn locate_radial_points(pm: &PotentialModel, sigma: f64, tol: f64) -> Result<Vec<RadialNode>> {
    let crit = critical_points(pm)?;
    let mut nodes = Vec::new();
    for &theta in &crit {
        let value = pm.value(theta);
        if (sigma - value).abs() <= tol.max(1e-12) {
            return Err(Error::ThresholdEnergy { sigma });
        }
        if sigma < value {
            continue;
        }
        let hessian = pm.derivative(theta, 2);
        let cp = CriticalPointSpec::new(format!("theta={theta:.12}"), value, vec![hessian])?;
        for sign in [Sign::Plus, Sign::Minus] {
            let rp = linearization_spectrum(&cp, &sigma, sign)?;
            let mut node = RadialNode {
                id: 0,
                theta,
                nu: rp.nu,
                sign,
                critical_value: value,
                hessian,
                morse_index: cp.morse_index(),
                class: rp.classify(),
                lambda: rp.lambda,
                r: rp.r[0],
                spectrum_residual: 0.0,
            };
            let jac = surface_jacobian(pm, sigma, &node);
            let numeric = jac.complex_eigenvalues();
            let expected = [rp.r[0] * rp.lambda, (Complex::new(1.0, 0.0) - rp.r[0]) * rp.lambda];
            let direct = (numeric[0] - expected[0]).norm().max((numeric[1] - expected[1]).norm());
            let swapped = (numeric[0] - expected[1]).norm().max((numeric[1] - expected[0]).norm());
            node.spectrum_residual = direct.min(swapped);
            nodes.push(node);
        }
    }
    for (i, n) in nodes.iter_mut().enumerate() {
        n.id = i;
    }
    Ok(nodes)
}

/// Quadratic gauge `rho = x^T P x` in `(theta - theta_c, mu)` with
/// `J^T P + P J = I`, so that `W rho = |x|^2 + O(|x|^3)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovGauge {
    pub node: usize,
    pub matrix: [[f64; 2]; 2],
    pub radius: f64,
    /// `min (W rho) / (|x|^2 / 2)` over the sampled circle.
    pub min_ratio: f64,
}

pub fn lyapunov_check(pm: &PotentialModel, sigma: f64, node: &RadialNode, radius: f64) -> Result<LyapunovGauge> {
    let j = surface_jacobian(pm, sigma, node);
    // vec(J^T P + P J) = (I kron J^T + J^T kron I) vec(P)
    let jt = j.transpose();
    let mut k = nalgebra::Matrix4::<f64>::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let mut v = 0.0;
                    if b == d {
                        v += jt[(a, c)];
                    }
                    if a == c {
                        v += j[(d, b)];
                    }
                    k[(a + 2 * b, c + 2 * d)] += v;
                }
            }
        }
    }
    let rhs = nalgebra::Vector4::new(1.0, 0.0, 0.0, 1.0);
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("Lyapunov equation is singular".into()))?;
    let p = Matrix2::new(sol[0], sol[2], sol[1], sol[3]);
    let p = (p + p.transpose()) * 0.5;
    let mut min_ratio = f64::INFINITY;
    for i in 0..64 {
        let phi = 2.0 * PI * i as f64 / 64.0;
        let x = Vector2::new(radius * phi.cos(), radius * phi.sin());
        let w2 = sigma - pm.value(node.theta + x[0]) - x[1] * x[1];
        if w2 <= 0.0 {
            continue;
        }
        let pt = ContactPoint::new(node.theta + x[0], node.nu.signum() * w2.sqrt(), x[1]);
        let w = field_eval(pm, sigma, &pt);
        let wx = Vector2::new(w[0], w[2]);
        let w_rho = 2.0 * x.dot(&(p * wx));
        min_ratio = min_ratio.min(w_rho / (0.5 * x.norm_squared()));
    }
    Ok(LyapunovGauge { node: node.id, matrix: [[p[(0, 0)], p[(0, 1)]], [p[(1, 0)], p[(1, 1)]]], radius, min_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DagOptions {
    pub seed_offset: f64,
    pub ball_radius: f64,
    pub w_stop: f64,
    pub hold_time: f64,
    pub t_max: f64,
    pub rtol: f64,
}

impl Default for DagOptions {
    fn default() -> Self {
        Self { seed_offset: 1e-4, ball_radius: 1e-3, w_stop: 1e-6, hold_time: 5.0, t_max: 400.0, rtol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SeedInfo {
    /// Index of the unstable direction.
    pub direction: usize,
    /// `+1` or `-1` along that direction.
    pub orientation: i8,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlowoutRecord {
    pub from: usize,
    pub to: usize,
    pub seed: SeedInfo,
    /// Time at which the hold criterion was first met.
    pub arrival_time: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UndecidedSeed {
    pub from: usize,
    pub seed: SeedInfo,
    pub reason: String,
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HeteroclinicDag {
    pub sigma: f64,
    pub options: DagOptions,
    pub nodes: Vec<RadialNode>,
    pub edges: Vec<FlowoutRecord>,
    pub undecided: Vec<UndecidedSeed>,
}

impl HeteroclinicDag {
    /// Distinct `(from, to)` pairs.
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.from, e.to)).collect()
    }

    /// Reflexive-transitive closure of the edge relation: `reach[i][j]`
    /// holds when `j` lies in the flowout of `i`.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.nodes.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in self.edge_set() {
            reach[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        reach
    }

    pub fn max_p_drift(&self) -> f64 {
        self.edges.iter().map(|e| e.trajectory.max_p_drift).fold(0.0, f64::max)
    }

    /// Largest decrease of `nu` between consecutive samples, as a nonnegative number.
    pub fn max_nu_violation(&self) -> f64 {
        self.edges.iter().map(|e| (-e.trajectory.min_nu_step).max(0.0)).fold(0.0, f64::max)
    }
}

/// Unstable directions `(theta, mu)` of `W` on the energy surface.
fn unstable_directions(jac: &Matrix2<f64>) -> Vec<Vector2<f64>> {
    let eig = jac.complex_eigenvalues();
    let mut out = Vec::new();
    if eig[0].im.abs() > 1e-12 {
        if eig[0].re > 0.0 {
            out.push(Vector2::new(1.0, 0.0));
            out.push(Vector2::new(0.0, 1.0));
        }
        return out;
    }
    let mut vals = [eig[0].re, eig[1].re];
    vals.sort_by(|a, b| b.total_cmp(a));
    for e in vals.into_iter().filter(|e| *e > 0.0) {
        let m = jac - Matrix2::identity() * e;
        let v = if m[(0, 1)].abs() + m[(0, 0)].abs() > m[(1, 0)].abs() + m[(1, 1)].abs() {
            Vector2::new(m[(0, 1)], -m[(0, 0)])
        } else {
            Vector2::new(m[(1, 1)], -m[(1, 0)])
        };
        let mut v = v.normalize();
        if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
            v = -v;
        }
        out.push(v);
    }
    out
}

enum SeedOutcome {
    Edge(FlowoutRecord),
    Undecided(UndecidedSeed),
}

fn follow_seed(
    pm: &PotentialModel,
    sigma: f64,
    nodes: &[RadialNode],
    from: &RadialNode,
    dir: Vector2<f64>,
    seed: SeedInfo,
    opts: &DagOptions,
) -> SeedOutcome {
    let eps = seed.offset * seed.orientation as f64;
    let theta = from.theta + eps * dir[0];
    let mu = eps * dir[1];
    let w2 = sigma - pm.value(theta) - mu * mu;
    if w2 <= 0.0 {
        return SeedOutcome::Undecided(UndecidedSeed {
            from: from.id,
            seed,
            reason: "seed leaves the energy surface".into(),
            trajectory: None,
        });
    }
    let pt0 = ContactPoint::new(theta, from.nu.signum() * w2.sqrt(), mu);
    let y0 = pt0.to_array();
    let mut traj = Trajectory::new(sample(pm, sigma, 0.0, &y0));
    let mut candidate: Option<(usize, f64)> = None;
    let mut arrived: Option<(usize, f64)> = None;
    let res = integrate(
        |y, d| d.copy_from_slice(&field_eval(pm, sigma, &ContactPoint::from_slice(y))),
        0.0,
        &y0,
        opts.t_max,
        &flow_options(opts.rtol),
        |t, y| {
            traj.push(sample(pm, sigma, t, y));
            let pt = ContactPoint::from_slice(y);
            let w = norm3(&field_eval(pm, sigma, &pt));
            let near = nodes.iter().find(|n| {
                let d = angle_diff(pt.theta, n.theta).hypot(pt.nu - n.nu).hypot(pt.mu);
                d < opts.ball_radius
            });
            match near {
                Some(n) if n.id != from.id && w < opts.w_stop => {
                    let since = match candidate {
                        Some((id, t0)) if id == n.id => t0,
                        _ => t,
                    };
                    candidate = Some((n.id, since));
                    if t - since >= opts.hold_time {
                        arrived = Some((n.id, since));
                        return false;
                    }
                }
                _ => candidate = None,
            }
            true
        },
    );
    match (res, arrived) {
        (Ok(_), Some((to, t))) => {
            SeedOutcome::Edge(FlowoutRecord { from: from.id, to, seed, arrival_time: t, trajectory: traj })
        }
        (Ok(_), None) => SeedOutcome::Undecided(UndecidedSeed {
            from: from.id,
            seed,
            reason: format!("no convergence to a radial point by t = {}", opts.t_max),
            trajectory: Some(traj),
        }),
        (Err(e), _) => SeedOutcome::Undecided(UndecidedSeed {
            from: from.id,
            seed,
            reason: e.to_string(),
            trajectory: Some(traj),
        }),
    }
}

/// Seeds `+-eps` along each unstable direction of every outgoing radial
/// point and records where the forward flow settles.
pub fn heteroclinic_dag(pm: &PotentialModel, sigma: f64, opts: &DagOptions) -> Result<HeteroclinicDag> {
    if !(opts.seed_offset > 0.0 && opts.ball_radius > 0.0 && opts.w_stop > 0.0 && opts.t_max > opts.hold_time) {
        return Err(Error::InvalidInput("flow options must be positive with t_max > hold_time".into()));
    }
    let nodes = locate_radial_points(pm, sigma, 1e-12)?;
    let mut jobs = Vec::new();
    for node in nodes.iter().filter(|n| n.outgoing()) {
        let jac = surface_jacobian(pm, sigma, node);
        for (k, dir) in unstable_directions(&jac).into_iter().enumerate() {
            for orientation in [1i8, -1] {
                jobs.push((node, dir, SeedInfo { direction: k, orientation, offset: opts.seed_offset }));
            }
        }
    }
    let outcomes: Vec<SeedOutcome> =
        jobs.par_iter().map(|(node, dir, seed)| follow_seed(pm, sigma, &nodes, node, *dir, *seed, opts)).collect();
    let mut edges = Vec::new();
    let mut undecided = Vec::new();
    for o in outcomes {
        match o {
            SeedOutcome::Edge(e) => edges.push(e),
            SeedOutcome::Undecided(u) => undecided.push(u),
        }
    }
    Ok(HeteroclinicDag { sigma, options: *opts, nodes, edges, undecided })
}

/// One step of the filtration: `added` joins `members`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MorseStep {
    pub added: usize,
    pub members: Vec<usize>,
}

/// Total order refining the flowout order on outgoing radial points:
/// descending `nu`, minima of the potential last among equal `nu`.
/// Each prefix is closed under flowout.
pub fn morse_sequence(dag: &HeteroclinicDag) -> Result<Vec<MorseStep>> {
    let reach = dag.reachability();
    let n = dag.nodes.len();
    for i in 0..n {
        for j in 0..n {
            if i != j && reach[i][j] && reach[j][i] {
                return Err(Error::Cycle(i));
            }
        }
    }
    let mut pending: Vec<&RadialNode> = dag.nodes.iter().filter(|n| n.outgoing()).collect();
    let mut placed: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    let key = |a: &RadialNode, b: &RadialNode| {
        b.nu.total_cmp(&a.nu).then(a.is_minimum().cmp(&b.is_minimum())).then(a.id.cmp(&b.id))
    };
    pending.sort_by(|a, b| key(a, b));
    while !pending.is_empty() {
        // first candidate whose whole flowout is already placed
        let pos = pending
            .iter()
            .position(|c| pending.iter().all(|o| o.id == c.id || !reach[c.id][o.id]))
            .ok_or(Error::Cycle(pending[0].id))?;
        let node = pending.remove(pos);
        placed.push(node.id);
        steps.push(MorseStep { added: node.id, members: placed.clone() });
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos2() -> PotentialModel {
        PotentialModel::cos(2, 1.0)
    }

    #[test]
    fn field_vanishes_at_radial_points() {
        let pm = cos2();
        let nodes = locate_radial_points(&pm, 2.0, 1e-12).unwrap();
        for n in &nodes {
            assert!(norm3(&field_eval(&pm, 2.0, &n.point())) < 1e-12);
        }
    }

    #[test]
    fn field_matches_formula_and_finite_differences() {
        let pm = cos2();
        let pt = ContactPoint::new(PI / 4.0, 1.0, 1.0);
        assert!(pm.symbol(2.0, &pt).abs() < 1e-15);
        let w = field_eval(&pm, 2.0, &pt);
        let h = 1e-6;
        let p = |th: f64, nu: f64, mu: f64| pm.symbol(2.0, &ContactPoint::new(th, nu, mu));
        let dp_dth = (p(pt.theta + h, pt.nu, pt.mu) - p(pt.theta - h, pt.nu, pt.mu)) / (2.0 * h);
        let dp_dnu = (p(pt.theta, pt.nu + h, pt.mu) - p(pt.theta, pt.nu - h, pt.mu)) / (2.0 * h);
        let dp_dmu = (p(pt.theta, pt.nu, pt.mu + h) - p(pt.theta, pt.nu, pt.mu - h)) / (2.0 * h);
        let p0 = p(pt.theta, pt.nu, pt.mu);
        let expected = [dp_dmu, pt.mu * dp_dmu - p0, -dp_dnu * pt.mu - dp_dth];
        for k in 0..3 {
            assert!((w[k] - expected[k]).abs() < 1e-8);
        }
        assert_eq!(w[1], 2.0 * pt.mu * pt.mu);
    }

    #[test]
    fn symbol_is_transported_by_its_own_multiple() {
        // W p = -2 nu p
        let pm = PotentialModel {
            constant: 0.3,
            harmonics: vec![Harmonic { order: 1, cos: 0.4, sin: -0.2 }, Harmonic { order: 3, cos: 0.1, sin: 0.5 }],
        };
        for &(th, nu, mu) in &[(0.3, 0.7, -0.2), (2.0, -1.1, 0.4), (5.0, 0.0, 1.5)] {
            let pt = ContactPoint::new(th, nu, mu);
            let w = field_eval(&pm, 1.3, &pt);
            let grad = [pm.derivative(th, 1), 2.0 * nu, 2.0 * mu];
            let wp: f64 = (0..3).map(|k| w[k] * grad[k]).sum();
            assert!((wp + 2.0 * nu * pm.symbol(1.3, &pt)).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_points_of_cos2() {
        let pm = cos2();
        let crit = critical_points(&pm).unwrap();
        let expected = [0.0, PI / 2.0, PI, 1.5 * PI];
        assert_eq!(crit.len(), 4);
        for (c, e) in crit.iter().zip(expected) {
            assert!(angle_diff(*c, e).abs() < 1e-12);
        }
        let nodes = locate_radial_points(&pm, 2.0, 1e-12).unwrap();
        assert_eq!(nodes.len(), 8);
        assert_eq!(nodes.iter().filter(|n| n.outgoing()).count(), 4);
        for n in &nodes {
            assert!(n.spectrum_residual < 1e-6, "{}", n.spectrum_residual);
        }
        let at = |sigma: f64| locate_radial_points(&pm, sigma, 1e-12).unwrap();
        let mid = at(1.5);
        for n in mid.iter().filter(|n| n.outgoing()) {
            let want = if n.is_minimum() { 2.5f64.sqrt() } else { 0.5f64.sqrt() };
            assert!((n.nu - want).abs() < 1e-12);
        }
        let low = at(0.5);
        assert_eq!(low.len(), 4);
        assert!(low.iter().all(|n| n.is_minimum()));
        assert!(matches!(locate_radial_points(&pm, 1.0, 1e-12), Err(Error::ThresholdEnergy { .. })));
    }

    #[test]
    fn stationary_trajectory_at_radial_point() {
        let pm = cos2();
        let pt = ContactPoint::new(PI / 2.0, 3f64.sqrt(), 0.0);
        let tr = integrate_flow(&pm, 2.0, &pt, 10.0, 1e-10).unwrap();
        let end = tr.last();
        assert!(angle_diff(end.theta, pt.theta).abs() < 1e-12 && (end.nu - pt.nu).abs() < 1e-12);
    }

    #[test]
    fn off_shell_start_rejected() {
        let pm = cos2();
        assert!(integrate_flow(&pm, 2.0, &ContactPoint::new(0.0, 0.0, 0.0), 1.0, 1e-10).is_err());
    }

    #[test]
    fn cos2_dag_and_sequence() {
        let pm = cos2();
        let dag = heteroclinic_dag(&pm, 2.0, &DagOptions::default()).unwrap();
        assert!(dag.undecided.is_empty());
        let name = |id: usize| {
            let n = &dag.nodes[id];
            ((n.theta / (PI / 2.0)).round() as i64, n.outgoing())
        };
        let edges: BTreeSet<_> = dag.edge_set().into_iter().map(|(a, b)| (name(a), name(b))).collect();
        let expected: BTreeSet<_> = [(0, 1), (0, 3), (2, 1), (2, 3)]
            .into_iter()
            .map(|(a, b)| ((a, true), (b, true)))
            .collect();
        assert_eq!(edges, expected);
        assert!(dag.max_p_drift() <= 1e-9);
        assert!(dag.max_nu_violation() <= 1e-9);

        let seq = morse_sequence(&dag).unwrap();
        assert_eq!(seq.len(), 4);
        let order: Vec<bool> = seq.iter().map(|s| dag.nodes[s.added].is_minimum()).collect();
        assert_eq!(order, vec![true, true, false, false]);
        let reach = dag.reachability();
        for step in &seq {
            for &m in &step.members {
                for (j, r) in reach[m].iter().enumerate() {
                    if *r && dag.nodes[j].outgoing() {
                        assert!(step.members.contains(&j));
                    }
                }
            }
        }

        let half = heteroclinic_dag(&pm, 2.0, &DagOptions { seed_offset: 5e-5, ..DagOptions::default() }).unwrap();
        assert_eq!(half.edge_set(), dag.edge_set());
    }

    #[test]
    fn ties_place_minima_last_and_singletons_work() {
        let node = |id: usize, nu: f64, morse_index: usize| RadialNode {
            id,
            theta: id as f64,
            nu,
            sign: Sign::Plus,
            critical_value: 0.0,
            hessian: if morse_index == 0 { 1.0 } else { -1.0 },
            morse_index,
            class: RadialClass::SourceSink,
            lambda: -2.0 * nu,
            r: Complex::new(0.25, 0.0),
            spectrum_residual: 0.0,
        };
        let mut dag = HeteroclinicDag {
            sigma: 1.0,
            options: DagOptions::default(),
            nodes: vec![node(0, 1.0, 0), node(1, 1.0, 1)],
            edges: vec![],
            undecided: vec![],
        };
        let seq = morse_sequence(&dag).unwrap();
        assert_eq!(seq.iter().map(|s| s.added).collect::<Vec<_>>(), vec![1, 0]);
        dag.nodes.truncate(1);
        assert_eq!(morse_sequence(&dag).unwrap().len(), 1);
    }

    #[test]
    fn lyapunov_gauge_near_radial_points() {
        let pm = cos2();
        for n in locate_radial_points(&pm, 2.0, 1e-12).unwrap() {
            let g = lyapunov_check(&pm, 2.0, &n, 1e-3).unwrap();
            assert!(g.min_ratio >= 1.0, "node {} ratio {}", n.id, g.min_ratio);
        }
    }

    #[test]
    fn single_well_has_isolated_minimum() {
        let pm = PotentialModel { constant: 0.0, harmonics: vec![Harmonic { order: 1, cos: -1.0, sin: 0.0 }] };
        let dag = heteroclinic_dag(&pm, 0.5, &DagOptions::default()).unwrap();
        assert_eq!(dag.nodes.len(), 2);
        assert!(dag.edges.is_empty() && dag.undecided.is_empty());
    }
}
