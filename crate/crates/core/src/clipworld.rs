//! Synthetic 3D paperclip world.
//!
//! A clip is five unit segments concatenated at random orientations (a point
//! in ℝ¹⁵). Viewing applies a slant/tilt rotation followed by orthographic
//! projection; the resulting five 2D vertices (plus the implicit origin
//! vertex) are represented as ordered locations, ordered turn angles, or a
//! quantized 40×40 presence grid. Forced-choice "police lineup" trials pit a
//! same-model view against a different-model view under any pair scorer.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::knn::{Confusion, EvalReport};
use crate::num::{cast, Real};
use crate::similarity::PairScorer;
use crate::{Error, Result};

/// Number of unit segments (and of non-origin vertices).
pub const SEGMENTS: usize = 5;
/// Feature-map grid resolution per side.
pub const GRID: usize = 40;
/// The feature-map window spans `[-WINDOW, +WINDOW]²`; a 5-segment clip
/// cannot leave it.
pub const WINDOW: f64 = 5.0;
/// Feature-map cell side length.
pub const CELL: f64 = 2.0 * WINDOW / GRID as f64;

/// A paperclip: five vertices in ℝ³ (cumulative sums of five unit segment
/// vectors; the origin vertex is implicit).
#[derive(Debug, Clone, PartialEq)]
pub struct ClipModel<T> {
    points: [[T; 3]; SEGMENTS],
}

impl<T: Real> ClipModel<T> {
    pub fn from_points(points: [[T; 3]; SEGMENTS]) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[[T; 3]; SEGMENTS] {
        &self.points
    }

    /// The ℝ¹⁵ parameterization.
    pub fn flattened(&self) -> [T; 15] {
        let mut out = [T::zero(); 15];
        for (i, p) in self.points.iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(p);
        }
        out
    }
}

/// Draws a clip: five directions uniform on the unit sphere (three standard
/// normals, normalized; redrawn on vanishing norm), cumulatively summed.
pub fn generate_clip<T: Real, R: Rng + ?Sized>(rng: &mut R) -> ClipModel<T> {
    let mut points = [[T::zero(); 3]; SEGMENTS];
    let mut pos = [0.0f64; 3];
    for point in &mut points {
        let dir = loop {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm >= 1e-12 {
                break [v[0] / norm, v[1] / norm, v[2] / norm];
            }
        };
        for k in 0..3 {
            pos[k] += dir[k];
        }
        *point = [cast(pos[0]), cast(pos[1]), cast(pos[2])];
    }
    ClipModel { points }
}

/// Slant and tilt in radians: rotations about the two axes perpendicular to
/// the optical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewParams<T> {
    pub slant: T,
    pub tilt: T,
}

/// How view parameters are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewCondition {
    /// Both angles uniform on [−40°, +40°].
    Uniform40,
    /// Both angles drawn from {−45°, +45°}.
    Discrete45,
}

/// Slant and tilt drawn independently per the condition.
pub fn sample_view_params<T: Real, R: Rng + ?Sized>(
    condition: ViewCondition,
    rng: &mut R,
) -> ViewParams<T> {
    let draw = |rng: &mut R| -> T {
        let deg: f64 = match condition {
            ViewCondition::Uniform40 => rng.random_range(-40.0..=40.0),
            ViewCondition::Discrete45 => {
                if rng.random_bool(0.5) {
                    45.0
                } else {
                    -45.0
                }
            }
        };
        cast(deg.to_radians())
    };
    let slant = draw(rng);
    let tilt = draw(rng);
    ViewParams { slant, tilt }
}

/// Projected view: the five model vertices in image coordinates, vertex
/// order preserved. The origin vertex projects to (0, 0) and stays implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct View<T> {
    pub points2d: [[T; 2]; SEGMENTS],
}

/// Additive i.i.d. Gaussian noise per 2D coordinate; `sigma = 0` is the
/// noiseless imaging transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
}

impl NoiseSpec {
    pub const NONE: Self = Self { sigma: 0.0 };

    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Config(format!(
                "noise sigma must be finite and non-negative, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::NONE
    }
}

/// Rigid rotation `R = R_y(tilt)·R_x(slant)` (right-handed axes, camera
/// looking down −z), then orthographic projection dropping z, then optional
/// coordinate noise.
pub fn project<T: Real, R: Rng + ?Sized>(
    model: &ClipModel<T>,
    v: &ViewParams<T>,
    noise: &NoiseSpec,
    rng: &mut R,
) -> View<T> {
    let (cs, ss) = (v.slant.cos(), v.slant.sin());
    let (ct, st) = (v.tilt.cos(), v.tilt.sin());
    let mut points2d = [[T::zero(); 2]; SEGMENTS];
    for (out, p) in points2d.iter_mut().zip(&model.points) {
        // R_x(slant):
        let x1 = p[0];
        let y1 = cs * p[1] - ss * p[2];
        let z1 = ss * p[1] + cs * p[2];
        // R_y(tilt), then drop z:
        let x2 = ct * x1 + st * z1;
        out[0] = x2;
        out[1] = y1;
    }
    if noise.sigma > 0.0 {
        for p in &mut points2d {
            for c in p.iter_mut() {
                let n: f64 = rng.sample(StandardNormal);
                *c = *c + cast::<T>(noise.sigma * n);
            }
        }
    }
    View { points2d }
}

/// The three view representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReprKind {
    /// Flattened 2D vertex locations (ℝ¹⁰), vertex order, origin implicit.
    Locations,
    /// Signed turn angles at the four interior vertices of the 6-vertex
    /// polyline including the origin (ℝ⁴), each in (−π, π].
    Angles,
    /// Vertex-presence grid over `[−5, +5]²` at cell side 0.25, flattened
    /// row-major (ℝ¹⁶⁰⁰); includes the origin vertex.
    FeatureMap,
}

impl ReprKind {
    pub fn dim(self) -> usize {
        match self {
            ReprKind::Locations => 2 * SEGMENTS,
            ReprKind::Angles => SEGMENTS - 1,
            ReprKind::FeatureMap => GRID * GRID,
        }
    }
}

/// A view rendered into one of the representations.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewRepr<T> {
    pub kind: ReprKind,
    values: Vec<T>,
}

impl<T: Real> ViewRepr<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

/// Signed turn angles at the interior vertices of a polyline: at vertex `i`
/// the angle from edge `i−1` to edge `i` via `atan2(cross, dot)`, normalized
/// into (−π, π]. A zero-length edge is a degenerate view.
pub fn turn_angles<T: Real>(polyline: &[[T; 2]]) -> Result<Vec<T>> {
    if polyline.len() < 3 {
        return Err(Error::Shape(format!(
            "need at least 3 polyline vertices, got {}",
            polyline.len()
        )));
    }
    let edges: Vec<[T; 2]> = polyline
        .windows(2)
        .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
        .collect();
    for e in &edges {
        if e[0] == T::zero() && e[1] == T::zero() {
            return Err(Error::DegenerateView(
                "zero-length 2D edge (projection collapse)".into(),
            ));
        }
    }
    Ok(edges
        .windows(2)
        .map(|w| {
            let cross = w[0][0] * w[1][1] - w[0][1] * w[1][0];
            let dot = w[0][0] * w[1][0] + w[0][1] * w[1][1];
            let a = cross.atan2(dot);
            if a == -T::PI() {
                T::PI()
            } else {
                a
            }
        })
        .collect())
}

/// Renders a view into the requested representation.
pub fn represent<T: Real>(view: &View<T>, kind: ReprKind) -> Result<ViewRepr<T>> {
    let values = match kind {
        ReprKind::Locations => {
            let mut out = Vec::with_capacity(2 * SEGMENTS);
            for p in &view.points2d {
                out.push(p[0]);
                out.push(p[1]);
            }
            out
        }
        ReprKind::Angles => {
            let mut polyline = Vec::with_capacity(SEGMENTS + 1);
            polyline.push([T::zero(), T::zero()]);
            polyline.extend_from_slice(&view.points2d);
            turn_angles(&polyline)?
        }
        ReprKind::FeatureMap => {
            let mut grid = vec![T::zero(); GRID * GRID];
            let mut mark = |x: T, y: T| {
                let cx = cell_index(x);
                let cy = cell_index(y);
                grid[cy * GRID + cx] = T::one();
            };
            mark(T::zero(), T::zero());
            for p in &view.points2d {
                mark(p[0], p[1]);
            }
            grid
        }
    };
    Ok(ViewRepr { kind, values })
}

/// Cell index for one coordinate: floor over the window, clamped to the
/// edge cells.
fn cell_index<T: Real>(coord: T) -> usize {
    let idx = ((coord + cast::<T>(WINDOW)) / cast::<T>(CELL)).floor();
    let idx = idx.to_isize().unwrap_or(0);
    idx.clamp(0, GRID as isize - 1) as usize
}

/// Forced-choice flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialKind {
    /// Two views; decide whether they derive from one model.
    PairVerification,
    /// A target view plus one same-model and one other-model view.
    Lineup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSpec {
    pub kind: TrialKind,
    pub condition: ViewCondition,
}

/// One lineup trial: three rendered views plus the models behind them for
/// auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct LineupTrial<T> {
    pub target: ViewRepr<T>,
    pub same: ViewRepr<T>,
    pub other: ViewRepr<T>,
    pub target_model: ClipModel<T>,
    pub other_model: ClipModel<T>,
}

/// One pair-verification trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTrial<T> {
    pub target: ViewRepr<T>,
    pub candidate: ViewRepr<T>,
    pub same_model: bool,
}

fn draw_two_models<T: Real, R: Rng + ?Sized>(
    pool: Option<&[ClipModel<T>]>,
    rng: &mut R,
) -> Result<(ClipModel<T>, ClipModel<T>)> {
    match pool {
        Some(pool) => {
            if pool.len() < 2 {
                return Err(Error::Config(format!(
                    "model pool needs at least 2 clips, got {}",
                    pool.len()
                )));
            }
            let ti = rng.random_range(0..pool.len());
            let mut oi = rng.random_range(0..pool.len() - 1);
            if oi >= ti {
                oi += 1;
            }
            Ok((pool[ti].clone(), pool[oi].clone()))
        }
        None => Ok((generate_clip(rng), generate_clip(rng))),
    }
}

/// Builds a lineup trial: target and same derive from one model under
/// independent view parameters; other derives from a different model.
pub fn make_lineup_trial<T: Real, R: Rng + ?Sized>(
    spec: &TrialSpec,
    repr: ReprKind,
    noise: &NoiseSpec,
    pool: Option<&[ClipModel<T>]>,
    rng: &mut R,
) -> Result<LineupTrial<T>> {
    let (target_model, other_model) = draw_two_models(pool, rng)?;
    let view = |model: &ClipModel<T>, rng: &mut R| -> Result<ViewRepr<T>> {
        let params = sample_view_params(spec.condition, rng);
        represent(&project(model, &params, noise, rng), repr)
    };
    let target = view(&target_model, rng)?;
    let same = view(&target_model, rng)?;
    let other = view(&other_model, rng)?;
    Ok(LineupTrial {
        target,
        same,
        other,
        target_model,
        other_model,
    })
}

/// Builds a pair-verification trial; the candidate comes from the same model
/// with probability ½.
pub fn make_pair_trial<T: Real, R: Rng + ?Sized>(
    spec: &TrialSpec,
    repr: ReprKind,
    noise: &NoiseSpec,
    pool: Option<&[ClipModel<T>]>,
    rng: &mut R,
) -> Result<PairTrial<T>> {
    let same_model = rng.random_bool(0.5);
    let (target_model, other_model) = draw_two_models(pool, rng)?;
    let view = |model: &ClipModel<T>, rng: &mut R| -> Result<ViewRepr<T>> {
        let params = sample_view_params(spec.condition, rng);
        represent(&project(model, &params, noise, rng), repr)
    };
    let target = view(&target_model, rng)?;
    let candidate = if same_model {
        view(&target_model, rng)?
    } else {
        view(&other_model, rng)?
    };
    Ok(PairTrial {
        target,
        candidate,
        same_model,
    })
}

fn judge_trial<T: Real, S: PairScorer<T>>(
    scorer: &S,
    trial: &LineupTrial<T>,
) -> Result<bool> {
    let s_same = scorer.score(trial.target.values(), trial.same.values())?;
    let s_other = scorer.score(trial.target.values(), trial.other.values())?;
    // Ties count as errors.
    Ok(s_other >= s_same)
}

/// Scores pre-built lineup trials: a trial is an error when the other-model
/// view scores at least as high as the same-model view.
pub fn forced_choice_eval_on<T: Real, S: PairScorer<T>>(
    scorer: &S,
    trials: impl IntoIterator<Item = LineupTrial<T>>,
) -> Result<EvalReport> {
    let mut n_tested = 0usize;
    let mut n_errors = 0usize;
    let mut confusion = Confusion::default();
    for trial in trials {
        let error = judge_trial(scorer, &trial)?;
        n_tested += 1;
        if error {
            n_errors += 1;
        }
        confusion.record(0, usize::from(error));
    }
    Ok(EvalReport::from_counts(n_tested, n_errors, confusion))
}

/// Draws `n_trials` fresh lineup trials (new models every trial) and scores
/// them.
pub fn forced_choice_eval<T: Real, S: PairScorer<T>, R: Rng + ?Sized>(
    scorer: &S,
    spec: &TrialSpec,
    repr: ReprKind,
    noise: &NoiseSpec,
    n_trials: usize,
    rng: &mut R,
) -> Result<EvalReport> {
    if n_trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let mut n_errors = 0usize;
    let mut confusion = Confusion::default();
    for _ in 0..n_trials {
        let trial = make_lineup_trial(spec, repr, noise, None, rng)?;
        let error = judge_trial(scorer, &trial)?;
        if error {
            n_errors += 1;
        }
        confusion.record(0, usize::from(error));
    }
    Ok(EvalReport::from_counts(n_trials, n_errors, confusion))
}

/// Checks the unit-segment construction of a clip.
pub fn unit_segment_residual<T: Real>(clip: &ClipModel<T>) -> T {
    let mut prev = [T::zero(); 3];
    let mut worst = T::zero();
    for p in clip.points() {
        let mut d = T::zero();
        for k in 0..3 {
            let e = p[k] - prev[k];
            d = d + e * e;
        }
        let r = (d.sqrt() - T::one()).abs();
        if r > worst {
            worst = r;
        }
        prev = *p;
    }
    worst
}
