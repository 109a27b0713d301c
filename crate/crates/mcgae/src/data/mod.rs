//! Synthetic run-to-failure data: generation, labeling, standardization,
//! window framing, leave-one-run-out folds and stratified batch sampling.
//!
//! A [`Run`] is one run-to-failure recording. Two cutoff indices segment it:
//! frames before `p_h` are normal, frames in `[p_h, p_f)` are unlabeled, and
//! frames at or after `p_f` are anomalous. The label sequence of a valid run
//! therefore always matches `N* U* A*`.

mod batch;
mod fold;
mod io;

pub use batch::{sample_batches, Batch, BatchConfig, BatchSample, BatchStream};
pub use fold::{assemble_fold, build_folds, FoldAssembly, FoldMember, FoldSpec};
pub use io::{load_manifest, load_run, read_dataset, save_run, write_dataset, Manifest, ManifestEntry};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_for;

/// Per-frame condition label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Normal,
    Unlabeled,
    Anomalous,
}

impl Label {
    /// Label of frame `index` under cutoffs `p_h` / `p_f`.
    pub fn of(index: usize, p_h: usize, p_f: usize) -> Label {
        if index < p_h {
            Label::Normal
        } else if index < p_f {
            Label::Unlabeled
        } else {
            Label::Anomalous
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Unlabeled => "unlabeled",
            Label::Anomalous => "anomalous",
        }
    }

    pub fn parse(s: &str) -> Result<Label> {
        match s {
            "normal" => Ok(Label::Normal),
            "unlabeled" => Ok(Label::Unlabeled),
            "anomalous" => Ok(Label::Anomalous),
            other => Err(Error::parse(format!("unknown label {other:?}"))),
        }
    }
}

/// Identifier of a run within a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RunId(String);

impl RunId {
    pub fn new(id: impl Into<String>) -> Self {
        RunId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for RunId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Affine map `x -> (x - mean) / scale` applied per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

/// One run-to-failure recording: time-ordered feature frames plus cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    run_id: RunId,
    frames: Vec<Vec<f64>>,
    timestamps: Vec<f64>,
    p_h: usize,
    p_f: usize,
    /// Map that produced these frames, when the run has been standardized.
    pub standardization: Option<Standardization>,
}

impl Run {
    pub fn new(
        run_id: RunId,
        frames: Vec<Vec<f64>>,
        timestamps: Vec<f64>,
        p_h: usize,
        p_f: usize,
    ) -> Result<Run> {
        if frames.is_empty() {
            return Err(Error::data(format!("run {run_id}: no frames")));
        }
        let dim = frames[0].len();
        if dim == 0 {
            return Err(Error::data(format!("run {run_id}: zero feature dimension")));
        }
        if frames.iter().any(|f| f.len() != dim) {
            return Err(Error::data(format!("run {run_id}: ragged feature frames")));
        }
        if frames.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::data(format!("run {run_id}: non-finite feature value")));
        }
        if timestamps.len() != frames.len() {
            return Err(Error::data(format!(
                "run {run_id}: {} timestamps for {} frames",
                timestamps.len(),
                frames.len()
            )));
        }
        if timestamps.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::data(format!(
                "run {run_id}: timestamps not strictly increasing"
            )));
        }
        if !(0 < p_h && p_h <= p_f && p_f <= frames.len()) {
            return Err(Error::data(format!(
                "run {run_id}: cutoffs violate 0 < p_h <= p_f <= {} (p_h={p_h}, p_f={p_f})",
                frames.len()
            )));
        }
        Ok(Run {
            run_id,
            frames,
            timestamps,
            p_h,
            p_f,
            standardization: None,
        })
    }

    pub fn run_id(&self) -> &RunId {
        &self.run_id
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.frames[0].len()
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &[f64] {
        &self.frames[index]
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    /// End of the normal segment.
    pub fn p_h(&self) -> usize {
        self.p_h
    }

    /// Start of the anomalous segment.
    pub fn p_f(&self) -> usize {
        self.p_f
    }

    /// Index of the first anomalous frame (alias of `p_f`).
    pub fn t_a(&self) -> usize {
        self.p_f
    }

    pub fn label_of(&self, index: usize) -> Label {
        Label::of(index, self.p_h, self.p_f)
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.len()).map(|i| self.label_of(i))
    }
}

/// Degradation trajectory of the latent health variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradationShape {
    /// Strictly increasing ramp.
    Linear,
    /// Slow start, accelerating towards end of life.
    Exponential,
    /// Healthy plateau followed by a linear ramp.
    Piecewise,
}

/// Configuration of the synthetic run-to-failure generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_runs: usize,
    /// Inclusive range of frames per run.
    pub frames_per_run: (usize, usize),
    pub feature_dim: usize,
    pub degradation_shape: DegradationShape,
    pub noise_std: f64,
    /// Fractions of the run length at which `p_h` and `p_f` sit.
    pub cutoff_fractions: (f64, f64),
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::config("n_runs must be positive"));
        }
        let (lo, hi) = self.frames_per_run;
        if lo == 0 || lo > hi {
            return Err(Error::config(format!(
                "frames_per_run range ({lo}, {hi}) is empty"
            )));
        }
        if self.feature_dim == 0 {
            return Err(Error::config("feature_dim must be positive"));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::config("noise_std must be finite and >= 0"));
        }
        let (c_h, c_f) = self.cutoff_fractions;
        if !(0.0 < c_h && c_h < c_f && c_f < 1.0) {
            return Err(Error::config(format!(
                "cutoff fractions must satisfy 0 < {c_h} < {c_f} < 1"
            )));
        }
        if ((lo as f64) * c_h).floor() < 2.0 {
            return Err(Error::config(
                "p_h would fall below 2 frames; raise frames_per_run or cutoff",
            ));
        }
        Ok(())
    }
}

fn degradation_level(shape: DegradationShape, u: f64) -> f64 {
    match shape {
        DegradationShape::Linear => u,
        DegradationShape::Exponential => ((3.0 * u).exp() - 1.0) / (3.0f64.exp() - 1.0),
        DegradationShape::Piecewise => ((u - 0.3) / 0.7).max(0.0),
    }
}

/// Generate a labeled synthetic dataset.
///
/// Each run follows a non-decreasing latent degradation level `d(t)`; frames
/// are a fixed per-dataset linear mixing of `[d(t), 1]` plus Gaussian noise.
/// The mixing weights are positive, so in the noiseless case feature energy
/// grows with the degradation level.
pub fn generate_dataset(config: &SyntheticConfig) -> Result<Vec<Run>> {
    config.validate()?;
    let mut master = rng_for(config.seed, 0);
    // column 0 mixes the degradation level, column 1 is a constant offset
    let mixing: Vec<(f64, f64)> = (0..config.feature_dim)
        .map(|_| (master.gen_range(0.5..1.5), master.gen_range(0.0..0.5)))
        .collect();

    let mut runs = Vec::with_capacity(config.n_runs);
    for r in 0..config.n_runs {
        let mut rng = rng_for(config.seed, 1 + r as u64);
        let (lo, hi) = config.frames_per_run;
        let frames_total = rng.gen_range(lo..=hi);
        let amplitude = rng.gen_range(0.8..1.2);
        let noise = Normal::new(0.0, config.noise_std)
            .map_err(|e| Error::config(format!("noise distribution: {e}")))?;

        let p_h = ((frames_total as f64) * config.cutoff_fractions.0).floor() as usize;
        let p_f = ((frames_total as f64) * config.cutoff_fractions.1).floor() as usize;

        let mut frames = Vec::with_capacity(frames_total);
        let mut timestamps = Vec::with_capacity(frames_total);
        for t in 0..frames_total {
            let u = t as f64 / (frames_total - 1).max(1) as f64;
            let level = amplitude * degradation_level(config.degradation_shape, u);
            let frame: Vec<f64> = mixing
                .iter()
                .map(|&(w_d, w_0)| {
                    let eps = if config.noise_std > 0.0 {
                        noise.sample(&mut rng)
                    } else {
                        0.0
                    };
                    w_d * level + w_0 + eps
                })
                .collect();
            frames.push(frame);
            timestamps.push(t as f64);
        }
        runs.push(Run::new(
            RunId::new(format!("run-{r:03}")),
            frames,
            timestamps,
            p_h,
            p_f,
        )?);
    }
    Ok(runs)
}

/// Standardize a run to zero mean and unit variance per feature, with the
/// statistics computed over the healthy segment `[0, p_h)` only. The same
/// affine map is applied to every frame of the run.
///
/// A feature that is constant before `p_h` keeps scale 1 (it is only shifted);
/// this is logged as a warning.
pub fn standardize_run(run: &Run) -> Result<Run> {
    if run.p_h < 2 {
        return Err(Error::data(format!(
            "run {}: standardization needs p_h >= 2 (got {})",
            run.run_id, run.p_h
        )));
    }
    let dim = run.feature_dim();
    let healthy = &run.frames[..run.p_h];
    let n = healthy.len() as f64;

    let mut mean = vec![0.0; dim];
    for frame in healthy {
        for (m, v) in mean.iter_mut().zip(frame) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }

    let mut scale = vec![0.0; dim];
    for frame in healthy {
        for ((s, v), m) in scale.iter_mut().zip(frame).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for (j, s) in scale.iter_mut().enumerate() {
        let var = *s / n;
        if var == 0.0 {
            log::warn!(
                "run {}: feature {j} constant before p_h; keeping scale 1",
                run.run_id
            );
            *s = 1.0;
        } else {
            *s = var.sqrt();
        }
    }

    let frames = run
        .frames
        .iter()
        .map(|frame| {
            frame
                .iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect();

    let mut out = Run::new(
        run.run_id.clone(),
        frames,
        run.timestamps.clone(),
        run.p_h,
        run.p_f,
    )?;
    out.standardization = Some(Standardization { mean, scale });
    Ok(out)
}

/// Concatenate `window` consecutive frames into each output frame.
///
/// A window is anomalous if any member frame is anomalous, otherwise
/// unlabeled if any member is unlabeled, otherwise normal. Cutoffs are
/// remapped accordingly; the timestamp of a window is that of its last
/// member.
pub fn frame_run(run: &Run, window: usize) -> Result<Run> {
    if window == 0 {
        return Err(Error::config("window must be >= 1"));
    }
    if run.len() < window {
        return Err(Error::data(format!(
            "run {}: {} frames shorter than window {window}",
            run.run_id,
            run.len()
        )));
    }
    if window == 1 {
        return Ok(run.clone());
    }
    let out_len = run.len() - window + 1;
    let dim = run.feature_dim();
    let mut frames = Vec::with_capacity(out_len);
    let mut timestamps = Vec::with_capacity(out_len);
    for t in 0..out_len {
        let mut frame = Vec::with_capacity(dim * window);
        for member in &run.frames[t..t + window] {
            frame.extend_from_slice(member);
        }
        frames.push(frame);
        timestamps.push(run.timestamps[t + window - 1]);
    }
    // window t contains frame t + window - 1, so any window reaching past a
    // cutoff inherits the dominant label
    let p_h = run.p_h.saturating_sub(window - 1);
    let p_f = run.p_f.saturating_sub(window - 1);
    let mut out = Run::new(run.run_id.clone(), frames, timestamps, p_h, p_f)?;
    out.standardization = run.standardization.as_ref().map(|s| Standardization {
        mean: s.mean.repeat(window),
        scale: s.scale.repeat(window),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SyntheticConfig {
        SyntheticConfig {
            n_runs: 6,
            frames_per_run: (80, 120),
            feature_dim: 4,
            degradation_shape: DegradationShape::Linear,
            noise_std: 0.05,
            cutoff_fractions: (0.35, 0.7),
            seed: 7,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let config = small_config();
        let a = generate_dataset(&config).unwrap();
        let b = generate_dataset(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_linear_energy_strictly_increases() {
        let mut config = small_config();
        config.noise_std = 0.0;
        for run in generate_dataset(&config).unwrap() {
            let energy: Vec<f64> = run
                .frames()
                .iter()
                .map(|f| f.iter().map(|v| v * v).sum::<f64>() / f.len() as f64)
                .collect();
            assert!(
                energy.windows(2).all(|w| w[0] < w[1]),
                "run {} energy not strictly increasing",
                run.run_id()
            );
        }
    }

    #[test]
    fn labels_follow_normal_unlabeled_anomalous_order() {
        let mut config = small_config();
        config.frames_per_run = (800, 1200);
        let runs = generate_dataset(&config).unwrap();
        assert_eq!(runs.len(), 6);
        for run in &runs {
            assert!((800..=1200).contains(&run.len()));
            // oracle: scan labels, rank them, require non-decreasing ranks
            let rank = |l: Label| match l {
                Label::Normal => 0,
                Label::Unlabeled => 1,
                Label::Anomalous => 2,
            };
            let labels: Vec<i32> = run.labels().map(rank).collect();
            assert!(labels.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(labels[0], 0);
            assert_eq!(*labels.last().unwrap(), 2);
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut config = small_config();
        config.cutoff_fractions = (0.7, 0.35);
        assert!(matches!(generate_dataset(&config), Err(Error::Config(_))));
        let mut config = small_config();
        config.noise_std = -1.0;
        assert!(generate_dataset(&config).is_err());
    }

    fn toy_run(values: Vec<Vec<f64>>, p_h: usize, p_f: usize) -> Run {
        let timestamps = (0..values.len()).map(|t| t as f64).collect();
        Run::new(RunId::new("toy"), values, timestamps, p_h, p_f).unwrap()
    }

    #[test]
    fn standardize_affine_map_and_constant_feature() {
        // feature 0: pre-p_h mean 5, std 2; feature 1 constant
        let run = toy_run(
            vec![
                vec![3.0, 1.0],
                vec![7.0, 1.0],
                vec![9.0, 1.0],
                vec![20.0, 1.0],
            ],
            2,
            3,
        );
        let out = standardize_run(&run).unwrap();
        // (9 - 5) / 2 = 2.0 for the third frame of feature 0
        assert!((out.frame(2)[0] - 2.0).abs() < 1e-12);
        // constant feature shifted to 0, scale 1
        assert!(out.frames().iter().all(|f| f[1] == 0.0));
        let stats = out.standardization.as_ref().unwrap();
        assert_eq!(stats.scale[1], 1.0);
    }

    #[test]
    fn standardize_is_idempotent() {
        let config = small_config();
        let run = &generate_dataset(&config).unwrap()[0];
        let once = standardize_run(run).unwrap();
        let twice = standardize_run(&once).unwrap();
        for (a, b) in once.frames().iter().zip(twice.frames()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn standardize_healthy_statistics() {
        let config = small_config();
        for run in generate_dataset(&config).unwrap() {
            let out = standardize_run(&run).unwrap();
            let healthy = &out.frames()[..out.p_h()];
            let n = healthy.len() as f64;
            for j in 0..out.feature_dim() {
                let mean: f64 = healthy.iter().map(|f| f[j]).sum::<f64>() / n;
                let var: f64 = healthy.iter().map(|f| (f[j] - mean).powi(2)).sum::<f64>() / n;
                assert!(mean.abs() < 1e-9, "mean {mean}");
                assert!((var - 1.0).abs() < 1e-6, "var {var}");
            }
        }
    }

    #[test]
    fn standardize_requires_two_healthy_frames() {
        let run = toy_run(vec![vec![1.0], vec![2.0], vec![3.0]], 1, 2);
        assert!(standardize_run(&run).is_err());
    }

    #[test]
    fn frame_window_one_is_identity() {
        let config = small_config();
        let run = &generate_dataset(&config).unwrap()[0];
        let framed = frame_run(run, 1).unwrap();
        assert_eq!(&framed, run);
    }

    #[test]
    fn frame_dimensions_and_counts() {
        let mut config = small_config();
        config.feature_dim = 64;
        config.frames_per_run = (100, 100);
        let run = &generate_dataset(&config).unwrap()[0];
        let framed = frame_run(run, 8).unwrap();
        assert_eq!(framed.feature_dim(), 512);
        assert_eq!(framed.len(), 100 - 8 + 1);
    }

    #[test]
    fn frame_label_aggregation_is_conservative() {
        // labels N N N U U A
        let run = toy_run(
            vec![vec![0.0]; 6].into_iter().collect(),
            3,
            5,
        );
        let framed = frame_run(&run, 3).unwrap();
        // window 1 spans frames 1..=3 = [N, N, U] -> unlabeled
        assert_eq!(framed.label_of(1), Label::Unlabeled);
        // window 0 spans [N, N, N] -> normal
        assert_eq!(framed.label_of(0), Label::Normal);
        // window 3 spans [U, U, A] -> anomalous
        assert_eq!(framed.label_of(3), Label::Anomalous);
        assert_eq!(framed.len(), 4);
    }

    #[test]
    fn frame_window_longer_than_run_fails() {
        let run = toy_run(vec![vec![0.0]; 4].into_iter().collect(), 2, 3);
        assert!(frame_run(&run, 5).is_err());
    }
}
