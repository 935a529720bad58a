//! The batch commands behind the CLI.
//!
//! Output tree of `corrupt` (schema 1):
//!
//! ```text
//! <out>/corrupt.toml                              run record
//! <out>/<kind>/<scene>/<camera>/<tttt>.png        16-bit RGB frame
//! <out>/<kind>/<scene>/<camera>/<tttt>.toml       provenance sidecar
//! ```
//!
//! Prediction trees read by `evaluate`:
//!
//! ```text
//! <clean>/<scene>/<camera>/<tttt>.<flow|disp1|disp2>.rsf
//! <corrupt>/<kind>/<scene>/<camera>/<tttt>.<flow|disp1|disp2>.rsf
//! <mask>/<scene>/<camera>/<tttt>.rsm              optional
//! ```
//!
//! A corrupt root without kind-named subdirectories is read as a single
//! corruption labelled `corrupt`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use densebench_core::calibration::{self, CalibrationTarget, Sample, SeverityKnob};
use densebench_core::corruption::FrameAux;
use densebench_core::metrics::{metric_sum, MetricKind, MetricSum, ReportRow, RobustnessReport};
use densebench_core::pipeline::{check_inputs, corrupt_frame, corrupt_scene, is_scene_level, SceneInput};
use densebench_core::ranking::{self, build_matrix, schulze_rank, PairwiseMatrix, RankMethod, RankOutcome};
use densebench_core::subsample::{cell_size, frame_key, kept_count, make_mask, make_masks, MaskRequest};
use densebench_core::synthetic::{calibration_corpus, toy_scenes, SyntheticScene};
use densebench_core::{apply, ssim, Camera, Corrupted, CorruptionKind, CorruptionSpec, FrameCoord, PixelMask, PredictionField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};
use crate::files::{read_field, read_mask, write_field, write_mask};
use crate::imageio::{read_image, write_image};
use crate::manifest::{FrameEntry, Manifest, SceneEntry, MANIFEST_VERSION};
use crate::preset::Preset;
use crate::report::{field_tag, Report, Section, Task, REPORT_SCHEMA};
use crate::sidecar::Sidecar;

/// Seed of the built-in synthetic corpora.
pub const CORPUS_SEED: u64 = 0;

/// Options shared by every command.
#[derive(Debug, Clone)]
pub struct Globals {
    pub seed: u64,
    /// Worker threads; 0 picks the number of CPUs.
    pub jobs: usize,
    pub out: PathBuf,
}

impl Globals {
    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Contract(format!("cannot start {} workers: {e}", self.jobs)))
    }
}

fn frame_stem(t: u32) -> String {
    format!("{t:04}")
}

fn frame_dir(root: &Path, coord: &FrameCoord) -> PathBuf {
    root.join(&coord.scene_id).join(coord.camera.name())
}

fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    error::write(path, text.as_bytes())
}

fn hex(v: u64) -> String {
    format!("{v:#018x}")
}

// ---------------------------------------------------------------- synth

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Corpus {
    /// Two scenes, two time steps, both cameras: eight frames.
    Toy,
    /// Five scenes, one time step, both cameras: ten frames.
    Calibration,
}

#[derive(Debug, Clone)]
pub struct SynthArgs {
    pub corpus: Corpus,
    /// Leave out disparity and flow files.
    pub images_only: bool,
}

/// Writes a synthetic corpus and its manifest under `out`; returns the
/// manifest path.
pub fn synth(g: &Globals, a: &SynthArgs) -> Result<PathBuf> {
    let scenes = match a.corpus {
        Corpus::Toy => toy_scenes(g.seed)?,
        Corpus::Calibration => calibration_corpus(g.seed)?,
    };
    write_synthetic(&scenes, &g.out, a.images_only)
}

pub fn write_synthetic(scenes: &[SyntheticScene], root: &Path, images_only: bool) -> Result<PathBuf> {
    let mut entries = Vec::new();
    for s in scenes {
        let mut frames = Vec::new();
        for f in &s.frames {
            let c = &f.image.coord;
            let rel = PathBuf::from(&c.scene_id).join(c.camera.name());
            let stem = frame_stem(c.time_index);
            let image = rel.join(format!("{stem}.png"));
            write_image(&f.image, &root.join(&image))?;
            let mut entry = FrameEntry {
                time_index: c.time_index,
                camera: c.camera,
                image,
                disparity: None,
                depth: None,
                flow: None,
            };
            if !images_only {
                let disp = rel.join(format!("{stem}.disp1.rsf"));
                let flow = rel.join(format!("{stem}.flow.rsf"));
                write_field(&f.disparity, &root.join(&disp))?;
                write_field(&f.flow, &root.join(&flow))?;
                entry.disparity = Some(disp);
                entry.flow = Some(flow);
            }
            frames.push(entry);
        }
        entries.push(SceneEntry {
            scene_id: s.scene_id.clone(),
            frames,
            poses: None,
        });
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        rig: scenes.first().map(|s| s.rig).unwrap_or(densebench_core::CameraRig::new(150.0, 0.12)?),
        assets: Default::default(),
        scenes: entries,
        root: root.to_path_buf(),
    };
    let path = root.join("manifest.toml");
    write_text(&path, &manifest.to_toml())?;
    Ok(path)
}

// ---------------------------------------------------------------- corrupt

#[derive(Debug, Clone)]
pub struct CorruptArgs {
    pub manifest: PathBuf,
    pub kinds: Vec<CorruptionKind>,
    pub preset: Option<PathBuf>,
}

/// Run record written next to the corrupted tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptRecord {
    pub schema: u32,
    pub master_seed: String,
    pub kinds: Vec<CorruptionKind>,
    pub frames_per_kind: usize,
}

fn load_scenes(manifest: &Manifest, pool: &rayon::ThreadPool) -> Result<Vec<SceneInput>> {
    pool.install(|| first_error((0..manifest.scenes.len()).into_par_iter().map(|i| manifest.load_scene(i)).collect()))
}

/// Fails with every frame of every scene that lacks an input one of
/// `kinds` needs.
fn check_all_inputs(scenes: &[SceneInput], kinds: &[CorruptionKind], source: &Path) -> Result<()> {
    let problems: Vec<String> = kinds
        .iter()
        .flat_map(|&k| scenes.iter().filter_map(move |s| check_inputs(s, k).err()))
        .map(|e| e.to_string())
        .collect();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Contract(format!("{}: {}", source.display(), problems.join("; "))))
    }
}

pub fn corrupt(g: &Globals, a: &CorruptArgs) -> Result<CorruptRecord> {
    if a.kinds.is_empty() {
        return Err(Error::Contract("no corruption kinds requested".into()));
    }
    let manifest = Manifest::load(&a.manifest)?;
    let preset = match &a.preset {
        Some(p) => Preset::load(p)?,
        None => Preset::default(),
    };
    let pool = g.pool()?;
    let scenes = load_scenes(&manifest, &pool)?;
    let frost = manifest.frost_textures()?;
    check_all_inputs(&scenes, &a.kinds, &a.manifest)?;
    for &kind in &a.kinds {
        let spec = CorruptionSpec::new(preset.params(kind), g.seed)?;
        let out = g.out.join(kind.name());
        let save = |c: &Corrupted| -> Result<()> {
            let dir = frame_dir(&out, &c.frame.coord);
            let stem = frame_stem(c.frame.coord.time_index);
            write_image(&c.frame, &dir.join(format!("{stem}.png")))?;
            write_text(&dir.join(format!("{stem}.toml")), &Sidecar::new(&c.provenance, g.seed).to_toml())
        };
        let results: Vec<Result<()>> = pool.install(|| {
            if is_scene_level(kind) {
                scenes
                    .par_iter()
                    .map(|s| {
                        let done = corrupt_scene(s, &spec, &frost).map_err(|e| Error::in_frame(&s.frames[0].frame.coord, e))?;
                        done.iter().try_for_each(&save)
                    })
                    .collect()
            } else {
                let jobs: Vec<(usize, usize)> = scenes
                    .iter()
                    .enumerate()
                    .flat_map(|(i, s)| (0..s.frames.len()).map(move |j| (i, j)))
                    .collect();
                jobs.par_iter()
                    .map(|&(i, j)| {
                        let input = &scenes[i].frames[j];
                        let c = corrupt_frame(input, &scenes[i], &spec, &frost).map_err(|e| Error::in_frame(&input.frame.coord, e))?;
                        save(&c)
                    })
                    .collect()
            }
        });
        first_error(results)?;
    }
    let record = CorruptRecord {
        schema: 1,
        master_seed: hex(g.seed),
        kinds: a.kinds.clone(),
        frames_per_kind: manifest.frame_count(),
    };
    write_text(&g.out.join("corrupt.toml"), &toml::to_string_pretty(&record).expect("record is TOML-representable"))?;
    Ok(record)
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Clone)]
pub struct EvaluateArgs {
    pub task: Task,
    pub clean: PathBuf,
    pub corrupt: PathBuf,
    pub mask: Option<PathBuf>,
    pub metrics: Option<Vec<MetricKind>>,
    pub model: Option<String>,
}

/// Frames of one field found in a clean prediction tree, sorted.
fn list_predictions(root: &Path, tag: &str) -> Result<Vec<FrameCoord>> {
    let suffix = format!(".{tag}.rsf");
    let mut found = Vec::new();
    let read_dir = |p: &Path| -> Result<Vec<PathBuf>> {
        let mut v: Vec<PathBuf> = std::fs::read_dir(p)
            .map_err(|e| Error::io(p, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        v.sort();
        Ok(v)
    };
    for scene in read_dir(root)?.into_iter().filter(|p| p.is_dir()) {
        let scene_id = scene.file_name().unwrap_or_default().to_string_lossy().into_owned();
        for cam in Camera::BOTH {
            let dir = scene.join(cam.name());
            if !dir.is_dir() {
                continue;
            }
            for file in read_dir(&dir)? {
                let name = file.file_name().unwrap_or_default().to_string_lossy().into_owned();
                if let Some(t) = name.strip_suffix(&suffix).and_then(|s| s.parse::<u32>().ok()) {
                    found.push(FrameCoord::new(scene_id.clone(), t, cam));
                }
            }
        }
    }
    found.sort();
    Ok(found)
}

fn prediction_path(root: &Path, coord: &FrameCoord, tag: &str) -> PathBuf {
    frame_dir(root, coord).join(format!("{}.{tag}.rsf", frame_stem(coord.time_index)))
}

/// Corruption rows to evaluate: `(label, tree root)`.
fn corrupt_roots(root: &Path) -> Result<Vec<(String, PathBuf)>> {
    if !root.is_dir() {
        return Err(Error::io(root, std::io::Error::new(std::io::ErrorKind::NotFound, "corrupt prediction tree not found")));
    }
    let kinds: Vec<(String, PathBuf)> = CorruptionKind::ALL
        .iter()
        .map(|k| (k.name().to_string(), root.join(k.name())))
        .filter(|(_, p)| p.is_dir())
        .collect();
    Ok(if kinds.is_empty() {
        vec![("corrupt".to_string(), root.to_path_buf())]
    } else {
        kinds
    })
}

pub fn evaluate(g: &Globals, a: &EvaluateArgs) -> Result<Report> {
    let requested = a.metrics.clone().unwrap_or_else(|| a.task.default_metrics());
    let pool = g.pool()?;
    let rows = corrupt_roots(&a.corrupt)?;
    let model = a.model.clone().unwrap_or_else(|| {
        a.clean
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into())
    });
    let mut sections = Vec::new();
    for &field in a.task.fields() {
        let tag = field_tag(field);
        let metrics: Vec<MetricKind> = requested.iter().copied().filter(|m| m.accepts(field)).collect();
        if metrics.is_empty() {
            return Err(Error::Contract(format!(
                "none of the requested metrics applies to {tag} fields of task {}",
                a.task.name()
            )));
        }
        let frames = list_predictions(&a.clean, tag)?;
        if frames.is_empty() {
            return Err(Error::Contract(format!("{}: no *.{tag}.rsf predictions found", a.clean.display())));
        }
        let clean: Vec<PredictionField> = pool.install(|| {
            first_error(frames.par_iter().map(|c| read_field(&prediction_path(&a.clean, c, tag), field)).collect())
        })?;
        let masks: Vec<PixelMask> = match &a.mask {
            Some(root) => pool.install(|| {
                first_error(
                    frames
                        .par_iter()
                        .map(|c| read_mask(&frame_dir(root, c).join(format!("{}.rsm", frame_stem(c.time_index)))))
                        .collect(),
                )
            })?,
            None => clean.iter().map(|f| PixelMask::full(f.width, f.height)).collect(),
        };
        let mut table = RobustnessReport::new(model.clone(), metrics.clone());
        for (label, root) in &rows {
            let sums: Vec<Vec<MetricSum>> = pool.install(|| {
                first_error(
                    frames
                        .par_iter()
                        .enumerate()
                        .map(|(i, c)| {
                            let path = prediction_path(root, c, tag);
                            let corrupt = read_field(&path, field)?;
                            metrics
                                .iter()
                                .map(|&m| metric_sum(&clean[i], &corrupt, &masks[i], m).map_err(|e| Error::in_file(&path, e)))
                                .collect()
                        })
                        .collect(),
                )
            })?;
            // Frame-order merge keeps totals independent of scheduling.
            let mut values = Vec::with_capacity(metrics.len());
            for (j, &m) in metrics.iter().enumerate() {
                let total = sums.iter().fold(MetricSum::default(), |acc, s| acc.merge(s[j]));
                values.push(total.value(m).map_err(|e| Error::in_file(root, e))?);
            }
            table.rows.push(ReportRow {
                corruption: label.clone(),
                values,
            });
        }
        sections.push(Section::new(field, &table)?);
    }
    let report = Report {
        schema: REPORT_SCHEMA,
        model,
        task: a.task,
        sections,
    };
    write_text(&g.out.join("report.toml"), &report.to_toml())?;
    Ok(report)
}

// ---------------------------------------------------------------- rank

#[derive(Debug, Clone)]
pub struct RankArgs {
    pub method: RankMethod,
    pub inputs: Vec<PathBuf>,
    pub matrix: Option<PathBuf>,
    pub metric: MetricKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub schema: u32,
    pub outcome: RankOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PairwiseMatrix>,
}

pub fn load_matrix(path: &Path) -> Result<PairwiseMatrix> {
    let text = String::from_utf8(error::read(path)?).map_err(|e| Error::decode(path, e))?;
    let m: PairwiseMatrix = toml::from_str(&text).map_err(|e| Error::decode(path, e))?;
    m.validate().map_err(|e| Error::in_file(path, e))?;
    Ok(m)
}

pub fn rank(g: &Globals, a: &RankArgs) -> Result<RankRecord> {
    let record = match (&a.matrix, a.inputs.is_empty()) {
        (Some(path), true) => {
            if a.method != RankMethod::Schulze {
                return Err(Error::Contract(format!(
                    "{}: {} ranking needs per-corruption reports, not a pairwise matrix",
                    path.display(),
                    a.method
                )));
            }
            let m = load_matrix(path)?;
            let outcome = schulze_rank(&m).map_err(|e| Error::in_file(path, e))?;
            RankRecord {
                schema: 1,
                outcome,
                matrix: Some(m),
            }
        }
        (None, false) => {
            let tables = a
                .inputs
                .iter()
                .map(|p| Report::load(p)?.scores(a.metric, p))
                .collect::<Result<Vec<_>>>()?;
            let matrix = build_matrix(&tables)?;
            let outcome = ranking::rank(&tables, a.method)?;
            RankRecord {
                schema: 1,
                outcome,
                matrix: Some(matrix),
            }
        }
        _ => return Err(Error::Contract("rank needs either --inputs or --matrix".into())),
    };
    write_text(&g.out.join("ranking.toml"), &toml::to_string_pretty(&record).expect("ranking is TOML-representable"))?;
    Ok(record)
}

impl RankRecord {
    pub fn to_text(&self) -> String {
        let mut out = format!("{} ranking\n", self.outcome.method);
        for (i, r) in self.outcome.ranking.iter().enumerate() {
            let score = r.score.map(|s| format!("  {s:.2}")).unwrap_or_default();
            let tie = if r.tied_with_next { "  (tied with next)" } else { "" };
            out.push_str(&format!("{:>2}. {}{score}{tie}\n", i + 1, r.model));
        }
        if let Some(m) = &self.matrix {
            out.push_str("\npairwise wins (row beats column)\n");
            out.push_str(&m.to_string());
        }
        out
    }
}

// ---------------------------------------------------------------- calibrate

#[derive(Debug, Clone)]
pub struct CalibrateArgs {
    pub kinds: Vec<CorruptionKind>,
    /// Overrides the per-kind default target.
    pub target: Option<f64>,
    pub manifest: Option<PathBuf>,
}

/// Mean SSIM with the per-frame work spread over the pool and summed in
/// frame order.
fn parallel_mean_ssim(pool: &rayon::ThreadPool, samples: &[Sample<'_>], spec: &CorruptionSpec) -> densebench_core::Result<f64> {
    let values: Vec<densebench_core::Result<f64>> = pool.install(|| {
        samples
            .par_iter()
            .map(|s| ssim(s.frame, &apply(s.frame, spec, &s.aux)?.frame))
            .collect()
    });
    let values = values.into_iter().collect::<densebench_core::Result<Vec<f64>>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn calibrate(g: &Globals, a: &CalibrateArgs) -> Result<Preset> {
    let pool = g.pool()?;
    let (scenes, frost, source) = match &a.manifest {
        Some(p) => {
            let m = Manifest::load(p)?;
            (load_scenes(&m, &pool)?, m.frost_textures()?, p.clone())
        }
        None => {
            let corpus = calibration_corpus(CORPUS_SEED)?;
            (corpus.iter().map(SceneInput::from).collect(), Vec::new(), PathBuf::from("<synthetic corpus>"))
        }
    };
    let samples: Vec<Sample<'_>> = scenes
        .iter()
        .flat_map(|s| {
            s.frames.iter().map(|f| Sample {
                frame: &f.frame,
                aux: FrameAux {
                    depth: f.depth.as_ref(),
                    flow: f.flow.as_ref(),
                    rig: Some(&s.rig),
                    poses: s.poses.as_ref(),
                    frost_textures: &frost,
                },
            })
        })
        .collect();
    if samples.is_empty() {
        return Err(Error::Contract(format!("{}: no frames to calibrate on", source.display())));
    }
    let mut preset = Preset::default();
    for &kind in &a.kinds {
        check_all_inputs(&scenes, &[kind], &source)?;
        let target = match a.target {
            Some(t) => CalibrationTarget::new(t, CalibrationTarget::TOLERANCE)?,
            None => CalibrationTarget::for_kind(kind),
        };
        let result = calibration::calibrate_with(
            kind,
            target,
            SeverityKnob::theta_max(kind),
            |theta| parallel_mean_ssim(&pool, &samples, &SeverityKnob::new(kind, theta)?.spec(g.seed)?),
            |_| {},
        )
        .map_err(|e| Error::Contract(format!("{}: calibrating {kind}: {e}", source.display())))?;
        preset.insert(&result, target.ssim);
    }
    preset.save(&g.out.join("preset.toml"))?;
    Ok(preset)
}

// ---------------------------------------------------------------- subsample

#[derive(Debug, Clone)]
pub struct SubsampleArgs {
    pub fraction: f64,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub manifest: Option<PathBuf>,
    /// Hero frames as `scene/camera/time`.
    pub hero: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub path: PathBuf,
    pub width: usize,
    pub height: usize,
    pub hero: bool,
    pub popcount: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsampleRecord {
    pub schema: u32,
    pub fraction: f64,
    pub cell: usize,
    pub master_seed: String,
    pub masks: Vec<MaskRecord>,
}

fn parse_hero(s: &str) -> Result<FrameCoord> {
    let parts: Vec<&str> = s.split('/').collect();
    match parts.as_slice() {
        [scene, cam, t] => match (Camera::parse(cam), t.parse::<u32>()) {
            (Some(cam), Ok(t)) => Ok(FrameCoord::new(*scene, t, cam)),
            _ => Err(Error::Contract(format!("bad hero frame {s:?}; expected scene/camera/time"))),
        },
        _ => Err(Error::Contract(format!("bad hero frame {s:?}; expected scene/camera/time"))),
    }
}

pub fn subsample(g: &Globals, a: &SubsampleArgs) -> Result<SubsampleRecord> {
    let cell = cell_size(a.fraction)?;
    let masks = match (&a.manifest, a.width, a.height) {
        (None, Some(w), Some(h)) => {
            if !a.hero.is_empty() {
                return Err(Error::Contract("--hero needs --manifest".into()));
            }
            let mask = make_mask(w, h, a.fraction, g.seed, 0)?;
            debug_assert_eq!(mask.count(), kept_count(w, h, a.fraction)?);
            let rel = PathBuf::from("mask.rsm");
            write_mask(&mask, &g.out.join(&rel))?;
            vec![MaskRecord {
                path: rel,
                width: w,
                height: h,
                hero: false,
                popcount: mask.count(),
            }]
        }
        (Some(path), None, None) => {
            let manifest = Manifest::load(path)?;
            let heroes = a.hero.iter().map(|h| parse_hero(h)).collect::<Result<Vec<_>>>()?;
            let mut coords = Vec::new();
            let mut requests = Vec::new();
            for s in &manifest.scenes {
                let mut frames: Vec<&FrameEntry> = s.frames.iter().collect();
                frames.sort_by_key(|f| (f.time_index, f.camera));
                for f in frames {
                    let coord = FrameCoord::new(s.scene_id.clone(), f.time_index, f.camera);
                    let img = read_image(&manifest.resolve(&f.image), coord.clone())?;
                    requests.push(MaskRequest {
                        width: img.width(),
                        height: img.height(),
                        key: frame_key(&coord),
                        hero: heroes.contains(&coord),
                    });
                    coords.push(coord);
                }
            }
            if let Some(h) = heroes.iter().find(|h| !coords.contains(h)) {
                return Err(Error::Contract(format!(
                    "{}: hero frame {}/{}/{} is not in the manifest",
                    path.display(),
                    h.scene_id,
                    h.camera,
                    h.time_index
                )));
            }
            let masks = make_masks(&requests, a.fraction, g.seed)?;
            let mut records = Vec::new();
            for ((coord, q), mask) in coords.iter().zip(&requests).zip(&masks) {
                let rel = PathBuf::from(&coord.scene_id)
                    .join(coord.camera.name())
                    .join(format!("{}.rsm", frame_stem(coord.time_index)));
                write_mask(mask, &g.out.join(&rel))?;
                records.push(MaskRecord {
                    path: rel,
                    width: q.width,
                    height: q.height,
                    hero: q.hero,
                    popcount: mask.count(),
                });
            }
            records
        }
        _ => return Err(Error::Contract("subsample needs either --width and --height or --manifest".into())),
    };
    let record = SubsampleRecord {
        schema: 1,
        fraction: a.fraction,
        cell,
        master_seed: hex(g.seed),
        masks,
    };
    write_text(&g.out.join("subsample.toml"), &toml::to_string_pretty(&record).expect("record is TOML-representable"))?;
    Ok(record)
}

/// Every `.toml` sidecar under a corrupted kind directory, keyed by frame.
pub fn read_sidecars(kind_dir: &Path) -> Result<BTreeMap<FrameCoord, Sidecar>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![kind_dir.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let p = e.map_err(|e| Error::io(&dir, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "toml") {
                let s = Sidecar::load(&p)?;
                out.insert(FrameCoord::new(s.scene_id.clone(), s.time_index, s.camera), s);
            }
        }
    }
    Ok(out)
}
