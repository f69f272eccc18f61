//! Monte-Carlo experiment: random object placements traced in
//! deterministic or quasi-deterministic mode.
//!
//! Replication `r` draws its placements from substream
//! `(seed, Placement, r)` and its quasi-mode σ values from
//! `(seed, Rcs, r)`, so both modes see identical placements under one
//! seed and results never depend on the worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::placement::PlacementRegion;
use crate::raytrace::{
    assemble_channel, trace_los, trace_reflections, trace_scatter, LogisticRcs, PathKind, RcsSource, TraceError,
};
use crate::rcs::{generate_rcs_dataset, FacetMesh, PlacementAngles};
use crate::rng::{derive_seed, substream, Purpose};
use crate::scene::{BoxObject, ObjectKind, Scene, SceneError};
use crate::stats::{cvm_two_sample, fit_logistic, Distribution, FitResult, GofResult, StatsError};

pub const DEFAULT_REPLICATIONS: usize = 1000;
pub const MAX_OBJECTS: usize = 10;

/// Salt for the placement seed of the second run under
/// [`PlacementSharing::Independent`].
const INDEPENDENT_SALT: u64 = 0x1d_e9e7_de47;

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("placement range is empty")]
    EmptyPlacement,
    #[error("quasi mode needs a logistic RCS law")]
    MissingLaw,
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Deterministic,
    Quasi,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Deterministic => "deterministic",
            Mode::Quasi => "quasi",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deterministic" | "d-rt" | "drt" => Ok(Mode::Deterministic),
            "quasi" | "qd-rt" | "qdrt" => Ok(Mode::Quasi),
            _ => Err(format!("unknown mode `{s}` (expected deterministic or quasi)")),
        }
    }
}

/// Which paths enter the per-replication path-loss statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLossStatistic {
    /// Non-coherent sum over the placed objects' scatter paths.
    #[default]
    ObjectsOnly,
    /// Adds LOS, the specular reflections and the lampposts.
    FullChannel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McExperiment {
    pub scene: Scene,
    pub object_kind: ObjectKind,
    pub n_objects: usize,
    pub replications: usize,
    pub mode: Mode,
    /// Required in quasi mode.
    pub quasi_law: Option<LogisticRcs>,
    pub placement: PlacementRegion,
    pub statistic: PathLossStatistic,
    pub master_seed: u64,
}

impl McExperiment {
    /// Default placement ranges for `object_kind`, scatter-only statistic.
    pub fn new(scene: Scene, object_kind: ObjectKind, n_objects: usize, mode: Mode, master_seed: u64) -> Self {
        let placement = PlacementRegion::for_kind(&scene, object_kind);
        McExperiment {
            scene,
            object_kind,
            n_objects,
            replications: DEFAULT_REPLICATIONS,
            mode,
            quasi_law: None,
            placement,
            statistic: PathLossStatistic::default(),
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        self.scene.validate()?;
        if self.replications == 0 {
            return Err(McError::Invalid("replications must be positive".into()));
        }
        if !(1..=MAX_OBJECTS).contains(&self.n_objects) {
            return Err(McError::Invalid(format!(
                "n_objects must be in 1..={MAX_OBJECTS}, got {}",
                self.n_objects
            )));
        }
        if self.placement.is_empty() {
            return Err(McError::EmptyPlacement);
        }
        let half = self.scene.half_length();
        let [y0, y1] = self.scene.wall_y_positions_m;
        let (xa, xb) = self.placement.x_range;
        let lanes_inside = self.placement.lanes.iter().all(|lane| match *lane {
            crate::placement::Lane::Band { lo, hi } => lo >= y0 && hi <= y1,
            crate::placement::Lane::Line { y } => y >= y0 && y <= y1,
        });
        if xa < -half || xb > half || !lanes_inside {
            return Err(McError::Invalid("placement ranges leave the canyon".into()));
        }
        if self.mode == Mode::Quasi && self.quasi_law.is_none() {
            return Err(McError::MissingLaw);
        }
        Ok(())
    }

    fn rcs_source(&self) -> RcsSource {
        match (self.mode, self.quasi_law) {
            (Mode::Quasi, Some(law)) => RcsSource::Quasi(law),
            _ => RcsSource::Deterministic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub mode: Mode,
    pub object_kind: ObjectKind,
    pub n_objects: usize,
    pub master_seed: u64,
    /// One value per replication, in replication order.
    pub path_loss_db: Vec<f64>,
    /// `excess_delays_ns[r][i]`: object `i` of replication `r`.
    pub excess_delays_ns: Vec<Vec<f64>>,
}

impl McResult {
    pub fn replications(&self) -> usize {
        self.path_loss_db.len()
    }

    /// All per-object delays, replication-major.
    pub fn pooled_delays_ns(&self) -> Vec<f64> {
        self.excess_delays_ns.iter().flatten().copied().collect()
    }

    pub fn write_path_loss_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["replication", "path_loss_db"])?;
        for (r, pl) in self.path_loss_db.iter().enumerate() {
            w.write_record([r.to_string(), pl.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_delay_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["replication", "object_index", "excess_delay_ns"])?;
        for (r, delays) in self.excess_delays_ns.iter().enumerate() {
            for (i, d) in delays.iter().enumerate() {
                w.write_record([r.to_string(), i.to_string(), d.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Objects of one replication.
pub fn place_objects(exp: &McExperiment, replication: usize) -> Result<Vec<BoxObject>, McError> {
    let mut rng = substream(exp.master_seed, Purpose::Placement, replication as u64);
    let dims = exp.scene.box_dims(exp.object_kind);
    (0..exp.n_objects)
        .map(|_| Ok(BoxObject::new(exp.object_kind, dims, exp.placement.sample(&mut rng))?))
        .collect()
}

fn run_replication(exp: &McExperiment, source: &RcsSource, r: usize) -> Result<(f64, Vec<f64>), McError> {
    let objects = place_objects(exp, r)?;
    let mut rng = substream(exp.master_seed, Purpose::Rcs, r as u64);
    let mut paths = Vec::new();
    if exp.statistic == PathLossStatistic::FullChannel {
        paths.push(trace_los(&exp.scene)?);
        paths.extend(trace_reflections(&exp.scene));
        for (i, post) in exp.scene.lampposts().iter().enumerate() {
            paths.push(trace_scatter(&exp.scene, post, exp.n_objects + i, &RcsSource::Deterministic, &mut rng)?);
        }
    }
    let mut delays = Vec::with_capacity(objects.len());
    for (i, obj) in objects.iter().enumerate() {
        let path = trace_scatter(&exp.scene, obj, i, source, &mut rng)?;
        delays.push(path.excess_delay_s * 1e9);
        paths.push(path);
    }
    let channel = assemble_channel(paths)?;
    let pl = match exp.statistic {
        PathLossStatistic::ObjectsOnly => channel
            .scatter_path_loss_db
            .expect("at least one object is placed"),
        PathLossStatistic::FullChannel => channel.combined_path_loss_db,
    };
    debug_assert!(channel.paths.iter().any(|p| p.kind == PathKind::Scatter));
    Ok((pl, delays))
}

pub fn run_experiment(exp: &McExperiment) -> Result<McResult, McError> {
    exp.validate()?;
    let source = exp.rcs_source();
    let reps: Vec<(f64, Vec<f64>)> = (0..exp.replications)
        .into_par_iter()
        .map(|r| run_replication(exp, &source, r))
        .collect::<Result<_, _>>()?;
    let (path_loss_db, excess_delays_ns) = reps.into_iter().unzip();
    Ok(McResult {
        mode: exp.mode,
        object_kind: exp.object_kind,
        n_objects: exp.n_objects,
        master_seed: exp.master_seed,
        path_loss_db,
        excess_delays_ns,
    })
}

/// Whether the quasi run reuses the deterministic run's placements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementSharing {
    /// Same placement substreams in both modes. The samples are then paired
    /// rather than independent, and the excess delays are identical.
    Shared,
    /// The quasi run uses a placement seed derived from the master seed,
    /// giving the independent samples the two-sample test assumes.
    #[default]
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub replications: usize,
    pub n_permutations: usize,
    pub alpha: f64,
    pub sharing: PlacementSharing,
    pub statistic: PathLossStatistic,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            replications: DEFAULT_REPLICATIONS,
            n_permutations: crate::stats::DEFAULT_PERMUTATIONS,
            alpha: 0.01,
            sharing: PlacementSharing::default(),
            statistic: PathLossStatistic::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub path_loss: GofResult,
    pub excess_delay: GofResult,
    pub quasi_law: LogisticRcs,
    pub deterministic: McResult,
    pub quasi: McResult,
}

impl ModeComparison {
    pub fn passed(&self) -> bool {
        self.path_loss.passed() && self.excess_delay.passed()
    }
}

/// Runs both modes and tests path loss and pooled excess delay with the
/// two-sample CvM test. Permutations use the master seed.
pub fn compare_modes(
    scene: &Scene,
    object_kind: ObjectKind,
    n_objects: usize,
    quasi_law: LogisticRcs,
    seed: u64,
    options: &CompareOptions,
) -> Result<ModeComparison, McError> {
    let mut det = McExperiment::new(scene.clone(), object_kind, n_objects, Mode::Deterministic, seed);
    det.replications = options.replications;
    det.statistic = options.statistic;
    let mut quasi = det.clone();
    quasi.mode = Mode::Quasi;
    quasi.quasi_law = Some(quasi_law);
    if options.sharing == PlacementSharing::Independent {
        quasi.master_seed = derive_seed(seed, INDEPENDENT_SALT);
    }
    let d = run_experiment(&det)?;
    let q = run_experiment(&quasi)?;
    let path_loss = cvm_two_sample(&d.path_loss_db, &q.path_loss_db, options.n_permutations, seed, options.alpha)?;
    let excess_delay = cvm_two_sample(
        &d.pooled_delays_ns(),
        &q.pooled_delays_ns(),
        options.n_permutations,
        seed,
        options.alpha,
    )?;
    Ok(ModeComparison {
        path_loss,
        excess_delay,
        quasi_law,
        deterministic: d,
        quasi: q,
    })
}

/// Logistic law fitted to a deterministic RCS dataset of `kind`, sampled
/// over the default placement region.
pub fn fit_quasi_law(scene: &Scene, kind: ObjectKind, count: usize, seed: u64) -> Result<(LogisticRcs, FitResult), McError> {
    let dims = scene.box_dims(kind);
    let mesh = FacetMesh::from_box_dims(dims.length_m, dims.width_m, dims.height_m)
        .map_err(|e| McError::Invalid(e.to_string()))?;
    let source = PlacementAngles {
        tx: scene.tx_position_m,
        rx: scene.rx_position_m,
        region: PlacementRegion::for_kind(scene, kind),
        wavelength_m: scene.wavelength(),
    };
    let data = generate_rcs_dataset(&mesh, &source, count, seed);
    let fit = fit_logistic(&data.rcs_dbsm())?;
    let Distribution::Logistic { mu, s } = fit.distribution else {
        unreachable!("logistic fit returns a logistic law")
    };
    Ok((LogisticRcs::new(mu, s)?, fit))
}
