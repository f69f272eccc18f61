use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::manifest::RunManifest;
use super::{
    resolve_scene, AngleMode, BoxKind, CliError, Command, CompareArgs, DatasetObject, LawArgs, Outcome,
    RcsDatasetArgs, ReplayArgs, RunArgs,
};
use crate::coverage::CoverageParams;
use crate::geometry::Vec3;
use crate::montecarlo::{compare_modes, fit_quasi_law, run_experiment, CompareOptions, McExperiment, McResult, MAX_OBJECTS};
use crate::placement::{Lane, PlacementRegion};
use crate::raytrace::LogisticRcs;
use crate::rcs::{generate_rcs_dataset, AngleSource, CoverageAngles, FacetMesh, PlacementAngles, Scatterer};
use crate::scene::{Cylinder, ObjectKind, Scene};
use crate::stats::{fit_gof, fit_logistic, fit_lognormal, fit_weibull, quantile, FitResult, StatsError};

/// Logistic parameters of the published bistatic RCS laws, for side-by-side
/// reporting only.
const REFERENCE_PEDESTRIAN: (f64, f64) = (6.17, 3.9);
const REFERENCE_CAR: (f64, f64) = (11.0, 4.3);

/// Strip bounds for `--angles coverage`.
const COVERAGE_STRIP: (f64, f64) = (2.0, 4.0);

pub(super) fn dispatch(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::DefaultScene => {
            print!("{}", Scene::default().to_toml()?);
            Ok(Outcome {
                artifacts: Vec::new(),
                success: true,
            })
        }
        Command::Replay(args) => replay(args),
        Command::RcsDataset(RcsDatasetArgs { common, .. })
        | Command::Run(RunArgs { common, .. })
        | Command::Compare(CompareArgs { common, .. }) => {
            let scene = resolve_scene(common.config.as_deref())?;
            execute(command, scene)
        }
    }
}

fn replay(args: &ReplayArgs) -> Result<Outcome, CliError> {
    let manifest = RunManifest::read(&args.manifest)?;
    let mut command = manifest.config.args;
    if let Some(dir) = &args.out_dir {
        match &mut command {
            Command::RcsDataset(a) => a.common.out_dir = dir.clone(),
            Command::Run(a) => a.common.out_dir = dir.clone(),
            Command::Compare(a) => a.common.out_dir = dir.clone(),
            Command::DefaultScene | Command::Replay(_) => {}
        }
    }
    execute(&command, manifest.config.scene)
}

/// Files written under one output directory.
struct Outputs {
    dir: PathBuf,
    artifacts: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn csv<F>(&mut self, name: &str, write: F) -> Result<(), CliError>
    where
        F: FnOnce(BufWriter<File>) -> csv::Result<()>,
    {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write(BufWriter::new(file)).map_err(|source| CliError::Csv { path, source })?;
        self.artifacts.push(name.into());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).expect("JSON value serializes");
        text.push('\n');
        let mut f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.push(name.into());
        Ok(())
    }
}

fn execute(command: &Command, scene: Scene) -> Result<Outcome, CliError> {
    let (common, success, out) = match command {
        Command::RcsDataset(a) => {
            let mut out = Outputs::new(&a.common.out_dir)?;
            (&a.common, rcs_dataset(a, &scene, &mut out)?, out)
        }
        Command::Run(a) => {
            let mut out = Outputs::new(&a.common.out_dir)?;
            (&a.common, run(a, &scene, &mut out)?, out)
        }
        Command::Compare(a) => {
            let mut out = Outputs::new(&a.common.out_dir)?;
            (&a.common, compare(a, &scene, &mut out)?, out)
        }
        Command::DefaultScene | Command::Replay(_) => unreachable!("handled by dispatch"),
    };
    let manifest = RunManifest::new(command.clone(), scene, common.seed, out.artifacts.clone());
    manifest.write(&out.dir.join(RunManifest::file_name(command.name())))?;
    Ok(Outcome {
        artifacts: out.artifacts,
        success,
    })
}

fn reference_law(kind: ObjectKind) -> (f64, f64) {
    match kind {
        ObjectKind::Pedestrian => REFERENCE_PEDESTRIAN,
        ObjectKind::ParkedCar => REFERENCE_CAR,
    }
}

fn rcs_dataset(args: &RcsDatasetArgs, scene: &Scene, out: &mut Outputs) -> Result<bool, CliError> {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be positive".into()));
    }
    let lambda = scene.wavelength();
    let half = scene.half_length();
    let (scatterer, region, reference): (Box<dyn Scatterer>, PlacementRegion, Option<(f64, f64)>) = match args.object {
        DatasetObject::Pedestrian | DatasetObject::Car => {
            let kind = if args.object == DatasetObject::Pedestrian {
                ObjectKind::Pedestrian
            } else {
                ObjectKind::ParkedCar
            };
            let d = scene.box_dims(kind);
            let mesh = FacetMesh::from_box_dims(d.length_m, d.width_m, d.height_m)?;
            (Box::new(mesh), PlacementRegion::for_kind(scene, kind), Some(reference_law(kind)))
        }
        DatasetObject::Lamppost => {
            let spec = &scene.lamppost;
            let cyl = Cylinder::new(spec.radius_m, spec.length_m, Vec3::new(0.0, 0.0, 0.0))?;
            let region = PlacementRegion {
                x_range: (-half, half),
                lanes: spec.line_offsets_m.iter().map(|&y| Lane::Line { y }).collect(),
                z_m: 0.5 * spec.length_m,
            };
            (Box::new(cyl), region, None)
        }
    };
    let source: Box<dyn AngleSource> = match args.angles {
        AngleMode::Placement => Box::new(PlacementAngles {
            tx: scene.tx_position_m,
            rx: scene.rx_position_m,
            region: region.clone(),
            wavelength_m: lambda,
        }),
        AngleMode::Coverage => {
            let (a, b) = COVERAGE_STRIP;
            let params = |h: f64| {
                CoverageParams::new(h - region.z_m, a, b, scene.street_length_m)
                    .map_err(|e| CliError::Usage(format!("coverage angles: {e}")))
            };
            Box::new(CoverageAngles {
                tx: params(scene.tx_position_m.z)?,
                rx: params(scene.rx_position_m.z)?,
                wavelength_m: lambda,
            })
        }
    };

    let data = generate_rcs_dataset(scatterer.as_ref(), source.as_ref(), args.count, args.common.seed);
    let name = object_name(args.object);
    out.csv(&format!("rcs_{name}.csv"), |w| data.write_csv(w))?;

    let values = data.rcs_dbsm();
    let (fit_json, gof_json) = match fit_logistic(&values) {
        Ok(fit) => {
            let (mu, s) = fit.distribution.params().map(|p| p.1).into();
            match reference {
                Some((rm, rs)) => println!("{name}: fitted logistic mu = {mu:.2} dBsm, s = {s:.2} dB (reference {rm} / {rs})"),
                None => println!("{name}: fitted logistic mu = {mu:.2} dBsm, s = {s:.2} dB"),
            }
            let gof = fit_gof(&values, &fit.distribution, 999, args.common.seed, 0.01)?;
            (fit.to_json(), serde_json::to_value(gof).expect("GofResult serializes"))
        }
        Err(e) => {
            eprintln!("{name}: logistic fit refused: {e}");
            (json!({ "error": e.to_string() }), Value::Null)
        }
    };
    let doc = json!({
        "object": name,
        "count": args.count,
        "seed": args.common.seed,
        "angles": args.angles,
        "floored": data.floored,
        "fit": fit_json,
        "logistic_gof": gof_json,
        "reference": reference.map(|(mu, s)| json!({ "mu": mu, "s": s })),
    });
    out.json(&format!("rcs_{name}_fit.json"), &doc)?;
    Ok(true)
}

fn object_name(object: DatasetObject) -> &'static str {
    match object {
        DatasetObject::Pedestrian => "pedestrian",
        DatasetObject::Car => "car",
        DatasetObject::Lamppost => "lamppost",
    }
}

fn kind_name(kind: BoxKind) -> &'static str {
    match kind {
        BoxKind::Pedestrian => "pedestrian",
        BoxKind::Car => "car",
    }
}

/// Quasi-mode law: given on the command line or fitted to a fresh
/// dataset, then shifted by `mu_shift`.
fn resolve_law(law: &LawArgs, scene: &Scene, kind: ObjectKind, seed: u64) -> Result<(LogisticRcs, Value), CliError> {
    let (base, fitted) = match (law.law_mu, law.law_scale) {
        (Some(mu), Some(s)) => (LogisticRcs::new(mu, s).map_err(|e| CliError::Usage(e.to_string()))?, None),
        _ => {
            if law.law_samples == 0 {
                return Err(CliError::Usage("--law-samples must be positive".into()));
            }
            let (l, fit) = fit_quasi_law(scene, kind, law.law_samples, seed)?;
            (l, Some(fit))
        }
    };
    let shifted = LogisticRcs::new(base.mu_dbsm + law.mu_shift, base.scale_db).expect("scale already validated");
    let report = json!({
        "mu": shifted.mu_dbsm,
        "s": shifted.scale_db,
        "mu_shift": law.mu_shift,
        "source": if fitted.is_some() { "fitted" } else { "given" },
        "fit": fitted.map(|f| f.to_json()),
    });
    Ok((shifted, report))
}

fn fit_report(
    fit: Result<FitResult, StatsError>,
    samples: &[f64],
    what: &str,
    n: usize,
    permutations: usize,
    seed: u64,
    alpha: f64,
) -> Result<(Value, Option<FitResult>), CliError> {
    match fit {
        Ok(f) => {
            let gof = fit_gof(samples, &f.distribution, permutations, seed, alpha)?;
            let mut v = f.to_json();
            v["gof"] = serde_json::to_value(gof).expect("GofResult serializes");
            Ok((v, Some(f)))
        }
        Err(e @ (StatsError::TooFewSamples { .. } | StatsError::Degenerate { .. } | StatsError::NonConvergence { .. })) => {
            eprintln!("n = {n}: {what} fit refused: {e}");
            Ok((json!({ "error": e.to_string() }), None))
        }
        Err(e) => Err(e.into()),
    }
}

fn write_samples(out: &mut Outputs, stem: &str, r: &McResult) -> Result<(), CliError> {
    out.csv(&format!("{stem}_path_loss.csv"), |w| r.write_path_loss_csv(w))?;
    out.csv(&format!("{stem}_excess_delay.csv"), |w| r.write_delay_csv(w))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run(args: &RunArgs, scene: &Scene, out: &mut Outputs) -> Result<bool, CliError> {
    if args.n_min == 0 || args.n_max > MAX_OBJECTS || args.n_min > args.n_max {
        return Err(CliError::Usage(format!(
            "object counts must satisfy 1 <= n-min <= n-max <= {MAX_OBJECTS}"
        )));
    }
    if args.replications == 0 {
        return Err(CliError::Usage("--replications must be positive".into()));
    }
    let kind = ObjectKind::from(args.object);
    let seed = args.common.seed;
    let law = match args.mode {
        super::ModeArg::Quasi => {
            let (law, report) = resolve_law(&args.law, scene, kind, seed)?;
            out.json(&format!("{}_quasi_law.json", kind_name(args.object)), &report)?;
            Some(law)
        }
        super::ModeArg::Deterministic => None,
    };
    let mode: crate::montecarlo::Mode = args.mode.into();
    let prefix = format!("{}_{}", kind_name(args.object), mode.as_str());
    let mut rows = Vec::new();
    for n in args.n_min..=args.n_max {
        let mut exp = McExperiment::new(scene.clone(), kind, n, mode, seed);
        exp.replications = args.replications;
        exp.quasi_law = law;
        exp.statistic = args.statistic.into();
        let result = run_experiment(&exp)?;
        let stem = format!("{prefix}_n{n:02}");
        write_samples(out, &stem, &result)?;

        let delays = result.pooled_delays_ns();
        let (pl_json, weibull) = fit_report(
            fit_weibull(&result.path_loss_db),
            &result.path_loss_db,
            "Weibull path-loss",
            n,
            args.permutations,
            seed,
            args.alpha,
        )?;
        let (delay_json, lognormal) = fit_report(
            fit_lognormal(&delays),
            &delays,
            "lognormal excess-delay",
            n,
            args.permutations,
            seed,
            args.alpha,
        )?;
        out.json(
            &format!("{stem}_fit.json"),
            &json!({
                "object": kind_name(args.object),
                "mode": mode,
                "n": n,
                "replications": args.replications,
                "path_loss": pl_json,
                "excess_delay": delay_json,
            }),
        )?;
        let wp = weibull.map(|f| f.distribution.params());
        let lp = lognormal.map(|f| f.distribution.params());
        rows.push([
            n.to_string(),
            args.replications.to_string(),
            opt(wp.map(|p| p[0].1)),
            opt(wp.map(|p| p[1].1)),
            opt(lp.map(|p| p[0].1)),
            opt(lp.map(|p| p[1].1)),
            quantile(&result.path_loss_db, 0.5).to_string(),
        ]);
    }

    out.csv(&format!("{prefix}_summary.csv"), |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "n",
            "replications",
            "weibull_scale",
            "weibull_shape",
            "lognormal_mu",
            "lognormal_sigma",
            "median_path_loss_db",
        ])?;
        for row in &rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    println!("{:>3} {:>10} {:>10} {:>10} {:>10} {:>12}", "n", "A_n", "B_n", "mu_n", "sigma_n", "median PL");
    for r in &rows {
        let cell = |s: &str| s.parse::<f64>().map(|v| format!("{v:.3}")).unwrap_or_else(|_| "-".into());
        println!(
            "{:>3} {:>10} {:>10} {:>10} {:>10} {:>12}",
            r[0],
            cell(&r[2]),
            cell(&r[3]),
            cell(&r[4]),
            cell(&r[5]),
            cell(&r[6])
        );
    }
    Ok(true)
}

fn compare(args: &CompareArgs, scene: &Scene, out: &mut Outputs) -> Result<bool, CliError> {
    if args.replications == 0 {
        return Err(CliError::Usage("--replications must be positive".into()));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage("--alpha must lie in (0, 1)".into()));
    }
    let kind = ObjectKind::from(args.object);
    let seed = args.common.seed;
    let (law, law_report) = resolve_law(&args.law, scene, kind, seed)?;
    let options = CompareOptions {
        replications: args.replications,
        n_permutations: args.permutations,
        alpha: args.alpha,
        sharing: args.placements.into(),
        statistic: args.statistic.into(),
    };
    let c = compare_modes(scene, kind, args.n, law, seed, &options)?;
    let name = kind_name(args.object);
    let stem = format!("compare_{name}_n{:02}", args.n);
    write_samples(out, &format!("{stem}_deterministic"), &c.deterministic)?;
    write_samples(out, &format!("{stem}_quasi"), &c.quasi)?;
    let passed = c.passed();
    out.json(
        &format!("{stem}.json"),
        &json!({
            "object": name,
            "n": args.n,
            "replications": args.replications,
            "seed": seed,
            "alpha": args.alpha,
            "placements": options.sharing,
            "statistic": options.statistic,
            "quasi_law": law_report,
            "path_loss": c.path_loss,
            "excess_delay": c.excess_delay,
            "passed": passed,
        }),
    )?;
    let verdict = |p: bool| if p { "pass" } else { "REJECT" };
    println!(
        "{name} n={}: path loss T = {:.4}, p = {:.4} [{}]; excess delay T = {:.4}, p = {:.4} [{}]",
        args.n,
        c.path_loss.statistic,
        c.path_loss.p_value,
        verdict(c.path_loss.passed()),
        c.excess_delay.statistic,
        c.excess_delay.p_value,
        verdict(c.excess_delay.passed()),
    );
    Ok(passed)
}
