use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use sigkit::cde::{adjoint_solve, convergence_order, solve, ProblemSpec};
use sigkit::io::{write_convergence, write_gram, write_pde_grid, write_series, write_trajectory};
use sigkit::kernels::{
    gram_with_jobs, pde_kernel_grid, weighted_kernel_mc, KernelConfig, KernelMethod,
};
use sigkit::learning::{
    kernel_ridge_fit, kernel_ridge_predict, sig_regression_fit, sig_regression_predict,
    two_sample_test, Regularizer, RidgeModel, SigRegressionModel,
};
use sigkit::signature::signature;
use sigkit::{log_signature, sample_brownian, Error, Path, Result};

use crate::inputs::{load_path, load_sample, load_series, parse_list, parse_phi};
use crate::manifest::Recorder;
use crate::{json, Command, GramFormat, KernelArgs, ModelKind, PathArgs, RegularizerArg, SigFormat};

fn sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::InvalidInput(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(rec: &mut Recorder, file: &FsPath) -> Result<T> {
    let bytes = rec.read(file)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", file.display())))
}

fn kernel_config(rec: &mut Recorder, args: &KernelArgs) -> Result<KernelConfig> {
    let cfg = match &args.kernel_config {
        Some(file) => read_json(rec, file)?,
        None => {
            let method = args
                .method
                .map(|m| serde_json::to_value(m).map(|v| v.as_str().unwrap_or_default().to_string()))
                .transpose()?
                .unwrap_or_else(|| "truncated".into());
            KernelConfig {
                method: method.parse::<KernelMethod>()?,
                depth: args.depth,
                lambda: args.lambda,
                phi: args.phi.as_deref().map(parse_phi).transpose()?.unwrap_or_default(),
                samples: args.samples,
                nodes: args.nodes,
                seed: args.seed,
            }
        }
    };
    let cfg = cfg.resolved()?;
    rec.seed = cfg.seed;
    Ok(cfg)
}

pub fn run(command: &Command, rec: &mut Recorder) -> Result<()> {
    match command {
        Command::Sig { input, depth, path, log, format, output } => {
            sig(rec, input, *depth, *path, *log, *format, output)
        }
        Command::Kernel { x, y, kernel, path, grid, output } => {
            let cfg = kernel_config(rec, kernel)?;
            let x = load_path(rec, x, path.time_augment, path.basepoint)?;
            let y = load_path(rec, y, path.time_augment, path.basepoint)?;
            let mut out = Map::new();
            out.insert("method".into(), serde_json::to_value(cfg.method)?);
            if cfg.method == KernelMethod::WeightedMc {
                let est = weighted_kernel_mc(
                    &x,
                    &y,
                    &cfg.phi,
                    cfg.samples.unwrap_or(1),
                    cfg.seed.unwrap_or(0),
                    cfg.lambda.unwrap_or(sigkit::kernels::DEFAULT_REFINEMENT),
                )?;
                out.insert("value".into(), est.mean.into());
                out.insert("std_error".into(), est.std_error.into());
            } else {
                out.insert("value".into(), cfg.evaluate(&x, &y)?.into());
            }
            out.insert("config_hash".into(), cfg.hash()?.into());
            if let Some(file) = grid {
                if cfg.method != KernelMethod::Pde {
                    return Err(Error::Config("--grid needs the pde method".into()));
                }
                let g = pde_kernel_grid(&x, &y, cfg.lambda.unwrap_or(sigkit::kernels::DEFAULT_REFINEMENT))?;
                write_pde_grid(sink(&Some(file.clone()))?, &g)?;
            }
            json::to_writer(sink(output)?, &out)
        }
        Command::Gram { sample, cross, kernel, path, format, jobs, output } => {
            let cfg = kernel_config(rec, kernel)?;
            let rows = load_sample(rec, sample, path.time_augment, path.basepoint)?;
            let cols = cross
                .as_ref()
                .map(|c| load_sample(rec, c, path.time_augment, path.basepoint))
                .transpose()?;
            let g = gram_with_jobs(&rows.paths, &cfg, cols.as_ref().map(|c| c.paths.as_slice()), *jobs)?;
            let col_ids = cols.map_or_else(|| rows.ids.clone(), |c| c.ids);
            let g = g.with_ids(rows.ids, col_ids)?;
            match format {
                GramFormat::Csv => write_gram(sink(output)?, &g),
                GramFormat::Json => json::to_writer(sink(output)?, &g),
            }
        }
        Command::MmdTest { x, y, kernel, path, alpha, bound, jobs, output } => {
            let cfg = kernel_config(rec, kernel)?;
            let xs = load_sample(rec, x, path.time_augment, path.basepoint)?;
            let ys = load_sample(rec, y, path.time_augment, path.basepoint)?;
            let report = two_sample_test(&xs.paths, &ys.paths, &cfg, *alpha, *bound, *jobs)?;
            json::to_writer(sink(output)?, &report)
        }
        Command::Fit {
            sample,
            targets,
            model,
            kernel,
            path,
            reg_lambda,
            jitter,
            regularizer,
            jobs,
            output,
        } => {
            let train = load_sample(rec, sample, path.time_augment, path.basepoint)?;
            let y: Vec<Vec<f64>> = load_series(rec, targets)?.values().to_vec();
            let file = match model {
                ModelKind::Ridge => {
                    let cfg = kernel_config(rec, kernel)?;
                    let k = gram_with_jobs(&train.paths, &cfg, None, *jobs)?
                        .with_ids(train.ids.clone(), train.ids)?;
                    ModelFile::Ridge {
                        kernel: cfg,
                        path: *path,
                        model: kernel_ridge_fit(&k, &y, *reg_lambda, *jitter)?,
                        train_paths: train.paths,
                    }
                }
                ModelKind::Signature => {
                    let depth = kernel.depth.ok_or_else(|| {
                        Error::Config("signature regression needs --depth".into())
                    })?;
                    let reg = match regularizer {
                        RegularizerArg::None => Regularizer::None,
                        RegularizerArg::Tikhonov => Regularizer::Tikhonov { lambda: *reg_lambda },
                        RegularizerArg::Lasso => Regularizer::Lasso { lambda: *reg_lambda },
                    };
                    ModelFile::Signature {
                        path: *path,
                        model: sig_regression_fit(&train.paths, &y, depth, reg)?,
                    }
                }
            };
            json::to_writer(sink(output)?, &file)
        }
        Command::Predict { sample, model, jobs, output } => {
            let file: ModelFile = read_json(rec, model)?;
            let (path, pred) = match &file {
                ModelFile::Ridge { kernel, path, model, train_paths } => {
                    let new = load_sample(rec, sample, path.time_augment, path.basepoint)?;
                    rec.seed = kernel.seed;
                    let k = gram_with_jobs(&new.paths, kernel, Some(train_paths), *jobs)?;
                    (new.ids, kernel_ridge_predict(model, &k)?)
                }
                ModelFile::Signature { path, model } => {
                    let new = load_sample(rec, sample, path.time_augment, path.basepoint)?;
                    (new.ids, sig_regression_predict(model, &new.paths)?)
                }
            };
            write_predictions(sink(output)?, &path, &pred)
        }
        Command::Solve { problem, driver, path, adjoint, adjoint_output, output } => {
            let (spec, x) = load_problem(rec, problem, driver, *path)?;
            let f = spec.fields.fields();
            let y0 = spec.initial_state()?;
            let opts = spec.options();
            let tr = solve(&x, &f, &y0, &opts)?;
            if let (Some(g), Some(file)) = (adjoint, adjoint_output) {
                let grad = adjoint_solve(&x, &f, &tr, &parse_list(g)?, &opts)?;
                let mut out = Map::new();
                out.insert("gradient".into(), serde_json::to_value(grad)?);
                json::to_writer(sink(&Some(file.clone()))?, &out)?;
            }
            write_trajectory(sink(output)?, &tr)
        }
        Command::Order { problem, driver, path, steps, reference, table, output } => {
            let (spec, x) = load_problem(rec, problem, driver, *path)?;
            let reference = reference.as_deref().map(parse_list).transpose()?;
            let report = convergence_order(
                &x,
                &spec.fields.fields(),
                &spec.initial_state()?,
                spec.method,
                spec.depth,
                steps,
                spec.ode_steps,
                reference.as_deref(),
            )?;
            if let Some(file) = table {
                write_convergence(sink(&Some(file.clone()))?, &report)?;
            }
            json::to_writer(sink(output)?, &report)
        }
        Command::Brownian { dim, steps, h, rho, seed, output } => {
            rec.seed = Some(*seed);
            let ts = sample_brownian(*dim, *steps, *h, *seed, *rho)?;
            write_series(sink(output)?, &ts)
        }
    }
}

fn sig(
    rec: &mut Recorder,
    input: &FsPath,
    depth: usize,
    path: PathArgs,
    log: bool,
    format: SigFormat,
    output: &Option<PathBuf>,
) -> Result<()> {
    let x = load_path(rec, input, path.time_augment, path.basepoint)?;
    if log {
        return json::to_writer(sink(output)?, &log_signature(&x, depth)?);
    }
    let s = signature(&x, depth)?;
    match format {
        SigFormat::Dense => json::to_writer(sink(output)?, s.tensor()),
        SigFormat::Words => {
            let mut coeffs = Map::new();
            for (w, c) in s.tensor().iter_words() {
                let key = w.letters().iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                coeffs.insert(key, c.into());
            }
            let mut out = Map::new();
            out.insert("d".into(), s.dim().into());
            out.insert("N".into(), s.depth().into());
            out.insert("coefficients".into(), Value::Object(coeffs));
            json::to_writer(sink(output)?, &out)
        }
    }
}

fn load_problem(
    rec: &mut Recorder,
    problem: &FsPath,
    driver: &Option<PathBuf>,
    path: PathArgs,
) -> Result<(ProblemSpec, Path)> {
    let spec: ProblemSpec = read_json(rec, problem)?;
    let file = match (driver, &spec.driver) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => problem.parent().unwrap_or(FsPath::new(".")).join(d),
        (None, None) => {
            return Err(Error::InvalidInput(
                "no driver: pass --driver or set \"driver\" in the problem file".into(),
            ))
        }
    };
    let x = load_path(rec, &file, path.time_augment, path.basepoint)?;
    Ok((spec, x))
}

fn write_predictions<W: Write>(mut w: W, ids: &[String], pred: &[Vec<f64>]) -> Result<()> {
    let width = pred.first().map_or(0, Vec::len);
    let header: Vec<String> = std::iter::once("id".to_string())
        .chain((1..=width).map(|j| format!("y{j}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (id, row) in ids.iter().zip(pred) {
        let cells: Vec<String> = row.iter().map(|v| sigkit::io::format_f64(*v)).collect();
        writeln!(w, "{id},{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Fitted model as persisted by `fit` and read by `predict`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModelFile {
    Ridge {
        kernel: KernelConfig,
        path: PathArgs,
        model: RidgeModel,
        train_paths: Vec<Path>,
    },
    Signature {
        path: PathArgs,
        model: SigRegressionModel,
    },
}
