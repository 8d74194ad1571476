//! The five subcommands. Each returns the process exit code:
//! 0 success, 1 input/config error (raised as Err by the caller),
//! 2 completed with non-convergence warnings.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use dpd_lasso::{
    cv, fit_dpd_lasso, loss_surface, predict, run_replications, seed::derive, summarize,
    tune_lambda, EstimatorSettings, GridSpec, InitStrategy, Method, SimConfig, SimRecord,
};

use crate::io::{
    cv_csv, load_dataset_csv, load_features_csv, load_fit, save_cv_json, save_fit,
    versioned_csv, write_atomic, CvDocument, FitDocument,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_WARN: u8 = 2;

fn parse_init(name: &str, folds: usize, grid_size: usize, seed: u64) -> Result<InitStrategy> {
    match name {
        "lasso-fixed" => Ok(InitStrategy::LassoFixed),
        "lasso-cv" => Ok(InitStrategy::LassoCv {
            folds,
            grid_size,
            seed,
        }),
        "ols" => Ok(InitStrategy::Ols),
        other => bail!("unknown init strategy '{other}' (expected lasso-fixed, lasso-cv or ols)"),
    }
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Training data CSV with a header row
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the response column; all other columns are predictors
    #[arg(long)]
    pub response: String,
    /// Robustness parameter (0 = plain lasso)
    #[arg(long)]
    pub alpha: f64,
    /// Penalty weight, or 'auto' to cross-validate it first
    #[arg(long)]
    pub lambda: String,
    /// Output path for the fit JSON
    #[arg(long, default_value = "fit.json")]
    pub out: PathBuf,
    /// Optional CSV path for the per-iteration trace
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Convergence tolerance of the reweighting loop
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Initializer: lasso-fixed, lasso-cv or ols
    #[arg(long, default_value = "lasso-fixed")]
    pub init: String,
    /// Folds for --lambda auto (and the lasso-cv initializer)
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Lambda grid size for --lambda auto
    #[arg(long, default_value_t = 50)]
    pub grid_size: usize,
}

pub fn cmd_fit(args: &FitArgs, seed: u64, verbose: u8) -> Result<u8> {
    let loaded = load_dataset_csv(&args.input, &args.response)?;
    let mut settings = EstimatorSettings::new(args.alpha, 0.0);
    settings.tol = args.tol;
    settings.max_iter = args.max_iter;
    settings.init = parse_init(&args.init, args.folds, args.grid_size, derive(seed, 1))?;

    let lambda = if args.lambda == "auto" {
        let cv = tune_lambda(
            &loaded.data,
            args.alpha,
            args.folds,
            args.grid_size,
            derive(seed, 0),
            &settings,
        )?;
        if verbose > 0 {
            eprintln!("cross-validated lambda = {}", cv.best_lambda);
        }
        cv.best_lambda
    } else {
        args.lambda
            .parse::<f64>()
            .with_context(|| format!("--lambda must be a number or 'auto', got '{}'", args.lambda))?
    };
    settings.lambda = lambda;

    let (fit, trace) = fit_dpd_lasso(&loaded.data, &settings)?;
    let converged = fit.converged;
    let doc = FitDocument::new(fit, loaded.feature_names, loaded.response_name);
    save_fit(&args.out, &doc)?;
    if let Some(trace_path) = &args.trace {
        write_atomic(trace_path, &versioned_csv(&trace.to_csv()))?;
    }
    println!(
        "fit: alpha={} lambda={} iterations={} converged={} -> {}",
        doc.fit.alpha,
        doc.fit.lambda,
        doc.fit.n_iter,
        converged,
        args.out.display()
    );
    if !converged {
        eprintln!(
            "warning: estimator did not converge within {} iterations",
            args.max_iter
        );
        return Ok(EXIT_WARN);
    }
    Ok(EXIT_OK)
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Fit JSON produced by the fit subcommand
    #[arg(long)]
    pub model: PathBuf,
    /// Feature CSV; columns are matched to the model by name
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "predictions.csv")]
    pub out: PathBuf,
}

pub fn cmd_predict(args: &PredictArgs) -> Result<u8> {
    let doc = load_fit(&args.model)?;
    let x = load_features_csv(&args.input, &doc)?;
    let pred = predict(&doc.fit, &x)?;
    let mut body = String::from("row,prediction\n");
    for (i, v) in pred.iter().enumerate() {
        body.push_str(&format!("{i},{v}\n"));
    }
    write_atomic(&args.out, &versioned_csv(&body))?;
    println!("predictions: {} rows -> {}", pred.len(), args.out.display());
    Ok(EXIT_OK)
}

#[derive(Args, Debug)]
pub struct CvArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub response: String,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 50)]
    pub grid_size: usize,
    #[arg(long, default_value = "cv.csv")]
    pub out_csv: PathBuf,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    /// Also report the upper-10%-trimmed CV error per lambda (diagnostic only)
    #[arg(long)]
    pub trimmed_cv: bool,
    /// Export the best-lambda stratified fold assignment for audit
    #[arg(long)]
    pub out_folds: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
}

pub fn cmd_cv(args: &CvArgs, seed: u64, verbose: u8) -> Result<u8> {
    let loaded = load_dataset_csv(&args.input, &args.response)?;
    let mut settings = EstimatorSettings::new(args.alpha, 0.0);
    settings.tol = args.tol;
    settings.max_iter = args.max_iter;

    let result = tune_lambda(
        &loaded.data,
        args.alpha,
        args.folds,
        args.grid_size,
        seed,
        &settings,
    )?;
    if verbose > 0 {
        eprintln!(
            "evaluated {} lambdas; unconverged fits per lambda: {:?}",
            result.lambda_grid.len(),
            result.n_unconverged
        );
    }

    // recomputed diagnostics for the selected lambda
    let best = result.best_lambda;
    let best_index = result.best_index;
    let best_seed = derive(seed, best_index as u64);
    let mut best_settings = settings.clone();
    best_settings.lambda = best;
    let (best_fit, _) = fit_dpd_lasso(&loaded.data, &best_settings)?;
    let scores = cv::l_scores(&loaded.data, &best_fit)?;
    let folds = cv::stratified_folds(
        scores.as_slice().expect("scores contiguous"),
        args.folds,
        best_seed,
    )?;

    let trimmed = if args.trimmed_cv {
        let mut per_lambda = Vec::with_capacity(result.lambda_grid.len());
        for (idx, &lam) in result.lambda_grid.iter().enumerate() {
            let fold_seed = derive(seed, idx as u64);
            let mut s = settings.clone();
            s.lambda = lam;
            let (f, _) = fit_dpd_lasso(&loaded.data, &s)?;
            let sc = cv::l_scores(&loaded.data, &f)?;
            let fa = cv::stratified_folds(
                sc.as_slice().expect("scores contiguous"),
                args.folds,
                fold_seed,
            )?;
            let errs = cv::cv_squared_errors(&loaded.data, &fa, args.alpha, lam, &settings)?;
            per_lambda.push(cv::trimmed_mean_upper10(&errs));
        }
        Some(per_lambda)
    } else {
        None
    };

    write_atomic(
        &args.out_csv,
        &versioned_csv(&cv_csv(&result, trimmed.as_deref())),
    )?;
    if let Some(json_path) = &args.out_json {
        save_cv_json(
            json_path,
            &CvDocument {
                schema_version: crate::io::SCHEMA_VERSION.to_string(),
                result: result.clone(),
                trimmed_cv_error: trimmed.clone(),
            },
        )?;
    }
    if let Some(folds_path) = &args.out_folds {
        let mut body = String::from("row,fold\n");
        for (i, f) in folds.fold_of.iter().enumerate() {
            body.push_str(&format!("{i},{f}\n"));
        }
        write_atomic(folds_path, &versioned_csv(&body))?;
    }
    println!("best_lambda = {best}");

    let total_unconverged: usize = result.n_unconverged.iter().sum();
    if total_unconverged > 0 {
        eprintln!("warning: {total_unconverged} cross-validation fits did not converge");
        return Ok(EXIT_WARN);
    }
    Ok(EXIT_OK)
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// key = value config file describing the study
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results.csv")]
    pub out: PathBuf,
    /// Summary CSV of per-method medians and quartiles
    #[arg(long, default_value = "summary.csv")]
    pub summary: PathBuf,
    /// Comma-separated subset of {dpd_lasso, lasso}
    #[arg(long, default_value = "dpd_lasso,lasso")]
    pub methods: String,
    /// alpha used by the dpd_lasso method
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Record wall-clock runtimes (off by default so outputs are
    /// byte-reproducible; the runtime_ms column is zero without it)
    #[arg(long)]
    pub timing: bool,
}

fn results_csv(records: &[SimRecord], timing: bool) -> String {
    let mut body = String::from("rep,method,rmspe,l2_error,gamma,fp,fn,runtime_ms,converged\n");
    for r in records {
        let runtime = if timing { r.runtime_ms } else { 0.0 };
        body.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.rep, r.method, r.rmspe, r.l2_error, r.gamma, r.false_pos, r.false_neg, runtime,
            r.converged
        ));
    }
    body
}

pub fn cmd_simulate(args: &SimulateArgs, seed: u64, verbose: u8) -> Result<u8> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = SimConfig::parse(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    // --seed overrides the config seed unless left at the default
    if seed != 0 {
        config.rng_seed = seed;
    }

    let mut methods = Vec::new();
    for name in args.methods.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "dpd_lasso" => methods.push(Method::DpdLasso { alpha: args.alpha }),
            "lasso" => methods.push(Method::Lasso),
            other => bail!("unknown method '{other}' (expected dpd_lasso or lasso)"),
        }
    }
    if methods.is_empty() {
        bail!("--methods selected nothing");
    }

    if verbose > 0 {
        eprintln!(
            "running {} replications x {} methods at n={}, p={}, c={}",
            config.n_reps,
            methods.len(),
            config.n,
            config.p,
            config.contamination
        );
    }
    let records = run_replications(&config, &methods)?;
    write_atomic(&args.out, &versioned_csv(&results_csv(&records, args.timing)))?;

    let mut summary = String::from("method,metric,median,q25,q75\n");
    for row in summarize(&records) {
        summary.push_str(&format!(
            "{},{},{},{},{}\n",
            row.method, row.metric, row.median, row.q25, row.q75
        ));
    }
    write_atomic(&args.summary, &versioned_csv(&summary))?;

    println!(
        "simulation: {} result rows -> {}; summary -> {}",
        records.len(),
        args.out.display(),
        args.summary.display()
    );
    Ok(EXIT_OK)
}

#[derive(Args, Debug)]
pub struct ContourArgs {
    /// Fraction of rows replaced by off-model outliers
    #[arg(long, default_value_t = 0.10)]
    pub contamination: f64,
    /// Comma-separated alpha values; 0 denotes the least-squares surface
    #[arg(long, default_value = "0,0.25,0.5,1,2")]
    pub alphas: String,
    /// Square evaluation grid as min:max:steps
    #[arg(long, default_value = "-10:10:401")]
    pub grid: String,
    #[arg(long, default_value = "contour_out")]
    pub out_dir: PathBuf,
}

pub fn cmd_contour(args: &ContourArgs, seed: u64, verbose: u8) -> Result<u8> {
    let axis: GridSpec = args.grid.parse::<GridSpec>()?;
    let mut alphas = Vec::new();
    for tok in args.alphas.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let a: f64 = tok
            .parse()
            .with_context(|| format!("--alphas entry '{tok}' is not a number"))?;
        if !a.is_finite() || a < 0.0 {
            bail!("--alphas entries must be finite and >= 0, got {a}");
        }
        alphas.push(a);
    }
    if alphas.is_empty() {
        bail!("--alphas selected nothing");
    }

    let (data, truth) = dpd_lasso::contour_scenario(args.contamination, seed)?;
    let truth_beta = (truth.beta_true[0], truth.beta_true[1]);

    let mut summary = String::from("alpha,argmin_beta1,argmin_beta2,min_value,distance_to_truth\n");
    for &alpha in &alphas {
        let surface = loss_surface(&data, alpha, &axis)?;
        let file = args.out_dir.join(format!("surface_alpha_{alpha}.csv"));
        write_atomic(&file, &versioned_csv(&surface.to_csv()))?;
        let d = ((surface.argmin.0 - truth_beta.0).powi(2)
            + (surface.argmin.1 - truth_beta.1).powi(2))
        .sqrt();
        summary.push_str(&format!(
            "{},{},{},{},{}\n",
            alpha, surface.argmin.0, surface.argmin.1, surface.min_value, d
        ));
        println!(
            "alpha={alpha}: argmin=({}, {}), distance to ({}, {}) = {d}",
            surface.argmin.0, surface.argmin.1, truth_beta.0, truth_beta.1
        );
        if verbose > 0 {
            eprintln!("wrote {}", file.display());
        }
    }
    write_atomic(&args.out_dir.join("summary.csv"), &versioned_csv(&summary))?;
    Ok(EXIT_OK)
}

