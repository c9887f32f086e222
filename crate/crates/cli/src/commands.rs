use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use onlinecs::harness::{
    self, fit_asymptote, format_float, AsymptoticLaw, ExperimentConfig, AGGREGATES_FILE, RAW_FILE,
};
use onlinecs::state_evolution::uniform_grid;
use onlinecs::{AsymptoticRegime, ChannelModel, RecoveryEngine, SparsePrior, StateEvolution};

use crate::args::{
    CurveArgs, EvolveArgs, ExperimentArgs, FitArgs, MethodArg, ModelArgs, OfflineArgs, RecoverArgs,
};
use crate::CliError;

type CmdResult = Result<(), CliError>;

fn io_err(context: &'static str, path: &Path) -> impl Fn(io::Error) -> CliError {
    let path = path.display().to_string();
    move |e| CliError::Runtime(format!("{context} {path}: {e}"))
}

fn models(m: &ModelArgs) -> Result<(SparsePrior, ChannelModel), CliError> {
    let prior = SparsePrior::new(m.rho, m.sigma2)?;
    let channel = ChannelModel::new(m.channel.into(), m.noise_var)?;
    Ok((prior, channel))
}

fn is_dash(p: &Path) -> bool {
    p.as_os_str() == "-"
}

fn write_output(path: &Path, body: &str) -> CmdResult {
    if is_dash(path) {
        io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Runtime(e.to_string()))
    } else {
        fs::write(path, body).map_err(io_err("cannot write", path))
    }
}

fn print_stdout(body: &str) -> CmdResult {
    write_output(Path::new("-"), body)
}

pub fn recover(args: RecoverArgs) -> CmdResult {
    let (prior, channel) = models(&args.model)?;
    let reader: Box<dyn BufRead> = if is_dash(&args.input) {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(
            fs::File::open(&args.input).map_err(io_err("cannot open", &args.input))?,
        ))
    };
    let mut engine: Option<RecoveryEngine> = None;
    let mut phi = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Runtime(e.to_string()))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        phi.clear();
        for token in text.split_whitespace() {
            let value: f64 = token
                .parse()
                .map_err(|_| CliError::Invalid(format!("line {}: `{token}` is not a number", lineno + 1)))?;
            phi.push(value);
        }
        let Some(y) = phi.pop() else { continue };
        if phi.is_empty() {
            return Err(CliError::Invalid(format!(
                "line {}: record needs phi entries and y",
                lineno + 1
            )));
        }
        let engine = match &mut engine {
            Some(e) => e,
            None => engine.insert(RecoveryEngine::new(phi.len(), prior, channel)?),
        };
        engine
            .update(&phi, y)
            .map_err(|e| CliError::from(e).context(&format!("line {}", lineno + 1)))?;
    }
    let engine = engine.ok_or_else(|| CliError::Invalid("no records in input".into()))?;
    let mut out = String::from("index,mean,variance\n");
    for (i, (m, v)) in engine.means().iter().zip(engine.variances()).enumerate() {
        out.push_str(&format!("{i},{},{}\n", format_float(*m), format_float(*v)));
    }
    eprintln!(
        "onlinecs: absorbed {} records, N = {}",
        engine.measurements_seen(),
        engine.dim()
    );
    write_output(&args.output, &out)
}

impl CliError {
    fn context(self, what: &str) -> Self {
        match self {
            CliError::Invalid(m) => CliError::Invalid(format!("{what}: {m}")),
            CliError::Runtime(m) => CliError::Runtime(format!("{what}: {m}")),
        }
    }
}

fn load_config(args: &ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", args.config.display())))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("invalid config {}: {e}", args.config.display())))?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.base_seed {
        cfg.base_seed = s;
    }
    if let Some(n) = &args.n_list {
        cfg.n_list = n.clone();
    }
    if let Some(g) = &args.alpha_grid {
        cfg.alpha_grid = g.clone();
    }
    if let Some(s) = args.ode_step {
        cfg.ode_step = s;
    }
    if let Some(q) = args.quad_order {
        cfg.quad_order = q;
    }
    if let Some(d) = &args.output_dir {
        cfg.output_dir = Some(d.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, body: &str) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err("cannot create", dir))?;
    }
    fs::write(path, body).map_err(io_err("cannot write", path))
}

pub fn sweep(args: ExperimentArgs) -> CmdResult {
    let cfg = load_config(&args)?;
    let result = harness::run_sweep(&cfg)?;
    let raw = cfg.output_path(RAW_FILE);
    let agg = cfg.output_path(AGGREGATES_FILE);
    write_file(&raw, &harness::raw_csv(&result))?;
    write_file(&agg, &harness::aggregates_csv(&result))?;
    eprintln!(
        "onlinecs: {} trials x {} dimensions, {} failed; wrote {} and {}",
        cfg.trials,
        cfg.n_list.len(),
        result.failed_trials(),
        raw.display(),
        agg.display()
    );
    Ok(())
}

fn engine(model: &ModelArgs, curve: &CurveArgs) -> Result<(StateEvolution, Vec<f64>), CliError> {
    let (prior, channel) = models(model)?;
    let se = StateEvolution::with_quad_order(prior, channel, curve.quad_order)?;
    let grid = uniform_grid(curve.alpha_max, curve.output_interval)?;
    Ok((se, grid))
}

pub fn evolve(args: EvolveArgs) -> CmdResult {
    let (se, grid) = engine(&args.model, &args.curve)?;
    let curve = se.integrate_online(&grid, args.step)?;
    let mut out = String::from("alpha,q_hat,q,mse\n");
    for p in &curve.points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_float(p.alpha),
            format_float(p.q_hat),
            format_float(p.q),
            format_float(p.mse)
        ));
    }
    if let Some(at) = curve.diverged_at {
        eprintln!(
            "onlinecs: q_hat diverged at alpha = {} (mse reached 0)",
            format_float(at)
        );
    }
    print_stdout(&out)
}

pub fn offline(args: OfflineArgs) -> CmdResult {
    let (se, grid) = engine(&args.model, &args.curve)?;
    if args.scan_alpha_c {
        let (lo, hi) = se.scan_alpha_c(&grid)?;
        return print_stdout(&format!(
            "alpha_lo,alpha_hi\n{},{}\n",
            format_float(lo),
            format_float(hi)
        ));
    }
    let mut out = String::from("alpha,branch,q_hat,q,mse,status,iterations\n");
    for &alpha in grid.iter().filter(|&&a| a > 0.0) {
        let sol = se.solve_offline(alpha)?;
        for (name, b) in [("uninformed", sol.uninformed), ("informed", sol.informed)] {
            let status = serde_json::to_value(b.status).map_err(|e| CliError::Runtime(e.to_string()))?;
            out.push_str(&format!(
                "{},{name},{},{},{},{},{}\n",
                format_float(alpha),
                format_float(b.q_hat),
                format_float(b.q),
                format_float(b.mse),
                status.as_str().unwrap_or("unknown"),
                b.iterations
            ));
        }
    }
    print_stdout(&out)
}

pub fn fisher(args: ModelArgs) -> CmdResult {
    let (prior, channel) = models(&args)?;
    let i = StateEvolution::new(prior, channel).fisher_information()?;
    print_stdout(&format!("{}\n", format_float(i)))
}

/// `(alpha, mse)` pairs from a theory, aggregates or extrapolation CSV.
fn read_curve(path: &Path, method: MethodArg) -> Result<Vec<(f64, f64)>, CliError> {
    let mut text = String::new();
    let mut file = fs::File::open(path).map_err(io_err("cannot open", path))?;
    file.read_to_string(&mut text)
        .map_err(io_err("cannot read", path))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let alpha_col =
        col("alpha").ok_or_else(|| CliError::Invalid("curve CSV has no `alpha` column".into()))?;
    let mse_col = col("mse")
        .or_else(|| col("mse_mean"))
        .or_else(|| col("c0"))
        .ok_or_else(|| CliError::Invalid("curve CSV needs an `mse`, `mse_mean` or `c0` column".into()))?;
    let method_col = col("method");
    let n_col = col("n");
    let wanted_method = match method {
        MethodArg::Online => "online_ode",
        MethodArg::Offline => "offline_fixed_point",
    };
    let rows: Vec<Vec<&str>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').collect())
        .collect();
    let n_max = n_col.and_then(|c| rows.iter().filter_map(|r| r.get(c)?.parse::<u64>().ok()).max());
    let mut points = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        if let Some(c) = method_col {
            if row.get(c) != Some(&wanted_method) {
                continue;
            }
        }
        if let (Some(c), Some(n)) = (n_col, n_max) {
            if row.get(c).and_then(|v| v.parse::<u64>().ok()) != Some(n) {
                continue;
            }
        }
        let parse = |c: usize| -> Result<f64, CliError> {
            row.get(c)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CliError::Invalid(format!("curve CSV row {}: bad number", k + 2)))
        };
        points.push((parse(alpha_col)?, parse(mse_col)?));
    }
    Ok(points)
}

pub fn fit(args: FitArgs) -> CmdResult {
    let (prior, channel) = models(&args.model)?;
    let &[lo, hi] = args.window.as_slice() else {
        return Err(CliError::Invalid("window takes exactly two values, LO,HI".into()));
    };
    if !(lo < hi) {
        return Err(CliError::Invalid("window must satisfy LO < HI".into()));
    }
    let se = StateEvolution::new(prior, channel);
    let points = match &args.curve {
        Some(path) => read_curve(path, args.method)?,
        None => {
            let grid = uniform_grid(hi, args.output_interval)?;
            let curve = match args.method {
                MethodArg::Online => se.integrate_online(&grid, args.step)?,
                MethodArg::Offline => se.offline_curve(&grid)?.0,
            };
            curve.points.iter().map(|p| (p.alpha, p.mse)).collect()
        }
    };
    let law: AsymptoticLaw = args.law.into();
    let fit = fit_asymptote(&points, law, (lo, hi))?;
    let regime = match (law, args.method) {
        (AsymptoticLaw::Power2, MethodArg::Online) => AsymptoticRegime::Online1Bit,
        (AsymptoticLaw::Power2, MethodArg::Offline) => AsymptoticRegime::Offline1Bit,
        (AsymptoticLaw::ExpRate, _) => AsymptoticRegime::OnlineAwgnNoiselessRate,
        (AsymptoticLaw::InverseAlpha, _) => AsymptoticRegime::UniversalNoisy,
    };
    // the reference prefactor is the closed form evaluated at α = 1
    let reference = se.asymptotic_mse(regime, 1.0).ok();
    let (reference_s, ratio_s) = match reference {
        Some(r) => (format_float(r), format_float(fit.param / r)),
        None => {
            eprintln!("onlinecs: no closed-form reference for {law} on this channel");
            (String::new(), String::new())
        }
    };
    print_stdout(&format!(
        "law,param,reference,ratio,n_points,log_resid\n{law},{},{reference_s},{ratio_s},{},{}\n",
        format_float(fit.param),
        fit.n_points,
        format_float(fit.log_resid)
    ))
}

pub fn compare(args: ExperimentArgs) -> CmdResult {
    let cfg = load_config(&args)?;
    let report = harness::compare(&cfg)?;
    let dir = cfg.output_dir.clone().unwrap_or_else(|| ".".into());
    let files = report.write_to(&dir)?;
    for flag in &report.bias_flags {
        eprintln!(
            "onlinecs: note: at alpha = {}, N = {} averages below N = {} by {:.1} standard errors",
            format_float(flag.alpha),
            flag.n,
            flag.n_ref,
            -flag.z
        );
    }
    let mut out = String::from("alpha,n,mse_mean,mse_stderr,theory_online,z\n");
    for c in &report.comparisons {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_float(c.alpha),
            c.n,
            format_float(c.mse_mean),
            format_float(c.mse_stderr),
            format_float(c.theory_online),
            format_float(c.z)
        ));
    }
    for f in files {
        eprintln!("onlinecs: wrote {}", f.display());
    }
    print_stdout(&out)
}
