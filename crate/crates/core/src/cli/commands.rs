use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::table::{sig6, Table};
use super::*;
use crate::analysis::{
    low_truth_argmax, partisan_report, population_curves, sensitivity, sweep_levels, truth_grid,
    LevelAxis, PopulationCurves, SensitivityOptions, SensitivityRange,
};
use crate::data::load_observations;
use crate::error::Result;
use crate::fitting::{
    fit_extreme_user_model, fit_parameters, validate_assumptions, FitOptions, SolverOptions,
    Weighting,
};
use crate::model::{
    population_sharing_probability, sharing_probability, Article, BeliefGroup, ReaderBelief,
};
use crate::optimizer::{
    optimize_fixed_truth, optimize_population, optimize_population_fixed_truth_in,
    optimize_single_reader_closed_form, sweep_moment_space, BiasRange, SweepOptions,
};

pub(super) fn dispatch(
    command: &Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    match command {
        Command::Eval(a) => eval(a, stdout),
        Command::Optimize(a) => optimize(a, stdout),
        Command::Fit(a) => fit(a, stdout, stderr),
        Command::Validate(a) => validate(a, stdout),
        Command::SweepLevels(a) => levels(a, stdout),
        Command::PopulationCurves(a) => curves(a, stdout),
        Command::SweepMoments(a) => moments(a, stdout),
        Command::Sensitivity(a) => sensitivity_grid(a, stdout),
        Command::PartisanReport(a) => partisan(a, stdout, stderr),
    }
}

fn emit(bytes: &[u8], out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::Error::InvalidArgument(format!("serializing output: {e}")))?;
    text.push('\n');
    emit(text.as_bytes(), out, stdout)
}

fn with_params(table: Table, p: &ModelParams) -> Table {
    table
        .meta("f_l", p.f_left)
        .meta("k_l", p.k_left)
        .meta("f_r", p.f_right)
        .meta("k_r", p.k_right)
}

fn eval(a: &EvalArgs, stdout: &mut dyn Write) -> Result<i32> {
    let params = a.params.params()?;
    let article = Article::new(a.b, a.t)?;
    let p = match (a.belief, a.dist) {
        (Some(belief), _) => sharing_probability(article, ReaderBelief::new(belief)?, &params)?,
        (None, Some(d)) => population_sharing_probability(article, &d.distribution(), &params)?,
        (None, None) => unreachable!("clap requires --belief or --dist"),
    };
    writeln!(stdout, "{}", sig6(p))?;
    Ok(EXIT_OK)
}

fn optimize(a: &OptimizeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let params = a.params.params()?;
    let reader = match (a.belief, a.dist) {
        (Some(b), _) => format!("belief:{b}"),
        (None, Some(d)) => d.to_string(),
        (None, None) => unreachable!("clap requires --belief or --dist"),
    };
    let base =
        with_params(Table::new(&[]).meta("command", "optimize"), &params).meta("reader", &reader);
    let table = match a.t {
        Some(t) => {
            let (bias, p) = match (a.belief, a.dist) {
                (Some(belief), _) => {
                    let b = optimize_fixed_truth(t, ReaderBelief::new(belief)?)?;
                    let p = sharing_probability(
                        Article::new(b, t)?,
                        ReaderBelief::new(belief)?,
                        &params,
                    )?;
                    (b, p)
                }
                (None, Some(d)) => {
                    let range = a.side.map_or(BiasRange::Full, BiasRange::Side);
                    optimize_population_fixed_truth_in(
                        &d.distribution(),
                        t,
                        &params,
                        a.grid_step,
                        range,
                    )?
                }
                (None, None) => unreachable!(),
            };
            let mut table = Table {
                columns: ["truth", "bias_star", "probability_star"]
                    .map(String::from)
                    .to_vec(),
                ..base.meta("grid_step", a.grid_step)
            };
            table.push([t, bias, p]);
            table
        }
        None => {
            let r = match (a.belief, a.dist) {
                (Some(belief), _) => {
                    optimize_single_reader_closed_form(ReaderBelief::new(belief)?, &params)?
                }
                (None, Some(d)) => {
                    optimize_population(&d.distribution(), &params, a.grid_step, a.refine_tol)?
                }
                (None, None) => unreachable!(),
            };
            let mut table = Table {
                columns: [
                    "bias_star",
                    "truth_star",
                    "probability_star",
                    "active_boundary",
                ]
                .map(String::from)
                .to_vec(),
                ..base
                    .meta("grid_step", a.grid_step)
                    .meta("refine_tol", a.refine_tol)
            };
            table.push([
                r.bias_star.to_string(),
                r.truth_star.to_string(),
                r.probability_star.to_string(),
                r.active_boundary.to_string(),
            ]);
            table
        }
    };
    emit(&table.to_bytes()?, a.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn fit(a: &FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let observations = load_observations(&a.data, a.justifications.as_deref())?;
    let options = FitOptions {
        weighting: match a.weighting {
            WeightingArg::Unweighted => Weighting::Unweighted,
            WeightingArg::Exposures => Weighting::Exposures,
        },
        solver: SolverOptions {
            max_iterations: a.max_iterations,
            ..SolverOptions::default()
        },
    };
    let report = if a.extreme {
        fit_extreme_user_model(&observations, a.side, &options)?
    } else {
        fit_parameters(&observations, a.side, &options)?
    };
    let doc = json!({
        "command": "fit",
        "model": if a.extreme { "extreme_user" } else { "logistic" },
        "weighting": format!("{:?}", a.weighting).to_lowercase(),
        "report": report,
    });
    emit_json(&doc, a.out.as_deref(), stdout)?;
    if report.converged {
        Ok(EXIT_OK)
    } else {
        writeln!(
            stderr,
            "warning: fit did not converge after {} iterations",
            report.iterations
        )?;
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn validate(a: &ValidateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let observations = load_observations(&a.data, a.justifications.as_deref())?;
    let report = validate_assumptions(&observations)?;
    let doc = json!({
        "command": "validate",
        "n_observations": observations.len(),
        "report": report,
    });
    emit_json(&doc, a.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn levels(a: &SweepLevelsArgs, stdout: &mut dyn Write) -> Result<i32> {
    let params = a.params.params()?;
    let (axis, value) = match (a.b, a.t, a.belief) {
        (Some(v), _, _) => (LevelAxis::Bias, v),
        (_, Some(v), _) => (LevelAxis::Truth, v),
        (_, _, Some(v)) => (LevelAxis::Belief, v),
        _ => unreachable!("clap requires one fixed variable"),
    };
    let sweep = sweep_levels(&params, axis, value, a.points)?;
    let mut table = with_params(
        Table::new(&["b", "t", "belief", "p"]).meta("command", "sweep-levels"),
        &params,
    )
    .meta("fixed", axis)
    .meta("value", value)
    .meta("points", a.points);
    for row in &sweep.rows {
        table.push(*row);
    }
    emit(&table.to_bytes()?, a.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn curve_tables(curves: &PopulationCurves, meta: &[(String, String)]) -> (Table, Table) {
    let mut by_bias = Table::new(&["b", "t", "p"]);
    by_bias.meta = meta.to_vec();
    by_bias.meta.push(("orientation".into(), "by_bias".into()));
    for r in &curves.rows {
        by_bias.push(*r);
    }
    let mut by_truth = Table::new(&["t", "b", "p"]);
    by_truth.meta = meta.to_vec();
    by_truth
        .meta
        .push(("orientation".into(), "by_truth".into()));
    for r in curves.transposed() {
        by_truth.push([r[1], r[0], r[2]]);
    }
    (by_bias, by_truth)
}

fn write_dir(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes)?;
    }
    Ok(())
}

fn manifest(value: serde_json::Value) -> Result<(String, Vec<u8>)> {
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| crate::Error::InvalidArgument(format!("serializing manifest: {e}")))?;
    text.push('\n');
    Ok(("manifest.json".into(), text.into_bytes()))
}

fn params_json(p: &ModelParams) -> serde_json::Value {
    json!({"f_l": p.f_left, "k_l": p.k_left, "f_r": p.f_right, "k_r": p.k_right})
}

fn curves(a: &PopulationCurvesArgs, stdout: &mut dyn Write) -> Result<i32> {
    let params = a.params.params()?;
    let dist = a.dist.distribution();
    let curves = population_curves(&dist, &params, a.side, a.points)?;
    let (bias_star, p_star) = low_truth_argmax(&dist, &params, a.side, a.t, a.grid_step)?;
    let meta = with_params(
        Table::new(&[]).meta("command", "population-curves"),
        &params,
    )
    .meta("dist", a.dist)
    .meta("side", a.side)
    .meta("points", a.points)
    .meta("argmax_t", a.t)
    .meta("argmax_b", bias_star)
    .meta("argmax_p", p_star)
    .meta;
    let (by_bias, by_truth) = curve_tables(&curves, &meta);
    match &a.out {
        None => emit(&by_bias.to_bytes()?, None, stdout)?,
        Some(dir) => {
            let files = vec![
                ("population_curves.csv".to_string(), by_bias.to_bytes()?),
                (
                    "population_curves_by_truth.csv".to_string(),
                    by_truth.to_bytes()?,
                ),
                manifest(json!({
                    "command": "population-curves",
                    "params": params_json(&params),
                    "distribution": a.dist,
                    "side": a.side,
                    "points": a.points,
                    "low_truth_argmax": {"truth": a.t, "bias_star": bias_star, "probability_star": p_star},
                    "tables": ["population_curves.csv", "population_curves_by_truth.csv"],
                }))?,
            ];
            write_dir(dir, &files)?;
        }
    }
    Ok(EXIT_OK)
}

fn moments(a: &SweepMomentsArgs, stdout: &mut dyn Write) -> Result<i32> {
    let params = a.params.params()?;
    let options = SweepOptions {
        weight_step: a.weight_step,
        grid_step: a.grid_step,
        refine_tol: a.refine_tol,
        max_rows: a.max_rows,
        fixed_truth: a.t,
    };
    let rows = sweep_moment_space(&params, &options)?;
    let mut columns: Vec<&str> = BeliefGroup::ALL.iter().map(|g| g.as_str()).collect();
    columns.extend([
        "expectation",
        "variance",
        "bias_star",
        "truth_star",
        "probability_star",
    ]);
    let mut table = with_params(
        Table::new(&columns).meta("command", "sweep-moments"),
        &params,
    )
    .meta("weight_step", a.weight_step)
    .meta("grid_step", a.grid_step)
    .meta("refine_tol", a.refine_tol)
    .meta("fixed_t", a.t.map_or("none".to_string(), |t| t.to_string()));
    for r in &rows {
        let mut row: Vec<f64> = r.weights.to_vec();
        row.extend([
            r.expectation,
            r.variance,
            r.bias_star,
            r.truth_star,
            r.probability_star,
        ]);
        table.push(row);
    }
    emit(&table.to_bytes()?, a.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn range_arg(v: &Option<Vec<f64>>, name: &str, default: (f64, f64)) -> Result<(f64, f64)> {
    match v {
        None => Ok(default),
        Some(pair) if pair.len() == 2 => Ok((pair[0], pair[1])),
        Some(_) => Err(crate::Error::InvalidArgument(format!(
            "--{name}-range takes LOW,HIGH"
        ))),
    }
}

fn sensitivity_grid(a: &SensitivityArgs, stdout: &mut dyn Write) -> Result<i32> {
    let base = a.params.params()?;
    let t = SensitivityRange::TABLE;
    let fl = range_arg(&a.fl_range, "fl", (t.low.f_left, t.high.f_left))?;
    let kl = range_arg(&a.kl_range, "kl", (t.low.k_left, t.high.k_left))?;
    let fr = range_arg(&a.fr_range, "fr", (t.low.f_right, t.high.f_right))?;
    let kr = range_arg(&a.kr_range, "kr", (t.low.k_right, t.high.k_right))?;
    let range = SensitivityRange {
        low: ModelParams::new(fl.0, kl.0, fr.0, kr.0)?,
        high: ModelParams::new(fl.1, kl.1, fr.1, kr.1)?,
    };
    let dists: Vec<BuiltinDistribution> = if a.dist.is_empty() {
        BuiltinDistribution::ALL.to_vec()
    } else {
        a.dist.clone()
    };
    let options = SensitivityOptions {
        side: a.side,
        truth: a.t,
        threshold: a.threshold,
        grid_step: a.grid_step,
    };
    let report = sensitivity(&range, &base, &dists, &options)?;

    let mut summary = with_params(
        Table::new(&[
            "combination",
            "label",
            "f_l",
            "k_l",
            "f_r",
            "k_r",
            "distribution",
            "bias_star",
            "probability_star",
            "base_bias_star",
            "shift",
            "shifted",
            "flagged",
        ])
        .meta("command", "sensitivity"),
        &base,
    )
    .meta("side", a.side)
    .meta("t", a.t)
    .meta("threshold", a.threshold)
    .meta("grid_step", a.grid_step);
    for r in &report.rows {
        let c = range.combination(r.combination);
        summary.push([
            r.combination.to_string(),
            r.label.clone(),
            c.params.f_left.to_string(),
            c.params.k_left.to_string(),
            c.params.f_right.to_string(),
            c.params.k_right.to_string(),
            r.distribution.to_string(),
            r.bias_star.to_string(),
            r.probability_star.to_string(),
            r.base_bias_star.to_string(),
            r.shift.to_string(),
            (r.shift > report.threshold).to_string(),
            report.is_flagged(r.combination).to_string(),
        ]);
    }

    let Some(dir) = &a.out else {
        emit(&summary.to_bytes()?, None, stdout)?;
        return Ok(EXIT_OK);
    };
    let mut files = vec![("summary.csv".to_string(), summary.to_bytes()?)];
    let mut tables = Vec::new();
    for c in range.combinations() {
        for d in &dists {
            let curves = population_curves(&d.distribution(), &c.params, a.side, a.points)?;
            let meta = with_params(Table::new(&[]).meta("command", "sensitivity"), &c.params)
                .meta("combination", c.index)
                .meta("label", c.label())
                .meta("dist", d)
                .meta("side", a.side)
                .meta("points", a.points)
                .meta;
            let (by_bias, _) = curve_tables(&curves, &meta);
            let name = format!("curves/c{:02}_{}_{}.csv", c.index, c.label(), d);
            files.push((name.clone(), by_bias.to_bytes()?));
            tables.push(name);
        }
    }
    files.push(manifest(json!({
        "command": "sensitivity",
        "base": params_json(&base),
        "low": params_json(&range.low),
        "high": params_json(&range.high),
        "order": "combination = 8*f_l + 4*k_l + 2*f_r + k_r, 1 = high",
        "side": a.side,
        "truth": a.t,
        "threshold": a.threshold,
        "flagged": report.flagged.iter().map(|&i| range.combination(i).label()).collect::<Vec<_>>(),
        "summary": "summary.csv",
        "tables": tables,
    }))?);
    write_dir(dir, &files)?;
    Ok(EXIT_OK)
}

fn partisan(a: &PartisanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let params = ModelParams::symmetric(a.f, a.k)?;
    let truths = truth_grid(a.t_points)?;
    let mut table = Table::new(&[
        "q",
        "t",
        "p_unimodal",
        "p_partisan",
        "absolute_gap",
        "relative_gap",
    ])
    .meta("command", "partisan-report")
    .meta("f", a.f)
    .meta("k", a.k)
    .meta("b", a.b)
    .meta("belief", a.belief);
    let mut warned = false;
    for &q in &a.q {
        let report = partisan_report(&params, a.b, a.belief, q, &truths)?;
        if !report.same_sign && !warned {
            writeln!(
                stderr,
                "warning: b and belief have opposite signs; p_U >= p_P is not guaranteed"
            )?;
            warned = true;
        }
        for r in &report.rows {
            table.push([
                q,
                r.truth,
                r.p_unimodal,
                r.p_partisan,
                r.absolute_gap,
                r.relative_gap,
            ]);
        }
    }
    emit(&table.to_bytes()?, a.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}
