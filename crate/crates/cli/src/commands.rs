use std::fmt::Write as _;

use ldps::cluster::{self, ClusterConfig, LdpsRun, SearchMetric, Seeding};
use ldps::data::{self, LabelColumn, Preset};
use ldps::dissim;
use ldps::eval::{self, BenchmarkOptions};
use ldps::peaks::{self, GridCell, LdpsProfile};
use ldps::{ClusterModel, DataMatrix, DensityExponent, DissimilarityMatrix, LdpsParams};
use serde_json::json;

use crate::args::{
    BenchmarkArgs, ClusterArgs, ClusterMethod, Dissim, EdgeWeightArg, EstimateArgs, EstimateMethod, GenDataArgs, InputArgs,
    LabelsArg, SearchArgs, TheoremArgs,
};
use crate::output::{emit, invocation, Table};
use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn gen_data(a: &GenDataArgs, seed: u64) -> Result<(), CliError> {
    let set = match &a.preset {
        Some(name) => Preset::parse(name)
            .ok_or_else(|| usage(format!("unknown preset '{name}'")))?
            .generate(seed)?,
        None => {
            let k = a.k.ok_or_else(|| usage("--k is required without --preset"))?;
            let m0 = a.m0.ok_or_else(|| usage("--m0 is required without --preset"))?;
            data::gen_gaussian_clusters(k, m0, a.sigma, a.dim, seed, a.min_sep)?.dataset
        }
    };
    emit(a.out.as_deref(), data::format_points(&set).as_bytes())
}

struct Loaded {
    data: DataMatrix,
    labels: Option<Vec<usize>>,
}

fn load(a: &InputArgs) -> Result<Loaded, CliError> {
    let column = match a.labels {
        LabelsArg::Auto => LabelColumn::Auto,
        LabelsArg::None => LabelColumn::Absent,
        LabelsArg::Last => LabelColumn::Present,
    };
    let set = data::load_point_file(&a.input, column)
        .map_err(|e| CliError::Io(format!("{}: {e}", a.input.display())))?;
    let data = if a.no_normalize {
        set.data
    } else {
        dissim::min_max_normalize(&set.data)?
    };
    Ok(Loaded { data, labels: set.labels })
}

fn dissimilarity(a: &InputArgs, data: &DataMatrix) -> Result<DissimilarityMatrix, CliError> {
    Ok(match a.dissim {
        Dissim::Euclid => dissim::euclidean(data)?,
        Dissim::Sqeuclid => dissim::squared_euclidean(data)?,
        Dissim::Manifold => {
            let weight = match a.edge_weight {
                EdgeWeightArg::Euclid => dissim::EdgeWeight::Euclidean,
                EdgeWeightArg::Sqeuclid => dissim::EdgeWeight::SquaredEuclidean,
            };
            dissim::manifold_distance(&dissim::build_tnn_graph_weighted(data, a.tnn, weight)?)?
        }
    })
}

fn base_params(s: &SearchArgs, outlier_threshold: f64) -> Result<LdpsParams, CliError> {
    let mut p = LdpsParams {
        density_exponent: DensityExponent::from_value(s.density_exp)?,
        tau_min: s.tau_min,
        outlier_threshold,
        ..LdpsParams::default()
    };
    if let (Some(h), Some(r)) = (s.h_bar, s.r_bar) {
        p = p.with_theta(h, r);
    }
    p.validate()?;
    Ok(p)
}

/// Peak profile at the fixed θ, or at the best grid cell.
fn profile(
    d: &DissimilarityMatrix,
    s: &SearchArgs,
    params: &LdpsParams,
) -> Result<(LdpsProfile, Option<Vec<GridCell>>), CliError> {
    if s.h_bar.is_some() {
        return Ok((peaks::search_peaks(d, params)?, None));
    }
    let grid = peaks::grid_search_theta(d, &s.grid_h.values(), &s.grid_r.values(), params)?;
    Ok((grid.profile, Some(grid.cells)))
}

fn join_indices(idx: &[usize]) -> String {
    idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_grid(path: &std::path::Path, cells: &[GridCell]) -> Result<(), CliError> {
    let mut t = Table::new(&["h_bar", "r_bar", "raw_k", "k", "tau_star"])?;
    for c in cells {
        t.row(&[
            c.h_bar.to_string(),
            c.r_bar.to_string(),
            c.raw_k.to_string(),
            c.estimated_k.to_string(),
            c.tau_star.to_string(),
        ])?;
    }
    emit(Some(path), &t.finish()?)
}

fn ranks(order: &[usize]) -> Vec<usize> {
    let mut rank = vec![0; order.len()];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos + 1;
    }
    rank
}

fn write_profile(path: &std::path::Path, p: &LdpsProfile) -> Result<(), CliError> {
    let mut t = Table::new(&["index", "rho", "rho_bar", "ldi", "gamma_c", "gamma_o", "rank", "peak"])?;
    let rank = ranks(&p.sorted_order);
    let mut peak = vec![false; rank.len()];
    for &i in &p.peak_indices {
        peak[i] = true;
    }
    for i in 0..rank.len() {
        t.row(&[
            i.to_string(),
            p.rho[i].to_string(),
            p.rho_bar[i].to_string(),
            p.ldi[i].to_string(),
            p.gamma_c[i].to_string(),
            p.gamma_o[i].to_string(),
            rank[i].to_string(),
            (peak[i] as u8).to_string(),
        ])?;
    }
    emit(Some(path), &t.finish()?)
}

pub fn estimate_k(a: &EstimateArgs) -> Result<(), CliError> {
    let loaded = load(&a.input)?;
    let d = dissimilarity(&a.input, &loaded.data)?;
    match a.method {
        EstimateMethod::Ldps => estimate_ldps(a, &d),
        EstimateMethod::Cfsfdp => estimate_cfsfdp(a, &d),
    }
}

fn estimate_ldps(a: &EstimateArgs, d: &DissimilarityMatrix) -> Result<(), CliError> {
    let params = base_params(&a.search, LdpsParams::default().outlier_threshold)?;
    let (p, cells) = profile(d, &a.search, &params)?;
    if let (Some(path), Some(cells)) = (&a.grid_out, &cells) {
        write_grid(path, cells)?;
    }
    if let Some(path) = &a.profile_out {
        write_profile(path, &p)?;
    }
    let k = p.estimated_k_signed();
    let mut text = String::new();
    if a.json {
        let v = json!({
            "invocation": invocation(),
            "method": "ldps",
            "k": k,
            "h_bar": p.params.h_bar,
            "r_bar": p.params.r_bar,
            "tau_star": p.tau_star,
            "raw_k": p.raw_k,
            "peaks": p.peak_indices,
        });
        writeln!(text, "{v}").unwrap();
    } else {
        writeln!(text, "k: {k}").unwrap();
        writeln!(text, "h_bar: {}", p.params.h_bar).unwrap();
        writeln!(text, "r_bar: {}", p.params.r_bar).unwrap();
        writeln!(text, "tau_star: {}", p.tau_star).unwrap();
        writeln!(text, "peaks: {}", join_indices(&p.peak_indices)).unwrap();
    }
    emit(None, text.as_bytes())?;
    if p.estimated_k.is_none() {
        return Err(CliError::Estimation(format!(
            "largest gap {} is below tau-min {}",
            p.tau_star, p.params.tau_min
        )));
    }
    Ok(())
}

fn estimate_cfsfdp(a: &EstimateArgs, d: &DissimilarityMatrix) -> Result<(), CliError> {
    let dc = peaks::cutoff_for_neighbor_fraction(d, a.dc_fraction)?;
    let p = peaks::cfsfdp_baseline(d, dc)?;
    if let Some(path) = &a.profile_out {
        let mut t = Table::new(&["index", "rho", "gdi", "gamma", "rank", "peak"])?;
        let rank = ranks(&p.sorted_order);
        for i in 0..rank.len() {
            t.row(&[
                i.to_string(),
                p.rho_cutoff[i].to_string(),
                p.gdi[i].to_string(),
                p.gamma[i].to_string(),
                rank[i].to_string(),
                ((rank[i] <= p.estimated_k) as u8).to_string(),
            ])?;
        }
        emit(Some(path), &t.finish()?)?;
    }
    let gap = p.gaps[p.estimated_k - 1];
    let mut text = String::new();
    if a.json {
        let v = json!({
            "invocation": invocation(),
            "method": "cfsfdp",
            "k": p.estimated_k,
            "dc": p.dc,
            "gap": gap,
            "peaks": p.peak_indices,
        });
        writeln!(text, "{v}").unwrap();
    } else {
        writeln!(text, "k: {}", p.estimated_k).unwrap();
        writeln!(text, "dc: {}", p.dc).unwrap();
        writeln!(text, "gap: {gap}").unwrap();
        writeln!(text, "peaks: {}", join_indices(&p.peak_indices)).unwrap();
    }
    emit(None, text.as_bytes())
}

struct Outcome {
    model: ClusterModel,
    labels: Vec<i64>,
    tau_star: Option<f64>,
    outliers: usize,
}

fn from_run(run: LdpsRun) -> Outcome {
    Outcome {
        labels: run.labels(),
        tau_star: Some(run.tau_star),
        outliers: run.outliers.len(),
        model: run.model,
    }
}

fn from_model(model: ClusterModel) -> Outcome {
    Outcome {
        labels: model.assignments.iter().map(|&a| a as i64).collect(),
        tau_star: None,
        outliers: 0,
        model,
    }
}

fn search_metric(dissim: Dissim) -> Result<SearchMetric, CliError> {
    match dissim {
        Dissim::Euclid => Ok(SearchMetric::Euclidean),
        Dissim::Sqeuclid => Ok(SearchMetric::SquaredEuclidean),
        Dissim::Manifold => Err(usage("this command needs --dissim euclid or sqeuclid")),
    }
}

pub fn cluster(a: &ClusterArgs, seed: u64) -> Result<(), CliError> {
    let loaded = load(&a.input)?;
    let data = &loaded.data;
    let config = ClusterConfig {
        max_iterations: a.max_iter,
        ..ClusterConfig::default()
    };
    let need_k = || a.k.ok_or_else(|| usage("--k is required for this method"));
    let outcome = match a.method {
        ClusterMethod::LdpsMeans | ClusterMethod::LdpsMedoids => {
            let params = base_params(&a.search, a.outlier_threshold)?;
            let d = dissimilarity(&a.input, data)?;
            let (p, _) = profile(&d, &a.search, &params)?;
            let run = if a.method == ClusterMethod::LdpsMeans {
                cluster::ldps_means_with_profile(data, a.k, p, &config)?
            } else {
                cluster::ldps_medoids_with_profile(&d, a.k, p, &config)?
            };
            from_run(run)
        }
        ClusterMethod::Kmeans => {
            from_model(cluster::kmeans(data, need_k()?, &config.with_seeding(Seeding::Random(seed)))?)
        }
        ClusterMethod::KmeansPlusPlus => from_model(cluster::kmeans(
            data,
            need_k()?,
            &config.with_seeding(Seeding::KMeansPlusPlus(seed)),
        )?),
        ClusterMethod::Kmedoids => {
            let k = need_k()?;
            let d = dissimilarity(&a.input, data)?;
            from_model(cluster::kmedoids(&d, k, &config.with_seeding(Seeding::Random(seed)))?)
        }
    };

    let mut t = Table::new(&["index", "label"])?;
    for (i, l) in outcome.labels.iter().enumerate() {
        t.row(&[i.to_string(), l.to_string()])?;
    }
    emit(Some(&a.out), &t.finish()?)?;

    // Scores cover the clustered points; removed outliers are counted separately.
    let scores = match &loaded.labels {
        Some(truth) => {
            let (pred, kept): (Vec<usize>, Vec<usize>) = outcome
                .labels
                .iter()
                .zip(truth)
                .filter(|(l, _)| **l >= 0)
                .map(|(&l, &t)| (l as usize, t))
                .unzip();
            Some(eval::evaluate(&pred, &kept)?)
        }
        None => None,
    };
    let method = match a.method {
        ClusterMethod::LdpsMeans => "ldps-means",
        ClusterMethod::LdpsMedoids => "ldps-medoids",
        ClusterMethod::Kmeans => "kmeans",
        ClusterMethod::KmeansPlusPlus => "kmeans++",
        ClusterMethod::Kmedoids => "kmedoids",
    };
    let m = &outcome.model;
    if a.json {
        let v = json!({
            "invocation": invocation(),
            "method": method,
            "k": m.k,
            "sse": m.sse,
            "iterations": m.iterations,
            "tau_star": outcome.tau_star,
            "outliers": outcome.outliers,
            "error_rate": scores.map(|s| s.error_rate),
            "true_assoc": scores.map(|s| s.true_assoc),
            "false_assoc": scores.map(|s| s.false_assoc),
        });
        emit(None, format!("{v}\n").as_bytes())
    } else {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        let mut t = Table::new(&[
            "method",
            "k",
            "sse",
            "iterations",
            "tau_star",
            "outliers",
            "error_rate",
            "true_assoc",
            "false_assoc",
        ])?;
        t.row(&[
            method.to_string(),
            m.k.to_string(),
            m.sse.to_string(),
            m.iterations.to_string(),
            opt(outcome.tau_star),
            outcome.outliers.to_string(),
            opt(scores.map(|s| s.error_rate)),
            opt(scores.map(|s| s.true_assoc)),
            opt(scores.map(|s| s.false_assoc)),
        ])?;
        emit(None, &t.finish()?)
    }
}

pub fn benchmark(a: &BenchmarkArgs, seed: u64) -> Result<(), CliError> {
    let loaded = load(&a.input)?;
    let k = match a.k {
        Some(k) => k,
        None => loaded
            .labels
            .as_ref()
            .map(|l| l.iter().copied().max().map_or(0, |v| v + 1))
            .ok_or_else(|| usage("--k is required when the input has no labels"))?,
    };
    let params = base_params(&a.search, LdpsParams::default().outlier_threshold)?;
    let grid = if a.search.h_bar.is_some() {
        None
    } else {
        Some((a.search.grid_h.values(), a.search.grid_r.values()))
    };
    let opts = BenchmarkOptions {
        budget: a.budget,
        seed,
        params,
        metric: search_metric(a.input.dissim)?,
        grid,
        config: ClusterConfig::default(),
    };
    let report = eval::benchmark_protocol(&loaded.data, k, &opts)?;
    let mut body = invocation().into_bytes();
    body.push(b'\n');
    eval::write_benchmark_csv(&mut body, &report, a.timing)?;
    emit(a.out.as_deref(), &body)
}

pub fn verify_theorem1(a: &TheoremArgs, seed: u64) -> Result<(), CliError> {
    let r = eval::theorem_one_monte_carlo(a.m0, a.k, a.trials, seed)?;
    let mut t = Table::new(&["m0", "k", "trials", "empirical_mean", "analytic", "relative_error"])?;
    t.row(&[
        r.m0.to_string(),
        r.k.to_string(),
        r.trials.to_string(),
        r.empirical_mean.to_string(),
        r.analytic.to_string(),
        r.relative_error().to_string(),
    ])?;
    emit(a.out.as_deref(), &t.finish()?)
}
