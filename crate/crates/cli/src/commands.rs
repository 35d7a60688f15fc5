use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use linkshroud::apps::{attack_probability, sampling_probability, sybil_eval, SybilScenario};
use linkshroud::graph::{load_edge_list, write_edge_list};
use linkshroud::perturb::{linkmirage_trace, Mechanism};
use linkshroud::privacy::{
    anti_aggregation, anti_aggregation_aggregated, indistinguishability_series, posterior_series, PosteriorSetup,
};
use linkshroud::report::{rows_to_csv, rows_to_json, MetricRow, CSV_HEADER};
use linkshroud::rng::derive_seed;
use linkshroud::utility::{
    max_community_distance, mixing_time, pagerank, ratio_cut, slem, structural_metrics, ud_upper_bound,
    utility_distance_at,
};
use linkshroud::{cluster_static, load_sequence, modularity, Error, Graph, TemporalGraphSequence};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Eval, Metric, RunConfig, SybilConfig};
use crate::error::{CliError, Result};
use crate::provenance::{self, Provenance};

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn mechanism_dir(out: &Path, m: Mechanism) -> PathBuf {
    out.join(m.name())
}

fn snapshot_path(dir: &Path, t: usize) -> PathBuf {
    dir.join(format!("g_prime_{t}.txt"))
}

pub fn perturb(cfg: &RunConfig) -> Result<()> {
    let manifest = cfg.manifest()?;
    let out = cfg.out()?;
    let seq = load_sequence(manifest)?;
    for &mech in &cfg.mechanisms {
        let prov = provenance::compute(manifest, mech, &cfg.params)?;
        let dir = mechanism_dir(out, mech);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

        let (graphs, steps) = if mech == Mechanism::Selective {
            let trace = linkmirage_trace(&seq, &cfg.params)?;
            let steps: Vec<serde_json::Value> = trace
                .iter()
                .map(|s| {
                    json!({
                        "record": s.record,
                        "unchanged": s.diff.unchanged,
                        "changed": s.diff.changed,
                    })
                })
                .collect();
            (trace.into_iter().map(|s| s.graph).collect::<Vec<_>>(), steps)
        } else {
            let graphs = mech.run(&seq, &cfg.params)?;
            let steps = graphs.iter().enumerate().map(|(t, g)| json!({ "t": t, "edges": g.edge_count() })).collect();
            (graphs, steps)
        };

        for (t, g) in graphs.iter().enumerate() {
            let path = snapshot_path(&dir, t);
            let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            let header = [format!("provenance={}", prov.hash), format!("mechanism={mech}"), format!("t={t}")];
            write_edge_list(g, &header, BufWriter::new(file)).map_err(|e| CliError::io(&path, e))?;
        }
        let record = json!({ "provenance": prov.hash, "mechanism": mech, "params": cfg.params, "steps": steps });
        write(&dir.join("record.json"), to_json(&record))?;
        write(&dir.join("provenance.json"), to_json(&prov))?;
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Loads one mechanism's perturbed snapshots after checking they were made
/// from the current manifest and parameters.
fn load_outputs(cfg: &RunConfig, seq: &TemporalGraphSequence, mech: Mechanism) -> Result<(Provenance, Vec<Graph>)> {
    let dir = mechanism_dir(cfg.out()?, mech);
    let prov = provenance::compute(cfg.manifest()?, mech, &cfg.params)?;
    provenance::check(&dir, &prov)?;
    let mut graphs = Vec::with_capacity(seq.len());
    for t in 0..seq.len() {
        let path = snapshot_path(&dir, t);
        if !path.exists() {
            return Err(CliError::Missing(path.display().to_string()));
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let tag = format!("# provenance={}", prov.hash);
        if text.lines().next() != Some(tag.as_str()) {
            return Err(CliError::Stale {
                path,
                found: text.lines().next().unwrap_or("").to_string(),
                expected: prov.hash.clone(),
            });
        }
        let g = load_edge_list(&path)?;
        if g.ids() != seq[t].ids() {
            return Err(CliError::Missing(format!("{}: vertex set differs from snapshot {t}", path.display())));
        }
        graphs.push(g);
    }
    Ok((prov, graphs))
}

fn slem_or_one(g: &Graph) -> Result<f64> {
    match slem(g) {
        Ok(s) => Ok(s),
        Err(Error::Disconnected) | Err(Error::InvalidParameter(_)) => Ok(1.0),
        Err(e) => Err(e.into()),
    }
}

fn mixing_or_inf(g: &Graph, eps: f64, lazy: bool) -> Result<f64> {
    match mixing_time(g, eps, lazy) {
        Ok(m) => Ok(m.steps().map_or(f64::INFINITY, |r| r as f64)),
        Err(Error::Disconnected) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

fn metric_rows(
    cfg: &RunConfig,
    seq: &TemporalGraphSequence,
    mech: Mechanism,
    perturbed: &[Graph],
) -> Result<Vec<MetricRow>> {
    let name = mech.name();
    let k = cfg.params.k;
    let last = seq.len() - 1;
    let mut rows = Vec::new();
    for metric in &cfg.metrics {
        match metric {
            Metric::AntiAggregation => {
                let per_t: Vec<(f64, f64)> = (0..seq.len())
                    .into_par_iter()
                    .map(|t| -> Result<(f64, f64)> {
                        let single = anti_aggregation(&seq[t], &perturbed[t], k)?;
                        let (agg, _) = anti_aggregation_aggregated(&perturbed[..=t], &seq[t], k)?;
                        Ok((single, agg))
                    })
                    .collect::<Result<_>>()?;
                for (t, (single, agg)) in per_t.into_iter().enumerate() {
                    rows.push(MetricRow::exact(t, name, "anti-aggregation", single));
                    rows.push(MetricRow::exact(t, name, "anti-aggregation-aggregated", agg));
                }
            }
            Metric::AntiInference => {
                let q = cfg.query.ok_or_else(|| CliError::Config("anti-inference needs --query u,v,t".into()))?;
                let setup =
                    PosteriorSetup { seq, perturbed, mechanism: mech, params: cfg.params, n_samples: cfg.samples };
                let seed = derive_seed(cfg.params.seed, &[mech as u64]);
                let series = posterior_series(&setup, q.u, q.v, q.t.min(last), &cfg.prior, seed)?;
                let present: Vec<usize> =
                    (0..=q.t.min(last)).filter(|&t| seq[t].contains(q.u) && seq[t].contains(q.v)).collect();
                for (t, est) in present.into_iter().zip(series) {
                    rows.push(MetricRow::estimated(
                        t,
                        name,
                        "posterior",
                        est.probability,
                        est.standard_error,
                        est.samples,
                    ));
                    rows.push(MetricRow::exact(t, name, "prior", est.prior));
                    rows.push(MetricRow::estimated(
                        t,
                        name,
                        "prior-gap",
                        est.prior_gap(),
                        est.standard_error,
                        est.samples,
                    ));
                }
            }
            Metric::Indistinguishability => {
                let q = cfg.query.ok_or_else(|| CliError::Config("indistinguishability needs --query u,v,t".into()))?;
                let horizon = q.t.min(last) + 1;
                let truncated = TemporalGraphSequence::new(seq.snapshots()[..horizon].to_vec())?;
                let series = indistinguishability_series(
                    &truncated,
                    &[(mech, &perturbed[..horizon])],
                    q.u,
                    q.v,
                    &cfg.prior,
                    &cfg.params,
                    cfg.samples,
                    cfg.params.seed,
                )?;
                for r in series {
                    rows.push(MetricRow::estimated(
                        r.t,
                        name,
                        "indistinguishability",
                        r.entropy,
                        r.entropy_se,
                        cfg.samples,
                    ));
                }
            }
            Metric::UtilityDistance => {
                let clusterings: Vec<_> = seq.snapshots().par_iter().map(|g| cluster_static(g).0).collect();
                let deltas: Vec<f64> = seq
                    .snapshots()
                    .iter()
                    .zip(&clusterings)
                    .map(|(g, c)| ratio_cut(g, c))
                    .collect::<linkshroud::Result<_>>()?;
                let eps_t: Vec<f64> = (0..seq.len())
                    .map(|t| max_community_distance(&seq[t], &perturbed[t], &clusterings[t]))
                    .collect::<linkshroud::Result<_>>()?;
                let epsilon = eps_t.iter().copied().fold(0.0, f64::max);
                for t in 0..seq.len() {
                    rows.push(MetricRow::exact(t, name, "ratio-cut", deltas[t]));
                    rows.push(MetricRow::exact(t, name, "community-distance", eps_t[t]));
                }
                for &l in &cfg.l {
                    let per_t: Vec<f64> = (0..seq.len())
                        .into_par_iter()
                        .map(|t| utility_distance_at(&seq[t], &perturbed[t], l))
                        .collect::<linkshroud::Result<_>>()?;
                    for (t, &ud) in per_t.iter().enumerate() {
                        rows.push(MetricRow::exact(t, name, format!("ud-l{l}"), ud));
                    }
                    let mean = per_t.iter().sum::<f64>() / per_t.len() as f64;
                    rows.push(MetricRow::exact(last, name, format!("ud-mean-l{l}"), mean));
                    rows.push(MetricRow::exact(
                        last,
                        name,
                        format!("ud-bound-l{l}"),
                        ud_upper_bound(epsilon, &deltas, l)?,
                    ));
                }
            }
            Metric::Modularity => {
                let per_t: Vec<(f64, f64)> = (0..seq.len())
                    .into_par_iter()
                    .map(|t| -> linkshroud::Result<(f64, f64)> {
                        let c = cluster_static(&seq[t]).0;
                        Ok((modularity(&seq[t], &c)?, modularity(&perturbed[t], &c)?))
                    })
                    .collect::<linkshroud::Result<_>>()?;
                for (t, (orig, pert)) in per_t.into_iter().enumerate() {
                    rows.push(MetricRow::exact(t, name, "modularity-original", orig));
                    rows.push(MetricRow::exact(t, name, "modularity", pert));
                }
            }
            Metric::Pagerank => {
                for t in 0..seq.len() {
                    let a = pagerank(&seq[t], cfg.damping, 1e-12)?;
                    let b = pagerank(&perturbed[t], cfg.damping, 1e-12)?;
                    let delta = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len().max(1) as f64;
                    rows.push(MetricRow::exact(t, name, "pagerank-delta", delta));
                }
            }
            Metric::Structure => {
                for t in 0..seq.len() {
                    let (a, b) = (structural_metrics(&seq[t]), structural_metrics(&perturbed[t]));
                    rows.push(MetricRow::exact(t, name, "clustering-coefficient-original", a.clustering_coefficient));
                    rows.push(MetricRow::exact(t, name, "clustering-coefficient", b.clustering_coefficient));
                    rows.push(MetricRow::exact(t, name, "assortativity-original", a.assortativity));
                    rows.push(MetricRow::exact(t, name, "assortativity", b.assortativity));
                }
            }
            Metric::Spectral => {
                for t in 0..seq.len() {
                    rows.push(MetricRow::exact(t, name, "slem-original", slem_or_one(&seq[t])?));
                    rows.push(MetricRow::exact(t, name, "slem", slem_or_one(&perturbed[t])?));
                    rows.push(MetricRow::exact(
                        t,
                        name,
                        "mixing-time-original",
                        mixing_or_inf(&seq[t], cfg.epsilon, cfg.lazy)?,
                    ));
                    rows.push(MetricRow::exact(
                        t,
                        name,
                        "mixing-time",
                        mixing_or_inf(&perturbed[t], cfg.epsilon, cfg.lazy)?,
                    ));
                }
            }
        }
    }
    Ok(rows)
}

fn metric_settings(cfg: &RunConfig) -> String {
    format!(
        "metrics={:?}\nsamples={}\nl={:?}\nquery={:?}\nprior={:?}\nepsilon={:e}\ndamping={:e}\nlazy={}\n",
        cfg.metrics, cfg.samples, cfg.l, cfg.query, cfg.prior, cfg.epsilon, cfg.damping, cfg.lazy
    )
}

pub fn metrics(cfg: &RunConfig) -> Result<()> {
    if cfg.metrics.is_empty() {
        return Err(CliError::Config("no metric selected (use --metric)".into()));
    }
    let seq = load_sequence(cfg.manifest()?)?;
    let mut rows = Vec::new();
    let mut hashes = Vec::new();
    for &mech in &cfg.mechanisms {
        let (prov, perturbed) = load_outputs(cfg, &seq, mech)?;
        rows.extend(metric_rows(cfg, &seq, mech, &perturbed)?);
        hashes.push(prov.hash);
    }
    let hash = provenance::combine(hashes.iter().map(String::as_str), &metric_settings(cfg));
    let out = cfg.out()?;
    write(&out.join("metrics.csv"), rows_to_csv(&rows, Some(&hash)))?;
    write(&out.join("metrics.json"), rows_to_json(&rows, Some(&hash)))?;
    Ok(())
}

/// Vertices present in every snapshot.
fn persistent_vertices(seq: &TemporalGraphSequence) -> Vec<linkshroud::VertexId> {
    seq[0].ids().iter().copied().filter(|&v| seq.snapshots().iter().all(|g| g.contains(v))).collect()
}

fn sybil_rows(
    cfg: &RunConfig,
    seq: &TemporalGraphSequence,
    mech: Mechanism,
    sc: &SybilConfig,
) -> Result<Vec<MetricRow>> {
    let honest = match &sc.honest {
        Some(p) => load_edge_list(p).map_err(|e| CliError::Config(format!("sybil scenario honest graph: {e}")))?,
        None => seq[seq.len() - 1].clone(),
    };
    let mut rows = Vec::new();
    let mut before = 0;
    for &w in &sc.w {
        let scenario = SybilScenario {
            honest: honest.clone(),
            sybil_size: sc.sybil,
            attack_edges: sc.g,
            walk_length: w,
            routes: sc.r,
            verifiers: sc.verifiers,
        };
        scenario.validate().map_err(|e| CliError::Config(format!("sybil scenario: {e}")))?;
        let mut fpr = Vec::with_capacity(sc.seeds);
        let mut after = Vec::with_capacity(sc.seeds);
        for s in 0..sc.seeds as u64 {
            let seed = derive_seed(cfg.params.seed, &[0x5B11, s]);
            let world = scenario.build(seed)?;
            let single = TemporalGraphSequence::new(vec![world.graph.clone()])?;
            let mut params = cfg.params;
            params.seed = seed;
            let g_prime = mech.run(&single, &params)?.remove(0);
            let r = sybil_eval(&scenario, &world, &g_prime, seed)?;
            fpr.push(r.false_positive_rate);
            after.push(r.attack_edges_after as f64);
            before = r.attack_edges_before;
        }
        let (m, se) = mean_se(&fpr);
        rows.push(MetricRow::estimated(0, mech.name(), format!("sybil-false-positive-w{w}"), m, se, sc.seeds));
        let (m, se) = mean_se(&after);
        rows.push(MetricRow::estimated(0, mech.name(), format!("attack-edges-after-w{w}"), m, se, sc.seeds));
    }
    rows.push(MetricRow::exact(0, mech.name(), "attack-edges-before", before as f64));
    Ok(rows)
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (m, 0.0);
    }
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

pub fn eval(cfg: &RunConfig) -> Result<()> {
    if cfg.evals.is_empty() {
        return Err(CliError::Config("no evaluation selected (use --eval)".into()));
    }
    let sybil = if cfg.evals.contains(&Eval::Sybil) {
        let path =
            cfg.sybil_scenario.as_deref().ok_or_else(|| CliError::Config("sybil needs --sybil-scenario".into()))?;
        Some(SybilConfig::load(path)?)
    } else {
        None
    };
    let seq = load_sequence(cfg.manifest()?)?;
    let targets = cfg.targets.clone().unwrap_or_else(|| persistent_vertices(&seq));
    let mut rows = Vec::new();
    let mut hashes = Vec::new();
    for &mech in &cfg.mechanisms {
        let (prov, perturbed) = load_outputs(cfg, &seq, mech)?;
        hashes.push(prov.hash);
        for e in &cfg.evals {
            match e {
                Eval::Attack => {
                    if targets.is_empty() {
                        return Err(CliError::Config("no target vertex is present in every snapshot".into()));
                    }
                    let series: Vec<Vec<f64>> = targets
                        .par_iter()
                        .map(|&v| attack_probability(&perturbed, v, cfg.f))
                        .collect::<linkshroud::Result<_>>()?;
                    for t in 0..seq.len() {
                        let mean = series.iter().map(|s| s[t]).sum::<f64>() / series.len() as f64;
                        rows.push(MetricRow::exact(t, mech.name(), "attack-probability", mean));
                    }
                }
                Eval::Sampling => {
                    let s = sampling_probability(&perturbed, &seq, cfg.params.k)?;
                    rows.push(MetricRow::exact(seq.len() - 1, mech.name(), "sampling-probability", s.value));
                    rows.push(MetricRow::exact(
                        seq.len() - 1,
                        mech.name(),
                        "out-of-envelope",
                        s.out_of_envelope as f64,
                    ));
                }
                Eval::Sybil => rows.extend(sybil_rows(cfg, &seq, mech, sybil.as_ref().expect("loaded above"))?),
            }
        }
    }
    let extra = format!("evals={:?}\nf={:e}\ntargets={:?}\nsybil={:?}\n", cfg.evals, cfg.f, targets, sybil);
    let hash = provenance::combine(hashes.iter().map(String::as_str), &extra);
    write(&cfg.out()?.join("eval.csv"), rows_to_csv(&rows, Some(&hash)))?;
    Ok(())
}

/// Concatenates `metrics.csv` and `eval.csv` into `report.csv` with a
/// leading `source` column.
pub fn report(cfg: &RunConfig) -> Result<()> {
    let out = cfg.out()?;
    let mut body = String::new();
    let mut provenance_lines = String::new();
    let mut found = false;
    for source in ["metrics", "eval"] {
        let path = out.join(format!("{source}.csv"));
        if !path.exists() {
            continue;
        }
        found = true;
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        for line in text.lines() {
            if let Some(p) = line.strip_prefix("# provenance=") {
                provenance_lines.push_str(&format!("# {source} provenance={p}\n"));
            } else if line == CSV_HEADER || line.is_empty() {
                continue;
            } else {
                body.push_str(&format!("{source},{line}\n"));
            }
        }
    }
    if !found {
        return Err(CliError::Missing(format!("neither metrics.csv nor eval.csv in {}", out.display())));
    }
    write(&out.join("report.csv"), format!("{provenance_lines}source,{CSV_HEADER}\n{body}"))
}
