use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::dataset::{load_pool, prepare, Pool, Prepared};
use super::tables::report_tables;
use crate::error::{Error, Result};
use crate::metrics::{MetricsReport, Scores, Step};
use crate::multiclass::{MarginCache, OvaClassifier};
use crate::netsim::{
    reconcile, Bus, OverheadLedger, OverheadPrediction, Procedure, Reconciliation,
};
use crate::proto::{
    run_cloud, run_dynamic, run_gtl, run_gtl_limited, run_nohtl_mu, run_nohtl_mv, MaliceSchedule,
    MaliciousConfig, ProtocolConfig, ProtocolKind, VoteEnsemble,
};
use crate::rng::derive_seed;

/// Scenario label of unattacked runs.
pub const CLEAN: &str = "clean";
/// Scenario label of runs under the configured attack.
pub const MALICIOUS: &str = "malicious";

/// Metered traffic of one procedure execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadRecord {
    pub run: usize,
    pub scenario: String,
    /// `gtl`, `nohtl_mu`, `nohtl_mv`, `gtl_limited`, `dyn_gtl`,
    /// `dyn_nohtl` or `cloud`.
    pub procedure: String,
    /// Learning phase of the dynamic procedures.
    pub phase: Option<usize>,
    pub messages: u64,
    pub count: u64,
    pub bytes: u64,
    /// Messages that carried training samples.
    pub sample_messages: usize,
    /// Coefficients needed to upload the same training data to a cloud.
    pub cloud_reference: f64,
    /// The same with raw records instead of extracted features.
    pub raw_reference: Option<f64>,
    pub reconciliation: Reconciliation,
}

/// Every formula evaluated at one run's measured payload sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPrediction {
    pub run: usize,
    pub features: OverheadPrediction,
    pub raw: Option<OverheadPrediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub metrics: MetricsReport,
    pub overhead: Vec<OverheadRecord>,
    pub predictions: Vec<RunPrediction>,
}

impl ExperimentReport {
    pub fn empty(config: &ExperimentConfig) -> Self {
        Self {
            name: config.name.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            metrics: MetricsReport::default(),
            overhead: Vec::new(),
            predictions: Vec::new(),
        }
    }

    /// Sample-carrying messages on the protocol buses (the cloud baseline
    /// excluded).
    pub fn protocol_sample_messages(&self) -> usize {
        self.overhead
            .iter()
            .filter(|r| r.procedure != "cloud")
            .map(|r| r.sample_messages)
            .sum()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write_metrics_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.metrics
            .write_csv(&mut buf)
            .map_err(|e| Error::io(path, e))?;
        write_file(path, &buf)
    }

    pub fn write_overhead_csv(&self, path: &Path) -> Result<()> {
        use std::fmt::Write as _;
        let mut out =
            String::from("run,scenario,procedure,phase,quantity,metered,predicted,residual\n");
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_else(|| "NA".into());
        for r in &self.overhead {
            let phase = r.phase.map(|p| p.to_string()).unwrap_or_default();
            let mut line =
                |q: &str, metered: f64, predicted: Option<f64>, residual: Option<f64>| {
                    let _ = writeln!(
                        out,
                        "{},{},{},{phase},{q},{metered},{},{}",
                        r.run,
                        r.scenario,
                        r.procedure,
                        opt(predicted),
                        opt(residual)
                    );
                };
            for row in &r.reconciliation.rows {
                line(&row.quantity, row.metered, row.predicted, row.residual);
            }
            line("total", r.reconciliation.total, None, None);
            if let Some(b) = r.reconciliation.bound {
                line("bound", b, None, None);
            }
        }
        write_file(path, out.as_bytes())
    }

    /// Writes every report file into `dir` and returns their paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files: Vec<PathBuf> = ["metrics.csv", "overhead.csv", "summary.json", "report.json"]
            .iter()
            .map(|f| dir.join(f))
            .collect();
        self.write_metrics_csv(&files[0])?;
        self.write_overhead_csv(&files[1])?;
        write_file(&files[2], self.metrics.summary_json()?.as_bytes())?;
        write_file(&files[3], serde_json::to_string_pretty(self)?.as_bytes())?;
        let mut all = files;
        all.extend(report_tables(self).write(dir)?);
        Ok(all)
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Validates, loads the data and executes every run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let pool = load_pool(&config.dataset, config.base_seed)?;
    run_with_pool(config, &pool)
}

/// Executes every run over an already loaded pool. Runs execute in
/// parallel; their outputs are merged in run order.
pub fn run_with_pool(config: &ExperimentConfig, pool: &Pool) -> Result<ExperimentReport> {
    config.validate()?;
    let outputs: Vec<RunOutput> = (0..config.runs)
        .into_par_iter()
        .map(|run| run_once(config, pool, run))
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport::empty(config);
    for o in outputs {
        report.metrics.extend(o.metrics);
        report.overhead.extend(o.overhead);
        report.predictions.extend(o.prediction);
    }
    Ok(report)
}

#[derive(Default)]
struct RunOutput {
    metrics: MetricsReport,
    overhead: Vec<OverheadRecord>,
    prediction: Option<RunPrediction>,
}

struct Evaluator<'a> {
    cache: MarginCache<'a>,
    truths: Vec<usize>,
    k: usize,
}

impl Evaluator<'_> {
    fn classifier(&self, c: &OvaClassifier) -> Result<Scores> {
        Scores::compute(&c.predict_all(&self.cache)?, &self.truths, self.k)
    }

    fn vote(&self, v: &VoteEnsemble) -> Result<Scores> {
        Scores::compute(&v.predict_all(&self.cache)?, &self.truths, self.k)
    }
}

/// Scores of the models of one procedure, per location where they differ.
enum Held {
    PerNode(Vec<Scores>),
    Shared(Scores),
}

struct Ctx<'a> {
    run: usize,
    scenario: &'a str,
    local_f: Option<Vec<f64>>,
}

impl Ctx<'_> {
    fn push(&self, out: &mut MetricsReport, step: Step, held: &Held) {
        let base = |l: usize| self.local_f.as_ref().map(|f| f[l]);
        match held {
            Held::PerNode(scores) => {
                for (l, s) in scores.iter().enumerate() {
                    out.push_scores(self.run, self.scenario, Some(l), None, step, s, base(l));
                }
            }
            Held::Shared(s) => match &self.local_f {
                Some(f) => {
                    for (l, &b) in f.iter().enumerate() {
                        out.push_scores(self.run, self.scenario, Some(l), None, step, s, Some(b));
                    }
                }
                None => out.push_scores(self.run, self.scenario, None, None, step, s, None),
            },
        }
    }
}

fn per_node(ev: &Evaluator<'_>, models: &[OvaClassifier]) -> Result<Held> {
    Ok(Held::PerNode(
        models
            .iter()
            .map(|m| ev.classifier(m))
            .collect::<Result<_>>()?,
    ))
}

fn per_node_vote(ev: &Evaluator<'_>, votes: &[VoteEnsemble]) -> Result<Held> {
    Ok(Held::PerNode(
        votes.iter().map(|v| ev.vote(v)).collect::<Result<_>>()?,
    ))
}

fn procedure_name(kind: ProtocolKind) -> &'static str {
    match kind {
        ProtocolKind::Gtl => "gtl",
        ProtocolKind::NohtlMu => "nohtl_mu",
        ProtocolKind::NohtlMv => "nohtl_mv",
        ProtocolKind::GtlLimited => "gtl_limited",
        ProtocolKind::DynGtl => "dyn_gtl",
        ProtocolKind::DynNohtl => "dyn_nohtl",
    }
}

struct Traffic<'a> {
    run: usize,
    scenario: &'a str,
    cloud_reference: f64,
    raw_reference: Option<f64>,
}

impl Traffic<'_> {
    fn record(
        &self,
        procedure: &str,
        phase: Option<usize>,
        ledger: &OverheadLedger,
        rec: Reconciliation,
    ) -> OverheadRecord {
        let total = ledger.total();
        OverheadRecord {
            run: self.run,
            scenario: self.scenario.to_string(),
            procedure: procedure.to_string(),
            phase,
            messages: total.messages,
            count: total.count,
            bytes: total.bytes,
            sample_messages: ledger.sample_messages(),
            cloud_reference: self.cloud_reference,
            raw_reference: self.raw_reference,
            reconciliation: rec,
        }
    }
}

fn run_once(config: &ExperimentConfig, pool: &Pool, run: usize) -> Result<RunOutput> {
    let seed = config.run_seed(run);
    let data = prepare(pool, &config.partition, config.holdout_ratio, seed)?;
    let Prepared {
        train,
        test,
        k,
        dim,
    } = &data;
    let (k, dim) = (*k, *dim);
    let s = train.len();
    let n = data.train_size();
    let protocol = ProtocolConfig {
        seed,
        ..config.protocol.clone()
    };
    protocol.validate(s)?;
    let ev = Evaluator {
        cache: MarginCache::new(test),
        truths: test.iter().map(|t| t.label).collect(),
        k,
    };
    let raw_dim = config.dataset.raw_dim;
    let mut out = RunOutput::default();

    let mut scenarios: Vec<(&str, Option<MaliceSchedule>)> = vec![(CLEAN, None)];
    if let Some(m) = &config.malicious {
        let m = MaliciousConfig {
            seed: derive_seed(seed, &[m.seed]),
            ..m.clone()
        };
        scenarios.push((MALICIOUS, Some(MaliceSchedule::new(&m, s)?)));
    }

    for (scenario, malice) in &scenarios {
        let malice = malice.as_ref();
        let traffic = Traffic {
            run,
            scenario,
            cloud_reference: (n * dim) as f64,
            raw_reference: raw_dim.map(|r| (n * r) as f64),
        };
        let mut local: Option<Vec<OvaClassifier>> = None;
        let mut results: Vec<(Step, Held)> = Vec::new();
        let mut gtl_rec: Option<Reconciliation> = None;
        let mut mu_rec: Option<Reconciliation> = None;

        for &kind in &config.protocols {
            let bus = Bus::new(s, config.encoding);
            let name = procedure_name(kind);
            match kind {
                ProtocolKind::Gtl => {
                    let o = run_gtl(train, k, &protocol, malice, &bus)?;
                    results.push((Step::GtlStep2, per_node(&ev, &o.step2)?));
                    if protocol.aggregation.mean() {
                        results.push((Step::GtlMean, per_node(&ev, &o.mean)?));
                    }
                    if protocol.aggregation.majority() {
                        results.push((Step::GtlVote, per_node_vote(&ev, &o.vote)?));
                    }
                    let rec = reconcile(&o.ledger, Procedure::Gtl { s, k });
                    gtl_rec.get_or_insert(rec.clone());
                    out.overhead
                        .push(traffic.record(name, None, &o.ledger, rec));
                    local.get_or_insert(o.base);
                }
                ProtocolKind::NohtlMu => {
                    let o = run_nohtl_mu(train, k, &protocol, malice, &bus)?;
                    results.push((Step::NohtlMu, Held::Shared(ev.classifier(&o.mean)?)));
                    let rec = reconcile(&o.ledger, Procedure::NohtlMu { s, k });
                    mu_rec.get_or_insert(rec.clone());
                    out.overhead
                        .push(traffic.record(name, None, &o.ledger, rec));
                    local.get_or_insert(o.base);
                }
                ProtocolKind::NohtlMv => {
                    let o = run_nohtl_mv(train, k, &protocol, malice, &bus)?;
                    results.push((Step::NohtlMv, per_node_vote(&ev, &o.vote)?));
                    let rec = reconcile(&o.ledger, Procedure::NohtlMv { s, k });
                    out.overhead
                        .push(traffic.record(name, None, &o.ledger, rec));
                    local.get_or_insert(o.base);
                }
                ProtocolKind::GtlLimited => {
                    let o = run_gtl_limited(train, k, &protocol, malice, &bus)?;
                    results.push((Step::GtlLimited, per_node(&ev, &o.finals)?));
                    let aggregators = o.aggregators.len();
                    let rec = reconcile(&o.ledger, Procedure::GtlLimited { s, k, aggregators });
                    out.overhead
                        .push(traffic.record(name, None, &o.ledger, rec));
                    local.get_or_insert(o.base);
                }
                ProtocolKind::DynGtl | ProtocolKind::DynNohtl => {
                    if malice.is_some() {
                        continue;
                    }
                    let dynamic = config.dynamic.clone().unwrap_or_default();
                    let batches: Vec<_> = train
                        .chunks(dynamic.batch_size)
                        .map(|c| c.to_vec())
                        .collect();
                    let o = run_dynamic(&batches, k, kind, &dynamic, &protocol, config.encoding)?;
                    let step = if kind == ProtocolKind::DynGtl {
                        Step::DynGtl
                    } else {
                        Step::DynNohtl
                    };
                    for phase in o.phases {
                        let scores = ev.classifier(&phase.model)?;
                        out.metrics.push_scores(
                            run,
                            scenario,
                            None,
                            Some(phase.index),
                            step,
                            &scores,
                            None,
                        );
                        let t = Traffic {
                            cloud_reference: (phase.samples * dim) as f64,
                            raw_reference: raw_dim.map(|r| (phase.samples * r) as f64),
                            ..traffic
                        };
                        out.overhead.push(t.record(
                            name,
                            Some(phase.index),
                            &phase.ledger,
                            phase.reconciliation,
                        ));
                    }
                }
            }
        }

        if config.cloud && malice.is_none() {
            let o = run_cloud(train, k, &protocol, config.encoding)?;
            results.push((Step::Cloud, Held::Shared(ev.classifier(&o.model)?)));
            out.overhead
                .push(traffic.record("cloud", None, &o.ledger, o.reconciliation));
        }

        let local_scores: Option<Vec<Scores>> = local
            .as_deref()
            .map(|l| l.iter().map(|m| ev.classifier(m)).collect())
            .transpose()?;
        for (l, sc) in local_scores.iter().flatten().enumerate() {
            out.metrics
                .push_scores(run, scenario, Some(l), None, Step::Local, sc, None);
        }
        let ctx = Ctx {
            run,
            scenario,
            local_f: local_scores.map(|v| v.iter().map(|s| s.f_measure).collect()),
        };
        for (step, held) in &results {
            ctx.push(&mut out.metrics, *step, held);
        }

        if *scenario == CLEAN {
            let sizes = gtl_rec
                .as_ref()
                .map(|r| (r.d0, r.d1))
                .or_else(|| mu_rec.as_ref().map(|r| (r.d0, 0.0)));
            out.prediction = sizes.map(|(d0, d1)| RunPrediction {
                run,
                features: OverheadPrediction::new(s, k, d0, d1, n, dim as f64),
                raw: raw_dim.map(|r| OverheadPrediction::new(s, k, d0, d1, n, r as f64)),
            });
        }
    }
    Ok(out)
}
