//! Benchmark sweeps: one session per problem, bounded parallelism, and
//! pass@1 aggregation overall and per difficulty.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use verisure_core::bench::Label;

use crate::config::{GlobalConfig, LlmBackendKind, ProverKind, SimBackendKind};
use crate::llm::{self, ModelBackend};
use crate::manifest::{load_manifests, ProblemManifest};
use crate::prover::{Exhaustive, Prover, Sby};
use crate::session::{run_session, Backends, SessionReport};
use crate::sim::{self, SimBackend};

/// Supplies backends per problem. Scripted backends are per problem;
/// live ones are shared.
pub trait BackendFactory: Sync {
    fn model(&self, p: &ProblemManifest) -> Result<Arc<dyn ModelBackend>, String>;
    fn sim(&self, p: &ProblemManifest) -> Result<Arc<dyn SimBackend>, String>;
    fn prover(&self) -> Arc<dyn Prover>;
}

/// Backends chosen by configuration. Scripted kinds read
/// `<problem>/fixtures/llm` and `<problem>/fixtures/sim`.
pub struct ConfiguredBackends {
    llm: LlmBackendKind,
    sim: SimBackendKind,
    shared_model: Option<Arc<dyn ModelBackend>>,
    shared_sim: Arc<dyn SimBackend>,
    prover: Arc<dyn Prover>,
}

impl ConfiguredBackends {
    pub fn new(config: &GlobalConfig) -> Result<Self, String> {
        let shared_model: Option<Arc<dyn ModelBackend>> = match config.llm.backend {
            LlmBackendKind::Http => {
                let base = config.llm.base_url.clone().ok_or("llm.base_url (or VERISURE_LLM_BASE_URL) is not set")?;
                let model = config.llm.model.clone().ok_or("llm.model (or VERISURE_LLM_MODEL) is not set")?;
                Some(Arc::new(llm::Http::new(
                    &base,
                    config.llm.api_key.clone(),
                    &model,
                    std::time::Duration::from_secs(300),
                )))
            }
            LlmBackendKind::Scripted => None,
        };
        let prover: Arc<dyn Prover> = match config.formal.prover {
            ProverKind::Sby => Arc::new(Sby::default()),
            ProverKind::Exhaustive => Arc::new(Exhaustive),
        };
        Ok(ConfiguredBackends {
            llm: config.llm.backend,
            sim: config.sim.backend,
            shared_model,
            shared_sim: Arc::new(sim::External::default()),
            prover,
        })
    }
}

impl BackendFactory for ConfiguredBackends {
    fn model(&self, p: &ProblemManifest) -> Result<Arc<dyn ModelBackend>, String> {
        match (&self.shared_model, self.llm) {
            (Some(m), _) => Ok(m.clone()),
            _ => llm::Scripted::from_dir(&p.dir.join("fixtures").join("llm"))
                .map(|s| Arc::new(s) as Arc<dyn ModelBackend>)
                .map_err(|e| e.to_string()),
        }
    }

    fn sim(&self, p: &ProblemManifest) -> Result<Arc<dyn SimBackend>, String> {
        match self.sim {
            SimBackendKind::External => Ok(self.shared_sim.clone()),
            SimBackendKind::Scripted => sim::Scripted::from_dir(&p.dir.join("fixtures").join("sim"))
                .map(|s| Arc::new(s) as Arc<dyn SimBackend>)
                .map_err(|e| e.to_string()),
        }
    }

    fn prover(&self) -> Arc<dyn Prover> {
        self.prover.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PassRates {
    pub total: usize,
    pub syntax_pass: usize,
    pub functional_pass: usize,
    /// Percentages; zero for an empty group.
    pub syntax_pass_at_1: f64,
    pub functional_pass_at_1: f64,
}

impl PassRates {
    pub fn from_reports<'a>(rs: impl IntoIterator<Item = &'a SessionReport>) -> Self {
        let mut p = PassRates::default();
        for r in rs {
            p.total += 1;
            p.syntax_pass += r.syntax_pass as usize;
            p.functional_pass += r.functional_pass as usize;
        }
        let pct = |n: usize| if p.total == 0 { 0.0 } else { 100.0 * n as f64 / p.total as f64 };
        p.syntax_pass_at_1 = pct(p.syntax_pass);
        p.functional_pass_at_1 = pct(p.functional_pass);
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub problems: Vec<SessionReport>,
    pub overall: PassRates,
    /// Keyed by label; problems without a label go under `Unlabeled`.
    pub by_difficulty: BTreeMap<String, PassRates>,
}

impl BenchmarkReport {
    pub fn aggregate(problems: Vec<SessionReport>) -> Self {
        let overall = PassRates::from_reports(&problems);
        let mut groups: BTreeMap<String, Vec<&SessionReport>> = BTreeMap::new();
        for r in &problems {
            let k = r.difficulty.map(|l| l.as_str().to_string()).unwrap_or_else(|| "Unlabeled".into());
            groups.entry(k).or_default().push(r);
        }
        for l in [Label::Easy, Label::Medium, Label::Hard] {
            groups.entry(l.as_str().to_string()).or_default();
        }
        let by_difficulty = groups
            .into_iter()
            .map(|(k, v)| (k, PassRates::from_reports(v)))
            .collect();
        BenchmarkReport {
            problems,
            overall,
            by_difficulty,
        }
    }
}

fn run_one(p: ProblemManifest, f: &dyn BackendFactory, config: &GlobalConfig) -> SessionReport {
    let model = match f.model(&p) {
        Ok(m) => m,
        Err(e) => return SessionReport::errored(&p.id, p.difficulty, e),
    };
    let sim = match f.sim(&p) {
        Ok(s) => s,
        Err(e) => return SessionReport::errored(&p.id, p.difficulty, e),
    };
    let prover = f.prover();
    let backends = Backends {
        model: model.as_ref(),
        sim: sim.as_ref(),
        prover: prover.as_ref(),
    };
    run_session(p, backends, config)
}

/// Run every problem under `dir`. Broken manifests become `failed_error`
/// entries; the sweep itself only fails if `dir` is unreadable.
pub fn run_benchmark(
    dir: &Path,
    factory: &dyn BackendFactory,
    config: &GlobalConfig,
) -> std::io::Result<BenchmarkReport> {
    let (problems, errors) = load_manifests(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(std::io::Error::other)?;
    let mut reports: Vec<SessionReport> =
        pool.install(|| problems.into_par_iter().map(|p| run_one(p, factory, config)).collect());
    reports.extend(
        errors
            .into_iter()
            .map(|e| SessionReport::errored(&e.id, None, e.message)),
    );
    reports.sort_by(|a, b| a.problem.cmp(&b.problem));
    Ok(BenchmarkReport::aggregate(reports))
}
