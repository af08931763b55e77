//! Per-problem state: the distance matrix over correct submissions, the
//! published cluster snapshot and the correction lookup.
//!
//! Matrix appends run on one worker thread per problem, so jobs of a problem
//! never overlap; the pair distances inside a job fan out over a shared
//! thread pool. Readers clone an `Arc` of the published state and never see
//! a half-applied update.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{channel, Sender};
use std::sync::{Arc, Condvar, Mutex, MutexGuard, RwLock};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use progsim_core::cluster::{
    build_snapshot, dendrogram_json, flat_clusters, force_graph_json, ClusterError, ClusterSnapshot, DistanceMatrix,
};
use progsim_core::cparse::ParseError;
use progsim_core::distance::{distance, program_distance, DistanceResult};
use progsim_core::hints::{filter_hints, script_to_hints, HintSet};
use progsim_core::normalize::{normalize_str, LinearProgram};
use progsim_core::variance::{evaluate_snapshot, VarianceReport};

use crate::config::{ServiceConfig, StoreKind};
use crate::store::{Diagnostic, MemoryStore, PairDistance, SqliteStore, Store, StoreError, Submission};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("unknown problem {0}")]
    UnknownProblem(String),
    #[error("hints are not active for problem {0}")]
    Inactive(String),
    #[error("problem {0} has not been clustered yet")]
    NoSnapshot(String),
    #[error("problem {0} has no correct submissions")]
    NoSubmissions(String),
    #[error("hints are served after {need} attempts, author has {have}")]
    TooFewAttempts { have: u32, need: u32 },
    #[error("invalid identifier {0:?}: use letters, digits, '.', '_' or '-'")]
    InvalidId(String),
    #[error("submission {0} already exists")]
    Duplicate(String),
    #[error("store: {0}")]
    Store(StoreError),
    #[error("clustering: {0}")]
    Cluster(#[from] ClusterError),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl From<StoreError> for EngineError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Duplicate(id) => EngineError::Duplicate(id),
            e => EngineError::Store(e),
        }
    }
}

pub fn diagnostics(e: &ParseError) -> Vec<Diagnostic> {
    let (line, column) = e.span().map(|s| (s.line, s.col)).unwrap_or((0, 0));
    vec![Diagnostic { line, column, message: e.to_string() }]
}

/// Ids end up in whitespace-separated exports, so they are kept simple.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

fn now_secs() -> i64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs() as i64).unwrap_or(0)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NewSubmission {
    /// Client-chosen id; generated when absent.
    pub id: Option<String>,
    pub author: String,
    pub source: String,
    pub correct: bool,
    pub marks: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receipt {
    pub submission_id: String,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub submission_id: String,
    /// Distance evaluations performed by the job.
    pub evaluations: u64,
    /// Matrix size after the append.
    pub matrix_size: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    #[serde(flatten)]
    pub hint_set: Option<HintSet>,
    /// Parse errors of the submitted source; no hints are computed then.
    pub diagnostics: Vec<Diagnostic>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub problem_id: String,
    pub submissions: usize,
    pub clusters: usize,
    pub linkage: String,
    pub cophenetic: Option<f64>,
    pub threshold_dist: f64,
    pub threshold_count: usize,
    pub created_at: i64,
}

impl SnapshotSummary {
    pub fn of(s: &ClusterSnapshot) -> Self {
        SnapshotSummary {
            problem_id: s.problem_id.clone(),
            submissions: s.len(),
            clusters: s.clusters.len(),
            linkage: s.linkage.name().to_string(),
            cophenetic: s.cophenetic,
            threshold_dist: s.threshold_dist,
            threshold_count: s.threshold_count,
            created_at: s.created_at,
        }
    }
}

/// Matrix rows and the programs they were computed from, published together.
#[derive(Default)]
struct Corpus {
    matrix: DistanceMatrix,
    programs: Vec<Arc<LinearProgram>>,
}

struct ProblemState {
    id: String,
    corpus: RwLock<Arc<Corpus>>,
    snapshot: RwLock<Option<Arc<ClusterSnapshot>>>,
    active: AtomicBool,
    /// Serializes snapshot builds.
    recluster: Mutex<()>,
    pending: Mutex<usize>,
    idle: Condvar,
    last_update: Mutex<Option<UpdateStats>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn read<T: Clone>(l: &RwLock<T>) -> T {
    l.read().unwrap_or_else(|e| e.into_inner()).clone()
}

fn write<T>(l: &RwLock<T>, v: T) {
    *l.write().unwrap_or_else(|e| e.into_inner()) = v;
}

impl ProblemState {
    fn new(id: &str) -> Self {
        ProblemState {
            id: id.to_string(),
            corpus: RwLock::new(Arc::new(Corpus::default())),
            snapshot: RwLock::new(None),
            active: AtomicBool::new(false),
            recluster: Mutex::new(()),
            pending: Mutex::new(0),
            idle: Condvar::new(),
            last_update: Mutex::new(None),
        }
    }

    fn corpus(&self) -> Arc<Corpus> {
        read(&self.corpus)
    }

    fn snapshot(&self) -> Option<Arc<ClusterSnapshot>> {
        read(&self.snapshot)
    }
}

struct Shared {
    config: ServiceConfig,
    store: Arc<dyn Store>,
    pool: rayon::ThreadPool,
    evaluations: AtomicU64,
}

impl Shared {
    fn distance(&self, a: &LinearProgram, b: &LinearProgram) -> f64 {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        distance(a, b, &self.config.weights)
    }

    fn program_distance(&self, a: &LinearProgram, b: &LinearProgram) -> DistanceResult {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        program_distance(a, b, &self.config.weights)
    }

    /// Appends one program to the matrix: one distance per existing member.
    fn update_distances(&self, st: &ProblemState, id: String, prog: Arc<LinearProgram>) {
        let start = Instant::now();
        let old = st.corpus();
        let row: Vec<f64> = self.pool.install(|| old.programs.par_iter().map(|p| self.distance(&prog, p)).collect());
        let pairs: Vec<PairDistance> = old
            .matrix
            .ids()
            .iter()
            .zip(&row)
            .map(|(b, &cost)| PairDistance { a: id.clone(), b: b.clone(), cost })
            .collect();
        if let Err(e) = self.store.insert_distances(&st.id, &pairs) {
            tracing::error!(problem = %st.id, submission = %id, "persisting distances failed: {e}");
        }
        let mut matrix = old.matrix.clone();
        matrix.push(id.clone(), &row);
        let mut programs = old.programs.clone();
        programs.push(prog);
        let matrix_size = matrix.len();
        write(&st.corpus, Arc::new(Corpus { matrix, programs }));
        *lock(&st.last_update) = Some(UpdateStats {
            submission_id: id,
            evaluations: row.len() as u64,
            matrix_size,
            elapsed: start.elapsed(),
        });
    }
}

struct Entry {
    state: Arc<ProblemState>,
    jobs: Mutex<Sender<(String, Arc<LinearProgram>)>>,
}

/// Cheap to clone; clones share all state.
#[derive(Clone)]
pub struct Engine {
    shared: Arc<Shared>,
    problems: Arc<RwLock<HashMap<String, Arc<Entry>>>>,
}

impl Engine {
    /// Opens the store named by the configuration and restores its state.
    pub fn from_config(config: ServiceConfig) -> Result<Engine, EngineError> {
        let store: Arc<dyn Store> = match config.store.kind {
            StoreKind::Memory => Arc::new(MemoryStore::new()),
            StoreKind::Sqlite => Arc::new(SqliteStore::open(&config.store.path)?),
        };
        Engine::open(config, store)
    }

    /// Rebuilds matrices, snapshots and activation flags from `store`.
    /// Correct submissions whose distances were not all persisted are queued
    /// again.
    pub fn open(config: ServiceConfig, store: Arc<dyn Store>) -> Result<Engine, EngineError> {
        let mut builder = rayon::ThreadPoolBuilder::new().thread_name(|i| format!("progsim-dist-{i}"));
        if config.workers > 0 {
            builder = builder.num_threads(config.workers);
        }
        let pool = builder.build().map_err(|e| EngineError::Pool(e.to_string()))?;
        let engine = Engine {
            shared: Arc::new(Shared { config, store, pool, evaluations: AtomicU64::new(0) }),
            problems: Arc::new(RwLock::new(HashMap::new())),
        };
        for pid in engine.shared.store.problems()? {
            engine.restore(&pid)?;
        }
        Ok(engine)
    }

    fn restore(&self, pid: &str) -> Result<(), EngineError> {
        let store = &self.shared.store;
        let entry = self.entry(pid);
        let st = &entry.state;
        st.active.store(store.is_active(pid)?, Ordering::SeqCst);
        let mut known: HashMap<(String, String), f64> = HashMap::new();
        for d in store.distances(pid)? {
            known.insert((d.b.clone(), d.a.clone()), d.cost);
            known.insert((d.a, d.b), d.cost);
        }
        let mut corpus = Corpus::default();
        let mut requeue = Vec::new();
        for s in store.submissions(pid)? {
            let Some(text) = s.normalized.as_deref().filter(|_| s.correct) else { continue };
            let prog = Arc::new(
                LinearProgram::from_text(text).map_err(|e| StoreError::Corrupt(format!("{}: {e}", s.id)))?,
            );
            let row: Option<Vec<f64>> = if requeue.is_empty() {
                corpus.matrix.ids().iter().map(|o| known.get(&(s.id.clone(), o.clone())).copied()).collect()
            } else {
                None
            };
            match row {
                Some(row) => {
                    corpus.matrix.push(s.id, &row);
                    corpus.programs.push(prog);
                }
                None => requeue.push((s.id, prog)),
            }
        }
        let ids = corpus.matrix.ids().to_vec();
        write(&st.corpus, Arc::new(corpus));
        if let Some(json) = store.latest_snapshot(pid)? {
            match serde_json::from_str::<ClusterSnapshot>(&json) {
                Ok(s) if ids.starts_with(&s.ids) => write(&st.snapshot, Some(Arc::new(s))),
                Ok(_) => tracing::warn!(problem = pid, "stored snapshot does not match the matrix; ignored"),
                Err(e) => tracing::warn!(problem = pid, "stored snapshot unreadable: {e}"),
            }
        }
        for (id, prog) in requeue {
            self.enqueue(&entry, id, prog);
        }
        Ok(())
    }

    fn entry(&self, pid: &str) -> Arc<Entry> {
        if let Some(e) = self.problems.read().unwrap_or_else(|e| e.into_inner()).get(pid) {
            return e.clone();
        }
        let mut map = self.problems.write().unwrap_or_else(|e| e.into_inner());
        map.entry(pid.to_string())
            .or_insert_with(|| {
                let state = Arc::new(ProblemState::new(pid));
                let (tx, rx) = channel::<(String, Arc<LinearProgram>)>();
                let (shared, st) = (self.shared.clone(), state.clone());
                thread::Builder::new()
                    .name(format!("progsim-job-{pid}"))
                    .spawn(move || {
                        for (id, prog) in rx {
                            shared.update_distances(&st, id, prog);
                            let mut pending = lock(&st.pending);
                            *pending -= 1;
                            if *pending == 0 {
                                st.idle.notify_all();
                            }
                        }
                    })
                    .expect("spawn job thread");
                Arc::new(Entry { state, jobs: Mutex::new(tx) })
            })
            .clone()
    }

    fn existing(&self, pid: &str) -> Result<Arc<ProblemState>, EngineError> {
        self.problems
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(pid)
            .map(|e| e.state.clone())
            .ok_or_else(|| EngineError::UnknownProblem(pid.to_string()))
    }

    fn enqueue(&self, entry: &Entry, id: String, prog: Arc<LinearProgram>) {
        *lock(&entry.state.pending) += 1;
        lock(&entry.jobs).send((id, prog)).expect("job thread alive");
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.shared.config
    }

    pub fn store(&self) -> &Arc<dyn Store> {
        &self.shared.store
    }

    /// Distance evaluations performed so far, across all problems.
    pub fn evaluations(&self) -> u64 {
        self.shared.evaluations.load(Ordering::SeqCst)
    }

    /// Parses, normalizes and stores a submission. A correct, parseable one
    /// is queued for a matrix update; the call does not wait for it.
    pub fn ingest(&self, pid: &str, new: NewSubmission) -> Result<Receipt, EngineError> {
        if !valid_id(pid) {
            return Err(EngineError::InvalidId(pid.to_string()));
        }
        if let Some(id) = new.id.as_deref().filter(|id| !valid_id(id)) {
            return Err(EngineError::InvalidId(id.to_string()));
        }
        let store = &self.shared.store;
        let seq = store.next_seq()?;
        let id = new.id.unwrap_or_else(|| format!("s{seq}"));
        let (prog, diagnostics) = match normalize_str(&new.source) {
            Ok(p) => (Some(Arc::new(p)), Vec::new()),
            Err(e) => (None, diagnostics(&e)),
        };
        let sub = Submission {
            id: id.clone(),
            seq,
            problem_id: pid.to_string(),
            author: new.author,
            source: new.source,
            normalized: prog.as_ref().map(|p| p.to_text()),
            diagnostics: diagnostics.clone(),
            correct: new.correct,
            marks: new.marks,
            submitted_at: now_secs(),
        };
        let entry = self.entry(pid);
        store.insert_submission(&sub)?;
        if let Some(prog) = prog.filter(|_| new.correct) {
            self.enqueue(&entry, id.clone(), prog);
        }
        Ok(Receipt { submission_id: id, diagnostics })
    }

    /// Blocks until every queued matrix update of `pid` has been applied.
    pub fn wait_idle(&self, pid: &str) {
        if let Ok(st) = self.existing(pid) {
            let mut pending = lock(&st.pending);
            while *pending > 0 {
                pending = st.idle.wait(pending).unwrap_or_else(|e| e.into_inner());
            }
        }
    }

    pub fn last_update(&self, pid: &str) -> Option<UpdateStats> {
        self.existing(pid).ok().and_then(|st| lock(&st.last_update).clone())
    }

    pub fn problems(&self) -> Vec<String> {
        let mut v: Vec<String> = self.problems.read().unwrap_or_else(|e| e.into_inner()).keys().cloned().collect();
        v.sort();
        v
    }

    /// Copy of the current matrix.
    pub fn matrix(&self, pid: &str) -> Result<DistanceMatrix, EngineError> {
        Ok(self.existing(pid)?.corpus().matrix.clone())
    }

    pub fn snapshot(&self, pid: &str) -> Result<Arc<ClusterSnapshot>, EngineError> {
        self.existing(pid)?.snapshot().ok_or_else(|| EngineError::NoSnapshot(pid.to_string()))
    }

    /// True when the matrix has grown since the last snapshot.
    pub fn is_dirty(&self, pid: &str) -> bool {
        self.existing(pid).is_ok_and(|st| {
            let n = st.corpus().matrix.len();
            n > 0 && st.snapshot().is_none_or(|s| s.len() != n)
        })
    }

    /// Clusters the current matrix and publishes the result. Without new
    /// matrix members the published snapshot is returned unchanged.
    pub fn recluster(&self, pid: &str) -> Result<Arc<ClusterSnapshot>, EngineError> {
        let st = self.existing(pid)?;
        let _guard = lock(&st.recluster);
        let corpus = st.corpus();
        if corpus.matrix.is_empty() {
            return Err(EngineError::NoSubmissions(pid.to_string()));
        }
        if let Some(s) = st.snapshot().filter(|s| s.len() == corpus.matrix.len()) {
            return Ok(s);
        }
        let snapshot = Arc::new(build_snapshot(pid, &corpus.matrix, &self.shared.config.cluster, now_secs())?);
        self.shared.store.save_snapshot(pid, &snapshot.to_json())?;
        write(&st.snapshot, Some(snapshot.clone()));
        Ok(snapshot)
    }

    pub fn set_active(&self, pid: &str, active: bool) -> Result<(), EngineError> {
        if !valid_id(pid) {
            return Err(EngineError::InvalidId(pid.to_string()));
        }
        self.shared.store.set_active(pid, active)?;
        self.entry(pid).state.active.store(active, Ordering::SeqCst);
        Ok(())
    }

    pub fn is_active(&self, pid: &str) -> bool {
        self.existing(pid).is_ok_and(|st| st.active.load(Ordering::SeqCst))
    }

    /// Hints toward the nearest correct program. Representatives of every
    /// cluster are ranked first; all members of the `top_k` closest clusters
    /// are then searched for the overall nearest program. When `author` is
    /// given, hints are withheld until they have `min_attempts` submissions.
    pub fn corrections(&self, pid: &str, source: &str, author: Option<&str>) -> Result<Correction, EngineError> {
        let st = self.existing(pid)?;
        if !st.active.load(Ordering::SeqCst) {
            return Err(EngineError::Inactive(pid.to_string()));
        }
        if let Some(author) = author {
            let have = self.shared.store.attempts(pid, author)?;
            let need = self.shared.config.min_attempts;
            if have < need {
                return Err(EngineError::TooFewAttempts { have, need });
            }
        }
        let snapshot = st.snapshot().ok_or_else(|| EngineError::NoSnapshot(pid.to_string()))?;
        let student = match normalize_str(source) {
            Ok(p) => p,
            Err(e) => return Ok(Correction { hint_set: None, diagnostics: diagnostics(&e), evaluations: 0 }),
        };
        // Snapshot ids are a prefix of the matrix, so indices agree.
        let corpus = st.corpus();
        let index: HashMap<&str, usize> = snapshot.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let shared = &self.shared;
        let reps: Vec<usize> = snapshot.clusters.iter().map(|c| index[c.representative.as_str()]).collect();
        let rep_results: Vec<DistanceResult> = shared
            .pool
            .install(|| reps.par_iter().map(|&r| shared.program_distance(&student, &corpus.programs[r])).collect());
        let mut ranked: Vec<usize> = (0..reps.len()).collect();
        ranked.sort_by(|&a, &b| rep_results[a].total.total_cmp(&rep_results[b].total).then(a.cmp(&b)));
        ranked.truncate(shared.config.top_k);

        let rep_set: HashSet<usize> = ranked.iter().map(|&c| reps[c]).collect();
        let members: Vec<usize> = ranked
            .iter()
            .flat_map(|&c| snapshot.clusters[c].members.iter().map(|m| index[m.as_str()]))
            .filter(|i| !rep_set.contains(i))
            .collect();
        let member_results: Vec<DistanceResult> = shared
            .pool
            .install(|| members.par_iter().map(|&m| shared.program_distance(&student, &corpus.programs[m])).collect());
        let evaluations = rep_results.len() + member_results.len();

        let candidates = ranked
            .iter()
            .map(|&c| (reps[c], &rep_results[c]))
            .chain(members.iter().copied().zip(member_results.iter()));
        let Some((nearest, result)) =
            candidates.min_by(|(i, a), (j, b)| a.total.total_cmp(&b.total).then(i.cmp(j)))
        else {
            return Err(EngineError::NoSnapshot(pid.to_string()));
        };
        let neighbor = &corpus.programs[nearest];
        let w = &shared.config.weights;
        let hints = script_to_hints(result, &student, neighbor, w);
        let hint_set = filter_hints(hints, result.total, student.token_count(), &shared.config.hints, w);
        Ok(Correction { hint_set: Some(hint_set), diagnostics: Vec::new(), evaluations })
    }

    /// Marks variance over the published clusters, using the marks stored
    /// with each submission.
    pub fn evaluate_variance(&self, pid: &str) -> Result<VarianceReport, EngineError> {
        let snapshot = self.snapshot(pid)?;
        let marks: HashMap<String, f64> = self
            .shared
            .store
            .submissions(pid)?
            .into_iter()
            .filter_map(|s| s.marks.map(|m| (s.id, m)))
            .collect();
        Ok(evaluate_snapshot(&snapshot, &marks))
    }

    pub fn export_clusters(&self, pid: &str) -> Result<String, EngineError> {
        let s = self.snapshot(pid)?;
        Ok(flat_clusters(&s))
    }

    pub fn export_dendrogram(&self, pid: &str) -> Result<String, EngineError> {
        let s = self.snapshot(pid)?;
        Ok(dendrogram_json(&s))
    }

    pub fn export_forcegraph(&self, pid: &str) -> Result<String, EngineError> {
        let st = self.existing(pid)?;
        let snapshot = st.snapshot().ok_or_else(|| EngineError::NoSnapshot(pid.to_string()))?;
        Ok(force_graph_json(&snapshot, &st.corpus().matrix))
    }

    /// Reclusters every problem whose matrix grew since its last snapshot.
    pub fn recluster_dirty(&self) -> Vec<(String, Result<Arc<ClusterSnapshot>, EngineError>)> {
        self.problems().into_iter().filter(|p| self.is_dirty(p)).map(|p| (p.clone(), self.recluster(&p))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Engine {
        let config = ServiceConfig { workers: 2, min_attempts: 0, ..ServiceConfig::default() };
        Engine::open(config, Arc::new(MemoryStore::new())).unwrap()
    }

    fn sub(source: &str, correct: bool) -> NewSubmission {
        NewSubmission { author: "a".into(), source: source.into(), correct, ..NewSubmission::default() }
    }

    const P: &str = "int main(){ int x; x = 1; return x; }";
    const Q: &str = "int main(){ int x; x = 2; x = x * 3; return x; }";

    #[test]
    fn ingest_grows_the_matrix() {
        let e = engine();
        let r = e.ingest("p", sub(P, true)).unwrap();
        assert!(r.diagnostics.is_empty());
        e.wait_idle("p");
        assert_eq!(e.matrix("p").unwrap().len(), 1);
        e.ingest("p", sub(Q, true)).unwrap();
        e.ingest("p", sub(P, true)).unwrap();
        e.wait_idle("p");
        let m = e.matrix("p").unwrap();
        assert_eq!(m.len(), 3);
        m.validate().unwrap();
        // Exact copy: one zero off the diagonal.
        assert_eq!(m.get(0, 2), 0.0);
        assert!(m.get(0, 1) > 0.0);
        assert_eq!(e.last_update("p").unwrap().evaluations, 2);
        assert_eq!(e.evaluations(), 3);
    }

    #[test]
    fn broken_and_incorrect_submissions_are_kept_out_of_the_matrix() {
        let e = engine();
        let r = e.ingest("p", sub("int main(){ x = ; }", true)).unwrap();
        assert_eq!(r.diagnostics.len(), 1);
        assert_eq!(r.diagnostics[0].line, 1);
        e.ingest("p", sub(P, false)).unwrap();
        e.wait_idle("p");
        assert!(e.matrix("p").unwrap().is_empty());
        assert_eq!(e.store().submissions("p").unwrap().len(), 2);
        assert!(e.store().submissions("p").unwrap()[0].normalized.is_none());
    }

    #[test]
    fn ids_are_checked() {
        let e = engine();
        assert!(matches!(e.ingest("bad id", sub(P, true)), Err(EngineError::InvalidId(_))));
        let named = NewSubmission { id: Some("x1".into()), ..sub(P, true) };
        assert_eq!(e.ingest("p", named.clone()).unwrap().submission_id, "x1");
        assert!(matches!(e.ingest("p", named), Err(EngineError::Duplicate(_))));
    }

    #[test]
    fn recluster_and_correct() {
        let e = engine();
        for _ in 0..2 {
            e.ingest("p", sub(P, true)).unwrap();
            e.ingest("p", sub(Q, true)).unwrap();
        }
        assert!(matches!(e.recluster("p"), Err(EngineError::NoSubmissions(_)) | Ok(_)));
        e.wait_idle("p");
        assert!(e.is_dirty("p"));
        let a = e.recluster("p").unwrap();
        let b = e.recluster("p").unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(!e.is_dirty("p"));

        assert!(matches!(e.corrections("p", P, None), Err(EngineError::Inactive(_))));
        e.set_active("p", true).unwrap();
        let c = e.corrections("p", P, None).unwrap();
        let hs = c.hint_set.unwrap();
        assert_eq!(hs.neighbor_distance, 0.0);
        assert!(hs.hints.is_empty() && !hs.suppressed);
        assert!(c.evaluations <= a.clusters.len() + 4);

        let bad = e.corrections("p", "int main( {", None).unwrap();
        assert!(bad.hint_set.is_none());
        assert_eq!(bad.diagnostics.len(), 1);
    }

    #[test]
    fn attempts_gate_hints() {
        let config = ServiceConfig { min_attempts: 2, ..ServiceConfig::default() };
        let e = Engine::open(config, Arc::new(MemoryStore::new())).unwrap();
        e.ingest("p", sub(P, true)).unwrap();
        e.wait_idle("p");
        e.recluster("p").unwrap();
        e.set_active("p", true).unwrap();
        assert!(matches!(e.corrections("p", Q, Some("a")), Err(EngineError::TooFewAttempts { have: 1, need: 2 })));
        e.ingest("p", sub(Q, false)).unwrap();
        assert!(e.corrections("p", Q, Some("a")).is_ok());
    }

    #[test]
    fn state_survives_a_restart() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.db");
        let open = || Engine::open(ServiceConfig::default(), Arc::new(SqliteStore::open(&path).unwrap())).unwrap();
        let (matrix, snapshot) = {
            let e = open();
            for s in [P, Q, P, Q] {
                e.ingest("p", sub(s, true)).unwrap();
            }
            e.wait_idle("p");
            e.set_active("p", true).unwrap();
            let snap = e.recluster("p").unwrap();
            e.ingest("p", sub(Q, true)).unwrap();
            e.wait_idle("p");
            (e.matrix("p").unwrap(), snap)
        };
        let e = open();
        e.wait_idle("p");
        assert_eq!(e.matrix("p").unwrap(), matrix);
        assert_eq!(*e.snapshot("p").unwrap(), *snapshot);
        assert!(e.is_active("p"));
        assert!(e.is_dirty("p"));
        assert_eq!(e.evaluations(), 0);
    }
}
