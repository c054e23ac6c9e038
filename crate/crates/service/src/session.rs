//! In-memory sessions: one uploaded dataset plus the networks and scores
//! derived from it.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use discovars_core::centrality::{CentralityMeasure, CentralityScores};
use discovars_core::depnet::{DependencyNetwork, EdgeDirection};
use discovars_core::ingest::DataTable;
use discovars_core::linmod::SelectionMethod;

/// Identifies a network by everything that went into building it.
pub fn network_key(method: &SelectionMethod, direction: EdgeDirection) -> String {
    serde_json::json!({ "method": method, "edge_direction": direction }).to_string()
}

fn measure_key(measure: &CentralityMeasure) -> String {
    serde_json::to_string(measure).expect("measure serializes")
}

/// A finished build with its wall-clock cost.
#[derive(Debug)]
pub struct BuiltNetwork {
    pub network: DependencyNetwork,
    pub elapsed_ms: f64,
}

#[derive(Debug, Default)]
pub struct SessionState {
    pub networks: HashMap<String, Arc<BuiltNetwork>>,
    pub current: Option<String>,
    scores: HashMap<(String, String), Arc<CentralityScores>>,
    /// Network builds actually performed.
    pub builds: u64,
    /// Centrality computations actually performed.
    pub score_computations: u64,
}

impl SessionState {
    pub fn current_network(&self) -> Option<(String, Arc<BuiltNetwork>)> {
        let key = self.current.clone()?;
        let net = self.networks.get(&key)?.clone();
        Some((key, net))
    }

    pub fn cached_scores(
        &self,
        net_key: &str,
        m: &CentralityMeasure,
    ) -> Option<Arc<CentralityScores>> {
        self.scores
            .get(&(net_key.to_owned(), measure_key(m)))
            .cloned()
    }

    pub fn store_scores(
        &mut self,
        net_key: &str,
        scores: CentralityScores,
    ) -> Arc<CentralityScores> {
        let key = (net_key.to_owned(), measure_key(&scores.measure));
        self.score_computations += 1;
        self.scores
            .entry(key)
            .or_insert_with(|| Arc::new(scores))
            .clone()
    }

    pub fn cached_score_count(&self) -> usize {
        self.scores.len()
    }
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub dataset: Arc<DataTable>,
    pub warnings: Vec<String>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    last_used: Mutex<Instant>,
    building: AtomicBool,
    state: Mutex<SessionState>,
}

/// Held while a network build runs; dropping it frees the session for the
/// next build.
#[derive(Debug)]
pub struct BuildGuard(Arc<Session>);

impl Drop for BuildGuard {
    fn drop(&mut self) {
        self.0.building.store(false, Ordering::Release);
    }
}

impl Session {
    fn new(dataset: DataTable, warnings: Vec<String>) -> Self {
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            id: uuid::Uuid::new_v4().simple().to_string(),
            dataset: Arc::new(dataset),
            warnings,
            created_at,
            last_used: Mutex::new(Instant::now()),
            building: AtomicBool::new(false),
            state: Mutex::new(SessionState::default()),
        }
    }

    /// `None` if a build is already running for this session.
    pub fn try_begin_build(self: &Arc<Self>) -> Option<BuildGuard> {
        self.building
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| BuildGuard(self.clone()))
    }

    pub fn is_building(&self) -> bool {
        self.building.load(Ordering::Acquire)
    }

    pub fn state(&self) -> MutexGuard<'_, SessionState> {
        // a panic while holding the lock leaves plain data behind; keep serving
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn idle_for(&self) -> Duration {
        self.last_used
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .elapsed()
    }

    fn touch(&self) {
        *self.last_used.lock().unwrap_or_else(|e| e.into_inner()) = Instant::now();
    }
}

/// All live sessions, expiring after `idle_timeout` without a request.
#[derive(Debug)]
pub struct SessionStore {
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    idle_timeout: Duration,
}

impl SessionStore {
    pub fn new(idle_timeout: Duration) -> Self {
        Self {
            sessions: Mutex::new(HashMap::new()),
            idle_timeout,
        }
    }

    fn map(&self) -> MutexGuard<'_, HashMap<String, Arc<Session>>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn create(&self, dataset: DataTable, warnings: Vec<String>) -> Arc<Session> {
        let s = Arc::new(Session::new(dataset, warnings));
        self.map().insert(s.id.clone(), s.clone());
        s
    }

    /// Looks up a session and marks it used. Expired sessions are removed
    /// here as well as by [`SessionStore::evict_idle`].
    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        let mut map = self.map();
        let s = map.get(id)?.clone();
        if s.idle_for() > self.idle_timeout && !s.is_building() {
            map.remove(id);
            return None;
        }
        s.touch();
        Some(s)
    }

    /// Drops sessions idle for longer than the timeout; returns how many.
    pub fn evict_idle(&self) -> usize {
        let mut map = self.map();
        let before = map.len();
        map.retain(|_, s| s.is_building() || s.idle_for() <= self.idle_timeout);
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.map().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idle_timeout(&self) -> Duration {
        self.idle_timeout
    }
}
