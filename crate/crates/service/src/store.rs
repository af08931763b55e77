//! Persistence: submissions, pair distances, snapshot blobs and activation
//! flags. Two backends: in memory and sqlite.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use rusqlite::{params, Connection, OptionalExtension};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("submission id {0} already exists")]
    Duplicate(String),
    #[error("database error: {0}")]
    Db(#[from] rusqlite::Error),
    #[error("corrupt record: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub id: String,
    /// Store-wide insertion order.
    pub seq: u64,
    pub problem_id: String,
    pub author: String,
    pub source: String,
    /// Canonical text of the normalized program; absent when parsing failed.
    pub normalized: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
    pub correct: bool,
    pub marks: Option<f64>,
    pub submitted_at: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub a: String,
    pub b: String,
    pub cost: f64,
}

pub trait Store: Send + Sync {
    fn next_seq(&self) -> Result<u64, StoreError>;
    fn insert_submission(&self, s: &Submission) -> Result<(), StoreError>;
    fn submission(&self, id: &str) -> Result<Option<Submission>, StoreError>;
    /// A problem's submissions in insertion order.
    fn submissions(&self, problem: &str) -> Result<Vec<Submission>, StoreError>;
    fn problems(&self) -> Result<Vec<String>, StoreError>;
    /// Submissions by this author to this problem, correct or not.
    fn attempts(&self, problem: &str, author: &str) -> Result<u32, StoreError>;
    fn insert_distances(&self, problem: &str, rows: &[PairDistance]) -> Result<(), StoreError>;
    fn distances(&self, problem: &str) -> Result<Vec<PairDistance>, StoreError>;
    fn save_snapshot(&self, problem: &str, json: &str) -> Result<(), StoreError>;
    fn latest_snapshot(&self, problem: &str) -> Result<Option<String>, StoreError>;
    fn set_active(&self, problem: &str, active: bool) -> Result<(), StoreError>;
    fn is_active(&self, problem: &str) -> Result<bool, StoreError>;
}

#[derive(Default)]
struct Memory {
    seq: u64,
    submissions: Vec<Submission>,
    by_id: HashMap<String, usize>,
    distances: HashMap<String, Vec<PairDistance>>,
    snapshots: HashMap<String, String>,
    active: HashMap<String, bool>,
}

#[derive(Default)]
pub struct MemoryStore(Mutex<Memory>);

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Memory> {
        self.0.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl Store for MemoryStore {
    fn next_seq(&self) -> Result<u64, StoreError> {
        let mut m = self.lock();
        m.seq += 1;
        Ok(m.seq)
    }

    fn insert_submission(&self, s: &Submission) -> Result<(), StoreError> {
        let mut m = self.lock();
        if m.by_id.contains_key(&s.id) {
            return Err(StoreError::Duplicate(s.id.clone()));
        }
        let at = m.submissions.len();
        m.by_id.insert(s.id.clone(), at);
        m.submissions.push(s.clone());
        Ok(())
    }

    fn submission(&self, id: &str) -> Result<Option<Submission>, StoreError> {
        let m = self.lock();
        Ok(m.by_id.get(id).map(|&i| m.submissions[i].clone()))
    }

    fn submissions(&self, problem: &str) -> Result<Vec<Submission>, StoreError> {
        let m = self.lock();
        let mut v: Vec<Submission> = m.submissions.iter().filter(|s| s.problem_id == problem).cloned().collect();
        v.sort_by_key(|s| s.seq);
        Ok(v)
    }

    fn problems(&self) -> Result<Vec<String>, StoreError> {
        let m = self.lock();
        let mut p: Vec<String> = m.submissions.iter().map(|s| s.problem_id.clone()).chain(m.active.keys().cloned()).collect();
        p.sort();
        p.dedup();
        Ok(p)
    }

    fn attempts(&self, problem: &str, author: &str) -> Result<u32, StoreError> {
        let m = self.lock();
        Ok(m.submissions.iter().filter(|s| s.problem_id == problem && s.author == author).count() as u32)
    }

    fn insert_distances(&self, problem: &str, rows: &[PairDistance]) -> Result<(), StoreError> {
        self.lock().distances.entry(problem.to_string()).or_default().extend_from_slice(rows);
        Ok(())
    }

    fn distances(&self, problem: &str) -> Result<Vec<PairDistance>, StoreError> {
        Ok(self.lock().distances.get(problem).cloned().unwrap_or_default())
    }

    fn save_snapshot(&self, problem: &str, json: &str) -> Result<(), StoreError> {
        self.lock().snapshots.insert(problem.to_string(), json.to_string());
        Ok(())
    }

    fn latest_snapshot(&self, problem: &str) -> Result<Option<String>, StoreError> {
        Ok(self.lock().snapshots.get(problem).cloned())
    }

    fn set_active(&self, problem: &str, active: bool) -> Result<(), StoreError> {
        self.lock().active.insert(problem.to_string(), active);
        Ok(())
    }

    fn is_active(&self, problem: &str) -> Result<bool, StoreError> {
        Ok(self.lock().active.get(problem).copied().unwrap_or(false))
    }
}

pub struct SqliteStore(Mutex<Connection>);

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS submissions (
    seq INTEGER PRIMARY KEY,
    id TEXT NOT NULL UNIQUE,
    problem_id TEXT NOT NULL,
    author TEXT NOT NULL,
    source TEXT NOT NULL,
    normalized TEXT,
    diagnostics TEXT NOT NULL,
    correct INTEGER NOT NULL,
    marks REAL,
    submitted_at INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS submissions_problem ON submissions (problem_id, seq);
CREATE TABLE IF NOT EXISTS distances (
    problem_id TEXT NOT NULL,
    a TEXT NOT NULL,
    b TEXT NOT NULL,
    cost REAL NOT NULL,
    PRIMARY KEY (problem_id, a, b)
);
CREATE TABLE IF NOT EXISTS snapshots (
    problem_id TEXT NOT NULL,
    created INTEGER PRIMARY KEY AUTOINCREMENT,
    body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS problems (
    problem_id TEXT PRIMARY KEY,
    active INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS counters (
    name TEXT PRIMARY KEY,
    value INTEGER NOT NULL
);
";

impl SqliteStore {
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let conn = Connection::open(path)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        conn.pragma_update(None, "synchronous", "NORMAL")?;
        conn.execute_batch(SCHEMA)?;
        Ok(SqliteStore(Mutex::new(conn)))
    }

    pub fn in_memory() -> Result<Self, StoreError> {
        let conn = Connection::open_in_memory()?;
        conn.execute_batch(SCHEMA)?;
        Ok(SqliteStore(Mutex::new(conn)))
    }

    fn conn(&self) -> std::sync::MutexGuard<'_, Connection> {
        self.0.lock().unwrap_or_else(|e| e.into_inner())
    }
}

fn row_to_submission(r: &rusqlite::Row<'_>) -> rusqlite::Result<(Submission, String)> {
    Ok((
        Submission {
            seq: r.get::<_, i64>(0)? as u64,
            id: r.get(1)?,
            problem_id: r.get(2)?,
            author: r.get(3)?,
            source: r.get(4)?,
            normalized: r.get(5)?,
            diagnostics: Vec::new(),
            correct: r.get(7)?,
            marks: r.get(8)?,
            submitted_at: r.get(9)?,
        },
        r.get(6)?,
    ))
}

fn with_diagnostics((mut s, diags): (Submission, String)) -> Result<Submission, StoreError> {
    s.diagnostics = serde_json::from_str(&diags).map_err(|e| StoreError::Corrupt(e.to_string()))?;
    Ok(s)
}

const SUBMISSION_COLUMNS: &str =
    "seq, id, problem_id, author, source, normalized, diagnostics, correct, marks, submitted_at";

impl Store for SqliteStore {
    fn next_seq(&self) -> Result<u64, StoreError> {
        let c = self.conn();
        let v: i64 = c.query_row(
            "INSERT INTO counters (name, value) VALUES ('seq', 1)
             ON CONFLICT (name) DO UPDATE SET value = value + 1 RETURNING value",
            [],
            |r| r.get(0),
        )?;
        Ok(v as u64)
    }

    fn insert_submission(&self, s: &Submission) -> Result<(), StoreError> {
        let diags = serde_json::to_string(&s.diagnostics).expect("diagnostics serialize");
        let c = self.conn();
        let res = c.execute(
            &format!("INSERT INTO submissions ({SUBMISSION_COLUMNS}) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)"),
            params![
                s.seq as i64,
                s.id,
                s.problem_id,
                s.author,
                s.source,
                s.normalized,
                diags,
                s.correct,
                s.marks,
                s.submitted_at
            ],
        );
        match res {
            Ok(_) => Ok(()),
            Err(rusqlite::Error::SqliteFailure(e, _)) if e.code == rusqlite::ErrorCode::ConstraintViolation => {
                Err(StoreError::Duplicate(s.id.clone()))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn submission(&self, id: &str) -> Result<Option<Submission>, StoreError> {
        let c = self.conn();
        let row = c
            .query_row(&format!("SELECT {SUBMISSION_COLUMNS} FROM submissions WHERE id = ?1"), [id], row_to_submission)
            .optional()?;
        row.map(with_diagnostics).transpose()
    }

    fn submissions(&self, problem: &str) -> Result<Vec<Submission>, StoreError> {
        let c = self.conn();
        let mut stmt =
            c.prepare(&format!("SELECT {SUBMISSION_COLUMNS} FROM submissions WHERE problem_id = ?1 ORDER BY seq"))?;
        let rows = stmt.query_map([problem], row_to_submission)?;
        rows.map(|r| with_diagnostics(r?)).collect()
    }

    fn problems(&self) -> Result<Vec<String>, StoreError> {
        let c = self.conn();
        let mut stmt = c.prepare(
            "SELECT problem_id FROM submissions UNION SELECT problem_id FROM problems ORDER BY problem_id",
        )?;
        let rows = stmt.query_map([], |r| r.get(0))?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    fn attempts(&self, problem: &str, author: &str) -> Result<u32, StoreError> {
        let c = self.conn();
        let n: i64 = c.query_row(
            "SELECT COUNT(*) FROM submissions WHERE problem_id = ?1 AND author = ?2",
            [problem, author],
            |r| r.get(0),
        )?;
        Ok(n as u32)
    }

    fn insert_distances(&self, problem: &str, rows: &[PairDistance]) -> Result<(), StoreError> {
        let mut c = self.conn();
        let tx = c.transaction()?;
        {
            let mut stmt = tx.prepare("INSERT OR REPLACE INTO distances (problem_id, a, b, cost) VALUES (?1, ?2, ?3, ?4)")?;
            for r in rows {
                stmt.execute(params![problem, r.a, r.b, r.cost])?;
            }
        }
        tx.commit()?;
        Ok(())
    }

    fn distances(&self, problem: &str) -> Result<Vec<PairDistance>, StoreError> {
        let c = self.conn();
        let mut stmt = c.prepare("SELECT a, b, cost FROM distances WHERE problem_id = ?1")?;
        let rows = stmt.query_map([problem], |r| Ok(PairDistance { a: r.get(0)?, b: r.get(1)?, cost: r.get(2)? }))?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    fn save_snapshot(&self, problem: &str, json: &str) -> Result<(), StoreError> {
        self.conn().execute("INSERT INTO snapshots (problem_id, body) VALUES (?1, ?2)", [problem, json])?;
        Ok(())
    }

    fn latest_snapshot(&self, problem: &str) -> Result<Option<String>, StoreError> {
        let c = self.conn();
        Ok(c
            .query_row(
                "SELECT body FROM snapshots WHERE problem_id = ?1 ORDER BY created DESC LIMIT 1",
                [problem],
                |r| r.get(0),
            )
            .optional()?)
    }

    fn set_active(&self, problem: &str, active: bool) -> Result<(), StoreError> {
        self.conn().execute(
            "INSERT INTO problems (problem_id, active) VALUES (?1, ?2)
             ON CONFLICT (problem_id) DO UPDATE SET active = excluded.active",
            params![problem, active],
        )?;
        Ok(())
    }

    fn is_active(&self, problem: &str) -> Result<bool, StoreError> {
        let c = self.conn();
        Ok(c
            .query_row("SELECT active FROM problems WHERE problem_id = ?1", [problem], |r| r.get(0))
            .optional()?
            .unwrap_or(false))
    }
}
