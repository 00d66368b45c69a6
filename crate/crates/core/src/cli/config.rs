//! Sweep configuration files.
//!
//! ```toml
//! schema = "thermowalk.sweep/v1"
//! class = "bdi"            # bdi | aiii
//! family = "sp1"           # sp0 | sp1 | mb0 | mb1
//! n_k = 512                # optional
//! precision = "standard"   # optional: standard | extended-low-t
//! output = "sweep.csv"     # optional
//! execution = "parallel"   # optional: parallel | sequential
//!
//! [theta]                  # optional, defaults to [-pi, pi] step 0.01
//! min = -3.141592653589793
//! max = 3.141592653589793
//! step = 0.01
//!
//! [temperature]            # optional, defaults to [0.01, 1] step 0.01
//! min = 0.01
//! max = 1.0
//! step = 0.01
//!
//! [displacement]           # optional, defaults to (0.01, 0.01)
//! theta = 0.01
//! temperature = 0.01
//! ```

use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::scan::{GridAxis, SweepConfig};

pub const SWEEP_SCHEMA: &str = "thermowalk.sweep/v1";

const TOP_KEYS: [&str; 10] = [
    "schema",
    "class",
    "family",
    "n_k",
    "precision",
    "output",
    "theta",
    "temperature",
    "displacement",
    "execution",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFile {
    pub sweep: SweepConfig,
    pub output: Option<PathBuf>,
    pub execution: Option<crate::Execution>,
}

struct Reader<'t, 'i> {
    table: &'t Table,
    prefix: String,
    issues: &'i mut Vec<String>,
}

impl<'t> Reader<'t, '_> {
    fn key(&self, k: &str) -> String {
        if self.prefix.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.prefix)
        }
    }

    fn reject_unknown(&mut self, allowed: &[&str]) {
        for k in self.table.keys() {
            if !allowed.contains(&k.as_str()) {
                let path = self.key(k);
                self.issues.push(format!("{path}: unknown key"));
            }
        }
    }

    fn string(&mut self, k: &str) -> Option<&'t str> {
        match self.table.get(k)? {
            Value::String(s) => Some(s),
            other => {
                let path = self.key(k);
                self.issues.push(format!(
                    "{path}: expected a string, found {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn float(&mut self, k: &str) -> Option<f64> {
        match self.table.get(k)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            other => {
                let path = self.key(k);
                self.issues.push(format!(
                    "{path}: expected a number, found {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn integer(&mut self, k: &str) -> Option<i64> {
        match self.table.get(k)? {
            Value::Integer(i) => Some(*i),
            other => {
                let path = self.key(k);
                self.issues.push(format!(
                    "{path}: expected an integer, found {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn parsed<T: std::str::FromStr<Err = Error>>(&mut self, k: &str) -> Option<T> {
        let s = self.string(k)?.to_string();
        match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                let path = self.key(k);
                let msg = match e {
                    Error::InvalidArgument(m) => m,
                    other => other.to_string(),
                };
                self.issues.push(format!("{path}: {msg}"));
                None
            }
        }
    }

    fn sub_table(&mut self, k: &str) -> Option<&'t Table> {
        match self.table.get(k)? {
            Value::Table(t) => Some(t),
            other => {
                let path = self.key(k);
                self.issues.push(format!(
                    "{path}: expected a table, found {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn child<'c>(&mut self, table: &'c Table, k: &str) -> Reader<'c, '_> {
        Reader {
            table,
            prefix: self.key(k),
            issues: &mut *self.issues,
        }
    }
}

fn read_axis(parent: &mut Reader<'_, '_>, name: &str, axis: &mut GridAxis) {
    let Some(table) = parent.sub_table(name) else {
        return;
    };
    let mut r = parent.child(table, name);
    r.reject_unknown(&["min", "max", "step"]);
    if let Some(v) = r.float("min") {
        axis.min = v;
    }
    if let Some(v) = r.float("max") {
        axis.max = v;
    }
    if let Some(v) = r.float("step") {
        axis.step = v;
    }
}

/// Parses and validates a sweep file; every problem is reported with its key path.
pub fn parse_sweep_config(text: &str) -> Result<SweepFile> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string().trim().to_string()]))?;
    let mut issues = Vec::new();
    let mut sweep = SweepConfig::default();
    let mut output = None;
    let mut execution = None;
    {
        let mut r = Reader {
            table: &table,
            prefix: String::new(),
            issues: &mut issues,
        };
        r.reject_unknown(&TOP_KEYS);
        match r.string("schema") {
            Some(SWEEP_SCHEMA) => {}
            Some(other) => r.issues.push(format!(
                "schema: expected {SWEEP_SCHEMA:?}, found {other:?}"
            )),
            None if !table.contains_key("schema") => r.issues.push("schema: missing".into()),
            None => {}
        }
        for required in ["class", "family"] {
            if !table.contains_key(required) {
                r.issues.push(format!("{required}: missing"));
            }
        }
        if let Some(c) = r.parsed("class") {
            sweep.class = c;
        }
        if let Some(f) = r.parsed("family") {
            sweep.family = f;
        }
        if let Some(p) = r.parsed("precision") {
            sweep.precision = p;
        }
        if let Some(e) = r.parsed("execution") {
            execution = Some(e);
        }
        if let Some(n) = r.integer("n_k") {
            match usize::try_from(n) {
                Ok(n) => sweep.n_k = n,
                Err(_) => r.issues.push(format!("n_k: must be positive, got {n}")),
            }
        }
        if let Some(s) = r.string("output") {
            output = Some(PathBuf::from(s));
        }
        read_axis(&mut r, "theta", &mut sweep.theta);
        read_axis(&mut r, "temperature", &mut sweep.temperature);
        if let Some(table) = r.sub_table("displacement") {
            let mut d = r.child(table, "displacement");
            d.reject_unknown(&["theta", "temperature"]);
            if let Some(v) = d.float("theta") {
                sweep.displacement.theta = v;
            }
            if let Some(v) = d.float("temperature") {
                sweep.displacement.temperature = v;
            }
        }
    }
    if issues.is_empty() {
        issues.extend(sweep.issues());
    }
    if !issues.is_empty() {
        return Err(Error::Config(issues));
    }
    Ok(SweepFile {
        sweep,
        output,
        execution,
    })
}

pub fn load_sweep_config(path: &Path) -> Result<SweepFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sweep_config(&text)
}
