//! Report, curve and state-file writers. Every file starts with the code
//! version and the resolved run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use dnls_core::functionals::DecomposedState;
use dnls_core::rgrid::{GridDescriptor, RadialField, RadialGrid};
use dnls_core::specfun::PhysicalParams;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
pub const STATE_FORMAT: &str = "dnls-state";
pub const STATE_FORMAT_VERSION: u32 = 1;

/// Floats in CSV bodies: shortest representation that parses back exactly.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
}

impl Provenance {
    pub fn new(command: &'static str, config: Value) -> Self {
        Self {
            version: VERSION,
            command,
            config,
        }
    }

    /// `{"version", "command", "config"}` merged with the fields of `body`.
    pub fn document(&self, body: Value) -> Value {
        let mut doc =
            json!({ "version": self.version, "command": self.command, "config": self.config });
        if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
            d.extend(b);
        }
        doc
    }

    fn comment(&self) -> String {
        format!(
            "# {}\n",
            serde_json::to_string(self).expect("provenance serializes")
        )
    }
}

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn json(&self, name: &str, prov: &Provenance, body: Value) -> CliResult<PathBuf> {
        let mut text =
            serde_json::to_string_pretty(&prov.document(body)).expect("report serializes");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn csv(
        &self,
        name: &str,
        prov: &Provenance,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> CliResult<PathBuf> {
        let mut text = prov.comment();
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write(name, &text)
    }

    /// `r, u, phi_lambda, qG_lambda` on the solver grid.
    pub fn profile(
        &self,
        name: &str,
        prov: &Provenance,
        state: &DecomposedState,
    ) -> CliResult<PathBuf> {
        let q = state.q();
        let rows: Vec<Vec<String>> = state
            .grid()
            .nodes()
            .iter()
            .zip(state.phi().values())
            .zip(state.green_values())
            .map(|((&r, &f), g)| vec![num(r), num(f + q * g), num(f), num(q * g)])
            .collect();
        self.csv(name, prov, &["r", "u", "phi_lambda", "qG_lambda"], &rows)
    }

    pub fn state(
        &self,
        name: &str,
        header: &StateHeader,
        state: &DecomposedState,
    ) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string(header).expect("state header serializes");
        text.push_str("\nr,phi_lambda\n");
        for (r, f) in state.grid().nodes().iter().zip(state.phi().values()) {
            text.push_str(&format!("{},{}\n", num(*r), num(*f)));
        }
        self.write(name, &text)
    }
}

/// First line of a state file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateHeader {
    pub format: String,
    pub format_version: u32,
    pub version: String,
    /// Producing command: `ground-state` or `action-min`.
    pub kind: String,
    pub config: Value,
    pub params: PhysicalParams,
    pub grid: GridDescriptor,
    pub lambda: f64,
    pub q: f64,
    /// Frequency the state solves the stationary equation at.
    pub omega: f64,
}

impl StateHeader {
    pub fn new(
        prov: &Provenance,
        params: PhysicalParams,
        state: &DecomposedState,
        omega: f64,
    ) -> Self {
        Self {
            format: STATE_FORMAT.into(),
            format_version: STATE_FORMAT_VERSION,
            version: prov.version.into(),
            kind: prov.command.into(),
            config: prov.config.clone(),
            params,
            grid: state.grid().descriptor(),
            lambda: state.lambda(),
            q: state.q(),
            omega,
        }
    }
}

pub fn read_state(path: &Path) -> CliResult<(StateHeader, DecomposedState)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |msg: String| CliError::StateFormat {
        path: path.to_path_buf(),
        msg,
    };
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let header: StateHeader =
        serde_json::from_str(first).map_err(|e| bad(format!("header: {e}")))?;
    if header.format != STATE_FORMAT {
        return Err(bad(format!("unknown format {:?}", header.format)));
    }
    if header.format_version != STATE_FORMAT_VERSION {
        return Err(bad(format!(
            "unsupported format version {}",
            header.format_version
        )));
    }
    if lines.next() != Some("r,phi_lambda") {
        return Err(bad("missing column header r,phi_lambda".into()));
    }
    let grid = RadialGrid::from_descriptor(&header.grid).map_err(|e| bad(e.to_string()))?;
    let mut phi = Vec::with_capacity(grid.len());
    for (i, line) in lines.enumerate() {
        let row = || bad(format!("row {}: {line:?}", i + 1));
        let (r, f) = line.split_once(',').ok_or_else(row)?;
        let r: f64 = r.parse().map_err(|_| row())?;
        let f: f64 = f.parse().map_err(|_| row())?;
        if grid.nodes().get(i) != Some(&r) {
            return Err(bad(format!(
                "row {}: radius {r} does not match the grid",
                i + 1
            )));
        }
        phi.push(f);
    }
    if phi.len() != grid.len() {
        return Err(bad(format!(
            "expected {} rows, found {}",
            grid.len(),
            phi.len()
        )));
    }
    let field = RadialField::new(grid, phi).map_err(|e| bad(e.to_string()))?;
    let state =
        DecomposedState::new(header.lambda, header.q, field).map_err(|e| bad(e.to_string()))?;
    Ok((header, state))
}
