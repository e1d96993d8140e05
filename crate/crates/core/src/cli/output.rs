use serde_json::{json, Map, Value};

use super::config::{ExperimentConfig, Format};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Number(f64),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Number(x) => format!("{x:.6}"),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Number(x) => json!(x),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Rows of one experiment plus free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Ordered `(key, value)` pairs emitted next to the standard metadata.
    pub notes: Vec<(&'static str, String)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn metadata(config: &ExperimentConfig) -> Vec<(&'static str, String)> {
    vec![
        ("tool", format!("pathport {}", env!("CARGO_PKG_VERSION"))),
        ("experiment", config.experiment.to_string()),
        ("config_hash", config.hash()),
        (
            "seed",
            config
                .seed
                .map_or_else(|| "none".to_string(), |s| s.to_string()),
        ),
        ("generator", crate::tomography::GENERATOR_ID.to_string()),
    ]
}

pub fn render(table: &Table, config: &ExperimentConfig) -> String {
    match config.format {
        Format::Csv => render_csv(table, config),
        Format::Json => render_json(table, config),
    }
}

fn render_csv(table: &Table, config: &ExperimentConfig) -> String {
    let mut out = String::new();
    for (key, value) in metadata(config).iter().chain(&table.notes) {
        out.push_str(&format!("# {key}: {value}\n"));
    }
    let noise = &config.noise;
    out.push_str(&format!(
        "# mode: {}\n# werner_p: {:.6}\n# visibility: {:.6}\n# path1_depol: {:.6}\n",
        serde_json::to_value(config.mode)
            .expect("mode")
            .as_str()
            .unwrap_or_default(),
        noise.werner_p,
        noise.path_visibility,
        noise.path1_depolarizing,
    ));
    if let Some(n) = config.n_events {
        out.push_str(&format!("# n_events: {n}\n"));
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn render_json(table: &Table, config: &ExperimentConfig) -> String {
    let mut meta = Map::new();
    for (key, value) in metadata(config)
        .into_iter()
        .chain(table.notes.iter().cloned())
    {
        meta.insert(key.to_string(), Value::String(value));
    }
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(c, cell)| (c.to_string(), cell.json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "config": config,
        "metadata": meta,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json output");
    text.push('\n');
    text
}
