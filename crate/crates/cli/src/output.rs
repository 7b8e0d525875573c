use serde_json::{json, Map, Value};

/// Rectangular result with a fixed column order.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({ "columns": self.columns, "rows": self.rows })
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// JSON number, or `"inf"` for an unreachable threshold.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x == f64::INFINITY {
        json!("inf")
    } else {
        Value::Null
    }
}

pub fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Finished result of one command.
pub struct Artifact {
    pub command: &'static str,
    /// Every resolved input, enough to rerun the command.
    pub echo: Map<String, Value>,
    pub csv: String,
    pub json: Value,
    pub infeasible: bool,
}

impl Artifact {
    pub fn render_csv(&self) -> String {
        let mut echo = self.echo.clone();
        echo.insert("command".into(), json!(self.command));
        format!("# {}\n{}", Value::Object(echo), self.csv)
    }

    pub fn render_json(&self) -> String {
        let doc = json!({
            "command": self.command,
            "params": self.echo,
            "result": self.json,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("values are serializable");
        text.push('\n');
        text
    }
}
