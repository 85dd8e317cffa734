use std::io::IsTerminal;

#[derive(Clone, Copy, Debug)]
pub struct Style {
    color: bool,
}

impl Style {
    /// Reads `FRAMELAB_COLOR` (`auto` or `never`, default `auto`).
    pub fn from_env() -> Result<Style, String> {
        match std::env::var("FRAMELAB_COLOR").as_deref() {
            Err(_) | Ok("auto") => Ok(Style { color: std::io::stdout().is_terminal() }),
            Ok("never") => Ok(Style { color: false }),
            Ok(other) => Err(format!("FRAMELAB_COLOR must be `auto` or `never`, got `{other}`")),
        }
    }

    pub fn status(&self, passed: bool) -> String {
        let (word, code) = if passed { ("PASS", "32") } else { ("FAIL", "31") };
        if self.color {
            format!("\x1b[{code}m{word}\x1b[0m")
        } else {
            word.to_string()
        }
    }
}

/// Left-aligned first column, right-aligned numeric columns.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (k, cell) in row.iter().enumerate().take(cols) {
            width[k] = width[k].max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut out = String::new();
        for (k, cell) in cells.iter().enumerate() {
            let pad = width[k] - cell.chars().count();
            if k > 0 {
                out.push_str("  ");
            }
            if k == 0 {
                out.push_str(cell);
                out.push_str(&" ".repeat(pad));
            } else {
                out.push_str(&" ".repeat(pad));
                out.push_str(cell);
            }
        }
        out.trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        format!("{x:.6}")
    } else {
        format!("{x:.4e}")
    }
}
