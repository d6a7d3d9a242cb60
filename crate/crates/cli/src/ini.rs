//! Minimal INI reader: `[section]` headers, `key = value` lines, `#`
//! comments, optional double quotes around values. Every key remembers its
//! line so diagnostics can point at it.

use std::collections::BTreeMap;

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub line: usize,
    file: String,
    entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Clone)]
pub struct Document {
    pub file: String,
    sections: Vec<Section>,
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn is_key(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !s.starts_with(|c: char| c.is_ascii_digit())
}

pub fn parse(file: &str, text: &str) -> Result<Document, Failure> {
    let at = |line: usize, msg: String| Failure::validation(file, line, msg);
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| at(line, format!("unterminated section header `{body}`")))?
                .trim();
            if !is_key(name) {
                return Err(at(line, format!("invalid section name `{name}`")));
            }
            if let Some(prev) = sections.iter().find(|s| s.name == name) {
                return Err(at(line, format!("section [{name}] already opened on line {}", prev.line)));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                file: file.to_string(),
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| at(line, format!("expected `key = value`, got `{body}`")))?;
        let key = key.trim();
        if !is_key(key) {
            return Err(at(line, format!("invalid key `{key}`")));
        }
        let mut value = value.trim();
        if let Some(inner) = value.strip_prefix('"') {
            value = inner
                .strip_suffix('"')
                .ok_or_else(|| at(line, format!("unterminated quote in `{key}`")))?;
        } else if value.contains('"') {
            return Err(at(line, format!("stray quote in `{key}`")));
        }
        let sec = sections
            .last_mut()
            .ok_or_else(|| at(line, format!("`{key}` appears before any section")))?;
        if let Some(prev) = sec.entries.get(key) {
            return Err(at(
                line,
                format!("[{}].{key} already set on line {}", sec.name, prev.line),
            ));
        }
        sec.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    Ok(Document {
        file: file.to_string(),
        sections,
    })
}

impl Document {
    /// Remove and return a section.
    pub fn take(&mut self, name: &str) -> Option<Section> {
        let i = self.sections.iter().position(|s| s.name == name)?;
        Some(self.sections.remove(i))
    }

    /// Fails on any section nobody asked for.
    pub fn finish(self, known: &[&str]) -> Result<(), Failure> {
        match self.sections.first() {
            None => Ok(()),
            Some(s) => Err(Failure::validation(
                &self.file,
                s.line,
                format!("unknown section [{}]; expected one of {}", s.name, known.join(", ")),
            )),
        }
    }
}

impl Section {
    pub fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn file(&self) -> &str {
        &self.file
    }

    pub fn fail(&self, line: usize, msg: impl Into<String>) -> Failure {
        Failure::validation(&self.file, line, msg.into())
    }

    pub fn missing(&self, key: &str) -> Failure {
        self.fail(self.line, format!("[{}] needs `{key}`", self.name))
    }

    pub fn number(&mut self, key: &str) -> Result<Option<f64>, Failure> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => {
                let v: f64 = e
                    .value
                    .parse()
                    .map_err(|_| self.fail(e.line, format!("[{}].{key}: `{}` is not a number", self.name, e.value)))?;
                if !v.is_finite() {
                    return Err(self.fail(e.line, format!("[{}].{key} must be finite", self.name)));
                }
                Ok(Some(v))
            }
        }
    }

    pub fn count(&mut self, key: &str) -> Result<Option<usize>, Failure> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| self.fail(e.line, format!("[{}].{key}: `{}` is not a non-negative integer", self.name, e.value))),
        }
    }

    /// Comma-separated numbers.
    pub fn numbers(&mut self, key: &str) -> Result<Option<(Vec<f64>, usize)>, Failure> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => {
                let vals = split_list(&e.value)
                    .iter()
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| self.fail(e.line, format!("[{}].{key}: `{}` is not a list of numbers", self.name, e.value)))?;
                Ok(Some((vals, e.line)))
            }
        }
    }

    /// Fails on the first key nobody consumed.
    pub fn finish(self) -> Result<(), Failure> {
        match self.entries.iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((k, e)) => Err(self.fail(e.line, format!("unknown key `[{}].{k}`", self.name))),
        }
    }
}

pub fn split_list(s: &str) -> Vec<String> {
    if s.trim().is_empty() {
        return Vec::new();
    }
    s.split(',').map(|p| p.trim().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "# header comment\n[system]\ncoords = x, y\npotential = \"-M/r # not a comment\"  # trailing\n\n[run]\ndt = 1e-3\n";

    #[test]
    fn sections_keys_and_lines() {
        let mut doc = parse("a.ini", TEXT).unwrap();
        let mut sys = doc.take("system").unwrap();
        assert_eq!(sys.line, 2);
        assert_eq!(sys.take("coords").unwrap(), Entry { value: "x, y".into(), line: 3 });
        assert_eq!(sys.take("potential").unwrap().value, "-M/r # not a comment");
        sys.finish().unwrap();
        let mut run = doc.take("run").unwrap();
        assert_eq!(run.number("dt").unwrap(), Some(1e-3));
        doc.finish(&[]).unwrap();
    }

    #[test]
    fn unknown_keys_and_sections_are_reported_with_lines() {
        let mut doc = parse("a.ini", "[run]\ndt = 1\nbogus = 2\n[extra]\n").unwrap();
        let mut run = doc.take("run").unwrap();
        run.number("dt").unwrap();
        let e = run.finish().unwrap_err();
        assert_eq!(e.to_string(), "a.ini:3: unknown key `[run].bogus`");
        let e = doc.finish(&["run"]).unwrap_err();
        assert!(e.to_string().starts_with("a.ini:4: unknown section [extra]"));
    }

    #[test]
    fn malformed_input() {
        for (text, line) in [
            ("dt = 1\n", 1),
            ("[run\n", 1),
            ("[run]\ndt 1\n", 2),
            ("[run]\ndt = 1\ndt = 2\n", 3),
            ("[run]\n[run]\n", 2),
            ("[run]\nx = \"abc\n", 2),
            ("[run]\n2x = 1\n", 2),
        ] {
            let e = parse("f", text).unwrap_err();
            assert!(e.to_string().starts_with(&format!("f:{line}:")), "{text:?}: {e}");
        }
    }

    #[test]
    fn numbers_and_lists() {
        let mut doc = parse("f", "[initial]\nq = 1, -2.5, 3e-1\nn = 7\nbad = 1, x\n").unwrap();
        let mut s = doc.take("initial").unwrap();
        assert_eq!(s.numbers("q").unwrap().unwrap().0, vec![1.0, -2.5, 0.3]);
        assert_eq!(s.count("n").unwrap(), Some(7));
        assert!(s.numbers("bad").is_err());
        assert_eq!(split_list(" "), Vec::<String>::new());
    }
}
