//! Problem directories: `prompt.txt`, `testbench.sv`, optional `ref.sv`,
//! `interface.sv` and `meta.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use verisure_core::bench::{measure, score, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifficultySource {
    Meta,
    Computed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemManifest {
    pub id: String,
    pub dir: PathBuf,
    pub prompt: String,
    pub interface_stub: Option<String>,
    pub testbench: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub difficulty: Option<Label>,
    pub difficulty_source: Option<DifficultySource>,
    pub success_regex: Option<String>,
    /// Simulation top module.
    pub top: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("problem {id}: {message}")]
pub struct ManifestError {
    pub id: String,
    pub dir: PathBuf,
    pub message: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    difficulty: Option<String>,
    success_regex: Option<String>,
    top: Option<String>,
}

fn err(id: &str, dir: &Path, message: impl Into<String>) -> ManifestError {
    ManifestError {
        id: id.to_string(),
        dir: dir.to_path_buf(),
        message: message.into(),
    }
}

fn opt_file(p: PathBuf) -> Option<PathBuf> {
    p.is_file().then_some(p)
}

/// Load one problem. Without `require_testbench` a missing harness means
/// the Verifier writes one.
pub fn load_problem(dir: &Path, require_testbench: bool) -> Result<ProblemManifest, ManifestError> {
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    let prompt = std::fs::read_to_string(dir.join("prompt.txt"))
        .map_err(|e| err(&id, dir, format!("prompt.txt: {e}")))?;
    let testbench = opt_file(dir.join("testbench.sv"));
    if require_testbench && testbench.is_none() {
        return Err(err(&id, dir, "testbench.sv is missing"));
    }
    let meta: Meta = match std::fs::read_to_string(dir.join("meta.json")) {
        Ok(t) => serde_json::from_str(&t).map_err(|e| err(&id, dir, format!("meta.json: {e}")))?,
        Err(_) => Meta::default(),
    };
    if let Some(r) = meta.success_regex_check() {
        return Err(err(&id, dir, r));
    }
    let mut m = ProblemManifest {
        interface_stub: std::fs::read_to_string(dir.join("interface.sv")).ok(),
        reference: opt_file(dir.join("ref.sv")),
        id,
        dir: dir.to_path_buf(),
        prompt,
        testbench,
        difficulty: None,
        difficulty_source: None,
        success_regex: meta.success_regex,
        top: meta.top,
        warnings: Vec::new(),
    };
    let computed = m.reference.as_ref().and_then(|r| {
        let src = std::fs::read_to_string(r).ok()?;
        match measure(&src) {
            Ok((metrics, w)) => {
                m.warnings.extend(w.into_iter().map(|w| format!("ref.sv: {w}")));
                Some(score(&metrics).label)
            }
            Err(e) => {
                m.warnings.push(format!("ref.sv not graded: {e}"));
                None
            }
        }
    });
    match meta.difficulty.as_deref() {
        Some(s) => {
            let l = Label::parse(s).ok_or_else(|| err(&m.id, dir, format!("meta.json: unknown difficulty `{s}`")))?;
            if computed.is_some_and(|c| c != l) {
                m.warnings.push(format!(
                    "meta difficulty {l} overrides computed {}",
                    computed.unwrap()
                ));
            }
            m.difficulty = Some(l);
            m.difficulty_source = Some(DifficultySource::Meta);
        }
        None => {
            m.difficulty = computed;
            m.difficulty_source = computed.map(|_| DifficultySource::Computed);
        }
    }
    Ok(m)
}

impl Meta {
    fn success_regex_check(&self) -> Option<String> {
        let r = self.success_regex.as_ref()?;
        regex::Regex::new(r).err().map(|e| format!("meta.json success_regex: {e}"))
    }
}

/// Every problem subdirectory of `dir`, in name order. Broken problems are
/// collected, not fatal.
pub fn load_manifests(dir: &Path) -> std::io::Result<(Vec<ProblemManifest>, Vec<ManifestError>)> {
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for d in subdirs {
        match load_problem(&d, true) {
            Ok(m) => ok.push(m),
            Err(e) => bad.push(e),
        }
    }
    Ok((ok, bad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(root: &Path, id: &str, files: &[(&str, &str)]) {
        let d = root.join(id);
        std::fs::create_dir_all(&d).unwrap();
        for (n, t) in files {
            std::fs::write(d.join(n), t).unwrap();
        }
    }

    #[test]
    fn precedence_and_isolation() {
        let root = tempfile::tempdir().unwrap();
        let small = "module m(input a, output y);\n  assign y = a;\nendmodule\n";
        problem(root.path(), "a_meta", &[
            ("prompt.txt", "p"), ("testbench.sv", "module tb; endmodule"),
            ("ref.sv", small), ("meta.json", r#"{"difficulty": "Hard"}"#),
        ]);
        problem(root.path(), "b_ref", &[("prompt.txt", "p"), ("testbench.sv", "module tb; endmodule"), ("ref.sv", small)]);
        problem(root.path(), "c_no_tb", &[("prompt.txt", "p")]);
        let (ok, bad) = load_manifests(root.path()).unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(ok[0].difficulty, Some(Label::Hard));
        assert_eq!(ok[0].difficulty_source, Some(DifficultySource::Meta));
        assert_eq!(ok[0].warnings.len(), 1);
        assert_eq!(ok[1].difficulty, Some(Label::Easy));
        assert_eq!(ok[1].difficulty_source, Some(DifficultySource::Computed));
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].id, "c_no_tb");
    }
}
