use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

use crate::Outcome;

const MANIFEST: &str = r#"{"mode": "sixway", "deals": "games.jsonl", "matches": 12, "players": [
  {"name": "PI", "variant": "PI", "sample_budget": 40, "evaluation_budget": 10, "policy": "policy.json"},
  {"name": "KI", "variant": "KI", "sample_budget": 40, "evaluation_budget": 10, "ki_tables": "ki.json"}]}"#;

/// Every subcommand in `dir`, with all paths relative to it. Returns each
/// primary output (files and stdout) by name.
fn pipeline(dir: &Path, workers: Option<&str>) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut outputs = BTreeMap::new();
    let mut run = |name: &str, args: &[&str]| -> Result<(), String> {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_skatinfer"));
        cmd.current_dir(dir).args(["--seed", "11"]);
        if let Some(w) = workers {
            cmd.args(["--workers", w]);
        }
        let out = cmd.args(args).output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{name}: {}", String::from_utf8_lossy(&out.stderr).trim()));
        }
        outputs.insert(format!("{name} stdout"), out.stdout);
        Ok(())
    };
    run("selfplay", &["--deck", "mini", "selfplay", "--games", "60", "--out", "games.jsonl"])?;
    run("selfplay-full", &["selfplay", "--games", "20", "--out", "full.jsonl"])?;
    run("fit-policy", &["fit-policy", "--logs", "games.jsonl", "--out", "policy.json", "--ki-out", "ki.json"])?;
    run(
        "tssr",
        &[
            "tssr", "--logs", "games.jsonl", "--variants", "NI,PI,PIF,CLI,KI,Cheat", "--budget", "50", "--policy",
            "policy.json", "--ki-tables", "ki.json", "--out", "curve.csv", "--samples", "samples.jsonl",
        ],
    )?;
    run(
        "tssr-full",
        &[
            "tssr", "--logs", "full.jsonl", "--variants", "NI,PI", "--budget", "40", "--policy", "heuristic", "--injection",
            "hypergeometric", "--games", "3", "--out", "full_curve.csv",
        ],
    )?;
    fs::write(dir.join("manifest.json"), MANIFEST).map_err(|e| e.to_string())?;
    run("tournament", &["tournament", "--manifest", "manifest.json", "--out-dir", "t", "--block", "5"])?;
    run("replay", &["replay", "--logs", "games.jsonl", "--out", "replay.jsonl"])?;
    let game = first_declared_game(&dir.join("games.jsonl"))?;
    run(
        "trace-inference",
        &["trace-inference", "--logs", "games.jsonl", "--game", &game, "--variant", "PIF", "--budget", "200", "--policy", "policy.json", "--out", "trace.json"],
    )?;
    for file in [
        "games.jsonl", "full.jsonl", "policy.json", "ki.json", "curve.csv", "samples.jsonl", "full_curve.csv",
        "t/checkpoint.jsonl", "t/report.json", "t/report.csv", "replay.jsonl", "trace.json",
    ] {
        outputs.insert(file.to_string(), fs::read(dir.join(file)).map_err(|e| format!("{file}: {e}"))?);
    }
    Ok(outputs)
}

fn first_declared_game(log: &Path) -> Result<String, String> {
    let text = fs::read_to_string(log).map_err(|e| e.to_string())?;
    text.lines()
        .skip(1)
        .filter_map(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .find(|g| !g["declaration"].is_null())
        .and_then(|g| g["id"].as_u64())
        .map(|id| id.to_string())
        .ok_or_else(|| "no declared game in the log".to_string())
}

fn differing(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    a.iter().filter(|(k, v)| b.get(*k) != Some(*v)).map(|(k, _)| k.clone()).collect()
}

pub fn byte_identical_reruns() -> Outcome {
    let dirs: Vec<TempDir> = (0..3).map(|_| TempDir::new().expect("temp dir")).collect();
    let runs: Result<Vec<_>, String> = [None, None, Some("1")]
        .iter()
        .zip(&dirs)
        .map(|(w, d)| pipeline(d.path(), *w))
        .collect();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("a command failed: {e}")),
    };
    let rerun = differing(&runs[0], &runs[1]);
    let workers = differing(&runs[0], &runs[2]);
    let bytes: usize = runs[0].values().map(Vec::len).sum();
    Outcome::new(
        rerun.is_empty() && workers.is_empty(),
        format!(
            "{} outputs of 6 subcommands ({bytes} bytes): rerun differs in {rerun:?}, one worker differs in {workers:?}",
            runs[0].len()
        ),
    )
}
