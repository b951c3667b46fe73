//! Key-value config files. Each `key = value` line stands for `--key=value`;
//! flags given on the command line take precedence.

use std::collections::BTreeSet;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                i + 1
            )));
        };
        let key = key.trim().trim_start_matches("--").to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(CliError::Config(format!("line {}: missing key", i + 1)));
        }
        if !seen.insert(key.clone()) {
            return Err(CliError::Config(format!(
                "line {}: key `{key}` given twice",
                i + 1
            )));
        }
        out.push(Entry {
            line: i + 1,
            key,
            value,
        });
    }
    Ok(out)
}

/// Location of `--config` in the raw arguments, if any.
fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    args.iter()
        .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

/// Splices config entries into `args` as flags, ahead of the user's own.
pub fn expand(mut args: Vec<String>, cmd: &clap::Command) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: Path::new(&path).to_path_buf(),
        source,
    })?;
    let entries = parse(&text)?;

    let has_sub = args.get(1).is_some_and(|a| !a.starts_with('-'));
    if let Some(e) = entries.iter().find(|e| e.key == "command") {
        if !has_sub {
            args.insert(1, e.value.clone());
        }
    }
    let Some(name) = args.get(1).filter(|a| !a.starts_with('-')).cloned() else {
        return Err(CliError::Config(
            "no subcommand on the command line or under key `command`".into(),
        ));
    };
    let Some(sub) = cmd.find_subcommand(&name) else {
        // leave the diagnostics to clap
        return Ok(args);
    };

    let mut extra = Vec::new();
    for e in entries.iter().filter(|e| e.key != "command") {
        let known = e.key != "config"
            && sub
                .get_arguments()
                .any(|a| a.get_long() == Some(e.key.as_str()));
        if !known {
            return Err(CliError::Config(format!(
                "{path}, line {}: unknown key `{}` for `{name}`",
                e.line, e.key
            )));
        }
        if !given(&args, &e.key) {
            extra.push(format!("--{}={}", e.key, e.value));
        }
    }
    args.splice(2..2, extra);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_spacing() {
        let e = parse("# sweep\n\na = -0.5\n--xi=-8:2:0.25\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(
            (e[0].key.as_str(), e[0].value.as_str(), e[0].line),
            ("a", "-0.5", 3)
        );
        assert_eq!(
            (e[1].key.as_str(), e[1].value.as_str()),
            ("xi", "-8:2:0.25")
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse("a -0.5").is_err());
        assert!(parse("= 3").is_err());
        let err = parse("a = 1\na = 2").unwrap_err().to_string();
        assert!(err.contains("`a`"), "{err}");
    }

    #[test]
    fn finds_config_flag() {
        let v = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(
            config_path(&v(&["m", "minimize", "--config", "c.txt"])).as_deref(),
            Some("c.txt")
        );
        assert_eq!(
            config_path(&v(&["m", "--config=c.txt"])).as_deref(),
            Some("c.txt")
        );
        assert_eq!(config_path(&v(&["m", "minimize", "--a=-1"])), None);
    }
}
