use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or malformed input: exit 2.
    Usage(String),
    /// A check or certificate failed: exit 3.
    Check(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Check(m) => f.write_str(m),
        }
    }
}

impl From<gowers_core::Error> for Failure {
    fn from(e: gowers_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::Usage(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, inner, out);
            }
        }
        Value::Array(items) if items.len() > 8 => {
            out.insert(prefix.to_string(), format!("[{} items]", items.len()));
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

/// Write `v` as JSON to `out` if given; print it to stdout as JSON or as
/// `key: value` lines.
pub fn emit(v: &Value, out: Option<&Path>, json: bool) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("serializable output") + "\n";
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    if json {
        print!("{text}");
    } else if out.is_none() {
        let mut lines = BTreeMap::new();
        flatten("", v, &mut lines);
        for (k, val) in lines {
            println!("{k}: {val}");
        }
    }
    Ok(())
}

/// `key=value,key=value`.
pub fn parse_params(s: &str) -> Result<BTreeMap<String, String>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| match p.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => Err(Failure::Usage(format!("parameter `{p}` is not key=value"))),
        })
        .collect()
}

pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn parse(s: &str) -> Result<Self, Failure> {
        parse_params(s).map(Params)
    }

    pub fn get<T: std::str::FromStr>(&self, keys: &[&str]) -> Result<Option<T>, Failure> {
        for k in keys {
            if let Some(v) = self.0.get(*k) {
                return v.parse().map(Some).map_err(|_| Failure::Usage(format!("cannot parse {k}={v}")));
            }
        }
        Ok(None)
    }

    pub fn require<T: std::str::FromStr>(&self, keys: &[&str]) -> Result<T, Failure> {
        self.get(keys)?.ok_or_else(|| Failure::Usage(format!("missing parameter {}", keys[0])))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}
