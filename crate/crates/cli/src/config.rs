//! `key = value` settings file. Blank lines and `#` comments are ignored;
//! flags given on the command line win over the file.

use std::path::Path;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileConfig {
    pub tol: Option<f64>,
    pub step_tol: Option<f64>,
    pub samples: Option<usize>,
    pub t_samples: Option<usize>,
    pub rings: Option<usize>,
    pub pole: Option<[f64; 4]>,
}

pub fn parse_pole(text: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("pole needs four comma-separated numbers, got {text:?}"));
    }
    let mut out = [0.0; 4];
    for (o, s) in out.iter_mut().zip(&parts) {
        *o = s.parse().map_err(|_| format!("bad pole component {s:?}"))?;
    }
    Ok(out)
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("config key {key}: cannot parse {value:?}"))
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = FileConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "tol" => cfg.tol = Some(number(key, value)?),
                "step_tol" => cfg.step_tol = Some(number(key, value)?),
                "samples" => cfg.samples = Some(number(key, value)?),
                "t_samples" => cfg.t_samples = Some(number(key, value)?),
                "rings" => cfg.rings = Some(number(key, value)?),
                "pole" => cfg.pole = Some(parse_pole(value)?),
                _ => return Err(format!("line {}: unknown key {key:?}", lineno + 1)),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = FileConfig::parse("# sweep settings\ntol = 1e-9\n\nsamples=256 # per period\npole = 0, 0, 1, 0\n").unwrap();
        assert_eq!(cfg.tol, Some(1e-9));
        assert_eq!(cfg.samples, Some(256));
        assert_eq!(cfg.pole, Some([0.0, 0.0, 1.0, 0.0]));
        assert_eq!(cfg.step_tol, None);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(FileConfig::parse("speed = 3").is_err());
        assert!(FileConfig::parse("tol 1e-9").is_err());
        assert!(FileConfig::parse("tol = fast").is_err());
        assert!(parse_pole("1,2,3").is_err());
    }
}
