//! Flat key=value configuration.
//!
//! Keys are the long flag names with underscores instead of dashes. Lookup
//! order for every input: explicit flag, then config file, then built-in
//! default. The file named by --config wins over QSCATTER_CONFIG.

use crate::CliError;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Default)]
pub struct Config {
    map: BTreeMap<String, String>,
}

pub fn load(flag: Option<&Path>) -> Result<Config, CliError> {
    let path = match flag {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os("QSCATTER_CONFIG").map(Into::into),
    };
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config {}, line {}: expected key=value, got '{raw}'",
                path.display(),
                ln + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(Config { map })
}

impl Config {
    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                CliError::Usage(format!("config key '{key}': cannot parse '{raw}'"))
            }),
        }
    }

    pub fn f64(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        Ok(flag.or(self.parse(key)?).unwrap_or(default))
    }

    pub fn f64_opt(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        Ok(flag.or(self.parse(key)?))
    }

    pub fn usize(&self, key: &str, flag: Option<usize>, default: usize) -> Result<usize, CliError> {
        Ok(flag.or(self.parse(key)?).unwrap_or(default))
    }

    pub fn usize_opt(&self, key: &str, flag: Option<usize>) -> Result<Option<usize>, CliError> {
        Ok(flag.or(self.parse(key)?))
    }

    pub fn list(
        &self,
        key: &str,
        flag: Option<Vec<f64>>,
        default: &[f64],
    ) -> Result<Vec<f64>, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| {
                        CliError::Usage(format!("config key '{key}': cannot parse '{raw}'"))
                    })
                })
                .collect(),
        }
    }

    pub fn complex(
        &self,
        key: &str,
        flag: Option<&str>,
        default: &str,
    ) -> Result<Complex64, CliError> {
        let raw = flag.or(self.map.get(key).map(String::as_str)).unwrap_or(default);
        parse_complex(raw).map_err(CliError::Usage)
    }
}

/// Parses `a+bi` complex literals: `0.5`, `0.4i`, `0+0.4i`, `-1e-3-2i`, `i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim();
    let Some(body) = t.strip_suffix('i') else {
        return t
            .parse()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| format!("cannot parse '{s}' as a complex number"));
    };
    // split real+imag at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re_str, im_str) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let re: f64 = re_str
        .parse()
        .map_err(|_| format!("cannot parse the real part of '{s}'"))?;
    let im: f64 = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other
            .parse()
            .map_err(|_| format!("cannot parse the imaginary part of '{s}'"))?,
    };
    Ok(Complex64::new(re, im))
}

/// Full-precision `a+bi` rendering that [`parse_complex`] reads back exactly.
pub fn format_complex(z: Complex64) -> String {
    if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.4i").unwrap(), Complex64::new(0.0, 0.4));
        assert_eq!(parse_complex("0+0.4i").unwrap(), Complex64::new(0.0, 0.4));
        assert_eq!(parse_complex("10+10i").unwrap(), Complex64::new(10.0, 10.0));
        assert_eq!(parse_complex("-1.5e-3-2i").unwrap(), Complex64::new(-1.5e-3, -2.0));
        assert_eq!(parse_complex("1e-3i").unwrap(), Complex64::new(0.0, 1e-3));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert!(parse_complex("banana").is_err());
        assert!(parse_complex("1+2j").is_err());
    }

    #[test]
    fn complex_round_trip() {
        for z in [
            Complex64::new(0.1, -0.25),
            Complex64::new(0.0, 0.4),
            Complex64::new(-3.0, 0.0),
        ] {
            let back = parse_complex(&format_complex(z)).unwrap();
            assert_eq!(back, z);
        }
    }
}
