//! Versioned plain-text model snapshots.
//!
//! ```text
//! prefgp-model 1
//! kernel anchored_rbf
//! theta 1
//! jitter 0.00000001
//! sigma 1
//! anchor 0.5 0.5
//! points 2
//! 0.1 0.9
//! 0.8 0.3
//! data 1
//! 0 1 first
//! mode 2
//! 0.31 -0.27
//! ```
//!
//! Floats are written in shortest round-trip form, so a snapshot reloads to
//! bit-identical inputs. Loading refits the posterior and checks the result
//! against the stored mode.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::gp_pref::{fit, GpPosterior, Preference, PreferenceDatum};
use crate::kernel::{FeatureVector, KernelConfig, KernelKind};

const MAGIC: &str = "prefgp-model";
const VERSION: u32 = 1;

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_snapshot<W: Write>(model: &GpPosterior, mut out: W) -> Result<()> {
    let k = model.kernel();
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "kernel {}", k.kind.as_str())?;
    writeln!(out, "theta {}", k.theta)?;
    writeln!(out, "jitter {}", k.jitter)?;
    writeln!(out, "sigma {}", model.sigma())?;
    writeln!(out, "anchor {}", join(k.anchor.as_slice()))?;
    writeln!(out, "points {}", model.points().len())?;
    for p in model.points() {
        writeln!(out, "{}", join(p.as_slice()))?;
    }
    writeln!(out, "data {}", model.data().len())?;
    for d in model.data() {
        let response = match d.response {
            Preference::First => "first",
            Preference::Second => "second",
        };
        writeln!(out, "{} {} {response}", d.first, d.second)?;
    }
    writeln!(out, "mode {}", model.mode().len())?;
    writeln!(out, "{}", join(model.mode().as_slice()))?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    lineno: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        loop {
            self.lineno += 1;
            let line = self
                .inner
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of snapshot at line {}", self.lineno)))??;
            if !line.trim().is_empty() {
                return Ok(line);
            }
        }
    }

    fn keyed(&mut self, key: &str) -> Result<String> {
        let line = self.next_line()?;
        let (k, rest) = line.split_once(' ').unwrap_or((line.as_str(), ""));
        if k != key {
            return Err(Error::Parse(format!("line {}: expected `{key}`, found `{k}`", self.lineno)));
        }
        Ok(rest.trim().to_string())
    }

    fn err(&self, what: impl std::fmt::Display) -> Error {
        Error::Parse(format!("line {}: {what}", self.lineno))
    }
}

fn floats(s: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    s.split_whitespace().map(str::parse).collect()
}

pub fn read_snapshot<R: BufRead>(input: R) -> Result<GpPosterior> {
    let mut lines = Lines { inner: input.lines(), lineno: 0 };
    let version = lines.keyed(MAGIC)?;
    if version != VERSION.to_string() {
        return Err(lines.err(format!("unsupported snapshot version {version}")));
    }
    let kind: KernelKind = lines.keyed("kernel")?.parse()?;
    let theta: f64 = lines.keyed("theta")?.parse().map_err(|e| lines.err(e))?;
    let jitter: f64 = lines.keyed("jitter")?.parse().map_err(|e| lines.err(e))?;
    let sigma: f64 = lines.keyed("sigma")?.parse().map_err(|e| lines.err(e))?;
    let anchor = FeatureVector::new(floats(&lines.keyed("anchor")?).map_err(|e| lines.err(e))?)?;
    let kernel = KernelConfig { kind, theta, anchor, jitter }.validated()?;

    let n: usize = lines.keyed("points")?.parse().map_err(|e| lines.err(e))?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let coords = floats(&lines.next_line()?).map_err(|e| lines.err(e))?;
        points.push(FeatureVector::new(coords)?);
    }

    let m: usize = lines.keyed("data")?.parse().map_err(|e| lines.err(e))?;
    let mut data = Vec::with_capacity(m);
    for _ in 0..m {
        let line = lines.next_line()?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [first, second, response] = fields.as_slice() else {
            return Err(lines.err("datum needs `first second response`"));
        };
        let response = match *response {
            "first" => Preference::First,
            "second" => Preference::Second,
            other => return Err(lines.err(format!("bad response `{other}`"))),
        };
        data.push(PreferenceDatum::new(
            first.parse().map_err(|e| lines.err(e))?,
            second.parse().map_err(|e| lines.err(e))?,
            response,
        )?);
    }

    let mode_len: usize = lines.keyed("mode")?.parse().map_err(|e| lines.err(e))?;
    let stored_mode = if mode_len == 0 {
        Vec::new()
    } else {
        floats(&lines.next_line()?).map_err(|e| lines.err(e))?
    };
    if stored_mode.len() != n {
        return Err(Error::Parse(format!("mode has {} entries for {n} points", stored_mode.len())));
    }

    let model = fit(points, data, kernel, sigma)?;
    if model.mode().as_slice() != stored_mode.as_slice() {
        return Err(Error::Parse("refitted mode differs from the stored mode".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let kernel = KernelConfig::default_for(KernelKind::AnchoredRbf, 2);
        let pts = vec![
            FeatureVector::new(vec![0.1, 0.9]).unwrap(),
            FeatureVector::new(vec![0.8, 0.3]).unwrap(),
            FeatureVector::new(vec![1.0 / 3.0, 0.7]).unwrap(),
        ];
        let data = vec![
            PreferenceDatum::new(0, 1, Preference::First).unwrap(),
            PreferenceDatum::new(2, 1, Preference::Second).unwrap(),
        ];
        let model = fit(pts, data, kernel, 0.8).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&model, &mut buf).unwrap();
        let back = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back.mode(), model.mode());
        assert_eq!(back.points(), model.points());
        assert_eq!(back.data(), model.data());
        assert_eq!(back.sigma(), model.sigma());
    }

    #[test]
    fn empty_model_round_trips() {
        let model = GpPosterior::prior(KernelConfig::default_for(KernelKind::Linear, 3), 1.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&model, &mut buf).unwrap();
        let back = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back.kernel(), model.kernel());
    }

    #[test]
    fn rejects_unknown_version_and_tampering() {
        assert!(read_snapshot("prefgp-model 2\n".as_bytes()).is_err());
        let kernel = KernelConfig::default_for(KernelKind::AnchoredRbf, 1);
        let pts = vec![FeatureVector::new(vec![0.1]).unwrap(), FeatureVector::new(vec![0.9]).unwrap()];
        let model = fit(pts, vec![PreferenceDatum::new(0, 1, Preference::First).unwrap()], kernel, 1.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&model, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("0 1 first", "0 1 second");
        assert!(read_snapshot(text.as_bytes()).is_err());
    }
}
