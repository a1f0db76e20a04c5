use std::path::Path;

use crate::alloc::GainVector;
use crate::{Error, Result};

/// Parses a gain file: a header line `# gamma=<Γ> pmax=<P_max>` followed by
/// one normalized gain per line. Blank lines are skipped.
pub fn parse_gain_file(text: &str) -> Result<GainVector<f64>> {
    let err = |message: String| Error::Parse {
        what: "gain file".into(),
        message,
    };
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| err("file is empty".into()))?
        .strip_prefix('#')
        .ok_or_else(|| err("first line must be `# gamma=<val> pmax=<val>`".into()))?;

    let (mut gamma, mut pmax) = (None, None);
    for field in header.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| err(format!("bad header field `{field}`")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| err(format!("bad number `{v}` for {k}")))?;
        match k {
            "gamma" => gamma = Some(v),
            "pmax" => pmax = Some(v),
            _ => return Err(err(format!("unknown header field `{k}`"))),
        }
    }
    let gamma = gamma.ok_or_else(|| err("header lacks gamma".into()))?;
    let pmax = pmax.ok_or_else(|| err("header lacks pmax".into()))?;

    let gains = lines
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|_| err(format!("gain {i}: `{l}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    GainVector::new(gains, gamma, pmax)
}

pub fn read_gain_file(path: &Path) -> Result<GainVector<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gain_file(&text)
}
