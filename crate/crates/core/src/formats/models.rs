//! JSON parameter files for hidden Markov and pair hidden Markov models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::{HmmParams, InitMode};
use crate::pairhmm::PairHmmParams;

#[derive(Serialize, Deserialize)]
struct HmmJson {
    k: usize,
    l: usize,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
    #[serde(rename = "T")]
    t: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    init: Option<Vec<f64>>,
    mode: InitMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
}

/// Model parameters plus the optional names of the output symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    pub params: HmmParams,
    pub alphabet: Option<Vec<String>>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(e.column(), format!("line {}: {e}", e.line()))
}

/// `{k, l, S, T, init?, mode, states?, alphabet?}`; `init` defaults to all
/// ones (paper-exact) or uniform (stochastic).
pub fn parse_hmm_json(text: &str) -> Result<HmmModel> {
    let j: HmmJson = serde_json::from_str(text).map_err(json_error)?;
    if j.s.len() != j.k {
        return Err(Error::DimensionMismatch {
            what: "rows of S".into(),
            expected: j.k,
            found: j.s.len(),
        });
    }
    if let Some(bad) = j.t.iter().position(|row| row.len() != j.l) {
        return Err(Error::DimensionMismatch {
            what: format!("entries in row {bad} of T"),
            expected: j.l,
            found: j.t[bad].len(),
        });
    }
    let init = j.init.unwrap_or_else(|| match j.mode {
        InitMode::PaperExact => vec![1.0; j.k],
        InitMode::Stochastic => vec![1.0 / j.k as f64; j.k],
    });
    let mut params = HmmParams::new(j.s, j.t, init, j.mode)?;
    if let Some(states) = j.states {
        params = params.with_labels(states)?;
    }
    if let Some(alphabet) = &j.alphabet {
        if alphabet.len() != j.l {
            return Err(Error::DimensionMismatch {
                what: "alphabet symbols".into(),
                expected: j.l,
                found: alphabet.len(),
            });
        }
    }
    Ok(HmmModel {
        params,
        alphabet: j.alphabet,
    })
}

pub fn emit_hmm_json(model: &HmmModel) -> String {
    let p = &model.params;
    serde_json::to_string_pretty(&HmmJson {
        k: p.states(),
        l: p.symbols(),
        s: p.transitions().to_vec(),
        t: p.emissions().to_vec(),
        init: Some(p.init().to_vec()),
        mode: p.mode(),
        states: Some(p.labels().to_vec()),
        alphabet: model.alphabet.clone(),
    })
    .expect("finite numbers serialize")
}

/// One observation per non-blank line (`#` starts a comment line). Symbols
/// are whitespace-separated tokens, or single characters when the line has
/// no whitespace; they are looked up in `alphabet` or read as indices.
pub fn parse_observations(text: &str, alphabet: Option<&[String]>) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.trim();
        let lead = line.len() - line.trim_start().len();
        if !content.is_empty() && !content.starts_with('#') {
            let tokens: Vec<(usize, &str)> = if content.contains(char::is_whitespace) {
                content
                    .split_whitespace()
                    .map(|t| (t.as_ptr() as usize - content.as_ptr() as usize, t))
                    .collect()
            } else {
                content.char_indices().map(|(i, c)| (i, &content[i..i + c.len_utf8()])).collect()
            };
            let symbols = tokens
                .into_iter()
                .map(|(at, tok)| {
                    let found = match alphabet {
                        Some(a) => a.iter().position(|s| s == tok),
                        None => tok.parse().ok(),
                    };
                    found.ok_or_else(|| Error::parse(offset + lead + at, format!("unknown symbol {tok:?}")))
                })
                .collect::<Result<Vec<usize>>>()?;
            out.push(symbols);
        }
        offset += line.len();
    }
    if out.is_empty() {
        return Err(Error::Empty("no observations".into()));
    }
    Ok(out)
}

/// `{S, tM, tI, tD}` with transition rows and columns ordered `M, I, D` and
/// nucleotides ordered `A, C, G, T`.
pub fn parse_pair_hmm_json(text: &str) -> Result<PairHmmParams> {
    let p: PairHmmParams = serde_json::from_str(text).map_err(json_error)?;
    p.validate()?;
    Ok(p)
}
