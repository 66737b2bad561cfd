//! Integer-sequence corpus files.
//!
//! One sequence per line, token ids separated by whitespace. Blank lines and
//! lines starting with `#` are skipped.

use std::path::Path;

use crate::domain::{TokenId, Vocabulary};
use crate::error::{Error, Result};

pub fn parse_corpus(text: &str, vocab: Vocabulary) -> Result<Vec<Vec<TokenId>>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let seq = line
            .split_whitespace()
            .map(|tok| {
                let id: TokenId = tok
                    .parse()
                    .map_err(|_| Error::Config(format!("corpus line {}: `{tok}` is not a token id", lineno + 1)))?;
                if !vocab.is_real(id) {
                    return Err(Error::Config(format!(
                        "corpus line {}: token {id} outside vocabulary of size {}",
                        lineno + 1,
                        vocab.size()
                    )));
                }
                Ok(id)
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(seq);
    }
    Ok(out)
}

pub fn load_corpus(path: &Path, vocab: Vocabulary) -> Result<Vec<Vec<TokenId>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read corpus {}: {e}", path.display())))?;
    parse_corpus(&text, vocab)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines_and_skips_comments() {
        let v = Vocabulary::new(5).unwrap();
        let c = parse_corpus("# toy\n0 1 2\n\n  3 4 \n", v).unwrap();
        assert_eq!(c, vec![vec![0, 1, 2], vec![3, 4]]);
    }

    #[test]
    fn rejects_bad_tokens() {
        let v = Vocabulary::new(5).unwrap();
        assert!(parse_corpus("0 x 2", v).is_err());
        assert!(parse_corpus("0 5", v).is_err());
        assert!(parse_corpus("-1", v).is_err());
    }
}
